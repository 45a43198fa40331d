//! Rebuilding a surface from (λ, μ, ν) given in canonical parameters.
//!
//! With a = 1/√|μ| the frame and position obey the linear system
//! ∂_u [x y b l z] = [x y b l z]·M_u and ∂_v [x y b l z] = [x y b l z]·M_v, with
//! M = [[a ω, a e], [0, 0]], where ω is the frame connection with β₁ = β₂ = 0 and
//! ν₁ = ν₂ = ν, and e is the first (for u) or second (for v) unit column.
//! The γ's are γ₁ = (√|μ|)_v and γ₂ = (√|μ|)_u.

use nalgebra::{Matrix4, SMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame_invariants::{frame_connection, sweep_functions, GeometricFunctions};
use crate::pde::{GridField, MU_FLOOR};
use crate::pseudo_euclidean::{basis, gram_defect, orthonormalize, Ambient, Epsilon, Signature, Vector4};
use crate::surface::{Bounds, ParamDomain, SurfaceMap};

type State = SMatrix<f64, 4, 5>;
type Generator = SMatrix<f64, 5, 5>;

/// Default bound on frame orthonormality drift.
pub const DEFAULT_DRIFT_BOUND: f64 = 1e-6;

/// Position and frame at one node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameState {
    pub z: [f64; 4],
    pub x: [f64; 4],
    pub y: [f64; 4],
    pub b: [f64; 4],
    pub l: [f64; 4],
}

fn arr(v: Vector4) -> [f64; 4] {
    [v[0], v[1], v[2], v[3]]
}

impl FrameState {
    pub fn new(z: Vector4, x: Vector4, y: Vector4, b: Vector4, l: Vector4) -> Self {
        FrameState { z: arr(z), x: arr(x), y: arr(y), b: arr(b), l: arr(l) }
    }

    /// z = 0 and the standard basis, ordered so that ⟨b, b⟩ = ε and det[x, y, b, l] = 1.
    pub fn standard(ambient: Ambient) -> Self {
        let (b, l) = match ambient {
            Ambient::Minkowski(Epsilon::Timelike) => (basis(3), -basis(2)),
            _ => (basis(2), basis(3)),
        };
        Self::new(Vector4::zeros(), basis(0), basis(1), b, l)
    }

    pub fn frame(&self) -> [Vector4; 4] {
        [self.x.into(), self.y.into(), self.b.into(), self.l.into()]
    }

    pub fn position(&self) -> Vector4 {
        self.z.into()
    }

    fn to_state(self) -> State {
        let [x, y, b, l] = self.frame();
        State::from_columns(&[x, y, b, l, self.position()])
    }

    fn from_state(s: &State) -> Self {
        let c = |k: usize| -> Vector4 { s.column(k).into_owned() };
        Self::new(c(4), c(0), c(1), c(2), c(3))
    }

    /// Orthonormality defect of the frame against diag(1, 1, g_b, g_l).
    pub fn drift(&self, ambient: Ambient) -> f64 {
        gram_defect(&self.frame(), ambient.signature(), &ambient.frame_metric())
    }

    /// Ambient linear map applied to every vector.
    pub fn transformed(&self, q: &Matrix4<f64>) -> Self {
        let [x, y, b, l] = self.frame();
        Self::new(q * self.position(), q * x, q * y, q * b, q * l)
    }
}

/// (λ, μ, ν) on one canonical grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSet {
    pub lam: GridField,
    pub mu: GridField,
    pub nu: GridField,
}

impl FieldSet {
    pub fn new(lam: GridField, mu: GridField, nu: GridField) -> Result<Self> {
        let d = lam.domain()?;
        for f in [&mu, &nu] {
            if f.n_u != lam.n_u || f.n_v != lam.n_v || f.domain()? != d {
                return Err(Error::ShapeMismatch("λ, μ, ν must share one grid".into()));
            }
        }
        if lam.n_u < 4 || lam.n_v < 4 {
            return Err(Error::GridTooSmall { n_u: lam.n_u, n_v: lam.n_v });
        }
        if mu.values.iter().any(|m| !(m.abs() >= MU_FLOOR)) {
            return Err(Error::MuVanishes);
        }
        if lam.values.iter().chain(&nu.values).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("λ and ν must be finite on the whole grid".into()));
        }
        Ok(FieldSet { lam, mu, nu })
    }

    pub fn domain(&self) -> Result<ParamDomain> {
        self.lam.domain()
    }

    fn dims(&self) -> (usize, usize) {
        (self.lam.n_u, self.lam.n_v)
    }
}

/// Coefficient matrices of ∂_u and ∂_v acting on (x, y, b, l) at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectionMatrices {
    pub a_u: Matrix4<f64>,
    pub a_v: Matrix4<f64>,
}

/// Derivative along a grid axis: central inside, second-order one-sided at the ends.
fn axis_derivative(vals: &[f64], h: f64) -> Vec<f64> {
    let n = vals.len();
    (0..n)
        .map(|k| {
            if k == 0 {
                (-3.0 * vals[0] + 4.0 * vals[1] - vals[2]) / (2.0 * h)
            } else if k == n - 1 {
                (3.0 * vals[n - 1] - 4.0 * vals[n - 2] + vals[n - 3]) / (2.0 * h)
            } else {
                (vals[k + 1] - vals[k - 1]) / (2.0 * h)
            }
        })
        .collect()
}

pub fn connection_matrices(fields: &FieldSet, ambient: Ambient) -> Result<Vec<ConnectionMatrices>> {
    let (nu_, nv) = fields.dims();
    let (hu, hv) = fields.lam.spacing;
    let root: Vec<f64> = fields.mu.values.iter().map(|m| m.abs().sqrt()).collect();
    let mut g1 = vec![0.0; root.len()];
    let mut g2 = vec![0.0; root.len()];
    for i in 0..nu_ {
        let row: Vec<f64> = (0..nv).map(|j| root[i * nv + j]).collect();
        for (j, d) in axis_derivative(&row, hv).into_iter().enumerate() {
            g1[i * nv + j] = d;
        }
    }
    for j in 0..nv {
        let col: Vec<f64> = (0..nu_).map(|i| root[i * nv + j]).collect();
        for (i, d) in axis_derivative(&col, hu).into_iter().enumerate() {
            g2[i * nv + j] = d;
        }
    }
    Ok((0..root.len())
        .map(|k| {
            let gf = GeometricFunctions {
                gamma1: g1[k],
                gamma2: g2[k],
                nu1: fields.nu.values[k],
                nu2: fields.nu.values[k],
                lambda: fields.lam.values[k],
                mu: fields.mu.values[k],
                beta1: 0.0,
                beta2: 0.0,
            };
            let (wx, wy) = frame_connection(&gf, ambient);
            let a = 1.0 / root[k];
            ConnectionMatrices { a_u: wx * a, a_v: wy * a }
        })
        .collect())
}

fn generator(c: &ConnectionMatrices, mu: f64, along_u: bool) -> Generator {
    let a = 1.0 / mu.abs().sqrt();
    let mut g = Generator::zeros();
    let block = if along_u { c.a_u } else { c.a_v };
    g.fixed_view_mut::<4, 4>(0, 0).copy_from(&block);
    g[(if along_u { 0 } else { 1 }, 4)] = a;
    g
}

/// Generators at the midpoints between consecutive nodes, by cubic interpolation.
fn midpoints(gs: &[Generator]) -> Vec<Generator> {
    let n = gs.len();
    (0..n - 1)
        .map(|k| {
            if k == 0 {
                (gs[0] * 5.0 + gs[1] * 15.0 - gs[2] * 5.0 + gs[3]) / 16.0
            } else if k == n - 2 {
                (gs[n - 1] * 5.0 + gs[n - 2] * 15.0 - gs[n - 3] * 5.0 + gs[n - 4]) / 16.0
            } else {
                (-gs[k - 1] + gs[k] * 9.0 + gs[k + 1] * 9.0 - gs[k + 2]) / 16.0
            }
        })
        .collect()
}

/// Integrates S′ = S·M along one grid line, returning the state at every node.
fn integrate_line(start: State, gs: &[Generator], h: f64, project: Option<Ambient>) -> Result<Vec<State>> {
    let mids = midpoints(gs);
    let mut out = Vec::with_capacity(gs.len());
    out.push(start);
    let mut s = start;
    for k in 0..gs.len() - 1 {
        let k1 = s * gs[k];
        let k2 = (s + k1 * (0.5 * h)) * mids[k];
        let k3 = (s + k2 * (0.5 * h)) * mids[k];
        let k4 = (s + k3 * h) * gs[k + 1];
        s += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if let Some(amb) = project {
            s = project_state(&s, amb)?;
        }
        out.push(s);
    }
    Ok(out)
}

fn project_state(s: &State, ambient: Ambient) -> Result<State> {
    let cols: Vec<Vector4> = (0..4).map(|k| s.column(k).into_owned()).collect();
    let on = orthonormalize(&cols, ambient.signature(), 1e-12)?;
    let mut out = *s;
    for (k, u) in on.iter().enumerate() {
        out.set_column(k, &u.vector);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub drift_bound: f64,
    /// Re-orthonormalize after every step.
    pub project: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions { drift_bound: DEFAULT_DRIFT_BOUND, project: false }
    }
}

/// Reconstructed frames on the whole grid, row-major with u outer.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructedSurface {
    pub domain: ParamDomain,
    pub ambient: Ambient,
    pub states: Vec<FrameState>,
    /// Largest orthonormality defect over the grid.
    pub drift: f64,
}

impl ReconstructedSurface {
    pub fn at(&self, i: usize, j: usize) -> &FrameState {
        &self.states[i * self.domain.n_v + j]
    }
}

struct Prepared {
    u_gen: Vec<Generator>,
    v_gen: Vec<Generator>,
    n_v: usize,
    h: (f64, f64),
}

impl Prepared {
    fn new(fields: &FieldSet, ambient: Ambient) -> Result<Self> {
        let conn = connection_matrices(fields, ambient)?;
        let mu = &fields.mu.values;
        Ok(Prepared {
            u_gen: conn.iter().zip(mu).map(|(c, &m)| generator(c, m, true)).collect(),
            v_gen: conn.iter().zip(mu).map(|(c, &m)| generator(c, m, false)).collect(),
            n_v: fields.lam.n_v,
            h: fields.lam.spacing,
        })
    }

    fn u_line(&self, j: usize) -> Vec<Generator> {
        let n_u = self.u_gen.len() / self.n_v;
        (0..n_u).map(|i| self.u_gen[i * self.n_v + j]).collect()
    }

    fn v_line(&self, i: usize) -> Vec<Generator> {
        self.v_gen[i * self.n_v..(i + 1) * self.n_v].to_vec()
    }
}

fn check_initial(initial: &FrameState, ambient: Ambient) -> Result<()> {
    let d = initial.drift(ambient);
    if !(d < 1e-10) {
        return Err(Error::InvalidInput(format!("initial frame is not orthonormal for {ambient:?} (defect {d:e})")));
    }
    Ok(())
}

/// Integrates along the first u-line (v = v₀), then along every v-line.
/// `initial` sits at the grid corner (u₀, v₀).
pub fn integrate_surface(
    fields: &FieldSet,
    ambient: Ambient,
    initial: &FrameState,
    opts: &IntegrateOptions,
) -> Result<ReconstructedSurface> {
    check_initial(initial, ambient)?;
    let p = Prepared::new(fields, ambient)?;
    let project = opts.project.then_some(ambient);
    let spine = integrate_line(initial.to_state(), &p.u_line(0), p.h.0, project)?;
    let lines: Vec<Vec<State>> = spine
        .par_iter()
        .enumerate()
        .map(|(i, s0)| integrate_line(*s0, &p.v_line(i), p.h.1, project))
        .collect::<Result<_>>()?;
    let states: Vec<FrameState> = lines.iter().flatten().map(FrameState::from_state).collect();
    let drift = states.iter().map(|s| s.drift(ambient)).fold(0.0, f64::max);
    if drift > opts.drift_bound {
        return Err(Error::DriftExceeded { drift, bound: opts.drift_bound });
    }
    Ok(ReconstructedSurface { domain: fields.domain()?, ambient, states, drift })
}

/// Largest difference, over z, x, y, b, l, between the far-corner states reached
/// by integrating u-then-v and v-then-u.
pub fn compatibility_defect(fields: &FieldSet, ambient: Ambient, initial: &FrameState) -> Result<f64> {
    check_initial(initial, ambient)?;
    let p = Prepared::new(fields, ambient)?;
    let (n_u, n_v) = fields.dims();
    let s0 = initial.to_state();
    let spine_u = integrate_line(s0, &p.u_line(0), p.h.0, None)?;
    let a = *integrate_line(spine_u[n_u - 1], &p.v_line(n_u - 1), p.h.1, None)?.last().unwrap();
    let spine_v = integrate_line(s0, &p.v_line(0), p.h.1, None)?;
    let b = *integrate_line(spine_v[n_v - 1], &p.u_line(n_v - 1), p.h.0, None)?.last().unwrap();
    Ok((0..5).map(|k| (a.column(k) - b.column(k)).norm()).fold(0.0, f64::max))
}

/// A reconstructed surface seen as a parametrized surface defined at the grid
/// nodes only; good for finite-difference jets with the grid spacing as step.
pub struct GridSurface {
    domain: ParamDomain,
    signature: Signature,
    points: Vec<Vector4>,
}

impl GridSurface {
    pub fn new(r: &ReconstructedSurface) -> Self {
        GridSurface {
            domain: r.domain,
            signature: r.ambient.signature(),
            points: r.states.iter().map(|s| s.position()).collect(),
        }
    }

    fn snap(x: f64, lo: f64, h: f64, n: usize) -> Option<usize> {
        let t = (x - lo) / h;
        let k = t.round();
        if (t - k).abs() < 1e-6 && k >= 0.0 && (k as usize) < n {
            Some(k as usize)
        } else {
            None
        }
    }
}

impl SurfaceMap for GridSurface {
    fn signature(&self) -> Signature {
        self.signature
    }

    fn point(&self, u: f64, v: f64) -> Result<Vector4> {
        let d = &self.domain;
        match (Self::snap(u, d.u_min, d.h_u(), d.n_u), Self::snap(v, d.v_min, d.h_v(), d.n_v)) {
            (Some(i), Some(j)) => Ok(self.points[i * d.n_v + j]),
            _ => Err(Error::OutOfDomain { u, v, reach: 0.0 }),
        }
    }

    fn bounds(&self) -> Bounds {
        let d = &self.domain;
        let slack = 1e-9 * d.h_u().min(d.h_v());
        Bounds { u: (d.u_min - slack, d.u_max + slack), v: (d.v_min - slack, d.v_max + slack) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundtripReport {
    /// sup |(|λ_out| − |λ_in|)|
    pub lambda_error: f64,
    /// sup |(|μ_out| − |μ_in|)|
    pub mu_error: f64,
    /// sup |ν_out − ν_in|
    pub nu_error: f64,
    /// Largest of the three.
    pub sup_error: f64,
    pub frame_drift: f64,
    pub compatibility_defect: f64,
    /// Nodes where invariants were re-extracted (three rings in from the boundary).
    pub nodes_compared: usize,
}

/// Reconstructs from `fields`, re-extracts (λ, μ, ν) from the point grid by finite
/// differences with the grid spacing, and compares.
pub fn roundtrip(fields: &FieldSet, ambient: Ambient, opts: &IntegrateOptions) -> Result<RoundtripReport> {
    let initial = FrameState::standard(ambient);
    let rec = integrate_surface(fields, ambient, &initial, opts)?;
    let defect = compatibility_defect(fields, ambient, &initial)?;
    let d = rec.domain;
    if d.n_u < 7 || d.n_v < 7 {
        return Err(Error::GridTooSmall { n_u: d.n_u, n_v: d.n_v });
    }
    let (hu, hv) = (d.h_u(), d.h_v());
    if (hu - hv).abs() > 1e-9 * hu.max(hv) {
        return Err(Error::InvalidInput(format!("round trip needs equal grid spacings, got {hu} and {hv}")));
    }
    let inner = ParamDomain::new(d.u_at(3), d.u_at(d.n_u - 4), d.v_at(3), d.v_at(d.n_v - 4), d.n_u - 6, d.n_v - 6)?;
    let surf = GridSurface::new(&rec);
    let grid = sweep_functions(&surf, &inner, ambient.signature(), hu)?;
    let (mut le, mut me, mut ne): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for i in 0..inner.n_u {
        for j in 0..inner.n_v {
            let f = grid.at(i, j).functions;
            let k = (i + 3) * d.n_v + (j + 3);
            le = le.max((f.lambda.abs() - fields.lam.values[k].abs()).abs());
            me = me.max((f.mu.abs() - fields.mu.values[k].abs()).abs());
            ne = ne.max((f.nu() - fields.nu.values[k]).abs());
        }
    }
    Ok(RoundtripReport {
        lambda_error: le,
        mu_error: me,
        nu_error: ne,
        sup_error: le.max(me).max(ne),
        frame_drift: rec.drift,
        compatibility_defect: defect,
        nodes_compared: inner.n_u * inner.n_v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_fields(n: usize, lam: f64, mu: f64, nu: f64) -> FieldSet {
        let d = ParamDomain::new(0.0, 1.0, 0.0, 1.0, n, n).unwrap();
        let f = |c: f64| GridField::from_fn(&d, move |_, _| c).unwrap();
        FieldSet::new(f(lam), f(mu), f(nu)).unwrap()
    }

    #[test]
    fn constant_mu_connection() {
        let fs = constant_fields(5, 0.0, -1.0, 0.0);
        let c = connection_matrices(&fs, Ambient::Euclidean).unwrap();
        for m in &c {
            // only the (y, l) coupling survives
            assert_eq!(m.a_u[(3, 1)], -1.0);
            assert_eq!(m.a_u[(1, 3)], 1.0);
            assert_eq!(m.a_u.iter().filter(|x| **x != 0.0).count(), 2);
            assert_eq!(m.a_v[(3, 0)], -1.0);
        }
    }

    #[test]
    fn connection_is_skew_adjoint() {
        let d = ParamDomain::new(0.0, 1.0, 0.0, 1.0, 6, 6).unwrap();
        let lam = GridField::from_fn(&d, |u, v| 0.3 + u * v).unwrap();
        let mu = GridField::from_fn(&d, |u, v| 1.0 + 0.2 * u - 0.1 * v * v).unwrap();
        let nu = GridField::from_fn(&d, |u, v| (u + v).sin()).unwrap();
        let fs = FieldSet::new(lam, mu, nu).unwrap();
        for amb in [Ambient::Euclidean, Ambient::Minkowski(Epsilon::Spacelike), Ambient::Minkowski(Epsilon::Timelike)] {
            let g = Matrix4::from_diagonal(&Vector4::from(amb.frame_metric()));
            for c in connection_matrices(&fs, amb).unwrap() {
                assert_eq!((c.a_u.transpose() * g + g * c.a_u).amax(), 0.0);
                assert_eq!((c.a_v.transpose() * g + g * c.a_v).amax(), 0.0);
            }
        }
    }

    #[test]
    fn b_column_matches_frenet_formula() {
        let fs = constant_fields(5, 0.4, 0.25, 0.7);
        let c = connection_matrices(&fs, Ambient::Euclidean).unwrap()[12];
        // ∂_u b = a(−ν x − λ y), a = 1/√|μ| = 2
        assert!((c.a_u[(0, 2)] + 2.0 * 0.7).abs() < 1e-15);
        assert!((c.a_u[(1, 2)] + 2.0 * 0.4).abs() < 1e-15);
        assert_eq!(c.a_u[(3, 2)], 0.0);
    }

    #[test]
    fn zero_connection_is_a_plane() {
        let fs = constant_fields(6, 0.0, 1.0, 0.0);
        let p = Prepared::new(&fs, Ambient::Euclidean).unwrap();
        let mut gs = p.u_line(0);
        for g in gs.iter_mut() {
            g.fixed_view_mut::<4, 4>(0, 0).fill(0.0);
        }
        let s0 = FrameState::standard(Ambient::Euclidean).to_state();
        let out = integrate_line(s0, &gs, 0.2, None).unwrap();
        for (k, s) in out.iter().enumerate() {
            let z: Vector4 = s.column(4).into_owned();
            assert!((z - basis(0) * (0.2 * k as f64)).amax() < 1e-15);
        }
    }

    #[test]
    fn clifford_torus_from_constant_fields() {
        // λ = 0, μ = ν = c is the flat torus with equal radii 1/(√2 c)
        let c = 0.8;
        let fs = constant_fields(21, 0.0, c, c);
        let init = FrameState::standard(Ambient::Euclidean);
        let rec = integrate_surface(&fs, Ambient::Euclidean, &init, &Default::default()).unwrap();
        assert!(rec.drift < 1e-7, "{}", rec.drift);
        let defect = compatibility_defect(&fs, Ambient::Euclidean, &init).unwrap();
        assert!(defect < 1e-7, "{defect}");
        // minimal in the 3-sphere of radius 1/c centred at z₀ + b₀/c
        let center = Vector4::from(init.b) / c;
        for s in &rec.states {
            assert!(((s.position() - center).norm() - 1.0 / c).abs() < 1e-7);
        }
    }

    #[test]
    fn gauss_violation_is_incompatible() {
        let fs = constant_fields(21, 0.0, 0.8, 0.0);
        let init = FrameState::standard(Ambient::Euclidean);
        assert!(compatibility_defect(&fs, Ambient::Euclidean, &init).unwrap() > 1e-3);
    }

    #[test]
    fn bad_initial_frame_rejected() {
        let fs = constant_fields(5, 0.1, 1.0, 0.1);
        let mut init = FrameState::standard(Ambient::Euclidean);
        init.x = [1.0, 0.1, 0.0, 0.0];
        assert!(matches!(integrate_surface(&fs, Ambient::Euclidean, &init, &Default::default()), Err(Error::InvalidInput(_))));
        // the Euclidean standard frame is not ε-orthonormal for ε = −1
        let init = FrameState::standard(Ambient::Euclidean);
        let amb = Ambient::Minkowski(Epsilon::Timelike);
        assert!(integrate_surface(&fs, amb, &init, &Default::default()).is_err());
    }

    #[test]
    fn field_set_validation() {
        let d = ParamDomain::new(0.0, 1.0, 0.0, 1.0, 5, 5).unwrap();
        let f = GridField::from_fn(&d, |_, _| 1.0).unwrap();
        let z = GridField::from_fn(&d, |u, _| u - 0.5).unwrap();
        assert!(matches!(FieldSet::new(f.clone(), z, f.clone()), Err(Error::MuVanishes)));
        let d3 = ParamDomain::new(0.0, 1.0, 0.0, 1.0, 3, 3).unwrap();
        let g = GridField::from_fn(&d3, |_, _| 1.0).unwrap();
        assert!(matches!(FieldSet::new(g.clone(), g.clone(), g), Err(Error::GridTooSmall { .. })));
        let d2 = ParamDomain::new(0.0, 2.0, 0.0, 1.0, 5, 5).unwrap();
        let h = GridField::from_fn(&d2, |_, _| 1.0).unwrap();
        assert!(matches!(FieldSet::new(f.clone(), h, f), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn grid_surface_snaps_to_nodes() {
        let fs = constant_fields(11, 0.0, 1.0, 1.0);
        let rec = integrate_surface(&fs, Ambient::Euclidean, &FrameState::standard(Ambient::Euclidean), &Default::default())
            .unwrap();
        let gsurf = GridSurface::new(&rec);
        assert_eq!(gsurf.point(0.4, 0.6).unwrap(), rec.at(4, 6).position());
        assert!(gsurf.point(0.41, 0.6).is_err());
    }

    #[test]
    fn projection_keeps_frame_orthonormal() {
        let fs = constant_fields(11, 0.3, 0.9, 0.5);
        let opts = IntegrateOptions { project: true, ..Default::default() };
        let amb = Ambient::Minkowski(Epsilon::Spacelike);
        let rec = integrate_surface(&fs, amb, &FrameState::standard(amb), &opts).unwrap();
        assert!(rec.drift < 1e-13, "{}", rec.drift);
    }
}
