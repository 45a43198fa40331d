//! Second fundamental form, mean curvature vector, the geometric frame
//! {x, y, b, l} and the eight geometric functions built on it.
//!
//! Conventions:
//! - σ is the normal part of the ambient second derivative; H = ½ tr σ.
//! - ⟨A_ξ X, Y⟩ = ⟨σ(X, Y), ξ⟩ (Weingarten: ∇′_X ξ = −A_ξ X + D_X ξ).
//! - b = H/‖H‖, l completes the normal frame with det[x, y, b, l] > 0.
//! - {x, y} is the rotation of the tangent plane with ⟨σ(x,x), l⟩ = ⟨σ(y,y), l⟩ = 0
//!   and y obtained from x by a positive quarter turn.
//! - All geometric functions are expansion coefficients in the frame, so in E⁴₁
//!   a coefficient along b or l is ⟨·, b⟩/⟨b, b⟩ or ⟨·, l⟩/⟨l, l⟩.

use nalgebra::{Matrix2, Matrix4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pseudo_euclidean::{
    causal_character, cross3, inner, Ambient, CausalCharacter, Epsilon, Signature, Vector4, DEFAULT_TOL,
};
use crate::surface::{eval_jet, first_form, FundamentalForm1, JetOrder, ParamDomain, SurfaceJet, SurfaceMap};

/// Relative tolerance under which two frame candidates count as tied.
const TIE_TOL: f64 = 1e-9;

/// Minimum alignment score (sum of two cosines) accepted between neighbouring frames.
const ALIGN_MIN: f64 = 1.0;

/// Tangent/normal decomposition at a point.
#[derive(Debug, Clone, Copy)]
struct PointGeometry {
    jet: SurfaceJet,
    form: FundamentalForm1,
    signature: Signature,
    sigma_uu: Vector4,
    sigma_uv: Vector4,
    sigma_vv: Vector4,
    mean_curvature: Vector4,
}

impl PointGeometry {
    fn new(jet: &SurfaceJet, s: Signature) -> Result<Self> {
        let form = first_form(jet, s)?;
        let normal = |w: &Vector4| {
            let (a, b) = form.solve(inner(w, &jet.z_u, s), inner(w, &jet.z_v, s));
            w - jet.z_u * a - jet.z_v * b
        };
        let sigma_uu = normal(&jet.z_uu);
        let sigma_uv = normal(&jet.z_uv);
        let sigma_vv = normal(&jet.z_vv);
        let mean_curvature =
            (sigma_uu * form.g - sigma_uv * (2.0 * form.f) + sigma_vv * form.e) / (2.0 * form.det());
        Ok(PointGeometry { jet: *jet, form, signature: s, sigma_uu, sigma_uv, sigma_vv, mean_curvature })
    }

    /// Orthonormal tangent pair with the orientation of (z_u, z_v).
    fn tangent_basis(&self) -> (Vector4, Vector4, [[f64; 2]; 2]) {
        let s = self.signature;
        let se = self.form.e.sqrt();
        let t1 = self.jet.z_u / se;
        let w = self.jet.z_v - t1 * inner(&self.jet.z_v, &t1, s);
        let nw = inner(&w, &w, s).sqrt();
        let t2 = w / nw;
        // t1 = c00 z_u, t2 = c10 z_u + c11 z_v
        let c = [[1.0 / se, 0.0], [-(self.form.f / self.form.e) / nw, 1.0 / nw]];
        (t1, t2, c)
    }

    /// σ(X, Y) for tangent vectors given by coordinates (a, b) on (z_u, z_v).
    fn sigma(&self, x: (f64, f64), y: (f64, f64)) -> Vector4 {
        self.sigma_uu * (x.0 * y.0) + self.sigma_uv * (x.0 * y.1 + x.1 * y.0) + self.sigma_vv * (x.1 * y.1)
    }

    /// Coordinates of a tangent vector on (z_u, z_v).
    fn coords(&self, t: &Vector4) -> (f64, f64) {
        let s = self.signature;
        self.form.solve(inner(t, &self.jet.z_u, s), inner(t, &self.jet.z_v, s))
    }
}

/// Values of σ on an orthonormal tangent pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondForm {
    pub t1: Vector4,
    pub t2: Vector4,
    pub sigma_xx: Vector4,
    pub sigma_xy: Vector4,
    pub sigma_yy: Vector4,
}

/// σ on the orthonormal tangent pair obtained from (z_u, z_v) by Gram–Schmidt.
pub fn second_form(j: &SurfaceJet, s: Signature) -> Result<SecondForm> {
    let g = PointGeometry::new(j, s)?;
    let (t1, t2, c) = g.tangent_basis();
    let a = (c[0][0], c[0][1]);
    let b = (c[1][0], c[1][1]);
    Ok(SecondForm { t1, t2, sigma_xx: g.sigma(a, a), sigma_xy: g.sigma(a, b), sigma_yy: g.sigma(b, b) })
}

/// H = ½ tr σ with respect to the induced metric.
pub fn mean_curvature(j: &SurfaceJet, s: Signature) -> Result<Vector4> {
    Ok(PointGeometry::new(j, s)?.mean_curvature)
}

/// Matrix of A_ξ on the orthonormal tangent pair of [`second_form`].
pub fn shape_operator(j: &SurfaceJet, xi: &Vector4, s: Signature) -> Result<Matrix2<f64>> {
    let g = PointGeometry::new(j, s)?;
    let defect = inner(xi, &j.z_u, s).abs() / g.form.e.sqrt() + inner(xi, &j.z_v, s).abs() / g.form.g.sqrt();
    if defect > 1e-8 * xi.amax().max(1.0) {
        return Err(Error::NotNormal { defect });
    }
    let sf = second_form(j, s)?;
    let a11 = inner(&sf.sigma_xx, xi, s);
    let a12 = inner(&sf.sigma_xy, xi, s);
    let a22 = inner(&sf.sigma_yy, xi, s);
    Ok(Matrix2::new(a11, a12, a12, a22))
}

/// The frame {x, y, b, l} at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricFrame {
    pub x: Vector4,
    pub y: Vector4,
    pub b: Vector4,
    pub l: Vector4,
    /// Euclidean, or Minkowski with ε = ⟨b, b⟩.
    pub ambient: Ambient,
    /// ‖H‖ = sqrt(|⟨H, H⟩|).
    pub h_norm: f64,
}

impl GeometricFrame {
    pub fn vectors(&self) -> [Vector4; 4] {
        [self.x, self.y, self.b, self.l]
    }

    /// Rotates (x, y) by a multiple of a quarter turn to best match `reference`.
    pub fn align_to(&self, reference: &GeometricFrame) -> Result<GeometricFrame> {
        let candidates = [(self.x, self.y), (self.y, -self.x), (-self.x, -self.y), (-self.y, self.x)];
        let (mut best, mut score) = (candidates[0], f64::NEG_INFINITY);
        for c in candidates {
            let sc = c.0.dot(&reference.x) + c.1.dot(&reference.y);
            if sc > score {
                best = c;
                score = sc;
            }
        }
        if score < ALIGN_MIN || self.b.dot(&reference.b) <= 0.0 || self.l.dot(&reference.l) <= 0.0 {
            return Err(Error::FrameFlip { score });
        }
        Ok(GeometricFrame { x: best.0, y: best.1, ..*self })
    }
}

struct FrameParts {
    geometry: PointGeometry,
    frame: GeometricFrame,
}

fn build_frame(j: &SurfaceJet, s: Signature, tol: f64) -> Result<FrameParts> {
    let g = PointGeometry::new(j, s)?;
    let h = g.mean_curvature;
    let hh = inner(&h, &h, s);
    let h_norm = hh.abs().sqrt();
    if h_norm <= tol {
        return Err(Error::MinimalPoint { norm: h_norm });
    }
    let ambient = match s {
        Signature::Euclidean => Ambient::Euclidean,
        Signature::Minkowski => match causal_character(&h, s, tol) {
            CausalCharacter::Spacelike => Ambient::Minkowski(Epsilon::Spacelike),
            CausalCharacter::Timelike => Ambient::Minkowski(Epsilon::Timelike),
            CausalCharacter::Lightlike => return Err(Error::LightlikeMeanCurvature),
            CausalCharacter::Zero => return Err(Error::MinimalPoint { norm: h_norm }),
        },
    };
    let b = h / h_norm;

    let (t1, t2, c) = g.tangent_basis();
    let w = cross3(&t1, &t2, &b);
    let mut l = s.apply(&w);
    if inner(&w, &w, s) < 0.0 {
        l = -l;
    }
    let ll = inner(&l, &l, s);
    if ll.abs() < tol * l.norm_squared() {
        return Err(Error::LightlikeStep { step: 3 });
    }
    let l = l / ll.abs().sqrt();

    // A_l on (t1, t2); it is trace free because H is parallel to b.
    let c1 = (c[0][0], c[0][1]);
    let c2 = (c[1][0], c[1][1]);
    let a11 = inner(&g.sigma(c1, c1), &l, s);
    let a12 = inner(&g.sigma(c1, c2), &l, s);
    let a22 = inner(&g.sigma(c2, c2), &l, s);
    let p = 0.5 * (a11 - a22);
    let q = a12;
    let r = p.hypot(q);
    if r <= tol {
        return Err(Error::FrameDegenerate { mu: r });
    }
    let theta0 = 0.5 * p.atan2(-q);

    let su = g.form.e.sqrt();
    let sv = g.form.g.sqrt();
    let mut best: Option<([f64; 3], Vector4, Vector4)> = None;
    for k in 0..4 {
        let th = theta0 + k as f64 * std::f64::consts::FRAC_PI_2;
        let (sn, cs) = th.sin_cos();
        let x = t1 * cs + t2 * sn;
        let y = t2 * cs - t1 * sn;
        let score = [inner(&x, &j.z_u, s) / su, inner(&y, &j.z_v, s) / sv, inner(&x, &j.z_v, s) / sv];
        let better = match &best {
            None => true,
            Some((bs, _, _)) => {
                let mut decided = None;
                for (a, b) in score.iter().zip(bs.iter()) {
                    if (a - b).abs() > TIE_TOL {
                        decided = Some(a > b);
                        break;
                    }
                }
                decided.unwrap_or(false)
            }
        };
        if better {
            best = Some((score, x, y));
        }
    }
    let (_, x, y) = best.expect("four candidates");
    Ok(FrameParts { geometry: g, frame: GeometricFrame { x, y, b, l, ambient, h_norm } })
}

/// Geometric frame at a point, with x the admissible direction closest to z_u.
pub fn geometric_frame(j: &SurfaceJet, s: Signature, tol: f64) -> Result<GeometricFrame> {
    Ok(build_frame(j, s, tol)?.frame)
}

/// The eight geometric functions at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricFunctions {
    pub gamma1: f64,
    pub gamma2: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub lambda: f64,
    pub mu: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl GeometricFunctions {
    /// (ν₁ + ν₂)/2.
    pub fn nu(&self) -> f64 {
        0.5 * (self.nu1 + self.nu2)
    }

    /// |ν₁ − ν₂|, which vanishes on PNMC surfaces.
    pub fn nu_gap(&self) -> f64 {
        (self.nu1 - self.nu2).abs()
    }

    /// max(|β₁|, |β₂|).
    pub fn beta_max(&self) -> f64 {
        self.beta1.abs().max(self.beta2.abs())
    }
}

/// Coefficients of a frame-relative expansion: ⟨w, e⟩/⟨e, e⟩.
fn coeff(w: &Vector4, e: &Vector4, g: f64, s: Signature) -> f64 {
    inner(w, e, s) / g
}

/// ν₁, ν₂, λ, μ read off σ in the given frame.
fn sigma_coefficients(g: &PointGeometry, f: &GeometricFrame) -> (f64, f64, f64, f64) {
    let s = g.signature;
    let [_, _, gb, gl] = f.ambient.frame_metric();
    let xc = g.coords(&f.x);
    let yc = g.coords(&f.y);
    let sxx = g.sigma(xc, xc);
    let sxy = g.sigma(xc, yc);
    let syy = g.sigma(yc, yc);
    (coeff(&sxx, &f.b, gb, s), coeff(&syy, &f.b, gb, s), coeff(&sxy, &f.b, gb, s), coeff(&sxy, &f.l, gl, s))
}

/// The pointwise part of the geometric functions: everything except γ and β.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalFunctions {
    pub nu1: f64,
    pub nu2: f64,
    pub lambda: f64,
    pub mu: f64,
}

/// Frame and (ν₁, ν₂, λ, μ) at a point from its jet alone.
pub fn normal_functions(j: &SurfaceJet, s: Signature) -> Result<(GeometricFrame, NormalFunctions)> {
    let parts = build_frame(j, s, DEFAULT_TOL)?;
    let (nu1, nu2, lambda, mu) = sigma_coefficients(&parts.geometry, &parts.frame);
    Ok((parts.frame, NormalFunctions { nu1, nu2, lambda, mu }))
}

/// Geometric functions at (u, v); frame derivatives by fourth-order central differences
/// with step `h` (stencil reach 2h plus that of the jets).
pub fn geometric_functions(m: &dyn SurfaceMap, u: f64, v: f64, s: Signature, h: f64) -> Result<GeometricFunctions> {
    let jet = eval_jet(m, u, v, JetOrder::Two, h)?;
    let center = build_frame(&jet, s, DEFAULT_TOL)?;
    Ok(functions_with_center(m, u, v, s, h, &center)?.0)
}

/// Like [`geometric_functions`] but with a caller-chosen center frame (already aligned).
fn functions_with_center(
    m: &dyn SurfaceMap,
    u: f64,
    v: f64,
    s: Signature,
    h: f64,
    center: &FrameParts,
) -> Result<(GeometricFunctions, DirectionCoeffs)> {
    let frame_at = |uu: f64, vv: f64| -> Result<GeometricFrame> {
        let j = eval_jet(m, uu, vv, JetOrder::Two, h)?;
        build_frame(&j, s, DEFAULT_TOL)?.frame.align_to(&center.frame)
    };
    // fourth-order central differences: (8 (f₁ − f₋₁) − (f₂ − f₋₂)) / 12h
    let ring = |du: f64, dv: f64| -> Result<[GeometricFrame; 4]> {
        Ok([
            frame_at(u + du, v + dv)?,
            frame_at(u - du, v - dv)?,
            frame_at(u + 2.0 * du, v + 2.0 * dv)?,
            frame_at(u - 2.0 * du, v - 2.0 * dv)?,
        ])
    };
    let (ru, rv) = (ring(h, 0.0)?, ring(0.0, h)?);
    let diff = |r: &[GeometricFrame; 4], pick: fn(&GeometricFrame) -> Vector4| {
        ((pick(&r[0]) - pick(&r[1])) * 8.0 - (pick(&r[2]) - pick(&r[3]))) / (12.0 * h)
    };
    let dirs = DirectionCoeffs::new(&center.geometry, &center.frame);
    let along = |c: (f64, f64), pick: fn(&GeometricFrame) -> Vector4| diff(&ru, pick) * c.0 + diff(&rv, pick) * c.1;

    let f = &center.frame;
    let [_, _, _, gl] = f.ambient.frame_metric();
    let dx_x = along(dirs.x, |g| g.x);
    let dy_y = along(dirs.y, |g| g.y);
    let dx_b = along(dirs.x, |g| g.b);
    let dy_b = along(dirs.y, |g| g.b);
    let (nu1, nu2, lambda, mu) = sigma_coefficients(&center.geometry, f);
    Ok((
        GeometricFunctions {
            gamma1: inner(&dx_x, &f.y, s),
            gamma2: inner(&dy_y, &f.x, s),
            nu1,
            nu2,
            lambda,
            mu,
            beta1: coeff(&dx_b, &f.l, gl, s),
            beta2: coeff(&dy_b, &f.l, gl, s),
        },
        dirs,
    ))
}

/// x = a z_u + b z_v and y = c z_u + d z_v.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionCoeffs {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl DirectionCoeffs {
    fn new(g: &PointGeometry, f: &GeometricFrame) -> Self {
        DirectionCoeffs { x: g.coords(&f.x), y: g.coords(&f.y) }
    }
}

/// Matrices ω(x), ω(y) with ∇′_X (x, y, b, l) = (x, y, b, l)·ω(X).
///
/// Entry (i, j) is the coefficient of e_i in ∇′ e_j. The lower triangle is
/// filled from the geometric functions, the rest from skew-adjointness
/// with respect to the frame metric diag(1, 1, g_b, g_l).
pub fn frame_connection(f: &GeometricFunctions, ambient: Ambient) -> (Matrix4<f64>, Matrix4<f64>) {
    let g = ambient.frame_metric();
    let mut wx = Matrix4::zeros();
    let mut wy = Matrix4::zeros();
    wx[(1, 0)] = f.gamma1;
    wx[(2, 0)] = f.nu1;
    wx[(2, 1)] = f.lambda;
    wx[(3, 1)] = f.mu;
    wx[(3, 2)] = f.beta1;
    wy[(1, 0)] = -f.gamma2;
    wy[(2, 0)] = f.lambda;
    wy[(3, 0)] = f.mu;
    wy[(2, 1)] = f.nu2;
    wy[(3, 2)] = f.beta2;
    for w in [&mut wx, &mut wy] {
        for i in 0..4 {
            for j in 0..i {
                w[(j, i)] = -(g[i] / g[j]) * w[(i, j)];
            }
        }
    }
    (wx, wy)
}

/// Per-node data of a grid sweep.
#[derive(Debug, Clone, Copy)]
pub struct NodeInvariants {
    pub u: f64,
    pub v: f64,
    pub form: FundamentalForm1,
    pub frame: GeometricFrame,
    pub functions: GeometricFunctions,
    pub directions: DirectionCoeffs,
}

/// Geometric functions on every node of a domain, with frames aligned across the grid.
#[derive(Debug, Clone)]
pub struct FunctionGrid {
    pub domain: ParamDomain,
    /// Row-major (u outer, v inner).
    pub nodes: Vec<NodeInvariants>,
}

impl FunctionGrid {
    pub fn at(&self, i: usize, j: usize) -> &NodeInvariants {
        &self.nodes[i * self.domain.n_v + j]
    }
}

/// Computes the aligned frame field and all geometric functions on the grid of `d`.
///
/// Node frames are aligned in row-major order to the previous node in the same
/// row (or the first node of the previous row), so sign conventions of λ, μ, γ, β
/// are continuous across the grid.
pub fn sweep_functions(m: &dyn SurfaceMap, d: &ParamDomain, s: Signature, h: f64) -> Result<FunctionGrid> {
    d.validate()?;
    let nodes = d.nodes();
    let raw: Vec<FrameParts> = nodes
        .par_iter()
        .map(|&(_, _, u, v)| {
            let jet = eval_jet(m, u, v, JetOrder::Two, h)?;
            build_frame(&jet, s, DEFAULT_TOL)
        })
        .collect::<Result<_>>()?;
    let mut aligned: Vec<FrameParts> = Vec::with_capacity(raw.len());
    for (k, part) in raw.into_iter().enumerate() {
        let (i, j) = (k / d.n_v, k % d.n_v);
        let reference = if j > 0 {
            Some(aligned[k - 1].frame)
        } else if i > 0 {
            Some(aligned[k - d.n_v].frame)
        } else {
            None
        };
        let frame = match reference {
            Some(r) => part.frame.align_to(&r)?,
            None => part.frame,
        };
        aligned.push(FrameParts { geometry: part.geometry, frame });
    }
    let out: Vec<NodeInvariants> = nodes
        .par_iter()
        .zip(aligned.par_iter())
        .map(|(&(_, _, u, v), center)| {
            let (functions, directions) = functions_with_center(m, u, v, s, h, center)?;
            Ok(NodeInvariants { u, v, form: center.geometry.form, frame: center.frame, functions, directions })
        })
        .collect::<Result<_>>()?;
    Ok(FunctionGrid { domain: *d, nodes: out })
}

/// Tags of the PNMC classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PnmcTag {
    #[serde(rename = "minimal_point")]
    MinimalPoint,
    #[serde(rename = "generic")]
    Generic,
    #[serde(rename = "pnmc_nonparallel_H")]
    PnmcNonparallelH,
    #[serde(rename = "parallel_H")]
    ParallelH,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PnmcClassification {
    pub tag: PnmcTag,
    pub sup_beta: f64,
    pub nu_sum_variation: f64,
}

/// Thresholds and steps of a classification run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub tol_beta: f64,
    pub tol_const: f64,
    /// Frame-derivative step; `None` uses the domain default.
    pub h: Option<f64>,
    pub tol_minimal: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { tol_beta: 1e-6, tol_const: 1e-6, h: None, tol_minimal: DEFAULT_TOL }
    }
}

pub fn classify_pnmc(
    m: &dyn SurfaceMap,
    d: &ParamDomain,
    s: Signature,
    opts: &ClassifyOptions,
) -> Result<PnmcClassification> {
    d.validate()?;
    let h = opts.h.unwrap_or_else(|| d.default_step());
    let nodes = d.nodes();
    let minimal = nodes.par_iter().try_fold(
        || false,
        |acc, &(_, _, u, v)| -> Result<bool> {
            let jet = eval_jet(m, u, v, JetOrder::Two, h)?;
            let hv = mean_curvature(&jet, s)?;
            Ok(acc || hv.amax() <= opts.tol_minimal || inner(&hv, &hv, s).abs().sqrt() <= opts.tol_minimal)
        },
    );
    let any_minimal = minimal.try_reduce(|| false, |a, b| Ok(a || b))?;
    if any_minimal {
        return Ok(PnmcClassification { tag: PnmcTag::MinimalPoint, sup_beta: f64::NAN, nu_sum_variation: f64::NAN });
    }
    let grid = sweep_functions(m, d, s, h)?;
    let sup_beta = grid.nodes.iter().map(|n| n.functions.beta_max()).fold(0.0, f64::max);
    let sums: Vec<f64> = grid.nodes.iter().map(|n| n.functions.nu1 + n.functions.nu2).collect();
    let hi = sums.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = sums.iter().cloned().fold(f64::INFINITY, f64::min);
    let nu_sum_variation = hi - lo;
    let tag = match (sup_beta <= opts.tol_beta, nu_sum_variation <= opts.tol_const) {
        (true, true) => PnmcTag::ParallelH,
        (true, false) => PnmcTag::PnmcNonparallelH,
        _ => PnmcTag::Generic,
    };
    Ok(PnmcClassification { tag, sup_beta, nu_sum_variation })
}

/// Sup-norms of the six Gauss–Codazzi–Ricci conditions, in the order
/// (x(μ), y(μ), x(λ) − y(ν₁), y(λ) − x(ν₂), Ricci, Gauss).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrabilityReport {
    pub residuals: [f64; 6],
    pub grid_step: (f64, f64),
}

impl IntegrabilityReport {
    pub fn max(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }
}

/// Matrix entries (row, column) of the curvature defect for each condition.
const CONDITION_ENTRIES: [(usize, usize); 6] = [(3, 0), (3, 1), (2, 0), (2, 1), (3, 2), (1, 0)];

/// Which geometric functions enter the integrability check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegrabilityForm {
    /// All eight functions as computed.
    General,
    /// β₁ = β₂ = 0 imposed (the PNMC specialization).
    ParallelNormalized,
}

/// Integrability residuals on a precomputed function grid.
///
/// For the ambient connection to be flat the matrix
/// x(ω_y) − y(ω_x) + [ω_x, ω_y] − ω([x, y]) must vanish, with [x, y] = −γ₁ x + γ₂ y.
/// Its six independent entries are the Gauss, Codazzi and Ricci equations; the
/// directional derivatives are central differences on the grid combined through
/// x = a ∂_u + b ∂_v. Boundary nodes are excluded.
pub fn integrability_from_grid(
    grid: &FunctionGrid,
    form: IntegrabilityForm,
    tweak: impl Fn(&mut GeometricFunctions) + Sync,
) -> Result<IntegrabilityReport> {
    let d = grid.domain;
    let (hu, hv) = (d.h_u(), d.h_v());
    let omegas: Vec<(Matrix4<f64>, Matrix4<f64>, GeometricFunctions)> = grid
        .nodes
        .iter()
        .map(|n| {
            let mut f = n.functions;
            if form == IntegrabilityForm::ParallelNormalized {
                f.beta1 = 0.0;
                f.beta2 = 0.0;
            }
            tweak(&mut f);
            let (wx, wy) = frame_connection(&f, n.frame.ambient);
            (wx, wy, f)
        })
        .collect();
    let idx = |i: usize, j: usize| i * d.n_v + j;
    let mut res = [0.0f64; 6];
    for i in 1..d.n_u - 1 {
        for j in 1..d.n_v - 1 {
            let n = &grid.nodes[idx(i, j)];
            let (wx, wy, f) = &omegas[idx(i, j)];
            let du_x = (omegas[idx(i + 1, j)].0 - omegas[idx(i - 1, j)].0) / (2.0 * hu);
            let dv_x = (omegas[idx(i, j + 1)].0 - omegas[idx(i, j - 1)].0) / (2.0 * hv);
            let du_y = (omegas[idx(i + 1, j)].1 - omegas[idx(i - 1, j)].1) / (2.0 * hu);
            let dv_y = (omegas[idx(i, j + 1)].1 - omegas[idx(i, j - 1)].1) / (2.0 * hv);
            let (a, b) = n.directions.x;
            let (c, e) = n.directions.y;
            let x_wy = du_y * a + dv_y * b;
            let y_wx = du_x * c + dv_x * e;
            let bracket = -wx * f.gamma1 + wy * f.gamma2;
            let defect = x_wy - y_wx + wx * wy - wy * wx - bracket;
            for (k, &(r, col)) in CONDITION_ENTRIES.iter().enumerate() {
                res[k] = res[k].max(defect[(r, col)].abs());
            }
        }
    }
    Ok(IntegrabilityReport { residuals: res, grid_step: (hu, hv) })
}

/// Integrability residuals of the surface on the grid of `d` (frame-derivative step `h`).
pub fn integrability_residual(
    m: &dyn SurfaceMap,
    d: &ParamDomain,
    s: Signature,
    h: f64,
    form: IntegrabilityForm,
) -> Result<IntegrabilityReport> {
    let grid = sweep_functions(m, d, s, h)?;
    integrability_from_grid(&grid, form, |_| {})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseudo_euclidean::{basis, gram_defect};
    use crate::surface::FnSurface;

    fn sphere(r: f64) -> FnSurface {
        // colatitude u, longitude v
        FnSurface::new(Signature::Euclidean, move |u, v| {
            Vector4::new(r * u.sin() * v.cos(), r * u.sin() * v.sin(), r * u.cos(), 0.0)
        })
    }

    fn clifford(r1: f64, r2: f64) -> FnSurface {
        FnSurface::new(Signature::Euclidean, move |u, v| {
            Vector4::new(r1 * (u / r1).cos(), r1 * (u / r1).sin(), r2 * (v / r2).cos(), r2 * (v / r2).sin())
        })
        .with_jet(move |u, v| {
            let (su, cu) = (u / r1).sin_cos();
            let (sv, cv) = (v / r2).sin_cos();
            SurfaceJet {
                z: Vector4::new(r1 * cu, r1 * su, r2 * cv, r2 * sv),
                z_u: Vector4::new(-su, cu, 0.0, 0.0),
                z_v: Vector4::new(0.0, 0.0, -sv, cv),
                z_uu: Vector4::new(-cu, -su, 0.0, 0.0) / r1,
                z_uv: Vector4::zeros(),
                z_vv: Vector4::new(0.0, 0.0, -cv, -sv) / r2,
                third: None,
            }
        })
    }

    fn plane() -> FnSurface {
        FnSurface::new(Signature::Euclidean, |u, v| basis(0) * u + basis(1) * v)
    }

    #[test]
    fn plane_has_zero_mean_curvature_and_shape_operator() {
        let j = eval_jet(&plane(), 0.1, 0.2, JetOrder::Two, 1e-3).unwrap();
        assert!(mean_curvature(&j, Signature::Euclidean).unwrap().amax() < 1e-9);
        let a = shape_operator(&j, &basis(2), Signature::Euclidean).unwrap();
        assert!(a.amax() < 1e-9);
        assert!(matches!(geometric_frame(&j, Signature::Euclidean, 1e-6), Err(Error::MinimalPoint { .. })));
    }

    #[test]
    fn sphere_mean_curvature_and_shape_operator() {
        let r = 2.5;
        let (u, v) = (0.9, 0.4);
        let j = eval_jet(&sphere(r), u, v, JetOrder::Two, 1e-4).unwrap();
        let h = mean_curvature(&j, Signature::Euclidean).unwrap();
        assert!((h.norm() - 1.0 / r).abs() < 1e-6);
        let inward = -j.z / r;
        let a = shape_operator(&j, &inward, Signature::Euclidean).unwrap();
        assert!((a - Matrix2::identity() / r).amax() < 1e-6, "{a}");
        let outward = j.z / r;
        let a = shape_operator(&j, &outward, Signature::Euclidean).unwrap();
        assert!((a + Matrix2::identity() / r).amax() < 1e-6);
        // tangent vector is rejected
        assert!(matches!(shape_operator(&j, &j.z_u, Signature::Euclidean), Err(Error::NotNormal { .. })));
        // umbilic: A_l = 0
        assert!(matches!(geometric_frame(&j, Signature::Euclidean, 1e-6), Err(Error::FrameDegenerate { .. })));
    }

    #[test]
    fn clifford_torus_frame_and_functions() {
        let m = clifford(1.0, 0.5);
        let j = eval_jet(&m, 0.3, 0.2, JetOrder::Two, 1e-4).unwrap();
        let f = geometric_frame(&j, Signature::Euclidean, 1e-8).unwrap();
        let vs = f.vectors();
        assert!(gram_defect(&vs, Signature::Euclidean, &[1.0; 4]) < 1e-9);
        let sf = second_form(&j, Signature::Euclidean).unwrap();
        assert!((sf.sigma_xy).amax() < 1e-12);
        let h = mean_curvature(&j, Signature::Euclidean).unwrap();
        assert!((f.b * f.h_norm - h).amax() < 1e-12);
        let gf = geometric_functions(&m, 0.3, 0.2, Signature::Euclidean, 1e-4).unwrap();
        assert!(gf.beta_max() < 1e-7, "{gf:?}");
        // H = (nu1 + nu2)/2 b
        assert!((f.b * gf.nu() - h).amax() < 1e-8);
        let d = ParamDomain::new(0.0, 1.0, 0.0, 1.0, 6, 6).unwrap();
        let c = classify_pnmc(&m, &d, Signature::Euclidean, &ClassifyOptions { h: Some(1e-4), ..Default::default() })
            .unwrap();
        assert_eq!(c.tag, PnmcTag::ParallelH, "{c:?}");
    }

    #[test]
    fn plane_classifies_as_minimal() {
        let d = ParamDomain::new(0.0, 1.0, 0.0, 1.0, 4, 4).unwrap();
        let c = classify_pnmc(&plane(), &d, Signature::Euclidean, &ClassifyOptions::default()).unwrap();
        assert_eq!(c.tag, PnmcTag::MinimalPoint);
    }

    #[test]
    fn frame_connection_is_skew_adjoint() {
        let f = GeometricFunctions {
            gamma1: 0.3,
            gamma2: -0.7,
            nu1: 1.1,
            nu2: 0.9,
            lambda: 0.4,
            mu: -0.2,
            beta1: 0.05,
            beta2: 0.6,
        };
        for amb in [Ambient::Euclidean, Ambient::Minkowski(Epsilon::Spacelike), Ambient::Minkowski(Epsilon::Timelike)]
        {
            let g = Matrix4::from_diagonal(&nalgebra::Vector4::from(amb.frame_metric()));
            let (wx, wy) = frame_connection(&f, amb);
            assert_eq!(wx.transpose() * g + g * wx, Matrix4::zeros());
            assert_eq!(wy.transpose() * g + g * wy, Matrix4::zeros());
        }
        // Euclidean b column of ω(x): −ν₁ x − λ y + β₁ l
        let (wx, _) = frame_connection(&f, Ambient::Euclidean);
        assert_eq!(wx.column(2).into_owned(), nalgebra::Vector4::new(-1.1, -0.4, 0.0, 0.05));
    }

    #[test]
    fn alignment_rejects_unrelated_frames() {
        let f = GeometricFrame {
            x: basis(0),
            y: basis(1),
            b: basis(2),
            l: basis(3),
            ambient: Ambient::Euclidean,
            h_norm: 1.0,
        };
        let rotated = GeometricFrame { x: basis(1), y: -basis(0), ..f };
        assert_eq!(rotated.align_to(&f).unwrap(), f);
        let flipped = GeometricFrame { b: -basis(2), ..f };
        assert!(matches!(flipped.align_to(&f), Err(Error::FrameFlip { .. })));
    }
}
