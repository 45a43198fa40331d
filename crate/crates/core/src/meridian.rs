//! Meridian surfaces z(u, v) = f(u) l(v) + g(u) a, where a is the rotation axis
//! (e₄ in E⁴, the lightlike ξ₁ in E⁴₁) and l(v) is a directrix curve on the unit
//! sphere S²(1) or on the flat paraboloid 𝓟² of the light cone.
//!
//! The two families carry fixed meridian profiles:
//! - euclidean: f = √(u²+2u+5), g = 2 ln(u+1+√(u²+2u+5)), axis e₄;
//! - parabolic: f = √(u+1), g = −⅔(u+1)^{3/2}, axis ξ₁ = (e₃+e₄)/√2, u > −1.

use std::fmt;
use std::sync::Arc;

use nalgebra::SVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::rk4_step;
use crate::pseudo_euclidean::{basis, inner, Signature, Vector4};
use crate::surface::{Bounds, JetOrder, SurfaceJet, SurfaceMap, ThirdOrder};

/// Drift bound on curve invariants.
pub const CURVE_DRIFT_BOUND: f64 = 1e-6;

/// ξ₁ = (e₃ + e₄)/√2.
pub fn xi1() -> Vector4 {
    (basis(2) + basis(3)) * std::f64::consts::FRAC_1_SQRT_2
}

/// ξ₂ = (−e₃ + e₄)/√2.
pub fn xi2() -> Vector4 {
    (basis(3) - basis(2)) * std::f64::consts::FRAC_1_SQRT_2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeridianFamily {
    /// Rotation about e₄ in E⁴, directrix on S²(1).
    Euclidean,
    /// Rotation about a lightlike axis in E⁴₁, directrix on 𝓟².
    Parabolic,
}

impl MeridianFamily {
    pub fn signature(self) -> Signature {
        match self {
            MeridianFamily::Euclidean => Signature::Euclidean,
            MeridianFamily::Parabolic => Signature::Minkowski,
        }
    }

    pub fn axis(self) -> Vector4 {
        match self {
            MeridianFamily::Euclidean => basis(3),
            MeridianFamily::Parabolic => xi1(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MeridianFamily::Euclidean => "euclidean",
            MeridianFamily::Parabolic => "parabolic",
        }
    }
}

impl fmt::Display for MeridianFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MeridianFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(MeridianFamily::Euclidean),
            "parabolic" => Ok(MeridianFamily::Parabolic),
            other => Err(Error::InvalidInput(format!("unknown family {other:?} (expected euclidean|parabolic)"))),
        }
    }
}

type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Curvature ϰ(v) of the directrix together with its derivative.
#[derive(Clone)]
pub struct CurvatureProfile {
    kappa: Arc<ScalarFn>,
    dkappa: Arc<ScalarFn>,
    pub description: String,
}

impl fmt::Debug for CurvatureProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CurvatureProfile").field("description", &self.description).finish()
    }
}

impl CurvatureProfile {
    pub fn new(
        description: impl Into<String>,
        kappa: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dkappa: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        CurvatureProfile { kappa: Arc::new(kappa), dkappa: Arc::new(dkappa), description: description.into() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("constant {c}"), move |_| c, |_| 0.0)
    }

    /// a + b sin(ω v).
    pub fn sine(a: f64, b: f64, omega: f64) -> Self {
        Self::new(format!("{a} + {b} sin({omega} v)"), move |v| a + b * (omega * v).sin(), move |v| {
            b * omega * (omega * v).cos()
        })
    }

    /// c₀ + c₁ v + c₂ v² + …
    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        let desc = format!("polynomial {coeffs:?}");
        let c1 = coeffs.clone();
        Self::new(
            desc,
            move |v| c1.iter().rev().fold(0.0, |acc, c| acc * v + c),
            move |v| {
                coeffs.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, c)| acc * v + k as f64 * c)
            },
        )
    }

    pub fn kappa(&self, v: f64) -> f64 {
        (self.kappa)(v)
    }

    pub fn dkappa(&self, v: f64) -> f64 {
        (self.dkappa)(v)
    }
}

/// f, g and their first three derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileJet {
    pub f: [f64; 4],
    pub g: [f64; 4],
}

/// Meridian curve (f(u), g(u)) of one of the two families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeridianProfile {
    pub family: MeridianFamily,
}

impl MeridianProfile {
    pub fn new(family: MeridianFamily) -> Self {
        MeridianProfile { family }
    }

    /// Lower end of the admissible u-range (exclusive).
    pub fn u_lower(&self) -> f64 {
        match self.family {
            MeridianFamily::Euclidean => f64::NEG_INFINITY,
            MeridianFamily::Parabolic => -1.0,
        }
    }

    pub fn jet(&self, u: f64) -> Result<ProfileJet> {
        match self.family {
            MeridianFamily::Euclidean => {
                let p = u + 1.0;
                let f = (p * p + 4.0).sqrt();
                let (f3, f5) = (f.powi(3), f.powi(5));
                Ok(ProfileJet {
                    f: [f, p / f, 4.0 / f3, -12.0 * p / f5],
                    g: [2.0 * (p + f).ln(), 2.0 / f, -2.0 * p / f3, (4.0 * p * p - 8.0) / f5],
                })
            }
            MeridianFamily::Parabolic => {
                if u <= -1.0 {
                    return Err(Error::DomainViolation(format!("parabolic profile needs u > -1, got {u}")));
                }
                let w = (u + 1.0).sqrt();
                let (w3, w5) = (w.powi(3), w.powi(5));
                Ok(ProfileJet {
                    f: [w, 0.5 / w, -0.25 / w3, 0.375 / w5],
                    g: [-2.0 / 3.0 * w3, -w, -0.5 / w, 0.25 / w3],
                })
            }
        }
    }
}

/// Position and first three derivatives of the directrix at one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub l: Vector4,
    pub d1: Vector4,
    pub d2: Vector4,
    pub d3: Vector4,
}

#[derive(Debug, Clone)]
enum CurveNodes {
    /// (l, l′) in E³.
    Spherical(Vec<SVector<f64, 6>>),
    /// (a, b, θ) in the flat chart of 𝓟².
    Paraboloid(Vec<SVector<f64, 3>>),
}

/// Integrated directrix with dense evaluation between nodes.
#[derive(Debug, Clone)]
pub struct DirectrixCurve {
    nodes: CurveNodes,
    v_first: f64,
    step: f64,
    kappa: CurvatureProfile,
    pub signature: Signature,
    /// Max invariant drift seen over the nodes.
    pub drift: f64,
}

fn sphere_rhs(k: &CurvatureProfile) -> impl Fn(f64, &SVector<f64, 6>) -> SVector<f64, 6> + '_ {
    move |v, y| {
        let l = y.fixed_rows::<3>(0).into_owned();
        let t = y.fixed_rows::<3>(3).into_owned();
        let acc = -l + l.cross(&t) * k.kappa(v);
        let mut out = SVector::<f64, 6>::zeros();
        out.fixed_rows_mut::<3>(0).copy_from(&t);
        out.fixed_rows_mut::<3>(3).copy_from(&acc);
        out
    }
}

fn plane_rhs(k: &CurvatureProfile) -> impl Fn(f64, &SVector<f64, 3>) -> SVector<f64, 3> + '_ {
    move |v, y| SVector::<f64, 3>::new(y[2].cos(), y[2].sin(), k.kappa(v))
}

/// Integrates from v = 0 both ways so that nodes cover [min(a,0), max(b,0)].
fn integrate_nodes<const N: usize>(
    rhs: &impl Fn(f64, &SVector<f64, N>) -> SVector<f64, N>,
    y0: SVector<f64, N>,
    range: (f64, f64),
    step: f64,
) -> Result<(Vec<SVector<f64, N>>, f64)> {
    if !(step > 0.0) || !(range.0 < range.1) {
        return Err(Error::InvalidInput(format!("bad curve range {range:?} / step {step}")));
    }
    let k_lo = (range.0.min(0.0) / step).floor() as i64;
    let k_hi = (range.1.max(0.0) / step).ceil() as i64;
    let mut fwd = vec![y0];
    for k in 0..k_hi {
        let y = rk4_step(rhs, k as f64 * step, fwd.last().unwrap(), step);
        fwd.push(y);
    }
    let mut back = Vec::new();
    let mut y = y0;
    for k in 0..(-k_lo) {
        y = rk4_step(rhs, -(k as f64) * step, &y, -step);
        back.push(y);
    }
    back.reverse();
    back.extend(fwd);
    Ok((back, k_lo as f64 * step))
}

fn check_spherical(y: &SVector<f64, 6>) -> f64 {
    let l = y.fixed_rows::<3>(0);
    let t = y.fixed_rows::<3>(3);
    let a = (l.norm_squared() - 1.0).abs();
    let b = (t.norm_squared() - 1.0).abs();
    let c = l.dot(&t).abs();
    a.max(b).max(c)
}

/// Arc-length curve on S²(1) ⊂ E³ ⊂ E⁴ with spherical curvature ϰ(v): l″ = −l + ϰ l × l′,
/// started at l(0) = e₁, l′(0) = e₂.
pub fn spherical_curve(k: &CurvatureProfile, v_range: (f64, f64), step: f64) -> Result<DirectrixCurve> {
    let mut y0 = SVector::<f64, 6>::zeros();
    y0[0] = 1.0;
    y0[4] = 1.0;
    let rhs = sphere_rhs(k);
    let (nodes, v_first) = integrate_nodes(&rhs, y0, v_range, step)?;
    let drift = nodes.iter().map(check_spherical).fold(0.0, f64::max);
    if drift > CURVE_DRIFT_BOUND {
        return Err(Error::DriftExceeded { drift, bound: CURVE_DRIFT_BOUND });
    }
    Ok(DirectrixCurve {
        nodes: CurveNodes::Spherical(nodes),
        v_first,
        step,
        kappa: k.clone(),
        signature: Signature::Euclidean,
        drift,
    })
}

/// Lift of the flat chart (a, b) ↦ a e₁ + b e₂ + ((a²+b²)/2) ξ₁ + ξ₂ of 𝓟².
pub fn paraboloid_point(a: f64, b: f64) -> Vector4 {
    basis(0) * a + basis(1) * b + xi1() * (0.5 * (a * a + b * b)) + xi2()
}

/// Arc-length curve on 𝓟² ⊂ E⁴₁ whose image in the flat chart has planar curvature ϰ(v),
/// started at (a, b) = (0, 0) with tangent (1, 0).
pub fn paraboloid_curve(k: &CurvatureProfile, v_range: (f64, f64), step: f64) -> Result<DirectrixCurve> {
    let rhs = plane_rhs(k);
    let (nodes, v_first) = integrate_nodes(&rhs, SVector::<f64, 3>::zeros(), v_range, step)?;
    let mut curve = DirectrixCurve {
        nodes: CurveNodes::Paraboloid(nodes),
        v_first,
        step,
        kappa: k.clone(),
        signature: Signature::Minkowski,
        drift: 0.0,
    };
    let x1 = xi1();
    let mut drift: f64 = 0.0;
    for i in 0..curve.len() {
        let p = curve.point_at_node(i);
        let s = Signature::Minkowski;
        drift = drift
            .max(inner(&p.l, &p.l, s).abs())
            .max((inner(&p.l, &x1, s) + 1.0).abs())
            .max((inner(&p.d1, &p.d1, s) - 1.0).abs());
    }
    if drift > CURVE_DRIFT_BOUND {
        return Err(Error::DriftExceeded { drift, bound: CURVE_DRIFT_BOUND });
    }
    curve.drift = drift;
    Ok(curve)
}

impl DirectrixCurve {
    pub fn len(&self) -> usize {
        match &self.nodes {
            CurveNodes::Spherical(n) => n.len(),
            CurveNodes::Paraboloid(n) => n.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn v_range(&self) -> (f64, f64) {
        (self.v_first, self.v_first + (self.len() - 1) as f64 * self.step)
    }

    pub fn kappa(&self) -> &CurvatureProfile {
        &self.kappa
    }

    pub fn node_v(&self, i: usize) -> f64 {
        self.v_first + i as f64 * self.step
    }

    /// Flat-chart coordinates (a, b) at node `i` (paraboloid curves only).
    pub fn chart_at_node(&self, i: usize) -> Option<(f64, f64)> {
        match &self.nodes {
            CurveNodes::Paraboloid(n) => Some((n[i][0], n[i][1])),
            CurveNodes::Spherical(_) => None,
        }
    }

    fn point_at_node(&self, i: usize) -> CurvePoint {
        let v = self.node_v(i);
        match &self.nodes {
            CurveNodes::Spherical(n) => self.spherical_point(v, &n[i]),
            CurveNodes::Paraboloid(n) => self.paraboloid_point(v, &n[i]),
        }
    }

    fn spherical_point(&self, v: f64, y: &SVector<f64, 6>) -> CurvePoint {
        let l = y.fixed_rows::<3>(0).into_owned();
        let t = y.fixed_rows::<3>(3).into_owned();
        let (k, dk) = (self.kappa.kappa(v), self.kappa.dkappa(v));
        let n = l.cross(&t);
        let d2 = -l + n * k;
        let d3 = -t + n * dk + l.cross(&d2) * k;
        let lift = |w: nalgebra::Vector3<f64>| Vector4::new(w[0], w[1], w[2], 0.0);
        CurvePoint { l: lift(l), d1: lift(t), d2: lift(d2), d3: lift(d3) }
    }

    fn paraboloid_point(&self, v: f64, y: &SVector<f64, 3>) -> CurvePoint {
        let (a, b, th) = (y[0], y[1], y[2]);
        let (k, dk) = (self.kappa.kappa(v), self.kappa.dkappa(v));
        let (s, c) = th.sin_cos();
        let (a1, b1) = (c, s);
        let (a2, b2) = (-k * s, k * c);
        let (a3, b3) = (-dk * s - k * k * c, dk * c - k * k * s);
        let x1 = xi1();
        let e1 = basis(0);
        let e2 = basis(1);
        CurvePoint {
            l: paraboloid_point(a, b),
            d1: e1 * a1 + e2 * b1 + x1 * (a * a1 + b * b1),
            d2: e1 * a2 + e2 * b2 + x1 * (a1 * a1 + b1 * b1 + a * a2 + b * b2),
            d3: e1 * a3 + e2 * b3 + x1 * (3.0 * (a1 * a2 + b1 * b2) + a * a3 + b * b3),
        }
    }

    /// Curve state at any v in range: one partial RK4 step from the nearest lower node.
    pub fn at(&self, v: f64) -> Result<CurvePoint> {
        let (lo, hi) = self.v_range();
        if !(v >= lo && v <= hi) {
            return Err(Error::OutOfDomain { u: f64::NAN, v, reach: 0.0 });
        }
        let k = (((v - lo) / self.step).floor() as usize).min(self.len() - 2);
        let vk = self.node_v(k);
        let dv = v - vk;
        Ok(match &self.nodes {
            CurveNodes::Spherical(n) => {
                let y = if dv == 0.0 { n[k] } else { rk4_step(&sphere_rhs(&self.kappa), vk, &n[k], dv) };
                self.spherical_point(v, &y)
            }
            CurveNodes::Paraboloid(n) => {
                let y = if dv == 0.0 { n[k] } else { rk4_step(&plane_rhs(&self.kappa), vk, &n[k], dv) };
                self.paraboloid_point(v, &y)
            }
        })
    }
}

/// The meridian surface f(u) l(v) + g(u) axis with closed-form u-partials and
/// v-partials taken from the directrix state.
#[derive(Debug, Clone)]
pub struct MeridianSurface {
    pub family: MeridianFamily,
    pub profile: MeridianProfile,
    pub curve: Arc<DirectrixCurve>,
}

pub fn meridian_surface(
    family: MeridianFamily,
    curve: Arc<DirectrixCurve>,
    profile: MeridianProfile,
) -> Result<MeridianSurface> {
    if profile.family != family {
        return Err(Error::InvalidInput(format!("profile family {} does not match {family}", profile.family)));
    }
    if curve.signature != family.signature() {
        return Err(Error::InvalidInput(format!("directrix does not live in the ambient space of {family}")));
    }
    Ok(MeridianSurface { family, profile, curve })
}

/// Builds the directrix for `family` and the surface on top of it.
pub fn build_meridian(
    family: MeridianFamily,
    kappa: &CurvatureProfile,
    v_range: (f64, f64),
    step: f64,
) -> Result<MeridianSurface> {
    let curve = match family {
        MeridianFamily::Euclidean => spherical_curve(kappa, v_range, step)?,
        MeridianFamily::Parabolic => paraboloid_curve(kappa, v_range, step)?,
    };
    meridian_surface(family, Arc::new(curve), MeridianProfile::new(family))
}

impl MeridianSurface {
    fn jet_at(&self, u: f64, v: f64, order: JetOrder) -> Result<SurfaceJet> {
        let p = self.profile.jet(u)?;
        let c = self.curve.at(v).map_err(|_| Error::OutOfDomain { u, v, reach: 0.0 })?;
        let a = self.family.axis();
        let third = match order {
            JetOrder::Two => None,
            JetOrder::Three => Some(ThirdOrder {
                z_uuu: c.l * p.f[3] + a * p.g[3],
                z_uuv: c.d1 * p.f[2],
                z_uvv: c.d2 * p.f[1],
                z_vvv: c.d3 * p.f[0],
            }),
        };
        Ok(SurfaceJet {
            z: c.l * p.f[0] + a * p.g[0],
            z_u: c.l * p.f[1] + a * p.g[1],
            z_v: c.d1 * p.f[0],
            z_uu: c.l * p.f[2] + a * p.g[2],
            z_uv: c.d1 * p.f[1],
            z_vv: c.d2 * p.f[0],
            third,
        })
    }
}

impl SurfaceMap for MeridianSurface {
    fn signature(&self) -> Signature {
        self.family.signature()
    }

    fn point(&self, u: f64, v: f64) -> Result<Vector4> {
        Ok(self.jet_at(u, v, JetOrder::Two)?.z)
    }

    fn bounds(&self) -> Bounds {
        Bounds { u: (self.profile.u_lower(), f64::INFINITY), v: self.curve.v_range() }
    }

    fn analytic_jet(&self, u: f64, v: f64, order: JetOrder) -> Option<Result<SurfaceJet>> {
        Some(self.jet_at(u, v, order))
    }
}

/// Closed-form (λ, μ, ν) of the meridian families in the original parameters (u, v).
pub fn closed_form_functions(family: MeridianFamily, kappa: &CurvatureProfile, u: f64, v: f64) -> Result<(f64, f64, f64)> {
    let k = kappa.kappa(v);
    match family {
        MeridianFamily::Euclidean => {
            let q = u * u + 2.0 * u + 5.0;
            let lam = k / (2.0 * q.sqrt());
            Ok((lam, 2.0 / q, lam))
        }
        MeridianFamily::Parabolic => {
            if u <= -1.0 {
                return Err(Error::DomainViolation(format!("parabolic functions need u > -1, got {u}")));
            }
            let lam = k / (2.0 * (u + 1.0).sqrt());
            Ok((lam, -1.0 / (2.0 * (u + 1.0)), lam))
        }
    }
}
