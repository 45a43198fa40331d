//! Canonical parameters: E = G = 1/|μ|, F = 0.
//!
//! Two routes produce them. The integral route rescales each coordinate axis
//! separately using the separable factors φ(u) = E|μ| and ψ(v) = G|μ|. The
//! rotated route uses the closed-form charts of the two meridian families, which
//! mix u and v.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame_invariants::normal_functions;
use crate::meridian::MeridianFamily;
use crate::numerics::{adaptive_simpson, solve_monotone};
use crate::pseudo_euclidean::{Signature, Vector4};
use crate::surface::{eval_jet, first_form, JetOrder, ParamDomain, SurfaceJet, SurfaceMap};

/// Largest allowed |F|/√(EG) for the integral route.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;
/// Largest allowed relative spread of E|μ| along a u-line (or G|μ| along a v-line).
pub const SEPARABILITY_TOL: f64 = 1e-6;
/// Absolute tolerance of the antiderivative quadrature.
pub const QUADRATURE_TOL: f64 = 1e-10;

const TABLE_SEGMENTS: usize = 256;

/// (E, F, G) and |μ| at one node.
fn metric_and_mu(m: &dyn SurfaceMap, u: f64, v: f64, s: Signature, h: f64) -> Result<(f64, f64, f64, f64)> {
    let j = eval_jet(m, u, v, JetOrder::Two, h)?;
    let form = first_form(&j, s)?;
    let (_, nf) = normal_functions(&j, s)?;
    if nf.mu == 0.0 {
        return Err(Error::MuVanishes);
    }
    Ok((form.e, form.f, form.g, nf.mu.abs()))
}

fn grid_values(m: &dyn SurfaceMap, d: &ParamDomain, s: Signature) -> Result<Vec<(f64, f64, f64, f64)>> {
    d.validate()?;
    let h = d.default_step();
    d.nodes().par_iter().map(|&(_, _, u, v)| metric_and_mu(m, u, v, s, h)).collect()
}

/// sup over the grid of max(|E − 1/|μ||, |F|, |G − 1/|μ||)·|μ|.
pub fn canonicity_residual(m: &dyn SurfaceMap, d: &ParamDomain, s: Signature) -> Result<f64> {
    let vals = grid_values(m, d, s)?;
    Ok(vals
        .iter()
        .map(|&(e, f, g, mu)| {
            let target = 1.0 / mu;
            ((e - target).abs().max(f.abs()).max((g - target).abs())) / target
        })
        .fold(0.0, f64::max))
}

/// φ(u) = E|μ| and ψ(v) = G|μ| sampled on the grid nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableFactors {
    pub domain: ParamDomain,
    pub signature: Signature,
    /// v-average of E|μ| on each u-line.
    pub phi: Vec<f64>,
    /// u-average of G|μ| on each v-line.
    pub psi: Vec<f64>,
    pub separability_error: f64,
}

pub fn separable_factors(m: &dyn SurfaceMap, d: &ParamDomain, s: Signature) -> Result<SeparableFactors> {
    let vals = grid_values(m, d, s)?;
    let (nu, nv) = (d.n_u, d.n_v);
    let ratio = vals.iter().map(|&(e, f, g, _)| f.abs() / (e * g).sqrt()).fold(0.0, f64::max);
    if ratio > ORTHOGONALITY_TOL {
        return Err(Error::NotOrthogonal { ratio });
    }
    let at = |i: usize, j: usize| vals[i * nv + j];
    let phi: Vec<f64> = (0..nu).map(|i| (0..nv).map(|j| at(i, j).0 * at(i, j).3).sum::<f64>() / nv as f64).collect();
    let psi: Vec<f64> = (0..nv).map(|j| (0..nu).map(|i| at(i, j).2 * at(i, j).3).sum::<f64>() / nu as f64).collect();
    let mut err: f64 = 0.0;
    for i in 0..nu {
        for j in 0..nv {
            let (e, _, g, mu) = at(i, j);
            err = err.max((e * mu - phi[i]).abs() / phi[i]).max((g * mu - psi[j]).abs() / psi[j]);
        }
    }
    if phi.iter().chain(&psi).any(|x| !(*x > 0.0)) {
        return Err(Error::InvalidInput("separable factors must be positive".into()));
    }
    if err > SEPARABILITY_TOL {
        return Err(Error::NotSeparable { error: err });
    }
    Ok(SeparableFactors { domain: *d, signature: s, phi, psi, separability_error: err })
}

/// Piecewise cubic Hermite table of an increasing antiderivative F with F′ = √factor.
#[derive(Debug, Clone, PartialEq)]
struct Antiderivative {
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl Antiderivative {
    fn build(sqrt_factor: &(impl Fn(f64) -> Result<f64> + Sync), lo: f64, hi: f64, origin: f64) -> Result<Self> {
        let n = TABLE_SEGMENTS;
        let knots: Vec<f64> = (0..=n).map(|k| if k == n { hi } else { lo + (hi - lo) * k as f64 / n as f64 }).collect();
        let slopes: Vec<f64> = knots.par_iter().map(|&x| sqrt_factor(x)).collect::<Result<_>>()?;
        let seg_tol = QUADRATURE_TOL / n as f64;
        // the integrand reports failure through NaN, which the quadrature turns into an error
        let f = |x: f64| sqrt_factor(x).unwrap_or(f64::NAN);
        let pieces: Vec<f64> =
            (0..n).into_par_iter().map(|k| adaptive_simpson(&f, knots[k], knots[k + 1], seg_tol)).collect::<Result<_>>()?;
        let mut values = Vec::with_capacity(n + 1);
        let shift = adaptive_simpson(&f, lo, origin, QUADRATURE_TOL)?;
        let mut acc = -shift;
        values.push(acc);
        for p in pieces {
            acc += p;
            values.push(acc);
        }
        Ok(Antiderivative { knots, values, slopes })
    }

    fn range(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().unwrap())
    }

    /// (F, F′, F″) at x.
    fn eval(&self, x: f64) -> Result<(f64, f64, f64)> {
        let (lo, hi) = self.range();
        if !(x >= lo && x <= hi) {
            return Err(Error::DomainViolation(format!("{x} outside the reparametrization table [{lo}, {hi}]")));
        }
        let n = self.knots.len() - 1;
        let k = (self.knots.partition_point(|&t| t <= x)).clamp(1, n) - 1;
        let hk = self.knots[k + 1] - self.knots[k];
        let t = (x - self.knots[k]) / hk;
        let (f0, f1, s0, s1) = (self.values[k], self.values[k + 1], self.slopes[k], self.slopes[k + 1]);
        let (t2, t3) = (t * t, t * t * t);
        let val = (2.0 * t3 - 3.0 * t2 + 1.0) * f0
            + (t3 - 2.0 * t2 + t) * hk * s0
            + (-2.0 * t3 + 3.0 * t2) * f1
            + (t3 - t2) * hk * s1;
        let d1 = ((6.0 * t2 - 6.0 * t) * f0 + (-6.0 * t2 + 6.0 * t) * f1) / hk
            + (3.0 * t2 - 4.0 * t + 1.0) * s0
            + (3.0 * t2 - 2.0 * t) * s1;
        let d2 = ((12.0 * t - 6.0) * f0 + (-12.0 * t + 6.0) * f1) / (hk * hk)
            + ((6.0 * t - 4.0) * s0 + (6.0 * t - 2.0) * s1) / hk;
        Ok((val, d1, d2))
    }

    fn invert(&self, y: f64) -> Result<f64> {
        let (first, last) = (self.values[0], *self.values.last().unwrap());
        if !(y >= first && y <= last) {
            return Err(Error::DomainViolation(format!("{y} outside the chart image [{first}, {last}]")));
        }
        let n = self.knots.len() - 1;
        let k = (self.values.partition_point(|&t| t <= y)).clamp(1, n) - 1;
        solve_monotone(
            &|x: f64| Ok(self.eval(x)?.0),
            &|x: f64| Ok(self.eval(x)?.1),
            y,
            self.knots[k],
            self.knots[k + 1],
            1e-15,
        )
    }
}

/// Which construction produced a chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    AxisAlignedIntegral,
    ClosedFormRotated,
}

#[derive(Debug, Clone, PartialEq)]
enum Chart {
    Integral { u: Antiderivative, v: Antiderivative },
    Rotated(MeridianFamily),
}

/// Second-order jet of the inverse map (ū, v̄) ↦ (u, v).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseJet {
    pub u: f64,
    pub v: f64,
    /// (∂u/∂ū, ∂u/∂v̄)
    pub u1: [f64; 2],
    pub v1: [f64; 2],
    /// (∂²u/∂ū², ∂²u/∂ū∂v̄, ∂²u/∂v̄²)
    pub u2: [f64; 3],
    pub v2: [f64; 3],
}

/// A change of parameters (u, v) ↦ (ū, v̄) with its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct Reparametrization {
    chart: Chart,
}

impl Reparametrization {
    pub fn kind(&self) -> ChartKind {
        match self.chart {
            Chart::Integral { .. } => ChartKind::AxisAlignedIntegral,
            Chart::Rotated(_) => ChartKind::ClosedFormRotated,
        }
    }

    pub fn forward(&self, u: f64, v: f64) -> Result<(f64, f64)> {
        match &self.chart {
            Chart::Integral { u: fu, v: fv } => Ok((fu.eval(u)?.0, fv.eval(v)?.0)),
            Chart::Rotated(MeridianFamily::Euclidean) => {
                let p = u + 1.0;
                let l = (p + (p * p + 4.0).sqrt()).ln();
                Ok((l + v, -l + v))
            }
            Chart::Rotated(MeridianFamily::Parabolic) => {
                if u <= -1.0 {
                    return Err(Error::DomainViolation(format!("parabolic chart needs u > -1, got {u}")));
                }
                let w = (u + 1.0).sqrt();
                Ok((w + 0.5 * v, -w + 0.5 * v))
            }
        }
    }

    pub fn inverse(&self, ub: f64, vb: f64) -> Result<(f64, f64)> {
        match &self.chart {
            Chart::Integral { u, v } => Ok((u.invert(ub)?, v.invert(vb)?)),
            _ => {
                let j = self.inverse_jet(ub, vb)?;
                Ok((j.u, j.v))
            }
        }
    }

    pub fn inverse_jet(&self, ub: f64, vb: f64) -> Result<InverseJet> {
        match &self.chart {
            Chart::Integral { u: fu, v: fv } => {
                let (u, v) = (fu.invert(ub)?, fv.invert(vb)?);
                let (_, du, ddu) = fu.eval(u)?;
                let (_, dv, ddv) = fv.eval(v)?;
                Ok(InverseJet {
                    u,
                    v,
                    u1: [1.0 / du, 0.0],
                    v1: [0.0, 1.0 / dv],
                    u2: [-ddu / du.powi(3), 0.0, 0.0],
                    v2: [0.0, 0.0, -ddv / dv.powi(3)],
                })
            }
            Chart::Rotated(MeridianFamily::Euclidean) => {
                let s = 0.5 * (ub - vb);
                let (ep, em) = (s.exp(), 4.0 * (-s).exp());
                let us = 0.5 * (ep + em);
                let uss = 0.5 * (ep - em);
                Ok(InverseJet {
                    u: 0.5 * (ep - em) - 1.0,
                    v: 0.5 * (ub + vb),
                    u1: [0.5 * us, -0.5 * us],
                    v1: [0.5, 0.5],
                    u2: [0.25 * uss, -0.25 * uss, 0.25 * uss],
                    v2: [0.0; 3],
                })
            }
            Chart::Rotated(MeridianFamily::Parabolic) => {
                let w = 0.5 * (ub - vb);
                if w <= 0.0 {
                    return Err(Error::DomainViolation(format!(
                        "parabolic chart needs ū > v̄, got ({ub}, {vb})"
                    )));
                }
                Ok(InverseJet {
                    u: w * w - 1.0,
                    v: ub + vb,
                    u1: [w, -w],
                    v1: [1.0, 1.0],
                    u2: [0.5, -0.5, 0.5],
                    v2: [0.0; 3],
                })
            }
        }
    }

    /// Largest axis-aligned box, centred on the image of the centre of `d`, that the
    /// chart maps into `d`. Keeps the node counts of `d`.
    pub fn image_domain(&self, d: &ParamDomain) -> Result<ParamDomain> {
        d.validate()?;
        match &self.chart {
            Chart::Integral { .. } => {
                let (u0, v0) = self.forward(d.u_min, d.v_min)?;
                let (u1, v1) = self.forward(d.u_max, d.v_max)?;
                ParamDomain::new(u0, u1, v0, v1, d.n_u, d.n_v)
            }
            Chart::Rotated(fam) => {
                // ū = s + t, v̄ = −s + t with s monotone in u and t linear in v
                let (ua, _) = self.forward(d.u_min, 0.0)?;
                let (ub, _) = self.forward(d.u_max, 0.0)?;
                let (s0, s1) = (ua, ub);
                let tscale = match fam {
                    MeridianFamily::Euclidean => 1.0,
                    MeridianFamily::Parabolic => 0.5,
                };
                let (t0, t1) = (d.v_min * tscale, d.v_max * tscale);
                let (sc, tc) = (0.5 * (s0 + s1), 0.5 * (t0 + t1));
                let w = (0.5 * (s1 - s0)).min(0.5 * (t1 - t0));
                ParamDomain::new(sc + tc - w, sc + tc + w, -sc + tc - w, -sc + tc + w, d.n_u, d.n_v)
            }
        }
    }
}

/// The closed-form rotated chart of a meridian family.
pub fn meridian_canonical_chart(family: MeridianFamily) -> Reparametrization {
    Reparametrization { chart: Chart::Rotated(family) }
}

/// z̄(ū, v̄) = z(u(ū, v̄), v(ū, v̄)).
#[derive(Clone)]
pub struct ReparametrizedSurface {
    pub base: Arc<dyn SurfaceMap>,
    pub chart: Reparametrization,
}

impl ReparametrizedSurface {
    pub fn new(base: Arc<dyn SurfaceMap>, chart: Reparametrization) -> Self {
        ReparametrizedSurface { base, chart }
    }
}

impl SurfaceMap for ReparametrizedSurface {
    fn signature(&self) -> Signature {
        self.base.signature()
    }

    fn point(&self, ub: f64, vb: f64) -> Result<Vector4> {
        let (u, v) = self.chart.inverse(ub, vb)?;
        self.base.point(u, v)
    }

    fn analytic_jet(&self, ub: f64, vb: f64, order: JetOrder) -> Option<Result<SurfaceJet>> {
        if order == JetOrder::Three {
            return None;
        }
        let c = match self.chart.inverse_jet(ub, vb) {
            Ok(c) => c,
            Err(e) => return Some(Err(e)),
        };
        let j = match self.base.analytic_jet(c.u, c.v, JetOrder::Two)? {
            Ok(j) => j,
            Err(e) => return Some(Err(e)),
        };
        let first = |a: usize| j.z_u * c.u1[a] + j.z_v * c.v1[a];
        let second = |a: usize, b: usize, k: usize| {
            j.z_uu * (c.u1[a] * c.u1[b])
                + j.z_uv * (c.u1[a] * c.v1[b] + c.u1[b] * c.v1[a])
                + j.z_vv * (c.v1[a] * c.v1[b])
                + j.z_u * c.u2[k]
                + j.z_v * c.v2[k]
        };
        Some(Ok(SurfaceJet {
            z: j.z,
            z_u: first(0),
            z_v: first(1),
            z_uu: second(0, 0, 0),
            z_uv: second(0, 1, 1),
            z_vv: second(1, 1, 2),
            third: None,
        }))
    }
}

/// Axis-aligned canonical chart ū = ∫ √φ du, v̄ = ∫ √ψ dv, anchored so that
/// `origin` maps to (0, 0).
///
/// φ(u) is evaluated off the grid as the average of E|μ| over the grid's v-nodes
/// (and ψ likewise), matching how the sampled factors are defined. The table
/// covers the factor domain plus a tenth of its width on each side.
pub fn reparametrize_integral(
    m: Arc<dyn SurfaceMap>,
    f: &SeparableFactors,
    origin: (f64, f64),
) -> Result<(ReparametrizedSurface, Reparametrization)> {
    let d = f.domain;
    let s = f.signature;
    let h = d.default_step();
    let b = m.bounds();
    let pad = |lo: f64, hi: f64, bound: (f64, f64)| {
        let w = hi - lo;
        let margin = 0.1 * w;
        ((lo - margin).max(bound.0 + 1e-3 * w), (hi + margin).min(bound.1 - 1e-3 * w))
    };
    let (ulo, uhi) = pad(d.u_min, d.u_max, b.u);
    let (vlo, vhi) = pad(d.v_min, d.v_max, b.v);
    if !(origin.0 >= ulo && origin.0 <= uhi && origin.1 >= vlo && origin.1 <= vhi) {
        return Err(Error::DomainViolation(format!("origin {origin:?} outside the factor domain")));
    }
    let vs: Vec<f64> = (0..d.n_v).map(|j| d.v_at(j)).collect();
    let us: Vec<f64> = (0..d.n_u).map(|i| d.u_at(i)).collect();
    let mm = m.as_ref();
    let sqrt_phi = |u: f64| -> Result<f64> {
        let mut acc = 0.0;
        for &v in &vs {
            let (e, _, _, mu) = metric_and_mu(mm, u, v, s, h)?;
            acc += e * mu;
        }
        positive_sqrt(acc / vs.len() as f64)
    };
    let sqrt_psi = |v: f64| -> Result<f64> {
        let mut acc = 0.0;
        for &u in &us {
            let (_, _, g, mu) = metric_and_mu(mm, u, v, s, h)?;
            acc += g * mu;
        }
        positive_sqrt(acc / us.len() as f64)
    };
    let au = Antiderivative::build(&sqrt_phi, ulo, uhi, origin.0)?;
    let av = Antiderivative::build(&sqrt_psi, vlo, vhi, origin.1)?;
    let chart = Reparametrization { chart: Chart::Integral { u: au, v: av } };
    Ok((ReparametrizedSurface::new(m, chart.clone()), chart))
}

fn positive_sqrt(x: f64) -> Result<f64> {
    if x > 0.0 {
        Ok(x.sqrt())
    } else {
        Err(Error::NonMonotone { at: x })
    }
}
