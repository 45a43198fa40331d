//! Parametrized surfaces z(u, v) and their derivative jets.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pseudo_euclidean::{inner, Signature, Vector4};

/// Rectangular parameter domain sampled on an `n_u` × `n_v` node grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamDomain {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub n_u: usize,
    pub n_v: usize,
}

impl ParamDomain {
    pub fn new(u_min: f64, u_max: f64, v_min: f64, v_max: f64, n_u: usize, n_v: usize) -> Result<Self> {
        let d = ParamDomain { u_min, u_max, v_min, v_max, n_u, n_v };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.u_min, self.u_max, self.v_min, self.v_max].iter().all(|x| x.is_finite());
        if !finite || self.u_min >= self.u_max || self.v_min >= self.v_max {
            return Err(Error::InvalidInput(format!(
                "domain [{}, {}] x [{}, {}] is empty or not finite",
                self.u_min, self.u_max, self.v_min, self.v_max
            )));
        }
        if self.n_u < 3 || self.n_v < 3 {
            return Err(Error::GridTooSmall { n_u: self.n_u, n_v: self.n_v });
        }
        Ok(())
    }

    pub fn h_u(&self) -> f64 {
        (self.u_max - self.u_min) / (self.n_u - 1) as f64
    }

    pub fn h_v(&self) -> f64 {
        (self.v_max - self.v_min) / (self.n_v - 1) as f64
    }

    pub fn u_at(&self, i: usize) -> f64 {
        if i + 1 == self.n_u {
            self.u_max
        } else {
            self.u_min + i as f64 * self.h_u()
        }
    }

    pub fn v_at(&self, j: usize) -> f64 {
        if j + 1 == self.n_v {
            self.v_max
        } else {
            self.v_min + j as f64 * self.h_v()
        }
    }

    /// Default finite-difference step: (domain width)/(8 n), smallest over both axes.
    pub fn default_step(&self) -> f64 {
        let hu = (self.u_max - self.u_min) / (8.0 * self.n_u as f64);
        let hv = (self.v_max - self.v_min) / (8.0 * self.n_v as f64);
        hu.min(hv)
    }

    /// All nodes in row-major order (u outer, v inner).
    pub fn nodes(&self) -> Vec<(usize, usize, f64, f64)> {
        let mut out = Vec::with_capacity(self.n_u * self.n_v);
        for i in 0..self.n_u {
            for j in 0..self.n_v {
                out.push((i, j, self.u_at(i), self.v_at(j)));
            }
        }
        out
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= self.u_min && u <= self.u_max && v >= self.v_min && v <= self.v_max
    }
}

/// Open rectangle on which a surface evaluator is defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub u: (f64, f64),
    pub v: (f64, f64),
}

impl Bounds {
    pub fn unbounded() -> Self {
        Bounds { u: (f64::NEG_INFINITY, f64::INFINITY), v: (f64::NEG_INFINITY, f64::INFINITY) }
    }

    pub fn contains_with_margin(&self, u: f64, v: f64, reach: f64) -> bool {
        u - reach >= self.u.0 && u + reach <= self.u.1 && v - reach >= self.v.0 && v + reach <= self.v.1
    }
}

/// Requested jet order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JetOrder {
    Two,
    Three,
}

/// Third-order partials z_uuu, z_uuv, z_uvv, z_vvv.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThirdOrder {
    pub z_uuu: Vector4,
    pub z_uuv: Vector4,
    pub z_uvv: Vector4,
    pub z_vvv: Vector4,
}

/// Point value and partial derivatives of a surface at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceJet {
    pub z: Vector4,
    pub z_u: Vector4,
    pub z_v: Vector4,
    pub z_uu: Vector4,
    pub z_uv: Vector4,
    pub z_vv: Vector4,
    pub third: Option<ThirdOrder>,
}

impl SurfaceJet {
    /// The jet of the surface with the roles of u and v exchanged.
    pub fn transposed(&self) -> SurfaceJet {
        SurfaceJet {
            z: self.z,
            z_u: self.z_v,
            z_v: self.z_u,
            z_uu: self.z_vv,
            z_uv: self.z_uv,
            z_vv: self.z_uu,
            third: self.third.map(|t| ThirdOrder { z_uuu: t.z_vvv, z_uuv: t.z_uvv, z_uvv: t.z_uuv, z_vvv: t.z_uuu }),
        }
    }

    pub fn max_abs_diff(&self, other: &SurfaceJet) -> f64 {
        let mut m = [
            (self.z - other.z).amax(),
            (self.z_u - other.z_u).amax(),
            (self.z_v - other.z_v).amax(),
            (self.z_uu - other.z_uu).amax(),
            (self.z_uv - other.z_uv).amax(),
            (self.z_vv - other.z_vv).amax(),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        if let (Some(a), Some(b)) = (self.third, other.third) {
            for d in [a.z_uuu - b.z_uuu, a.z_uuv - b.z_uuv, a.z_uvv - b.z_uvv, a.z_vvv - b.z_vvv] {
                m = m.max(d.amax());
            }
        }
        m
    }
}

/// A parametrized surface in E⁴ or E⁴₁.
///
/// `point` must be a pure function. Families with closed-form partials override
/// `analytic_jet`; everything else is differentiated numerically by [`eval_jet`].
pub trait SurfaceMap: Send + Sync {
    fn signature(&self) -> Signature;

    fn point(&self, u: f64, v: f64) -> Result<Vector4>;

    fn bounds(&self) -> Bounds {
        Bounds::unbounded()
    }

    fn analytic_jet(&self, _u: f64, _v: f64, _order: JetOrder) -> Option<Result<SurfaceJet>> {
        None
    }
}

impl<T: SurfaceMap + ?Sized> SurfaceMap for Arc<T> {
    fn signature(&self) -> Signature {
        (**self).signature()
    }
    fn point(&self, u: f64, v: f64) -> Result<Vector4> {
        (**self).point(u, v)
    }
    fn bounds(&self) -> Bounds {
        (**self).bounds()
    }
    fn analytic_jet(&self, u: f64, v: f64, order: JetOrder) -> Option<Result<SurfaceJet>> {
        (**self).analytic_jet(u, v, order)
    }
}

type PointFn = dyn Fn(f64, f64) -> Vector4 + Send + Sync;
type JetFn = dyn Fn(f64, f64) -> SurfaceJet + Send + Sync;

/// Surface given by closures; handy for test surfaces and ad-hoc inputs.
pub struct FnSurface {
    signature: Signature,
    bounds: Bounds,
    point: Box<PointFn>,
    jet: Option<Box<JetFn>>,
}

impl FnSurface {
    pub fn new(signature: Signature, point: impl Fn(f64, f64) -> Vector4 + Send + Sync + 'static) -> Self {
        FnSurface { signature, bounds: Bounds::unbounded(), point: Box::new(point), jet: None }
    }

    /// Attach closed-form partials (order 3 if `third` is filled in).
    pub fn with_jet(mut self, jet: impl Fn(f64, f64) -> SurfaceJet + Send + Sync + 'static) -> Self {
        self.jet = Some(Box::new(jet));
        self
    }

    pub fn with_bounds(mut self, bounds: Bounds) -> Self {
        self.bounds = bounds;
        self
    }
}

impl SurfaceMap for FnSurface {
    fn signature(&self) -> Signature {
        self.signature
    }

    fn point(&self, u: f64, v: f64) -> Result<Vector4> {
        if !self.bounds.contains_with_margin(u, v, 0.0) {
            return Err(Error::OutOfDomain { u, v, reach: 0.0 });
        }
        Ok((self.point)(u, v))
    }

    fn bounds(&self) -> Bounds {
        self.bounds
    }

    fn analytic_jet(&self, u: f64, v: f64, order: JetOrder) -> Option<Result<SurfaceJet>> {
        let jet = self.jet.as_ref()?;
        if !self.bounds.contains_with_margin(u, v, 0.0) {
            return Some(Err(Error::OutOfDomain { u, v, reach: 0.0 }));
        }
        let j = jet(u, v);
        if order == JetOrder::Three && j.third.is_none() {
            return None;
        }
        Some(Ok(j))
    }
}

/// Jet at (u, v): closed form when the surface provides it, else central differences with step `h`.
pub fn eval_jet(m: &dyn SurfaceMap, u: f64, v: f64, order: JetOrder, h: f64) -> Result<SurfaceJet> {
    if let Some(j) = m.analytic_jet(u, v, order) {
        return j;
    }
    fd_jet(m, u, v, order, h)
}

/// Central-difference jet, second-order accurate in `h`.
pub fn fd_jet(m: &dyn SurfaceMap, u: f64, v: f64, order: JetOrder, h: f64) -> Result<SurfaceJet> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput(format!("finite-difference step must be positive, got {h}")));
    }
    let reach = match order {
        JetOrder::Two => h,
        JetOrder::Three => 2.0 * h,
    };
    if !m.bounds().contains_with_margin(u, v, reach) {
        return Err(Error::OutOfDomain { u, v, reach });
    }
    let p = |a: i32, b: i32| m.point(u + a as f64 * h, v + b as f64 * h);
    let z = p(0, 0)?;
    let (pu, mu_) = (p(1, 0)?, p(-1, 0)?);
    let (pv, mv) = (p(0, 1)?, p(0, -1)?);
    let (pp, pm, mp, mm) = (p(1, 1)?, p(1, -1)?, p(-1, 1)?, p(-1, -1)?);
    let h2 = h * h;
    let third = match order {
        JetOrder::Two => None,
        JetOrder::Three => {
            let h3 = h2 * h;
            let (p2u, m2u) = (p(2, 0)?, p(-2, 0)?);
            let (p2v, m2v) = (p(0, 2)?, p(0, -2)?);
            Some(ThirdOrder {
                z_uuu: (p2u - pu * 2.0 + mu_ * 2.0 - m2u) / (2.0 * h3),
                z_uuv: ((pp - pv * 2.0 + mp) - (pm - mv * 2.0 + mm)) / (2.0 * h3),
                z_uvv: ((pp - pu * 2.0 + pm) - (mp - mu_ * 2.0 + mm)) / (2.0 * h3),
                z_vvv: (p2v - pv * 2.0 + mv * 2.0 - m2v) / (2.0 * h3),
            })
        }
    };
    Ok(SurfaceJet {
        z,
        z_u: (pu - mu_) / (2.0 * h),
        z_v: (pv - mv) / (2.0 * h),
        z_uu: (pu - z * 2.0 + mu_) / h2,
        z_uv: (pp - pm - mp + mm) / (4.0 * h2),
        z_vv: (pv - z * 2.0 + mv) / h2,
        third,
    })
}

/// Coefficients E, F, G of the induced metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FundamentalForm1 {
    pub e: f64,
    pub f: f64,
    pub g: f64,
}

impl FundamentalForm1 {
    pub fn det(&self) -> f64 {
        self.e * self.g - self.f * self.f
    }

    /// Solves [E F; F G] (a, b)ᵀ = (p, q)ᵀ.
    pub fn solve(&self, p: f64, q: f64) -> (f64, f64) {
        let det = self.det();
        ((self.g * p - self.f * q) / det, (self.e * q - self.f * p) / det)
    }
}

pub fn first_form(j: &SurfaceJet, s: Signature) -> Result<FundamentalForm1> {
    let e = inner(&j.z_u, &j.z_u, s);
    let f = inner(&j.z_u, &j.z_v, s);
    let g = inner(&j.z_v, &j.z_v, s);
    let form = FundamentalForm1 { e, f, g };
    let det = form.det();
    if e <= 0.0 || g <= 0.0 || det <= 0.0 {
        return Err(match s {
            Signature::Minkowski => Error::NotSpacelike { e, det },
            Signature::Euclidean => Error::DegenerateMetric { det },
        });
    }
    Ok(form)
}
