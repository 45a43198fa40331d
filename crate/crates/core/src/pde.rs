//! The compatibility PDE systems for (λ, μ, ν) in canonical parameters, evaluated
//! as residuals on sampled grids.
//!
//! Euclidean:  ν_u = λ_v − λ(ln|μ|)_v,  ν_v = λ_u − λ(ln|μ|)_u,
//!             ν² − (λ² + μ²) = ½|μ| Δ ln|μ|.
//! Minkowski:  same first two, and ε(ν² − λ² + μ²) = ½|μ| Δ ln|μ|.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canonical::meridian_canonical_chart;
use crate::error::{Error, Result};
use crate::meridian::{closed_form_functions, CurvatureProfile, MeridianFamily};
use crate::pseudo_euclidean::Epsilon;
use crate::surface::ParamDomain;

/// Nodes with |μ| below this are excluded from residual norms.
pub const MU_FLOOR: f64 = 1e-12;

/// Scalar samples on a uniform grid, row-major with u outer. NaN marks an invalid node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    pub values: Vec<f64>,
    pub n_u: usize,
    pub n_v: usize,
    pub spacing: (f64, f64),
    pub origin: (f64, f64),
}

impl GridField {
    pub fn new(values: Vec<f64>, n_u: usize, n_v: usize, spacing: (f64, f64), origin: (f64, f64)) -> Result<Self> {
        if values.len() != n_u * n_v {
            return Err(Error::ShapeMismatch(format!("{} values for a {n_u} x {n_v} grid", values.len())));
        }
        if !(spacing.0 > 0.0 && spacing.1 > 0.0) {
            return Err(Error::InvalidInput(format!("grid spacing must be positive, got {spacing:?}")));
        }
        Ok(GridField { values, n_u, n_v, spacing, origin })
    }

    /// Samples `f` at the nodes of `d`.
    pub fn from_fn(d: &ParamDomain, f: impl Fn(f64, f64) -> f64 + Sync) -> Result<Self> {
        d.validate()?;
        let values = d.nodes().par_iter().map(|&(_, _, u, v)| f(u, v)).collect();
        Self::new(values, d.n_u, d.n_v, (d.h_u(), d.h_v()), (d.u_min, d.v_min))
    }

    pub fn domain(&self) -> Result<ParamDomain> {
        ParamDomain::new(
            self.origin.0,
            self.origin.0 + self.spacing.0 * (self.n_u - 1) as f64,
            self.origin.1,
            self.origin.1 + self.spacing.1 * (self.n_v - 1) as f64,
            self.n_u,
            self.n_v,
        )
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_v + j]
    }

    pub fn u_at(&self, i: usize) -> f64 {
        self.origin.0 + i as f64 * self.spacing.0
    }

    pub fn v_at(&self, j: usize) -> f64 {
        self.origin.1 + j as f64 * self.spacing.1
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridField {
        GridField { values: self.values.iter().map(|&x| f(x)).collect(), ..self.clone() }
    }

    fn same_shape(&self, other: &GridField) -> Result<()> {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()));
        if self.n_u != other.n_u
            || self.n_v != other.n_v
            || !close(self.spacing.0, other.spacing.0)
            || !close(self.spacing.1, other.spacing.1)
            || !close(self.origin.0, other.origin.0)
            || !close(self.origin.1, other.origin.1)
        {
            return Err(Error::ShapeMismatch("fields do not share one grid".into()));
        }
        Ok(())
    }

    fn check_size(&self) -> Result<()> {
        if self.n_u < 3 || self.n_v < 3 {
            return Err(Error::GridTooSmall { n_u: self.n_u, n_v: self.n_v });
        }
        Ok(())
    }

    /// Builds an interior-only field; the boundary ring is NaN.
    fn interior(&self, f: impl Fn(usize, usize) -> f64) -> GridField {
        let mut values = vec![f64::NAN; self.values.len()];
        for i in 1..self.n_u - 1 {
            for j in 1..self.n_v - 1 {
                values[i * self.n_v + j] = f(i, j);
            }
        }
        GridField { values, ..self.clone() }
    }
}

/// Five-point Laplacian; the boundary ring is marked invalid.
pub fn laplacian(f: &GridField) -> Result<GridField> {
    f.check_size()?;
    let (hu2, hv2) = (f.spacing.0 * f.spacing.0, f.spacing.1 * f.spacing.1);
    Ok(f.interior(|i, j| {
        let c = 2.0 * f.at(i, j);
        (f.at(i + 1, j) - c + f.at(i - 1, j)) / hu2 + (f.at(i, j + 1) - c + f.at(i, j - 1)) / hv2
    }))
}

/// Central difference in u on the interior.
pub fn d_u(f: &GridField) -> Result<GridField> {
    f.check_size()?;
    let h2 = 2.0 * f.spacing.0;
    Ok(f.interior(|i, j| (f.at(i + 1, j) - f.at(i - 1, j)) / h2))
}

/// Central difference in v on the interior.
pub fn d_v(f: &GridField) -> Result<GridField> {
    f.check_size()?;
    let h2 = 2.0 * f.spacing.1;
    Ok(f.interior(|i, j| (f.at(i, j + 1) - f.at(i, j - 1)) / h2))
}

/// Sup and RMS norms over the valid (non-NaN) nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub sup: f64,
    pub rms: f64,
}

impl Norms {
    pub fn of(values: &[f64]) -> Norms {
        let valid: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
        if valid.is_empty() {
            return Norms { sup: f64::NAN, rms: f64::NAN };
        }
        let sup = valid.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let rms = (valid.iter().map(|x| x * x).sum::<f64>() / valid.len() as f64).sqrt();
        Norms { sup, rms }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub r1: Norms,
    pub r2: Norms,
    pub r3: Norms,
    /// ±1 for the Minkowski system, absent for the Euclidean one.
    pub epsilon: Option<i8>,
    /// Nodes dropped because |μ| < 10⁻¹².
    pub excluded: usize,
    /// Interior nodes that entered the norms.
    pub valid: usize,
}

impl ResidualReport {
    pub fn sup(&self) -> f64 {
        self.r1.sup.max(self.r2.sup).max(self.r3.sup)
    }
}

/// The three residual fields, interior only.
pub struct ResidualFields {
    pub r1: GridField,
    pub r2: GridField,
    pub r3: GridField,
    pub excluded: usize,
}

/// Residual fields of either system; `eps = None` selects the Euclidean one.
pub fn residual_fields(lam: &GridField, mu: &GridField, nu: &GridField, eps: Option<Epsilon>) -> Result<ResidualFields> {
    lam.same_shape(mu)?;
    lam.same_shape(nu)?;
    lam.check_size()?;
    let excluded = mu.values.iter().filter(|m| !(m.abs() >= MU_FLOOR)).count();
    if excluded == mu.values.len() {
        return Err(Error::MuVanishes);
    }
    let log_mu = mu.map(|m| if m.abs() >= MU_FLOOR { m.abs().ln() } else { f64::NAN });
    let (lu, lv) = (d_u(lam)?, d_v(lam)?);
    let (nuu, nuv) = (d_u(nu)?, d_v(nu)?);
    let (gu, gv) = (d_u(&log_mu)?, d_v(&log_mu)?);
    let lap = laplacian(&log_mu)?;
    let n = lam.values.len();
    let mut r1 = vec![f64::NAN; n];
    let mut r2 = vec![f64::NAN; n];
    let mut r3 = vec![f64::NAN; n];
    for k in 0..n {
        let (l, m, v) = (lam.values[k], mu.values[k], nu.values[k]);
        r1[k] = nuu.values[k] - lv.values[k] + l * gv.values[k];
        r2[k] = nuv.values[k] - lu.values[k] + l * gu.values[k];
        let rhs = 0.5 * m.abs() * lap.values[k];
        r3[k] = match eps {
            None => v * v - l * l - m * m - rhs,
            Some(e) => e.value() * (v * v - l * l + m * m) - rhs,
        };
    }
    let wrap = |values: Vec<f64>| GridField { values, ..lam.clone() };
    Ok(ResidualFields { r1: wrap(r1), r2: wrap(r2), r3: wrap(r3), excluded })
}

fn report(f: ResidualFields, eps: Option<Epsilon>) -> Result<ResidualReport> {
    let valid = f
        .r1
        .values
        .iter()
        .zip(&f.r2.values)
        .zip(&f.r3.values)
        .filter(|((a, b), c)| a.is_finite() && b.is_finite() && c.is_finite())
        .count();
    if valid == 0 {
        return Err(Error::MuVanishes);
    }
    Ok(ResidualReport {
        r1: Norms::of(&f.r1.values),
        r2: Norms::of(&f.r2.values),
        r3: Norms::of(&f.r3.values),
        epsilon: eps.map(|e| e.value() as i8),
        excluded: f.excluded,
        valid,
    })
}

pub fn residual_euclidean(lam: &GridField, mu: &GridField, nu: &GridField) -> Result<ResidualReport> {
    report(residual_fields(lam, mu, nu, None)?, None)
}

pub fn residual_minkowski(lam: &GridField, mu: &GridField, nu: &GridField, eps: Epsilon) -> Result<ResidualReport> {
    report(residual_fields(lam, mu, nu, Some(eps))?, Some(eps))
}

/// The sampled fields (λ, μ, ν) of a meridian family in its rotated canonical
/// chart, on the canonical grid `d`.
pub fn model_solution(
    family: MeridianFamily,
    kappa: &CurvatureProfile,
    d: &ParamDomain,
) -> Result<(GridField, GridField, GridField)> {
    d.validate()?;
    let chart = meridian_canonical_chart(family);
    let triples: Vec<(f64, f64, f64)> = d
        .nodes()
        .par_iter()
        .map(|&(_, _, ub, vb)| {
            let (u, v) = chart.inverse(ub, vb)?;
            closed_form_functions(family, kappa, u, v)
        })
        .collect::<Result<_>>()?;
    let field = |k: usize| {
        let values = triples.iter().map(|t| [t.0, t.1, t.2][k]).collect();
        GridField::new(values, d.n_u, d.n_v, (d.h_u(), d.h_v()), (d.u_min, d.v_min))
    };
    Ok((field(0)?, field(1)?, field(2)?))
}
