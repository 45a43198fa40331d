//! Small numerical kernels: a classical RK4 step, adaptive Simpson quadrature
//! and a bracketed Newton solver for monotone functions.

use nalgebra::SVector;

use crate::error::{Error, Result};

/// One classical Runge–Kutta step of size `h` for y' = f(t, y).
pub fn rk4_step<const N: usize>(
    f: &impl Fn(f64, &SVector<f64, N>) -> SVector<f64, N>,
    t: f64,
    y: &SVector<f64, N>,
    h: f64,
) -> SVector<f64, N> {
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &(y + k1 * (0.5 * h)));
    let k3 = f(t + 0.5 * h, &(y + k2 * (0.5 * h)));
    let k4 = f(t + h, &(y + k3 * h));
    y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

const MAX_DEPTH: u32 = 48;

/// ∫ₐᵇ f by adaptive Simpson with Richardson correction, to absolute tolerance `tol`.
///
/// The interval is first cut into four panels; each panel is refined until the
/// two-half estimate agrees with the whole-panel estimate.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let panels = 4;
    let w = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let lo = a + k as f64 * w;
        let hi = if k + 1 == panels { b } else { lo + w };
        let (fa, fb, fm) = (f(lo), f(hi), f(0.5 * (lo + hi)));
        let whole = simpson(lo, hi, fa, fm, fb);
        total += refine(f, lo, hi, fa, fm, fb, whole, tol / panels as f64, MAX_DEPTH)?;
    }
    if !total.is_finite() {
        return Err(Error::QuadratureFailure { a, b });
    }
    Ok(total)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (flm, frm) = (f(0.5 * (a + m)), f(0.5 * (m + b)));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return Err(Error::QuadratureFailure { a, b });
    }
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::QuadratureFailure { a, b });
    }
    Ok(refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Solves g(x) = target for increasing g on [lo, hi], given g′ > 0.
pub fn solve_monotone(
    g: &impl Fn(f64) -> Result<f64>,
    dg: &impl Fn(f64) -> Result<f64>,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64> {
    let (glo, ghi) = (g(lo)? - target, g(hi)? - target);
    if glo > 0.0 || ghi < 0.0 {
        return Err(Error::NonMonotone { at: target });
    }
    let mut x = lo + (hi - lo) * (-glo / (ghi - glo)).clamp(0.0, 1.0);
    for _ in 0..200 {
        let r = g(x)? - target;
        if r == 0.0 {
            return Ok(x);
        }
        if r < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let slope = dg(x)?;
        if !(slope > 0.0) {
            return Err(Error::NonMonotone { at: x });
        }
        let mut next = x - r / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= tol * (1.0 + x.abs()) || hi - lo <= tol * (1.0 + x.abs()) {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::NonMonotone { at: x })
}

/// Least-squares slope of log(err) against log(h).
pub fn convergence_order(hs: &[f64], errs: &[f64]) -> f64 {
    let n = hs.len() as f64;
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
