//! Signature-aware linear algebra on 4-vectors.
//!
//! Everything here works for the Euclidean space E⁴ (index 0) and the
//! Minkowski space E⁴₁ (index 1, with ⟨e₄, e₄⟩ = −1). The signature is always
//! passed explicitly.

use nalgebra::{Matrix4, Vector4 as NVector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ambient 4-vector.
pub type Vector4 = NVector4<f64>;

/// Default tolerance for vectors derived from closed-form expressions.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Index of the ambient inner product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Signature {
    /// diag(1, 1, 1, 1)
    Euclidean,
    /// diag(1, 1, 1, −1)
    Minkowski,
}

impl Signature {
    pub fn from_index(index: u8) -> Result<Self> {
        match index {
            0 => Ok(Signature::Euclidean),
            1 => Ok(Signature::Minkowski),
            other => Err(Error::InvalidInput(format!("signature index {other} not in {{0, 1}}"))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Signature::Euclidean => 0,
            Signature::Minkowski => 1,
        }
    }

    /// Diagonal of the metric matrix.
    pub fn diagonal(self) -> [f64; 4] {
        match self {
            Signature::Euclidean => [1.0, 1.0, 1.0, 1.0],
            Signature::Minkowski => [1.0, 1.0, 1.0, -1.0],
        }
    }

    pub fn metric(self) -> Matrix4<f64> {
        Matrix4::from_diagonal(&NVector4::from(self.diagonal()))
    }

    /// Raises or lowers an index: `η v`. The metric is its own inverse.
    pub fn apply(self, v: &Vector4) -> Vector4 {
        let d = self.diagonal();
        Vector4::new(v[0] * d[0], v[1] * d[1], v[2] * d[2], v[3] * d[3])
    }
}

/// Causal character of the mean curvature direction of a spacelike surface in E⁴₁.
///
/// `Spacelike` means ⟨b, b⟩ = 1 and ⟨l, l⟩ = −1; `Timelike` the reverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Epsilon {
    Spacelike,
    Timelike,
}

impl Epsilon {
    pub fn value(self) -> f64 {
        match self {
            Epsilon::Spacelike => 1.0,
            Epsilon::Timelike => -1.0,
        }
    }

    pub fn from_value(value: i32) -> Result<Self> {
        match value {
            1 => Ok(Epsilon::Spacelike),
            -1 => Ok(Epsilon::Timelike),
            other => Err(Error::InvalidInput(format!("epsilon must be +1 or -1, got {other}"))),
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Epsilon::Spacelike => Epsilon::Timelike,
            Epsilon::Timelike => Epsilon::Spacelike,
        }
    }
}

/// Ambient space together with the causal type of the normal frame {b, l}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "space", content = "epsilon")]
pub enum Ambient {
    Euclidean,
    Minkowski(Epsilon),
}

impl Ambient {
    pub fn signature(self) -> Signature {
        match self {
            Ambient::Euclidean => Signature::Euclidean,
            Ambient::Minkowski(_) => Signature::Minkowski,
        }
    }

    pub fn epsilon(self) -> Option<Epsilon> {
        match self {
            Ambient::Euclidean => None,
            Ambient::Minkowski(e) => Some(e),
        }
    }

    /// Self inner products of the frame (x, y, b, l): diag(1, 1, ε, −ε) in E⁴₁.
    pub fn frame_metric(self) -> [f64; 4] {
        match self {
            Ambient::Euclidean => [1.0, 1.0, 1.0, 1.0],
            Ambient::Minkowski(e) => [1.0, 1.0, e.value(), -e.value()],
        }
    }
}

/// Causal classification of a single vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CausalCharacter {
    Spacelike,
    Timelike,
    Lightlike,
    Zero,
}

/// ⟨a, b⟩ with the last term negated in E⁴₁.
pub fn inner(a: &Vector4, b: &Vector4, s: Signature) -> f64 {
    let d = s.diagonal();
    a[0] * b[0] * d[0] + a[1] * b[1] * d[1] + a[2] * b[2] * d[2] + a[3] * b[3] * d[3]
}

/// sqrt(|⟨v, v⟩|).
pub fn norm(v: &Vector4, s: Signature) -> f64 {
    inner(v, v, s).abs().sqrt()
}

pub fn causal_character(v: &Vector4, s: Signature, tol: f64) -> CausalCharacter {
    if v.amax() < tol {
        return CausalCharacter::Zero;
    }
    let q = inner(v, v, s);
    if q.abs() < tol * v.norm_squared() {
        CausalCharacter::Lightlike
    } else if q > 0.0 {
        CausalCharacter::Spacelike
    } else {
        CausalCharacter::Timelike
    }
}

/// A unit vector with its causal sign ⟨v, v⟩ = ±1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedUnit {
    pub vector: Vector4,
    pub sign: f64,
}

/// Gram–Schmidt with respect to the signature inner product.
pub fn orthonormalize(vs: &[Vector4], s: Signature, tol: f64) -> Result<Vec<SignedUnit>> {
    let mut out: Vec<SignedUnit> = Vec::with_capacity(vs.len());
    for (step, v) in vs.iter().enumerate() {
        let mut w = *v;
        for o in &out {
            w -= o.vector * (inner(&w, &o.vector, s) * o.sign);
        }
        if w.amax() < tol * v.amax().max(1.0) {
            return Err(Error::DegenerateSpan { step });
        }
        let q = inner(&w, &w, s);
        if q.abs() < tol * w.norm_squared() {
            return Err(Error::LightlikeStep { step });
        }
        out.push(SignedUnit { vector: w / q.abs().sqrt(), sign: q.signum() });
    }
    Ok(out)
}

/// Euclidean determinant of the matrix with columns a, b, c, d.
pub fn det4(a: &Vector4, b: &Vector4, c: &Vector4, d: &Vector4) -> f64 {
    Matrix4::from_columns(&[*a, *b, *c, *d]).determinant()
}

/// The vector w with w·v = det[a, b, c, v] for every v (Euclidean dot).
pub fn cross3(a: &Vector4, b: &Vector4, c: &Vector4) -> Vector4 {
    let mut w = Vector4::zeros();
    for k in 0..4 {
        let mut e = Vector4::zeros();
        e[k] = 1.0;
        w[k] = det4(a, b, c, &e);
    }
    w
}

/// Unit vector of the standard basis.
pub fn basis(k: usize) -> Vector4 {
    let mut e = Vector4::zeros();
    e[k] = 1.0;
    e
}

/// Max over entries of |Oᵀ η O − target| for frame vectors O.
pub fn gram_defect(frame: &[Vector4], s: Signature, target: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in frame.iter().enumerate() {
        for (j, b) in frame.iter().enumerate() {
            let want = if i == j { target[i] } else { 0.0 };
            worst = worst.max((inner(a, b, s) - want).abs());
        }
    }
    worst
}
