//! Circuit distance and its recovery from a Bell value.

use crate::error::{Error, Result};
use crate::linalg::{UnitaryMatrix, TOLERANCE};

/// `D(U1, U2) = sqrt(1 - |Tr(U1^T U2) / d|^2)`.
///
/// Uses the plain transpose. For real circuits this is the usual
/// conjugate-transpose distance; for complex inputs it is zero exactly when
/// `U2 U1^T` is proportional to the identity.
pub fn circuit_distance(u1: &UnitaryMatrix, u2: &UnitaryMatrix) -> Result<f64> {
    let d = u1.dim();
    if u2.dim() != d {
        return Err(Error::Shape(format!("unitaries of dimension {d} and {}", u2.dim())));
    }
    // Tr(U1^T U2) = sum_{ij} U1[i][j] U2[i][j]
    let tr: num_complex::Complex64 = u1.entries().iter().zip(u2.entries()).map(|(a, b)| a * b).sum();
    let overlap = (tr / d as f64).norm_sqr();
    Ok(clamped_sqrt(1.0 - overlap))
}

fn clamped_sqrt(x: f64) -> f64 {
    x.clamp(0.0, 1.0).sqrt()
}

fn check_value(v: f64, d: usize, m: usize) -> Result<()> {
    if d < 2 || m < 1 {
        return Err(Error::InvalidDimension(format!("d={d}, m={m}")));
    }
    let (lo, hi) = (-(m as f64), (m * (d - 1)) as f64);
    if !(v >= lo - TOLERANCE && v <= hi + TOLERANCE) {
        return Err(Error::Range(format!(
            "Bell value {v} outside the physical range [{lo}, {hi}]"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceBounds {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub d: usize,
    pub m: usize,
}

/// `sqrt(1 - (V+m)/(md)) <= D <= sqrt(1 - (V - m(d-2))/m)`, radicands clamped to `[0, 1]`.
pub fn distance_bounds_from_value(value: f64, d: usize, m: usize) -> Result<DistanceBounds> {
    check_value(value, d, m)?;
    let (df, mf) = (d as f64, m as f64);
    let lower = clamped_sqrt(1.0 - (value + mf) / (mf * df));
    let upper = clamped_sqrt(1.0 - (value - mf * (df - 2.0)) / mf);
    Ok(DistanceBounds {
        value,
        lower,
        upper,
        d,
        m,
    })
}

/// Exact distance `sqrt(1 - (V+m)/(md))` for a Bell value measured on a pair of
/// doubled circuits; `d` is the doubled dimension `4^n`.
pub fn distance_from_embedded_value(value: f64, d: usize, m: usize) -> Result<f64> {
    if !(d.is_power_of_two() && d.trailing_zeros().is_multiple_of(2) && d >= 4) {
        return Err(Error::Shape(format!(
            "embedded dimension must be 4^n with n >= 1, got {d}"
        )));
    }
    check_value(value, d, m)?;
    Ok(clamped_sqrt(1.0 - (value + m as f64) / (m * d) as f64))
}

/// `sqrt(1 - I')` with `I'` clamped to `[0, 1]`.
pub fn normalized_to_distance(normalized: f64) -> f64 {
    clamped_sqrt(1.0 - normalized)
}
