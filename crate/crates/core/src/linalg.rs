//! Dense complex linear algebra, the maximally entangled state, and random
//! matrix and vector sources.
//!
//! Bipartite states of dimension `d * d` use the index convention
//! `i * d + j`, with `i` the first (Alice) register and `j` the second (Bob).

use std::fmt;
use std::ops::Deref;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Tolerance for unitarity, normalization and other exactness checks.
pub const TOLERANCE: f64 = 1e-9;

pub type ComplexScalar = Complex64;

pub(crate) const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = v;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension("matrix dimension must be positive".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::Shape(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NumericalInconsistency("non-finite matrix entry".into()));
        }
        Ok(Self { dim, data })
    }

    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        Self::from_row_major(dim, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub(crate) fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.dim != other.dim {
            return Err(Error::Shape(format!(
                "cannot multiply {0}x{0} by {1}x{1}",
                self.dim, other.dim
            )));
        }
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Matrix {
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j];
            }
        }
        out
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn adjoint(&self) -> Matrix {
        self.transpose().conj()
    }

    pub fn kron(&self, other: &Matrix) -> Matrix {
        let (p, q) = (self.dim, other.dim);
        let n = p * q;
        let mut out = Matrix::zeros(n);
        for i in 0..p {
            for j in 0..p {
                let a = self.data[i * p + j];
                if a == ZERO {
                    continue;
                }
                for k in 0..q {
                    for l in 0..q {
                        out.data[(i * q + k) * n + j * q + l] = a * other.data[k * q + l];
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn scale(&self, factor: Complex64) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Matrix> {
        if self.dim != other.dim {
            return Err(Error::Shape(format!("{} vs {}", self.dim, other.dim)));
        }
        Ok(Matrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max-abs deviation of `self^† self` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut acc = ZERO;
                for k in 0..n {
                    acc += self.data[k * n + i].conj() * self.data[k * n + j];
                }
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((acc - target).norm());
            }
        }
        worst
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.data.iter().all(|z| z.im.abs() <= tol)
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        let n = self.dim;
        (0..n)
            .map(|i| self.data[i * n..(i + 1) * n].iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self.get(i, j);
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// A matrix that has passed the unitarity check `U^† U = I` within [`TOLERANCE`].
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix(Matrix);

impl UnitaryMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        let defect = m.unitarity_defect();
        if defect > TOLERANCE {
            return Err(Error::NumericalInconsistency(format!(
                "matrix is not unitary (max deviation {defect:.3e})"
            )));
        }
        Ok(Self(m))
    }

    /// Wraps a matrix that is unitary by construction.
    pub(crate) fn new_unchecked(m: Matrix) -> Self {
        debug_assert!(m.unitarity_defect() < 1e-6);
        Self(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self(Matrix::identity(dim))
    }

    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        Self::new(Matrix::from_real(dim, data)?)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn compose(&self, other: &UnitaryMatrix) -> Result<UnitaryMatrix> {
        Ok(Self(self.0.matmul(&other.0)?))
    }

    pub fn kron(&self, other: &UnitaryMatrix) -> UnitaryMatrix {
        Self(self.0.kron(&other.0))
    }

    pub fn transpose(&self) -> UnitaryMatrix {
        Self(self.0.transpose())
    }

    pub fn adjoint(&self) -> UnitaryMatrix {
        Self(self.0.adjoint())
    }

    pub fn conj(&self) -> UnitaryMatrix {
        Self(self.0.conj())
    }

    pub fn neg(&self) -> UnitaryMatrix {
        Self(self.0.scale(Complex64::new(-1.0, 0.0)))
    }
}

impl Deref for UnitaryMatrix {
    type Target = Matrix;

    fn deref(&self) -> &Matrix {
        &self.0
    }
}

/// Normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Accepts amplitudes whose squared norm is 1 within [`TOLERANCE`].
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidDimension("state must have at least one amplitude".into()));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NumericalInconsistency("non-finite amplitude".into()));
        }
        let norm_sqr: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > TOLERANCE {
            return Err(Error::NumericalInconsistency(format!(
                "state is not normalized (|psi|^2 = {norm_sqr})"
            )));
        }
        Ok(Self { amps })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(mut amps: Vec<Complex64>) -> Result<Self> {
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NumericalInconsistency(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        for z in &mut amps {
            *z /= norm;
        }
        Self::new(amps)
    }

    pub(crate) fn new_unchecked(amps: Vec<Complex64>) -> Self {
        Self { amps }
    }

    /// Computational basis state `|index>` in dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Shape(format!("basis index {index} >= dimension {dim}")));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(Self { amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Multiplies by a global phase `e^{i theta}`.
    pub fn with_phase(&self, theta: f64) -> StateVector {
        let p = Complex64::from_polar(1.0, theta);
        Self {
            amps: self.amps.iter().map(|&z| z * p).collect(),
        }
    }

    /// Local dimension `d` of a `d * d` bipartite state.
    pub fn local_dim(&self) -> Result<usize> {
        let n = self.amps.len();
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n {
            return Err(Error::Shape(format!("state of dimension {n} is not bipartite d x d")));
        }
        Ok(d)
    }

    pub fn kron(&self, other: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for &a in &self.amps {
            for &b in &other.amps {
                amps.push(a * b);
            }
        }
        Self { amps }
    }

    /// Euclidean distance to another state of the same dimension.
    pub fn distance(&self, other: &StateVector) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// `(1/sqrt(d)) * sum_i |ii>`.
pub fn max_entangled(d: usize) -> Result<StateVector> {
    if d == 0 {
        return Err(Error::InvalidDimension("d must be at least 1".into()));
    }
    let mut amps = vec![ZERO; d * d];
    let a = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    for i in 0..d {
        amps[i * d + i] = a;
    }
    Ok(StateVector { amps })
}

/// `(M ⊗ N) psi` for arbitrary square `M`, `N` acting on a `d * d` amplitude vector.
///
/// Viewing `psi` as the `d x d` grid `Psi[i][j]`, the product is `M Psi N^T`, so the
/// `d^2 x d^2` Kronecker matrix is never formed.
pub fn apply_bilocal_raw(m: &Matrix, n: &Matrix, psi: &[Complex64]) -> Result<Vec<Complex64>> {
    let d = m.dim();
    if n.dim() != d || psi.len() != d * d {
        return Err(Error::Shape(format!(
            "bilocal operator of local dims ({}, {}) on state of dimension {}",
            d,
            n.dim(),
            psi.len()
        )));
    }
    // tmp = M * Psi
    let mut tmp = vec![ZERO; d * d];
    for i in 0..d {
        for k in 0..d {
            let a = m.get(i, k);
            if a == ZERO {
                continue;
            }
            let src = &psi[k * d..(k + 1) * d];
            let dst = &mut tmp[i * d..(i + 1) * d];
            for (t, &p) in dst.iter_mut().zip(src) {
                *t += a * p;
            }
        }
    }
    // out = tmp * N^T, i.e. out[i][j] = sum_l tmp[i][l] * N[j][l]
    let mut out = vec![ZERO; d * d];
    for i in 0..d {
        let row = &tmp[i * d..(i + 1) * d];
        for j in 0..d {
            let nrow = &n.entries()[j * d..(j + 1) * d];
            out[i * d + j] = row.iter().zip(nrow).map(|(&t, &b)| t * b).sum();
        }
    }
    Ok(out)
}

/// `(M ⊗ N) psi` for unitary `M`, `N`.
pub fn apply_bilocal(m: &UnitaryMatrix, n: &UnitaryMatrix, psi: &StateVector) -> Result<StateVector> {
    Ok(StateVector::new_unchecked(apply_bilocal_raw(m, n, psi.amplitudes())?))
}

/// `<psi|phi>`, conjugating the first argument.
pub fn inner(psi: &StateVector, phi: &StateVector) -> Result<Complex64> {
    inner_raw(psi.amplitudes(), phi.amplitudes())
}

pub(crate) fn inner_raw(psi: &[Complex64], phi: &[Complex64]) -> Result<Complex64> {
    if psi.len() != phi.len() {
        return Err(Error::Shape(format!(
            "inner product of dimensions {} and {}",
            psi.len(),
            phi.len()
        )));
    }
    Ok(psi.iter().zip(phi).map(|(a, b)| a.conj() * b).sum())
}

/// Haar-distributed real orthogonal matrix.
///
/// QR of an i.i.d. standard Gaussian matrix, with each column of `Q` multiplied by
/// the sign of the matching diagonal entry of `R`.
pub fn random_real_orthogonal(dim: usize, rng: &mut RngStream) -> Result<UnitaryMatrix> {
    if dim == 0 {
        return Err(Error::InvalidDimension("dim must be at least 1".into()));
    }
    let gauss: Vec<f64> = (0..dim * dim).map(|_| rng.standard_normal()).collect();
    let g = DMatrix::from_row_slice(dim, dim, &gauss);
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    let mut data = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            data.push(Complex64::new(q[(i, j)], 0.0));
        }
    }
    Ok(UnitaryMatrix::new_unchecked(Matrix { dim, data }))
}

/// Haar-distributed complex unitary matrix (phase-corrected QR of a complex Ginibre matrix).
pub fn random_unitary(dim: usize, rng: &mut RngStream) -> Result<UnitaryMatrix> {
    if dim == 0 {
        return Err(Error::InvalidDimension("dim must be at least 1".into()));
    }
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let gauss: Vec<Complex64> = (0..dim * dim)
        .map(|_| Complex64::new(rng.standard_normal() * scale, rng.standard_normal() * scale))
        .collect();
    let g = DMatrix::from_row_slice(dim, dim, &gauss);
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let rjj = r[(j, j)];
        let norm = rjj.norm();
        if norm > 0.0 {
            let phase = rjj / norm;
            for i in 0..dim {
                q[(i, j)] *= phase;
            }
        }
    }
    let mut data = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            data.push(q[(i, j)]);
        }
    }
    Ok(UnitaryMatrix::new_unchecked(Matrix { dim, data }))
}

/// Uniform point on the real unit sphere of the given dimension.
pub fn random_real_unit_vector(dim: usize, rng: &mut RngStream) -> Result<StateVector> {
    if dim == 0 {
        return Err(Error::InvalidDimension("dim must be at least 1".into()));
    }
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.standard_normal()).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return Ok(StateVector::new_unchecked(
                v.into_iter().map(|x| Complex64::new(x / norm, 0.0)).collect(),
            ));
        }
    }
}

/// Uniform (Haar) random pure state in complex dimension `dim`.
pub fn random_state(dim: usize, rng: &mut RngStream) -> Result<StateVector> {
    if dim == 0 {
        return Err(Error::InvalidDimension("dim must be at least 1".into()));
    }
    let v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.standard_normal(), rng.standard_normal()))
        .collect();
    StateVector::normalized(v)
}

/// Pauli and Hadamard matrices used throughout.
pub mod paulis {
    use super::*;

    pub fn x() -> UnitaryMatrix {
        UnitaryMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    pub fn z() -> UnitaryMatrix {
        UnitaryMatrix::from_real(2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
    }

    pub fn h() -> UnitaryMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        UnitaryMatrix::from_real(2, &[s, s, s, -s]).unwrap()
    }
}
