//! Fourier-shifted measurement bases, their unitary observables, outcome
//! statistics, and the single-qubit product decomposition of the bases.
//!
//! Alice's setting `x` (1-based) has eigenvectors
//! `|a>_x = d^{-1/2} sum_k exp(+2πi k (a - α_x) / d) |k>` with `α_x = (x - 1/2)/m`;
//! Bob's setting `y` uses `exp(-2πi k (b - β_y) / d)` with `β_y = y/m`.

use std::collections::HashMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{apply_bilocal_raw, Matrix, StateVector, UnitaryMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    /// Phase shift of the given setting: `α_x` for Alice, `β_y` for Bob.
    pub fn shift(self, setting: usize, m: usize) -> f64 {
        match self {
            Party::Alice => (setting as f64 - 0.5) / m as f64,
            Party::Bob => setting as f64 / m as f64,
        }
    }

    fn sign(self) -> f64 {
        match self {
            Party::Alice => 1.0,
            Party::Bob => -1.0,
        }
    }
}

#[derive(Debug)]
pub struct MeasurementBasis {
    pub d: usize,
    pub m: usize,
    pub setting: usize,
    pub party: Party,
    vectors: Vec<StateVector>,
    /// Row `a` holds the bra `<a|`.
    bras: Matrix,
}

impl MeasurementBasis {
    pub fn vectors(&self) -> &[StateVector] {
        &self.vectors
    }

    pub fn vector(&self, outcome: usize) -> &StateVector {
        &self.vectors[outcome]
    }

    pub(crate) fn bras(&self) -> &Matrix {
        &self.bras
    }
}

type BasisKey = (usize, usize, usize, Party);

fn cache() -> &'static RwLock<HashMap<BasisKey, Arc<MeasurementBasis>>> {
    static CACHE: OnceLock<RwLock<HashMap<BasisKey, Arc<MeasurementBasis>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn check_setting(setting: usize, m: usize) -> Result<()> {
    if setting == 0 || setting > m {
        return Err(Error::SettingOutOfRange { setting, m });
    }
    Ok(())
}

fn check_dims(d: usize, m: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!("d must be at least 2, got {d}")));
    }
    if m < 1 {
        return Err(Error::InvalidDimension("m must be at least 1".into()));
    }
    Ok(())
}

/// The `d` eigenvectors of one party's measurement setting. Cached per
/// `(d, m, setting, party)`.
pub fn basis(d: usize, m: usize, setting: usize, party: Party) -> Result<Arc<MeasurementBasis>> {
    check_dims(d, m)?;
    check_setting(setting, m)?;
    let key = (d, m, setting, party);
    if let Some(b) = cache().read().expect("basis cache poisoned").get(&key) {
        return Ok(Arc::clone(b));
    }
    let built = Arc::new(build_basis(d, m, setting, party));
    let mut w = cache().write().expect("basis cache poisoned");
    Ok(Arc::clone(w.entry(key).or_insert(built)))
}

fn build_basis(d: usize, m: usize, setting: usize, party: Party) -> MeasurementBasis {
    let shift = party.shift(setting, m);
    let sign = party.sign();
    let norm = 1.0 / (d as f64).sqrt();
    let mut vectors = Vec::with_capacity(d);
    let mut bras = Vec::with_capacity(d * d);
    for outcome in 0..d {
        let amps: Vec<Complex64> = (0..d)
            .map(|k| {
                let theta = sign * 2.0 * PI * k as f64 * (outcome as f64 - shift) / d as f64;
                Complex64::from_polar(norm, theta)
            })
            .collect();
        bras.extend(amps.iter().map(|z| z.conj()));
        vectors.push(StateVector::new_unchecked(amps));
    }
    MeasurementBasis {
        d,
        m,
        setting,
        party,
        vectors,
        bras: Matrix::from_row_major(d, bras).expect("basis is square"),
    }
}

/// `A_i^l = sum_a ω^{a l} |a>_i <a|_i` for Alice, and `B̄_i^l = (A_i^l)^*` for Bob.
pub fn observable_power(d: usize, m: usize, setting: usize, power: usize, party: Party) -> Result<UnitaryMatrix> {
    if power == 0 || power >= d {
        return Err(Error::PowerOutOfRange {
            power,
            max: d.saturating_sub(1),
        });
    }
    let b = basis(d, m, setting, Party::Alice)?;
    let mut a = Matrix::zeros(d);
    for (outcome, v) in b.vectors().iter().enumerate() {
        let w = Complex64::from_polar(1.0, 2.0 * PI * ((outcome * power) % d) as f64 / d as f64);
        let amps = v.amplitudes();
        for (r, &ar) in amps.iter().enumerate() {
            let wr = w * ar;
            for (c, &ac) in amps.iter().enumerate() {
                let cur = a.get(r, c);
                a.set(r, c, cur + wr * ac.conj());
            }
        }
    }
    let a = UnitaryMatrix::new_unchecked(a);
    Ok(match party {
        Party::Alice => a,
        Party::Bob => a.conj(),
    })
}

/// Joint outcome statistics `p(ab|xy)` for one setting pair.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    pub x: usize,
    pub y: usize,
    pub d: usize,
    /// Row-major over `(a, b)`.
    probs: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn new(x: usize, y: usize, d: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != d * d {
            return Err(Error::Shape(format!(
                "expected {} probabilities, got {}",
                d * d,
                probs.len()
            )));
        }
        if probs.iter().any(|&p| p.is_nan() || p < -1e-12) {
            return Err(Error::NumericalInconsistency("negative or NaN probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::NumericalInconsistency(format!("probabilities sum to {total}")));
        }
        Ok(Self { x, y, d, probs })
    }

    #[inline]
    pub fn prob(&self, a: usize, b: usize) -> f64 {
        self.probs[a * self.d + b]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn alice_marginal(&self) -> Vec<f64> {
        (0..self.d)
            .map(|a| (0..self.d).map(|b| self.prob(a, b)).sum())
            .collect()
    }

    pub fn bob_marginal(&self) -> Vec<f64> {
        (0..self.d)
            .map(|b| (0..self.d).map(|a| self.prob(a, b)).sum())
            .collect()
    }
}

/// `p(ab|xy) = |(<a|_x ⊗ <b|_y) psi|^2`.
pub fn outcome_distribution(psi: &StateVector, x: usize, y: usize, d: usize, m: usize) -> Result<OutcomeDistribution> {
    if psi.dim() != d * d {
        return Err(Error::Shape(format!(
            "state of dimension {} for local dimension {d}",
            psi.dim()
        )));
    }
    let alice = basis(d, m, x, Party::Alice)?;
    let bob = basis(d, m, y, Party::Bob)?;
    let amps = apply_bilocal_raw(alice.bras(), bob.bras(), psi.amplitudes())?;
    let probs = amps.iter().map(|z| z.norm_sqr()).collect();
    OutcomeDistribution::new(x, y, d, probs)
}

fn check_qubits(n: usize) -> Result<usize> {
    if n == 0 || n >= usize::BITS as usize / 2 {
        return Err(Error::Unsupported(format!(
            "product decomposition needs 1 <= n qubits, got {n}"
        )));
    }
    Ok(1 << n)
}

fn factor(phase_sign: f64, weight: usize, value: f64, d: usize) -> [Complex64; 2] {
    let theta = phase_sign * 2.0 * PI * weight as f64 * value / d as f64;
    [
        Complex64::new(FRAC_1_SQRT_2, 0.0),
        Complex64::from_polar(FRAC_1_SQRT_2, theta),
    ]
}

/// Single-qubit factors whose tensor product is the basis vector `|outcome>`.
///
/// Entry `q` of the result is the factor on register qubit `q` (qubit 0 most
/// significant), i.e. `(|0> + exp(±2πi 2^{n-1-q} (outcome - shift)/d)|1>)/√2`.
pub fn product_factors(n: usize, m: usize, setting: usize, outcome: usize, party: Party) -> Result<Vec<StateVector>> {
    let d = check_qubits(n)?;
    check_setting(setting, m)?;
    if outcome >= d {
        return Err(Error::Range(format!("outcome {outcome} >= d = {d}")));
    }
    let value = outcome as f64 - party.shift(setting, m);
    Ok((0..n)
        .map(|q| StateVector::new_unchecked(factor(party.sign(), 1 << (n - 1 - q), value, d).to_vec()))
        .collect())
}

/// Projects the leading qubit of `state` onto `<f|`, dropping that qubit.
fn contract_leading(state: &[Complex64], f: &[Complex64; 2]) -> Vec<Complex64> {
    let half = state.len() / 2;
    let (c0, c1) = (f[0].conj(), f[1].conj());
    (0..half).map(|r| c0 * state[r] + c1 * state[half + r]).collect()
}

/// Measures the `n` leading qubits one at a time, assembling the outcome from
/// its least significant bit upward, and calls `leaf` with every outcome and
/// the projected remainder.
fn measure_register(
    state: Vec<Complex64>,
    n: usize,
    step: usize,
    low_bits: usize,
    sign: f64,
    shift: f64,
    leaf: &mut dyn FnMut(usize, Vec<Complex64>),
) {
    if step == n {
        leaf(low_bits, state);
        return;
    }
    let d = 1usize << n;
    // Qubit `step` carries weight 2^{n-1-step}; its factor depends only on the
    // outcome modulo 2^{step+1}, so the next unknown bit is bit `step`.
    let weight = 1usize << (n - 1 - step);
    for bit in 0..2 {
        let partial = low_bits | (bit << step);
        let f = factor(sign, weight, partial as f64 - shift, d);
        let next = contract_leading(&state, &f);
        measure_register(next, n, step + 1, partial, sign, shift, leaf);
    }
}

/// Outcome distribution obtained by measuring both registers qubit by qubit
/// with the single-qubit factors, Alice's qubits first.
pub fn sequential_outcome_distribution(
    psi: &StateVector,
    x: usize,
    y: usize,
    n: usize,
    m: usize,
) -> Result<OutcomeDistribution> {
    let d = check_qubits(n)?;
    check_setting(x, m)?;
    check_setting(y, m)?;
    if psi.dim() != d * d {
        return Err(Error::Shape(format!(
            "state of dimension {} for {n}-qubit registers",
            psi.dim()
        )));
    }
    let mut probs = vec![0.0; d * d];
    let alice_shift = Party::Alice.shift(x, m);
    let bob_shift = Party::Bob.shift(y, m);
    measure_register(
        psi.amplitudes().to_vec(),
        n,
        0,
        0,
        Party::Alice.sign(),
        alice_shift,
        &mut |a, rest| {
            measure_register(rest, n, 0, 0, Party::Bob.sign(), bob_shift, &mut |b, amp| {
                debug_assert_eq!(amp.len(), 1);
                probs[a * d + b] = amp[0].norm_sqr();
            });
        },
    );
    OutcomeDistribution::new(x, y, d, probs)
}

/// The fixed CHSH observables.
#[derive(Clone, Debug)]
pub struct ChshObservables {
    pub a0: UnitaryMatrix,
    pub a1: UnitaryMatrix,
    pub b0: UnitaryMatrix,
    pub b1: UnitaryMatrix,
}

/// `A0 = σ_X`, `A1 = σ_Z`, `B0 = (σ_X + σ_Z)/√2`, `B1 = (σ_X − σ_Z)/√2`.
pub fn chsh_observables() -> ChshObservables {
    let s = 1.0 / SQRT_2;
    let r = |v: [f64; 4]| UnitaryMatrix::new_unchecked(Matrix::from_real(2, &v).expect("2x2"));
    ChshObservables {
        a0: r([0.0, 1.0, 1.0, 0.0]),
        a1: r([1.0, 0.0, 0.0, -1.0]),
        b0: r([s, s, s, -s]),
        b1: r([-s, s, s, s]),
    }
}

/// Projector sum `sum_a |a>_x <a|_x`, used to check resolution of identity.
pub fn projector_sum(b: &MeasurementBasis) -> Matrix {
    let d = b.d;
    let mut acc = Matrix::zeros(d);
    for v in b.vectors() {
        let a = v.amplitudes();
        for r in 0..d {
            for c in 0..d {
                let cur = acc.get(r, c);
                acc.set(r, c, cur + a[r] * a[c].conj());
            }
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{apply_bilocal, inner, max_entangled, random_state};
    use crate::rng::RngStream;

    #[test]
    fn alice_first_vector_d2() {
        let b = basis(2, 2, 1, Party::Alice).unwrap();
        let v = b.vector(0).amplitudes();
        let s = FRAC_1_SQRT_2;
        assert!((v[0] - Complex64::new(s, 0.0)).norm() < 1e-15);
        assert!((v[1] - Complex64::from_polar(s, -PI / 4.0)).norm() < 1e-15);
    }

    #[test]
    fn bases_are_orthonormal_and_complete() {
        for d in 2..=16 {
            for m in 1..=4 {
                for x in 1..=m {
                    for party in [Party::Alice, Party::Bob] {
                        let b = basis(d, m, x, party).unwrap();
                        for (i, u) in b.vectors().iter().enumerate() {
                            for (j, v) in b.vectors().iter().enumerate() {
                                let g = inner(u, v).unwrap();
                                let e = if i == j { 1.0 } else { 0.0 };
                                assert!((g - Complex64::new(e, 0.0)).norm() < 1e-9);
                            }
                        }
                        let p = projector_sum(&b);
                        assert!(p.max_abs_diff(&Matrix::identity(d)) < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn bob_vector_is_conjugate_form() {
        // Bob's (y, b) vector equals the conjugate of Alice's form with α replaced by β_y.
        let (d, m) = (4, 3);
        for y in 1..=m {
            let bob = basis(d, m, y, Party::Bob).unwrap();
            let beta = Party::Bob.shift(y, m);
            for b in 0..d {
                for k in 0..d {
                    let alice_form = Complex64::from_polar(0.5, 2.0 * PI * k as f64 * (b as f64 - beta) / d as f64);
                    assert!((bob.vector(b).amplitudes()[k] - alice_form.conj()).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn setting_and_power_ranges() {
        assert!(matches!(
            basis(4, 2, 0, Party::Alice),
            Err(Error::SettingOutOfRange { .. })
        ));
        assert!(matches!(
            basis(4, 2, 3, Party::Bob),
            Err(Error::SettingOutOfRange { .. })
        ));
        assert!(matches!(basis(1, 2, 1, Party::Bob), Err(Error::InvalidDimension(_))));
        assert!(matches!(
            observable_power(4, 2, 1, 0, Party::Alice),
            Err(Error::PowerOutOfRange { .. })
        ));
        assert!(matches!(
            observable_power(4, 2, 1, 4, Party::Alice),
            Err(Error::PowerOutOfRange { .. })
        ));
    }

    #[test]
    fn observables_are_unitary_with_root_of_unity_spectrum() {
        let (d, m) = (4, 2);
        for i in 1..=m {
            for l in 1..d {
                let a = observable_power(d, m, i, l, Party::Alice).unwrap();
                assert!(a.unitarity_defect() < 1e-9);
                let b = observable_power(d, m, i, l, Party::Bob).unwrap();
                assert_eq!(b.matrix(), &a.conj().into_matrix());
                // eigenvectors |a>_i with eigenvalue ω^{al}
                let basis = basis(d, m, i, Party::Alice).unwrap();
                for (outcome, v) in basis.vectors().iter().enumerate() {
                    let av = a.apply(v.amplitudes());
                    let w = Complex64::from_polar(1.0, 2.0 * PI * (outcome * l) as f64 / d as f64);
                    for (x, y) in av.iter().zip(v.amplitudes()) {
                        assert!((x - w * y).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn each_setting_contributes_d_minus_one_on_phi() {
        for (d, m) in [(2, 2), (4, 2), (5, 3)] {
            let phi = max_entangled(d).unwrap();
            for i in 1..=m {
                let total: Complex64 = (1..d)
                    .map(|l| {
                        let a = observable_power(d, m, i, l, Party::Alice).unwrap();
                        let b = observable_power(d, m, i, l, Party::Bob).unwrap();
                        inner(&phi, &apply_bilocal(&a, &b, &phi).unwrap()).unwrap()
                    })
                    .sum();
                assert!((total - Complex64::new((d - 1) as f64, 0.0)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn phi_has_uniform_marginals() {
        for (d, m) in [(2, 2), (4, 3), (8, 2)] {
            let phi = max_entangled(d).unwrap();
            for x in 1..=m {
                for y in 1..=m {
                    let dist = outcome_distribution(&phi, x, y, d, m).unwrap();
                    assert!((dist.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
                    for p in dist.alice_marginal().into_iter().chain(dist.bob_marginal()) {
                        assert!((p - 1.0 / d as f64).abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn distribution_rejects_wrong_dimension() {
        let phi = max_entangled(3).unwrap();
        assert!(matches!(outcome_distribution(&phi, 1, 1, 4, 2), Err(Error::Shape(_))));
    }

    #[test]
    fn single_qubit_factor_is_the_vector() {
        for party in [Party::Alice, Party::Bob] {
            for x in 1..=3 {
                for outcome in 0..2 {
                    let f = product_factors(1, 3, x, outcome, party).unwrap();
                    assert_eq!(f.len(), 1);
                    let b = basis(2, 3, x, party).unwrap();
                    assert!(f[0].distance(b.vector(outcome)) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn factors_reproduce_basis_vectors() {
        for n in 1..=4 {
            let d = 1 << n;
            for m in [2, 3] {
                for x in 1..=m {
                    for party in [Party::Alice, Party::Bob] {
                        let b = basis(d, m, x, party).unwrap();
                        for outcome in 0..d {
                            let fs = product_factors(n, m, x, outcome, party).unwrap();
                            for f in &fs {
                                assert!((f.norm() - 1.0).abs() < 1e-12);
                                for z in f.amplitudes() {
                                    assert!((z.norm() - FRAC_1_SQRT_2).abs() < 1e-12);
                                }
                            }
                            let prod = fs[1..].iter().fold(fs[0].clone(), |acc, f| acc.kron(f));
                            assert!(prod.distance(b.vector(outcome)) < 1e-9);
                        }
                    }
                }
            }
        }
        assert!(matches!(
            product_factors(0, 2, 1, 0, Party::Alice),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            product_factors(2, 2, 1, 4, Party::Alice),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn sequential_matches_projective_random_states() {
        let mut rng = RngStream::new(31, 0);
        for n in 1..=3 {
            let d = 1 << n;
            let psi = random_state(d * d, &mut rng).unwrap();
            for m in [2, 3] {
                for x in 1..=m {
                    for y in 1..=m {
                        let seq = sequential_outcome_distribution(&psi, x, y, n, m).unwrap();
                        let full = outcome_distribution(&psi, x, y, d, m).unwrap();
                        for (p, q) in seq.probs().iter().zip(full.probs()) {
                            assert!((p - q).abs() < 1e-9);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn chsh_observables_properties() {
        let o = chsh_observables();
        let id = Matrix::identity(2);
        for b in [&o.a0, &o.a1, &o.b0, &o.b1] {
            assert!(b.matmul(b).unwrap().max_abs_diff(&id) < 1e-9);
            assert!(b.adjoint().max_abs_diff(b) < 1e-15);
        }
        assert!(o.a0.matmul(&o.a1).unwrap().trace().norm() < 1e-15);
        let phi = max_entangled(2).unwrap();
        let v = inner(&phi, &apply_bilocal(&o.a0, &o.b0, &phi).unwrap()).unwrap();
        assert!((v - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-12);
    }
}
