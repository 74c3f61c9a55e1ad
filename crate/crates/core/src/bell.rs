//! The Bell expression `I_{d,m}` evaluated three independent ways, the CHSH
//! special case, and the analytic envelopes on its value.
//!
//! * [`bell_value_operator`]: `sum_{i,l} <psi| A_i^l ⊗ B̄_i^l |psi>`.
//! * [`bell_value_gamma`]: closed form over wrapped diagonals of the amplitude grid.
//! * [`normalized_bell_from_probabilities`]: `I'` from outcome statistics, with
//!   `I = d m I' - m`.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    apply_bilocal, inner, max_entangled, random_real_unit_vector, StateVector, UnitaryMatrix, TOLERANCE,
};
use crate::measurement::{chsh_observables, observable_power, outcome_distribution, OutcomeDistribution, Party};
use crate::rng::RngStream;

fn check_dm(d: usize, m: usize) -> Result<()> {
    if d < 2 || m < 2 {
        return Err(Error::InvalidDimension(format!(
            "Bell expression needs d >= 2 and m >= 2, got d={d}, m={m}"
        )));
    }
    Ok(())
}

fn check_state(psi: &StateVector, d: usize) -> Result<()> {
    if psi.dim() != d * d {
        return Err(Error::Shape(format!(
            "state of dimension {} for local dimension {d}",
            psi.dim()
        )));
    }
    Ok(())
}

/// `(U1 ⊗ U2) Φ_d`, the state both parties measure.
pub fn pair_state(u1: &UnitaryMatrix, u2: &UnitaryMatrix) -> Result<StateVector> {
    if u1.dim() != u2.dim() {
        return Err(Error::Shape(format!(
            "unitaries of dimension {} and {}",
            u1.dim(),
            u2.dim()
        )));
    }
    apply_bilocal(u1, u2, &max_entangled(u1.dim())?)
}

/// Tsirelson bound `m(d-1)`, reached exactly by the maximally entangled state.
pub fn tsirelson_bound(d: usize, m: usize) -> f64 {
    (m * (d - 1)) as f64
}

/// Amplitudes of a bipartite state laid out as the `d x d` grid `γ_{kj}`.
#[derive(Clone, Debug)]
pub struct GammaGrid<'a> {
    d: usize,
    gamma: &'a [Complex64],
}

impl<'a> GammaGrid<'a> {
    pub fn new(psi: &'a StateVector) -> Result<Self> {
        let d = psi.local_dim()?;
        Ok(Self {
            d,
            gamma: psi.amplitudes(),
        })
    }

    #[inline]
    pub fn get(&self, k: usize, j: usize) -> Complex64 {
        self.gamma[k * self.d + j]
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `(sum_{k<d-r} γ_{k,k+r}, sum_{k>=d-r} γ_{k,k+r-d})` for shift `r`.
    pub fn wrapped_diagonal(&self, r: usize) -> (Complex64, Complex64) {
        let d = self.d;
        let upper = (0..d - r).map(|k| self.get(k, k + r)).sum();
        let lower = (d - r..d).map(|k| self.get(k, k + r - d)).sum();
        (upper, lower)
    }
}

/// Operator form: every `A_i^l ⊗ B̄_i^l` is applied as two local actions.
pub fn bell_value_operator(psi: &StateVector, d: usize, m: usize) -> Result<f64> {
    check_dm(d, m)?;
    check_state(psi, d)?;
    let mut total = Complex64::new(0.0, 0.0);
    for i in 1..=m {
        for l in 1..d {
            let a = observable_power(d, m, i, l, Party::Alice)?;
            let b = observable_power(d, m, i, l, Party::Bob)?;
            total += inner(psi, &apply_bilocal(&a, &b, psi)?)?;
        }
    }
    if total.im.abs() >= TOLERANCE {
        return Err(Error::NumericalInconsistency(format!(
            "Bell value has imaginary part {:.3e}",
            total.im
        )));
    }
    Ok(total.re)
}

/// Closed form `m * sum_r (|upper_r|^2 + |lower_r|^2) - m` in `O(d^2)`.
pub fn bell_value_gamma(psi: &StateVector, d: usize, m: usize) -> Result<f64> {
    check_dm(d, m)?;
    check_state(psi, d)?;
    let grid = GammaGrid::new(psi)?;
    let s: f64 = (0..d)
        .map(|r| {
            let (u, l) = grid.wrapped_diagonal(r);
            u.norm_sqr() + l.norm_sqr()
        })
        .sum();
    Ok(m as f64 * s - m as f64)
}

/// Setting pairs `(x, y)` whose statistics enter `I'`: `(i, i)` for every `i`,
/// then `(i + 1, i)` for `i < m`, then `(1, m)` which realizes `A_{m+1} = A_1 + 1`.
pub fn required_setting_pairs(m: usize) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> = (1..=m).map(|i| (i, i)).collect();
    pairs.extend((1..m).map(|i| (i + 1, i)));
    pairs.push((1, m));
    pairs
}

/// Outcome distributions for every pair in [`required_setting_pairs`].
pub fn setting_distributions(psi: &StateVector, d: usize, m: usize) -> Result<Vec<OutcomeDistribution>> {
    check_dm(d, m)?;
    required_setting_pairs(m)
        .into_iter()
        .map(|(x, y)| outcome_distribution(psi, x, y, d, m))
        .collect()
}

/// `α_k = (1/2d) tan(π/2m) cot(π/d (k + 1/2m))`, `k = 0..d`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaTable {
    pub d: usize,
    pub m: usize,
    coeffs: Vec<f64>,
}

impl AlphaTable {
    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
}

pub fn alpha_table(d: usize, m: usize) -> Result<AlphaTable> {
    check_dm(d, m)?;
    let (df, mf) = (d as f64, m as f64);
    let t = (PI / (2.0 * mf)).tan();
    let coeffs = (0..d)
        .map(|k| {
            let arg = PI / df * (k as f64 + 1.0 / (2.0 * mf));
            t / (2.0 * df) / arg.tan()
        })
        .collect();
    Ok(AlphaTable { d, m, coeffs })
}

/// Normalized value `I' = (1/m) sum_k sum_i α_k [P(A_i = B_i + k) + P(B_i = A_{i+1} + k)]`.
///
/// `P(A = B + k)` is `Pr[a - b ≡ k mod d]`. `A_{m+1}` is `A_1` with its outcome
/// relabelled `a -> a + 1 mod d`.
pub fn normalized_bell_from_probabilities(dists: &[OutcomeDistribution], d: usize, m: usize) -> Result<f64> {
    let alpha = alpha_table(d, m)?;
    let find = |x: usize, y: usize| {
        dists
            .iter()
            .find(|p| p.x == x && p.y == y)
            .ok_or(Error::IncompleteInput { x, y })
            .and_then(|p| {
                if p.d == d {
                    Ok(p)
                } else {
                    Err(Error::Shape(format!("distribution over d={} for d={d}", p.d)))
                }
            })
    };
    let mut total = 0.0;
    for i in 1..=m {
        let same = find(i, i)?;
        for a in 0..d {
            for b in 0..d {
                total += alpha.get((a + d - b) % d) * same.prob(a, b);
            }
        }
        let (next, relabel) = if i < m { (i + 1, 0) } else { (1, 1) };
        let cross = find(next, i)?;
        for a in 0..d {
            let a_shifted = (a + relabel) % d;
            for b in 0..d {
                total += alpha.get((b + d - a_shifted) % d) * cross.prob(a, b);
            }
        }
    }
    Ok(total / m as f64)
}

/// `I = d m I' - m`.
pub fn bell_from_normalized(normalized: f64, d: usize, m: usize) -> f64 {
    (d * m) as f64 * normalized - m as f64
}

/// `I' = (I + m) / (d m)`.
pub fn normalized_from_bell(value: f64, d: usize, m: usize) -> f64 {
    (value + m as f64) / (d * m) as f64
}

fn expectation(psi: &StateVector, a: &UnitaryMatrix, b: &UnitaryMatrix) -> Result<f64> {
    Ok(inner(psi, &apply_bilocal(a, b, psi)?)?.re)
}

/// `<A0 B0> + <A1 B0> + <A0 B1> - <A1 B1>` on a two-qubit state.
pub fn chsh_value(psi: &StateVector) -> Result<f64> {
    check_state(psi, 2)?;
    let o = chsh_observables();
    Ok(
        expectation(psi, &o.a0, &o.b0)? + expectation(psi, &o.a1, &o.b0)? + expectation(psi, &o.a0, &o.b1)?
            - expectation(psi, &o.a1, &o.b1)?,
    )
}

/// Quantum maximum of the CHSH combination.
pub const CHSH_MAX: f64 = 2.0 * SQRT_2;

/// Norms of `((A0 + A1)/√2 ⊗ I - I ⊗ B0) psi` and `((A0 - A1)/√2 ⊗ I - I ⊗ B1) psi`.
/// Both vanish exactly when the CHSH value is maximal.
pub fn chsh_saturation_residual(psi: &StateVector) -> Result<(f64, f64)> {
    check_state(psi, 2)?;
    let o = chsh_observables();
    let s = Complex64::new(1.0 / SQRT_2, 0.0);
    let plus = o.a0.add(&o.a1)?.scale(s);
    let minus = o.a0.sub(&o.a1)?.scale(s);
    let id = UnitaryMatrix::identity(2);
    let residual = |alice: crate::linalg::Matrix, bob: &UnitaryMatrix| -> Result<f64> {
        let alice = UnitaryMatrix::new(alice)?;
        let lhs = apply_bilocal(&alice, &id, psi)?;
        let rhs = apply_bilocal(&id, bob, psi)?;
        Ok(lhs.distance(&rhs))
    };
    Ok((residual(plus, &o.b0)?, residual(minus, &o.b1)?))
}

/// `(-m, m(d-2))`: range of `I_{d,m}` over states orthogonal to the maximally entangled state.
pub fn orthogonal_envelope(d: usize, m: usize) -> (f64, f64) {
    (-(m as f64), (m * (d.saturating_sub(2))) as f64)
}

/// Checks that a state orthogonal to the maximally entangled state stays inside
/// [`orthogonal_envelope`]. Returns the Bell value on success.
pub fn check_orthogonal_envelope(psi: &StateVector, d: usize, m: usize) -> Result<f64> {
    let phi = max_entangled(d)?;
    let overlap = inner(&phi, psi)?.norm();
    if overlap > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "state is not orthogonal to the maximally entangled state (overlap {overlap:.3e})"
        )));
    }
    let v = bell_value_gamma(psi, d, m)?;
    let (lo, hi) = orthogonal_envelope(d, m);
    if v < lo - TOLERANCE || v > hi + TOLERANCE {
        return Err(Error::Range(format!("Bell value {v} outside [{lo}, {hi}]")));
    }
    Ok(v)
}

/// `m sqrt(4 / (3 d δ))`: with probability at least `1 - δ` a random real unit
/// vector has Bell value at most this.
pub fn concentration_bound(d: usize, m: usize, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if d == 0 {
        return Err(Error::InvalidDimension("d must be positive".into()));
    }
    Ok(m as f64 * (4.0 / (3.0 * d as f64 * delta)).sqrt())
}

#[derive(Clone, Debug)]
pub struct ConcentrationSummary {
    pub d: usize,
    pub m: usize,
    pub delta: f64,
    pub samples: usize,
    pub seed: u64,
    pub bound: f64,
    pub exceedances: usize,
    /// Bell value of every sampled vector, in sample order.
    pub values: Vec<f64>,
}

impl ConcentrationSummary {
    pub fn exceedance_fraction(&self) -> f64 {
        self.exceedances as f64 / self.samples as f64
    }

    /// `δ + 3 sqrt(δ(1-δ)/samples)`.
    pub fn allowed_fraction(&self) -> f64 {
        self.delta + 3.0 * (self.delta * (1.0 - self.delta) / self.samples as f64).sqrt()
    }
}

/// Samples `samples` uniform real unit vectors of dimension `d^2` and counts how
/// many exceed [`concentration_bound`]. Sample `k` draws from stream `k` of `seed`.
pub fn concentration_experiment(
    d: usize,
    m: usize,
    delta: f64,
    samples: usize,
    seed: u64,
) -> Result<ConcentrationSummary> {
    let bound = concentration_bound(d, m, delta)?;
    check_dm(d, m)?;
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    let values = (0..samples)
        .map(|k| {
            let mut rng = RngStream::new(seed, k as u64);
            let psi = random_real_unit_vector(d * d, &mut rng)?;
            bell_value_gamma(&psi, d, m)
        })
        .collect::<Result<Vec<_>>>()?;
    let exceedances = values.iter().filter(|&&v| v > bound).count();
    Ok(ConcentrationSummary {
        d,
        m,
        delta,
        samples,
        seed,
        bound,
        exceedances,
        values,
    })
}
