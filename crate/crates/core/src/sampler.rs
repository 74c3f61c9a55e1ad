//! Finite-shot Monte Carlo estimation of the normalized Bell value `I'` and
//! of the circuit distance, with Hoeffding shot planning.
//!
//! One round draws `r ∈ {0, 1}` and a setting `i ∈ 1..=m` uniformly, samples an
//! outcome pair `(a, b)` from the exact joint distribution of the chosen
//! settings, and returns `2 α_{(a-b) mod d}` (`r = 0`, settings `(A_i, B_i)`) or
//! `2 α_{(b-a) mod d}` (`r = 1`, settings `(A_{i+1}, B_i)`, where `A_{m+1}` is
//! `A_1` with outcome `a + 1 mod d`). The mean of the returns is unbiased for `I'`.
//!
//! Round `j` draws all of its randomness from `RngStream::new(seed, j)`, so the
//! estimate does not depend on how rounds are scheduled.

use rayon::prelude::*;

use crate::bell::{alpha_table, bell_from_normalized, pair_state, AlphaTable};
use crate::circuit::embed_double;
use crate::distance::normalized_to_distance;
use crate::error::{Error, Result};
use crate::linalg::{StateVector, UnitaryMatrix};
use crate::measurement::outcome_distribution;
use crate::rng::RngStream;

/// `(ε, δ)` such that `P(|X - I'| >= ε) <= δ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Certificate {
    pub epsilon: f64,
    pub delta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShotPlan {
    pub shots: u64,
    pub certificate: Option<Certificate>,
}

impl ShotPlan {
    /// A fixed shot count with no attached certificate.
    pub fn fixed(shots: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::InvalidParameter("shot count must be positive".into()));
        }
        Ok(Self {
            shots,
            certificate: None,
        })
    }
}

/// Smallest integer `s > 8 ln(1/δ) / ε^2`.
pub fn plan_shots(epsilon: f64, delta: f64) -> Result<ShotPlan> {
    for (name, v) in [("epsilon", epsilon), ("delta", delta)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::InvalidParameter(format!("{name} must lie in (0, 1), got {v}")));
        }
    }
    let threshold = 8.0 * (1.0 / delta).ln() / (epsilon * epsilon);
    let shots = threshold.floor() as u64 + 1;
    Ok(ShotPlan {
        shots,
        certificate: Some(Certificate { epsilon, delta }),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimationReport {
    pub d: usize,
    pub m: usize,
    pub shots: u64,
    /// Mean of the per-round returns; not clamped.
    pub estimate: f64,
    /// `sqrt(1 - clamp(estimate, 0, 1))`.
    pub distance_estimate: f64,
    pub certificate: Option<Certificate>,
    pub seed: u64,
    /// Rounds spent on each `(r, i)` choice, indexed `r * m + (i - 1)`.
    pub tallies: Vec<u64>,
}

impl EstimationReport {
    /// Bell value implied by the estimate, `d m X - m`.
    pub fn bell_estimate(&self) -> f64 {
        bell_from_normalized(self.estimate, self.d, self.m)
    }
}

/// Precomputed inverse-CDF tables for the `2m` setting choices of one state.
#[derive(Clone, Debug)]
pub struct ShotSampler {
    d: usize,
    m: usize,
    alpha: AlphaTable,
    /// Cumulative distribution over the `d * d` cells, per `(r, i)` choice.
    cdfs: Vec<Vec<f64>>,
}

/// Outcome of one round.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Round {
    pub value: f64,
    /// `r * m + (i - 1)`.
    pub choice: usize,
    pub a: usize,
    pub b: usize,
}

impl ShotSampler {
    pub fn new(psi: &StateVector, d: usize, m: usize) -> Result<Self> {
        let alpha = alpha_table(d, m)?;
        let mut cdfs = Vec::with_capacity(2 * m);
        for r in 0..2 {
            for i in 1..=m {
                let (x, y) = match r {
                    0 => (i, i),
                    _ if i < m => (i + 1, i),
                    _ => (1, m),
                };
                let dist = outcome_distribution(psi, x, y, d, m)?;
                let mut acc = 0.0;
                let cdf = dist
                    .probs()
                    .iter()
                    .map(|p| {
                        acc += p.max(0.0);
                        acc
                    })
                    .collect();
                cdfs.push(cdf);
            }
        }
        Ok(Self { d, m, alpha, cdfs })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    fn sample_cell(cdf: &[f64], u: f64) -> usize {
        let total = *cdf.last().expect("non-empty distribution");
        let target = u * total;
        let idx = cdf.partition_point(|&c| c <= target);
        // u * total can round up to total; fall back to the last cell with mass
        idx.min(cdf.len() - 1)
    }

    pub fn sample_round(&self, rng: &mut RngStream) -> Round {
        let (d, m) = (self.d, self.m);
        let choice = rng.index(2 * m);
        let r = choice / m;
        let cell = Self::sample_cell(&self.cdfs[choice], rng.uniform());
        let (mut a, b) = (cell / d, cell % d);
        let value = if r == 0 {
            2.0 * self.alpha.get((a + d - b) % d)
        } else {
            if choice % m == m - 1 {
                a = (a + 1) % d;
            }
            2.0 * self.alpha.get((b + d - a) % d)
        };
        Round { value, choice, a, b }
    }

    fn round(&self, seed: u64, index: u64) -> Round {
        self.sample_round(&mut RngStream::new(seed, index))
    }

    fn report(&self, plan: &ShotPlan, seed: u64, rounds: &[Round]) -> EstimationReport {
        let mut tallies = vec![0u64; 2 * self.m];
        let mut sum = 0.0;
        for r in rounds {
            sum += r.value;
            tallies[r.choice] += 1;
        }
        let estimate = sum / plan.shots as f64;
        EstimationReport {
            d: self.d,
            m: self.m,
            shots: plan.shots,
            estimate,
            distance_estimate: normalized_to_distance(estimate),
            certificate: plan.certificate,
            seed,
            tallies,
        }
    }

    /// Runs `plan.shots` rounds in order on the calling thread.
    pub fn estimate(&self, plan: &ShotPlan, seed: u64) -> EstimationReport {
        let rounds: Vec<Round> = (0..plan.shots).map(|j| self.round(seed, j)).collect();
        self.report(plan, seed, &rounds)
    }

    /// Same result as [`ShotSampler::estimate`], with rounds spread over the rayon pool.
    pub fn estimate_parallel(&self, plan: &ShotPlan, seed: u64) -> EstimationReport {
        let rounds: Vec<Round> = (0..plan.shots).into_par_iter().map(|j| self.round(seed, j)).collect();
        self.report(plan, seed, &rounds)
    }
}

/// One round on `psi`; builds the sampling tables on every call, so prefer
/// [`ShotSampler`] for repeated rounds.
pub fn sample_round(psi: &StateVector, d: usize, m: usize, rng: &mut RngStream) -> Result<f64> {
    Ok(ShotSampler::new(psi, d, m)?.sample_round(rng).value)
}

pub fn estimate_normalized_bell(
    psi: &StateVector,
    d: usize,
    m: usize,
    plan: &ShotPlan,
    seed: u64,
) -> Result<EstimationReport> {
    Ok(ShotSampler::new(psi, d, m)?.estimate(plan, seed))
}

/// Embeds both circuits, prepares `(U1' ⊗ U2') Φ` and estimates `I'` and the distance.
pub fn estimate_distance(
    u1: &UnitaryMatrix,
    u2: &UnitaryMatrix,
    m: usize,
    plan: &ShotPlan,
    seed: u64,
) -> Result<EstimationReport> {
    if u1.dim() != u2.dim() {
        return Err(Error::Shape(format!(
            "circuits of dimension {} and {}",
            u1.dim(),
            u2.dim()
        )));
    }
    let e1 = embed_double(u1)?;
    let e2 = embed_double(u2)?;
    let psi = pair_state(&e1, &e2)?;
    let sampler = ShotSampler::new(&psi, e1.dim(), m)?;
    Ok(if plan.shots >= 4096 {
        sampler.estimate_parallel(plan, seed)
    } else {
        sampler.estimate(plan, seed)
    })
}
