//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints exactly one PASS/FAIL line; the process exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use bellcheck::bell::{
    bell_from_normalized, bell_value_gamma, bell_value_operator, check_orthogonal_envelope, chsh_saturation_residual,
    chsh_value, concentration_experiment, normalized_bell_from_probabilities, pair_state, setting_distributions,
    tsirelson_bound, CHSH_MAX,
};
use bellcheck::circuit::embed_double;
use bellcheck::distance::{circuit_distance, distance_from_embedded_value};
use bellcheck::experiment::{bounds_scatter, sampled_rms, sampled_scatter};
use bellcheck::linalg::{inner, max_entangled, paulis, random_real_orthogonal, random_state};
use bellcheck::measurement::{outcome_distribution, sequential_outcome_distribution};
use bellcheck::rng::derive_seed;
use bellcheck::sampler::{plan_shots, ShotSampler};
use bellcheck::{RngStream, StateVector, UnitaryMatrix};

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn tsirelson_point() -> Outcome {
    let mut worst = 0.0f64;
    for (k, d) in [2usize, 4, 8, 16].into_iter().enumerate() {
        let mut rng = RngStream::new(derive_seed(SEED, 1), k as u64);
        for _ in 0..100 {
            let u = random_real_orthogonal(d, &mut rng).unwrap();
            let psi = pair_state(&u, &u).unwrap();
            for m in [2, 3] {
                let v = bell_value_gamma(&psi, d, m).unwrap();
                worst = worst.max((v - tsirelson_bound(d, m)).abs());
            }
        }
    }
    outcome(worst < 1e-9, format!("max |V - m(d-1)| = {worst:.3e} over 800 cases"))
}

/// `U R` with `R` a rotation by `theta` in a random plane.
fn nearby(u: &UnitaryMatrix, theta: f64, rng: &mut RngStream) -> UnitaryMatrix {
    let d = u.dim();
    let o = random_real_orthogonal(d, rng).unwrap();
    let mut g: Vec<f64> = (0..d * d).map(|k| if k % (d + 1) == 0 { 1.0 } else { 0.0 }).collect();
    let (c, s) = (theta.cos(), theta.sin());
    g[0] = c;
    g[1] = -s;
    g[d] = s;
    g[d + 1] = c;
    let rot = o
        .compose(&UnitaryMatrix::from_real(d, &g).unwrap())
        .unwrap()
        .compose(&o.transpose())
        .unwrap();
    u.compose(&rot).unwrap()
}

fn strict_gap() -> Outcome {
    let (d, m) = (4, 2);
    let mut rng = RngStream::new(derive_seed(SEED, 2), 0);
    let (mut used, mut smallest_gap, mut closest) = (0, f64::INFINITY, f64::INFINITY);
    while used < 1000 {
        let u1 = random_real_orthogonal(d, &mut rng).unwrap();
        // half independent draws, half small rotations of u1
        let u2 = if used % 2 == 0 {
            random_real_orthogonal(d, &mut rng).unwrap()
        } else {
            let theta = 0.02 + 0.2 * rng.uniform();
            nearby(&u1, theta, &mut rng)
        };
        let dist = circuit_distance(&u1, &u2).unwrap();
        if dist <= 0.01 {
            continue;
        }
        used += 1;
        closest = closest.min(dist);
        let v = bell_value_gamma(&pair_state(&u1, &u2).unwrap(), d, m).unwrap();
        smallest_gap = smallest_gap.min(tsirelson_bound(d, m) - v);
    }
    outcome(
        smallest_gap > 1e-6,
        format!("{used} pairs with D > 0.01 (closest D = {closest:.4}), smallest gap m(d-1) - V = {smallest_gap:.3e}"),
    )
}

fn sandwich() -> Outcome {
    let rows = bounds_scatter(1000, 0, derive_seed(SEED, 3)).unwrap();
    let violations = rows.iter().filter(|r| !r.within_bounds(1e-9)).count();
    let tight = rows.iter().filter(|r| r.distance - r.lower < 0.1).count();
    let frac = tight as f64 / rows.len() as f64;
    outcome(
        violations == 0 && frac >= 0.2,
        format!(
            "{violations} violations in {} pairs, tight-lower fraction {frac:.3}",
            rows.len()
        ),
    )
}

fn embedded_exactness() -> Outcome {
    let m = 2;
    let mut worst = 0.0f64;
    for n in [1usize, 2] {
        let dim = 1 << n;
        let mut rng = RngStream::new(derive_seed(SEED, 4), n as u64);
        let mut pairs: Vec<(UnitaryMatrix, UnitaryMatrix)> = (0..100)
            .map(|_| {
                (
                    random_real_orthogonal(dim, &mut rng).unwrap(),
                    random_real_orthogonal(dim, &mut rng).unwrap(),
                )
            })
            .collect();
        let z_first = (1..n).fold(paulis::z(), |acc, _| acc.kron(&UnitaryMatrix::identity(2)));
        pairs.push((UnitaryMatrix::identity(dim), z_first));
        for (i, (u1, u2)) in pairs.iter().enumerate() {
            let (e1, e2) = (embed_double(u1).unwrap(), embed_double(u2).unwrap());
            let big = e1.dim();
            let v = bell_value_gamma(&pair_state(&e1, &e2).unwrap(), big, m).unwrap();
            let d_true = circuit_distance(u1, u2).unwrap();
            let d_from_v = distance_from_embedded_value(v, big, m).unwrap();
            worst = worst.max((d_from_v - d_true).abs());
            if i == 100 && ((d_true - 1.0).abs() > 1e-12 || (v + m as f64).abs() > 1e-9) {
                return outcome(false, format!("planted (I, Z) at n={n}: D = {d_true}, V = {v}"));
            }
        }
    }
    outcome(
        worst < 1e-9,
        format!("max |D(V) - D| = {worst:.3e}; planted (I, Z) gives D = 1, V = -m"),
    )
}

fn three_way_agreement() -> Outcome {
    let mut worst = 0.0f64;
    for d in [2usize, 4, 8] {
        for m in [2usize, 3] {
            let mut rng = RngStream::new(derive_seed(SEED, 5), (d * 10 + m) as u64);
            for _ in 0..200 {
                let psi = random_state(d * d, &mut rng).unwrap();
                let op = bell_value_operator(&psi, d, m).unwrap();
                let gamma = bell_value_gamma(&psi, d, m).unwrap();
                let dists = setting_distributions(&psi, d, m).unwrap();
                let prob = bell_from_normalized(normalized_bell_from_probabilities(&dists, d, m).unwrap(), d, m);
                worst = worst
                    .max((op - gamma).abs())
                    .max((op - prob).abs())
                    .max((gamma - prob).abs());
            }
        }
    }
    outcome(
        worst < 1e-9,
        format!("max pairwise discrepancy {worst:.3e} over 1200 states"),
    )
}

fn orthogonal_to_phi(d: usize, rng: &mut RngStream) -> StateVector {
    let phi = max_entangled(d).unwrap();
    let psi = random_state(d * d, rng).unwrap();
    let c = inner(&phi, &psi).unwrap();
    let amps: Vec<_> = psi
        .amplitudes()
        .iter()
        .zip(phi.amplitudes())
        .map(|(p, f)| p - c * f)
        .collect();
    StateVector::normalized(amps).unwrap()
}

fn orthogonal_envelope() -> Outcome {
    let m = 2;
    let mut failures = 0;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for d in [2usize, 4, 8] {
        let mut rng = RngStream::new(derive_seed(SEED, 6), d as u64);
        for _ in 0..1000 {
            match check_orthogonal_envelope(&orthogonal_to_phi(d, &mut rng), d, m) {
                Ok(v) => {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                Err(_) => failures += 1,
            }
        }
    }
    outcome(
        failures == 0,
        format!("{failures} of 3000 states outside [-m, m(d-2)]; observed V in [{lo:.4}, {hi:.4}]"),
    )
}

fn concentration() -> Outcome {
    let s = concentration_experiment(16, 2, 0.1, 10_000, derive_seed(SEED, 7)).unwrap();
    let frac = s.exceedance_fraction();
    outcome(
        frac <= 0.1 + 0.01,
        format!("bound {:.4}, exceedance fraction {frac:.4} (limit 0.11)", s.bound),
    )
}

fn sampler_coverage() -> Outcome {
    let (d, m) = (4, 2);
    let plan = plan_shots(0.1, 0.05).unwrap();
    let sampler = ShotSampler::new(&max_entangled(d).unwrap(), d, m).unwrap();
    let estimates: Vec<f64> = (0..500)
        .map(|k| sampler.estimate(&plan, derive_seed(SEED, 800 + k)).estimate)
        .collect();
    let misses = estimates.iter().filter(|x| (*x - 1.0).abs() >= 0.1).count();
    let miss_frac = misses as f64 / estimates.len() as f64;
    let n = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / n;
    let var = estimates.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    outcome(
        miss_frac <= 0.06 && (mean - 1.0).abs() <= 3.0 * se,
        format!(
            "s = {}, miss fraction {miss_frac:.4}, grand mean {mean:.6} (|mean - 1| = {:.2e}, 3 SE = {:.2e})",
            plan.shots,
            (mean - 1.0).abs(),
            3.0 * se
        ),
    )
}

fn sampled_tightening() -> Outcome {
    let shots = [100u64, 1000, 10_000];
    let rows = sampled_scatter(&[1], &shots, 100, derive_seed(SEED, 9)).unwrap();
    let rms: Vec<f64> = shots.iter().map(|&s| sampled_rms(&rows, 1, s).unwrap()).collect();
    let decreasing = rms.windows(2).all(|w| w[1] < w[0]);
    outcome(
        decreasing && rms[2] < 0.05,
        format!("RMS at s=100/1000/10000: {:.4} / {:.4} / {:.4}", rms[0], rms[1], rms[2]),
    )
}

fn chsh() -> Outcome {
    let phi = max_entangled(2).unwrap();
    let value = chsh_value(&phi).unwrap();
    let (r0, r1) = chsh_saturation_residual(&phi).unwrap();
    let flipped = pair_state(&UnitaryMatrix::identity(2), &paulis::z()).unwrap();
    let (f0, f1) = chsh_saturation_residual(&flipped).unwrap();
    outcome(
        (value - CHSH_MAX).abs() < 1e-9 && r0.max(r1) < 1e-12 && f0 > 0.1 && f1 > 0.1,
        format!(
            "I_CHSH(Phi_2) = {value:.12}; residuals {r0:.1e}, {r1:.1e} at Phi_2 and {f0:.3}, {f1:.3} at (I x Z)Phi_2"
        ),
    )
}

fn product_measurement() -> Outcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n in 1..=3usize {
        let d = 1 << n;
        let mut rng = RngStream::new(derive_seed(SEED, 11), n as u64);
        let mut states = vec![max_entangled(d).unwrap()];
        states.extend((0..3).map(|_| random_state(d * d, &mut rng).unwrap()));
        for m in [2usize, 3] {
            for psi in &states {
                for x in 1..=m {
                    for y in 1..=m {
                        let full = outcome_distribution(psi, x, y, d, m).unwrap();
                        let seq = sequential_outcome_distribution(psi, x, y, n, m).unwrap();
                        let diff = full
                            .probs()
                            .iter()
                            .zip(seq.probs())
                            .map(|(a, b)| (a - b).abs())
                            .fold(0.0, f64::max);
                        worst = worst.max(diff);
                        cases += 1;
                    }
                }
            }
        }
    }
    outcome(
        worst < 1e-9,
        format!("max |P_seq - P_full| = {worst:.3e} over {cases} setting/state cases"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("tsirelson point for U x U", tsirelson_point),
        ("strict gap below the maximum", strict_gap),
        ("distance bounds sandwich", sandwich),
        ("doubled-circuit exactness", embedded_exactness),
        ("three-way Bell value agreement", three_way_agreement),
        ("envelope orthogonal to Phi_d", orthogonal_envelope),
        ("random-vector concentration", concentration),
        ("sampler unbiasedness and coverage", sampler_coverage),
        ("finite-shot scatter tightening", sampled_tightening),
        ("CHSH layer", chsh),
        ("product-measurement equivalence", product_measurement),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<36} {}  {} [{:.1}s]",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
