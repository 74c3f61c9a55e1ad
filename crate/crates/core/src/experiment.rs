//! Library side of the `bellcheck` command line: circuit comparison, figure
//! data generation, and CSV output.
//!
//! CSV files use a dot decimal separator and 12 significant digits.

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;

use crate::bell::{
    bell_value_gamma, concentration_experiment, normalized_from_bell, pair_state, tsirelson_bound, ConcentrationSummary,
};
use crate::circuit::{circuit_unitary, embed_double, Circuit};
use crate::distance::{circuit_distance, distance_bounds_from_value, distance_from_embedded_value, DistanceBounds};
use crate::error::{Error, Result};
use crate::linalg::{random_real_orthogonal, UnitaryMatrix};
use crate::rng::{derive_seed, RngStream};
use crate::sampler::{estimate_distance, EstimationReport, ShotPlan};

/// Gap below the Tsirelson bound under which two circuits are reported equivalent.
pub const EQUIVALENCE_GAP: f64 = 1e-6;

/// Formats a real with 12 significant digits, independent of locale.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.11e}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompareMode {
    /// Measure `(U1 ⊗ U2) Φ_{2^n}` and report the two-sided distance bounds.
    Raw,
    /// Measure the doubled circuits on `Φ_{4^n}` and invert the value exactly.
    Embedded,
}

impl CompareMode {
    pub fn name(self) -> &'static str {
        match self {
            CompareMode::Raw => "raw",
            CompareMode::Embedded => "embedded",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExactComparison {
    pub mode: CompareMode,
    pub n_qubits: usize,
    /// Local dimension of the measured state.
    pub d: usize,
    pub m: usize,
    pub value: f64,
    pub normalized: f64,
    /// `D(U1, U2)` from the matrices.
    pub distance: f64,
    /// Raw mode only.
    pub bounds: Option<DistanceBounds>,
    /// Embedded mode only: the distance recovered from `value`.
    pub inferred_distance: Option<f64>,
    pub equivalent: bool,
}

impl ExactComparison {
    pub fn verdict(&self) -> &'static str {
        if self.equivalent {
            "EQUIVALENT"
        } else {
            "INEQUIVALENT"
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "mode: {}", self.mode.name());
        let _ = writeln!(s, "qubits: {}", self.n_qubits);
        let _ = writeln!(s, "d: {}", self.d);
        let _ = writeln!(s, "m: {}", self.m);
        let _ = writeln!(s, "V: {}", fmt_num(self.value));
        let _ = writeln!(s, "V_max: {}", fmt_num(tsirelson_bound(self.d, self.m)));
        let _ = writeln!(s, "I_normalized: {}", fmt_num(self.normalized));
        let _ = writeln!(s, "D_exact: {}", fmt_num(self.distance));
        if let Some(b) = &self.bounds {
            let _ = writeln!(s, "D_lower: {}", fmt_num(b.lower));
            let _ = writeln!(s, "D_upper: {}", fmt_num(b.upper));
        }
        if let Some(d) = self.inferred_distance {
            let _ = writeln!(s, "D_from_V: {}", fmt_num(d));
        }
        let _ = writeln!(s, "verdict: {}", self.verdict());
        s
    }

    pub const CSV_HEADER: &'static str = "mode,n,d,m,V,I_normalized,D_exact,D_lower,D_upper,D_from_V,verdict";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.mode.name(),
            self.n_qubits,
            self.d,
            self.m,
            fmt_num(self.value),
            fmt_num(self.normalized),
            fmt_num(self.distance),
            opt(self.bounds.map(|b| b.lower)),
            opt(self.bounds.map(|b| b.upper)),
            opt(self.inferred_distance),
            self.verdict()
        )
    }
}

fn check_widths(a: &Circuit, b: &Circuit) -> Result<()> {
    if a.n_qubits() != b.n_qubits() {
        return Err(Error::Shape(format!(
            "circuits act on {} and {} qubits",
            a.n_qubits(),
            b.n_qubits()
        )));
    }
    Ok(())
}

/// Exact Bell value of two unitaries in the chosen mode.
pub fn compare_unitaries_exact(
    u1: &UnitaryMatrix,
    u2: &UnitaryMatrix,
    m: usize,
    mode: CompareMode,
) -> Result<ExactComparison> {
    let distance = circuit_distance(u1, u2)?;
    let n_qubits = u1.dim().trailing_zeros() as usize;
    let (psi, d) = match mode {
        CompareMode::Raw => (pair_state(u1, u2)?, u1.dim()),
        CompareMode::Embedded => {
            let (e1, e2) = (embed_double(u1)?, embed_double(u2)?);
            (pair_state(&e1, &e2)?, e1.dim())
        }
    };
    let value = bell_value_gamma(&psi, d, m)?;
    let (bounds, inferred_distance) = match mode {
        CompareMode::Raw => (Some(distance_bounds_from_value(value, d, m)?), None),
        CompareMode::Embedded => (None, Some(distance_from_embedded_value(value, d, m)?)),
    };
    Ok(ExactComparison {
        mode,
        n_qubits,
        d,
        m,
        value,
        normalized: normalized_from_bell(value, d, m),
        distance,
        bounds,
        inferred_distance,
        equivalent: tsirelson_bound(d, m) - value < EQUIVALENCE_GAP,
    })
}

pub fn compare_exact(a: &Circuit, b: &Circuit, m: usize, mode: CompareMode) -> Result<ExactComparison> {
    check_widths(a, b)?;
    compare_unitaries_exact(&circuit_unitary(a), &circuit_unitary(b), m, mode)
}

#[derive(Clone, Debug)]
pub struct SampledComparison {
    pub n_qubits: usize,
    pub report: EstimationReport,
}

/// Confidence used to turn a fixed shot count into a verdict tolerance.
pub const SAMPLED_VERDICT_DELTA: f64 = 0.05;

impl SampledComparison {
    /// Additive tolerance on the normalized estimate: the certified epsilon, or
    /// the Hoeffding radius `sqrt(8 ln(1/δ) / s)` at δ = 0.05 for a fixed shot count.
    pub fn tolerance(&self) -> f64 {
        match self.report.certificate {
            Some(c) => c.epsilon,
            None => (8.0 * (1.0 / SAMPLED_VERDICT_DELTA).ln() / self.report.shots as f64).sqrt(),
        }
    }

    pub fn equivalent(&self) -> bool {
        self.report.estimate >= 1.0 - self.tolerance()
    }

    pub fn verdict(&self) -> &'static str {
        if self.equivalent() {
            "EQUIVALENT"
        } else {
            "INEQUIVALENT"
        }
    }

    pub fn render(&self) -> String {
        let r = &self.report;
        let mut s = String::new();
        let _ = writeln!(s, "mode: embedded");
        let _ = writeln!(s, "qubits: {}", self.n_qubits);
        let _ = writeln!(s, "d: {}", r.d);
        let _ = writeln!(s, "m: {}", r.m);
        let _ = writeln!(s, "seed: {}", r.seed);
        let _ = writeln!(s, "shots: {}", r.shots);
        if let Some(c) = r.certificate {
            let _ = writeln!(s, "epsilon: {}", fmt_num(c.epsilon));
            let _ = writeln!(s, "delta: {}", fmt_num(c.delta));
        }
        let _ = writeln!(s, "I_normalized_estimate: {}", fmt_num(r.estimate));
        let _ = writeln!(s, "V_estimate: {}", fmt_num(r.bell_estimate()));
        let _ = writeln!(s, "D_estimate: {}", fmt_num(r.distance_estimate));
        let tallies: Vec<String> = r.tallies.iter().map(u64::to_string).collect();
        let _ = writeln!(s, "tallies: {}", tallies.join(" "));
        let _ = writeln!(s, "tolerance: {}", fmt_num(self.tolerance()));
        let _ = writeln!(s, "verdict: {}", self.verdict());
        s
    }

    pub fn csv_header(&self) -> String {
        let m = self.report.m;
        let mut h = String::from("seed,n,d,m,shots,epsilon,delta,I_normalized_estimate,V_estimate,D_estimate,verdict");
        for r in 0..2 {
            for i in 1..=m {
                let _ = write!(h, ",tally_r{r}_i{i}");
            }
        }
        h
    }

    pub fn csv_row(&self) -> String {
        let r = &self.report;
        let (eps, delta) = r
            .certificate
            .map(|c| (fmt_num(c.epsilon), fmt_num(c.delta)))
            .unwrap_or_default();
        let mut row = format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.seed,
            self.n_qubits,
            r.d,
            r.m,
            r.shots,
            eps,
            delta,
            fmt_num(r.estimate),
            fmt_num(r.bell_estimate()),
            fmt_num(r.distance_estimate),
            self.verdict()
        );
        for t in &r.tallies {
            let _ = write!(row, ",{t}");
        }
        row
    }
}

pub fn compare_sampled(a: &Circuit, b: &Circuit, m: usize, plan: &ShotPlan, seed: u64) -> Result<SampledComparison> {
    check_widths(a, b)?;
    let report = estimate_distance(&circuit_unitary(a), &circuit_unitary(b), m, plan, seed)?;
    Ok(SampledComparison {
        n_qubits: a.n_qubits(),
        report,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundsRow {
    pub pair_id: usize,
    pub value: f64,
    pub distance: f64,
    pub lower: f64,
    pub upper: f64,
}

impl BoundsRow {
    pub fn within_bounds(&self, slack: f64) -> bool {
        self.lower <= self.distance + slack && self.distance <= self.upper + slack
    }
}

pub const BOUNDS_D: usize = 4;
pub const BOUNDS_M: usize = 2;
pub const BOUNDS_HEADER: &str = "pair_id,V,D,lower,upper";

/// Independent Haar-orthogonal pairs at `d = 4`, `m = 2`, followed by
/// `planted` pairs with `U2 = U1`. Pair `p` draws from stream `p` of `seed`.
pub fn bounds_scatter(samples: usize, planted: usize, seed: u64) -> Result<Vec<BoundsRow>> {
    (0..samples + planted)
        .into_par_iter()
        .map(|pair_id| {
            let mut rng = RngStream::new(seed, pair_id as u64);
            let u1 = random_real_orthogonal(BOUNDS_D, &mut rng)?;
            let u2 = if pair_id < samples {
                random_real_orthogonal(BOUNDS_D, &mut rng)?
            } else {
                u1.clone()
            };
            bounds_row(pair_id, &u1, &u2)
        })
        .collect()
}

fn bounds_row(pair_id: usize, u1: &UnitaryMatrix, u2: &UnitaryMatrix) -> Result<BoundsRow> {
    let psi = pair_state(u1, u2)?;
    let value = bell_value_gamma(&psi, BOUNDS_D, BOUNDS_M)?;
    let b = distance_bounds_from_value(value, BOUNDS_D, BOUNDS_M)?;
    Ok(BoundsRow {
        pair_id,
        value,
        distance: circuit_distance(u1, u2)?,
        lower: b.lower,
        upper: b.upper,
    })
}

pub fn write_bounds_csv(rows: &[BoundsRow], mut out: impl Write) -> Result<()> {
    writeln!(out, "{BOUNDS_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.pair_id,
            fmt_num(r.value),
            fmt_num(r.distance),
            fmt_num(r.lower),
            fmt_num(r.upper)
        )?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampledRow {
    pub pair_id: usize,
    pub n: usize,
    pub shots: u64,
    pub value_estimate: f64,
    pub distance_true: f64,
    pub distance_estimate: f64,
}

pub const SAMPLED_M: usize = 2;
pub const SAMPLED_HEADER: &str = "pair_id,n,s,V_hat,D_true,D_est";

/// For every `n` in `qubit_counts`, `samples` Haar-orthogonal pairs of `n`-qubit
/// circuits run through the sampled embedded protocol at every shot count.
///
/// Pair ids are global (`n` blocks in the given order); the same pair is reused
/// across shot counts. Rows are ordered by pair id, then shot count.
pub fn sampled_scatter(
    qubit_counts: &[usize],
    shot_counts: &[u64],
    samples: usize,
    seed: u64,
) -> Result<Vec<SampledRow>> {
    if let Some(&n) = qubit_counts.iter().find(|&&n| n == 0 || n > 5) {
        return Err(Error::InvalidParameter(format!("qubit count {n} outside 1..=5")));
    }
    let plans = shot_counts
        .iter()
        .map(|&s| ShotPlan::fixed(s))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = qubit_counts
        .iter()
        .enumerate()
        .flat_map(|(block, &n)| (0..samples).map(move |k| (block * samples + k, n)))
        .collect();
    let per_pair = jobs
        .into_par_iter()
        .map(|(pair_id, n)| {
            let pair_seed = derive_seed(seed, pair_id as u64);
            let mut rng = RngStream::new(pair_seed, 0);
            let u1 = random_real_orthogonal(1 << n, &mut rng)?;
            let u2 = random_real_orthogonal(1 << n, &mut rng)?;
            let distance_true = circuit_distance(&u1, &u2)?;
            plans
                .iter()
                .map(|plan| {
                    let rep = estimate_distance(&u1, &u2, SAMPLED_M, plan, derive_seed(pair_seed, plan.shots))?;
                    Ok(SampledRow {
                        pair_id,
                        n,
                        shots: plan.shots,
                        value_estimate: rep.bell_estimate(),
                        distance_true,
                        distance_estimate: rep.distance_estimate,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_pair.into_iter().flatten().collect())
}

/// Root-mean-square of `D_est - D_true` over rows with the given `n` and shot count.
pub fn sampled_rms(rows: &[SampledRow], n: usize, shots: u64) -> Option<f64> {
    let errs: Vec<f64> = rows
        .iter()
        .filter(|r| r.n == n && r.shots == shots)
        .map(|r| r.distance_estimate - r.distance_true)
        .collect();
    if errs.is_empty() {
        return None;
    }
    Some((errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt())
}

pub fn write_sampled_csv(rows: &[SampledRow], mut out: impl Write) -> Result<()> {
    writeln!(out, "{SAMPLED_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.pair_id,
            r.n,
            r.shots,
            fmt_num(r.value_estimate),
            fmt_num(r.distance_true),
            fmt_num(r.distance_estimate)
        )?;
    }
    Ok(())
}

pub const CONCENTRATION_HEADER: &str = "sample_id,V,exceeds";

pub fn concentration(d: usize, m: usize, delta: f64, samples: usize, seed: u64) -> Result<ConcentrationSummary> {
    concentration_experiment(d, m, delta, samples, seed)
}

pub fn write_concentration_csv(summary: &ConcentrationSummary, mut out: impl Write) -> Result<()> {
    writeln!(out, "{CONCENTRATION_HEADER}")?;
    for (k, &v) in summary.values.iter().enumerate() {
        writeln!(out, "{k},{},{}", fmt_num(v), u8::from(v > summary.bound))?;
    }
    Ok(())
}

pub fn render_concentration_summary(s: &ConcentrationSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "d: {}", s.d);
    let _ = writeln!(out, "m: {}", s.m);
    let _ = writeln!(out, "delta: {}", fmt_num(s.delta));
    let _ = writeln!(out, "samples: {}", s.samples);
    let _ = writeln!(out, "seed: {}", s.seed);
    let _ = writeln!(out, "bound: {}", fmt_num(s.bound));
    let _ = writeln!(out, "exceedances: {}", s.exceedances);
    let _ = writeln!(out, "exceedance_fraction: {}", fmt_num(s.exceedance_fraction()));
    let _ = writeln!(out, "allowed_fraction: {}", fmt_num(s.allowed_fraction()));
    let _ = writeln!(
        out,
        "within_allowed: {}",
        s.exceedance_fraction() <= s.allowed_fraction()
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(1.0), "1.00000000000");
        assert_eq!(fmt_num(-2.0), "-2.00000000000");
        assert_eq!(fmt_num(6.0), "6.00000000000");
        assert_eq!(fmt_num(0.5), "0.500000000000");
        assert_eq!(fmt_num(123.456), "123.456000000");
        assert_eq!(fmt_num(1.5e-7), "1.50000000000e-7");
        assert_eq!(fmt_num(0.001), "0.00100000000000");
        let x: f64 = fmt_num(std::f64::consts::PI).parse().unwrap();
        assert!((x - std::f64::consts::PI).abs() < 1e-11);
    }

    #[test]
    fn identical_circuits_are_equivalent() {
        let c = parse_circuit("qubits 2\nH 0\nCX 0 1\nZ 1").unwrap();
        for mode in [CompareMode::Raw, CompareMode::Embedded] {
            let r = compare_exact(&c, &c, 2, mode).unwrap();
            assert!(r.equivalent);
            assert!((r.value - tsirelson_bound(r.d, 2)).abs() < 1e-9);
        }
    }

    #[test]
    fn h_versus_z_embedded() {
        let h = parse_circuit("qubits 1\nH 0").unwrap();
        let z = parse_circuit("qubits 1\nZ 0").unwrap();
        let r = compare_exact(&h, &z, 2, CompareMode::Embedded).unwrap();
        assert!(!r.equivalent);
        assert!((r.distance - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((r.inferred_distance.unwrap() - r.distance).abs() < 1e-9);
        assert!(r.render().contains("verdict: INEQUIVALENT"));
    }

    #[test]
    fn global_sign_is_invisible() {
        let a = parse_circuit("qubits 1\nH 0").unwrap();
        let b = parse_circuit("qubits 1\nH 0\nZ 0\nX 0\nZ 0\nX 0").unwrap();
        let r = compare_exact(&a, &b, 2, CompareMode::Raw).unwrap();
        assert!(r.equivalent);
    }

    #[test]
    fn width_mismatch() {
        let a = parse_circuit("qubits 1\nH 0").unwrap();
        let b = parse_circuit("qubits 2\nH 0").unwrap();
        assert!(matches!(
            compare_exact(&a, &b, 2, CompareMode::Raw),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn bounds_rows_and_planted_corner() {
        let rows = bounds_scatter(50, 2, 5).unwrap();
        assert_eq!(rows.len(), 52);
        assert!(rows.iter().enumerate().all(|(i, r)| r.pair_id == i));
        assert!(rows.iter().all(|r| r.within_bounds(1e-9)));
        let planted = &rows[50];
        assert!(planted.value > 6.0 - 0.01 && planted.distance < 0.05);
        let mut buf = Vec::new();
        write_bounds_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("pair_id,V,D,lower,upper\n"));
        assert_eq!(text.lines().count(), 53);
    }

    #[test]
    fn sampled_small_run() {
        let rows = sampled_scatter(&[1], &[100, 1000], 5, 3).unwrap();
        assert_eq!(rows.len(), 10);
        assert_eq!((rows[0].pair_id, rows[0].shots), (0, 100));
        assert_eq!((rows[1].pair_id, rows[1].shots), (0, 1000));
        assert_eq!(rows[0].distance_true, rows[1].distance_true);
        assert!(sampled_rms(&rows, 1, 100).is_some());
        assert!(sampled_rms(&rows, 2, 100).is_none());
        assert!(sampled_scatter(&[0], &[100], 1, 0).is_err());
    }
}
