use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

use bellcheck::circuit::Circuit;
use bellcheck::experiment::{self, CompareMode, ExactComparison};
use bellcheck::rng::SEED_ENV;
use bellcheck::sampler::{plan_shots, ShotPlan};
use bellcheck::svg::{self, Overlay};
use bellcheck::{Error, Result};

const EXIT_EQUIVALENT: u8 = 0;
const EXIT_INEQUIVALENT: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "bellcheck",
    version,
    about = "Circuit equivalence checking through Bell-inequality violation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact Bell value of two circuit files and the resulting distance.
    CompareExact {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Bounds from the plain pair (default).
        #[arg(long, conflicts_with = "embedded")]
        raw: bool,
        /// Exact distance from the doubled circuits.
        #[arg(long)]
        embedded: bool,
        /// Append a CSV row (header written when the file is new or empty).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite-shot estimate of the distance from the doubled circuits.
    #[command(group(ArgGroup::new("budget").required(true).args(["shots", "epsilon"])))]
    CompareSampled {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, conflicts_with_all = ["epsilon", "delta"])]
        shots: Option<u64>,
        #[arg(long, requires = "delta")]
        epsilon: Option<f64>,
        #[arg(long, requires = "epsilon")]
        delta: Option<f64>,
        #[arg(long, env = SEED_ENV, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random orthogonal pairs at d=4, m=2 with Bell value, distance and bounds.
    #[command(name = "fig1")]
    BoundsScatter {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Extra pairs with identical circuits appended after the random ones.
        #[arg(long, default_value_t = 0)]
        planted: usize,
        #[arg(long, env = SEED_ENV, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sampled doubled-circuit protocol across qubit counts and shot counts.
    #[command(name = "fig3")]
    SampledScatter {
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
        shots: Vec<u64>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, env = SEED_ENV, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Concentration of the Bell value over random real unit vectors.
    #[command(name = "lemma2")]
    Concentration {
        #[arg(long, default_value_t = 16)]
        d: usize,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, env = SEED_ENV, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Scatter plot of two CSV columns as SVG.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        overlay: Option<OverlayKind>,
        #[arg(long, default_value_t = 4)]
        d: usize,
        #[arg(long, default_value_t = 2)]
        m: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OverlayKind {
    Bounds,
    Embedded,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::File {
        path: path.to_path_buf(),
        source: Box::new(e.into()),
    })
}

fn append_row(path: &Path, header: &str, row: &str) -> Result<()> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let mut f = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::File {
            path: path.to_path_buf(),
            source: Box::new(e.into()),
        })?;
    if fresh {
        writeln!(f, "{header}")?;
    }
    writeln!(f, "{row}")?;
    Ok(())
}

fn load_pair(a: &Path, b: &Path) -> Result<(Circuit, Circuit)> {
    Ok((Circuit::from_file(a)?, Circuit::from_file(b)?))
}

fn verdict_code(equivalent: bool) -> u8 {
    if equivalent {
        EXIT_EQUIVALENT
    } else {
        EXIT_INEQUIVALENT
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::CompareExact {
            a, b, m, embedded, out, ..
        } => {
            let (ca, cb) = load_pair(&a, &b)?;
            let mode = if embedded {
                CompareMode::Embedded
            } else {
                CompareMode::Raw
            };
            let r = experiment::compare_exact(&ca, &cb, m, mode)?;
            print!("{}", r.render());
            if let Some(out) = out {
                append_row(&out, ExactComparison::CSV_HEADER, &r.csv_row())?;
            }
            Ok(verdict_code(r.equivalent))
        }
        Command::CompareSampled {
            a,
            b,
            m,
            shots,
            epsilon,
            delta,
            seed,
            out,
        } => {
            let (ca, cb) = load_pair(&a, &b)?;
            let plan = match (shots, epsilon, delta) {
                (Some(s), _, _) => ShotPlan::fixed(s)?,
                (None, Some(e), Some(d)) => plan_shots(e, d)?,
                _ => return Err(Error::InvalidParameter("give --shots or --epsilon with --delta".into())),
            };
            let r = experiment::compare_sampled(&ca, &cb, m, &plan, seed)?;
            print!("{}", r.render());
            if let Some(out) = out {
                let mut w = create(&out)?;
                writeln!(w, "{}", r.csv_header())?;
                writeln!(w, "{}", r.csv_row())?;
                w.flush()?;
            }
            Ok(verdict_code(r.equivalent()))
        }
        Command::BoundsScatter {
            samples,
            planted,
            seed,
            out,
        } => {
            let rows = experiment::bounds_scatter(samples, planted, seed)?;
            let mut w = create(&out)?;
            experiment::write_bounds_csv(&rows, &mut w)?;
            w.flush()?;
            let violations = rows.iter().filter(|r| !r.within_bounds(1e-9)).count();
            let tight = rows.iter().filter(|r| r.distance - r.lower < 0.1).count();
            println!("seed: {seed}");
            println!("pairs: {}", rows.len());
            println!("planted: {planted}");
            println!("bound_violations: {violations}");
            println!("tight_lower_pairs: {tight}");
            println!("csv: {}", out.display());
            Ok(0)
        }
        Command::SampledScatter {
            n,
            shots,
            samples,
            seed,
            out,
        } => {
            let rows = experiment::sampled_scatter(&n, &shots, samples, seed)?;
            let mut w = create(&out)?;
            experiment::write_sampled_csv(&rows, &mut w)?;
            w.flush()?;
            println!("seed: {seed}");
            println!("samples_per_n: {samples}");
            for &q in &n {
                for &s in &shots {
                    if let Some(rms) = experiment::sampled_rms(&rows, q, s) {
                        println!("rms n={q} s={s}: {}", experiment::fmt_num(rms));
                    }
                }
            }
            println!("csv: {}", out.display());
            Ok(0)
        }
        Command::Concentration {
            d,
            m,
            delta,
            samples,
            seed,
            out,
        } => {
            let summary = experiment::concentration(d, m, delta, samples, seed)?;
            let mut w = create(&out)?;
            experiment::write_concentration_csv(&summary, &mut w)?;
            w.flush()?;
            print!("{}", experiment::render_concentration_summary(&summary));
            println!("csv: {}", out.display());
            Ok(0)
        }
        Command::Plot {
            csv,
            x,
            y,
            out,
            overlay,
            d,
            m,
        } => {
            let overlay = match overlay {
                None => Overlay::None,
                Some(OverlayKind::Bounds) => Overlay::Bounds { d, m },
                Some(OverlayKind::Embedded) => Overlay::Embedded { d, m },
            };
            svg::plot_csv(&csv, &x, &y, overlay, &out)?;
            println!("svg: {}", out.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
