//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage or malformed input, 3 domain error (noise
//! floor, missing root, invalid parameter), 4 I/O error.

mod profile;

pub use profile::ProfileFile;

use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::analysis::{
    self, channel_comparison, format_sig, max_distance, max_tolerable_qber, Channel, SweepSpec, SweepVariable,
};
use crate::coupler_oracle::{self, compare_to_closed_form, fock_brute_force, single_photon_component, CouplerScenario, PhaseConvention};
use crate::error::{Error, Result};
use crate::qmath::trace_distance;
use crate::state_model::{ExtinctionModel, PulseParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "imqkd",
    version,
    about = "BB84 key rates under finite intensity-modulator extinction ratio",
    long_about = "Evaluates how leakage through imperfect intensity modulators changes the \
                  secret key rate of BB84. Flags given on the command line override values \
                  read from profile files."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Extinction {
    /// Extinction ratio in dB (power ratio, r = 10^(dB/10))
    #[arg(long = "r-db", value_name = "DB", allow_negative_numbers = true)]
    r_db: Option<f64>,
    /// Extinction ratio as a linear power ratio (alternative to --r-db)
    #[arg(long = "r", value_name = "RATIO", conflicts_with = "r_db", allow_negative_numbers = true)]
    r_linear: Option<f64>,
}

impl Extinction {
    fn resolve(&self, fallback_db: Option<f64>) -> Result<ExtinctionModel> {
        match (self.r_linear, self.r_db.or(fallback_db)) {
            (Some(r), _) => ExtinctionModel::from_linear(r),
            (None, Some(db)) => ExtinctionModel::from_db(db),
            (None, None) => Err(Error::Profile("no extinction ratio: pass --r-db or --r, or set r_db in the profile".into())),
        }
    }
}

#[derive(Debug, Args)]
struct Range {
    #[arg(long, allow_negative_numbers = true)]
    start: f64,
    #[arg(long, allow_negative_numbers = true)]
    stop: f64,
    #[arg(long, allow_negative_numbers = true)]
    step: f64,
    /// Output CSV file
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Maximum tolerable QBER for ideal single photons.
    ///
    /// Baseline: root of 1 − 2H(e). Modified: root of
    /// 1 − H(e′) − (1−2p)·H((e′−p)/(1−2p)) with p = 2/(r+3).
    Threshold {
        #[command(flatten)]
        ext: Extinction,
    },
    /// Single-photon key rate against observed QBER, written as CSV.
    ///
    /// Columns x, rate_baseline = 1 − 2H(x) and
    /// rate_modified = 1 − H(x) − (1−2p)·H((x−p)/(1−2p)); negative rates are written as 0.
    /// The sweep must start at or above the noise floor p = 2/(r+3).
    SweepQber {
        #[command(flatten)]
        ext: Extinction,
        #[command(flatten)]
        range: Range,
    },
    /// Decoy-state key rate against fiber length in km, written as CSV.
    ///
    /// rate_baseline = q·{−Q_μ f(E_μ) H(E_μ) + Q₁[1 − H(e₁ᵁ)]};
    /// rate_modified = q·{−Q_μ f(E_μ) H(E_μ) + Q₁[1 − (Y₀+(1−2p)η)/(Y₀+η)·H(e₁ᵈ)]}.
    SweepDistance {
        /// Channel profile file
        #[arg(long, value_name = "FILE")]
        profile: PathBuf,
        #[command(flatten)]
        ext: Extinction,
        #[command(flatten)]
        range: Range,
    },
    /// Fiber length where each decoy-state key rate reaches zero.
    ///
    /// Zero crossings of the baseline and modified decoy-state rates, found by a 1 km scan
    /// and bisection.
    MaxDistance {
        #[arg(long, value_name = "FILE")]
        profile: PathBuf,
        #[command(flatten)]
        ext: Extinction,
    },
    /// Brute-force check of the single-photon coupler output.
    ///
    /// Averages the single-photon output of the phase-randomized 4×1 coupler over a phase grid
    /// and fits it to (r−1)/(r+3)·ρ_ideal + 4/(r+3)·½Î. Also cross-checks the coherent-state
    /// shortcut against a truncated Fock expansion.
    VerifyCoupler {
        #[command(flatten)]
        ext: Extinction,
        /// Source amplitude μ
        #[arg(long, allow_negative_numbers = true)]
        mu: f64,
        /// Phase convention; both are reported when omitted
        #[arg(long, value_parser = ["strict", "paper"])]
        mode: Option<String>,
        /// Fock cutoff per path
        #[arg(long, default_value_t = coupler_oracle::DEFAULT_FOCK_CUTOFF)]
        cutoff: usize,
        /// Grid points per phase angle
        #[arg(long, default_value_t = coupler_oracle::DEFAULT_GRID_POINTS)]
        grid: usize,
        /// Output CSV file; standard output when omitted
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Baseline vs modified decoy-state rate for every profile in a directory.
    ///
    /// Reads every *.toml file in DIR (sorted by name, channel = file stem) and evaluates both
    /// decoy-state rates at the profile's distance_km (default 0). uplift = modified/baseline − 1.
    Compare {
        #[arg(long, value_name = "DIR")]
        profiles: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        #[command(flatten)]
        ext: Extinction,
    },
}

/// Runs the CLI with process stdout/stderr and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "imqkd: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::Profile(_) => EXIT_USAGE,
        Error::Domain(_)
        | Error::NoiseFloor { .. }
        | Error::NoRoot(_)
        | Error::NotPositiveAtOrigin { .. }
        | Error::CutoffTooSmall { .. }
        | Error::InvalidState(_) => EXIT_DOMAIN,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn print_value(out: &mut dyn Write, name: &str, value: f64) -> Result<()> {
    writeln!(out, "{name}={}", format_sig(value))?;
    Ok(())
}

fn execute(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Threshold { ext } => {
            let em = ext.resolve(None)?;
            let t = max_tolerable_qber(&em)?;
            print_value(stdout, "r", em.r())?;
            print_value(stdout, "r_db", em.r_db())?;
            print_value(stdout, "p", em.p())?;
            print_value(stdout, "baseline_max_qber", t.baseline)?;
            print_value(stdout, "modified_max_qber", t.modified)?;
        }
        Command::SweepQber { ext, range } => {
            let em = ext.resolve(None)?;
            let spec = SweepSpec { variable: SweepVariable::Qber, start: range.start, stop: range.stop, step: range.step, em };
            let points = analysis::sweep(&spec)?;
            analysis::write_sweep_csv(create(&range.out)?, &points)?;
        }
        Command::SweepDistance { profile, ext, range } => {
            let file = ProfileFile::load(&profile)?;
            let em = ext.resolve(file.r_db)?;
            let spec = SweepSpec {
                variable: SweepVariable::Distance(file.channel_profile()?),
                start: range.start,
                stop: range.stop,
                step: range.step,
                em,
            };
            let points = analysis::sweep(&spec)?;
            analysis::write_sweep_csv(create(&range.out)?, &points)?;
        }
        Command::MaxDistance { profile, ext } => {
            let file = ProfileFile::load(&profile)?;
            let em = ext.resolve(file.r_db)?;
            let d = max_distance(&file.channel_profile()?, &em)?;
            print_value(stdout, "baseline_km", d.baseline_km)?;
            print_value(stdout, "modified_km", d.modified_km)?;
            print_value(stdout, "gap_km", d.gap_km())?;
        }
        Command::VerifyCoupler { ext, mu, mode, cutoff, grid, out } => {
            let em = ext.resolve(None)?;
            let pulse = PulseParams::new(mu, &em)?;
            let conventions = match mode {
                Some(m) => vec![m.parse::<PhaseConvention>()?],
                None => PhaseConvention::ALL.to_vec(),
            };
            let mut reports = Vec::new();
            for conv in conventions {
                let sc = CouplerScenario::new(pulse, conv).with_grid(grid)?.with_cutoff(cutoff)?;
                let deviation = fock_deviation(&sc)?;
                writeln!(stderr, "{conv}: fock vs coherent max trace distance {}", format_sig(deviation))?;
                reports.push(compare_to_closed_form(&sc)?);
            }
            match out {
                Some(path) => coupler_oracle::write_reports_csv(create(&path)?, &reports)?,
                None => coupler_oracle::write_reports_csv(&mut *stdout, &reports)?,
            }
        }
        Command::Compare { profiles, out, ext } => {
            let mut paths: Vec<PathBuf> = std::fs::read_dir(&profiles)
                .map_err(|e| Error::Io(format!("{}: {e}", profiles.display())))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "toml"))
                .collect();
            paths.sort();
            if paths.is_empty() {
                return Err(Error::Profile(format!("no *.toml profiles in {}", profiles.display())));
            }
            let mut rows = Vec::new();
            for path in &paths {
                let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                let row = ProfileFile::load(path).and_then(|file| {
                    let em = ext.resolve(file.r_db)?;
                    let channel = Channel {
                        name: name.clone(),
                        profile: file.channel_profile()?,
                        distance_km: file.distance_km.unwrap_or(0.0),
                    };
                    Ok(channel_comparison(&[channel], &em).remove(0))
                });
                rows.push(row.unwrap_or_else(|e| analysis::ComparisonRow { channel: name, outcome: Err(e) }));
            }
            for row in &rows {
                if let Err(e) = &row.outcome {
                    writeln!(stderr, "{}: {e}", row.channel)?;
                }
            }
            analysis::write_comparison_csv(create(&out)?, &rows)?;
        }
    }
    Ok(())
}

/// Largest trace distance between the Fock expansion and the coherent
/// shortcut over a coarse 4⁴ sub-grid of the scenario's phases.
fn fock_deviation(sc: &CouplerScenario) -> Result<f64> {
    let grid: Vec<f64> = (0..4).map(|k| std::f64::consts::TAU * (k as f64 + 0.5) / 4.0).collect();
    let mut worst: f64 = 0.0;
    for &a in &grid {
        for &b in &grid {
            for &c in &grid {
                for &d in &grid {
                    let phases = [a, b, c, d];
                    let fock = fock_brute_force(sc, phases)?;
                    let short = single_photon_component(coupler_oracle::propagate_coherent(sc, phases));
                    if let (Some(x), Some(y)) = (fock.state, short.state) {
                        worst = worst.max(trace_distance(&x, &y));
                    }
                }
            }
        }
    }
    Ok(worst)
}
