//! `vislab`: runs the anomalous-dissipation experiments and checks verdicts.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use vislab::experiments::{
    check_theorem, parse_levels, read_csv, read_json, run_sweep, write_csv, write_json,
    ExperimentConfig, ExperimentRecord, Levels, Verdicts, FLAG_BALANCE, FLAG_BLOWUP, FLAG_CONFIG,
    FLAG_NUMERICAL,
};
use vislab::Error;

const EXIT_VERDICT: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser)]
#[command(
    version,
    about = "Anomalous dissipation experiments for Navier–Stokes with high-frequency data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One level n with the full heat and Navier–Stokes pipeline.
    Single(RunArgs),
    /// Several levels, run concurrently, with verdicts.
    Sweep(RunArgs),
    /// Heat comparison flow only, grid-free.
    HeatOnly(RunArgs),
    /// Re-check verdicts on an existing records file.
    Verify {
        file: PathBuf,
        /// Input format; guessed from the extension when omitted.
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    d: Option<usize>,
    /// Level, list or inclusive range: 3, 1,2,5, 1..4.
    #[arg(long)]
    n: Option<String>,
    /// Box length in units of 2^{2n}.
    #[arg(long = "box-mult")]
    box_mult: Option<f64>,
    /// `auto`, carrier-axis points, or comma-separated points per axis.
    #[arg(long)]
    grid: Option<String>,
    /// `auto` or a fixed time step.
    #[arg(long)]
    dt: Option<String>,
    /// Dealiasing fraction of the per-axis Nyquist index.
    #[arg(long)]
    dealias: Option<f64>,
    /// Energy balance tolerance relative to ‖u_0‖².
    #[arg(long = "tol-balance")]
    tol_balance: Option<f64>,
    /// Record wall-clock runtime (output is then not reproducible).
    #[arg(long)]
    timing: bool,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => {
                let file = File::open(path)
                    .map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;
                serde_json::from_reader(BufReader::new(file))
                    .map_err(|e| Error::Config(format!("bad config {}: {e}", path.display())))?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(d) = self.d {
            cfg.d = d;
        }
        if let Some(n) = &self.n {
            cfg.n = Levels::List(parse_levels(n)?);
        }
        if let Some(m) = self.box_mult {
            cfg.box_mult = m;
        }
        if let Some(g) = &self.grid {
            cfg.grid = parse_grid(g)?;
        }
        if let Some(dt) = &self.dt {
            cfg.dt = parse_auto(dt, "dt")?;
        }
        if let Some(f) = self.dealias {
            cfg.dealias = f;
        }
        if let Some(t) = self.tol_balance {
            cfg.tol_balance = t;
        }
        cfg.timing |= self.timing;
        Ok(cfg)
    }
}

fn parse_grid(s: &str) -> Result<Option<Vec<usize>>, Error> {
    if s.trim() == "auto" {
        return Ok(None);
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad --grid value '{s}'")))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

fn parse_auto(s: &str, what: &str) -> Result<Option<f64>, Error> {
    if s.trim() == "auto" {
        return Ok(None);
    }
    s.trim()
        .parse()
        .map(Some)
        .map_err(|_| Error::Config(format!("bad --{what} value '{s}'")))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = match err.downcast_ref::<Error>() {
                Some(
                    Error::Config(_)
                    | Error::Usage(_)
                    | Error::Contract(_)
                    | Error::Json(_)
                    | Error::Csv(_),
                ) => EXIT_CONFIG,
                Some(Error::Numerical(_) | Error::BlowUp { .. }) => EXIT_NUMERICAL,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Single(args) => {
            let cfg = args.config()?;
            if cfg.levels()?.len() != 1 {
                return Err(
                    Error::Usage("`single` takes exactly one level; use `sweep`".into()).into(),
                );
            }
            execute(cfg, &args)
        }
        Command::Sweep(args) => execute(args.config()?, &args),
        Command::HeatOnly(args) => {
            let mut cfg = args.config()?;
            cfg.heat_only = true;
            execute(cfg, &args)
        }
        Command::Verify { file, format } => {
            let format = format.unwrap_or_else(|| guess_format(&file));
            let reader = BufReader::new(
                File::open(&file).with_context(|| format!("opening {}", file.display()))?,
            );
            let records = match format {
                Format::Csv => read_csv(reader)?,
                Format::Json => read_json(reader)?,
            };
            let verdicts = check_theorem(&records)?;
            report(&verdicts);
            Ok(exit_code(&records, Some(&verdicts)))
        }
    }
}

fn guess_format(path: &Path) -> Format {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => Format::Json,
        _ => Format::Csv,
    }
}

fn execute(cfg: ExperimentConfig, args: &RunArgs) -> anyhow::Result<u8> {
    let records = run_sweep(&cfg)?;
    match &args.out {
        Some(path) => {
            let file =
                File::create(path).with_context(|| format!("creating {}", path.display()))?;
            emit(&records, args.format, BufWriter::new(file))?;
        }
        None => emit(&records, args.format, io::stdout().lock())?,
    }
    let verdicts = match check_theorem(&records) {
        Ok(v) => {
            report(&v);
            Some(v)
        }
        Err(Error::Usage(_)) => None,
        Err(e) => return Err(e.into()),
    };
    for r in records.iter().filter(|r| r.is_failure()) {
        eprintln!("n = {}: cell failed ({})", r.n, r.flags);
    }
    Ok(exit_code(&records, verdicts.as_ref()))
}

fn emit<W: Write>(records: &[ExperimentRecord], format: Format, mut out: W) -> anyhow::Result<()> {
    match format {
        Format::Csv => write_csv(records, &mut out)?,
        Format::Json => write_json(records, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn report(v: &Verdicts) {
    let mark = |b: bool| if b { "pass" } else { "FAIL" };
    eprintln!(
        "(i)   uniform data bound: spread {:.5} [{}]",
        v.l2_spread,
        mark(v.uniform_bound)
    );
    if let Some(chain) = v.difference_chain {
        eprintln!("(ii)  D_ns >= D_heat - gronwall_rhs [{}]", mark(chain));
    }
    match (v.eta_obs, v.eta_ratio, v.liminf_positive) {
        (Some(eta), Some(ratio), Some(ok)) => {
            eprintln!(
                "(iii) eta_obs {eta:.6e}, D_ns/|u0|^2 {ratio:.5} [{}]",
                mark(ok)
            )
        }
        _ => eprintln!("      heat lower bound D_heat/|u0|^2 = {:.5}", v.heat_ratio),
    }
    if let Some(k) = v.fitted_k {
        eprintln!("      fitted K = {k:.6e}");
    }
}

fn exit_code(records: &[ExperimentRecord], verdicts: Option<&Verdicts>) -> u8 {
    let has = |f: &str| records.iter().any(|r| r.has_flag(f));
    if has(FLAG_NUMERICAL) || has(FLAG_BLOWUP) || has(FLAG_BALANCE) {
        EXIT_NUMERICAL
    } else if has(FLAG_CONFIG) {
        EXIT_CONFIG
    } else if verdicts.is_some_and(|v| !v.all_pass) {
        EXIT_VERDICT
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_and_dt_parsing() {
        assert_eq!(parse_grid("auto").unwrap(), None);
        assert_eq!(parse_grid("2048").unwrap(), Some(vec![2048]));
        assert_eq!(parse_grid("256, 32").unwrap(), Some(vec![256, 32]));
        assert!(parse_grid("x").is_err());
        assert_eq!(parse_auto("auto", "dt").unwrap(), None);
        assert_eq!(parse_auto("0.01", "dt").unwrap(), Some(0.01));
        assert!(parse_auto("fast", "dt").is_err());
    }

    #[test]
    fn format_from_extension() {
        assert!(guess_format(Path::new("a.json")) == Format::Json);
        assert!(guess_format(Path::new("a.csv")) == Format::Csv);
    }
}
