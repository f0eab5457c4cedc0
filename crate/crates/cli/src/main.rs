//! `femcert` command line.
//!
//! Exit codes: 0 success or verified, 1 not verified, 2 configuration
//! error, 3 numerical failure (or an artifact that could not be written).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use femcert::config::RunConfig;
use femcert::driver::{
    containment_verdict, initial_box, integrate_period, reference_solve, run_radii, Certificate, PeriodRun,
    Setup, TraceRow, Verdict,
};
use femcert::forcing::NormMode;
use femcert::radii::trapping_radii;
use femcert::{Error, IntervalVector};

#[derive(Parser, Debug)]
#[command(name = "femcert", version, about = "Validated FEM integration of the forced Burgers equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration document (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for artifacts; relative output paths resolve against it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads, overriding the config.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    norm_mode: Option<NormArg>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq)]
enum Command {
    /// Global trapping radii only.
    Radii,
    /// One period of the validated integration, with the step trace.
    Integrate,
    /// Integration plus the periodic orbit containment check.
    VerifyPeriodic,
    /// Nonrigorous reference trajectory over one period.
    Reference,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum NormArg {
    Triangle,
    Orthogonal,
}

/// Artifact paths; every entry is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct Outputs {
    radii: Option<PathBuf>,
    certificate: Option<PathBuf>,
    run: Option<PathBuf>,
    trace: Option<PathBuf>,
    reference: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(m) => Failure::Config(m),
            other => Failure::Numeric(other.to_string()),
        }
    }
}

/// The run configuration with an optional `outputs` object alongside.
fn parse_config(text: &str) -> Result<(RunConfig, Outputs), Failure> {
    let mut doc: serde_json::Value = serde_json::from_str(text).map_err(|e| Failure::Config(e.to_string()))?;
    let obj = doc
        .as_object_mut()
        .ok_or_else(|| Failure::Config("configuration must be a JSON object".into()))?;
    let outputs = match obj.remove("outputs") {
        Some(v) => serde_json::from_value(v).map_err(|e| Failure::Config(format!("outputs: {e}")))?,
        None => Outputs::default(),
    };
    let cfg = RunConfig::from_json(&doc.to_string())?;
    Ok((cfg, outputs))
}

struct Paths {
    dir: PathBuf,
    outputs: Outputs,
}

impl Paths {
    fn get(&self, chosen: &Option<PathBuf>, default: &str) -> PathBuf {
        match chosen {
            Some(p) if p.is_absolute() => p.clone(),
            Some(p) => self.dir.join(p),
            None => self.dir.join(default),
        }
    }
}

/// Write-to-temp then rename, so a reader never sees a partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Numeric(format!("writing {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(value).expect("artifacts serialize");
    s.push(b'\n');
    s
}

fn csv_bytes(header: Vec<String>, rows: impl Iterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("in-memory csv");
    for r in rows {
        w.write_record(&r).expect("in-memory csv");
    }
    w.into_inner().expect("in-memory csv")
}

/// One row per step; every interval as a `lo`/`hi` pair. `M` are the
/// window bounds and `R` the endpoint bounds for `‖∂ⁿu‖`, n = 0..4.
fn trace_csv(trace: &[TraceRow], leading: usize) -> Vec<u8> {
    let mut header: Vec<String> = vec!["step".into(), "t_lo".into(), "t_hi".into()];
    for name in ["M", "R"] {
        for j in 1..=5 {
            header.push(format!("{name}{j}_lo"));
            header.push(format!("{name}{j}_hi"));
        }
    }
    for l in 1..=leading {
        header.push(format!("beta{l}_lo"));
        header.push(format!("beta{l}_hi"));
    }
    for c in ["tail_width_max", "eps_max", "nonforcing_max", "qk_h1", "qk_l2", "enclosure_attempts"] {
        header.push(c.into());
    }
    let rows = trace.iter().map(|row| {
        let mut r = vec![row.step.to_string(), row.t.lo().to_string(), row.t.hi().to_string()];
        for x in row.bounds.m.iter().chain(&row.bounds.r).chain(row.leading.iter()) {
            r.push(x.lo().to_string());
            r.push(x.hi().to_string());
        }
        r.push(row.tail_width_max.to_string());
        r.push(row.eps_max.to_string());
        r.push(row.nonforcing_max.to_string());
        r.push(row.qk_h1.hi().to_string());
        r.push(row.qk_l2.hi().to_string());
        r.push(row.enclosure_attempts.to_string());
        r
    });
    csv_bytes(header, rows)
}

#[derive(Serialize)]
struct RunSummary<'a> {
    config: &'a RunConfig,
    initial: &'a IntervalVector,
    final_set: Option<IntervalVector>,
    failure: Option<(usize, String)>,
    elapsed_seconds: f64,
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::Config("--config is required".into()))?;
    let text =
        std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("reading {}: {e}", path.display())))?;
    let (mut cfg, outputs) = parse_config(&text)?;
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    if let Some(m) = cli.norm_mode {
        cfg.norm_mode = match m {
            NormArg::Triangle => NormMode::Triangle,
            NormArg::Orthogonal => NormMode::Orthogonal,
        };
    }
    cfg.validate()?;
    if cfg.threads > 0 {
        // Fails only if the pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    }
    let paths = Paths {
        dir: cli.out.clone().unwrap_or_else(|| PathBuf::from(".")),
        outputs,
    };
    let start = std::time::Instant::now();

    match cli.command {
        Command::Radii => {
            let forcing = cfg.forcing.build()?;
            let radii = trapping_radii(&forcing, cfg.norm_mode, &cfg.radii_grid)?;
            write_atomic(&paths.get(&paths.outputs.radii, "radii.json"), &json_bytes(&radii))?;
            for (j, r) in radii.r.iter().enumerate() {
                eprintln!("R{} = {} ({})", j + 1, r, radii.method_used[j]);
            }
            Ok(0)
        }
        Command::Reference => {
            let setup = Setup::new(&cfg)?;
            let reference = reference_solve(&cfg, &setup);
            let n = setup.basis.dim();
            let header = std::iter::once("t".to_string())
                .chain((1..=n).map(|l| format!("beta{l}")))
                .collect();
            let rows = reference
                .times
                .iter()
                .zip(&reference.beta)
                .map(|(t, b)| std::iter::once(t).chain(b).map(|x| x.to_string()).collect());
            write_atomic(&paths.get(&paths.outputs.reference, "reference.csv"), &csv_bytes(header, rows))?;
            Ok(0)
        }
        Command::Integrate | Command::VerifyPeriodic => {
            let setup = Setup::new(&cfg)?;
            let radii = run_radii(&cfg, &setup)?;
            let initial = initial_box(&cfg, &setup);
            let run: PeriodRun = integrate_period(&cfg, &setup, radii.as_ref(), &initial)?;
            let trace_path = paths.get(&paths.outputs.trace, "trace.csv");
            let final_set = run.last.as_ref().map(|s| s.hull());
            let elapsed_seconds = start.elapsed().as_secs_f64();
            if cli.command == Command::Integrate {
                let summary = RunSummary {
                    config: &cfg,
                    initial: &initial,
                    final_set,
                    failure: run.failure.clone(),
                    elapsed_seconds,
                };
                write_atomic(&paths.get(&paths.outputs.run, "run.json"), &json_bytes(&summary))?;
                write_atomic(&trace_path, &trace_csv(&run.trace, cfg.leading_count))?;
                return match &run.failure {
                    None => Ok(0),
                    Some((step, reason)) => Err(Failure::Numeric(format!("step {step}: {reason}"))),
                };
            }
            let verdict = containment_verdict(&cfg, &run);
            let cert = Certificate {
                config: cfg.clone(),
                radii,
                initial,
                final_set,
                trace: run.trace,
                verdict,
                elapsed_seconds,
            };
            write_atomic(&paths.get(&paths.outputs.certificate, "certificate.json"), &json_bytes(&cert))?;
            write_atomic(&trace_path, &trace_csv(&cert.trace, cfg.leading_count))?;
            match &cert.verdict {
                Verdict::PeriodicVerified => {
                    eprintln!("periodic_verified");
                    Ok(0)
                }
                Verdict::NotVerified { reason } => {
                    eprintln!("not_verified: {reason}");
                    Ok(1)
                }
                Verdict::Failed { step, reason } => Err(Failure::Numeric(format!("step {step}: {reason}"))),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            match &f {
                Failure::Config(m) => eprintln!("configuration error: {m}"),
                Failure::Numeric(m) => eprintln!("numerical failure: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
