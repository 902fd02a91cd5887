use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kglab::config::ExperimentConfig;
use kglab::corpus::DEFAULT_SEED;
use kglab::runner::{fit_rate, read_records, sweep_fits, write_records, Experiment, RunRecord};
use kglab::verify::{verify, Suite};
use kglab::LabError;

/// Semiclassical Klein-Gordon / relativistic fluid laboratory.
#[derive(Parser)]
#[command(name = "kglab", version)]
struct Cli {
    /// Seed of the random verification corpus.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED, value_parser = parse_seed)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory; overrides the one in the config.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Co-evolve wave and fluid for every eps and write one record per eps.
    Run { config: PathBuf },
    /// Like `run`, then fit every quantity against eps at the final time.
    Sweep { config: PathBuf },
    /// Run a verification suite: identities, inequalities, conservation,
    /// coercivity, equivalence or all.
    Verify { suite: String },
    /// Log-log fit of a record column against eps at one sample time.
    Fit {
        #[arg(required = true)]
        records: Vec<PathBuf>,
        #[arg(long, default_value = "H")]
        quantity: String,
        #[arg(long = "t", default_value_t = 0.5)]
        t: f64,
    },
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed {s:?}: {e}"))
}

enum Failure {
    Failed(String),
    Config(String),
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        match e {
            LabError::Config(_) | LabError::Json(_) => Failure::Config(e.to_string()),
            e => Failure::Failed(e.to_string()),
        }
    }
}

fn load(path: &Path, out_dir: &Option<PathBuf>) -> Result<(Experiment, PathBuf), Failure> {
    let cfg = ExperimentConfig::load(path)?;
    let dir = out_dir.clone().unwrap_or_else(|| cfg.output.dir.clone());
    // Bad initial data is a configuration problem, whatever the solver says.
    let ex = Experiment::new(cfg).map_err(|e| Failure::Config(e.to_string()))?;
    Ok((ex, dir))
}

fn run(ex: &Experiment, dir: &Path) -> Result<Vec<RunRecord>, Failure> {
    let records = ex.run();
    let paths = write_records(&records, ex.config(), dir)?;
    for (rec, path) in records.iter().zip(&paths) {
        let status = match &rec.meta.abort_reason {
            Some(r) => format!("ABORTED ({r})"),
            None => "ok".into(),
        };
        println!(
            "eps = {:<8} {:>4} samples  {:>7} wave steps  {:.2} s  {}  -> {}",
            rec.eps,
            rec.rows.len(),
            rec.meta.kg_steps,
            rec.meta.wall_time_s,
            status,
            path.display()
        );
    }
    Ok(records)
}

fn execute(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Run { config } => {
            let (ex, dir) = load(&config, &cli.out_dir)?;
            let records = run(&ex, &dir)?;
            if records.iter().any(RunRecord::aborted) {
                return Err(Failure::Failed("at least one run aborted".into()));
            }
        }
        Command::Sweep { config } => {
            let (ex, dir) = load(&config, &cli.out_dir)?;
            let records = run(&ex, &dir)?;
            let t_end = ex.config().times().last().copied().unwrap_or(ex.config().t_end);
            let fits = sweep_fits(&records, t_end);
            for f in &fits {
                match (&f.fit, &f.error) {
                    (Some(p), _) => println!("{:<3} ~ eps^{:.4}  (r2 = {:.6})", f.quantity, p.slope, p.r2),
                    (None, e) => println!("{:<3}   no fit: {}", f.quantity, e.as_deref().unwrap_or("")),
                }
            }
            let path = dir.join(format!("{}_fits.json", ex.config().output.prefix));
            std::fs::write(&path, serde_json::to_string_pretty(&fits).map_err(LabError::from)?)
                .map_err(LabError::from)?;
            println!("fits -> {}", path.display());
            if records.iter().any(RunRecord::aborted) {
                return Err(Failure::Failed("at least one run aborted".into()));
            }
        }
        Command::Verify { suite } => {
            let suite: Suite = suite.parse().map_err(|e: LabError| Failure::Config(e.to_string()))?;
            let report = verify(suite, cli.seed);
            for c in &report.checks {
                let rel = match c.relation {
                    kglab::verify::Relation::AtMost => "<=",
                    kglab::verify::Relation::AtLeast => ">=",
                };
                let extra = c.detail.as_deref().map(|d| format!("  [{d}]")).unwrap_or_default();
                println!(
                    "{} {:<13} {}: {:.3e} {rel} {:.1e}{extra}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.suite,
                    c.name,
                    c.value,
                    c.bound
                );
            }
            let dir = cli.out_dir.unwrap_or_else(|| PathBuf::from("out"));
            std::fs::create_dir_all(&dir).map_err(LabError::from)?;
            let path = dir.join(format!("verify_{suite}.json"));
            std::fs::write(&path, serde_json::to_string_pretty(&report).map_err(LabError::from)?)
                .map_err(LabError::from)?;
            let failed = report.failures().count();
            println!("{} checks, {failed} failed, {:.1} s -> {}", report.checks.len(), report.wall_time_s, path.display());
            if failed > 0 {
                return Err(Failure::Failed(format!("{failed} checks failed")));
            }
        }
        Command::Fit { records, quantity, t } => {
            let rows = read_records(&records)?;
            let fit = fit_rate(&rows, &quantity, t).map_err(|e| match e {
                LabError::Config(m) => Failure::Config(m),
                e => Failure::Failed(e.to_string()),
            })?;
            println!("{}", serde_json::to_string_pretty(&fit).map_err(LabError::from)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Failed(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
    }
}
