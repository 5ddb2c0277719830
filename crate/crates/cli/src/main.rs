use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fidsim_cli::{diagnose, preset, run, CliError, ExperimentConfig, Method, PRESETS};

#[derive(Parser)]
#[command(name = "fidsim", version, about = "Infinite-temperature spin autocorrelation functions of classical and quantum spin lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate C(t), fit its tail and write artifacts to the output directory
    Run(Selection),
    /// Print tau, n_eff and the expected classical-quantum agreement
    Diagnose(Selection),
    /// List the built-in presets
    Presets,
}

#[derive(Args)]
struct Selection {
    /// Preset name (same as --preset)
    name: Option<String>,
    #[arg(long)]
    preset: Option<String>,
    /// TOML configuration file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    /// Replace every lattice extent with this value
    #[arg(long)]
    lattice: Option<usize>,
    #[arg(long)]
    tmax: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<Method>,
    /// Worker threads (0 = all cores)
    #[arg(long)]
    workers: Option<usize>,
}

impl Selection {
    fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let name = match (&self.name, &self.preset) {
            (Some(a), Some(b)) if a != b => {
                return Err(CliError::Config(format!("preset given twice: '{a}' and '{b}'")));
            }
            (a, b) => a.clone().or_else(|| b.clone()),
        };
        let mut c = match (&name, &self.config) {
            (Some(_), Some(_)) => return Err(CliError::Config("use either a preset or --config, not both".into())),
            (Some(n), None) => preset(n).ok_or_else(|| {
                let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
                CliError::Config(format!("unknown preset '{n}'; available: {}", names.join(", ")))
            })?,
            (None, Some(path)) => ExperimentConfig::from_toml(&std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read {}: {e}", path.display()))
            })?)?,
            (None, None) => ExperimentConfig::default(),
        };
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.realizations {
            c.run.realizations = v;
        }
        if let Some(v) = self.samples {
            c.run.samples = v;
        }
        if let Some(l) = self.lattice {
            for d in &mut c.lattice.dims {
                *d = l;
            }
        }
        if let Some(v) = self.tmax {
            c.run.t_max = Some(v);
        }
        if let Some(v) = self.dt {
            c.run.dt = v;
        }
        if let Some(v) = &self.out_dir {
            c.output.dir = v.clone();
        }
        if let Some(v) = self.method {
            c.run.method = Some(v);
        }
        if let Some(v) = self.workers {
            c.run.workers = v;
        }
        c.validate()?;
        Ok(c)
    }
}

fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Presets => {
            for p in PRESETS {
                println!("{:<22} {}", p.name, p.summary);
            }
        }
        Command::Diagnose(sel) => {
            let c = sel.resolve()?;
            let d = diagnose(&c)?;
            println!("tau: {:.6}", d.tau);
            println!("n_eff: {:.4}", d.n_eff);
            for line in d.verdict_lines() {
                println!("{line}");
            }
        }
        Command::Run(sel) => {
            let c = sel.resolve()?;
            let out = with_workers(c.run.workers, || run(&c))??;
            print!("{}", std::fs::read_to_string(c.output.dir.join("report.txt"))?);
            println!("wrote {} files to {}", out.files.len(), c.output.dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
