use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wpdj::harness::{
    cmd_calibrate, cmd_dj, cmd_enumerate, cmd_transients, cmd_validate, write_calibration, write_convergence,
    write_dj, write_effective_config, write_enumeration, write_transients, DelayGridConfig,
};
use wpdj::{load_config, Error, Execution, Result, RunConfig};

/// Deutsch-Jozsa on a simulated molecular wave packet.
#[derive(Parser)]
#[command(name = "wpdj", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List every constant and balanced function over 2m inputs.
    Enumerate {
        /// Number of inputs 2m.
        #[arg(long, conflicts_with = "qubits")]
        inputs: Option<usize>,
        /// Number of qubits n, for 2^n inputs.
        #[arg(long)]
        qubits: Option<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// Pump-probe transients for selected functions.
    Transients(Common),
    /// Calibrate, classify every function, and run the noisy Monte Carlo.
    Dj(Common),
    /// Compare Schrödinger propagation with first-order amplitudes.
    Validate(Common),
    /// Base phases and decision threshold only.
    Calibrate(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; built-in defaults when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed and WPDJ_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated bit strings or reference labels f1..f10.
    #[arg(long, value_delimiter = ',')]
    functions: Option<Vec<String>>,
    /// Delay grid as start:end:step in ps.
    #[arg(long, value_parser = parse_grid)]
    delay_grid: Option<DelayGridConfig>,
    /// Run on one thread.
    #[arg(long)]
    sequential: bool,
}

fn parse_grid(text: &str) -> std::result::Result<DelayGridConfig, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, end, step] = parts.as_slice() else {
        return Err(format!("expected start:end:step, got {text:?}"));
    };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}"));
    Ok(DelayGridConfig {
        start_ps: num(start)?,
        end_ps: num(end)?,
        step_ps: num(step)?,
    })
}

impl Common {
    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }

    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path)?,
            None => RunConfig::default(),
        }
        .with_env_seed()?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(functions) = &self.functions {
            cfg.functions = Some(functions.clone());
        }
        if let Some(grid) = self.delay_grid {
            cfg.delay_grid = grid;
        }
        cfg.resolve()
    }
}

fn output_dir(cfg: &RunConfig) -> Result<&Path> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    write_effective_config(&cfg.output_dir, cfg)?;
    Ok(&cfg.output_dir)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Enumerate { inputs, qubits, common } => {
            let inputs = match (inputs, qubits) {
                (Some(i), _) => i,
                (None, Some(q)) => 1usize
                    .checked_shl(q)
                    .filter(|_| q < usize::BITS)
                    .ok_or_else(|| Error::Selection(format!("{q} qubits is too many")))?,
                (None, None) => common.config()?.register.inputs,
            };
            let rows = cmd_enumerate(inputs)?;
            write_enumeration(&rows, std::io::stdout().lock())?;
            if let Some(dir) = &common.out {
                std::fs::create_dir_all(dir)?;
                let file = std::fs::File::create(dir.join(format!("functions_{inputs}.txt")))?;
                write_enumeration(&rows, std::io::BufWriter::new(file))?;
            }
        }
        Command::Transients(common) => {
            let cfg = common.config()?;
            let functions = cfg.selected_functions()?;
            let transients = cmd_transients(&cfg, &functions, common.exec())?;
            let dir = output_dir(&cfg)?;
            for path in write_transients(dir, &cfg, &transients)? {
                println!("{}", path.display());
            }
        }
        Command::Dj(common) => {
            let cfg = common.config()?;
            let report = cmd_dj(&cfg, common.exec())?;
            write_dj(output_dir(&cfg)?, &cfg, &report)?;
            let cal = &report.calibration;
            println!("threshold {:.9e}  margin {:.9e}", cal.threshold, cal.margin());
            println!("noiseless {}/{}", report.noiseless_correct, report.functions);
            println!(
                "noisy {}/{} = {:.5} (95% CI {:.5}..{:.5}, sigma {:.3e})",
                report.accuracy.correct,
                report.accuracy.trials,
                report.accuracy.accuracy,
                report.accuracy.interval.low,
                report.accuracy.interval.high,
                report.noise.per_point_sigma()
            );
            if !report.noiseless_perfect() {
                eprintln!("classification regression: noiseless accuracy below 100%");
                return Ok(ExitCode::from(3));
            }
        }
        Command::Validate(common) => {
            let cfg = common.config()?;
            let report = cmd_validate(&cfg, common.exec())?;
            write_convergence(output_dir(&cfg)?, &cfg, &report)?;
            println!("field_scale first_order_error amplitude_error norm_drift");
            for r in &report.rows {
                println!(
                    "{:e} {:.3e} {:.3e} {:.1e}",
                    r.field_scale, r.first_order_error, r.amplitude_error, r.norm_drift
                );
            }
            println!("population slope {:.3}", report.population_slope);
        }
        Command::Calibrate(common) => {
            let cfg = common.config()?;
            let cal = cmd_calibrate(&cfg, common.exec())?;
            write_calibration(output_dir(&cfg)?, &cfg, &cal)?;
            println!("phi0_deg {:?}", cal.phi0.degrees());
            println!("s_constant {:.9e}", cal.s_constant);
            println!("s_balanced_max {:.9e}", cal.s_balanced_max);
            println!("threshold {:.9e}", cal.threshold);
            let worst: Vec<String> = cal.worst_case_functions.iter().map(|f| f.to_string()).collect();
            println!("closest balanced {}", worst.join(","));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
