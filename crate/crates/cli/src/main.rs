use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bipartite_cli::config::{self, Overrides, ScenarioConfig};
use bipartite_cli::error::{EXIT_OK, EXIT_VERIFY};
use bipartite_cli::fluct::write_samples;
use bipartite_cli::verify::{verify, Suite, REPORT_HEADER};
use bipartite_cli::{run_scenario, RunError};
use bipartite_core::fluctuations::KernelSpec;
use bipartite_core::solver::Fault;

#[derive(Parser)]
#[command(
    name = "bipartite",
    version,
    about = "Bipartite wave-packet scenarios and checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a TOML config, or a named preset.
    Run {
        /// Config file.
        config: Option<PathBuf>,
        /// fig2, fig3, product_control or plane_wave.
        #[arg(long, conflicts_with = "config")]
        preset: Option<String>,
        /// Print the resolved config and exit.
        #[arg(long)]
        dry_run: bool,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Entangled two-packet figure.
    Fig2 {
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Mixture counterpart of fig2.
    Fig3 {
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Sample the single-step fluctuation kernel.
    Fluct {
        #[arg(long, default_value_t = 100_000)]
        count: usize,
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out/fluct")]
        out: PathBuf,
    },
    /// Run the invariant suites; exit 2 if any check fails.
    Verify {
        #[arg(value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        /// Inject a defect to exercise the checks.
        #[arg(long, value_enum)]
        fault: Option<FaultArg>,
    },
}

#[derive(Args)]
struct RunFlags {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "grid-n")]
    grid_n: Option<usize>,
    #[arg(long = "grid-L")]
    grid_l: Option<f64>,
    /// Step in units of tau_a.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    stride: Option<usize>,
}

impl RunFlags {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            seed: self.seed,
            grid_n: self.grid_n,
            grid_l: self.grid_l,
            dt: self.dt,
            steps: self.steps,
            stride: self.stride,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    All,
    Core,
    Infometrics,
    Solver,
    Entanglement,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    /// Rotate the kinetic phase the wrong way.
    KineticSign,
}

fn run(mut cfg: ScenarioConfig, flags: &RunFlags, dry_run: bool) -> Result<i32, RunError> {
    cfg.apply(&flags.overrides());
    if dry_run {
        print!("{}", cfg.resolve()?.to_toml());
        return Ok(EXIT_OK);
    }
    let out = run_scenario(&cfg)?;
    print!(
        "{}",
        std::fs::read_to_string(out.out_dir.join("summary.txt"))?
    );
    println!("artifacts: {}", out.out_dir.display());
    Ok(EXIT_OK)
}

fn dispatch(cli: Cli) -> Result<i32, RunError> {
    match cli.command {
        Command::Run {
            config,
            preset,
            dry_run,
            flags,
        } => {
            let cfg = match (config, preset) {
                (Some(path), _) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
                    ScenarioConfig::from_toml(&text)
                        .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?
                }
                (None, Some(name)) => config::preset(&name)
                    .ok_or_else(|| RunError::Config(format!("unknown preset {name}")))?,
                (None, None) => {
                    return Err(RunError::Config("give a config file or --preset".into()))
                }
            };
            run(cfg, &flags, dry_run)
        }
        Command::Fig2 { flags } => run(config::fig2(), &flags, false),
        Command::Fig3 { flags } => run(config::fig3(), &flags, false),
        Command::Fluct {
            count,
            mass,
            hbar,
            dt,
            seed,
            out,
        } => {
            let spec = KernelSpec::new(mass, hbar, dt)?;
            let s = write_samples(&out, &spec, count, seed)?;
            println!(
                "n,mean,var,product\n{},{:e},{:e},{:e}",
                s.n, s.mean, s.variance, s.product
            );
            println!("hbar/2 = {:e}", hbar / 2.0);
            Ok(EXIT_OK)
        }
        Command::Verify { suite, fault } => {
            let suite = match suite {
                SuiteArg::All => Suite::All,
                SuiteArg::Core => Suite::Core,
                SuiteArg::Infometrics => Suite::Infometrics,
                SuiteArg::Solver => Suite::Solver,
                SuiteArg::Entanglement => Suite::Entanglement,
            };
            let fault = fault.map(|FaultArg::KineticSign| Fault::FlipKineticSign);
            let checks = verify(suite, fault)?;
            println!("{REPORT_HEADER}");
            for c in &checks {
                println!("{c}");
            }
            let failed = checks.iter().filter(|c| !c.passed()).count();
            println!("# {} checks, {} failed", checks.len(), failed);
            Ok(if failed == 0 { EXIT_OK } else { EXIT_VERIFY })
        }
    }
}

fn main() -> ExitCode {
    let code = match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
