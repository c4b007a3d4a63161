use clap::{Parser, Subcommand, ValueEnum};
use mpctrack_cli::{load_config, run_experiment, validate_config, write_outputs, CliError, Mode};
use mpctrack_core::synth::{paper_scenario, ScenarioVariant};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mpctrack", version, about = "Multipath component tracking experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    #[value(name = "fully_synthetic")]
    FullySynthetic,
    #[value(name = "radio_pipeline")]
    RadioPipeline,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a Monte-Carlo experiment.
    Run {
        config: PathBuf,
        /// Override the number of Monte-Carlo runs.
        #[arg(long)]
        runs: Option<usize>,
        /// Override the base seed (run i uses seed ^ i).
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads, 0 for all cores.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Check a config file and report defaulted fields.
    Validate { config: PathBuf },
    /// Scenario utilities.
    Scenario {
        #[command(subcommand)]
        cmd: ScenarioCmd,
    },
}

#[derive(Subcommand)]
enum ScenarioCmd {
    /// Write a builtin scenario as JSON.
    Emit { name: String, path: PathBuf },
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    match e {
        CliError::Invalid(_) | CliError::Parse { .. } | CliError::Read { .. } => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Run {
            config,
            runs,
            seed,
            out,
            workers,
            mode,
        } => {
            let loaded = match load_config(&config) {
                Ok(l) => l,
                Err(e) => return fail(&e),
            };
            let mut cfg = loaded.config;
            if let Some(r) = runs {
                cfg.runs = r;
            }
            if let Some(s) = seed {
                cfg.base_seed = s;
            }
            if let Some(o) = out {
                cfg.out_dir = o;
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            if let Some(m) = mode {
                cfg.mode = match m {
                    ModeArg::FullySynthetic => Mode::FullySynthetic,
                    ModeArg::RadioPipeline => Mode::RadioPipeline,
                };
            }
            let issues = mpctrack_cli::config::check(&cfg);
            if !issues.is_empty() {
                return fail(&CliError::Invalid(issues));
            }
            for d in &loaded.defaulted {
                eprintln!("note: {} {}", d.field, d.message);
            }
            let res = run_experiment(&cfg, &loaded.scenario).and_then(|o| {
                write_outputs(&cfg, &o)?;
                Ok(o)
            });
            match res {
                Ok(o) => {
                    let s = &o.summary.overall;
                    println!(
                        "runs={} steps={} mospa_d={:.4} mospa_phi={:.3} mospa_snr={:.3} nom_hat={:.3} mu_fa_hat={:.3}",
                        o.runs.len(),
                        o.summary.per_step.len(),
                        s.ospa_d_m,
                        s.ospa_phi_deg,
                        s.ospa_snr_db,
                        s.nom_hat,
                        s.mu_fa_hat
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    let _ = std::fs::create_dir_all(&cfg.out_dir)
                        .and_then(|_| std::fs::write(cfg.out_dir.join("error.json"), e.to_json().to_string()));
                    fail(&e)
                }
            }
        }
        Cmd::Validate { config } => {
            let report = validate_config(&config);
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            let _ = writeln!(std::io::stdout(), "{text}");
            if report.valid {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Cmd::Scenario {
            cmd: ScenarioCmd::Emit { name, path },
        } => {
            let Some(v) = ScenarioVariant::from_name(&name) else {
                return fail(&CliError::Invalid(vec![mpctrack_cli::FieldIssue {
                    field: "name".into(),
                    message: format!("unknown scenario {name}"),
                }]));
            };
            match paper_scenario(v).save(&path) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(&e.into()),
            }
        }
    }
}
