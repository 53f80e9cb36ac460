//! `qle` — command-line front end for the resonator/network/thermo toolkit.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qle::scenario::{self, Outcome};
use qle_core::langevin::{tbp_report, ResonatorModel};
use qle_core::matfile;
use qle_core::network::{solve_gauge, CouplingMatrix};
use qle_core::scattering::{dilate_to_unitary, ScatteringMatrix};
use qle_core::thermo::{
    default_step, detect_violation, three_bath_restore, Bath, BathSystem, Link, LinkMode,
};

#[derive(Parser)]
#[command(name = "qle", version, about = "Quantum Langevin resonator toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario config file.
    Run {
        config: PathBuf,
        /// Turn expect_* keys into pass/fail assertions (CI gate).
        #[arg(long)]
        check: bool,
        /// Output directory (default: $QLE_OUT_DIR or ./qle-out).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// One-shot time-bandwidth report for a resonator model.
    Tbp {
        #[arg(long)]
        tau: f64,
        /// Comma-separated coupling rates, γ_0 first.
        #[arg(long)]
        gamma: String,
        /// Comma-separated Bogoliubov rates on channels 1,2,…
        #[arg(long)]
        kappa: Option<String>,
        /// Comma-separated phases, one per kappa entry.
        #[arg(long)]
        phi: Option<String>,
        #[arg(long, default_value_t = 0.0)]
        omega0: f64,
    },
    /// Time-reversal gauge analysis of a coupling-matrix file.
    Gauge { matrix: PathBuf },
    /// Unitary dilation of a passive scattering-matrix file.
    Dilate {
        matrix: PathBuf,
        /// Write the dilated matrix here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bath-network run with an entropy ledger.
    Thermo {
        #[arg(long, value_parser = ["oneway", "reciprocal", "threebath"])]
        mode: String,
        /// Forward conductance.
        #[arg(long, default_value_t = 0.1)]
        g: f64,
        /// Third-bath conductance (threebath mode).
        #[arg(long, default_value_t = 10.0)]
        g_third: f64,
        #[arg(long, default_value_t = 10.0)]
        horizon: f64,
        /// Euler step (default: half the stability bound).
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        t1: f64,
        #[arg(long, default_value_t = 1.0)]
        t2: f64,
        #[arg(long, default_value_t = 1.0)]
        heat_capacity: f64,
        /// Write the run CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_rates(label: &str, text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("cannot parse {label} entry {p:?}"))
        })
        .collect()
}

fn out_dir_from(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("QLE_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("qle-out"))
}

fn print_outcomes(outcomes: &[Outcome], check: bool) -> bool {
    let mut all_ok = true;
    for o in outcomes {
        println!("{}: {}", o.name, o.verdict);
        if check {
            if o.check_failures.is_empty() {
                println!("{}: [check] ok", o.name);
            } else {
                all_ok = false;
                for f in &o.check_failures {
                    println!("{}: [check] FAIL {f}", o.name);
                }
            }
        }
    }
    all_ok
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Run { config, check, out_dir } => {
            let scenarios = scenario::load_config(&config).map_err(|e| e.to_string())?;
            let base_dir = config
                .parent()
                .filter(|p| !p.as_os_str().is_empty())
                .map(Path::to_path_buf)
                .unwrap_or_else(|| PathBuf::from("."));
            let out_dir = out_dir_from(out_dir);
            let outcomes = scenario::run_scenarios(&scenarios, &base_dir, &out_dir, check)
                .map_err(|e| e.to_string())?;
            let ok = print_outcomes(&outcomes, check);
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }

        Command::Tbp { tau, gamma, kappa, phi, omega0 } => {
            let gamma = parse_rates("gamma", &gamma)?;
            let kappa = kappa.map(|k| parse_rates("kappa", &k)).transpose()?.unwrap_or_default();
            let phi = phi.map(|p| parse_rates("phi", &p)).transpose()?.unwrap_or_default();
            let model =
                ResonatorModel::new(omega0, tau, gamma, kappa, phi).map_err(|e| e.to_string())?;
            let report = tbp_report(&model);
            println!("{} tbp={:.3}", report.classification, report.tbp);
            println!("{}", report.to_csv_line());
            Ok(ExitCode::SUCCESS)
        }

        Command::Gauge { matrix } => {
            let raw = matfile::read_matrix(&matrix)
                .map_err(|e| format!("{}: {e}", matrix.display()))?;
            let g = CouplingMatrix::validate(&raw).map_err(|e| e.to_string())?;
            let sol = solve_gauge(&g);
            if sol.exists {
                println!(
                    "time-reversal gauge exists (worst defect {:.2e})",
                    sol.worst_cycle_defect
                );
                let phases = sol.phases.expect("phases accompany an existing gauge");
                let rendered: Vec<String> =
                    phases.iter().map(|p| format!("{p:.12}")).collect();
                println!("phases: [{}]", rendered.join(", "));
            } else {
                println!(
                    "TIME-REVERSAL BROKEN worst_cycle_defect={:.6}",
                    sol.worst_cycle_defect
                );
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Dilate { matrix, out } => {
            let raw = matfile::read_matrix(&matrix)
                .map_err(|e| format!("{}: {e}", matrix.display()))?;
            let s = ScatteringMatrix::new(raw).map_err(|e| e.to_string())?;
            let dilated = dilate_to_unitary(&s).map_err(|e| e.to_string())?;
            eprintln!("dilated {}→{} ports (unitary)", s.dim(), dilated.dim());
            let text = matfile::format_matrix(dilated.entries());
            match out {
                Some(path) => {
                    std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?
                }
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Thermo { mode, g, g_third, horizon, dt, t1, t2, heat_capacity, out } => {
            let (system, critical) = match mode.as_str() {
                "threebath" => {
                    let report =
                        three_bath_restore(g, g_third, horizon).map_err(|e| e.to_string())?;
                    (report.system, Some(report.critical_g_third))
                }
                other => {
                    let link_mode = if other == "oneway" {
                        LinkMode::OneWay
                    } else {
                        LinkMode::Reciprocal
                    };
                    let system = BathSystem::new(
                        vec![
                            Bath { temperature: t1, heat_capacity },
                            Bath { temperature: t2, heat_capacity },
                        ],
                        vec![Link { from: 0, to: 1, conductance: g, mode: link_mode }],
                    )
                    .map_err(|e| e.to_string())?;
                    let dt = dt.unwrap_or_else(|| default_step(&system));
                    (system.run(dt, horizon).map_err(|e| e.to_string())?, None)
                }
            };
            let report = detect_violation(&system);
            match (report.violated, critical) {
                (true, None) => println!(
                    "SECOND-LAW VIOLATION at t={:.6} (max deficit {:.3e})",
                    report.first_violation_time.unwrap_or(f64::NAN),
                    report.max_entropy_deficit
                ),
                (false, None) => println!(
                    "second law holds (max deficit {:.3e})",
                    report.max_entropy_deficit
                ),
                (_, Some(critical)) => println!(
                    "deficit capped at {:.3e} by the third bath (strict zero needs g_third ≈ {critical:.2e})",
                    report.max_entropy_deficit
                ),
            }
            if let Some(path) = out {
                std::fs::write(&path, system.to_csv())
                    .map_err(|e| format!("{}: {e}", path.display()))?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
