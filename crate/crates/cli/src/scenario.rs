//! Line-oriented scenario configs and their runner.
//!
//! A config is a sequence of `[scenario.<name>]` sections holding
//! `key = value` pairs. Values are decimal numbers, comma-separated vectors,
//! complex numbers in `a+bi` form, booleans, or file paths (matrices are
//! always file references, resolved relative to the config file). Lines
//! starting with `#` are comments. Unknown keys are rejected.
//!
//! Every scenario kind maps onto one toolkit operation and writes one output
//! file (CSV, or the matrix text format for dilations). `expect_*` keys turn
//! into assertions when the runner is invoked with checking enabled, which
//! is how the bundled claim scenarios serve as a regression gate.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use qle_core::format_g17;
use qle_core::langevin::{
    discrete_mode_oracle, half_power_full_width, integrate_classical, propagate_moments,
    steady_state_response, tbp_report, trajectory_csv, ClassicalDrive, MomentState,
    ResonatorModel,
};
use qle_core::matfile;
use qle_core::network::{solve_gauge, CouplingMatrix};
use qle_core::scattering::{classify, close_port, dilate_to_unitary, ScatteringMatrix};
use qle_core::thermo::{
    default_step, detect_violation, three_bath_restore, Bath, BathSystem, Link, LinkMode,
};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("scenario `{scenario}`, key `{key}`: {message}")]
    Validation {
        scenario: String,
        key: String,
        message: String,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("scenario `{scenario}`: {message}")]
    Exec { scenario: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThermoMode {
    OneWay,
    Reciprocal,
    ThreeBath,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DriveSpec {
    None,
    Constant { amplitude: f64 },
    Monochromatic { amplitude: f64, frequency: f64 },
    Chirped { amplitude: f64, frequency: f64, rate: f64 },
}

impl DriveSpec {
    fn materialize(&self, dt: f64, n: usize) -> Result<Option<ClassicalDrive>, String> {
        let drive = match self {
            DriveSpec::None => return Ok(None),
            DriveSpec::Constant { amplitude } => {
                ClassicalDrive::constant(Complex64::new(*amplitude, 0.0), dt, n)
            }
            DriveSpec::Monochromatic { amplitude, frequency } => {
                ClassicalDrive::monochromatic(*amplitude, *frequency, dt, n)
            }
            DriveSpec::Chirped { amplitude, frequency, rate } => {
                ClassicalDrive::chirped(*amplitude, *frequency, *rate, dt, n)
            }
        };
        drive.map(Some).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClassicalMode {
    Trajectory {
        drive: DriveSpec,
        alpha0: Complex64,
        expect_final_abs: Option<f64>,
    },
    Bandwidth {
        points: usize,
        span: f64,
        expect_bandwidth: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSpec {
    Gauge {
        matrix: String,
        expect_exists: Option<bool>,
        expect_defect: Option<f64>,
    },
    Tbp {
        model: ResonatorModel,
        expect_classification: Option<String>,
        expect_tbp: Option<f64>,
    },
    Classical {
        model: ResonatorModel,
        dt: f64,
        t_end: f64,
        mode: ClassicalMode,
    },
    Moment {
        model: ResonatorModel,
        dt: f64,
        t_end: f64,
        drive: DriveSpec,
        expect_commutator: Option<f64>,
        expect_number: Option<f64>,
    },
    Oracle {
        model: ResonatorModel,
        dt: f64,
        t_end: f64,
        expect_commutator: Option<f64>,
        expect_number: Option<f64>,
    },
    Dilate {
        matrix: String,
        expect_added_ports: Option<usize>,
    },
    Closure {
        matrix: String,
        closed_port: usize,
        phase_samples: usize,
    },
    Thermo {
        mode: ThermoMode,
        g: f64,
        g_third: f64,
        t1: f64,
        t2: f64,
        heat_capacity: f64,
        horizon: f64,
        dt: Option<f64>,
        expect_violated: Option<bool>,
        expect_deficit_below: Option<f64>,
        expect_deficit_above: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub spec: ScenarioSpec,
    pub output: Option<String>,
}

impl Scenario {
    /// Output file name for this scenario inside the output directory.
    pub fn output_name(&self) -> String {
        match &self.output {
            Some(o) => o.clone(),
            None => match self.spec {
                ScenarioSpec::Dilate { .. } => format!("{}.mat", self.name),
                _ => format!("{}.csv", self.name),
            },
        }
    }
}

/// Result of executing one scenario.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub name: String,
    pub verdict: String,
    /// Failed expectations (empty when not checking or all checks passed).
    pub check_failures: Vec<String>,
}

// ---------------------------------------------------------------------------
// Parsing

struct RawSection {
    name: String,
    pairs: BTreeMap<String, String>,
}

struct Params<'a> {
    scenario: &'a str,
    pairs: BTreeMap<String, String>,
}

impl<'a> Params<'a> {
    fn err(&self, key: &str, message: impl Into<String>) -> ScenarioError {
        ScenarioError::Validation {
            scenario: self.scenario.to_string(),
            key: key.to_string(),
            message: message.into(),
        }
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.pairs.remove(key)
    }

    fn require(&mut self, key: &str) -> Result<String, ScenarioError> {
        self.take(key)
            .ok_or_else(|| self.err(key, "required key is missing"))
    }

    fn parse<T: FromStr>(&self, key: &str, text: &str) -> Result<T, ScenarioError> {
        text.trim()
            .parse::<T>()
            .map_err(|_| self.err(key, format!("cannot parse value {text:?}")))
    }

    fn require_f64(&mut self, key: &str) -> Result<f64, ScenarioError> {
        let text = self.require(key)?;
        self.parse(key, &text)
    }

    fn opt_f64(&mut self, key: &str) -> Result<Option<f64>, ScenarioError> {
        self.take(key).map(|t| self.parse(key, &t)).transpose()
    }

    fn opt_usize(&mut self, key: &str) -> Result<Option<usize>, ScenarioError> {
        self.take(key).map(|t| self.parse(key, &t)).transpose()
    }

    fn opt_bool(&mut self, key: &str) -> Result<Option<bool>, ScenarioError> {
        self.take(key).map(|t| self.parse(key, &t)).transpose()
    }

    fn opt_complex(&mut self, key: &str) -> Result<Option<Complex64>, ScenarioError> {
        self.take(key).map(|t| self.parse(key, &t)).transpose()
    }

    fn vec_f64(&self, key: &str, text: &str) -> Result<Vec<f64>, ScenarioError> {
        text.split(',')
            .map(|part| self.parse(key, part))
            .collect()
    }

    fn require_vec(&mut self, key: &str) -> Result<Vec<f64>, ScenarioError> {
        let text = self.require(key)?;
        self.vec_f64(key, &text)
    }

    fn opt_vec(&mut self, key: &str) -> Result<Option<Vec<f64>>, ScenarioError> {
        self.take(key).map(|t| self.vec_f64(key, &t)).transpose()
    }

    fn finish(self) -> Result<(), ScenarioError> {
        if let Some(key) = self.pairs.keys().next() {
            return Err(ScenarioError::Validation {
                scenario: self.scenario.to_string(),
                key: key.clone(),
                message: "unknown key for this scenario kind".into(),
            });
        }
        Ok(())
    }

    /// tau/gamma/kappa/phi/omega0 keys shared by all resonator scenarios.
    fn resonator_model(&mut self) -> Result<ResonatorModel, ScenarioError> {
        let tau = self.require_f64("tau")?;
        let gamma = self.require_vec("gamma")?;
        let omega0 = self.opt_f64("omega0")?.unwrap_or(0.0);
        let kappa = self.opt_vec("kappa")?;
        let phi = self.opt_vec("phi")?;
        let (kappa, phi) = match (kappa, phi) {
            (None, None) => (Vec::new(), Vec::new()),
            (Some(k), Some(p)) => (k, p),
            (Some(_), None) => return Err(self.err("phi", "required when kappa is given")),
            (None, Some(_)) => return Err(self.err("kappa", "required when phi is given")),
        };
        ResonatorModel::new(omega0, tau, gamma, kappa, phi)
            .map_err(|e| self.err("gamma", e.to_string()))
    }

    fn drive(&mut self) -> Result<DriveSpec, ScenarioError> {
        let kind = self.take("drive").unwrap_or_else(|| "none".into());
        let spec = match kind.as_str() {
            "none" => DriveSpec::None,
            "constant" => DriveSpec::Constant {
                amplitude: self.require_f64("drive_amplitude")?,
            },
            "monochromatic" => DriveSpec::Monochromatic {
                amplitude: self.require_f64("drive_amplitude")?,
                frequency: self.require_f64("drive_frequency")?,
            },
            "chirped" => DriveSpec::Chirped {
                amplitude: self.require_f64("drive_amplitude")?,
                frequency: self.require_f64("drive_frequency")?,
                rate: self.require_f64("drive_chirp_rate")?,
            },
            other => {
                return Err(self.err(
                    "drive",
                    format!("expected none|constant|monochromatic|chirped, got {other:?}"),
                ))
            }
        };
        Ok(spec)
    }
}

/// Parses and validates a config into scenarios, preserving file order.
pub fn parse_config(text: &str) -> Result<Vec<Scenario>, ScenarioError> {
    let mut sections: Vec<RawSection> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(header) = line.strip_prefix('[') {
            let header = header.strip_suffix(']').ok_or(ScenarioError::Parse {
                line: line_no,
                message: "unterminated section header".into(),
            })?;
            let name = header.strip_prefix("scenario.").ok_or(ScenarioError::Parse {
                line: line_no,
                message: format!("expected [scenario.<name>], got [{header}]"),
            })?;
            if name.is_empty() {
                return Err(ScenarioError::Parse {
                    line: line_no,
                    message: "scenario name is empty".into(),
                });
            }
            if sections.iter().any(|s| s.name == name) {
                return Err(ScenarioError::Parse {
                    line: line_no,
                    message: format!("duplicate scenario name `{name}`"),
                });
            }
            sections.push(RawSection {
                name: name.to_string(),
                pairs: BTreeMap::new(),
            });
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(ScenarioError::Parse {
            line: line_no,
            message: "expected `key = value`".into(),
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(ScenarioError::Parse {
                line: line_no,
                message: "empty key".into(),
            });
        }
        let section = sections.last_mut().ok_or(ScenarioError::Parse {
            line: line_no,
            message: "key-value pair before any [scenario.<name>] section".into(),
        })?;
        if section.pairs.insert(key.clone(), value).is_some() {
            return Err(ScenarioError::Parse {
                line: line_no,
                message: format!("duplicate key `{key}`"),
            });
        }
    }

    sections.into_iter().map(validate_section).collect()
}

fn validate_section(section: RawSection) -> Result<Scenario, ScenarioError> {
    let name = section.name.clone();
    let mut params = Params {
        scenario: &name,
        pairs: section.pairs,
    };
    let kind = params.require("kind")?;
    let output = params.take("output");

    let spec = match kind.as_str() {
        "GaugeCheck" => ScenarioSpec::Gauge {
            matrix: params.require("matrix")?,
            expect_exists: params.opt_bool("expect_exists")?,
            expect_defect: params.opt_f64("expect_defect")?,
        },
        "TbpReport" => ScenarioSpec::Tbp {
            model: params.resonator_model()?,
            expect_classification: params.take("expect_classification"),
            expect_tbp: params.opt_f64("expect_tbp")?,
        },
        "ClassicalRun" => {
            let model = params.resonator_model()?;
            let dt = params.require_f64("dt")?;
            let t_end = params.require_f64("t_end")?;
            let mode = if let Some(points) = params.opt_usize("bandwidth_points")? {
                ClassicalMode::Bandwidth {
                    points,
                    span: params.require_f64("bandwidth_span")?,
                    expect_bandwidth: params.opt_f64("expect_bandwidth")?,
                }
            } else {
                ClassicalMode::Trajectory {
                    drive: params.drive()?,
                    alpha0: params.opt_complex("alpha0")?.unwrap_or_default(),
                    expect_final_abs: params.opt_f64("expect_final_abs")?,
                }
            };
            ScenarioSpec::Classical { model, dt, t_end, mode }
        }
        "MomentRun" => ScenarioSpec::Moment {
            model: params.resonator_model()?,
            dt: params.require_f64("dt")?,
            t_end: params.require_f64("t_end")?,
            drive: params.drive()?,
            expect_commutator: params.opt_f64("expect_commutator")?,
            expect_number: params.opt_f64("expect_number")?,
        },
        "OracleRun" => ScenarioSpec::Oracle {
            model: params.resonator_model()?,
            dt: params.require_f64("dt")?,
            t_end: params.require_f64("t_end")?,
            expect_commutator: params.opt_f64("expect_commutator")?,
            expect_number: params.opt_f64("expect_number")?,
        },
        "Dilate" => ScenarioSpec::Dilate {
            matrix: params.require("matrix")?,
            expect_added_ports: params.opt_usize("expect_added_ports")?,
        },
        "Closure" => ScenarioSpec::Closure {
            matrix: params.require("matrix")?,
            closed_port: params
                .opt_usize("closed_port")?
                .ok_or_else(|| params.err("closed_port", "required key is missing"))?,
            phase_samples: params.opt_usize("phase_samples")?.unwrap_or(64),
        },
        "ThermoRun" => {
            let mode_text = params.require("mode")?;
            let mode = match mode_text.as_str() {
                "oneway" => ThermoMode::OneWay,
                "reciprocal" => ThermoMode::Reciprocal,
                "threebath" => ThermoMode::ThreeBath,
                other => {
                    return Err(params.err(
                        "mode",
                        format!("expected oneway|reciprocal|threebath, got {other:?}"),
                    ))
                }
            };
            let spec = ScenarioSpec::Thermo {
                mode,
                g: params.require_f64("g")?,
                g_third: params.opt_f64("g_third")?.unwrap_or(0.0),
                t1: params.opt_f64("t1")?.unwrap_or(1.0),
                t2: params.opt_f64("t2")?.unwrap_or(1.0),
                heat_capacity: params.opt_f64("heat_capacity")?.unwrap_or(1.0),
                horizon: params.require_f64("horizon")?,
                dt: params.opt_f64("dt")?,
                expect_violated: params.opt_bool("expect_violated")?,
                expect_deficit_below: params.opt_f64("expect_deficit_below")?,
                expect_deficit_above: params.opt_f64("expect_deficit_above")?,
            };
            if let ScenarioSpec::Thermo { mode: ThermoMode::ThreeBath, t1, t2, heat_capacity, dt, .. } = &spec {
                if *t1 != 1.0 || *t2 != 1.0 || *heat_capacity != 1.0 {
                    return Err(params.err(
                        "mode",
                        "threebath runs use unit baths; t1/t2/heat_capacity are not configurable",
                    ));
                }
                if dt.is_some() {
                    return Err(params.err("dt", "threebath runs choose their own stable step"));
                }
            }
            spec
        }
        other => {
            return Err(params.err(
                "kind",
                format!(
                    "unknown kind {other:?} (expected GaugeCheck, TbpReport, ClassicalRun, \
                     MomentRun, OracleRun, Dilate, Closure, or ThermoRun)"
                ),
            ))
        }
    };
    params.finish()?;
    Ok(Scenario { name, spec, output })
}

/// Reads and parses a config file.
pub fn load_config(path: &Path) -> Result<Vec<Scenario>, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

// ---------------------------------------------------------------------------
// Execution

fn write_atomic(path: &Path, contents: &str) -> Result<(), ScenarioError> {
    let io_err = |source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp_name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    std::fs::write(&tmp, contents).map_err(io_err)?;
    std::fs::rename(&tmp, path).map_err(io_err)
}

fn read_matrix(
    scenario: &str,
    base_dir: &Path,
    reference: &str,
) -> Result<qle_core::nalgebra::DMatrix<Complex64>, ScenarioError> {
    let path = base_dir.join(reference);
    matfile::read_matrix(&path).map_err(|e| ScenarioError::Exec {
        scenario: scenario.to_string(),
        message: format!("{}: {e}", path.display()),
    })
}

struct Checker {
    enabled: bool,
    failures: Vec<String>,
}

impl Checker {
    fn expect(&mut self, label: &str, ok: bool, detail: String) {
        if self.enabled && !ok {
            self.failures.push(format!("{label}: {detail}"));
        }
    }

    fn expect_close(&mut self, label: &str, actual: f64, expected: Option<f64>, tol: f64) {
        if let Some(e) = expected {
            self.expect(
                label,
                (actual - e).abs() <= tol,
                format!("got {actual}, expected {e} ± {tol:.1e}"),
            );
        }
    }
}

/// Executes scenarios in order, writing one output file each, and returns a
/// per-scenario verdict plus any failed `expect_*` assertions (populated
/// only when `check` is set).
pub fn run_scenarios(
    scenarios: &[Scenario],
    base_dir: &Path,
    out_dir: &Path,
    check: bool,
) -> Result<Vec<Outcome>, ScenarioError> {
    if !scenarios.is_empty() {
        std::fs::create_dir_all(out_dir).map_err(|source| ScenarioError::Io {
            path: out_dir.to_path_buf(),
            source,
        })?;
    }
    scenarios
        .iter()
        .map(|s| execute(s, base_dir, out_dir, check))
        .collect()
}

fn exec_err(name: &str, message: impl std::fmt::Display) -> ScenarioError {
    ScenarioError::Exec {
        scenario: name.to_string(),
        message: message.to_string(),
    }
}

fn execute(
    scenario: &Scenario,
    base_dir: &Path,
    out_dir: &Path,
    check: bool,
) -> Result<Outcome, ScenarioError> {
    let name = &scenario.name;
    let out_path = out_dir.join(scenario.output_name());
    let mut checker = Checker {
        enabled: check,
        failures: Vec::new(),
    };

    let verdict = match &scenario.spec {
        ScenarioSpec::Gauge { matrix, expect_exists, expect_defect } => {
            let raw = read_matrix(name, base_dir, matrix)?;
            let g = CouplingMatrix::validate(&raw).map_err(|e| exec_err(name, e))?;
            let sol = solve_gauge(&g);
            let mut csv = String::from("exists,worst_cycle_defect");
            if let Some(phases) = &sol.phases {
                for j in 0..phases.len() {
                    let _ = write!(csv, ",theta_{j}");
                }
            }
            csv.push('\n');
            let _ = write!(csv, "{},{}", sol.exists, format_g17(sol.worst_cycle_defect));
            if let Some(phases) = &sol.phases {
                for &p in phases {
                    csv.push(',');
                    csv.push_str(&format_g17(p));
                }
            }
            csv.push('\n');
            write_atomic(&out_path, &csv)?;
            checker.expect(
                "expect_exists",
                expect_exists.map_or(true, |e| e == sol.exists),
                format!("got {}", sol.exists),
            );
            checker.expect_close(
                "expect_defect",
                sol.worst_cycle_defect,
                *expect_defect,
                1e-8,
            );
            if sol.exists {
                format!(
                    "time-reversal gauge exists (worst defect {:.2e})",
                    sol.worst_cycle_defect
                )
            } else {
                format!(
                    "TIME-REVERSAL BROKEN worst_cycle_defect={:.6}",
                    sol.worst_cycle_defect
                )
            }
        }

        ScenarioSpec::Tbp { model, expect_classification, expect_tbp } => {
            let report = tbp_report(model);
            write_atomic(&out_path, &format!("{}\n", report.to_csv_line()))?;
            if let Some(e) = expect_classification {
                checker.expect(
                    "expect_classification",
                    &report.classification.to_string() == e,
                    format!("got {}", report.classification),
                );
            }
            checker.expect_close("expect_tbp", report.tbp, *expect_tbp, 1e-9);
            format!("{} tbp={:.3}", report.classification, report.tbp)
        }

        ScenarioSpec::Classical { model, dt, t_end, mode } => match mode {
            ClassicalMode::Trajectory { drive, alpha0, expect_final_abs } => {
                let n = (t_end / dt).round() as usize + 1;
                let drive = drive
                    .materialize(*dt, n)
                    .map_err(|e| exec_err(name, e))?
                    .unwrap_or(
                        ClassicalDrive::silent(*dt, n).map_err(|e| exec_err(name, e))?,
                    );
                let traj =
                    integrate_classical(model, &drive, *alpha0).map_err(|e| exec_err(name, e))?;
                let mut csv = String::from("t,re_alpha,im_alpha\n");
                for (t, alpha) in &traj {
                    let _ = writeln!(
                        csv,
                        "{},{},{}",
                        format_g17(*t),
                        format_g17(alpha.re),
                        format_g17(alpha.im)
                    );
                }
                write_atomic(&out_path, &csv)?;
                let final_abs = traj.last().expect("nonempty").1.norm();
                checker.expect_close("expect_final_abs", final_abs, *expect_final_abs, 1e-6);
                format!("final |alpha|={final_abs:.6}")
            }
            ClassicalMode::Bandwidth { points, span, expect_bandwidth } => {
                if *points < 3 {
                    return Err(exec_err(name, "bandwidth_points must be at least 3"));
                }
                let detunings: Vec<f64> = (0..*points)
                    .map(|i| -span / 2.0 + span * i as f64 / (*points - 1) as f64)
                    .collect();
                let mut csv = String::from("detuning,power\n");
                let mut powers = Vec::with_capacity(*points);
                for &d in &detunings {
                    let amp = steady_state_response(model, d, *dt, *t_end)
                        .map_err(|e| exec_err(name, e))?;
                    powers.push(amp * amp);
                    let _ = writeln!(csv, "{},{}", format_g17(d), format_g17(amp * amp));
                }
                write_atomic(&out_path, &csv)?;
                let width = half_power_full_width(&detunings, &powers)
                    .ok_or_else(|| exec_err(name, "half-power width outside the sweep span"))?;
                if let Some(e) = expect_bandwidth {
                    checker.expect(
                        "expect_bandwidth",
                        (width - e).abs() <= 0.01 * e.abs(),
                        format!("got {width}, expected {e} ± 1%"),
                    );
                }
                format!("half-power full width={width:.6}")
            }
        },

        ScenarioSpec::Moment { model, dt, t_end, drive, expect_commutator, expect_number } => {
            let n = (t_end / dt).round() as usize + 1;
            let drive = drive.materialize(*dt, n).map_err(|e| exec_err(name, e))?;
            let traj = propagate_moments(model, drive.as_ref(), &MomentState::vacuum(), *t_end, *dt)
                .map_err(|e| exec_err(name, e))?;
            write_atomic(&out_path, &trajectory_csv(&traj))?;
            let last = traj.last().expect("nonempty");
            checker.expect_close("expect_commutator", last.commutator, *expect_commutator, 1e-6);
            checker.expect_close("expect_number", last.number, *expect_number, 1e-6);
            format!(
                "{}: commutator={:.6} number={:.6} at t={:.3}",
                tbp_report(model).classification,
                last.commutator,
                last.number,
                last.t
            )
        }

        ScenarioSpec::Oracle { model, dt, t_end, expect_commutator, expect_number } => {
            let state = discrete_mode_oracle(model, *dt, *t_end).map_err(|e| exec_err(name, e))?;
            write_atomic(&out_path, &trajectory_csv(std::slice::from_ref(&state)))?;
            let tol = 5.0 * dt / model.tau();
            checker.expect_close(
                "expect_commutator",
                state.commutator,
                *expect_commutator,
                tol * expect_commutator.map_or(1.0, |e| e.abs().max(1.0)),
            );
            checker.expect_close(
                "expect_number",
                state.number,
                *expect_number,
                tol * expect_number.map_or(1.0, |e| e.abs().max(1.0)),
            );
            format!(
                "oracle: commutator={:.6} number={:.6} at t={:.3}",
                state.commutator, state.number, state.t
            )
        }

        ScenarioSpec::Dilate { matrix, expect_added_ports } => {
            let raw = read_matrix(name, base_dir, matrix)?;
            let s = ScatteringMatrix::new(raw).map_err(|e| exec_err(name, e))?;
            let dilated = dilate_to_unitary(&s).map_err(|e| exec_err(name, e))?;
            write_atomic(&out_path, &matfile::format_matrix(dilated.entries()))?;
            let added = dilated.dim() - s.dim();
            if let Some(e) = expect_added_ports {
                checker.expect(
                    "expect_added_ports",
                    added == *e,
                    format!("got {added}, expected {e}"),
                );
            }
            format!("dilated {}→{} ports (unitary)", s.dim(), dilated.dim())
        }

        ScenarioSpec::Closure { matrix, closed_port, phase_samples } => {
            let raw = read_matrix(name, base_dir, matrix)?;
            let s = ScatteringMatrix::new(raw).map_err(|e| exec_err(name, e))?;
            if !classify(&s).unitary {
                return Err(exec_err(name, "mirror closure requires a unitary matrix"));
            }
            let mut csv = String::from("phi,abs_s12,abs_s21\n");
            let mut worst = 0.0f64;
            for k in 0..*phase_samples {
                let phi = std::f64::consts::TAU * k as f64 / *phase_samples as f64;
                let reduced =
                    close_port(&s, *closed_port, phi).map_err(|e| exec_err(name, e))?;
                let s12 = reduced.entries()[(0, 1)].norm();
                let s21 = reduced.entries()[(1, 0)].norm();
                worst = worst.max((s12 - s21).abs());
                let _ = writeln!(
                    csv,
                    "{},{},{}",
                    format_g17(phi),
                    format_g17(s12),
                    format_g17(s21)
                );
            }
            write_atomic(&out_path, &csv)?;
            // Magnitude reciprocity after closure is the invariant itself.
            checker.expect(
                "reciprocal_magnitudes",
                worst <= 1e-9,
                format!("max ||S12|-|S21|| = {worst:.2e}"),
            );
            format!(
                "max coupling asymmetry {worst:.2e} over {phase_samples} mirror phases"
            )
        }

        ScenarioSpec::Thermo {
            mode,
            g,
            g_third,
            t1,
            t2,
            heat_capacity,
            horizon,
            dt,
            expect_violated,
            expect_deficit_below,
            expect_deficit_above,
        } => {
            let (system, critical) = match mode {
                ThermoMode::ThreeBath => {
                    let report = three_bath_restore(*g, *g_third, *horizon)
                        .map_err(|e| exec_err(name, e))?;
                    (report.system, Some(report.critical_g_third))
                }
                ThermoMode::OneWay | ThermoMode::Reciprocal => {
                    let link_mode = if *mode == ThermoMode::OneWay {
                        LinkMode::OneWay
                    } else {
                        LinkMode::Reciprocal
                    };
                    let system = BathSystem::new(
                        vec![
                            Bath { temperature: *t1, heat_capacity: *heat_capacity },
                            Bath { temperature: *t2, heat_capacity: *heat_capacity },
                        ],
                        vec![Link { from: 0, to: 1, conductance: *g, mode: link_mode }],
                    )
                    .map_err(|e| exec_err(name, e))?;
                    let dt = dt.unwrap_or_else(|| default_step(&system));
                    (system.run(dt, *horizon).map_err(|e| exec_err(name, e))?, None)
                }
            };
            write_atomic(&out_path, &system.to_csv())?;
            let report = detect_violation(&system);
            checker.expect(
                "expect_violated",
                expect_violated.map_or(true, |e| e == report.violated),
                format!("got {}", report.violated),
            );
            if let Some(e) = expect_deficit_below {
                checker.expect(
                    "expect_deficit_below",
                    report.max_entropy_deficit < *e,
                    format!("deficit {} not below {e}", report.max_entropy_deficit),
                );
            }
            if let Some(e) = expect_deficit_above {
                checker.expect(
                    "expect_deficit_above",
                    report.max_entropy_deficit > *e,
                    format!("deficit {} not above {e}", report.max_entropy_deficit),
                );
            }
            match (report.violated, critical) {
                (true, None) => format!(
                    "SECOND-LAW VIOLATION at t={:.6} (max deficit {:.3e})",
                    report.first_violation_time.unwrap_or(f64::NAN),
                    report.max_entropy_deficit
                ),
                (false, None) => {
                    format!("second law holds (max deficit {:.3e})", report.max_entropy_deficit)
                }
                (_, Some(critical)) => format!(
                    "deficit capped at {:.3e} by the third bath (strict zero needs g_third ≈ {critical:.2e})",
                    report.max_entropy_deficit
                ),
            }
        }
    };

    Ok(Outcome {
        name: name.clone(),
        verdict,
        check_failures: checker.failures,
    })
}
