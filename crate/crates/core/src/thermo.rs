//! Heat baths exchanging power over directed links, with an entropy ledger.
//!
//! Each link carries either one-way radiance P = g·T_from (forward
//! propagation only, no reverse flow) or reciprocal net power
//! P = g·(T_from − T_to), the difference of two opposing radiances. Bath
//! temperatures integrate by explicit Euler under a stability guard, and
//! the ledger tracks S(t) = Σ_i C_i ln T_i. Reciprocal links produce
//! entropy pointwise; a one-way link between equal-temperature baths drives
//! the total entropy below its initial value, which [`detect_violation`]
//! flags mechanically. Coupling both baths to a third one caps the deficit
//! at order (g_forward/g_third)² but — under this rate law — never removes
//! it entirely at finite coupling.

use thiserror::Error;

use crate::format_g17;

/// Stability guard: a step must satisfy dt·Σg/min(C) < this bound.
pub const STABILITY_BOUND: f64 = 0.1;

#[derive(Debug, Error)]
pub enum ThermoError {
    #[error("bath {index} must have positive temperature and heat capacity")]
    InvalidBath { index: usize },
    #[error("link {index} references bath {bath} (system has {baths} baths)")]
    BadLinkIndex {
        index: usize,
        bath: usize,
        baths: usize,
    },
    #[error("link {index} has negative conductance")]
    NegativeConductance { index: usize },
    #[error("step dt = {dt:.3e} violates stability: dt·Σg/min(C) = {ratio:.3} ≥ {STABILITY_BOUND}")]
    StabilityGuard { dt: f64, ratio: f64 },
    #[error("temperature of bath {index} would cross zero at t = {t:.6}")]
    NonPositiveTemperature { index: usize, t: f64 },
}

/// A finite heat bath with constant heat capacity (k_B = 1 units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bath {
    pub temperature: f64,
    pub heat_capacity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkMode {
    /// Forward radiance only: P = g·T_from.
    OneWay,
    /// Net flow P = g·(T_from − T_to).
    Reciprocal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub from: usize,
    pub to: usize,
    pub conductance: f64,
    pub mode: LinkMode,
}

/// Baths plus links plus the recorded history of a run.
///
/// Stepping consumes and returns the system: a run is a chain of pure
/// state-to-state transitions. The ledger keeps (t, temperatures, entropy)
/// for every recorded instant, starting with the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct BathSystem {
    baths: Vec<Bath>,
    links: Vec<Link>,
    time: f64,
    entropy_initial: f64,
    times: Vec<f64>,
    entropy_history: Vec<f64>,
    temperature_history: Vec<f64>, // row-major: step × n_baths
}

/// Outcome of scanning a ledger for second-law violations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViolationReport {
    pub violated: bool,
    /// First ledger time at which the deficit exceeded the tolerance.
    pub first_violation_time: Option<f64>,
    /// Largest value of S(0) − S(t) over the ledger (≥ 0).
    pub max_entropy_deficit: f64,
}

impl BathSystem {
    pub fn new(baths: Vec<Bath>, links: Vec<Link>) -> Result<Self, ThermoError> {
        for (index, b) in baths.iter().enumerate() {
            if !(b.temperature > 0.0) || !(b.heat_capacity > 0.0) {
                return Err(ThermoError::InvalidBath { index });
            }
        }
        for (index, l) in links.iter().enumerate() {
            for bath in [l.from, l.to] {
                if bath >= baths.len() {
                    return Err(ThermoError::BadLinkIndex {
                        index,
                        bath,
                        baths: baths.len(),
                    });
                }
            }
            if !(l.conductance >= 0.0) {
                return Err(ThermoError::NegativeConductance { index });
            }
        }
        let entropy_initial = entropy_of(&baths);
        let temperature_history = baths.iter().map(|b| b.temperature).collect();
        Ok(Self {
            baths,
            links,
            time: 0.0,
            entropy_initial,
            times: vec![0.0],
            entropy_history: vec![entropy_initial],
            temperature_history,
        })
    }

    pub fn baths(&self) -> &[Bath] {
        &self.baths
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn entropy_initial(&self) -> f64 {
        self.entropy_initial
    }

    /// Current total entropy Σ C_i ln T_i.
    pub fn entropy(&self) -> f64 {
        entropy_of(&self.baths)
    }

    /// Total thermal energy Σ C_i T_i (conserved by both link modes).
    pub fn total_energy(&self) -> f64 {
        self.baths.iter().map(|b| b.heat_capacity * b.temperature).sum()
    }

    /// Recorded (time, entropy) ledger.
    pub fn ledger(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.entropy_history.iter().copied())
    }

    pub fn ledger_len(&self) -> usize {
        self.times.len()
    }

    /// Temperatures recorded at ledger row `i`.
    pub fn temperatures_at(&self, i: usize) -> &[f64] {
        let n = self.baths.len();
        &self.temperature_history[i * n..(i + 1) * n]
    }

    /// Advances one explicit-Euler step of size `dt` and appends to the
    /// ledger. One-way links push P = g·T_from regardless of the receiving
    /// temperature; reciprocal links push the net g·ΔT.
    pub fn step(mut self, dt: f64) -> Result<Self, ThermoError> {
        let total_g: f64 = self.links.iter().map(|l| l.conductance).sum();
        let min_c = self
            .baths
            .iter()
            .map(|b| b.heat_capacity)
            .fold(f64::INFINITY, f64::min);
        let ratio = dt * total_g / min_c;
        if !(dt > 0.0) || ratio >= STABILITY_BOUND {
            return Err(ThermoError::StabilityGuard { dt, ratio });
        }

        let mut net = vec![0.0f64; self.baths.len()];
        for l in &self.links {
            let power = match l.mode {
                LinkMode::OneWay => l.conductance * self.baths[l.from].temperature,
                LinkMode::Reciprocal => {
                    l.conductance
                        * (self.baths[l.from].temperature - self.baths[l.to].temperature)
                }
            };
            net[l.from] -= power;
            net[l.to] += power;
        }
        let t_next = self.time + dt;
        for (index, (b, flow)) in self.baths.iter_mut().zip(&net).enumerate() {
            let new_t = b.temperature + flow * dt / b.heat_capacity;
            // Unreachable while the guard holds (per-step loss < 10% of T);
            // kept as a hard stop so the entropy ledger never sees ln(≤0).
            if !(new_t > 0.0) {
                return Err(ThermoError::NonPositiveTemperature { index, t: t_next });
            }
            b.temperature = new_t;
        }
        self.time = t_next;
        self.times.push(t_next);
        self.entropy_history.push(entropy_of(&self.baths));
        self.temperature_history
            .extend(self.baths.iter().map(|b| b.temperature));
        Ok(self)
    }

    /// Steps until the recorded time reaches `horizon` (fixed dt; the final
    /// time may overshoot by less than one step).
    pub fn run(mut self, dt: f64, horizon: f64) -> Result<Self, ThermoError> {
        let steps = (horizon / dt).ceil() as usize;
        for _ in 0..steps {
            self = self.step(dt)?;
        }
        Ok(self)
    }

    /// Run output CSV `t,T_1,...,T_n,S_total,S_deficit`.
    pub fn to_csv(&self) -> String {
        let n = self.baths.len();
        let mut header = String::from("t");
        for i in 1..=n {
            header.push_str(&format!(",T_{i}"));
        }
        header.push_str(",S_total,S_deficit\n");
        let mut out = header;
        for (row, (t, s)) in self.ledger().enumerate() {
            out.push_str(&format_g17(t));
            for &temp in self.temperatures_at(row) {
                out.push(',');
                out.push_str(&format_g17(temp));
            }
            out.push(',');
            out.push_str(&format_g17(s));
            out.push(',');
            out.push_str(&format_g17(self.entropy_initial - s));
            out.push('\n');
        }
        out
    }
}

fn entropy_of(baths: &[Bath]) -> f64 {
    baths
        .iter()
        .map(|b| b.heat_capacity * b.temperature.ln())
        .sum()
}

/// Default violation tolerance for a ledger with initial entropy `s0`.
pub fn default_entropy_tolerance(s0: f64) -> f64 {
    1e-12 * s0.abs() + 1e-12
}

/// Scans the ledger for entropy deficits beyond the default tolerance.
pub fn detect_violation(system: &BathSystem) -> ViolationReport {
    detect_violation_with_tolerance(system, default_entropy_tolerance(system.entropy_initial()))
}

/// Scans the ledger for entropy deficits beyond an explicit tolerance.
pub fn detect_violation_with_tolerance(system: &BathSystem, tolerance: f64) -> ViolationReport {
    let s0 = system.entropy_initial();
    let mut first = None;
    let mut max_deficit = 0.0f64;
    for (t, s) in system.ledger() {
        let deficit = s0 - s;
        max_deficit = max_deficit.max(deficit);
        if first.is_none() && deficit > tolerance {
            first = Some(t);
        }
    }
    ViolationReport {
        violated: first.is_some(),
        first_violation_time: first,
        max_entropy_deficit: max_deficit,
    }
}

/// Two unit baths at temperature `t0` joined by a single one-way link.
pub fn one_way_pair(t0: f64, heat_capacity: f64, g: f64) -> Result<BathSystem, ThermoError> {
    BathSystem::new(
        vec![
            Bath { temperature: t0, heat_capacity },
            Bath { temperature: t0, heat_capacity },
        ],
        vec![Link { from: 0, to: 1, conductance: g, mode: LinkMode::OneWay }],
    )
}

/// Two baths joined by a single reciprocal link.
pub fn reciprocal_pair(
    t: (f64, f64),
    heat_capacity: f64,
    g: f64,
) -> Result<BathSystem, ThermoError> {
    BathSystem::new(
        vec![
            Bath { temperature: t.0, heat_capacity },
            Bath { temperature: t.1, heat_capacity },
        ],
        vec![Link { from: 0, to: 1, conductance: g, mode: LinkMode::Reciprocal }],
    )
}

/// One-way pair plus a third bath reciprocally coupled to both ends.
/// All baths start at T = 1 with C = 1.
pub fn three_bath(g_forward: f64, g_third: f64) -> Result<BathSystem, ThermoError> {
    let unit = Bath { temperature: 1.0, heat_capacity: 1.0 };
    BathSystem::new(
        vec![unit, unit, unit],
        vec![
            Link { from: 0, to: 1, conductance: g_forward, mode: LinkMode::OneWay },
            Link { from: 0, to: 2, conductance: g_third, mode: LinkMode::Reciprocal },
            Link { from: 1, to: 2, conductance: g_third, mode: LinkMode::Reciprocal },
        ],
    )
}

/// Step size well inside the stability guard for a given system.
pub fn default_step(system: &BathSystem) -> f64 {
    let total_g: f64 = system.links().iter().map(|l| l.conductance).sum();
    let min_c = system
        .baths()
        .iter()
        .map(|b| b.heat_capacity)
        .fold(f64::INFINITY, f64::min);
    if total_g == 0.0 {
        1.0
    } else {
        0.5 * STABILITY_BOUND * min_c / total_g
    }
}

/// Result of a three-bath run.
#[derive(Debug, Clone)]
pub struct ThreeBathReport {
    pub system: BathSystem,
    pub violation: ViolationReport,
    /// Smallest third-bath conductance (log-bisection, same horizon
    /// physics) that keeps the run below the default violation tolerance.
    pub critical_g_third: f64,
}

/// Builds the one-way-plus-third-bath topology, runs it to `horizon`, and
/// reports the violation scan together with the bisected critical coupling.
///
/// The asymptotic deficit scales as (g_forward/g_third)², so "restoring"
/// the second law at the default tolerance takes g_third about a million
/// times g_forward; the report makes that number explicit.
pub fn three_bath_restore(
    g_forward: f64,
    g_third: f64,
    horizon: f64,
) -> Result<ThreeBathReport, ThermoError> {
    let system = three_bath(g_forward, g_third)?;
    let dt = default_step(&system);
    let system = system.run(dt, horizon)?;
    let violation = detect_violation(&system);
    let critical_g_third = bisect_critical_g_third(g_forward, horizon)?;
    Ok(ThreeBathReport {
        system,
        violation,
        critical_g_third,
    })
}

fn probe_violates(g_forward: f64, g_third: f64, horizon: f64) -> Result<bool, ThermoError> {
    let system = three_bath(g_forward, g_third)?;
    let dt = default_step(&system);
    // The flow is linear with relaxation rates g_forward + g_third and
    // 3·g_third; past a few relaxation times the run only re-reads the
    // fixed point, so probes can stop there.
    let rate = g_forward + g_third;
    let probe_horizon = if rate > 0.0 {
        horizon.min(60.0 / rate)
    } else {
        horizon
    };
    let system = system.run(dt, probe_horizon)?;
    Ok(detect_violation(&system).violated)
}

fn bisect_critical_g_third(g_forward: f64, horizon: f64) -> Result<f64, ThermoError> {
    if g_forward == 0.0 {
        return Ok(0.0);
    }
    if !probe_violates(g_forward, 0.0, horizon)? {
        return Ok(0.0);
    }
    let mut lo = g_forward;
    let mut hi = g_forward;
    loop {
        hi *= 10.0;
        if !probe_violates(g_forward, hi, horizon)? {
            break;
        }
        if hi > 1e12 * g_forward {
            return Ok(f64::INFINITY);
        }
    }
    for _ in 0..60 {
        let mid = (lo * hi).sqrt();
        if probe_violates(g_forward, mid, horizon)? {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo < 1.0 + 1e-6 {
            break;
        }
    }
    Ok(hi)
}
