//! Quantum Langevin dynamics of a single resonator mode.
//!
//! The mode a(t) decays at rate 1/τ and couples to a set of input fields:
//! annihilation operators A_j(t) at rates γ_j (channel 0 carries the
//! coherent drive) and, optionally, creation operators A_k†(t) at
//! Bogoliubov rates κ_k with phases φ_k (channels k ≥ 1 only, since channel
//! 0 has nonzero mean). White-noise inputs make the first/second-moment
//! system close exactly, so trajectories of ⟨a⟩, ⟨a†a⟩, ⟨aa⟩ and the tracked
//! commutator [a, a†] integrate as a small ODE system.
//!
//! The commutator obeys d[a,a†]/dt = −(2/τ)[a,a†] + (Σγ − Σκ) and is
//! conserved at 1 exactly when τ(Σγ − Σκ) = 2 — the fluctuation-dissipation
//! constraint that pins the time-bandwidth product τγ_0 of a passive
//! resonator to at most 2. Bogoliubov terms lift the bound at the price of
//! amplified-spontaneous-emission noise, τΣκ/2 photons in steady state.
//!
//! [`moments`] integrates the moment system (RK4) and the classical
//! mean-field equation; [`oracle`] is an independent discrete-mode check of
//! the same dynamics used to validate the noise-source terms.

mod moments;
mod oracle;

pub use moments::{
    half_power_full_width, integrate_classical, propagate_moments, steady_state_response,
    trajectory_csv, ClassicalDrive, MomentState,
};
pub use oracle::{discrete_mode_oracle, discrete_mode_oracle_with_cap, DEFAULT_MODE_CAP};

use thiserror::Error;

/// Tolerance on the dimensionless constraint residual τ(Σγ − Σκ) − 2.
pub const TOL_FD: f64 = 1e-9;
/// Slack allowed on moment positivity/physicality checks.
pub const TOL_MOM: f64 = 1e-8;
/// Default RK4 steps per decay time τ.
pub const DEFAULT_STEPS_PER_TAU: f64 = 1000.0;

#[derive(Debug, Error)]
pub enum LangevinError {
    #[error("invalid resonator model: {0}")]
    InvalidModel(String),
    #[error("step dt = {dt:.3e} too large (need dt ≤ τ/20 = {max_tau:.3e} and dt ≤ 0.1/|ω0| = {max_omega:.3e})")]
    StepTooLarge { dt: f64, max_tau: f64, max_omega: f64 },
    #[error("drive must contain at least one sample")]
    EmptyDrive,
    #[error("drive samples must be finite and dt > 0")]
    InvalidDrive,
    #[error("unphysical state at t = {t:.6}: {what}")]
    UnphysicalState { t: f64, what: String },
    #[error("discrete-mode oracle would allocate {needed} modes (cap {cap})")]
    MemoryGuard { needed: usize, cap: usize },
}

/// Parameters of the resonator model.
///
/// `gamma[j]` is the coupling rate to input channel j; `kappa[i]` is the
/// Bogoliubov rate on channel i + 1 with phase `phi[i]`. A nonzero κ on
/// some channel requires that channel to exist in `gamma` (possibly with
/// γ = 0 there).
#[derive(Debug, Clone, PartialEq)]
pub struct ResonatorModel {
    omega0: f64,
    tau: f64,
    gamma: Vec<f64>,
    kappa: Vec<f64>,
    phi: Vec<f64>,
}

impl ResonatorModel {
    pub fn new(
        omega0: f64,
        tau: f64,
        gamma: Vec<f64>,
        kappa: Vec<f64>,
        phi: Vec<f64>,
    ) -> Result<Self, LangevinError> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(LangevinError::InvalidModel(format!(
                "decay time tau must be positive and finite, got {tau}"
            )));
        }
        if !omega0.is_finite() {
            return Err(LangevinError::InvalidModel("omega0 must be finite".into()));
        }
        if gamma.is_empty() {
            return Err(LangevinError::InvalidModel(
                "gamma must contain at least the input coupling γ_0".into(),
            ));
        }
        if let Some(bad) = gamma.iter().find(|&&g| !(g >= 0.0) || !g.is_finite()) {
            return Err(LangevinError::InvalidModel(format!(
                "coupling rates must be non-negative and finite, got {bad}"
            )));
        }
        if kappa.len() != phi.len() {
            return Err(LangevinError::InvalidModel(format!(
                "kappa and phi must have equal length ({} vs {})",
                kappa.len(),
                phi.len()
            )));
        }
        if let Some(bad) = kappa.iter().find(|&&k| !(k >= 0.0) || !k.is_finite()) {
            return Err(LangevinError::InvalidModel(format!(
                "Bogoliubov rates must be non-negative and finite, got {bad}"
            )));
        }
        if phi.iter().any(|p| !p.is_finite()) {
            return Err(LangevinError::InvalidModel("phases must be finite".into()));
        }
        for (i, &k) in kappa.iter().enumerate() {
            let channel = i + 1;
            if k > 0.0 && channel >= gamma.len() {
                return Err(LangevinError::InvalidModel(format!(
                    "κ_{channel} > 0 but input channel {channel} does not exist \
                     (gamma has {} channels)",
                    gamma.len()
                )));
            }
        }
        Ok(Self {
            omega0,
            tau,
            gamma,
            kappa,
            phi,
        })
    }

    /// Passive model: input couplings only, no Bogoliubov terms.
    pub fn passive(omega0: f64, tau: f64, gamma: Vec<f64>) -> Result<Self, LangevinError> {
        Self::new(omega0, tau, gamma, Vec::new(), Vec::new())
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// Input coupling rate γ_0.
    pub fn gamma0(&self) -> f64 {
        self.gamma[0]
    }

    pub fn total_gamma_rate(&self) -> f64 {
        self.gamma.iter().sum()
    }

    pub fn total_kappa_rate(&self) -> f64 {
        self.kappa.iter().sum()
    }

    /// Largest admissible integrator step for this model.
    pub(crate) fn max_step(&self) -> (f64, f64) {
        let max_tau = self.tau / 20.0;
        let max_omega = if self.omega0 == 0.0 {
            f64::INFINITY
        } else {
            0.1 / self.omega0.abs()
        };
        (max_tau, max_omega)
    }

    pub(crate) fn check_step(&self, dt: f64) -> Result<(), LangevinError> {
        let (max_tau, max_omega) = self.max_step();
        if !(dt > 0.0) || dt > max_tau || dt > max_omega {
            return Err(LangevinError::StepTooLarge {
                dt,
                max_tau,
                max_omega,
            });
        }
        Ok(())
    }
}

/// Consistency classification of a model against the constraint
/// τ(Σγ − Σκ) = 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    PassiveConsistent,
    ActiveConsistent,
    Inconsistent,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Classification::PassiveConsistent => "PassiveConsistent",
            Classification::ActiveConsistent => "ActiveConsistent",
            Classification::Inconsistent => "Inconsistent",
        };
        f.write_str(s)
    }
}

/// Time-bandwidth product report for a resonator model.
#[derive(Debug, Clone)]
pub struct TbpReport {
    /// The time-bandwidth product τγ_0.
    pub tbp: f64,
    /// τ Σ_j γ_j.
    pub total_gamma: f64,
    /// τ Σ_k κ_k.
    pub total_kappa: f64,
    /// τ(Σγ − Σκ) − 2; zero for a commutator-preserving model.
    pub constraint_residual: f64,
    pub classification: Classification,
}

impl TbpReport {
    /// Single-line CSV `tbp,total_gamma,total_kappa,residual,classification`.
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{}",
            crate::format_g17(self.tbp),
            crate::format_g17(self.total_gamma),
            crate::format_g17(self.total_kappa),
            crate::format_g17(self.constraint_residual),
            self.classification
        )
    }
}

/// Computes TBP, total coupling budgets, and the consistency classification.
pub fn tbp_report(model: &ResonatorModel) -> TbpReport {
    let tau = model.tau();
    let total_gamma = tau * model.total_gamma_rate();
    let total_kappa = tau * model.total_kappa_rate();
    let constraint_residual = total_gamma - total_kappa - 2.0;
    let consistent = constraint_residual.abs() <= TOL_FD;
    let has_kappa = model.kappa().iter().any(|&k| k > 0.0);
    let classification = match (consistent, has_kappa) {
        (true, false) => Classification::PassiveConsistent,
        (true, true) => Classification::ActiveConsistent,
        (false, _) => Classification::Inconsistent,
    };
    TbpReport {
        tbp: tau * model.gamma0(),
        total_gamma,
        total_kappa,
        constraint_residual,
        classification,
    }
}

/// Closed-form commutator [a(t), a†(t)] starting from 1 at t = 0:
/// e^{−2t/τ} + τ(Σγ − Σκ)/2 · (1 − e^{−2t/τ}).
pub fn commutator_analytic(model: &ResonatorModel, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    let decay = (-2.0 * t / model.tau()).exp();
    let budget = model.tau() * (model.total_gamma_rate() - model.total_kappa_rate()) / 2.0;
    decay + budget * (1.0 - decay)
}

/// Commutator density of the combined input field
/// B(t) = Σ_j √γ_j A_j + Σ_k √κ_k e^{iφ_k} A_k†, i.e. the coefficient of
/// δ(t − t′) in [B(t), B†(t′)].
///
/// Zero means commuting quadratures: the input is a quantum-mechanics-free
/// subsystem and contributes nothing to the resonator commutator.
pub fn qmfs_check(model: &ResonatorModel) -> f64 {
    model.total_gamma_rate() - model.total_kappa_rate()
}

/// Steady-state added noise photons τΣκ/2 forced by the Bogoliubov terms
/// (amplified spontaneous emission). Zero for passive models: this is the
/// quantitative price of pushing the time-bandwidth product beyond 2.
pub fn ase_penalty(model: &ResonatorModel) -> f64 {
    0.5 * model.tau() * model.total_kappa_rate()
}
