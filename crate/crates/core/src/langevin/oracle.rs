//! Discrete-mode oracle for the moment dynamics.
//!
//! Instead of closed moment ODEs, this integrator represents each
//! white-noise input over each time step as a discrete bosonic mode B with
//! [B, B†] = 1/dt, and evolves the Heisenberg operator a(t) as an explicit
//! coefficient vector over a(0) and all discrete modes (Euler–Maruyama).
//! Commutator, photon number and anomalous moment then follow from summing
//! coefficient contributions against vacuum statistics. First-order accurate
//! in dt, slow, and entirely independent of the RK4 path — which is the
//! point: it is the ground truth the closed-form noise sources are checked
//! against.

use num_complex::Complex64;

use super::{LangevinError, MomentState, ResonatorModel};

/// Default cap on steps × channels (total discrete modes tracked).
pub const DEFAULT_MODE_CAP: usize = 1 << 22;

/// Runs the oracle from vacuum and returns the moments at `t_end`.
///
/// Requires dt ≤ τ/200. Memory and work grow as steps × channels and
/// steps² × channels respectively; the cap guards the former.
pub fn discrete_mode_oracle(
    model: &ResonatorModel,
    dt: f64,
    t_end: f64,
) -> Result<MomentState, LangevinError> {
    discrete_mode_oracle_with_cap(model, dt, t_end, DEFAULT_MODE_CAP)
}

pub fn discrete_mode_oracle_with_cap(
    model: &ResonatorModel,
    dt: f64,
    t_end: f64,
    cap: usize,
) -> Result<MomentState, LangevinError> {
    if !(dt > 0.0) || dt > model.tau() / 200.0 {
        return Err(LangevinError::StepTooLarge {
            dt,
            max_tau: model.tau() / 200.0,
            max_omega: f64::INFINITY,
        });
    }
    let steps = ((t_end / dt).round() as usize).max(1);
    // Channel c hosts input A_c (rate γ_c) and, for c ≥ 1, A_c† (rate κ_c).
    let n_channels = model.gamma().len().max(model.kappa().len() + 1);
    let needed = steps.saturating_mul(n_channels);
    if needed > cap {
        return Err(LangevinError::MemoryGuard { needed, cap });
    }

    // Per-step injected coefficients: channel c's discrete mode enters a(t)
    // with √γ_c·dt on B and √κ_c·e^{iφ_c}·dt on B†.
    let inject: Vec<(Complex64, Complex64)> = (0..n_channels)
        .map(|c| {
            let g = model.gamma().get(c).copied().unwrap_or(0.0);
            let mu = Complex64::new(g.sqrt() * dt, 0.0);
            let nu = if c >= 1 {
                match (model.kappa().get(c - 1), model.phi().get(c - 1)) {
                    (Some(&k), Some(&p)) => Complex64::from_polar(k.sqrt() * dt, p),
                    _ => Complex64::new(0.0, 0.0),
                }
            } else {
                Complex64::new(0.0, 0.0)
            };
            (mu, nu)
        })
        .collect();

    let factor = Complex64::new(1.0, 0.0)
        - dt * Complex64::new(1.0 / model.tau(), model.omega0());

    // a(t) = lambda·a(0) + Σ (mu_i·B_i + nu_i·B_i†) over discrete modes i.
    let mut lambda = Complex64::new(1.0, 0.0);
    let mut coeffs: Vec<(Complex64, Complex64)> = Vec::with_capacity(needed);
    for _ in 0..steps {
        lambda *= factor;
        for (mu, nu) in coeffs.iter_mut() {
            *mu *= factor;
            *nu *= factor;
        }
        coeffs.extend_from_slice(&inject);
    }

    // Vacuum statistics: ⟨B B†⟩ = [B, B†] = 1/dt per mode, all else zero.
    let inv_dt = 1.0 / dt;
    let mut commutator = lambda.norm_sqr();
    let mut number = 0.0;
    let mut anomalous = Complex64::new(0.0, 0.0);
    for (mu, nu) in &coeffs {
        commutator += (mu.norm_sqr() - nu.norm_sqr()) * inv_dt;
        number += nu.norm_sqr() * inv_dt;
        anomalous += mu * nu * inv_dt;
    }

    Ok(MomentState {
        t: dt * steps as f64,
        mean: Complex64::new(0.0, 0.0),
        number,
        anomalous,
        commutator,
    })
}
