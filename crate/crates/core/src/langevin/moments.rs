//! Moment-dynamics integrators.
//!
//! With delta-correlated vacuum inputs the Langevin equation closes on the
//! first and second moments. Writing a = ⟨a⟩ + δa, the central moments
//! n_c = ⟨δa†δa⟩ and m_c = ⟨δaδa⟩ and the tracked commutator c = [a, a†]
//! obey
//!
//! ```text
//! d⟨a⟩/dt = −(iω0 + 1/τ)⟨a⟩ + √γ_0 · s̄(t)
//! dn_c/dt = −(2/τ) n_c + Σ_k κ_k
//! dm_c/dt = −2(iω0 + 1/τ) m_c + Σ_k √(γ_k κ_k) e^{iφ_k}
//! dc/dt   = −(2/τ) c + (Σγ − Σκ)
//! ```
//!
//! where s̄ is the mean of the channel-0 input field. The three source terms
//! come from the vacuum input correlations ⟨A_j(t) A_k†(t′)⟩ = δ_jk δ(t−t′)
//! (all other second moments vanish) and are validated independently against
//! the discrete-mode oracle in this crate's tests.
//!
//! Drive convention: a [`ClassicalDrive`] holds the classical input
//! amplitude s_in(t), normalized so that the mean-field variable
//! α = √γ_0 · conj(⟨a⟩) obeys dα/dt = iω0 α − α/τ + γ_0 s_in. The sign flip
//! on ω0 between the operator equation and the classical one is a
//! conjugation, not a discrepancy; [`propagate_moments`] therefore feeds
//! √γ_0 · conj(s_in) into the mean equation, and reporting α conjugates the
//! mean back.

use num_complex::Complex64;

use super::{LangevinError, ResonatorModel, TOL_MOM};
use crate::format_g17;

/// Classical input waveform, sampled on a uniform grid with zero-order hold.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalDrive {
    samples: Vec<Complex64>,
    dt: f64,
}

impl ClassicalDrive {
    pub fn new(samples: Vec<Complex64>, dt: f64) -> Result<Self, LangevinError> {
        if samples.is_empty() {
            return Err(LangevinError::EmptyDrive);
        }
        if !(dt > 0.0) || !dt.is_finite() || samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LangevinError::InvalidDrive);
        }
        Ok(Self { samples, dt })
    }

    /// All-zero drive of `n` samples.
    pub fn silent(dt: f64, n: usize) -> Result<Self, LangevinError> {
        Self::new(vec![Complex64::new(0.0, 0.0); n], dt)
    }

    /// Constant drive.
    pub fn constant(value: Complex64, dt: f64, n: usize) -> Result<Self, LangevinError> {
        Self::new(vec![value; n], dt)
    }

    /// Monochromatic drive amp·e^{iωt} sampled at t = j·dt.
    pub fn monochromatic(amp: f64, omega: f64, dt: f64, n: usize) -> Result<Self, LangevinError> {
        let samples = (0..n)
            .map(|j| Complex64::from_polar(amp, omega * dt * j as f64))
            .collect();
        Self::new(samples, dt)
    }

    /// Linearly chirped drive amp·e^{i(ωt + rate·t²)} sampled at t = j·dt.
    pub fn chirped(amp: f64, omega: f64, rate: f64, dt: f64, n: usize) -> Result<Self, LangevinError> {
        let samples = (0..n)
            .map(|j| {
                let t = dt * j as f64;
                Complex64::from_polar(amp, omega * t + rate * t * t)
            })
            .collect();
        Self::new(samples, dt)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Zero-order-hold value over the interval containing time `t`.
    /// Times beyond the last sample hold the final value.
    pub fn value_at(&self, t: f64) -> Complex64 {
        let idx = if t <= 0.0 {
            0
        } else {
            ((t / self.dt) as usize).min(self.samples.len() - 1)
        };
        self.samples[idx]
    }

    fn held(&self, step: usize) -> Complex64 {
        self.samples[step.min(self.samples.len() - 1)]
    }
}

/// First and second moments of the resonator mode at one instant, with the
/// commutator tracked as a dynamical quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentState {
    pub t: f64,
    /// ⟨a⟩.
    pub mean: Complex64,
    /// ⟨a†a⟩ (includes the coherent part |⟨a⟩|²).
    pub number: f64,
    /// ⟨aa⟩ (includes the coherent part ⟨a⟩²).
    pub anomalous: Complex64,
    /// Tracked value of [a, a†]; 1 for any physical bosonic mode.
    pub commutator: f64,
}

impl MomentState {
    /// Vacuum state at t = 0.
    pub fn vacuum() -> Self {
        Self {
            t: 0.0,
            mean: Complex64::new(0.0, 0.0),
            number: 0.0,
            anomalous: Complex64::new(0.0, 0.0),
            commutator: 1.0,
        }
    }

    /// Coherent state ⟨a⟩ = α at t = 0.
    pub fn coherent(alpha: Complex64) -> Self {
        Self {
            t: 0.0,
            mean: alpha,
            number: alpha.norm_sqr(),
            anomalous: alpha * alpha,
            commutator: 1.0,
        }
    }

    /// Gaussian-physicality check: ⟨a†a⟩ ≥ 0 and, when the commutator is
    /// (numerically) 1, |⟨aa⟩| ≤ ⟨a†a⟩ + 1/2 within [`TOL_MOM`].
    pub fn is_physical(&self) -> bool {
        if self.number < -TOL_MOM {
            return false;
        }
        if (self.commutator - 1.0).abs() <= 1e-6 {
            return self.anomalous.norm() <= self.number + self.commutator / 2.0 + TOL_MOM;
        }
        true
    }
}

/// CSV with header `t,re_mean,im_mean,number,re_anom,im_anom,commutator`.
pub fn trajectory_csv(states: &[MomentState]) -> String {
    let mut out = String::from("t,re_mean,im_mean,number,re_anom,im_anom,commutator\n");
    for s in states {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            format_g17(s.t),
            format_g17(s.mean.re),
            format_g17(s.mean.im),
            format_g17(s.number),
            format_g17(s.anomalous.re),
            format_g17(s.anomalous.im),
            format_g17(s.commutator)
        ));
    }
    out
}

/// One fixed-step RK4 update of `y` under derivative `f`, with the drive
/// held constant across the step (zero-order hold).
fn rk4_step<const N: usize, F>(y: &mut [f64; N], dt: f64, f: F)
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let k1 = f(y);
    let mut tmp = *y;
    for i in 0..N {
        tmp[i] = y[i] + 0.5 * dt * k1[i];
    }
    let k2 = f(&tmp);
    for i in 0..N {
        tmp[i] = y[i] + 0.5 * dt * k2[i];
    }
    let k3 = f(&tmp);
    for i in 0..N {
        tmp[i] = y[i] + dt * k3[i];
    }
    let k4 = f(&tmp);
    for i in 0..N {
        y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

/// Integrates the classical mean-field equation
/// dα/dt = iω0 α − α/τ + γ_0 s_in(t) with fixed-step RK4 on the drive's
/// sample grid. Returns (t, α) at every sample time, starting from `alpha0`.
pub fn integrate_classical(
    model: &ResonatorModel,
    drive: &ClassicalDrive,
    alpha0: Complex64,
) -> Result<Vec<(f64, Complex64)>, LangevinError> {
    let dt = drive.dt();
    model.check_step(dt)?;
    let coeff = Complex64::new(-1.0 / model.tau(), model.omega0());
    let gamma0 = model.gamma0();

    let mut out = Vec::with_capacity(drive.len());
    let mut alpha = [alpha0.re, alpha0.im];
    out.push((0.0, alpha0));
    for step in 0..drive.len() - 1 {
        let s = drive.held(step);
        rk4_step(&mut alpha, dt, |y| {
            let a = Complex64::new(y[0], y[1]);
            let d = coeff * a + gamma0 * s;
            [d.re, d.im]
        });
        out.push((dt * (step + 1) as f64, Complex64::new(alpha[0], alpha[1])));
    }
    Ok(out)
}

/// Propagates the moment system with vacuum inputs on all channels and an
/// optional coherent drive on channel 0, using fixed-step RK4.
///
/// `state0` must be physical with commutator 1; the trajectory is sampled at
/// every step up to `t_end` (rounded to a whole number of steps). Models
/// violating the fluctuation-dissipation constraint integrate fine — the
/// point is to watch their commutator drift.
pub fn propagate_moments(
    model: &ResonatorModel,
    drive: Option<&ClassicalDrive>,
    state0: &MomentState,
    t_end: f64,
    dt: f64,
) -> Result<Vec<MomentState>, LangevinError> {
    model.check_step(dt)?;
    if !(t_end > 0.0) {
        return Err(LangevinError::UnphysicalState {
            t: t_end,
            what: "t_end must be positive".into(),
        });
    }
    if (state0.commutator - 1.0).abs() > TOL_MOM {
        return Err(LangevinError::UnphysicalState {
            t: state0.t,
            what: format!("initial commutator must be 1, got {}", state0.commutator),
        });
    }
    let n_c0 = state0.number - state0.mean.norm_sqr();
    if n_c0 < -TOL_MOM {
        return Err(LangevinError::UnphysicalState {
            t: state0.t,
            what: format!("initial noise number ⟨a†a⟩ − |⟨a⟩|² = {n_c0} is negative"),
        });
    }

    let tau = model.tau();
    let omega0 = model.omega0();
    let gamma_sum = model.total_gamma_rate();
    let kappa_sum = model.total_kappa_rate();
    let sqrt_gamma0 = model.gamma0().sqrt();
    // Anomalous-moment source Σ_k √(γ_k κ_k) e^{iφ_k} over shared channels.
    let anom_src: Complex64 = model
        .kappa()
        .iter()
        .zip(model.phi())
        .enumerate()
        .map(|(i, (&k, &p))| {
            let channel = i + 1;
            let g = model.gamma().get(channel).copied().unwrap_or(0.0);
            Complex64::from_polar((g * k).sqrt(), p)
        })
        .sum();
    let mean_coeff = Complex64::new(-1.0 / tau, -omega0);

    let steps = ((t_end / dt).round() as usize).max(1);
    // State layout: [Re⟨a⟩, Im⟨a⟩, n_c, Re m_c, Im m_c, c].
    let mut y = [
        state0.mean.re,
        state0.mean.im,
        n_c0,
        (state0.anomalous - state0.mean * state0.mean).re,
        (state0.anomalous - state0.mean * state0.mean).im,
        state0.commutator,
    ];

    let emit = |t: f64, y: &[f64; 6]| {
        let mean = Complex64::new(y[0], y[1]);
        MomentState {
            t,
            mean,
            number: y[2] + mean.norm_sqr(),
            anomalous: Complex64::new(y[3], y[4]) + mean * mean,
            commutator: y[5],
        }
    };

    let mut out = Vec::with_capacity(steps + 1);
    out.push(emit(0.0, &y));
    for step in 0..steps {
        let s_bar = drive
            .map(|d| sqrt_gamma0 * d.value_at((step as f64 + 0.5) * dt).conj())
            .unwrap_or_default();
        rk4_step(&mut y, dt, |y| {
            let mean = Complex64::new(y[0], y[1]);
            let d_mean = mean_coeff * mean + s_bar;
            let m_c = Complex64::new(y[3], y[4]);
            let d_mc = 2.0 * mean_coeff * m_c + anom_src;
            [
                d_mean.re,
                d_mean.im,
                -2.0 / tau * y[2] + kappa_sum,
                d_mc.re,
                d_mc.im,
                -2.0 / tau * y[5] + (gamma_sum - kappa_sum),
            ]
        });
        let t = dt * (step + 1) as f64;
        let state = emit(t, &y);
        if state.number < -TOL_MOM {
            return Err(LangevinError::UnphysicalState {
                t,
                what: format!("⟨a†a⟩ = {} went negative", state.number),
            });
        }
        out.push(state);
    }
    Ok(out)
}

/// Steady-state classical response |α| to a monochromatic unit drive at the
/// given detuning from resonance, obtained by integrating to `t_end`.
pub fn steady_state_response(
    model: &ResonatorModel,
    detuning: f64,
    dt: f64,
    t_end: f64,
) -> Result<f64, LangevinError> {
    let n = (t_end / dt).ceil() as usize + 1;
    let drive = ClassicalDrive::monochromatic(1.0, model.omega0() + detuning, dt, n)?;
    let traj = integrate_classical(model, &drive, Complex64::new(0.0, 0.0))?;
    Ok(traj.last().expect("drive is nonempty").1.norm())
}

/// Full width of `powers(detunings)` at half its maximum, by linear
/// interpolation between samples. Returns None when either half-power
/// crossing lies outside the sampled range.
pub fn half_power_full_width(detunings: &[f64], powers: &[f64]) -> Option<f64> {
    assert_eq!(detunings.len(), powers.len());
    let (peak_idx, &peak) = powers
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))?;
    let half = peak / 2.0;

    let crossing = |i: usize, j: usize| -> f64 {
        let frac = (half - powers[i]) / (powers[j] - powers[i]);
        detunings[i] + frac * (detunings[j] - detunings[i])
    };

    let left = (1..=peak_idx)
        .rev()
        .find(|&i| powers[i - 1] < half && powers[i] >= half)
        .map(|i| crossing(i - 1, i))?;
    let right = (peak_idx..powers.len() - 1)
        .find(|&i| powers[i] >= half && powers[i + 1] < half)
        .map(|i| crossing(i + 1, i))?;
    Some(right - left)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::langevin::{commutator_analytic, Classification};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn classical_pure_decay() {
        let model = ResonatorModel::passive(0.0, 1.0, vec![2.0]).unwrap();
        let drive = ClassicalDrive::silent(1e-3, 3001).unwrap();
        let traj = integrate_classical(&model, &drive, c(1.0, 0.0)).unwrap();
        for &(t, alpha) in traj.iter().step_by(500) {
            let expected = (-t).exp();
            assert!(
                (alpha.re - expected).abs() <= 1e-8 * expected.max(1e-3),
                "t={t}: {} vs {expected}",
                alpha.re
            );
            assert_eq!(alpha.im, 0.0);
        }
    }

    #[test]
    fn classical_constant_drive_reaches_gamma0_tau() {
        let model = ResonatorModel::passive(0.0, 0.5, vec![3.0]).unwrap();
        let drive = ClassicalDrive::constant(c(1.0, 0.0), 1e-3, 12_001).unwrap();
        let traj = integrate_classical(&model, &drive, c(0.0, 0.0)).unwrap();
        let steady = traj.last().unwrap().1;
        assert!((steady.re - 3.0 * 0.5).abs() < 1e-8);
    }

    #[test]
    fn classical_step_guard() {
        let model = ResonatorModel::passive(0.0, 1.0, vec![2.0]).unwrap();
        let drive = ClassicalDrive::silent(0.2, 10).unwrap();
        assert!(matches!(
            integrate_classical(&model, &drive, c(0.0, 0.0)),
            Err(LangevinError::StepTooLarge { .. })
        ));
        // ω0 also bounds the step.
        let fast = ResonatorModel::passive(100.0, 1.0, vec![2.0]).unwrap();
        let drive = ClassicalDrive::silent(0.01, 10).unwrap();
        assert!(matches!(
            integrate_classical(&fast, &drive, c(0.0, 0.0)),
            Err(LangevinError::StepTooLarge { .. })
        ));
    }

    #[test]
    fn vacuum_is_fixed_point_of_consistent_passive_model() {
        let model = ResonatorModel::passive(0.0, 1.0, vec![1.2, 0.8]).unwrap();
        let traj =
            propagate_moments(&model, None, &MomentState::vacuum(), 5.0, 1e-3).unwrap();
        for s in traj.iter().step_by(700) {
            assert!((s.commutator - 1.0).abs() < 1e-12);
            assert!(s.number.abs() < 1e-12);
            assert!(s.anomalous.norm() < 1e-12);
            assert!(s.is_physical());
        }
    }

    #[test]
    fn active_model_noise_reaches_ase_level() {
        let model =
            ResonatorModel::new(0.0, 1.0, vec![10.0, 0.0, 0.0], vec![4.0, 4.0], vec![0.0, 0.0])
                .unwrap();
        let traj =
            propagate_moments(&model, None, &MomentState::vacuum(), 8.0, 1e-3).unwrap();
        let last = traj.last().unwrap();
        assert!((last.number - 4.0).abs() < 1e-6, "number = {}", last.number);
        assert!((last.commutator - 1.0).abs() < 1e-9);
    }

    #[test]
    fn overcoupled_commutator_matches_analytic() {
        let model = ResonatorModel::passive(0.0, 1.0, vec![4.0]).unwrap();
        assert_eq!(
            crate::langevin::tbp_report(&model).classification,
            Classification::Inconsistent
        );
        let traj =
            propagate_moments(&model, None, &MomentState::vacuum(), 10.0, 1e-3).unwrap();
        for s in traj.iter().step_by(997) {
            let expected = commutator_analytic(&model, s.t);
            assert!(
                (s.commutator - expected).abs() <= 1e-8 * expected,
                "t={}: {} vs {expected}",
                s.t,
                s.commutator
            );
        }
        assert!((traj.last().unwrap().commutator - 2.0).abs() < 1e-6);
    }

    #[test]
    fn mean_tracks_classical_trajectory() {
        let model = ResonatorModel::passive(0.4, 1.0, vec![2.0]).unwrap();
        let dt = 1e-3;
        let n = 20_001;
        let drive = ClassicalDrive::chirped(0.7, 0.4, 0.05, dt, n).unwrap();
        let classical = integrate_classical(&model, &drive, c(0.0, 0.0)).unwrap();
        let quantum = propagate_moments(
            &model,
            Some(&drive),
            &MomentState::vacuum(),
            dt * (n - 1) as f64,
            dt,
        )
        .unwrap();
        assert_eq!(classical.len(), quantum.len());
        let sqrt_g0 = model.gamma0().sqrt();
        for (cl, qm) in classical.iter().zip(&quantum).step_by(1000) {
            let alpha_from_mean = sqrt_g0 * qm.mean.conj();
            assert!(
                (alpha_from_mean - cl.1).norm() < 1e-8,
                "t={}: {} vs {}",
                cl.0,
                alpha_from_mean,
                cl.1
            );
        }
    }

    #[test]
    fn unphysical_initial_state_is_rejected() {
        let model = ResonatorModel::passive(0.0, 1.0, vec![2.0]).unwrap();
        let mut bad = MomentState::vacuum();
        bad.commutator = 0.5;
        assert!(matches!(
            propagate_moments(&model, None, &bad, 1.0, 1e-3),
            Err(LangevinError::UnphysicalState { .. })
        ));
        let mut neg = MomentState::vacuum();
        neg.number = -1.0;
        assert!(matches!(
            propagate_moments(&model, None, &neg, 1.0, 1e-3),
            Err(LangevinError::UnphysicalState { .. })
        ));
    }

    #[test]
    fn lorentzian_width_is_two_over_tau() {
        let tau = 1.0;
        let model = ResonatorModel::passive(0.0, tau, vec![2.0 / tau]).unwrap();
        let n = 201;
        let detunings: Vec<f64> = (0..n)
            .map(|i| -5.0 / tau + 10.0 / tau * i as f64 / (n - 1) as f64)
            .collect();
        let powers: Vec<f64> = detunings
            .iter()
            .map(|&d| {
                steady_state_response(&model, d, tau / 100.0, 15.0 * tau)
                    .unwrap()
                    .powi(2)
            })
            .collect();
        let width = half_power_full_width(&detunings, &powers).unwrap();
        assert!(
            (width - 2.0 / tau).abs() < 0.01 * 2.0 / tau,
            "width = {width}"
        );
    }

    #[test]
    fn trajectory_csv_header_and_determinism() {
        let model = ResonatorModel::passive(0.0, 1.0, vec![2.0]).unwrap();
        let run = || {
            trajectory_csv(
                &propagate_moments(&model, None, &MomentState::vacuum(), 0.1, 1e-3).unwrap(),
            )
        };
        let csv = run();
        assert!(csv.starts_with("t,re_mean,im_mean,number,re_anom,im_anom,commutator\n"));
        assert_eq!(csv, run());
    }

    #[test]
    fn half_power_width_needs_crossings_in_range() {
        // Flat response never crosses half its own max.
        let d = [-1.0, 0.0, 1.0];
        let p = [1.0, 1.0, 1.0];
        assert_eq!(half_power_full_width(&d, &p), None);
    }
}
