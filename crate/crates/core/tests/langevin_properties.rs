//! Property tests for the moment dynamics: commutator conservation for
//! constraint-satisfying models, agreement between the RK4 path, the
//! analytic formula, and the discrete-mode oracle, and the algebraic
//! identities tying the constraint to the QMFS and ASE quantities.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng as _, SeedableRng as _};
use rand_chacha::ChaCha8Rng;

use qle_core::langevin::{
    ase_penalty, commutator_analytic, discrete_mode_oracle, propagate_moments, qmfs_check,
    tbp_report, Classification, ClassicalDrive, MomentState, ResonatorModel,
};

/// Random passive model with τΣγ = 2 (commutator-preserving).
fn passive_consistent(tau_exp: f64, weights: &[f64]) -> ResonatorModel {
    let tau = 10f64.powf(tau_exp);
    let total: f64 = weights.iter().sum();
    let gamma: Vec<f64> = weights.iter().map(|w| 2.0 * w / (total * tau)).collect();
    ResonatorModel::passive(0.0, tau, gamma).unwrap()
}

/// Random active model with τ(Σγ − Σκ) = 2.
fn active_consistent(
    tau_exp: f64,
    kappa_total: f64,
    gamma_weights: &[f64],
    kappa_weights: &[f64],
    phases: &[f64],
) -> ResonatorModel {
    let tau = 10f64.powf(tau_exp);
    let gamma_total = kappa_total + 2.0 / tau;
    let gw: f64 = gamma_weights.iter().sum();
    let kw: f64 = kappa_weights.iter().sum();
    let n_kappa = kappa_weights.len();
    let mut gamma: Vec<f64> = gamma_weights
        .iter()
        .map(|w| gamma_total * w / gw)
        .collect();
    // Make sure every κ channel exists as an input channel.
    while gamma.len() < n_kappa + 1 {
        gamma.push(0.0);
    }
    let kappa: Vec<f64> = kappa_weights
        .iter()
        .map(|w| kappa_total * w / kw)
        .collect();
    ResonatorModel::new(0.0, tau, gamma, kappa, phases[..n_kappa].to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn passive_consistent_models_respect_the_bound(
        tau_exp in -1.0f64..1.0,
        weights in proptest::collection::vec(0.01f64..1.0, 1..=4),
    ) {
        let model = passive_consistent(tau_exp, &weights);
        let report = tbp_report(&model);
        prop_assert!(report.tbp <= 2.0 + 1e-9, "tbp = {}", report.tbp);
        prop_assert_eq!(report.classification, Classification::PassiveConsistent);
    }

    #[test]
    fn consistent_models_conserve_the_commutator(
        tau_exp in -1.0f64..1.0,
        kappa_total in 0.0f64..8.0,
        gw in proptest::collection::vec(0.01f64..1.0, 1..=3),
        kw in proptest::collection::vec(0.01f64..1.0, 2),
        phases in proptest::collection::vec(0.0f64..std::f64::consts::TAU, 2),
    ) {
        let model = active_consistent(tau_exp, kappa_total / 10f64.powf(tau_exp), &gw, &kw, &phases);
        let tau = model.tau();
        let traj = propagate_moments(&model, None, &MomentState::vacuum(), 10.0 * tau, tau / 1000.0)
            .unwrap();
        for s in traj.iter().step_by(499) {
            prop_assert!((s.commutator - 1.0).abs() <= 1e-7, "t={}: c={}", s.t, s.commutator);
        }
    }

    #[test]
    fn commutator_matches_analytic_at_every_output_time(
        tau_exp in -1.0f64..1.0,
        gamma0_scaled in 0.0f64..6.0,
    ) {
        // Deliberately unconstrained (possibly inconsistent) models.
        let tau = 10f64.powf(tau_exp);
        let model = ResonatorModel::passive(0.0, tau, vec![gamma0_scaled / tau]).unwrap();
        let traj = propagate_moments(&model, None, &MomentState::vacuum(), 5.0 * tau, tau / 1000.0)
            .unwrap();
        for s in &traj {
            let expected = commutator_analytic(&model, s.t);
            prop_assert!(
                (s.commutator - expected).abs() <= 1e-8 * expected.abs().max(1e-3),
                "t={}: {} vs {expected}", s.t, s.commutator
            );
        }
    }

    #[test]
    fn qmfs_density_equals_two_over_tau_iff_consistent(
        tau_exp in -1.0f64..1.0,
        kappa_total in 0.0f64..8.0,
        gw in proptest::collection::vec(0.01f64..1.0, 1..=3),
        kw in proptest::collection::vec(0.01f64..1.0, 2),
        phases in proptest::collection::vec(0.0f64..std::f64::consts::TAU, 2),
    ) {
        let model = active_consistent(tau_exp, kappa_total / 10f64.powf(tau_exp), &gw, &kw, &phases);
        let density = qmfs_check(&model);
        prop_assert!((density - 2.0 / model.tau()).abs() <= 1e-9 * (2.0 / model.tau()));
    }

    #[test]
    fn ase_penalty_is_zero_iff_passive(
        tau_exp in -1.0f64..1.0,
        kappa_total in 0.0f64..8.0,
        gw in proptest::collection::vec(0.01f64..1.0, 1..=3),
        kw in proptest::collection::vec(0.01f64..1.0, 2),
        phases in proptest::collection::vec(0.0f64..std::f64::consts::TAU, 2),
    ) {
        let model = active_consistent(tau_exp, kappa_total / 10f64.powf(tau_exp), &gw, &kw, &phases);
        let penalty = ase_penalty(&model);
        let passive = model.total_kappa_rate() == 0.0;
        prop_assert_eq!(penalty == 0.0, passive);
    }
}

/// Oracle equivalence at the two spec step sizes, on models exercising all
/// source terms (γ-only, κ-heavy, and a mixed channel with nonzero phase).
#[test]
fn oracle_and_rk4_agree_on_commutator_and_number() {
    let models = [
        ResonatorModel::passive(0.0, 1.0, vec![2.0]).unwrap(),
        ResonatorModel::passive(0.0, 1.0, vec![4.0]).unwrap(),
        ResonatorModel::new(0.0, 1.0, vec![10.0, 0.0, 0.0], vec![4.0, 4.0], vec![0.0, 0.0])
            .unwrap(),
        ResonatorModel::new(0.0, 1.0, vec![3.0, 1.0], vec![2.0], vec![1.1]).unwrap(),
        ResonatorModel::new(0.0, 2.0, vec![0.5, 0.5], vec![0.7], vec![2.5]).unwrap(),
    ];
    for model in &models {
        let tau = model.tau();
        let t_end = 5.0 * tau;
        let rk4 = propagate_moments(model, None, &MomentState::vacuum(), t_end, tau / 1000.0)
            .unwrap();
        let rk4 = rk4.last().unwrap();
        for divisor in [200.0, 400.0] {
            let dt = tau / divisor;
            let oracle = discrete_mode_oracle(model, dt, t_end).unwrap();
            let tol = 5.0 * dt / tau;
            let comm_err =
                (oracle.commutator - rk4.commutator).abs() / rk4.commutator.abs().max(1e-12);
            let num_err = (oracle.number - rk4.number).abs() / rk4.number.abs().max(1e-12);
            assert!(comm_err <= tol, "commutator err {comm_err} (dt = τ/{divisor})");
            assert!(num_err <= tol, "number err {num_err} (dt = τ/{divisor})");
        }
    }
}

/// The mean of the quantum trajectory and the classical mean-field variable
/// are conjugate images of each other for arbitrary drives.
#[test]
fn mean_field_correspondence_for_random_drives() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d65616e);
    for _ in 0..5 {
        let tau = rng.gen_range(0.5..2.0);
        let omega0 = rng.gen_range(-1.0..1.0);
        let gamma0 = rng.gen_range(0.1..3.0);
        let model = ResonatorModel::passive(omega0, tau, vec![gamma0]).unwrap();
        let dt = tau / 1000.0;
        let n = 4001;
        let samples: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let drive = ClassicalDrive::new(samples, dt).unwrap();
        let classical =
            qle_core::langevin::integrate_classical(&model, &drive, Complex64::default()).unwrap();
        let quantum = propagate_moments(
            &model,
            Some(&drive),
            &MomentState::vacuum(),
            dt * (n - 1) as f64,
            dt,
        )
        .unwrap();
        let sqrt_g0 = gamma0.sqrt();
        for (cl, qm) in classical.iter().zip(&quantum) {
            assert!(
                (sqrt_g0 * qm.mean.conj() - cl.1).norm() <= 1e-8,
                "t = {}",
                cl.0
            );
        }
    }
}
