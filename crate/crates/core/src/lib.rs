//! Numerical toolkit for quantum and thermodynamic limits of linear resonators.
//!
//! The crate is organized around four independent layers:
//!
//! - [`network`] — Hermitian mode-coupling matrices for passive linear optics,
//!   their resonator/reservoir eigendecomposition, and a graph-based solver for
//!   the time-reversal gauge condition (nonreciprocity witness).
//! - [`langevin`] — quantum Langevin moment dynamics for passive and active
//!   (Bogoliubov-coupled) resonators: commutator tracking, time-bandwidth
//!   product reports, amplified-spontaneous-emission noise, the classical
//!   mean-field integrator, and an independent discrete-mode oracle.
//! - [`scattering`] — static port algebra: unitarity/reciprocity/passivity
//!   classification, unitary dilation of lossy scattering matrices, and
//!   mirror closure of ports.
//! - [`thermo`] — heat baths exchanging power over one-way or reciprocal
//!   links, with an entropy ledger that mechanically flags second-law
//!   violations.
//!
//! All quantities use ħ = 1, k_B = 1 units; frequencies and rates are angular
//! (rad per unit time).

pub mod langevin;
pub mod matfile;
pub mod network;
pub mod scattering;
pub mod thermo;

pub use nalgebra;
pub use num_complex::Complex64;

/// Formats a float with 17 significant digits, enough to round-trip f64.
///
/// All text outputs (matrix files, CSV) use this so that identical inputs
/// produce byte-identical files.
pub fn format_g17(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_round_trips() {
        for &x in &[0.0, 1.0 / 3.0, -2.5e-13, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = format_g17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "failed on {s}");
        }
    }
}
