//! Static scattering-matrix algebra for nonreciprocal devices.
//!
//! A lossy nonreciprocal two-port (an isolator) is not a closed description:
//! the absorbed flux has to go somewhere. [`dilate_to_unitary`] embeds any
//! passive scattering matrix as the upper-left block of a unitary one by
//! adding the minimal number of ports carrying the lost flux — the isolator
//! dilates to a three-port circulator. [`close_port`] does the reverse
//! bookkeeping: terminating a port with a perfect mirror reduces the port
//! count, and closing any port of a unitary network restores equal coupling
//! magnitudes between the remaining two ports regardless of mirror phase.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

/// Entrywise tolerance for unitarity/reciprocity/passivity checks.
pub const TOL_S: f64 = 1e-9;
/// Defect eigenvalues above this count toward the dilation rank.
pub const TOL_RANK: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum ScatteringError {
    #[error("scattering matrix must be square, got {rows}×{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("entries must be finite")]
    NonFinite,
    #[error("matrix is not passive: largest singular value = {sigma_max}")]
    NotPassive { sigma_max: f64 },
    #[error("dilation failed verification: unitarity defect = {defect:.3e}")]
    DilationVerificationFailed { defect: f64 },
    #[error("eigensolver failed on the defect operator")]
    EigensolverFailure,
    #[error("port {port} out of range for a {dim}-port matrix")]
    PortOutOfRange { port: usize, dim: usize },
    #[error("need at least two ports to close one, got {dim}")]
    TooFewPorts { dim: usize },
    #[error("mirror closure is singular: |1 - S_bb e^{{iφ}}| = {denom:.3e}")]
    SingularClosure { denom: f64 },
}

/// Complex square matrix of port-to-port amplitudes.
///
/// Unitarity, reciprocity and passivity are derived on demand by
/// [`classify`], never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringMatrix {
    entries: DMatrix<Complex64>,
}

/// Derived classification flags of a scattering matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    /// ‖S†S − I‖_max ≤ tolerance.
    pub unitary: bool,
    /// ‖S − Sᵀ‖_max ≤ tolerance.
    pub reciprocal: bool,
    /// Largest singular value ≤ 1 + tolerance (no gain).
    pub passive: bool,
}

impl Classification {
    /// One-line CSV `unitary,reciprocal,passive`.
    pub fn to_csv_line(&self) -> String {
        format!("{},{},{}", self.unitary, self.reciprocal, self.passive)
    }
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl ScatteringMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self, ScatteringError> {
        if entries.nrows() != entries.ncols() {
            return Err(ScatteringError::NotSquare {
                rows: entries.nrows(),
                cols: entries.ncols(),
            });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(ScatteringError::NonFinite);
        }
        Ok(Self { entries })
    }

    pub fn from_rows(dim: usize, rows: &[Complex64]) -> Result<Self, ScatteringError> {
        Self::new(DMatrix::from_row_slice(dim, dim, rows))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Largest singular value, from the Hermitian eigenvalues of S†S.
    pub fn sigma_max(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        let gram = self.entries.adjoint() * &self.entries;
        let eigs = gram.symmetric_eigenvalues();
        eigs.iter().fold(0.0f64, |m, &l| m.max(l.max(0.0))).sqrt()
    }
}

/// Classifies a scattering matrix as unitary / reciprocal / passive.
pub fn classify(s: &ScatteringMatrix) -> Classification {
    let n = s.dim();
    let gram = s.entries().adjoint() * s.entries();
    let unitary = max_abs(&(&gram - DMatrix::identity(n, n))) <= TOL_S;
    let reciprocal = max_abs(&(s.entries() - s.entries().transpose())) <= TOL_S;
    let passive = s.sigma_max() <= 1.0 + TOL_S;
    Classification {
        unitary,
        reciprocal,
        passive,
    }
}

/// Hermitian square root of I − M restricted data: returns (sqrt, basis)
/// where `sqrt` is (I − M)^{1/2} with negative eigenvalues floored to zero
/// and `basis` collects the eigenvectors whose eigenvalue exceeds
/// [`TOL_RANK`] (the defect's numerical range).
fn defect_sqrt(
    complement: &DMatrix<Complex64>,
) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>), ScatteringError> {
    let n = complement.nrows();
    let eig = complement
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 10_000)
        .ok_or(ScatteringError::EigensolverFailure)?;
    let sqrt_vals: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let mut sqrt = DMatrix::zeros(n, n);
    for (idx, &sv) in sqrt_vals.iter().enumerate() {
        if sv == 0.0 {
            continue;
        }
        let v = eig.eigenvectors.column(idx);
        for r in 0..n {
            for c in 0..n {
                sqrt[(r, c)] += Complex64::new(sv, 0.0) * v[r] * v[c].conj();
            }
        }
    }
    let kept: Vec<usize> = (0..n)
        .filter(|&i| eig.eigenvalues[i] > TOL_RANK)
        .collect();
    let mut basis = DMatrix::zeros(n, kept.len());
    for (j, &idx) in kept.iter().enumerate() {
        basis.set_column(j, &eig.eigenvectors.column(idx));
    }
    Ok((sqrt, basis))
}

/// Embeds a passive scattering matrix as the upper-left block of a unitary
/// matrix of side dim + r, where r = rank(I − S†S) at [`TOL_RANK`].
///
/// Construction via the defect operators D = (I − S†S)^{1/2} and
/// D′ = (I − SS†)^{1/2}, each restricted to its nonzero eigenspace:
///
/// ```text
/// ┌ S      D′B′ ┐     B  = range basis of I − S†S
/// └ B†D   −B†S†B′┘     B′ = range basis of I − SS†
/// ```
///
/// Already-unitary inputs come back unchanged. The completion is not unique;
/// callers should rely on the block content and unitarity, not on specific
/// entries. The result is re-verified unitary within 10 × [`TOL_S`].
pub fn dilate_to_unitary(s: &ScatteringMatrix) -> Result<ScatteringMatrix, ScatteringError> {
    let sigma_max = s.sigma_max();
    if sigma_max > 1.0 + TOL_S {
        return Err(ScatteringError::NotPassive { sigma_max });
    }
    let n = s.dim();
    let eye = DMatrix::<Complex64>::identity(n, n);
    let (d, basis_in) = defect_sqrt(&(&eye - s.entries().adjoint() * s.entries()))?;
    let (d_out, basis_out) = defect_sqrt(&(&eye - s.entries() * s.entries().adjoint()))?;
    let r = basis_in.ncols();
    if r == 0 {
        return Ok(s.clone());
    }
    if basis_out.ncols() != r {
        // S†S and SS† share their spectrum; a mismatch means an eigenvalue
        // sits on the rank threshold and no clean dilation size exists.
        return Err(ScatteringError::DilationVerificationFailed {
            defect: f64::NAN,
        });
    }

    let upper_right = &d_out * &basis_out;
    let lower_left = basis_in.adjoint() * &d;
    let lower_right = -(basis_in.adjoint() * s.entries().adjoint() * &basis_out);

    let mut full = DMatrix::zeros(n + r, n + r);
    full.view_mut((0, 0), (n, n)).copy_from(s.entries());
    full.view_mut((0, n), (n, r)).copy_from(&upper_right);
    full.view_mut((n, 0), (r, n)).copy_from(&lower_left);
    full.view_mut((n, n), (r, r)).copy_from(&lower_right);

    let defect = max_abs(&(full.adjoint() * &full - DMatrix::identity(n + r, n + r)));
    if defect > 10.0 * TOL_S {
        return Err(ScatteringError::DilationVerificationFailed { defect });
    }
    Ok(ScatteringMatrix { entries: full })
}

/// Terminates one port with a perfect mirror of reflection e^{iφ} and
/// returns the reduced (dim − 1)-port matrix
/// S_red = S_aa + S_ab e^{iφ} (1 − S_bb e^{iφ})^{−1} S_ba.
///
/// For a unitary input the reduced matrix has |S_jk| = |S_kj| for every
/// mirror phase — coupling-rate magnitudes between the surviving ports
/// cannot stay one-way once the extra port is closed.
pub fn close_port(
    s: &ScatteringMatrix,
    closed_port: usize,
    mirror_phase: f64,
) -> Result<ScatteringMatrix, ScatteringError> {
    let n = s.dim();
    if n < 2 {
        return Err(ScatteringError::TooFewPorts { dim: n });
    }
    if closed_port >= n {
        return Err(ScatteringError::PortOutOfRange {
            port: closed_port,
            dim: n,
        });
    }
    let phase = Complex64::from_polar(1.0, mirror_phase);
    let denom = Complex64::new(1.0, 0.0) - s.entries()[(closed_port, closed_port)] * phase;
    if denom.norm() <= TOL_S {
        return Err(ScatteringError::SingularClosure {
            denom: denom.norm(),
        });
    }
    let keep: Vec<usize> = (0..n).filter(|&i| i != closed_port).collect();
    let mut reduced = DMatrix::zeros(n - 1, n - 1);
    for (i, &a) in keep.iter().enumerate() {
        for (j, &b) in keep.iter().enumerate() {
            reduced[(i, j)] = s.entries()[(a, b)]
                + s.entries()[(a, closed_port)] * phase / denom * s.entries()[(closed_port, b)];
        }
    }
    Ok(ScatteringMatrix { entries: reduced })
}
