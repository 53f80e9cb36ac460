//! Coupling-matrix representation of passive linear optical networks.
//!
//! A network of bosonic modes with Hamiltonian H = Σ b_j† G_jk b_k is fully
//! described by the Hermitian matrix G. Mode 0 is the resonator by
//! convention; the submatrix over modes 1.. is the reservoir. This module
//! validates G, diagonalizes the reservoir into eigenmodes with couplings
//! η_j, and decides whether phases θ_j exist with
//! exp(i(θ_j − θ_k)) G_jk* = G_jk — the gauge condition for time-reversal
//! symmetry. A G matrix with no solution (some coupling cycle carries a net
//! phase) is nonreciprocal; the three-mode circulator is the canonical case.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

/// Hermiticity tolerance, relative to the largest entry magnitude.
pub const TOL_HERM: f64 = 1e-10;
/// Tolerance for unitarity / reconstruction checks on decompositions.
pub const TOL_UNIT: f64 = 1e-9;
/// Gauge-cycle defect tolerance in radians.
pub const TOL_GAUGE: f64 = 1e-8;
/// Entries below `TOL_ZERO_FACTOR × max|G|` are treated as absent edges.
pub const TOL_ZERO_FACTOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("coupling matrix must be square, got {rows}×{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("coupling matrix is not Hermitian: max |G - G†| = {max_deviation:.3e}")]
    NotHermitian { max_deviation: f64 },
    #[error("need at least {min} modes, got {dim}")]
    DimensionTooSmall { dim: usize, min: usize },
    #[error("eigensolver failed to converge on the reservoir block")]
    EigensolverFailure,
}

/// Hermitian mode-coupling matrix of a passive linear network.
///
/// Entries are angular frequencies (ħ = 1). Index 0 is the resonator mode;
/// `G[0][0]` is its detuning and the block over indices 1.. couples the
/// reservoir modes among themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    entries: DMatrix<Complex64>,
}

impl CouplingMatrix {
    /// Index of the resonator mode, fixed by convention.
    pub const RESONATOR_INDEX: usize = 0;

    /// Validates a raw matrix as a coupling matrix.
    ///
    /// The matrix must be square with at least one mode and Hermitian within
    /// [`TOL_HERM`] (relative to the largest entry). The stored entries are
    /// symmetrized as (raw + raw†)/2 so downstream math sees an exactly
    /// Hermitian matrix.
    pub fn validate(raw: &DMatrix<Complex64>) -> Result<Self, NetworkError> {
        if raw.nrows() != raw.ncols() {
            return Err(NetworkError::NotSquare {
                rows: raw.nrows(),
                cols: raw.ncols(),
            });
        }
        let n = raw.nrows();
        if n == 0 {
            return Err(NetworkError::DimensionTooSmall { dim: 0, min: 1 });
        }
        let scale = raw.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut max_deviation = 0.0f64;
        for j in 0..n {
            for k in 0..n {
                let dev = (raw[(j, k)] - raw[(k, j)].conj()).norm();
                max_deviation = max_deviation.max(dev);
            }
        }
        if max_deviation > TOL_HERM * scale {
            return Err(NetworkError::NotHermitian { max_deviation });
        }
        let entries = (raw + raw.adjoint()).map(|z| 0.5 * z);
        Ok(Self { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Resonator detuning G_00 (real by Hermiticity).
    pub fn detuning(&self) -> f64 {
        self.entries[(0, 0)].re
    }

    /// The reservoir-only block (indices 1..dim).
    pub fn reservoir_block(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        self.entries.view((1, 1), (n - 1, n - 1)).into_owned()
    }
}

/// Eigenmode decomposition of the reservoir block G′ = V† D V.
///
/// `transform` is the unitary V whose row j gives reservoir eigenmode j in
/// terms of the bare modes; `eta[j] = Σ_k G_0k V_jk*` is the coupling of the
/// resonator to that eigenmode.
#[derive(Debug, Clone)]
pub struct ReservoirDecomposition {
    pub detuning: f64,
    pub eta: Vec<Complex64>,
    /// Reservoir eigenfrequencies D_jj, sorted ascending.
    pub reservoir_frequencies: Vec<f64>,
    pub transform: DMatrix<Complex64>,
}

impl ReservoirDecomposition {
    /// Rebuilds the reservoir block as V† D V.
    pub fn reconstruct_reservoir(&self) -> DMatrix<Complex64> {
        let d = DMatrix::from_diagonal(
            &nalgebra::DVector::from_iterator(
                self.reservoir_frequencies.len(),
                self.reservoir_frequencies.iter().map(|&w| Complex64::new(w, 0.0)),
            ),
        );
        self.transform.adjoint() * d * &self.transform
    }
}

/// Diagonalizes the reservoir block and computes the eigenmode couplings.
///
/// Eigenvectors are phase-normalized (largest component real positive) so
/// the output is deterministic away from degeneracies. The coupling-row norm
/// Σ|η_j|² = Σ_{k≠0} |G_0k|² is preserved by unitarity.
pub fn decompose_reservoir(g: &CouplingMatrix) -> Result<ReservoirDecomposition, NetworkError> {
    let n = g.dim();
    if n < 2 {
        return Err(NetworkError::DimensionTooSmall { dim: n, min: 2 });
    }
    let block = g.reservoir_block();
    let eig = block
        .try_symmetric_eigen(f64::EPSILON, 10_000)
        .ok_or(NetworkError::EigensolverFailure)?;

    let m = n - 1;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let reservoir_frequencies: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();

    // Row j of V is the adjoint of eigenvector column `order[j]`, with the
    // phase fixed so the largest-magnitude component is real positive.
    let mut transform = DMatrix::zeros(m, m);
    for (j, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let mut pivot = Complex64::new(0.0, 0.0);
        for z in col.iter() {
            if z.norm() > pivot.norm() {
                pivot = *z;
            }
        }
        let phase = if pivot.norm() > 0.0 {
            pivot / pivot.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for k in 0..m {
            // V_jk = (column_j)_k* after de-phasing the column.
            transform[(j, k)] = (col[k] / phase).conj();
        }
    }

    let eta: Vec<Complex64> = (0..m)
        .map(|j| {
            (0..m)
                .map(|k| g.entries()[(0, k + 1)] * transform[(j, k)].conj())
                .sum()
        })
        .collect();

    Ok(ReservoirDecomposition {
        detuning: g.detuning(),
        eta,
        reservoir_frequencies,
        transform,
    })
}

/// Result of the time-reversal gauge analysis.
#[derive(Debug, Clone)]
pub struct GaugeSolution {
    /// True when phases θ_j satisfying the gauge condition exist.
    pub exists: bool,
    /// Phases θ_j in [0, 2π), gauge-fixed to 0 at each component root.
    /// Present only when `exists` is true.
    pub phases: Option<Vec<f64>>,
    /// Largest inconsistency over independent coupling cycles, in radians,
    /// wrapped into (−π, π] and reported as an absolute value.
    pub worst_cycle_defect: f64,
}

/// Wraps an angle into (−π, π].
fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Decides whether the coupling matrix admits a time-reversal gauge.
///
/// Each nonzero off-diagonal entry G_jk imposes θ_j − θ_k ≡ 2 arg(G_jk)
/// (mod 2π) on the mode phases. Treating modes as graph vertices, a
/// spanning-tree traversal per connected component assigns phases (root
/// fixed to 0); every non-tree edge then closes a cycle whose phase sum
/// must vanish mod 2π. The worst cycle defect decides existence.
pub fn solve_gauge(g: &CouplingMatrix) -> GaugeSolution {
    let n = g.dim();
    let entries = g.entries();
    let scale = entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let tol_zero = TOL_ZERO_FACTOR * scale;

    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for j in 0..n {
        for k in (j + 1)..n {
            if entries[(j, k)].norm() > tol_zero {
                adjacency[j].push(k);
                adjacency[k].push(j);
            }
        }
    }

    let mut theta = vec![0.0f64; n];
    let mut visited = vec![false; n];
    let mut worst_defect = 0.0f64;

    for root in 0..n {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        theta[root] = 0.0;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &v in &adjacency[u] {
                // θ_u − θ_v ≡ 2 arg(G_uv) (mod 2π)
                let constraint = 2.0 * entries[(u, v)].arg();
                if !visited[v] {
                    visited[v] = true;
                    theta[v] = theta[u] - constraint;
                    queue.push_back(v);
                } else {
                    let defect = wrap_angle(theta[u] - theta[v] - constraint).abs();
                    worst_defect = worst_defect.max(defect);
                }
            }
        }
    }

    let exists = worst_defect <= TOL_GAUGE;
    let phases = exists.then(|| theta.iter().map(|&t| t.rem_euclid(TAU)).collect());
    GaugeSolution {
        exists,
        phases,
        worst_cycle_defect: worst_defect,
    }
}
