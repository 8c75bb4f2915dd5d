//! Graph Laplacian, its Moore-Penrose pseudoinverse, and the two spectral
//! distances built from it.
//!
//! For a weighted graph with Laplacian `L = sum_e w_e b_e b_e^T` (where
//! `b_{u,v} = e_u - e_v`), this module computes:
//!
//! * the pseudoinverse `L+` via a symmetric eigendecomposition, treating
//!   eigenvalues below `1e-10 * lambda_max` as exact zeros;
//! * the squared pseudoinverse `(L+)^2`;
//! * the effective resistance `r(u, v) = b^T L+ b`;
//! * the biharmonic distance `d_B(u, v) = sqrt(b^T (L+)^2 b)`.
//!
//! Both distances assume a connected graph; on a disconnected graph the
//! pseudoinverse is still well defined but cross-component "distances" have
//! no physical meaning (they are quadratic forms of the component-wise
//! pseudoinverse and come with no metric guarantees).

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Eigenvalues below this fraction of the largest eigenvalue are treated as
/// exact zeros when inverting the spectrum.
pub const EIGENVALUE_ZERO_CUTOFF: f64 = 1e-10;

/// Dense Laplacian of `g` (order `n x n`).
pub fn laplacian_matrix(g: &WeightedGraph) -> DMatrix<f64> {
    let n = g.node_count();
    let mut lap = DMatrix::zeros(n, n);
    for e in g.edges() {
        lap[(e.u, e.u)] += e.w;
        lap[(e.v, e.v)] += e.w;
        lap[(e.u, e.v)] -= e.w;
        lap[(e.v, e.u)] -= e.w;
    }
    lap
}

/// Precomputed spectral toolkit for one graph: Laplacian, pseudoinverse,
/// squared pseudoinverse, and the eigenvalue spectrum.
#[derive(Debug, Clone)]
pub struct LaplacianKit {
    laplacian: DMatrix<f64>,
    pinv: DMatrix<f64>,
    pinv_sq: DMatrix<f64>,
    eigenvalues: Vec<f64>,
}

impl LaplacianKit {
    pub fn new(g: &WeightedGraph) -> Result<Self> {
        let lap = laplacian_matrix(g);
        let eig = SymmetricEigen::try_new(lap.clone(), f64::EPSILON, 0)
            .ok_or_else(|| Error::Numerical("Laplacian eigendecomposition failed".to_string()))?;
        let lam_max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
        let cutoff = EIGENVALUE_ZERO_CUTOFF * lam_max;
        let inv_spectrum =
            DVector::from_iterator(
                eig.eigenvalues.len(),
                eig.eigenvalues
                    .iter()
                    .map(|&l| if l > cutoff { 1.0 / l } else { 0.0 }),
            );
        let scaled = {
            // Q * diag(inv) * Q^T, built column-by-column to avoid a full
            // diagonal matrix allocation.
            let mut cols = eig.eigenvectors.clone();
            for (j, mut col) in cols.column_iter_mut().enumerate() {
                col *= inv_spectrum[j];
            }
            cols
        };
        let pinv = &scaled * eig.eigenvectors.transpose();
        let pinv_sq = &pinv * &pinv;
        let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
        eigenvalues.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(LaplacianKit {
            laplacian: lap,
            pinv,
            pinv_sq,
            eigenvalues,
        })
    }

    pub fn node_count(&self) -> usize {
        self.laplacian.nrows()
    }

    pub fn laplacian(&self) -> &DMatrix<f64> {
        &self.laplacian
    }

    pub fn pseudoinverse(&self) -> &DMatrix<f64> {
        &self.pinv
    }

    pub fn pseudoinverse_squared(&self) -> &DMatrix<f64> {
        &self.pinv_sq
    }

    /// Eigenvalues of the Laplacian in ascending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    fn check_pair(&self, u: usize, v: usize) -> Result<()> {
        let n = self.node_count();
        if u >= n || v >= n {
            return Err(Error::Domain(format!(
                "vertex pair ({u}, {v}) out of range for {n} vertices"
            )));
        }
        Ok(())
    }

    /// Quadratic form `(e_v - e_u)^T A (e_v - e_u)` for symmetric `A`,
    /// clamped at zero to absorb rounding on coincident pairs.
    fn pair_form(a: &DMatrix<f64>, u: usize, v: usize) -> f64 {
        (a[(u, u)] + a[(v, v)] - 2.0 * a[(u, v)]).max(0.0)
    }

    /// Effective resistance between `u` and `v`; zero when `u == v`.
    pub fn resistance_distance(&self, u: usize, v: usize) -> Result<f64> {
        self.check_pair(u, v)?;
        if u == v {
            return Ok(0.0);
        }
        Ok(Self::pair_form(&self.pinv, u, v))
    }

    /// Squared biharmonic distance between `u` and `v`.
    pub fn biharmonic_distance_squared(&self, u: usize, v: usize) -> Result<f64> {
        self.check_pair(u, v)?;
        if u == v {
            return Ok(0.0);
        }
        Ok(Self::pair_form(&self.pinv_sq, u, v))
    }

    /// Biharmonic distance between `u` and `v`.
    pub fn biharmonic_distance(&self, u: usize, v: usize) -> Result<f64> {
        Ok(self.biharmonic_distance_squared(u, v)?.sqrt())
    }

    /// Voltage profile `L+ (e_{s1} - e_{s0})`: the mean-zero potential of a
    /// unit current injected at `s1` and extracted at `s0`.
    pub fn voltage_vector(&self, s1: usize, s0: usize) -> Result<DVector<f64>> {
        self.check_pair(s0, s1)?;
        let n = self.node_count();
        let mut b = DVector::zeros(n);
        b[s1] += 1.0;
        b[s0] -= 1.0;
        Ok(&self.pinv * b)
    }
}
