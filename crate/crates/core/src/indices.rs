//! Disagreement and polarization indices for steady-state opinion vectors,
//! including the pseudoinverse closed forms for the leader-led model.
//!
//! For an opinion vector `x` on a weighted graph:
//!
//! * disagreement `D = sum_e w_e (x_u - x_v)^2` (equivalently `x^T L x`);
//! * polarization `P = sum_v (x_v - mean(x))^2`;
//! * weighted polarization `P~ = sum_v kappa_v (x_v - alpha)^2` with the
//!   stubbornness-weighted mean `alpha = (sum kappa x) / (sum kappa)`;
//! * the combined index `I(rho) = rho * D + (1 - rho) * P` (or `P~`).
//!
//! For the leader-led model with leaders `s0, s1` the indices have closed
//! forms in the effective resistance `r` and biharmonic distance `d_B`:
//! `D = 1/r` and `P = (d_B / r)^2`, which this module evaluates directly
//! from a [`LaplacianKit`]. For the stubborn-agent model at `rho = 1/2`,
//! `I(1/2) = (1/2) s~^T (L + K)^{-1} s~` where `s~` is the mean-centered
//! source vector; see [`fj_index_closed`].

use nalgebra::DVector;
use serde::Serialize;

use crate::dynamics::{fd_steady_state, fj_steady_state, fj_system_cholesky, FdModel, FjModel};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::laplacian::LaplacianKit;

/// Edge-sum disagreement `sum_e w_e (x_u - x_v)^2`.
pub fn disagreement(g: &WeightedGraph, x: &[f64]) -> Result<f64> {
    if x.len() != g.node_count() {
        return Err(Error::Dimension {
            what: "opinion vector",
            expected: g.node_count(),
            got: x.len(),
        });
    }
    Ok(g.edges()
        .iter()
        .map(|e| {
            let d = x[e.u] - x[e.v];
            e.w * d * d
        })
        .sum())
}

/// Variance-style polarization `sum_v (x_v - mean)^2`.
pub fn polarization(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| (v - mean) * (v - mean)).sum()
}

/// Stubbornness-weighted polarization; returns `(P~, alpha)` where
/// `alpha = (sum kappa x) / (sum kappa)`.
pub fn weighted_polarization(x: &[f64], kappa: &[f64]) -> Result<(f64, f64)> {
    if kappa.len() != x.len() {
        return Err(Error::Dimension {
            what: "stubbornness vector",
            expected: x.len(),
            got: kappa.len(),
        });
    }
    let mut sum_k = 0.0;
    let mut sum_kx = 0.0;
    for (v, (&k, &xv)) in kappa.iter().zip(x).enumerate() {
        if !k.is_finite() || k <= 0.0 {
            return Err(Error::Domain(format!(
                "stubbornness must be positive and finite; vertex {v} has {k}"
            )));
        }
        sum_k += k;
        sum_kx += k * xv;
    }
    let alpha = sum_kx / sum_k;
    let p = kappa
        .iter()
        .zip(x)
        .map(|(&k, &xv)| k * (xv - alpha) * (xv - alpha))
        .sum();
    Ok((p, alpha))
}

/// Convex combination `rho * d + (1 - rho) * p`; `rho` must lie in `[0, 1]`.
pub fn pd_index(d: f64, p: f64, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    Ok(rho * d + (1.0 - rho) * p)
}

pub(crate) fn check_rho(rho: f64) -> Result<()> {
    if !rho.is_finite() || !(0.0..=1.0).contains(&rho) {
        return Err(Error::Domain(format!(
            "mixing weight rho must lie in [0, 1], got {rho}"
        )));
    }
    Ok(())
}

/// Closed-form FD disagreement: `D = 1 / r(s0, s1)`.
pub fn fd_disagreement_closed(kit: &LaplacianKit, s0: usize, s1: usize) -> Result<f64> {
    let r = positive_resistance(kit, s0, s1)?;
    Ok(1.0 / r)
}

/// Closed-form FD polarization: `P = (d_B(s0, s1) / r(s0, s1))^2`.
pub fn fd_polarization_closed(kit: &LaplacianKit, s0: usize, s1: usize) -> Result<f64> {
    let r = positive_resistance(kit, s0, s1)?;
    let db2 = kit.biharmonic_distance_squared(s0, s1)?;
    Ok(db2 / (r * r))
}

fn positive_resistance(kit: &LaplacianKit, s0: usize, s1: usize) -> Result<f64> {
    if s0 == s1 {
        return Err(Error::Domain("leaders must differ".to_string()));
    }
    let r = kit.resistance_distance(s0, s1)?;
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Numerical(format!(
            "effective resistance between {s0} and {s1} is not positive (graph disconnected?)"
        )));
    }
    Ok(r)
}

/// Mean-centered FJ source vector `s~ = s - kappa (1^T s) / (1^T kappa)`
/// with `s = kappa .* beta`.
pub fn fj_projected_source(m: &FjModel) -> DVector<f64> {
    let s = m.kappa().component_mul(m.beta());
    let shift = s.sum() / m.kappa().sum();
    &s - m.kappa() * shift
}

/// Closed-form FJ index at `rho = 1/2`:
/// `I(1/2) = (1/2) s~^T (L + K)^{-1} s~`. Other values of `rho` must go
/// through [`fj_index_report`], which evaluates the definitional route.
pub fn fj_index_closed(m: &FjModel, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    if (rho - 0.5).abs() > 1e-15 {
        return Err(Error::Domain(format!(
            "the closed form covers only rho = 0.5; got rho = {rho}"
        )));
    }
    let s_tilde = fj_projected_source(m);
    let chol = fj_system_cholesky(m.graph(), m.kappa())?;
    let y = chol.solve(&s_tilde);
    Ok(0.5 * s_tilde.dot(&y))
}

/// Flat report of the indices of one steady state.
#[derive(Debug, Clone, Serialize)]
pub struct IndexReport {
    pub disagreement: f64,
    pub polarization: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weighted_polarization: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub rho: f64,
    /// `rho * D + (1 - rho) * P` for the FD model,
    /// `rho * D + (1 - rho) * P~` for the FJ model.
    pub index: f64,
    pub model: String,
}

/// Indices of the FD steady state for leaders `(s0, s1)`.
pub fn fd_index_report(g: &WeightedGraph, s0: usize, s1: usize, rho: f64) -> Result<IndexReport> {
    check_rho(rho)?;
    let m = FdModel::new(g.clone(), s0, s1)?;
    let x = fd_steady_state(&m)?;
    let d = disagreement(g, x.as_slice())?;
    let p = polarization(x.as_slice());
    Ok(IndexReport {
        disagreement: d,
        polarization: p,
        weighted_polarization: None,
        alpha: None,
        rho,
        index: rho * d + (1.0 - rho) * p,
        model: "fd".to_string(),
    })
}

/// Indices of the FJ steady state; the index mixes disagreement with the
/// stubbornness-weighted polarization.
pub fn fj_index_report(m: &FjModel, rho: f64) -> Result<IndexReport> {
    check_rho(rho)?;
    let x = fj_steady_state(m)?;
    let d = disagreement(m.graph(), x.as_slice())?;
    let p = polarization(x.as_slice());
    let (p_w, alpha) = weighted_polarization(x.as_slice(), m.kappa().as_slice())?;
    Ok(IndexReport {
        disagreement: d,
        polarization: p,
        weighted_polarization: Some(p_w),
        alpha: Some(alpha),
        rho,
        index: rho * d + (1.0 - rho) * p_w,
        model: "fj".to_string(),
    })
}
