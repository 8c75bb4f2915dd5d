//! Euclidean projections onto the feasible sets used by the designers:
//! a box intersected with a total-budget half-space, and its special case
//! the capped simplex `{ x in [0,1]^n : sum x <= k }`.

use crate::error::{Error, Result};

/// Bisection iteration count for the budget multiplier; 100 halvings of the
/// initial bracket push the interval width far below f64 resolution.
const BISECTION_STEPS: usize = 100;

fn clip(x: f64, lo: f64, hi: f64) -> f64 {
    x.max(lo).min(hi)
}

/// Project `x` onto `{ y : lo <= y_i <= hi, sum y <= budget }`.
///
/// The projection first clips into the box; if the clipped point already
/// meets the budget it is returned as is. Otherwise the optimum lies on the
/// budget face and equals `clip(x - tau)` for the unique `tau >= 0` making
/// the coordinates sum to the budget, found by bisection (the sum is
/// continuous and non-increasing in `tau`).
pub fn project_box_budget(x: &[f64], lo: f64, hi: f64, budget: f64) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && budget.is_finite()) {
        return Err(Error::Domain(
            "projection bounds and budget must be finite".to_string(),
        ));
    }
    if lo > hi {
        return Err(Error::Domain(format!(
            "empty box: lower bound {lo} exceeds upper bound {hi}"
        )));
    }
    let n = x.len();
    if (n as f64) * lo > budget + 1e-12 {
        return Err(Error::Infeasible(format!(
            "budget {budget} is below the box minimum {}",
            n as f64 * lo
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(
            "projection input must be finite".to_string(),
        ));
    }
    let boxed: Vec<f64> = x.iter().map(|&v| clip(v, lo, hi)).collect();
    let total: f64 = boxed.iter().sum();
    if total <= budget {
        return Ok(boxed);
    }
    // On the budget face: y_i = clip(x_i - tau). tau = 0 gives `total` >
    // budget; tau = max_i(x_i) - lo empties every coordinate to `lo`.
    let mut tau_lo = 0.0f64;
    let mut tau_hi = x
        .iter()
        .fold(f64::NEG_INFINITY, |acc, &v| acc.max(v))
        - lo;
    if tau_hi <= 0.0 {
        // All coordinates already at the lower bound; the feasibility check
        // above guarantees that point meets the budget.
        return Ok(vec![lo; n]);
    }
    for _ in 0..BISECTION_STEPS {
        let tau = 0.5 * (tau_lo + tau_hi);
        let s: f64 = x.iter().map(|&v| clip(v - tau, lo, hi)).sum();
        if s > budget {
            tau_lo = tau;
        } else {
            tau_hi = tau;
        }
    }
    let tau = 0.5 * (tau_lo + tau_hi);
    Ok(x.iter().map(|&v| clip(v - tau, lo, hi)).collect())
}

/// Project onto the capped simplex `{ y in [0,1]^n : sum y <= k }`.
pub fn project_capped_simplex(x: &[f64], k: f64) -> Result<Vec<f64>> {
    if !k.is_finite() || k < 0.0 {
        return Err(Error::Domain(format!(
            "cap must be non-negative and finite, got {k}"
        )));
    }
    project_box_budget(x, 0.0, 1.0, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn interior_points_are_fixed() {
        let x = [0.2, 0.5, 0.1];
        let p = project_box_budget(&x, 0.0, 1.0, 2.0).unwrap();
        assert_close(&p, &x, 1e-12);
    }

    #[test]
    fn box_clipping_without_budget_pressure() {
        let p = project_box_budget(&[-1.0, 0.5, 2.0], 0.0, 1.0, 3.0).unwrap();
        assert_close(&p, &[0.0, 0.5, 1.0], 1e-12);
    }

    #[test]
    fn budget_face_uniform_shift() {
        // Projecting (1,1) onto sum <= 1 in [0,1]^2 gives (1/2, 1/2).
        let p = project_capped_simplex(&[1.0, 1.0], 1.0).unwrap();
        assert_close(&p, &[0.5, 0.5], 1e-9);
    }

    #[test]
    fn budget_face_with_clipping() {
        // Projecting (2.0, 0.1) onto { [0,1]^2, sum <= 1 }: the first
        // coordinate clips at the cap and already exhausts the budget, so
        // the smallest face-reaching shift is tau = 0.1, giving (1, 0) —
        // strictly closer to x than any split such as (0.95, 0.05).
        let p = project_capped_simplex(&[2.0, 0.1], 1.0).unwrap();
        assert_close(&p, &[1.0, 0.0], 1e-9);
    }

    #[test]
    fn projection_satisfies_variational_inequality() {
        // <x - Px, z - Px> <= 0 for feasible z characterizes the projection.
        let x = [1.3, -0.4, 0.9, 0.8, 0.2];
        let p = project_box_budget(&x, 0.0, 1.0, 1.5).unwrap();
        let feasible = [
            vec![0.0, 0.0, 0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.5, 0.0, 0.0],
            vec![0.3, 0.3, 0.3, 0.3, 0.3],
            vec![0.0, 0.0, 1.0, 0.5, 0.0],
        ];
        for z in &feasible {
            let dot: f64 = x
                .iter()
                .zip(&p)
                .zip(z.iter())
                .map(|((&xi, &pi), &zi)| (xi - pi) * (zi - pi))
                .sum();
            assert!(dot <= 1e-8, "violated for {z:?}: {dot}");
        }
    }

    #[test]
    fn tight_budget_hits_the_face_exactly() {
        let x = [0.9, 0.8, 0.7, 0.6];
        let p = project_capped_simplex(&x, 2.0).unwrap();
        let s: f64 = p.iter().sum();
        assert!((s - 2.0).abs() < 1e-9);
        // Order is preserved.
        for w in p.windows(2) {
            assert!(w[0] >= w[1] - 1e-12);
        }
    }

    #[test]
    fn zero_cap_projects_to_zero() {
        let p = project_capped_simplex(&[0.4, 0.9], 0.0).unwrap();
        assert_close(&p, &[0.0, 0.0], 1e-12);
    }

    #[test]
    fn infeasible_and_invalid_inputs_error() {
        assert!(project_box_budget(&[0.5], 1.0, 0.0, 10.0).is_err());
        assert!(project_box_budget(&[0.5, 0.5], 0.4, 1.0, 0.5).is_err());
        assert!(project_capped_simplex(&[0.1], -1.0).is_err());
        assert!(project_box_budget(&[f64::NAN], 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn empty_input_projects_to_empty() {
        let p = project_capped_simplex(&[], 3.0).unwrap();
        assert!(p.is_empty());
    }
}
