//! Solvers for the stubborn-agent model: convex edge-weight design and
//! preference flipping (an ℓ1-regularized relaxation, a budgeted variant,
//! a random baseline, and a brute-force oracle).
//!
//! Everything here minimizes the balanced steady-state index
//! `I(rho) = rho * D + (1 - rho) * P~`. With `M = L + K`,
//! `R = rho * L + (1 - rho) * K` and the centered source `s~`, the index is
//! the quadratic form `s~' M^-1 R M^-1 s~`:
//!
//! * as a function of the edge weights at `rho = 1/2` it is `1/2 s~' M^-1 s~`,
//!   a matrix-convex expression minimized by projected gradient descent with
//!   an Armijo backtracking line search;
//! * as a function of the relaxed flip vector `d` it is convex for every
//!   `rho` in [0,1] because `s~` is affine in `d`, and is minimized by
//!   proximal gradient steps with a monotone safeguard.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::{fj_system_cholesky, validate_kappa_beta};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::indices::check_rho;
use crate::projection::{project_box_budget, project_capped_simplex};

/// Relaxed flip entries above this value are rounded to a full flip.
pub const ROUND_THRESHOLD: f64 = 1e-6;
/// Armijo sufficient-decrease constant for the weight designer.
const ARMIJO_C1: f64 = 1e-4;
/// Maximum step halvings inside one line search.
const MAX_HALVINGS: usize = 60;
/// Subset-count guard for the exhaustive oracle.
const ORACLE_GUARD: u128 = 1_000_000;
/// Default regularization sweep for the flip experiment.
pub const DEFAULT_LAMBDA_LO: f64 = 0.45;
pub const DEFAULT_LAMBDA_HI: f64 = 1.0;
pub const DEFAULT_LAMBDA_POINTS: usize = 12;

/// Iteration caps and tolerances for the iterative designers.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Stopping tolerance; `None` selects the method default
    /// (projected-gradient norm 1e-7 for the weight designer,
    /// iterate change 1e-9 for the flip solvers).
    pub tolerance: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            tolerance: None,
        }
    }
}

// ---- shared quadratic machinery ----

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Apply the Laplacian of `g` to a vector.
fn apply_laplacian(g: &WeightedGraph, y: &DVector<f64>) -> DVector<f64> {
    let n = g.node_count();
    let mut out = DVector::zeros(n);
    for i in 0..n {
        let mut acc = 0.0;
        for &(j, w) in g.neighbors(i) {
            acc += w * (y[i] - y[j]);
        }
        out[i] = acc;
    }
    out
}

/// Fixed-topology evaluator for the index as a quadratic form in the
/// centered source, with the system matrix factored once.
struct FjQuadratic<'g> {
    g: &'g WeightedGraph,
    kappa: Vec<f64>,
    kappa_sum: f64,
    chol: Cholesky<f64, Dyn>,
    rho: f64,
}

impl<'g> FjQuadratic<'g> {
    fn new(g: &'g WeightedGraph, kappa: &[f64], rho: f64) -> Result<Self> {
        check_rho(rho)?;
        let zeros = vec![0.0; g.node_count()];
        let (kappa_vec, _) = validate_kappa_beta(g, kappa, &zeros)?;
        let chol = fj_system_cholesky(g, &kappa_vec)?;
        Ok(Self {
            g,
            kappa: kappa.to_vec(),
            kappa_sum: kappa.iter().sum(),
            chol,
            rho,
        })
    }

    /// Centered source: `kappa .* theta` minus its kappa-weighted mean
    /// redistributed along `kappa`.
    fn centered_source(&self, theta: &[f64]) -> DVector<f64> {
        let weighted: f64 = self
            .kappa
            .iter()
            .zip(theta)
            .map(|(&k, &t)| k * t)
            .sum();
        let mean = weighted / self.kappa_sum;
        DVector::from_iterator(
            theta.len(),
            self.kappa.iter().zip(theta).map(|(&k, &t)| k * (t - mean)),
        )
    }

    fn centered_state(&self, theta: &[f64]) -> DVector<f64> {
        self.chol.solve(&self.centered_source(theta))
    }

    /// `rho * y'Ly + (1 - rho) * y'Ky` for the centered state of `theta`.
    fn index_of_theta(&self, theta: &[f64]) -> f64 {
        let y = self.centered_state(theta);
        self.index_of_state(&y)
    }

    fn index_of_state(&self, y: &DVector<f64>) -> f64 {
        let ly = apply_laplacian(self.g, y);
        let disagreement = y.dot(&ly);
        let stubborn: f64 = self
            .kappa
            .iter()
            .zip(y.iter())
            .map(|(&k, &v)| k * v * v)
            .sum();
        self.rho * disagreement + (1.0 - self.rho) * stubborn
    }
}

// ---- flip parametrization ----

/// `theta_i = beta_i + 2 d_i (1/2 - beta_i)`: `d_i = 0` keeps the
/// preference, `d_i = 1` mirrors it across 1/2.
fn theta_of_d(beta: &[f64], d: &[f64]) -> Vec<f64> {
    beta.iter()
        .zip(d)
        .map(|(&b, &di)| b + 2.0 * di * (0.5 - b))
        .collect()
}

fn theta_of_set(beta: &[f64], flipped: &[usize]) -> Vec<f64> {
    let mut theta = beta.to_vec();
    for &i in flipped {
        theta[i] = 1.0 - beta[i];
    }
    theta
}

struct FlipMachine<'g> {
    quad: FjQuadratic<'g>,
    beta: Vec<f64>,
    /// Half-gap to the neutral preference: `p_i = 1/2 - beta_i`.
    p: Vec<f64>,
}

impl<'g> FlipMachine<'g> {
    fn new(g: &'g WeightedGraph, kappa: &[f64], beta: &[f64], rho: f64) -> Result<Self> {
        validate_kappa_beta(g, kappa, beta)?;
        let quad = FjQuadratic::new(g, kappa, rho)?;
        let p = beta.iter().map(|&b| 0.5 - b).collect();
        Ok(Self {
            quad,
            beta: beta.to_vec(),
            p,
        })
    }

    fn objective(&self, d: &[f64]) -> f64 {
        self.quad.index_of_theta(&theta_of_d(&self.beta, d))
    }

    /// Gradient of the index with respect to `d`. With the centered state
    /// `y` of `theta(d)` and `z = M^-1 (rho L + (1-rho) K) y`, the chain
    /// rule gives `grad_i = 4 p_i kappa_i (z_i - <kappa, z>/sum kappa)`.
    fn gradient(&self, d: &[f64]) -> Vec<f64> {
        let theta = theta_of_d(&self.beta, d);
        let y = self.quad.centered_state(&theta);
        let ly = apply_laplacian(self.quad.g, &y);
        let ry = DVector::from_iterator(
            y.len(),
            self.quad
                .kappa
                .iter()
                .zip(y.iter().zip(ly.iter()))
                .map(|(&k, (&yi, &lyi))| self.quad.rho * lyi + (1.0 - self.quad.rho) * k * yi),
        );
        let z = self.quad.chol.solve(&ry);
        let z_mean =
            self.quad.kappa.iter().zip(z.iter()).map(|(&k, &v)| k * v).sum::<f64>()
                / self.quad.kappa_sum;
        self.p
            .iter()
            .zip(self.quad.kappa.iter().zip(z.iter()))
            .map(|(&pi, (&ki, &zi))| 4.0 * pi * ki * (zi - z_mean))
            .collect()
    }

    /// Lipschitz constant of the gradient: twice the largest eigenvalue of
    /// the quadratic-form Hessian `A' M^-1 R M^-1 A` where `A` maps `d` to
    /// the centered source.
    fn gradient_lipschitz(&self) -> Result<f64> {
        let n = self.beta.len();
        let mut a = DMatrix::zeros(n, n);
        for j in 0..n {
            let col_scale = 2.0 * self.p[j];
            let kj = self.quad.kappa[j];
            for i in 0..n {
                let delta = if i == j { 1.0 } else { 0.0 };
                a[(i, j)] =
                    col_scale * self.quad.kappa[i] * (delta - kj / self.quad.kappa_sum);
            }
        }
        let b = self.quad.chol.solve(&a);
        let lap = crate::laplacian::laplacian_matrix(self.quad.g);
        let mut rb = &lap * &b;
        rb *= self.quad.rho;
        for j in 0..n {
            for i in 0..n {
                rb[(i, j)] += (1.0 - self.quad.rho) * self.quad.kappa[i] * b[(i, j)];
            }
        }
        let hessian = b.transpose() * rb;
        let sym = (&hessian + hessian.transpose()) * 0.5;
        let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 0).ok_or_else(|| {
            Error::Numerical("flip Hessian eigendecomposition failed".to_string())
        })?;
        Ok(2.0 * eig.eigenvalues.iter().fold(0.0f64, |acc, &v| acc.max(v)))
    }
}

// ---- public evaluation helpers (also power the verification suites) ----

/// Steady-state index `I(rho)` for preferences `beta` as given.
pub fn preference_index(
    g: &WeightedGraph,
    kappa: &[f64],
    beta: &[f64],
    rho: f64,
) -> Result<f64> {
    validate_kappa_beta(g, kappa, beta)?;
    let quad = FjQuadratic::new(g, kappa, rho)?;
    Ok(quad.index_of_theta(beta))
}

/// Index after applying the relaxed flip vector `d` to `beta`.
pub fn flip_objective(
    g: &WeightedGraph,
    kappa: &[f64],
    beta: &[f64],
    rho: f64,
    d: &[f64],
) -> Result<f64> {
    let machine = FlipMachine::new(g, kappa, beta, rho)?;
    check_flip_vector(d, beta.len())?;
    Ok(machine.objective(d))
}

/// Analytic gradient of [`flip_objective`] with respect to `d`.
pub fn flip_gradient(
    g: &WeightedGraph,
    kappa: &[f64],
    beta: &[f64],
    rho: f64,
    d: &[f64],
) -> Result<Vec<f64>> {
    let machine = FlipMachine::new(g, kappa, beta, rho)?;
    check_flip_vector(d, beta.len())?;
    Ok(machine.gradient(d))
}

fn check_flip_vector(d: &[f64], n: usize) -> Result<()> {
    if d.len() != n {
        return Err(Error::Dimension {
            what: "flip vector",
            expected: n,
            got: d.len(),
        });
    }
    if d.iter().any(|&v| !v.is_finite() || !(0.0..=1.0).contains(&v)) {
        return Err(Error::Domain(
            "flip vector entries must lie in [0, 1]".to_string(),
        ));
    }
    Ok(())
}

/// Balanced index `1/2 s~' (L(w) + K)^-1 s~` for explicit edge weights on
/// the topology of `g` (weights aligned with `g.edges()`, zeros allowed).
pub fn weighted_index(
    g: &WeightedGraph,
    kappa: &[f64],
    beta: &[f64],
    weights: &[f64],
) -> Result<f64> {
    let (f, _) = weighted_index_state(g, kappa, beta, weights)?;
    Ok(f)
}

/// Analytic gradient of [`weighted_index`] with respect to the weights:
/// `-1/2 (y_u - y_v)^2` per edge, where `y` solves `(L(w) + K) y = s~`.
pub fn weight_gradient(
    g: &WeightedGraph,
    kappa: &[f64],
    beta: &[f64],
    weights: &[f64],
) -> Result<Vec<f64>> {
    let (_, y) = weighted_index_state(g, kappa, beta, weights)?;
    Ok(edge_gradient(g, &y))
}

fn edge_gradient(g: &WeightedGraph, y: &DVector<f64>) -> Vec<f64> {
    g.edges()
        .iter()
        .map(|e| {
            let diff = y[e.u] - y[e.v];
            -0.5 * diff * diff
        })
        .collect()
}

fn weighted_index_state(
    g: &WeightedGraph,
    kappa: &[f64],
    beta: &[f64],
    weights: &[f64],
) -> Result<(f64, DVector<f64>)> {
    validate_kappa_beta(g, kappa, beta)?;
    let m = g.edge_count();
    if weights.len() != m {
        return Err(Error::Dimension {
            what: "edge weight vector",
            expected: m,
            got: weights.len(),
        });
    }
    if weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
        return Err(Error::Domain(
            "edge weights must be non-negative and finite".to_string(),
        ));
    }
    let n = g.node_count();
    let mut system = DMatrix::zeros(n, n);
    for (e, &w) in g.edges().iter().zip(weights) {
        system[(e.u, e.u)] += w;
        system[(e.v, e.v)] += w;
        system[(e.u, e.v)] -= w;
        system[(e.v, e.u)] -= w;
    }
    for (i, &k) in kappa.iter().enumerate() {
        system[(i, i)] += k;
    }
    let chol = Cholesky::new(system).ok_or_else(|| {
        Error::Numerical("stubbornness-augmented system is not positive definite".to_string())
    })?;
    let kappa_sum: f64 = kappa.iter().sum();
    let weighted: f64 = kappa.iter().zip(beta).map(|(&k, &b)| k * b).sum();
    let mean = weighted / kappa_sum;
    let source = DVector::from_iterator(
        n,
        kappa.iter().zip(beta).map(|(&k, &b)| k * (b - mean)),
    );
    let y = chol.solve(&source);
    Ok((0.5 * source.dot(&y), y))
}

// ---- edge-weight design ----

/// Result of the convex edge-weight design.
#[derive(Debug, Clone, Serialize)]
pub struct WeightDesign {
    /// Optimized weights, aligned with the input graph's edge order.
    pub weights: Vec<f64>,
    /// Balanced index at the optimized weights.
    pub objective: f64,
    /// Balanced index at the feasible starting point.
    pub objective_start: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Norm of the projected-gradient residual at the returned point.
    pub projected_gradient_norm: f64,
}

/// Minimize the balanced index over edge weights in `[lower, upper]` with
/// total weight at most `budget`, on the fixed topology of `g`.
///
/// The balanced index (the `rho = 1/2` case, where the objective is matrix
/// convex in the weights) is the only index this designer targets.
/// Projected gradient descent with an Armijo backtracking line search from
/// the feasible point `clamp(budget / m)`; stops when the
/// projected-gradient norm drops below the tolerance (default 1e-7).
pub fn optimize_weights(
    g: &WeightedGraph,
    kappa: &[f64],
    beta: &[f64],
    lower: f64,
    upper: f64,
    budget: f64,
    options: SolverOptions,
) -> Result<WeightDesign> {
    if !(lower.is_finite() && upper.is_finite() && budget.is_finite()) {
        return Err(Error::Domain(
            "weight bounds and budget must be finite".to_string(),
        ));
    }
    if lower < 0.0 {
        return Err(Error::Domain(format!(
            "lower weight bound must be non-negative, got {lower}"
        )));
    }
    if lower > upper {
        return Err(Error::Infeasible(format!(
            "empty weight box: lower {lower} > upper {upper}"
        )));
    }
    let m = g.edge_count();
    if (m as f64) * lower > budget + 1e-12 {
        return Err(Error::Infeasible(format!(
            "minimum total weight {} exceeds the budget {budget}",
            m as f64 * lower
        )));
    }
    let tol = options.tolerance.unwrap_or(1e-7);

    let start = (budget / m.max(1) as f64).clamp(lower, upper);
    let mut w = vec![start; m];
    let (mut f, mut y) = weighted_index_state(g, kappa, beta, &w)?;
    let objective_start = f;

    let project = |x: &[f64]| project_box_budget(x, lower, upper, budget);
    let residual = |w: &[f64], grad: &[f64]| -> Result<f64> {
        let shifted: Vec<f64> = w.iter().zip(grad).map(|(&wi, &gi)| wi - gi).collect();
        let proj = project(&shifted)?;
        Ok(norm2(
            &proj.iter().zip(w).map(|(&p, &wi)| p - wi).collect::<Vec<_>>(),
        ))
    };

    let mut t_prev = 1.0f64;
    let mut iterations = 0;
    let mut converged = false;
    for _ in 0..options.max_iterations {
        let grad = edge_gradient(g, &y);
        if residual(&w, &grad)? <= tol {
            converged = true;
            break;
        }
        let mut t = (2.0 * t_prev).min(1e8);
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let shifted: Vec<f64> = w.iter().zip(&grad).map(|(&wi, &gi)| wi - t * gi).collect();
            let cand = project(&shifted)?;
            let delta: Vec<f64> = cand.iter().zip(&w).map(|(&c, &wi)| c - wi).collect();
            let step_norm = norm2(&delta);
            if step_norm <= 1e-16 {
                converged = true;
                break;
            }
            let lin = dot(&grad, &delta);
            let (fc, yc) = weighted_index_state(g, kappa, beta, &cand)?;
            if fc <= f + ARMIJO_C1 * lin {
                w = cand;
                f = fc;
                y = yc;
                t_prev = t;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        iterations += 1;
        if !accepted {
            break;
        }
    }
    let grad = edge_gradient(g, &y);
    let projected_gradient_norm = residual(&w, &grad)?;
    Ok(WeightDesign {
        weights: w,
        objective: f,
        objective_start,
        iterations,
        converged: converged || projected_gradient_norm <= tol,
        projected_gradient_norm,
    })
}

// ---- preference flipping ----

/// A flip recommendation: the relaxed selection, the rounded set, and the
/// indices before and after.
#[derive(Debug, Clone, Serialize)]
pub struct FlipPlan {
    /// Relaxed per-node flip intensity in `[0, 1]`.
    pub d: Vec<f64>,
    /// Rounded flip set, ascending node ids.
    pub flipped: Vec<usize>,
    /// Preferences after applying the rounded flips.
    pub theta: Vec<f64>,
    pub objective_before: f64,
    /// Index at the relaxed optimum (before rounding).
    pub objective_relaxed: f64,
    /// Index after the rounded flips.
    pub objective_after: f64,
    pub rho: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub iterations: usize,
    pub converged: bool,
}

enum FlipConstraint {
    L1 { lambda: f64 },
    Budget { k: usize },
}

/// Shared proximal/projected gradient loop with a monotone safeguard.
fn solve_flip(
    machine: &FlipMachine<'_>,
    constraint: &FlipConstraint,
    options: SolverOptions,
) -> Result<(Vec<f64>, usize, bool)> {
    let n = machine.beta.len();
    let tol = options.tolerance.unwrap_or(1e-9);
    let lip = machine.gradient_lipschitz()?;
    let t0 = if lip > 0.0 { 1.0 / lip } else { 1.0 };

    let composite = |d: &[f64]| -> f64 {
        let base = machine.objective(d);
        match constraint {
            FlipConstraint::L1 { lambda } => base + lambda * d.iter().sum::<f64>(),
            FlipConstraint::Budget { .. } => base,
        }
    };
    let step = |d: &[f64], grad: &[f64], t: f64| -> Result<Vec<f64>> {
        match constraint {
            FlipConstraint::L1 { lambda } => Ok(d
                .iter()
                .zip(grad)
                .map(|(&di, &gi)| (di - t * gi - t * lambda).clamp(0.0, 1.0))
                .collect()),
            FlipConstraint::Budget { k } => {
                let shifted: Vec<f64> =
                    d.iter().zip(grad).map(|(&di, &gi)| di - t * gi).collect();
                project_capped_simplex(&shifted, *k as f64)
            }
        }
    };

    let mut d = vec![0.0; n];
    let mut value = composite(&d);
    let mut iterations = 0;
    let mut converged = false;
    for _ in 0..options.max_iterations {
        let grad = machine.gradient(&d);
        let mut t = t0;
        let mut accepted: Option<(Vec<f64>, f64, f64)> = None;
        for _ in 0..MAX_HALVINGS {
            let cand = step(&d, &grad, t)?;
            let cand_value = composite(&cand);
            if cand_value <= value + 1e-14 * (1.0 + value.abs()) {
                let change = cand
                    .iter()
                    .zip(&d)
                    .map(|(&c, &p)| (c - p) * (c - p))
                    .sum::<f64>()
                    .sqrt();
                accepted = Some((cand, cand_value, change));
                break;
            }
            t *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((next, next_value, change)) => {
                d = next;
                value = next_value;
                if change <= tol {
                    converged = true;
                    break;
                }
            }
            None => {
                // No admissible step decreases the safeguarded objective:
                // the iterate is numerically stationary.
                converged = true;
                break;
            }
        }
    }
    Ok((d, iterations, converged))
}

#[allow(clippy::too_many_arguments)] // private FlipPlan assembler, one arg per field group
fn rounded_plan(
    machine: &FlipMachine<'_>,
    d: Vec<f64>,
    flipped: Vec<usize>,
    rho: f64,
    lambda: Option<f64>,
    k: Option<usize>,
    iterations: usize,
    converged: bool,
) -> FlipPlan {
    let objective_before = machine.quad.index_of_theta(&machine.beta);
    let objective_relaxed = machine.objective(&d);
    let theta = theta_of_set(&machine.beta, &flipped);
    let objective_after = machine.quad.index_of_theta(&theta);
    FlipPlan {
        d,
        flipped,
        theta,
        objective_before,
        objective_relaxed,
        objective_after,
        rho,
        lambda,
        k,
        iterations,
        converged,
    }
}

fn require_binary_beta(beta: &[f64]) -> Result<()> {
    if beta.iter().any(|&b| b != 0.0 && b != 1.0) {
        return Err(Error::Domain(
            "preference flipping requires binary preferences (every beta in {0, 1})".to_string(),
        ));
    }
    Ok(())
}

/// Solve the ℓ1-regularized flip relaxation
/// `min I(theta(d)) + lambda * sum(d)` over `d in [0,1]^n` by proximal
/// gradient (shrink by `t * lambda`, clip to the box), then round every
/// entry above [`ROUND_THRESHOLD`] to a full flip.
pub fn flip_preferences_l1(
    g: &WeightedGraph,
    kappa: &[f64],
    beta: &[f64],
    lambda: f64,
    rho: f64,
    options: SolverOptions,
) -> Result<FlipPlan> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::Domain(format!(
            "regularization weight must be non-negative and finite, got {lambda}"
        )));
    }
    require_binary_beta(beta)?;
    let machine = FlipMachine::new(g, kappa, beta, rho)?;
    let (d, iterations, converged) =
        solve_flip(&machine, &FlipConstraint::L1 { lambda }, options)?;
    let flipped: Vec<usize> = d
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > ROUND_THRESHOLD)
        .map(|(i, _)| i)
        .collect();
    Ok(rounded_plan(
        &machine,
        d,
        flipped,
        rho,
        Some(lambda),
        None,
        iterations,
        converged,
    ))
}

/// Solve the budgeted flip relaxation `min I(theta(d))` over
/// `{d in [0,1]^n : sum(d) <= k}` by projected gradient, then flip the `k`
/// largest entries above [`ROUND_THRESHOLD`] (ties by smallest node id).
pub fn flip_preferences_budget(
    g: &WeightedGraph,
    kappa: &[f64],
    beta: &[f64],
    k: usize,
    rho: f64,
) -> Result<FlipPlan> {
    let n = g.node_count();
    if k > n {
        return Err(Error::Domain(format!(
            "flip budget {k} exceeds the node count {n}"
        )));
    }
    let machine = FlipMachine::new(g, kappa, beta, rho)?;
    let (d, iterations, converged) = solve_flip(
        &machine,
        &FlipConstraint::Budget { k },
        SolverOptions::default(),
    )?;
    let mut scored: Vec<(usize, f64)> = d
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > ROUND_THRESHOLD)
        .map(|(i, &v)| (i, v))
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut flipped: Vec<usize> = scored.into_iter().take(k).map(|(i, _)| i).collect();
    flipped.sort_unstable();
    Ok(rounded_plan(
        &machine,
        d,
        flipped,
        rho,
        None,
        Some(k),
        iterations,
        converged,
    ))
}

// ---- baseline and oracle ----

/// Statistics of flipping `k` uniformly random nodes.
#[derive(Debug, Clone, Serialize)]
pub struct FlipBaseline {
    pub mean: f64,
    /// Population standard deviation over the trials.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub per_trial: Vec<f64>,
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
}

/// Flip `k` uniformly random distinct nodes, `trials` times, and report the
/// index statistics. Deterministic for a fixed seed.
pub fn random_flip_baseline(
    g: &WeightedGraph,
    kappa: &[f64],
    beta: &[f64],
    k: usize,
    rho: f64,
    trials: usize,
    seed: u64,
) -> Result<FlipBaseline> {
    let n = g.node_count();
    if k > n {
        return Err(Error::Domain(format!(
            "flip budget {k} exceeds the node count {n}"
        )));
    }
    if trials == 0 {
        return Err(Error::Domain("need at least one trial".to_string()));
    }
    validate_kappa_beta(g, kappa, beta)?;
    let quad = FjQuadratic::new(g, kappa, rho)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_trial = Vec::with_capacity(trials);
    for _ in 0..trials {
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = rng.gen_range(i..n);
            pool.swap(i, j);
        }
        let theta = theta_of_set(beta, &pool[..k]);
        per_trial.push(quad.index_of_theta(&theta));
    }
    let mean = per_trial.iter().sum::<f64>() / trials as f64;
    let variance =
        per_trial.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / trials as f64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in &per_trial {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok(FlipBaseline {
        mean,
        std: variance.sqrt(),
        min: lo,
        max: hi,
        per_trial,
        k,
        trials,
        seed,
    })
}

/// Globally optimal flip set found by exhaustion.
#[derive(Debug, Clone, Serialize)]
pub struct FlipOracle {
    pub best_set: Vec<usize>,
    pub best_objective: f64,
    /// Number of flip sets evaluated.
    pub evaluated: usize,
}

fn subsets_up_to(n: usize, k: usize) -> u128 {
    let mut total: u128 = 0;
    let mut choose: u128 = 1;
    for j in 0..=k.min(n) {
        if j > 0 {
            choose = choose.saturating_mul((n - j + 1) as u128) / j as u128;
        }
        total = total.saturating_add(choose);
        if total > ORACLE_GUARD {
            return total;
        }
    }
    total
}

fn for_each_combination(n: usize, size: usize, mut f: impl FnMut(&[usize])) {
    if size > n {
        return;
    }
    if size == 0 {
        f(&[]);
        return;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        f(&idx);
        let mut i = size;
        while i > 0 && idx[i - 1] == n - size + (i - 1) {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..size {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Evaluate every flip set of size at most `k` and return the best
/// (smallest index; ties go to the smaller set, then lexicographic order).
/// Guarded against instances with more than one million subsets.
pub fn exhaustive_flip_oracle(
    g: &WeightedGraph,
    kappa: &[f64],
    beta: &[f64],
    k: usize,
    rho: f64,
) -> Result<FlipOracle> {
    let n = g.node_count();
    if k > n {
        return Err(Error::Domain(format!(
            "flip budget {k} exceeds the node count {n}"
        )));
    }
    let total = subsets_up_to(n, k);
    if total > ORACLE_GUARD {
        return Err(Error::TooLarge(format!(
            "exhaustive flip search would evaluate {total} subsets, above the {ORACLE_GUARD} cap"
        )));
    }
    validate_kappa_beta(g, kappa, beta)?;
    let quad = FjQuadratic::new(g, kappa, rho)?;
    let mut best_set = Vec::new();
    let mut best_objective = quad.index_of_theta(beta);
    let mut evaluated = 1usize;
    for size in 1..=k {
        for_each_combination(n, size, |set| {
            evaluated += 1;
            let theta = theta_of_set(beta, set);
            let value = quad.index_of_theta(&theta);
            if value < best_objective {
                best_objective = value;
                best_set = set.to_vec();
            }
        });
    }
    Ok(FlipOracle {
        best_set,
        best_objective,
        evaluated,
    })
}

// ---- regularization sweep helper ----

/// Geometric grid of `points` values from `lo` to `hi` inclusive.
pub fn lambda_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite()) || lo <= 0.0 || hi < lo {
        return Err(Error::Domain(format!(
            "need 0 < lo <= hi and finite bounds, got [{lo}, {hi}]"
        )));
    }
    if points == 0 {
        return Err(Error::Domain("need at least one grid point".to_string()));
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    let ratio = hi / lo;
    Ok((0..points)
        .map(|i| lo * ratio.powf(i as f64 / (points - 1) as f64))
        .collect())
}
