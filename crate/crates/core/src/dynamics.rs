//! Opinion dynamics: model definitions, algebraic steady states, and a
//! Runge-Kutta reference integrator.
//!
//! Two linear models over a weighted graph `g` with Laplacian `L`:
//!
//! * **FD (leader-led)**: two leader vertices are pinned to opinions 0 and 1;
//!   every follower relaxes by weighted neighbor averaging,
//!   `x' = -Lx` restricted to followers. The steady state solves
//!   `L_FF x_F = -L_FS x_S` with the leader block fixed.
//! * **FJ (stubborn-agent)**: every vertex has a stubbornness `kappa_v > 0`
//!   and an internal preference `beta_v in [0, 1]`;
//!   `x' = -(L + K)x + K beta` with `K = diag(kappa)`. The steady state
//!   solves `(L + K) x = K beta`.
//!
//! The integrator is classical RK4 with a conservative default step
//! `dt = 0.5 / max_diag`, where `max_diag` is the largest diagonal entry of
//! the relevant system matrix; steps beyond the linear-stability limit are
//! rejected with the maximum admissible value in the error message.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::laplacian::{laplacian_matrix, LaplacianKit};

/// RK4 is stable on `x' = -a x` for `a * dt` up to ~2.785; by Gershgorin the
/// spectrum of either system matrix is bounded by twice its largest diagonal
/// entry, so `dt <= 2.785 / (2 * max_diag)` is admissible.
const RK4_STABILITY_INTERVAL: f64 = 2.785;

/// Leader-led model: two distinguished vertices pinned to opinions 0 and 1.
#[derive(Debug, Clone)]
pub struct FdModel {
    graph: WeightedGraph,
    s0: usize,
    s1: usize,
}

impl FdModel {
    /// Requires a connected graph and two distinct in-range leaders.
    pub fn new(graph: WeightedGraph, s0: usize, s1: usize) -> Result<Self> {
        let n = graph.node_count();
        if s0 >= n || s1 >= n {
            return Err(Error::Domain(format!(
                "leader pair ({s0}, {s1}) out of range for {n} vertices"
            )));
        }
        if s0 == s1 {
            return Err(Error::Domain("leaders must differ".to_string()));
        }
        if !graph.is_connected() {
            return Err(Error::Disconnected(
                "the leader-led model requires a connected graph".to_string(),
            ));
        }
        Ok(FdModel { graph, s0, s1 })
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    /// Leader pinned at opinion 0.
    pub fn s0(&self) -> usize {
        self.s0
    }

    /// Leader pinned at opinion 1.
    pub fn s1(&self) -> usize {
        self.s1
    }
}

/// Stubborn-agent model: per-vertex stubbornness and internal preference.
#[derive(Debug, Clone)]
pub struct FjModel {
    graph: WeightedGraph,
    kappa: DVector<f64>,
    beta: DVector<f64>,
}

/// Validate stubbornness/preference vectors against a graph's node count.
pub(crate) fn validate_kappa_beta(
    g: &WeightedGraph,
    kappa: &[f64],
    beta: &[f64],
) -> Result<(DVector<f64>, DVector<f64>)> {
    let n = g.node_count();
    if kappa.len() != n {
        return Err(Error::Dimension {
            what: "stubbornness vector",
            expected: n,
            got: kappa.len(),
        });
    }
    if beta.len() != n {
        return Err(Error::Dimension {
            what: "preference vector",
            expected: n,
            got: beta.len(),
        });
    }
    for (v, &k) in kappa.iter().enumerate() {
        if !k.is_finite() || k <= 0.0 {
            return Err(Error::Domain(format!(
                "stubbornness must be positive and finite; vertex {v} has {k}"
            )));
        }
    }
    for (v, &b) in beta.iter().enumerate() {
        if !b.is_finite() || !(0.0..=1.0).contains(&b) {
            return Err(Error::Domain(format!(
                "preferences must lie in [0, 1]; vertex {v} has {b}"
            )));
        }
    }
    Ok((
        DVector::from_column_slice(kappa),
        DVector::from_column_slice(beta),
    ))
}

impl FjModel {
    /// Requires `kappa > 0` elementwise and `beta in [0, 1]` elementwise,
    /// both of length `n`. Connectivity is not required: the system matrix
    /// `L + K` is positive definite for any graph.
    pub fn new(graph: WeightedGraph, kappa: &[f64], beta: &[f64]) -> Result<Self> {
        let (kappa, beta) = validate_kappa_beta(&graph, kappa, beta)?;
        Ok(FjModel { graph, kappa, beta })
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn kappa(&self) -> &DVector<f64> {
        &self.kappa
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }
}

/// Equilibrium opinion vector of either model.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub opinions: DVector<f64>,
}

impl SteadyState {
    pub fn as_slice(&self) -> &[f64] {
        self.opinions.as_slice()
    }
}

/// A simulated trajectory: `states[i]` is the opinion vector at `times[i]`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
}

impl Trajectory {
    pub fn final_state(&self) -> &DVector<f64> {
        self.states.last().expect("trajectory has at least x0")
    }
}

// ---- steady states ----

/// FD steady state by the partitioned (grounded) linear solve.
pub fn fd_steady_state(m: &FdModel) -> Result<SteadyState> {
    let g = m.graph();
    let n = g.node_count();
    let followers: Vec<usize> = (0..n).filter(|&v| v != m.s0() && v != m.s1()).collect();
    let nf = followers.len();
    let mut x = DVector::zeros(n);
    x[m.s1()] = 1.0;
    if nf > 0 {
        let lap = laplacian_matrix(g);
        let mut lff = DMatrix::zeros(nf, nf);
        for (i, &u) in followers.iter().enumerate() {
            for (j, &v) in followers.iter().enumerate() {
                lff[(i, j)] = lap[(u, v)];
            }
        }
        // Right-hand side -L_{F,s1} * 1 = +w(v, s1).
        let rhs = DVector::from_iterator(
            nf,
            followers.iter().map(|&v| g.weight(v, m.s1()).unwrap_or(0.0)),
        );
        let chol = Cholesky::new(lff).ok_or_else(|| {
            Error::Numerical("follower block of the Laplacian is not positive definite".to_string())
        })?;
        let xf = chol.solve(&rhs);
        for (i, &v) in followers.iter().enumerate() {
            x[v] = xf[i];
        }
    }
    Ok(SteadyState { opinions: x })
}

/// FD steady state from the Laplacian pseudoinverse:
/// `x = (v - v[s0] * 1) / r(s0, s1)` where `v = L+ (e_{s1} - e_{s0})`.
/// Agrees with [`fd_steady_state`] up to rounding; useful when many leader
/// pairs are scored against one precomputed [`LaplacianKit`].
pub fn fd_steady_state_closed(kit: &LaplacianKit, s0: usize, s1: usize) -> Result<SteadyState> {
    if s0 == s1 {
        return Err(Error::Domain("leaders must differ".to_string()));
    }
    let v = kit.voltage_vector(s1, s0)?;
    let r = v[s1] - v[s0];
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Numerical(format!(
            "effective resistance between {s0} and {s1} is not positive (graph disconnected?)"
        )));
    }
    let shift = v[s0];
    let x = v.map(|vi| (vi - shift) / r);
    Ok(SteadyState { opinions: x })
}

/// Cholesky factorization of the FJ system matrix `L + diag(kappa)`.
pub(crate) fn fj_system_cholesky(
    g: &WeightedGraph,
    kappa: &DVector<f64>,
) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    let mut a = laplacian_matrix(g);
    for v in 0..a.nrows() {
        a[(v, v)] += kappa[v];
    }
    Cholesky::new(a).ok_or_else(|| {
        Error::Numerical("stubborn-agent system matrix is not positive definite".to_string())
    })
}

/// FJ steady state: solve `(L + K) x = K beta`.
pub fn fj_steady_state(m: &FjModel) -> Result<SteadyState> {
    let chol = fj_system_cholesky(m.graph(), m.kappa())?;
    let rhs = m.kappa().component_mul(m.beta());
    Ok(SteadyState {
        opinions: chol.solve(&rhs),
    })
}

// ---- simulation ----

fn check_x0(n: usize, x0: &[f64]) -> Result<()> {
    if x0.len() != n {
        return Err(Error::Dimension {
            what: "initial state",
            expected: n,
            got: x0.len(),
        });
    }
    if let Some(bad) = x0.iter().find(|v| !v.is_finite()) {
        return Err(Error::Domain(format!(
            "initial state contains a non-finite value {bad}"
        )));
    }
    Ok(())
}

fn resolve_step(dt: Option<f64>, max_diag: f64, horizon: f64) -> Result<(f64, usize)> {
    if !horizon.is_finite() || horizon < 0.0 {
        return Err(Error::Domain(format!(
            "horizon must be finite and non-negative, got {horizon}"
        )));
    }
    let default_dt = if max_diag > 0.0 {
        0.5 / max_diag
    } else {
        // Static system (no coupling): any positive step is exact.
        1.0
    };
    let dt = dt.unwrap_or(default_dt);
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::Domain(format!(
            "time step must be positive and finite, got {dt}"
        )));
    }
    if max_diag > 0.0 {
        let dt_max = RK4_STABILITY_INTERVAL / (2.0 * max_diag);
        if dt > dt_max {
            return Err(Error::Domain(format!(
                "time step {dt} exceeds the stability limit; maximum admissible dt = {dt_max}"
            )));
        }
    }
    if horizon == 0.0 {
        return Ok((dt, 0));
    }
    let steps = (horizon / dt).ceil().max(1.0) as usize;
    // Uniform steps that land exactly on the horizon (shrinks dt slightly).
    Ok((horizon / steps as f64, steps))
}

fn rk4<F: Fn(&DVector<f64>) -> DVector<f64>>(
    f: F,
    x0: DVector<f64>,
    dt: f64,
    steps: usize,
) -> Trajectory {
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(x0.clone());
    let mut x = x0;
    for step in 1..=steps {
        let k1 = f(&x);
        let k2 = f(&(&x + &k1 * (dt / 2.0)));
        let k3 = f(&(&x + &k2 * (dt / 2.0)));
        let k4 = f(&(&x + &k3 * dt));
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        times.push(step as f64 * dt);
        states.push(x.clone());
    }
    Trajectory { times, states }
}

/// Integrate the FD model from `x0` (default: leaders at 0/1, followers at
/// 1/2) over `[0, horizon]`. Leader coordinates are held constant at their
/// initial values.
pub fn simulate_fd(
    m: &FdModel,
    x0: Option<&[f64]>,
    dt: Option<f64>,
    horizon: f64,
) -> Result<Trajectory> {
    let g = m.graph();
    let n = g.node_count();
    let start = match x0 {
        Some(x) => {
            check_x0(n, x)?;
            DVector::from_column_slice(x)
        }
        None => {
            let mut x = DVector::from_element(n, 0.5);
            x[m.s0()] = 0.0;
            x[m.s1()] = 1.0;
            x
        }
    };
    let max_diag = (0..n)
        .filter(|&v| v != m.s0() && v != m.s1())
        .map(|v| g.weighted_degree(v))
        .fold(0.0, f64::max);
    let (dt, steps) = resolve_step(dt, max_diag, horizon)?;
    let (s0, s1) = (m.s0(), m.s1());
    let deriv = |x: &DVector<f64>| {
        let mut dx = DVector::zeros(n);
        for v in 0..n {
            if v == s0 || v == s1 {
                continue;
            }
            let mut acc = 0.0;
            for &(u, w) in g.neighbors(v) {
                acc += w * (x[u] - x[v]);
            }
            dx[v] = acc;
        }
        dx
    };
    Ok(rk4(deriv, start, dt, steps))
}

/// Integrate the FJ model from `x0` (default: all vertices at 1/2) over
/// `[0, horizon]`.
pub fn simulate_fj(
    m: &FjModel,
    x0: Option<&[f64]>,
    dt: Option<f64>,
    horizon: f64,
) -> Result<Trajectory> {
    let g = m.graph();
    let n = g.node_count();
    let start = match x0 {
        Some(x) => {
            check_x0(n, x)?;
            DVector::from_column_slice(x)
        }
        None => DVector::from_element(n, 0.5),
    };
    let max_diag = (0..n)
        .map(|v| g.weighted_degree(v) + m.kappa()[v])
        .fold(0.0, f64::max);
    let (dt, steps) = resolve_step(dt, max_diag, horizon)?;
    let kappa = m.kappa().clone();
    let source = m.kappa().component_mul(m.beta());
    let deriv = |x: &DVector<f64>| {
        let mut dx = DVector::zeros(n);
        for v in 0..n {
            let mut acc = 0.0;
            for &(u, w) in g.neighbors(v) {
                acc += w * (x[u] - x[v]);
            }
            dx[v] = acc - kappa[v] * x[v] + source[v];
        }
        dx
    };
    Ok(rk4(deriv, start, dt, steps))
}
