//! Network design for the leader-led model: leader placement, structural
//! twin detection, and robust sparse topology design.
//!
//! * [`select_leader`] scores every candidate second leader against a fixed
//!   `s0` using the pseudoinverse closed forms and returns the minimizer of
//!   `I(rho) = rho * D + (1 - rho) * P`.
//! * [`detect_twins`] finds vertices whose neighborhoods (outside the pair)
//!   match `s0` exactly, for which the indices are known in advance:
//!   `D = h/2` and `P = 1/2`, where `h` is the twin's weighted degree plus
//!   the pair weight when the twins are adjacent (then `L b = h b` for the
//!   indicator difference `b` of the pair).
//! * [`design_robust_graph`] builds a sparse reweighted subgraph of the
//!   complete graph by uniform effective-resistance sampling (all resistances
//!   of K_n coincide), certifies it spectrally against K_n, and enforces an
//!   edge-count cap and a total-weight budget. A certified factor
//!   `(1 + eps)` caps every leader pair's polarization at
//!   `(1 + eps)^2 / 2`.

use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{DedupePolicy, WeightedGraph};
use crate::indices::{check_rho, fd_disagreement_closed, fd_polarization_closed};
use crate::laplacian::{laplacian_matrix, LaplacianKit, EIGENVALUE_ZERO_CUTOFF};

/// Oversampling constant for the sparsifier sample count
/// `q = ceil(C * n * ln n / eps^2)`.
const SPARSIFIER_OVERSAMPLE: f64 = 4.0;
/// Attempt cap for the doubling retry loop.
const SPARSIFIER_MAX_ATTEMPTS: usize = 8;
/// Above this vertex count the worst-pair scan samples pairs instead of
/// enumerating all of them.
const EXHAUSTIVE_PAIR_LIMIT: usize = 200;
const SAMPLED_PAIR_COUNT: usize = 1000;

// ---- leader selection ----

/// Score of one candidate second leader.
#[derive(Debug, Clone, Serialize)]
pub struct CandidateScore {
    pub candidate: usize,
    pub disagreement: f64,
    pub polarization: f64,
    pub index: f64,
}

/// Result of a leader-placement scan.
#[derive(Debug, Clone, Serialize)]
pub struct LeaderChoice {
    pub s0: usize,
    pub rho: f64,
    /// Minimizer of the index (ties broken by smallest id).
    pub s1: usize,
    pub index: f64,
    pub per_candidate: Vec<CandidateScore>,
}

/// Choose the second leader minimizing `I(rho)` against a fixed `s0`.
pub fn select_leader(g: &WeightedGraph, s0: usize, rho: f64) -> Result<LeaderChoice> {
    check_rho(rho)?;
    let n = g.node_count();
    if s0 >= n {
        return Err(Error::Domain(format!(
            "vertex {s0} out of range for {n} vertices"
        )));
    }
    if n < 2 {
        return Err(Error::Domain(
            "leader selection needs at least two vertices".to_string(),
        ));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected(
            "leader selection requires a connected graph".to_string(),
        ));
    }
    let kit = LaplacianKit::new(g)?;
    let candidates: Vec<usize> = (0..n).filter(|&v| v != s0).collect();
    let per_candidate: Vec<CandidateScore> = candidates
        .par_iter()
        .map(|&v| {
            let d = fd_disagreement_closed(&kit, s0, v)?;
            let p = fd_polarization_closed(&kit, s0, v)?;
            Ok(CandidateScore {
                candidate: v,
                disagreement: d,
                polarization: p,
                index: rho * d + (1.0 - rho) * p,
            })
        })
        .collect::<Result<_>>()?;
    let best = per_candidate
        .iter()
        .min_by(|a, b| {
            a.index
                .partial_cmp(&b.index)
                .unwrap()
                .then(a.candidate.cmp(&b.candidate))
        })
        .expect("at least one candidate");
    Ok(LeaderChoice {
        s0,
        rho,
        s1: best.candidate,
        index: best.index,
        per_candidate,
    })
}

// ---- structural twins ----

/// A vertex forming a structural twin pair with the fixed leader.
#[derive(Debug, Clone, Serialize)]
pub struct TwinReport {
    pub node: usize,
    /// Eigen-factor of the pair indicator: `L b = h b`.
    pub h: f64,
    /// Known disagreement `h / 2` if this vertex is chosen as `s1`.
    pub predicted_disagreement: f64,
    /// Known polarization `1/2`.
    pub predicted_polarization: f64,
}

/// Find all vertices `v` whose neighborhood outside `{s0, v}` equals the
/// neighborhood of `s0` outside the pair, with exactly equal weights.
/// For such pairs the steady state is two-valued and the indices are known
/// in closed form without any linear solve.
pub fn detect_twins(g: &WeightedGraph, s0: usize) -> Result<Vec<TwinReport>> {
    let n = g.node_count();
    if s0 >= n {
        return Err(Error::Domain(format!(
            "vertex {s0} out of range for {n} vertices"
        )));
    }
    let mut out = Vec::new();
    for v in 0..n {
        if v == s0 {
            continue;
        }
        let side_v: Vec<(usize, f64)> = g
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&(u, _)| u != s0)
            .collect();
        let side_s0: Vec<(usize, f64)> = g
            .neighbors(s0)
            .iter()
            .copied()
            .filter(|&(u, _)| u != v)
            .collect();
        if side_v == side_s0 {
            let h = g.weighted_degree(v) + g.weight(v, s0).unwrap_or(0.0);
            out.push(TwinReport {
                node: v,
                h,
                predicted_disagreement: h / 2.0,
                predicted_polarization: 0.5,
            });
        }
    }
    Ok(out)
}

// ---- spectral certification ----

/// Outcome of certifying a candidate graph against the complete graph.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralCheck {
    /// Whether `L_C <= c L_H <= c (1 + eps) L_C` holds on the complement of
    /// the all-ones vector for some scale `c > 0`.
    pub holds: bool,
    pub connected: bool,
    /// `lambda_max / lambda_min - 1`; infinite for a disconnected candidate.
    pub achieved_epsilon: f64,
    /// Smallest eigenvalue of the candidate Laplacian on `1^perp`.
    pub lambda_min: f64,
    /// Largest eigenvalue of the candidate Laplacian.
    pub lambda_max: f64,
}

/// Certify that the candidate spectrally approximates the complete graph on
/// the same vertex set to within a factor `1 + epsilon`, up to an arbitrary
/// overall scale (scaling never changes polarization).
pub fn check_spectral_approx(candidate: &WeightedGraph, epsilon: f64) -> Result<SpectralCheck> {
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(Error::Domain(format!(
            "epsilon must be non-negative and finite, got {epsilon}"
        )));
    }
    let n = candidate.node_count();
    if n < 2 {
        return Err(Error::Domain(
            "spectral certification needs at least two vertices".to_string(),
        ));
    }
    let lap = laplacian_matrix(candidate);
    let eig = SymmetricEigen::try_new(lap, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("candidate eigendecomposition failed".to_string()))?;
    let mut spectrum: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    spectrum.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let lambda_min = spectrum[1].max(0.0);
    let lambda_max = spectrum[n - 1];
    let connected = lambda_min > EIGENVALUE_ZERO_CUTOFF * lambda_max.max(1.0);
    let achieved_epsilon = if connected {
        lambda_max / lambda_min - 1.0
    } else {
        f64::INFINITY
    };
    Ok(SpectralCheck {
        holds: connected && achieved_epsilon <= epsilon + 1e-12,
        connected,
        achieved_epsilon,
        lambda_min,
        lambda_max,
    })
}

// ---- robust sparse design ----

/// A designed sparse topology with its certification and diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct RobustDesign {
    /// The designed graph itself (exported separately as an edge list).
    #[serde(skip)]
    pub graph: WeightedGraph,
    pub epsilon_requested: f64,
    pub epsilon_achieved: f64,
    pub edge_count: usize,
    pub total_weight: f64,
    /// Largest polarization over scanned leader pairs (exhaustive up to
    /// 200 vertices, then 1000 seeded pairs).
    pub worst_pair_polarization: f64,
    /// Certified cap `(1 + eps)^2 / 2` on every pair's polarization.
    pub polarization_bound: f64,
    /// The tighter uncertified comparison value `(1 + eps) / 2`.
    pub polarization_bound_tight: f64,
    pub seed: u64,
}

fn pair_of_index(n: usize, mut idx: usize) -> (usize, usize) {
    let mut u = 0;
    loop {
        let row = n - 1 - u;
        if idx < row {
            return (u, u + 1 + idx);
        }
        idx -= row;
        u += 1;
    }
}

fn attempt_seed(seed: u64, attempt: u64) -> u64 {
    seed.wrapping_add(attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Sample `q` complete-graph edges uniformly with replacement and accumulate
/// the reweighted copies `w_e / (q p_e) = M / q`; the total weight is
/// exactly `M = n(n-1)/2` regardless of `q`.
fn sample_candidate(n: usize, q: usize, seed: u64) -> WeightedGraph {
    let m_full = n * (n - 1) / 2;
    let per_draw = m_full as f64 / q as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc: std::collections::HashMap<(usize, usize), f64> = std::collections::HashMap::new();
    for _ in 0..q {
        let (u, v) = pair_of_index(n, rng.gen_range(0..m_full));
        *acc.entry((u, v)).or_insert(0.0) += per_draw;
    }
    let edges: Vec<(usize, usize, f64)> = acc.into_iter().map(|((u, v), w)| (u, v, w)).collect();
    WeightedGraph::with_node_count(n, &edges, DedupePolicy::Error)
        .expect("sampled edges are valid by construction")
}

fn worst_pair_polarization(g: &WeightedGraph, seed: u64) -> Result<f64> {
    let n = g.node_count();
    let kit = LaplacianKit::new(g)?;
    let pairs: Vec<(usize, usize)> = if n <= EXHAUSTIVE_PAIR_LIMIT {
        (0..n)
            .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5_5A5A_0F0F_F0F0);
        (0..SAMPLED_PAIR_COUNT)
            .map(|_| {
                let u = rng.gen_range(0..n);
                let mut v = rng.gen_range(0..n - 1);
                if v >= u {
                    v += 1;
                }
                (u.min(v), u.max(v))
            })
            .collect()
    };
    let worst = pairs
        .par_iter()
        .map(|&(u, v)| fd_polarization_closed(&kit, u, v))
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
    Ok(worst)
}

/// Design a graph on `n` vertices with at most `k` edges and total weight at
/// most `max_total_weight` whose every leader pair has polarization within a
/// certified factor of the complete-graph optimum 1/2.
///
/// Deterministic for fixed `(n, k, max_total_weight, epsilon, seed)`. When
/// certification fails for the requested `epsilon`, the sample count is
/// doubled until the edge cap blocks further growth; if no feasible sample
/// certifies, the error reports the best achieved epsilon.
pub fn design_robust_graph(
    n: usize,
    k: usize,
    max_total_weight: f64,
    epsilon: f64,
    seed: u64,
) -> Result<RobustDesign> {
    if n < 2 {
        return Err(Error::Domain(
            "robust design needs at least two vertices".to_string(),
        ));
    }
    if k < n - 1 {
        return Err(Error::Domain(format!(
            "edge cap {k} cannot connect {n} vertices (need at least {})",
            n - 1
        )));
    }
    if !max_total_weight.is_finite() || max_total_weight <= 0.0 {
        return Err(Error::Domain(format!(
            "weight budget must be positive and finite, got {max_total_weight}"
        )));
    }
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::Domain(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    let m_full = n * (n - 1) / 2;

    let finish = |graph: WeightedGraph, check: &SpectralCheck| -> Result<RobustDesign> {
        // Enforce the weight budget by uniform rescaling (leaves the
        // certification ratio and every pair's polarization unchanged).
        let total = graph.total_weight();
        let graph = if total > max_total_weight {
            graph.scale_weights(max_total_weight / total)?
        } else {
            graph
        };
        let worst = worst_pair_polarization(&graph, seed)?;
        let eps = check.achieved_epsilon;
        Ok(RobustDesign {
            epsilon_requested: epsilon,
            epsilon_achieved: eps,
            edge_count: graph.edge_count(),
            total_weight: graph.total_weight(),
            worst_pair_polarization: worst,
            polarization_bound: (1.0 + eps) * (1.0 + eps) / 2.0,
            polarization_bound_tight: (1.0 + eps) / 2.0,
            seed,
            graph,
        })
    };

    if k >= m_full {
        // No cardinality pressure: the complete graph is the exact optimum.
        let mut g = crate::generators::complete(n);
        if (m_full as f64) > max_total_weight {
            g = g.scale_weights(max_total_weight / m_full as f64)?;
        }
        let check = check_spectral_approx(&g, epsilon)?;
        return finish(g, &check);
    }

    let base_q = ((SPARSIFIER_OVERSAMPLE * n as f64 * (n as f64).ln()) / (epsilon * epsilon))
        .ceil()
        .max(1.0) as usize;
    let mut best: Option<(WeightedGraph, SpectralCheck)> = None;
    let mut q = base_q;
    for attempt in 0..SPARSIFIER_MAX_ATTEMPTS {
        let candidate = sample_candidate(n, q, attempt_seed(seed, attempt as u64));
        if candidate.edge_count() > k {
            // More samples can only add edges; stop growing.
            break;
        }
        let check = check_spectral_approx(&candidate, epsilon)?;
        let improves = best
            .as_ref()
            .is_none_or(|(_, c)| check.achieved_epsilon < c.achieved_epsilon);
        if improves {
            best = Some((candidate, check));
        }
        if best.as_ref().is_some_and(|(_, c)| c.holds) {
            let (graph, check) = best.unwrap();
            return finish(graph, &check);
        }
        q = q.saturating_mul(2);
    }
    if best.is_none() {
        // Even the first sample exceeded the cap; shrink until feasible so
        // the error can report an honestly certified epsilon.
        let mut qh = base_q / 2;
        let mut attempt = SPARSIFIER_MAX_ATTEMPTS as u64;
        while qh >= 1 {
            let candidate = sample_candidate(n, qh, attempt_seed(seed, attempt));
            if candidate.edge_count() <= k {
                let check = check_spectral_approx(&candidate, epsilon)?;
                best = Some((candidate, check));
                break;
            }
            qh /= 2;
            attempt += 1;
        }
    }
    Err(Error::SparsifierCap {
        requested_epsilon: epsilon,
        achieved_epsilon: best
            .map(|(_, c)| c.achieved_epsilon)
            .unwrap_or(f64::INFINITY),
        edge_cap: k,
    })
}
