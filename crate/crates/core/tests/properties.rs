//! Cross-cutting invariants checked on randomized instances: metric and
//! algebraic identities of the Laplacian machinery, order/bound properties
//! of both dynamics, exactness of the text codecs, and feasibility/descent
//! guarantees of the designers.

use nalgebra::{Cholesky, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polarnet::graph::DedupePolicy;
use polarnet::{
    design_fj, disagreement, exhaustive_flip_oracle, fd_steady_state, fd_steady_state_closed,
    fj_index_closed, fj_projected_source, fj_steady_state, flip_preferences_budget,
    flip_preferences_l1, generators, io, laplacian_matrix, optimize_weights, preference_index,
    project_box_budget, project_capped_simplex, weighted_polarization, FdModel, FjModel,
    LaplacianKit, SolverOptions, WeightedGraph,
};

fn random_instance(seed: u64, n: usize) -> (WeightedGraph, Vec<f64>, Vec<f64>) {
    let g = generators::random_connected_weighted(n, 0.3, 0.3, 2.5, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5151_5151);
    let kappa: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..3.0)).collect();
    let beta: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    (g, kappa, beta)
}

// ---- Laplacian machinery ----

#[test]
fn pseudoinverse_solves_the_laplacian() {
    for seed in 0..100u64 {
        let n = 3 + (seed as usize % 18);
        let g = generators::random_connected_weighted(n, 0.25, 0.2, 3.0, seed);
        let kit = LaplacianKit::new(&g).unwrap();
        let l = kit.laplacian();
        let residual = l * kit.pseudoinverse() * l - l;
        assert!(
            residual.norm() / l.norm() < 1e-9,
            "seed {seed}: residual {}",
            residual.norm()
        );
    }
}

#[test]
fn resistance_triangle_inequality_over_all_triples() {
    for seed in 0..50u64 {
        let n = 3 + (seed as usize % 6); // up to 8 vertices
        let g = generators::random_connected_weighted(n, 0.4, 0.2, 3.0, seed);
        let kit = LaplacianKit::new(&g).unwrap();
        for u in 0..n {
            for v in 0..n {
                for w in 0..n {
                    let ruw = kit.resistance_distance(u, w).unwrap();
                    let ruv = kit.resistance_distance(u, v).unwrap();
                    let rvw = kit.resistance_distance(v, w).unwrap();
                    assert!(
                        ruw <= ruv + rvw + 1e-9,
                        "seed {seed}: triangle violated at ({u},{v},{w})"
                    );
                }
            }
        }
    }
}

#[test]
fn biharmonic_distance_agrees_with_the_pseudoinverse_image() {
    for seed in 0..100u64 {
        let n = 3 + (seed as usize % 10);
        let g = generators::random_connected_weighted(n, 0.3, 0.5, 2.0, seed);
        let kit = LaplacianKit::new(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = rng.gen_range(0..n);
        let mut v = rng.gen_range(0..n - 1);
        if v >= u {
            v += 1;
        }
        let via_squared = kit.biharmonic_distance_squared(u, v).unwrap();
        // Same quantity through the image of the indicator difference.
        let mut b = DVector::zeros(n);
        b[u] = 1.0;
        b[v] = -1.0;
        let image = kit.pseudoinverse() * b;
        let direct = image.norm_squared();
        let scale = via_squared.abs().max(direct.abs()).max(1e-300);
        assert!(
            (via_squared - direct).abs() / scale < 1e-10,
            "seed {seed}: {via_squared} vs {direct}"
        );
    }
}

#[test]
fn distances_scale_with_inverse_weight() {
    for seed in 0..40u64 {
        let n = 4 + (seed as usize % 8);
        let g = generators::random_connected_weighted(n, 0.3, 0.4, 2.0, seed);
        let kit = LaplacianKit::new(&g).unwrap();
        for &a in &[0.1, 2.0, 10.0] {
            let scaled = LaplacianKit::new(&g.scale_weights(a).unwrap()).unwrap();
            let r = kit.resistance_distance(0, n - 1).unwrap();
            let rs = scaled.resistance_distance(0, n - 1).unwrap();
            assert!((rs - r / a).abs() < 1e-9 * (1.0 + r / a));
            let d = kit.biharmonic_distance(0, n - 1).unwrap();
            let ds = scaled.biharmonic_distance(0, n - 1).unwrap();
            assert!((ds - d / a).abs() < 1e-9 * (1.0 + d / a));
        }
    }
}

// ---- leader-led dynamics and indices ----

#[test]
fn fd_steady_states_stay_in_the_unit_interval() {
    for seed in 0..200u64 {
        let n = 3 + (seed as usize % 15);
        let g = generators::random_connected_weighted(n, 0.3, 0.2, 3.0, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s0 = rng.gen_range(0..n);
        let mut s1 = rng.gen_range(0..n - 1);
        if s1 >= s0 {
            s1 += 1;
        }
        let model = FdModel::new(g, s0, s1).unwrap();
        let x = fd_steady_state(&model).unwrap();
        for &v in x.as_slice() {
            assert!((-1e-12..=1.0 + 1e-12).contains(&v), "seed {seed}");
        }
    }
}

#[test]
fn fd_partitioned_and_closed_routes_agree() {
    for seed in 0..60u64 {
        let n = 3 + (seed as usize % 12);
        let g = generators::random_connected_weighted(n, 0.35, 0.3, 2.5, seed);
        let kit = LaplacianKit::new(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s0 = rng.gen_range(0..n);
        let mut s1 = rng.gen_range(0..n - 1);
        if s1 >= s0 {
            s1 += 1;
        }
        let model = FdModel::new(g.clone(), s0, s1).unwrap();
        let solved = fd_steady_state(&model).unwrap();
        let closed = fd_steady_state_closed(&kit, s0, s1).unwrap();
        for (a, b) in solved.as_slice().iter().zip(closed.as_slice()) {
            assert!((a - b).abs() < 1e-8, "seed {seed}: {a} vs {b}");
        }
    }
}

#[test]
fn fd_indices_are_scale_invariant_in_the_right_way() {
    for seed in 0..30u64 {
        let n = 4 + (seed as usize % 8);
        let g = generators::random_connected_weighted(n, 0.3, 0.4, 2.0, seed);
        let kit = LaplacianKit::new(&g).unwrap();
        let d = polarnet::fd_disagreement_closed(&kit, 0, n - 1).unwrap();
        let p = polarnet::fd_polarization_closed(&kit, 0, n - 1).unwrap();
        for &a in &[0.1, 2.0, 10.0] {
            let scaled = LaplacianKit::new(&g.scale_weights(a).unwrap()).unwrap();
            let da = polarnet::fd_disagreement_closed(&scaled, 0, n - 1).unwrap();
            let pa = polarnet::fd_polarization_closed(&scaled, 0, n - 1).unwrap();
            assert!((pa - p).abs() < 1e-9, "seed {seed} a {a}: P {pa} vs {p}");
            assert!((da - a * d).abs() < 1e-9 * a.max(1.0), "seed {seed} a {a}");
        }
    }
}

// ---- stubborn-agent identities ----

fn fj_system_solve(g: &WeightedGraph, kappa: &[f64], rhs: &DVector<f64>) -> DVector<f64> {
    let mut m = laplacian_matrix(g);
    for (i, &k) in kappa.iter().enumerate() {
        m[(i, i)] += k;
    }
    Cholesky::new(m).unwrap().solve(rhs)
}

#[test]
fn centered_and_raw_solves_differ_by_the_weighted_mean() {
    for seed in 0..60u64 {
        let (g, kappa, beta) = random_instance(seed, 4 + (seed as usize % 10));
        let model = FjModel::new(g.clone(), &kappa, &beta).unwrap();
        let x = fj_steady_state(&model).unwrap();
        let x = DVector::from_column_slice(x.as_slice());
        let centered = fj_system_solve(&g, &kappa, &fj_projected_source(&model));
        let n = g.node_count();
        // Uniformly centered copies coincide...
        let mean_x = x.sum() / n as f64;
        let mean_c = centered.sum() / n as f64;
        for i in 0..n {
            assert!(
                ((x[i] - mean_x) - (centered[i] - mean_c)).abs() < 1e-10,
                "seed {seed}"
            );
        }
        // ...and shifting by the stubbornness-weighted mean gives the
        // centered solve exactly.
        let kappa_sum: f64 = kappa.iter().sum();
        let alpha = kappa
            .iter()
            .zip(x.iter())
            .map(|(&k, &xi)| k * xi)
            .sum::<f64>()
            / kappa_sum;
        for i in 0..n {
            assert!((x[i] - alpha - centered[i]).abs() < 1e-10, "seed {seed}");
        }
    }
}

#[test]
fn quadratic_forms_match_definitional_indices() {
    for seed in 0..100u64 {
        let (g, kappa, beta) = random_instance(seed, 3 + (seed as usize % 12));
        let model = FjModel::new(g.clone(), &kappa, &beta).unwrap();
        let x = fj_steady_state(&model).unwrap();
        let d_def = disagreement(&g, x.as_slice()).unwrap();
        let (p_def, _) = weighted_polarization(x.as_slice(), &kappa).unwrap();
        // Quadratic forms in the centered source, via the rho endpoints.
        let d_quad = preference_index(&g, &kappa, &beta, 1.0).unwrap();
        let p_quad = preference_index(&g, &kappa, &beta, 0.0).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-12);
        assert!(rel(d_def, d_quad) < 1e-8, "seed {seed}: D {d_def} vs {d_quad}");
        assert!(rel(p_def, p_quad) < 1e-8, "seed {seed}: P {p_def} vs {p_quad}");
        // Balanced index through the dedicated closed form.
        let half = fj_index_closed(&model, 0.5).unwrap();
        assert!(
            rel(half, 0.5 * d_def + 0.5 * p_def) < 1e-8,
            "seed {seed}: balanced {half}"
        );
    }
}

#[test]
fn raising_a_preference_never_lowers_any_opinion() {
    for seed in 0..40u64 {
        let (g, kappa, beta) = random_instance(seed, 4 + (seed as usize % 8));
        let n = g.node_count();
        let model = FjModel::new(g.clone(), &kappa, &beta).unwrap();
        let before = fj_steady_state(&model).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = rng.gen_range(0..n);
        let mut raised = beta.clone();
        raised[v] = (raised[v] + 0.3).min(1.0);
        let model2 = FjModel::new(g, &kappa, &raised).unwrap();
        let after = fj_steady_state(&model2).unwrap();
        for (a, b) in after.as_slice().iter().zip(before.as_slice()) {
            assert!(*a >= b - 1e-12, "seed {seed}: {a} < {b}");
        }
    }
}

#[test]
fn strong_stubbornness_scaling_pulls_opinions_to_the_weighted_mean() {
    for seed in 0..20u64 {
        let (g, kappa, beta) = random_instance(seed, 4 + (seed as usize % 8));
        let mut last = f64::INFINITY;
        for &a in &[10.0, 100.0, 1000.0] {
            // Scaling the graph up by `a` is the same as scaling every
            // stubbornness down by `1/a`; consensus emerges at the
            // stubbornness-weighted mean.
            let model = FjModel::new(g.scale_weights(a).unwrap(), &kappa, &beta).unwrap();
            let x = fj_steady_state(&model).unwrap();
            let (_, alpha) = weighted_polarization(x.as_slice(), &kappa).unwrap();
            let deviation = x
                .as_slice()
                .iter()
                .fold(0.0f64, |acc, &v| acc.max((v - alpha).abs()));
            assert!(deviation < last, "seed {seed}: {deviation} !< {last}");
            last = deviation;
        }
        assert!(last < 1e-2, "seed {seed}: deviation {last}");
    }
}

// ---- designers ----

#[test]
fn oracle_sandwich_on_small_instances() {
    for seed in 100..110u64 {
        let n = 8 + (seed as usize % 5);
        let g = generators::random_connected(n, 0.25, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kappa: Vec<f64> = (0..n).map(|_| rng.gen_range(0.3..2.0)).collect();
        let beta: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(0.35) { 0.0 } else { 1.0 })
            .collect();
        let oracle = exhaustive_flip_oracle(&g, &kappa, &beta, 2, 0.5).unwrap();
        let budget = flip_preferences_budget(&g, &kappa, &beta, 2, 0.5).unwrap();
        assert!(oracle.best_objective <= budget.objective_after + 1e-12);
        let l1 =
            flip_preferences_l1(&g, &kappa, &beta, 0.6, 0.5, SolverOptions::default()).unwrap();
        assert!(oracle.best_objective <= l1.objective_after + 1e-12);
        // The exhaustive optimum is also at most the unmodified index.
        let base = preference_index(&g, &kappa, &beta, 0.5).unwrap();
        assert!(oracle.best_objective <= base + 1e-12);
    }
}

#[test]
fn flip_plans_are_feasible_and_monotone() {
    for seed in 200..212u64 {
        let n = 6 + (seed as usize % 9);
        let g = generators::random_connected(n, 0.3, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kappa: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..2.0)).collect();
        let beta: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(0.4) { 0.0 } else { 1.0 })
            .collect();
        let k = (seed as usize % (n + 1)).min(n);
        let plan = flip_preferences_budget(&g, &kappa, &beta, k, 0.5).unwrap();
        assert!(plan.flipped.len() <= k);
        let total: f64 = plan.d.iter().sum();
        assert!(total <= k as f64 + 1e-9);
        assert!(plan.d.iter().all(|&v| (-1e-12..=1.0 + 1e-12).contains(&v)));
        assert!(plan.objective_relaxed <= plan.objective_before + 1e-12);
        let l1 = flip_preferences_l1(&g, &kappa, &beta, 0.7, 0.5, SolverOptions::default())
            .unwrap();
        let support: Vec<usize> = l1
            .d
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > design_fj::ROUND_THRESHOLD)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(l1.flipped, support);
    }
}

#[test]
fn weight_designs_are_feasible_and_descend() {
    for seed in 300..308u64 {
        let (g, kappa, beta) = random_instance(seed, 7 + (seed as usize % 6));
        let m = g.edge_count();
        let (lower, upper) = (0.05, 2.0);
        let budget = lower * m as f64 + 1.7;
        let design = optimize_weights(
            &g,
            &kappa,
            &beta,
            lower,
            upper,
            budget,
            SolverOptions::default(),
        )
        .unwrap();
        assert!(design.objective <= design.objective_start + 1e-12);
        assert!(design.weights.iter().sum::<f64>() <= budget + 1e-9);
        assert!(design
            .weights
            .iter()
            .all(|&w| w >= lower - 1e-12 && w <= upper + 1e-12));
    }
}

// ---- randomized structural properties ----

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn box_budget_projection_satisfies_the_variational_inequality(
        x in proptest::collection::vec(-3.0f64..3.0, 1..10),
        probe in proptest::collection::vec(-3.0f64..3.0, 1..10),
        lo in -1.0f64..0.5,
        span in 0.1f64..2.0,
        slack in 0.0f64..4.0,
    ) {
        let n = x.len().min(probe.len());
        let x = &x[..n];
        let hi = lo + span;
        let budget = lo * n as f64 + slack;
        let p = project_box_budget(x, lo, hi, budget).unwrap();
        // Any projection of another point is a feasible witness.
        let z = project_box_budget(&probe[..n], lo, hi, budget).unwrap();
        let inner: f64 = x
            .iter()
            .zip(&p)
            .zip(&z)
            .map(|((&xi, &pi), &zi)| (xi - pi) * (zi - pi))
            .sum();
        prop_assert!(inner <= 1e-8, "inner {inner}");
        // Feasibility of the projection itself.
        let total: f64 = p.iter().sum();
        prop_assert!(total <= budget + 1e-9);
        for &v in &p {
            prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }
    }

    #[test]
    fn capped_simplex_projection_is_idempotent(
        x in proptest::collection::vec(-2.0f64..3.0, 1..12),
        k in 0u8..8,
    ) {
        let p = project_capped_simplex(&x, k as f64).unwrap();
        let pp = project_capped_simplex(&p, k as f64).unwrap();
        for (a, b) in p.iter().zip(&pp) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn edge_list_round_trip(seed in any::<u64>(), n in 2usize..15, p in 0u8..60) {
        let g = generators::random_connected_weighted(
            n,
            p as f64 / 100.0,
            0.2,
            3.0,
            seed,
        );
        let text = io::format_edge_list(&g);
        let back = io::parse_edge_list(&text, DedupePolicy::Error).unwrap();
        prop_assert_eq!(g, back);
    }

    #[test]
    fn node_attribute_round_trip(
        rows in proptest::collection::vec((1e-3f64..100.0, 0.0f64..1.0), 1..20),
    ) {
        let kappa: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let beta: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let text = io::format_node_attributes(&kappa, &beta).unwrap();
        let (k2, b2) = io::parse_node_attributes(&text).unwrap();
        prop_assert_eq!(kappa, k2);
        prop_assert_eq!(beta, b2);
    }

    #[test]
    fn resistance_triangle_inequality_randomized(
        seed in any::<u64>(),
        n in 3usize..12,
    ) {
        let g = generators::random_connected_weighted(n, 0.3, 0.2, 3.0, seed);
        let kit = LaplacianKit::new(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        let w = rng.gen_range(0..n);
        let ruw = kit.resistance_distance(u, w).unwrap();
        let ruv = kit.resistance_distance(u, v).unwrap();
        let rvw = kit.resistance_distance(v, w).unwrap();
        prop_assert!(ruw <= ruv + rvw + 1e-9);
    }
}
