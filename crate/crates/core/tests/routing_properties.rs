use proptest::prelude::*;
use tropcap_core::combinatorics::Combinations;
use tropcap_core::rng::{gaussian_vec, stream_rng, Stream};
use tropcap_core::routing::{
    build_routing_cell, enumerate_routing_cells, fan_adjacency, gate_weights, hypersimplex_projection,
    random_router, route_top_k, softmax, swap_halfspaces, top_k_indices, verify_redundancy, Coalition, RouterSpec,
    DEFAULT_COALITION_BUDGET,
};
use tropcap_core::tropical::build_sym_trop_k;

fn brute_force_best(z: &[f64], k: usize) -> (f64, Coalition) {
    let mut best = (f64::NEG_INFINITY, None);
    for c in Combinations::new(z.len(), k) {
        let s: f64 = c.iter().map(|&i| z[i]).sum();
        if s > best.0 {
            best = (s, Some(c));
        }
    }
    (best.0, Coalition::from_members(best.1.unwrap()).unwrap())
}

fn logits() -> impl Strategy<Value = (Vec<f64>, usize)> {
    (2usize..=10).prop_flat_map(|n| (prop::collection::vec(-50.0f64..50.0, n), 1..=n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn top_k_matches_brute_force((z, k) in logits()) {
        let (best, c) = brute_force_best(&z, k);
        let top = top_k_indices(&z, k);
        let sum: f64 = top.members().iter().map(|&i| z[i]).sum();
        prop_assert!((sum - best).abs() <= 1e-9 * best.abs().max(1.0));
        prop_assert_eq!(top, c);
    }

    #[test]
    fn softmax_preserves_top_k((z, k) in logits()) {
        prop_assert_eq!(top_k_indices(&softmax(&z), k), top_k_indices(&z, k));
    }

    #[test]
    fn elementary_symmetric_polynomial_is_top_k_sum((z, k) in logits()) {
        // identity weights make the tropical variable the logit vector itself
        let n = z.len();
        let eye: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let p = build_sym_trop_k(&eye, &vec![0.0; n], k).unwrap();
        let v = p.eval(&z).unwrap().value;
        let top = top_k_indices(&z, k);
        let sum: f64 = top.members().iter().map(|&i| z[i]).sum();
        prop_assert!((v - sum).abs() <= 1e-9 * sum.abs().max(1.0));
    }

    #[test]
    fn gates_form_a_distribution(seed in 0u64..10_000, n in 2usize..8, d in 1usize..5) {
        let k = 1 + (seed as usize % n);
        let r = random_router::<f64>(n, k, d, seed).unwrap();
        let mut rng = stream_rng(seed, Stream::Samples, 0);
        let x: Vec<f64> = gaussian_vec(&mut rng, d);
        let g = gate_weights(&r, &x).unwrap();
        prop_assert!((g.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for i in 0..n {
            prop_assert_eq!(g.weights[i] > 0.0, g.active.contains(i));
        }
        prop_assert_eq!(g.active, route_top_k(&r, &x).unwrap());
    }
}

/// Inside a swap cell the router picks that coalition, and outside it never does.
#[test]
fn swap_constraints_reproduce_membership() {
    let r = random_router::<f64>(5, 2, 3, 12).unwrap();
    let coalitions: Vec<Coalition> =
        Combinations::new(5, 2).map(|c| Coalition::from_members(c).unwrap()).collect();
    let hs: Vec<_> = coalitions.iter().map(|c| swap_halfspaces(&r, c)).collect();
    let mut rng = stream_rng(3, Stream::Samples, 0);
    for _ in 0..100_000 {
        let x: Vec<f64> = gaussian_vec::<f64, _>(&mut rng, 3).into_iter().map(|v| 3.0 * v).collect();
        let routed = route_top_k(&r, &x).unwrap();
        for (c, h) in coalitions.iter().zip(&hs) {
            let inside = h.iter().all(|h| h.eval(&x) > 0.0);
            assert_eq!(inside, *c == routed, "x = {x:?}");
        }
    }
}

#[test]
fn routing_cells_are_convex() {
    let r = random_router::<f64>(6, 3, 2, 4).unwrap();
    let mut rng = stream_rng(4, Stream::Samples, 0);
    let pts: Vec<Vec<f64>> = (0..2000).map(|_| gaussian_vec(&mut rng, 2)).collect();
    let labels: Vec<Coalition> = pts.iter().map(|x| route_top_k(&r, x).unwrap()).collect();
    for i in 0..pts.len() {
        for j in (i + 1..pts.len()).step_by(97) {
            if labels[i] == labels[j] {
                let mid: Vec<f64> = pts[i].iter().zip(&pts[j]).map(|(a, b)| 0.5 * (a + b)).collect();
                assert_eq!(route_top_k(&r, &mid).unwrap(), labels[i]);
            }
        }
    }
}

/// With zero offsets, cell I is open iff v_I is a vertex of the projected
/// hypersimplex (normal fan correspondence).
#[test]
fn feasible_cells_are_hypersimplex_vertices() {
    for seed in 0..40 {
        for (n, d) in [(4, 2), (5, 2), (5, 3), (6, 3)] {
            for k in 1..n {
                let r = random_router::<f64>(n, k, d, seed).unwrap().centered();
                let cells: Vec<Coalition> = enumerate_routing_cells(&r, DEFAULT_COALITION_BUDGET)
                    .unwrap()
                    .into_iter()
                    .map(|c| c.coalition)
                    .collect();
                let extreme: Vec<Coalition> = hypersimplex_projection(&r, DEFAULT_COALITION_BUDGET)
                    .unwrap()
                    .into_iter()
                    .filter(|v| v.is_extreme)
                    .map(|v| v.coalition)
                    .collect();
                assert_eq!(cells, extreme, "seed={seed} N={n} k={k} d={d}");
            }
        }
    }
}

/// Adjacent cells differ by one swap; cross-check the tie-face LP against
/// sampling along segments between cell witnesses.
#[test]
fn adjacent_cells_differ_by_one_exchange() {
    for seed in 0..10 {
        let r = random_router::<f64>(5, 2, 3, seed).unwrap();
        let adj = fan_adjacency(&r, DEFAULT_COALITION_BUDGET).unwrap();
        assert!(!adj.is_empty());
        for (a, b) in &adj {
            assert_eq!(a.symmetric_difference(b), 2, "{a} {b}");
        }
        // consecutive coalitions along a fine segment walk must be adjacent
        let mut rng = stream_rng(seed, Stream::Samples, 1);
        for _ in 0..20 {
            let p: Vec<f64> = gaussian_vec::<f64, _>(&mut rng, 3).into_iter().map(|v| 4.0 * v).collect();
            let q: Vec<f64> = gaussian_vec::<f64, _>(&mut rng, 3).into_iter().map(|v| 4.0 * v).collect();
            let mut prev = route_top_k(&r, &p).unwrap();
            for s in 1..=20_000 {
                let t = s as f64 / 20_000.0;
                let x: Vec<f64> = p.iter().zip(&q).map(|(a, b)| a + t * (b - a)).collect();
                let c = route_top_k(&r, &x).unwrap();
                if c != prev {
                    let pair = if prev < c { (prev.clone(), c.clone()) } else { (c.clone(), prev.clone()) };
                    // a switch through a lower-dimensional face is measure zero
                    assert!(adj.contains(&pair), "switch {} -> {} not in adjacency", pair.0, pair.1);
                    prev = c;
                }
            }
        }
    }
}

#[test]
fn redundancy_on_random_routers() {
    for seed in 0..10 {
        let n = 3 + (seed as usize % 4);
        for k in 1..n {
            let r = random_router::<f64>(n, k, n, seed).unwrap();
            for cell in enumerate_routing_cells(&r, DEFAULT_COALITION_BUDGET).unwrap() {
                let rep = verify_redundancy(&r, &cell.coalition, 200, seed).unwrap();
                assert!(rep.max_lp_excess <= 1e-7, "{rep:?}");
                assert_eq!(rep.sample_violations, 0);
            }
        }
    }
}

#[test]
fn redundancy_refuses_empty_cells() {
    let r = RouterSpec::new(vec![vec![1.0], vec![2.0], vec![3.0]], vec![0.0; 3], 1).unwrap();
    let middle = Coalition::new(vec![1], 3, 1).unwrap();
    assert!(!build_routing_cell(&r, &middle).unwrap().feasible.feasible);
    assert!(verify_redundancy(&r, &middle, 10, 0).is_err());
}
