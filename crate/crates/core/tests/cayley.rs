mod common;

use common::{l1_ball_count, sup, sup_diff, SpectralSemigroup};
use curvlab::curvature::{check_cd, curvature_profile, VertexScope};
use curvlab::function::random_function;
use curvlab::geometry::{volume_profile, volume_profile_trusted};
use curvlab::graph::{
    cayley_truncation, diameter, generate_cayley, BoundaryMode, GroupSpec, LaplacianMode, WeightedGraph,
};
use curvlab::operators::{cayley_partials, gamma2};
use curvlab::semigroup::{duhamel_solve, heat};

fn unnormalized(spec: GroupSpec) -> WeightedGraph<f64> {
    generate_cayley(spec, None, LaplacianMode::Unnormalized).unwrap()
}

#[test]
fn finite_groups_are_vertex_transitive() {
    for spec in [GroupSpec::torus(2, 5), GroupSpec::symmetric(4), GroupSpec::cyclic(9)] {
        let g = unnormalized(spec);
        let p = curvature_profile(&g, 3.0, &VertexScope::All).unwrap();
        let k0 = p.k_opt[0];
        assert!(p.k_opt.iter().all(|k| (k - k0).abs() <= 1e-9 * (1.0 + k0.abs())));
        let v0 = volume_profile(&g, 0, 6).unwrap().volumes;
        for x in 0..g.len() {
            assert_eq!(volume_profile(&g, x, 6).unwrap().volumes, v0);
        }
    }
}

#[test]
fn symmetric_group_orders_and_diameters() {
    // S_n with all transpositions: diameter n - 1
    for (n, order) in [(3usize, 6usize), (4, 24)] {
        let g = unnormalized(GroupSpec::symmetric(n));
        assert_eq!(g.len(), order);
        assert_eq!(diameter(&g), n - 1);
        assert!(g.neighbors(0).all(|(_, p)| p == 1.0));
    }
}

#[test]
fn abelian_ricci_part_vanishes_and_nonabelian_decomposes() {
    let g = unnormalized(GroupSpec::torus(3, 5));
    let f = random_function(g.len(), 3);
    let g2 = gamma2(&g, &f).unwrap();
    for (x, v) in g2.iter().enumerate() {
        let c = cayley_partials(&g, &f, x).unwrap();
        assert_eq!(c.ricci_part, 0.0);
        assert!((c.gamma2() - v).abs() <= 1e-12 * (1.0 + v.abs()));
    }
    let s = unnormalized(GroupSpec::symmetric(4));
    let f = random_function(s.len(), 4);
    let g2 = gamma2(&s, &f).unwrap();
    for (x, v) in g2.iter().enumerate() {
        let c = cayley_partials(&s, &f, x).unwrap();
        assert!((c.gamma2() - v).abs() <= 1e-11 * (1.0 + v.abs()));
    }
}

#[test]
fn lattice_interior_matches_infinite_group() {
    let t = cayley_truncation::<f64>(GroupSpec::integer_lattice(2), Some(14), LaplacianMode::Markov, BoundaryMode::Reflecting, 0).unwrap();
    let p = volume_profile_trusted(&t, t.center, 10).unwrap();
    for r in 0..=10 {
        assert_eq!(p.volume(r), 4.0 * l1_ball_count(r as i64) as f64);
    }
    // interior vertices see the same curvature as the origin
    let interior: Vec<usize> = (0..t.graph.len()).filter(|&x| t.depth[x] <= 12).collect();
    let prof = curvature_profile(&t.graph, 4.0, &VertexScope::List(interior)).unwrap();
    assert!(prof.k_opt.iter().all(|k| k.abs() <= 1e-9), "{:?}", prof.k_inf);
    assert!(check_cd(&t.graph, 0.0, 4.0, &VertexScope::List(vec![t.center])).unwrap().satisfied);
}

#[test]
fn absorbing_truncation_is_flagged_only() {
    // Delta 1 = 0 on the kept kernel, so only the flag records the lost mass
    let t = cayley_truncation::<f64>(GroupSpec::integer_lattice(1), Some(5), LaplacianMode::Markov, BoundaryMode::AbsorbingFlagged, 0).unwrap();
    assert!(!t.graph.is_stochastic());
    let p1 = heat(&t.graph, 2.0, &vec![1.0; t.graph.len()]).unwrap();
    assert!(t.dropped.iter().any(|&d| d > 0.0));
    assert!(p1.iter().all(|v| (v - 1.0).abs() <= 1e-12));
}

#[test]
fn duhamel_matches_spectral_forcing() {
    // u' = Delta u + F with constant-in-time F has u(t) = P_t u0 + int_0^t P_s F ds
    let g = unnormalized(GroupSpec::cyclic(7));
    let u0 = random_function::<f64>(7, 1);
    let f = random_function::<f64>(7, 2);
    let nodes = 161;
    let horizon = 1.0;
    let sol = duhamel_solve(&g, &u0, &vec![f.clone(); nodes], horizon).unwrap();
    let spec = SpectralSemigroup::new(&g);
    // int_0^t P_s F ds by 2000-interval Simpson on the exact semigroup
    let m = 2000;
    let h = horizon / m as f64;
    let mut integral = vec![0.0; 7];
    for i in 0..=m {
        let w = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        for (a, b) in integral.iter_mut().zip(spec.apply(i as f64 * h, &f)) {
            *a += w * h / 3.0 * b;
        }
    }
    let exact: Vec<f64> = spec.apply(horizon, &u0).iter().zip(&integral).map(|(a, b)| a + b).collect();
    let last = sol.values.last().unwrap();
    assert!(sup_diff(last, &exact) <= 1e-8 * sup(&exact).max(1.0), "{}", sup_diff(last, &exact));
}
