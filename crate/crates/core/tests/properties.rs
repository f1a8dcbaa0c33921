use connes_lattice::distance::{coordinate_ascent, distance_numeric_from_starts};
use connes_lattice::graph::{df_norm, graph_distance_matrix, Arrow, WeightedDigraph};
use connes_lattice::numerics::{commutator, hermitian_eigenvalues, spectral_norm, ComplexMatrix, C64};
use connes_lattice::{
    build_triple, commutator_norm, distance_numeric, real_reduce, DiracKind, Distance, DistanceQuery, LatticeFunction,
    LatticeSpec, SolverOptions, Topology,
};
use proptest::prelude::*;

fn complex_matrix(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), n * n).prop_map(move |v| {
        ComplexMatrix::from_vec(n, n, v.into_iter().map(|(re, im)| C64::new(re, im)).collect()).unwrap()
    })
}

fn kind_strategy() -> impl Strategy<Value = DiracKind> {
    prop::sample::select(DiracKind::ALL.to_vec())
}

/// A buildable triple together with a pair of distinct sites.
fn triple_and_pair() -> impl Strategy<Value = (DiracKind, usize, usize, usize)> {
    (kind_strategy(), 3usize..=6).prop_flat_map(|(kind, n)| {
        (Just(kind), Just(n), 1..=n, 1..=n).prop_filter("distinct sites", |(_, _, p, q)| p != q)
    })
}

fn quick_solver() -> SolverOptions {
    SolverOptions {
        restarts: 3,
        ..SolverOptions::default()
    }
}

/// Random digraph with at most one arrow per unordered pair.
fn digraph(max_n: usize) -> impl Strategy<Value = WeightedDigraph> {
    (2..=max_n).prop_flat_map(|n| {
        let slots = n * (n - 1) / 2;
        prop::collection::vec((any::<bool>(), any::<bool>(), 0.1..3.0f64), slots).prop_map(move |choices| {
            let mut arrows = Vec::new();
            let mut it = choices.into_iter();
            for k in 1..=n {
                for l in k + 1..=n {
                    let (present, forward, epsilon) = it.next().unwrap();
                    if present {
                        let (from, to) = if forward { (k, l) } else { (l, k) };
                        arrows.push(Arrow { from, to, epsilon });
                    }
                }
            }
            WeightedDigraph::new(n, arrows).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectral_norm_bounds(m in complex_matrix(5)) {
        let s = spectral_norm(&m);
        prop_assert!(s >= m.max_abs() - 1e-12);
        prop_assert!(s <= m.frobenius_norm() + 1e-12);
    }

    #[test]
    fn spectral_norm_is_homogeneous(m in complex_matrix(4), re in -3.0..3.0f64, im in -3.0..3.0f64) {
        let c = C64::new(re, im);
        let lhs = spectral_norm(&m.scale(c));
        prop_assert!((lhs - c.norm() * spectral_norm(&m)).abs() <= 1e-10 * (1.0 + lhs));
    }

    #[test]
    fn eigenvalues_sorted_and_trace_preserving(m in complex_matrix(6)) {
        let h = m.add(&m.adjoint()).unwrap();
        let ev = hermitian_eigenvalues(&h, 1e-12).unwrap();
        prop_assert!(ev.windows(2).all(|w| w[0] <= w[1]));
        let trace: f64 = (0..6).map(|i| h[(i, i)].re).sum();
        prop_assert!((ev.iter().sum::<f64>() - trace).abs() < 1e-10);
    }

    #[test]
    fn commutator_is_antisymmetric(a in complex_matrix(4), b in complex_matrix(4)) {
        let ab = commutator(&a, &b).unwrap();
        let ba = commutator(&b, &a).unwrap();
        prop_assert!(ab.add(&ba).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn commutator_norm_ignores_constants(
        kind in kind_strategy(),
        f in prop::collection::vec(-3.0..3.0f64, 5),
        shift in -5.0..5.0f64,
    ) {
        let t = build_triple(LatticeSpec::new(5, kind.topology()).unwrap(), kind).unwrap();
        let shifted: Vec<f64> = f.iter().map(|v| v + shift).collect();
        let a = commutator_norm(&t, &LatticeFunction::from_real(&f)).unwrap();
        let b = commutator_norm(&t, &LatticeFunction::from_real(&shifted)).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn real_reduction_on_open_lattice_keeps_norm(
        values in prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), 2..9),
    ) {
        let n = values.len();
        let f = LatticeFunction::new(values.into_iter().map(|(re, im)| C64::new(re, im)).collect());
        let t = build_triple(LatticeSpec::open(n).unwrap(), DiracKind::AdjacencyDoubled).unwrap();
        let r = real_reduce(&f, Topology::Open);
        prop_assert!(r.is_real());
        prop_assert!((commutator_norm(&t, &f).unwrap() - commutator_norm(&t, &r).unwrap()).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn certificate_is_feasible_and_attains_value((kind, n, p, q) in triple_and_pair()) {
        let t = build_triple(LatticeSpec::new(n, kind.topology()).unwrap(), kind).unwrap();
        let r = distance_numeric(&DistanceQuery::new(&t, p, q).unwrap(), &quick_solver()).unwrap();
        let cert = r.certificate.expect("numeric results carry a certificate");
        let norm = commutator_norm(&t, &LatticeFunction::from_real(&cert)).unwrap();
        prop_assert!(norm <= 1.0 + 1e-9, "certificate norm {norm}");
        prop_assert!((cert[q - 1] - cert[p - 1] - r.value.value()).abs() < 1e-9);
    }

    /// The reduced real function is a valid start, so the solver never ends
    /// below the complex function's ratio.
    #[test]
    fn real_starts_dominate_complex_ratios(
        (kind, n, p, q) in triple_and_pair(),
        seed in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 6),
    ) {
        prop_assume!(kind.is_doubled() && kind.is_adjacency());
        let t = build_triple(LatticeSpec::new(n, kind.topology()).unwrap(), kind).unwrap();
        let f = LatticeFunction::new(seed[..n].iter().map(|&(re, im)| C64::new(re, im)).collect());
        let norm = commutator_norm(&t, &f).unwrap();
        prop_assume!(norm > 1e-6);
        let ratio = (f.at(q) - f.at(p)).norm() / norm;
        let reduced = real_reduce(&f, kind.topology()).real_parts();
        let r = distance_numeric_from_starts(&DistanceQuery::new(&t, p, q).unwrap(), &quick_solver(), &[reduced])
            .unwrap();
        prop_assert!(r.value.value() >= ratio - 1e-9, "{} < {ratio}", r.value.value());
    }

    #[test]
    fn graph_distance_is_the_supremum(g in digraph(7)) {
        prop_assume!(!g.arrows().is_empty());
        let d = graph_distance_matrix(&g).unwrap();
        let n = g.n_vertices();
        for p in 0..n {
            for q in 0..n {
                let Distance::Finite(dpq) = d[p][q] else { continue };
                // f*(x) = min(d(p, x), d(p, q)); unreachable vertices sit at the cap
                let f: Vec<f64> = (0..n).map(|x| d[p][x].value().min(dpq)).collect();
                prop_assert!(df_norm(&g, &f).unwrap() <= 1.0 + 1e-12);
                prop_assert!((f[q] - f[p] - dpq).abs() <= 1e-12);

                let objective = |v: &[f64]| {
                    let norm = df_norm(&g, v).unwrap();
                    if norm > 0.0 { (v[q] - v[p]) / norm } else { 0.0 }
                };
                let start: Vec<f64> = (0..n).map(|x| if x == q { 1.0 } else { 0.0 }).collect();
                let best = coordinate_ascent(objective, start, 0.5, 1e-6, 5_000);
                prop_assert!(best.value <= dpq + 1e-6, "ascent {} beats {dpq}", best.value);
            }
        }
    }

    #[test]
    fn graph_distance_ignores_orientation(g in digraph(7), mask in prop::collection::vec(any::<bool>(), 21)) {
        let flips: Vec<usize> = (0..g.arrows().len()).filter(|&i| mask[i]).collect();
        let a = graph_distance_matrix(&g).unwrap();
        let b = graph_distance_matrix(&g.with_reversed(&flips).unwrap()).unwrap();
        for (ra, rb) in a.iter().zip(&b) {
            for (x, y) in ra.iter().zip(rb) {
                prop_assert_eq!(x.is_finite(), y.is_finite());
                if x.is_finite() {
                    prop_assert!((x.value() - y.value()).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn graph_distances_form_a_metric(g in digraph(7)) {
        let d = graph_distance_matrix(&g).unwrap();
        let n = g.n_vertices();
        for i in 0..n {
            prop_assert_eq!(d[i][i], Distance::Finite(0.0));
            for j in 0..n {
                prop_assert_eq!(d[i][j], d[j][i]);
                for k in 0..n {
                    if d[i][j].is_finite() && d[j][k].is_finite() {
                        prop_assert!(d[i][k].value() <= d[i][j].value() + d[j][k].value() + 1e-12);
                    }
                }
            }
        }
    }
}
