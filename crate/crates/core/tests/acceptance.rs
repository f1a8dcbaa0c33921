//! Acceptance run: one line per criterion, nonzero exit if any fails.
//!
//! Reference values are computed inline (closed forms, brute-force path
//! enumeration, the coordinate-ascent oracle) rather than taken from the
//! library's own closed-form functions.

use std::time::{Duration, Instant};

use connes_lattice::cli::{execute, parse_matrix_csv};
use connes_lattice::distance::{check_metric, numeric_distance_matrix, DistanceMatrix};
use connes_lattice::graph::{graph_distance_matrix, Arrow, WeightedDigraph};
use connes_lattice::study::{convergence_study, DEFAULT_SWEEP};
use connes_lattice::triple::commutator_norm_generic;
use connes_lattice::verify::qq_deviation;
use connes_lattice::{
    build_triple, commutator_norm, distance_numeric, distance_oracle, real_reduce, spectral_norm, validate_triple,
    DiracKind, Distance, DistanceQuery, LatticeFunction, LatticeSpec, OracleOptions, SolverOptions, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn worst_gap(m: &DistanceMatrix, exact: impl Fn(usize, usize) -> f64) -> f64 {
    let mut worst = 0.0f64;
    for p in 1..=m.n {
        for q in 1..=m.n {
            worst = worst.max((m.get(p, q).value() - exact(p, q)).abs());
        }
    }
    worst
}

fn within_budget(elapsed: Duration, budget_s: u64) -> bool {
    elapsed <= Duration::from_secs(budget_s)
}

fn random_real(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect()
}

fn random_complex(rng: &mut ChaCha8Rng, n: usize) -> LatticeFunction {
    LatticeFunction::new(
        (0..n)
            .map(|_| C64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)))
            .collect(),
    )
}

/// Every matrix produced along the way, for criterion 10.
type Collected = Vec<(String, Vec<Vec<f64>>)>;

fn open_exactness(matrices: &mut Collected) -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in 2..=10 {
        let t = build_triple(LatticeSpec::open(n).unwrap(), DiracKind::AdjacencyDoubled).unwrap();
        let m = numeric_distance_matrix(&t, &SolverOptions::default()).unwrap();
        worst = worst.max(worst_gap(&m, |p, q| p.abs_diff(q) as f64));
        matrices.push((format!("adjacency-doubled N={n}"), m.as_f64()));
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-6 && within_budget(elapsed, 60),
        format!("max |d - |p-q|| = {worst:.3e}, {:.1}s (budget 60s)", elapsed.as_secs_f64()),
    )
}

fn closed_exactness(matrices: &mut Collected) -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in 3..=10 {
        let t = build_triple(LatticeSpec::closed(n).unwrap(), DiracKind::ClosedAdjacencyDoubled).unwrap();
        let m = numeric_distance_matrix(&t, &SolverOptions::default()).unwrap();
        worst = worst.max(worst_gap(&m, |p, q| {
            let k = p.abs_diff(q);
            k.min(n - k) as f64
        }));
        matrices.push((format!("closed-adjacency-doubled N={n}"), m.as_f64()));
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-6 && within_budget(elapsed, 60),
        format!("max |d - min(k, N-k)| = {worst:.3e}, {:.1}s (budget 60s)", elapsed.as_secs_f64()),
    )
}

fn undoubled_equivalence(matrices: &mut Collected) -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in 2..=8 {
        let lattice = LatticeSpec::open(n).unwrap();
        let plain = numeric_distance_matrix(
            &build_triple(lattice, DiracKind::AdjacencyPlain).unwrap(),
            &SolverOptions::default(),
        )
        .unwrap();
        let doubled = numeric_distance_matrix(
            &build_triple(lattice, DiracKind::AdjacencyDoubled).unwrap(),
            &SolverOptions::default(),
        )
        .unwrap();
        worst = worst.max(worst_gap(&plain, |p, q| doubled.get(p, q).value()));
        matrices.push((format!("adjacency-plain N={n}"), plain.as_f64()));
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-6 && within_budget(elapsed, 30),
        format!("max |plain - doubled| = {worst:.3e}, {:.1}s (budget 30s)", elapsed.as_secs_f64()),
    )
}

fn norm_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut qq, mut fast) = (0.0f64, 0.0f64);
    for n in 2..=10 {
        let mut triples = vec![build_triple(LatticeSpec::open(n).unwrap(), DiracKind::AdjacencyDoubled).unwrap()];
        if n >= 3 {
            triples.push(build_triple(LatticeSpec::closed(n).unwrap(), DiracKind::ClosedAdjacencyDoubled).unwrap());
        }
        for t in &triples {
            for _ in 0..100 {
                let f = random_real(&mut rng, n);
                qq = qq.max(qq_deviation(t, &f).unwrap());
                let lf = LatticeFunction::from_real(&f);
                let dense = spectral_norm(&t.commutator_with(&lf).unwrap());
                fast = fast.max((commutator_norm(t, &lf).unwrap() - dense).abs());
            }
        }
    }
    outcome(
        qq <= 1e-12 && fast <= 1e-12,
        format!("QQ† deviation {qq:.3e}, fast-path vs spectral norm {fast:.3e}"),
    )
}

fn triple_axioms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    let mut all = true;
    let mut checked = 0;
    for kind in DiracKind::ALL {
        for n in 2..=10 {
            let Ok(lattice) = LatticeSpec::new(n, kind.topology()) else { continue };
            let t = build_triple(lattice, kind).unwrap();
            let samples: Vec<_> = (0..5).map(|_| random_complex(&mut rng, n)).collect();
            let report = validate_triple(&t, &samples, 1e-12).unwrap();
            all &= report.passed();
            worst = worst.max(report.max_deviation());
            checked += 1;
        }
    }
    outcome(
        all && worst <= 1e-12,
        format!("{checked} triples, max identity deviation {worst:.3e}"),
    )
}

fn real_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut open_gap, mut closed_excess) = (0.0f64, f64::NEG_INFINITY);
    for n in 2..=8 {
        let open = build_triple(LatticeSpec::open(n).unwrap(), DiracKind::AdjacencyDoubled).unwrap();
        for _ in 0..100 {
            let f = random_complex(&mut rng, n);
            let r = real_reduce(&f, open.lattice().topology());
            open_gap = open_gap.max((commutator_norm(&open, &f).unwrap() - commutator_norm(&open, &r).unwrap()).abs());
        }
        if n >= 3 {
            let closed = build_triple(LatticeSpec::closed(n).unwrap(), DiracKind::ClosedAdjacencyDoubled).unwrap();
            for _ in 0..100 {
                let f = random_complex(&mut rng, n);
                let r = real_reduce(&f, closed.lattice().topology());
                let excess =
                    commutator_norm_generic(&closed, &r).unwrap() - commutator_norm_generic(&closed, &f).unwrap();
                closed_excess = closed_excess.max(excess);
            }
        }
    }
    outcome(
        open_gap <= 1e-12 && closed_excess <= 1e-12,
        format!("open |Δnorm| {open_gap:.3e}, closed max(reduced - original) {closed_excess:.3e}"),
    )
}

fn convergence() -> Outcome {
    let start = Instant::now();
    let report = convergence_study(&DEFAULT_SWEEP, &SolverOptions::default()).unwrap();
    let elapsed = start.elapsed();
    let last = report.rows.last().unwrap();
    outcome(
        report.passed && within_budget(elapsed, 600),
        format!(
            "shrinking={}, within 2% band={}, final d(c,c+1)={:.12}, d(c,c+2)={:.12}, rel dev {:.3e}, {:.1}s (budget 600s)",
            report.shrinking,
            report.within_band,
            last.d_next,
            last.d_next2,
            report.final_relative_deviation,
            elapsed.as_secs_f64()
        ),
    )
}

fn solver_vs_oracle(matrices: &mut Collected) -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for n in 3..=8 {
        let t = build_triple(LatticeSpec::open(n).unwrap(), DiracKind::SymmetricDifference).unwrap();
        let mut m = vec![vec![0.0; n]; n];
        for p in 1..=n {
            for q in p + 1..=n {
                let query = DistanceQuery::new(&t, p, q).unwrap();
                let numeric = distance_numeric(&query, &SolverOptions::default()).unwrap().value.value();
                let oracle = distance_oracle(&query, &OracleOptions::default()).unwrap().value.value();
                worst = worst.max((numeric - oracle).abs());
                m[p - 1][q - 1] = numeric;
                m[q - 1][p - 1] = numeric;
                pairs += 1;
            }
        }
        matrices.push((format!("symmetric-difference N={n}"), m));
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-4 && within_budget(elapsed, 300),
        format!("{pairs} pairs, max |numeric - oracle| = {worst:.3e}, {:.1}s (budget 300s)", elapsed.as_secs_f64()),
    )
}

/// Shortest simple-path length by exhaustive depth-first enumeration.
fn enumerate_paths(n: usize, arrows: &[Arrow], p: usize, q: usize) -> Option<f64> {
    fn walk(v: usize, q: usize, len: f64, seen: &mut Vec<bool>, arrows: &[Arrow], best: &mut Option<f64>) {
        if v == q {
            *best = Some(best.map_or(len, |b: f64| b.min(len)));
            return;
        }
        for a in arrows {
            for (x, y) in [(a.from - 1, a.to - 1), (a.to - 1, a.from - 1)] {
                if x == v && !seen[y] {
                    seen[y] = true;
                    walk(y, q, len + a.epsilon, seen, arrows, best);
                    seen[y] = false;
                }
            }
        }
    }
    let mut seen = vec![false; n];
    seen[p] = true;
    let mut best = None;
    walk(p, q, 0.0, &mut seen, arrows, &mut best);
    best
}

fn graph_metric(matrices: &mut Collected) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut enum_gap, mut reversal_gap) = (0.0f64, 0.0f64);
    let mut mismatched_reachability = 0;
    for g_idx in 0..50 {
        let n = rng.gen_range(2..=7);
        let mut arrows = Vec::new();
        for k in 1..=n {
            for l in k + 1..=n {
                if rng.gen_bool(0.4) {
                    let epsilon = rng.gen_range(0.1..3.0);
                    let (from, to) = if rng.gen_bool(0.5) { (k, l) } else { (l, k) };
                    arrows.push(Arrow { from, to, epsilon });
                }
            }
        }
        let g = WeightedDigraph::new(n, arrows.clone()).unwrap();
        let d = graph_distance_matrix(&g).unwrap();
        for p in 0..n {
            for q in 0..n {
                match (enumerate_paths(n, &arrows, p, q), d[p][q]) {
                    (Some(len), Distance::Finite(v)) => enum_gap = enum_gap.max((len - v).abs()),
                    (None, Distance::Unbounded) => {}
                    _ => mismatched_reachability += 1,
                }
            }
        }
        let flips: Vec<usize> = (0..arrows.len()).filter(|_| rng.gen_bool(0.5)).collect();
        let reversed = graph_distance_matrix(&g.with_reversed(&flips).unwrap()).unwrap();
        for p in 0..n {
            for q in 0..n {
                if d[p][q] != reversed[p][q] {
                    reversal_gap = reversal_gap.max((d[p][q].value() - reversed[p][q].value()).abs());
                    if d[p][q].is_finite() != reversed[p][q].is_finite() {
                        mismatched_reachability += 1;
                    }
                }
            }
        }
        matrices.push((
            format!("random graph {g_idx}"),
            d.iter().map(|r| r.iter().map(|x| x.value()).collect()).collect(),
        ));
    }

    let mut lattice_gap = 0.0f64;
    for n in 2..=10 {
        let path = graph_distance_matrix(&WeightedDigraph::path(n).unwrap()).unwrap();
        for p in 0..n {
            for q in 0..n {
                lattice_gap = lattice_gap.max((path[p][q].value() - p.abs_diff(q) as f64).abs());
            }
        }
        if n >= 3 {
            let cycle = graph_distance_matrix(&WeightedDigraph::cycle(n).unwrap()).unwrap();
            for p in 0..n {
                for q in 0..n {
                    let k = p.abs_diff(q);
                    lattice_gap = lattice_gap.max((cycle[p][q].value() - k.min(n - k) as f64).abs());
                }
            }
        }
    }
    outcome(
        enum_gap <= 1e-12 && reversal_gap <= 1e-12 && mismatched_reachability == 0 && lattice_gap == 0.0,
        format!(
            "enumeration gap {enum_gap:.3e}, reversal gap {reversal_gap:.3e}, reachability mismatches {mismatched_reachability}, path/cycle gap {lattice_gap:.1e}"
        ),
    )
}

/// Matrices emitted through the CLI, parsed back from CSV.
fn cli_matrices(matrices: &mut Collected) {
    let cases: &[(&str, &str, &[usize])] = &[
        ("open", "adjacency-doubled", &[2, 5, 9]),
        ("open", "adjacency-plain", &[4, 7]),
        ("open", "symmetric-difference", &[3, 6]),
        ("closed", "closed-adjacency-doubled", &[3, 6, 10]),
    ];
    for (topology, kind, sizes) in cases {
        for n in *sizes {
            let n_arg = n.to_string();
            let argv = [
                "connes", "--mode", "matrix", "--topology", topology, "--n", &n_arg, "--kind", kind, "--format", "csv",
            ];
            let (mut out, mut err) = (Vec::new(), Vec::new());
            let code = execute(argv, &mut out, &mut err);
            assert_eq!(code, 0, "{}", String::from_utf8_lossy(&err));
            let m = parse_matrix_csv(&String::from_utf8(out).unwrap()).unwrap();
            matrices.push((format!("cli {kind} N={n}"), m));
        }
    }
}

fn metric_axioms(matrices: &Collected) -> Outcome {
    let mut failures = Vec::new();
    let (mut asym, mut tri) = (0.0f64, 0.0f64);
    for (label, m) in matrices {
        let check = check_metric(m);
        asym = asym.max(check.max_asymmetry);
        tri = tri.max(check.max_triangle_excess);
        if !check.passes(1e-9, 1e-8) {
            failures.push(label.clone());
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{} matrices, max asymmetry {asym:.3e}, max triangle excess {tri:.3e}{}",
            matrices.len(),
            if failures.is_empty() { String::new() } else { format!(", failing: {}", failures.join("; ")) }
        ),
    )
}

fn main() {
    // `cargo test` passes harness flags such as `--nocapture`; `--list`
    // must report no tests so tooling that enumerates tests is not confused.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut matrices = Collected::new();
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    results.push((1, "open-lattice exactness", open_exactness(&mut matrices)));
    results.push((2, "closed-lattice exactness", closed_exactness(&mut matrices)));
    results.push((3, "undoubled equivalence", undoubled_equivalence(&mut matrices)));
    results.push((4, "norm identities", norm_identities()));
    results.push((5, "triple axioms", triple_axioms()));
    results.push((6, "real-reduction sufficiency", real_reduction()));
    results.push((7, "symmetric-difference convergence", convergence()));
    results.push((8, "solver vs oracle", solver_vs_oracle(&mut matrices)));
    results.push((9, "graph metric", graph_metric(&mut matrices)));
    cli_matrices(&mut matrices);
    results.push((10, "metric axioms", metric_axioms(&matrices)));

    let mut failed = 0;
    for (id, name, o) in &results {
        println!("criterion {id:>2} {:<4} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
