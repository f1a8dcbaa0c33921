//! Self-check suites comparing the numeric solver with the closed forms and
//! checking the operator identities the closed forms rest on.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::distance::{
    check_metric, distance_exact_closed, distance_exact_open, numeric_distance_matrix, real_reduce, DistanceMatrix,
    SolverOptions,
};
use crate::error::Result;
use crate::graph::{graph_distance_matrix, WeightedDigraph};
use crate::numerics::C64;
use crate::triple::{
    build_triple, commutator_norm, commutator_norm_generic, validate_triple, DiracKind, LatticeFunction, LatticeSpec,
    SpectralTriple, Topology,
};

pub const DISTANCE_TOL: f64 = 1e-6;
pub const IDENTITY_TOL: f64 = 1e-12;
pub const SYMMETRY_TOL: f64 = 1e-9;
pub const TRIANGLE_TOL: f64 = 1e-8;
pub const RANDOM_SAMPLES: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteResult {
    pub suite: &'static str,
    pub passed: bool,
    pub max_deviation: f64,
    pub tolerance: f64,
}

impl SuiteResult {
    fn new(suite: &'static str, max_deviation: f64, tolerance: f64) -> Self {
        SuiteResult {
            suite,
            passed: max_deviation <= tolerance,
            max_deviation,
            tolerance,
        }
    }
}

fn max_gap(m: &DistanceMatrix, exact: impl Fn(usize, usize) -> f64) -> f64 {
    let mut worst = 0.0f64;
    for p in 1..=m.n {
        for q in 1..=m.n {
            worst = worst.max((m.get(p, q).value() - exact(p, q)).abs());
        }
    }
    worst
}

fn random_real(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()
}

/// `Q·Q†` for `Q = i[D̂, f̂]` must be diagonal, with the squared increments
/// (wrap included on the cycle) repeated on both halves.
pub fn qq_deviation(t: &SpectralTriple, f: &[f64]) -> Result<f64> {
    let n = f.len();
    let c = t.commutator_with(&LatticeFunction::from_real(f))?;
    let q = c.scale(C64::new(0.0, 1.0));
    let qq = q.matmul(&q.adjoint())?;
    let wrap = match t.lattice().topology() {
        Topology::Closed => (f[0] - f[n - 1]).powi(2),
        Topology::Open => 0.0,
    };
    let steps: Vec<f64> = f.windows(2).map(|w| (w[1] - w[0]).powi(2)).collect();
    let expected: Vec<f64> = std::iter::once(wrap)
        .chain(steps.iter().copied())
        .chain(steps.iter().copied())
        .chain(std::iter::once(wrap))
        .collect();
    let mut dev = 0.0f64;
    for i in 0..qq.rows() {
        for j in 0..qq.cols() {
            let target = if i == j { expected[i] } else { 0.0 };
            dev = dev.max((qq[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    Ok(dev)
}

/// Runs every suite at lattice size `n` (the cycle uses at least 3 sites).
pub fn run_verification(n: usize, opts: &SolverOptions, seed: u64) -> Result<Vec<SuiteResult>> {
    let open = LatticeSpec::open(n)?;
    let closed = LatticeSpec::closed(n.max(3))?;
    let doubled = build_triple(open, DiracKind::AdjacencyDoubled)?;
    let plain = build_triple(open, DiracKind::AdjacencyPlain)?;
    let sd = build_triple(open, DiracKind::SymmetricDifference)?;
    let cyclic = build_triple(closed, DiracKind::ClosedAdjacencyDoubled)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut suites = Vec::new();

    let m_open = numeric_distance_matrix(&doubled, opts)?;
    let open_gap = max_gap(&m_open, |p, q| distance_exact_open(n, p, q).unwrap_or(f64::NAN));
    suites.push(SuiteResult::new("open-exact", open_gap, DISTANCE_TOL));

    let m_closed = numeric_distance_matrix(&cyclic, opts)?;
    let nc = closed.n_sites();
    let closed_gap = max_gap(&m_closed, |p, q| distance_exact_closed(nc, p, q).unwrap_or(f64::NAN));
    suites.push(SuiteResult::new("closed-exact", closed_gap, DISTANCE_TOL));

    let m_plain = numeric_distance_matrix(&plain, opts)?;
    let plain_gap = max_gap(&m_plain, |p, q| m_open.get(p, q).value());
    suites.push(SuiteResult::new("undoubled-equivalence", plain_gap, DISTANCE_TOL));

    let mut fast_gap = 0.0f64;
    let mut qq_gap = 0.0f64;
    let mut reduce_gap = 0.0f64;
    for _ in 0..RANDOM_SAMPLES {
        for t in [&doubled, &plain, &cyclic] {
            let f = random_real(&mut rng, t.n_sites());
            let lf = LatticeFunction::from_real(&f);
            fast_gap = fast_gap.max((commutator_norm(t, &lf)? - commutator_norm_generic(t, &lf)?).abs());
            if t.kind().is_doubled() {
                qq_gap = qq_gap.max(qq_deviation(t, &f)?);
            }
        }
        for t in [&doubled, &cyclic] {
            let values: Vec<C64> = (0..t.n_sites())
                .map(|_| C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
                .collect();
            let f = LatticeFunction::new(values);
            let reduced = real_reduce(&f, t.lattice().topology());
            let (before, after) = (commutator_norm_generic(t, &f)?, commutator_norm_generic(t, &reduced)?);
            let gap = match t.lattice().topology() {
                Topology::Open => (before - after).abs(),
                Topology::Closed => (after - before).max(0.0),
            };
            reduce_gap = reduce_gap.max(gap);
        }
    }
    suites.push(SuiteResult::new("norm-fast-path", fast_gap, IDENTITY_TOL));
    suites.push(SuiteResult::new("qq-diagonal", qq_gap, IDENTITY_TOL));
    suites.push(SuiteResult::new("real-reduction", reduce_gap, IDENTITY_TOL));

    let samples: Vec<LatticeFunction> = (0..4)
        .map(|_| LatticeFunction::from_real(&random_real(&mut rng, n)))
        .collect();
    let closed_samples: Vec<LatticeFunction> = (0..4)
        .map(|_| LatticeFunction::from_real(&random_real(&mut rng, nc)))
        .collect();
    let mut axioms_ok = true;
    let mut axiom_dev = 0.0f64;
    for (t, s) in [(&doubled, &samples), (&plain, &samples), (&sd, &samples), (&cyclic, &closed_samples)] {
        let report = validate_triple(t, s, IDENTITY_TOL)?;
        axioms_ok &= report.passed();
        axiom_dev = axiom_dev.max(report.max_deviation());
    }
    let mut axioms = SuiteResult::new("triple-axioms", axiom_dev, IDENTITY_TOL);
    axioms.passed &= axioms_ok;
    suites.push(axioms);

    let mut metric_ok = true;
    let mut metric_dev = 0.0f64;
    for m in [&m_open, &m_closed, &m_plain] {
        let check = check_metric(&m.as_f64());
        metric_ok &= check.passes(SYMMETRY_TOL, TRIANGLE_TOL);
        metric_dev = metric_dev.max(check.max_asymmetry).max(check.max_triangle_excess);
    }
    let mut metric = SuiteResult::new("metric-axioms", metric_dev, TRIANGLE_TOL);
    metric.passed &= metric_ok;
    suites.push(metric);

    let path = graph_distance_matrix(&WeightedDigraph::path(n)?)?;
    let cycle = graph_distance_matrix(&WeightedDigraph::cycle(nc)?)?;
    let mut graph_gap = 0.0f64;
    for p in 1..=n {
        for q in 1..=n {
            graph_gap = graph_gap.max((path[p - 1][q - 1].value() - distance_exact_open(n, p, q)?).abs());
        }
    }
    for p in 1..=nc {
        for q in 1..=nc {
            graph_gap = graph_gap.max((cycle[p - 1][q - 1].value() - distance_exact_closed(nc, p, q)?).abs());
        }
    }
    suites.push(SuiteResult::new("graph-consistency", graph_gap, IDENTITY_TOL));

    // symmetric difference has no closed form here; only check it is a metric
    let m_sd = numeric_distance_matrix(&sd, opts)?;
    let sd_check = check_metric(&m_sd.as_f64());
    let mut sd_metric = SuiteResult::new(
        "symmetric-difference-metric",
        sd_check.max_asymmetry.max(sd_check.max_triangle_excess),
        TRIANGLE_TOL,
    );
    sd_metric.passed &= sd_check.passes(SYMMETRY_TOL, TRIANGLE_TOL);
    suites.push(sd_metric);

    Ok(suites)
}
