//! Connes' distance `d(p, q) = sup { |f(p) − f(q)| : ‖[D, f̂]‖ ≤ 1 }`.
//!
//! Three routes are provided: closed forms for the adjacency operators, a
//! numeric maximizer for any triple ([`distance_numeric`]), and a slow
//! coordinate-ascent verifier for desk-scale lattices ([`distance_oracle`]).

mod oracle;
mod solver;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numerics::C64;
use crate::par::{self, Execution};
use crate::triple::{DiracKind, LatticeFunction, SpectralTriple, Topology};

pub use oracle::{coordinate_ascent, distance_oracle, AscentOutcome, OracleOptions, ORACLE_MAX_SITES};
pub use solver::{distance_numeric, distance_numeric_from_starts, SolverOptions};

/// Objective values beyond `UNBOUNDED_FACTOR × n_sites` are reported unbounded.
pub const UNBOUNDED_FACTOR: f64 = 1e6;

/// A distance value; the supremum may diverge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Distance {
    Finite(f64),
    Unbounded,
}

impl Distance {
    /// The value, with `Unbounded` mapped to `+∞`.
    pub fn value(self) -> f64 {
        match self {
            Distance::Finite(v) => v,
            Distance::Unbounded => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Distance::Finite(_))
    }
}

impl Serialize for Distance {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Distance::Finite(v) => s.serialize_f64(*v),
            Distance::Unbounded => s.serialize_str("unbounded"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactOpen,
    ExactClosed,
    Numeric,
    Oracle,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceResult {
    pub value: Distance,
    pub method: Method,
    /// Feasible function (real, indexed by site) attaining `value`.
    pub certificate: Option<Vec<f64>>,
    pub iterations_used: usize,
    /// False when the iteration budget ran out before the stopping rule fired.
    pub converged: bool,
}

impl DistanceResult {
    fn exact(value: f64, method: Method) -> Self {
        DistanceResult {
            value: Distance::Finite(value),
            method,
            certificate: None,
            iterations_used: 0,
            converged: true,
        }
    }
}

/// A pair of 1-based sites on a triple.
#[derive(Clone, Copy, Debug)]
pub struct DistanceQuery<'a> {
    triple: &'a SpectralTriple,
    p: usize,
    q: usize,
}

impl<'a> DistanceQuery<'a> {
    pub fn new(triple: &'a SpectralTriple, p: usize, q: usize) -> Result<Self> {
        let n = triple.n_sites();
        check_site(p, n)?;
        check_site(q, n)?;
        Ok(DistanceQuery { triple, p, q })
    }

    pub fn triple(&self) -> &'a SpectralTriple {
        self.triple
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }
}

fn check_site(index: usize, n: usize) -> Result<()> {
    if index == 0 || index > n {
        return Err(Error::IndexOutOfRange { index, n });
    }
    Ok(())
}

/// Real function with the same commutator norm bound as `f`.
///
/// Open lattice: `F_1 = 0`, `F_{k+1} = F_k + |f_{k+1} − f_k|`, which keeps
/// every increment modulus. Closed lattice: `F_k = |f_k − f_1|`, which can
/// only shrink increments (including the wrap `N → 1`).
pub fn real_reduce(f: &LatticeFunction, topology: Topology) -> LatticeFunction {
    let v = f.values();
    let out: Vec<f64> = match topology {
        Topology::Open => {
            let mut acc = 0.0;
            std::iter::once(0.0)
                .chain(v.windows(2).map(|w| {
                    acc += (w[1] - w[0]).norm();
                    acc
                }))
                .take(v.len())
                .collect()
        }
        Topology::Closed => {
            let a: C64 = v.first().copied().unwrap_or_default();
            v.iter().map(|&z| (z - a).norm()).collect()
        }
    };
    LatticeFunction::from_real(&out)
}

/// `|p − q|` on the open lattice.
pub fn distance_exact_open(n: usize, p: usize, q: usize) -> Result<f64> {
    check_site(p, n)?;
    check_site(q, n)?;
    Ok(p.abs_diff(q) as f64)
}

/// `min(|p − q|, N − |p − q|)` on the cycle.
pub fn distance_exact_closed(n: usize, p: usize, q: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::TooSmall { got: n, min: 3 });
    }
    check_site(p, n)?;
    check_site(q, n)?;
    let k = p.abs_diff(q);
    Ok(k.min(n - k) as f64)
}

/// Closed form for `query` when the kind admits one.
pub fn distance_exact(query: &DistanceQuery) -> Option<DistanceResult> {
    let n = query.triple.n_sites();
    let (p, q) = (query.p, query.q);
    match query.triple.kind() {
        DiracKind::AdjacencyPlain | DiracKind::AdjacencyDoubled => distance_exact_open(n, p, q)
            .ok()
            .map(|d| DistanceResult::exact(d, Method::ExactOpen)),
        DiracKind::ClosedAdjacencyDoubled => distance_exact_closed(n, p, q)
            .ok()
            .map(|d| DistanceResult::exact(d, Method::ExactClosed)),
        DiracKind::SymmetricDifference => None,
    }
}

/// All-pairs distances with solver bookkeeping.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceMatrix {
    pub n: usize,
    pub values: Vec<Vec<Distance>>,
    pub total_iterations: usize,
    pub all_converged: bool,
    pub numeric_pairs: usize,
}

impl DistanceMatrix {
    pub fn get(&self, p: usize, q: usize) -> Distance {
        self.values[p - 1][q - 1]
    }

    pub fn as_f64(&self) -> Vec<Vec<f64>> {
        self.values
            .iter()
            .map(|row| row.iter().map(|d| d.value()).collect())
            .collect()
    }
}

/// Distance matrix using closed forms where available.
pub fn distance_matrix(triple: &SpectralTriple, opts: &SolverOptions) -> Result<DistanceMatrix> {
    matrix_impl(triple, opts, true)
}

/// Distance matrix computed by the numeric solver for every pair.
pub fn numeric_distance_matrix(triple: &SpectralTriple, opts: &SolverOptions) -> Result<DistanceMatrix> {
    matrix_impl(triple, opts, false)
}

fn matrix_impl(triple: &SpectralTriple, opts: &SolverOptions, prefer_exact: bool) -> Result<DistanceMatrix> {
    let n = triple.n_sites();
    let pairs: Vec<(usize, usize)> = (1..=n)
        .flat_map(|p| (p + 1..=n).map(move |q| (p, q)))
        .collect();
    // restarts run sequentially inside each pair; the pairs carry the parallelism
    let inner = SolverOptions {
        execution: Execution::Sequential,
        ..opts.clone()
    };
    let results = par::map(&pairs, opts.execution, |&(p, q)| {
        let query = DistanceQuery::new(triple, p, q)?;
        match prefer_exact.then(|| distance_exact(&query)).flatten() {
            Some(r) => Ok(r),
            None => distance_numeric(&query, &inner),
        }
    });

    let mut values = vec![vec![Distance::Finite(0.0); n]; n];
    let mut total_iterations = 0;
    let mut all_converged = true;
    let mut numeric_pairs = 0;
    for (&(p, q), r) in pairs.iter().zip(results) {
        let r = r?;
        values[p - 1][q - 1] = r.value;
        values[q - 1][p - 1] = r.value;
        total_iterations += r.iterations_used;
        all_converged &= r.converged;
        numeric_pairs += usize::from(r.method == Method::Numeric);
    }
    Ok(DistanceMatrix {
        n,
        values,
        total_iterations,
        all_converged,
        numeric_pairs,
    })
}

/// Worst violations of the metric axioms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricCheck {
    pub max_diagonal: f64,
    pub max_asymmetry: f64,
    /// Largest `d(i,k) − d(i,j) − d(j,k)` over finite triples.
    pub max_triangle_excess: f64,
}

impl MetricCheck {
    pub fn passes(&self, symmetry_tol: f64, triangle_tol: f64) -> bool {
        self.max_diagonal == 0.0 && self.max_asymmetry <= symmetry_tol && self.max_triangle_excess <= triangle_tol
    }
}

pub fn check_metric(d: &[Vec<f64>]) -> MetricCheck {
    let n = d.len();
    let mut check = MetricCheck {
        max_diagonal: 0.0,
        max_asymmetry: 0.0,
        max_triangle_excess: f64::NEG_INFINITY,
    };
    for i in 0..n {
        check.max_diagonal = check.max_diagonal.max(d[i][i].abs());
        for j in 0..n {
            if d[i][j].is_finite() && d[j][i].is_finite() {
                check.max_asymmetry = check.max_asymmetry.max((d[i][j] - d[j][i]).abs());
            } else if d[i][j].is_finite() != d[j][i].is_finite() {
                check.max_asymmetry = f64::INFINITY;
            }
            for k in 0..n {
                if d[i][j].is_finite() && d[j][k].is_finite() {
                    let excess = d[i][k] - d[i][j] - d[j][k];
                    check.max_triangle_excess = check.max_triangle_excess.max(excess);
                }
            }
        }
    }
    check.max_triangle_excess = check.max_triangle_excess.max(0.0);
    check
}
