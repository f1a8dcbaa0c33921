//! Numeric maximization of `f(q) − f(p)` over real `f` with `‖[D, f̂]‖ ≤ 1`.
//!
//! Restricting to real `f` loses nothing (see [`super::real_reduce`]), and
//! `f(p)` is pinned to zero because constants commute with `D`. The
//! commutator is linear in `f` and the norm is absolutely homogeneous, so the
//! problem is equivalent to maximizing the ratio
//! `g(f) = (f(q) − f(p)) / ‖[D, f̂]‖` over nonconstant `f`.
//!
//! Phase one is projected subgradient ascent on `g` from seeded random
//! restarts: the subgradient of the spectral norm comes from a dominant
//! singular pair of `[D, f̂]`, steps shrink as `step/√k`, and `f` is rescaled
//! to unit commutator norm after every step.
//!
//! Phase two (on by default, see [`SolverOptions::refine`]) follows the
//! central path of `max f(q) + (1/t) log det [[I, A(f)], [A(f)†, I]]` with
//! damped Newton steps, where `A(f) = [D, f̂]`. The linear matrix inequality
//! is equivalent to `‖A(f)‖ ≤ 1`, and the final iterate is within
//! `2·dim/t` of the supremum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Distance, DistanceQuery, DistanceResult, Method, UNBOUNDED_FACTOR};
use crate::error::{Error, Result};
use crate::numerics::{
    cholesky, dominant_singular_pair, inverse_from_cholesky, solve_spd, spectral_norm,
    ComplexMatrix, C64,
};
use crate::par::{self, Execution};
use crate::triple::SpectralTriple;

/// Iterations between stall checks in the subgradient phase.
const STALL_WINDOW: usize = 200;
/// Barrier parameter growth per outer iteration.
const BARRIER_GROWTH: f64 = 10.0;
const NEWTON_CAP: usize = 2000;
/// Centering stops once half the squared Newton decrement drops below this.
/// Near the boundary roundoff keeps the decrement around 1e-9.
const CENTERING_TOL: f64 = 1e-8;
/// Newton steps allowed per centering before moving on.
const CENTERING_CAP: usize = 100;
/// Duality-gap target as a fraction of [`SolverOptions::tolerance`].
const GAP_FRACTION: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Iteration cap per subgradient restart.
    pub max_iterations: usize,
    /// Stop when the best objective improves by less than this over a
    /// stall window; also sets the refinement gap target.
    pub tolerance: f64,
    pub restarts: usize,
    /// Initial subgradient step; step `k` is `initial_step / √k`.
    pub initial_step: f64,
    pub seed: u64,
    /// Polish the ascent result with the barrier method.
    pub refine: bool,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: 20_000,
            tolerance: 1e-8,
            restarts: 8,
            initial_step: 0.5,
            seed: 0,
            refine: true,
            execution: Execution::default(),
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        if self.max_iterations == 0 || self.restarts == 0 {
            return Err(Error::Config("max_iterations and restarts must be at least 1".into()));
        }
        if !(self.initial_step > 0.0) {
            return Err(Error::Config("initial step must be positive".into()));
        }
        Ok(())
    }
}

pub fn distance_numeric(query: &DistanceQuery, opts: &SolverOptions) -> Result<DistanceResult> {
    distance_numeric_from_starts(query, opts, &[])
}

/// Like [`distance_numeric`], but the ascent restarts from the given real
/// functions instead of random ones. Starts are gauge-shifted so `f(p) = 0`.
pub fn distance_numeric_from_starts(
    query: &DistanceQuery,
    opts: &SolverOptions,
    starts: &[Vec<f64>],
) -> Result<DistanceResult> {
    opts.validate()?;
    let triple = query.triple();
    let n = triple.n_sites();
    if let Some(bad) = starts.iter().find(|s| s.len() != n) {
        return Err(Error::LengthMismatch {
            expected: n,
            got: bad.len(),
        });
    }
    let problem = Problem::new(triple, query.p() - 1, query.q() - 1);
    if problem.p == problem.q {
        return Ok(DistanceResult {
            value: Distance::Finite(0.0),
            method: Method::Numeric,
            certificate: Some(vec![0.0; n]),
            iterations_used: 0,
            converged: true,
        });
    }

    let jobs: Vec<Start> = if starts.is_empty() {
        (0..opts.restarts).map(Start::Random).collect()
    } else {
        starts.iter().cloned().map(Start::Given).collect()
    };
    let runs = par::map(&jobs, opts.execution, |job| problem.ascend(job, opts));

    let mut iterations = runs.iter().map(|r| r.iterations).sum::<usize>();
    let mut converged = runs.iter().all(|r| r.converged);
    if runs.iter().any(|r| r.unbounded) {
        return Ok(problem.unbounded(iterations));
    }
    // strictly better wins, so ties go to the earliest restart
    let mut best = runs
        .into_iter()
        .reduce(|a, b| if b.value > a.value { b } else { a })
        .expect("at least one restart");

    if opts.refine {
        let polished = problem.barrier(opts);
        iterations += polished.iterations;
        if polished.unbounded {
            return Ok(problem.unbounded(iterations));
        }
        converged = polished.converged;
        if polished.value > best.value {
            best = polished;
        }
    }

    Ok(DistanceResult {
        value: Distance::Finite(best.value.max(0.0)),
        method: Method::Numeric,
        certificate: Some(best.f),
        iterations_used: iterations,
        converged,
    })
}

enum Start {
    Random(usize),
    Given(Vec<f64>),
}

struct Run {
    value: f64,
    f: Vec<f64>,
    iterations: usize,
    converged: bool,
    unbounded: bool,
}

struct Problem<'a> {
    triple: &'a SpectralTriple,
    n: usize,
    p: usize,
    q: usize,
    limit: f64,
    /// Sparse `∂A/∂f_j` for each site `j`, as `(row, col, value)`.
    basis: Vec<Vec<(usize, usize, C64)>>,
}

impl<'a> Problem<'a> {
    fn new(triple: &'a SpectralTriple, p: usize, q: usize) -> Self {
        let n = triple.n_sites();
        let mut basis = vec![Vec::new(); n];
        for e in triple.entries() {
            if e.row_site != e.col_site {
                basis[e.col_site].push((e.row, e.col, e.value));
                basis[e.row_site].push((e.row, e.col, -e.value));
            }
        }
        Problem {
            triple,
            n,
            p,
            q,
            limit: UNBOUNDED_FACTOR * n as f64,
            basis,
        }
    }

    fn unbounded(&self, iterations: usize) -> DistanceResult {
        DistanceResult {
            value: Distance::Unbounded,
            method: Method::Numeric,
            certificate: None,
            iterations_used: iterations,
            converged: true,
        }
    }

    /// Rescales `f` to unit commutator norm; `None` when `[D, f̂] = 0`.
    fn normalized(&self, f: &[f64]) -> Option<Vec<f64>> {
        let sigma = spectral_norm(&self.triple.commutator_real(f));
        (sigma > 0.0).then(|| f.iter().map(|x| x / sigma).collect())
    }

    fn failed_run(&self, iterations: usize) -> Run {
        Run {
            value: f64::NEG_INFINITY,
            f: vec![0.0; self.n],
            iterations,
            converged: true,
            unbounded: true,
        }
    }

    fn ascend(&self, start: &Start, opts: &SolverOptions) -> Run {
        let (p, q, n) = (self.p, self.q, self.n);
        let mut f: Vec<f64> = match start {
            Start::Random(r) => {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                rng.set_stream(*r as u64);
                (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
            }
            Start::Given(g) => g.clone(),
        };
        let shift = f[p];
        f.iter_mut().for_each(|x| *x -= shift);
        let mut f = match self.normalized(&f) {
            Some(f) => f,
            None => {
                let mut e = vec![0.0; n];
                e[q] = 1.0;
                match self.normalized(&e) {
                    Some(e) => e,
                    // f(q) moves freely without touching the commutator
                    None => return self.failed_run(0),
                }
            }
        };

        let mut best_value = f[q];
        let mut best_f = f.clone();
        let mut checkpoint = best_value;
        let mut converged = false;
        let mut iterations = 0;
        let mut pair = DominantPair::new(self.triple.hilbert_dim());

        for k in 1..=opts.max_iterations {
            iterations = k;
            let (sigma, u, v) = pair.update(self.triple, &f);
            if sigma <= 0.0 {
                return self.failed_run(iterations);
            }
            f.iter_mut().for_each(|x| *x /= sigma);
            let ratio = f[q];
            if ratio > best_value {
                best_value = ratio;
                best_f.clone_from(&f);
            }
            if ratio > self.limit {
                return self.failed_run(iterations);
            }

            // σ is now 1: ∇g = e_q − g·∇σ, with ∂σ/∂f_j = Re u†(∂A/∂f_j)v
            let mut grad = vec![0.0; n];
            for (j, g) in grad.iter_mut().enumerate() {
                let dsigma: f64 = self.basis[j]
                    .iter()
                    .map(|&(r, c, val)| (u[r].conj() * val * v[c]).re)
                    .sum();
                *g = -ratio * dsigma;
            }
            grad[q] += 1.0;
            grad[p] = 0.0;
            let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if norm < 1e-14 {
                converged = true;
                break;
            }
            let step = opts.initial_step / (k as f64).sqrt();
            for (x, g) in f.iter_mut().zip(&grad) {
                *x += step * g / norm;
            }

            if k % STALL_WINDOW == 0 {
                if best_value - checkpoint < opts.tolerance {
                    converged = true;
                    break;
                }
                checkpoint = best_value;
            }
        }

        // the iterative pair can underestimate σ; certify with the dense norm
        if pair.is_iterative() {
            if let Some(exact) = self.normalized(&best_f) {
                best_value = exact[q];
                best_f = exact;
            }
        }

        Run {
            value: best_value,
            f: best_f,
            iterations,
            converged,
            unbounded: false,
        }
    }

    /// `[[I, A], [A†, I]]` for `A = [D, f̂]`.
    fn lmi(&self, f: &[f64]) -> ComplexMatrix {
        let h = self.triple.hilbert_dim();
        let mut m = ComplexMatrix::identity(2 * h);
        for e in self.triple.entries() {
            let z = e.value * (f[e.col_site] - f[e.row_site]);
            m[(e.row, h + e.col)] += z;
            m[(h + e.col, e.row)] += z.conj();
        }
        m
    }

    fn barrier(&self, opts: &SolverOptions) -> Run {
        let (n, p, q) = (self.n, self.p, self.q);
        let h = self.triple.hilbert_dim();
        let free: Vec<usize> = (0..n).filter(|&j| j != p).collect();
        let m = free.len();
        // each ∂M/∂f_j as hermitian entries in the doubled space
        let lifted: Vec<Vec<(usize, usize, C64)>> = free
            .iter()
            .map(|&j| {
                self.basis[j]
                    .iter()
                    .flat_map(|&(r, c, val)| [(r, h + c, val), (h + c, r, val.conj())])
                    .collect()
            })
            .collect();
        let gap_target = GAP_FRACTION * opts.tolerance;
        let nu = (2 * h) as f64;

        let mut f = vec![0.0; n];
        let mut t = 1.0;
        let mut steps = 0;
        let mut converged = false;
        let mut chol = cholesky(&self.lmi(&f)).expect("origin is interior");

        'outer: loop {
            for _ in 0..CENTERING_CAP {
                let w = inverse_from_cholesky(&chol);
                let mut grad = vec![0.0; m];
                for (i, &j) in free.iter().enumerate() {
                    let tr: f64 = lifted[i].iter().map(|&(r, s, b)| (w[(s, r)] * b).re).sum();
                    grad[i] = tr + if j == q { t } else { 0.0 };
                }
                let mut hess = vec![0.0; m * m];
                for i in 0..m {
                    for k in i..m {
                        let mut acc = 0.0;
                        for &(r, s, b) in &lifted[i] {
                            for &(u, v, g) in &lifted[k] {
                                acc += (w[(v, r)] * b * w[(s, u)] * g).re;
                            }
                        }
                        hess[i * m + k] = acc;
                        hess[k * m + i] = acc;
                    }
                }
                let Some(delta) = solve_with_ridge(&mut hess, &grad) else {
                    break 'outer;
                };
                let decrement: f64 = grad.iter().zip(&delta).map(|(g, d)| g * d).sum();
                if decrement / 2.0 <= CENTERING_TOL {
                    break;
                }

                steps += 1;
                if steps > NEWTON_CAP {
                    break 'outer;
                }
                // damped step 1/(1+λ) keeps a self-concordant barrier interior
                let lambda = decrement.sqrt();
                let mut s = if lambda > 0.25 { 1.0 / (1.0 + lambda) } else { 1.0 };
                loop {
                    let mut trial = f.clone();
                    for (&j, d) in free.iter().zip(&delta) {
                        trial[j] += s * d;
                    }
                    if let Some(l) = cholesky(&self.lmi(&trial)) {
                        f = trial;
                        chol = l;
                        break;
                    }
                    s *= 0.5;
                    if s < 1e-14 {
                        break 'outer;
                    }
                }
                if f[q] > self.limit {
                    return self.failed_run(steps);
                }
            }
            if nu / t <= gap_target {
                converged = true;
                break;
            }
            t *= BARRIER_GROWTH;
        }

        match self.normalized(&f) {
            Some(cert) => Run {
                value: cert[q] - cert[p],
                f: cert,
                iterations: steps,
                converged,
                unbounded: false,
            },
            None => Run {
                value: f64::NEG_INFINITY,
                f,
                iterations: steps,
                converged,
                unbounded: false,
            },
        }
    }
}

/// Largest Hilbert dimension for which the ascent takes the dominant
/// singular pair from a dense eigendecomposition.
const DENSE_PAIR_MAX_DIM: usize = 32;
const POWER_MAX_STEPS: usize = 500;
const POWER_REL_TOL: f64 = 1e-12;

/// Dominant singular pair of `[D, f̂]` across ascent steps. Small problems
/// use the dense Jacobi route; larger ones run power iteration on `A†A`
/// over the sparse commutator, warm-started from the previous step.
struct DominantPair {
    dim: usize,
    v: Vec<C64>,
}

impl DominantPair {
    fn new(dim: usize) -> Self {
        // deterministic, not orthogonal to any coordinate direction
        let v = (0..dim)
            .map(|i| C64::new(1.0 + 0.37 * (i as f64).sin(), 0.21 * (i as f64).cos()))
            .collect();
        DominantPair { dim, v }
    }

    fn is_iterative(&self) -> bool {
        self.dim > DENSE_PAIR_MAX_DIM
    }

    fn update(&mut self, triple: &SpectralTriple, f: &[f64]) -> (f64, Vec<C64>, Vec<C64>) {
        if !self.is_iterative() {
            return dominant_singular_pair(&triple.commutator_real(f));
        }
        let entries: Vec<(usize, usize, C64)> = triple
            .entries()
            .iter()
            .map(|e| (e.row, e.col, e.value * (f[e.col_site] - f[e.row_site])))
            .collect();
        let apply = |x: &[C64]| {
            let mut y = vec![C64::new(0.0, 0.0); self.dim];
            for &(r, c, a) in &entries {
                y[r] += a * x[c];
            }
            y
        };
        let apply_adjoint = |y: &[C64]| {
            let mut x = vec![C64::new(0.0, 0.0); self.dim];
            for &(r, c, a) in &entries {
                x[c] += a.conj() * y[r];
            }
            x
        };
        let norm = |x: &[C64]| x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();

        let mut v = std::mem::take(&mut self.v);
        let mut sigma = 0.0;
        for _ in 0..POWER_MAX_STEPS {
            let u = apply(&v);
            let next = norm(&u);
            let mut w = apply_adjoint(&u);
            let wn = norm(&w);
            if wn == 0.0 {
                break;
            }
            w.iter_mut().for_each(|z| *z /= wn);
            v = w;
            let done = (next - sigma).abs() <= POWER_REL_TOL * next;
            sigma = next;
            if done {
                break;
            }
        }
        let mut u = apply(&v);
        let un = norm(&u);
        if un > 0.0 {
            u.iter_mut().for_each(|z| *z /= un);
        }
        self.v.clone_from(&v);
        (un, u, v)
    }
}

/// Newton system solve; retries once with a small ridge when the Hessian is
/// numerically singular.
fn solve_with_ridge(hess: &mut [f64], grad: &[f64]) -> Option<Vec<f64>> {
    if let Some(x) = solve_spd(hess, grad) {
        return Some(x);
    }
    let m = grad.len();
    let scale = (0..m).map(|i| hess[i * m + i].abs()).fold(0.0, f64::max).max(1.0);
    for i in 0..m {
        hess[i * m + i] += 1e-12 * scale;
    }
    solve_spd(hess, grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triple::{build_triple, DiracKind, LatticeSpec};

    fn solve(kind: DiracKind, n: usize, p: usize, q: usize, opts: &SolverOptions) -> DistanceResult {
        let lattice = LatticeSpec::new(n, kind.topology()).unwrap();
        let t = build_triple(lattice, kind).unwrap();
        distance_numeric(&DistanceQuery::new(&t, p, q).unwrap(), opts).unwrap()
    }

    #[test]
    fn open_adjacency_pair() {
        let r = solve(DiracKind::AdjacencyDoubled, 6, 1, 5, &SolverOptions::default());
        assert!((r.value.value() - 4.0).abs() < 1e-6, "{r:?}");
        assert!(r.converged);
    }

    #[test]
    fn closed_adjacency_pair() {
        let r = solve(DiracKind::ClosedAdjacencyDoubled, 6, 1, 5, &SolverOptions::default());
        assert!((r.value.value() - 2.0).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn symmetric_difference_two_sites() {
        let r = solve(DiracKind::SymmetricDifference, 2, 1, 2, &SolverOptions::default());
        assert!((r.value.value() - 2.0).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn same_site_is_zero() {
        let r = solve(DiracKind::SymmetricDifference, 4, 3, 3, &SolverOptions::default());
        assert_eq!(r.value, Distance::Finite(0.0));
    }

    #[test]
    fn subgradient_alone_gives_a_feasible_lower_bound() {
        let opts = SolverOptions {
            refine: false,
            max_iterations: 2000,
            ..SolverOptions::default()
        };
        let r = solve(DiracKind::AdjacencyDoubled, 5, 1, 4, &opts);
        let d = r.value.value();
        assert!(d <= 3.0 + 1e-9 && d > 2.5, "{r:?}");
    }

    #[test]
    fn rejects_bad_options_and_starts() {
        let t = build_triple(LatticeSpec::open(3).unwrap(), DiracKind::AdjacencyDoubled).unwrap();
        let query = DistanceQuery::new(&t, 1, 3).unwrap();
        let opts = SolverOptions {
            tolerance: 0.0,
            ..SolverOptions::default()
        };
        assert!(matches!(distance_numeric(&query, &opts), Err(Error::Config(_))));
        assert!(matches!(
            distance_numeric_from_starts(&query, &SolverOptions::default(), &[vec![0.0; 2]]),
            Err(Error::LengthMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn deterministic_given_seed() {
        let opts = SolverOptions {
            seed: 7,
            ..SolverOptions::default()
        };
        let a = solve(DiracKind::SymmetricDifference, 5, 1, 4, &opts);
        let b = solve(DiracKind::SymmetricDifference, 5, 1, 4, &opts);
        assert_eq!(a, b);
    }
}
