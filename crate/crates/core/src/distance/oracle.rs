//! Brute-force verifier: coordinate ascent on the distance ratio in the
//! increment parameterization `f_1 = 0`, `f_{k+1} = f_k + δ_k`.
//!
//! It shares nothing with the numeric solver beyond the public dense
//! commutator and spectral norm, so agreement between the two is evidence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Distance, DistanceQuery, DistanceResult, Method, UNBOUNDED_FACTOR};
use crate::error::{Error, Result};
use crate::numerics::spectral_norm;
use crate::triple::LatticeFunction;

/// Largest lattice the oracle accepts.
pub const ORACLE_MAX_SITES: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleOptions {
    pub starts: usize,
    pub seed: u64,
    pub initial_step: f64,
    pub final_step: f64,
    pub max_passes: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            starts: 12,
            seed: 0x5eed,
            initial_step: 0.5,
            final_step: 1e-5,
            max_passes: 20_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AscentOutcome {
    pub point: Vec<f64>,
    pub value: f64,
    pub passes: usize,
    /// The step shrank below the final step before the pass cap.
    pub finished: bool,
}

/// Maximizes a scale-invariant objective by coordinate moves of `±step`.
///
/// Each coordinate keeps moving while it improves; the step halves after a
/// pass with no improvement. The point is rescaled to unit max-norm after
/// every pass, which leaves a scale-invariant objective unchanged.
pub fn coordinate_ascent<F>(
    mut objective: F,
    start: Vec<f64>,
    initial_step: f64,
    final_step: f64,
    max_passes: usize,
) -> AscentOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    let mut x = start;
    let mut fx = objective(&x);
    let mut step = initial_step;
    let mut passes = 0;
    while step >= final_step && passes < max_passes {
        passes += 1;
        let mut improved = false;
        for i in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut moved = false;
                for _ in 0..64 {
                    let old = x[i];
                    x[i] += dir * step;
                    let fy = objective(&x);
                    if fy > fx {
                        fx = fy;
                        moved = true;
                    } else {
                        x[i] = old;
                        break;
                    }
                }
                if moved {
                    improved = true;
                    break;
                }
            }
        }
        let scale = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if scale > 0.0 {
            x.iter_mut().for_each(|v| *v /= scale);
        }
        if !improved {
            step *= 0.5;
        }
    }
    AscentOutcome {
        point: x,
        value: fx,
        passes,
        finished: step < final_step,
    }
}

fn integrate(increments: &[f64]) -> Vec<f64> {
    let mut f = Vec::with_capacity(increments.len() + 1);
    f.push(0.0);
    let mut acc = 0.0;
    for d in increments {
        acc += d;
        f.push(acc);
    }
    f
}

pub fn distance_oracle(query: &DistanceQuery, opts: &OracleOptions) -> Result<DistanceResult> {
    let triple = query.triple();
    let n = triple.n_sites();
    if n > ORACLE_MAX_SITES {
        return Err(Error::TooLarge {
            got: n,
            max: ORACLE_MAX_SITES,
        });
    }
    let (p, q) = (query.p() - 1, query.q() - 1);
    if p == q {
        return Ok(DistanceResult {
            value: Distance::Finite(0.0),
            method: Method::Oracle,
            certificate: Some(vec![0.0; n]),
            iterations_used: 0,
            converged: true,
        });
    }

    let norm_of = |f: &[f64]| -> f64 {
        triple
            .commutator_with(&LatticeFunction::from_real(f))
            .map(|c| spectral_norm(&c))
            .unwrap_or(f64::NAN)
    };
    let ratio = |increments: &[f64]| -> f64 {
        let f = integrate(increments);
        let gap = (f[q] - f[p]).abs();
        let norm = norm_of(&f);
        if norm > 0.0 {
            gap / norm
        } else if gap > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    };

    let mut best: Option<AscentOutcome> = None;
    let mut passes = 0;
    let mut converged = true;
    for s in 0..opts.starts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(s as u64);
        let start: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let out = coordinate_ascent(ratio, start, opts.initial_step, opts.final_step, opts.max_passes);
        passes += out.passes;
        converged &= out.finished;
        if best.as_ref().map_or(true, |b| out.value > b.value) {
            best = Some(out);
        }
    }
    let best = best.expect("at least one start");
    if best.value > UNBOUNDED_FACTOR * n as f64 {
        return Ok(DistanceResult {
            value: Distance::Unbounded,
            method: Method::Oracle,
            certificate: None,
            iterations_used: passes,
            converged,
        });
    }

    let mut f = integrate(&best.point);
    let norm = norm_of(&f);
    let sign = if f[q] >= f[p] { 1.0 } else { -1.0 };
    let base = f[p];
    f.iter_mut().for_each(|v| *v = sign * (*v - base) / norm);
    Ok(DistanceResult {
        value: Distance::Finite(f[q] - f[p]),
        method: Method::Oracle,
        certificate: Some(f),
        iterations_used: passes,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triple::{build_triple, DiracKind, LatticeSpec};

    #[test]
    fn open_adjacency_oracle() {
        let t = build_triple(LatticeSpec::open(4).unwrap(), DiracKind::AdjacencyDoubled).unwrap();
        let r = distance_oracle(&DistanceQuery::new(&t, 1, 3).unwrap(), &OracleOptions::default()).unwrap();
        assert!((r.value.value() - 2.0).abs() < 1e-4, "{r:?}");
        let zero = distance_oracle(&DistanceQuery::new(&t, 2, 2).unwrap(), &OracleOptions::default()).unwrap();
        assert_eq!(zero.value, Distance::Finite(0.0));
    }

    #[test]
    fn oracle_size_guard() {
        let t = build_triple(LatticeSpec::open(9).unwrap(), DiracKind::SymmetricDifference).unwrap();
        let q = DistanceQuery::new(&t, 1, 2).unwrap();
        assert_eq!(
            distance_oracle(&q, &OracleOptions::default()),
            Err(Error::TooLarge { got: 9, max: 8 })
        );
    }

    #[test]
    fn ascent_on_smooth_ratio() {
        // (x + y) / √(x² + y²) peaks at √2 on the diagonal
        let out = coordinate_ascent(
            |v: &[f64]| (v[0] + v[1]) / (v[0] * v[0] + v[1] * v[1]).sqrt(),
            vec![1.0, -0.3],
            0.5,
            1e-6,
            10_000,
        );
        assert!((out.value - 2f64.sqrt()).abs() < 1e-9);
        assert!(out.finished);
    }
}
