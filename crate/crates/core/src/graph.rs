//! Distance from the discrete norm `‖df‖ = sup |f(k) − f(l)| / ε_kl` over
//! the arrows of a weighted digraph.
//!
//! The supremum of `|f(p) − f(q)|` under `‖df‖ ≤ 1` is the shortest-path
//! distance in the graph with orientations forgotten and edge lengths `ε`,
//! so [`graph_distance`] runs Dijkstra on the symmetrized graph.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use crate::distance::Distance;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Arrow {
    /// 1-based tail vertex.
    pub from: usize,
    /// 1-based head vertex.
    pub to: usize,
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedDigraph {
    n_vertices: usize,
    arrows: Vec<Arrow>,
    /// Symmetrized adjacency, 0-based, keeping the shortest ε per neighbour.
    neighbours: Vec<Vec<(usize, f64)>>,
}

impl WeightedDigraph {
    /// Rejects self-loops, non-positive or non-finite weights, duplicate
    /// ordered pairs and out-of-range vertices.
    pub fn new(n_vertices: usize, arrows: Vec<Arrow>) -> Result<Self> {
        if n_vertices == 0 {
            return Err(Error::InvariantViolation("graph needs at least one vertex".into()));
        }
        let mut seen = HashSet::new();
        let mut neighbours: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_vertices];
        for a in &arrows {
            for v in [a.from, a.to] {
                if v == 0 || v > n_vertices {
                    return Err(Error::InvariantViolation(format!(
                        "vertex {v} outside 1..={n_vertices}"
                    )));
                }
            }
            if a.from == a.to {
                return Err(Error::InvariantViolation(format!("self-loop at vertex {}", a.from)));
            }
            if !(a.epsilon > 0.0 && a.epsilon.is_finite()) {
                return Err(Error::InvariantViolation(format!(
                    "arrow {} -> {} has non-positive weight {}",
                    a.from, a.to, a.epsilon
                )));
            }
            if !seen.insert((a.from, a.to)) {
                return Err(Error::InvariantViolation(format!(
                    "duplicate arrow {} -> {}",
                    a.from, a.to
                )));
            }
            let (k, l) = (a.from - 1, a.to - 1);
            for (x, y) in [(k, l), (l, k)] {
                match neighbours[x].iter_mut().find(|(v, _)| *v == y) {
                    Some(e) => e.1 = e.1.min(a.epsilon),
                    None => neighbours[x].push((y, a.epsilon)),
                }
            }
        }
        Ok(WeightedDigraph {
            n_vertices,
            arrows,
            neighbours,
        })
    }

    /// Arrows `(k, l)` with unit weight.
    pub fn unit(n_vertices: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let arrows = pairs
            .iter()
            .map(|&(from, to)| Arrow { from, to, epsilon: 1.0 })
            .collect();
        Self::new(n_vertices, arrows)
    }

    /// The oriented path `1 → 2 → … → n`.
    pub fn path(n: usize) -> Result<Self> {
        let pairs: Vec<_> = (1..n).map(|k| (k, k + 1)).collect();
        Self::unit(n, &pairs)
    }

    /// The oriented cycle `1 → 2 → … → n → 1`.
    pub fn cycle(n: usize) -> Result<Self> {
        let mut pairs: Vec<_> = (1..n).map(|k| (k, k + 1)).collect();
        pairs.push((n, 1));
        Self::unit(n, &pairs)
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    /// Same graph with the arrows at `indices` reversed.
    pub fn with_reversed(&self, indices: &[usize]) -> Result<Self> {
        let mut arrows = self.arrows.clone();
        for &i in indices {
            let a = &mut arrows[i];
            std::mem::swap(&mut a.from, &mut a.to);
        }
        Self::new(self.n_vertices, arrows)
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v == 0 || v > self.n_vertices {
            return Err(Error::IndexOutOfRange {
                index: v,
                n: self.n_vertices,
            });
        }
        Ok(())
    }
}

/// `sup { |f(k) − f(l)| / ε_kl : (k, l) ∈ E }`.
pub fn df_norm(g: &WeightedDigraph, f: &[f64]) -> Result<f64> {
    if g.arrows.is_empty() {
        return Err(Error::NoArrows);
    }
    if f.len() != g.n_vertices {
        return Err(Error::LengthMismatch {
            expected: g.n_vertices,
            got: f.len(),
        });
    }
    Ok(g.arrows
        .iter()
        .map(|a| (f[a.from - 1] - f[a.to - 1]).abs() / a.epsilon)
        .fold(0.0, f64::max))
}

#[derive(PartialEq)]
struct Frontier(f64, usize);

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest distances from 1-based `p`, orientation ignored.
pub fn shortest_path_oracle(g: &WeightedDigraph, p: usize) -> Result<Vec<Distance>> {
    g.check_vertex(p)?;
    let mut dist = vec![f64::INFINITY; g.n_vertices];
    let mut heap = BinaryHeap::new();
    dist[p - 1] = 0.0;
    heap.push(Frontier(0.0, p - 1));
    while let Some(Frontier(d, v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(w, eps) in &g.neighbours[v] {
            let nd = d + eps;
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(Frontier(nd, w));
            }
        }
    }
    Ok(dist
        .into_iter()
        .map(|d| if d.is_finite() { Distance::Finite(d) } else { Distance::Unbounded })
        .collect())
}

pub fn graph_distance(g: &WeightedDigraph, p: usize, q: usize) -> Result<Distance> {
    g.check_vertex(q)?;
    Ok(shortest_path_oracle(g, p)?[q - 1])
}

/// All-pairs distances, row `p` from [`shortest_path_oracle`].
///
/// Summing a path from either end can round differently, so each pair keeps
/// the smaller of its two values and the matrix is exactly symmetric.
pub fn graph_distance_matrix(g: &WeightedDigraph) -> Result<Vec<Vec<Distance>>> {
    let mut d: Vec<Vec<Distance>> = (1..=g.n_vertices).map(|p| shortest_path_oracle(g, p)).collect::<Result<_>>()?;
    for p in 0..g.n_vertices {
        for q in p + 1..g.n_vertices {
            let v = match (d[p][q], d[q][p]) {
                (Distance::Finite(a), Distance::Finite(b)) => Distance::Finite(a.min(b)),
                (a, _) => a,
            };
            d[p][q] = v;
            d[q][p] = v;
        }
    }
    Ok(d)
}
