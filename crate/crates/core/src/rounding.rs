//! Turning fractional points into vertex subsets.
//!
//! [`round_to_integral`] moves mass between two fractional coordinates at a
//! time, always toward the one with the larger `λx_i + s_i` score (where
//! `s_i` sums `x` over the neighbors of `i`). For `λ >= 1` no such transfer
//! decreases `g(x) = xᵀ(A + λI)x`, and each transfer makes at least one
//! coordinate integral.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::error::{DksError, Result};
use crate::fw::{FractionalPoint, INTEGRAL_TOL};
use crate::graph::{Graph, ProblemInstance};
use crate::scalar::{count, lit, Scalar};
use crate::select::top_k_indices;

/// An integral solution: `k` vertices and their induced statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexSelection<T> {
    /// Sorted dense vertex ids.
    pub vertices: Vec<usize>,
    pub induced_edges: usize,
    /// `2e / (k(k-1))`; zero when `k < 2`.
    pub normalized_density: f64,
    /// `2e + λk`, the objective at the indicator vector.
    pub objective_at_lambda: T,
}

impl<T: Scalar> VertexSelection<T> {
    pub fn from_vertices(g: &Graph, mut vertices: Vec<usize>, lambda: T) -> Result<Self> {
        vertices.sort_unstable();
        let induced_edges = g.induced_edge_count(&vertices)?;
        let k = vertices.len();
        let normalized_density = if k >= 2 {
            2.0 * induced_edges as f64 / (k as f64 * (k as f64 - 1.0))
        } else {
            0.0
        };
        let objective_at_lambda = lit::<T>(2.0) * count::<T>(induced_edges) + lambda * count::<T>(k);
        Ok(Self { vertices, induced_edges, normalized_density, objective_at_lambda })
    }

    pub fn k(&self) -> usize {
        self.vertices.len()
    }

    /// Same vertices, objective re-evaluated at another loading.
    pub fn with_lambda<U: Scalar>(&self, lambda: U) -> VertexSelection<U> {
        let k = self.vertices.len();
        VertexSelection {
            vertices: self.vertices.clone(),
            induced_edges: self.induced_edges,
            normalized_density: self.normalized_density,
            objective_at_lambda: lit::<U>(2.0) * count::<U>(self.induced_edges) + lambda * count::<U>(k),
        }
    }
}

/// The `k` largest entries of `x` (lowest index wins ties) as a selection.
pub fn project_top_k<T: Scalar>(g: &Graph, x: &[T], k: usize, lambda: T) -> Result<VertexSelection<T>> {
    if x.len() < k {
        return Err(DksError::Domain(format!("cannot pick {k} entries from {}", x.len())));
    }
    VertexSelection::from_vertices(g, top_k_indices(x, k), lambda)
}

/// Score key ordered by value, then index.
#[derive(Debug, Clone, Copy)]
struct Key<T>(T, usize);

impl<T: Scalar> PartialEq for Key<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Scalar> Eq for Key<T> {}
impl<T: Scalar> PartialOrd for Key<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Scalar> Ord for Key<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.partial_cmp(&other.0).unwrap_or(Ordering::Equal).then(self.1.cmp(&other.1))
    }
}

/// One mass transfer `x ← x + δ(e_i − e_j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundingStep<T> {
    /// Receiving coordinate `i` (largest score).
    pub receiver: usize,
    /// Donating coordinate `j` (smallest score).
    pub donor: usize,
    pub delta: T,
    /// Whether `{i, j}` is an edge.
    pub adjacent: bool,
}

/// Incremental rounding state. Scores of fractional vertices live in an
/// ordered set; a transfer touches only `i`, `j`, and their neighbors.
pub struct Rounder<'g, T: Scalar> {
    graph: &'g Graph,
    lambda: T,
    x: Vec<T>,
    s: Vec<T>,
    fractional: BTreeSet<Key<T>>,
    score: Vec<Option<T>>,
}

impl<'g, T: Scalar> Rounder<'g, T> {
    pub fn new(inst: &ProblemInstance<'g, T>, x: &[T]) -> Result<Self> {
        if inst.lambda < T::one() {
            return Err(DksError::Precondition(format!(
                "rounding needs λ >= 1 to be monotone, got {}",
                inst.lambda
            )));
        }
        if x.len() != inst.n() {
            return Err(DksError::Domain(format!("point has length {}, expected {}", x.len(), inst.n())));
        }
        let mut x = FractionalPoint::new(x.to_vec(), inst.k)?.into_vec();
        let tol = lit::<T>(INTEGRAL_TOL);
        for v in x.iter_mut() {
            if *v <= tol {
                *v = T::zero();
            } else if *v >= T::one() - tol {
                *v = T::one();
            }
        }
        let g = inst.graph;
        let s: Vec<T> = (0..g.n())
            .map(|i| g.neighbors(i).iter().map(|&l| x[l as usize]).sum())
            .collect();
        let mut r = Rounder {
            graph: g,
            lambda: inst.lambda,
            score: vec![None; g.n()],
            fractional: BTreeSet::new(),
            x,
            s,
        };
        for i in 0..g.n() {
            if r.is_fractional(i) {
                r.insert(i);
            }
        }
        Ok(r)
    }

    fn is_fractional(&self, i: usize) -> bool {
        self.x[i] > T::zero() && self.x[i] < T::one()
    }

    fn insert(&mut self, i: usize) {
        let sc = self.lambda * self.x[i] + self.s[i];
        self.score[i] = Some(sc);
        self.fractional.insert(Key(sc, i));
    }

    fn remove(&mut self, i: usize) {
        if let Some(sc) = self.score[i].take() {
            self.fractional.remove(&Key(sc, i));
        }
    }

    pub fn point(&self) -> &[T] {
        &self.x
    }

    pub fn fractional_count(&self) -> usize {
        self.fractional.len()
    }

    /// Picks the qualifying pair: `i` maximizes the score (lowest index on
    /// ties), `j` minimizes it among the rest (lowest index on ties).
    fn pick_pair(&self) -> Option<(usize, usize)> {
        if self.fractional.len() < 2 {
            return None;
        }
        let top = self.fractional.iter().next_back()?.0;
        let i = self.fractional.range(Key(top, 0)..).next()?.1;
        let j = self.fractional.iter().find(|k| k.1 != i)?.1;
        Some((i, j))
    }

    /// Applies one transfer, or returns `None` when fewer than two
    /// fractional coordinates remain.
    pub fn step(&mut self) -> Option<RoundingStep<T>> {
        let (i, j) = self.pick_pair()?;
        let delta = self.x[j].min(T::one() - self.x[i]);
        let adjacent = self.graph.has_edge(i, j);

        let touched: Vec<usize> = self
            .graph
            .neighbors(i)
            .iter()
            .chain(self.graph.neighbors(j))
            .map(|&v| v as usize)
            .chain([i, j])
            .filter(|&v| self.score[v].is_some())
            .collect();
        for &v in &touched {
            self.remove(v);
        }

        let (xi, xj) = (self.x[i], self.x[j]);
        let tol = lit::<T>(INTEGRAL_TOL);
        self.x[i] = if xi + delta >= T::one() - tol { T::one() } else { xi + delta };
        self.x[j] = if xj - delta <= tol { T::zero() } else { xj - delta };
        let up = self.x[i] - xi;
        let down = xj - self.x[j];
        for &l in self.graph.neighbors(i) {
            self.s[l as usize] += up;
        }
        for &l in self.graph.neighbors(j) {
            self.s[l as usize] -= down;
        }

        for &v in &touched {
            if self.is_fractional(v) && self.score[v].is_none() {
                self.insert(v);
            }
        }
        Some(RoundingStep { receiver: i, donor: j, delta, adjacent })
    }

    /// Snaps any leftover fractional coordinate and fixes the cardinality to
    /// exactly `k` by toggling the best (or worst) scoring coordinates.
    fn finish(mut self, k: usize) -> Vec<T> {
        let leftovers: Vec<usize> = self.fractional.iter().map(|key| key.1).collect();
        for v in leftovers {
            self.remove(v);
            self.x[v] = if self.x[v] >= lit(0.5) { T::one() } else { T::zero() };
        }
        let score = |x: &[T], v: usize| -> T {
            self.lambda * x[v] + self.graph.neighbors(v).iter().map(|&l| x[l as usize]).sum::<T>()
        };
        loop {
            let ones = self.x.iter().filter(|&&v| v == T::one()).count();
            match ones.cmp(&k) {
                Ordering::Equal => break,
                Ordering::Less => {
                    // highest score, lowest index on ties
                    let add = (0..self.x.len())
                        .filter(|&v| self.x[v] == T::zero())
                        .min_by(|&a, &b| Key(-score(&self.x, a), a).cmp(&Key(-score(&self.x, b), b)))
                        .expect("a zero coordinate exists when fewer than k ones");
                    self.x[add] = T::one();
                }
                Ordering::Greater => {
                    let drop = (0..self.x.len())
                        .filter(|&v| self.x[v] == T::one())
                        .min_by(|&a, &b| Key(score(&self.x, a), a).cmp(&Key(score(&self.x, b), b)))
                        .expect("a one coordinate exists when more than k ones");
                    self.x[drop] = T::zero();
                }
            }
        }
        self.x
    }
}

/// Rounds a feasible point of `C_k^n` to an integral one without decreasing
/// the objective. Requires `λ >= 1`.
pub fn round_to_integral<T: Scalar>(
    inst: &ProblemInstance<'_, T>,
    x: &[T],
) -> Result<FractionalPoint<T>> {
    let mut r = Rounder::new(inst, x)?;
    let budget = 2 * r.fractional_count() + 1;
    let mut steps = 0;
    while r.step().is_some() {
        steps += 1;
        if steps > budget {
            return Err(DksError::Internal("rounding did not terminate".into()));
        }
    }
    let out = r.finish(inst.k);
    FractionalPoint::new(out, inst.k)
}
