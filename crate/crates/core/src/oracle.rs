//! Exhaustive and brute-force references for small instances.
//!
//! Everything here trades speed for certainty and is guarded by size limits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{DksError, Result};
use crate::graph::Graph;
use crate::rounding::VertexSelection;
use crate::scalar::{lit, Scalar};

pub const MAX_SUBSETS: u128 = 10_000_000;
pub const MAX_CLIQUE_N: usize = 32;
pub const MAX_SIMPLEX_N: usize = 32;
pub const MAX_EIG_N: usize = 64;

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn adjacency_masks(g: &Graph) -> Vec<u64> {
    (0..g.n())
        .map(|v| g.neighbors(v).iter().fold(0u64, |m, &u| m | 1u64 << u))
        .collect()
}

/// Best `2e(S) + λk` over every k-subset, with the lexicographically smallest
/// maximizer.
pub fn exact_dks<T: Scalar>(g: &Graph, k: usize, lambda: T) -> Result<(T, VertexSelection<T>)> {
    let n = g.n();
    if k == 0 || k > n {
        return Err(DksError::Domain(format!("k={k} must satisfy 1 <= k <= n={n}")));
    }
    let subsets = binomial(n, k);
    if subsets > MAX_SUBSETS {
        return Err(DksError::Size(format!("C({n}, {k}) = {subsets} exceeds {MAX_SUBSETS}")));
    }

    let masks = if n <= 64 { Some(adjacency_masks(g)) } else { None };
    let edges_of = |idx: &[usize]| -> usize {
        match &masks {
            Some(adj) => {
                let set = idx.iter().fold(0u64, |m, &v| m | 1u64 << v);
                idx.iter().map(|&v| (adj[v] & set).count_ones() as usize).sum::<usize>() / 2
            }
            None => g.induced_edge_count(idx).unwrap_or(0),
        }
    };

    // Lexicographic enumeration; strict improvement keeps the smallest argmax.
    let mut idx: Vec<usize> = (0..k).collect();
    let mut best_edges = edges_of(&idx);
    let mut best = idx.clone();
    loop {
        let mut pos = k;
        while pos > 0 && idx[pos - 1] == n - k + pos - 1 {
            pos -= 1;
        }
        if pos == 0 {
            break;
        }
        idx[pos - 1] += 1;
        for p in pos..k {
            idx[p] = idx[p - 1] + 1;
        }
        let e = edges_of(&idx);
        if e > best_edges {
            best_edges = e;
            best.copy_from_slice(&idx);
        }
    }
    let sel = VertexSelection::from_vertices(g, best, lambda)?;
    Ok((sel.objective_at_lambda, sel))
}

/// Clique number by branch and bound over bitmasks.
pub fn max_clique_size(g: &Graph) -> Result<usize> {
    let n = g.n();
    if n > MAX_CLIQUE_N {
        return Err(DksError::Size(format!("{n} vertices exceed the clique oracle limit {MAX_CLIQUE_N}")));
    }
    let adj = adjacency_masks(g);
    fn expand(adj: &[u64], size: usize, mut cand: u64, best: &mut usize) {
        if cand == 0 {
            *best = (*best).max(size);
            return;
        }
        while cand != 0 {
            if size + cand.count_ones() as usize <= *best {
                return;
            }
            let v = cand.trailing_zeros() as usize;
            cand &= !(1u64 << v);
            expand(adj, size + 1, cand & adj[v], best);
        }
    }
    let mut best = 0;
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    expand(&adj, 0, all, &mut best);
    Ok(best)
}

/// Every maximal clique (Bron–Kerbosch with pivoting), each sorted.
pub fn maximal_cliques(g: &Graph) -> Result<Vec<Vec<usize>>> {
    let n = g.n();
    if n > MAX_CLIQUE_N {
        return Err(DksError::Size(format!("{n} vertices exceed the clique oracle limit {MAX_CLIQUE_N}")));
    }
    let adj = adjacency_masks(g);
    fn bk(adj: &[u64], r: u64, mut p: u64, mut x: u64, out: &mut Vec<u64>) {
        if p == 0 && x == 0 {
            out.push(r);
            return;
        }
        let pivot_pool = p | x;
        let pivot = (0..64)
            .filter(|&u| pivot_pool >> u & 1 == 1)
            .max_by_key(|&u| (p & adj[u]).count_ones())
            .unwrap();
        let mut cand = p & !adj[pivot];
        while cand != 0 {
            let v = cand.trailing_zeros() as usize;
            cand &= !(1u64 << v);
            bk(adj, r | 1u64 << v, p & adj[v], x & adj[v], out);
            p &= !(1u64 << v);
            x |= 1u64 << v;
        }
    }
    let mut masks = Vec::new();
    if n > 0 {
        bk(&adj, 0, (1u64 << n) - 1, 0, &mut masks);
    }
    let mut cliques: Vec<Vec<usize>> = masks
        .into_iter()
        .map(|m| (0..n).filter(|&v| m >> v & 1 == 1).collect())
        .collect();
    cliques.sort();
    Ok(cliques)
}

/// Euclidean projection onto `{x >= 0, Σx = scale}` (sort-based).
pub fn project_simplex(y: &[f64], scale: f64) -> Vec<f64> {
    let mut u = y.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cumsum += ui;
        let t = (cumsum - scale) / (i + 1) as f64;
        if ui - t > 0.0 {
            tau = t;
        }
    }
    y.iter().map(|&v| (v - tau).max(0.0)).collect()
}

fn quad(adj: &[Vec<f64>], lambda: f64, x: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (i, row) in adj.iter().enumerate() {
        let ax: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
        acc += x[i] * (ax + lambda * x[i]);
    }
    acc
}

fn ascend(adj: &[Vec<f64>], lambda: f64, scale: f64, mut x: Vec<f64>) -> (f64, Vec<f64>) {
    let n = x.len();
    let max_row = adj.iter().map(|r| r.iter().sum::<f64>()).fold(0.0, f64::max);
    // Gershgorin bound on ‖A + λI‖; the gradient is 2(A + λI)x.
    let lip = 2.0 * (max_row + lambda).max(1e-12);
    let mut value = quad(adj, lambda, &x);
    let mut step = 1.0 / lip;
    for _ in 0..20_000 {
        let grad: Vec<f64> = (0..n)
            .map(|i| 2.0 * (adj[i].iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() + lambda * x[i]))
            .collect();
        // Backtrack from an optimistic step; 1/lip always ascends.
        let mut trial = step * 4.0;
        let (next, next_value) = loop {
            let y: Vec<f64> = x.iter().zip(&grad).map(|(a, g)| a + trial * g).collect();
            let cand = project_simplex(&y, scale);
            let v = quad(adj, lambda, &cand);
            if v >= value || trial <= 1.0 / lip {
                break (cand, v);
            }
            trial *= 0.5;
        };
        step = trial.max(1.0 / lip);
        let moved: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        if next_value < value {
            break;
        }
        x = next;
        value = next_value;
        if moved < 1e-13 * scale.max(1.0) {
            break;
        }
    }
    (value, x)
}

/// Maximum of `xᵀ(A + λI)x` over `{x >= 0, Σx = scale}`.
///
/// Projected gradient ascent from `restarts` random interior points plus the
/// uniform point on every maximal clique, which makes the clique maximizer an
/// exact candidate. Deterministic given `seed`.
pub fn simplex_qp_max(
    g: &Graph,
    lambda: f64,
    scale: f64,
    restarts: usize,
    seed: u64,
) -> Result<(f64, Vec<f64>)> {
    let n = g.n();
    if n > MAX_SIMPLEX_N {
        return Err(DksError::Size(format!("{n} vertices exceed the simplex oracle limit {MAX_SIMPLEX_N}")));
    }
    let adj = g.dense_adjacency::<f64>();

    let mut candidates: Vec<(f64, Vec<f64>)> = maximal_cliques(g)?
        .into_iter()
        .map(|c| {
            let mut x = vec![0.0; n];
            for &v in &c {
                x[v] = scale / c.len() as f64;
            }
            (quad(&adj, lambda, &x), x)
        })
        .collect();

    let starts: Vec<(f64, Vec<f64>)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-3).collect();
            let total: f64 = w.iter().sum();
            let x0 = w.into_iter().map(|v| v * scale / total).collect();
            ascend(&adj, lambda, scale, x0)
        })
        .collect();
    candidates.extend(starts);

    // Clique candidates come first and win near-ties, so an exact maximizer
    // is reported instead of a nearly converged restart.
    let mut best = candidates.remove(0);
    for c in candidates {
        if c.0 > best.0 + 1e-12 * best.0.abs().max(1.0) {
            best = c;
        }
    }
    Ok(best)
}

/// Full symmetric eigendecomposition.
#[derive(Debug, Clone)]
pub struct DenseEig<T> {
    /// Descending.
    pub values: Vec<T>,
    /// `vectors[i]` pairs with `values[i]`; unit norm.
    pub vectors: Vec<Vec<T>>,
}

/// Eigendecomposition of `A` by cyclic Jacobi rotations.
pub fn dense_eig<T: Scalar>(g: &Graph) -> Result<DenseEig<T>> {
    let n = g.n();
    if n > MAX_EIG_N {
        return Err(DksError::Size(format!("{n} vertices exceed the dense eigensolver limit {MAX_EIG_N}")));
    }
    Ok(jacobi_eig(g.dense_adjacency::<T>()))
}

/// Cyclic Jacobi on a symmetric matrix.
#[allow(clippy::needless_range_loop)]
pub fn jacobi_eig<T: Scalar>(mut a: Vec<Vec<T>>) -> DenseEig<T> {
    let n = a.len();
    let mut v = vec![vec![T::zero(); n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = T::one();
    }
    let eps = T::epsilon();
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let diag: T = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= eps * eps * (diag + off) || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == T::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (lit::<T>(2.0) * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].partial_cmp(&a[i][i]).unwrap_or(std::cmp::Ordering::Equal));
    DenseEig {
        values: order.iter().map(|&i| a[i][i]).collect(),
        vectors: order.iter().map(|&i| v.iter().map(|row| row[i]).collect()).collect(),
    }
}

/// Graph families for the theory checks.
pub mod family {
    use super::*;

    /// Erdős–Rényi `G(n, p)`.
    pub fn random_gnp(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        Graph::from_edges(n, edges).expect("endpoints are in range")
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
            if cur.len() == used.len() {
                out.push(cur.clone());
                return;
            }
            for v in 0..used.len() {
                if !used[v] {
                    used[v] = true;
                    cur.push(v);
                    rec(cur, used, out);
                    cur.pop();
                    used[v] = false;
                }
            }
        }
        let mut out = Vec::new();
        rec(&mut Vec::new(), &mut vec![false; n], &mut out);
        out
    }

    fn is_connected(n: usize, pairs: &[(usize, usize)], mask: u32) -> bool {
        let mut adj = vec![0u32; n];
        for (e, &(u, v)) in pairs.iter().enumerate() {
            if mask >> e & 1 == 1 {
                adj[u] |= 1 << v;
                adj[v] |= 1 << u;
            }
        }
        let mut seen = 1u32;
        let mut frontier = 1u32;
        while frontier != 0 {
            let mut next = 0;
            for (v, &row) in adj.iter().enumerate() {
                if frontier >> v & 1 == 1 {
                    next |= row;
                }
            }
            frontier = next & !seen;
            seen |= next;
        }
        seen.count_ones() as usize == n
    }

    /// All connected graphs on exactly `n` vertices up to isomorphism.
    pub fn connected_graphs(n: usize) -> Vec<Graph> {
        assert!((1..=6).contains(&n), "exhaustive family limited to 1..=6 vertices");
        let pairs: Vec<(usize, usize)> =
            (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let index = |u: usize, v: usize| pairs.iter().position(|&p| p == (u.min(v), u.max(v))).unwrap();
        let perm_maps: Vec<Vec<usize>> = permutations(n)
            .into_iter()
            .map(|p| pairs.iter().map(|&(u, v)| index(p[u], p[v])).collect())
            .collect();

        let total = 1u32 << pairs.len();
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for mask in 0..total {
            if !is_connected(n, &pairs, mask) {
                continue;
            }
            let canon = perm_maps
                .iter()
                .map(|map| {
                    let mut m = 0u32;
                    let mut bits = mask;
                    while bits != 0 {
                        let e = bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        m |= 1 << map[e];
                    }
                    m
                })
                .min()
                .unwrap();
            if seen.insert(canon) {
                let edges = pairs
                    .iter()
                    .enumerate()
                    .filter(|(e, _)| canon >> e & 1 == 1)
                    .map(|(_, &p)| p);
                out.push(Graph::from_edges(n, edges).expect("valid pairs"));
            }
        }
        out
    }

    /// Connected graphs on up to `min(max_n, 6)` vertices, then `random`
    /// seeded `G(n, p)` graphs with `n` in `7..=max_n` (when `max_n >= 7`).
    pub fn test_family(max_n: usize, random: usize, seed: u64) -> Vec<Graph> {
        let mut out: Vec<Graph> = (1..=max_n.min(6)).flat_map(connected_graphs).collect();
        if max_n >= 7 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..random {
                let n = rng.gen_range(7..=max_n);
                let p = rng.gen_range(0.2..0.8);
                out.push(random_gnp(n, p, &mut rng));
            }
        }
        out
    }
}
