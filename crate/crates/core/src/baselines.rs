//! Comparison methods and the spectral density certificate.
//!
//! Baseline selections carry `objective_at_lambda` evaluated at `λ = 1`; use
//! [`VertexSelection::with_lambda`] to re-score at another loading.

use crate::error::{DksError, Result};
use crate::graph::Graph;
use crate::linalg;
use crate::rounding::VertexSelection;
use crate::select::top_k_indices;

/// Power-iteration settings for the baselines and the bound. Tighter than the
/// step-size estimate since vertex ordering and certificate soundness depend on it.
const EIG_TOL: f64 = 1e-12;
const EIG_MAX_ITERS: usize = 20_000;

/// Two-phase greedy: the `⌈k/2⌉` highest-degree vertices `H`, then the
/// `⌊k/2⌋` vertices outside `H` with the most neighbors in `H`.
/// Ties go to the lowest index in both phases.
pub fn greedy_feige(g: &Graph, k: usize) -> Result<VertexSelection<f64>> {
    if k < 2 || k > g.n() {
        return Err(DksError::Domain(format!("greedy needs 2 <= k <= n={}, got {k}", g.n())));
    }
    let degrees: Vec<f64> = g.degrees().into_iter().map(|d| d as f64).collect();
    let h = top_k_indices(&degrees, k.div_ceil(2));

    let mut in_h = vec![false; g.n()];
    for &v in &h {
        in_h[v] = true;
    }
    // Vertices of H are pushed below every candidate.
    let links: Vec<f64> = (0..g.n())
        .map(|v| {
            if in_h[v] {
                -1.0
            } else {
                g.neighbors(v).iter().filter(|&&u| in_h[u as usize]).count() as f64
            }
        })
        .collect();
    let c = top_k_indices(&links, k - h.len());

    let mut chosen = h;
    chosen.extend(c);
    VertexSelection::from_vertices(g, chosen, 1.0)
}

/// Rank-1 bilinear baseline: the top-k entries of the sign-normalized leading
/// eigenvector of `A`, which maximize `σ₁(1_Sᵀu₁)²` over k-subsets.
///
/// On a disconnected graph the eigenvector may be supported on a single
/// component; the remaining picks then fall to the lowest indices.
pub fn rank1_lrbo(g: &Graph, k: usize) -> Result<VertexSelection<f64>> {
    if k == 0 || k > g.n() {
        return Err(DksError::Domain(format!("rank-1 baseline needs 1 <= k <= n={}, got {k}", g.n())));
    }
    let lead = linalg::leading_eigenvector::<f64>(g, EIG_TOL, EIG_MAX_ITERS)?;
    VertexSelection::from_vertices(g, top_k_indices(&lead.vector, k), 1.0)
}

/// Upper bound on the normalized density of any k-subgraph:
/// `min{1, θ₁(Σ_{S₁} u₁)²/(k(k−1)) + σ₂/(k−1), σ₁/(k−1)}` where `S₁` is the
/// rank-1 baseline's selection.
pub fn density_upper_bound(g: &Graph, k: usize) -> Result<f64> {
    if k < 2 || k > g.n() {
        return Err(DksError::Domain(format!("density bound needs 2 <= k <= n={}, got {k}", g.n())));
    }
    let sv = linalg::top_two_singular_values::<f64>(g, EIG_TOL, EIG_MAX_ITERS)?;
    let mut u1 = sv.u1;
    let pivot = u1.iter().copied().fold(0.0f64, |b, v| if v.abs() > b.abs() { v } else { b });
    if pivot < 0.0 {
        u1.iter_mut().for_each(|v| *v = -*v);
    }
    let s1 = top_k_indices(&u1, k);
    let mass: f64 = s1.iter().map(|&i| u1[i]).sum();
    let kf = k as f64;
    let rank1_term = sv.sigma1 * mass * mass / (kf * (kf - 1.0)) + sv.sigma2 / (kf - 1.0);
    let spectral_term = sv.sigma1 / (kf - 1.0);
    Ok(1.0f64.min(rank1_term).min(spectral_term))
}
