//! Sparse kernels over the CSR adjacency: `(A + λI)x`, power iteration for the
//! spectral norm, and the top two singular values of `A`.
//!
//! Every pass is `O(m + n)`. Results are deterministic: rows are reduced in
//! neighbor order and random restarts use a fixed seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{DksError, Result};
use crate::graph::Graph;
use crate::scalar::{dot, lit, Scalar};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITERS: usize = 1000;

const RESTART_SEED: u64 = 0x5eed_d15c;

/// Result of a power iteration.
#[derive(Debug, Clone)]
pub struct Eigenpair<T> {
    /// Rayleigh quotient of the returned vector.
    pub value: T,
    /// Unit-norm vector.
    pub vector: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct TopTwoSingular<T> {
    pub sigma1: T,
    pub u1: Vec<T>,
    pub sigma2: T,
    pub converged: bool,
}

/// Writes `(A + λI)x` into `out`.
pub fn loaded_matvec_into<T: Scalar>(g: &Graph, lambda: T, x: &[T], out: &mut [T]) {
    debug_assert_eq!(x.len(), g.n());
    debug_assert_eq!(out.len(), g.n());
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = T::zero();
        for &j in g.neighbors(i) {
            acc += x[j as usize];
        }
        *o = acc + lambda * x[i];
    }
}

/// `(A + λI)x` without materializing the loaded matrix.
pub fn loaded_matvec<T: Scalar>(g: &Graph, lambda: T, x: &[T]) -> Result<Vec<T>> {
    if x.len() != g.n() {
        return Err(DksError::Domain(format!(
            "vector length {} does not match vertex count {}",
            x.len(),
            g.n()
        )));
    }
    let mut out = vec![T::zero(); g.n()];
    loaded_matvec_into(g, lambda, x, &mut out);
    Ok(out)
}

fn normalize<T: Scalar>(v: &mut [T]) -> T {
    let norm = dot(v, v).sqrt();
    if norm > T::zero() {
        for e in v.iter_mut() {
            *e /= norm;
        }
    }
    norm
}

fn ones_start<T: Scalar>(n: usize) -> Vec<T> {
    let mut v = vec![T::one(); n];
    normalize(&mut v);
    v
}

fn random_start<T: Scalar>(n: usize, seed: u64) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<T> = (0..n).map(|_| lit(rng.gen_range(-1.0..1.0))).collect();
    normalize(&mut v);
    v
}

/// Power iteration on `M + shift·I` for a symmetric operator `M`.
///
/// Reports the Rayleigh quotient of `M`. A positive shift separates `ρ` from
/// `-ρ`, so bipartite spectra do not make the iterate oscillate.
fn power_iterate<T, F>(
    n: usize,
    mut apply: F,
    shift: T,
    mut v: Vec<T>,
    tol: T,
    max_iters: usize,
) -> Eigenpair<T>
where
    T: Scalar,
    F: FnMut(&[T], &mut [T]),
{
    let mut w = vec![T::zero(); n];
    let mut prev: Option<T> = None;
    let mut value = T::zero();
    for it in 1..=max_iters {
        apply(&v, &mut w);
        value = dot(&v, &w);
        for (wi, &vi) in w.iter_mut().zip(&v) {
            *wi += shift * vi;
        }
        if let Some(p) = prev {
            if (value - p).abs() <= tol * value.abs() || (value == T::zero() && p == T::zero()) {
                return Eigenpair { value, vector: v, iterations: it, converged: true };
            }
        }
        prev = Some(value);
        if normalize(&mut w) == T::zero() {
            // v lies in the kernel of M + shift·I.
            return Eigenpair { value, vector: v, iterations: it, converged: true };
        }
        std::mem::swap(&mut v, &mut w);
    }
    Eigenpair { value, vector: v, iterations: max_iters, converged: false }
}

/// Estimates `‖A + λI‖₂` and its leading unit eigenvector.
///
/// For `λ >= 0` the loaded matrix is entrywise nonnegative, so its spectral
/// norm is its largest eigenvalue. Non-convergence is reported through the
/// `converged` flag rather than an error.
pub fn spectral_norm<T: Scalar>(
    g: &Graph,
    lambda: T,
    tol: T,
    max_iters: usize,
) -> Result<Eigenpair<T>> {
    if !(tol > T::zero()) {
        return Err(DksError::Config(format!("power iteration tolerance {tol} must be > 0")));
    }
    let n = g.n();
    let apply = |x: &[T], out: &mut [T]| loaded_matvec_into(g, lambda, x, out);
    let est = power_iterate(n, apply, T::one(), ones_start(n), tol, max_iters);
    if est.value == T::zero() && (g.m() > 0 || lambda != T::zero()) {
        let apply = |x: &[T], out: &mut [T]| loaded_matvec_into(g, lambda, x, out);
        return Ok(power_iterate(n, apply, T::one(), random_start(n, RESTART_SEED), tol, max_iters));
    }
    Ok(est)
}

/// Leading eigenpair of `A` with the sign fixed so the largest-magnitude entry
/// is positive.
pub fn leading_eigenvector<T: Scalar>(g: &Graph, tol: T, max_iters: usize) -> Result<Eigenpair<T>> {
    let mut est = spectral_norm(g, T::zero(), tol, max_iters)?;
    let pivot = est
        .vector
        .iter()
        .copied()
        .fold(T::zero(), |best, v| if v.abs() > best.abs() { v } else { best });
    if pivot < T::zero() {
        for v in est.vector.iter_mut() {
            *v = -*v;
        }
    }
    Ok(est)
}

/// `σ₁(A)`, its singular vector, and `σ₂(A)`.
///
/// `σ₂` is the largest `|eigenvalue|` of the deflated operator
/// `x ↦ Ax − θ₁u₁(u₁ᵀx)`, found by power iteration on its square.
pub fn top_two_singular_values<T: Scalar>(
    g: &Graph,
    tol: T,
    max_iters: usize,
) -> Result<TopTwoSingular<T>> {
    let lead = leading_eigenvector(g, tol, max_iters)?;
    let theta1 = lead.value;
    let u1 = lead.vector;
    let n = g.n();

    let mut tmp = vec![T::zero(); n];
    let deflated = |x: &[T], out: &mut [T]| {
        loaded_matvec_into(g, T::zero(), x, out);
        let c = theta1 * dot(&u1, x);
        for (o, &u) in out.iter_mut().zip(&u1) {
            *o -= c * u;
        }
    };
    let squared = |x: &[T], out: &mut [T]| {
        deflated(x, &mut tmp);
        deflated(&tmp, out);
    };

    // The ones vector is often orthogonal to the second eigenspace on
    // symmetric graphs, so the deflated iteration starts from a seeded vector.
    let mut start = random_start::<T>(n, RESTART_SEED);
    let c = dot(&u1, &start);
    for (s, &u) in start.iter_mut().zip(&u1) {
        *s -= c * u;
    }
    let second = if normalize(&mut start) == T::zero() {
        Eigenpair { value: T::zero(), vector: start, iterations: 0, converged: true }
    } else {
        power_iterate(n, squared, T::zero(), start, tol, max_iters)
    };

    Ok(TopTwoSingular {
        sigma1: theta1.abs(),
        u1,
        sigma2: second.value.max(T::zero()).sqrt(),
        converged: lead.converged && second.converged,
    })
}
