//! Unconstrained reformulation over free variables `θ`.
//!
//! `x_i = σ(θ_i) / (1 + max{Σσ(θ)/k − 1, 0})` maps every `θ ∈ ℝⁿ` into
//! `D_k^n = {x ∈ [0,1]ⁿ : Σx ≤ k}`. The objective `g(x(θ))` is then maximized
//! with an in-repo AdamW driver.

use std::time::Instant;

use crate::error::{DksError, Result};
use crate::fw::{is_integral, SolveReport};
use crate::graph::ProblemInstance;
use crate::linalg::loaded_matvec_into;
use crate::rounding::project_top_k;
use crate::scalar::{count, dot, lit, Scalar};

/// Numerically stable logistic function.
#[inline]
pub fn sigmoid<T: Scalar>(t: T) -> T {
    if t >= T::zero() {
        T::one() / (T::one() + (-t).exp())
    } else {
        let e = t.exp();
        e / (T::one() + e)
    }
}

/// Maps free variables into `D_k^n`.
pub fn theta_to_x<T: Scalar>(theta: &[T], k: usize) -> Vec<T> {
    let sig: Vec<T> = theta.iter().map(|&t| sigmoid(t)).collect();
    let total: T = sig.iter().copied().sum();
    let kk = count::<T>(k);
    if total > kk {
        sig.into_iter().map(|s| kk * s / total).collect()
    } else {
        sig
    }
}

/// `g(x(θ))` and its gradient with respect to `θ`.
///
/// In the normalized branch (`Σσ > k`) the Jacobian has the form
/// `c · (diag(σ') · (S·I − 1σᵀ))`, so the product with `∂g/∂x` is applied in
/// `O(n)` after the `O(m + n)` mat-vec. At `Σσ = k` the plain-sigmoid branch
/// supplies the subgradient.
pub fn param_objective_and_gradient<T: Scalar>(
    inst: &ProblemInstance<'_, T>,
    theta: &[T],
) -> Result<(T, Vec<T>)> {
    let n = inst.n();
    if theta.len() != n {
        return Err(DksError::Domain(format!("θ has length {}, expected {n}", theta.len())));
    }
    let sig: Vec<T> = theta.iter().map(|&t| sigmoid(t)).collect();
    let total: T = sig.iter().copied().sum();
    let kk = count::<T>(inst.k);
    let normalized = total > kk;
    let x: Vec<T> = if normalized {
        sig.iter().map(|&s| kk * s / total).collect()
    } else {
        sig.clone()
    };

    let mut df = vec![T::zero(); n];
    loaded_matvec_into(inst.graph, inst.lambda, &x, &mut df);
    let value = dot(&x, &df);
    let two = lit::<T>(2.0);
    for d in df.iter_mut() {
        *d *= two;
    }

    let grad = if normalized {
        let weighted = dot(&sig, &df);
        let scale = kk / (total * total);
        sig.iter()
            .zip(&df)
            .map(|(&s, &d)| scale * s * (T::one() - s) * (total * d - weighted))
            .collect()
    } else {
        sig.iter().zip(&df).map(|(&s, &d)| d * s * (T::one() - s)).collect()
    };
    Ok((value, grad))
}

/// Decoupled-weight-decay adaptive-moment settings.
#[derive(Debug, Clone, Copy)]
pub struct OptimizerConfig<T> {
    pub learning_rate: T,
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
    pub weight_decay: T,
    pub max_iters: usize,
}

impl<T: Scalar> Default for OptimizerConfig<T> {
    fn default() -> Self {
        Self {
            learning_rate: lit(3.0),
            beta1: lit(0.9),
            beta2: lit(0.999),
            epsilon: lit(1e-8),
            weight_decay: T::zero(),
            max_iters: 200,
        }
    }
}

impl<T: Scalar> OptimizerConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let in_unit = |b: T| b >= T::zero() && b < T::one();
        if !(self.learning_rate > T::zero()) {
            return Err(DksError::Config(format!("learning rate {} must be > 0", self.learning_rate)));
        }
        if !in_unit(self.beta1) || !in_unit(self.beta2) {
            return Err(DksError::Config("moment decay rates must lie in [0, 1)".into()));
        }
        if !(self.epsilon > T::zero()) || !(self.weight_decay >= T::zero()) {
            return Err(DksError::Config("epsilon must be > 0 and weight decay >= 0".into()));
        }
        Ok(())
    }
}

/// AdamW state for minimizing a function of `params`.
pub struct AdamW<T> {
    cfg: OptimizerConfig<T>,
    m: Vec<T>,
    v: Vec<T>,
    t: i32,
}

impl<T: Scalar> AdamW<T> {
    pub fn new(cfg: OptimizerConfig<T>, dim: usize) -> Self {
        Self { cfg, m: vec![T::zero(); dim], v: vec![T::zero(); dim], t: 0 }
    }

    /// One descent step along `grad`.
    pub fn step(&mut self, params: &mut [T], grad: &[T]) {
        let c = &self.cfg;
        self.t += 1;
        let bc1 = T::one() - c.beta1.powi(self.t);
        let bc2 = T::one() - c.beta2.powi(self.t);
        for ((p, &g), (m, v)) in params.iter_mut().zip(grad).zip(self.m.iter_mut().zip(self.v.iter_mut())) {
            *p -= c.learning_rate * c.weight_decay * *p;
            *m = c.beta1 * *m + (T::one() - c.beta1) * g;
            *v = c.beta2 * *v + (T::one() - c.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= c.learning_rate * m_hat / (v_hat.sqrt() + c.epsilon);
        }
    }
}

/// Adaptive-moment ascent on `g(x(θ))` from `θ0` (default all zeros) for
/// `max_iters` steps. The selection is the top-k projection of `x(θ_final)`.
pub fn param_solve<T: Scalar>(
    inst: &ProblemInstance<'_, T>,
    cfg: &OptimizerConfig<T>,
    theta0: Option<Vec<T>>,
) -> Result<SolveReport<T>> {
    cfg.validate()?;
    let started = Instant::now();
    let n = inst.n();
    let mut theta = theta0.unwrap_or_else(|| vec![T::zero(); n]);
    if theta.len() != n || theta.iter().any(|t| !t.is_finite()) {
        return Err(DksError::Domain("θ0 must be a finite vector of length n".into()));
    }

    let mut opt = AdamW::new(*cfg, n);
    let mut trace = Vec::with_capacity(cfg.max_iters + 1);
    let mut neg = vec![T::zero(); n];
    for it in 0..cfg.max_iters {
        let (value, grad) = param_objective_and_gradient(inst, &theta)?;
        if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(DksError::NonFinite(format!(
                "objective or gradient at iteration {it}; lower the learning rate"
            )));
        }
        trace.push(value);
        // maximize g by minimizing -g
        for (ng, g) in neg.iter_mut().zip(&grad) {
            *ng = -*g;
        }
        opt.step(&mut theta, &neg);
    }
    let x = theta_to_x(&theta, inst.k);
    let (value, _) = param_objective_and_gradient(inst, &theta)?;
    if !value.is_finite() {
        return Err(DksError::NonFinite("final objective".into()));
    }
    trace.push(value);

    let selection = project_top_k(inst.graph, &x, inst.k, inst.lambda)?;
    Ok(SolveReport {
        solver: "param",
        objective_trace: trace,
        iterations: cfg.max_iters,
        converged: true,
        integral: is_integral(&x) && x.iter().filter(|&&v| v > lit(0.5)).count() == inst.k,
        final_point: x,
        final_gap: None,
        selection,
        wall_time: started.elapsed().as_secs_f64(),
    })
}
