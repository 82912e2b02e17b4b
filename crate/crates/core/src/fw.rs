//! Frank–Wolfe ascent for `max xᵀ(A + λI)x` over `{x ∈ [0,1]ⁿ : Σx = k}`.
//!
//! The linear maximization step over this polytope is a top-k selection on the
//! gradient, so each iteration costs one sparse mat-vec plus an expected
//! `O(n)` selection.

use std::time::Instant;

use crate::error::{DksError, Result};
use crate::graph::ProblemInstance;
use crate::linalg::{self, loaded_matvec_into};
use crate::rounding::{project_top_k, VertexSelection};
use crate::scalar::{count, dot, lit, Scalar};
use crate::select::top_k_indices_into;

const BOX_SLACK: f64 = 1e-12;
const SUM_SLACK: f64 = 1e-9;
/// Entries within this distance of 0 or 1 count as integral.
pub const INTEGRAL_TOL: f64 = 1e-9;

/// A point of the polytope `C_k^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalPoint<T> {
    x: Vec<T>,
}

impl<T: Scalar> FractionalPoint<T> {
    /// Validates box and budget constraints (`1e-12` box slack, `1e-9·k` sum
    /// slack, both widened to a few ulps for `f32`).
    pub fn new(x: Vec<T>, k: usize) -> Result<Self> {
        let box_slack = lit::<T>(BOX_SLACK).max(lit::<T>(8.0) * T::epsilon());
        let sum_slack = lit::<T>(SUM_SLACK).max(lit::<T>(1e3) * T::epsilon());
        let lo = -box_slack;
        let hi = T::one() + box_slack;
        if let Some((i, v)) = x.iter().enumerate().find(|(_, &v)| !(v >= lo && v <= hi)) {
            return Err(DksError::Domain(format!("x[{i}] = {v} lies outside [0, 1]")));
        }
        let sum: T = x.iter().copied().sum();
        let kk: T = count(k);
        if (sum - kk).abs() > sum_slack * kk.max(T::one()) {
            return Err(DksError::Domain(format!("entries sum to {sum}, expected {k}")));
        }
        Ok(Self { x })
    }

    /// `x_i = k/n` for every vertex.
    pub fn uniform(n: usize, k: usize) -> Self {
        Self { x: vec![count::<T>(k) / count::<T>(n); n] }
    }

    /// Indicator vector of `support`.
    pub fn indicator(n: usize, support: &[usize]) -> Self {
        let mut x = vec![T::zero(); n];
        for &i in support {
            x[i] = T::one();
        }
        Self { x }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.x
    }

    pub fn into_vec(self) -> Vec<T> {
        self.x
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn is_integral(&self) -> bool {
        is_integral(&self.x)
    }
}

pub(crate) fn is_integral<T: Scalar>(x: &[T]) -> bool {
    let tol = lit::<T>(INTEGRAL_TOL);
    x.iter().all(|&v| v.min(T::one() - v).abs() <= tol)
}

/// Step-size rule of the Frank–Wolfe update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepRule {
    /// `γ = min{1, gᵀd / (L‖d‖²)}`.
    #[default]
    OptionI,
    /// `γ = min{1, gᵀd / (2kL)}`.
    OptionII,
}

#[derive(Debug, Clone, Copy)]
pub struct FwConfig<T> {
    pub step_rule: StepRule,
    pub max_iters: usize,
    /// Stop once the FW gap is at most `gap_tol · (1 + |g(x)|)`.
    pub gap_tol: T,
}

impl<T: Scalar> Default for FwConfig<T> {
    fn default() -> Self {
        Self { step_rule: StepRule::OptionI, max_iters: 1000, gap_tol: lit(1e-8) }
    }
}

impl<T: Scalar> FwConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(DksError::Config("max_iters must be at least 1".into()));
        }
        if !(self.gap_tol >= T::zero()) {
            return Err(DksError::Config(format!("gap_tol {} must be >= 0", self.gap_tol)));
        }
        Ok(())
    }
}

/// Outcome of a solver run.
#[derive(Debug, Clone)]
pub struct SolveReport<T> {
    pub solver: &'static str,
    /// Objective `g(x)` of every iterate, starting with the initial point.
    pub objective_trace: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
    /// Whether the final point was integral before the top-k projection.
    pub integral: bool,
    /// Final continuous iterate.
    pub final_point: Vec<T>,
    /// FW gap at the final point (Frank–Wolfe only).
    pub final_gap: Option<T>,
    pub selection: VertexSelection<T>,
    pub wall_time: f64,
}

/// `xᵀ(A + λI)x`, with `xᵀAx` accumulated as `Σ x_i (Ax)_i` so every edge
/// contributes twice.
pub fn objective<T: Scalar>(inst: &ProblemInstance<'_, T>, x: &[T]) -> Result<T> {
    let y = linalg::loaded_matvec(inst.graph, inst.lambda, x)?;
    Ok(dot(x, &y))
}

/// Vertex of `C_k^n` maximizing `gradientᵀs`: ones at the top-k entries.
pub fn lmp_top_k<T: Scalar>(gradient: &[T], k: usize) -> FractionalPoint<T> {
    let mut idx = Vec::new();
    top_k_indices_into(gradient, k, &mut idx);
    FractionalPoint::indicator(gradient.len(), &idx)
}

/// FW gap `max_{s ∈ C} ∇ᵀ(s − x)` at `x`, using the half-gradient `(A+λI)x`.
pub fn fw_gap<T: Scalar>(inst: &ProblemInstance<'_, T>, x: &[T]) -> Result<T> {
    let grad = linalg::loaded_matvec(inst.graph, inst.lambda, x)?;
    let mut idx = Vec::new();
    top_k_indices_into(&grad, inst.k, &mut idx);
    let top: T = idx.iter().map(|&i| grad[i]).sum();
    Ok(top - dot(&grad, x))
}

/// What one call to [`FrankWolfe::step`] did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo<T> {
    /// `g(x)` before the update.
    pub objective: T,
    pub gap: T,
    pub step: T,
    /// Gap was below tolerance; the iterate was left unchanged.
    pub converged: bool,
}

/// Stepwise Frank–Wolfe state. [`fw_solve`] drives it to completion.
pub struct FrankWolfe<'a, 'g, T> {
    inst: &'a ProblemInstance<'g, T>,
    cfg: FwConfig<T>,
    lipschitz: T,
    x: Vec<T>,
    grad: Vec<T>,
    top: Vec<usize>,
    in_top: Vec<bool>,
}

impl<'a, 'g, T: Scalar> FrankWolfe<'a, 'g, T> {
    /// Estimates `L = ‖A + λI‖₂` once, then starts from `x0`.
    pub fn new(
        inst: &'a ProblemInstance<'g, T>,
        cfg: FwConfig<T>,
        x0: FractionalPoint<T>,
    ) -> Result<Self> {
        cfg.validate()?;
        let n = inst.n();
        if x0.len() != n {
            return Err(DksError::Domain(format!("start point has length {}, expected {n}", x0.len())));
        }
        let lipschitz = linalg::spectral_norm(
            inst.graph,
            inst.lambda,
            lit(linalg::DEFAULT_TOL),
            linalg::DEFAULT_MAX_ITERS,
        )?
        .value;
        Ok(Self {
            inst,
            cfg,
            lipschitz,
            x: x0.into_vec(),
            grad: vec![T::zero(); n],
            top: Vec::with_capacity(n),
            in_top: vec![false; n],
        })
    }

    pub fn lipschitz(&self) -> T {
        self.lipschitz
    }

    pub fn point(&self) -> &[T] {
        &self.x
    }

    /// One iteration: gradient, top-k vertex, gap test, step, update.
    pub fn step(&mut self) -> Result<StepInfo<T>> {
        let k = self.inst.k;
        loaded_matvec_into(self.inst.graph, self.inst.lambda, &self.x, &mut self.grad);
        let value = dot(&self.x, &self.grad);

        top_k_indices_into(&self.grad, k, &mut self.top);
        for &i in &self.top {
            self.in_top[i] = true;
        }
        let top_sum: T = self.top.iter().map(|&i| self.grad[i]).sum();
        let gap_raw = top_sum - value;
        let threshold = self.cfg.gap_tol * (T::one() + value.abs());

        // The LMP maximizes gᵀs, so gᵀd >= 0 up to rounding.
        let rounding_slack = lit::<T>(1e-12) * (T::one() + value.abs() + top_sum.abs());
        if gap_raw < -rounding_slack {
            self.clear_top();
            return Err(DksError::Internal(format!("negative Frank–Wolfe gap {gap_raw}")));
        }
        let gap = gap_raw.max(T::zero());
        if gap <= threshold {
            self.clear_top();
            return Ok(StepInfo { objective: value, gap, step: T::zero(), converged: true });
        }
        if !(self.lipschitz > T::zero()) {
            self.clear_top();
            return Err(DksError::Config(format!(
                "Lipschitz estimate {} is not positive but the gradient is nonzero",
                self.lipschitz
            )));
        }

        let step = match self.cfg.step_rule {
            StepRule::OptionI => {
                let d_norm_sq: T = self
                    .x
                    .iter()
                    .zip(&self.in_top)
                    .map(|(&xi, &s)| {
                        let d = if s { T::one() - xi } else { -xi };
                        d * d
                    })
                    .sum();
                (gap / (self.lipschitz * d_norm_sq)).min(T::one())
            }
            StepRule::OptionII => {
                (gap / (lit::<T>(2.0) * count::<T>(k) * self.lipschitz)).min(T::one())
            }
        };

        if step == T::one() {
            for (xi, &s) in self.x.iter_mut().zip(&self.in_top) {
                *xi = if s { T::one() } else { T::zero() };
            }
        } else {
            let keep = T::one() - step;
            for (xi, &s) in self.x.iter_mut().zip(&self.in_top) {
                *xi = keep * *xi + if s { step } else { T::zero() };
            }
        }
        self.clear_top();
        debug_assert!(
            FractionalPoint::new(self.x.clone(), k).is_ok(),
            "iterate left the feasible set"
        );
        Ok(StepInfo { objective: value, gap, step, converged: false })
    }

    fn clear_top(&mut self) {
        for &i in &self.top {
            self.in_top[i] = false;
        }
    }

    pub fn into_point(self) -> Vec<T> {
        self.x
    }
}

/// Runs Frank–Wolfe from `x0` (default `x_i = k/n`) until the gap certificate
/// or the iteration budget stops it. The reported selection is the top-k
/// projection of the final iterate.
pub fn fw_solve<T: Scalar>(
    inst: &ProblemInstance<'_, T>,
    cfg: &FwConfig<T>,
    x0: Option<FractionalPoint<T>>,
) -> Result<SolveReport<T>> {
    let started = Instant::now();
    let x0 = x0.unwrap_or_else(|| FractionalPoint::uniform(inst.n(), inst.k));
    let mut fw = FrankWolfe::new(inst, *cfg, x0)?;

    let mut trace = Vec::with_capacity(cfg.max_iters + 1);
    let mut iterations = 0;
    let mut converged = false;
    let mut final_gap = None;
    for _ in 0..cfg.max_iters {
        let info = fw.step()?;
        trace.push(info.objective);
        final_gap = Some(info.gap);
        if info.converged {
            converged = true;
            break;
        }
        iterations += 1;
    }
    if !converged {
        let x = fw.point();
        trace.push(objective(inst, x)?);
        let gap = fw_gap(inst, x)?;
        final_gap = Some(gap);
        converged = gap <= cfg.gap_tol * (T::one() + trace.last().unwrap().abs());
    }

    let x = fw.into_point();
    let integral = is_integral(&x);
    let selection = project_top_k(inst.graph, &x, inst.k, inst.lambda)?;
    Ok(SolveReport {
        solver: "fw",
        objective_trace: trace,
        iterations,
        converged,
        integral,
        final_point: x,
        final_gap,
        selection,
        wall_time: started.elapsed().as_secs_f64(),
    })
}

/// Start point biased toward vertex `j`: halfway between `k/n` everywhere and
/// the point with `x_j = 1` and `(k-1)/(n-1)` elsewhere.
pub fn perturbed_start<T: Scalar>(n: usize, k: usize, j: usize) -> FractionalPoint<T> {
    let uniform = count::<T>(k) / count::<T>(n);
    let rest = if n > 1 { count::<T>(k - 1) / count::<T>(n - 1) } else { T::one() };
    let half = lit::<T>(0.5);
    let x = (0..n)
        .map(|i| {
            let biased = if i == j { T::one() } else { rest };
            half * uniform + half * biased
        })
        .collect();
    FractionalPoint { x }
}

/// The default start followed by one `perturbed_start` per vertex.
pub fn fw_multi_start<T: Scalar>(
    inst: &ProblemInstance<'_, T>,
    cfg: &FwConfig<T>,
) -> Result<Vec<SolveReport<T>>> {
    let n = inst.n();
    let mut reports = vec![fw_solve(inst, cfg, None)?];
    for j in 0..n {
        reports.push(fw_solve(inst, cfg, Some(perturbed_start(n, inst.k, j)))?);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::graph::Graph;
    use crate::oracle::exact_dks;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn inst(g: &Graph, k: usize, lambda: f64) -> ProblemInstance<'_, f64> {
        ProblemInstance::new(g, k, lambda).unwrap()
    }

    #[test]
    fn objective_examples() {
        let t = complete(3);
        assert_eq!(objective(&inst(&t, 2, 1.0), &[1.0, 1.0, 0.0]).unwrap(), 4.0);
        let s = star(4);
        assert_eq!(objective(&inst(&s, 2, 0.0), &[0.0, 1.0, 1.0, 0.0, 0.0]).unwrap(), 0.0);
        let third = 2.0 / 3.0;
        let v = objective(&inst(&t, 2, 1.0), &[third; 3]).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
        // k² + k²(λ−1)/ω with k=2, λ=1
        assert!((v - (4.0 + 4.0 * 0.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn lmp_examples() {
        assert_eq!(lmp_top_k(&[3.0, 1.0, 2.0, 5.0], 2).as_slice(), &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(lmp_top_k(&[1.0, 1.0, 1.0], 2).as_slice(), &[1.0, 1.0, 0.0]);
        assert_eq!(lmp_top_k(&[-1.0, -2.0, -3.0], 1).as_slice(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn point_validation() {
        assert!(FractionalPoint::new(vec![0.5, 0.5, 1.0], 2).is_ok());
        assert!(FractionalPoint::new(vec![1.5, 0.5, 0.0], 2).is_err());
        assert!(FractionalPoint::new(vec![0.5, 0.5, 0.5], 2).is_err());
        assert!(FractionalPoint::new(vec![-0.1, 1.0, 1.1], 2).is_err());
    }

    #[test]
    fn k3_converges_to_optimal_selection() {
        let g = complete(3);
        let r = fw_solve(&inst(&g, 2, 1.0), &FwConfig::default(), None).unwrap();
        assert!(r.converged);
        // Uniform start is already stationary on K3: every 2-subset ties.
        assert!((r.objective_trace.last().unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(r.selection.vertices, vec![0, 1]);
        assert_eq!(r.selection.normalized_density, 1.0);
        assert_eq!(r.selection.objective_at_lambda, 4.0);
    }

    #[test]
    fn two_triangles_selects_a_triangle() {
        let g = two_triangles();
        let i = inst(&g, 3, 1.0);
        let (best, _) = exact_dks(&g, 3, 1.0).unwrap();
        assert_eq!(best, 9.0);
        // Uniform start is symmetric; a biased start breaks the tie.
        let r = fw_solve(&i, &FwConfig::default(), Some(perturbed_start(6, 3, 4))).unwrap();
        assert!(r.converged && r.integral);
        assert_eq!(r.selection.vertices, vec![3, 4, 5]);
        assert_eq!(r.selection.objective_at_lambda, 9.0);
        let best_multi = fw_multi_start(&i, &FwConfig::default())
            .unwrap()
            .into_iter()
            .map(|r| r.selection.normalized_density)
            .fold(0.0, f64::max);
        assert_eq!(best_multi, 1.0);
    }

    #[test]
    fn vertex_fixed_point_returns_immediately() {
        let g = two_triangles();
        let i = inst(&g, 3, 1.0);
        let x0 = FractionalPoint::indicator(6, &[0, 1, 2]);
        let r = fw_solve(&i, &FwConfig::default(), Some(x0.clone())).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 0);
        assert_eq!(r.final_point, x0.into_vec());
    }

    #[test]
    fn bad_config_is_rejected() {
        let g = complete(3);
        let cfg = FwConfig { max_iters: 0, ..FwConfig::default() };
        assert!(matches!(fw_solve(&inst(&g, 2, 1.0), &cfg, None), Err(DksError::Config(_))));
        let cfg = FwConfig { gap_tol: -1.0, ..FwConfig::default() };
        assert!(fw_solve(&inst(&g, 2, 1.0), &cfg, None).is_err());
    }

    #[test]
    fn zero_operator_converges_at_start() {
        let g = edgeless(4);
        let r = fw_solve(&inst(&g, 2, 0.0), &FwConfig::default(), None).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 0);
    }

    fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        Graph::from_edges(n, edges).unwrap()
    }

    #[test]
    fn option_one_ascends_and_stays_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..40 {
            let n = rng.gen_range(5..60);
            let p = rng.gen_range(0.05..0.6);
            let g = random_graph(&mut rng, n, p);
            let k = rng.gen_range(1..=n);
            let lambda = [0.0, 0.5, 1.0, 2.0][rng.gen_range(0..4)];
            let i = inst(&g, k, lambda);
            let r = fw_solve(&i, &FwConfig::default(), None).unwrap();
            for w in r.objective_trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0), "descent {w:?}");
            }
            FractionalPoint::new(r.final_point.clone(), k).unwrap();
            if r.converged {
                let gap = fw_gap(&i, &r.final_point).unwrap();
                let v = objective(&i, &r.final_point).unwrap();
                assert!(gap <= 1e-8 * (1.0 + v.abs()) + 1e-12);
            }
        }
    }

    #[test]
    fn option_two_ascends() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random_graph(&mut rng, 40, 0.2);
        let cfg = FwConfig { step_rule: StepRule::OptionII, ..FwConfig::default() };
        let r = fw_solve(&inst(&g, 8, 1.0), &cfg, None).unwrap();
        for w in r.objective_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0));
        }
    }

    #[test]
    fn integral_output_stays_stationary_under_heavier_loading() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut checked = 0;
        for _ in 0..30 {
            let n = rng.gen_range(6..40);
            let p = rng.gen_range(0.1..0.5);
            let g = random_graph(&mut rng, n, p);
            let k = rng.gen_range(2..=n);
            let r = fw_solve(&inst(&g, k, 1.5), &FwConfig::default(), None).unwrap();
            if !(r.converged && r.integral) {
                continue;
            }
            for lambda2 in [2.0, 5.0, 10.0] {
                let i2 = inst(&g, k, lambda2);
                let gap = fw_gap(&i2, &r.final_point).unwrap();
                let v = objective(&i2, &r.final_point).unwrap();
                assert!(gap <= 1e-8 * (1.0 + v), "gap {gap} at λ={lambda2}");
            }
            checked += 1;
        }
        assert!(checked > 10);
    }

    #[test]
    fn multi_start_matches_brute_force_mostly() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let (mut hits, mut total) = (0, 0);
        for _ in 0..60 {
            let n = rng.gen_range(4..=10);
            let p = rng.gen_range(0.2..0.7);
            let g = random_graph(&mut rng, n, p);
            let k = rng.gen_range(2..=n);
            let i = inst(&g, k, 1.0);
            let (opt, _) = exact_dks(&g, k, 1.0).unwrap();
            let best = fw_multi_start(&i, &FwConfig::default())
                .unwrap()
                .iter()
                .map(|r| r.selection.objective_at_lambda)
                .fold(f64::MIN, f64::max);
            assert!(best <= opt + 1e-9);
            total += 1;
            if (best - opt).abs() < 1e-9 {
                hits += 1;
            }
        }
        assert!(hits * 10 >= total * 9, "{hits}/{total}");
    }

    #[test]
    fn single_precision_solve() {
        let g = two_triangles();
        let i = ProblemInstance::new(&g, 3, 1.0f32).unwrap();
        let r = fw_solve(&i, &FwConfig::default(), Some(perturbed_start(6, 3, 0))).unwrap();
        assert_eq!(r.selection.vertices, vec![0, 1, 2]);
    }
}
