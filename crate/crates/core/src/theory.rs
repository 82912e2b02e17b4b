//! Oracle-backed property suites: the clique characterization of the simplex
//! maximum, monotone rounding, tightness at `λ = 1`, the relaxation gap below
//! it, and strict ascent of a single rounding step.
//!
//! Each suite checks every instance it is given and reports the smallest
//! failing one (by `n`, then `m`).

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::fw::{fw_multi_start, objective, FwConfig};
use crate::graph::{Graph, ProblemInstance};
use crate::oracle::{exact_dks, max_clique_size, maximal_cliques, simplex_qp_max};
use crate::oracle::family::random_gnp;
use crate::rounding::{round_to_integral, Rounder};

/// A failing instance, printable as a self-contained reproduction.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub edges: Vec<(usize, usize)>,
    pub n: usize,
    pub k: Option<usize>,
    pub lambda: f64,
    pub x: Option<Vec<f64>>,
    pub message: String,
}

impl Counterexample {
    fn new(g: &Graph, k: Option<usize>, lambda: f64, x: Option<&[f64]>, message: String) -> Self {
        Self { edges: g.edges().collect(), n: g.n(), k, lambda, x: x.map(<[f64]>::to_vec), message }
    }

    fn size(&self) -> (usize, usize) {
        (self.n, self.edges.len())
    }
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.message)?;
        let edges: Vec<String> = self.edges.iter().map(|(u, v)| format!("{u}-{v}")).collect();
        writeln!(f, "  n = {}, edges = [{}]", self.n, edges.join(" "))?;
        match self.k {
            Some(k) => writeln!(f, "  k = {k}, lambda = {}", self.lambda)?,
            None => writeln!(f, "  lambda = {}", self.lambda)?,
        }
        if let Some(x) = &self.x {
            let xs: Vec<String> = x.iter().map(|v| format!("{v:.12}")).collect();
            write!(f, "  x = [{}]", xs.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: &'static str,
    pub checked: usize,
    pub failures: usize,
    /// Suite-specific summary, e.g. the largest gap seen.
    pub detail: String,
    pub counterexample: Option<Counterexample>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

struct Tally {
    checked: usize,
    failures: usize,
    worst: Option<Counterexample>,
}

impl Tally {
    fn new() -> Self {
        Self { checked: 0, failures: 0, worst: None }
    }

    fn check(&mut self, ok: bool, fail: impl FnOnce() -> Counterexample) {
        self.checked += 1;
        if !ok {
            self.failures += 1;
            let c = fail();
            if self.worst.as_ref().is_none_or(|w| c.size() < w.size()) {
                self.worst = Some(c);
            }
        }
    }

    fn finish(self, name: &'static str, detail: String) -> SuiteReport {
        SuiteReport { name, checked: self.checked, failures: self.failures, detail, counterexample: self.worst }
    }
}

/// Uniform-ish random point of `C_k^n`: `min(1, t·y)` for uniform `y`, with
/// `t` found by bisection so the entries sum to `k`.
pub fn random_feasible_point(n: usize, k: usize, rng: &mut impl Rng) -> Vec<f64> {
    if k == n {
        return vec![1.0; n];
    }
    let y: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-6).collect();
    let mass = |t: f64| y.iter().map(|&v| (t * v).min(1.0)).sum::<f64>();
    let (mut lo, mut hi) = (0.0, 1.0);
    while mass(hi) < k as f64 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) < k as f64 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x: Vec<f64> = y.iter().map(|&v| (hi * v).min(1.0)).collect();
    // Push the bisection residue onto the largest interior entry.
    let residue = k as f64 - x.iter().sum::<f64>();
    if let Some(i) = (0..n).filter(|&i| x[i] < 1.0).max_by(|&a, &b| x[a].total_cmp(&x[b])) {
        x[i] = (x[i] + residue).clamp(0.0, 1.0);
    }
    x
}

fn clique_uniform(n: usize, clique: &[usize], scale: f64) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for &v in clique {
        x[v] = scale / clique.len() as f64;
    }
    x
}

/// The simplex maximum of `xᵀ(A + λI)x` is `1 + (λ − 1)/ω` for `λ ∈ [0, 1]`,
/// attained by the uniform point on a maximum clique.
pub fn motzkin_suite(family: &[Graph], lambdas: &[f64], restarts: usize, seed: u64) -> Result<SuiteReport> {
    let mut tally = Tally::new();
    let mut worst_err = 0.0f64;
    for g in family {
        let omega = max_clique_size(g)?;
        let best_clique = maximal_cliques(g)?
            .into_iter()
            .find(|c| c.len() == omega)
            .expect("a maximum clique exists");
        for &lambda in lambdas {
            let target = 1.0 + (lambda - 1.0) / omega as f64;
            let (value, x) = simplex_qp_max(g, lambda, 1.0, restarts, seed)?;
            worst_err = worst_err.max((value - target).abs());
            tally.check(value >= target - 1e-6 && value <= target + 1e-9, || {
                Counterexample::new(g, None, lambda, Some(&x), format!("simplex maximum {value} != 1 + (λ−1)/ω = {target}"))
            });
            let u = clique_uniform(g.n(), &best_clique, 1.0);
            let at_clique = objective(&ProblemInstance::new(g, 1, lambda)?, &u)?;
            tally.check((at_clique - target).abs() <= 1e-12, || {
                Counterexample::new(g, None, lambda, Some(&u), format!("clique point gives {at_clique}, expected {target}"))
            });
        }
    }
    Ok(tally.finish("motzkin", format!("max |maximum − 1 − (λ−1)/ω| = {worst_err:.3e}")))
}

/// Rounding never lowers the objective and ends integral and feasible.
pub fn rounding_suite(points: usize, max_n: usize, lambdas: &[f64], seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    let mut worst_drop = f64::NEG_INFINITY;
    let mut g = random_gnp(2, 0.5, &mut rng);
    for p in 0..points {
        if p % 20 == 0 {
            let n = rng.gen_range(2..=max_n.max(2));
            let density = rng.gen_range(0.05..0.9);
            g = random_gnp(n, density, &mut rng);
        }
        let n = g.n();
        let k = rng.gen_range(1..=n);
        let lambda = lambdas[rng.gen_range(0..lambdas.len())];
        let x = random_feasible_point(n, k, &mut rng);
        let inst = ProblemInstance::new(&g, k, lambda)?;
        let before = objective(&inst, &x)?;
        let rounded = round_to_integral(&inst, &x)?;
        let after = objective(&inst, rounded.as_slice())?;
        let ones = rounded.as_slice().iter().filter(|&&v| v == 1.0).count();
        worst_drop = worst_drop.max(before - after);
        let ok = after >= before - 1e-9 * before.abs().max(1.0) && rounded.is_integral() && ones == k;
        tally.check(ok, || {
            Counterexample::new(&g, Some(k), lambda, Some(&x), format!("rounding went from {before} to {after} ({ones} ones)"))
        });
    }
    Ok(tally.finish("rounding", format!("largest g(x) − g(round(x)) = {worst_drop:.3e}")))
}

/// At `λ = 1` the best rounded value over Frank–Wolfe multi-start and
/// `random_points` random starts equals the exhaustive optimum for every `k`.
pub fn tightness_suite(family: &[Graph], random_points: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = FwConfig::<f64>::default();
    let mut tally = Tally::new();
    for g in family {
        let n = g.n();
        for k in 1..=n {
            let (exact, _) = exact_dks(g, k, 1.0)?;
            let inst = ProblemInstance::new(g, k, 1.0)?;
            let mut best = f64::NEG_INFINITY;
            let mut best_x = Vec::new();
            let mut consider = |x: Vec<f64>| -> Result<()> {
                let r = round_to_integral(&inst, &x)?;
                let v = objective(&inst, r.as_slice())?;
                if v > best {
                    best = v;
                    best_x = x;
                }
                Ok(())
            };
            for report in fw_multi_start(&inst, &cfg)? {
                consider(report.final_point)?;
            }
            for _ in 0..random_points {
                consider(random_feasible_point(n, k, &mut rng))?;
            }
            tally.check((best - exact).abs() <= 1e-9, || {
                Counterexample::new(g, Some(k), 1.0, Some(&best_x), format!("best rounded value {best} vs exact {exact}"))
            });
        }
    }
    let detail = format!("{} (graph, k) instances at λ = 1", tally.checked);
    Ok(tally.finish("tightness", detail))
}

/// For `k < ω` and `λ < 1` the continuous maximum over `{x >= 0, Σx = k}`
/// reaches `k² + k²(λ − 1)/ω`, strictly above the integral optimum
/// `k(k + λ − 1)`. Finding that gap is the pass condition.
pub fn relaxation_gap_suite(family: &[Graph], lambdas: &[f64], restarts: usize, seed: u64) -> Result<SuiteReport> {
    let mut tally = Tally::new();
    let mut smallest_gap = f64::INFINITY;
    for g in family {
        let omega = max_clique_size(g)?;
        for k in 1..omega {
            let kf = k as f64;
            for &lambda in lambdas {
                let (exact, _) = exact_dks(g, k, lambda)?;
                let (relaxed, x) = simplex_qp_max(g, lambda, kf, restarts, seed)?;
                let predicted = kf * kf + kf * kf * (lambda - 1.0) / omega as f64;
                let integral = kf * (kf + lambda - 1.0);
                smallest_gap = smallest_gap.min(relaxed - exact);
                let ok = (exact - integral).abs() <= 1e-9 && relaxed >= predicted - 1e-6 && relaxed > exact + 1e-9;
                tally.check(ok, || {
                    Counterexample::new(
                        g,
                        Some(k),
                        lambda,
                        Some(&x),
                        format!("relaxed {relaxed}, predicted {predicted}, exact {exact}, expected exact {integral}"),
                    )
                });
            }
        }
    }
    let detail = if tally.checked == 0 {
        "no instance with k < ω".to_string()
    } else {
        format!("smallest relaxed − integral gap = {smallest_gap:.6}")
    };
    Ok(tally.finish("gap", detail))
}

/// Random feasible point with at least two entries in `(0.01, 0.99)`.
fn non_integral_point(n: usize, k: usize, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let x = random_feasible_point(n, k, rng);
        if x.iter().filter(|&&v| v > 0.01 && v < 0.99).count() >= 2 {
            return x;
        }
    }
}

/// One rounding step from a non-integral point raises `g` by at least
/// `2(λ − 1)δ²` across an edge and `2λδ²` otherwise.
pub fn landscape_suite(points: usize, max_n: usize, lambda: f64, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    let (mut edge_steps, mut non_edge_steps) = (0, 0);
    for _ in 0..points {
        let n = rng.gen_range(3..=max_n.max(3));
        let density = rng.gen_range(0.1..0.9);
        let g = random_gnp(n, density, &mut rng);
        let k = rng.gen_range(1..n);
        let x = non_integral_point(n, k, &mut rng);
        let inst = ProblemInstance::new(&g, k, lambda)?;
        let before = objective(&inst, &x)?;
        let mut r = Rounder::new(&inst, &x)?;
        let step = r.step().expect("a non-integral point has two fractional entries");
        let after = objective(&inst, r.point())?;
        let d2 = step.delta * step.delta;
        let required = if step.adjacent { 2.0 * (lambda - 1.0) * d2 } else { 2.0 * lambda * d2 };
        if step.adjacent {
            edge_steps += 1;
        } else {
            non_edge_steps += 1;
        }
        tally.check(after - before >= required - 1e-9 && after > before, || {
            Counterexample::new(
                &g,
                Some(k),
                lambda,
                Some(&x),
                format!("step {} -> {} (δ = {}) raised g by {}, needed {required}", step.donor, step.receiver, step.delta, after - before),
            )
        });
    }
    Ok(tally.finish("landscape", format!("{edge_steps} edge steps, {non_edge_steps} non-edge steps")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::oracle::family::test_family;

    #[test]
    fn random_points_are_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let n = rng.gen_range(1..60);
            let k = rng.gen_range(1..=n);
            let x = random_feasible_point(n, k, &mut rng);
            assert!(crate::fw::FractionalPoint::new(x, k).is_ok());
        }
    }

    #[test]
    fn small_suites_pass() {
        let family = test_family(5, 0, 0);
        assert!(motzkin_suite(&family, &[0.0, 0.5, 1.0], 4, 0).unwrap().passed());
        assert!(rounding_suite(300, 20, &[1.0, 2.0], 7).unwrap().passed());
        assert!(tightness_suite(&family, 20, 0).unwrap().passed());
        assert!(landscape_suite(200, 15, 1.5, 0).unwrap().passed());
        let gap = relaxation_gap_suite(&family, &[0.5], 4, 0).unwrap();
        assert!(gap.passed() && gap.checked > 0, "{gap:?}");
    }

    #[test]
    fn gap_is_absent_at_lambda_one() {
        // The suite's strict-gap condition must fail once the loading reaches 1.
        let r = relaxation_gap_suite(&[complete(3)], &[1.0], 2, 0).unwrap();
        assert!(!r.passed());
        let c = r.counterexample.unwrap();
        assert_eq!(c.n, 3);
        assert!(c.to_string().contains("edges = [0-1 0-2 1-2]"));
    }
}
