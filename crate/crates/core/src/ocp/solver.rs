//! Bound-constrained augmented Lagrangian on a scaled copy of the problem.
//!
//! The inner minimiser is a projected quasi-Newton method. Its model
//! Hessian is a block-diagonal damped BFGS approximation of the
//! Lagrangian's Hessian plus the exact curvature `rho * J'J` of the
//! penalty rows; the resulting banded system is solved by Cholesky.

use std::ops::Range;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::SolveStatus;

/// A smooth nonlinear program
///
/// ```text
/// min phi(w)  s.t.  g_lb <= g(w) <= g_ub,  w_lb <= w <= w_ub
/// ```
///
/// with a sparse constraint Jacobian given as `(row, col)` triplets.
pub trait NlpProblem {
    fn num_vars(&self) -> usize;
    fn num_constraints(&self) -> usize;
    /// `(lower, upper)`; infinite entries mean unbounded.
    fn var_bounds(&self) -> (Vec<f64>, Vec<f64>);
    fn constraint_bounds(&self) -> (Vec<f64>, Vec<f64>);
    fn objective(&self, w: &[f64]) -> f64;
    /// Writes the gradient and returns the objective.
    fn objective_gradient(&self, w: &[f64], grad: &mut [f64]) -> f64;
    fn constraints(&self, w: &[f64], g: &mut [f64]);
    fn jacobian_structure(&self) -> Vec<(usize, usize)>;
    /// Writes constraint values and the Jacobian entries in the order of
    /// [`NlpProblem::jacobian_structure`].
    fn constraints_jacobian(&self, w: &[f64], g: &mut [f64], values: &mut [f64]);
    /// Typical magnitude of each variable.
    fn var_scale(&self) -> Vec<f64> {
        vec![1.0; self.num_vars()]
    }
    /// Multiplier applied to each constraint row.
    fn constraint_scale(&self) -> Vec<f64> {
        vec![1.0; self.num_constraints()]
    }
    /// Contiguous variable ranges, covering `0..num_vars()` in order, such
    /// that the Hessian of the Lagrangian has no entries between different
    /// ranges. The default is a single dense block.
    #[allow(clippy::single_range_in_vec_init)]
    fn hessian_blocks(&self) -> Vec<Range<usize>> {
        vec![0..self.num_vars()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    /// Largest allowed scaled constraint violation.
    pub tol_feas: f64,
    /// Largest allowed projected gradient of the scaled Lagrangian.
    pub tol_opt: f64,
    pub max_outer: usize,
    /// Inner iterations per outer iteration.
    pub max_inner: usize,
    /// Wall-clock budget in seconds.
    pub time_budget: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_feas: 1e-6,
            tol_opt: 1e-4,
            max_outer: 40,
            max_inner: 2000,
            time_budget: 90.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NlpSolution {
    pub w: Vec<f64>,
    pub objective: f64,
    /// Multipliers of the (unscaled) constraints.
    pub multipliers: Vec<f64>,
    /// Inner iterations summed over all outer iterations.
    pub iterations: usize,
    pub outer_iterations: usize,
    pub status: SolveStatus,
    /// Largest scaled residual over constraints and variable bounds.
    pub max_violation: f64,
    /// Projected gradient norm of the scaled Lagrangian at `w`.
    pub optimality: f64,
    pub penalty: f64,
}

/// Box projection tolerant of infinite bounds.
fn project(z: &mut [f64], lo: &[f64], hi: &[f64]) {
    for ((v, &l), &h) in z.iter_mut().zip(lo).zip(hi) {
        *v = v.clamp(l, h);
    }
}

fn dist_to_interval(v: f64, lo: f64, hi: f64) -> f64 {
    if v < lo {
        lo - v
    } else if v > hi {
        v - hi
    } else {
        0.0
    }
}

/// The problem in scaled variables `z = w / dw`, constraints `c * g` and
/// objective `s * phi`.
struct Scaled<'a, P: NlpProblem + ?Sized> {
    p: &'a P,
    dw: Vec<f64>,
    cs: Vec<f64>,
    obj: f64,
    zl: Vec<f64>,
    zu: Vec<f64>,
    gl: Vec<f64>,
    gu: Vec<f64>,
    structure: Vec<(usize, usize)>,
    evals: usize,
}

impl<P: NlpProblem + ?Sized> Scaled<'_, P> {
    fn unscale(&self, z: &[f64]) -> Vec<f64> {
        z.iter().zip(&self.dw).map(|(z, d)| z * d).collect()
    }

    fn constraints(&self, z: &[f64], g: &mut [f64]) {
        self.p.constraints(&self.unscale(z), g);
        for (v, c) in g.iter_mut().zip(&self.cs) {
            *v *= c;
        }
    }

    fn violation(&self, g: &[f64]) -> f64 {
        g.iter()
            .zip(self.gl.iter().zip(&self.gu))
            .map(|(&v, (&l, &h))| dist_to_interval(v, l, h))
            .fold(0.0, f64::max)
    }

    /// Augmented Lagrangian value; `g` receives the scaled constraints.
    fn al_value(&mut self, z: &[f64], lam: &[f64], rho: f64, g: &mut [f64]) -> f64 {
        self.evals += 1;
        let f = self.obj * self.p.objective(&self.unscale(z));
        self.constraints(z, g);
        f + self.penalty_term(g, lam, rho)
    }

    fn penalty_term(&self, g: &[f64], lam: &[f64], rho: f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..g.len() {
            let shifted = g[i] + lam[i] / rho;
            let d = shifted - shifted.clamp(self.gl[i], self.gu[i]);
            acc += 0.5 * rho * d * d - 0.5 * lam[i] * lam[i] / rho;
        }
        acc
    }

    /// Fills `ev` at `z` and returns the augmented Lagrangian.
    fn evaluate(&mut self, z: &[f64], lam: &[f64], rho: f64, ev: &mut Eval) -> f64 {
        self.evals += 1;
        let w = self.unscale(z);
        let f = self.obj * self.p.objective_gradient(&w, &mut ev.fgrad);
        for (gi, d) in ev.fgrad.iter_mut().zip(&self.dw) {
            *gi *= self.obj * d;
        }
        self.p.constraints_jacobian(&w, &mut ev.g, &mut ev.jac);
        for (v, c) in ev.g.iter_mut().zip(&self.cs) {
            *v *= c;
        }
        for (k, &(r, c)) in self.structure.iter().enumerate() {
            ev.jac[k] *= self.cs[r] * self.dw[c];
        }
        ev.mu = self.multiplier_estimate(&ev.g, lam, rho);
        ev.grad.copy_from_slice(&ev.fgrad);
        for (k, &(r, c)) in self.structure.iter().enumerate() {
            ev.grad[c] += ev.jac[k] * ev.mu[r];
        }
        f + self.penalty_term(&ev.g, lam, rho)
    }

    /// Whether row `i` contributes curvature to the penalty at shifted
    /// value `g + lam / rho`.
    fn in_penalty_zone(&self, i: usize, g: f64, lam: f64, rho: f64) -> bool {
        let shifted = g + lam / rho;
        self.gl[i] == self.gu[i] || shifted < self.gl[i] || shifted > self.gu[i]
    }

    fn multiplier_estimate(&self, g: &[f64], lam: &[f64], rho: f64) -> Vec<f64> {
        (0..g.len())
            .map(|i| {
                let shifted = g[i] + lam[i] / rho;
                rho * (shifted - shifted.clamp(self.gl[i], self.gu[i]))
            })
            .collect()
    }

    fn projected_gradient_norm(&self, z: &[f64], grad: &[f64]) -> f64 {
        (0..z.len())
            .map(|i| ((z[i] - grad[i]).clamp(self.zl[i], self.zu[i]) - z[i]).abs())
            .fold(0.0, f64::max)
    }
}

/// Scaled quantities at one point.
#[derive(Clone)]
struct Eval {
    g: Vec<f64>,
    jac: Vec<f64>,
    /// Objective gradient.
    fgrad: Vec<f64>,
    /// Penalty multipliers `rho (s - P(s))`.
    mu: Vec<f64>,
    /// Gradient of the augmented Lagrangian.
    grad: Vec<f64>,
}

impl Eval {
    fn new(n: usize, m: usize, nnz: usize) -> Self {
        Self {
            g: vec![0.0; m],
            jac: vec![0.0; nnz],
            fgrad: vec![0.0; n],
            mu: vec![0.0; m],
            grad: vec![0.0; n],
        }
    }
}

/// Symmetric band matrix, lower half stored row by row.
struct Band {
    n: usize,
    bw: usize,
    a: Vec<f64>,
}

impl Band {
    fn new(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            a: vec![0.0; n * (bw + 1)],
        }
    }

    /// Entry `(i, j)` with `j <= i <= j + bw`.
    fn at(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.a[i * (self.bw + 1) + (j + self.bw - i)]
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * (self.bw + 1) + (j + self.bw - i)]
    }

    /// In-place Cholesky factor `L`; false if the matrix is not positive
    /// definite.
    fn factor(&mut self) -> bool {
        let bw = self.bw;
        for i in 0..self.n {
            for j in i.saturating_sub(bw)..=i {
                let mut sum = self.get(i, j);
                for k in i.saturating_sub(bw).max(j.saturating_sub(bw))..j {
                    sum -= self.get(i, k) * self.get(j, k);
                }
                if i == j {
                    if !(sum > 0.0) || !sum.is_finite() {
                        return false;
                    }
                    *self.at(i, i) = sum.sqrt();
                } else {
                    *self.at(i, j) = sum / self.get(j, j);
                }
            }
        }
        true
    }

    /// Solves `L L' x = b` in place after [`Band::factor`].
    #[allow(clippy::needless_range_loop)]
    fn solve(&self, x: &mut [f64]) {
        let bw = self.bw;
        for i in 0..self.n {
            let mut sum = x[i];
            for k in i.saturating_sub(bw)..i {
                sum -= self.get(i, k) * x[k];
            }
            x[i] = sum / self.get(i, i);
        }
        for i in (0..self.n).rev() {
            let mut sum = x[i];
            for k in i + 1..(i + bw + 1).min(self.n) {
                sum -= self.get(k, i) * x[k];
            }
            x[i] = sum / self.get(i, i);
        }
    }
}

/// Block-diagonal damped BFGS approximation of the Lagrangian Hessian.
struct BlockBfgs {
    blocks: Vec<Range<usize>>,
    mats: Vec<Vec<f64>>,
    updated: Vec<bool>,
}

impl BlockBfgs {
    fn new(blocks: Vec<Range<usize>>) -> Self {
        let mats = blocks
            .iter()
            .map(|b| {
                let k = b.len();
                let mut m = vec![0.0; k * k];
                for i in 0..k {
                    m[i * k + i] = 1.0;
                }
                m
            })
            .collect();
        let updated = vec![false; blocks.len()];
        Self { blocks, mats, updated }
    }

    fn reset(&mut self) {
        *self = Self::new(std::mem::take(&mut self.blocks));
    }

    fn add_to(&self, h: &mut Band) {
        for (b, m) in self.blocks.iter().zip(&self.mats) {
            let k = b.len();
            for i in 0..k {
                for j in 0..=i {
                    *h.at(b.start + i, b.start + j) += m[i * k + j];
                }
            }
        }
    }

    /// Powell-damped update of every block with its slice of `(s, y)`.
    fn update(&mut self, s: &[f64], y: &[f64]) {
        for (idx, b) in self.blocks.iter().enumerate() {
            let (sb, yb) = (&s[b.clone()], &y[b.clone()]);
            let k = b.len();
            let ss: f64 = sb.iter().map(|v| v * v).sum();
            if ss <= 1e-30 {
                continue;
            }
            let m = &mut self.mats[idx];
            let sy: f64 = sb.iter().zip(yb).map(|(a, c)| a * c).sum();
            if !self.updated[idx] && sy > 0.0 {
                // First curvature pair: rescale the identity to its size.
                let yy: f64 = yb.iter().map(|v| v * v).sum();
                let gamma = (yy / sy).clamp(1e-6, 1e6);
                for i in 0..k {
                    for j in 0..k {
                        m[i * k + j] = if i == j { gamma } else { 0.0 };
                    }
                }
            }
            let bs: Vec<f64> = (0..k).map(|i| (0..k).map(|j| m[i * k + j] * sb[j]).sum()).collect();
            let sbs: f64 = sb.iter().zip(&bs).map(|(a, c)| a * c).sum();
            if !(sbs > 1e-30) {
                continue;
            }
            let mut yd = yb.to_vec();
            let mut sy = sy;
            if sy < 0.2 * sbs {
                let theta = 0.8 * sbs / (sbs - sy);
                for i in 0..k {
                    yd[i] = theta * yb[i] + (1.0 - theta) * bs[i];
                }
                sy = sb.iter().zip(&yd).map(|(a, c)| a * c).sum();
            }
            if !(sy > 1e-30) {
                continue;
            }
            for i in 0..k {
                for j in 0..k {
                    m[i * k + j] += yd[i] * yd[j] / sy - bs[i] * bs[j] / sbs;
                }
            }
            self.updated[idx] = true;
        }
    }
}

/// Sparsity bookkeeping for assembling `rho * J'J`.
struct RowPattern {
    /// Jacobian entry indices of each row.
    entries: Vec<Vec<usize>>,
    bandwidth: usize,
}

impl RowPattern {
    fn new(m: usize, structure: &[(usize, usize)], blocks: &[Range<usize>]) -> Self {
        let mut entries = vec![Vec::new(); m];
        for (k, &(r, _)) in structure.iter().enumerate() {
            entries[r].push(k);
        }
        let mut bandwidth = blocks.iter().map(|b| b.len().saturating_sub(1)).max().unwrap_or(0);
        for row in &entries {
            let cols = row.iter().map(|&k| structure[k].1);
            if let (Some(lo), Some(hi)) = (cols.clone().min(), cols.max()) {
                bandwidth = bandwidth.max(hi - lo);
            }
        }
        Self { entries, bandwidth }
    }
}

/// Solves `nlp` from `w0` (clamped into the variable bounds).
pub fn solve_nlp<P: NlpProblem + ?Sized>(nlp: &P, w0: &[f64], opts: &SolverOptions) -> Result<NlpSolution> {
    let start = Instant::now();
    let budget = Duration::from_secs_f64(opts.time_budget.max(0.0));
    let n = nlp.num_vars();
    let m = nlp.num_constraints();
    if w0.len() != n {
        return Err(Error::Parameter(format!(
            "initial guess has {} entries, problem has {n} variables",
            w0.len()
        )));
    }
    if let Some(i) = w0.iter().position(|v| !v.is_finite()) {
        return Err(Error::WarmStartInvalid(format!("entry {i} of the initial guess is not finite")));
    }
    let blocks = nlp.hessian_blocks();
    let covers = blocks.first().is_some_and(|b| b.start == 0)
        && blocks.windows(2).all(|w| w[0].end == w[1].start)
        && blocks.last().is_some_and(|b| b.end == n);
    if n > 0 && !covers {
        return Err(Error::Parameter("Hessian blocks must tile the variables in order".into()));
    }
    let dw = nlp.var_scale();
    let cs = nlp.constraint_scale();
    let (wl, wu) = nlp.var_bounds();
    let (gl, gu) = nlp.constraint_bounds();
    let structure = nlp.jacobian_structure();
    let pattern = RowPattern::new(m, &structure, &blocks);
    let mut sp = Scaled {
        p: nlp,
        zl: wl.iter().zip(&dw).map(|(l, d)| l / d).collect(),
        zu: wu.iter().zip(&dw).map(|(u, d)| u / d).collect(),
        gl: gl.iter().zip(&cs).map(|(l, c)| l * c).collect(),
        gu: gu.iter().zip(&cs).map(|(u, c)| u * c).collect(),
        dw,
        cs,
        obj: 1.0,
        structure,
        evals: 0,
    };

    let mut z: Vec<f64> = w0.iter().zip(&sp.dw).map(|(w, d)| w / d).collect();
    project(&mut z, &sp.zl, &sp.zu);

    let mut ev = Eval::new(n, m, sp.structure.len());
    let zero = vec![0.0; m];
    let f0 = sp.evaluate(&z, &zero, 1.0, &mut ev);
    if !f0.is_finite() || ev.g.iter().any(|v| !v.is_finite()) || ev.grad.iter().any(|v| !v.is_finite()) {
        return Err(Error::WarmStartInvalid(
            "objective or constraints are not finite at the initial guess".into(),
        ));
    }
    // Objective scaling from the objective gradient alone.
    let gmax = ev.fgrad.iter().map(|g| g.abs()).fold(0.0, f64::max);
    sp.obj = 1.0 / gmax.max(1.0);

    let mut lam = vec![0.0; m];
    let mut g = vec![0.0; m];
    sp.constraints(&z, &mut g);
    let f_scaled = sp.obj * nlp.objective(&sp.unscale(&z));
    let infeas_sq: f64 = (0..m).map(|i| dist_to_interval(g[i], sp.gl[i], sp.gu[i]).powi(2)).sum();
    let mut rho = (10.0 * f_scaled.abs().max(1.0) / (0.5 * infeas_sq).max(1.0)).clamp(1e-8, 1e8);

    let mut prev_violation = f64::INFINITY;
    let mut total_inner = 0;
    let mut eps_inner = 1e-2f64.max(opts.tol_opt);
    let mut status = SolveStatus::MaxIterations;
    let mut outer = 0;
    let mut optimality = f64::INFINITY;
    let mut model = BlockBfgs::new(blocks);

    while outer < opts.max_outer {
        outer += 1;
        let (iters, pg, timed_out) = inner_minimise(
            &mut sp, &pattern, &mut z, &lam, rho, &mut model, eps_inner, opts.max_inner, start, budget,
        );
        total_inner += iters;
        optimality = pg;
        sp.constraints(&z, &mut g);
        let violation = sp.violation(&g);
        lam = sp.multiplier_estimate(&g, &lam, rho);
        for l in lam.iter_mut() {
            *l = l.clamp(-1e12, 1e12);
        }
        log::debug!(
            "outer {outer}: rho {rho:.3e} violation {violation:.3e} optimality {pg:.3e} inner {iters}"
        );
        if violation <= opts.tol_feas && pg <= opts.tol_opt {
            status = SolveStatus::Converged;
            break;
        }
        if timed_out {
            status = SolveStatus::TimeLimit;
            break;
        }
        if violation > opts.tol_feas && violation > 0.25 * prev_violation {
            rho = (rho * 10.0).min(1e12);
        }
        prev_violation = violation;
        if violation <= opts.tol_feas {
            eps_inner = (0.1 * eps_inner).max(opts.tol_opt);
        } else {
            eps_inner = (0.5 * eps_inner).max(opts.tol_opt);
        }
    }

    let w = sp.unscale(&z);
    sp.constraints(&z, &mut g);
    let bound_residual = (0..n)
        .map(|i| dist_to_interval(z[i], sp.zl[i], sp.zu[i]))
        .fold(0.0, f64::max);
    let max_violation = sp.violation(&g).max(bound_residual);
    let multipliers = lam
        .iter()
        .zip(&sp.cs)
        .map(|(l, c)| l * c / sp.obj)
        .collect();
    log::info!(
        "solver finished: {status:?} after {outer} outer / {total_inner} inner iterations, {} evaluations",
        sp.evals
    );
    Ok(NlpSolution {
        objective: nlp.objective(&w),
        w,
        multipliers,
        iterations: total_inner,
        outer_iterations: outer,
        status,
        max_violation,
        optimality,
        penalty: rho,
    })
}

/// Model Hessian `B + rho J_a' J_a` over the free variables, identity on
/// the variables held at a bound.
#[allow(clippy::too_many_arguments)]
fn assemble<P: NlpProblem + ?Sized>(
    sp: &Scaled<'_, P>,
    pattern: &RowPattern,
    model: &BlockBfgs,
    ev: &Eval,
    lam: &[f64],
    rho: f64,
    active: &[bool],
    shift: f64,
) -> Band {
    let n = active.len();
    let mut h = Band::new(n, pattern.bandwidth);
    model.add_to(&mut h);
    for (i, row) in pattern.entries.iter().enumerate() {
        if row.is_empty() || !sp.in_penalty_zone(i, ev.g[i], lam[i], rho) {
            continue;
        }
        for &k1 in row {
            let c1 = sp.structure[k1].1;
            for &k2 in row {
                let c2 = sp.structure[k2].1;
                if c2 <= c1 {
                    *h.at(c1, c2) += rho * ev.jac[k1] * ev.jac[k2];
                }
            }
        }
    }
    for (i, &held) in active.iter().enumerate() {
        if held {
            for j in i.saturating_sub(h.bw)..i {
                *h.at(i, j) = 0.0;
            }
            for k in i + 1..(i + h.bw + 1).min(n) {
                *h.at(k, i) = 0.0;
            }
            *h.at(i, i) = 1.0;
        } else {
            *h.at(i, i) += shift;
        }
    }
    h
}

#[allow(clippy::too_many_arguments)]
fn inner_minimise<P: NlpProblem + ?Sized>(
    sp: &mut Scaled<'_, P>,
    pattern: &RowPattern,
    z: &mut [f64],
    lam: &[f64],
    rho: f64,
    model: &mut BlockBfgs,
    eps: f64,
    max_iter: usize,
    start: Instant,
    budget: Duration,
) -> (usize, f64, bool) {
    let n = z.len();
    let m = lam.len();
    let mut ev = Eval::new(n, m, sp.structure.len());
    let mut ev_new = ev.clone();
    let mut f = sp.evaluate(z, lam, rho, &mut ev);
    let mut pg = sp.projected_gradient_norm(z, &ev.grad);
    let mut dir = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut g_trial = vec![0.0; m];
    let mut iters = 0;
    let mut fresh_model = false;
    let mut stalled = 0;
    while pg > eps && iters < max_iter {
        if start.elapsed() > budget {
            return (iters, pg, true);
        }
        iters += 1;
        // Variables held at a bound by the gradient do not move.
        let active: Vec<bool> = (0..n)
            .map(|i| {
                (z[i] <= sp.zl[i] + 1e-12 && ev.grad[i] > 0.0) || (z[i] >= sp.zu[i] - 1e-12 && ev.grad[i] < 0.0)
            })
            .collect();
        let mut shift = 0.0;
        let h = loop {
            let mut h = assemble(sp, pattern, model, &ev, lam, rho, &active, shift);
            if h.factor() {
                break Some(h);
            }
            shift = if shift == 0.0 { 1e-8 } else { shift * 100.0 };
            if shift > 1e8 {
                break None;
            }
        };
        let Some(h) = h else { break };
        for i in 0..n {
            dir[i] = if active[i] { 0.0 } else { -ev.grad[i] };
        }
        h.solve(&mut dir);
        for i in 0..n {
            if active[i] {
                dir[i] = 0.0;
            }
        }
        // Projected backtracking line search (Armijo on the actual step).
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            for i in 0..n {
                trial[i] = z[i] + alpha * dir[i];
            }
            project(&mut trial, &sp.zl, &sp.zu);
            let decrease: f64 = (0..n).map(|i| ev.grad[i] * (trial[i] - z[i])).sum();
            let ft = sp.al_value(&trial, lam, rho, &mut g_trial);
            if ft.is_finite() && ft <= f + 1e-4 * decrease.min(0.0) {
                accepted = Some(ft);
                break;
            }
            alpha *= 0.5;
        }
        if accepted.is_none() {
            if fresh_model {
                break;
            }
            // Restart the curvature model once before giving up.
            model.reset();
            fresh_model = true;
            continue;
        }
        fresh_model = false;
        let f_new = sp.evaluate(&trial, lam, rho, &mut ev_new);
        // Lagrangian gradient difference at the new multipliers.
        let s: Vec<f64> = (0..n).map(|i| trial[i] - z[i]).collect();
        let mut y: Vec<f64> = (0..n).map(|i| ev_new.fgrad[i] - ev.fgrad[i]).collect();
        for (k, &(r, c)) in sp.structure.iter().enumerate() {
            y[c] += (ev_new.jac[k] - ev.jac[k]) * ev_new.mu[r];
        }
        model.update(&s, &y);
        z.copy_from_slice(&trial);
        std::mem::swap(&mut ev, &mut ev_new);
        // Decreases lost in rounding: the tolerance is out of reach here.
        if f - f_new <= 4.0 * f64::EPSILON * f.abs().max(1.0) {
            stalled += 1;
            if stalled >= 5 {
                pg = sp.projected_gradient_norm(z, &ev.grad);
                break;
            }
        } else {
            stalled = 0;
        }
        f = f_new;
        pg = sp.projected_gradient_norm(z, &ev.grad);
    }
    (iters, pg, false)
}
