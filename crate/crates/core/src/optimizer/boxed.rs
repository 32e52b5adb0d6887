use std::collections::VecDeque;

use super::{boundary_flags, checked, OptimizeOutcome, OptimizerConfig};
use crate::kernels::ParamBounds;
use crate::objective::fd_gradient;
use crate::{Error, Result};

const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

/// Maximizes `f` over the box with projected quasi-Newton steps: L-BFGS
/// directions restricted to the free coordinates, finite-difference
/// gradients, and projected Armijo backtracking.
///
/// Stops when the relative objective change between accepted iterates falls
/// below `rel_tol`, when no ascent step exists, or after `max_iter` iterations.
pub fn maximize_box<F>(mut f: F, bounds: &ParamBounds, cfg: &OptimizerConfig) -> Result<OptimizeOutcome>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    cfg.validate()?;
    bounds.validate()?;
    if bounds.lower.iter().zip(&bounds.upper).any(|(l, u)| u - l <= 0.0) {
        return Err(Error::InvalidParameter("box must have positive width in every coordinate".into()));
    }
    let m = bounds.dim();
    let first = match &cfg.initial_guess {
        Some(g) if g.len() != m => return Err(Error::DimensionMismatch { expected: m, got: g.len() }),
        Some(g) => g.clone(),
        None => vec![2.0; m],
    };
    let mut starts = vec![first];
    for k in 1..=cfg.multi_start {
        let t = k as f64 / (cfg.multi_start + 1) as f64;
        starts.push(bounds.lower.iter().zip(&bounds.upper).map(|(l, u)| l + t * (u - l)).collect());
    }

    let mut best: Option<OptimizeOutcome> = None;
    let mut evaluations = 0;
    for mut start in starts {
        bounds.project(&mut start);
        let out = run_from(&mut f, start, bounds, cfg)?;
        evaluations += out.evaluations;
        if best.as_ref().is_none_or(|b| out.value > b.value) {
            best = Some(out);
        }
    }
    let mut best = best.expect("at least one start");
    best.evaluations = evaluations;
    Ok(best)
}

fn run_from<F>(f: &mut F, mut x: Vec<f64>, bounds: &ParamBounds, cfg: &OptimizerConfig) -> Result<OptimizeOutcome>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let m = x.len();
    let mut evals = 0usize;
    // Work with h = -f (minimization).
    let mut h = |p: &[f64], evals: &mut usize| -> Result<f64> {
        *evals += 1;
        Ok(-checked(f(p)?, p)?)
    };
    let mut hx = h(&x, &mut evals)?;
    let mut g = fd_gradient(|q| h(q, &mut evals), &x, cfg.fd_step, bounds)?;
    let mut memory: VecDeque<Pair> = VecDeque::new();
    let mut trace = vec![-hx];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iter {
        iterations += 1;
        let at_lower = |i: usize, x: &[f64]| x[i] <= bounds.lower[i];
        let at_upper = |i: usize, x: &[f64]| x[i] >= bounds.upper[i];
        let pg: Vec<f64> = (0..m)
            .map(|i| if (at_lower(i, &x) && g[i] > 0.0) || (at_upper(i, &x) && g[i] < 0.0) { 0.0 } else { g[i] })
            .collect();
        if pg.iter().all(|v| *v == 0.0) {
            converged = true;
            break;
        }

        let mut dir = two_loop(&memory, &g);
        for i in 0..m {
            if pg[i] == 0.0 {
                dir[i] = 0.0;
            }
        }
        if dot(&dir, &g) >= 0.0 {
            memory.clear();
            dir = pg.iter().map(|v| -v).collect();
        }

        let accepted = loop {
            match line_search(&mut h, &x, hx, &g, &dir, memory.is_empty(), bounds, &mut evals)? {
                Some(step) => break Some(step),
                None if !memory.is_empty() => {
                    memory.clear();
                    dir = pg.iter().map(|v| -v).collect();
                }
                None => break None,
            }
        };
        let Some((x_new, h_new)) = accepted else {
            // No ascent along the projected gradient: stationary to FD accuracy.
            converged = true;
            break;
        };

        let g_new = fd_gradient(|q| h(q, &mut evals), &x_new, cfg.fd_step, bounds)?;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if memory.len() == cfg.memory {
                memory.pop_front();
            }
            memory.push_back(Pair { s, y, rho: 1.0 / sy });
        }
        let rel_change = (h_new - hx).abs() / hx.abs().max(f64::MIN_POSITIVE);
        x = x_new;
        hx = h_new;
        g = g_new;
        trace.push(-hx);
        if rel_change < cfg.box_rel_tol() {
            converged = true;
            break;
        }
    }

    Ok(OptimizeOutcome {
        boundary_hit: boundary_flags(&x, &bounds.lower, &bounds.upper, cfg.fd_step),
        argmax: x,
        value: -hx,
        iterations,
        evaluations: evals,
        converged,
        trace,
    })
}

fn two_loop(memory: &VecDeque<Pair>, g: &[f64]) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(memory.len());
    for p in memory.iter().rev() {
        let a = p.rho * dot(&p.s, &q);
        q.iter_mut().zip(&p.y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    let gamma = memory.back().map_or(1.0, |p| dot(&p.s, &p.y) / dot(&p.y, &p.y));
    let mut r: Vec<f64> = q.iter().map(|v| gamma * v).collect();
    for (p, a) in memory.iter().zip(alphas.iter().rev()) {
        let b = p.rho * dot(&p.y, &r);
        r.iter_mut().zip(&p.s).for_each(|(ri, si)| *ri += (a - b) * si);
    }
    r.iter().map(|v| -v).collect()
}

#[allow(clippy::too_many_arguments)]
fn line_search<H>(
    h: &mut H,
    x: &[f64],
    hx: f64,
    g: &[f64],
    dir: &[f64],
    cap_first_step: bool,
    bounds: &ParamBounds,
    evals: &mut usize,
) -> Result<Option<(Vec<f64>, f64)>>
where
    H: FnMut(&[f64], &mut usize) -> Result<f64>,
{
    let max_comp = dir.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if max_comp == 0.0 {
        return Ok(None);
    }
    // Without curvature information the gradient scale is arbitrary; start
    // with a move of at most one unit per coordinate.
    let mut alpha = if cap_first_step { (1.0 / max_comp).min(1.0) } else { 1.0 };
    for _ in 0..MAX_BACKTRACKS {
        let mut trial: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a + alpha * d).collect();
        bounds.project(&mut trial);
        let step: Vec<f64> = trial.iter().zip(x).map(|(a, b)| a - b).collect();
        if step.iter().all(|v| *v == 0.0) {
            return Ok(None);
        }
        let h_trial = h(&trial, evals)?;
        if h_trial <= hx + ARMIJO_C1 * dot(g, &step) {
            return Ok(Some((trial, h_trial)));
        }
        alpha *= 0.5;
    }
    Ok(None)
}
