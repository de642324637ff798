//! Minimizers of aggregate losses over an action set.
//!
//! Linear aggregates use the support function. Diagonal quadratics on boxes
//! are solved coordinate-wise. Other smooth aggregates use projected gradient
//! descent with backtracking, stopped once a step moves less than
//! `step_tol` or improves the objective by less than `value_tol` (relative).
//! Aggregates with hinge terms use projected subgradient steps of length
//! `diam/(‖g‖√k)` and keep the best iterate.

use crate::error::Result;
use crate::geometry::{ActionSet, Point, SetKind};
use crate::linalg::{distance, dot, norm};
use crate::loss::AggregateLoss;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub step_tol: f64,
    /// Relative objective decrease below which descent stops.
    pub value_tol: f64,
    pub max_iter: usize,
    pub subgradient_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            step_tol: 1e-9,
            value_tol: 1e-13,
            max_iter: 100_000,
            subgradient_iter: 20_000,
        }
    }
}

pub fn minimize(
    loss: &AggregateLoss,
    set: &ActionSet,
    start: Option<&Point>,
    opts: &SolverOptions,
) -> Result<(Point, f64)> {
    if loss.is_linear() {
        let (p, v) = set.support_extreme(loss.linear_part())?;
        return Ok((p, v + loss.offset()));
    }
    if let Some(sol) = diagonal_box(loss, set)? {
        return Ok(sol);
    }
    let x0 = match start {
        Some(p) => set.project(p)?,
        None => set.interior_point(),
    };
    if loss.has_nonsmooth_terms() {
        subgradient(loss, set, x0, opts)
    } else {
        projected_gradient(loss, set, x0, opts)
    }
}

fn diagonal_box(loss: &AggregateLoss, set: &ActionSet) -> Result<Option<(Point, f64)>> {
    let (Some(m), SetKind::Box { lower, upper }) = (loss.curvature(), set.kind()) else {
        return Ok(None);
    };
    if !loss.is_quadratic() {
        return Ok(None);
    }
    let n = set.dim();
    let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || m[i * n + j] == 0.0));
    if !diagonal || (0..n).any(|i| !(m[i * n + i] > 0.0)) {
        return Ok(None);
    }
    let g = loss.linear_part();
    let x: Vec<f64> = (0..n)
        .map(|i| (-g[i] / m[i * n + i]).clamp(lower[i], upper[i]))
        .collect();
    let v = loss.value(&x)?;
    Ok(Some((Point::new(x)?, v)))
}

fn projected_gradient(
    loss: &AggregateLoss,
    set: &ActionSet,
    mut x: Point,
    opts: &SolverOptions,
) -> Result<(Point, f64)> {
    let mut fx = loss.value(&x)?;
    let mut step = 1.0;
    for _ in 0..opts.max_iter {
        let g = loss.gradient(&x)?;
        let (next, fn_next) = loop {
            let y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - step * b).collect();
            let cand = set.project(&y)?;
            let diff: Vec<f64> = cand.iter().zip(x.iter()).map(|(a, b)| a - b).collect();
            let fc = loss.value(&cand)?;
            let model = fx + dot(&g, &diff) + dot(&diff, &diff) / (2.0 * step);
            if fc <= model + 1e-12 * fx.abs().max(1.0) || step < 1e-300 {
                break (cand, fc);
            }
            step *= 0.5;
        };
        let moved = distance(&next, &x);
        let gain = fx - fn_next;
        x = next;
        fx = fn_next;
        if moved < opts.step_tol || gain <= opts.value_tol * fx.abs().max(1.0) {
            break;
        }
        step *= 2.0;
    }
    Ok((x, fx))
}

fn subgradient(
    loss: &AggregateLoss,
    set: &ActionSet,
    mut x: Point,
    opts: &SolverOptions,
) -> Result<(Point, f64)> {
    let diam = set.diameter().max(1e-12);
    let mut best = (x.clone(), loss.value(&x)?);
    for k in 1..=opts.subgradient_iter {
        let g = loss.gradient(&x)?;
        let gn = norm(&g);
        if gn == 0.0 {
            break;
        }
        let step = diam / (gn * (k as f64).sqrt());
        let y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - step * b).collect();
        x = set.project(&y)?;
        let v = loss.value(&x)?;
        if v < best.1 {
            best = (x.clone(), v);
        }
    }
    Ok(best)
}
