//! Compact convex action sets.
//!
//! Every set caches its ambient dimension, exact Euclidean diameter, a
//! designated strictly feasible interior point and the inradius about that
//! point (measured inside the set's affine hull). The spectrahedron
//! `{X ⪰ 0, tr X ≤ c}` uses the Frobenius norm, so its diameter is `√2·c`
//! (the distance between two distinct rank-one extreme points of trace `c`).

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::Point;
use crate::error::{check_dim, check_finite, invalid, Result};
use crate::linalg::{self, dot, norm};

#[derive(Debug, Clone, PartialEq)]
pub enum SetKind {
    /// Probability simplex of `R^dim`.
    Simplex {
        dim: usize,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    /// `{X symmetric, X ⪰ 0, tr X ≤ trace_bound}` on `side × side` matrices.
    Spectrahedron {
        side: usize,
        trace_bound: f64,
    },
    /// Cartesian product; coordinates are concatenated in order.
    Product(Vec<ActionSet>),
    /// Homothetic image `anchor + factor·(base − anchor)`.
    Scaled {
        base: Box<ActionSet>,
        anchor: Vec<f64>,
        factor: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionSet {
    kind: SetKind,
    dim: usize,
    diameter: f64,
    interior: Vec<f64>,
    inradius: f64,
}

impl ActionSet {
    pub fn simplex(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "simplex needs at least one vertex"));
        }
        Ok(Self::finish(SetKind::Simplex { dim }))
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(invalid("center", "ball needs dimension ≥ 1"));
        }
        check_finite(&center, "ball center")?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid("radius", format!("must be positive, got {radius}")));
        }
        Ok(Self::finish(SetKind::Ball { center, radius }))
    }

    pub fn unit_ball(dim: usize) -> Result<Self> {
        Self::ball(vec![0.0; dim], 1.0)
    }

    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(invalid("lower", "box needs dimension ≥ 1"));
        }
        check_finite(&lower, "box lower bound")?;
        check_finite(&upper, "box upper bound")?;
        if lower.iter().zip(&upper).any(|(l, u)| l > u) {
            return Err(invalid("upper", "lower ≤ upper must hold component-wise"));
        }
        Ok(Self::finish(SetKind::Box { lower, upper }))
    }

    pub fn cube(dim: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::boxed(vec![lower; dim], vec![upper; dim])
    }

    pub fn spectrahedron(side: usize, trace_bound: f64) -> Result<Self> {
        if side == 0 {
            return Err(invalid("side", "spectrahedron needs side ≥ 1"));
        }
        if !(trace_bound > 0.0 && trace_bound.is_finite()) {
            return Err(invalid(
                "trace_bound",
                format!("must be positive, got {trace_bound}"),
            ));
        }
        Ok(Self::finish(SetKind::Spectrahedron { side, trace_bound }))
    }

    pub fn product(parts: Vec<ActionSet>) -> Result<Self> {
        if parts.is_empty() {
            return Err(invalid("parts", "product of zero sets"));
        }
        Ok(Self::finish(SetKind::Product(parts)))
    }

    fn finish(kind: SetKind) -> Self {
        let (dim, diameter, interior, inradius) = match &kind {
            SetKind::Simplex { dim } => {
                let d = *dim as f64;
                let (diam, r) = if *dim == 1 {
                    (0.0, 0.0)
                } else {
                    (2f64.sqrt(), 1.0 / (d * (d - 1.0)).sqrt())
                };
                (*dim, diam, vec![1.0 / d; *dim], r)
            }
            SetKind::Ball { center, radius } => {
                (center.len(), 2.0 * radius, center.clone(), *radius)
            }
            SetKind::Box { lower, upper } => {
                let mid = lower
                    .iter()
                    .zip(upper)
                    .map(|(l, u)| 0.5 * (l + u))
                    .collect();
                let diam = linalg::distance(lower, upper);
                let r = lower
                    .iter()
                    .zip(upper)
                    .map(|(l, u)| 0.5 * (u - l))
                    .fold(f64::INFINITY, f64::min);
                (lower.len(), diam, mid, r)
            }
            SetKind::Spectrahedron { side, trace_bound } => {
                let diam = if *side == 1 {
                    *trace_bound
                } else {
                    2f64.sqrt() * trace_bound
                };
                let level = trace_bound / (2.0 * *side as f64);
                (
                    side * side,
                    diam,
                    linalg::identity_coords(*side, level),
                    level,
                )
            }
            SetKind::Product(parts) => {
                let dim = parts.iter().map(|p| p.dim).sum();
                let diam = parts
                    .iter()
                    .map(|p| p.diameter * p.diameter)
                    .sum::<f64>()
                    .sqrt();
                let interior = parts.iter().flat_map(|p| p.interior.clone()).collect();
                let r = parts
                    .iter()
                    .map(|p| p.inradius)
                    .fold(f64::INFINITY, f64::min);
                (dim, diam, interior, r)
            }
            SetKind::Scaled {
                base,
                anchor,
                factor,
            } => (
                base.dim,
                factor * base.diameter,
                anchor.clone(),
                factor * base.inradius,
            ),
        };
        Self {
            kind,
            dim,
            diameter,
            interior,
            inradius,
        }
    }

    pub fn kind(&self) -> &SetKind {
        &self.kind
    }

    /// Ambient dimension (number of coordinates).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn interior_point(&self) -> Point {
        Point::from_raw(self.interior.clone())
    }

    /// Radius of the largest ball about [`Self::interior_point`] contained in
    /// the set, within its affine hull.
    pub fn inradius(&self) -> f64 {
        self.inradius
    }

    /// `max ‖x‖` over the set (an upper bound for scaled sets).
    pub fn max_norm(&self) -> f64 {
        match &self.kind {
            SetKind::Simplex { .. } => 1.0,
            SetKind::Ball { center, radius } => norm(center) + radius,
            SetKind::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| (l * l).max(u * u))
                .sum::<f64>()
                .sqrt(),
            SetKind::Spectrahedron { trace_bound, .. } => *trace_bound,
            SetKind::Product(parts) => parts
                .iter()
                .map(|p| p.max_norm().powi(2))
                .sum::<f64>()
                .sqrt(),
            SetKind::Scaled {
                base,
                anchor,
                factor,
            } => (1.0 - factor) * norm(anchor) + factor * base.max_norm(),
        }
    }

    /// Dimension of the affine hull.
    pub fn tangent_dim(&self) -> usize {
        match &self.kind {
            SetKind::Simplex { dim } => dim - 1,
            SetKind::Ball { center, .. } => center.len(),
            SetKind::Box { lower, .. } => lower.len(),
            SetKind::Spectrahedron { side, .. } => side * (side + 1) / 2,
            SetKind::Product(parts) => parts.iter().map(|p| p.tangent_dim()).sum(),
            SetKind::Scaled { base, .. } => base.tangent_dim(),
        }
    }

    /// Standard Gaussian vector of the linear subspace parallel to the affine
    /// hull (sum-zero for the simplex, symmetric matrices for spectrahedra).
    pub fn tangent_gaussian(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim);
        self.push_tangent_gaussian(rng, &mut out);
        out
    }

    fn push_tangent_gaussian(&self, rng: &mut dyn RngCore, out: &mut Vec<f64>) {
        let mut gauss = || -> f64 { StandardNormal.sample(&mut *rng) };
        match &self.kind {
            SetKind::Simplex { dim } => {
                let g: Vec<f64> = (0..*dim).map(|_| gauss()).collect();
                let mean = g.iter().sum::<f64>() / *dim as f64;
                out.extend(g.into_iter().map(|v| v - mean));
            }
            SetKind::Ball { .. } | SetKind::Box { .. } => {
                out.extend((0..self.dim).map(|_| gauss()));
            }
            SetKind::Spectrahedron { side, .. } => {
                let n = *side;
                let mut m = vec![0.0; n * n];
                for i in 0..n {
                    m[i * n + i] = gauss();
                    for j in (i + 1)..n {
                        let v = gauss() / 2f64.sqrt();
                        m[i * n + j] = v;
                        m[j * n + i] = v;
                    }
                }
                out.extend(m);
            }
            SetKind::Product(parts) => {
                for p in parts {
                    p.push_tangent_gaussian(rng, out);
                }
            }
            SetKind::Scaled { base, .. } => base.push_tangent_gaussian(rng, out),
        }
    }

    /// Membership test with absolute tolerance `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match &self.kind {
            SetKind::Simplex { .. } => {
                x.iter().all(|&v| v >= -tol) && (x.iter().sum::<f64>() - 1.0).abs() <= tol
            }
            SetKind::Ball { center, radius } => linalg::distance(x, center) <= radius + tol,
            SetKind::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (l, u))| *v >= l - tol && *v <= u + tol),
            SetKind::Spectrahedron { side, trace_bound } => {
                if linalg::max_asymmetry(x, *side) > tol.max(linalg::SYMMETRY_TOL) {
                    return false;
                }
                match linalg::sym_eigen(x, *side) {
                    Ok(s) => s.min().1 >= -tol && linalg::trace(x, *side) <= trace_bound + tol,
                    Err(_) => false,
                }
            }
            SetKind::Product(parts) => {
                let mut offset = 0;
                parts.iter().all(|p| {
                    let ok = p.contains(&x[offset..offset + p.dim], tol);
                    offset += p.dim;
                    ok
                })
            }
            SetKind::Scaled {
                base,
                anchor,
                factor,
            } => {
                let pre: Vec<f64> = x
                    .iter()
                    .zip(anchor)
                    .map(|(v, a)| a + (v - a) / factor)
                    .collect();
                base.contains(&pre, tol / factor)
            }
        }
    }

    /// Euclidean (Frobenius for matrices) projection onto the set.
    pub fn project(&self, y: &[f64]) -> Result<Point> {
        check_dim(self.dim, y.len())?;
        check_finite(y, "projection input")?;
        self.project_unchecked(y).map(Point::from_raw)
    }

    fn project_unchecked(&self, y: &[f64]) -> Result<Vec<f64>> {
        Ok(match &self.kind {
            SetKind::Simplex { .. } => project_onto_simplex(y, 1.0),
            SetKind::Ball { center, radius } => {
                let dist = linalg::distance(y, center);
                if dist <= *radius {
                    y.to_vec()
                } else {
                    let scale = radius / dist;
                    y.iter()
                        .zip(center)
                        .map(|(v, c)| c + scale * (v - c))
                        .collect()
                }
            }
            SetKind::Box { lower, upper } => y
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(v, (l, u))| v.clamp(*l, *u))
                .collect(),
            SetKind::Spectrahedron { side, trace_bound } => {
                project_spectrahedron(y, *side, *trace_bound)?
            }
            SetKind::Product(parts) => {
                let mut out = Vec::with_capacity(self.dim);
                let mut offset = 0;
                for p in parts {
                    out.extend(p.project_unchecked(&y[offset..offset + p.dim])?);
                    offset += p.dim;
                }
                out
            }
            SetKind::Scaled {
                base,
                anchor,
                factor,
            } => {
                let pre: Vec<f64> = y
                    .iter()
                    .zip(anchor)
                    .map(|(v, a)| a + (v - a) / factor)
                    .collect();
                base.project_unchecked(&pre)?
                    .into_iter()
                    .zip(anchor)
                    .map(|(v, a)| a + factor * (v - a))
                    .collect()
            }
        })
    }

    /// Minimizer and minimum of the linear function `⟨direction, ·⟩` over the
    /// set. Ties go to the lowest index; a zero direction on a ball returns
    /// the center.
    pub fn support_extreme(&self, direction: &[f64]) -> Result<(Point, f64)> {
        check_dim(self.dim, direction.len())?;
        check_finite(direction, "support direction")?;
        let x = self.argmin_linear(direction)?;
        let value = dot(direction, &x);
        Ok((Point::from_raw(x), value))
    }

    fn argmin_linear(&self, direction: &[f64]) -> Result<Vec<f64>> {
        Ok(match &self.kind {
            SetKind::Simplex { dim } => {
                let mut best = 0;
                for (i, &v) in direction.iter().enumerate() {
                    if v < direction[best] {
                        best = i;
                    }
                }
                let mut x = vec![0.0; *dim];
                x[best] = 1.0;
                x
            }
            SetKind::Ball { center, radius } => {
                let n = norm(direction);
                if n == 0.0 {
                    center.clone()
                } else {
                    center
                        .iter()
                        .zip(direction)
                        .map(|(c, d)| c - radius * d / n)
                        .collect()
                }
            }
            SetKind::Box { lower, upper } => direction
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(d, (l, u))| if *d < 0.0 { *u } else { *l })
                .collect(),
            SetKind::Spectrahedron { side, trace_bound } => {
                let s = linalg::sym_eigen(direction, *side)?;
                let (idx, lambda) = s.min();
                let n = *side;
                let mut x = vec![0.0; n * n];
                if lambda < 0.0 {
                    let v = s.vectors.column(idx);
                    for i in 0..n {
                        for j in 0..n {
                            x[i * n + j] = trace_bound * v[i] * v[j];
                        }
                    }
                }
                x
            }
            SetKind::Product(parts) => {
                let mut out = Vec::with_capacity(self.dim);
                let mut offset = 0;
                for p in parts {
                    out.extend(p.argmin_linear(&direction[offset..offset + p.dim])?);
                    offset += p.dim;
                }
                out
            }
            SetKind::Scaled {
                base,
                anchor,
                factor,
            } => base
                .argmin_linear(direction)?
                .into_iter()
                .zip(anchor)
                .map(|(v, a)| a + factor * (v - a))
                .collect(),
        })
    }

    /// Homothety toward the interior point by `1 − δ/r₀`: every point of the
    /// result plus any tangent perturbation of norm `≤ δ` stays feasible.
    pub fn shrink(&self, delta: f64) -> Result<ActionSet> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(invalid(
                "delta",
                format!("must be nonnegative, got {delta}"),
            ));
        }
        if delta == 0.0 {
            return Ok(self.clone());
        }
        if delta >= self.inradius {
            return Err(crate::Error::ExplorationTooLarge {
                delta,
                inradius: self.inradius,
            });
        }
        let factor = 1.0 - delta / self.inradius;
        let anchor = &self.interior;
        let toward = |v: &[f64]| -> Vec<f64> {
            v.iter()
                .zip(anchor)
                .map(|(x, a)| a + factor * (x - a))
                .collect()
        };
        Ok(match &self.kind {
            SetKind::Ball { center, radius } => Self::finish(SetKind::Ball {
                center: center.clone(),
                radius: factor * radius,
            }),
            SetKind::Box { lower, upper } => Self::finish(SetKind::Box {
                lower: toward(lower),
                upper: toward(upper),
            }),
            SetKind::Scaled {
                base,
                anchor,
                factor: inner,
            } => Self::finish(SetKind::Scaled {
                base: base.clone(),
                anchor: anchor.clone(),
                factor: inner * factor,
            }),
            _ => Self::finish(SetKind::Scaled {
                base: Box::new(self.clone()),
                anchor: anchor.clone(),
                factor,
            }),
        })
    }

    /// Deterministic probe points used to estimate sup-norm distances between
    /// nonlinear losses: the interior point, support extremes along every
    /// signed coordinate axis, a uniform grid for boxes of dimension ≤ 2, and
    /// projections of `count` fixed-seed Gaussian points spread at the scale
    /// of the diameter.
    pub fn probe_points(&self, count: usize) -> Vec<Point> {
        let mut pts = vec![self.interior_point()];
        if let SetKind::Box { lower, upper } = &self.kind {
            if self.dim <= 2 {
                let steps = 20usize;
                let axis =
                    |k: usize, i: usize| lower[k] + (upper[k] - lower[k]) * i as f64 / steps as f64;
                if self.dim == 1 {
                    pts.extend((0..=steps).map(|i| Point::from_raw(vec![axis(0, i)])));
                } else {
                    for i in 0..=steps {
                        for j in 0..=steps {
                            pts.push(Point::from_raw(vec![axis(0, i), axis(1, j)]));
                        }
                    }
                }
            }
        }
        for k in 0..self.dim.min(64) {
            for sign in [1.0, -1.0] {
                let mut d = vec![0.0; self.dim];
                d[k] = sign;
                if let Ok((p, _)) = self.support_extreme(&d) {
                    pts.push(p);
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let scale = self.diameter.max(1e-12);
        for _ in 0..count {
            let y: Vec<f64> = self
                .interior
                .iter()
                .map(|c| {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    c + scale * g
                })
                .collect();
            if let Ok(p) = self.project(&y) {
                pts.push(p);
            }
        }
        pts
    }
}

/// Projection onto `{x ≥ 0, Σx = total}` by sorting and thresholding.
pub fn project_onto_simplex(y: &[f64], total: f64) -> Vec<f64> {
    let mut u = y.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumulative += uj;
        let t = (cumulative - total) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    y.iter().map(|&v| (v - theta).max(0.0)).collect()
}

/// Projection onto `{x ≥ 0, Σx ≤ cap}`.
pub fn project_onto_capped_simplex(y: &[f64], cap: f64) -> Vec<f64> {
    let clamped: Vec<f64> = y.iter().map(|v| v.max(0.0)).collect();
    if clamped.iter().sum::<f64>() <= cap {
        clamped
    } else {
        project_onto_simplex(y, cap)
    }
}

fn project_spectrahedron(y: &[f64], side: usize, trace_bound: f64) -> Result<Vec<f64>> {
    let sym = linalg::symmetrize(y, side);
    let spectrum = linalg::sym_eigen(&sym, side)?;
    let exact_symmetric = linalg::max_asymmetry(y, side) == 0.0;
    if exact_symmetric
        && spectrum.min().1 >= 0.0
        && spectrum.values.iter().sum::<f64>() <= trace_bound
        && linalg::trace(y, side) <= trace_bound
    {
        return Ok(y.to_vec());
    }
    let projected = project_onto_capped_simplex(&spectrum.values, trace_bound);
    Ok(linalg::symmetrize(&spectrum.rebuild(&projected), side))
}
