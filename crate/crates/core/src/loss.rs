//! Loss functions revealed by environments.

use nalgebra::DMatrix;

use crate::error::{check_dim, check_finite, invalid, Error, Result};
use crate::geometry::{ActionSet, Point, SetKind};
use crate::linalg::{self, dot};

#[derive(Debug, Clone, PartialEq)]
pub enum LossFunction {
    /// `⟨grad, x⟩ + offset`.
    Linear { grad: Vec<f64>, offset: f64 },
    /// `½ xᵀMx − ⟨v, x⟩ + offset` with `M` row-major.
    Quadratic {
        curvature: Vec<f64>,
        linear: Vec<f64>,
        offset: f64,
    },
    /// `−log det(I + H Q Hᵀ)` for a `rows × side` channel `H` and a
    /// `side × side` covariance `Q`.
    LogDet {
        channel: Vec<f64>,
        rows: usize,
        side: usize,
    },
    /// Hinge loss `max{0, 1 − y(ε − uᵀXu)}` on points `[ε, X…]`, where
    /// `u = p − q`.
    MetricHinge { diff: Vec<f64>, label: f64 },
}

impl LossFunction {
    pub fn linear(grad: Vec<f64>) -> Self {
        LossFunction::Linear { grad, offset: 0.0 }
    }

    /// Payoff vector `u` seen as the linear loss `−⟨u, x⟩` on the simplex.
    pub fn from_payoffs(payoffs: &[f64]) -> Self {
        LossFunction::linear(payoffs.iter().map(|u| -u).collect())
    }

    pub fn logdet(channel: Vec<f64>, rows: usize, side: usize) -> Result<Self> {
        check_dim(rows * side, channel.len())?;
        check_finite(&channel, "channel matrix")?;
        Ok(LossFunction::LogDet {
            channel,
            rows,
            side,
        })
    }

    pub fn metric_hinge(p: &[f64], q: &[f64], label: f64) -> Result<Self> {
        check_dim(p.len(), q.len())?;
        if label != 1.0 && label != -1.0 {
            return Err(invalid("label", format!("must be ±1, got {label}")));
        }
        Ok(LossFunction::MetricHinge {
            diff: p.iter().zip(q).map(|(a, b)| a - b).collect(),
            label,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            LossFunction::Linear { grad, .. } => grad.len(),
            LossFunction::Quadratic { linear, .. } => linear.len(),
            LossFunction::LogDet { side, .. } => side * side,
            LossFunction::MetricHinge { diff, .. } => 1 + diff.len() * diff.len(),
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, LossFunction::Linear { .. })
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(match self {
            LossFunction::Linear { grad, offset } => dot(grad, x) + offset,
            LossFunction::Quadratic {
                curvature,
                linear,
                offset,
            } => 0.5 * quad_form(curvature, x) - dot(linear, x) + offset,
            LossFunction::LogDet {
                channel,
                rows,
                side,
            } => {
                let a = logdet_system(channel, *rows, *side, x);
                -log_abs_det(a)?
            }
            LossFunction::MetricHinge { diff, label } => {
                let inner = 1.0 - label * (x[0] - mahalanobis(diff, &x[1..]));
                inner.max(0.0)
            }
        })
    }

    /// `∇ℓ(x)`; the zero subgradient at the hinge kink.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        Ok(match self {
            LossFunction::Linear { grad, .. } => grad.clone(),
            LossFunction::Quadratic {
                curvature, linear, ..
            } => {
                let n = linear.len();
                (0..n)
                    .map(|i| dot(&curvature[i * n..(i + 1) * n], x) - linear[i])
                    .collect()
            }
            LossFunction::LogDet {
                channel,
                rows,
                side,
            } => logdet_gradient(channel, *rows, *side, x)?,
            LossFunction::MetricHinge { diff, label } => {
                let n = diff.len();
                let mut g = vec![0.0; 1 + n * n];
                let inner = 1.0 - label * (x[0] - mahalanobis(diff, &x[1..]));
                if inner > 0.0 {
                    g[0] = -label;
                    for i in 0..n {
                        for j in 0..n {
                            g[1 + i * n + j] = label * diff[i] * diff[j];
                        }
                    }
                }
                g
            }
        })
    }

    /// The learner-facing feedback `v = −∇ℓ(x)`.
    pub fn negative_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut g = self.gradient(x)?;
        g.iter_mut().for_each(|v| *v = -*v);
        Ok(g)
    }

    /// Closed-form minimizer and minimum over `set`, when one is available:
    /// linear losses anywhere, diagonal quadratics on boxes, and the hinge
    /// loss on `Box[1, ε_max] × Spectrahedron`.
    pub fn minimize(&self, set: &ActionSet) -> Result<Option<(Point, f64)>> {
        check_dim(set.dim(), self.dim())?;
        match self {
            LossFunction::Linear { grad, offset } => {
                let (p, v) = set.support_extreme(grad)?;
                Ok(Some((p, v + offset)))
            }
            LossFunction::Quadratic {
                curvature, linear, ..
            } => {
                let SetKind::Box { lower, upper } = set.kind() else {
                    return Ok(None);
                };
                let n = linear.len();
                let diagonal =
                    (0..n).all(|i| (0..n).all(|j| i == j || curvature[i * n + j] == 0.0));
                if !diagonal || (0..n).any(|i| !(curvature[i * n + i] > 0.0)) {
                    return Ok(None);
                }
                let x: Vec<f64> = (0..n)
                    .map(|i| (linear[i] / curvature[i * n + i]).clamp(lower[i], upper[i]))
                    .collect();
                let v = self.value(&x)?;
                Ok(Some((Point::new(x)?, v)))
            }
            LossFunction::LogDet { .. } => Ok(None),
            LossFunction::MetricHinge { diff, label } => {
                let SetKind::Product(parts) = set.kind() else {
                    return Ok(None);
                };
                let (SetKind::Box { lower, upper }, SetKind::Spectrahedron { side, trace_bound }) = (
                    parts[0].kind(),
                    parts.get(1).map(|p| p.kind()).unwrap_or(parts[0].kind()),
                ) else {
                    return Ok(None);
                };
                if parts.len() != 2 || *side != diff.len() {
                    return Ok(None);
                }
                let n = *side;
                let mut x = vec![0.0; 1 + n * n];
                let norm2 = dot(diff, diff);
                if *label > 0.0 {
                    x[0] = upper[0];
                } else {
                    x[0] = lower[0];
                    if norm2 > 0.0 {
                        for i in 0..n {
                            for j in 0..n {
                                x[1 + i * n + j] = trace_bound * diff[i] * diff[j] / norm2;
                            }
                        }
                    }
                }
                let v = self.value(&x)?;
                Ok(Some((Point::new(x)?, v)))
            }
        }
    }
}

fn quad_form(m: &[f64], x: &[f64]) -> f64 {
    let n = x.len();
    (0..n).map(|i| x[i] * dot(&m[i * n..(i + 1) * n], x)).sum()
}

fn mahalanobis(u: &[f64], x: &[f64]) -> f64 {
    quad_form(x, u)
}

fn logdet_system(channel: &[f64], rows: usize, side: usize, q: &[f64]) -> DMatrix<f64> {
    let h = DMatrix::from_row_slice(rows, side, channel);
    let q = DMatrix::from_row_slice(side, side, q);
    DMatrix::identity(rows, rows) + &h * q * h.transpose()
}

fn log_abs_det(a: DMatrix<f64>) -> Result<f64> {
    if a == a.transpose() {
        if let Some(ch) = a.clone().cholesky() {
            return Ok(2.0 * ch.l().diagonal().iter().map(|d| d.ln()).sum::<f64>());
        }
    }
    let det = a.lu().determinant();
    if det == 0.0 || !det.is_finite() {
        return Err(Error::Eigen("singular log-det system".into()));
    }
    Ok(det.abs().ln())
}

/// `∇_Q [−log det(I + HQHᵀ)] = −Hᵀ(I + HQHᵀ)⁻¹H`.
pub fn logdet_gradient(channel: &[f64], rows: usize, side: usize, q: &[f64]) -> Result<Vec<f64>> {
    check_dim(rows * side, channel.len())?;
    check_dim(side * side, q.len())?;
    check_finite(channel, "channel matrix")?;
    let h = DMatrix::from_row_slice(rows, side, channel);
    let a = logdet_system(channel, rows, side, q);
    let inv = a
        .try_inverse()
        .ok_or_else(|| Error::Eigen("singular log-det system".into()))?;
    let g = -(h.transpose() * inv * &h);
    Ok(linalg::to_coords(&g))
}

/// Sums and weighted averages of losses, kept in closed form for the
/// polynomial part.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateLoss {
    dim: usize,
    linear: Vec<f64>,
    offset: f64,
    curvature: Option<Vec<f64>>,
    terms: Vec<(f64, LossFunction)>,
}

impl AggregateLoss {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            linear: vec![0.0; dim],
            offset: 0.0,
            curvature: None,
            terms: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn add(&mut self, loss: &LossFunction, weight: f64) -> Result<()> {
        check_dim(self.dim, loss.dim())?;
        match loss {
            LossFunction::Linear { grad, offset } => {
                for (a, g) in self.linear.iter_mut().zip(grad) {
                    *a += weight * g;
                }
                self.offset += weight * offset;
            }
            LossFunction::Quadratic {
                curvature,
                linear,
                offset,
            } => {
                let m = self
                    .curvature
                    .get_or_insert_with(|| vec![0.0; self.dim * self.dim]);
                for (a, c) in m.iter_mut().zip(curvature) {
                    *a += weight * c;
                }
                for (a, v) in self.linear.iter_mut().zip(linear) {
                    *a -= weight * v;
                }
                self.offset += weight * offset;
            }
            other => self.terms.push((weight, other.clone())),
        }
        Ok(())
    }

    /// Adds `weight · other`.
    pub fn merge(&mut self, other: &AggregateLoss, weight: f64) -> Result<()> {
        check_dim(self.dim, other.dim)?;
        for (a, b) in self.linear.iter_mut().zip(&other.linear) {
            *a += weight * b;
        }
        self.offset += weight * other.offset;
        if let Some(oc) = &other.curvature {
            let m = self
                .curvature
                .get_or_insert_with(|| vec![0.0; self.dim * self.dim]);
            for (a, c) in m.iter_mut().zip(oc) {
                *a += weight * c;
            }
        }
        self.terms
            .extend(other.terms.iter().map(|(w, l)| (weight * w, l.clone())));
        Ok(())
    }

    pub fn is_linear(&self) -> bool {
        self.curvature.is_none() && self.terms.is_empty()
    }

    /// Pure quadratic part with no other terms.
    pub fn is_quadratic(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient vector `g` of the linear part `⟨g, x⟩`.
    pub fn linear_part(&self) -> &[f64] {
        &self.linear
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn curvature(&self) -> Option<&[f64]> {
        self.curvature.as_deref()
    }

    pub fn has_nonsmooth_terms(&self) -> bool {
        self.terms
            .iter()
            .any(|(_, l)| matches!(l, LossFunction::MetricHinge { .. }))
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        let mut v = dot(&self.linear, x) + self.offset;
        if let Some(m) = &self.curvature {
            v += 0.5 * quad_form(m, x);
        }
        for (w, l) in &self.terms {
            v += w * l.value(x)?;
        }
        Ok(v)
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        let mut g = self.linear.clone();
        if let Some(m) = &self.curvature {
            let n = self.dim;
            for (i, gi) in g.iter_mut().enumerate() {
                *gi += dot(&m[i * n..(i + 1) * n], x);
            }
        }
        for (w, l) in &self.terms {
            for (gi, t) in g.iter_mut().zip(l.gradient(x)?) {
                *gi += w * t;
            }
        }
        Ok(g)
    }
}
