use super::{ActionSet, Point, SetKind};
use crate::bandit::logit_map;
use crate::error::{check_dim, check_finite, invalid, Error, Result};
use crate::linalg::{self, dot};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegularizerKind {
    /// `½‖x‖²` on any set.
    Euclidean,
    /// `Σ xᵢ log xᵢ` on the simplex.
    NegativeEntropy,
    /// `tr X log X + (c − tr X) log(c − tr X)` on the spectrahedron of trace
    /// bound `c`.
    VonNeumann,
}

/// A strongly convex distance-generating function attached to an action set.
#[derive(Debug, Clone, PartialEq)]
pub struct Regularizer {
    kind: RegularizerKind,
    strong_convexity: f64,
    value_range: f64,
    set: ActionSet,
}

fn xlogx(v: f64) -> f64 {
    if v <= 0.0 {
        0.0
    } else {
        v * v.ln()
    }
}

impl Regularizer {
    /// Value range is `diam²/2`.
    pub fn euclidean(set: ActionSet) -> Self {
        let range = 0.5 * set.diameter() * set.diameter();
        Self {
            kind: RegularizerKind::Euclidean,
            strong_convexity: 1.0,
            value_range: range,
            set,
        }
    }

    /// Value range is `log d`.
    pub fn negative_entropy(set: ActionSet) -> Result<Self> {
        let SetKind::Simplex { dim } = set.kind() else {
            return Err(invalid("set", "negative entropy needs a simplex"));
        };
        let range = (*dim as f64).ln();
        Ok(Self {
            kind: RegularizerKind::NegativeEntropy,
            strong_convexity: 1.0,
            value_range: range,
            set,
        })
    }

    /// Value range is `c·log(d + 1)`: the minimum sits at `c·I/(d+1)` and the
    /// maximum `c log c` is attained at `0` and at every rank-one extreme
    /// point. Strong convexity is `1/c`.
    pub fn von_neumann(set: ActionSet) -> Result<Self> {
        let SetKind::Spectrahedron { side, trace_bound } = set.kind() else {
            return Err(invalid("set", "von Neumann entropy needs a spectrahedron"));
        };
        let range = trace_bound * (*side as f64 + 1.0).ln();
        let k = 1.0 / trace_bound;
        Ok(Self {
            kind: RegularizerKind::VonNeumann,
            strong_convexity: k,
            value_range: range,
            set,
        })
    }

    pub fn kind(&self) -> RegularizerKind {
        self.kind
    }

    pub fn strong_convexity(&self) -> f64 {
        self.strong_convexity
    }

    pub fn value_range(&self) -> f64 {
        self.value_range
    }

    pub fn set(&self) -> &ActionSet {
        &self.set
    }

    fn spectra_params(&self) -> (usize, f64) {
        match self.set.kind() {
            SetKind::Spectrahedron { side, trace_bound } => (*side, *trace_bound),
            _ => unreachable!("von Neumann regularizer built on a spectrahedron"),
        }
    }

    /// `h(x)`, with `0 log 0 = 0` on the boundary.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.set.dim(), x.len())?;
        check_finite(x, "regularizer argument")?;
        match self.kind {
            RegularizerKind::Euclidean => Ok(0.5 * dot(x, x)),
            RegularizerKind::NegativeEntropy => {
                if x.iter().any(|&v| v < 0.0) {
                    return Err(Error::BoundaryPoint);
                }
                Ok(x.iter().map(|&v| xlogx(v)).sum())
            }
            RegularizerKind::VonNeumann => {
                let (side, c) = self.spectra_params();
                let s = linalg::sym_eigen(x, side)?;
                let slack = c - s.values.iter().sum::<f64>();
                if s.min().1 < -1e-12 || slack < -1e-12 {
                    return Err(Error::BoundaryPoint);
                }
                Ok(s.values.iter().map(|&l| xlogx(l)).sum::<f64>() + xlogx(slack))
            }
        }
    }

    /// `∇h(x)`; entropy variants fail on the domain boundary.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.set.dim(), x.len())?;
        check_finite(x, "regularizer argument")?;
        match self.kind {
            RegularizerKind::Euclidean => Ok(x.to_vec()),
            RegularizerKind::NegativeEntropy => {
                if x.iter().any(|&v| v <= 0.0) {
                    return Err(Error::BoundaryPoint);
                }
                Ok(x.iter().map(|&v| v.ln() + 1.0).collect())
            }
            RegularizerKind::VonNeumann => {
                let (side, c) = self.spectra_params();
                let s = linalg::sym_eigen(x, side)?;
                let slack = c - s.values.iter().sum::<f64>();
                if s.min().1 <= 0.0 || slack <= 0.0 {
                    return Err(Error::BoundaryPoint);
                }
                let shift = slack.ln();
                Ok(s.reassemble(|l| l.ln() - shift))
            }
        }
    }

    /// `D_h(p, x) = h(p) − h(x) − ⟨∇h(x), p − x⟩`.
    pub fn bregman(&self, p: &[f64], x: &[f64]) -> Result<f64> {
        check_dim(self.set.dim(), p.len())?;
        check_finite(p, "bregman argument")?;
        match self.kind {
            RegularizerKind::Euclidean => {
                check_dim(self.set.dim(), x.len())?;
                check_finite(x, "bregman argument")?;
                let d = linalg::distance(p, x);
                Ok(0.5 * d * d)
            }
            RegularizerKind::NegativeEntropy => {
                check_dim(self.set.dim(), x.len())?;
                if x.iter().any(|&v| !(v > 0.0)) {
                    return Err(Error::BoundaryPoint);
                }
                if p.iter().any(|&v| v < 0.0) {
                    return Err(Error::BoundaryPoint);
                }
                let kl: f64 = p
                    .iter()
                    .zip(x)
                    .map(|(&pi, &xi)| xlogx(pi) - pi * xi.ln() - pi + xi)
                    .sum();
                Ok(kl.max(0.0))
            }
            RegularizerKind::VonNeumann => {
                let grad = self.gradient(x)?;
                if p == x {
                    return Ok(0.0);
                }
                let diff: Vec<f64> = p.iter().zip(x).map(|(a, b)| a - b).collect();
                let d = self.value(p)? - self.value(x)? - dot(&grad, &diff);
                Ok(d.max(0.0))
            }
        }
    }

    /// Mirror map from scores to primal points: the maximizer of
    /// `⟨y, x⟩ − h(x)` over the set. Euclidean gives `Π(y)`, entropy gives the
    /// logit map and von Neumann gives `c·exp(Y)/(1 + tr exp Y)`, computed
    /// with a spectral shift so large scores do not overflow.
    pub fn mirror(&self, y: &[f64]) -> Result<Point> {
        check_dim(self.set.dim(), y.len())?;
        check_finite(y, "mirror argument")?;
        match self.kind {
            RegularizerKind::Euclidean => self.set.project(y),
            RegularizerKind::NegativeEntropy => Ok(Point::from_raw(logit_map(y))),
            RegularizerKind::VonNeumann => {
                let (side, c) = self.spectra_params();
                let sym = linalg::require_symmetric(y, side)?;
                let s = linalg::sym_eigen(&sym, side)?;
                let shift = s.max().max(0.0);
                let denom: f64 =
                    (-shift).exp() + s.values.iter().map(|l| (l - shift).exp()).sum::<f64>();
                let x = s.reassemble(|l| c * (l - shift).exp() / denom);
                Ok(Point::from_raw(linalg::symmetrize(&x, side)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn simplex_entropy(d: usize) -> Regularizer {
        Regularizer::negative_entropy(ActionSet::simplex(d).unwrap()).unwrap()
    }

    #[test]
    fn bregman_examples() {
        let e = Regularizer::euclidean(ActionSet::unit_ball(2).unwrap());
        assert_eq!(e.bregman(&[1.0, 0.0], &[0.0, 0.0]).unwrap(), 0.5);
        let h = simplex_entropy(2);
        let d = h.bregman(&[1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert!((d - 2f64.ln()).abs() < 1e-15);
        // Direct evaluation of the three terms.
        let direct = h.value(&[1.0, 0.0]).unwrap()
            - h.value(&[0.5, 0.5]).unwrap()
            - dot(&h.gradient(&[0.5, 0.5]).unwrap(), &[0.5, -0.5]);
        assert!((d - direct).abs() < 1e-15);
        assert_eq!(h.bregman(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
    }

    #[test]
    fn boundary_gradient_rejected() {
        let h = simplex_entropy(2);
        assert_eq!(h.gradient(&[1.0, 0.0]), Err(Error::BoundaryPoint));
        assert_eq!(
            h.bregman(&[0.5, 0.5], &[1.0, 0.0]),
            Err(Error::BoundaryPoint)
        );
        let v = Regularizer::von_neumann(ActionSet::spectrahedron(2, 1.0).unwrap()).unwrap();
        assert_eq!(v.gradient(&[0.5, 0.0, 0.0, 0.0]), Err(Error::BoundaryPoint));
        assert_eq!(v.gradient(&[0.5, 0.0, 0.0, 0.5]), Err(Error::BoundaryPoint));
    }

    #[test]
    fn entropy_range_matches_extremes() {
        for d in [2usize, 3, 7] {
            let h = simplex_entropy(d);
            let mut vertex = vec![0.0; d];
            vertex[0] = 1.0;
            let hi = h.value(&vertex).unwrap();
            let lo = h.value(&vec![1.0 / d as f64; d]).unwrap();
            assert!((hi - lo - h.value_range()).abs() < 1e-12);
        }
    }

    #[test]
    fn von_neumann_range_matches_extremes() {
        for (d, c) in [(2usize, 1.0), (3, 2.0), (8, 1.0)] {
            let set = ActionSet::spectrahedron(d, c).unwrap();
            let h = Regularizer::von_neumann(set).unwrap();
            let mut rank_one = vec![0.0; d * d];
            rank_one[0] = c;
            let hi = h.value(&rank_one).unwrap();
            assert!((hi - h.value(&vec![0.0; d * d]).unwrap()).abs() < 1e-12);
            let lo = h
                .value(&linalg::identity_coords(d, c / (d as f64 + 1.0)))
                .unwrap();
            assert!((hi - lo - h.value_range()).abs() < 1e-12);
        }
    }

    #[test]
    fn von_neumann_mirror_inverts_gradient() {
        let h = Regularizer::von_neumann(ActionSet::spectrahedron(2, 1.0).unwrap()).unwrap();
        let x = [0.3, 0.05, 0.05, 0.2];
        let back = h.mirror(&h.gradient(&x).unwrap()).unwrap();
        assert!(back.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-12));
        let huge = h.mirror(&[800.0, 0.0, 0.0, -800.0]).unwrap();
        assert!(huge.iter().all(|v| v.is_finite()));
        assert!((huge[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constructors_check_set() {
        assert!(Regularizer::negative_entropy(ActionSet::unit_ball(2).unwrap()).is_err());
        assert!(Regularizer::von_neumann(ActionSet::simplex(2).unwrap()).is_err());
        let e = Regularizer::euclidean(ActionSet::unit_ball(5).unwrap());
        assert_eq!(e.value_range(), 2.0);
        assert_eq!(e.strong_convexity(), 1.0);
    }

    fn interior_simplex(d: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.01f64..1.0, d).prop_map(|v| {
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect()
        })
    }

    fn interior_spectra() -> impl Strategy<Value = Vec<f64>> {
        (0.05f64..0.4, 0.05f64..0.4, -0.04f64..0.04).prop_map(|(a, b, o)| vec![a, o, o, b])
    }

    proptest! {
        #[test]
        fn entropy_bregman_nonnegative(p in interior_simplex(4), x in interior_simplex(4)) {
            let h = simplex_entropy(4);
            let d = h.bregman(&p, &x).unwrap();
            prop_assert!(d >= 0.0);
            if p != x { prop_assert!(d > 0.0); }
        }

        #[test]
        fn von_neumann_bregman_nonnegative(p in interior_spectra(), x in interior_spectra()) {
            let h = Regularizer::von_neumann(ActionSet::spectrahedron(2, 1.0).unwrap()).unwrap();
            let d = h.bregman(&p, &x).unwrap();
            prop_assert!(d >= 0.0);
            prop_assert_eq!(h.bregman(&x, &x).unwrap(), 0.0);
        }

        #[test]
        fn euclidean_bregman_zero_iff_equal(p in proptest::collection::vec(-1.0f64..1.0, 3),
                                            x in proptest::collection::vec(-1.0f64..1.0, 3)) {
            let h = Regularizer::euclidean(ActionSet::cube(3, -1.0, 1.0).unwrap());
            let d = h.bregman(&p, &x).unwrap();
            prop_assert_eq!(d == 0.0, p == x);
        }
    }
}
