use std::fmt;
use std::ops::{Add, Sub};
use std::sync::Arc;

use num_complex::Complex;
use num_traits::{Float, One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::C2;
use crate::scalar::Real;

/// Points a curve can take values in: C or C^2.
pub trait CurvePoint:
    Copy + fmt::Debug + Send + Sync + Add<Output = Self> + Sub<Output = Self> + 'static
{
    type Scalar: Real;
    fn scaled(self, s: Self::Scalar) -> Self;
    fn magnitude(&self) -> Self::Scalar;
}

impl<T: Real> CurvePoint for Complex<T> {
    type Scalar = T;
    fn scaled(self, s: T) -> Self {
        self * s
    }
    fn magnitude(&self) -> T {
        self.norm()
    }
}

impl<T: Real> CurvePoint for C2<T> {
    type Scalar = T;
    fn scaled(self, s: T) -> Self {
        self * s
    }
    fn magnitude(&self) -> T {
        self.norm()
    }
}

type Source<P> = Arc<dyn Fn(<P as CurvePoint>::Scalar) -> P + Send + Sync>;

/// Ordered samples of a parametrized curve with tangent estimates.
///
/// Curves built with [`BoundaryCurve::from_fn`] remember their
/// parametrization so they can be re-sampled at higher density.
#[derive(Clone, Serialize, Deserialize)]
#[serde(bound(
    serialize = "P: Serialize, P::Scalar: Serialize",
    deserialize = "P: Deserialize<'de>, P::Scalar: Deserialize<'de>"
))]
pub struct BoundaryCurve<P: CurvePoint> {
    params: Vec<P::Scalar>,
    points: Vec<P>,
    tangents: Vec<P>,
    closed: bool,
    max_spacing: P::Scalar,
    /// `(t0, t1)`; for closed curves `t1` is identified with `t0`.
    range: (P::Scalar, P::Scalar),
    #[serde(skip)]
    source: Option<Source<P>>,
}

impl<P: CurvePoint> fmt::Debug for BoundaryCurve<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryCurve")
            .field("len", &self.points.len())
            .field("closed", &self.closed)
            .field("range", &self.range)
            .field("max_spacing", &self.max_spacing)
            .finish()
    }
}

impl<P: CurvePoint> BoundaryCurve<P> {
    /// Builds a curve from samples `(t_k, p_k)` with increasing `t_k`.
    /// Closed curves wrap from the last sample to the first; their parameter
    /// period is `range.1 - range.0`.
    pub fn from_samples(
        samples: Vec<(P::Scalar, P)>,
        closed: bool,
        range: (P::Scalar, P::Scalar),
        max_spacing: P::Scalar,
    ) -> Result<Self> {
        if samples.len() < 3 {
            return Err(Error::InvalidParameter("a curve needs at least 3 samples".into()));
        }
        let (params, points): (Vec<_>, Vec<_>) = samples.into_iter().unzip();
        if params.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("curve parameters must increase".into()));
        }
        let mut c = Self {
            tangents: Vec::new(),
            params,
            points,
            closed,
            max_spacing,
            range,
            source: None,
        };
        c.check_spacing()?;
        c.tangents = c.difference_tangents();
        Ok(c)
    }

    /// Like [`Self::from_samples`] but with supplied tangents, which must agree
    /// with central differences of the samples to within `tol` (relative to
    /// the largest tangent).
    pub fn with_tangents(
        samples: Vec<(P::Scalar, P)>,
        tangents: Vec<P>,
        closed: bool,
        range: (P::Scalar, P::Scalar),
        max_spacing: P::Scalar,
        tol: P::Scalar,
    ) -> Result<Self> {
        let mut c = Self::from_samples(samples, closed, range, max_spacing)?;
        if tangents.len() != c.points.len() {
            return Err(Error::InvalidParameter("tangent count mismatch".into()));
        }
        let fd = c.difference_tangents();
        let scale = tangents
            .iter()
            .map(|t| t.magnitude())
            .fold(P::Scalar::zero(), |a, b| a.max(b))
            .max(P::Scalar::min_positive_value());
        for (k, (a, b)) in tangents.iter().zip(&fd).enumerate() {
            if (*a - *b).magnitude() > tol * scale {
                return Err(Error::InvalidParameter(format!(
                    "tangent {k} disagrees with finite differences"
                )));
            }
        }
        c.tangents = tangents;
        Ok(c)
    }

    /// Samples `f` at `n` uniformly spaced parameters in `[t0, t1]`
    /// (`[t0, t1)` when closed).
    pub fn from_fn<F>(
        f: F,
        t0: P::Scalar,
        t1: P::Scalar,
        n: usize,
        closed: bool,
        max_spacing: P::Scalar,
    ) -> Result<Self>
    where
        F: Fn(P::Scalar) -> P + Send + Sync + 'static,
    {
        let src: Source<P> = Arc::new(f);
        Self::from_source(src, t0, t1, n, closed, max_spacing)
    }

    fn from_source(
        src: Source<P>,
        t0: P::Scalar,
        t1: P::Scalar,
        n: usize,
        closed: bool,
        max_spacing: P::Scalar,
    ) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter("a curve needs at least 3 samples".into()));
        }
        let denom = if closed { n } else { n - 1 };
        let samples = (0..n)
            .map(|k| {
                let t = t0 + (t1 - t0) * P::Scalar::lit(k as f64 / denom as f64);
                (t, src(t))
            })
            .collect();
        let mut c = Self::from_samples(samples, closed, (t0, t1), max_spacing)?;
        c.source = Some(src);
        Ok(c)
    }

    /// Re-samples at `factor` times the density. `None` when the curve has no
    /// parametrization attached. The spacing bound is scaled down with it.
    pub fn refine(&self, factor: usize) -> Option<Result<Self>> {
        let src = self.source.clone()?;
        let n = self.points.len() * factor.max(1);
        let spacing = self.max_spacing / P::Scalar::lit(factor.max(1) as f64);
        Some(Self::from_source(src, self.range.0, self.range.1, n, self.closed, spacing))
    }

    /// Image of the curve under `f`. The parametrization, when present, is
    /// composed with `f`; tangents are recomputed by differences.
    pub fn map<Q, F>(&self, f: F, max_spacing: Q::Scalar) -> Result<BoundaryCurve<Q>>
    where
        Q: CurvePoint<Scalar = P::Scalar>,
        F: Fn(P) -> Q + Send + Sync + 'static,
    {
        let f = Arc::new(f);
        let samples: Vec<_> =
            self.params.iter().zip(&self.points).map(|(&t, &p)| (t, f(p))).collect();
        let mut c = BoundaryCurve::<Q>::from_samples(samples, self.closed, self.range, max_spacing)?;
        if let Some(src) = self.source.clone() {
            let g = f.clone();
            c.source = Some(Arc::new(move |t| g(src(t))));
        }
        Ok(c)
    }

    /// Like [`Self::map`] for fallible `f`. Errors on the samples are
    /// returned; the composed parametrization yields NaN points where `f`
    /// fails.
    pub fn try_map<Q, F>(&self, f: F, max_spacing: Q::Scalar) -> Result<BoundaryCurve<Q>>
    where
        Q: CurvePoint<Scalar = P::Scalar>,
        F: Fn(P) -> Result<Q> + Send + Sync + 'static,
    {
        let f = Arc::new(f);
        let samples = self
            .params
            .iter()
            .zip(&self.points)
            .map(|(&t, &p)| Ok((t, f(p)?)))
            .collect::<Result<Vec<_>>>()?;
        let nan = samples[0].1.scaled(P::Scalar::nan());
        let mut c = BoundaryCurve::<Q>::from_samples(samples, self.closed, self.range, max_spacing)?;
        if let Some(src) = self.source.clone() {
            let g = f.clone();
            c.source = Some(Arc::new(move |t| g(src(t)).unwrap_or(nan)));
        }
        Ok(c)
    }

    pub fn has_source(&self) -> bool {
        self.source.is_some()
    }

    /// Evaluates the attached parametrization.
    pub fn eval_source(&self, t: P::Scalar) -> Option<P> {
        self.source.as_ref().map(|s| s(t))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn closed(&self) -> bool {
        self.closed
    }

    pub fn params(&self) -> &[P::Scalar] {
        &self.params
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn tangents(&self) -> &[P] {
        &self.tangents
    }

    pub fn max_spacing(&self) -> P::Scalar {
        self.max_spacing
    }

    pub fn range(&self) -> (P::Scalar, P::Scalar) {
        self.range
    }

    /// Index of the neighbouring sample, wrapping for closed curves.
    pub fn neighbor(&self, k: usize, offset: isize) -> Option<usize> {
        let n = self.points.len() as isize;
        let j = k as isize + offset;
        if self.closed {
            Some(j.rem_euclid(n) as usize)
        } else if (0..n).contains(&j) {
            Some(j as usize)
        } else {
            None
        }
    }

    fn period(&self) -> P::Scalar {
        self.range.1 - self.range.0
    }

    fn check_spacing(&self) -> Result<()> {
        let n = self.points.len();
        let segs = if self.closed { n } else { n - 1 };
        for k in 0..segs {
            let j = (k + 1) % n;
            let d = (self.points[j] - self.points[k]).magnitude();
            if !(d <= self.max_spacing) {
                return Err(Error::CurveSpacing {
                    index: k,
                    spacing: d.as_f64(),
                    bound: self.max_spacing.as_f64(),
                });
            }
        }
        Ok(())
    }

    /// Central differences (one-sided at the ends of open curves).
    fn difference_tangents(&self) -> Vec<P> {
        let n = self.points.len();
        let period = self.period();
        (0..n)
            .map(|k| {
                let (prev, next) = match (self.neighbor(k, -1), self.neighbor(k, 1)) {
                    (Some(a), Some(b)) => (a, b),
                    (None, Some(b)) => (k, b),
                    (Some(a), None) => (a, k),
                    (None, None) => unreachable!("curve has at least 3 samples"),
                };
                let mut dt = self.params[next] - self.params[prev];
                if self.closed && dt <= P::Scalar::zero() {
                    dt = dt + period;
                }
                (self.points[next] - self.points[prev]).scaled(P::Scalar::one() / dt)
            })
            .collect()
    }
}
