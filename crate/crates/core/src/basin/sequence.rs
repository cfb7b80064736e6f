use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::HoloMap;
use crate::point::C2;
use crate::scalar::Real;

/// `F_1, F_2, ...`: the listed maps, then `tail` repeated forever.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct AutoSequence<T> {
    maps: Vec<HoloMap<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail: Option<HoloMap<T>>,
}

impl<T: Real> AutoSequence<T> {
    pub fn new(maps: Vec<HoloMap<T>>, tail: Option<HoloMap<T>>) -> Result<Self> {
        for (j, m) in maps.iter().chain(tail.iter()).enumerate() {
            m.validate()?;
            if !m.is_automorphism() {
                return Err(Error::NonInvertibleLeaf { leaf: j, kind: m.kind() });
            }
        }
        Ok(Self { maps, tail })
    }

    /// `F_j = A` for all `j`.
    pub fn constant(a: HoloMap<T>) -> Result<Self> {
        Self::new(Vec::new(), Some(a))
    }

    pub fn maps(&self) -> &[HoloMap<T>] {
        &self.maps
    }

    pub fn tail(&self) -> Option<&HoloMap<T>> {
        self.tail.as_ref()
    }

    /// `F_{j+1}` (0-based `j`), `None` past the end of a finite sequence.
    pub fn get(&self, j: usize) -> Option<&HoloMap<T>> {
        self.maps.get(j).or(self.tail.as_ref())
    }

    /// Length of the explicit part.
    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn push(&mut self, map: HoloMap<T>) -> Result<()> {
        if !map.is_automorphism() {
            return Err(Error::NonInvertibleLeaf { leaf: self.maps.len(), kind: map.kind() });
        }
        self.maps.push(map);
        Ok(())
    }

    /// `F(j) = F_j ∘ ... ∘ F_1`.
    pub fn prefix(&self, j: usize) -> HoloMap<T> {
        HoloMap::Compose((0..j).filter_map(|i| self.get(i).cloned()).collect())
    }

    /// `F(j)(x)`, or `None` if the orbit leaves the finite numbers.
    pub fn orbit_point(&self, x: C2<T>, j: usize) -> Option<C2<T>> {
        let mut y = x;
        for i in 0..j {
            y = self.get(i)?.eval(y).ok()?;
            if !y.is_finite() {
                return None;
            }
        }
        Some(y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BasinQuery<T> {
    pub max_iter: usize,
    pub converge_radius: T,
    pub escape_radius: T,
}

impl<T: Real> Default for BasinQuery<T> {
    fn default() -> Self {
        Self { max_iter: 200, converge_radius: T::lit(1e-3), escape_radius: T::lit(1e8) }
    }
}

impl<T: Real> BasinQuery<T> {
    pub fn new(max_iter: usize, converge_radius: T, escape_radius: T) -> Result<Self> {
        if !(converge_radius > T::zero() && converge_radius < escape_radius) {
            return Err(Error::InvalidParameter("need 0 < convergence radius < escape radius".into()));
        }
        Ok(Self { max_iter, converge_radius, escape_radius })
    }
}

/// Outcome of [`basin_membership`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Membership {
    /// Geometric mean of the last five contraction ratios.
    Converged { step: usize, rate: f64 },
    Escaped { step: usize },
    Undecided,
}

impl Membership {
    pub fn converged(&self) -> bool {
        matches!(self, Membership::Converged { .. })
    }
}

const RATIO_WINDOW: usize = 5;
const RATIO_MAX: f64 = 0.75;

/// Whether the next few maps from index `j` fix the origin.
fn stays_at_origin<T: Real>(seq: &AutoSequence<T>, j: usize) -> bool {
    (j..j + RATIO_WINDOW).all(|i| seq.get(i).is_none_or(|f| f.eval(C2::origin()).is_ok_and(|y| y.norm() == T::zero())))
}

/// Follows the orbit `F(j)(x)` one map at a time.
pub fn basin_membership<T: Real>(seq: &AutoSequence<T>, x: C2<T>, q: &BasinQuery<T>) -> Membership {
    let mut y = x;
    let mut norm = y.norm();
    if norm == T::zero() && stays_at_origin(seq, 0) {
        return Membership::Converged { step: 0, rate: 0.0 };
    }
    let mut ratios: Vec<f64> = Vec::with_capacity(q.max_iter);
    for j in 0..q.max_iter {
        let Some(f) = seq.get(j) else { break };
        y = match f.eval(y) {
            Ok(v) if v.is_finite() => v,
            _ => return Membership::Escaped { step: j + 1 },
        };
        let n = y.norm();
        if n > q.escape_radius {
            return Membership::Escaped { step: j + 1 };
        }
        if n == T::zero() {
            if stays_at_origin(seq, j + 1) {
                return Membership::Converged { step: j + 1, rate: 0.0 };
            }
            norm = n;
            ratios.clear();
            continue;
        }
        if norm == T::zero() {
            norm = n;
            continue;
        }
        ratios.push((n / norm).as_f64());
        norm = n;
        if n < q.converge_radius && ratios.len() >= RATIO_WINDOW {
            let last = &ratios[ratios.len() - RATIO_WINDOW..];
            if last.iter().all(|r| *r <= RATIO_MAX) {
                let rate = (last.iter().map(|r| r.ln()).sum::<f64>() / RATIO_WINDOW as f64).exp();
                return Membership::Converged { step: j + 1, rate };
            }
        }
    }
    Membership::Undecided
}

/// [`basin_membership`] for many points, in parallel.
pub fn basin_membership_all<T: Real>(seq: &AutoSequence<T>, xs: &[C2<T>], q: &BasinQuery<T>) -> Vec<Membership> {
    xs.par_iter().map(|x| basin_membership(seq, *x, q)).collect()
}

/// Outcome of [`check_star`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct StarCheck<T> {
    pub pass: bool,
    /// `delta - max |sigma(x) - A(x)|`.
    pub margin: T,
    pub witness: Option<C2<T>>,
}

/// Whether `|sigma(x) - x/2| < delta` at every sample.
pub fn check_star<T: Real>(sigma: &HoloMap<T>, delta: T, samples: &[C2<T>]) -> StarCheck<T> {
    let a = HoloMap::halving();
    let worst = samples
        .par_iter()
        .map(|x| {
            let d = match (sigma.eval(*x), a.eval(*x)) {
                (Ok(s), Ok(h)) if s.is_finite() => (s - h).norm(),
                _ => T::infinity(),
            };
            (d, *x)
        })
        .reduce_with(|p, q| if q.0 > p.0 { q } else { p });
    match worst {
        None => StarCheck { pass: true, margin: delta, witness: None },
        Some((d, x)) => {
            let margin = delta - d;
            let pass = margin > T::zero() || d == T::zero();
            StarCheck { pass, margin, witness: (d > T::zero()).then_some(x) }
        }
    }
}

/// `n` seeded points uniform in the unit ball of C^2, by rejection from the
/// enclosing cube.
pub fn unit_ball_samples<T: Real>(n: usize, seed: u64) -> Vec<C2<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let v: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        if v.iter().map(|x| x * x).sum::<f64>() < 1.0 {
            out.push(C2::new(Complex::new(T::lit(v[0]), T::lit(v[1])), Complex::new(T::lit(v[2]), T::lit(v[3]))));
        }
    }
    out
}

/// A 2-D slice `{(x + i y, w0)}` or `{(z0, x + i y)}` of C^2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slice {
    /// Which coordinate varies (0 for z, 1 for w).
    pub axis: usize,
    /// Value of the fixed coordinate.
    pub fixed: [f64; 2],
    /// `[x0, x1, y0, y1]`.
    pub window: [f64; 4],
    pub width: usize,
    pub height: usize,
}

impl Slice {
    /// Point at pixel `(i, j)`, column `i` left to right, row `j` top to
    /// bottom; pixel centres.
    pub fn point<T: Real>(&self, i: usize, j: usize) -> C2<T> {
        let [x0, x1, y0, y1] = self.window;
        let x = x0 + (x1 - x0) * (i as f64 + 0.5) / self.width as f64;
        let y = y1 - (y1 - y0) * (j as f64 + 0.5) / self.height as f64;
        let v = Complex::new(T::lit(x), T::lit(y));
        let f = Complex::new(T::lit(self.fixed[0]), T::lit(self.fixed[1]));
        if self.axis == 0 {
            C2::new(v, f)
        } else {
            C2::new(f, v)
        }
    }
}

/// Membership of every pixel of `slice`, row-major.
pub fn basin_raster<T: Real>(seq: &AutoSequence<T>, slice: &Slice, q: &BasinQuery<T>) -> Vec<Membership> {
    let pts: Vec<C2<T>> =
        (0..slice.height).flat_map(|j| (0..slice.width).map(move |i| slice.point(i, j))).collect();
    basin_membership_all(seq, &pts, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    #[test]
    fn origin_converges_immediately() {
        let s = AutoSequence::constant(HoloMap::quadratic_twist(C::new(1.0, 0.0))).unwrap();
        assert_eq!(basin_membership(&s, C2::origin(), &BasinQuery::default()), Membership::Converged { step: 0, rate: 0.0 });
    }

    #[test]
    fn halving_rate_is_one_half() {
        let s = AutoSequence::constant(HoloMap::<f64>::halving()).unwrap();
        for x in unit_ball_samples::<f64>(50, 1) {
            let Membership::Converged { rate, .. } = basin_membership(&s, x * 3.0, &BasinQuery::default()) else {
                panic!()
            };
            assert!((rate - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn translation_then_contraction_matches_forward_orbit() {
        let t = HoloMap::translation(C2::new(C::new(10.0, 0.0), C::new(0.0, 0.0))).unwrap();
        let s = AutoSequence::new(vec![t], Some(HoloMap::halving())).unwrap();
        let q = BasinQuery::new(100, 1e-3, 50.0).unwrap();
        for (k, x) in unit_ball_samples::<f64>(40, 2).into_iter().enumerate() {
            let x = x * (k as f64 * 2.0);
            // oracle: iterate directly
            let mut y = x + C2::new(C::new(10.0, 0.0), C::new(0.0, 0.0));
            let mut step = 1;
            let expect = loop {
                if y.norm() > 50.0 {
                    break Membership::Escaped { step };
                }
                if y.norm() < 1e-3 {
                    break Membership::Converged { step, rate: 0.5 };
                }
                y = y * 0.5;
                step += 1;
            };
            let got = basin_membership(&s, x, &q);
            match (got, expect) {
                (Membership::Escaped { step: a }, Membership::Escaped { step: b }) => assert_eq!(a, b),
                (Membership::Converged { step: a, rate }, Membership::Converged { step: b, .. }) => {
                    assert_eq!(a, b);
                    assert!((rate - 0.5).abs() < 1e-9);
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn star_checks() {
        let ball = unit_ball_samples::<f64>(2000, 3);
        let a = check_star(&HoloMap::halving(), 0.05, &ball);
        assert!(a.pass && a.margin == 0.05);
        let tw = HoloMap::halving().then(HoloMap::quadratic_twist(C::new(1e-3, 0.0)));
        let t = check_star(&tw, 1e-2, &ball);
        assert!(t.pass);
        // oracle: direct sup
        let sup = ball
            .iter()
            .map(|x| (tw.eval(*x).unwrap() - *x * 0.5).norm())
            .fold(0.0, f64::max);
        assert!((t.margin - (1e-2 - sup)).abs() < 1e-15);
        let tr = HoloMap::translation(C2::new(C::new(1.0, 0.0), C::new(0.0, 0.0))).unwrap();
        let f = check_star(&tr, 0.05, &ball);
        assert!(!f.pass && f.witness.is_some());
    }

    #[test]
    fn rational_shear_rejected() {
        let r = HoloMap::RationalShear { poles: vec![C::new(1.0, 0.0)], coeffs: vec![C::new(1.0, 0.0)] };
        assert!(AutoSequence::new(vec![r], None).is_err());
    }

    #[test]
    fn ball_samples_inside() {
        let b = unit_ball_samples::<f64>(500, 9);
        assert!(b.iter().all(|x| x.norm() < 1.0));
        assert_eq!(b, unit_ball_samples::<f64>(500, 9));
    }
}
