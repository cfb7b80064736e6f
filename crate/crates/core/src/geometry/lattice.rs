use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::TorusPoint;
use crate::scalar::{Cx, Real};

/// Period lattice `X = Z*omega1 + Z*omega2`.
///
/// Besides the user-supplied generators the lattice keeps a Lagrange-reduced
/// basis (shortest vector first, `Im(b2/b1) > 0`), used for distances to the
/// lattice and by the row-summed Weierstrass series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", try_from = "LatticeSpec<T>", into = "LatticeSpec<T>")]
pub struct Lattice<T> {
    omega1: Complex<T>,
    omega2: Complex<T>,
    reduced: [Complex<T>; 2],
    det: T,
}

/// Serialized form: `{"omega1": [re, im], "omega2": [re, im]}`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LatticeSpec<T> {
    pub omega1: Complex<T>,
    pub omega2: Complex<T>,
}

impl<T: Real> TryFrom<LatticeSpec<T>> for Lattice<T> {
    type Error = Error;
    fn try_from(s: LatticeSpec<T>) -> Result<Self> {
        Lattice::new(s.omega1, s.omega2)
    }
}

impl<T: Real> From<Lattice<T>> for LatticeSpec<T> {
    fn from(l: Lattice<T>) -> Self {
        LatticeSpec { omega1: l.omega1, omega2: l.omega2 }
    }
}

impl<T: Real> Lattice<T> {
    pub fn new(omega1: Cx<T>, omega2: Cx<T>) -> Result<Self> {
        let finite = |z: Cx<T>| z.re.is_finite() && z.im.is_finite();
        if !finite(omega1) || !finite(omega2) || omega1.norm() == T::zero() {
            return Err(Error::DegenerateLattice { ratio_im: 0.0 });
        }
        let ratio = omega2 / omega1;
        if ratio.im.abs() <= T::epsilon() * T::lit(8.0) * ratio.norm().max(T::one()) {
            return Err(Error::DegenerateLattice { ratio_im: ratio.im.as_f64() });
        }
        if ratio.im.abs() < T::lit(1e-6) {
            log::warn!(
                "nearly degenerate lattice: |Im(omega2/omega1)| = {:e}",
                ratio.im.abs().as_f64()
            );
        }
        let det = omega1.re * omega2.im - omega2.re * omega1.im;
        Ok(Self { omega1, omega2, reduced: lagrange_reduce(omega1, omega2), det })
    }

    /// Square lattice `(1, i)`.
    pub fn square() -> Self {
        Self::new(Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::one()))
            .expect("square lattice")
    }

    pub fn omega1(&self) -> Cx<T> {
        self.omega1
    }

    pub fn omega2(&self) -> Cx<T> {
        self.omega2
    }

    /// Lagrange-reduced basis `[b1, b2]` with `|b1| <= |b2|` and `Im(b2/b1) > 0`.
    pub fn reduced_basis(&self) -> [Cx<T>; 2] {
        self.reduced
    }

    /// Length of the shortest nonzero lattice vector.
    pub fn systole(&self) -> T {
        self.reduced[0].norm()
    }

    /// Area of a fundamental parallelogram.
    pub fn area(&self) -> T {
        self.det.abs()
    }

    /// 2-norm condition number of the real 2x2 system solved by [`Self::coords`].
    pub fn condition_number(&self) -> T {
        let (a, c) = (self.omega1.re, self.omega1.im);
        let (b, d) = (self.omega2.re, self.omega2.im);
        let fro2 = a * a + b * b + c * c + d * d;
        let det = self.det.abs();
        let two = T::lit(2.0);
        let disc = (fro2 * fro2 - T::lit(4.0) * det * det).max(T::zero()).sqrt();
        let smax = ((fro2 + disc) / two).sqrt();
        let smin = ((fro2 - disc) / two).max(T::zero()).sqrt();
        if smin == T::zero() {
            T::infinity()
        } else {
            smax / smin
        }
    }

    /// Lattice coordinates `(s, t)` with `z = s*omega1 + t*omega2`.
    pub fn coords(&self, z: Cx<T>) -> (T, T) {
        let (a1, b1) = (self.omega1.re, self.omega1.im);
        let (a2, b2) = (self.omega2.re, self.omega2.im);
        let s = (z.re * b2 - z.im * a2) / self.det;
        let t = (a1 * z.im - b1 * z.re) / self.det;
        (s, t)
    }

    pub fn from_coords(&self, s: T, t: T) -> Cx<T> {
        self.omega1 * s + self.omega2 * t
    }

    /// Reduced lattice coordinates, each in `[-1/2, 1/2)`.
    pub fn reduced_coords(&self, z: Cx<T>) -> (T, T) {
        let (s, t) = self.coords(z);
        (centered_frac(s), centered_frac(t))
    }

    /// Representative of `z mod X` in the centered fundamental parallelogram.
    pub fn reduce(&self, z: Cx<T>) -> Cx<T> {
        let (s, t) = self.reduced_coords(z);
        self.from_coords(s, t)
    }

    /// `true` iff `z` lies within `tol` of `X`, measured in lattice coordinates.
    pub fn is_lattice_point(&self, z: Cx<T>, tol: T) -> bool {
        let (s, t) = self.reduced_coords(z);
        // -1/2 and 1/2 are the same coset; a point just below a lattice point
        // reduces to ~-1/2 in no case, so only |s|,|t| matter.
        s.abs() <= tol && t.abs() <= tol
    }

    /// Torus equivalence `a ~ b`.
    pub fn equivalent(&self, a: Cx<T>, b: Cx<T>, tol: T) -> bool {
        self.is_lattice_point(a - b, tol)
    }

    /// Euclidean distance from `z` to the nearest lattice point.
    pub fn distance_to_lattice(&self, z: Cx<T>) -> T {
        let [b1, b2] = self.reduced;
        let det = b1.re * b2.im - b2.re * b1.im;
        let s = (z.re * b2.im - z.im * b2.re) / det;
        let t = (b1.re * z.im - b1.im * z.re) / det;
        let base = z - b1 * s.floor() - b2 * t.floor();
        let mut best = T::infinity();
        for n in -1..=2 {
            for m in -1..=2 {
                let d = (base - b1 * T::lit(n as f64) - b2 * T::lit(m as f64)).norm();
                best = best.min(d);
            }
        }
        best
    }

    /// Distance between the classes of `a` and `b` on the torus.
    pub fn torus_distance(&self, a: Cx<T>, b: Cx<T>) -> T {
        self.distance_to_lattice(a - b)
    }

    /// The representative of the class of `z` closest to `anchor`.
    pub fn nearest_representative(&self, z: Cx<T>, anchor: Cx<T>) -> Cx<T> {
        let [b1, b2] = self.reduced;
        let d = z - anchor;
        let det = b1.re * b2.im - b2.re * b1.im;
        let s = (d.re * b2.im - d.im * b2.re) / det;
        let t = (b1.re * d.im - b1.im * d.re) / det;
        let base = d - b1 * s.floor() - b2 * t.floor();
        let mut best = base;
        let mut best_n = T::infinity();
        for n in -1..=2 {
            for m in -1..=2 {
                let c = base - b1 * T::lit(n as f64) - b2 * T::lit(m as f64);
                if c.norm() < best_n {
                    best_n = c.norm();
                    best = c;
                }
            }
        }
        anchor + best
    }

    pub fn point(&self, z: Cx<T>) -> TorusPoint<T> {
        TorusPoint::new(z, *self)
    }

    /// The four half-periods `0, omega1/2, omega2/2, (omega1+omega2)/2`,
    /// reduced. These are the ramification points of the Weierstrass function.
    pub fn ramification_points(&self) -> [TorusPoint<T>; 4] {
        let h = T::lit(0.5);
        [
            self.point(Complex::new(T::zero(), T::zero())),
            self.point(self.omega1 * h),
            self.point(self.omega2 * h),
            self.point((self.omega1 + self.omega2) * h),
        ]
    }

    /// The three nonzero half-periods (not reduced).
    pub fn half_periods(&self) -> [Cx<T>; 3] {
        let h = T::lit(0.5);
        [self.omega1 * h, self.omega2 * h, (self.omega1 + self.omega2) * h]
    }
}

/// `x - floor(x + 1/2)`, in `[-1/2, 1/2)`.
fn centered_frac<T: Real>(x: T) -> T {
    let r = x - (x + T::lit(0.5)).floor();
    if r >= T::lit(0.5) {
        r - T::one()
    } else {
        r
    }
}

fn lagrange_reduce<T: Real>(a: Cx<T>, b: Cx<T>) -> [Cx<T>; 2] {
    let (mut u, mut v) = if a.norm_sqr() <= b.norm_sqr() { (a, b) } else { (b, a) };
    for _ in 0..200 {
        let mu = ((u.conj() * v).re / u.norm_sqr()).round();
        v = v - u * mu;
        if v.norm_sqr() < u.norm_sqr() {
            std::mem::swap(&mut u, &mut v);
        } else {
            break;
        }
    }
    if (v / u).im < T::zero() {
        v = -v;
    }
    [u, v]
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    fn lat() -> Lattice<f64> {
        Lattice::new(C::new(1.0, 0.2), C::new(0.3, 1.1)).unwrap()
    }

    #[test]
    fn rejects_collinear_periods() {
        let r = Lattice::new(C::new(1.0, 1.0), C::new(2.0, 2.0));
        assert!(matches!(r, Err(Error::DegenerateLattice { .. })));
        assert!(Lattice::new(C::new(0.0, 0.0), C::new(0.0, 1.0)).is_err());
    }

    #[test]
    fn reduce_examples() {
        let l = lat();
        let (w1, w2) = (l.omega1(), l.omega2());
        assert!(l.reduce(w1).norm() < 1e-14);
        let z = w1 * 0.3 + w2 * 0.4;
        assert!((l.reduce(z) - z).norm() < 1e-14);
        let z = w1 * 1.7 - w2 * 2.2;
        let expect = w1 * -0.3 - w2 * 0.2;
        assert!((l.reduce(z) - expect).norm() < 1e-13);
    }

    #[test]
    fn reduce_matches_brute_force_search() {
        let l = lat();
        let z = l.omega1() * 1.7 - l.omega2() * 2.2;
        // brute force: among z - n w1 - m w2 pick the one whose coordinates lie in [-1/2,1/2)
        let mut found = None;
        for n in -5..=5 {
            for m in -5..=5 {
                let c = z - l.omega1() * n as f64 - l.omega2() * m as f64;
                let (s, t) = l.coords(c);
                if (-0.5..0.5).contains(&s) && (-0.5..0.5).contains(&t) {
                    found = Some(c);
                }
            }
        }
        assert!((found.unwrap() - l.reduce(z)).norm() < 1e-13);
    }

    #[test]
    fn lattice_point_examples() {
        let l = lat();
        let (w1, w2) = (l.omega1(), l.omega2());
        assert!(l.is_lattice_point(w1 * 3.0 - w2 * 5.0, 1e-9));
        assert!(!l.is_lattice_point(w1 * 0.5, 1e-9));
        assert!(l.is_lattice_point(w1 + C::new(1e-12, 0.0), 1e-9));
    }

    #[test]
    fn ramification_points_square() {
        let l = Lattice::<f64>::square();
        let pts = l.ramification_points();
        let expect = [C::new(0.0, 0.0), C::new(0.5, 0.0), C::new(0.0, 0.5), C::new(0.5, 0.5)];
        for (p, e) in pts.iter().zip(expect) {
            assert!(l.equivalent(p.rep(), e, 1e-12));
        }
        for i in 0..4 {
            assert!(l.is_lattice_point(pts[i].rep() * 2.0, 1e-12));
            for j in 0..i {
                assert!(!l.equivalent(pts[i].rep(), pts[j].rep(), 1e-9));
            }
        }
    }

    #[test]
    fn systole_and_distance() {
        let l = Lattice::new(C::new(1.0, 0.0), C::new(5.3, 0.8)).unwrap();
        let mut brute = f64::INFINITY;
        for m in -20i32..=20 {
            for n in -20i32..=20 {
                if (m, n) != (0, 0) {
                    let v = C::new(1.0, 0.0) * m as f64 + C::new(5.3, 0.8) * n as f64;
                    brute = brute.min(v.norm());
                }
            }
        }
        assert!((l.systole() - brute).abs() < 1e-12);
        assert!((l.distance_to_lattice(C::new(0.1, 0.0)) - 0.1).abs() < 1e-12);
        assert!(l.distance_to_lattice(C::new(5.3, 0.8)) < 1e-12);
        let [b1, b2] = l.reduced_basis();
        assert!((b2 / b1).im > 0.0);
        assert!(b1.norm() <= b2.norm());
    }

    #[test]
    fn condition_number_of_orthonormal_basis_is_one() {
        let l = Lattice::<f64>::square();
        assert!((l.condition_number() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn serde_roundtrip_validates() {
        let l = lat();
        let s = serde_json::to_string(&l).unwrap();
        let back: Lattice<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(l, back);
        let bad = r#"{"omega1":[1.0,0.0],"omega2":[2.0,0.0]}"#;
        assert!(serde_json::from_str::<Lattice<f64>>(bad).is_err());
    }
}
