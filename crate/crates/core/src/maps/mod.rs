//! Symbolic holomorphic maps of C^2: contractions, linear maps, translations,
//! polynomial and rational shears, the product-preserving twist, and ordered
//! compositions of these.

mod rational;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::C2;
use crate::scalar::{is_finite_cx, Cx, Real};

pub use rational::{choose_shear_coeffs, rational_shear_from_boundary, MarkedCurve};

/// Default relative finite-difference step for [`HoloMap::jacobian_det`].
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// A map of C^2 as an expression tree.
///
/// `Compose(vec![f1, f2, f3])` is `f3 ∘ f2 ∘ f1`: entries are applied in
/// order, the first one first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    content = "params",
    rename_all = "snake_case",
    bound = "T: Real",
    try_from = "Unchecked<T>"
)]
pub enum HoloMap<T> {
    /// `(z, w) -> (a z, b w)`.
    DiagonalContraction { factors: [Complex<T>; 2] },
    /// `(z, w) -> (z + c1 w, w + c2 z)`.
    Linear { c1: Complex<T>, c2: Complex<T> },
    /// `x -> M x`, rows `[[m00, m01], [m10, m11]]`.
    Matrix { m: [[Complex<T>; 2]; 2] },
    /// `x -> x + v`.
    Translation { v: C2<T> },
    /// Adds `g(x[1 - axis])` to coordinate `axis`; `coeffs[k]` multiplies `u^k`.
    ShearPoly { axis: usize, coeffs: Vec<Complex<T>> },
    /// `(z, w) -> (z, w + sum a_i / (z - z_i))`.
    RationalShear { poles: Vec<Complex<T>>, coeffs: Vec<Complex<T>> },
    /// `(z, w) -> (z e^{h(zw)}, w e^{-h(zw)})` with `h(u) = sum coeffs[k] u^{k+2}`.
    Twist { coeffs: Vec<Complex<T>> },
    Compose(Vec<HoloMap<T>>),
}

/// Where a map is defined: off the listed first-coordinate fibers.
///
/// The fibers are in the coordinates seen by the rational shear that
/// excludes them; for a rational shear at the head of a composition these are
/// fibers of the input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MapDomain<T> {
    pub excluded: Vec<Complex<T>>,
}

impl<T: Real> MapDomain<T> {
    pub fn everywhere_defined(&self) -> bool {
        self.excluded.is_empty()
    }
}

/// `sum coeffs[k] u^k`.
pub(crate) fn horner<T: Real>(coeffs: &[Cx<T>], u: Cx<T>) -> Cx<T> {
    coeffs.iter().rev().fold(Complex::new(T::zero(), T::zero()), |acc, &c| acc * u + c)
}

fn zero<T: Real>() -> Cx<T> {
    Complex::new(T::zero(), T::zero())
}

fn one<T: Real>() -> Cx<T> {
    Complex::new(T::one(), T::zero())
}

impl<T: Real> HoloMap<T> {
    pub fn identity() -> Self {
        HoloMap::Compose(Vec::new())
    }

    pub fn contraction(a: Cx<T>, b: Cx<T>) -> Result<Self> {
        Self::DiagonalContraction { factors: [a, b] }.validated()
    }

    /// `A(x) = x / 2`.
    pub fn halving() -> Self {
        let h = Complex::new(T::lit(0.5), T::zero());
        Self::DiagonalContraction { factors: [h, h] }
    }

    pub fn linear(c1: Cx<T>, c2: Cx<T>) -> Result<Self> {
        Self::Linear { c1, c2 }.validated()
    }

    pub fn matrix(m: [[Cx<T>; 2]; 2]) -> Result<Self> {
        Self::Matrix { m }.validated()
    }

    pub fn translation(v: C2<T>) -> Result<Self> {
        Self::Translation { v }.validated()
    }

    pub fn shear(axis: usize, coeffs: Vec<Cx<T>>) -> Result<Self> {
        Self::ShearPoly { axis, coeffs }.validated()
    }

    pub fn twist(coeffs: Vec<Cx<T>>) -> Result<Self> {
        Self::Twist { coeffs }.validated()
    }

    /// `h(u) = c u^2`.
    pub fn quadratic_twist(c: Cx<T>) -> Self {
        Self::Twist { coeffs: vec![c] }
    }

    pub fn compose(maps: Vec<HoloMap<T>>) -> Result<Self> {
        Self::Compose(maps).validated()
    }

    /// `next ∘ self`.
    pub fn then(self, next: HoloMap<T>) -> Self {
        match self {
            HoloMap::Compose(mut v) => {
                v.push(next);
                HoloMap::Compose(v)
            }
            first => HoloMap::Compose(vec![first, next]),
        }
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// Checks every leaf invariant.
    pub fn validate(&self) -> Result<()> {
        let finite = |v: &[Cx<T>]| v.iter().all(|c| is_finite_cx(*c));
        match self {
            HoloMap::DiagonalContraction { factors } => {
                if !finite(factors) || factors.iter().any(|f| f.norm() == T::zero()) {
                    return Err(Error::InvalidParameter("contraction factors must be finite and nonzero".into()));
                }
            }
            HoloMap::Linear { c1, c2 } => {
                if !finite(&[*c1, *c2]) {
                    return Err(Error::InvalidParameter("linear coefficients must be finite".into()));
                }
                let det = one::<T>() - *c1 * *c2;
                if det.norm() <= T::lit(1e-12) {
                    return Err(Error::SingularLinear { det: det.norm().as_f64() });
                }
            }
            HoloMap::Matrix { m } => {
                if !finite(&[m[0][0], m[0][1], m[1][0], m[1][1]]) {
                    return Err(Error::InvalidParameter("matrix entries must be finite".into()));
                }
            }
            HoloMap::Translation { v } => {
                if !v.is_finite() {
                    return Err(Error::InvalidParameter("translation must be finite".into()));
                }
            }
            HoloMap::ShearPoly { axis, coeffs } => {
                if *axis > 1 {
                    return Err(Error::InvalidParameter(format!("shear axis {axis} is not 0 or 1")));
                }
                if !finite(coeffs) {
                    return Err(Error::InvalidParameter("shear coefficients must be finite".into()));
                }
            }
            HoloMap::RationalShear { poles, coeffs } => {
                if poles.len() != coeffs.len() {
                    return Err(Error::InvalidParameter("one coefficient per pole required".into()));
                }
                if !finite(poles) || !finite(coeffs) {
                    return Err(Error::InvalidParameter("rational shear data must be finite".into()));
                }
                for (i, p) in poles.iter().enumerate() {
                    if poles[..i].contains(p) {
                        return Err(Error::DuplicatePole(p.to_string()));
                    }
                }
            }
            HoloMap::Twist { coeffs } => {
                if !finite(coeffs) {
                    return Err(Error::InvalidParameter("twist coefficients must be finite".into()));
                }
            }
            HoloMap::Compose(maps) => {
                for m in maps {
                    m.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Number of leaves.
    pub fn leaf_count(&self) -> usize {
        match self {
            HoloMap::Compose(v) => v.iter().map(|m| m.leaf_count()).sum(),
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            HoloMap::DiagonalContraction { .. } => "diagonal_contraction",
            HoloMap::Linear { .. } => "linear",
            HoloMap::Matrix { .. } => "matrix",
            HoloMap::Translation { .. } => "translation",
            HoloMap::ShearPoly { .. } => "shear_poly",
            HoloMap::RationalShear { .. } => "rational_shear",
            HoloMap::Twist { .. } => "twist",
            HoloMap::Compose(_) => "compose",
        }
    }

    /// Evaluates the map. Points on an excluded fiber of a rational shear are
    /// an error naming the leaf (leaves numbered in application order).
    pub fn eval(&self, x: C2<T>) -> Result<C2<T>> {
        let mut leaf = 0;
        self.eval_guarded(x, T::zero(), &mut leaf)
    }

    /// Evaluates on a batch, stopping at the first error.
    pub fn eval_all(&self, xs: &[C2<T>]) -> Result<Vec<C2<T>>> {
        xs.iter().map(|x| self.eval(*x)).collect()
    }

    /// `margin` is the smallest admissible `|z - z_i|` relative to
    /// `1 + |z_i|` for rational-shear poles.
    fn eval_guarded(&self, x: C2<T>, margin: T, leaf: &mut usize) -> Result<C2<T>> {
        let here = *leaf;
        match self {
            HoloMap::Compose(maps) => {
                let mut y = x;
                for m in maps {
                    y = m.eval_guarded(y, margin, leaf)?;
                }
                return Ok(y);
            }
            _ => *leaf += 1,
        }
        Ok(match self {
            HoloMap::DiagonalContraction { factors } => C2::new(x.z * factors[0], x.w * factors[1]),
            HoloMap::Linear { c1, c2 } => C2::new(x.z + *c1 * x.w, x.w + *c2 * x.z),
            HoloMap::Matrix { m } => C2::new(m[0][0] * x.z + m[0][1] * x.w, m[1][0] * x.z + m[1][1] * x.w),
            HoloMap::Translation { v } => x + *v,
            HoloMap::ShearPoly { axis, coeffs } => {
                if *axis == 1 {
                    C2::new(x.z, x.w + horner(coeffs, x.z))
                } else {
                    C2::new(x.z + horner(coeffs, x.w), x.w)
                }
            }
            HoloMap::RationalShear { poles, coeffs } => {
                let mut add = zero::<T>();
                for (p, a) in poles.iter().zip(coeffs) {
                    let d = x.z - *p;
                    if d.norm() <= margin * (T::one() + p.norm()) || d.norm() == T::zero() {
                        return Err(Error::PoleFiber { leaf: here, pole: p.to_string() });
                    }
                    add = add + *a / d;
                }
                C2::new(x.z, x.w + add)
            }
            HoloMap::Twist { coeffs } => {
                let u = x.z * x.w;
                let h = horner(coeffs, u) * u * u;
                C2::new(x.z * h.exp(), x.w * (-h).exp())
            }
            HoloMap::Compose(_) => unreachable!(),
        })
    }

    /// Symbolic inverse. Rational shears have none.
    pub fn inverse(&self) -> Result<Self> {
        let mut leaf = 0;
        self.inverse_inner(&mut leaf)
    }

    fn inverse_inner(&self, leaf: &mut usize) -> Result<Self> {
        if let HoloMap::Compose(maps) = self {
            let mut inv = Vec::with_capacity(maps.len());
            for m in maps {
                inv.push(m.inverse_inner(leaf)?);
            }
            inv.reverse();
            return Ok(HoloMap::Compose(inv));
        }
        let here = *leaf;
        *leaf += 1;
        Ok(match self {
            HoloMap::DiagonalContraction { factors } => HoloMap::DiagonalContraction {
                factors: [factors[0].inv(), factors[1].inv()],
            },
            HoloMap::Linear { c1, c2 } => {
                let m = [[one(), *c1], [*c2, one()]];
                HoloMap::Matrix { m: invert2(m)? }
            }
            HoloMap::Matrix { m } => HoloMap::Matrix { m: invert2(*m)? },
            HoloMap::Translation { v } => HoloMap::Translation { v: -*v },
            HoloMap::ShearPoly { axis, coeffs } => HoloMap::ShearPoly {
                axis: *axis,
                coeffs: coeffs.iter().map(|c| -*c).collect(),
            },
            HoloMap::Twist { coeffs } => HoloMap::Twist {
                coeffs: coeffs.iter().map(|c| -*c).collect(),
            },
            HoloMap::RationalShear { .. } => {
                return Err(Error::NonInvertibleLeaf { leaf: here, kind: "rational_shear" })
            }
            HoloMap::Compose(_) => unreachable!(),
        })
    }

    /// Whether every leaf is an automorphism (no rational shears).
    pub fn is_automorphism(&self) -> bool {
        match self {
            HoloMap::RationalShear { .. } => false,
            HoloMap::Compose(v) => v.iter().all(|m| m.is_automorphism()),
            _ => true,
        }
    }

    pub fn domain(&self) -> MapDomain<T> {
        let mut excluded = Vec::new();
        self.collect_poles(&mut excluded);
        MapDomain { excluded }
    }

    fn collect_poles(&self, out: &mut Vec<Cx<T>>) {
        match self {
            HoloMap::RationalShear { poles, .. } => out.extend(poles.iter().copied()),
            HoloMap::Compose(v) => v.iter().for_each(|m| m.collect_poles(out)),
            _ => {}
        }
    }

    /// Complex Jacobian `[[dF_i/dx_j]]` by central differences with step
    /// `h` (default `1e-5 (1 + |x|)`). Errors if a stencil point comes within
    /// `10 h` of a rational-shear pole fiber.
    pub fn jacobian(&self, x: C2<T>, h: Option<T>) -> Result<[[Cx<T>; 2]; 2]> {
        let h = h.unwrap_or_else(|| T::lit(DEFAULT_FD_STEP) * (T::one() + x.norm()));
        let guard = h * T::lit(10.0);
        let f = |y: C2<T>| {
            let mut leaf = 0;
            self.eval_guarded(y, guard, &mut leaf)
        };
        let hz = C2::new(Complex::new(h, T::zero()), zero());
        let hw = C2::new(zero(), Complex::new(h, T::zero()));
        let two_h = h + h;
        let dz = (f(x + hz)? - f(x - hz)?) * (T::one() / two_h);
        let dw = (f(x + hw)? - f(x - hw)?) * (T::one() / two_h);
        Ok([[dz.z, dw.z], [dz.w, dw.w]])
    }

    pub fn jacobian_det(&self, x: C2<T>, h: Option<T>) -> Result<Cx<T>> {
        let j = self.jacobian(x, h)?;
        Ok(j[0][0] * j[1][1] - j[0][1] * j[1][0])
    }

    /// Largest operator-norm distance `|DF(x) - I|` over `samples`, a
    /// measure of closeness to the identity for linear normalizations.
    pub fn distance_from_identity(&self, samples: &[C2<T>]) -> Result<T> {
        let mut worst = T::zero();
        for x in samples {
            let j = self.jacobian(*x, None)?;
            let d = [[j[0][0] - one(), j[0][1]], [j[1][0], j[1][1] - one()]];
            worst = worst.max(op_norm(d));
        }
        Ok(worst)
    }
}

fn invert2<T: Real>(m: [[Cx<T>; 2]; 2]) -> Result<[[Cx<T>; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = m.iter().flatten().map(|c| c.norm()).fold(T::zero(), T::max);
    if !(det.norm() > T::lit(1e-14) * scale * scale) {
        return Err(Error::SingularLinear { det: det.norm().as_f64() });
    }
    let inv = det.inv();
    Ok([[m[1][1] * inv, -m[0][1] * inv], [-m[1][0] * inv, m[0][0] * inv]])
}

/// Spectral norm of a complex 2x2 matrix.
pub(crate) fn op_norm<T: Real>(m: [[Cx<T>; 2]; 2]) -> T {
    let fro2 = m.iter().flatten().map(|c| c.norm_sqr()).sum::<T>();
    let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).norm();
    let disc = (fro2 * fro2 - T::lit(4.0) * det * det).max(T::zero()).sqrt();
    ((fro2 + disc) * T::lit(0.5)).sqrt()
}

/// Deserialization mirror; converted through [`HoloMap::validate`].
#[derive(Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", bound = "T: Real")]
enum Unchecked<T> {
    DiagonalContraction { factors: [Complex<T>; 2] },
    Linear { c1: Complex<T>, c2: Complex<T> },
    Matrix { m: [[Complex<T>; 2]; 2] },
    Translation { v: C2<T> },
    ShearPoly { axis: usize, coeffs: Vec<Complex<T>> },
    RationalShear { poles: Vec<Complex<T>>, coeffs: Vec<Complex<T>> },
    Twist { coeffs: Vec<Complex<T>> },
    Compose(Vec<HoloMap<T>>),
}

impl<T: Real> TryFrom<Unchecked<T>> for HoloMap<T> {
    type Error = Error;

    fn try_from(u: Unchecked<T>) -> Result<Self> {
        let m = match u {
            Unchecked::DiagonalContraction { factors } => HoloMap::DiagonalContraction { factors },
            Unchecked::Linear { c1, c2 } => HoloMap::Linear { c1, c2 },
            Unchecked::Matrix { m } => HoloMap::Matrix { m },
            Unchecked::Translation { v } => HoloMap::Translation { v },
            Unchecked::ShearPoly { axis, coeffs } => HoloMap::ShearPoly { axis, coeffs },
            Unchecked::RationalShear { poles, coeffs } => HoloMap::RationalShear { poles, coeffs },
            Unchecked::Twist { coeffs } => HoloMap::Twist { coeffs },
            // children were validated when they were deserialized
            Unchecked::Compose(v) => return Ok(HoloMap::Compose(v)),
        };
        m.validated()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn p(a: f64, b: f64) -> C2<f64> {
        C2::new(c(a, 0.0), c(b, 0.0))
    }

    #[test]
    fn halving_example() {
        assert_eq!(HoloMap::halving().eval(p(2.0, 2.0)).unwrap(), p(1.0, 1.0));
        let inv = HoloMap::<f64>::halving().inverse().unwrap();
        assert_eq!(inv, HoloMap::DiagonalContraction { factors: [c(2.0, 0.0), c(2.0, 0.0)] });
    }

    #[test]
    fn zero_twist_is_identity() {
        let t = HoloMap::quadratic_twist(c(0.0, 0.0));
        for k in 0..100 {
            let x = C2::new(c(k as f64 * 0.1, -0.3), c(0.7, k as f64 * 0.05));
            assert_eq!(t.eval(x).unwrap(), x);
        }
    }

    #[test]
    fn twist_fixes_axes() {
        let t = HoloMap::twist(vec![c(0.3, 0.2), c(-1.0, 0.5)]).unwrap();
        let x = C2::new(c(0.0, 0.0), c(1.5, -2.0));
        assert_eq!(t.eval(x).unwrap(), x);
        let y = C2::new(c(1.5, -2.0), c(0.0, 0.0));
        assert_eq!(t.eval(y).unwrap(), y);
    }

    #[test]
    fn linear_rejected_only_when_singular() {
        assert!(matches!(HoloMap::linear(c(2.0, 0.0), c(0.5, 0.0)), Err(Error::SingularLinear { .. })));
        // |c1 c2| = 1 but 1 - c1 c2 = 2
        let m = HoloMap::linear(c(1.0, 0.0), c(-1.0, 0.0)).unwrap();
        let d = m.jacobian_det(p(0.3, 0.4), None).unwrap();
        assert!((d - c(2.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn jacobian_examples() {
        let d = HoloMap::halving().jacobian_det(p(0.5, -1.0), None).unwrap();
        assert!((d - c(0.25, 0.0)).norm() < 1e-12);
        let (c1, c2) = (c(0.3, -0.1), c(0.2, 0.4));
        let d = HoloMap::linear(c1, c2).unwrap().jacobian_det(p(1.0, 2.0), None).unwrap();
        assert!((d - (c(1.0, 0.0) - c1 * c2)).norm() < 1e-9);
        let t = HoloMap::twist(vec![c(0.4, 0.1), c(0.0, 0.2)]).unwrap();
        for k in 0..20 {
            let x = C2::new(c(0.04 * k as f64, 0.5), c(-0.3, 0.03 * k as f64));
            let d = t.jacobian_det(x, None).unwrap();
            assert!((d - c(1.0, 0.0)).norm() < 1e-8, "{x:?} {d}");
        }
        // second-order convergence where the twist is steep
        let x = C2::new(c(1.9, 0.5), c(-0.3, 0.95));
        let e1 = (t.jacobian_det(x, Some(1e-3)).unwrap() - c(1.0, 0.0)).norm();
        let e2 = (t.jacobian_det(x, Some(5e-4)).unwrap() - c(1.0, 0.0)).norm();
        assert!((e1 / e2 - 4.0).abs() < 0.2, "{e1} {e2}");
    }

    #[test]
    fn rational_shear_pole_fiber_names_leaf() {
        let r = HoloMap::RationalShear { poles: vec![c(0.0, 0.0)], coeffs: vec![c(1.0, 0.0)] };
        assert_eq!(r.eval(p(1.0, 0.0)).unwrap(), p(1.0, 1.0));
        let chain = HoloMap::halving().then(r);
        match chain.eval(p(0.0, 1.0)) {
            Err(Error::PoleFiber { leaf, .. }) => assert_eq!(leaf, 1),
            other => panic!("{other:?}"),
        }
        assert!(matches!(chain.inverse(), Err(Error::NonInvertibleLeaf { leaf: 1, .. })));
        assert!(!chain.domain().everywhere_defined());
        assert!(chain.jacobian_det(p(1e-6, 1.0), None).is_err());
    }

    #[test]
    fn shear_inverse_negates() {
        let s = HoloMap::shear(1, vec![c(1.0, 0.0), c(0.0, 2.0)]).unwrap();
        assert_eq!(
            s.inverse().unwrap(),
            HoloMap::ShearPoly { axis: 1, coeffs: vec![c(-1.0, 0.0), c(0.0, -2.0)] }
        );
        assert!(HoloMap::shear(2, vec![c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn serde_rejects_invalid_leaves() {
        let bad = r#"{"kind":"linear","params":{"c1":[2.0,0.0],"c2":[0.5,0.0]}}"#;
        assert!(serde_json::from_str::<HoloMap<f64>>(bad).is_err());
        let nested = format!(r#"{{"kind":"compose","params":[{bad}]}}"#);
        assert!(serde_json::from_str::<HoloMap<f64>>(&nested).is_err());
        let ok = r#"{"kind":"compose","params":[{"kind":"twist","params":{"coeffs":[[1.0,0.0]]}}]}"#;
        assert_eq!(
            serde_json::from_str::<HoloMap<f64>>(ok).unwrap(),
            HoloMap::Compose(vec![HoloMap::quadratic_twist(c(1.0, 0.0))])
        );
        let poles = r#"{"kind":"rational_shear","params":{"poles":[[1.0,0.0],[1.0,0.0]],"coeffs":[[1.0,0.0],[1.0,0.0]]}}"#;
        assert!(serde_json::from_str::<HoloMap<f64>>(poles).is_err());
    }
}
