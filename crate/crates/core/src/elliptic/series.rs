//! Lattice sums behind the Weierstrass function.
//!
//! Two summation orders are provided. `lattice_*` sums the series literally
//! over the square block `Omega_N = {n*w1 + m*w2 : |n|,|m| <= N}`; its
//! truncation error decays like `N^-2`. `row_*` sums every lattice row
//! `{z - m*b2 - n*b1 : n in Z}` in closed form,
//!
//! ```text
//! sum_n 1/(x + n)^2 = pi^2 csc^2(pi x)
//! ```
//!
//! and truncates only the rows `|m| <= N`, which converges like
//! `exp(-2 pi N Im(b2/b1))`.

use num_complex::Complex;

use crate::scalar::{Cx, Real};

/// `(csc^2 u, csc^2 u * cot u)`, evaluated through `q = exp(+-2iu)` so that
/// large `|Im u|` neither overflows nor cancels.
#[inline]
pub(crate) fn csc2_cot<T: Real>(u: Cx<T>) -> (Cx<T>, Cx<T>) {
    let i = Complex::new(T::zero(), T::one());
    let one = Complex::new(T::one(), T::zero());
    let four = T::lit(4.0);
    if u.im >= T::zero() {
        let q = (i * u * T::lit(2.0)).exp();
        let d = one - q;
        let c = -q * four / (d * d);
        let cc = i * q * (one + q) * four / (d * d * d);
        (c, cc)
    } else {
        let q = (-i * u * T::lit(2.0)).exp();
        let d = one - q;
        let c = -q * four / (d * d);
        let cc = -i * q * (one + q) * four / (d * d * d);
        (c, cc)
    }
}

#[inline]
fn csc2<T: Real>(u: Cx<T>) -> Cx<T> {
    csc2_cot(u).0
}

/// Row-summed `wp(z)` over rows `|m| <= n_rows` of the basis `[b1, b2]`.
pub(crate) fn row_wp<T: Real>(z: Cx<T>, basis: [Cx<T>; 2], n_rows: usize) -> Cx<T> {
    let [b1, b2] = basis;
    let pi = T::PI();
    let scale = Complex::new(pi, T::zero()) / b1;
    let u0 = z * scale;
    let step = b2 * scale;
    let mut acc = csc2(u0) - Complex::new(T::lit(1.0 / 3.0), T::zero());
    for m in 1..=n_rows {
        let sh = step * T::lit(m as f64);
        acc = acc + csc2(u0 - sh) + csc2(u0 + sh) - csc2(sh) * T::lit(2.0);
    }
    scale * scale * acc
}

/// Row-summed `wp'(z) = -2 sum 1/(z - w)^3`.
pub(crate) fn row_wp_deriv<T: Real>(z: Cx<T>, basis: [Cx<T>; 2], n_rows: usize) -> Cx<T> {
    let [b1, b2] = basis;
    let pi = T::PI();
    let scale = Complex::new(pi, T::zero()) / b1;
    let u0 = z * scale;
    let step = b2 * scale;
    let mut acc = csc2_cot(u0).1;
    for m in 1..=n_rows {
        let sh = step * T::lit(m as f64);
        acc = acc + csc2_cot(u0 - sh).1 + csc2_cot(u0 + sh).1;
    }
    scale * scale * scale * acc * T::lit(-2.0)
}

/// Row-summed Eisenstein sums `(G4, G6) = (sum' w^-4, sum' w^-6)`.
pub(crate) fn row_eisenstein<T: Real>(basis: [Cx<T>; 2], n_rows: usize) -> (Cx<T>, Cx<T>) {
    let [b1, b2] = basis;
    let pi = T::PI();
    let tau = b2 / b1;
    let (pi4, pi6) = (pi.powi(4), pi.powi(6));
    let mut s4 = Complex::new(pi4 / T::lit(45.0), T::zero());
    let mut s6 = Complex::new(pi6 * T::lit(2.0 / 945.0), T::zero());
    let two_thirds = T::lit(2.0 / 3.0);
    let two_fifteenths = T::lit(2.0 / 15.0);
    for m in 1..=n_rows {
        let c = csc2(tau * (pi * T::lit(m as f64)));
        let c2 = c * c;
        s4 = s4 + (c2 - c * two_thirds) * (pi4 * T::lit(2.0));
        s6 = s6 + (c2 * c - c2 + c * two_fifteenths) * (pi6 * T::lit(2.0));
    }
    let b4 = b1.powi(4);
    (s4 / b4, s6 / (b4 * b1 * b1))
}

fn block<T: Real>(basis: [Cx<T>; 2], n: usize) -> impl Iterator<Item = Cx<T>> {
    let n = n as i64;
    (-n..=n).flat_map(move |i| {
        (-n..=n).filter_map(move |j| {
            if i == 0 && j == 0 {
                None
            } else {
                Some(basis[0] * T::lit(i as f64) + basis[1] * T::lit(j as f64))
            }
        })
    })
}

/// Literal `Omega_N` sum for `wp(z)`.
pub(crate) fn lattice_wp<T: Real>(z: Cx<T>, basis: [Cx<T>; 2], n: usize) -> Cx<T> {
    let mut acc = (z * z).inv();
    for w in block(basis, n) {
        let d = z - w;
        acc = acc + (d * d).inv() - (w * w).inv();
    }
    acc
}

/// Literal `Omega_N` sum for `wp'(z)`.
pub(crate) fn lattice_wp_deriv<T: Real>(z: Cx<T>, basis: [Cx<T>; 2], n: usize) -> Cx<T> {
    let mut acc = (z * z * z).inv();
    for w in block(basis, n) {
        let d = z - w;
        acc = acc + (d * d * d).inv();
    }
    acc * T::lit(-2.0)
}

/// Literal `Omega_N` Eisenstein sums.
pub(crate) fn lattice_eisenstein<T: Real>(basis: [Cx<T>; 2], n: usize) -> (Cx<T>, Cx<T>) {
    let zero = Complex::new(T::zero(), T::zero());
    block(basis, n).fold((zero, zero), |(a, b), w| {
        let w2 = (w * w).inv();
        let w4 = w2 * w2;
        (a + w4, b + w4 * w2)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    type C = Complex<f64>;

    #[test]
    fn csc2_matches_direct_formula_for_moderate_arguments() {
        for u in [C::new(0.3, 0.2), C::new(1.1, -0.4), C::new(-2.0, 0.05)] {
            let direct = (u.sin() * u.sin()).inv();
            let (c, cc) = csc2_cot(u);
            assert!((c - direct).norm() < 1e-12 * direct.norm());
            let dc = direct * u.cos() / u.sin();
            assert!((cc - dc).norm() < 1e-12 * dc.norm());
        }
    }

    #[test]
    fn csc2_stable_far_from_real_axis() {
        let (c, cc) = csc2_cot(C::new(0.3, 400.0));
        assert!(c.norm() < 1e-300 || c.norm().is_finite());
        assert!(c.re.is_finite() && cc.re.is_finite());
    }

    #[test]
    fn row_and_lattice_sums_agree_to_lattice_truncation_error() {
        let basis = [C::new(1.0, 0.0), C::new(0.0, 1.0)];
        let z = C::new(0.23, 0.31);
        let r = row_wp(z, basis, 30);
        let l60 = lattice_wp(z, basis, 60);
        let l240 = lattice_wp(z, basis, 240);
        // N^-2 convergence: error shrinks ~16x from N=60 to 240
        let (e60, e240) = ((r - l60).norm(), (r - l240).norm());
        assert!(e60 < 1e-3 && e240 < e60 / 10.0, "{e60} {e240}");
    }
}
