use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::C2;
use crate::scalar::{Cx, Real};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct HullParams {
    /// Random polynomials per degree.
    pub family: usize,
    pub seed: u64,
    /// Scores up to `1 + tol` count as possibly in the hull.
    pub tol: f64,
}

impl Default for HullParams {
    fn default() -> Self {
        Self { family: 32, seed: 0, tol: 1e-6 }
    }
}

/// Coefficients of `z^a w^b`, `a + b <= d`, in graded order.
fn random_poly(d: usize, seed: u64) -> Vec<(usize, usize, Complex<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for deg in 0..=d {
        for a in 0..=deg {
            out.push((a, deg - a, Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
        }
    }
    out
}

fn eval_poly<T: Real>(p: &[(usize, usize, Complex<f64>)], zp: &[Cx<T>], wp: &[Cx<T>]) -> T {
    p.iter()
        .map(|(a, b, c)| zp[*a] * wp[*b] * Complex::new(T::lit(c.re), T::lit(c.im)))
        .fold(Complex::new(T::zero(), T::zero()), |s, t| s + t)
        .norm()
}

fn powers<T: Real>(x: C2<T>, d: usize) -> (Vec<Cx<T>>, Vec<Cx<T>>) {
    let mut zp = vec![Complex::new(T::one(), T::zero())];
    let mut wp = zp.clone();
    for i in 1..=d {
        zp.push(zp[i - 1] * x.z);
        wp.push(wp[i - 1] * x.w);
    }
    (zp, wp)
}

/// For each probe, the largest `|p(x)| / sup_K |p|` over a seeded family of
/// polynomials of degree at most `degree`. The family for degree `d`
/// contains the families of all lower degrees, so scores do not decrease
/// with `d`.
pub fn hull_estimate<T: Real>(k: &[C2<T>], probes: &[C2<T>], degree: usize, params: &HullParams) -> Result<Vec<T>> {
    if degree == 0 {
        return Err(Error::InvalidParameter("hull degree must be at least 1".into()));
    }
    if k.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let polys: Vec<_> = (1..=degree)
        .flat_map(|d| (0..params.family).map(move |i| (d, i)))
        .map(|(d, i)| random_poly(d, params.seed ^ ((d as u64) << 32) ^ i as u64))
        .collect();
    let kp: Vec<_> = k.iter().map(|x| powers(*x, degree)).collect();
    let sups: Vec<T> = polys
        .par_iter()
        .map(|p| kp.iter().map(|(zp, wp)| eval_poly(p, zp, wp)).fold(T::zero(), T::max))
        .collect();
    Ok(probes
        .par_iter()
        .map(|x| {
            let (zp, wp) = powers(*x, degree);
            polys
                .iter()
                .zip(&sups)
                .filter(|(_, s)| **s > T::zero())
                .map(|(p, s)| eval_poly(p, &zp, &wp) / *s)
                .fold(T::zero(), T::max)
        })
        .collect())
}

/// `score <= 1 + tol`.
pub fn possibly_in_hull<T: Real>(score: T, tol: f64) -> bool {
    score <= T::one() + T::lit(tol)
}
