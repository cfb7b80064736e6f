//! Points of C^2.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::scalar::{is_finite_cx, Cx, Real};

/// A point `(z, w)` of C^2.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct C2<T> {
    pub z: Complex<T>,
    pub w: Complex<T>,
}

impl<T: Real> C2<T> {
    pub fn new(z: Cx<T>, w: Cx<T>) -> Self {
        Self { z, w }
    }

    pub fn from_parts(re_z: T, im_z: T, re_w: T, im_w: T) -> Self {
        Self::new(Complex::new(re_z, im_z), Complex::new(re_w, im_w))
    }

    pub fn origin() -> Self {
        Self::new(Complex::new(T::zero(), T::zero()), Complex::new(T::zero(), T::zero()))
    }

    /// Euclidean norm in C^2 = R^4.
    pub fn norm(&self) -> T {
        (self.z.norm_sqr() + self.w.norm_sqr()).sqrt()
    }

    pub fn norm_sqr(&self) -> T {
        self.z.norm_sqr() + self.w.norm_sqr()
    }

    pub fn dist(&self, other: &Self) -> T {
        (*self - *other).norm()
    }

    pub fn scale(&self, s: Cx<T>) -> Self {
        Self::new(self.z * s, self.w * s)
    }

    pub fn is_finite(&self) -> bool {
        is_finite_cx(self.z) && is_finite_cx(self.w)
    }

    /// Coordinate `i` (0 for `z`, 1 for `w`).
    pub fn coord(&self, i: usize) -> Cx<T> {
        if i == 0 {
            self.z
        } else {
            self.w
        }
    }

    pub fn to_array(&self) -> [T; 4] {
        [self.z.re, self.z.im, self.w.re, self.w.im]
    }
}

impl<T: Real> Add for C2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.z + o.z, self.w + o.w)
    }
}

impl<T: Real> Sub for C2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.z - o.z, self.w - o.w)
    }
}

impl<T: Real> Neg for C2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.z, -self.w)
    }
}

impl<T: Real> Mul<T> for C2<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.z * s, self.w * s)
    }
}
