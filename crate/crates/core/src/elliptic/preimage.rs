//! Solving `wp(z) = w` on the torus by the argument principle.
//!
//! The fundamental domain (in reduced-basis coordinates, shifted off the
//! half-periods) is cut into an odd grid of cells so the pole at 0 sits in the
//! interior of the middle cell. For each cell the winding number of
//! `wp - w` along its boundary is tracked by adaptive phase continuation
//! (the imaginary part of the integral of `wp'/(wp - w)`), and
//! `zeros = winding + 2` for the cell that holds the double pole. Cells with
//! zeros are bisected until Newton iteration (on `wp - w` for simple roots,
//! on `wp'` for double roots) converges inside them.

use serde::{Deserialize, Serialize};

use super::WeierstrassP;
use crate::error::{Error, Result};
use crate::geometry::TorusPoint;
use crate::scalar::{is_finite_cx, Cx, Real};

/// A solution of `wp(z) = w` with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Preimage<T> {
    pub point: TorusPoint<T>,
    pub multiplicity: u32,
}

const GRID: usize = 5;
const BASE_OFFSET: (f64, f64) = (0.0371, 0.0533);
const EDGE_SEGMENTS: usize = 16;
const MAX_DEPTH: u32 = 32;
const ATTEMPTS: i32 = 4;

#[derive(Debug)]
enum SearchError {
    /// A zero sits (numerically) on a cell boundary; retry with shifted cells.
    EdgeTooClose,
    Fail(Error),
}

impl From<Error> for SearchError {
    fn from(e: Error) -> Self {
        SearchError::Fail(e)
    }
}

#[derive(Clone, Copy, Debug)]
struct Cell<T> {
    s0: T,
    t0: T,
    ds: T,
    dt: T,
}

impl<T: Real> Cell<T> {
    fn contains_lattice_point(&self) -> bool {
        let inside = |a: T, d: T| (a + d).floor() > a.floor() || a.floor() == a;
        inside(self.s0, self.ds) && inside(self.t0, self.dt)
    }

    fn quarters(&self) -> [Cell<T>; 4] {
        let h = T::lit(0.5);
        let (ds, dt) = (self.ds * h, self.dt * h);
        [
            Cell { s0: self.s0, t0: self.t0, ds, dt },
            Cell { s0: self.s0 + ds, t0: self.t0, ds, dt },
            Cell { s0: self.s0, t0: self.t0 + dt, ds, dt },
            Cell { s0: self.s0 + ds, t0: self.t0 + dt, ds, dt },
        ]
    }
}

struct Solver<'a, T: Real> {
    wp: &'a WeierstrassP<T>,
    target: Cx<T>,
    basis: [Cx<T>; 2],
    systole: T,
    tol: T,
}

impl<'a, T: Real> Solver<'a, T> {
    fn at(&self, s: T, t: T) -> Cx<T> {
        self.basis[0] * s + self.basis[1] * t
    }

    fn diameter(&self, c: &Cell<T>) -> T {
        let a = self.basis[0] * c.ds + self.basis[1] * c.dt;
        let b = self.basis[0] * c.ds - self.basis[1] * c.dt;
        a.norm().max(b.norm())
    }

    fn contains(&self, c: &Cell<T>, z: Cx<T>, slack: T) -> bool {
        let [b1, b2] = self.basis;
        let det = b1.re * b2.im - b2.re * b1.im;
        let s = (z.re * b2.im - z.im * b2.re) / det;
        let t = (b1.re * z.im - b1.im * z.re) / det;
        let (es, et) = (c.ds * slack, c.dt * slack);
        s >= c.s0 - es && s <= c.s0 + c.ds + es && t >= c.t0 - et && t <= c.t0 + c.dt + et
    }

    fn f(&self, z: Cx<T>) -> std::result::Result<Cx<T>, SearchError> {
        match self.wp.eval(z) {
            Ok(v) => {
                let d = v - self.target;
                if !is_finite_cx(d) || d.norm() == T::zero() {
                    Err(SearchError::EdgeTooClose)
                } else {
                    Ok(d)
                }
            }
            Err(Error::PoleProximity { .. }) => Err(SearchError::EdgeTooClose),
            Err(e) => Err(SearchError::Fail(e)),
        }
    }

    fn arg_change(
        &self,
        a: Cx<T>,
        b: Cx<T>,
        fa: Cx<T>,
        fb: Cx<T>,
        depth: u32,
    ) -> std::result::Result<T, SearchError> {
        let d = (fb / fa).arg();
        if d.abs() < T::FRAC_PI_4() {
            return Ok(d);
        }
        if depth >= MAX_DEPTH {
            return Err(SearchError::EdgeTooClose);
        }
        let m = (a + b) * T::lit(0.5);
        let fm = self.f(m)?;
        Ok(self.arg_change(a, m, fa, fm, depth + 1)? + self.arg_change(m, b, fm, fb, depth + 1)?)
    }

    /// Winding number of `wp - w` around the cell boundary.
    fn winding(&self, c: &Cell<T>) -> std::result::Result<i64, SearchError> {
        let corners = [
            (c.s0, c.t0),
            (c.s0 + c.ds, c.t0),
            (c.s0 + c.ds, c.t0 + c.dt),
            (c.s0, c.t0 + c.dt),
        ];
        let mut total = T::zero();
        for k in 0..4 {
            let (s_a, t_a) = corners[k];
            let (s_b, t_b) = corners[(k + 1) % 4];
            let mut prev_z = self.at(s_a, t_a);
            let mut prev_f = self.f(prev_z)?;
            for j in 1..=EDGE_SEGMENTS {
                let u = T::lit(j as f64 / EDGE_SEGMENTS as f64);
                let z = self.at(s_a + (s_b - s_a) * u, t_a + (t_b - t_a) * u);
                let fz = self.f(z)?;
                total = total + self.arg_change(prev_z, z, prev_f, fz, 0)?;
                prev_z = z;
                prev_f = fz;
            }
        }
        let turns = total / T::TAU();
        let r = turns.round();
        if (turns - r).abs() > T::lit(1e-3) {
            return Err(SearchError::EdgeTooClose);
        }
        Ok(r.to_i64().unwrap_or(0))
    }

    fn zeros(&self, c: &Cell<T>) -> std::result::Result<i64, SearchError> {
        let pole = if c.contains_lattice_point() { 2 } else { 0 };
        Ok(self.winding(c)? + pole)
    }

    fn newton_simple(&self, mut z: Cx<T>) -> Option<Cx<T>> {
        let stop = self.systole * self.tol * T::lit(1e-3);
        for _ in 0..60 {
            let (p, dp) = self.wp.eval_with_deriv(z).ok()?;
            let step = (p - self.target) / dp;
            if !is_finite_cx(step) {
                return None;
            }
            z = z - step;
            if step.norm() <= stop {
                return Some(z);
            }
        }
        None
    }

    /// Newton on `wp'`: converges to a half-period.
    fn newton_critical(&self, mut z: Cx<T>) -> Option<Cx<T>> {
        let stop = self.systole * T::lit(1e-14);
        for _ in 0..60 {
            let dp = self.wp.deriv(z).ok()?;
            let ddp = self.wp.second_deriv(z).ok()?;
            let step = dp / ddp;
            if !is_finite_cx(step) {
                return None;
            }
            z = z - step;
            if step.norm() <= stop {
                return Some(z);
            }
        }
        None
    }

    fn locate(
        &self,
        cell: Cell<T>,
        count: i64,
        depth: u32,
        out: &mut Vec<(Cx<T>, u32)>,
    ) -> std::result::Result<(), SearchError> {
        if count <= 0 {
            if count < 0 {
                return Err(SearchError::EdgeTooClose);
            }
            return Ok(());
        }
        let diam = self.diameter(&cell);
        let center = self.at(cell.s0 + cell.ds * T::lit(0.5), cell.t0 + cell.dt * T::lit(0.5));
        let small = diam < self.systole / T::lit(8.0);
        if small && count == 1 {
            if let Some(z) = self.newton_simple(center) {
                if self.contains(&cell, z, T::lit(0.25)) {
                    out.push((z, 1));
                    return Ok(());
                }
            }
        }
        if small && count == 2 {
            if let Some(z) = self.newton_critical(center) {
                if self.contains(&cell, z, T::lit(0.25)) {
                    let p = self.wp.eval(z)?;
                    let ddp = self.wp.second_deriv(z)?;
                    // the two roots near a critical point are sqrt(|p - w| / |p''|) apart
                    let split = ((p - self.target).norm() / ddp.norm()).sqrt();
                    if split <= self.tol * self.systole {
                        out.push((z, 2));
                        return Ok(());
                    }
                }
            }
        }
        if cell.contains_lattice_point() && diam < self.wp.pole_margin() * T::lit(8.0) {
            return Err(SearchError::Fail(Error::NonConvergence {
                detail: "preimage lies inside the pole margin".into(),
            }));
        }
        if depth >= MAX_DEPTH {
            return Err(SearchError::Fail(Error::NonConvergence {
                detail: format!("cell at ({}, {}) with {count} zeros did not resolve", cell.s0, cell.t0),
            }));
        }
        let subs = cell.quarters();
        let counts = subs.iter().map(|c| self.zeros(c)).collect::<std::result::Result<Vec<_>, _>>()?;
        if counts.iter().sum::<i64>() != count {
            return Err(SearchError::EdgeTooClose);
        }
        for (c, k) in subs.into_iter().zip(counts) {
            self.locate(c, k, depth + 1, out)?;
        }
        Ok(())
    }

    fn solve(&self, offset: (T, T)) -> std::result::Result<Vec<(Cx<T>, u32)>, SearchError> {
        let width = T::one() / T::lit(GRID as f64);
        let half = T::lit(0.5);
        let mut cells = Vec::with_capacity(GRID * GRID);
        for i in 0..GRID {
            for j in 0..GRID {
                cells.push(Cell {
                    s0: -half + offset.0 + width * T::lit(i as f64),
                    t0: -half + offset.1 + width * T::lit(j as f64),
                    ds: width,
                    dt: width,
                });
            }
        }
        let counts = cells.iter().map(|c| self.zeros(c)).collect::<std::result::Result<Vec<_>, _>>()?;
        let total: i64 = counts.iter().sum();
        if total != 2 {
            return Err(SearchError::EdgeTooClose);
        }
        let mut roots = Vec::new();
        for (c, k) in cells.into_iter().zip(counts) {
            self.locate(c, k, 0, &mut roots)?;
        }
        Ok(roots)
    }
}

impl<T: Real> WeierstrassP<T> {
    /// All solutions of `wp(z) = w` on the torus, with multiplicities summing
    /// to exactly 2. Roots closer than `tol * systole` are reported as one
    /// double root.
    pub fn preimages(&self, w: Cx<T>, tol: T) -> Result<Vec<Preimage<T>>> {
        if !is_finite_cx(w) {
            return Err(Error::InvalidParameter(format!("target {w} is not finite")));
        }
        if !(tol > T::zero()) {
            return Err(Error::InvalidParameter("tolerance must be positive".into()));
        }
        let solver = Solver {
            wp: self,
            target: w,
            basis: self.lattice().reduced_basis(),
            systole: self.lattice().systole(),
            tol,
        };
        for attempt in 0..ATTEMPTS {
            let shift = if attempt == 0 { T::zero() } else { T::lit(1e-6 * 10f64.powi(attempt - 1)) };
            let offset = (T::lit(BASE_OFFSET.0) + shift, T::lit(BASE_OFFSET.1) + shift);
            match solver.solve(offset) {
                Ok(roots) => return self.merge_roots(roots, tol),
                Err(SearchError::EdgeTooClose) => {
                    log::debug!("preimage search: zero near a cell edge, shifting cells");
                    continue;
                }
                Err(SearchError::Fail(e)) => return Err(e),
            }
        }
        Err(Error::NonConvergence {
            detail: format!("zeros of wp - {w} stayed on cell boundaries after {ATTEMPTS} shifts"),
        })
    }

    fn merge_roots(&self, roots: Vec<(Cx<T>, u32)>, tol: T) -> Result<Vec<Preimage<T>>> {
        let lattice = *self.lattice();
        let merge_dist = lattice.systole() * tol.max(T::lit(1e-9));
        let mut out: Vec<Preimage<T>> = Vec::new();
        for (z, m) in roots {
            let p = lattice.point(z);
            match out.iter_mut().find(|q| q.point.distance(&p) <= merge_dist) {
                Some(q) => q.multiplicity += m,
                None => out.push(Preimage { point: p, multiplicity: m }),
            }
        }
        let total: u32 = out.iter().map(|p| p.multiplicity).sum();
        if total != 2 {
            return Err(Error::NonConvergence {
                detail: format!("multiplicities sum to {total}, expected 2"),
            });
        }
        Ok(out)
    }
}
