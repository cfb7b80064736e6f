use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{c2_arr, cx_arr, Check, VerificationReport};
use super::surface::TorusSurface;
use crate::elliptic::WeierstrassP;
use crate::error::{Error, Result};
use crate::geometry::{Lattice, Removed, SampleGrid, TorusPoint};
use crate::point::C2;
use crate::scalar::{Cx, Real};

/// Tolerance (in lattice coordinates) for deciding `2(p - q)` in the lattice.
pub const PAIR_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingKind {
    /// `(f_p, g_q)`.
    Generic,
    /// `(f_p, 1 / (g_{x0} - alpha))`.
    Degenerate,
}

/// `z -> (wp(z - p), wp(z - q))`, or its repaired form when `2(p - q)` is a
/// lattice point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct EmbeddingMap<T> {
    kind: EmbeddingKind,
    p: TorusPoint<T>,
    q: TorusPoint<T>,
    x0: Option<TorusPoint<T>>,
    alpha: Option<Cx<T>>,
    wp: WeierstrassP<T>,
}

fn half_period_translates<T: Real>(l: &Lattice<T>, c: Cx<T>) -> Vec<TorusPoint<T>> {
    l.ramification_points().iter().map(|r| r.translate(c)).collect()
}

impl<T: Real> EmbeddingMap<T> {
    /// Generic pair; fails with [`Error::DegeneratePair`] when `2(p - q)`
    /// lies in the lattice.
    pub fn generic(wp: WeierstrassP<T>, p: Cx<T>, q: Cx<T>) -> Result<Self> {
        let l = *wp.lattice();
        if l.equivalent(p, q, T::lit(PAIR_TOL)) {
            return Err(Error::InvalidParameter("p and q coincide".into()));
        }
        if l.is_lattice_point((p - q) * T::lit(2.0), T::lit(PAIR_TOL)) {
            return Err(Error::DegeneratePair);
        }
        let m = Self { kind: EmbeddingKind::Generic, p: l.point(p), q: l.point(q), x0: None, alpha: None, wp };
        m.check_ramification()?;
        Ok(m)
    }

    /// Repaired pair for `2(p - q)` in the lattice, `p != q`:
    /// `x0 = p + (q - p)/2`, `alpha = wp(p - x0)`.
    pub fn degenerate(wp: WeierstrassP<T>, p: Cx<T>, q: Cx<T>) -> Result<Self> {
        let l = *wp.lattice();
        let tol = T::lit(PAIR_TOL);
        if l.equivalent(p, q, tol) || !l.is_lattice_point((p - q) * T::lit(2.0), tol) {
            return Err(Error::NotDegenerate);
        }
        let d = l.reduce(q - p);
        let x0 = p + d * T::lit(0.5);
        debug_assert!(!l.is_lattice_point(d, tol));
        let alpha = wp.eval(p - x0)?;
        let m = Self {
            kind: EmbeddingKind::Degenerate,
            p: l.point(p),
            q: l.point(q),
            x0: Some(l.point(x0)),
            alpha: Some(alpha),
            wp,
        };
        m.check_ramification()?;
        Ok(m)
    }

    /// Whichever of [`Self::generic`] / [`Self::degenerate`] applies.
    pub fn auto(wp: WeierstrassP<T>, p: Cx<T>, q: Cx<T>) -> Result<Self> {
        match Self::generic(wp, p, q) {
            Err(Error::DegeneratePair) => Self::degenerate(wp, p, q),
            r => r,
        }
    }

    fn check_ramification(&self) -> Result<()> {
        let margin = self.ramification_margin();
        if !(margin > T::lit(PAIR_TOL)) {
            return Err(Error::Precondition(format!(
                "component ramification sets meet (distance {})",
                margin.as_f64()
            )));
        }
        Ok(())
    }

    pub fn kind(&self) -> EmbeddingKind {
        self.kind
    }

    pub fn p(&self) -> TorusPoint<T> {
        self.p
    }

    pub fn q(&self) -> TorusPoint<T> {
        self.q
    }

    pub fn x0(&self) -> Option<TorusPoint<T>> {
        self.x0
    }

    pub fn alpha(&self) -> Option<Cx<T>> {
        self.alpha
    }

    pub fn wp(&self) -> &WeierstrassP<T> {
        &self.wp
    }

    pub fn lattice(&self) -> &Lattice<T> {
        self.wp.lattice()
    }

    /// Ramification points of the two components.
    pub fn ramification(&self) -> [Vec<TorusPoint<T>>; 2] {
        let l = self.lattice();
        let second = match self.kind {
            EmbeddingKind::Generic => self.q.rep(),
            EmbeddingKind::Degenerate => self.x0.expect("degenerate map has x0").rep(),
        };
        [half_period_translates(l, self.p.rep()), half_period_translates(l, second)]
    }

    /// Smallest torus distance between the two ramification sets.
    pub fn ramification_margin(&self) -> T {
        let [a, b] = self.ramification();
        a.iter()
            .flat_map(|x| b.iter().map(move |y| x.distance(y)))
            .fold(T::infinity(), T::min)
    }

    /// First component `wp(z - p)`.
    pub fn first(&self, z: Cx<T>) -> Result<Cx<T>> {
        self.wp.eval(z - self.p.rep())
    }

    /// Second component.
    pub fn second(&self, z: Cx<T>) -> Result<Cx<T>> {
        match self.kind {
            EmbeddingKind::Generic => self.wp.eval(z - self.q.rep()),
            EmbeddingKind::Degenerate => {
                let x0 = self.x0.expect("degenerate map has x0").rep();
                let u = self.lattice().reduce(z - x0);
                if u.norm() <= self.wp.pole_margin() {
                    // 1/(u^-2 + O(1)) = u^2 + O(u^4)
                    return Ok(u * u);
                }
                let g = self.wp.eval(u)?;
                Ok((g - self.alpha.expect("degenerate map has alpha")).inv())
            }
        }
    }

    pub fn eval(&self, z: Cx<T>) -> Result<C2<T>> {
        Ok(C2::new(self.first(z)?, self.second(z)?))
    }

    /// `(d/dz first, d/dz second)`.
    pub fn derivative(&self, z: Cx<T>) -> Result<C2<T>> {
        let df = self.wp.deriv(z - self.p.rep())?;
        let dg = match self.kind {
            EmbeddingKind::Generic => self.wp.deriv(z - self.q.rep())?,
            EmbeddingKind::Degenerate => {
                let x0 = self.x0.expect("degenerate map has x0").rep();
                let u = self.lattice().reduce(z - x0);
                if u.norm() <= self.wp.pole_margin() {
                    u * T::lit(2.0)
                } else {
                    let (g, d) = self.wp.eval_with_deriv(u)?;
                    let s = g - self.alpha.expect("degenerate map has alpha");
                    -d / (s * s)
                }
            }
        };
        Ok(C2::new(df, dg))
    }

    pub fn eval_all(&self, zs: &[Cx<T>]) -> Result<Vec<C2<T>>> {
        zs.par_iter().map(|z| self.eval(*z)).collect()
    }
}

fn require_in_removed<T: Real>(t: &TorusSurface<T>, z: Cx<T>) -> Result<usize> {
    t.region_of(z, T::lit(PAIR_TOL)).ok_or_else(|| Error::NotInRemoved(z.to_string()))
}

/// Generic embedding for `p`, `q` inside removed regions of `t`.
pub fn build_embedding<T: Real>(
    t: &TorusSurface<T>,
    wp: &WeierstrassP<T>,
    p: Cx<T>,
    q: Cx<T>,
) -> Result<EmbeddingMap<T>> {
    require_in_removed(t, p)?;
    require_in_removed(t, q)?;
    EmbeddingMap::generic(*wp, p, q)
}

/// Repaired embedding for a degenerate pair inside removed regions of `t`.
pub fn build_embedding_degenerate<T: Real>(
    t: &TorusSurface<T>,
    wp: &WeierstrassP<T>,
    p: Cx<T>,
    q: Cx<T>,
) -> Result<EmbeddingMap<T>> {
    require_in_removed(t, p)?;
    require_in_removed(t, q)?;
    EmbeddingMap::degenerate(*wp, p, q)
}

/// Thresholds for [`verify_injectivity`].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct InjectivityParams<T> {
    /// Absolute floor on the smallest image distance.
    pub min_image_separation: T,
    /// Additional requirement `relative * (domain separation)`.
    pub relative: T,
}

impl<T: Real> Default for InjectivityParams<T> {
    fn default() -> Self {
        Self { min_image_separation: T::lit(1e-6), relative: T::zero() }
    }
}

/// Closest pair of points under the Euclidean norm of C^2, by a sweep over
/// `Re z`. Returns `(distance, i, j)`.
pub fn closest_pair<T: Real>(pts: &[C2<T>]) -> Option<(T, usize, usize)> {
    if pts.len() < 2 {
        return None;
    }
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| pts[a].z.re.partial_cmp(&pts[b].z.re).expect("finite images"));
    let bound = order
        .windows(2)
        .map(|w| pts[w[0]].dist(&pts[w[1]]))
        .fold(T::infinity(), T::min);
    order
        .par_iter()
        .enumerate()
        .map(|(i, &a)| {
            let mut best = (bound, usize::MAX, usize::MAX);
            for &b in &order[i + 1..] {
                if pts[b].z.re - pts[a].z.re > best.0 {
                    break;
                }
                let d = pts[a].dist(&pts[b]);
                if d <= best.0 {
                    best = (d, a.min(b), a.max(b));
                }
            }
            best
        })
        .filter(|b| b.1 != usize::MAX)
        .min_by(|x, y| x.0.partial_cmp(&y.0).expect("finite distances").then((x.1, x.2).cmp(&(y.1, y.2))))
}

/// Pairwise distinctness of `psi` on the grid.
pub fn verify_injectivity<T: Real>(
    psi: &EmbeddingMap<T>,
    grid: &SampleGrid<T>,
    params: &InjectivityParams<T>,
) -> VerificationReport {
    verify_injectivity_points(psi, grid.points(), grid.min_separation(), params)
}

/// [`verify_injectivity`] on an explicit point list.
pub fn verify_injectivity_points<T: Real>(
    psi: &EmbeddingMap<T>,
    points: &[Cx<T>],
    domain_separation: T,
    params: &InjectivityParams<T>,
) -> VerificationReport {
    let mut report = VerificationReport::new();
    let n = points.len();
    let images: Vec<Result<C2<T>>> = points.par_iter().map(|z| psi.eval(*z)).collect();
    let bad = images.iter().position(|r| r.as_ref().map_or(true, |x| !x.is_finite()));
    if let Some(i) = bad {
        report.push(
            Check::failed("images_finite", -1.0, n, vec![cx_arr(points[i])])
                .with_detail(format!("{:?}", images[i])),
        );
        return report;
    }
    report.push(Check::passed("images_finite", 1.0, n));
    let images: Vec<C2<T>> = images.into_iter().map(|r| r.expect("checked")).collect();

    let threshold = params.min_image_separation.max(params.relative * domain_separation);
    match closest_pair(&images) {
        None => report.push(Check::passed("injectivity", f64::MAX, n)),
        Some((d, i, j)) => {
            let margin = (d - threshold).as_f64();
            let witness = vec![cx_arr(points[i]), cx_arr(points[j]), c2_arr(images[i]), c2_arr(images[j])];
            let check = if margin > 0.0 {
                Check { witness, ..Check::passed("injectivity", margin, n) }
            } else {
                Check::failed("injectivity", margin, n, witness)
            };
            report.push(check.with_detail(format!(
                "min image separation {:e} (threshold {:e})",
                d.as_f64(),
                threshold.as_f64()
            )));
        }
    }
    let rm = psi.ramification_margin();
    report.push(Check::from_margin(
        "ramification_disjoint",
        (rm - T::lit(PAIR_TOL)).as_f64(),
        8,
        vec![cx_arr(psi.p().rep()), cx_arr(psi.q().rep())],
    ));
    report
}

/// Search settings for [`choose_pq_for_discs`].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PqParams<T> {
    /// Required ratio `N / |f_p|_{dD2}`.
    pub norm_ratio: T,
    /// `M = m_factor * max_{dD1} |g_{x0}|`.
    pub m_factor: T,
    /// Required ratio `|g_q(x0) f_p(x0)| / (M N)`.
    pub product_ratio: T,
    /// Factor by which the distance to the boundary shrinks per step.
    pub shrink: T,
    pub max_steps: usize,
}

impl<T: Real> Default for PqParams<T> {
    fn default() -> Self {
        Self {
            norm_ratio: T::lit(1.1),
            m_factor: T::lit(1.5),
            product_ratio: T::one(),
            shrink: T::lit(0.5),
            max_steps: 40,
        }
    }
}

/// Result of [`choose_pq_for_discs`]. Margins are relative.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PqChoice<T> {
    pub p: Cx<T>,
    pub q: Cx<T>,
    pub x0: Cx<T>,
    /// `N = max_{dD1} |f_p|`.
    pub n: T,
    /// `M`, a bound for `|g_q|` on `dD1`.
    pub m: T,
    /// `1 - |f_p|_{dD2} / N`.
    pub norm_gap: T,
    /// `1 - max_{dD1} |g_q| / M`.
    pub g_bound_gap: T,
    /// `1 - M N / |g_q(x0) f_p(x0)|`.
    pub product_gap: T,
    /// `1 - max_{dD1} |f_p g_q| / max_{dD2} |f_p g_q|`.
    pub boundary_max_gap: T,
}

fn max_abs<T: Real>(vals: impl Iterator<Item = Result<Cx<T>>>) -> Result<(T, usize)> {
    let mut best = (T::neg_infinity(), 0);
    for (k, v) in vals.enumerate() {
        let a = v?.norm();
        if a > best.0 {
            best = (a, k);
        }
    }
    Ok(best)
}

fn disc_data<T: Real>(t: &TorusSurface<T>, i: usize) -> Result<(Cx<T>, T)> {
    match t.removed().get(i) {
        Some(Removed::Disc { disc }) => Ok((disc.center().rep(), disc.radius())),
        _ => Err(Error::Precondition(format!("region {i} must be a disc"))),
    }
}

/// Places `p` in `D1` close enough to its boundary that `|f_p|` peaks on
/// `dD1`, picks `x0 = argmax_{dD2} |f_p|`, then moves `q` from inside `D2`
/// towards `x0` until `|g_q| < M` on `dD1` and `|g_q(x0) f_p(x0)| > M N`.
pub fn choose_pq_for_discs<T: Real>(
    t: &TorusSurface<T>,
    wp: &WeierstrassP<T>,
    params: &PqParams<T>,
) -> Result<PqChoice<T>> {
    let l = *t.lattice();
    let (c1, r1) = disc_data(t, 0)?;
    let (c2, r2) = disc_data(t, 1)?;
    let b1 = t.boundary(0).expect("disc has a boundary").points().to_vec();
    let b2 = t.boundary(1).expect("disc has a boundary").points().to_vec();

    let away = c1 - l.nearest_representative(c2, c1);
    let u = if away.norm() > T::zero() { away / away.norm() } else { Complex::new(T::one(), T::zero()) };

    let mut d = r1;
    let mut found = None;
    for _ in 0..params.max_steps {
        d = d * params.shrink;
        let p = c1 + u * (r1 - d);
        let (n, _) = max_abs(b1.iter().map(|b| wp.eval(*b - p)))?;
        let (n2, k2) = max_abs(b2.iter().map(|b| wp.eval(*b - p)))?;
        if n > params.norm_ratio * n2 {
            found = Some((p, n, n2, b2[k2]));
            break;
        }
    }
    let (p, n, n2, x0) = found.ok_or_else(|| Error::SearchExhausted {
        stage: "choose_pq",
        detail: "|f_p| never peaked on dD1".into(),
    })?;
    let fx0 = wp.eval(x0 - p)?;
    if !(fx0.norm() > T::zero()) {
        return Err(Error::SearchExhausted { stage: "choose_pq", detail: "f_p(x0) = 0".into() });
    }
    let (gmax, _) = max_abs(b1.iter().map(|b| wp.eval(*b - x0)))?;
    let m = params.m_factor * gmax;

    let inward = (c2 - x0) / r2;
    let mut eta = r2;
    for _ in 0..params.max_steps {
        eta = eta * params.shrink;
        let q = x0 + inward * eta;
        if l.is_lattice_point((p - q) * T::lit(2.0), T::lit(1e-6)) {
            continue;
        }
        let (gq1, _) = max_abs(b1.iter().map(|b| wp.eval(*b - q)))?;
        let gqx0 = wp.eval(x0 - q)?;
        let prod = gqx0.norm() * fx0.norm();
        if !(gq1 < m && prod > params.product_ratio * m * n) {
            continue;
        }
        let prod1 = max_abs(b1.iter().map(|b| Ok(wp.eval(*b - p)? * wp.eval(*b - q)?)))?.0;
        let prod2 = max_abs(b2.iter().map(|b| Ok(wp.eval(*b - p)? * wp.eval(*b - q)?)))?.0;
        if !(prod2 > prod1) {
            continue;
        }
        return Ok(PqChoice {
            p,
            q,
            x0,
            n,
            m,
            norm_gap: T::one() - n2 / n,
            g_bound_gap: T::one() - gq1 / m,
            product_gap: T::one() - m * n / prod,
            boundary_max_gap: T::one() - prod1 / prod2,
        });
    }
    Err(Error::SearchExhausted {
        stage: "choose_pq",
        detail: format!("no q near x0 = {x0} satisfied |g_q| < M on dD1 and |g_q f_p|(x0) > M N"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sample_torus_minus;

    type C = Complex<f64>;

    fn wp() -> WeierstrassP<f64> {
        WeierstrassP::new(Lattice::square())
    }

    #[test]
    fn generic_example_accepted() {
        let m = EmbeddingMap::generic(wp(), C::new(0.1, 0.1), C::new(0.6, 0.35)).unwrap();
        assert_eq!(m.kind(), EmbeddingKind::Generic);
        assert!(m.ramification_margin() > 0.1);
    }

    #[test]
    fn half_period_shift_is_degenerate() {
        let p = C::new(0.1, 0.1);
        let q = p + 0.5;
        assert_eq!(EmbeddingMap::generic(wp(), p, q), Err(Error::DegeneratePair));
        let m = EmbeddingMap::degenerate(wp(), p, q).unwrap();
        let x0 = m.x0().unwrap().rep();
        let l = Lattice::square();
        assert!(!l.is_lattice_point((x0 - p) * 2.0, 1e-9));
        let (gp, gq) = (wp().eval(p - x0).unwrap(), wp().eval(q - x0).unwrap());
        assert!((gp - gq).norm() <= 1e-8 * gp.norm());
        assert_eq!(EmbeddingMap::degenerate(wp(), p, C::new(0.6, 0.35)), Err(Error::NotDegenerate));
    }

    #[test]
    fn degenerate_pair_separates_random_pairs() {
        use rand::{Rng, SeedableRng};
        let p = C::new(-0.25, 0.0);
        let m = EmbeddingMap::degenerate(wp(), p, p + 0.5).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let l = Lattice::<f64>::square();
        let mut n = 0;
        while n < 200 {
            let a = C::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
            let b = C::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
            let far = |z: C| l.torus_distance(z, p) > 0.05 && l.torus_distance(z, p + 0.5) > 0.05;
            if !far(a) || !far(b) || l.torus_distance(a, b) < 1e-3 {
                continue;
            }
            assert!(m.eval(a).unwrap().dist(&m.eval(b).unwrap()) > 1e-8);
            n += 1;
        }
    }

    #[test]
    fn second_component_separates_first_component_twins() {
        let p = C::new(0.1, 0.1);
        let m = EmbeddingMap::generic(wp(), p, C::new(0.6, 0.35)).unwrap();
        let z = C::new(-0.3, 0.2);
        let twin = -z + p * 2.0;
        let (a, b) = (m.eval(z).unwrap(), m.eval(twin).unwrap());
        assert!((a.z - b.z).norm() < 1e-9 * a.z.norm());
        assert!((a.w - b.w).norm() > 1e-3);
        let r = verify_injectivity_points(&m, &[z, twin], 0.1, &InjectivityParams::default());
        assert!(r.all_pass(), "{r:?}");
        let single = verify_injectivity_points(&m, &[z], 0.1, &InjectivityParams::default());
        assert!(single.all_pass());
    }

    #[test]
    fn closest_pair_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let pts: Vec<C2<f64>> = (0..300)
                .map(|_| C2::from_parts(rng.gen(), rng.gen(), rng.gen(), rng.gen()))
                .collect();
            let (d, _, _) = closest_pair(&pts).unwrap();
            let mut brute = f64::INFINITY;
            for i in 0..pts.len() {
                for j in 0..i {
                    brute = brute.min(pts[i].dist(&pts[j]));
                }
            }
            assert_eq!(d, brute);
        }
    }

    #[test]
    fn dichotomy_is_total() {
        let w = wp();
        let p = C::new(0.05, -0.1);
        for q in [p + 0.5, p + C::new(0.0, 0.5), p + C::new(0.5, 0.5), C::new(0.3, 0.3), C::new(-0.4, 0.2)] {
            let g = EmbeddingMap::generic(w, p, q).is_ok();
            let d = EmbeddingMap::degenerate(w, p, q).is_ok();
            assert!(g ^ d, "q = {q}");
        }
    }

    #[test]
    fn pq_search_for_two_discs() {
        let l = Lattice::square();
        let removed = vec![
            Removed::disc(C::new(-0.25, 0.0), 0.12, l).unwrap(),
            Removed::disc(C::new(0.25, 0.1), 0.12, l).unwrap(),
        ];
        let t = TorusSurface::new(l, removed, 720).unwrap();
        let c = choose_pq_for_discs(&t, &wp(), &PqParams::default()).unwrap();
        assert!(c.norm_gap > 0.0 && c.g_bound_gap > 0.0 && c.product_gap > 0.0 && c.boundary_max_gap > 0.0);
        assert!(t.region_of(c.p, 1e-9) == Some(0) && t.region_of(c.q, 1e-9) == Some(1));
        let psi = build_embedding(&t, &wp(), c.p, c.q).unwrap();
        let grid = sample_torus_minus(&l, t.removed(), 0.02, 0.01).unwrap();
        assert!(verify_injectivity(&psi, &grid, &InjectivityParams::default()).all_pass());
    }

    #[test]
    fn pole_distance_growth_is_quadratic() {
        // |f_p| on the boundary near the closest point ~ 1/d^2
        let w = wp();
        let b = C::new(0.12, 0.0);
        let ratios: Vec<f64> = [0.02, 0.01, 0.005]
            .iter()
            .map(|d| w.eval(b - C::new(0.12 - d, 0.0)).unwrap().norm() * d * d)
            .collect();
        for r in ratios {
            assert!((r - 1.0).abs() < 0.01);
        }
    }
}
