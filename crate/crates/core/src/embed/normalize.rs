use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{c2_arr, Check, VerificationReport};
use crate::error::{Error, Result};
use crate::geometry::BoundaryCurve;
use crate::maps::HoloMap;
use crate::point::C2;
use crate::scalar::{Cx, Real};

pub type Curve2<T> = BoundaryCurve<C2<T>>;

/// A boundary sample singled out by a normalization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MarkedPoint<T> {
    pub point: C2<T>,
    /// Parameter derivative of the boundary curve.
    pub tangent: C2<T>,
    pub curve: usize,
    pub index: usize,
}

/// A normalizing map, the points it marks and the checks behind it.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct NormalizationResult<T> {
    pub map: HoloMap<T>,
    pub marked: Vec<MarkedPoint<T>>,
    pub report: VerificationReport,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct NormalizeParams {
    pub seed: u64,
    /// Radius of the disc the linear coefficients are drawn from.
    pub draw_radius: f64,
    pub max_draws: usize,
    /// Tangent components must exceed this fraction of the tangent norm.
    pub tangent_rel: f64,
    /// Density factor of the re-check.
    pub refine: usize,
    /// Largest rotation angle tried.
    pub theta_max: f64,
    pub theta_steps: usize,
    /// Peak gap required, relative to the range of the objective.
    pub gap_rel: f64,
    /// Fiber tube radius; `None` for 1% of the surface diameter.
    pub tube: Option<f64>,
    /// Regularity threshold `|z'| / |gamma'|`.
    pub regular_rel: f64,
    /// Bound on `|DA - I|` for the linear normalizations.
    pub identity_bound: f64,
}

impl Default for NormalizeParams {
    fn default() -> Self {
        Self {
            seed: 0,
            draw_radius: 0.1,
            max_draws: 64,
            tangent_rel: 1e-3,
            refine: 10,
            theta_max: 0.1,
            theta_steps: 24,
            gap_rel: 1e-4,
            tube: None,
            regular_rel: 1e-3,
            identity_bound: 0.1,
        }
    }
}

/// Image of a curve under `f`, keeping the parametrization. The spacing
/// bound is twice the observed one so refinements stay admissible.
pub fn map_curve<T, F>(curve: &BoundaryCurve<Cx<T>>, f: F) -> Result<Curve2<T>>
where
    T: Real,
    F: Fn(Cx<T>) -> Result<C2<T>> + Send + Sync + 'static,
{
    let pts = curve.points().iter().map(|z| f(*z)).collect::<Result<Vec<_>>>()?;
    curve.try_map(f, observed_spacing(&pts, curve.closed()) * T::lit(2.0))
}

/// [`map_curve`] for curves already in C^2.
pub fn map_curve2<T: Real>(curve: &Curve2<T>, map: &HoloMap<T>) -> Result<Curve2<T>> {
    let pts = map.eval_all(curve.points())?;
    let m = map.clone();
    curve.try_map(move |x| m.eval(x), observed_spacing(&pts, curve.closed()) * T::lit(2.0))
}

fn observed_spacing<T: Real>(pts: &[C2<T>], closed: bool) -> T {
    let mut s = pts.windows(2).map(|w| w[0].dist(&w[1])).fold(T::zero(), T::max);
    if closed && pts.len() > 1 {
        s = s.max(pts[0].dist(&pts[pts.len() - 1]));
    }
    s.max(T::min_positive_value())
}

fn refined<T: Real>(curves: &[Curve2<T>], factor: usize) -> Option<Result<Vec<Curve2<T>>>> {
    curves.iter().map(|c| c.refine(factor)).collect::<Option<Vec<_>>>().map(|v| v.into_iter().collect())
}

/// `(min |z'|, argmin, min |w'|, argmin)`, components measured against the
/// full tangent at the same sample.
fn tangent_margins<T: Real>(curves: &[Curve2<T>]) -> (T, (usize, usize), T, (usize, usize)) {
    let mut mz = (T::infinity(), (0, 0));
    let mut mw = (T::infinity(), (0, 0));
    for (ci, c) in curves.iter().enumerate() {
        for (k, t) in c.tangents().iter().enumerate() {
            let scale = t.norm().max(T::min_positive_value());
            if t.z.norm() / scale < mz.0 {
                mz = (t.z.norm() / scale, (ci, k));
            }
            if t.w.norm() / scale < mw.0 {
                mw = (t.w.norm() / scale, (ci, k));
            }
        }
    }
    (mz.0, mz.1, mw.0, mw.1)
}

fn all_samples<T: Real>(curves: &[Curve2<T>]) -> Vec<C2<T>> {
    curves.iter().flat_map(|c| c.points().iter().copied()).collect()
}

/// Picks `A(z, w) = (z + c1 w, w + c2 z)` with small random `c1`, `c2`
/// (or `A = id`) so that neither tangent component of any boundary curve
/// vanishes on the samples, and re-checks on `refine`-times denser samples.
pub fn normalize_cord1<T: Real>(curves: &[Curve2<T>], params: &NormalizeParams) -> Result<NormalizationResult<T>> {
    let scale = curves.iter().flat_map(|c| c.tangents()).map(|t| t.norm()).fold(T::zero(), T::max);
    for (ci, c) in curves.iter().enumerate() {
        if let Some(k) = c.tangents().iter().position(|t| !(t.norm() > T::lit(1e-12) * scale)) {
            return Err(Error::Precondition(format!("curve {ci} has a vanishing tangent at sample {k}")));
        }
    }
    let thr = T::lit(params.tangent_rel);
    let dense = refined(curves, params.refine).transpose()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut worst = (T::neg_infinity(), (0, 0));
    for draw in 0..=params.max_draws {
        let map = if draw == 0 {
            HoloMap::identity()
        } else {
            let mut c = || {
                let r = params.draw_radius * rng.gen::<f64>().sqrt();
                let a = std::f64::consts::TAU * rng.gen::<f64>();
                Complex::new(T::lit(r * a.cos()), T::lit(r * a.sin()))
            };
            match HoloMap::linear(c(), c()) {
                Ok(m) => m,
                Err(_) => continue,
            }
        };
        let imgs = curves.iter().map(|c| map_curve2(c, &map)).collect::<Result<Vec<_>>>()?;
        let (mz, wz, mw, ww) = tangent_margins(&imgs);
        let m = mz.min(mw);
        if m > worst.0 {
            worst = (m, if mz < mw { wz } else { ww });
        }
        if !(m > thr) {
            continue;
        }
        let dense_margin = match &dense {
            Some(d) => {
                let di = d.iter().map(|c| map_curve2(c, &map)).collect::<Result<Vec<_>>>()?;
                let (a, _, b, _) = tangent_margins(&di);
                Some(a.min(b))
            }
            None => None,
        };
        if dense_margin.is_some_and(|d| !(d > thr * T::lit(0.1))) {
            continue;
        }
        let samples = all_samples(curves);
        let dist = map.distance_from_identity(&samples[..samples.len().min(16)])?;
        let mut report = VerificationReport::new();
        report.push(Check::passed("tangent_z", (mz - thr).as_f64(), samples.len()));
        report.push(Check::passed("tangent_w", (mw - thr).as_f64(), samples.len()));
        report.push(match dense_margin {
            Some(d) => Check::passed("tangent_refined", d.as_f64(), samples.len() * params.refine),
            None => Check::passed("tangent_refined", (mz.min(mw)).as_f64(), samples.len())
                .with_detail("no parametrization; sampled margins only"),
        });
        let id_margin = params.identity_bound - dist.as_f64();
        report.push(
            Check::from_margin("near_identity", id_margin, samples.len(), vec![[dist.as_f64(), 0.0, 0.0, 0.0]])
                .with_detail(format!("draws {draw}")),
        );
        return Ok(NormalizationResult { map, marked: Vec::new(), report });
    }
    let (ci, k) = worst.1;
    Err(Error::SearchExhausted {
        stage: "normalize_cord1",
        detail: format!(
            "best tangent margin {:e} at curve {ci} sample {k} ({:?})",
            worst.0.as_f64(),
            curves[ci].points()[k]
        ),
    })
}

/// Indices around `k` reached by strict descent of `v` in both directions.
pub(crate) fn peak_basin<T: Real>(v: &[T], k: usize, closed: bool) -> Vec<bool> {
    let n = v.len();
    let mut inb = vec![false; n];
    inb[k] = true;
    for dir in [-1isize, 1] {
        let mut j = k;
        for _ in 0..n {
            let next = j as isize + dir;
            let next = if closed {
                next.rem_euclid(n as isize) as usize
            } else if (0..n as isize).contains(&next) {
                next as usize
            } else {
                break;
            };
            if inb[next] || !(v[next] < v[j]) {
                break;
            }
            inb[next] = true;
            j = next;
        }
    }
    inb
}

/// Maximum of `score` over all curve samples, and the gap to the best sample
/// outside the strict-descent basin of the peak.
#[derive(Clone, Copy, Debug)]
struct Peak<T> {
    curve: usize,
    index: usize,
    gap: T,
    range: T,
    /// Best competitor outside the basin.
    rival: Option<(usize, usize)>,
}

fn find_peak<T: Real>(curves: &[Curve2<T>], score: impl Fn(C2<T>) -> T) -> Peak<T> {
    let vals: Vec<Vec<T>> = curves.iter().map(|c| c.points().iter().map(|x| score(*x)).collect()).collect();
    let mut best = (T::neg_infinity(), 0, 0);
    let mut lo = T::infinity();
    for (ci, v) in vals.iter().enumerate() {
        for (k, x) in v.iter().enumerate() {
            lo = lo.min(*x);
            if *x > best.0 {
                best = (*x, ci, k);
            }
        }
    }
    let basin = peak_basin(&vals[best.1], best.2, curves[best.1].closed());
    let mut rival = (T::neg_infinity(), None);
    for (ci, v) in vals.iter().enumerate() {
        for (k, x) in v.iter().enumerate() {
            if (ci == best.1 && basin[k]) || !(*x > rival.0) {
                continue;
            }
            rival = (*x, Some((ci, k)));
        }
    }
    let gap = if rival.1.is_some() { best.0 - rival.0 } else { best.0 - lo };
    Peak { curve: best.1, index: best.2, gap, range: best.0 - lo, rival: rival.1 }
}

fn rotation<T: Real>(theta: T) -> Result<HoloMap<T>> {
    let (s, c) = theta.sin_cos();
    let r = |x: T| Complex::new(x, T::zero());
    HoloMap::matrix([[r(c), r(s)], [r(-s), r(c)]])
}

fn diameter<T: Real>(pts: &[C2<T>]) -> T {
    let mut lo = [T::infinity(); 4];
    let mut hi = [T::neg_infinity(); 4];
    for p in pts {
        for (i, v) in p.to_array().iter().enumerate() {
            lo[i] = lo[i].min(*v);
            hi[i] = hi[i].max(*v);
        }
    }
    (0..4).map(|i| (hi[i] - lo[i]).powi(2)).sum::<T>().sqrt()
}

/// Default fiber tube: 1% of the bounding-box diagonal of the samples.
pub fn default_tube<T: Real>(surface: &[C2<T>]) -> T {
    diameter(surface) * T::lit(1e-2)
}

/// Fiber check at `p`: every sample with `|dz| < tube` must have
/// `|dw| < 3 tube (1 + L)`, `L = |w'/z'|` along the boundary.
fn fiber_check<T: Real>(name: &str, surface: &[C2<T>], p: &MarkedPoint<T>, tube: T) -> Check {
    let lip = if p.tangent.z.norm() > T::zero() { p.tangent.w.norm() / p.tangent.z.norm() } else { T::infinity() };
    let allow = T::lit(3.0) * tube * (T::one() + lip);
    let worst = surface
        .par_iter()
        .filter(|s| (s.z - p.point.z).norm() < tube)
        .map(|s| ((allow - (s.w - p.point.w).norm()) / allow, *s))
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    match worst {
        None => Check::passed(name, 1.0, surface.len()),
        Some((m, s)) => Check::from_margin(name, m.as_f64(), surface.len(), vec![c2_arr(p.point), c2_arr(s)]),
    }
}

fn regular_check<T: Real>(name: &str, p: &MarkedPoint<T>, rel: f64) -> Check {
    let r = p.tangent.z.norm() / p.tangent.norm().max(T::min_positive_value());
    Check::from_margin(name, r.as_f64() - rel, 1, vec![c2_arr(p.point), c2_arr(p.tangent)])
}

/// Evaluates one rotation candidate for [`normalize_cord2`].
fn cord2_candidate<T: Real>(
    surface: &[C2<T>],
    curves: &[Curve2<T>],
    dense: Option<&[Curve2<T>]>,
    want: Option<usize>,
    map: &HoloMap<T>,
    tube: Option<T>,
    params: &NormalizeParams,
) -> Result<(bool, MarkedPoint<T>, VerificationReport)> {
    let imgs = curves.iter().map(|c| map_curve2(c, map)).collect::<Result<Vec<_>>>()?;
    let surf = map.eval_all(surface)?;
    let peak = find_peak(&imgs, |x| x.z.re);
    let marked = MarkedPoint {
        point: imgs[peak.curve].points()[peak.index],
        tangent: imgs[peak.curve].tangents()[peak.index],
        curve: peak.curve,
        index: peak.index,
    };
    let n = imgs.iter().map(|c| c.len()).sum();
    let mut r = VerificationReport::new();
    let witness = |p: Option<(usize, usize)>| {
        let mut w = vec![c2_arr(marked.point)];
        w.extend(p.map(|(c, k)| c2_arr(imgs[c].points()[k])));
        w
    };
    if let Some(w) = want {
        let ok = peak.curve == w;
        r.push(Check {
            pass: ok,
            ..Check::passed("peak_curve", if ok { 1.0 } else { -1.0 }, n)
        }.with_detail(format!("peak on curve {} (wanted {w})", peak.curve)));
        if !ok {
            r.checks.last_mut().expect("just pushed").witness = witness(None);
        }
    }
    let gap_tol = T::lit(params.gap_rel) * peak.range;
    r.push(Check::from_margin("peak_gap", (peak.gap - gap_tol).as_f64(), n, witness(peak.rival)));
    // |e^z| = e^{Re z}: its maximum is attained only at the peak basin.
    let cert = T::one() - (-peak.gap).exp();
    r.push(Check::from_margin("exp_certificate", cert.as_f64(), n, witness(peak.rival)));
    let tube = tube.unwrap_or_else(|| default_tube(&surf));
    r.push(fiber_check("fiber", &surf, &marked, tube));
    r.push(regular_check("regular", &marked, params.regular_rel));
    match dense {
        Some(d) => {
            let di = d.iter().map(|c| map_curve2(c, map)).collect::<Result<Vec<_>>>()?;
            let dp = find_peak(&di, |x| x.z.re);
            let moved = di[dp.curve].points()[dp.index].dist(&marked.point);
            let near = dp.curve == peak.curve && moved <= imgs[peak.curve].max_spacing();
            let m = if near { (dp.gap - gap_tol / T::lit(params.refine as f64)).as_f64() } else { -moved.as_f64() };
            r.push(Check::from_margin(
                "peak_refined",
                m,
                di.iter().map(|c| c.len()).sum(),
                vec![c2_arr(marked.point), c2_arr(di[dp.curve].points()[dp.index])],
            ));
        }
        None => r.push(Check::passed("peak_refined", peak.gap.as_f64(), n).with_detail("no parametrization; skipped")),
    }
    Ok((r.all_pass(), marked, r))
}

/// Marks the boundary sample maximizing `Re z`. When that maximum is not
/// isolated with a clean fiber, rotates `(z, w)` by a small real angle,
/// taking the smallest angle that works.
pub fn normalize_cord2<T: Real>(
    surface: &[C2<T>],
    curves: &[Curve2<T>],
    want_curve: Option<usize>,
    params: &NormalizeParams,
) -> Result<NormalizationResult<T>> {
    let dense = refined(curves, params.refine).transpose()?;
    let tube = params.tube.map(T::lit);
    let mut thetas = vec![0.0];
    for j in (0..params.theta_steps).rev() {
        let t = params.theta_max * 0.5f64.powi(j as i32);
        thetas.extend([t, -t]);
    }
    let mut last = None;
    for th in thetas {
        let map = if th == 0.0 { HoloMap::identity() } else { rotation(T::lit(th))? };
        let (ok, marked, mut report) = cord2_candidate(surface, curves, dense.as_deref(), want_curve, &map, tube, params)?;
        if ok {
            let dist = map.distance_from_identity(&[C2::origin()])?;
            report.push(Check::from_margin(
                "near_identity",
                params.identity_bound - dist.as_f64(),
                1,
                vec![[dist.as_f64(), th, 0.0, 0.0]],
            ).with_detail(format!("theta {th:e}")));
            return Ok(NormalizationResult { map, marked: vec![marked], report });
        }
        last = Some(report);
    }
    let detail = last
        .map(|r| r.failures().map(|c| format!("{} ({:e})", c.name, c.margin)).collect::<Vec<_>>().join(", "))
        .unwrap_or_default();
    Err(Error::SearchExhausted { stage: "normalize_cord2", detail })
}

/// Search for [`twist_to_second_boundary`].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct TwistParams {
    /// Target values of `Re h` at the candidate point, log-spaced.
    pub s_min: f64,
    pub s_max: f64,
    pub s_steps: usize,
    /// Candidate anchor points on the second boundary.
    pub anchors: usize,
    /// Required gap in `log |z e^h|`.
    pub log_gap: f64,
}

impl Default for TwistParams {
    fn default() -> Self {
        Self { s_min: 1e-3, s_max: 200.0, s_steps: 64, anchors: 8, log_gap: 1e-6 }
    }
}

/// `log |z e^{h(zw)}|`, `h(u) = c u^2`.
fn twist_log<T: Real>(x: C2<T>, c: Cx<T>) -> T {
    let u = x.z * x.w;
    x.z.norm().ln() + (c * u * u).re
}

fn log_gap<T: Real>(b1: &Curve2<T>, b2: &Curve2<T>, c: Cx<T>) -> (T, usize, usize) {
    let arg = |b: &Curve2<T>| {
        b.points()
            .iter()
            .enumerate()
            .map(|(k, x)| (twist_log(*x, c), k))
            .fold((T::neg_infinity(), 0), |a, b| if b.0 > a.0 { b } else { a })
    };
    let (m1, k1) = arg(b1);
    let (m2, k2) = arg(b2);
    (m2 - m1, k1, k2)
}

/// Finds `c` with `h(u) = c u^2` so that `|z e^{h(zw)}|` peaks on the
/// second boundary, applies the twist and a diagonal phase making that peak
/// real, then marks it with [`normalize_cord2`]. The returned
/// normalization's map includes the twist.
pub fn twist_to_second_boundary<T: Real>(
    surface: &[C2<T>],
    curves: [&Curve2<T>; 2],
    p1: &MarkedPoint<T>,
    params: &TwistParams,
    norm: &NormalizeParams,
) -> Result<(HoloMap<T>, NormalizationResult<T>)> {
    let scale = all_samples(&[curves[0].clone()]).iter().map(|x| x.norm()).fold(T::one(), T::max);
    if !(p1.point.z.norm() <= T::lit(1e-9) * scale) {
        return Err(Error::Precondition(format!("first marked point has z = {}, expected 0", p1.point.z)));
    }
    let [b1, b2] = curves;
    let dense = match (b1.refine(norm.refine), b2.refine(norm.refine)) {
        (Some(a), Some(b)) => Some((a?, b?)),
        _ => None,
    };
    let need = T::lit(params.log_gap);
    let accept = |c: Cx<T>| {
        let (g, _, _) = log_gap(b1, b2, c);
        if !(g > need) {
            return None;
        }
        let dg = match &dense {
            Some((d1, d2)) => log_gap(d1, d2, c).0,
            None => g,
        };
        (dg > need).then_some((g, dg))
    };
    let mut cands = vec![Complex::new(T::zero(), T::zero())];
    let mut order: Vec<(T, C2<T>)> = b2.points().iter().map(|x| ((x.z * x.w).norm(), *x)).collect();
    order.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let steps = params.s_steps.max(2);
    for j in 0..steps {
        let s = params.s_min * (params.s_max / params.s_min).powf(j as f64 / (steps - 1) as f64);
        for (a, x) in order.iter().take(params.anchors) {
            if !(*a > T::zero()) {
                continue;
            }
            let u = x.z * x.w;
            let phi = -(u * u).arg();
            cands.push(Complex::from_polar(T::lit(s) / (*a * *a), phi));
        }
    }
    let found = cands.into_iter().find_map(|c| accept(c).map(|g| (c, g)));
    let (c, (gap, dense_gap)) = found.ok_or_else(|| Error::SearchExhausted {
        stage: "twist_to_second_boundary",
        detail: format!("best log gap without twist {:e}", log_gap(b1, b2, Complex::new(T::zero(), T::zero())).0.as_f64()),
    })?;
    let twist = HoloMap::quadratic_twist(c);

    let tb2 = map_curve2(b2, &twist)?;
    let top = tb2.points().iter().fold(C2::origin(), |a: C2<T>, x| if x.z.norm() > a.z.norm() { *x } else { a });
    let ph = Complex::from_polar(T::one(), -top.z.arg());
    let phase = HoloMap::matrix([[ph, Complex::new(T::zero(), T::zero())], [Complex::new(T::zero(), T::zero()), ph.inv()]])?;
    let pre = twist.clone().then(phase);

    let surf = pre.eval_all(surface)?;
    let tcurves = [map_curve2(b1, &pre)?, map_curve2(b2, &pre)?];
    let mut res = normalize_cord2(&surf, &tcurves, Some(1), norm)?;

    let mut report = VerificationReport::new();
    let n = b1.len() + b2.len();
    report.push(Check::passed("twist_gap", gap.as_f64(), n).with_detail(format!("c = {c}")));
    report.push(Check::passed("twist_gap_refined", dense_gap.as_f64(), n * norm.refine));
    let probe = C2::new(Complex::new(T::zero(), T::zero()), Complex::new(T::one(), T::one()));
    let axis = twist.eval(probe)?;
    report.push(Check::from_margin(
        "twist_axes",
        if axis.z.norm() == T::zero() { 1.0 } else { -axis.z.norm().as_f64() },
        1,
        vec![c2_arr(axis)],
    ));
    report.extend_prefixed("cord2", res.report);
    res.report = report;
    res.map = pre.then(res.map);
    Ok((twist, res))
}

/// Fiber and regularity checks at each marked point, named `fiber@p{i}`
/// and `regular@p{i}`.
pub fn verify_theorem_main_hypotheses<T: Real>(
    surface: &[C2<T>],
    marked: &[MarkedPoint<T>],
    params: &NormalizeParams,
) -> VerificationReport {
    let tube = params.tube.map(T::lit).unwrap_or_else(|| default_tube(surface));
    let mut r = VerificationReport::new();
    for (i, p) in marked.iter().enumerate() {
        let others: Vec<C2<T>> = surface.iter().copied().filter(|s| *s != p.point).collect();
        r.push(fiber_check(&format!("fiber@p{}", i + 1), &others, p, tube));
        r.push(regular_check(&format!("regular@p{}", i + 1), p, params.regular_rel));
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    fn c2(a: C, b: C) -> C2<f64> {
        C2::new(a, b)
    }

    fn unit_circle_graph(n: usize, f: fn(C) -> C) -> Curve2<f64> {
        BoundaryCurve::from_fn(move |t: f64| {
            let z = C::from_polar(1.0, t);
            c2(z, f(z))
        }, 0.0, std::f64::consts::TAU, n, true, 1.0)
        .unwrap()
    }

    fn disc_samples(f: fn(C) -> C) -> Vec<C2<f64>> {
        let mut v = Vec::new();
        for i in 0..60 {
            for j in 0..60 {
                let z = C::new(-1.0 + 2.0 * i as f64 / 59.0, -1.0 + 2.0 * j as f64 / 59.0);
                if z.norm() <= 1.0 {
                    v.push(c2(z, f(z)));
                }
            }
        }
        v
    }

    #[test]
    fn cord1_accepts_identity_when_tangents_clean() {
        let b = unit_circle_graph(400, |z| z * 0.5 + 2.0);
        let r = normalize_cord1(&[b], &NormalizeParams::default()).unwrap();
        assert_eq!(r.map, HoloMap::identity());
        assert!(r.report.all_pass());
    }

    #[test]
    fn cord1_fixes_vanishing_component() {
        // (z, w) = (cos t, e^{it}): z' = -sin t vanishes at 0 and pi.
        let b = BoundaryCurve::from_fn(
            |t: f64| c2(C::new(t.cos(), 0.0), C::from_polar(1.0, t)),
            0.0,
            std::f64::consts::TAU,
            400,
            true,
            1.0,
        )
        .unwrap();
        let r = normalize_cord1(std::slice::from_ref(&b), &NormalizeParams::default()).unwrap();
        let HoloMap::Linear { c1, .. } = r.map else { panic!("expected a linear map") };
        assert!(c1.norm() > 0.0 && c1.norm() <= 0.1);
        // refined oracle: min |mu1 + c1 mu2| on 10x samples
        let dense = b.refine(10).unwrap().unwrap();
        let m = dense.tangents().iter().map(|t| (t.z + c1 * t.w).norm()).fold(f64::INFINITY, f64::min);
        assert!(m > 0.0);
        assert!(r.report.all_pass());
    }

    #[test]
    fn cord1_rejects_singular_curve() {
        let pts: Vec<(f64, C2<f64>)> = (0..10).map(|k| (k as f64, c2(C::new(0.0, 0.0), C::new(0.0, 0.0)))).collect();
        let b = BoundaryCurve::from_samples(pts, false, (0.0, 9.0), 1.0).unwrap();
        assert!(matches!(normalize_cord1(&[b], &NormalizeParams::default()), Err(Error::Precondition(_))));
    }

    #[test]
    fn cord2_identity_on_graph() {
        let f: fn(C) -> C = |z| z * z;
        let b = unit_circle_graph(720, f);
        let r = normalize_cord2(&disc_samples(f), &[b], None, &NormalizeParams::default()).unwrap();
        assert_eq!(r.map, HoloMap::identity());
        let p = r.marked[0];
        assert!((p.point.z - C::new(1.0, 0.0)).norm() < 1e-12);
        assert!(r.report.all_pass(), "{:?}", r.report);
        // dense oracle: second-highest Re z outside the peak neighbourhood
        let dense = unit_circle_graph(7200, f);
        let second = dense
            .points()
            .iter()
            .filter(|x| x.dist(&p.point) > 0.05)
            .map(|x| x.z.re)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(p.point.z.re - second > 0.0);
        let cert = r.report.get("exp_certificate").unwrap();
        assert!(cert.pass && cert.margin > 0.0);
    }

    #[test]
    fn cord2_rotates_flat_top() {
        // Re z constant along an arc: (1 + i s) for s in [-0.3, 0.3]
        let b = BoundaryCurve::from_fn(
            |t: f64| c2(C::new(t.cos().min(0.95), t.sin()), C::new(t.sin(), 0.0)),
            0.0,
            std::f64::consts::TAU,
            720,
            true,
            1.0,
        )
        .unwrap();
        let pts = b.points().to_vec();
        let r = normalize_cord2(&pts, &[b], None, &NormalizeParams::default()).unwrap();
        assert_ne!(r.map, HoloMap::identity());
        assert!(r.report.get("peak_gap").unwrap().pass);
    }

    #[test]
    fn fiber_witness_reported() {
        let p = MarkedPoint { point: c2(C::new(1.0, 0.0), C::new(0.0, 0.0)), tangent: c2(C::new(0.0, 1.0), C::new(0.0, 0.0)), curve: 0, index: 0 };
        let surf = vec![p.point, c2(C::new(1.0, 0.0), C::new(5.0, 0.0)), c2(C::new(0.0, 0.0), C::new(0.0, 0.0))];
        let r = verify_theorem_main_hypotheses(&surf, &[p], &NormalizeParams::default());
        let f = r.get("fiber@p1").unwrap();
        assert!(!f.pass);
        assert_eq!(f.witness[1], [1.0, 0.0, 5.0, 0.0]);
        assert!(r.get("regular@p1").unwrap().pass);
    }

    #[test]
    fn graph_fiber_clean() {
        let f: fn(C) -> C = |z| z * z;
        let p = MarkedPoint { point: c2(C::new(1.0, 0.0), C::new(1.0, 0.0)), tangent: c2(C::new(0.0, 1.0), C::new(0.0, 2.0)), curve: 0, index: 0 };
        let r = verify_theorem_main_hypotheses(&disc_samples(f), &[p], &NormalizeParams::default());
        assert!(r.all_pass(), "{r:?}");
    }

    #[test]
    fn twist_keeps_c_zero_when_second_boundary_dominates() {
        let b1 = BoundaryCurve::from_fn(|t: f64| c2(C::from_polar(0.5, t) - 0.5, C::new(1.0, 0.0)), 0.0, std::f64::consts::TAU, 360, true, 1.0).unwrap();
        let b2 = BoundaryCurve::from_fn(|t: f64| c2(C::from_polar(0.5, t) + 3.0, C::new(-1.0, 0.0)), 0.0, std::f64::consts::TAU, 360, true, 1.0).unwrap();
        let p1 = MarkedPoint { point: b1.points()[0], tangent: b1.tangents()[0], curve: 0, index: 0 };
        let mut surf = b1.points().to_vec();
        surf.extend_from_slice(b2.points());
        let (tw, res) = twist_to_second_boundary(&surf, [&b1, &b2], &p1, &TwistParams::default(), &NormalizeParams::default()).unwrap();
        assert_eq!(tw, HoloMap::quadratic_twist(C::new(0.0, 0.0)));
        assert!(res.report.get("twist_gap").unwrap().pass);
        assert_eq!(res.marked[0].curve, 1);
    }

    #[test]
    fn twist_moves_peak_to_second_boundary() {
        // |z| larger on b1, but |zw| larger on b2
        let b1 = BoundaryCurve::from_fn(|t: f64| c2(C::from_polar(1.0, t) - 1.0, C::new(0.1, 0.0)), 0.0, std::f64::consts::TAU, 360, true, 1.0).unwrap();
        let b2 = BoundaryCurve::from_fn(|t: f64| c2(C::from_polar(0.2, t) + 1.0, C::new(3.0, 0.0)), 0.0, std::f64::consts::TAU, 360, true, 1.0).unwrap();
        let p1 = MarkedPoint { point: b1.points()[0], tangent: b1.tangents()[0], curve: 0, index: 0 };
        let mut surf = b1.points().to_vec();
        surf.extend_from_slice(b2.points());
        let (tw, res) = twist_to_second_boundary(&surf, [&b1, &b2], &p1, &TwistParams::default(), &NormalizeParams::default()).unwrap();
        let HoloMap::Twist { coeffs } = &tw else { panic!() };
        assert!(coeffs[0].norm() > 0.0);
        assert!(res.report.get("twist_axes").unwrap().pass);
        assert!(res.report.get("twist_gap_refined").unwrap().margin > 0.0);
        assert_eq!(res.marked[0].curve, 1);
        // twist fixes z = 0
        let y = tw.eval(c2(C::new(0.0, 0.0), C::new(2.0, -1.0))).unwrap();
        assert_eq!(y.z, C::new(0.0, 0.0));
    }
}
