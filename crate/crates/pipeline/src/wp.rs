use std::path::Path;

use holoembed_core::elliptic::{invariants, Summation, WeierstrassP};
use holoembed_core::embed::{Check, VerificationReport};
use holoembed_core::geometry::Lattice;
use holoembed_core::Cx64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::artifacts::{RunArtifacts, RunReport, Writer};
use crate::config::{config_hash, LatticeSpec};
use crate::error::{Result, StageExt};

/// Values at one point.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct WpValue {
    pub z: Cx64,
    pub wp: Cx64,
    pub wp_prime: Cx64,
}

pub fn wp_eval(lattice: &LatticeSpec, truncation: usize, zs: &[Cx64]) -> Result<Vec<WpValue>> {
    let p = WeierstrassP::with_options(lattice.build()?, truncation, Summation::Rows).stage("wp")?;
    zs.iter()
        .map(|&z| {
            let (wp, wp_prime) = p.eval_with_deriv(z).stage("wp")?;
            Ok(WpValue { z, wp, wp_prime })
        })
        .collect()
}

/// Settings for `wp verify`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WpVerifyConfig {
    pub lattice: LatticeSpec,
    pub truncation: usize,
    /// Truncation of the reference `g2`, `g3`; differs from `truncation`.
    pub invariant_truncation: usize,
    pub points: usize,
    pub targets: usize,
    pub seed: u64,
    pub periodicity_rel: f64,
    pub evenness_rel: f64,
    pub ode_rel: f64,
}

impl Default for WpVerifyConfig {
    fn default() -> Self {
        Self {
            lattice: LatticeSpec::default(),
            truncation: 60,
            invariant_truncation: 23,
            points: 100,
            targets: 100,
            seed: 0,
            periodicity_rel: 1e-6,
            evenness_rel: 1e-10,
            ode_rel: 1e-6,
        }
    }
}

fn random_point(rng: &mut ChaCha8Rng, l: &Lattice<f64>) -> Cx64 {
    loop {
        let z = l.from_coords(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        if l.distance_to_lattice(z) >= 0.1 * l.systole() {
            return z;
        }
    }
}

fn rel(a: Cx64, b: Cx64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Worst value of `f` over the points with its location, as a check with
/// margin `tol - worst`.
fn worst_check(name: &str, zs: &[Cx64], tol: f64, f: impl Fn(Cx64) -> Result<f64>) -> Result<Check> {
    let mut worst = (0.0, zs[0]);
    for &z in zs {
        let e = f(z)?;
        if !(e <= worst.0) {
            worst = (e, z);
        }
    }
    Ok(Check::from_margin(name, tol - worst.0, zs.len(), vec![[worst.1.re, worst.1.im, 0.0, 0.0]])
        .with_detail(format!("worst {:e}", worst.0)))
}

/// Periodicity, evenness, the differential equation and the two-to-one
/// count on seeded random points.
pub fn wp_verify(cfg: &WpVerifyConfig, out: &Path) -> Result<RunArtifacts> {
    let l = cfg.lattice.build()?;
    let p = WeierstrassP::with_options(l, cfg.truncation, Summation::Rows).stage("wp")?;
    let inv = invariants(&l, cfg.invariant_truncation, Summation::Rows).stage("wp")?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let zs: Vec<Cx64> = (0..cfg.points.max(1)).map(|_| random_point(&mut rng, &l)).collect();
    let mut r = VerificationReport::new();

    r.push(worst_check("periodicity", &zs, cfg.periodicity_rel, |z| {
        let base = p.eval(z).stage("wp")?;
        let mut e = 0.0f64;
        for s in [l.omega1(), l.omega2(), -l.omega1() - l.omega2()] {
            e = e.max(rel(p.eval_unreduced(z + s).stage("wp")?, base));
        }
        Ok(e)
    })?);
    r.push(worst_check("evenness", &zs, cfg.evenness_rel, |z| Ok(rel(p.eval(-z).stage("wp")?, p.eval(z).stage("wp")?)))?);
    r.push(worst_check("ode_residual", &zs, cfg.ode_rel, |z| {
        let (w, d) = p.eval_with_deriv(z).stage("wp")?;
        let rhs = w * w * w * 4.0 - inv.g2 * w - inv.g3;
        Ok((d * d - rhs).norm() / (d * d).norm().max((w * w * w).norm()))
    })?);

    let mut bad = None;
    for _ in 0..cfg.targets {
        let w = Cx64::new(rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0));
        let total: u32 = p.preimages(w, 1e-6).stage("preimages")?.iter().map(|q| q.multiplicity).sum();
        if total != 2 && bad.is_none() {
            bad = Some([w.re, w.im, total as f64, 0.0]);
        }
    }
    r.push(Check::from_margin("two_to_one", if bad.is_some() { -1.0 } else { 1.0 }, cfg.targets, bad.into_iter().collect()));
    let mut bad = None;
    // the fourth value, at the pole, is infinite
    for hp in l.half_periods() {
        let pre = p.preimages(p.eval(hp).stage("wp")?, 1e-6).stage("preimages")?;
        let ok = pre.len() == 1 && pre[0].multiplicity == 2 && l.equivalent(pre[0].point.rep(), hp, 1e-6);
        if !ok && bad.is_none() {
            bad = Some([hp.re, hp.im, pre.len() as f64, 0.0]);
        }
    }
    r.push(Check::from_margin("half_period_double", if bad.is_some() { -1.0 } else { 1.0 }, 3, bad.into_iter().collect()));

    let mut w = Writer::new(out, false)?;
    w.json("config.json", cfg)?;
    let mut rr = RunReport::new("wp", config_hash(cfg), r);
    rr.data = serde_json::json!({ "g2": inv.g2, "g3": inv.g3 });
    w.finish(rr)
}
