use std::path::Path;

use holoembed_core::embed::*;
use holoembed_core::geometry::BoundaryCurve;
use holoembed_core::{C2f64, Cx64, Error};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::artifacts::{arrays, RunArtifacts, RunReport, Writer};
use crate::config::config_hash;
use crate::error::{PipelineError, Result, StageExt};
use crate::svg::Projection;

/// Input for `jordan`: explicit samples, or a polynomial graph `w = f(z)`
/// over the closed unit disc.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceSpec {
    /// Rows are `[re z, im z, re w, im w]`; `boundary` is one closed curve in
    /// parameter order.
    Samples { surface: Vec<[f64; 4]>, boundary: Vec<[f64; 4]> },
    Graph {
        /// `f(z) = sum coeffs[k] z^k`.
        coeffs: Vec<Cx64>,
        #[serde(default = "default_boundary_samples")]
        boundary_samples: usize,
        #[serde(default = "default_density")]
        density: f64,
        /// Cuts the disc at `Re z <= a`, so the top of `Re z` is a segment.
        #[serde(default)]
        flat_top: Option<f64>,
    },
}

fn default_boundary_samples() -> usize {
    720
}

fn default_density() -> f64 {
    0.02
}

/// A `jordan` run: the surface plus normalization settings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JordanConfig {
    #[serde(flatten)]
    pub surface: SurfaceSpec,
    #[serde(default)]
    pub normalize: NormalizeParams,
}

fn horner(c: &[Cx64], z: Cx64) -> Cx64 {
    c.iter().rev().fold(Complex::new(0.0, 0.0), |a, k| a * z + k)
}

impl SurfaceSpec {
    /// Surface samples and the boundary curve.
    pub fn build(&self) -> Result<(Vec<C2f64>, Curve2<f64>)> {
        match self {
            SurfaceSpec::Samples { surface, boundary } => {
                if surface.is_empty() {
                    return Err(PipelineError::Input("no surface samples".into()));
                }
                let pts: Vec<C2f64> = boundary.iter().map(|a| C2f64::from_parts(a[0], a[1], a[2], a[3])).collect();
                let n = pts.len();
                let gap = (0..n).map(|k| pts[k].dist(&pts[(k + 1) % n])).fold(0.0, f64::max);
                let samples = pts.into_iter().enumerate().map(|(k, p)| (k as f64 / n as f64, p)).collect();
                let curve = BoundaryCurve::from_samples(samples, true, (0.0, 1.0), 2.0 * gap).stage("surface")?;
                Ok((surface.iter().map(|a| C2f64::from_parts(a[0], a[1], a[2], a[3])).collect(), curve))
            }
            SurfaceSpec::Graph { coeffs, boundary_samples, density, flat_top } => {
                if !(*density > 0.0) {
                    return Err(PipelineError::Input(format!("density must be positive, got {density}")));
                }
                let a = flat_top.unwrap_or(1.0);
                if !(a > 0.0 && a <= 1.0) {
                    return Err(PipelineError::Input(format!("flat_top must lie in (0, 1], got {a}")));
                }
                let c = coeffs.clone();
                let edge = move |t: f64| {
                    let z = Complex::new(t.cos().min(a), t.sin());
                    C2f64::new(z, horner(&c, z))
                };
                let n = *boundary_samples;
                let lip = 1.0 + coeffs.iter().enumerate().map(|(k, c)| k as f64 * c.norm()).sum::<f64>();
                let spacing = 1.01 * lip * std::f64::consts::TAU / n as f64;
                let curve = BoundaryCurve::from_fn(edge, 0.0, std::f64::consts::TAU, n, true, spacing).stage("surface")?;
                let m = (1.0 / density).ceil() as i64;
                let mut surf = Vec::new();
                for i in -m..=m {
                    for j in -m..=m {
                        let z = Complex::new(i as f64 * density, j as f64 * density);
                        if z.norm() <= 1.0 && z.re <= a {
                            surf.push(C2f64::new(z, horner(coeffs, z)));
                        }
                    }
                }
                surf.extend_from_slice(curve.points());
                Ok((surf, curve))
            }
        }
    }
}

fn apply(m: &holoembed_core::maps::HoloMap<f64>, surf: &mut Vec<C2f64>, curve: &mut Curve2<f64>, stage: &'static str) -> Result<()> {
    *surf = m.eval_all(surf).stage(stage)?;
    *curve = map_curve2(curve, m).stage(stage)?;
    Ok(())
}

/// Marks one point of a smooth Jordan boundary and verifies the hypotheses
/// there. When no rotation isolates a clean peak, the unrotated `Re z` peak
/// is checked instead so the report carries the failing witness.
pub fn pipeline_jordan(cfg: &JordanConfig, out: &Path, svg: bool) -> Result<RunArtifacts> {
    let hash = config_hash(cfg);
    let mut w = Writer::new(out, svg)?;
    w.json("config.json", cfg)?;
    let (mut surf, mut curve) = cfg.surface.build()?;
    w.points("input.csv", &surf)?;
    let mut report = VerificationReport::new();
    let mut maps = Vec::new();

    let c1 = normalize_cord1(std::slice::from_ref(&curve), &cfg.normalize).stage("normalize_cord1")?;
    report.extend_prefixed("cord1", c1.report);
    apply(&c1.map, &mut surf, &mut curve, "normalize_cord1")?;
    maps.push(c1.map);

    let marked = match normalize_cord2(&surf, std::slice::from_ref(&curve), None, &cfg.normalize) {
        Ok(c2) => {
            report.extend_prefixed("cord2", c2.report);
            let k = c2.marked[0].index;
            apply(&c2.map, &mut surf, &mut curve, "normalize_cord2")?;
            maps.push(c2.map);
            MarkedPoint { point: curve.points()[k], tangent: curve.tangents()[k], curve: 0, index: k }
        }
        Err(Error::SearchExhausted { detail, .. }) => {
            let k = (0..curve.len()).fold(0, |b, k| if curve.points()[k].z.re > curve.points()[b].z.re { k } else { b });
            let p = curve.points()[k];
            report.push(Check::failed("cord2/search", -1.0, curve.len(), vec![p.to_array()]).with_detail(detail));
            MarkedPoint { point: p, tangent: curve.tangents()[k], curve: 0, index: k }
        }
        Err(e) => return Err(PipelineError::Stage { stage: "normalize_cord2", source: e }),
    };
    report.extend_prefixed("hypotheses", verify_theorem_main_hypotheses(&surf, &[marked], &cfg.normalize));

    w.points("surface.csv", &surf)?;
    w.points("boundary_0.csv", curve.points())?;
    w.json("maps.json", &maps)?;
    w.json("marked.json", &[marked])?;
    let s = arrays(&surf);
    let b = arrays(curve.points());
    let m = [marked.point.to_array()];
    let groups: [(&str, &[[f64; 4]]); 3] = [("surface", &s), ("boundary", &b), ("marked", &m)];
    w.scatter("surface_z.svg", &groups, Projection::ZPlane, "jordan: (Re z, Im z)")?;
    w.scatter("surface_zw.svg", &groups, Projection::ReZReW, "jordan: (Re z, Re w)")?;
    w.finish(RunReport::new("jordan", hash, report))
}
