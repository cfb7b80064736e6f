use std::fs;
use std::path::Path;

use holoembed_core::elliptic::{Summation, WeierstrassP};
use holoembed_core::embed::*;
use holoembed_core::geometry::Removed;
use holoembed_core::maps::HoloMap;
use holoembed_core::{C2f64, Cx64, Error};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::artifacts::{arrays, RunArtifacts, RunReport, Writer};
use crate::config::{config_hash, TorusConfig};
use crate::error::{PipelineError, Result, StageExt};
use crate::svg::Projection;

/// Surface samples and boundary curves with the maps applied so far.
struct Chain {
    input: Vec<C2f64>,
    maps: Vec<HoloMap<f64>>,
    surf: Vec<C2f64>,
    curves: Vec<Curve2<f64>>,
}

impl Chain {
    fn apply(&mut self, m: HoloMap<f64>, stage: &'static str) -> Result<()> {
        self.surf = m.eval_all(&self.surf).stage(stage)?;
        self.curves = self.curves.iter().map(|c| map_curve2(c, &m)).collect::<holoembed_core::Result<_>>().stage(stage)?;
        self.maps.push(m);
        Ok(())
    }

    fn marked(&self, curve: usize, index: usize) -> MarkedPoint<f64> {
        let c = &self.curves[curve];
        MarkedPoint { point: c.points()[index], tangent: c.tangents()[index], curve, index }
    }
}

#[derive(Serialize, Deserialize)]
struct GridCheckpoint {
    key: String,
    images: Vec<[f64; 4]>,
}

/// `psi` on the grid, reusing `checkpoint/grid.json` when it was written
/// for the same embedding and grid.
fn grid_images(w: &mut Writer, psi: &EmbeddingMap<f64>, grid: &[Cx64], key_src: &impl Serialize) -> Result<Vec<C2f64>> {
    let key = config_hash(&(psi, key_src));
    let path = w.path("checkpoint/grid.json");
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(cp) = serde_json::from_str::<GridCheckpoint>(&text) {
            if cp.key == key && cp.images.len() == grid.len() {
                log::info!("reusing grid checkpoint {}", path.display());
                return Ok(cp.images.iter().map(|a| C2f64::from_parts(a[0], a[1], a[2], a[3])).collect());
            }
        }
    }
    let images = psi.eval_all(grid).stage("embed")?;
    w.json("checkpoint/grid.json", &GridCheckpoint { key, images: arrays(&images) })?;
    Ok(images)
}

/// Minimum of `|psi|` on circles of radius `r0 2^-j` about `c` must grow by
/// a factor of at least 1.8 per halving.
fn properness(name: &str, psi: &EmbeddingMap<f64>, c: Cx64, r0: f64, halvings: usize) -> Check {
    let mins: Vec<(f64, Cx64)> = (0..=halvings)
        .map(|j| {
            let r = r0 * 0.5f64.powi(j as i32);
            (0..64)
                .map(|k| c + Complex::from_polar(r, std::f64::consts::TAU * (k as f64 + 0.5) / 64.0))
                .map(|z| (psi.eval(z).map_or(f64::INFINITY, |v| v.norm()), z))
                .fold((f64::INFINITY, c), |a, b| if b.0 < a.0 { b } else { a })
        })
        .collect();
    let (ratio, at) = mins
        .windows(2)
        .map(|w| (w[1].0 / w[0].0, w[1].1))
        .fold((f64::INFINITY, c), |a, b| if b.0 < a.0 { b } else { a });
    Check::from_margin(name, ratio - 1.8, 64 * (halvings + 1), vec![[at.re, at.im, 0.0, 0.0]])
        .with_detail(format!("worst growth per halving {ratio:.3}"))
}

fn immersion(psi: &EmbeddingMap<f64>, grid: &[Cx64]) -> Check {
    let (m, at) = grid
        .iter()
        .map(|z| (psi.derivative(*z).map_or(0.0, |d| d.norm()), *z))
        .fold((f64::INFINITY, Cx64::new(0.0, 0.0)), |a, b| if b.0 < a.0 { b } else { a });
    Check::from_margin("immersion", m - 1e-8, grid.len(), vec![[at.re, at.im, 0.0, 0.0]])
}

fn embedding_auto(t: &TorusSurface<f64>, wp: &WeierstrassP<f64>, p: Cx64, q: Cx64) -> Result<EmbeddingMap<f64>> {
    match build_embedding(t, wp, p, q) {
        Err(Error::DegeneratePair) => build_embedding_degenerate(t, wp, p, q).stage("embed"),
        r => r.stage("embed"),
    }
}

fn boundary_images(t: &TorusSurface<f64>, psi: &EmbeddingMap<f64>, samples: &[usize]) -> Result<Vec<Curve2<f64>>> {
    samples
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let b = t.boundary_with(i, *n).stage("boundary")?;
            let m = *psi;
            map_curve(&b, move |z| m.eval(z)).stage("boundary")
        })
        .collect()
}

/// Runs the torus construction for two removed regions and writes its
/// artifacts to `out`.
pub fn pipeline_torus2(cfg: &TorusConfig, out: &Path, svg: bool) -> Result<RunArtifacts> {
    let hash = config_hash(cfg);
    let mut w = Writer::new(out, svg)?;
    w.json("config.json", cfg)?;
    let l = cfg.lattice.build()?;
    if cfg.removed.len() != 2 {
        return Err(PipelineError::Config(format!("torus2 needs 2 removed regions, got {}", cfg.removed.len())));
    }
    let mut removed = cfg.removed.iter().map(|r| r.build(l)).collect::<Result<Vec<_>>>()?;
    // the disc comes first in the disc + point case
    if removed[0].is_point() && !removed[1].is_point() {
        removed.swap(0, 1);
    }
    let t = TorusSurface::new(l, removed.clone(), cfg.boundary_samples).stage("surface")?;
    let wp = WeierstrassP::with_options(l, cfg.truncation, Summation::Rows).stage("wp")?;
    let grid = t.grid(cfg.density, cfg.margin).stage("grid")?;
    let mut report = VerificationReport::new();

    let (branch, psi, chain, marked, data) = match (&removed[0], &removed[1]) {
        (Removed::Point { point: p }, Removed::Point { point: q }) => {
            let psi = EmbeddingMap::auto(wp, p.rep(), q.rep()).stage("embed")?;
            let surf = grid_images(&mut w, &psi, grid.points(), &(&grid.points().len(), cfg.density, cfg.margin))?;
            let r0 = cfg.proper_radius.min(0.25 * p.distance(q));
            report.push(properness("hypotheses/properness@p1", &psi, p.rep(), r0, cfg.proper_halvings));
            report.push(properness("hypotheses/properness@p2", &psi, q.rep(), r0, cfg.proper_halvings));
            report.push(immersion(&psi, grid.points()).with_detail("min |psi'| on the grid"));
            let chain = Chain { input: surf.clone(), maps: Vec::new(), surf, curves: Vec::new() };
            ("two_points", psi, chain, Vec::new(), serde_json::json!({ "kind": psi.kind() }))
        }
        (Removed::Disc { .. }, Removed::Disc { .. }) => two_discs(cfg, &t, &wp, &grid, &mut w, &mut report)?,
        (Removed::Disc { .. }, Removed::Point { point: q }) => disc_point(cfg, &t, &wp, q.rep(), &grid, &mut w, &mut report)?,
        _ => unreachable!("regions reordered above"),
    };

    let inj = verify_injectivity(&psi, &grid, &cfg.injectivity);
    report.extend_prefixed("injectivity", inj);
    if !marked.is_empty() {
        report.extend_prefixed("hypotheses", verify_theorem_main_hypotheses(&chain.surf, &marked, &cfg.normalize));
    }

    w.json("embedding.json", &psi)?;
    w.points("input.csv", &chain.input)?;
    w.points("surface.csv", &chain.surf)?;
    for (i, c) in chain.curves.iter().enumerate() {
        w.points(&format!("boundary_{i}.csv"), c.points())?;
    }
    w.json("maps.json", &chain.maps)?;
    w.json("marked.json", &marked)?;
    let surf = arrays(&chain.surf);
    let bounds: Vec<Vec<[f64; 4]>> = chain.curves.iter().map(|c| arrays(c.points())).collect();
    let marks: Vec<[f64; 4]> = marked.iter().map(|m| m.point.to_array()).collect();
    let mut groups: Vec<(&str, &[[f64; 4]])> = vec![("surface", &surf)];
    for b in &bounds {
        groups.push(("boundary", b));
    }
    groups.push(("marked", &marks));
    w.scatter("surface_z.svg", &groups, Projection::ZPlane, &format!("torus2 {branch}: (Re z, Im z)"))?;
    w.scatter("surface_zw.svg", &groups, Projection::ReZReW, &format!("torus2 {branch}: (Re z, Re w)"))?;

    let mut rr = RunReport::new("torus2", hash, report);
    rr.branch = Some(branch.into());
    rr.data = data;
    w.finish(rr)
}

type Branch = (&'static str, EmbeddingMap<f64>, Chain, Vec<MarkedPoint<f64>>, serde_json::Value);

fn two_discs(
    cfg: &TorusConfig,
    t: &TorusSurface<f64>,
    wp: &WeierstrassP<f64>,
    grid: &holoembed_core::geometry::SampleGrid<f64>,
    w: &mut Writer,
    report: &mut VerificationReport,
) -> Result<Branch> {
    let pq = choose_pq_for_discs(t, wp, &cfg.pq).stage("choose_pq")?;
    for (name, m) in [
        ("pq/norm_gap", pq.norm_gap),
        ("pq/g_bound_gap", pq.g_bound_gap),
        ("pq/product_gap", pq.product_gap),
        ("pq/boundary_max_gap", pq.boundary_max_gap),
    ] {
        report.push(Check::from_margin(name, m, cfg.boundary_samples * 2, vec![[pq.p.re, pq.p.im, pq.q.re, pq.q.im]]));
    }
    let psi = embedding_auto(t, wp, pq.p, pq.q)?;
    let surf = grid_images(w, &psi, grid.points(), &(grid.points().len(), cfg.density, cfg.margin))?;
    let curves = boundary_images(t, &psi, &[cfg.boundary_samples, cfg.boundary_samples])?;
    let mut chain = Chain { input: surf.clone(), maps: Vec::new(), surf, curves };

    let c1 = normalize_cord1(&chain.curves, &cfg.normalize).stage("normalize_cord1")?;
    report.extend_prefixed("cord1", c1.report);
    chain.apply(c1.map, "normalize_cord1")?;
    let c2 = normalize_cord2(&chain.surf, &chain.curves, Some(0), &cfg.normalize).stage("normalize_cord2")?;
    report.extend_prefixed("cord2", c2.report);
    let i1 = c2.marked[0].index;
    chain.apply(c2.map, "normalize_cord2")?;
    let z1 = chain.curves[0].points()[i1].z;
    chain.apply(HoloMap::translation(C2f64::new(-z1, Complex::new(0.0, 0.0))).stage("translate")?, "translate")?;
    let p1 = chain.marked(0, i1);
    let (tw, res) = twist_to_second_boundary(&chain.surf, [&chain.curves[0], &chain.curves[1]], &p1, &cfg.twist, &cfg.normalize)
        .stage("twist_to_second_boundary")?;
    report.extend_prefixed("twist", res.report);
    let i2 = res.marked[0].index;
    chain.apply(res.map, "twist_to_second_boundary")?;
    let marked = vec![chain.marked(0, i1), chain.marked(1, i2)];
    let data = serde_json::json!({ "kind": psi.kind(), "pq": pq, "twist": tw });
    Ok(("two_discs", psi, chain, marked, data))
}

fn disc_point(
    cfg: &TorusConfig,
    t: &TorusSurface<f64>,
    wp: &WeierstrassP<f64>,
    q: Cx64,
    grid: &holoembed_core::geometry::SampleGrid<f64>,
    w: &mut Writer,
    report: &mut VerificationReport,
) -> Result<Branch> {
    let pr = puncture_max_locator(t, wp, &cfg.puncture).stage("puncture_max_locator")?;
    report.extend_prefixed("puncture", pr.report.clone());
    let psi = EmbeddingMap::auto(*wp, pr.p_delta, q).stage("embed")?;
    let surf = grid_images(w, &psi, grid.points(), &(grid.points().len(), cfg.density, cfg.margin))?;
    let curves = boundary_images(t, &psi, &[pr.boundary_samples])?;
    let mut chain = Chain { input: surf.clone(), maps: Vec::new(), surf, curves };

    let c1 = normalize_cord1(&chain.curves, &cfg.normalize).stage("normalize_cord1")?;
    report.extend_prefixed("cord1", c1.report);
    chain.apply(c1.map, "normalize_cord1")?;
    // make the largest |z| on the boundary real and positive
    let top = chain.curves[0].points().iter().fold(C2f64::origin(), |a, x| if x.z.norm() > a.z.norm() { *x } else { a });
    let ph = Complex::from_polar(1.0, -top.z.arg());
    let zero = Complex::new(0.0, 0.0);
    chain.apply(HoloMap::matrix([[ph, zero], [zero, ph.inv()]]).stage("phase")?, "phase")?;
    let c2 = normalize_cord2(&chain.surf, &chain.curves, Some(0), &cfg.normalize).stage("normalize_cord2")?;
    report.extend_prefixed("cord2", c2.report);
    let i1 = c2.marked[0].index;
    chain.apply(c2.map, "normalize_cord2")?;

    let b = t.boundary_with(0, pr.boundary_samples).stage("boundary")?;
    let xm = b.points()[i1];
    let off = (xm - pr.x_star).norm();
    report.push(Check::from_margin(
        "puncture/marked_is_x_star",
        2.0 * b.max_spacing() - off,
        1,
        vec![[xm.re, xm.im, pr.x_star.re, pr.x_star.im]],
    ));
    let r0 = cfg.proper_radius.min(0.25 * t.lattice().torus_distance(q, pr.p_delta));
    report.push(properness("hypotheses/properness@q", &psi, q, r0, cfg.proper_halvings));
    let marked = vec![chain.marked(0, i1)];
    let data = serde_json::json!({
        "kind": psi.kind(),
        "p_delta": pr.p_delta,
        "x_star": pr.x_star,
        "r": pr.r,
        "k": pr.k,
        "delta": pr.delta,
        "c_estimates": pr.c_estimates,
    });
    Ok(("disc_point", psi, chain, marked, data))
}
