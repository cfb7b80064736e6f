use std::fmt::Write as _;
use std::path::Path;

use holoembed_core::basin::*;
use holoembed_core::embed::{Check, VerificationReport};
use holoembed_core::C2f64;

use crate::artifacts::{arrays, read_points_csv, RunArtifacts, RunReport, Writer};
use crate::config::{config_hash, BasinConfig};
use crate::error::{PipelineError, Result, StageExt};
use crate::svg::Projection;

fn verdict_row(m: &Membership) -> String {
    match m {
        Membership::Converged { step, rate } => format!("converged,{step},{rate:e}"),
        Membership::Escaped { step } => format!("escaped,{step},"),
        Membership::Undecided => "undecided,,".into(),
    }
}

/// `id,verdict,step,rate`.
pub fn verdicts_csv(ms: &[Membership]) -> String {
    let mut s = String::from("id,verdict,step,rate\n");
    for (i, m) in ms.iter().enumerate() {
        writeln!(s, "{i},{}", verdict_row(m)).unwrap();
    }
    s
}

/// Escape time scaled to `[0, 1]`; bounded orbits are `None`.
fn escape_cells(ms: &[Membership]) -> Vec<Option<f64>> {
    let top = ms.iter().filter_map(|m| if let Membership::Escaped { step } = m { Some(*step) } else { None }).max().unwrap_or(0);
    ms.iter()
        .map(|m| match m {
            Membership::Escaped { step } => Some(*step as f64 / top.max(1) as f64),
            _ => None,
        })
        .collect()
}

fn write_raster(w: &mut Writer, seq: &AutoSequence<f64>, slice: &Slice, q: &BasinQuery<f64>, title: &str) -> Result<Vec<Membership>> {
    let ms = basin_raster(seq, slice, q);
    let mut s = String::from("i,j,re,im,verdict,step,rate\n");
    for j in 0..slice.height {
        for i in 0..slice.width {
            let p: C2f64 = slice.point(i, j);
            let v = p.coord(slice.axis);
            writeln!(s, "{i},{j},{:e},{:e},{}", v.re, v.im, verdict_row(&ms[j * slice.width + i])).unwrap();
        }
    }
    w.text("raster.csv", &s)?;
    w.heatmap("raster.svg", &escape_cells(&ms), slice.width, slice.height, title)?;
    Ok(ms)
}

/// Runs the induction on the model scenario and checks the inductive
/// hypotheses at every step.
pub fn pipeline_basin_demo(cfg: &BasinConfig, out: &Path, svg: bool) -> Result<RunArtifacts> {
    let hash = config_hash(cfg);
    let mut w = Writer::new(out, svg)?;
    w.json("config.json", cfg)?;
    let (v, kj) = model_scenario::<f64>(cfg.v_samples, cfg.k_samples, cfg.seed);
    let mut state = InductionState::new(v.clone(), cfg.induction).stage("induction")?;
    let pusher = ModelPusher::default();
    let mut report = VerificationReport::new();
    for j in 1..=cfg.steps {
        state = fb_induction_step(&state, &kj(j), &pusher).stage("fb_induction_step")?;
        let m = state.history.last().expect("step recorded");
        let n = state.ball.len() + state.k_samples.len();
        report.push(Check::passed(format!("step{j}/b"), m.b, n));
        report.push(Check::passed(format!("step{j}/c"), m.c, state.v_images.len()));
        report.push(Check::passed(format!("step{j}/star"), m.star, state.ball.len()));
        report.push(Check::passed(format!("step{j}/displacement"), m.eps - m.displacement, n));
        report.push(Check::passed(format!("step{j}/expulsion"), m.expulsion - m.radius, state.v_images.len()));
    }

    let seq = state.basin_sequence();
    let mut rates = String::from("set,samples,converged,escaped,undecided,rate_min,rate_mean,rate_max\n");
    for j in 1..=cfg.steps {
        let k = kj(j);
        let ms = basin_membership_all(&seq, &k, &cfg.query);
        let r: Vec<f64> = ms.iter().filter_map(|m| if let Membership::Converged { rate, .. } = m { Some(*rate) } else { None }).collect();
        let esc = ms.iter().filter(|m| matches!(m, Membership::Escaped { .. })).count();
        let (lo, hi) = r.iter().fold((f64::INFINITY, 0.0f64), |a, x| (a.0.min(*x), a.1.max(*x)));
        let mean = r.iter().sum::<f64>() / r.len().max(1) as f64;
        writeln!(rates, "K{j},{},{},{esc},{},{lo:e},{mean:e},{hi:e}", k.len(), r.len(), k.len() - r.len() - esc).unwrap();
        if j == 1 {
            let bad = ms.iter().position(|m| !m.converged());
            let margin = if bad.is_some() { -1.0 } else { 1.0 };
            let witness = bad.map(|i| vec![k[i].to_array()]).unwrap_or_default();
            report.push(Check::from_margin("k1_converged", margin, k.len(), witness).with_detail(format!("{} of {} converged", r.len(), k.len())));
        }
    }
    w.text("rates.csv", &rates)?;
    w.json("margins.json", &state.history)?;
    w.json("sequence.json", &seq)?;
    w.points("v.csv", &v)?;
    w.points("v_images.csv", &state.v_images)?;
    let ki = arrays(&state.k_images);
    let vi = arrays(&state.v_images);
    let groups: [(&str, &[[f64; 4]]); 2] = [("K", &ki), ("V", &vi)];
    w.scatter("images.svg", &groups, Projection::ReZReW, "basin: F(j) images, (Re z, Re w)")?;
    write_raster(&mut w, &seq, &cfg.raster, &cfg.query, "basin: escape time")?;

    let mut rr = RunReport::new("basin", hash, report);
    rr.data = serde_json::json!({ "steps": state.step, "retired": state.retired });
    w.finish(rr)
}

/// Reads a sequence file, revalidating every map.
pub fn load_sequence(path: &Path) -> Result<AutoSequence<f64>> {
    let seq: AutoSequence<f64> = crate::config::load(path)?;
    AutoSequence::new(seq.maps().to_vec(), seq.tail().cloned()).map_err(|e| PipelineError::Input(format!("{}: {e}", path.display())))
}

/// Verdicts for each point of a CSV file, written to `verdicts.csv`.
pub fn basin_trace(seq_path: &Path, points_path: &Path, q: &BasinQuery<f64>, out: &Path) -> Result<Vec<Membership>> {
    let seq = load_sequence(seq_path)?;
    let pts = read_points_csv(points_path)?;
    let ms = basin_membership_all(&seq, &pts, q);
    let mut w = Writer::new(out, false)?;
    w.text("verdicts.csv", &verdicts_csv(&ms))?;
    Ok(ms)
}

/// Escape-time raster of a slice, written as `raster.csv` and `raster.svg`.
pub fn basin_raster_run(seq_path: &Path, slice: &Slice, q: &BasinQuery<f64>, out: &Path, svg: bool) -> Result<Vec<Membership>> {
    let seq = load_sequence(seq_path)?;
    let mut w = Writer::new(out, svg)?;
    write_raster(&mut w, &seq, slice, q, "basin: escape time")
}
