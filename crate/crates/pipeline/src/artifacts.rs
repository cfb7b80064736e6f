use std::fs;
use std::path::{Path, PathBuf};

use holoembed_core::embed::VerificationReport;
use holoembed_core::C2f64;
use serde::{Deserialize, Serialize};

use crate::error::{PipelineError, Result};
use crate::svg::{self, Projection};

/// Top-level report document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub pipeline: String,
    pub config_hash: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<String>,
    pub checks: VerificationReport,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub data: serde_json::Value,
}

impl RunReport {
    pub fn new(pipeline: &str, config_hash: String, checks: VerificationReport) -> Self {
        Self { pipeline: pipeline.into(), config_hash, pass: checks.all_pass() && !checks.is_empty(), branch: None, checks, data: serde_json::Value::Null }
    }
}

/// Files written by a run, and its report.
#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub report: RunReport,
}

/// Writes files into one output directory and remembers them.
pub struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
    svg: bool,
}

impl Writer {
    pub fn new(dir: &Path, svg: bool) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new(), svg })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let p = self.path(name);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent).map_err(|e| PipelineError::io(parent, e))?;
        }
        fs::write(&p, body).map_err(|e| PipelineError::io(&p, e))?;
        self.files.push(p);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value).expect("serializable");
        s.push('\n');
        self.text(name, &s)
    }

    /// `id,re_z,im_z,re_w,im_w`.
    pub fn points(&mut self, name: &str, pts: &[C2f64]) -> Result<()> {
        self.text(name, &points_csv(pts))
    }

    pub fn scatter(&mut self, name: &str, groups: &[(&str, &[[f64; 4]])], proj: Projection, title: &str) -> Result<()> {
        if !self.svg {
            return Ok(());
        }
        match svg::scatter(groups, proj, title) {
            Some(s) => self.text(name, &s),
            None => Ok(()),
        }
    }

    pub fn heatmap(&mut self, name: &str, cells: &[Option<f64>], w: usize, h: usize, title: &str) -> Result<()> {
        if !self.svg {
            return Ok(());
        }
        match svg::heatmap(cells, w, h, title) {
            Some(s) => self.text(name, &s),
            None => Ok(()),
        }
    }

    pub fn finish(mut self, report: RunReport) -> Result<RunArtifacts> {
        self.json("report.json", &report)?;
        Ok(RunArtifacts { dir: self.dir, files: self.files, report })
    }
}

pub fn points_csv(pts: &[C2f64]) -> String {
    let mut s = String::from("id,re_z,im_z,re_w,im_w\n");
    for (i, p) in pts.iter().enumerate() {
        s.push_str(&format!("{i},{:e},{:e},{:e},{:e}\n", p.z.re, p.z.im, p.w.re, p.w.im));
    }
    s
}

/// Reads the CSV written by [`points_csv`]; the id column is ignored.
pub fn read_points_csv(path: &Path) -> Result<Vec<C2f64>> {
    let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if n == 0 && line.starts_with("id") || line.trim().is_empty() {
            continue;
        }
        let f: Vec<f64> = line
            .split(',')
            .skip(1)
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| PipelineError::Input(format!("{}:{}: {e}", path.display(), n + 1)))?;
        if f.len() != 4 {
            return Err(PipelineError::Input(format!("{}:{}: expected 5 columns", path.display(), n + 1)));
        }
        out.push(C2f64::from_parts(f[0], f[1], f[2], f[3]));
    }
    Ok(out)
}

pub fn arrays(pts: &[C2f64]) -> Vec<[f64; 4]> {
    pts.iter().map(|p| p.to_array()).collect()
}
