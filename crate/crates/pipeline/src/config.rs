use std::fs;
use std::path::{Path, PathBuf};

use holoembed_core::basin::{BasinQuery, InductionParams, Slice};
use holoembed_core::embed::{InjectivityParams, NormalizeParams, PqParams, PunctureParams, TwistParams};
use holoembed_core::geometry::{Lattice, Removed};
use holoembed_core::Cx64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{PipelineError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub omega1: Cx64,
    pub omega2: Cx64,
}

impl Default for LatticeSpec {
    fn default() -> Self {
        Self { omega1: Cx64::new(1.0, 0.0), omega2: Cx64::new(0.0, 1.0) }
    }
}

impl LatticeSpec {
    pub fn build(&self) -> Result<Lattice<f64>> {
        Ok(Lattice::new(self.omega1, self.omega2)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionSpec {
    Disc { center: Cx64, radius: f64 },
    Point { at: Cx64 },
}

impl RegionSpec {
    pub fn build(&self, l: Lattice<f64>) -> Result<Removed<f64>> {
        Ok(match self {
            RegionSpec::Disc { center, radius } => Removed::disc(*center, *radius, l)?,
            RegionSpec::Point { at } => Removed::point(*at, l),
        })
    }
}

/// Settings for `torus2`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TorusConfig {
    pub lattice: LatticeSpec,
    pub removed: Vec<RegionSpec>,
    /// Grid spacing on the torus.
    pub density: f64,
    /// Distance kept from removed regions.
    pub margin: f64,
    pub boundary_samples: usize,
    pub seed: u64,
    /// Truncation of the Weierstrass engine.
    pub truncation: usize,
    pub pq: PqParams<f64>,
    pub injectivity: InjectivityParams<f64>,
    pub normalize: NormalizeParams,
    pub twist: TwistParams,
    pub puncture: PunctureParams,
    /// Properness probe: first radius and number of halvings.
    pub proper_radius: f64,
    pub proper_halvings: usize,
}

impl Default for TorusConfig {
    fn default() -> Self {
        Self {
            lattice: LatticeSpec::default(),
            removed: vec![
                RegionSpec::Disc { center: Cx64::new(-0.25, 0.0), radius: 0.12 },
                RegionSpec::Disc { center: Cx64::new(0.25, 0.1), radius: 0.12 },
            ],
            density: 0.01,
            margin: 0.005,
            boundary_samples: 720,
            seed: 0,
            truncation: 60,
            pq: PqParams::default(),
            injectivity: InjectivityParams::default(),
            normalize: NormalizeParams::default(),
            twist: TwistParams::default(),
            puncture: PunctureParams::default(),
            proper_radius: 0.05,
            proper_halvings: 5,
        }
    }
}

/// Settings for the basin demo.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasinConfig {
    pub steps: usize,
    pub seed: u64,
    pub v_samples: usize,
    pub k_samples: usize,
    pub induction: InductionParams,
    pub query: BasinQuery<f64>,
    pub raster: Slice,
}

impl Default for BasinConfig {
    fn default() -> Self {
        Self {
            steps: 5,
            seed: 0,
            v_samples: 400,
            k_samples: 1000,
            induction: InductionParams::default(),
            query: BasinQuery::default(),
            raster: Slice { axis: 0, fixed: [0.0, 0.0], window: [-4.0, 4.0, -4.0, 4.0], width: 100, height: 100 },
        }
    }
}

/// Overrides from the command line.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub density: Option<f64>,
}

impl TorusConfig {
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
            self.normalize.seed = s;
        }
        if let Some(d) = o.density {
            self.density = d;
        }
    }
}

impl BasinConfig {
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
            self.induction.seed = s;
        }
    }
}

pub fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
}

/// sha256 of the canonical JSON form.
pub fn config_hash<T: Serialize>(cfg: &T) -> String {
    let bytes = serde_json::to_vec(cfg).expect("config serializes");
    hex::encode(Sha256::digest(bytes))
}

/// Output directory: `--out` when given, else `default`.
pub fn out_dir(out: Option<&Path>, default: &str) -> PathBuf {
    out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(default))
}
