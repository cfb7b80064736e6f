use serde::{Deserialize, Serialize};

use crate::point::C2;
use crate::scalar::{Cx, Real};

/// One named hypothesis check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// Positive when the check passes; how much room is left.
    pub margin: f64,
    pub samples: usize,
    /// Worst-case points, as `[re z, im z, re w, im w]`. Points of the torus
    /// are stored as `[re, im, 0, 0]`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witness: Vec<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// JSON has no non-finite numbers.
fn finite(m: f64) -> f64 {
    if m.is_nan() {
        f64::MIN
    } else {
        m.clamp(f64::MIN, f64::MAX)
    }
}

impl Check {
    /// Passes iff `margin > 0`. A failing check must carry a witness.
    pub fn from_margin(name: impl Into<String>, margin: f64, samples: usize, witness: Vec<[f64; 4]>) -> Self {
        let pass = margin > 0.0;
        debug_assert!(pass || !witness.is_empty(), "failing check without witness");
        Self { name: name.into(), pass, margin: finite(margin), samples, witness, detail: None }
    }

    pub fn passed(name: impl Into<String>, margin: f64, samples: usize) -> Self {
        Self { name: name.into(), pass: true, margin: finite(margin), samples, witness: Vec::new(), detail: None }
    }

    pub fn failed(name: impl Into<String>, margin: f64, samples: usize, witness: Vec<[f64; 4]>) -> Self {
        debug_assert!(!witness.is_empty(), "failing check without witness");
        Self { name: name.into(), pass: false, margin: finite(margin), samples, witness, detail: None }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

/// Ordered list of checks.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, check: Check) {
        if !check.pass {
            log::warn!("check {} failed (margin {:e})", check.name, check.margin);
        }
        self.checks.push(check);
    }

    /// Appends `other`'s checks with names prefixed by `prefix/`.
    pub fn extend_prefixed(&mut self, prefix: &str, other: VerificationReport) {
        for mut c in other.checks {
            c.name = format!("{prefix}/{}", c.name);
            self.checks.push(c);
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn len(&self) -> usize {
        self.checks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checks.is_empty()
    }
}

pub(crate) fn c2_arr<T: Real>(x: C2<T>) -> [f64; 4] {
    x.to_array().map(|v| v.as_f64())
}

pub(crate) fn cx_arr<T: Real>(z: Cx<T>) -> [f64; 4] {
    [z.re.as_f64(), z.im.as_f64(), 0.0, 0.0]
}
