// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! File formats shared with downstream tooling: versioned CSV tables and the
//! circuit JSON document.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::compiler::{CirculantGauge, EigenPath, GateCount, OTACircuit};
use crate::models::Theory;

/// First line of every CSV file.
pub const SCHEMA_HEADER: &str = "# ota-sim schema v1";

/// Prediction curve kinds in `predictions.csv`.
pub const KIND_S2_INF: &str = "S2_inf";
pub const KIND_S2_FIN: &str = "S2_fin";
pub const KIND_I2_INF: &str = "I2_inf";
pub const KIND_I2_FIN: &str = "I2_fin";

/// First 16 hex digits of the SHA-256 of `bytes`.
pub fn params_hash(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().take(8).fold(String::with_capacity(16), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Formats a float for CSV output; non-finite values become `nan`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        "nan".to_string()
    }
}

/// Renders a CSV table with the schema header.
pub fn render_csv(columns: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(SCHEMA_HEADER);
    out.push('\n');
    out.push_str(&columns.join(","));
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv(path: &Path, columns: &[&str], rows: &[Vec<String>]) -> std::io::Result<()> {
    fs::write(path, render_csv(columns, rows))
}

/// Parses a schema v1 CSV into its column names and rows.
pub fn read_csv(text: &str) -> Option<(Vec<String>, Vec<Vec<String>>)> {
    let mut lines = text.lines();
    if lines.next()? != SCHEMA_HEADER {
        return None;
    }
    let cols = lines.next()?.split(',').map(str::to_string).collect();
    let rows = lines
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    Some((cols, rows))
}

/// Circuit metadata stored next to the parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitMetadata {
    pub schema: String,
    pub theory: Theory,
    pub epsilon: f64,
    pub gamma: Vec<f64>,
    pub gate_count: GateCount,
    pub gate_total: usize,
    pub sign_flag: i8,
    pub zero_modes: Vec<usize>,
    pub eigen_path: EigenPath,
    pub gauge: CirculantGauge,
    pub max_abs_z: f64,
    pub max_abs_z_mode: usize,
}

/// JSON form of a compiled circuit; `P` is row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitDocument {
    #[serde(rename = "N")]
    pub n: usize,
    pub d: Vec<f64>,
    pub z: Vec<f64>,
    pub theta: Vec<f64>,
    #[serde(rename = "P")]
    pub p: Vec<f64>,
    pub metadata: CircuitMetadata,
}

impl From<&OTACircuit<f64>> for CircuitDocument {
    fn from(c: &OTACircuit<f64>) -> Self {
        let (zmax, zmode) = c.max_squeezing();
        let gc = c.gate_count();
        Self {
            n: c.n,
            d: c.d.clone(),
            z: c.z.clone(),
            theta: c.theta.clone(),
            p: c.p.transpose().iter().copied().collect(),
            metadata: CircuitMetadata {
                schema: "ota-sim circuit v1".into(),
                theory: c.theory.clone(),
                epsilon: c.epsilon,
                gamma: c.gamma.clone(),
                gate_count: gc,
                gate_total: gc.total(),
                sign_flag: c.sign_flag,
                zero_modes: c.zero_modes.clone(),
                eigen_path: c.path,
                gauge: c.gauge,
                max_abs_z: zmax,
                max_abs_z_mode: zmode,
            },
        }
    }
}
