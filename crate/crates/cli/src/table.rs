//! JSON mode tables, with a CSV export.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use modal_core::{Mode, ModeSet, Source};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::fsutil::write_text;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub sample_rate: f64,
    /// Pipeline that produced the modes: plain, warped, merged, subband,
    /// optimized.
    pub source: String,
    /// Settings that produced the table, by name.
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub omega_rad_per_sample: f64,
    pub freq_hz: f64,
    pub alpha_per_sample: f64,
    /// `None` for undamped modes.
    pub t60_seconds: Option<f64>,
    pub gamma_s: f64,
    pub gamma_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeTableFile {
    pub header: Header,
    pub rows: Vec<Row>,
}

impl ModeTableFile {
    pub fn from_modes(modes: &ModeSet, params: BTreeMap<String, serde_json::Value>) -> Self {
        let fs = modes.sample_rate();
        let rows = modes
            .iter()
            .map(|m| {
                let t60 = m.t60_seconds(fs);
                Row {
                    omega_rad_per_sample: m.omega(),
                    freq_hz: m.frequency_hz(fs),
                    alpha_per_sample: m.alpha(),
                    t60_seconds: t60.is_finite().then_some(t60),
                    gamma_s: m.gamma_s(),
                    gamma_c: m.gamma_c(),
                }
            })
            .collect();
        Self {
            header: Header {
                sample_rate: fs,
                source: modes.source().name().to_string(),
                params,
            },
            rows,
        }
    }

    /// Rebuilds the mode set from the per-sample columns.
    pub fn to_modes(&self) -> Result<ModeSet> {
        let source = Source::from_name(&self.header.source)
            .ok_or_else(|| CliError::input(format!("unknown mode source '{}'", self.header.source)))?;
        let mut modes = Vec::with_capacity(self.rows.len());
        for (i, r) in self.rows.iter().enumerate() {
            let mode = Mode::new(r.omega_rad_per_sample, r.alpha_per_sample, r.gamma_s, r.gamma_c)
                .map_err(|e| CliError::input(format!("row {}: {e}", i + 1)))?;
            modes.push(mode.with_amplitudes(r.gamma_s, r.gamma_c));
        }
        Ok(ModeSet::new(modes, source, self.header.sample_rate)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let table: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        if !(table.header.sample_rate.is_finite() && table.header.sample_rate > 0.0) {
            return Err(CliError::input(format!(
                "{}: invalid sample rate {}",
                path.display(),
                table.header.sample_rate
            )));
        }
        Ok(table)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_json())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("omega_rad_per_sample,freq_hz,alpha_per_sample,t60_seconds,gamma_s,gamma_c\n");
        for r in &self.rows {
            let t60 = r.t60_seconds.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.omega_rad_per_sample, r.freq_hz, r.alpha_per_sample, t60, r.gamma_s, r.gamma_c
            );
        }
        s
    }
}
