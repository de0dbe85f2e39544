//! Analysis presets and the settings they fill in.

use std::collections::BTreeMap;

use clap::ValueEnum;
use modal_core::esprit::OrderMethod;
use modal_core::optimize::OptConfig;
use modal_core::subband::{plan_bark, plan_harmonic, BandPlan};
use modal_core::warp::bark_rho;
use serde_json::json;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Single piano note: harmonic bands around stiff-string partials.
    Piano,
    /// Room impulse response: Bark-spaced bands.
    Rir,
    /// Library defaults; every setting comes from flags.
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Esprit,
    Fw,
    Fz,
}

/// Everything `analyze` needs, after presets and flags are combined.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub hankel: usize,
    pub order: OrderMethod,
    /// Warping factor for FW-ESPRIT.
    pub rho: f64,
    /// Plain-branch pre-damping, nepers/second.
    pub pre_damp_sigma: f64,
    pub delta_omega_hz: f64,
    /// Relative damping window.
    pub delta_alpha: f64,
    /// Fundamental for harmonic band plans.
    pub f0: Option<f64>,
    pub n_partials: usize,
    pub inharmonicity: f64,
    /// Total harmonic band width as a fraction of `f0`.
    pub bandwidth_fraction: f64,
    pub n_bands: usize,
    pub decimation: usize,
    pub overlap: f64,
    pub max_modes_per_band: Option<usize>,
}

impl Settings {
    pub fn preset(preset: Preset, sample_rate: f64) -> Self {
        let rho = bark_rho(sample_rate);
        match preset {
            Preset::Piano => Self {
                hankel: 2048,
                order: OrderMethod::KneePoint,
                rho,
                pre_damp_sigma: 0.0,
                delta_omega_hz: 0.5,
                delta_alpha: 0.1,
                f0: None,
                n_partials: 60,
                inharmonicity: 1e-4,
                bandwidth_fraction: 0.1,
                n_bands: 20,
                decimation: 5000,
                overlap: 1.2,
                max_modes_per_band: None,
            },
            Preset::Rir => Self {
                hankel: 4096,
                order: OrderMethod::ThresholdDb(-18.0),
                rho,
                pre_damp_sigma: 1.5,
                delta_omega_hz: 2.0,
                delta_alpha: 0.1,
                f0: None,
                n_partials: 60,
                inharmonicity: 0.0,
                bandwidth_fraction: 0.1,
                n_bands: 20,
                decimation: 8,
                overlap: 1.2,
                max_modes_per_band: Some(100),
            },
            Preset::Custom => Self {
                hankel: modal_core::esprit::DEFAULT_HANKEL_SIZE,
                order: OrderMethod::KneePoint,
                rho,
                pre_damp_sigma: 0.0,
                delta_omega_hz: 0.5,
                delta_alpha: 0.1,
                f0: None,
                n_partials: 60,
                inharmonicity: 0.0,
                bandwidth_fraction: 0.1,
                n_bands: 20,
                decimation: 8,
                overlap: 1.2,
                max_modes_per_band: None,
            },
        }
    }

    pub fn opt_config(&self) -> OptConfig {
        OptConfig::new(self.delta_omega_hz, self.delta_alpha)
    }

    /// Harmonic bands when a fundamental is known, Bark-spaced otherwise.
    pub fn band_plan(&self, sample_rate: f64) -> Result<BandPlan> {
        let plan = match self.f0 {
            Some(f0) => plan_harmonic(
                f0,
                self.inharmonicity,
                self.n_partials,
                sample_rate,
                self.decimation,
                self.bandwidth_fraction,
            )?,
            None => plan_bark(self.n_bands, sample_rate, self.rho, self.overlap, self.decimation)?,
        };
        Ok(match self.max_modes_per_band {
            Some(m) => plan.with_max_modes(m),
            None => plan,
        })
    }

    /// Settings recorded in the mode table header.
    pub fn describe(&self, method: Method, preset: Preset, optimize: bool) -> BTreeMap<String, serde_json::Value> {
        let mut p = BTreeMap::new();
        p.insert("method".into(), json!(format!("{method:?}").to_lowercase()));
        p.insert("preset".into(), json!(format!("{preset:?}").to_lowercase()));
        p.insert("hankel".into(), json!(self.hankel));
        p.insert("order".into(), json!(order_to_string(self.order)));
        p.insert("optimize".into(), json!(optimize));
        match method {
            Method::Esprit => {}
            Method::Fw => {
                p.insert("rho".into(), json!(self.rho));
                p.insert("pre_damp_sigma".into(), json!(self.pre_damp_sigma));
            }
            Method::Fz => {
                p.insert("decimation".into(), json!(self.decimation));
                if let Some(m) = self.max_modes_per_band {
                    p.insert("max_modes_per_band".into(), json!(m));
                }
                match self.f0 {
                    Some(f0) => {
                        p.insert("f0".into(), json!(f0));
                        p.insert("n_partials".into(), json!(self.n_partials));
                        p.insert("inharmonicity".into(), json!(self.inharmonicity));
                        p.insert("bandwidth_fraction".into(), json!(self.bandwidth_fraction));
                    }
                    None => {
                        p.insert("bands".into(), json!(self.n_bands));
                        p.insert("overlap".into(), json!(self.overlap));
                    }
                }
            }
        }
        if optimize {
            p.insert("delta_omega_hz".into(), json!(self.delta_omega_hz));
            p.insert("delta_alpha".into(), json!(self.delta_alpha));
        }
        p
    }
}

/// Parses `knee`, `db:<level>` or `fixed:<M>`.
pub fn parse_order(s: &str) -> Result<OrderMethod> {
    let bad = || CliError::input(format!("invalid order '{s}': use knee, db:<level> or fixed:<M>"));
    if s == "knee" {
        return Ok(OrderMethod::KneePoint);
    }
    let (kind, value) = s.split_once(':').ok_or_else(bad)?;
    match kind {
        "db" => {
            let level: f64 = value.parse().map_err(|_| bad())?;
            if !(level.is_finite() && level < 0.0) {
                return Err(CliError::input(format!("threshold {level} dB must be negative")));
            }
            Ok(OrderMethod::ThresholdDb(level))
        }
        "fixed" => {
            let m: usize = value.parse().map_err(|_| bad())?;
            if m == 0 {
                return Err(CliError::input("fixed order must be at least 1"));
            }
            Ok(OrderMethod::Fixed(m))
        }
        _ => Err(bad()),
    }
}

pub fn order_to_string(order: OrderMethod) -> String {
    match order {
        OrderMethod::KneePoint => "knee".into(),
        OrderMethod::ThresholdDb(l) => format!("db:{l}"),
        OrderMethod::Fixed(m) => format!("fixed:{m}"),
    }
}
