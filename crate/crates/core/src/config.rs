//! JSON scenario configuration.
//!
//! Every key is optional; omitted keys take the documented defaults and
//! unknown keys are rejected. Electrical values that the coils determine
//! (`r_t`, `z_r`, `z_l`, `p0`) are derived when absent, so a parsed config is
//! always fully populated and serialises back to an equivalent document.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::circuit::LinkParams;
use crate::error::{Error, Result};
use crate::experiments::{
    Scenario, Strategy, DEFAULT_CURRENT_AMPLITUDE, DEFAULT_DELTA, DEFAULT_OMEGA,
};
use crate::geometry::{FrameMode, TriadPose, Vec3};
use crate::magnetics::{coil_resistance, CoilSpec, FormulaMode};
use crate::optimizer::DEFAULT_MAX_ITER;

pub const DEFAULT_ANGLES: usize = 360;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_ALPHA: f64 = 1.0;

/// Thresholds for the convergence sweep, dB.
pub const DEFAULT_DELTAS: [f64; 10] = [1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 2.5e-2, 3e-2, 1e-1, 3e-1, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub tx: CoilSpec,
    pub rx: CoilSpec,
    pub rx_center: [f64; 3],
    pub current_amplitude: f64,
    pub omega: f64,
    pub r_t: f64,
    pub z_r: f64,
    pub z_l: f64,
    pub p0: f64,
    pub alpha: f64,
    pub delta: f64,
    pub deltas: Vec<f64>,
    pub max_iter: usize,
    pub angles: usize,
    pub seed: u64,
    pub samples: usize,
    pub strategies: Vec<Strategy>,
    pub frame_mode: FrameMode,
    pub formula_mode: FormulaMode,
    pub output_dir: PathBuf,
    pub plot: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoil {
    turns: Option<i64>,
    radius: Option<f64>,
    wire_resistance_per_meter: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    tx: Option<RawCoil>,
    rx: Option<RawCoil>,
    rx_center: Option<[f64; 3]>,
    current_amplitude: Option<f64>,
    omega: Option<f64>,
    r_t: Option<f64>,
    z_r: Option<f64>,
    z_l: Option<f64>,
    p0: Option<f64>,
    alpha: Option<f64>,
    delta: Option<f64>,
    deltas: Option<Vec<f64>>,
    max_iter: Option<i64>,
    angles: Option<i64>,
    seed: Option<u64>,
    samples: Option<i64>,
    strategies: Option<Vec<Strategy>>,
    frame_mode: Option<FrameMode>,
    formula_mode: Option<FormulaMode>,
    output_dir: Option<PathBuf>,
    plot: Option<bool>,
}

fn coil_from_raw(raw: Option<RawCoil>, prefix: &str) -> Result<CoilSpec> {
    let raw = raw.unwrap_or_default();
    let turns = raw.turns.unwrap_or(10);
    if turns < 1 || turns > u32::MAX as i64 {
        return Err(Error::validation(
            format!("{prefix}.turns"),
            format!("must be at least 1, got {turns}"),
        ));
    }
    let spec = CoilSpec {
        turns: turns as u32,
        radius: raw.radius.unwrap_or(0.1),
        wire_resistance_per_meter: raw.wire_resistance_per_meter.unwrap_or(0.01),
    };
    spec.validate().map_err(|e| match e {
        Error::Validation { field, message } => {
            Error::validation(format!("{prefix}.{field}"), message)
        }
        other => other,
    })?;
    Ok(spec)
}

fn count(v: Option<i64>, default: usize, min: i64, field: &str) -> Result<usize> {
    let v = v.unwrap_or(default as i64);
    if v < min {
        return Err(Error::validation(
            field,
            format!("must be at least {min}, got {v}"),
        ));
    }
    Ok(v as usize)
}

fn unknown_field(msg: &str) -> Option<String> {
    let rest = msg.strip_prefix("unknown field `")?;
    Some(rest[..rest.find('`')?].to_string())
}

fn map_json_error(e: serde_json::Error) -> Error {
    use serde_json::error::Category;
    match e.classify() {
        Category::Data => {
            let msg = e.to_string();
            let field = unknown_field(&msg).unwrap_or_else(|| "document".into());
            Error::validation(field, msg)
        }
        _ => Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        },
    }
}

/// Parses a JSON config. An empty (or whitespace-only) document yields the
/// all-defaults config.
pub fn parse_config(text: &[u8]) -> Result<ScenarioConfig> {
    let text = std::str::from_utf8(text).map_err(|e| Error::Parse {
        line: 1,
        column: e.valid_up_to() + 1,
        message: "config is not valid UTF-8".into(),
    })?;
    let raw: RawConfig = if text.trim().is_empty() {
        RawConfig::default()
    } else {
        serde_json::from_str(text).map_err(map_json_error)?
    };

    let tx = coil_from_raw(raw.tx, "tx")?;
    let rx = coil_from_raw(raw.rx, "rx")?;
    let current_amplitude = raw.current_amplitude.unwrap_or(DEFAULT_CURRENT_AMPLITUDE);
    let r_t = raw.r_t.unwrap_or_else(|| coil_resistance(&tx));
    let r_r = coil_resistance(&rx);
    let cfg = ScenarioConfig {
        tx,
        rx,
        rx_center: raw.rx_center.unwrap_or([1.0, 1.0, 1.5]),
        current_amplitude,
        omega: raw.omega.unwrap_or(DEFAULT_OMEGA),
        r_t,
        z_r: raw.z_r.unwrap_or(r_r),
        z_l: raw.z_l.unwrap_or(r_r),
        p0: raw
            .p0
            .unwrap_or(3.0 * current_amplitude * current_amplitude * r_t),
        alpha: raw.alpha.unwrap_or(DEFAULT_ALPHA),
        delta: raw.delta.unwrap_or(DEFAULT_DELTA),
        deltas: raw.deltas.unwrap_or_else(|| DEFAULT_DELTAS.to_vec()),
        max_iter: count(raw.max_iter, DEFAULT_MAX_ITER, 1, "max_iter")?,
        angles: count(raw.angles, DEFAULT_ANGLES, 2, "angles")?,
        seed: raw.seed.unwrap_or(DEFAULT_SEED),
        samples: count(raw.samples, DEFAULT_SAMPLES, 1, "samples")?,
        strategies: raw.strategies.unwrap_or_else(|| Strategy::ALL.to_vec()),
        frame_mode: raw.frame_mode.unwrap_or_default(),
        formula_mode: raw.formula_mode.unwrap_or_default(),
        output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("out")),
        plot: raw.plot.unwrap_or(false),
    };
    cfg.validate()?;
    Ok(cfg)
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        parse_config(b"").expect("defaults are valid")
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(
            field,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        coil_from_raw(
            Some(RawCoil {
                turns: Some(self.tx.turns as i64),
                radius: Some(self.tx.radius),
                wire_resistance_per_meter: Some(self.tx.wire_resistance_per_meter),
            }),
            "tx",
        )?;
        coil_from_raw(
            Some(RawCoil {
                turns: Some(self.rx.turns as i64),
                radius: Some(self.rx.radius),
                wire_resistance_per_meter: Some(self.rx.wire_resistance_per_meter),
            }),
            "rx",
        )?;
        positive("current_amplitude", self.current_amplitude)?;
        positive("omega", self.omega)?;
        positive("r_t", self.r_t)?;
        positive("z_r", self.z_r)?;
        positive("z_l", self.z_l)?;
        positive("p0", self.p0)?;
        positive("delta", self.delta)?;
        if !self.alpha.is_finite() {
            return Err(Error::validation("alpha", "must be finite"));
        }
        let c = Vec3::from_array(self.rx_center);
        if !c.is_finite() || c.norm() == 0.0 {
            return Err(Error::validation(
                "rx_center",
                "must be finite and away from the transmitter at the origin",
            ));
        }
        if self.deltas.is_empty() {
            return Err(Error::validation("deltas", "must not be empty"));
        }
        for d in &self.deltas {
            positive("deltas", *d)?;
        }
        if self.deltas.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::validation("deltas", "must be sorted ascending"));
        }
        if self.max_iter < 1 {
            return Err(Error::validation("max_iter", "must be at least 1"));
        }
        if self.angles < 2 {
            return Err(Error::validation("angles", "must be at least 2"));
        }
        if self.samples < 1 {
            return Err(Error::validation("samples", "must be at least 1"));
        }
        if self.strategies.is_empty() {
            return Err(Error::validation("strategies", "must not be empty"));
        }
        Ok(())
    }

    pub fn link_params(&self) -> Result<LinkParams> {
        LinkParams::new(self.omega, self.r_t, self.z_r, self.z_l, self.p0)
    }

    pub fn to_scenario(&self) -> Result<Scenario> {
        self.validate()?;
        let scn = Scenario {
            tx: self.tx,
            rx: self.rx,
            tx_pose: TriadPose::axis_aligned_transmitter(Vec3::ZERO),
            rx_center: Vec3::from_array(self.rx_center),
            link: self.link_params()?,
            current_amplitude: self.current_amplitude,
            frame_mode: self.frame_mode,
            formula_mode: self.formula_mode,
            max_iter: self.max_iter,
        };
        scn.validate()?;
        Ok(scn)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }
}
