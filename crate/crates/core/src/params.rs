//! Exogenous scenario parameters, zone geometry and config ingestion.
//!
//! Config documents are flat TOML tables whose keys follow the usual
//! notation (`lambda_p`, `H_t`, `tau_b`, ...). A document may name a preset
//! (`preset = "table2"`) and override individual keys on top of it. Numeric
//! values may be written either as numbers or as `"a/b"` fraction strings,
//! which keeps per-second and per-minute quantities readable
//! (`tau_p = "30/3600"`).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{DrcError, Result};

const REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    /// Region length L (km), along the zone columns.
    #[serde(rename = "L")]
    pub region_length: f64,
    /// Region width W (km), along the zone rows.
    #[serde(rename = "W")]
    pub region_width: f64,
    /// Outbound demand density (patrons/h/km²).
    pub lambda_p: f64,
    /// Inbound demand density (patrons/h/km²).
    pub lambda_d: f64,
    /// Value of time ($/h).
    pub theta: f64,
    /// Discount on the value of waiting at home, in [0, 1].
    pub alpha: f64,
    pub pi_v_base: f64,
    #[serde(rename = "pi_v_perK")]
    pub pi_v_per_k: f64,
    pub pi_m_base: f64,
    #[serde(rename = "pi_m_perK")]
    pub pi_m_per_k: f64,
    pub pi_m_theta_mult: f64,
    /// Acceleration/deceleration loss per stop (h). Only used to derive or
    /// cross-check `tau_p` and `tau_d`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_0: Option<f64>,
    /// Outbound dwell per stop (h).
    pub tau_p: f64,
    /// Inbound dwell per stop (h).
    pub tau_d: f64,
    /// Alighting time per patron at the terminal (h).
    pub tau_a: f64,
    /// Boarding time per patron at the terminal (h).
    pub tau_b: f64,
    /// Cruise speed (km/h).
    #[serde(rename = "v_l")]
    pub cruise_speed: f64,
    /// Feeder-to-trunk transfer delay (h).
    pub t_ft: f64,
    /// Trunk-to-feeder transfer delay (h).
    pub t_tf: f64,
    #[serde(rename = "H_min")]
    pub h_min: f64,
    #[serde(rename = "H_max")]
    pub h_max: f64,
    /// Trunk line headway (h).
    #[serde(rename = "H_t")]
    pub h_trunk: f64,
}

/// Every key a config document may carry, in canonical order.
pub const CONFIG_KEYS: [&str; 22] = [
    "L",
    "W",
    "lambda_p",
    "lambda_d",
    "theta",
    "alpha",
    "pi_v_base",
    "pi_v_perK",
    "pi_m_base",
    "pi_m_perK",
    "pi_m_theta_mult",
    "tau_0",
    "tau_p",
    "tau_d",
    "tau_a",
    "tau_b",
    "v_l",
    "t_ft",
    "t_tf",
    "H_min",
    "H_max",
    "H_t",
];

impl ScenarioParams {
    /// The reference scenario: a 2 km × 2 km region at 40 patrons/h/km² in
    /// both directions.
    pub fn table2() -> Self {
        ScenarioParams {
            region_length: 2.0,
            region_width: 2.0,
            lambda_p: 40.0,
            lambda_d: 40.0,
            theta: 20.0,
            alpha: 0.3,
            pi_v_base: 0.0314,
            pi_v_per_k: 0.0039,
            pi_m_base: 2.068,
            pi_m_per_k: 0.108,
            pi_m_theta_mult: 2.0,
            tau_0: Some(26.0 / 3600.0),
            tau_p: 30.0 / 3600.0,
            tau_d: 28.0 / 3600.0,
            tau_a: 2.0 / 3600.0,
            tau_b: 4.0 / 3600.0,
            cruise_speed: 25.0,
            t_ft: 3.0 / 60.0,
            t_tf: 3.0 / 60.0,
            h_min: 3.0 / 60.0,
            h_max: 1.0,
            h_trunk: 5.0 / 60.0,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "table2" => Ok(Self::table2()),
            other => Err(DrcError::UnknownPreset(other.to_string())),
        }
    }

    /// Unit distance cost π_v ($/veh-km) for bus capacity `k`.
    pub fn pi_v(&self, k: u32) -> f64 {
        self.pi_v_base + self.pi_v_per_k * f64::from(k)
    }

    /// Unit time cost π_m ($/veh-h) for bus capacity `k`.
    pub fn pi_m(&self, k: u32) -> f64 {
        self.pi_m_base + self.pi_m_per_k * f64::from(k) + self.pi_m_theta_mult * self.theta
    }

    pub fn region_area(&self) -> f64 {
        self.region_length * self.region_width
    }

    /// Expected patrons per hour over both directions.
    pub fn patrons_per_hour(&self) -> f64 {
        (self.lambda_p + self.lambda_d) * self.region_area()
    }

    pub fn validate(&self) -> Result<()> {
        let strictly_positive = [
            ("L", self.region_length),
            ("W", self.region_width),
            ("lambda_p", self.lambda_p),
            ("lambda_d", self.lambda_d),
            ("theta", self.theta),
            ("pi_v_base", self.pi_v_base),
            ("pi_v_perK", self.pi_v_per_k),
            ("pi_m_base", self.pi_m_base),
            ("pi_m_perK", self.pi_m_per_k),
            ("pi_m_theta_mult", self.pi_m_theta_mult),
            ("tau_p", self.tau_p),
            ("tau_d", self.tau_d),
            ("tau_a", self.tau_a),
            ("tau_b", self.tau_b),
            ("v_l", self.cruise_speed),
            ("t_ft", self.t_ft),
            ("t_tf", self.t_tf),
            ("H_min", self.h_min),
            ("H_max", self.h_max),
            ("H_t", self.h_trunk),
        ];
        for (field, value) in strictly_positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(DrcError::InvalidValue {
                    field: field.to_string(),
                    reason: format!("must be finite and strictly positive, got {value}"),
                });
            }
        }
        if let Some(tau_0) = self.tau_0 {
            if !(tau_0.is_finite() && tau_0 > 0.0) {
                return Err(DrcError::InvalidValue {
                    field: "tau_0".into(),
                    reason: format!("must be finite and strictly positive, got {tau_0}"),
                });
            }
            check_tau_sum("tau_p", self.tau_p, tau_0, "tau_b", self.tau_b)?;
            check_tau_sum("tau_d", self.tau_d, tau_0, "tau_a", self.tau_a)?;
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(DrcError::AlphaOutOfRange(self.alpha));
        }
        if self.h_min > self.h_max {
            return Err(DrcError::InvalidValue {
                field: "H_min".into(),
                reason: format!("H_min {} exceeds H_max {}", self.h_min, self.h_max),
            });
        }
        if self.h_trunk > self.h_max {
            return Err(DrcError::InvalidValue {
                field: "H_t".into(),
                reason: format!("H_t {} exceeds H_max {}", self.h_trunk, self.h_max),
            });
        }
        Ok(())
    }

    /// Renders the parameters as a config document that `load_scenario`
    /// reads back unchanged.
    pub fn to_config_string(&self) -> String {
        // Serialization of plain floats into a flat table cannot fail.
        toml::to_string(self).expect("flat float table serializes")
    }
}

fn check_tau_sum(name: &str, total: f64, tau_0: f64, part_name: &str, part: f64) -> Result<()> {
    let expected = tau_0 + part;
    if (total - expected).abs() > REL_TOL * expected.abs().max(1e-12) {
        return Err(DrcError::TauConsistency(format!(
            "{name} = {total} but tau_0 + {part_name} = {expected}"
        )));
    }
    Ok(())
}

fn parse_number(key: &str, value: &toml::Value) -> Result<f64> {
    let invalid = |reason: String| DrcError::InvalidValue {
        field: key.to_string(),
        reason,
    };
    match value {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        toml::Value::String(s) => {
            let s = s.trim();
            let parse = |t: &str| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| invalid(format!("cannot parse `{t}`: {e}")))
            };
            match s.split_once('/') {
                Some((num, den)) => {
                    let den = parse(den)?;
                    if den == 0.0 {
                        return Err(invalid("zero denominator".into()));
                    }
                    Ok(parse(num)? / den)
                }
                None => parse(s),
            }
        }
        other => Err(invalid(format!("expected a number, got {}", other.type_str()))),
    }
}

/// Parses and validates a scenario config document.
pub fn load_scenario(config_text: &str) -> Result<ScenarioParams> {
    let table: toml::Table = toml::from_str(config_text).map_err(|e| DrcError::Parse(e.to_string()))?;

    let mut values: Vec<Option<f64>> = vec![None; CONFIG_KEYS.len()];
    let mut base = None;
    for (key, value) in &table {
        if key == "preset" {
            let name = value.as_str().ok_or_else(|| DrcError::InvalidValue {
                field: "preset".into(),
                reason: "expected a string".into(),
            })?;
            base = Some(ScenarioParams::preset(name)?);
            continue;
        }
        let slot = CONFIG_KEYS
            .iter()
            .position(|k| k == key)
            .ok_or_else(|| DrcError::UnknownField(key.clone()))?;
        values[slot] = Some(parse_number(key, value)?);
    }
    let get = |key: &str| values[CONFIG_KEYS.iter().position(|k| *k == key).unwrap()];

    let params = match base {
        Some(mut p) => {
            let tau_0_given = get("tau_0").is_some();
            apply_overrides(&mut p, &get);
            // A preset's derived dwell times follow overrides of their parts.
            if let (false, Some(tau_0)) = (tau_0_given, p.tau_0) {
                if get("tau_p").is_none() && get("tau_b").is_some() {
                    p.tau_p = tau_0 + p.tau_b;
                }
                if get("tau_d").is_none() && get("tau_a").is_some() {
                    p.tau_d = tau_0 + p.tau_a;
                }
            }
            p
        }
        None => from_values(&get)?,
    };
    params.validate()?;
    Ok(params)
}

fn apply_overrides(p: &mut ScenarioParams, get: &dyn Fn(&str) -> Option<f64>) {
    let fields: [(&str, &mut f64); 21] = [
        ("L", &mut p.region_length),
        ("W", &mut p.region_width),
        ("lambda_p", &mut p.lambda_p),
        ("lambda_d", &mut p.lambda_d),
        ("theta", &mut p.theta),
        ("alpha", &mut p.alpha),
        ("pi_v_base", &mut p.pi_v_base),
        ("pi_v_perK", &mut p.pi_v_per_k),
        ("pi_m_base", &mut p.pi_m_base),
        ("pi_m_perK", &mut p.pi_m_per_k),
        ("pi_m_theta_mult", &mut p.pi_m_theta_mult),
        ("tau_p", &mut p.tau_p),
        ("tau_d", &mut p.tau_d),
        ("tau_a", &mut p.tau_a),
        ("tau_b", &mut p.tau_b),
        ("v_l", &mut p.cruise_speed),
        ("t_ft", &mut p.t_ft),
        ("t_tf", &mut p.t_tf),
        ("H_min", &mut p.h_min),
        ("H_max", &mut p.h_max),
        ("H_t", &mut p.h_trunk),
    ];
    for (key, slot) in fields {
        if let Some(v) = get(key) {
            *slot = v;
        }
    }
    if let Some(t0) = get("tau_0") {
        p.tau_0 = Some(t0);
    }
}

fn from_values(get: &dyn Fn(&str) -> Option<f64>) -> Result<ScenarioParams> {
    let req = |key: &str| get(key).ok_or_else(|| DrcError::MissingField(key.to_string()));
    let tau_0 = get("tau_0");
    let tau_a = req("tau_a")?;
    let tau_b = req("tau_b")?;
    let derived = |key: &str, part: f64| match (get(key), tau_0) {
        (Some(v), _) => Ok(v),
        (None, Some(t0)) => Ok(t0 + part),
        (None, None) => Err(DrcError::MissingField(key.to_string())),
    };
    Ok(ScenarioParams {
        region_length: req("L")?,
        region_width: req("W")?,
        lambda_p: req("lambda_p")?,
        lambda_d: req("lambda_d")?,
        theta: req("theta")?,
        alpha: req("alpha")?,
        pi_v_base: req("pi_v_base")?,
        pi_v_per_k: req("pi_v_perK")?,
        pi_m_base: req("pi_m_base")?,
        pi_m_per_k: req("pi_m_perK")?,
        pi_m_theta_mult: req("pi_m_theta_mult")?,
        tau_0,
        tau_p: derived("tau_p", tau_b)?,
        tau_d: derived("tau_d", tau_a)?,
        tau_a,
        tau_b,
        cruise_speed: req("v_l")?,
        t_ft: req("t_ft")?,
        t_tf: req("t_tf")?,
        h_min: req("H_min")?,
        h_max: req("H_max")?,
        h_trunk: req("H_t")?,
    })
}

/// Zone (m, n): row m counted bottom to top, column n left to right, both
/// starting at 1. Zone (1,1) touches the terminal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ZoneIndex {
    pub row: u32,
    pub col: u32,
}

impl ZoneIndex {
    pub fn new(row: u32, col: u32) -> Self {
        ZoneIndex { row, col }
    }
}

impl fmt::Display for ZoneIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

/// Partition of the region into `rows × cols` identical rectangles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneGrid {
    pub rows: u32,
    pub cols: u32,
    /// Zone length l = L / N (km).
    pub zone_length: f64,
    /// Zone width w = W / M (km).
    pub zone_width: f64,
}

impl ZoneGrid {
    pub fn zone_area(&self) -> f64 {
        self.zone_length * self.zone_width
    }

    /// Aspect ratio, orientation-normalized to be ≥ 1.
    pub fn aspect_ratio(&self) -> f64 {
        aspect_ratio(self.zone_length, self.zone_width)
    }

    pub fn zone_count(&self) -> usize {
        (self.rows * self.cols) as usize
    }

    pub fn contains(&self, z: ZoneIndex) -> bool {
        (1..=self.rows).contains(&z.row) && (1..=self.cols).contains(&z.col)
    }

    /// Zones in row-major order, (1,1) first.
    pub fn zones(&self) -> impl Iterator<Item = ZoneIndex> + '_ {
        (1..=self.rows).flat_map(move |m| (1..=self.cols).map(move |n| ZoneIndex::new(m, n)))
    }

    /// Row-major position of `z`, matching `zones()`.
    pub fn ordinal(&self, z: ZoneIndex) -> usize {
        ((z.row - 1) * self.cols + (z.col - 1)) as usize
    }

    /// Zone containing the point (x, y) of the region. Points on the far
    /// boundary belong to the last row/column.
    pub fn locate(&self, x: f64, y: f64) -> ZoneIndex {
        let col = ((x / self.zone_length).floor() as i64).clamp(0, self.cols as i64 - 1) as u32;
        let row = ((y / self.zone_width).floor() as i64).clamp(0, self.rows as i64 - 1) as u32;
        ZoneIndex::new(row + 1, col + 1)
    }

    /// Lower-left corner of zone `z` in region coordinates.
    pub fn origin(&self, z: ZoneIndex) -> (f64, f64) {
        (
            f64::from(z.col - 1) * self.zone_length,
            f64::from(z.row - 1) * self.zone_width,
        )
    }
}

pub fn aspect_ratio(l: f64, w: f64) -> f64 {
    l.max(w) / l.min(w)
}

pub fn make_grid(params: &ScenarioParams, rows: u32, cols: u32) -> Result<ZoneGrid> {
    if rows == 0 || cols == 0 {
        return Err(DrcError::Precondition(format!(
            "grid needs at least one row and column, got {rows}×{cols}"
        )));
    }
    Ok(ZoneGrid {
        rows,
        cols,
        zone_length: params.region_length / f64::from(cols),
        zone_width: params.region_width / f64::from(rows),
    })
}

/// Distance from the near corner of zone `z` to the terminal:
/// (m−1)·w + (n−1)·l.
pub fn line_haul_distance(grid: &ZoneGrid, z: ZoneIndex) -> f64 {
    debug_assert!(grid.contains(z), "zone {z} outside grid");
    f64::from(z.row - 1) * grid.zone_width + f64::from(z.col - 1) * grid.zone_length
}
