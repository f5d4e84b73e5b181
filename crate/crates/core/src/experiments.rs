//! Scenario sweeps, crossover-density search, the strategy comparison
//! table and validation campaigns.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use crate::costs::Strategy;
use crate::error::{DrcError, Result};
use crate::optimizer::{compare_strategies, search_design, SearchSpace, StrategyComparison};
use crate::params::ScenarioParams;
use crate::rng;
use crate::simulator::{run_validation, write_error_table_csv, ValidationReport, ValidationSettings};
use crate::tour_length::{KStarModel, TourLaw};

/// Which k* law prices fully-flexible tours. Semi-flexible costing never
/// uses k*, so the mode only affects the fully-flexible strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KStarMode {
    Calibrated,
    Chakraborti,
    Daganzo115,
    Yang,
}

impl KStarMode {
    pub fn tour_law(self) -> TourLaw {
        match self {
            KStarMode::Calibrated => TourLaw::Calibrated(KStarModel::table1()),
            KStarMode::Chakraborti => TourLaw::Constant(0.93),
            KStarMode::Daganzo115 => TourLaw::Constant(1.15),
            KStarMode::Yang => TourLaw::Yang,
        }
    }
}

impl FromStr for KStarMode {
    type Err = DrcError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "calibrated" => Ok(KStarMode::Calibrated),
            "chakraborti" => Ok(KStarMode::Chakraborti),
            "daganzo115" => Ok(KStarMode::Daganzo115),
            "yang" => Ok(KStarMode::Yang),
            other => Err(DrcError::InvalidValue {
                field: "kstar-mode".into(),
                reason: format!("unknown mode `{other}`"),
            }),
        }
    }
}

impl fmt::Display for KStarMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KStarMode::Calibrated => "calibrated",
            KStarMode::Chakraborti => "chakraborti",
            KStarMode::Daganzo115 => "daganzo115",
            KStarMode::Yang => "yang",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// λp and λd together.
    Lambda,
    /// Region area at aspect ratio 1.
    RegionArea,
    /// L/W at a fixed 4 km² region.
    AspectRatio,
    Theta,
    Alpha,
}

pub const ASPECT_SWEEP_AREA: f64 = 4.0;

impl SweepAxis {
    pub fn apply(self, base: &ScenarioParams, value: f64) -> ScenarioParams {
        let mut p = base.clone();
        match self {
            SweepAxis::Lambda => {
                p.lambda_p = value;
                p.lambda_d = value;
            }
            SweepAxis::RegionArea => {
                p.region_length = value.sqrt();
                p.region_width = value.sqrt();
            }
            SweepAxis::AspectRatio => {
                p.region_length = (ASPECT_SWEEP_AREA * value).sqrt();
                p.region_width = (ASPECT_SWEEP_AREA / value).sqrt();
            }
            SweepAxis::Theta => p.theta = value,
            SweepAxis::Alpha => p.alpha = value,
        }
        p
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Lambda => "lambda",
            SweepAxis::RegionArea => "region_area",
            SweepAxis::AspectRatio => "aspect_ratio",
            SweepAxis::Theta => "theta",
            SweepAxis::Alpha => "alpha",
        }
    }
}

impl FromStr for SweepAxis {
    type Err = DrcError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lambda" => Ok(SweepAxis::Lambda),
            "region_area" => Ok(SweepAxis::RegionArea),
            "aspect_ratio" => Ok(SweepAxis::AspectRatio),
            "theta" => Ok(SweepAxis::Theta),
            "alpha" => Ok(SweepAxis::Alpha),
            other => Err(DrcError::InvalidValue {
                field: "axis".into(),
                reason: format!("unknown sweep axis `{other}`"),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub base: ScenarioParams,
    pub strategies: Vec<Strategy>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() || self.strategies.is_empty() {
            return Err(DrcError::Precondition("sweep needs values and strategies".into()));
        }
        if self
            .values
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
        {
            return Err(DrcError::Precondition(
                "sweep values must be strictly increasing".into(),
            ));
        }
        Ok(())
    }
}

/// One sweep point for one strategy. Metric fields are `None` on gap rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub strategy: Strategy,
    pub gc_per_patron_min: Option<f64>,
    pub rows: Option<u32>,
    pub cols: Option<u32>,
    pub zone_aspect: Option<f64>,
    pub capacity: Option<u32>,
    pub w0: Option<f64>,
    pub mean_h_p_min: Option<f64>,
    pub mean_h_d_min: Option<f64>,
    pub mean_q_p: Option<f64>,
    pub mean_q_d: Option<f64>,
    pub gap: Option<String>,
}

impl SweepRow {
    fn gap(value: f64, strategy: Strategy, reason: String) -> Self {
        SweepRow {
            value,
            strategy,
            gc_per_patron_min: None,
            rows: None,
            cols: None,
            zone_aspect: None,
            capacity: None,
            w0: None,
            mean_h_p_min: None,
            mean_h_d_min: None,
            mean_q_p: None,
            mean_q_d: None,
            gap: Some(reason),
        }
    }
}

pub fn run_sweep(spec: &SweepSpec, space: &SearchSpace, tour: &TourLaw) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let mut rows = Vec::new();
    for &value in &spec.values {
        let params = spec.axis.apply(&spec.base, value);
        params.validate()?;
        for &strategy in &spec.strategies {
            match search_design(&params, &space.with_strategy(strategy), tour) {
                Ok(res) => {
                    let d = &res.best;
                    let area = d.grid.zone_area();
                    rows.push(SweepRow {
                        value,
                        strategy,
                        gc_per_patron_min: Some(res.cost.gc_per_patron_min),
                        rows: Some(d.grid.rows),
                        cols: Some(d.grid.cols),
                        zone_aspect: Some(d.grid.zone_length / d.grid.zone_width),
                        capacity: Some(d.capacity),
                        w0: d.w0(),
                        mean_h_p_min: Some(d.mean_h_p() * 60.0),
                        mean_h_d_min: Some(d.mean_h_d() * 60.0),
                        mean_q_p: Some(params.lambda_p * area * d.mean_h_p()),
                        mean_q_d: Some(params.lambda_d * area * d.mean_h_d()),
                        gap: None,
                    });
                }
                Err(e) if e.is_infeasibility() => {
                    log::warn!("{} = {value}, {strategy}: {e}", spec.axis.name());
                    rows.push(SweepRow::gap(value, strategy, e.to_string()));
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(rows)
}

fn opt_f(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_default()
}

fn opt_u(x: Option<u32>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_sweep_csv<W: Write>(axis: SweepAxis, rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        axis.name(),
        "strategy",
        "gc_min_per_patron",
        "M",
        "N",
        "zone_aspect",
        "K",
        "w0",
        "mean_h_p_min",
        "mean_h_d_min",
        "mean_q_p",
        "mean_q_d",
        "gap",
    ])?;
    for r in rows {
        w.write_record([
            format!("{}", r.value),
            r.strategy.to_string(),
            opt_f(r.gc_per_patron_min),
            opt_u(r.rows),
            opt_u(r.cols),
            opt_f(r.zone_aspect),
            opt_u(r.capacity),
            opt_f(r.w0),
            opt_f(r.mean_h_p_min),
            opt_f(r.mean_h_d_min),
            opt_f(r.mean_q_p),
            opt_f(r.mean_q_d),
            r.gap.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Relative GC change from the first to the last row of one strategy (%),
/// negative for a decrease.
pub fn end_to_end_change_pct(rows: &[SweepRow], strategy: Strategy) -> Option<f64> {
    let gcs: Vec<f64> = rows
        .iter()
        .filter(|r| r.strategy == strategy)
        .filter_map(|r| r.gc_per_patron_min)
        .collect();
    let (first, last) = (gcs.first()?, gcs.last()?);
    Some((last - first) / first * 100.0)
}

/// The standard figure sweeps around `base`.
pub fn figure_sweeps(base: &ScenarioParams) -> Vec<(&'static str, SweepSpec)> {
    let both = Strategy::BOTH.to_vec();
    let spec = |axis, values: Vec<f64>, base: ScenarioParams| SweepSpec {
        axis,
        values,
        base,
        strategies: both.clone(),
    };
    let lambdas = vec![
        2.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 40.0, 50.0, 60.0, 80.0, 100.0, 120.0, 150.0, 180.0, 210.0,
    ];
    let areas = vec![2.0, 4.0, 8.0, 12.0, 16.0, 20.0, 24.0, 28.0, 32.0];
    let aspects = vec![1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
    let thetas = vec![5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0];
    let alphas: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
    let low_demand = SweepAxis::Lambda.apply(base, 15.0);
    vec![
        ("fig6", spec(SweepAxis::Lambda, lambdas, base.clone())),
        ("fig7a", spec(SweepAxis::RegionArea, areas, base.clone())),
        ("fig8a", spec(SweepAxis::AspectRatio, aspects, base.clone())),
        ("fig9", spec(SweepAxis::Theta, thetas, base.clone())),
        ("fig10", spec(SweepAxis::Alpha, alphas, low_demand)),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalDensity {
    /// Midpoint of the final bracket (patrons/h/km²).
    pub density: f64,
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
}

pub const CRITICAL_WIDTH: f64 = 0.5;

fn gc_difference(
    base: &ScenarioParams,
    pair: (Strategy, Strategy),
    lambda: f64,
    space: &SearchSpace,
    tour: &TourLaw,
) -> Result<f64> {
    let p = SweepAxis::Lambda.apply(base, lambda);
    let a = search_design(&p, &space.with_strategy(pair.0), tour)?;
    let b = search_design(&p, &space.with_strategy(pair.1), tour)?;
    Ok(a.cost.gc_per_patron_min - b.cost.gc_per_patron_min)
}

/// Bisects on λ (both directions) for the density where the two
/// strategies' optimal GC per patron cross.
pub fn find_critical_density(
    base: &ScenarioParams,
    pair: (Strategy, Strategy),
    lo: f64,
    hi: f64,
    space: &SearchSpace,
    tour: &TourLaw,
) -> Result<CriticalDensity> {
    if !(lo > 0.0 && hi > lo) {
        return Err(DrcError::Precondition(format!("invalid bracket [{lo}, {hi}]")));
    }
    let (mut a, mut b) = (lo, hi);
    let diff_lo = gc_difference(base, pair, a, space, tour)?;
    let diff_hi = gc_difference(base, pair, b, space, tour)?;
    if diff_lo.signum() == diff_hi.signum() || diff_lo == 0.0 || diff_hi == 0.0 {
        if diff_lo == 0.0 {
            return Ok(CriticalDensity {
                density: a,
                lo: a,
                hi: a,
                iterations: 0,
            });
        }
        if diff_hi == 0.0 {
            return Ok(CriticalDensity {
                density: b,
                lo: b,
                hi: b,
                iterations: 0,
            });
        }
        return Err(DrcError::NoSignChange {
            lo,
            hi,
            diff_lo,
            diff_hi,
        });
    }
    let mut sign_a = diff_lo.signum();
    let mut iterations = 0;
    while b - a > CRITICAL_WIDTH {
        let mid = 0.5 * (a + b);
        let d = gc_difference(base, pair, mid, space, tour)?;
        iterations += 1;
        if d == 0.0 {
            return Ok(CriticalDensity {
                density: mid,
                lo: mid,
                hi: mid,
                iterations,
            });
        }
        if d.signum() == sign_a {
            a = mid;
            sign_a = d.signum();
        } else {
            b = mid;
        }
    }
    Ok(CriticalDensity {
        density: 0.5 * (a + b),
        lo: a,
        hi: b,
        iterations,
    })
}

/// Critical density as a function of another scenario axis. Points with no
/// crossing inside the bracket are reported as gaps.
pub fn critical_density_curve(
    base: &ScenarioParams,
    axis: SweepAxis,
    values: &[f64],
    bracket: (f64, f64),
    space: &SearchSpace,
    tour: &TourLaw,
) -> Result<Vec<(f64, std::result::Result<CriticalDensity, String>)>> {
    let pair = (Strategy::FullyFlexible, Strategy::SemiFlexible);
    let mut out = Vec::with_capacity(values.len());
    for &v in values {
        let p = axis.apply(base, v);
        match find_critical_density(&p, pair, bracket.0, bracket.1, space, tour) {
            Ok(c) => out.push((v, Ok(c))),
            Err(e @ DrcError::NoSignChange { .. }) => out.push((v, Err(e.to_string()))),
            Err(e) if e.is_infeasibility() => out.push((v, Err(e.to_string()))),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

pub fn write_critical_curve_csv<W: Write>(
    axis: SweepAxis,
    curve: &[(f64, std::result::Result<CriticalDensity, String>)],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([axis.name(), "critical_density", "bracket_lo", "bracket_hi", "gap"])?;
    for (v, c) in curve {
        match c {
            Ok(c) => w.write_record([
                v.to_string(),
                format!("{:.4}", c.density),
                format!("{:.4}", c.lo),
                format!("{:.4}", c.hi),
                String::new(),
            ])?,
            Err(e) => w.write_record([v.to_string(), String::new(), String::new(), String::new(), e.clone()])?,
        }
    }
    w.flush()?;
    Ok(())
}

pub fn run_table5(params: &ScenarioParams, space: &SearchSpace, tour: &TourLaw) -> Result<StrategyComparison> {
    compare_strategies(params, space, tour)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub id: String,
    pub params: ScenarioParams,
}

/// The 32-scenario validation grid: λ ∈ {10, 40}, α ∈ {0.3, 0.9},
/// θ ∈ {5, 20}, L ∈ {2, 3}, W ∈ {2, 3}.
pub fn validation_grid(base: &ScenarioParams) -> Vec<Scenario> {
    let mut out = Vec::with_capacity(32);
    for lambda in [10.0, 40.0] {
        for alpha in [0.3, 0.9] {
            for theta in [5.0, 20.0] {
                for l in [2.0, 3.0] {
                    for w in [2.0, 3.0] {
                        let params = ScenarioParams {
                            lambda_p: lambda,
                            lambda_d: lambda,
                            alpha,
                            theta,
                            region_length: l,
                            region_width: w,
                            ..base.clone()
                        };
                        out.push(Scenario {
                            id: format!("lambda={lambda},alpha={alpha},theta={theta},L={l},W={w}"),
                            params,
                        });
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignEntry {
    pub scenario: String,
    pub report: ValidationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignReport {
    pub entries: Vec<CampaignEntry>,
}

impl CampaignReport {
    pub fn reports(&self, strategy: Strategy) -> Vec<ValidationReport> {
        self.entries
            .iter()
            .filter(|e| e.report.strategy == strategy)
            .map(|e| e.report.clone())
            .collect()
    }

    /// Average/maximum error table for one strategy.
    pub fn write_table_csv<W: Write>(&self, strategy: Strategy, out: W) -> Result<()> {
        write_error_table_csv(&self.reports(strategy), out)
    }

    /// One row per scenario and strategy with every error metric.
    pub fn write_detail_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![
            "scenario".to_string(),
            "strategy".into(),
            "n_runs".into(),
            "gc_se_min".into(),
        ];
        header.extend(ValidationReport::ROW_LABELS.iter().map(|s| s.to_string()));
        w.write_record(&header)?;
        for e in &self.entries {
            let mut rec = vec![
                e.scenario.clone(),
                e.report.strategy.to_string(),
                e.report.n_runs.to_string(),
                format!("{:.5}", e.report.gc_std_error_min),
            ];
            rec.extend(e.report.row_values().iter().map(|v| format!("{v:.4}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn with_scenario<T>(id: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| DrcError::Scenario {
        id: id.to_string(),
        source: Box::new(e),
    })
}

/// Optimizes each scenario under each strategy, freezes the design and
/// validates it by simulation.
pub fn run_validation_campaign(
    scenarios: &[Scenario],
    strategies: &[Strategy],
    space: &SearchSpace,
    tour: &TourLaw,
    settings: &ValidationSettings,
    seed: u64,
) -> Result<CampaignReport> {
    let mut entries = Vec::new();
    for (si, sc) in scenarios.iter().enumerate() {
        for &strategy in strategies {
            let opt = with_scenario(&sc.id, search_design(&sc.params, &space.with_strategy(strategy), tour))?;
            let run_seed = rng::sub_seed(seed, &[si as u64, strategy as u64]);
            let report = with_scenario(&sc.id, run_validation(&sc.params, &opt.best, tour, settings, run_seed))?;
            log::info!("{} {strategy}: GC error {:.3}%", sc.id, report.err_gc_pct);
            entries.push(CampaignEntry {
                scenario: sc.id.clone(),
                report,
            });
        }
    }
    Ok(CampaignReport { entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_application() {
        let b = ScenarioParams::table2();
        let p = SweepAxis::AspectRatio.apply(&b, 4.0);
        assert!((p.region_area() - 4.0).abs() < 1e-12);
        assert!((p.region_length / p.region_width - 4.0).abs() < 1e-12);
        let p = SweepAxis::RegionArea.apply(&b, 9.0);
        assert!((p.region_length - 3.0).abs() < 1e-12 && (p.region_width - 3.0).abs() < 1e-12);
        let p = SweepAxis::Lambda.apply(&b, 7.0);
        assert_eq!((p.lambda_p, p.lambda_d), (7.0, 7.0));
    }

    #[test]
    fn parse_round_trips() {
        for m in ["calibrated", "chakraborti", "daganzo115", "yang"] {
            assert_eq!(m.parse::<KStarMode>().unwrap().to_string(), m);
        }
        for a in ["lambda", "region_area", "aspect_ratio", "theta", "alpha"] {
            assert_eq!(a.parse::<SweepAxis>().unwrap().name(), a);
        }
        assert!("nope".parse::<SweepAxis>().is_err());
    }

    #[test]
    fn sweep_values_must_increase() {
        let spec = SweepSpec {
            axis: SweepAxis::Theta,
            values: vec![5.0, 5.0],
            base: ScenarioParams::table2(),
            strategies: vec![Strategy::FullyFlexible],
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn grid_has_32_distinct_scenarios() {
        let g = validation_grid(&ScenarioParams::table2());
        assert_eq!(g.len(), 32);
        let ids: std::collections::HashSet<_> = g.iter().map(|s| s.id.clone()).collect();
        assert_eq!(ids.len(), 32);
    }
}
