//! Per-hour generalized cost of a feeder design, in hours of equivalent
//! patron time.
//!
//! Every term is evaluated per zone and per direction. The outbound
//! direction (pick-up, headway H_p) carries the at-home waiting term; the
//! inbound direction (drop-off, headway H_d = γ·H_t) is synchronized with
//! trunk arrivals. Agency costs are converted to time through θ.

use std::fmt;
use std::io::Write;
use std::ops::AddAssign;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{DrcError, Result};
use crate::expectations::{expected_tour_power, poisson_moments, OccupancyLaw, PowerOffset};
use crate::params::{line_haul_distance, ScenarioParams, ZoneGrid, ZoneIndex};
use crate::tour_length::{feasible_swath_widths, SwathConfig, TourLaw};

const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    FullyFlexible,
    SemiFlexible,
}

impl Strategy {
    pub const BOTH: [Strategy; 2] = [Strategy::FullyFlexible, Strategy::SemiFlexible];

    pub fn short(self) -> &'static str {
        match self {
            Strategy::FullyFlexible => "ff",
            Strategy::SemiFlexible => "sf",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::FullyFlexible => "fully_flexible",
            Strategy::SemiFlexible => "semi_flexible",
        })
    }
}

impl FromStr for Strategy {
    type Err = DrcError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ff" | "fully_flexible" => Ok(Strategy::FullyFlexible),
            "sf" | "semi_flexible" => Ok(Strategy::SemiFlexible),
            other => Err(DrcError::InvalidValue {
                field: "strategy".into(),
                reason: format!("unknown strategy `{other}`"),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Pick-up: home to terminal.
    Outbound,
    /// Drop-off: terminal to home.
    Inbound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneDesign {
    pub zone: ZoneIndex,
    /// Outbound headway (h).
    pub h_p: f64,
    /// Inbound headway (h), an integer multiple `gamma` of the trunk headway.
    pub h_d: f64,
    pub gamma: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSolution {
    pub strategy: Strategy,
    pub grid: ZoneGrid,
    /// Bus capacity K (patrons/bus).
    pub capacity: u32,
    /// One entry per zone in row-major order.
    pub zones: Vec<ZoneDesign>,
    /// Present iff the strategy is semi-flexible.
    pub swath: Option<SwathConfig>,
}

impl DesignSolution {
    pub fn zone(&self, z: ZoneIndex) -> &ZoneDesign {
        &self.zones[self.grid.ordinal(z)]
    }

    pub fn mean_h_p(&self) -> f64 {
        self.zones.iter().map(|z| z.h_p).sum::<f64>() / self.zones.len() as f64
    }

    pub fn mean_h_d(&self) -> f64 {
        self.zones.iter().map(|z| z.h_d).sum::<f64>() / self.zones.len() as f64
    }

    pub fn w0(&self) -> Option<f64> {
        self.swath.map(|s| s.w0)
    }

    pub fn routing<'a>(&self, tour: &'a TourLaw) -> Routing<'a> {
        match self.swath {
            Some(s) if self.strategy == Strategy::SemiFlexible => Routing::SemiFlexible { w0: s.w0 },
            _ => Routing::FullyFlexible(tour),
        }
    }
}

/// How local tours are costed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Routing<'a> {
    FullyFlexible(&'a TourLaw),
    SemiFlexible { w0: f64 },
}

/// The nine per-hour cost terms (h of patron time per hour).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostTerms {
    pub c_w: f64,
    pub c_tp: f64,
    pub c_td: f64,
    pub c_lp: f64,
    pub c_ld: f64,
    pub c_rp: f64,
    pub c_rd: f64,
    pub c_vk: f64,
    pub c_vh: f64,
}

impl CostTerms {
    pub const LABELS: [&'static str; 9] = ["C_W", "C_Tp", "C_Td", "C_Lp", "C_Ld", "C_Rp", "C_Rd", "C_vk", "C_vh"];

    pub fn as_array(&self) -> [f64; 9] {
        [
            self.c_w, self.c_tp, self.c_td, self.c_lp, self.c_ld, self.c_rp, self.c_rd, self.c_vk, self.c_vh,
        ]
    }

    pub fn total(&self) -> f64 {
        self.as_array().iter().sum()
    }

    pub fn user(&self) -> f64 {
        self.c_w + self.c_tp + self.c_td + self.c_lp + self.c_ld + self.c_rp + self.c_rd
    }

    pub fn agency(&self) -> f64 {
        self.c_vk + self.c_vh
    }
}

impl AddAssign for CostTerms {
    fn add_assign(&mut self, o: Self) {
        self.c_w += o.c_w;
        self.c_tp += o.c_tp;
        self.c_td += o.c_td;
        self.c_lp += o.c_lp;
        self.c_ld += o.c_ld;
        self.c_rp += o.c_rp;
        self.c_rd += o.c_rd;
        self.c_vk += o.c_vk;
        self.c_vh += o.c_vh;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostBreakdown {
    pub aggregate: CostTerms,
    pub per_zone: Vec<(ZoneIndex, CostTerms)>,
    /// Generalized cost (h per hour).
    pub gc: f64,
    pub patrons_per_hour: f64,
    pub gc_per_patron_min: f64,
    /// Some dispatch mean fell below the reliable range of the Taylor
    /// expectations.
    pub taylor_warning: bool,
}

impl CostBreakdown {
    pub fn per_patron_min(&self, hours: f64) -> f64 {
        hours / self.patrons_per_hour * 60.0
    }

    /// One row per zone and component, then the aggregate rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["zone", "component", "hours_per_hour", "min_per_patron"])?;
        let mut emit = |zone: String, terms: &CostTerms, gc: f64| -> Result<()> {
            for (label, v) in CostTerms::LABELS.iter().zip(terms.as_array()) {
                w.write_record([
                    zone.clone(),
                    label.to_string(),
                    v.to_string(),
                    self.per_patron_min(v).to_string(),
                ])?;
            }
            w.write_record([zone, "GC".into(), gc.to_string(), self.per_patron_min(gc).to_string()])?;
            Ok(())
        };
        for (z, t) in &self.per_zone {
            emit(z.to_string(), t, t.total())?;
        }
        emit("all".into(), &self.aggregate, self.gc)?;
        w.flush()?;
        Ok(())
    }
}

struct DirectionInputs {
    headway: f64,
    law: OccupancyLaw,
    eq: f64,
    eq2: f64,
    tau: f64,
    line_haul: f64,
}

fn direction_inputs(
    params: &ScenarioParams,
    grid: &ZoneGrid,
    zone: ZoneIndex,
    dir: Direction,
    headway: f64,
) -> DirectionInputs {
    let (lambda, tau) = match dir {
        Direction::Outbound => (params.lambda_p, params.tau_p),
        Direction::Inbound => (params.lambda_d, params.tau_d),
    };
    let law = OccupancyLaw::from_rate(lambda, headway, grid.zone_area());
    let (eq, eq2) = poisson_moments(&law);
    DirectionInputs {
        headway,
        law,
        eq,
        eq2,
        tau,
        line_haul: line_haul_distance(grid, zone),
    }
}

/// Expected fully-flexible tour length and the in-vehicle tour-time kernel
/// scaled by √(lw): E[k*(Q+1)·√((Q+1)A)] and E[k*(Q+1)·√A·((Q+1)^{3/2} − (Q+1)^{1/2})].
fn ff_tour_expectations(tour: &TourLaw, grid: &ZoneGrid, law: &OccupancyLaw) -> (f64, f64) {
    let s = grid.aspect_ratio();
    let root_a = grid.zone_area().sqrt();
    let half = expected_tour_power(law, tour, s, PowerOffset::OneHalf);
    let three_halves = expected_tour_power(law, tour, s, PowerOffset::ThreeHalves);
    (root_a * half, root_a * (three_halves - half))
}

/// All cost terms attributable to one direction of one zone. `gamma` is
/// ignored outbound. Summing both directions gives the zone's full cost.
#[allow(clippy::too_many_arguments)]
pub fn direction_terms(
    params: &ScenarioParams,
    grid: &ZoneGrid,
    zone: ZoneIndex,
    dir: Direction,
    headway: f64,
    gamma: u32,
    capacity: u32,
    routing: Routing<'_>,
) -> CostTerms {
    let d = direction_inputs(params, grid, zone, dir, headway);
    let h = d.headway;
    let v = params.cruise_speed;
    let area = grid.zone_area();
    let pi_v = params.pi_v(capacity);
    let pi_m = params.pi_m(capacity);
    let theta = params.theta;

    let (tour_cost, wait_cost, vk, vh) = match routing {
        Routing::FullyFlexible(tour) => {
            let (tour_len, kernel) = ff_tour_expectations(tour, grid, &d.law);
            let t = kernel / (2.0 * h * v) + d.tau / (2.0 * h) * d.eq2;
            let wait = params.alpha * (d.eq / 2.0 + t);
            let vk = pi_v / (theta * h) * (d.line_haul + tour_len);
            let vh = pi_m / (theta * h) * (d.line_haul / v + tour_len / v + d.tau * d.eq);
            (t, wait, vk, vh)
        }
        Routing::SemiFlexible { w0 } => {
            let t = 1.0 / (2.0 * h) * ((area / (v * w0) + w0 / (2.0 * v)) * d.eq + (w0 / (3.0 * v) + d.tau) * d.eq2);
            let wait = params.alpha / h * d.eq * (h / 2.0 + w0 / (3.0 * v));
            let path = area / w0 + w0 / 2.0 + d.line_haul;
            let km = path / h + d.eq / h * w0 / 3.0;
            let vk = pi_v / theta * km;
            let vh = pi_m / theta * (km / v + d.eq * d.tau / h);
            (t, wait, vk, vh)
        }
    };
    let line_haul = d.line_haul / (h * v) * d.eq;

    let mut terms = CostTerms {
        c_vk: vk,
        c_vh: vh,
        ..CostTerms::default()
    };
    match dir {
        Direction::Outbound => {
            terms.c_w = wait_cost;
            terms.c_tp = tour_cost;
            terms.c_lp = line_haul;
            terms.c_rp = transfer(params, &d, dir, gamma);
        }
        Direction::Inbound => {
            terms.c_td = tour_cost;
            terms.c_ld = line_haul;
            terms.c_rd = transfer(params, &d, dir, gamma);
        }
    }
    terms
}

fn transfer(params: &ScenarioParams, d: &DirectionInputs, dir: Direction, gamma: u32) -> f64 {
    let h = d.headway;
    match dir {
        Direction::Outbound => d.eq / h * (params.t_ft + params.h_trunk / 2.0) + params.tau_a / (2.0 * h) * d.eq2,
        Direction::Inbound => {
            let g = f64::from(gamma);
            d.eq / h * (params.t_tf + (g - 1.0) * h / (2.0 * g)) + params.tau_b / (2.0 * h) * d.eq2
        }
    }
}

fn dir_headway(zd: &ZoneDesign, dir: Direction) -> f64 {
    match dir {
        Direction::Outbound => zd.h_p,
        Direction::Inbound => zd.h_d,
    }
}

pub fn ff_wait_cost_zone(params: &ScenarioParams, grid: &ZoneGrid, zd: &ZoneDesign, tour: &TourLaw) -> f64 {
    direction_terms(
        params,
        grid,
        zd.zone,
        Direction::Outbound,
        zd.h_p,
        zd.gamma,
        1,
        Routing::FullyFlexible(tour),
    )
    .c_w
}

pub fn ff_local_tour_cost_zone(
    params: &ScenarioParams,
    grid: &ZoneGrid,
    zd: &ZoneDesign,
    tour: &TourLaw,
    dir: Direction,
) -> f64 {
    let t = direction_terms(
        params,
        grid,
        zd.zone,
        dir,
        dir_headway(zd, dir),
        zd.gamma,
        1,
        Routing::FullyFlexible(tour),
    );
    t.c_tp + t.c_td
}

/// Line-haul in-vehicle cost; identical under both routing strategies.
pub fn line_haul_cost_zone(params: &ScenarioParams, grid: &ZoneGrid, zd: &ZoneDesign, dir: Direction) -> f64 {
    let d = direction_inputs(params, grid, zd.zone, dir, dir_headway(zd, dir));
    d.line_haul / (d.headway * params.cruise_speed) * d.eq
}

/// Transfer cost at the terminal; identical under both routing strategies.
pub fn transfer_cost_zone(params: &ScenarioParams, grid: &ZoneGrid, zd: &ZoneDesign, dir: Direction) -> f64 {
    let d = direction_inputs(params, grid, zd.zone, dir, dir_headway(zd, dir));
    transfer(params, &d, dir, zd.gamma)
}

/// (C_vk, C_vh) of one zone, both directions.
pub fn ff_agency_cost_zone(
    params: &ScenarioParams,
    grid: &ZoneGrid,
    zd: &ZoneDesign,
    tour: &TourLaw,
    capacity: u32,
) -> (f64, f64) {
    agency(params, grid, zd, capacity, Routing::FullyFlexible(tour))
}

pub fn sf_wait_cost_zone(params: &ScenarioParams, grid: &ZoneGrid, zd: &ZoneDesign, w0: f64) -> f64 {
    direction_terms(
        params,
        grid,
        zd.zone,
        Direction::Outbound,
        zd.h_p,
        zd.gamma,
        1,
        Routing::SemiFlexible { w0 },
    )
    .c_w
}

pub fn sf_local_tour_cost_zone(
    params: &ScenarioParams,
    grid: &ZoneGrid,
    zd: &ZoneDesign,
    w0: f64,
    dir: Direction,
) -> f64 {
    let t = direction_terms(
        params,
        grid,
        zd.zone,
        dir,
        dir_headway(zd, dir),
        zd.gamma,
        1,
        Routing::SemiFlexible { w0 },
    );
    t.c_tp + t.c_td
}

pub fn sf_agency_cost_zone(
    params: &ScenarioParams,
    grid: &ZoneGrid,
    zd: &ZoneDesign,
    w0: f64,
    capacity: u32,
) -> (f64, f64) {
    agency(params, grid, zd, capacity, Routing::SemiFlexible { w0 })
}

fn agency(
    params: &ScenarioParams,
    grid: &ZoneGrid,
    zd: &ZoneDesign,
    capacity: u32,
    routing: Routing<'_>,
) -> (f64, f64) {
    let t = zone_terms(params, grid, zd, capacity, routing);
    (t.c_vk, t.c_vh)
}

pub fn zone_terms(
    params: &ScenarioParams,
    grid: &ZoneGrid,
    zd: &ZoneDesign,
    capacity: u32,
    routing: Routing<'_>,
) -> CostTerms {
    let mut t = direction_terms(
        params,
        grid,
        zd.zone,
        Direction::Outbound,
        zd.h_p,
        zd.gamma,
        capacity,
        routing,
    );
    t += direction_terms(
        params,
        grid,
        zd.zone,
        Direction::Inbound,
        zd.h_d,
        zd.gamma,
        capacity,
        routing,
    );
    t
}

/// Mean plus two standard deviations of the dispatch occupancy fits in
/// the bus.
pub fn capacity_satisfied(mean: f64, capacity: u32) -> bool {
    mean + 2.0 * mean.sqrt() <= f64::from(capacity) + FEAS_TOL
}

/// Checks every constraint on `design`, naming the first violation.
pub fn check_feasibility(params: &ScenarioParams, design: &DesignSolution) -> Result<()> {
    let grid = &design.grid;
    let first = ZoneIndex::new(1, 1);
    if design.zones.len() != grid.zone_count() {
        return Err(DrcError::Precondition(format!(
            "design has {} zones for a {}×{} grid",
            design.zones.len(),
            grid.rows,
            grid.cols
        )));
    }
    match (design.strategy, design.swath) {
        (Strategy::FullyFlexible, Some(_)) => {
            return Err(DrcError::Infeasible {
                constraint: "swath width (fully-flexible design)",
                zone: first,
            })
        }
        (Strategy::SemiFlexible, None) => {
            return Err(DrcError::Infeasible {
                constraint: "swath width (missing)",
                zone: first,
            })
        }
        (Strategy::SemiFlexible, Some(s)) => {
            let ok = feasible_swath_widths(grid.zone_length, grid.zone_width, 4)
                .iter()
                .any(|c| (c.w0 - s.w0).abs() <= 1e-9 * s.w0);
            if !ok {
                return Err(DrcError::Infeasible {
                    constraint: "swath width",
                    zone: first,
                });
            }
        }
        (Strategy::FullyFlexible, None) => {}
    }
    let lo = |h: f64, min: f64| h >= min * (1.0 - FEAS_TOL);
    let hi = |h: f64| h <= params.h_max * (1.0 + FEAS_TOL);
    for (i, zd) in design.zones.iter().enumerate() {
        let z = zd.zone;
        if !grid.contains(z) || grid.ordinal(z) != i {
            return Err(DrcError::Precondition(format!("zone {z} out of order or outside grid")));
        }
        if !(lo(zd.h_p, params.h_min) && hi(zd.h_p)) {
            return Err(DrcError::Infeasible {
                constraint: "outbound headway bounds",
                zone: z,
            });
        }
        if !(lo(zd.h_d, params.h_min.max(params.h_trunk)) && hi(zd.h_d)) {
            return Err(DrcError::Infeasible {
                constraint: "inbound headway bounds",
                zone: z,
            });
        }
        if zd.gamma == 0 || (zd.h_d - f64::from(zd.gamma) * params.h_trunk).abs() > FEAS_TOL * zd.h_d.max(1.0) {
            return Err(DrcError::Infeasible {
                constraint: "trunk synchronization",
                zone: z,
            });
        }
        let area = grid.zone_area();
        if !capacity_satisfied(params.lambda_p * zd.h_p * area, design.capacity) {
            return Err(DrcError::Infeasible {
                constraint: "outbound capacity",
                zone: z,
            });
        }
        if !capacity_satisfied(params.lambda_d * zd.h_d * area, design.capacity) {
            return Err(DrcError::Infeasible {
                constraint: "inbound capacity",
                zone: z,
            });
        }
    }
    Ok(())
}

/// Generalized cost of a full design, aggregated over zones.
pub fn total_generalized_cost(
    params: &ScenarioParams,
    design: &DesignSolution,
    tour: &TourLaw,
) -> Result<CostBreakdown> {
    check_feasibility(params, design)?;
    let routing = design.routing(tour);
    let mut aggregate = CostTerms::default();
    let mut per_zone = Vec::with_capacity(design.zones.len());
    let mut taylor_warning = false;
    let area = design.grid.zone_area();
    for zd in &design.zones {
        let t = zone_terms(params, &design.grid, zd, design.capacity, routing);
        aggregate += t;
        per_zone.push((zd.zone, t));
        if design.strategy == Strategy::FullyFlexible {
            let means = [params.lambda_p * zd.h_p * area, params.lambda_d * zd.h_d * area];
            taylor_warning |= means
                .iter()
                .any(|&m| !OccupancyLaw::from_rate(m, 1.0, 1.0).taylor_reliable());
        }
    }
    let gc = aggregate.total();
    let patrons_per_hour = params.patrons_per_hour();
    Ok(CostBreakdown {
        aggregate,
        per_zone,
        gc,
        patrons_per_hour,
        gc_per_patron_min: gc / patrons_per_hour * 60.0,
        taylor_warning,
    })
}

/// The head-to-head metric set: per-patron costs, design variables, mean
/// occupancies, mean k* and mean tour lengths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table5Metrics {
    pub gc: f64,
    pub user: f64,
    pub agency: f64,
    pub wait: f64,
    pub tour: f64,
    pub line_haul: f64,
    pub transfer: f64,
    pub capacity: u32,
    pub rows: u32,
    pub cols: u32,
    pub w0: Option<f64>,
    pub mean_h_p_min: f64,
    pub mean_h_d_min: f64,
    pub mean_q_p: f64,
    pub mean_q_d: f64,
    pub mean_k_p: f64,
    pub mean_k_d: f64,
    pub mean_tour_p: f64,
    pub mean_tour_d: f64,
}

impl Table5Metrics {
    pub const ROW_LABELS: [&'static str; 18] = [
        "mean total cost (min/patron)",
        "mean user cost (min/patron)",
        "mean agency cost (min/patron)",
        "mean waiting time at home (min/patron)",
        "mean local-tour in-vehicle time (min/patron)",
        "mean line-haul travel time (min/patron)",
        "mean transfer time (min/patron)",
        "bus capacity K (patrons/bus)",
        "zones M x N",
        "swath width w0 (km)",
        "mean outbound headway per zone (min)",
        "mean inbound headway per zone (min)",
        "mean outbound occupancy (patrons/bus)",
        "mean inbound occupancy (patrons/bus)",
        "mean outbound k*",
        "mean inbound k*",
        "mean outbound tour length (km)",
        "mean inbound tour length (km)",
    ];

    /// Row values rendered as text, in label order.
    pub fn row_values(&self) -> [String; 18] {
        let f = |x: f64| format!("{x:.4}");
        [
            f(self.gc),
            f(self.user),
            f(self.agency),
            f(self.wait),
            f(self.tour),
            f(self.line_haul),
            f(self.transfer),
            self.capacity.to_string(),
            format!("{}x{}", self.rows, self.cols),
            self.w0.map(f).unwrap_or_else(|| "-".into()),
            f(self.mean_h_p_min),
            f(self.mean_h_d_min),
            f(self.mean_q_p),
            f(self.mean_q_d),
            f(self.mean_k_p),
            f(self.mean_k_d),
            f(self.mean_tour_p),
            f(self.mean_tour_d),
        ]
    }
}

/// Builds the metric set for a costed design. Directional in-vehicle and
/// transfer rows average the two directions per patron of one direction,
/// so that waiting plus twice the sum of rows 5–7 equals the user cost.
/// Mean k* for fully-flexible routing is k* evaluated at E[Q]+1 stops;
/// for swath routing it is the swath tour divided by √(E[Q]·A).
pub fn table5_metrics(
    params: &ScenarioParams,
    design: &DesignSolution,
    cost: &CostBreakdown,
    tour: &TourLaw,
) -> Table5Metrics {
    let a = &cost.aggregate;
    let pm = |h: f64| cost.per_patron_min(h);
    let grid = &design.grid;
    let area = grid.zone_area();
    let s = grid.aspect_ratio();
    let n = design.zones.len() as f64;

    let stats = |lambda: f64, h: f64| -> (f64, f64, f64) {
        let q = lambda * h * area;
        match design.w0() {
            Some(w0) => {
                let len = q * w0 / 3.0 + area / w0 + w0 / 2.0;
                (q, len / (q * area).sqrt(), len)
            }
            None => {
                let x = q + 1.0;
                let k = tour.kstar(x, s);
                (q, k, k * (x * area).sqrt())
            }
        }
    };
    let mut acc = [0.0; 6];
    for zd in &design.zones {
        let (qp, kp, tp) = stats(params.lambda_p, zd.h_p);
        let (qd, kd, td) = stats(params.lambda_d, zd.h_d);
        for (slot, v) in acc.iter_mut().zip([qp, qd, kp, kd, tp, td]) {
            *slot += v / n;
        }
    }

    Table5Metrics {
        gc: cost.gc_per_patron_min,
        user: pm(a.user()),
        agency: pm(a.agency()),
        wait: pm(a.c_w),
        tour: pm(a.c_tp + a.c_td) / 2.0,
        line_haul: pm(a.c_lp + a.c_ld) / 2.0,
        transfer: pm(a.c_rp + a.c_rd) / 2.0,
        capacity: design.capacity,
        rows: grid.rows,
        cols: grid.cols,
        w0: design.w0(),
        mean_h_p_min: design.mean_h_p() * 60.0,
        mean_h_d_min: design.mean_h_d() * 60.0,
        mean_q_p: acc[0],
        mean_q_d: acc[1],
        mean_k_p: acc[2],
        mean_k_d: acc[3],
        mean_tour_p: acc[4],
        mean_tour_d: acc[5],
    }
}
