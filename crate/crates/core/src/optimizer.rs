//! Exhaustive search over zoning, bus capacity and swath width, with the
//! continuous headways optimized zone by zone.
//!
//! For a fixed (M, N, K, w0) the generalized cost is a sum of per-zone,
//! per-direction terms, so each zone's outbound headway and inbound trunk
//! multiple γ are optimized independently.

use std::cmp::Ordering;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::costs::{
    capacity_satisfied, direction_terms, table5_metrics, total_generalized_cost, CostBreakdown, DesignSolution,
    Direction, Routing, Strategy, Table5Metrics, ZoneDesign,
};
use crate::error::{DrcError, Result};
use crate::params::{make_grid, ScenarioParams, ZoneGrid, ZoneIndex};
use crate::tour_length::{feasible_swath_widths, SwathConfig, TourLaw};

/// Headway refinement tolerance: 0.1 s in hours.
pub const HEADWAY_TOL: f64 = 0.1 / 3600.0;
const TIE_REL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchSpace {
    pub k_range: Vec<u32>,
    pub m_range: Vec<u32>,
    pub n_range: Vec<u32>,
    pub gamma_range: Vec<u32>,
    pub n_starts: usize,
    pub max_strips: u32,
    pub strategy: Strategy,
}

impl SearchSpace {
    /// K ∈ 1..=20, M, N ∈ 1..=6, γ ∈ 1..=5, 20 starts, up to 4 strips.
    pub fn standard(strategy: Strategy) -> Self {
        SearchSpace {
            k_range: (1..=20).collect(),
            m_range: (1..=6).collect(),
            n_range: (1..=6).collect(),
            gamma_range: (1..=5).collect(),
            n_starts: 20,
            max_strips: 4,
            strategy,
        }
    }

    pub fn with_strategy(&self, strategy: Strategy) -> Self {
        SearchSpace {
            strategy,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let empty = |name: &str, v: &[u32]| {
            if v.is_empty() || v.contains(&0) {
                Err(DrcError::Precondition(format!("{name} must be nonempty and positive")))
            } else {
                Ok(())
            }
        };
        empty("K range", &self.k_range)?;
        empty("M range", &self.m_range)?;
        empty("N range", &self.n_range)?;
        empty("gamma range", &self.gamma_range)?;
        if self.n_starts < 2 || self.max_strips == 0 {
            return Err(DrcError::Precondition("need at least 2 starts and 1 strip".into()));
        }
        Ok(())
    }
}

/// Largest headway keeping mean + 2·std occupancy within K: the root of
/// x + 2√x = K is x = (√(K+1) − 1)², and H = x / (λ·l·w).
pub fn headway_cap_from_capacity(lambda: f64, l: f64, w: f64, capacity: u32) -> f64 {
    let x = ((f64::from(capacity) + 1.0).sqrt() - 1.0).powi(2);
    x / (lambda * l * w)
}

/// Minimizes `f` on [lo, hi]: samples `n_starts` evenly spaced points, then
/// refines every sampled local minimum by golden-section search on its
/// neighbouring bracket until the bracket is narrower than `tol`. Among
/// equal values the larger argument wins.
pub fn minimize_bounded(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n_starts: usize, tol: f64) -> (f64, f64) {
    if hi - lo <= tol {
        let x = if hi > lo { hi } else { lo };
        return (x, f(x));
    }
    let n = n_starts.max(2);
    let xs: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();

    let better = |a: (f64, f64), b: (f64, f64)| match a.1.partial_cmp(&b.1) {
        Some(Ordering::Less) => true,
        Some(Ordering::Equal) => a.0 > b.0,
        _ => false,
    };
    let mut best = (xs[0], fs[0]);
    for i in 0..n {
        let left = i == 0 || fs[i] <= fs[i - 1];
        let right = i == n - 1 || fs[i] <= fs[i + 1];
        if !(left && right) {
            continue;
        }
        let a = xs[i.saturating_sub(1)];
        let b = xs[(i + 1).min(n - 1)];
        let cand = golden_section(&f, a, b, tol);
        for c in [cand, (xs[i], fs[i])] {
            if better(c, best) {
                best = c;
            }
        }
    }
    best
}

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Optimal outbound headway of zone `z` and the outbound cost there.
pub fn optimize_zone_headway(
    params: &ScenarioParams,
    grid: &ZoneGrid,
    z: ZoneIndex,
    capacity: u32,
    routing: Routing<'_>,
    n_starts: usize,
) -> Result<(f64, f64)> {
    let cap = headway_cap_from_capacity(params.lambda_p, grid.zone_length, grid.zone_width, capacity);
    let lo = params.h_min;
    let hi = params.h_max.min(cap);
    if hi < lo {
        return Err(DrcError::Infeasible {
            constraint: "outbound capacity",
            zone: z,
        });
    }
    let cost = |h: f64| direction_terms(params, grid, z, Direction::Outbound, h, 1, capacity, routing).total();
    Ok(minimize_bounded(cost, lo, hi, n_starts, HEADWAY_TOL))
}

/// Best trunk multiple γ for zone `z`: (γ, H_d, inbound cost). The
/// smallest γ wins ties.
pub fn optimize_zone_gamma(
    params: &ScenarioParams,
    grid: &ZoneGrid,
    z: ZoneIndex,
    capacity: u32,
    routing: Routing<'_>,
    gamma_range: &[u32],
) -> Result<(u32, f64, f64)> {
    let lo = params.h_min.max(params.h_trunk);
    let mut best: Option<(u32, f64, f64)> = None;
    let mut gammas = gamma_range.to_vec();
    gammas.sort_unstable();
    for g in gammas {
        let h = f64::from(g) * params.h_trunk;
        if h < lo * (1.0 - 1e-12) || h > params.h_max * (1.0 + 1e-12) {
            continue;
        }
        if !capacity_satisfied(params.lambda_d * h * grid.zone_area(), capacity) {
            continue;
        }
        let c = direction_terms(params, grid, z, Direction::Inbound, h, g, capacity, routing).total();
        if best.is_none_or(|b| c < b.2 * (1.0 - TIE_REL)) {
            best = Some((g, h, c));
        }
    }
    best.ok_or(DrcError::Infeasible {
        constraint: "inbound capacity",
        zone: z,
    })
}

/// Optimizes all zones for one discrete combination.
pub fn optimize_combo(
    params: &ScenarioParams,
    grid: &ZoneGrid,
    capacity: u32,
    routing: Routing<'_>,
    space: &SearchSpace,
) -> Result<Vec<ZoneDesign>> {
    grid.zones()
        .map(|z| {
            let (h_p, _) = optimize_zone_headway(params, grid, z, capacity, routing, space.n_starts)?;
            let (gamma, h_d, _) = optimize_zone_gamma(params, grid, z, capacity, routing, &space.gamma_range)?;
            Ok(ZoneDesign {
                zone: z,
                h_p,
                h_d,
                gamma,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchLogEntry {
    pub rows: u32,
    pub cols: u32,
    pub capacity: u32,
    pub w0: Option<f64>,
    /// Best GC for the combo (h per hour); absent when infeasible.
    pub gc: Option<f64>,
    pub gc_per_patron_min: Option<f64>,
    pub infeasible: Option<String>,
    pub taylor_warning: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizationResult {
    pub best: DesignSolution,
    pub cost: CostBreakdown,
    pub search_log: Vec<SearchLogEntry>,
    pub wall_time_s: f64,
}

impl OptimizationResult {
    pub fn write_search_log_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "M",
            "N",
            "K",
            "w0",
            "gc_h",
            "gc_min_per_patron",
            "infeasible",
            "taylor_warning",
        ])?;
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        for e in &self.search_log {
            w.write_record([
                e.rows.to_string(),
                e.cols.to_string(),
                e.capacity.to_string(),
                opt(e.w0),
                opt(e.gc),
                opt(e.gc_per_patron_min),
                e.infeasible.clone().unwrap_or_default(),
                e.taylor_warning.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

struct Combo {
    rows: u32,
    cols: u32,
    capacity: u32,
    swath: Option<SwathConfig>,
}

/// Tie-break among equal-cost designs: smaller K, fewer zones, smaller
/// total γ, larger mean headway, then fewer rows and wider swaths so the
/// result never depends on evaluation order.
fn prefer(a: &(DesignSolution, CostBreakdown), b: &(DesignSolution, CostBreakdown)) -> Ordering {
    let (da, ca) = a;
    let (db, cb) = b;
    let scale = ca.gc.abs().max(cb.gc.abs()).max(1e-300);
    if (ca.gc - cb.gc).abs() > TIE_REL * scale {
        return ca.gc.total_cmp(&cb.gc);
    }
    let gsum = |d: &DesignSolution| d.zones.iter().map(|z| z.gamma).sum::<u32>();
    da.capacity
        .cmp(&db.capacity)
        .then((da.grid.rows * da.grid.cols).cmp(&(db.grid.rows * db.grid.cols)))
        .then(gsum(da).cmp(&gsum(db)))
        .then(db.mean_h_p().total_cmp(&da.mean_h_p()))
        .then(da.grid.rows.cmp(&db.grid.rows))
        .then(db.w0().unwrap_or(0.0).total_cmp(&da.w0().unwrap_or(0.0)))
}

pub fn search_design(params: &ScenarioParams, space: &SearchSpace, tour: &TourLaw) -> Result<OptimizationResult> {
    space.validate()?;
    let start = Instant::now();
    let mut combos = Vec::new();
    for &m in &space.m_range {
        for &n in &space.n_range {
            let grid = make_grid(params, m, n)?;
            let swaths: Vec<Option<SwathConfig>> = match space.strategy {
                Strategy::FullyFlexible => vec![None],
                Strategy::SemiFlexible => feasible_swath_widths(grid.zone_length, grid.zone_width, space.max_strips)
                    .into_iter()
                    .map(Some)
                    .collect(),
            };
            for &k in &space.k_range {
                for &swath in &swaths {
                    combos.push(Combo {
                        rows: m,
                        cols: n,
                        capacity: k,
                        swath,
                    });
                }
            }
        }
    }

    let evaluated: Vec<Result<(DesignSolution, CostBreakdown)>> = combos
        .par_iter()
        .map(|c| {
            let grid = make_grid(params, c.rows, c.cols)?;
            let routing = match c.swath {
                Some(s) => Routing::SemiFlexible { w0: s.w0 },
                None => Routing::FullyFlexible(tour),
            };
            let zones = optimize_combo(params, &grid, c.capacity, routing, space)?;
            let design = DesignSolution {
                strategy: space.strategy,
                grid,
                capacity: c.capacity,
                zones,
                swath: c.swath,
            };
            let cost = total_generalized_cost(params, &design, tour)?;
            Ok((design, cost))
        })
        .collect();

    let mut search_log = Vec::with_capacity(combos.len());
    let mut best: Option<(DesignSolution, CostBreakdown)> = None;
    for (c, r) in combos.iter().zip(evaluated) {
        let mut entry = SearchLogEntry {
            rows: c.rows,
            cols: c.cols,
            capacity: c.capacity,
            w0: c.swath.map(|s| s.w0),
            gc: None,
            gc_per_patron_min: None,
            infeasible: None,
            taylor_warning: false,
        };
        match r {
            Ok(pair) => {
                entry.gc = Some(pair.1.gc);
                entry.gc_per_patron_min = Some(pair.1.gc_per_patron_min);
                entry.taylor_warning = pair.1.taylor_warning;
                if best.as_ref().is_none_or(|b| prefer(&pair, b) == Ordering::Less) {
                    best = Some(pair);
                }
            }
            Err(e) if e.is_infeasibility() => entry.infeasible = Some(e.to_string()),
            Err(e) => return Err(e),
        }
        search_log.push(entry);
    }
    let (best, cost) = best.ok_or(DrcError::NoFeasibleDesign)?;
    if cost.taylor_warning {
        log::warn!("optimal design has dispatch occupancies below the Taylor-accurate range");
    }
    Ok(OptimizationResult {
        best,
        cost,
        search_log,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct StrategyComparison {
    pub ff: OptimizationResult,
    pub sf: OptimizationResult,
    pub ff_metrics: Table5Metrics,
    pub sf_metrics: Table5Metrics,
    /// GC saving of semi-flexible over fully-flexible routing (%).
    pub sf_saving_pct: f64,
}

impl StrategyComparison {
    pub fn write_table5_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["row", "metric", "fully_flexible", "semi_flexible"])?;
        let ff = self.ff_metrics.row_values();
        let sf = self.sf_metrics.row_values();
        for (i, label) in Table5Metrics::ROW_LABELS.iter().enumerate() {
            w.write_record([(i + 1).to_string(), label.to_string(), ff[i].clone(), sf[i].clone()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn compare_strategies(params: &ScenarioParams, space: &SearchSpace, tour: &TourLaw) -> Result<StrategyComparison> {
    let ff = search_design(params, &space.with_strategy(Strategy::FullyFlexible), tour)?;
    let sf = search_design(params, &space.with_strategy(Strategy::SemiFlexible), tour)?;
    let ff_metrics = table5_metrics(params, &ff.best, &ff.cost, tour);
    let sf_metrics = table5_metrics(params, &sf.best, &sf.cost, tour);
    let sf_saving_pct = (ff.cost.gc - sf.cost.gc) / ff.cost.gc * 100.0;
    Ok(StrategyComparison {
        ff,
        sf,
        ff_metrics,
        sf_metrics,
        sf_saving_pct,
    })
}
