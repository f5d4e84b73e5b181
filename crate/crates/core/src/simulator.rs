//! Monte Carlo operation of a frozen design over one-hour demand draws.
//!
//! Fully-flexible buses collect every request received during their
//! dispatch window and serve them on an exact tour. Semi-flexible buses
//! sweep a boustrophedon through the swath strips and pick up whatever
//! appeared before they pass. Only dispatch windows lying entirely inside
//! the hour are scored; per-hour rates are the window totals divided by the
//! covered time.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::costs::{total_generalized_cost, CostTerms, DesignSolution, Direction, Strategy, ZoneDesign};
use crate::error::{DrcError, Result};
use crate::expectations::{expected_tour_power, sample_poisson, OccupancyLaw, PowerOffset};
use crate::params::{line_haul_distance, ScenarioParams, ZoneGrid};
use crate::rng;
use crate::tour_length::{StripAxis, SwathConfig, TourLaw};
use crate::tsp::{exact_tour, heuristic_tour, Point, PointSet, TourMode, EXACT_CAPACITY};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Request {
    pub x: f64,
    pub y: f64,
    /// Request time for outbound patrons, trunk arrival time for inbound.
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemandRealization {
    pub outbound: Vec<Request>,
    pub inbound: Vec<Request>,
}

fn poisson_requests<R: Rng>(lambda: f64, params: &ScenarioParams, rng: &mut R) -> Vec<Request> {
    let n = sample_poisson(lambda * params.region_area(), rng);
    (0..n)
        .map(|_| Request {
            x: rng.random::<f64>() * params.region_length,
            y: rng.random::<f64>() * params.region_width,
            t: rng.random::<f64>(),
        })
        .collect()
}

pub fn generate_demand(params: &ScenarioParams, seed: u64) -> DemandRealization {
    let mut rng = rng::stream(seed, &[0]);
    let outbound = poisson_requests(params.lambda_p, params, &mut rng);
    let inbound = poisson_requests(params.lambda_d, params, &mut rng);
    DemandRealization { outbound, inbound }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispatchRecord {
    pub zone: crate::params::ZoneIndex,
    pub direction: Direction,
    /// Index k of the dispatch window ((k−1)H, kH].
    pub window: usize,
    pub patrons: usize,
    /// Local tour length, excluding line-haul (km).
    pub tour_km: f64,
    pub heuristic: bool,
}

/// Realized per-hour quantities of one simulated hour.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimRun {
    pub terms: CostTerms,
    pub gc: f64,
    pub outbound_tour_km: f64,
    pub inbound_tour_km: f64,
    pub pickup_loss: f64,
    pub dropoff_loss: f64,
    pub dispatches: usize,
    pub overcapacity_events: usize,
    /// Requests that fell into a scored window.
    pub served: usize,
    /// Requests outside every scored window.
    pub censored: usize,
    pub records: Vec<DispatchRecord>,
}

#[derive(Default)]
struct Tally {
    wait: f64,
    in_vehicle: f64,
    line_haul: f64,
    transfer: f64,
    km: f64,
    hours: f64,
    tour_km: f64,
    dwell_loss: f64,
}

struct RunBuilder<'a> {
    params: &'a ScenarioParams,
    design: &'a DesignSolution,
    run: SimRun,
}

impl<'a> RunBuilder<'a> {
    fn new(params: &'a ScenarioParams, design: &'a DesignSolution) -> Self {
        RunBuilder {
            params,
            design,
            run: SimRun {
                terms: CostTerms::default(),
                gc: 0.0,
                outbound_tour_km: 0.0,
                inbound_tour_km: 0.0,
                pickup_loss: 0.0,
                dropoff_loss: 0.0,
                dispatches: 0,
                overcapacity_events: 0,
                served: 0,
                censored: 0,
                records: Vec::new(),
            },
        }
    }

    fn record(&mut self, rec: DispatchRecord) {
        self.run.dispatches += 1;
        if rec.patrons > self.design.capacity as usize {
            self.run.overcapacity_events += 1;
        }
        self.run.records.push(rec);
    }

    /// Adds one zone-direction tally, scaled to a per-hour rate over
    /// `duration` hours of scored windows.
    fn add(&mut self, dir: Direction, t: Tally, duration: f64) {
        let p = self.params;
        let k = self.design.capacity;
        let r = 1.0 / duration;
        let terms = &mut self.run.terms;
        terms.c_vk += p.pi_v(k) / p.theta * t.km * r;
        terms.c_vh += p.pi_m(k) / p.theta * t.hours * r;
        match dir {
            Direction::Outbound => {
                terms.c_w += p.alpha * t.wait * r;
                terms.c_tp += t.in_vehicle * r;
                terms.c_lp += t.line_haul * r;
                terms.c_rp += t.transfer * r;
                self.run.outbound_tour_km += t.tour_km * r;
                self.run.pickup_loss += t.dwell_loss * r;
            }
            Direction::Inbound => {
                terms.c_td += t.in_vehicle * r;
                terms.c_ld += t.line_haul * r;
                terms.c_rd += t.transfer * r;
                self.run.inbound_tour_km += t.tour_km * r;
                self.run.dropoff_loss += t.dwell_loss * r;
            }
        }
    }

    fn finish(mut self) -> SimRun {
        self.run.gc = self.run.terms.total();
        self.run
    }
}

/// Per-dispatch charges that depend only on the realized count: line-haul
/// in-vehicle time, terminal transfer, dwell loss and the vehicle's fixed
/// line-haul leg.
fn count_charges(params: &ScenarioParams, zd: &ZoneDesign, dir: Direction, lh: f64, q: usize, t: &mut Tally) {
    let qf = q as f64;
    let v = params.cruise_speed;
    let (tau, transfer) = match dir {
        Direction::Outbound => (
            params.tau_p,
            qf * (params.t_ft + params.h_trunk / 2.0) + params.tau_a * qf * qf / 2.0,
        ),
        Direction::Inbound => {
            let g = f64::from(zd.gamma);
            (
                params.tau_d,
                qf * (params.t_tf + (g - 1.0) * zd.h_d / (2.0 * g)) + params.tau_b * qf * qf / 2.0,
            )
        }
    };
    t.line_haul += qf * lh / v;
    t.transfer += transfer;
    t.dwell_loss += tau * qf * qf;
    t.km += lh;
    t.hours += lh / v + tau * qf;
}

/// Number of whole windows of length `h` that fit in `horizon`.
fn complete_windows(horizon: f64, h: f64) -> usize {
    (horizon / h + 1e-9).floor().max(0.0) as usize
}

fn window_index(t: f64, h: f64) -> usize {
    ((t / h).ceil() as usize).max(1)
}

type LocalRequest = (f64, f64, f64);

fn bucket_by_zone(grid: &ZoneGrid, reqs: &[Request]) -> Vec<Vec<LocalRequest>> {
    let mut out = vec![Vec::new(); grid.zone_count()];
    for r in reqs {
        let z = grid.locate(r.x, r.y);
        let (ox, oy) = grid.origin(z);
        out[grid.ordinal(z)].push((r.x - ox, r.y - oy, r.t));
    }
    out
}

fn check_strategy(design: &DesignSolution, want: Strategy) -> Result<()> {
    if design.strategy != want {
        return Err(DrcError::Precondition(format!(
            "design is {} but the {} simulator was called",
            design.strategy, want
        )));
    }
    Ok(())
}

/// Simulates one hour of fully-flexible operation. Each dispatch starts
/// and ends at a dispatch point drawn uniformly in the zone and visits its
/// batch on an exact closed tour; batches too large for the exact solver
/// fall back to nearest neighbour plus 2-opt.
pub fn simulate_ff_hour(
    params: &ScenarioParams,
    design: &DesignSolution,
    demand: &DemandRealization,
    seed: u64,
) -> Result<SimRun> {
    check_strategy(design, Strategy::FullyFlexible)?;
    let grid = &design.grid;
    let v = params.cruise_speed;
    let mut rng = rng::stream(seed, &[1]);
    let mut b = RunBuilder::new(params, design);

    for dir in [Direction::Outbound, Direction::Inbound] {
        let reqs = match dir {
            Direction::Outbound => &demand.outbound,
            Direction::Inbound => &demand.inbound,
        };
        let tau = match dir {
            Direction::Outbound => params.tau_p,
            Direction::Inbound => params.tau_d,
        };
        for (zi, zone_reqs) in bucket_by_zone(grid, reqs).into_iter().enumerate() {
            let zd = design.zones[zi];
            let h = match dir {
                Direction::Outbound => zd.h_p,
                Direction::Inbound => zd.h_d,
            };
            let n_windows = complete_windows(1.0, h);
            if n_windows == 0 {
                return Err(DrcError::Precondition(format!(
                    "headway {h} h exceeds the one-hour horizon"
                )));
            }
            let lh = line_haul_distance(grid, zd.zone);
            let mut batches: Vec<Vec<LocalRequest>> = vec![Vec::new(); n_windows];
            for r in zone_reqs {
                let k = window_index(r.2, h);
                if k <= n_windows {
                    batches[k - 1].push(r);
                    b.run.served += 1;
                } else {
                    b.run.censored += 1;
                }
            }
            let mut tally = Tally::default();
            for (ki, batch) in batches.iter().enumerate() {
                let dispatch_time = (ki + 1) as f64 * h;
                let depot = Point::new(
                    rng.random::<f64>() * grid.zone_length,
                    rng.random::<f64>() * grid.zone_width,
                );
                let q = batch.len();
                let (tour_km, heuristic) = if q == 0 {
                    (0.0, false)
                } else {
                    let mut pts = Vec::with_capacity(q + 1);
                    pts.push(depot);
                    pts.extend(batch.iter().map(|r| Point::new(r.0, r.1)));
                    let ps = PointSet::new(pts)?;
                    let (tour, heuristic) = if q < EXACT_CAPACITY {
                        (exact_tour(&ps, TourMode::ClosedCycle)?, false)
                    } else {
                        log::debug!("batch of {q} exceeds the exact solver; using 2-opt");
                        (heuristic_tour(&ps, TourMode::ClosedCycle), true)
                    };
                    let tour_time = tour.length / v + q as f64 * tau;
                    let mut dist = 0.0;
                    let pts = ps.points();
                    for (j, w) in tour.order.windows(2).enumerate() {
                        dist += pts[w[0]].manhattan(&pts[w[1]]);
                        let offset = dist / v + j as f64 * tau + tau / 2.0;
                        match dir {
                            Direction::Outbound => {
                                let r = batch[w[1] - 1];
                                tally.wait += dispatch_time - r.2 + offset;
                                tally.in_vehicle += tour_time - offset;
                            }
                            Direction::Inbound => tally.in_vehicle += offset,
                        }
                    }
                    (tour.length, heuristic)
                };
                tally.tour_km += tour_km;
                tally.km += tour_km;
                tally.hours += tour_km / v;
                count_charges(params, &zd, dir, lh, q, &mut tally);
                b.record(DispatchRecord {
                    zone: zd.zone,
                    direction: dir,
                    window: ki + 1,
                    patrons: q,
                    tour_km,
                    heuristic,
                });
            }
            b.add(dir, tally, n_windows as f64 * h);
        }
    }
    Ok(b.finish())
}

/// Position of a zone-local point on the strip sweep.
#[derive(Debug, Clone, Copy)]
struct SweepPos {
    /// Distance along the sweep from its outbound start (km).
    sigma: f64,
    /// Coordinate across the strips, measured from the terminal side (km).
    cross: f64,
}

struct Sweep {
    n_strips: usize,
    w0: f64,
    strip_len: f64,
    along: StripAxis,
}

impl Sweep {
    fn new(grid: &ZoneGrid, swath: &SwathConfig) -> Self {
        Sweep {
            n_strips: swath.n_strips as usize,
            w0: swath.w0,
            strip_len: swath.strip_length(grid.zone_length, grid.zone_width),
            along: swath.along,
        }
    }

    fn length(&self) -> f64 {
        self.n_strips as f64 * self.strip_len
    }

    /// Outbound sweep: the farthest strip first, ending at the terminal
    /// corner. Odd strips run toward the corner, even strips away from it.
    fn locate(&self, x: f64, y: f64) -> SweepPos {
        let (long, cross) = match self.along {
            StripAxis::Length => (x, y),
            StripAxis::Width => (y, x),
        };
        let j = ((cross / self.w0).floor() as usize).min(self.n_strips - 1) + 1;
        let within = if j % 2 == 1 { self.strip_len - long } else { long };
        SweepPos {
            sigma: (self.n_strips - j) as f64 * self.strip_len + within,
            cross,
        }
    }

    fn random_far_cross<R: Rng>(&self, rng: &mut R) -> f64 {
        (self.n_strips as f64 - 1.0 + rng.random::<f64>()) * self.w0
    }
}

/// Simulates one hour of semi-flexible operation. Outbound buses leave the
/// far end of the sweep every H_p, nominally passing sweep position σ at
/// kH_p + σ/v; a request at σ made at time t boards the first bus with
/// kH_p + σ/v ≥ t. Travel between consecutive stops is the lateral offset
/// plus the distance along the sweep. Inbound buses run the sweep in
/// reverse from the corner carrying the patrons of their trunk window.
pub fn simulate_sf_hour(
    params: &ScenarioParams,
    design: &DesignSolution,
    demand: &DemandRealization,
    seed: u64,
) -> Result<SimRun> {
    check_strategy(design, Strategy::SemiFlexible)?;
    let swath = design
        .swath
        .ok_or(DrcError::Precondition("semi-flexible design without swath".into()))?;
    let grid = &design.grid;
    let v = params.cruise_speed;
    let sweep = Sweep::new(grid, &swath);
    let total = sweep.length();
    let mut rng = rng::stream(seed, &[2]);
    let mut b = RunBuilder::new(params, design);

    for (zi, zone_reqs) in bucket_by_zone(grid, &demand.outbound).into_iter().enumerate() {
        let zd = design.zones[zi];
        let h = zd.h_p;
        let lh = line_haul_distance(grid, zd.zone);
        let n_windows = complete_windows(1.0 - total / v, h);
        if n_windows == 0 {
            return Err(DrcError::Precondition(format!(
                "headway {h} h leaves no complete sweep in one hour"
            )));
        }
        let mut buses: Vec<Vec<(SweepPos, f64)>> = vec![Vec::new(); n_windows];
        for r in &zone_reqs {
            let pos = sweep.locate(r.0, r.1);
            let u = r.2 - pos.sigma / v;
            let k = (u / h).ceil();
            if k >= 1.0 && (k as usize) <= n_windows {
                buses[k as usize - 1].push((pos, u));
                b.run.served += 1;
            } else {
                b.run.censored += 1;
            }
        }
        let tau = params.tau_p;
        let mut tally = Tally::default();
        for (ki, bus) in buses.iter_mut().enumerate() {
            let k = (ki + 1) as f64;
            bus.sort_by(|a, c| a.0.sigma.total_cmp(&c.0.sigma));
            let q = bus.len();
            let start = SweepPos {
                sigma: 0.0,
                cross: sweep.random_far_cross(&mut rng),
            };
            let mut prev = start;
            let mut dist = 0.0;
            let mut pickups = Vec::with_capacity(q);
            for (j, &(pos, u)) in bus.iter().enumerate() {
                let lateral = (pos.cross - prev.cross).abs();
                dist += lateral + (pos.sigma - prev.sigma);
                let pickup = dist / v + j as f64 * tau + tau / 2.0;
                tally.wait += k * h - u + lateral / v;
                pickups.push(pickup);
                prev = pos;
            }
            dist += prev.cross + (total - prev.sigma);
            let tour_time = dist / v + q as f64 * tau;
            tally.in_vehicle += pickups.iter().map(|p| tour_time - p).sum::<f64>();
            tally.tour_km += dist;
            tally.km += dist;
            tally.hours += dist / v;
            count_charges(params, &zd, Direction::Outbound, lh, q, &mut tally);
            b.record(DispatchRecord {
                zone: zd.zone,
                direction: Direction::Outbound,
                window: ki + 1,
                patrons: q,
                tour_km: dist,
                heuristic: false,
            });
        }
        b.add(Direction::Outbound, tally, n_windows as f64 * h);
    }

    for (zi, zone_reqs) in bucket_by_zone(grid, &demand.inbound).into_iter().enumerate() {
        let zd = design.zones[zi];
        let h = zd.h_d;
        let lh = line_haul_distance(grid, zd.zone);
        let n_windows = complete_windows(1.0, h);
        if n_windows == 0 {
            return Err(DrcError::Precondition(format!(
                "headway {h} h exceeds the one-hour horizon"
            )));
        }
        let mut buses: Vec<Vec<SweepPos>> = vec![Vec::new(); n_windows];
        for r in &zone_reqs {
            let k = window_index(r.2, h);
            if k <= n_windows {
                let out = sweep.locate(r.0, r.1);
                buses[k - 1].push(SweepPos {
                    sigma: total - out.sigma,
                    cross: out.cross,
                });
                b.run.served += 1;
            } else {
                b.run.censored += 1;
            }
        }
        let tau = params.tau_d;
        let mut tally = Tally::default();
        for (ki, bus) in buses.iter_mut().enumerate() {
            bus.sort_by(|a, c| a.sigma.total_cmp(&c.sigma));
            let q = bus.len();
            let mut prev = SweepPos { sigma: 0.0, cross: 0.0 };
            let mut dist = 0.0;
            for (j, pos) in bus.iter().enumerate() {
                dist += (pos.cross - prev.cross).abs() + (pos.sigma - prev.sigma);
                tally.in_vehicle += dist / v + j as f64 * tau + tau / 2.0;
                prev = *pos;
            }
            dist += (sweep.random_far_cross(&mut rng) - prev.cross).abs() + (total - prev.sigma);
            tally.tour_km += dist;
            tally.km += dist;
            tally.hours += dist / v;
            count_charges(params, &zd, Direction::Inbound, lh, q, &mut tally);
            b.record(DispatchRecord {
                zone: zd.zone,
                direction: Direction::Inbound,
                window: ki + 1,
                patrons: q,
                tour_km: dist,
                heuristic: false,
            });
        }
        b.add(Direction::Inbound, tally, n_windows as f64 * h);
    }
    Ok(b.finish())
}

pub fn simulate_hour(
    params: &ScenarioParams,
    design: &DesignSolution,
    demand: &DemandRealization,
    seed: u64,
) -> Result<SimRun> {
    match design.strategy {
        Strategy::FullyFlexible => simulate_ff_hour(params, design, demand, seed),
        Strategy::SemiFlexible => simulate_sf_hour(params, design, demand, seed),
    }
}

/// Welford accumulator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct RunningStats {
    pub n: usize,
    pub mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn std(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).sqrt()
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            f64::INFINITY
        } else {
            self.std() / (self.n as f64).sqrt()
        }
    }
}

/// Analytical counterparts of the simulated metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticMetrics {
    pub gc: f64,
    pub outbound_tour_km: f64,
    pub inbound_tour_km: f64,
    pub pickup_loss: f64,
    pub dropoff_loss: f64,
}

/// Expected per-hour tour kilometres and dwell losses of a design.
pub fn analytic_metrics(params: &ScenarioParams, design: &DesignSolution, tour: &TourLaw) -> Result<AnalyticMetrics> {
    let cost = total_generalized_cost(params, design, tour)?;
    let grid = &design.grid;
    let area = grid.zone_area();
    let s = grid.aspect_ratio();
    let expected_tour = |mean: f64| match design.w0() {
        Some(w0) => area / w0 + w0 / 2.0 + mean * w0 / 3.0,
        None => {
            let law = OccupancyLaw::from_rate(mean, 1.0, 1.0);
            area.sqrt() * expected_tour_power(&law, tour, s, PowerOffset::OneHalf)
        }
    };
    let mut m = AnalyticMetrics {
        gc: cost.gc,
        outbound_tour_km: 0.0,
        inbound_tour_km: 0.0,
        pickup_loss: 0.0,
        dropoff_loss: 0.0,
    };
    for zd in &design.zones {
        let qp = params.lambda_p * zd.h_p * area;
        let qd = params.lambda_d * zd.h_d * area;
        m.outbound_tour_km += expected_tour(qp) / zd.h_p;
        m.inbound_tour_km += expected_tour(qd) / zd.h_d;
        m.pickup_loss += params.tau_p / zd.h_p * (qp * qp + qp);
        m.dropoff_loss += params.tau_d / zd.h_d * (qd * qd + qd);
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationSettings {
    pub min_runs: usize,
    pub max_runs: usize,
    /// Convergence threshold on the standard error of mean GC (min/patron).
    pub std_error_target: f64,
    pub batch: usize,
}

impl Default for ValidationSettings {
    fn default() -> Self {
        ValidationSettings {
            min_runs: 1000,
            max_runs: 100_000,
            std_error_target: 0.05,
            batch: 250,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub strategy: Strategy,
    pub n_runs: usize,
    /// Mean and per-run standard deviation of simulated GC (h per hour).
    pub gc_mean: f64,
    pub gc_std: f64,
    /// Standard error of mean GC in min/patron, the convergence reading.
    pub gc_std_error_min: f64,
    pub analytic: AnalyticMetrics,
    pub simulated: AnalyticMetrics,
    pub simulated_terms: CostTerms,
    pub analytic_terms: CostTerms,
    pub err_gc_pct: f64,
    pub err_outbound_tour_pct: f64,
    pub err_inbound_tour_pct: f64,
    pub err_pickup_loss_pct: f64,
    pub err_dropoff_loss_pct: f64,
    pub overcapacity_pct: f64,
    pub heuristic_dispatches: usize,
}

impl ValidationReport {
    pub const ROW_LABELS: [&'static str; 6] = [
        "Errors in GC",
        "Errors in outbound tour length",
        "Errors in inbound tour length",
        "Errors in cumulative pick-up time loss",
        "Errors in cumulative drop-off time loss",
        "Overcapacity",
    ];

    pub fn row_values(&self) -> [f64; 6] {
        [
            self.err_gc_pct,
            self.err_outbound_tour_pct,
            self.err_inbound_tour_pct,
            self.err_pickup_loss_pct,
            self.err_dropoff_loss_pct,
            self.overcapacity_pct,
        ]
    }
}

/// Writes the error table (row label × Average, Maximum over `reports`).
pub fn write_error_table_csv<W: Write>(reports: &[ValidationReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["metric", "Average", "Maximum"])?;
    for (i, label) in ValidationReport::ROW_LABELS.iter().enumerate() {
        let vals: Vec<f64> = reports.iter().map(|r| r.row_values()[i]).collect();
        let avg = vals.iter().sum::<f64>() / vals.len().max(1) as f64;
        let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        w.write_record([label.to_string(), format!("{avg:.4}"), format!("{max:.4}")])?;
    }
    w.flush()?;
    Ok(())
}

fn pct_err(analytic: f64, sim: f64) -> f64 {
    if sim == 0.0 {
        if analytic == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (analytic - sim).abs() / sim.abs() * 100.0
    }
}

/// Repeats independent simulated hours until at least `min_runs` are done
/// and the standard error of mean GC falls below the target, then compares
/// against the analytical model.
pub fn run_validation(
    params: &ScenarioParams,
    design: &DesignSolution,
    tour: &TourLaw,
    settings: &ValidationSettings,
    seed: u64,
) -> Result<ValidationReport> {
    let analytic_cost = total_generalized_cost(params, design, tour)?;
    let analytic = analytic_metrics(params, design, tour)?;
    let to_min = 60.0 / params.patrons_per_hour();

    let mut gc = RunningStats::default();
    let mut sums = [0.0; 5];
    let mut term_sums = [0.0; 9];
    let (mut dispatches, mut overcap, mut heuristic) = (0usize, 0usize, 0usize);
    let mut n = 0usize;
    loop {
        let runs: Vec<Result<SimRun>> = (n..n + settings.batch)
            .into_par_iter()
            .map(|i| {
                let run_seed = rng::sub_seed(seed, &[i as u64]);
                let demand = generate_demand(params, run_seed);
                simulate_hour(params, design, &demand, run_seed)
            })
            .collect();
        for r in runs {
            let r = r?;
            gc.push(r.gc * to_min);
            for (s, x) in sums.iter_mut().zip([
                r.gc,
                r.outbound_tour_km,
                r.inbound_tour_km,
                r.pickup_loss,
                r.dropoff_loss,
            ]) {
                *s += x;
            }
            for (s, x) in term_sums.iter_mut().zip(r.terms.as_array()) {
                *s += x;
            }
            dispatches += r.dispatches;
            overcap += r.overcapacity_events;
            heuristic += r.records.iter().filter(|d| d.heuristic).count();
        }
        n += settings.batch;
        let se = gc.std_error();
        if n >= settings.min_runs && se < settings.std_error_target {
            break;
        }
        if n >= settings.max_runs {
            return Err(DrcError::ValidationDiverged { runs: n, std_error: se });
        }
    }

    let nf = n as f64;
    let sim = AnalyticMetrics {
        gc: sums[0] / nf,
        outbound_tour_km: sums[1] / nf,
        inbound_tour_km: sums[2] / nf,
        pickup_loss: sums[3] / nf,
        dropoff_loss: sums[4] / nf,
    };
    let t = term_sums.map(|x| x / nf);
    let simulated_terms = CostTerms {
        c_w: t[0],
        c_tp: t[1],
        c_td: t[2],
        c_lp: t[3],
        c_ld: t[4],
        c_rp: t[5],
        c_rd: t[6],
        c_vk: t[7],
        c_vh: t[8],
    };
    Ok(ValidationReport {
        strategy: design.strategy,
        n_runs: n,
        gc_mean: sim.gc,
        gc_std: gc.std() / to_min,
        gc_std_error_min: gc.std_error(),
        analytic,
        simulated: sim,
        simulated_terms,
        analytic_terms: analytic_cost.aggregate,
        err_gc_pct: pct_err(analytic.gc, sim.gc),
        err_outbound_tour_pct: pct_err(analytic.outbound_tour_km, sim.outbound_tour_km),
        err_inbound_tour_pct: pct_err(analytic.inbound_tour_km, sim.inbound_tour_km),
        err_pickup_loss_pct: pct_err(analytic.pickup_loss, sim.pickup_loss),
        err_dropoff_loss_pct: pct_err(analytic.dropoff_loss, sim.dropoff_loss),
        overcapacity_pct: overcap as f64 / dispatches.max(1) as f64 * 100.0,
        heuristic_dispatches: heuristic,
    })
}
