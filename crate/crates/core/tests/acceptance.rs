//! Acceptance criteria. Each test prints one `ACCEPTANCE <id> PASS|FAIL`
//! line with the measured figures before asserting.

use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use drc_core::calibration::{benchmark_ape, calibrate_kstar, model_mape, CalibrationGrid, CalibrationSpec};
use drc_core::costs::{check_feasibility, total_generalized_cost, DesignSolution, Strategy, ZoneDesign};
use drc_core::expectations::{expected_tour_power, mc_expectation_oracle, OccupancyLaw, PowerOffset};
use drc_core::experiments::find_critical_density;
use drc_core::optimizer::{compare_strategies, headway_cap_from_capacity, optimize_combo, SearchSpace};
use drc_core::simulator::{run_validation, ValidationSettings};
use drc_core::tour_length::{
    constrained_swath_mape, feasible_swath_widths, Benchmark, KStarModel, StripAxis, SwathConfig, TourLaw,
};
use drc_core::tsp::{brute_force_tour_length, exact_tour_length, Point, PointSet, TourMode};
use drc_core::{make_grid, ScenarioParams, ZoneGrid};

fn report(id: &str, pass: bool, detail: String) {
    println!("ACCEPTANCE {id} {}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} failed: {detail}");
}

/// Published simulated k* means, rows S ∈ {1, 1.5, 2, 3}, columns q = 2..15.
const TABLE_B1: [[f64; 14]; 4] = [
    [
        0.94, 1.16, 1.20, 1.19, 1.18, 1.17, 1.15, 1.13, 1.12, 1.11, 1.10, 1.09, 1.09, 1.08,
    ],
    [
        0.96, 1.17, 1.22, 1.22, 1.20, 1.19, 1.17, 1.15, 1.15, 1.13, 1.12, 1.11, 1.10, 1.10,
    ],
    [
        1.00, 1.23, 1.27, 1.28, 1.25, 1.23, 1.21, 1.20, 1.18, 1.16, 1.15, 1.14, 1.13, 1.12,
    ],
    [
        1.09, 1.33, 1.38, 1.38, 1.36, 1.34, 1.31, 1.29, 1.27, 1.25, 1.23, 1.21, 1.20, 1.19,
    ],
];

struct Calibrated {
    model: KStarModel,
    grid: CalibrationGrid,
    seconds: f64,
}

fn calibration() -> &'static Calibrated {
    static CELL: OnceLock<Calibrated> = OnceLock::new();
    CELL.get_or_init(|| {
        let start = Instant::now();
        let (model, grid) = calibrate_kstar(&CalibrationSpec::default(), 42).expect("calibration");
        Calibrated {
            model,
            grid,
            seconds: start.elapsed().as_secs_f64(),
        }
    })
}

#[test]
fn c1_calibration_reproduces_b1() {
    let c = calibration();
    let mut worst = (0.0, 0, 0.0);
    for (si, row) in TABLE_B1.iter().enumerate() {
        for (qi, &published) in row.iter().enumerate() {
            let diff = (c.grid.mean_kstar[si][qi] - published).abs();
            if diff > worst.0 {
                worst = (diff, c.grid.q_values[qi], c.grid.s_values[si]);
            }
        }
    }
    let pass = worst.0 <= 0.04 && c.seconds <= 600.0;
    report(
        "1",
        pass,
        format!(
            "max |k* − B1| = {:.4} at q={}, S={} (tol 0.04); {:.1} s (limit 600 s)",
            worst.0, worst.1, worst.2, c.seconds
        ),
    );
}

#[test]
fn c2_fit_quality_and_yang_benchmark() {
    let c = calibration();
    let mape = model_mape(&c.model, &c.grid);
    let yang_small = benchmark_ape(Benchmark::Yang, &c.grid)
        .into_iter()
        .filter(|&(q, s, _)| q <= 5 && s <= 3.0)
        .map(|c| c.2)
        .fold(0.0, f64::max);
    let pass = mape < 5.0 && yang_small > 40.0;
    report(
        "2",
        pass,
        format!(
            "fit MAPE {mape:.3}% (< 5%), max Yang error for q ≤ 5: {yang_small:.1}% (> 40%); β = {:?}",
            c.model.to_array()
        ),
    );
}

#[test]
fn c3_constrained_swath_gap() {
    let mut worst = (0.0, 0, 0.0);
    for s in [1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0] {
        let (l, w) = (f64::sqrt(s), 1.0 / f64::sqrt(s));
        for g in constrained_swath_mape(l, w, 2..=15) {
            if g.gap_pct > worst.0 {
                worst = (g.gap_pct, g.q, s);
            }
        }
    }
    report(
        "3",
        worst.0 > 40.0,
        format!(
            "largest constrained-swath excess {:.2}% at q={}, S={} (needs > 40%)",
            worst.0, worst.1, worst.2
        ),
    );
}

#[test]
fn c4_table5_reproduction() {
    let params = ScenarioParams::table2();
    let cmp = compare_strategies(
        &params,
        &SearchSpace::standard(Strategy::FullyFlexible),
        &TourLaw::table1(),
    )
    .unwrap();
    let (ff, sf) = (&cmp.ff, &cmp.sf);
    let discrete = (ff.best.grid.rows, ff.best.grid.cols, ff.best.capacity) == (2, 2, 8)
        && (sf.best.grid.rows, sf.best.grid.cols, sf.best.capacity) == (1, 4, 9)
        && sf.best.w0() == Some(0.5);
    let within = |x: f64, target: f64, tol: f64| (x - target).abs() <= tol * target;
    let gc_ok = within(ff.cost.gc_per_patron_min, 18.29, 0.02) && within(sf.cost.gc_per_patron_min, 17.73, 0.02);
    let saving_ok = (cmp.sf_saving_pct - 3.1).abs() <= 1.0;
    let h = [
        cmp.ff_metrics.mean_h_p_min,
        cmp.sf_metrics.mean_h_p_min,
        cmp.ff_metrics.mean_h_d_min,
        cmp.sf_metrics.mean_h_d_min,
    ];
    let h_ok = h.iter().zip([4.98, 6.80, 5.00, 5.00]).all(|(&x, t)| within(x, t, 0.05));
    let time_ok = ff.wall_time_s <= 120.0 && sf.wall_time_s <= 120.0;
    report(
        "4",
        discrete && gc_ok && saving_ok && h_ok && time_ok,
        format!(
            "FF {}x{} K={} GC {:.4}; SF {}x{} K={} w0={:?} GC {:.4}; saving {:.3}%; headways {:?} min; {:.2}/{:.2} s",
            ff.best.grid.rows,
            ff.best.grid.cols,
            ff.best.capacity,
            ff.cost.gc_per_patron_min,
            sf.best.grid.rows,
            sf.best.grid.cols,
            sf.best.capacity,
            sf.best.w0(),
            sf.cost.gc_per_patron_min,
            cmp.sf_saving_pct,
            h.map(|x| (x * 1000.0).round() / 1000.0),
            ff.wall_time_s,
            sf.wall_time_s
        ),
    );
}

#[test]
fn c5_simulation_validation() {
    let params = ScenarioParams::table2();
    let tour = TourLaw::table1();
    let cmp = compare_strategies(&params, &SearchSpace::standard(Strategy::FullyFlexible), &tour).unwrap();
    let settings = ValidationSettings::default();
    let ff = run_validation(&params, &cmp.ff.best, &tour, &settings, 2024).unwrap();
    let sf = run_validation(&params, &cmp.sf.best, &tour, &settings, 2025).unwrap();
    let converged = |r: &drc_core::simulator::ValidationReport| r.n_runs >= 1000 && r.gc_std_error_min < 0.05;
    let pass = ff.err_gc_pct <= 5.0
        && sf.err_gc_pct <= 1.0
        && ff.overcapacity_pct <= 1.0
        && sf.overcapacity_pct <= 1.0
        && converged(&ff)
        && converged(&sf);
    report(
        "5",
        pass,
        format!(
            "FF GC error {:.3}% (≤ 5), overcapacity {:.3}%, {} runs, SE {:.4}; \
             SF GC error {:.3}% (≤ 1), overcapacity {:.3}%, {} runs, SE {:.4}",
            ff.err_gc_pct,
            ff.overcapacity_pct,
            ff.n_runs,
            ff.gc_std_error_min,
            sf.err_gc_pct,
            sf.overcapacity_pct,
            sf.n_runs,
            sf.gc_std_error_min
        ),
    );
}

#[test]
fn c6_critical_density() {
    let c = find_critical_density(
        &ScenarioParams::table2(),
        (Strategy::FullyFlexible, Strategy::SemiFlexible),
        2.0,
        60.0,
        &SearchSpace::standard(Strategy::FullyFlexible),
        &TourLaw::table1(),
    )
    .unwrap();
    report(
        "6",
        (15.0..=30.0).contains(&c.density),
        format!("critical density {:.3} patrons/h/km² (needs [15, 30])", c.density),
    );
}

#[test]
fn c7a_held_karp_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let n = 2 + i % 8;
        let pts: Vec<Point> = (0..n)
            .map(|_| Point::new(rng.random::<f64>() * 3.0, rng.random::<f64>()))
            .collect();
        let ps = PointSet::new(pts).unwrap();
        for mode in [TourMode::ClosedCycle, TourMode::OpenPath] {
            let hk = exact_tour_length(&ps, mode).unwrap();
            let bf = brute_force_tour_length(&ps, mode).unwrap();
            worst = worst.max((hk - bf).abs());
        }
    }
    report(
        "7a",
        worst <= 1e-9,
        format!("1000 instances (2–9 points, both modes): max |HK − brute force| = {worst:.2e}"),
    );
}

#[test]
fn c7b_taylor_against_monte_carlo() {
    let model = KStarModel::table1();
    let tour = TourLaw::Calibrated(model);
    let means = [0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 10.0, 12.0];
    let mut worst = (0.0, 0.0, 0.0, "");
    for (mi, &mean) in means.iter().enumerate() {
        let law = OccupancyLaw::new(mean).unwrap();
        for s in [1.0, 3.0] {
            for (oi, (offset, name, p)) in [
                (PowerOffset::OneHalf, "1/2", 0.5),
                (PowerOffset::ThreeHalves, "3/2", 1.5),
            ]
            .into_iter()
            .enumerate()
            {
                let taylor = expected_tour_power(&law, &tour, s, offset);
                let f = |q: u64| {
                    let x = q as f64 + 1.0;
                    model.kstar(x, s) * x.powf(p)
                };
                let seed = (mi * 10 + oi) as u64 + if s > 1.0 { 1000 } else { 0 };
                let mc = mc_expectation_oracle(&law, f, 1_000_000, seed).unwrap();
                let err = (taylor - mc).abs() / mc * 100.0;
                if err > worst.0 {
                    worst = (err, mean, s, name);
                }
            }
        }
    }
    report(
        "7b",
        worst.0 <= 2.0,
        format!(
            "max Taylor vs 10^6-draw Monte Carlo error {:.3}% at mean {}, S={}, power {} (tol 2%)",
            worst.0, worst.1, worst.2, worst.3
        ),
    );
}

/// Joint search over every zone's outbound headway and trunk multiple at
/// once, scoring the whole design; no per-zone decomposition is used.
fn joint_multistart(
    params: &ScenarioParams,
    template: &DesignSolution,
    tour: &TourLaw,
    gammas: &[u32],
    starts: usize,
    seed: u64,
) -> f64 {
    let grid = template.grid;
    let nz = grid.zone_count();
    let cap = headway_cap_from_capacity(params.lambda_p, grid.zone_length, grid.zone_width, template.capacity);
    let (lo, hi) = (params.h_min, params.h_max.min(cap));
    let eval = |h: &[f64], g: &[u32]| -> f64 {
        let zones = grid
            .zones()
            .enumerate()
            .map(|(i, z)| ZoneDesign {
                zone: z,
                h_p: h[i],
                h_d: f64::from(g[i]) * params.h_trunk,
                gamma: g[i],
            })
            .collect();
        let d = DesignSolution {
            zones,
            ..template.clone()
        };
        if check_feasibility(params, &d).is_err() {
            return f64::INFINITY;
        }
        total_generalized_cost(params, &d, tour)
            .map(|c| c.gc)
            .unwrap_or(f64::INFINITY)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for _ in 0..starts {
        let mut h: Vec<f64> = (0..nz).map(|_| lo + rng.random::<f64>() * (hi - lo)).collect();
        let mut g: Vec<u32> = (0..nz).map(|_| gammas[rng.random_range(0..gammas.len())]).collect();
        let mut f = eval(&h, &g);
        while !f.is_finite() {
            g = (0..nz).map(|_| gammas[rng.random_range(0..gammas.len())]).collect();
            f = eval(&h, &g);
        }
        let mut step = (hi - lo) / 4.0;
        while step > 1e-7 {
            let mut improved = false;
            // Moves along every coordinate and along the all-zones diagonal.
            for dir in 0..=nz {
                for sign in [-1.0, 1.0] {
                    let mut cand = h.clone();
                    for (i, c) in cand.iter_mut().enumerate() {
                        if dir == nz || dir == i {
                            *c = (*c + sign * step).clamp(lo, hi);
                        }
                    }
                    let fc = eval(&cand, &g);
                    if fc < f {
                        h = cand;
                        f = fc;
                        improved = true;
                    }
                }
            }
            for i in 0..nz {
                for &gi in gammas {
                    let mut cand = g.clone();
                    cand[i] = gi;
                    let fc = eval(&h, &cand);
                    if fc < f {
                        g = cand;
                        f = fc;
                        improved = true;
                    }
                }
            }
            if !improved {
                step /= 2.0;
            }
        }
        best = best.min(f);
    }
    best
}

#[test]
fn c7c_decomposition_matches_joint_search() {
    let params = ScenarioParams::table2();
    let tour = TourLaw::table1();
    let space = SearchSpace::standard(Strategy::FullyFlexible);
    let sw = |w0, n, along| Some(SwathConfig { w0, n_strips: n, along });
    let cases: Vec<(Strategy, u32, u32, u32, Option<SwathConfig>)> = vec![
        (Strategy::FullyFlexible, 2, 1, 14, None),
        (Strategy::FullyFlexible, 1, 2, 12, None),
        (Strategy::FullyFlexible, 2, 2, 8, None),
        (Strategy::SemiFlexible, 1, 2, 12, sw(0.5, 4, StripAxis::Width)),
        (Strategy::SemiFlexible, 1, 4, 9, sw(0.5, 1, StripAxis::Width)),
        (Strategy::SemiFlexible, 2, 2, 9, sw(0.5, 2, StripAxis::Length)),
    ];
    let mut worst = (0.0, String::new());
    for (i, (strategy, m, n, k, swath)) in cases.into_iter().enumerate() {
        let grid: ZoneGrid = make_grid(&params, m, n).unwrap();
        let template = DesignSolution {
            strategy,
            grid,
            capacity: k,
            zones: Vec::new(),
            swath,
        };
        let zones = optimize_combo(&params, &grid, k, template.routing(&tour), &space).unwrap();
        let decomposed = DesignSolution {
            zones,
            ..template.clone()
        };
        let dec = total_generalized_cost(&params, &decomposed, &tour).unwrap().gc;
        let joint = joint_multistart(&params, &template, &tour, &space.gamma_range, 12, 100 + i as u64);
        let rel = (dec - joint).abs() / joint * 100.0;
        if rel >= worst.0 {
            worst = (
                rel,
                format!("{strategy} {m}x{n} K={k}: decomposed {dec:.6}, joint {joint:.6}"),
            );
        }
    }
    report(
        "7c",
        worst.0 <= 0.1,
        format!("max relative GC gap {:.5}% (tol 0.1%); worst case {}", worst.0, worst.1),
    );
}

#[test]
fn c7d_gc_bookkeeping() {
    let params = ScenarioParams::table2();
    let tour = TourLaw::table1();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for _ in 0..400 {
        let (m, n) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let grid = make_grid(&params, m, n).unwrap();
        let strategy = if rng.random::<bool>() {
            Strategy::FullyFlexible
        } else {
            Strategy::SemiFlexible
        };
        let swath = match strategy {
            Strategy::FullyFlexible => None,
            Strategy::SemiFlexible => {
                let opts = feasible_swath_widths(grid.zone_length, grid.zone_width, 4);
                Some(opts[rng.random_range(0..opts.len())])
            }
        };
        let capacity = 20;
        let cap = headway_cap_from_capacity(params.lambda_p, grid.zone_length, grid.zone_width, capacity);
        let zones = grid
            .zones()
            .map(|z| {
                let gamma = rng.random_range(1..=2);
                ZoneDesign {
                    zone: z,
                    h_p: params.h_min + rng.random::<f64>() * (cap.min(params.h_max) - params.h_min).max(0.0),
                    h_d: f64::from(gamma) * params.h_trunk,
                    gamma,
                }
            })
            .collect();
        let design = DesignSolution {
            strategy,
            grid,
            capacity,
            zones,
            swath,
        };
        let Ok(cost) = total_generalized_cost(&params, &design, &tour) else {
            continue;
        };
        checked += 1;
        let sum: f64 = cost.aggregate.as_array().iter().sum();
        let mut per_zone = 0.0;
        for (_, t) in &cost.per_zone {
            per_zone += t.as_array().iter().sum::<f64>();
        }
        let split = cost.aggregate.user() + cost.aggregate.agency();
        for x in [sum, per_zone, split] {
            worst = worst.max((x - cost.gc).abs() / cost.gc);
        }
    }
    report(
        "7d",
        checked >= 100 && worst <= 1e-9,
        format!("{checked} random feasible designs: max relative bookkeeping error {worst:.2e}"),
    );
}

#[test]
fn c7e_swath_sets_reconstruct() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut bad = Vec::new();
    let mut total = 0;
    for _ in 0..500 {
        let l = 0.2 + rng.random::<f64>() * 3.0;
        let w = 0.2 + rng.random::<f64>() * 3.0;
        let set = feasible_swath_widths(l, w, 4);
        for c in &set {
            total += 1;
            let cut = c.cut_dimension(l, w);
            let fits = c.w0 <= l.min(w) * (1.0 + 1e-12);
            let divides = (cut / c.w0 - f64::from(c.n_strips)).abs() < 1e-9 && (1..=4).contains(&c.n_strips);
            if !(fits && divides) {
                bad.push((l, w, *c));
            }
        }
        // Every admissible width must be present.
        for i in 1..=4u32 {
            for d in [l, w] {
                let w0 = d / f64::from(i);
                if w0 <= l.min(w) && !set.iter().any(|c| (c.w0 - w0).abs() <= 1e-9 * w0) {
                    bad.push((
                        l,
                        w,
                        SwathConfig {
                            w0,
                            n_strips: i,
                            along: StripAxis::Length,
                        },
                    ));
                }
            }
        }
    }
    report(
        "7e",
        bad.is_empty(),
        format!("{total} swath configurations over 500 zones, {} violations", bad.len()),
    );
}
