use drc_core::costs::{DesignSolution, Direction, Strategy, ZoneDesign};
use drc_core::params::line_haul_distance;
use drc_core::simulator::{
    generate_demand, run_validation, simulate_ff_hour, simulate_hour, simulate_sf_hour, DemandRealization, Request,
    ValidationSettings,
};
use drc_core::tour_length::{StripAxis, SwathConfig, TourLaw};
use drc_core::tsp::{exact_tour_length, Point, PointSet, TourMode};
use drc_core::{make_grid, ScenarioParams};

fn uniform_design(params: &ScenarioParams, strategy: Strategy, rows: u32, cols: u32, h_p: f64) -> DesignSolution {
    let grid = make_grid(params, rows, cols).unwrap();
    let swath = match strategy {
        Strategy::FullyFlexible => None,
        Strategy::SemiFlexible => Some(SwathConfig {
            w0: grid.zone_width,
            n_strips: 1,
            along: StripAxis::Length,
        }),
    };
    DesignSolution {
        strategy,
        grid,
        capacity: 12,
        zones: grid
            .zones()
            .map(|z| ZoneDesign {
                zone: z,
                h_p,
                h_d: params.h_trunk,
                gamma: 1,
            })
            .collect(),
        swath,
    }
}

#[test]
fn demand_counts_are_poisson() {
    let p = ScenarioParams::table2();
    let n = 1000;
    let counts: Vec<f64> = (0..n).map(|s| generate_demand(&p, s).outbound.len() as f64).collect();
    let mean = counts.iter().sum::<f64>() / n as f64;
    // Mean λLW = 160, standard error √(160/1000).
    assert!((mean - 160.0).abs() < 3.0 * (160.0f64 / n as f64).sqrt(), "mean {mean}");
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    assert!((var / 160.0 - 1.0).abs() < 0.15, "variance {var}");
}

#[test]
fn every_request_is_served_or_censored_once() {
    let p = ScenarioParams::table2();
    for strategy in Strategy::BOTH {
        let d = uniform_design(&p, strategy, 2, 2, 7.0 / 60.0);
        for seed in 0..20 {
            let demand = generate_demand(&p, seed);
            let run = simulate_hour(&p, &d, &demand, seed).unwrap();
            let total = demand.outbound.len() + demand.inbound.len();
            assert_eq!(run.served + run.censored, total);
            let carried: usize = run.records.iter().map(|r| r.patrons).sum();
            assert_eq!(carried, run.served);
        }
    }
}

#[test]
fn runs_are_seed_deterministic() {
    let p = ScenarioParams::table2();
    let d = uniform_design(&p, Strategy::FullyFlexible, 2, 2, 0.08);
    let demand = generate_demand(&p, 5);
    assert_eq!(
        simulate_ff_hour(&p, &d, &demand, 5).unwrap(),
        simulate_ff_hour(&p, &d, &demand, 5).unwrap()
    );
    let s = ValidationSettings {
        min_runs: 200,
        std_error_target: 1.0,
        batch: 50,
        ..ValidationSettings::default()
    };
    let a = run_validation(&p, &d, &TourLaw::table1(), &s, 3).unwrap();
    let b = run_validation(&p, &d, &TourLaw::table1(), &s, 3).unwrap();
    assert_eq!(a, b);
}

#[test]
fn mean_occupancy_matches_rate() {
    let p = ScenarioParams::table2();
    let h = 6.0 / 60.0;
    let d = uniform_design(&p, Strategy::FullyFlexible, 2, 2, h);
    let mut q = Vec::new();
    for seed in 0..1000 {
        let run = simulate_ff_hour(&p, &d, &generate_demand(&p, seed), seed).unwrap();
        q.extend(
            run.records
                .iter()
                .filter(|r| r.direction == Direction::Outbound)
                .map(|r| r.patrons as f64),
        );
    }
    let n = q.len() as f64;
    let mean = q.iter().sum::<f64>() / n;
    let expected = p.lambda_p * h * d.grid.zone_area();
    let se = (expected / n).sqrt();
    assert!((mean - expected).abs() < 3.0 * se, "{mean} vs {expected} ± {se}");
}

#[test]
fn ff_tour_covers_its_patrons() {
    let p = ScenarioParams {
        region_length: 1.0,
        region_width: 1.0,
        ..ScenarioParams::table2()
    };
    let d = uniform_design(&p, Strategy::FullyFlexible, 1, 1, 0.25);
    let pts = [(0.1, 0.2), (0.9, 0.1), (0.5, 0.8), (0.3, 0.6), (0.7, 0.4)];
    let outbound: Vec<Request> = pts.iter().map(|&(x, y)| Request { x, y, t: 0.1 }).collect();
    let demand = DemandRealization {
        outbound,
        inbound: vec![],
    };
    let patrons_only = exact_tour_length(
        &PointSet::new(pts.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap(),
        TourMode::ClosedCycle,
    )
    .unwrap();
    for seed in 0..50 {
        let run = simulate_ff_hour(&p, &d, &demand, seed).unwrap();
        let first = run.records.iter().find(|r| r.patrons == 5).unwrap();
        assert!(!first.heuristic);
        assert!(first.tour_km + 1e-12 >= patrons_only);
    }
}

#[test]
fn large_batches_fall_back_to_heuristic() {
    let p = ScenarioParams {
        region_length: 1.0,
        region_width: 1.0,
        ..ScenarioParams::table2()
    };
    let d = uniform_design(&p, Strategy::FullyFlexible, 1, 1, 0.5);
    let run = simulate_ff_hour(&p, &d, &generate_demand(&p, 1), 1).unwrap();
    assert!(run.records.iter().any(|r| r.heuristic && r.patrons >= 20));
    assert!(run.overcapacity_events > 0);
}

#[test]
fn empty_ff_hour_costs_only_line_haul_runs() {
    let p = ScenarioParams::table2();
    let d = uniform_design(&p, Strategy::FullyFlexible, 2, 2, 0.1);
    let run = simulate_ff_hour(
        &p,
        &d,
        &DemandRealization {
            outbound: vec![],
            inbound: vec![],
        },
        0,
    )
    .unwrap();
    let mut km = 0.0;
    for zd in &d.zones {
        km += line_haul_distance(&d.grid, zd.zone) * (1.0 / zd.h_p + 1.0 / zd.h_d);
    }
    let expected = (p.pi_v(d.capacity) + p.pi_m(d.capacity) / p.cruise_speed) / p.theta * km;
    assert!((run.gc - expected).abs() < 1e-9, "{} vs {expected}", run.gc);
    assert_eq!(run.terms.user(), 0.0);
}

#[test]
fn sf_lateral_increment_is_a_third_of_the_swath() {
    // One strip: the expected sweep length is A/w0 + w0/2 + q·w0/3.
    let p = ScenarioParams {
        region_length: 2.0,
        region_width: 0.5,
        ..ScenarioParams::table2()
    };
    let d = uniform_design(&p, Strategy::SemiFlexible, 1, 1, 0.1);
    let (mut sx, mut sy, mut sxx, mut sxy, mut n) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for seed in 0..600 {
        let run = simulate_sf_hour(&p, &d, &generate_demand(&p, seed), seed).unwrap();
        for r in run.records.iter().filter(|r| r.direction == Direction::Outbound) {
            let (x, y) = (r.patrons as f64, r.tour_km);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            n += 1.0;
        }
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let w0 = 0.5;
    assert!((slope / (w0 / 3.0) - 1.0).abs() < 0.05, "slope {slope}");
    assert!(
        (intercept - (1.0 / w0 + w0 / 2.0)).abs() < 0.02,
        "intercept {intercept}"
    );
}

#[test]
fn strategy_mismatch_is_an_error() {
    let p = ScenarioParams::table2();
    let d = uniform_design(&p, Strategy::FullyFlexible, 1, 1, 0.1);
    let empty = DemandRealization {
        outbound: vec![],
        inbound: vec![],
    };
    assert!(simulate_sf_hour(&p, &d, &empty, 0).is_err());
}
