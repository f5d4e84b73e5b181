use drc_core::costs::Strategy;
use drc_core::experiments::{
    end_to_end_change_pct, find_critical_density, run_sweep, write_sweep_csv, KStarMode, SweepAxis, SweepSpec,
};
use drc_core::optimizer::SearchSpace;
use drc_core::tour_length::TourLaw;
use drc_core::{DrcError, ScenarioParams};

fn space() -> SearchSpace {
    SearchSpace::standard(Strategy::FullyFlexible)
}

#[test]
fn sweep_csv_is_reproducible() {
    let spec = SweepSpec {
        axis: SweepAxis::Theta,
        values: vec![5.0, 20.0],
        base: ScenarioParams::table2(),
        strategies: Strategy::BOTH.to_vec(),
    };
    let csv = || {
        let rows = run_sweep(&spec, &space(), &TourLaw::table1()).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(spec.axis, &rows, &mut buf).unwrap();
        buf
    };
    let a = csv();
    assert_eq!(a, csv());
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("theta,strategy,gc_min_per_patron"));
}

#[test]
fn zone_count_grows_with_demand() {
    let spec = SweepSpec {
        axis: SweepAxis::Lambda,
        values: vec![5.0, 20.0, 40.0, 80.0, 160.0],
        base: ScenarioParams::table2(),
        strategies: Strategy::BOTH.to_vec(),
    };
    let rows = run_sweep(&spec, &space(), &TourLaw::table1()).unwrap();
    for s in Strategy::BOTH {
        let zones: Vec<u32> = rows
            .iter()
            .filter(|r| r.strategy == s)
            .map(|r| r.rows.unwrap() * r.cols.unwrap())
            .collect();
        assert!(zones.windows(2).all(|w| w[0] <= w[1]), "{s}: {zones:?}");
        let change = end_to_end_change_pct(&rows, s).unwrap();
        assert!(
            change < 0.0,
            "{s}: GC per patron should fall with demand, changed {change}%"
        );
    }
}

#[test]
fn infeasible_points_become_gap_rows() {
    let mut tight = space();
    tight.k_range = vec![2];
    let spec = SweepSpec {
        axis: SweepAxis::Lambda,
        values: vec![2.0, 200.0],
        base: ScenarioParams::table2(),
        strategies: vec![Strategy::FullyFlexible],
    };
    let rows = run_sweep(&spec, &tight, &TourLaw::table1()).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].gap.is_none());
    assert!(rows[1].gap.is_some() && rows[1].gc_per_patron_min.is_none());
}

#[test]
fn bracket_without_crossing_is_reported() {
    let err = find_critical_density(
        &ScenarioParams::table2(),
        (Strategy::FullyFlexible, Strategy::SemiFlexible),
        60.0,
        120.0,
        &space(),
        &TourLaw::table1(),
    )
    .unwrap_err();
    match err {
        DrcError::NoSignChange { diff_lo, diff_hi, .. } => assert!(diff_lo > 0.0 && diff_hi > 0.0),
        other => panic!("{other:?}"),
    }
}

#[test]
fn alpha_favours_fully_flexible_when_waiting_is_cheap() {
    let base = SweepAxis::Lambda.apply(&ScenarioParams::table2(), 15.0);
    let spec = SweepSpec {
        axis: SweepAxis::Alpha,
        values: vec![0.1, 0.9],
        base,
        strategies: Strategy::BOTH.to_vec(),
    };
    let rows = run_sweep(&spec, &space(), &TourLaw::table1()).unwrap();
    let gc = |v: f64, s: Strategy| {
        rows.iter()
            .find(|r| r.value == v && r.strategy == s)
            .unwrap()
            .gc_per_patron_min
            .unwrap()
    };
    assert!(gc(0.1, Strategy::FullyFlexible) < gc(0.1, Strategy::SemiFlexible));
    assert!(gc(0.9, Strategy::FullyFlexible) > gc(0.9, Strategy::SemiFlexible));
}

#[test]
fn benchmark_modes_only_move_fully_flexible() {
    let p = ScenarioParams::table2();
    let sf_space = space().with_strategy(Strategy::SemiFlexible);
    let a = drc_core::optimizer::search_design(&p, &sf_space, &KStarMode::Calibrated.tour_law()).unwrap();
    let b = drc_core::optimizer::search_design(&p, &sf_space, &KStarMode::Chakraborti.tour_law()).unwrap();
    assert_eq!(a.cost.gc, b.cost.gc);
    let ff = space();
    let c = drc_core::optimizer::search_design(&p, &ff, &KStarMode::Calibrated.tour_law()).unwrap();
    let d = drc_core::optimizer::search_design(&p, &ff, &KStarMode::Daganzo115.tour_law()).unwrap();
    assert_ne!(c.cost.gc, d.cost.gc);
}
