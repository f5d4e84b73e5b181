//! Monte Carlo calibration of the k* law.
//!
//! Each (q, S) cell draws q uniform points in a unit-area rectangle of
//! aspect ratio S, solves the tour exactly and records k = length/√q. A
//! cell stops once it has at least `min_instances` samples and its running
//! mean moved by at most `tolerance` over the last batch. The five law
//! coefficients are then fitted to the cell means by Levenberg-Marquardt.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{DrcError, Result};
use crate::rng;
use crate::tour_length::{benchmark_kstar, Benchmark, KStarModel};
use crate::tsp::{exact_tour_length, Point, PointSet, TourMode};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationSpec {
    pub q_values: Vec<usize>,
    pub s_values: Vec<f64>,
    pub min_instances: usize,
    pub tolerance: f64,
    pub batch_size: usize,
    pub max_instances: usize,
    pub mode: TourMode,
}

impl Default for CalibrationSpec {
    fn default() -> Self {
        CalibrationSpec {
            q_values: (2..=15).collect(),
            s_values: vec![1.0, 1.5, 2.0, 3.0],
            min_instances: 500,
            tolerance: 0.01,
            batch_size: 100,
            max_instances: 50_000,
            mode: TourMode::ClosedCycle,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationGrid {
    pub q_values: Vec<usize>,
    pub s_values: Vec<f64>,
    pub min_instances: usize,
    pub tolerance: f64,
    /// `mean_kstar[s][q]`, indexed like `s_values` × `q_values`.
    pub mean_kstar: Vec<Vec<f64>>,
    pub n_instances: Vec<Vec<usize>>,
}

impl CalibrationGrid {
    /// (q, S, mean) for every cell, S-major.
    pub fn cells(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.s_values.iter().enumerate().flat_map(move |(si, &s)| {
            self.q_values
                .iter()
                .enumerate()
                .map(move |(qi, &q)| (q, s, self.mean_kstar[si][qi]))
        })
    }

    pub fn write_csv<W: Write>(&self, model: &KStarModel, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["q", "S", "mean_kstar", "n_instances", "fitted_kstar", "ape_pct"])?;
        for (si, &s) in self.s_values.iter().enumerate() {
            for (qi, &q) in self.q_values.iter().enumerate() {
                let mean = self.mean_kstar[si][qi];
                let fit = model.kstar(q as f64, s);
                w.write_record([
                    q.to_string(),
                    s.to_string(),
                    format!("{mean:.6}"),
                    self.n_instances[si][qi].to_string(),
                    format!("{fit:.6}"),
                    format!("{:.4}", (fit - mean).abs() / mean * 100.0),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub fn write_coefficients_csv<W: Write>(model: &KStarModel, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["coefficient", "value"])?;
    for (i, b) in model.to_array().iter().enumerate() {
        w.write_record([format!("beta{}", i + 1), b.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// One sample of k for q points in the unit-area rectangle √S × 1/√S.
pub fn sample_kstar(q: usize, s: f64, mode: TourMode, seed: u64, path: &[u64]) -> Result<f64> {
    let mut rng = rng::stream(seed, path);
    let (wx, wy) = (s.sqrt(), 1.0 / s.sqrt());
    let pts: Vec<Point> = (0..q)
        .map(|_| Point::new(rng.random::<f64>() * wx, rng.random::<f64>() * wy))
        .collect();
    let len = exact_tour_length(&PointSet::new(pts)?, mode)?;
    Ok(len / (q as f64).sqrt())
}

fn simulate_cell(spec: &CalibrationSpec, seed: u64, q: usize, si: usize) -> Result<(f64, usize)> {
    let s = spec.s_values[si];
    let mut sum = 0.0;
    let mut n = 0usize;
    let mut prev_mean = f64::NAN;
    loop {
        for _ in 0..spec.batch_size {
            sum += sample_kstar(q, s, spec.mode, seed, &[q as u64, si as u64, n as u64])?;
            n += 1;
        }
        let mean = sum / n as f64;
        if n >= spec.min_instances && (mean - prev_mean).abs() <= spec.tolerance {
            return Ok((mean, n));
        }
        if n >= spec.max_instances {
            return Err(DrcError::CalibrationDiverged { q, s, instances: n });
        }
        prev_mean = mean;
    }
}

/// Runs every cell and returns the grid of converged means.
pub fn simulate_grid(spec: &CalibrationSpec, seed: u64) -> Result<CalibrationGrid> {
    if spec
        .q_values
        .iter()
        .any(|&q| !(2..=crate::tsp::EXACT_CAPACITY).contains(&q))
    {
        return Err(DrcError::Precondition("calibration q values must lie in 2..=20".into()));
    }
    if spec.batch_size == 0 || spec.s_values.iter().any(|&s| !(s >= 1.0 && s.is_finite())) {
        return Err(DrcError::Precondition("batch size must be positive and S ≥ 1".into()));
    }
    let cells: Vec<(usize, usize)> = (0..spec.s_values.len())
        .flat_map(|si| spec.q_values.iter().map(move |&q| (si, q)))
        .collect();
    let results: Vec<Result<(f64, usize)>> = cells
        .par_iter()
        .map(|&(si, q)| simulate_cell(spec, seed, q, si))
        .collect();
    let nq = spec.q_values.len();
    let mut mean_kstar = vec![vec![0.0; nq]; spec.s_values.len()];
    let mut n_instances = vec![vec![0; nq]; spec.s_values.len()];
    for (i, r) in results.into_iter().enumerate() {
        let (mean, n) = r?;
        mean_kstar[i / nq][i % nq] = mean;
        n_instances[i / nq][i % nq] = n;
    }
    Ok(CalibrationGrid {
        q_values: spec.q_values.clone(),
        s_values: spec.s_values.clone(),
        min_instances: spec.min_instances,
        tolerance: spec.tolerance,
        mean_kstar,
        n_instances,
    })
}

/// Simulates the grid and fits the law, starting from the published
/// coefficients.
pub fn calibrate_kstar(spec: &CalibrationSpec, seed: u64) -> Result<(KStarModel, CalibrationGrid)> {
    let grid = simulate_grid(spec, seed)?;
    let data: Vec<(f64, f64, f64)> = grid.cells().map(|(q, s, k)| (q as f64, s, k)).collect();
    let model = fit_kstar(&data, KStarModel::table1())?;
    Ok((model, grid))
}

fn residuals_and_jacobian(b: &[f64; 5], data: &[(f64, f64, f64)]) -> (Vec<f64>, Vec<[f64; 5]>) {
    let m = KStarModel::from_array(*b);
    data.iter()
        .map(|&(q, s, y)| {
            let k = m.kstar(q, s);
            let p = q.powf(b[2]) * (b[3] * q.powf(b[4])).exp();
            let ln_q = q.ln();
            let qb5 = q.powf(b[4]);
            (k - y, [s * p, p, k * ln_q, k * qb5, k * b[3] * qb5 * ln_q])
        })
        .unzip()
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

fn solve5(mut a: [[f64; 5]; 5], mut b: [f64; 5]) -> Option<[f64; 5]> {
    for col in 0..5 {
        let piv = (col..5).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..5 {
            let f = a[row][col] / a[col][col];
            let pivot = a[col];
            for (v, p) in a[row].iter_mut().zip(pivot).skip(col) {
                *v -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 5];
    for row in (0..5).rev() {
        let s: f64 = (row + 1..5).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Least-squares fit of the k* law to (q, S, k) observations.
pub fn fit_kstar(data: &[(f64, f64, f64)], initial: KStarModel) -> Result<KStarModel> {
    if data.len() < 5 {
        return Err(DrcError::FitFailed(format!(
            "need at least 5 observations, got {}",
            data.len()
        )));
    }
    let mut b = initial.to_array();
    let (mut r, mut j) = residuals_and_jacobian(&b, data);
    let mut cost = sum_sq(&r);
    let mut lambda = 1e-3;
    for _ in 0..500 {
        let mut jtj = [[0.0; 5]; 5];
        let mut jtr = [0.0; 5];
        for (ri, ji) in r.iter().zip(&j) {
            for a in 0..5 {
                jtr[a] += ji[a] * ri;
                for c in 0..5 {
                    jtj[a][c] += ji[a] * ji[c];
                }
            }
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut lhs = jtj;
            for (a, row) in lhs.iter_mut().enumerate() {
                row[a] += lambda * jtj[a][a].max(1e-12);
            }
            let neg: [f64; 5] = jtr.map(|x| -x);
            let Some(step) = solve5(lhs, neg) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial = b;
            for a in 0..5 {
                trial[a] += step[a];
            }
            let (tr, tj) = residuals_and_jacobian(&trial, data);
            let tcost = sum_sq(&tr);
            if tcost.is_finite() && tcost < cost {
                let rel = (cost - tcost) / cost.max(1e-300);
                b = trial;
                r = tr;
                j = tj;
                cost = tcost;
                lambda = (lambda / 10.0).max(1e-12);
                improved = rel > 1e-14;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    if !cost.is_finite() {
        return Err(DrcError::FitFailed("non-finite residuals".into()));
    }
    Ok(KStarModel::from_array(b))
}

/// Absolute percentage error of `estimate` at every grid cell, S-major.
pub fn cell_ape(grid: &CalibrationGrid, estimate: impl Fn(f64, f64) -> f64) -> Vec<(usize, f64, f64)> {
    grid.cells()
        .map(|(q, s, k)| (q, s, (estimate(q as f64, s) - k).abs() / k * 100.0))
        .collect()
}

/// Mean absolute percentage error of the model over the grid.
pub fn model_mape(model: &KStarModel, grid: &CalibrationGrid) -> f64 {
    let apes = cell_ape(grid, |q, s| model.kstar(q, s));
    apes.iter().map(|c| c.2).sum::<f64>() / apes.len() as f64
}

pub fn benchmark_ape(which: Benchmark, grid: &CalibrationGrid) -> Vec<(usize, f64, f64)> {
    cell_ape(grid, |q, s| benchmark_kstar(which, q, s))
}
