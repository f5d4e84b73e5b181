//! Exact minimum Manhattan tours over small point sets.
//!
//! [`exact_tour`] runs the Held-Karp subset dynamic program in
//! O(q²·2^q) time; [`brute_force_tour_length`] enumerates permutations and
//! exists as an independent oracle. [`heuristic_tour`] (nearest neighbour
//! followed by 2-opt) covers point sets beyond the DP budget.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{DrcError, Result};

/// Largest point set the dynamic program accepts.
pub const EXACT_CAPACITY: usize = 20;
/// Largest point set the permutation oracle accepts.
pub const BRUTE_FORCE_CAPACITY: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn manhattan(&self, other: &Point) -> f64 {
        (self.x - other.x).abs() + (self.y - other.y).abs()
    }
}

/// A validated set of at least two points with finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<Point>,
}

impl PointSet {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() < 2 {
            return Err(DrcError::Precondition(format!(
                "a tour needs at least 2 points, got {}",
                points.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(DrcError::Precondition(format!(
                "non-finite coordinate ({}, {})",
                p.x, p.y
            )));
        }
        Ok(PointSet { points })
    }

    pub fn from_coords(coords: &[(f64, f64)]) -> Result<Self> {
        Self::new(coords.iter().map(|&(x, y)| Point::new(x, y)).collect())
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn distance_matrix(&self) -> Vec<f64> {
        let n = self.points.len();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                d[i * n + j] = self.points[i].manhattan(&self.points[j]);
            }
        }
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TourMode {
    /// Returns to the first visited point.
    ClosedCycle,
    /// Free endpoints: any start, any end.
    OpenPath,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tour {
    pub length: f64,
    /// Visiting order as indices into the point set. Closed cycles start at
    /// index 0; the return leg is implied.
    pub order: Vec<usize>,
}

/// Length of visiting `order`, including the return leg for closed cycles.
pub fn tour_length_of(ps: &PointSet, order: &[usize], mode: TourMode) -> f64 {
    let pts = ps.points();
    let mut len: f64 = order.windows(2).map(|w| pts[w[0]].manhattan(&pts[w[1]])).sum();
    if mode == TourMode::ClosedCycle && order.len() > 1 {
        len += pts[order[order.len() - 1]].manhattan(&pts[order[0]]);
    }
    len
}

pub fn exact_tour(ps: &PointSet, mode: TourMode) -> Result<Tour> {
    let q = ps.len();
    if q > EXACT_CAPACITY {
        return Err(DrcError::Capacity {
            size: q,
            capacity: EXACT_CAPACITY,
        });
    }
    let d = ps.distance_matrix();
    Ok(match mode {
        TourMode::ClosedCycle => held_karp_closed(&d, q),
        TourMode::OpenPath => held_karp_open(&d, q),
    })
}

pub fn exact_tour_length(ps: &PointSet, mode: TourMode) -> Result<f64> {
    exact_tour(ps, mode).map(|t| t.length)
}

/// Node 0 is the fixed start; the DP runs over the remaining n = q−1 nodes,
/// with bit j standing for node j+1.
fn held_karp_closed(d: &[f64], q: usize) -> Tour {
    let n = q - 1;
    let full = (1usize << n) - 1;
    let mut dp = vec![f64::INFINITY; (1 << n) * n];
    let mut parent = vec![u8::MAX; (1 << n) * n];
    for j in 0..n {
        dp[(1 << j) * n + j] = d[j + 1];
    }
    for mask in 1..=full {
        for j in 0..n {
            if mask & (1 << j) == 0 {
                continue;
            }
            let cur = dp[mask * n + j];
            if !cur.is_finite() {
                continue;
            }
            let row = (j + 1) * q;
            for k in 0..n {
                if mask & (1 << k) != 0 {
                    continue;
                }
                let next = mask | (1 << k);
                let cand = cur + d[row + k + 1];
                if cand < dp[next * n + k] {
                    dp[next * n + k] = cand;
                    parent[next * n + k] = j as u8;
                }
            }
        }
    }
    let (last, length) = (0..n)
        .map(|j| (j, dp[full * n + j] + d[(j + 1) * q]))
        .fold((0, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best });

    let mut order = Vec::with_capacity(q);
    let (mut mask, mut j) = (full, last);
    loop {
        order.push(j + 1);
        let p = parent[mask * n + j];
        mask &= !(1 << j);
        if p == u8::MAX {
            break;
        }
        j = p as usize;
    }
    order.push(0);
    order.reverse();
    Tour { length, order }
}

fn held_karp_open(d: &[f64], q: usize) -> Tour {
    let n = q;
    let full = (1usize << n) - 1;
    let mut dp = vec![f64::INFINITY; (1 << n) * n];
    let mut parent = vec![u8::MAX; (1 << n) * n];
    for j in 0..n {
        dp[(1 << j) * n + j] = 0.0;
    }
    for mask in 1..=full {
        for j in 0..n {
            if mask & (1 << j) == 0 {
                continue;
            }
            let cur = dp[mask * n + j];
            if !cur.is_finite() {
                continue;
            }
            for k in 0..n {
                if mask & (1 << k) != 0 {
                    continue;
                }
                let next = mask | (1 << k);
                let cand = cur + d[j * q + k];
                if cand < dp[next * n + k] {
                    dp[next * n + k] = cand;
                    parent[next * n + k] = j as u8;
                }
            }
        }
    }
    let (last, length) = (0..n)
        .map(|j| (j, dp[full * n + j]))
        .fold((0, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best });

    let mut order = Vec::with_capacity(q);
    let (mut mask, mut j) = (full, last);
    loop {
        order.push(j);
        let p = parent[mask * n + j];
        mask &= !(1 << j);
        if p == u8::MAX {
            break;
        }
        j = p as usize;
    }
    order.reverse();
    Tour { length, order }
}

pub fn brute_force_tour_length(ps: &PointSet, mode: TourMode) -> Result<f64> {
    let q = ps.len();
    if q > BRUTE_FORCE_CAPACITY {
        return Err(DrcError::Capacity {
            size: q,
            capacity: BRUTE_FORCE_CAPACITY,
        });
    }
    let best = match mode {
        TourMode::ClosedCycle => (1..q)
            .permutations(q - 1)
            .map(|rest| {
                let mut order = Vec::with_capacity(q);
                order.push(0);
                order.extend(rest);
                tour_length_of(ps, &order, mode)
            })
            .fold(f64::INFINITY, f64::min),
        TourMode::OpenPath => (0..q)
            .permutations(q)
            .map(|order| tour_length_of(ps, &order, mode))
            .fold(f64::INFINITY, f64::min),
    };
    Ok(best)
}

/// Nearest-neighbour construction from point 0 followed by 2-opt until no
/// improving move remains. Works for any size.
pub fn heuristic_tour(ps: &PointSet, mode: TourMode) -> Tour {
    let pts = ps.points();
    let q = pts.len();
    let mut visited = vec![false; q];
    let mut order = Vec::with_capacity(q);
    let mut cur = 0;
    visited[0] = true;
    order.push(0);
    for _ in 1..q {
        let next = (0..q)
            .filter(|&k| !visited[k])
            .min_by(|&a, &b| pts[cur].manhattan(&pts[a]).total_cmp(&pts[cur].manhattan(&pts[b])))
            .expect("unvisited point remains");
        visited[next] = true;
        order.push(next);
        cur = next;
    }

    let mut length = tour_length_of(ps, &order, mode);
    let first = if mode == TourMode::ClosedCycle { 1 } else { 0 };
    loop {
        let mut improved = false;
        for i in first..q {
            for j in i + 1..q {
                order[i..=j].reverse();
                let cand = tour_length_of(ps, &order, mode);
                if cand < length - 1e-12 {
                    length = cand;
                    improved = true;
                } else {
                    order[i..=j].reverse();
                }
            }
        }
        if !improved {
            break;
        }
    }
    Tour { length, order }
}
