//! Expected tour-length laws.
//!
//! For q stops spread uniformly over a zone of area A the expected minimum
//! Manhattan tour is modeled as k*·√(qA). The calibrated law makes k* a
//! function of q and the zone aspect ratio S:
//!
//! ```text
//! k*(q, S) = (β1·S + β2) · q^β3 · exp(β4 · q^β5)
//! ```
//!
//! Swath (strip) routing instead uses q·w0/3 + A/w0 for a strip width w0
//! that must cut the zone into a whole number of strips.

use serde::{Deserialize, Serialize};

/// Largest q and S covered by the calibration grid.
pub const CALIBRATED_MAX_Q: f64 = 15.0;
pub const CALIBRATED_MAX_S: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KStarModel {
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub beta4: f64,
    pub beta5: f64,
}

impl KStarModel {
    /// Published coefficients.
    pub fn table1() -> Self {
        KStarModel {
            beta1: 0.1102,
            beta2: 1.4569,
            beta3: -0.1472,
            beta4: -2.5508,
            beta5: -2.6396,
        }
    }

    /// A k* that ignores q and S entirely.
    pub fn constant(k: f64) -> Self {
        KStarModel {
            beta1: 0.0,
            beta2: k,
            beta3: 0.0,
            beta4: 0.0,
            beta5: 0.0,
        }
    }

    pub fn from_array(b: [f64; 5]) -> Self {
        KStarModel {
            beta1: b[0],
            beta2: b[1],
            beta3: b[2],
            beta4: b[3],
            beta5: b[4],
        }
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.beta1, self.beta2, self.beta3, self.beta4, self.beta5]
    }

    /// Evaluates k*(q, S). `q` is real-valued so that the law can be
    /// evaluated at expected occupancies.
    pub fn kstar(&self, q: f64, s: f64) -> f64 {
        (self.beta1 * s + self.beta2) * q.powf(self.beta3) * (self.beta4 * q.powf(self.beta5)).exp()
    }

    /// The S-dependent prefactor β1·S + β2.
    pub fn shape_factor(&self, s: f64) -> f64 {
        self.beta1 * s + self.beta2
    }
}

/// Whether (q, S) lies outside the calibrated grid.
pub fn is_extrapolation(q: f64, s: f64) -> bool {
    q > CALIBRATED_MAX_Q || s > CALIBRATED_MAX_S + 1e-12
}

/// k*(q, S)·√(q·l·w) for a zone of dimensions l × w.
pub fn expected_ff_tour_length(model: &KStarModel, q: usize, l: f64, w: f64) -> f64 {
    let s = crate::params::aspect_ratio(l, w);
    let q = q as f64;
    if is_extrapolation(q, s) {
        log::warn!("k* evaluated outside the calibrated range at q={q}, S={s:.3}");
    }
    model.kstar(q, s) * (q * l * w).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Benchmark {
    /// 1.1055 − 0.008·q + 1.0297·S/q
    Yang,
    /// Constant 0.93.
    Chakraborti,
    /// Constant 1.15, the unconstrained swath optimum.
    DaganzoSwath,
}

pub fn benchmark_kstar(which: Benchmark, q: f64, s: f64) -> f64 {
    match which {
        Benchmark::Yang => 1.1055 - 0.008 * q + 1.0297 * s / q,
        Benchmark::Chakraborti => 0.93,
        Benchmark::DaganzoSwath => 1.15,
    }
}

/// The k* law used when costing fully-flexible tours.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TourLaw {
    Calibrated(KStarModel),
    Constant(f64),
    Yang,
}

impl TourLaw {
    pub fn table1() -> Self {
        TourLaw::Calibrated(KStarModel::table1())
    }

    pub fn kstar(&self, q: f64, s: f64) -> f64 {
        match self {
            TourLaw::Calibrated(m) => m.kstar(q, s),
            TourLaw::Constant(k) => *k,
            TourLaw::Yang => benchmark_kstar(Benchmark::Yang, q, s),
        }
    }
}

/// Swath tour length q·w0/3 + A/w0.
pub fn swath_tour_length(q: f64, area: f64, w0: f64) -> f64 {
    q * w0 / 3.0 + area / w0
}

/// Zone dimension the strips run along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StripAxis {
    /// Strips run along the length l, so the width w is cut into strips.
    Length,
    /// Strips run along the width w, so the length l is cut into strips.
    Width,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwathConfig {
    pub w0: f64,
    pub n_strips: u32,
    pub along: StripAxis,
}

impl SwathConfig {
    /// The zone dimension that the strips partition.
    pub fn cut_dimension(&self, l: f64, w: f64) -> f64 {
        match self.along {
            StripAxis::Length => w,
            StripAxis::Width => l,
        }
    }

    /// The zone dimension each strip spans.
    pub fn strip_length(&self, l: f64, w: f64) -> f64 {
        match self.along {
            StripAxis::Length => l,
            StripAxis::Width => w,
        }
    }
}

/// All strip widths l/i and w/i (1 ≤ i ≤ `max_strips`) no wider than the
/// narrower zone side, widest first. Widths reachable both ways keep the
/// configuration with fewer strips.
pub fn feasible_swath_widths(l: f64, w: f64, max_strips: u32) -> Vec<SwathConfig> {
    let limit = l.min(w) * (1.0 + 1e-12);
    let mut out: Vec<SwathConfig> = Vec::new();
    for i in 1..=max_strips {
        for (dim, along) in [(w, StripAxis::Length), (l, StripAxis::Width)] {
            let w0 = dim / f64::from(i);
            if w0 > limit {
                continue;
            }
            let dup = out.iter().any(|c| (c.w0 - w0).abs() <= 1e-12 * w0.max(c.w0));
            if !dup {
                out.push(SwathConfig { w0, n_strips: i, along });
            }
        }
    }
    out.sort_by(|a, b| b.w0.total_cmp(&a.w0));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwathGap {
    pub q: u32,
    pub best_w0: f64,
    pub constrained: f64,
    pub unconstrained: f64,
    /// Percentage excess of the constrained optimum over the unconstrained.
    pub gap_pct: f64,
}

/// Best feasible swath tour against the unconstrained optimum 2√(qA/3) for
/// each q.
pub fn constrained_swath_mape(l: f64, w: f64, q_range: impl IntoIterator<Item = u32>) -> Vec<SwathGap> {
    let area = l * w;
    let widths = feasible_swath_widths(l, w, 4);
    q_range
        .into_iter()
        .map(|q| {
            let qf = f64::from(q);
            let (best_w0, constrained) = widths
                .iter()
                .map(|c| (c.w0, swath_tour_length(qf, area, c.w0)))
                .fold((f64::NAN, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
            let unconstrained = 2.0 * (qf * area / 3.0).sqrt();
            SwathGap {
                q,
                best_w0,
                constrained,
                unconstrained,
                gap_pct: (constrained - unconstrained) / unconstrained * 100.0,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kstar_examples() {
        let m = KStarModel::table1();
        assert!((m.kstar(2.0, 1.0) - 0.940).abs() < 0.005);
        assert!((m.kstar(5.0, 1.0) - 1.192).abs() < 0.005);
        assert!((m.kstar(3.0, 3.0) - 1.33).abs() / 1.33 < 0.05);
    }

    #[test]
    fn ff_tour_length_examples() {
        let m = KStarModel::table1();
        assert!((expected_ff_tour_length(&m, 4, 1.0, 1.0) - 2.40).abs() < 0.02);
        let a = expected_ff_tour_length(&m, 6, 0.5, 0.8);
        let b = expected_ff_tour_length(&m, 6, 1.0, 1.6);
        assert!((b / a - 2.0).abs() < 1e-12);
        let x = expected_ff_tour_length(&m, 2, 2.0, 0.5);
        assert!(x.is_finite() && x > 0.0);
        assert!(is_extrapolation(2.0, 4.0));
    }

    #[test]
    fn benchmarks() {
        assert!((benchmark_kstar(Benchmark::Yang, 10.0, 1.0) - 1.12847).abs() < 1e-12);
        assert_eq!(benchmark_kstar(Benchmark::Chakraborti, 3.0, 2.0), 0.93);
        assert_eq!(benchmark_kstar(Benchmark::DaganzoSwath, 7.0, 1.0), 1.15);
        assert_eq!(KStarModel::constant(0.93).kstar(5.0, 3.0), 0.93);
    }

    #[test]
    fn swath_length_examples() {
        assert!((swath_tour_length(3.0, 1.0, 1.0) - 2.0).abs() < 1e-12);
        assert!((swath_tour_length(0.0, 1.0, 0.5) - 2.0).abs() < 1e-12);
        assert!((swath_tour_length(12.0, 1.0, 0.5) - 4.0).abs() < 1e-12);
    }

    fn widths(l: f64, w: f64, k: u32) -> Vec<f64> {
        feasible_swath_widths(l, w, k).iter().map(|c| c.w0).collect()
    }

    #[test]
    fn swath_width_sets() {
        let got = widths(2.0, 0.5, 4);
        let want = [0.5, 0.25, 1.0 / 6.0, 0.125];
        assert_eq!(got.len(), 4);
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-12);
        }
        let sq = widths(1.0, 1.0, 4);
        assert_eq!(sq.len(), 4);
        for (g, w) in sq.iter().zip([1.0, 0.5, 1.0 / 3.0, 0.25]) {
            assert!((g - w).abs() < 1e-12);
        }
        assert_eq!(widths(1.0, 1.0, 1), vec![1.0]);
        let c = feasible_swath_widths(0.5, 2.0, 4)[0];
        assert_eq!((c.n_strips, c.along), (1, StripAxis::Width));
    }

    #[test]
    fn swath_gap_examples() {
        let g = constrained_swath_mape(1.0, 1.0, [2, 3]);
        assert!((g[0].gap_pct - 2.06).abs() < 0.05);
        assert_eq!(g[0].best_w0, 1.0);
        assert!(g[1].gap_pct.abs() < 1e-9);
    }
}
