//! Poisson occupancy moments and second-order Taylor expectations.
//!
//! The number of patrons Q served by one dispatch is Poisson with mean
//! λ·H·l·w. Nonlinear functions g(Q+1) are approximated by expanding
//! around the mean:
//!
//! ```text
//! E[g(Q+1)] ≈ g(E[Q]+1) + g''(E[Q]+1) · Var[Q] / 2
//! ```

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{DrcError, Result};
use crate::rng;
use crate::tour_length::{KStarModel, TourLaw};

/// Below this mean the second-order expansion loses accuracy.
pub const TAYLOR_RELIABLE_MEAN: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OccupancyLaw {
    mean: f64,
}

impl OccupancyLaw {
    pub fn new(mean: f64) -> Result<Self> {
        if !(mean.is_finite() && mean >= 0.0) {
            return Err(DrcError::Precondition(format!(
                "occupancy mean must be finite and nonnegative, got {mean}"
            )));
        }
        Ok(OccupancyLaw { mean })
    }

    /// λ·H·A. Inputs are assumed valid; a negative or non-finite product
    /// is a programming error.
    pub fn from_rate(lambda: f64, headway: f64, area: f64) -> Self {
        let mean = lambda * headway * area;
        debug_assert!(mean.is_finite() && mean >= 0.0);
        OccupancyLaw { mean }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn taylor_reliable(&self) -> bool {
        self.mean >= TAYLOR_RELIABLE_MEAN
    }
}

/// (E[Q], E[Q²]) with E[Q²] = E[Q]² + Var[Q].
pub fn poisson_moments(law: &OccupancyLaw) -> (f64, f64) {
    let mu = law.mean;
    (mu, mu * mu + mu)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerOffset {
    ThreeHalves,
    OneHalf,
}

impl PowerOffset {
    pub fn value(self) -> f64 {
        match self {
            PowerOffset::ThreeHalves => 1.5,
            PowerOffset::OneHalf => 0.5,
        }
    }
}

/// Taylor expectation of x^a·exp(β4·x^β5) at x = Q+1.
fn weibull_power_taylor(model: &KStarModel, a: f64, mu: f64) -> f64 {
    let (b4, b5) = (model.beta4, model.beta5);
    let x = mu + 1.0;
    let curvature = a * (a - 1.0) * x.powf(a - 2.0)
        + b4 * b5 * a * x.powf(a + b5 - 2.0)
        + b4 * b5 * (a + b5 - 1.0) * x.powf(a + b5 - 2.0)
        + b4 * b4 * b5 * b5 * x.powf(a + 2.0 * b5 - 2.0);
    (b4 * x.powf(b5)).exp() * (x.powf(a) + curvature * mu / 2.0)
}

/// Second-order approximation of E[(Q+1)^(β3+offset)·exp(β4·(Q+1)^β5)].
pub fn expected_weibull_power(law: &OccupancyLaw, model: &KStarModel, offset: PowerOffset) -> f64 {
    weibull_power_taylor(model, model.beta3 + offset.value(), law.mean)
}

/// E[((Q+1)^(β3+3/2) − (Q+1)^(β3+1/2))·exp(β4·(Q+1)^β5)], the factor
/// that turns a tour into the expected in-vehicle time of its riders.
pub fn expected_ff_wait_kernel(law: &OccupancyLaw, model: &KStarModel) -> f64 {
    expected_weibull_power(law, model, PowerOffset::ThreeHalves)
        - expected_weibull_power(law, model, PowerOffset::OneHalf)
}

/// Second-order approximation of E[k*(Q+1, S)·(Q+1)^offset] under any
/// tour law. For the calibrated law this is (β1·S+β2) times
/// [`expected_weibull_power`].
pub fn expected_tour_power(law: &OccupancyLaw, tour: &TourLaw, s: f64, offset: PowerOffset) -> f64 {
    match tour {
        TourLaw::Calibrated(m) => m.shape_factor(s) * expected_weibull_power(law, m, offset),
        TourLaw::Constant(k) => {
            let m = KStarModel::constant(*k);
            m.shape_factor(s) * expected_weibull_power(law, &m, offset)
        }
        TourLaw::Yang => {
            let a = offset.value();
            let x = law.mean + 1.0;
            [(1.1055, a), (-0.008, a + 1.0), (1.0297 * s, a - 1.0)]
                .iter()
                .map(|&(c, p)| c * (x.powf(p) + p * (p - 1.0) * x.powf(p - 2.0) * law.mean / 2.0))
                .sum()
        }
    }
}

/// Sample mean of f(Q) over `n_draws` Poisson draws.
pub fn mc_expectation_oracle(law: &OccupancyLaw, f: impl Fn(u64) -> f64, n_draws: usize, seed: u64) -> Result<f64> {
    if n_draws < 10_000 {
        return Err(DrcError::Precondition(format!(
            "oracle needs at least 10^4 draws, got {n_draws}"
        )));
    }
    if law.mean == 0.0 {
        return Ok(f(0));
    }
    let poisson = Poisson::new(law.mean).map_err(|e| DrcError::Precondition(e.to_string()))?;
    let mut rng = rng::stream(seed, &[]);
    let mut sum = 0.0;
    for _ in 0..n_draws {
        let q: f64 = poisson.sample(&mut rng);
        sum += f(q as u64);
    }
    Ok(sum / n_draws as f64)
}

/// Draws one Poisson count, treating a zero mean as the point mass at 0.
pub fn sample_poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let p = Poisson::new(mean).expect("positive finite mean");
    let q: f64 = p.sample(rng);
    q as u64
}
