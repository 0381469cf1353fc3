//! Piecewise-uniform layer-adapted spatial mesh and uniform time grid.
//!
//! The spatial mesh condenses half the nodes inside `[0, sigma]` with
//! `sigma = min(1/2, sigma0 sqrt(eps) L)`, where the factor `L` may be
//! chosen anywhere in `(ln ln N, ln N]` subject to `exp(-L) <= L/N`;
//! the default is `L = ln N`. When `sigma = 1/2` the mesh is uniform.
//!
//! Nodes are computed as exact rescalings of integer ratios:
//! `x_i = sigma * i/(N/2)` on the left and `x_i = 1 - (1-sigma)*(N-i)/(N/2)`
//! on the right. Halving both ratios is exact in IEEE arithmetic, so
//! [`SpatialMesh::bisect`] reproduces every parent node bit-for-bit.

use alloc::vec::Vec;

use crate::real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FactorChoice {
    /// `L = ln N`, the top of the admissible band.
    LnN,
    /// The smallest admissible `L`, solving `L e^L = N` (so that
    /// `exp(-L) = L/N` holds with equality). Yields the widest layer
    /// region the band permits.
    MinimalAdmissible,
    /// User-supplied `L`; must satisfy `ln ln N < L <= ln N` and
    /// `exp(-L) <= L/N`.
    Custom(f64),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("mesh needs an even number of intervals, got {0}")]
    OddIntervals(usize),
    #[error("mesh needs at least 4 intervals, got {0}")]
    TooFewIntervals(usize),
    #[error("sigma0 must be positive, got {0}")]
    BadSigma0(f64),
    #[error("mesh factor {l} outside the admissible band ({lo}, {hi}] (or exp(-L) > L/N)")]
    BadFactor { l: f64, lo: f64, hi: f64 },
    #[error("delay steps must be >= 1, got {0}")]
    BadDelaySteps(usize),
    #[error("horizon {horizon} is not an integer multiple of tau {tau}")]
    NonIntegerHorizon { horizon: f64, tau: f64 },
}

/// Immutable spatial mesh on `[0, 1]` with `n` intervals, `n/2` of them
/// inside `[0, sigma]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialMesh {
    pub n: usize,
    pub nodes: Vec<f64>,
    pub sigma: f64,
    /// Mesh factor the transition point was built with.
    pub l: f64,
    pub h_fine: f64,
    pub h_coarse: f64,
}

/// Default transition-point multiplier `sigma0 = 8 / sqrt(gamma)`, clamped
/// to at least 2.
pub fn default_sigma0(gamma: f64) -> f64 {
    (8.0 / real::sqrt(gamma)).max(2.0)
}

/// Root of `L + ln L = ln N` by bisection, nudged just above so the
/// closed-form admissibility constraint holds after rounding.
fn minimal_factor(n: usize) -> f64 {
    let target = real::ln(n as f64);
    let mut lo = 0.1;
    let mut hi = target;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid + real::ln(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi + 1e-9
}

impl SpatialMesh {
    pub fn shishkin(
        n: usize,
        epsilon: f64,
        sigma0: f64,
        factor: FactorChoice,
    ) -> Result<Self, MeshError> {
        if n % 2 != 0 {
            return Err(MeshError::OddIntervals(n));
        }
        if n < 4 {
            return Err(MeshError::TooFewIntervals(n));
        }
        if !(sigma0 > 0.0) {
            return Err(MeshError::BadSigma0(sigma0));
        }
        let hi = real::ln(n as f64);
        let l = match factor {
            FactorChoice::LnN => hi,
            FactorChoice::MinimalAdmissible => minimal_factor(n),
            FactorChoice::Custom(l) => {
                let lo = real::ln(hi);
                if !(l > lo && l <= hi) || real::exp(-l) > l / n as f64 {
                    return Err(MeshError::BadFactor { l, lo, hi });
                }
                l
            }
        };
        let sigma = (sigma0 * real::sqrt(epsilon) * l).min(0.5);
        Ok(Self::from_sigma(n, sigma, l))
    }

    /// Uniform mesh (`sigma` pinned at 1/2 regardless of `eps`).
    pub fn uniform(n: usize) -> Result<Self, MeshError> {
        if n % 2 != 0 {
            return Err(MeshError::OddIntervals(n));
        }
        if n < 4 {
            return Err(MeshError::TooFewIntervals(n));
        }
        Ok(Self::from_sigma(n, 0.5, real::ln(n as f64)))
    }

    fn from_sigma(n: usize, sigma: f64, l: f64) -> Self {
        let half = (n / 2) as f64;
        let mut nodes = Vec::with_capacity(n + 1);
        for i in 0..=n / 2 {
            nodes.push(sigma * (i as f64 / half));
        }
        for i in n / 2 + 1..=n {
            nodes.push(1.0 - (1.0 - sigma) * ((n - i) as f64 / half));
        }
        SpatialMesh {
            n,
            nodes,
            sigma,
            l,
            h_fine: sigma / half,
            h_coarse: (1.0 - sigma) / half,
        }
    }

    /// Halve every interval, keeping `sigma` and `L` (double-mesh
    /// convention: the refined mesh nests the parent nodes exactly).
    pub fn bisect(&self) -> SpatialMesh {
        Self::from_sigma(2 * self.n, self.sigma, self.l)
    }

    /// Left-hand step `h_i = x_i - x_{i-1}` as used by the stencils:
    /// `h_fine` for `i <= n/2`, `h_coarse` beyond.
    pub fn step(&self, i: usize) -> f64 {
        debug_assert!(i >= 1 && i <= self.n);
        if i <= self.n / 2 {
            self.h_fine
        } else {
            self.h_coarse
        }
    }

    pub fn is_uniform(&self) -> bool {
        self.sigma == 0.5
    }
}

/// Uniform time grid covering `[-tau, T]`: `dt = tau/m_tau`, history
/// levels `n = -m_tau..0`, computed levels `1..=M` with `M = (T/tau) m_tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    pub tau: f64,
    pub horizon: f64,
    pub dt: f64,
    /// Steps per delay interval (`m_tau`).
    pub delay_steps: usize,
    /// Total steps on `[0, T]` (`M`).
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(tau: f64, horizon: f64, delay_steps: usize) -> Result<Self, MeshError> {
        if delay_steps < 1 {
            return Err(MeshError::BadDelaySteps(delay_steps));
        }
        let ratio = horizon / tau;
        let k = real::round(ratio);
        if !(tau > 0.0) || k < 1.0 || (ratio - k).abs() > 1e-12 * ratio.abs() {
            return Err(MeshError::NonIntegerHorizon { horizon, tau });
        }
        Ok(TimeGrid {
            tau,
            horizon,
            dt: tau / delay_steps as f64,
            delay_steps,
            steps: k as usize * delay_steps,
        })
    }

    /// Grid with halved `dt` (doubled step counts) on the same interval.
    pub fn halved(&self) -> TimeGrid {
        TimeGrid {
            tau: self.tau,
            horizon: self.horizon,
            dt: self.tau / (2 * self.delay_steps) as f64,
            delay_steps: 2 * self.delay_steps,
            steps: 2 * self.steps,
        }
    }

    /// Time at level `n` (negative levels are history).
    pub fn time(&self, n: i64) -> f64 {
        n as f64 * self.dt
    }

    /// Stored rows: history band plus computed levels.
    pub fn rows(&self) -> usize {
        self.steps + self.delay_steps + 1
    }
}
