//! Square QAM constellations with an explicit per-dimension range.
//!
//! A constellation is parameterized by its side count `N` (so `N^2` points)
//! and its range `c`, the peak-to-peak extent of each real dimension. The
//! grid levels per axis are `-c/2 + a*d` for `a in 0..N` with minimum distance
//! `d = c/(N-1)`; points are ordered row-major by (imag level, real level), so
//! index `i = b*N + a`. Keeping `c` explicit instead of normalizing average
//! energy is the point: range design against hard amplitude budgets is what
//! the rest of the crate optimizes.

use crate::{Complex, Error, Result};

// ---------------------------------------------------------------------------
// types
// ---------------------------------------------------------------------------

/// Square `N^2`-QAM grid with range `c` per real dimension.
#[derive(Clone, Debug)]
pub struct QamConstellation {
    n_side: u32,
    range_c: f64,
    min_distance: f64,
    points: Vec<Complex>,
    neighbor_counts: Vec<u8>,
}

/// The four unit-modulus one-bit transmit symbols `(+-1 +- i)/sqrt(2)`.
///
/// The order is fixed and load-bearing: greedy and exhaustive searches break
/// ties toward the smallest alphabet index, so reordering would change which
/// of several equally good words is returned.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QpskAlphabet;

impl QpskAlphabet {
    pub const LEN: usize = 4;

    /// Alphabet points in fixed order `[(1+i), (1-i), (-1+i), (-1-i)] / sqrt(2)`.
    pub fn points() -> [Complex; 4] {
        let u = std::f64::consts::FRAC_1_SQRT_2;
        [
            Complex::new(u, u),
            Complex::new(u, -u),
            Complex::new(-u, u),
            Complex::new(-u, -u),
        ]
    }

    /// Single alphabet point by index (0..4).
    pub fn point(index: usize) -> Complex {
        Self::points()[index]
    }
}

// ---------------------------------------------------------------------------
// construction
// ---------------------------------------------------------------------------

/// Builds the square `n_side^2`-QAM grid with range `range_c`.
///
/// `n_side` must be even and at least 2 (square QAM with a symmetric zero-free
/// grid); `range_c` must be finite and positive.
pub fn build_qam(n_side: u32, range_c: f64) -> Result<QamConstellation> {
    if n_side < 2 || n_side % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "n_side must be even and >= 2, got {n_side}"
        )));
    }
    if !range_c.is_finite() || range_c <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "range_c must be finite and positive, got {range_c}"
        )));
    }
    let n = n_side as usize;
    let min_distance = range_c / (n_side - 1) as f64;
    let level = |k: usize| -> f64 { -range_c / 2.0 + k as f64 * min_distance };

    let mut points = Vec::with_capacity(n * n);
    let mut neighbor_counts = Vec::with_capacity(n * n);
    for b in 0..n {
        for a in 0..n {
            points.push(Complex::new(level(a), level(b)));
            let edge = |k: usize| if k == 0 || k == n - 1 { 1u8 } else { 2u8 };
            neighbor_counts.push(edge(a) + edge(b));
        }
    }
    Ok(QamConstellation { n_side, range_c, min_distance, points, neighbor_counts })
}

impl QamConstellation {
    pub fn n_side(&self) -> u32 {
        self.n_side
    }

    pub fn range_c(&self) -> f64 {
        self.range_c
    }

    /// Minimum distance `d = c/(N-1)` between adjacent points.
    pub fn min_distance(&self) -> f64 {
        self.min_distance
    }

    /// All `N^2` points, row-major by (imag level, real level).
    pub fn points(&self) -> &[Complex] {
        &self.points
    }

    /// Number of minimum-distance neighbors of each point (2, 3, or 4).
    pub fn neighbor_counts(&self) -> &[u8] {
        &self.neighbor_counts
    }

    /// Magnitude of a corner point, `c/sqrt(2)`; the peak symbol amplitude.
    pub fn corner_magnitude(&self) -> f64 {
        self.range_c / std::f64::consts::SQRT_2
    }

    /// Index of the nearest constellation point to `y`.
    ///
    /// Ties resolve to the smallest index. Per axis the first minimal level
    /// wins; the row-major order makes that the smallest index overall, since
    /// the set of nearest points is the Cartesian product of the per-axis
    /// nearest levels.
    pub fn quantize(&self, y: Complex) -> Result<usize> {
        if !y.re.is_finite() || !y.im.is_finite() {
            return Err(Error::InvalidInput(format!(
                "cannot quantize non-finite sample {y}"
            )));
        }
        let a = self.nearest_level(y.re);
        let b = self.nearest_level(y.im);
        Ok(b * self.n_side as usize + a)
    }

    fn nearest_level(&self, v: f64) -> usize {
        let n = self.n_side as usize;
        let mut best = 0usize;
        let mut best_dist = f64::INFINITY;
        for k in 0..n {
            let level = -self.range_c / 2.0 + k as f64 * self.min_distance;
            let dist = (v - level).abs();
            if dist < best_dist {
                best_dist = dist;
                best = k;
            }
        }
        best
    }
}

// ---------------------------------------------------------------------------
// closed-form moments
// ---------------------------------------------------------------------------

/// Mean and variance of the symbol power `|s|^2` under uniform signaling.
///
/// Returns `(mu, sigma_sq)` with `mu = (N+1)/(6(N-1)) * c^2` and
/// `sigma_sq = (N+1)(N^2-4)/(90(N-1)^3) * c^4`. Both vanish appropriately:
/// QPSK (`N = 2`) has constant symbol power, so `sigma_sq = 0`.
pub fn symbol_power_moments(n_side: u32, range_c: f64) -> Result<(f64, f64)> {
    // Parameter domain is identical to build_qam.
    if n_side < 2 || n_side % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "n_side must be even and >= 2, got {n_side}"
        )));
    }
    if !range_c.is_finite() || range_c <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "range_c must be finite and positive, got {range_c}"
        )));
    }
    let n = n_side as f64;
    let c2 = range_c * range_c;
    let mu = (n + 1.0) / (6.0 * (n - 1.0)) * c2;
    let sigma_sq = (n + 1.0) * (n * n - 4.0) / (90.0 * (n - 1.0).powi(3)) * c2 * c2;
    Ok((mu, sigma_sq))
}

/// Average minimum-distance neighbor count `4(1 - 1/N)` of square `N^2`-QAM.
pub fn avg_neighbor_count(n_side: u32) -> f64 {
    assert!(n_side >= 2, "n_side must be >= 2, got {n_side}");
    4.0 * (1.0 - 1.0 / n_side as f64)
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
