//! Analytic error-rate machinery.
//!
//! Exact Gaussian tails back every prediction; the two-exponential surrogate
//! exists only because the range-shrink argument for one-bit transmitters is
//! built on it, and tests pin how loose it is. Probabilities coming out of
//! union-style sums are clipped to [0, 1].

use crate::constellation::{avg_neighbor_count, QamConstellation};
use crate::range_design::{load_factor_f, one_bit_shrink};
use crate::{Complex, Error, Result};

// ---------------------------------------------------------------------------
// Gaussian tails
// ---------------------------------------------------------------------------

/// Exact Gaussian tail `Q(u) = erfc(u / sqrt(2)) / 2`.
pub fn q_function(u: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(u / std::f64::consts::SQRT_2)
}

/// Two-exponential tail surrogate `e^(-u^2/2)/12 + e^(-2u^2/3)/4`.
///
/// Only valid for `u >= 0`; known loose (about 26% high at `u = 2`). Kept for
/// replicating the shrink-factor argument, never used in predictions.
pub fn q_approx(u: f64) -> f64 {
    assert!(u >= 0.0, "q_approx requires u >= 0, got {u}");
    (-0.5 * u * u).exp() / 12.0 + (-2.0 * u * u / 3.0).exp() / 4.0
}

// ---------------------------------------------------------------------------
// pairwise and union-bound error rates
// ---------------------------------------------------------------------------

/// Probability that noise pushes the distorted receive point `s_hat_i`
/// (intended `s_i`) across the decision boundary toward `s_j`:
/// `Q((dh_ij^2 - dh_ii^2) / (2 d_ij sigma))`.
pub fn pairwise_error_prob(
    s_hat_i: Complex,
    s_i: Complex,
    s_j: Complex,
    sigma: f64,
) -> Result<f64> {
    let d_ij = (s_i - s_j).norm();
    if d_ij == 0.0 {
        return Err(Error::InvalidParameter(
            "pairwise error needs distinct constellation points".into(),
        ));
    }
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "sigma must be finite and positive, got {sigma}"
        )));
    }
    let dh_ij_sq = (s_hat_i - s_j).norm_sqr();
    let dh_ii_sq = (s_hat_i - s_i).norm_sqr();
    Ok(q_function((dh_ij_sq - dh_ii_sq) / (2.0 * d_ij * sigma)))
}

/// Union-style SER upper bound from per-symbol distortion radii:
/// `sum_i g_i/N^2 Q((d - 2 dh_ii) / (2 sigma))`, clipped to [0, 1].
pub fn ser_upper_bound(
    constellation: &QamConstellation,
    dhat_ii: &[f64],
    sigma: f64,
) -> Result<f64> {
    let n_points = constellation.points().len();
    if dhat_ii.len() != n_points {
        return Err(Error::DimensionMismatch(format!(
            "expected {n_points} distortion radii, got {}",
            dhat_ii.len()
        )));
    }
    if dhat_ii.iter().any(|&d| !d.is_finite() || d < 0.0) {
        return Err(Error::InvalidParameter(
            "distortion radii must be finite and nonnegative".into(),
        ));
    }
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "sigma must be finite and positive, got {sigma}"
        )));
    }
    let d = constellation.min_distance();
    let sum: f64 = constellation
        .neighbor_counts()
        .iter()
        .zip(dhat_ii)
        .map(|(&g, &dh)| g as f64 * q_function((d - 2.0 * dh) / (2.0 * sigma)))
        .sum();
    Ok((sum / n_points as f64).clamp(0.0, 1.0))
}

// ---------------------------------------------------------------------------
// closed-form predictions
// ---------------------------------------------------------------------------

/// Transmitter family for a closed-form SER prediction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SerScheme {
    ZfInfinite,
    OneBit,
}

/// Closed-form SER prediction at its designed minimum distance.
#[derive(Clone, Copy, Debug)]
pub struct SerPrediction {
    scheme: SerScheme,
    min_distance: f64,
    predicted_ser: f64,
}

impl SerPrediction {
    /// Evaluates the designed minimum distance and nearest-neighbor SER for
    /// a `k_users`-user system with `m_antennas` antennas at noise `sigma`.
    pub fn compute(
        p: f64,
        m_antennas: u32,
        k_users: u32,
        n_side: u32,
        sigma: f64,
        scheme: SerScheme,
    ) -> Result<Self> {
        let min_distance = analytic_min_distance(p, m_antennas, k_users, n_side, scheme)?;
        let predicted_ser = analytic_ser(n_side, min_distance, sigma)?;
        Ok(SerPrediction { scheme, min_distance, predicted_ser })
    }

    pub fn scheme(&self) -> SerScheme {
        self.scheme
    }

    pub fn min_distance(&self) -> f64 {
        self.min_distance
    }

    pub fn predicted_ser(&self) -> f64 {
        self.predicted_ser
    }
}

/// Nearest-neighbor SER `gbar_N * Q(d / (2 sigma))`, clipped to [0, 1].
///
/// `sigma = 0` is the noiseless limit and returns 0.
pub fn analytic_ser(n_side: u32, min_distance: f64, sigma: f64) -> Result<f64> {
    if n_side < 2 || n_side % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "n_side must be even and >= 2, got {n_side}"
        )));
    }
    if !min_distance.is_finite() || min_distance <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "min_distance must be finite and positive, got {min_distance}"
        )));
    }
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "sigma must be finite and nonnegative, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(0.0);
    }
    let ser = avg_neighbor_count(n_side) * q_function(min_distance / (2.0 * sigma));
    Ok(ser.clamp(0.0, 1.0))
}

/// Designed minimum distance `sqrt(2PM / ((N-1)^2 f(K,N)))`, shrunk by
/// `sqrt(2/pi)` for the one-bit transmitter.
pub fn analytic_min_distance(
    p: f64,
    m_antennas: u32,
    k_users: u32,
    n_side: u32,
    scheme: SerScheme,
) -> Result<f64> {
    if !p.is_finite() || p <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "power must be finite and positive, got {p}"
        )));
    }
    if m_antennas == 0 {
        return Err(Error::InvalidParameter("m_antennas must be >= 1".into()));
    }
    let f = load_factor_f(k_users, n_side)?;
    let f_tilde = (n_side as f64 - 1.0).powi(2) * f;
    let d = (2.0 * p * m_antennas as f64 / f_tilde).sqrt();
    Ok(match scheme {
        SerScheme::ZfInfinite => d,
        SerScheme::OneBit => one_bit_shrink() * d,
    })
}

// ---------------------------------------------------------------------------
// design constants
// ---------------------------------------------------------------------------

/// Transmit power penalty of one-bit transmission, `10 log10(pi/2)` dB.
pub fn power_gap_db() -> f64 {
    10.0 * (std::f64::consts::PI / 2.0).log10()
}

/// Antenna-count penalty of one-bit transmission, `pi/2`.
pub fn antenna_factor() -> f64 {
    std::f64::consts::PI / 2.0
}

/// Largest QAM side `N` whose corners stay reachable at `M` antennas,
/// `17.9 sqrt(M) + 1`.
pub fn max_side_for_mse(m_antennas: u32) -> f64 {
    assert!(m_antennas >= 1, "m_antennas must be >= 1");
    17.9 * (m_antennas as f64).sqrt() + 1.0
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
