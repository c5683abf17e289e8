//! Constellation-range rules.
//!
//! Each rule answers the same question: how large may the QAM range `c` be so
//! that the intended symbols stay inside the region the transmitter can
//! actually reach? Single-user rules come in an exact-channel form and an
//! asymptotic (channel-hardened) form; the multi-user zero-forcing rules are
//! hardened by construction. The one-bit rules are the infinite-resolution
//! rules shrunk by `sqrt(2/pi)`, the quantization loss of the one-bit
//! transmit alphabet.

use crate::channel::channel_norms;
use crate::{Complex, Error, Result};

/// Headroom multiplier on the load standard deviation in [`load_factor_f`].
pub const DEFAULT_HEADROOM_KAPPA: f64 = 2.0;

/// Ratio `sqrt(2/pi)` between one-bit and infinite-resolution ranges.
pub fn one_bit_shrink() -> f64 {
    (2.0 / std::f64::consts::PI).sqrt()
}

// ---------------------------------------------------------------------------
// rule type
// ---------------------------------------------------------------------------

/// Which transmitter a range is designed for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RangeScheme {
    InfTotalPower,
    InfPerAntenna,
    ZfMultiUser,
    OneBitSingle,
    OneBitMulti,
}

/// A validated (scheme, asymptotic) pair that can evaluate its range.
///
/// Multi-user rules exist only in hardened form, so `asymptotic` must be true
/// for them; single-user rules support both forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RangeRule {
    scheme: RangeScheme,
    asymptotic: bool,
}

impl RangeRule {
    pub fn new(scheme: RangeScheme, asymptotic: bool) -> Result<Self> {
        let multi = matches!(scheme, RangeScheme::ZfMultiUser | RangeScheme::OneBitMulti);
        if multi && !asymptotic {
            return Err(Error::InvalidParameter(format!(
                "{scheme:?} has no exact-channel form; asymptotic must be true"
            )));
        }
        Ok(RangeRule { scheme, asymptotic })
    }

    pub fn scheme(&self) -> RangeScheme {
        self.scheme
    }

    pub fn asymptotic(&self) -> bool {
        self.asymptotic
    }

    /// Evaluates the rule. Single-user schemes read the channel row `h`
    /// (its length when asymptotic); multi-user schemes use `h.len()` as the
    /// antenna count together with `k_users` and `n_side`.
    pub fn evaluate(&self, p: f64, h: &[Complex], k_users: u32, n_side: u32) -> Result<f64> {
        let m = h.len() as u32;
        match self.scheme {
            RangeScheme::InfTotalPower => range_inf_total(p, h, self.asymptotic),
            RangeScheme::InfPerAntenna => range_inf_per_antenna(p, h, self.asymptotic),
            RangeScheme::OneBitSingle => range_one_bit_single(p, h, self.asymptotic),
            RangeScheme::ZfMultiUser => range_zf_multi(p, m, k_users, n_side),
            RangeScheme::OneBitMulti => range_one_bit_multi(p, m, k_users, n_side),
        }
    }
}

// ---------------------------------------------------------------------------
// single-user rules
// ---------------------------------------------------------------------------

fn check_power(p: f64) -> Result<()> {
    if !p.is_finite() || p <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "power must be finite and positive, got {p}"
        )));
    }
    Ok(())
}

fn check_channel(h: &[Complex]) -> Result<()> {
    if h.is_empty() || h.iter().all(|x| x.norm_sqr() == 0.0) {
        return Err(Error::DegenerateChannel(
            "channel row is empty or has zero energy".into(),
        ));
    }
    Ok(())
}

/// Largest range under a total per-symbol power budget with an
/// infinite-resolution transmitter: `c = sqrt(2P) ||h||_2`, asymptotically
/// `sqrt(2PM)`.
pub fn range_inf_total(p: f64, h: &[Complex], asymptotic: bool) -> Result<f64> {
    check_power(p)?;
    check_channel(h)?;
    if asymptotic {
        Ok((2.0 * p * h.len() as f64).sqrt())
    } else {
        let (_, l2) = channel_norms(h);
        Ok((2.0 * p).sqrt() * l2)
    }
}

/// Largest range under per-antenna power budgets: `c = sqrt(2P/M) ||h||_1`,
/// asymptotically `sqrt(pi/4) sqrt(2PM)`.
pub fn range_inf_per_antenna(p: f64, h: &[Complex], asymptotic: bool) -> Result<f64> {
    check_power(p)?;
    check_channel(h)?;
    let m = h.len() as f64;
    if asymptotic {
        Ok((std::f64::consts::PI / 4.0).sqrt() * (2.0 * p * m).sqrt())
    } else {
        let (l1, _) = channel_norms(h);
        Ok((2.0 * p / m).sqrt() * l1)
    }
}

/// One-bit single-user range: `sqrt(2/pi)` times [`range_inf_total`].
pub fn range_one_bit_single(p: f64, h: &[Complex], asymptotic: bool) -> Result<f64> {
    Ok(one_bit_shrink() * range_inf_total(p, h, asymptotic)?)
}

// ---------------------------------------------------------------------------
// multi-user rules
// ---------------------------------------------------------------------------

fn check_sides(k_users: u32, n_side: u32) -> Result<()> {
    if k_users == 0 {
        return Err(Error::InvalidParameter("k_users must be >= 1".into()));
    }
    if n_side < 2 || n_side % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "n_side must be even and >= 2, got {n_side}"
        )));
    }
    Ok(())
}

/// Normalized downlink load `f(K, N, kappa) = (K mu_s + kappa sqrt(K) sigma_s) / (c^2/2)`.
///
/// This is the factor by which the sum power of K intended symbols exceeds
/// `c^2/2`, with `kappa` standard deviations of headroom. The value is
/// range-independent because both moments scale with `c`.
///
/// The closed form comes from a large-K normal approximation of the symbol
/// load; treat values for K < 4 as indicative rather than sharp.
pub fn load_factor_with_headroom(k_users: u32, n_side: u32, kappa: f64) -> Result<f64> {
    check_sides(k_users, n_side)?;
    if !kappa.is_finite() || kappa < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "kappa must be finite and nonnegative, got {kappa}"
        )));
    }
    let k = k_users as f64;
    let n = n_side as f64;
    let mean_term = k * (n + 1.0) / (3.0 * (n - 1.0));
    let var_unit = (n + 1.0) * (n * n - 4.0) / (90.0 * (n - 1.0).powi(3));
    Ok(mean_term + 2.0 * kappa * (k * var_unit).sqrt())
}

/// Load factor at the default two-sigma headroom,
/// `f(K,N) = K(N+1)/(3(N-1)) + 2 sqrt(K(N+1)(N^2-4)/(22.5(N-1)^3))`.
pub fn load_factor_f(k_users: u32, n_side: u32) -> Result<f64> {
    load_factor_with_headroom(k_users, n_side, DEFAULT_HEADROOM_KAPPA)
}

/// Multi-user zero-forcing range `c = sqrt(2PM / f(K,N))` with explicit headroom.
pub fn range_zf_multi_with_headroom(
    p: f64,
    m_antennas: u32,
    k_users: u32,
    n_side: u32,
    kappa: f64,
) -> Result<f64> {
    check_power(p)?;
    if m_antennas == 0 {
        return Err(Error::InvalidParameter("m_antennas must be >= 1".into()));
    }
    let f = load_factor_with_headroom(k_users, n_side, kappa)?;
    Ok((2.0 * p * m_antennas as f64 / f).sqrt())
}

/// Multi-user zero-forcing range at the default headroom.
pub fn range_zf_multi(p: f64, m_antennas: u32, k_users: u32, n_side: u32) -> Result<f64> {
    range_zf_multi_with_headroom(p, m_antennas, k_users, n_side, DEFAULT_HEADROOM_KAPPA)
}

/// Multi-user one-bit range: `sqrt(2/pi)` times [`range_zf_multi`].
pub fn range_one_bit_multi(p: f64, m_antennas: u32, k_users: u32, n_side: u32) -> Result<f64> {
    Ok(one_bit_shrink() * range_zf_multi(p, m_antennas, k_users, n_side)?)
}

// ---------------------------------------------------------------------------
// sweep parameters
// ---------------------------------------------------------------------------

/// Range multiplier `lambda = c / reference_range`.
pub fn lambda_param(c: f64, reference_range: f64) -> Result<f64> {
    if !reference_range.is_finite() || reference_range <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "reference range must be finite and positive, got {reference_range}"
        )));
    }
    if !c.is_finite() || c < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "range must be finite and nonnegative, got {c}"
        )));
    }
    Ok(c / reference_range)
}

/// Symbol reach parameter `gamma = |s| / (sqrt(P) ||h||_2)`.
///
/// The single-user one-bit transmitter reconstructs `s` essentially exactly
/// when `gamma` is below the `sqrt(2/pi)` threshold and saturates above it.
pub fn gamma_param(s: Complex, p: f64, h: &[Complex]) -> Result<f64> {
    check_power(p)?;
    check_channel(h)?;
    let (_, l2) = channel_norms(h);
    Ok(s.norm() / (p.sqrt() * l2))
}

// ---------------------------------------------------------------------------
// SDP rounding constants
// ---------------------------------------------------------------------------

/// Unit-modulus alphabet used by the semidefinite-relaxation bound: the q-th
/// roots of unity, or the full unit circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseAlphabet {
    Roots(u32),
    Continuous,
}

/// Approximation ratio of randomized rounding onto a [`PhaseAlphabet`]:
/// `2/pi` for q = 2, `q^2 (1 - cos(2 pi/q)) / (8 pi)` for q >= 3, and the
/// q -> infinity limit `pi/4` for the continuous circle.
pub fn approximation_ratio(alphabet: PhaseAlphabet) -> Result<f64> {
    use std::f64::consts::PI;
    match alphabet {
        PhaseAlphabet::Roots(q) if q < 2 => Err(Error::InvalidParameter(format!(
            "phase alphabet needs q >= 2, got {q}"
        ))),
        PhaseAlphabet::Roots(2) => Ok(2.0 / PI),
        PhaseAlphabet::Roots(q) => {
            let qf = q as f64;
            Ok(qf * qf * (1.0 - (2.0 * PI / qf).cos()) / (8.0 * PI))
        }
        PhaseAlphabet::Continuous => Ok(PI / 4.0),
    }
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
