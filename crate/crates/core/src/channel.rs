//! Seeded Rayleigh channel draws and complex AWGN.
//!
//! Reproducibility contract: every random quantity in the crate comes from a
//! [`SeedSpec`] stream, keyed by `(master_seed, purpose, indices)`. Distinct
//! labels give statistically independent ChaCha streams, and a stream's output
//! depends only on its label, never on execution order. Monte Carlo runs that
//! key streams per (sweep point, trial, slot) therefore produce identical
//! results at any thread count, and trimming one count never shifts the
//! randomness of the remaining streams.

use num_complex::ComplexFloat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Complex, Error, Result};

// ---------------------------------------------------------------------------
// seeding
// ---------------------------------------------------------------------------

/// Label of one reproducible random stream.
///
/// Streams derive from a root master seed plus a purpose tag and an index
/// list; [`SeedSpec::stream`] always labels relative to the same master seed,
/// so `spec.stream("noise", &[p, t, s])` is one flat namespace per master.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedSpec {
    master_seed: u64,
    purpose: &'static str,
    indices: Vec<u64>,
}

impl SeedSpec {
    /// Root spec with an empty label.
    pub fn new(master_seed: u64) -> Self {
        SeedSpec { master_seed, purpose: "", indices: Vec::new() }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Derived stream label under the same master seed.
    pub fn stream(&self, purpose: &'static str, indices: &[u64]) -> SeedSpec {
        SeedSpec {
            master_seed: self.master_seed,
            purpose,
            indices: indices.to_vec(),
        }
    }

    /// Deterministic generator for this label.
    ///
    /// The key is a stable FNV-1a / SplitMix64 expansion of the label bytes;
    /// no platform- or version-dependent hasher is involved.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut h = FNV_OFFSET;
        for b in self.master_seed.to_le_bytes() {
            h = fnv1a_step(h, b);
        }
        h = fnv1a_step(h, 0xfe);
        for b in (self.purpose.len() as u64).to_le_bytes() {
            h = fnv1a_step(h, b);
        }
        for b in self.purpose.bytes() {
            h = fnv1a_step(h, b);
        }
        for &idx in &self.indices {
            h = fnv1a_step(h, 0xfd);
            for b in idx.to_le_bytes() {
                h = fnv1a_step(h, b);
            }
        }
        let mut key = [0u8; 32];
        let mut state = h;
        for chunk in key.chunks_exact_mut(8) {
            state = splitmix64(&mut state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a_step(h: u64, byte: u8) -> u64 {
    (h ^ byte as u64).wrapping_mul(FNV_PRIME)
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

// ---------------------------------------------------------------------------
// channel
// ---------------------------------------------------------------------------

/// Downlink channel for `K` users over `M` antennas.
///
/// Row `k` stores the conjugated user vector `h_k^H`, so the noiseless
/// receive operation is a plain (conjugation-free) matrix-vector product.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelMatrix {
    k_users: u32,
    m_antennas: u32,
    entries: Vec<Complex>,
}

impl ChannelMatrix {
    /// Wraps explicit row-major entries (row `k` is `h_k^H`).
    pub fn from_entries(k_users: u32, m_antennas: u32, entries: Vec<Complex>) -> Result<Self> {
        if k_users == 0 || m_antennas == 0 {
            return Err(Error::InvalidParameter(format!(
                "channel dimensions must be positive, got {k_users} x {m_antennas}"
            )));
        }
        if entries.len() != (k_users as usize) * (m_antennas as usize) {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {k_users} x {m_antennas} channel, got {}",
                (k_users as usize) * (m_antennas as usize),
                entries.len()
            )));
        }
        if entries.iter().any(|e| !e.re.is_finite() || !e.im.is_finite()) {
            return Err(Error::InvalidInput("channel entries must be finite".into()));
        }
        Ok(ChannelMatrix { k_users, m_antennas, entries })
    }

    pub fn k_users(&self) -> u32 {
        self.k_users
    }

    pub fn m_antennas(&self) -> u32 {
        self.m_antennas
    }

    /// Row `k`, i.e. `h_k^H` as stored.
    pub fn row(&self, k: usize) -> &[Complex] {
        let m = self.m_antennas as usize;
        &self.entries[k * m..(k + 1) * m]
    }

    pub fn entry(&self, k: usize, m: usize) -> Complex {
        self.entries[k * self.m_antennas as usize + m]
    }
}

/// Draws a `k_users x m_antennas` channel with i.i.d. CN(0, 1) entries
/// (real and imaginary parts each N(0, 1/2)).
///
/// Entries are filled row-major, real part before imaginary part; that order
/// is part of the reproducibility contract.
pub fn generate_channel(k_users: u32, m_antennas: u32, seed: &SeedSpec) -> Result<ChannelMatrix> {
    if k_users == 0 || m_antennas == 0 {
        return Err(Error::InvalidParameter(format!(
            "channel dimensions must be positive, got {k_users} x {m_antennas}"
        )));
    }
    let mut rng = seed.rng();
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let count = (k_users as usize) * (m_antennas as usize);
    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        entries.push(Complex::new(re * scale, im * scale));
    }
    Ok(ChannelMatrix { k_users, m_antennas, entries })
}

/// Draws `count` circularly-symmetric noise samples with per-part variance
/// `sigma^2`, i.e. `z ~ CN(0, 2 sigma^2)`. `sigma = 0` yields exact zeros.
pub fn sample_noise(sigma: f64, count: usize, seed: &SeedSpec) -> Result<Vec<Complex>> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "sigma must be finite and nonnegative, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(vec![Complex::new(0.0, 0.0); count]);
    }
    let mut rng = seed.rng();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        out.push(Complex::new(re * sigma, im * sigma));
    }
    Ok(out)
}

/// `(l1, l2)` norms of a channel vector.
pub fn channel_norms(h: &[Complex]) -> (f64, f64) {
    let l1 = h.iter().map(|x| x.abs()).sum::<f64>();
    let l2 = h.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    (l1, l2)
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
