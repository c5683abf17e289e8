//! Transmit-signal design.
//!
//! Closed-form infinite-resolution precoders (total-power and per-antenna),
//! multi-user zero forcing with a conditioning guard, the two-step greedy plus
//! exhaustive one-bit designs, and a brute-force oracle for small arrays.
//!
//! Conventions: a channel row stores `h^H`, so the noiseless receive value is
//! the plain dot product `sqrt(P/M) * sum_m row[m] * x[m]` without further
//! conjugation, and matched-filter directions are the elementwise conjugate of
//! the row. Every argmin breaks ties toward the smallest antenna index, then
//! the smallest index in the fixed [`QpskAlphabet`] order; exhaustive searches
//! return the lexicographically smallest minimizing word.

use crate::channel::ChannelMatrix;
use crate::constellation::QpskAlphabet;
use crate::{Complex, Error, Result};

/// Hard cap on exhaustively searched antennas (4^12 ~ 1.7e7 words).
pub const ORACLE_ANTENNA_CAP: u32 = 12;

/// Hard cap on the exhaustive completion size of the two-step designs.
pub const COMPLETION_CAP: u32 = 16;

/// Condition-number bound above which a user Gram matrix is rejected.
pub const ZF_CONDITION_CAP: f64 = 1e12;

// ---------------------------------------------------------------------------
// outcome types
// ---------------------------------------------------------------------------

/// A one-bit transmit word stored as indices into [`QpskAlphabet`].
///
/// The materialized word has `||x||_2^2 = M` by construction: every alphabet
/// point has unit modulus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneBitSignal {
    entries: Vec<u8>,
}

impl OneBitSignal {
    pub fn new(entries: Vec<u8>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParameter("one-bit word must be nonempty".into()));
        }
        if entries.iter().any(|&e| e >= QpskAlphabet::LEN as u8) {
            return Err(Error::InvalidParameter(
                "one-bit word entries must index the 4-point alphabet".into(),
            ));
        }
        Ok(OneBitSignal { entries })
    }

    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Alphabet indices mapped to their complex points.
    pub fn materialize(&self) -> Vec<Complex> {
        let alphabet = QpskAlphabet::points();
        self.entries.iter().map(|&e| alphabet[e as usize]).collect()
    }
}

/// Transmit word of a precoder: continuous amplitudes or a one-bit word.
#[derive(Clone, Debug, PartialEq)]
pub enum TransmitSignal {
    Continuous(Vec<Complex>),
    OneBit(OneBitSignal),
}

impl TransmitSignal {
    pub fn materialize(&self) -> Vec<Complex> {
        match self {
            TransmitSignal::Continuous(x) => x.clone(),
            TransmitSignal::OneBit(word) => word.materialize(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            TransmitSignal::Continuous(x) => x.len(),
            TransmitSignal::OneBit(word) => word.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Result of one precoding call.
#[derive(Clone, Debug)]
pub struct PrecodeOutcome {
    pub signal: TransmitSignal,
    /// Noiseless receive values `sqrt(P/M) h_k^H x` per user.
    pub noiseless_rx: Vec<Complex>,
    /// `max_k |rx_k - s_k|`.
    pub residual_inf: f64,
    /// `||rx - s||_2`.
    pub residual_l2: f64,
}

/// Transmit power accounting of the zero-forcing solution.
#[derive(Clone, Copy, Debug)]
pub struct PowerReport {
    /// `||x*||_2^2`; the per-symbol budget allows up to `M`.
    pub norm_sq: f64,
    /// True when the budget is exceeded.
    pub violates: bool,
}

/// Residual norm minimized by the exhaustive oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResidualNorm {
    L2,
    Inf,
}

// ---------------------------------------------------------------------------
// shared helpers
// ---------------------------------------------------------------------------

fn check_power(p: f64) -> Result<()> {
    if !p.is_finite() || p <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "power must be finite and positive, got {p}"
        )));
    }
    Ok(())
}

fn check_row(h: &[Complex]) -> Result<()> {
    if h.is_empty() || h.iter().all(|x| x.norm_sqr() == 0.0) {
        return Err(Error::DegenerateChannel(
            "channel row is empty or has zero energy".into(),
        ));
    }
    Ok(())
}

fn check_targets(s_vec: &[Complex]) -> Result<()> {
    if s_vec.iter().any(|s| !s.re.is_finite() || !s.im.is_finite()) {
        return Err(Error::InvalidInput("target symbols must be finite".into()));
    }
    Ok(())
}

fn residuals(rx: &[Complex], s_vec: &[Complex]) -> (f64, f64) {
    let mut inf = 0.0f64;
    let mut l2_sq = 0.0f64;
    for (r, s) in rx.iter().zip(s_vec) {
        let e = (r - s).norm_sqr();
        l2_sq += e;
        inf = inf.max(e);
    }
    (inf.sqrt(), l2_sq.sqrt())
}

fn single_outcome(h: &[Complex], s: Complex, p: f64, signal: TransmitSignal) -> PrecodeOutcome {
    let x = signal.materialize();
    let scale = (p / h.len() as f64).sqrt();
    let rx = scale * h.iter().zip(&x).map(|(hm, xm)| hm * xm).sum::<Complex>();
    let (residual_inf, residual_l2) = residuals(&[rx], &[s]);
    PrecodeOutcome { signal, noiseless_rx: vec![rx], residual_inf, residual_l2 }
}

fn multi_outcome(
    channel: &ChannelMatrix,
    s_vec: &[Complex],
    p: f64,
    signal: TransmitSignal,
) -> PrecodeOutcome {
    let x = signal.materialize();
    let rx = receive_raw(channel, &x, p);
    let (residual_inf, residual_l2) = residuals(&rx, s_vec);
    PrecodeOutcome { signal, noiseless_rx: rx, residual_inf, residual_l2 }
}

fn receive_raw(channel: &ChannelMatrix, x: &[Complex], p: f64) -> Vec<Complex> {
    let m = channel.m_antennas() as usize;
    let scale = (p / m as f64).sqrt();
    (0..channel.k_users() as usize)
        .map(|k| {
            let row = channel.row(k);
            scale * row.iter().zip(x).map(|(hm, xm)| hm * xm).sum::<Complex>()
        })
        .collect()
}

/// Noiseless receive values `sqrt(P/M) H x` for an arbitrary transmit word.
pub fn noiseless_receive(channel: &ChannelMatrix, x: &[Complex], p: f64) -> Result<Vec<Complex>> {
    check_power(p)?;
    if x.len() != channel.m_antennas() as usize {
        return Err(Error::DimensionMismatch(format!(
            "transmit word has {} entries for {} antennas",
            x.len(),
            channel.m_antennas()
        )));
    }
    Ok(receive_raw(channel, x, p))
}

// ---------------------------------------------------------------------------
// infinite-resolution single-user precoders
// ---------------------------------------------------------------------------

/// Matched-filter precoder under the total power budget `||x||_2^2 <= M`:
/// `x = sqrt(M) conj(h^H)/||h||_2 * min{1, |s|/(sqrt(P)||h||_2)} e^(i arg s)`.
///
/// Reconstructs `s` exactly while `|s| <= sqrt(P)||h||_2`; beyond that the
/// receive point saturates on the boundary circle and the residual is
/// `|s| - sqrt(P)||h||_2`.
pub fn precode_inf_total(h: &[Complex], s: Complex, p: f64) -> Result<PrecodeOutcome> {
    check_power(p)?;
    check_row(h)?;
    check_targets(&[s])?;
    let m = h.len() as f64;
    let l2 = h.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let reach = p.sqrt() * l2;
    let x = if s.norm() == 0.0 {
        vec![Complex::new(0.0, 0.0); h.len()]
    } else {
        let phase = s / s.norm();
        let amp = m.sqrt() / l2 * (s.norm() / reach).min(1.0);
        h.iter().map(|hm| hm.conj() * amp * phase).collect()
    };
    Ok(single_outcome(h, s, p, TransmitSignal::Continuous(x)))
}

/// Phase-aligned precoder under per-antenna budgets `|x_m| <= 1`:
/// `x_m = min{ sqrt(M/P) |s| / ||h||_1, 1 } e^(i (arg h_m + arg s))`.
///
/// Reconstructs `s` exactly while `|s| <= sqrt(P/M)||h||_1`. Antennas with a
/// zero channel entry transmit nothing; they contribute neither signal nor
/// `||h||_1` mass.
pub fn precode_inf_per_antenna(h: &[Complex], s: Complex, p: f64) -> Result<PrecodeOutcome> {
    check_power(p)?;
    check_row(h)?;
    check_targets(&[s])?;
    let m = h.len() as f64;
    let l1 = h.iter().map(|x| x.norm()).sum::<f64>();
    let x = if s.norm() == 0.0 {
        vec![Complex::new(0.0, 0.0); h.len()]
    } else {
        let phase = s / s.norm();
        let amp = ((m / p).sqrt() * s.norm() / l1).min(1.0);
        h.iter()
            .map(|hm| {
                if hm.norm_sqr() == 0.0 {
                    Complex::new(0.0, 0.0)
                } else {
                    // Stored entries are conjugated, so conj(hm)/|hm| carries
                    // the physical antenna phase e^(i arg h_m).
                    hm.conj() / hm.norm() * amp * phase
                }
            })
            .collect()
    };
    Ok(single_outcome(h, s, p, TransmitSignal::Continuous(x)))
}

// ---------------------------------------------------------------------------
// zero forcing
// ---------------------------------------------------------------------------

/// Zero-forcing precoder `x* = sqrt(M/P) H^H (H H^H)^(-1) s`.
///
/// The outcome reconstructs `s_vec` exactly up to arithmetic noise; the
/// [`PowerReport`] states `||x*||_2^2` and whether it exceeds the per-symbol
/// budget `M`. Rejects `K > M` and Gram matrices with 2-norm condition number
/// above [`ZF_CONDITION_CAP`].
pub fn precode_zf(
    channel: &ChannelMatrix,
    s_vec: &[Complex],
    p: f64,
) -> Result<(PrecodeOutcome, PowerReport)> {
    let x = zf_word(channel, s_vec, p)?;
    let norm_sq = x.iter().map(|v| v.norm_sqr()).sum::<f64>();
    let report = PowerReport { norm_sq, violates: norm_sq > channel.m_antennas() as f64 };
    let outcome = multi_outcome(channel, s_vec, p, TransmitSignal::Continuous(x));
    Ok((outcome, report))
}

/// One-bit baseline that sign-quantizes the zero-forcing word per antenna.
///
/// Known to exhibit an error floor; included for comparison plots only.
pub fn precode_quantized_zf(
    channel: &ChannelMatrix,
    s_vec: &[Complex],
    p: f64,
) -> Result<PrecodeOutcome> {
    let x = zf_word(channel, s_vec, p)?;
    let entries = x
        .iter()
        .map(|v| {
            // Quadrant signs map onto the fixed alphabet order; ties at zero
            // (including -0.0) go to the nonnegative half-plane.
            let re_neg = v.re < 0.0;
            let im_neg = v.im < 0.0;
            (re_neg as u8) * 2 + im_neg as u8
        })
        .collect();
    let word = OneBitSignal { entries };
    Ok(multi_outcome(channel, s_vec, p, TransmitSignal::OneBit(word)))
}

fn zf_word(channel: &ChannelMatrix, s_vec: &[Complex], p: f64) -> Result<Vec<Complex>> {
    check_power(p)?;
    check_targets(s_vec)?;
    let k = channel.k_users() as usize;
    let m = channel.m_antennas() as usize;
    if k > m {
        return Err(Error::Infeasible(format!(
            "zero forcing needs K <= M, got K = {k}, M = {m}"
        )));
    }
    if s_vec.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "expected {k} target symbols, got {}",
            s_vec.len()
        )));
    }

    // Gram matrix G = H H^H, Hermitian positive semidefinite.
    let mut gram = vec![Complex::new(0.0, 0.0); k * k];
    for a in 0..k {
        for b in 0..k {
            let mut acc = Complex::new(0.0, 0.0);
            let (ra, rb) = (channel.row(a), channel.row(b));
            for mi in 0..m {
                acc += ra[mi] * rb[mi].conj();
            }
            gram[a * k + b] = acc;
        }
    }
    let inverse = invert(&gram, k).ok_or_else(|| {
        Error::SingularChannel("user Gram matrix is singular".into())
    })?;
    let cond = spectral_norm(&gram, k) * spectral_norm(&inverse, k);
    if !cond.is_finite() || cond > ZF_CONDITION_CAP {
        return Err(Error::SingularChannel(format!(
            "user Gram matrix condition number {cond:.3e} exceeds {ZF_CONDITION_CAP:.0e}"
        )));
    }

    // a = G^(-1) s, then x = sqrt(M/P) H^H a.
    let a: Vec<Complex> = (0..k)
        .map(|row| (0..k).map(|col| inverse[row * k + col] * s_vec[col]).sum())
        .collect();
    let scale = (m as f64 / p).sqrt();
    let x: Vec<Complex> = (0..m)
        .map(|mi| {
            let mut acc = Complex::new(0.0, 0.0);
            for (ki, ak) in a.iter().enumerate() {
                acc += channel.row(ki)[mi].conj() * ak;
            }
            acc * scale
        })
        .collect();
    Ok(x)
}

/// Gauss-Jordan inverse with partial pivoting; None on a vanishing pivot.
fn invert(matrix: &[Complex], k: usize) -> Option<Vec<Complex>> {
    let mut work = matrix.to_vec();
    let mut inv = vec![Complex::new(0.0, 0.0); k * k];
    for d in 0..k {
        inv[d * k + d] = Complex::new(1.0, 0.0);
    }
    for col in 0..k {
        let pivot_row = (col..k)
            .max_by(|&a, &b| {
                work[a * k + col]
                    .norm_sqr()
                    .partial_cmp(&work[b * k + col].norm_sqr())
                    .unwrap()
            })
            .unwrap();
        if work[pivot_row * k + col].norm_sqr() == 0.0 {
            return None;
        }
        if pivot_row != col {
            for j in 0..k {
                work.swap(col * k + j, pivot_row * k + j);
                inv.swap(col * k + j, pivot_row * k + j);
            }
        }
        let pivot = work[col * k + col];
        for j in 0..k {
            work[col * k + j] /= pivot;
            inv[col * k + j] /= pivot;
        }
        for row in 0..k {
            if row == col {
                continue;
            }
            let factor = work[row * k + col];
            if factor.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..k {
                let w = work[col * k + j];
                let v = inv[col * k + j];
                work[row * k + j] -= factor * w;
                inv[row * k + j] -= factor * v;
            }
        }
    }
    Some(inv)
}

/// Largest eigenvalue magnitude of a Hermitian matrix by power iteration.
///
/// Deterministic fixed-count iteration from a fixed start vector; accurate to
/// far better than the orders of magnitude the conditioning guard needs.
fn spectral_norm(matrix: &[Complex], k: usize) -> f64 {
    let mut v: Vec<Complex> = (0..k)
        .map(|i| Complex::new(1.0 + 1e-3 * i as f64, 1e-4 * (i * i) as f64))
        .collect();
    let mut norm = 0.0;
    for _ in 0..100 {
        let next: Vec<Complex> = (0..k)
            .map(|row| (0..k).map(|col| matrix[row * k + col] * v[col]).sum())
            .collect();
        norm = next.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return norm;
        }
        v = next.iter().map(|x| x / norm).collect();
    }
    norm
}

// ---------------------------------------------------------------------------
// one-bit design (greedy step + exhaustive completion)
// ---------------------------------------------------------------------------

/// Single-user two-step one-bit design.
///
/// Greedily assigns `M - m2` antennas, each step choosing the (antenna,
/// symbol) pair that minimizes the residual `|s_r - sqrt(P/M) h_j^H x|`, then
/// exhaustively completes the remaining `m2` antennas. `m2 = M` is a pure
/// exhaustive search, `m2 = 0` pure greedy.
pub fn precode_one_bit_single(h: &[Complex], s: Complex, p: f64, m2: u32) -> Result<PrecodeOutcome> {
    check_power(p)?;
    check_row(h)?;
    check_targets(&[s])?;
    check_m2(m2, h.len())?;
    let scale = (p / h.len() as f64).sqrt();
    let columns: Vec<Complex> = h.iter().map(|hm| hm * scale).collect();
    let entries = design_word(&columns, 1, h.len(), &[s], m2 as usize, ResidualNorm::Inf);
    let word = OneBitSignal { entries };
    Ok(single_outcome(h, s, p, TransmitSignal::OneBit(word)))
}

/// Multi-user two-step one-bit design.
///
/// Step 1 greedily minimizes the l2 norm of the residual vector; step 2
/// exhaustively minimizes the sup norm over the `4^m2` completions. At
/// `K = 1` both norms collapse to the scalar modulus, so the output
/// coincides with [`precode_one_bit_single`].
pub fn precode_one_bit_multi(
    channel: &ChannelMatrix,
    s_vec: &[Complex],
    p: f64,
    m2: u32,
) -> Result<PrecodeOutcome> {
    check_power(p)?;
    check_targets(s_vec)?;
    let k = channel.k_users() as usize;
    let m = channel.m_antennas() as usize;
    if s_vec.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "expected {k} target symbols, got {}",
            s_vec.len()
        )));
    }
    if (0..k).all(|ki| channel.row(ki).iter().all(|x| x.norm_sqr() == 0.0)) {
        return Err(Error::DegenerateChannel("channel matrix has zero energy".into()));
    }
    check_m2(m2, m)?;
    let columns = scaled_columns(channel, p);
    let entries = design_word(&columns, k, m, s_vec, m2 as usize, ResidualNorm::Inf);
    let word = OneBitSignal { entries };
    Ok(multi_outcome(channel, s_vec, p, TransmitSignal::OneBit(word)))
}

/// Global minimizer of the chosen residual norm over all `4^M` one-bit words.
///
/// Ties resolve to the lexicographically smallest index sequence. Capped at
/// [`ORACLE_ANTENNA_CAP`] antennas.
pub fn oracle_exhaustive(
    channel: &ChannelMatrix,
    s_vec: &[Complex],
    p: f64,
    norm: ResidualNorm,
) -> Result<PrecodeOutcome> {
    check_power(p)?;
    check_targets(s_vec)?;
    let k = channel.k_users() as usize;
    let m = channel.m_antennas() as usize;
    if m as u32 > ORACLE_ANTENNA_CAP {
        return Err(Error::ComplexityCap(format!(
            "exhaustive search over {m} antennas exceeds the cap of {ORACLE_ANTENNA_CAP}"
        )));
    }
    if s_vec.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "expected {k} target symbols, got {}",
            s_vec.len()
        )));
    }
    let columns = scaled_columns(channel, p);
    let set: Vec<usize> = (0..m).collect();
    let mut entries = vec![0u8; m];
    complete_exhaustive(&columns, k, s_vec, &set, norm, &mut entries);
    let word = OneBitSignal { entries };
    Ok(multi_outcome(channel, s_vec, p, TransmitSignal::OneBit(word)))
}

/// All `4^M` inner products `h^H x`, in lexicographic word order.
///
/// This is the reach field of the one-bit array: the raw, unnormalized sums
/// whose extent the range rules bound. Capped at [`ORACLE_ANTENNA_CAP`].
pub fn enumerate_inner_products(h: &[Complex]) -> Result<Vec<Complex>> {
    check_row(h)?;
    let m = h.len();
    if m as u32 > ORACLE_ANTENNA_CAP {
        return Err(Error::ComplexityCap(format!(
            "enumerating 4^{m} words exceeds the cap of 4^{ORACLE_ANTENNA_CAP}"
        )));
    }
    let alphabet = QpskAlphabet::points();
    // Grow antenna by antenna: after processing j antennas the vector holds
    // all 4^j partial sums in lexicographic order (earlier antenna = more
    // significant digit), so each pass expands every prefix by 4 branches.
    let mut out = vec![Complex::new(0.0, 0.0)];
    for &hj in h {
        let branches = alphabet.map(|x| hj * x);
        let mut next = Vec::with_capacity(out.len() * 4);
        for &prefix in &out {
            for &b in &branches {
                next.push(prefix + b);
            }
        }
        out = next;
    }
    Ok(out)
}

fn check_m2(m2: u32, m: usize) -> Result<()> {
    if m2 > COMPLETION_CAP {
        return Err(Error::ComplexityCap(format!(
            "exhaustive completion over {m2} antennas exceeds the cap of {COMPLETION_CAP}"
        )));
    }
    if m2 as usize > m {
        return Err(Error::InvalidParameter(format!(
            "m2 = {m2} exceeds the antenna count {m}"
        )));
    }
    Ok(())
}

/// Column-major scaled channel: `columns[j*K + k] = sqrt(P/M) H[k][j]`.
fn scaled_columns(channel: &ChannelMatrix, p: f64) -> Vec<Complex> {
    let k = channel.k_users() as usize;
    let m = channel.m_antennas() as usize;
    let scale = (p / m as f64).sqrt();
    let mut columns = vec![Complex::new(0.0, 0.0); k * m];
    for ki in 0..k {
        let row = channel.row(ki);
        for (j, &hm) in row.iter().enumerate() {
            columns[j * k + ki] = hm * scale;
        }
    }
    columns
}

/// Two-step design over scaled columns; returns the chosen alphabet indices.
fn design_word(
    columns: &[Complex],
    k: usize,
    m: usize,
    s_vec: &[Complex],
    m2: usize,
    completion_norm: ResidualNorm,
) -> Vec<u8> {
    let alphabet = QpskAlphabet::points();
    let col_norm_sq: Vec<f64> = (0..m)
        .map(|j| columns[j * k..(j + 1) * k].iter().map(|w| w.norm_sqr()).sum())
        .collect();

    let mut entries = vec![0u8; m];
    let mut residual: Vec<Complex> = s_vec.to_vec();
    let mut remaining: Vec<usize> = (0..m).collect();

    // Step 1: greedy assignment of M - m2 antennas. The candidate value
    // ||s_r - w_j x||^2 expands to ||s_r||^2 + ||w_j||^2 - 2 Re(x u_j) with
    // u_j = sum_k conj(s_r[k]) w_j[k]; the common ||s_r||^2 term is dropped
    // from the comparison key. Scan order (ascending antenna, then alphabet)
    // plus strict improvement realizes the smallest-index tie-break.
    for _ in 0..m - m2 {
        let mut best_key = f64::INFINITY;
        let mut best_pos = 0usize;
        let mut best_a = 0usize;
        for (pos, &j) in remaining.iter().enumerate() {
            let col = &columns[j * k..(j + 1) * k];
            let mut u = Complex::new(0.0, 0.0);
            for (sr, w) in residual.iter().zip(col) {
                u += sr.conj() * w;
            }
            for (a, x) in alphabet.iter().enumerate() {
                let key = col_norm_sq[j] - 2.0 * (x * u).re;
                if key < best_key {
                    best_key = key;
                    best_pos = pos;
                    best_a = a;
                }
            }
        }
        let j = remaining.remove(best_pos);
        entries[j] = best_a as u8;
        let x = alphabet[best_a];
        for (sr, w) in residual.iter_mut().zip(&columns[j * k..(j + 1) * k]) {
            *sr -= w * x;
        }
    }

    // Step 2: exhaustive completion over the untouched antennas.
    if m2 > 0 {
        complete_exhaustive(columns, k, &residual, &remaining, completion_norm, &mut entries);
    }
    entries
}

/// Depth-first scan of all `4^|set|` completions against `targets`,
/// reusing partial sums; writes the winning indices into `entries[set]`.
///
/// Enumeration order is lexicographic over (ascending antenna in `set`,
/// alphabet index) and improvement is strict, so the first minimizer in
/// lexicographic order is kept.
fn complete_exhaustive(
    columns: &[Complex],
    k: usize,
    targets: &[Complex],
    set: &[usize],
    norm: ResidualNorm,
    entries: &mut [u8],
) {
    let depth_count = set.len();
    if depth_count == 0 {
        return;
    }
    let alphabet = QpskAlphabet::points();
    // partial[d] holds the residual vector after assigning set[0..d].
    let mut partial = vec![Complex::new(0.0, 0.0); (depth_count + 1) * k];
    partial[..k].copy_from_slice(targets);
    let mut choice = vec![0u8; depth_count];
    let mut best_choice = vec![0u8; depth_count];
    let mut best_metric = f64::INFINITY;

    fn descend(
        columns: &[Complex],
        k: usize,
        set: &[usize],
        alphabet: &[Complex; 4],
        partial: &mut [Complex],
        choice: &mut [u8],
        best_choice: &mut [u8],
        best_metric: &mut f64,
        norm: ResidualNorm,
        depth: usize,
    ) {
        if depth == set.len() {
            let leaf = &partial[depth * k..(depth + 1) * k];
            let metric = match norm {
                ResidualNorm::L2 => leaf.iter().map(|v| v.norm_sqr()).sum::<f64>(),
                ResidualNorm::Inf => leaf.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max),
            };
            if metric < *best_metric {
                *best_metric = metric;
                best_choice.copy_from_slice(choice);
            }
            return;
        }
        let j = set[depth];
        let col = &columns[j * k..(j + 1) * k];
        for (a, x) in alphabet.iter().enumerate() {
            for ki in 0..k {
                let prev = partial[depth * k + ki];
                partial[(depth + 1) * k + ki] = prev - col[ki] * x;
            }
            choice[depth] = a as u8;
            descend(
                columns, k, set, alphabet, partial, choice, best_choice, best_metric, norm,
                depth + 1,
            );
        }
    }

    descend(
        columns,
        k,
        set,
        &alphabet,
        &mut partial,
        &mut choice,
        &mut best_choice,
        &mut best_metric,
        norm,
        0,
    );
    for (&slot, &a) in set.iter().zip(&best_choice) {
        entries[slot] = a;
    }
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
