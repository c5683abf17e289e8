//! Monte Carlo experiment runners.
//!
//! Every runner consumes a validated [`ExperimentConfig`] and produces a
//! [`ResultTable`]. Results are bit-reproducible: each trial derives all of
//! its randomness from `master_seed` through labeled, index-keyed substreams
//! (`channel`, `symbols`, `noise`), so the outcome is a pure function of the
//! config — independent of thread count and of which other sweep points run.
//!
//! Two variance-reduction choices follow from that keying and are part of the
//! output contract:
//!
//! * channels and intended symbols do not depend on the sweep point, so SER
//!   sweeps precode once per trial and reuse the noiseless receive values at
//!   every SNR point (common random numbers across points), and
//! * noise is drawn once per (antenna count, point, trial) and shared by all
//!   schemes, so scheme-vs-scheme gaps are measured on identical noise.
//!
//! Zero-forcing is the one scheme whose transmit vector can exceed the total
//! power budget; runners rescale offending vectors onto the power sphere
//! (pure-library calls report the violation instead) and report the fraction
//! of affected slots in the `violation_rate` column.

pub mod config;
pub mod table;

pub use config::{parse_config, ExperimentConfig, ExperimentKind, SchemeSpec};
pub use table::{Cell, OutputFormat, ResultTable};

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{channel_norms, generate_channel, sample_noise, ChannelMatrix, SeedSpec};
use crate::constellation::build_qam;
use crate::metrics::analytic_ser;
use crate::precoding::{
    enumerate_inner_products, oracle_exhaustive, precode_inf_per_antenna, precode_inf_total,
    precode_one_bit_multi, precode_one_bit_single, precode_quantized_zf, precode_zf,
    PrecodeOutcome, ResidualNorm,
};
use crate::range_design::{
    one_bit_shrink, range_inf_per_antenna, range_inf_total, range_zf_multi_with_headroom,
};
use crate::{Complex, Error, Result};

/// Per-dimension noise standard deviation at a given SNR,
/// `sigma = sqrt(P / (2 * 10^(snr/10)))`.
pub fn sigma_from_snr_db(p: f64, snr_db: f64) -> f64 {
    (p / (2.0 * 10f64.powf(snr_db / 10.0))).sqrt()
}

/// Runs the experiment a config describes.
pub fn run(config: &ExperimentConfig) -> Result<ResultTable> {
    match config.kind {
        ExperimentKind::MseSweep => run_mse_sweep(config),
        ExperimentKind::SerVsSnr => run_ser_vs_snr(config),
        ExperimentKind::SerVsAntennas => run_ser_vs_antennas(config),
        ExperimentKind::PrecodeOnce => precode_once(config),
    }
}

fn expect_kind(config: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if config.kind != kind {
        return Err(Error::Config(format!(
            "config describes {} but the {kind} runner was invoked",
            config.kind
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// shared plumbing
// ---------------------------------------------------------------------------

/// Reference range that a scheme's constellation is scaled against.
///
/// Single-user schemes adapt to the drawn channel: the total-power boundary
/// `sqrt(2P) ||h||_2` for every scheme except the per-antenna transmitter,
/// which uses its own boundary `sqrt(2P/M) ||h||_1`. Multi-user schemes share
/// the hardened zero-forcing range `sqrt(2PM / f(K, N, kappa))`.
fn base_reference_range(
    spec: &SchemeSpec,
    p: f64,
    k_users: u32,
    m_antennas: u32,
    n_side: u32,
    kappa: f64,
    row: &[Complex],
) -> Result<f64> {
    if k_users == 1 {
        match spec {
            SchemeSpec::InfPerAntenna => range_inf_per_antenna(p, row, false),
            _ => range_inf_total(p, row, false),
        }
    } else {
        range_zf_multi_with_headroom(p, m_antennas, k_users, n_side, kappa)
    }
}

/// Noiseless receive values for one precoded symbol vector, with the power
/// constraint enforced: an over-budget zero-forcing vector is rescaled onto
/// the power sphere (shrinking the receive values by the same factor). The
/// flag reports whether that happened.
fn scheme_rx(
    spec: &SchemeSpec,
    channel: &ChannelMatrix,
    s: &[Complex],
    p: f64,
) -> Result<(Vec<Complex>, bool)> {
    match spec {
        SchemeSpec::InfTotal => {
            Ok((precode_inf_total(channel.row(0), s[0], p)?.noiseless_rx, false))
        }
        SchemeSpec::InfPerAntenna => {
            Ok((precode_inf_per_antenna(channel.row(0), s[0], p)?.noiseless_rx, false))
        }
        SchemeSpec::ZfInfinite => {
            let (outcome, report) = precode_zf(channel, s, p)?;
            let mut rx = outcome.noiseless_rx;
            if report.violates {
                let shrink = (channel.m_antennas() as f64 / report.norm_sq).sqrt();
                for r in &mut rx {
                    *r *= shrink;
                }
            }
            Ok((rx, report.violates))
        }
        SchemeSpec::OneBit { m2, .. } => {
            let outcome = if channel.k_users() == 1 {
                precode_one_bit_single(channel.row(0), s[0], p, *m2)?
            } else {
                precode_one_bit_multi(channel, s, p, *m2)?
            };
            Ok((outcome.noiseless_rx, false))
        }
        SchemeSpec::QuantizedZf => {
            Ok((precode_quantized_zf(channel, s, p)?.noiseless_rx, false))
        }
        SchemeSpec::OracleExhaustive => {
            let norm =
                if channel.k_users() == 1 { ResidualNorm::L2 } else { ResidualNorm::Inf };
            Ok((oracle_exhaustive(channel, s, p, norm)?.noiseless_rx, false))
        }
    }
}

/// Uniform symbol indices, one per (slot, user), drawn from the trial's
/// symbol stream. Independent of the sweep point by construction.
fn draw_indices(
    config: &ExperimentConfig,
    m_antennas: u32,
    trial: u64,
    seed: &SeedSpec,
) -> Vec<usize> {
    let n_points = (config.n_side * config.n_side) as usize;
    let count = config.symbols_per_channel as usize * config.k_users as usize;
    let mut rng = seed.stream("symbols", &[m_antennas as u64, trial]).rng();
    (0..count).map(|_| rng.random_range(0..n_points)).collect()
}

fn mean_and_stderr(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Some((var / n).sqrt()))
}

fn stderr_cell(stderr: Option<f64>) -> Cell {
    match stderr {
        Some(v) => Cell::Float(v),
        None => Cell::Empty,
    }
}

fn apply_metadata(table: &mut ResultTable, config: &ExperimentConfig) {
    for (key, value) in config.echo() {
        table.insert_metadata(key, value);
    }
    table.insert_metadata("artifact_version", env!("CARGO_PKG_VERSION"));
}

/// Closed-form SER overlay for schemes whose designed range has one: the
/// infinite-resolution/zero-forcing family at the hardened range and the
/// one-bit transmitter at its default `sqrt(2/pi)` shrink. Schemes running
/// at a custom range have no overlay.
fn analytic_overlay_cell(
    spec: &SchemeSpec,
    p: f64,
    m_antennas: u32,
    k_users: u32,
    n_side: u32,
    kappa: f64,
    sigma: f64,
) -> Cell {
    let scale = match spec {
        SchemeSpec::InfTotal | SchemeSpec::ZfInfinite => 1.0,
        SchemeSpec::OneBit { range_scale: None, .. } => one_bit_shrink(),
        _ => return Cell::Empty,
    };
    let c_ref = if k_users == 1 {
        (2.0 * p * m_antennas as f64).sqrt()
    } else {
        match range_zf_multi_with_headroom(p, m_antennas, k_users, n_side, kappa) {
            Ok(c) => c,
            Err(_) => return Cell::Empty,
        }
    };
    let d = scale * c_ref / (n_side as f64 - 1.0);
    match analytic_ser(n_side, d, sigma) {
        Ok(v) => Cell::Float(v),
        Err(_) => Cell::Empty,
    }
}

// ---------------------------------------------------------------------------
// MSE sweep
// ---------------------------------------------------------------------------

/// Per-trial mean squared reconstruction error, flattened as
/// `[lambda_index * n_schemes + scheme_index]`.
fn mse_trial(config: &ExperimentConfig, m_antennas: u32, trial: u64) -> Result<Vec<f64>> {
    let seed = SeedSpec::new(config.master_seed);
    let k = config.k_users as usize;
    let slots = config.symbols_per_channel as usize;
    let channel =
        generate_channel(config.k_users, m_antennas, &seed.stream("channel", &[m_antennas as u64, trial]))?;
    let indices = draw_indices(config, m_antennas, trial, &seed);

    let n_schemes = config.schemes.len();
    let mut out = vec![0.0; config.lambda.len() * n_schemes];
    for (li, &lambda) in config.lambda.iter().enumerate() {
        for (si, spec) in config.schemes.iter().enumerate() {
            let c_ref = base_reference_range(
                spec,
                config.power,
                config.k_users,
                m_antennas,
                config.n_side,
                config.kappa,
                channel.row(0),
            )?;
            let alphabet = build_qam(config.n_side, lambda * c_ref)?;
            let points = alphabet.points();
            let mse = if k == 1 {
                // Only N^2 distinct targets exist: precode each once.
                let mut rx_by_index = Vec::with_capacity(points.len());
                for &s in points {
                    let (rx, _) = scheme_rx(spec, &channel, std::slice::from_ref(&s), config.power)?;
                    rx_by_index.push(rx[0]);
                }
                indices
                    .iter()
                    .map(|&i| (rx_by_index[i] - points[i]).norm_sqr())
                    .sum::<f64>()
                    / slots as f64
            } else {
                let mut acc = 0.0;
                for slot in 0..slots {
                    let s: Vec<Complex> =
                        (0..k).map(|u| points[indices[slot * k + u]]).collect();
                    let (rx, _) = scheme_rx(spec, &channel, &s, config.power)?;
                    acc += rx
                        .iter()
                        .zip(&s)
                        .map(|(r, t)| (r - t).norm_sqr())
                        .sum::<f64>()
                        / k as f64;
                }
                acc / slots as f64
            };
            out[li * n_schemes + si] = mse;
        }
    }
    Ok(out)
}

/// Sweeps the constellation range multiplier `lambda` and reports the
/// per-user mean squared error of noiseless precoded reception.
///
/// Columns: `lambda, scheme, mse_mean, mse_stderr, trials`.
pub fn run_mse_sweep(config: &ExperimentConfig) -> Result<ResultTable> {
    expect_kind(config, ExperimentKind::MseSweep)?;
    let m_antennas = config.m_antennas[0];
    let per_trial: Vec<Vec<f64>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| mse_trial(config, m_antennas, trial))
        .collect::<Result<_>>()?;

    let mut table = ResultTable::new(vec!["lambda", "scheme", "mse_mean", "mse_stderr", "trials"]);
    apply_metadata(&mut table, config);
    let n_schemes = config.schemes.len();
    for (li, &lambda) in config.lambda.iter().enumerate() {
        for (si, spec) in config.schemes.iter().enumerate() {
            let values: Vec<f64> =
                per_trial.iter().map(|trial| trial[li * n_schemes + si]).collect();
            let (mean, stderr) = mean_and_stderr(&values);
            table.push_row(vec![
                Cell::Float(lambda),
                Cell::Text(spec.label()),
                Cell::Float(mean),
                stderr_cell(stderr),
                Cell::Int(config.trials),
            ]);
        }
    }
    Ok(table)
}

// ---------------------------------------------------------------------------
// SER sweeps
// ---------------------------------------------------------------------------

/// One trial of a SER experiment at a fixed antenna count.
///
/// Returns per-point-per-scheme error rates flattened as
/// `[point_index * n_schemes + scheme_index]`, plus each scheme's fraction of
/// slots whose transmit vector needed a power rescale.
fn ser_trial(
    config: &ExperimentConfig,
    m_antennas: u32,
    trial: u64,
    sigmas: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let seed = SeedSpec::new(config.master_seed);
    let k = config.k_users as usize;
    let slots = config.symbols_per_channel as usize;
    let channel =
        generate_channel(config.k_users, m_antennas, &seed.stream("channel", &[m_antennas as u64, trial]))?;
    let indices = draw_indices(config, m_antennas, trial, &seed);

    // Precode once per scheme; every SNR point reuses these receive values.
    struct SchemeData {
        alphabet: crate::constellation::QamConstellation,
        /// K = 1: one receive value per constellation index.
        /// K > 1: one receive value per (slot, user).
        rx: Vec<Complex>,
        /// K = 1: per constellation index. K > 1: per slot.
        rescaled: Vec<bool>,
    }
    let mut data = Vec::with_capacity(config.schemes.len());
    for spec in &config.schemes {
        let c_ref = base_reference_range(
            spec,
            config.power,
            config.k_users,
            m_antennas,
            config.n_side,
            config.kappa,
            channel.row(0),
        )?;
        let alphabet = build_qam(config.n_side, spec.ser_range_scale() * c_ref)?;
        let points = alphabet.points().to_vec();
        let (rx, rescaled) = if k == 1 {
            let mut rx = Vec::with_capacity(points.len());
            let mut rescaled = Vec::with_capacity(points.len());
            for &s in &points {
                let (r, v) = scheme_rx(spec, &channel, std::slice::from_ref(&s), config.power)?;
                rx.push(r[0]);
                rescaled.push(v);
            }
            (rx, rescaled)
        } else {
            let mut rx = Vec::with_capacity(slots * k);
            let mut rescaled = Vec::with_capacity(slots);
            for slot in 0..slots {
                let s: Vec<Complex> = (0..k).map(|u| points[indices[slot * k + u]]).collect();
                let (r, v) = scheme_rx(spec, &channel, &s, config.power)?;
                rx.extend_from_slice(&r);
                rescaled.push(v);
            }
            (rx, rescaled)
        };
        data.push(SchemeData { alphabet, rx, rescaled });
    }

    let mut ser = vec![0.0; sigmas.len() * config.schemes.len()];
    for (pi, &sigma) in sigmas.iter().enumerate() {
        // One noise draw per point, shared by every scheme.
        let noise = sample_noise(
            sigma,
            slots * k,
            &seed.stream("noise", &[m_antennas as u64, pi as u64, trial]),
        )?;
        for (si, scheme_data) in data.iter().enumerate() {
            let mut errors = 0u64;
            for slot in 0..slots {
                for user in 0..k {
                    let idx = indices[slot * k + user];
                    let rx = if k == 1 {
                        scheme_data.rx[idx]
                    } else {
                        scheme_data.rx[slot * k + user]
                    };
                    if scheme_data.alphabet.quantize(rx + noise[slot * k + user])? != idx {
                        errors += 1;
                    }
                }
            }
            ser[pi * config.schemes.len() + si] = errors as f64 / (slots * k) as f64;
        }
    }

    let violation: Vec<f64> = data
        .iter()
        .map(|scheme_data| {
            let hits = if k == 1 {
                (0..slots).filter(|&slot| scheme_data.rescaled[indices[slot]]).count()
            } else {
                scheme_data.rescaled.iter().filter(|&&v| v).count()
            };
            hits as f64 / slots as f64
        })
        .collect();
    Ok((ser, violation))
}

fn ser_columns(sweep_column: &str) -> Vec<String> {
    vec![
        sweep_column.to_string(),
        "scheme".to_string(),
        "ser_mean".to_string(),
        "ser_stderr".to_string(),
        "analytic_ser".to_string(),
        "violation_rate".to_string(),
        "trials".to_string(),
    ]
}

/// Sweeps SNR at a fixed antenna count and reports per-scheme symbol error
/// rates with analytic overlays.
///
/// Columns: `snr_db, scheme, ser_mean, ser_stderr, analytic_ser,
/// violation_rate, trials`.
pub fn run_ser_vs_snr(config: &ExperimentConfig) -> Result<ResultTable> {
    expect_kind(config, ExperimentKind::SerVsSnr)?;
    let m_antennas = config.m_antennas[0];
    let sigmas: Vec<f64> =
        config.snr_db.iter().map(|&snr| sigma_from_snr_db(config.power, snr)).collect();
    let per_trial: Vec<(Vec<f64>, Vec<f64>)> = (0..config.trials)
        .into_par_iter()
        .map(|trial| ser_trial(config, m_antennas, trial, &sigmas))
        .collect::<Result<_>>()?;

    let mut table = ResultTable::new(ser_columns("snr_db"));
    apply_metadata(&mut table, config);
    let n_schemes = config.schemes.len();
    for (pi, (&snr, &sigma)) in config.snr_db.iter().zip(&sigmas).enumerate() {
        for (si, spec) in config.schemes.iter().enumerate() {
            let values: Vec<f64> =
                per_trial.iter().map(|(ser, _)| ser[pi * n_schemes + si]).collect();
            let (mean, stderr) = mean_and_stderr(&values);
            let violation =
                per_trial.iter().map(|(_, v)| v[si]).sum::<f64>() / config.trials as f64;
            table.push_row(vec![
                Cell::Float(snr),
                Cell::Text(spec.label()),
                Cell::Float(mean),
                stderr_cell(stderr),
                analytic_overlay_cell(
                    spec,
                    config.power,
                    m_antennas,
                    config.k_users,
                    config.n_side,
                    config.kappa,
                    sigma,
                ),
                Cell::Float(violation),
                Cell::Int(config.trials),
            ]);
        }
    }
    Ok(table)
}

/// Sweeps the antenna count at a fixed SNR and reports per-scheme symbol
/// error rates with analytic overlays.
///
/// Columns: `m_antennas, scheme, ser_mean, ser_stderr, analytic_ser,
/// violation_rate, trials`.
pub fn run_ser_vs_antennas(config: &ExperimentConfig) -> Result<ResultTable> {
    expect_kind(config, ExperimentKind::SerVsAntennas)?;
    let sigma = sigma_from_snr_db(config.power, config.snr_db[0]);
    let sigmas = [sigma];
    let trials = config.trials;
    let jobs: Vec<(u32, u64)> = config
        .m_antennas
        .iter()
        .flat_map(|&m| (0..trials).map(move |t| (m, t)))
        .collect();
    let per_job: Vec<(Vec<f64>, Vec<f64>)> = jobs
        .into_par_iter()
        .map(|(m, trial)| ser_trial(config, m, trial, &sigmas))
        .collect::<Result<_>>()?;

    let mut table = ResultTable::new(ser_columns("m_antennas"));
    apply_metadata(&mut table, config);
    for (mi, &m_antennas) in config.m_antennas.iter().enumerate() {
        let base = mi * trials as usize;
        for (si, spec) in config.schemes.iter().enumerate() {
            let values: Vec<f64> =
                (0..trials as usize).map(|t| per_job[base + t].0[si]).collect();
            let (mean, stderr) = mean_and_stderr(&values);
            let violation =
                (0..trials as usize).map(|t| per_job[base + t].1[si]).sum::<f64>() / trials as f64;
            table.push_row(vec![
                Cell::Int(m_antennas as u64),
                Cell::Text(spec.label()),
                Cell::Float(mean),
                stderr_cell(stderr),
                analytic_overlay_cell(
                    spec,
                    config.power,
                    m_antennas,
                    config.k_users,
                    config.n_side,
                    config.kappa,
                    sigma,
                ),
                Cell::Float(violation),
                Cell::Int(trials),
            ]);
        }
    }
    Ok(table)
}

// ---------------------------------------------------------------------------
// single-shot diagnostics
// ---------------------------------------------------------------------------

/// Library outcome for one scheme on one channel, without any sim-level
/// power rescue, plus the transmit vector's squared norm.
fn raw_outcome(
    spec: &SchemeSpec,
    channel: &ChannelMatrix,
    targets: &[Complex],
    p: f64,
) -> Result<(PrecodeOutcome, f64)> {
    if let SchemeSpec::ZfInfinite = spec {
        let (outcome, report) = precode_zf(channel, targets, p)?;
        return Ok((outcome, report.norm_sq));
    }
    let outcome = match spec {
        SchemeSpec::InfTotal => precode_inf_total(channel.row(0), targets[0], p)?,
        SchemeSpec::InfPerAntenna => precode_inf_per_antenna(channel.row(0), targets[0], p)?,
        SchemeSpec::OneBit { m2, .. } => {
            if channel.k_users() == 1 {
                precode_one_bit_single(channel.row(0), targets[0], p, *m2)?
            } else {
                precode_one_bit_multi(channel, targets, p, *m2)?
            }
        }
        SchemeSpec::QuantizedZf => precode_quantized_zf(channel, targets, p)?,
        SchemeSpec::OracleExhaustive => {
            let norm =
                if channel.k_users() == 1 { ResidualNorm::L2 } else { ResidualNorm::Inf };
            oracle_exhaustive(channel, targets, p, norm)?
        }
        SchemeSpec::ZfInfinite => unreachable!("handled above"),
    };
    let norm_sq = outcome.signal.materialize().iter().map(|x| x.norm_sqr()).sum();
    Ok((outcome, norm_sq))
}

/// One-shot diagnostic on a single channel draw.
///
/// Scatter mode enumerates every one-bit word's raw beamforming sum
/// `h^H x` (columns `word_index, re, im`; the designed range radii and
/// channel norms land in the metadata). Otherwise each configured scheme
/// precodes the configured targets once and the table echoes the outcome
/// (columns `scheme, user, target_re, target_im, rx_re, rx_im, residual_inf,
/// residual_l2, power_norm_sq`).
pub fn precode_once(config: &ExperimentConfig) -> Result<ResultTable> {
    expect_kind(config, ExperimentKind::PrecodeOnce)?;
    let m_antennas = config.m_antennas[0];
    let seed = SeedSpec::new(config.master_seed);
    let channel = generate_channel(
        config.k_users,
        m_antennas,
        &seed.stream("channel", &[m_antennas as u64, 0]),
    )?;

    if config.scatter {
        let row = channel.row(0);
        let sums = enumerate_inner_products(row)?;
        let (l1, l2) = channel_norms(row);
        let radius = range_inf_total(config.power, row, false)?;
        let mut table = ResultTable::new(vec!["word_index", "re", "im"]);
        apply_metadata(&mut table, config);
        table.insert_metadata("radius_inf_total", format!("{radius:e}"));
        table.insert_metadata("radius_one_bit", format!("{:e}", one_bit_shrink() * radius));
        table.insert_metadata("channel_l1", format!("{l1:e}"));
        table.insert_metadata("channel_l2", format!("{l2:e}"));
        for (index, sum) in sums.iter().enumerate() {
            table.push_row(vec![
                Cell::Int(index as u64),
                Cell::Float(sum.re),
                Cell::Float(sum.im),
            ]);
        }
        return Ok(table);
    }

    let mut table = ResultTable::new(vec![
        "scheme",
        "user",
        "target_re",
        "target_im",
        "rx_re",
        "rx_im",
        "residual_inf",
        "residual_l2",
        "power_norm_sq",
    ]);
    apply_metadata(&mut table, config);
    for spec in &config.schemes {
        let (outcome, norm_sq) = raw_outcome(spec, &channel, &config.targets, config.power)?;
        for (user, (target, rx)) in
            config.targets.iter().zip(&outcome.noiseless_rx).enumerate()
        {
            table.push_row(vec![
                Cell::Text(spec.label()),
                Cell::Int(user as u64),
                Cell::Float(target.re),
                Cell::Float(target.im),
                Cell::Float(rx.re),
                Cell::Float(rx.im),
                Cell::Float(outcome.residual_inf),
                Cell::Float(outcome.residual_l2),
                Cell::Float(norm_sq),
            ]);
        }
    }
    Ok(table)
}
