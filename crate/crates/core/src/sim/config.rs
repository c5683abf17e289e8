//! Experiment configuration: flat `key = value` files, strict validation.
//!
//! Unknown keys, duplicate keys, keys that the chosen experiment does not
//! consume, unsorted sweep grids, and scheme/user-count mismatches are all
//! hard errors: a config that parses is a config that runs.

use std::collections::BTreeMap;
use std::fmt;

use crate::precoding::{COMPLETION_CAP, ORACLE_ANTENNA_CAP};
use crate::range_design::one_bit_shrink;
use crate::{Complex, Error, Result};

/// Which experiment a config drives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    MseSweep,
    SerVsSnr,
    SerVsAntennas,
    PrecodeOnce,
}

impl ExperimentKind {
    pub fn label(self) -> &'static str {
        match self {
            ExperimentKind::MseSweep => "mse_sweep",
            ExperimentKind::SerVsSnr => "ser_vs_snr",
            ExperimentKind::SerVsAntennas => "ser_vs_antennas",
            ExperimentKind::PrecodeOnce => "precode_once",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "mse_sweep" => Ok(ExperimentKind::MseSweep),
            "ser_vs_snr" => Ok(ExperimentKind::SerVsSnr),
            "ser_vs_antennas" => Ok(ExperimentKind::SerVsAntennas),
            "precode_once" => Ok(ExperimentKind::PrecodeOnce),
            other => Err(Error::Config(format!("unknown experiment kind {other:?}"))),
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One precoding scheme to simulate.
///
/// `OneBit`'s optional `range_scale` replaces the default `sqrt(2/pi)`
/// multiplier on the reference range in SER experiments (`one_bit(8;1.0)`
/// runs the one-bit design at the full infinite-resolution range). MSE sweeps
/// ignore the scale: there the swept lambda is the only range multiplier.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SchemeSpec {
    InfTotal,
    InfPerAntenna,
    ZfInfinite,
    OneBit { m2: u32, range_scale: Option<f64> },
    QuantizedZf,
    OracleExhaustive,
}

impl SchemeSpec {
    fn parse(token: &str) -> Result<Self> {
        match token {
            "inf_total" => return Ok(SchemeSpec::InfTotal),
            "inf_per_antenna" => return Ok(SchemeSpec::InfPerAntenna),
            "zf_infinite" => return Ok(SchemeSpec::ZfInfinite),
            "quantized_zf" => return Ok(SchemeSpec::QuantizedZf),
            "oracle_exhaustive" => return Ok(SchemeSpec::OracleExhaustive),
            _ => {}
        }
        let args = token
            .strip_prefix("one_bit(")
            .and_then(|rest| rest.strip_suffix(')'))
            .ok_or_else(|| Error::Config(format!("unknown scheme {token:?}")))?;
        let mut parts = args.split(';');
        let m2: u32 = parts
            .next()
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad m2 in scheme {token:?}")))?;
        let range_scale = match parts.next() {
            None => None,
            Some(raw) => {
                let scale: f64 = raw
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad range scale in scheme {token:?}")))?;
                if !scale.is_finite() || scale <= 0.0 {
                    return Err(Error::Config(format!(
                        "range scale in scheme {token:?} must be finite and positive"
                    )));
                }
                Some(scale)
            }
        };
        if parts.next().is_some() {
            return Err(Error::Config(format!("too many arguments in scheme {token:?}")));
        }
        Ok(SchemeSpec::OneBit { m2, range_scale })
    }

    /// Canonical label used in config echoes and the CSV `scheme` column.
    /// Contains no commas, so CSV rows never need quoting.
    pub fn label(&self) -> String {
        match self {
            SchemeSpec::InfTotal => "inf_total".into(),
            SchemeSpec::InfPerAntenna => "inf_per_antenna".into(),
            SchemeSpec::ZfInfinite => "zf_infinite".into(),
            SchemeSpec::OneBit { m2, range_scale: None } => format!("one_bit({m2})"),
            SchemeSpec::OneBit { m2, range_scale: Some(s) } => format!("one_bit({m2};{s})"),
            SchemeSpec::QuantizedZf => "quantized_zf".into(),
            SchemeSpec::OracleExhaustive => "oracle_exhaustive".into(),
        }
    }

    /// Multiplier on the scheme's reference range in SER experiments.
    pub fn ser_range_scale(&self) -> f64 {
        match self {
            SchemeSpec::OneBit { range_scale, .. } => range_scale.unwrap_or_else(one_bit_shrink),
            SchemeSpec::OracleExhaustive => one_bit_shrink(),
            _ => 1.0,
        }
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Fully validated experiment description.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub k_users: u32,
    /// Singleton except for the antenna sweep.
    pub m_antennas: Vec<u32>,
    pub n_side: u32,
    pub power: f64,
    /// Sweep grid for `ser_vs_snr`; singleton operating point for
    /// `ser_vs_antennas`.
    pub snr_db: Vec<f64>,
    /// Sweep grid for `mse_sweep`.
    pub lambda: Vec<f64>,
    pub schemes: Vec<SchemeSpec>,
    pub trials: u64,
    pub symbols_per_channel: u64,
    pub master_seed: u64,
    /// Headroom multiplier in the multi-user load factor.
    pub kappa: f64,
    /// `precode_once` only: emit all 4^M noiseless points instead of running
    /// the configured schemes.
    pub scatter: bool,
    /// `precode_once` only: intended symbols, one per user.
    pub targets: Vec<Complex>,
}

impl ExperimentConfig {
    /// Canonical key=value echo for result metadata.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        map.insert("experiment".into(), self.kind.label().into());
        map.insert("k_users".into(), self.k_users.to_string());
        map.insert("m_antennas".into(), join_display(&self.m_antennas));
        map.insert("n_side".into(), self.n_side.to_string());
        map.insert("power".into(), format!("{:e}", self.power));
        map.insert("trials".into(), self.trials.to_string());
        map.insert("symbols_per_channel".into(), self.symbols_per_channel.to_string());
        map.insert("master_seed".into(), self.master_seed.to_string());
        map.insert("kappa".into(), format!("{:e}", self.kappa));
        if !self.snr_db.is_empty() {
            map.insert("snr_db".into(), join_exp(&self.snr_db));
        }
        if !self.lambda.is_empty() {
            map.insert("lambda".into(), join_exp(&self.lambda));
        }
        if !self.schemes.is_empty() {
            let labels: Vec<String> = self.schemes.iter().map(SchemeSpec::label).collect();
            map.insert("schemes".into(), labels.join(" "));
        }
        if self.kind == ExperimentKind::PrecodeOnce {
            map.insert("scatter".into(), self.scatter.to_string());
            if !self.targets.is_empty() {
                let t: Vec<String> =
                    self.targets.iter().map(|s| format!("{:e}:{:e}", s.re, s.im)).collect();
                map.insert("targets".into(), t.join(" "));
            }
        }
        map
    }
}

fn join_display<T: fmt::Display>(values: &[T]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn join_exp(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(" ")
}

/// Parse and validate a flat `key = value` config file.
///
/// Blank lines and lines starting with `#` are skipped. Every key must be
/// known, appear at most once, and be consumed by the configured experiment.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut raw: BTreeMap<&str, &str> = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected `key = value`, got {line:?}", lineno + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::Config(format!("line {}: unknown key {key:?}", lineno + 1)));
        }
        if raw.insert(key, value).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key {key:?}", lineno + 1)));
        }
    }

    let kind = ExperimentKind::parse(require(&raw, "experiment")?)?;
    check_key_usage(kind, &raw)?;

    let k_users: u32 = parse_scalar(&raw, "k_users", 1)?;
    let n_side: u32 = parse_scalar(&raw, "n_side", 4)?;
    let power: f64 = parse_scalar(&raw, "power", 1.0)?;
    let trials: u64 = parse_scalar(&raw, "trials", 1000)?;
    let symbols_per_channel: u64 = parse_scalar(&raw, "symbols_per_channel", 200)?;
    let master_seed: u64 = parse_scalar(&raw, "master_seed", 0)?;
    let kappa: f64 = parse_scalar(&raw, "kappa", 2.0)?;
    let scatter: bool = parse_scalar(&raw, "scatter", false)?;

    let m_antennas = parse_list::<u32>(&raw, "m_antennas")?;
    let snr_db = parse_list::<f64>(&raw, "snr_db")?;
    let lambda = parse_list::<f64>(&raw, "lambda")?;
    let schemes = match raw.get("schemes") {
        None => Vec::new(),
        Some(v) => {
            let mut out = Vec::new();
            for token in v.split(',') {
                let token = token.trim();
                if token.is_empty() {
                    return Err(Error::Config("empty scheme token".into()));
                }
                out.push(SchemeSpec::parse(token)?);
            }
            out
        }
    };
    let targets = match raw.get("targets") {
        None => Vec::new(),
        Some(v) => parse_targets(v)?,
    };

    let config = ExperimentConfig {
        kind,
        k_users,
        m_antennas,
        n_side,
        power,
        snr_db,
        lambda,
        schemes,
        trials,
        symbols_per_channel,
        master_seed,
        kappa,
        scatter,
        targets,
    };
    validate(&config)?;
    Ok(config)
}

const KNOWN_KEYS: [&str; 14] = [
    "experiment",
    "k_users",
    "m_antennas",
    "n_side",
    "power",
    "snr_db",
    "lambda",
    "schemes",
    "trials",
    "symbols_per_channel",
    "master_seed",
    "kappa",
    "scatter",
    "targets",
];

/// Keys each experiment consumes beyond the always-legal basics.
fn check_key_usage(kind: ExperimentKind, raw: &BTreeMap<&str, &str>) -> Result<()> {
    let allowed: &[&str] = match kind {
        ExperimentKind::MseSweep => &["lambda", "schemes"],
        ExperimentKind::SerVsSnr | ExperimentKind::SerVsAntennas => &["snr_db", "schemes"],
        ExperimentKind::PrecodeOnce => &["scatter", "schemes", "targets"],
    };
    let basics = [
        "experiment",
        "k_users",
        "m_antennas",
        "n_side",
        "power",
        "trials",
        "symbols_per_channel",
        "master_seed",
        "kappa",
    ];
    for key in raw.keys() {
        if !basics.contains(key) && !allowed.contains(key) {
            return Err(Error::Config(format!(
                "key {key:?} is not used by experiment {kind}"
            )));
        }
    }
    Ok(())
}

fn require<'a>(raw: &BTreeMap<&str, &'a str>, key: &str) -> Result<&'a str> {
    raw.get(key)
        .copied()
        .ok_or_else(|| Error::Config(format!("missing required key {key:?}")))
}

fn parse_scalar<T: std::str::FromStr>(
    raw: &BTreeMap<&str, &str>,
    key: &str,
    default: T,
) -> Result<T> {
    match raw.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| Error::Config(format!("key {key:?}: cannot parse value {v:?}"))),
    }
}

fn parse_list<T: std::str::FromStr>(raw: &BTreeMap<&str, &str>, key: &str) -> Result<Vec<T>> {
    match raw.get(key) {
        None => Ok(Vec::new()),
        Some(v) => v
            .split(',')
            .map(|item| {
                item.trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("key {key:?}: bad list item {item:?}")))
            })
            .collect(),
    }
}

fn parse_targets(value: &str) -> Result<Vec<Complex>> {
    value
        .split(',')
        .map(|item| {
            let item = item.trim();
            let (re, im) = item.split_once(':').ok_or_else(|| {
                Error::Config(format!("target {item:?} must be `re:im`"))
            })?;
            let re: f64 = re
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad real part in target {item:?}")))?;
            let im: f64 = im
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad imaginary part in target {item:?}")))?;
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::Config(format!("target {item:?} must be finite")));
            }
            Ok(Complex::new(re, im))
        })
        .collect()
}

fn validate(config: &ExperimentConfig) -> Result<()> {
    if config.k_users == 0 {
        return Err(Error::Config("k_users must be at least 1".into()));
    }
    if config.n_side < 2 || config.n_side % 2 != 0 {
        return Err(Error::Config(format!(
            "n_side must be even and at least 2, got {}",
            config.n_side
        )));
    }
    if !config.power.is_finite() || config.power <= 0.0 {
        return Err(Error::Config("power must be finite and positive".into()));
    }
    if !config.kappa.is_finite() || config.kappa < 0.0 {
        return Err(Error::Config("kappa must be finite and nonnegative".into()));
    }
    if config.trials == 0 || config.symbols_per_channel == 0 {
        return Err(Error::Config(
            "trials and symbols_per_channel must be at least 1".into(),
        ));
    }
    if config.m_antennas.is_empty() {
        return Err(Error::Config("missing required key \"m_antennas\"".into()));
    }
    if config.m_antennas.contains(&0) {
        return Err(Error::Config("m_antennas entries must be at least 1".into()));
    }
    let m_min = *config.m_antennas.iter().min().unwrap();
    let m_max = *config.m_antennas.iter().max().unwrap();

    match config.kind {
        ExperimentKind::MseSweep => {
            check_singleton_m(config)?;
            check_grid(&config.lambda, "lambda")?;
            if config.lambda.iter().any(|&l| l <= 0.0) {
                return Err(Error::Config("lambda values must be positive".into()));
            }
            check_schemes(config, m_min, m_max)?;
        }
        ExperimentKind::SerVsSnr => {
            check_singleton_m(config)?;
            check_grid(&config.snr_db, "snr_db")?;
            check_schemes(config, m_min, m_max)?;
        }
        ExperimentKind::SerVsAntennas => {
            check_grid_u32(&config.m_antennas, "m_antennas")?;
            if config.snr_db.len() != 1 {
                return Err(Error::Config(
                    "ser_vs_antennas needs exactly one snr_db value".into(),
                ));
            }
            check_schemes(config, m_min, m_max)?;
        }
        ExperimentKind::PrecodeOnce => {
            check_singleton_m(config)?;
            if config.scatter {
                if config.k_users != 1 {
                    return Err(Error::Config("scatter mode requires k_users = 1".into()));
                }
                if m_max > ORACLE_ANTENNA_CAP {
                    return Err(Error::Config(format!(
                        "scatter mode enumerates 4^M words and needs M <= {ORACLE_ANTENNA_CAP}"
                    )));
                }
                if !config.schemes.is_empty() || !config.targets.is_empty() {
                    return Err(Error::Config(
                        "scatter mode takes no schemes or targets".into(),
                    ));
                }
            } else {
                check_schemes(config, m_min, m_max)?;
                if config.targets.len() != config.k_users as usize {
                    return Err(Error::Config(format!(
                        "expected {} targets (one per user), got {}",
                        config.k_users,
                        config.targets.len()
                    )));
                }
            }
        }
    }
    Ok(())
}

fn check_singleton_m(config: &ExperimentConfig) -> Result<()> {
    if config.m_antennas.len() != 1 {
        return Err(Error::Config(format!(
            "experiment {} takes a single m_antennas value",
            config.kind
        )));
    }
    Ok(())
}

fn check_grid(grid: &[f64], name: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config(format!("missing required key {name:?}")));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config(format!("{name} values must be finite")));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!("{name} grid must be strictly increasing")));
    }
    Ok(())
}

fn check_grid_u32(grid: &[u32], name: &str) -> Result<()> {
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!("{name} grid must be strictly increasing")));
    }
    Ok(())
}

fn check_schemes(config: &ExperimentConfig, m_min: u32, m_max: u32) -> Result<()> {
    if config.schemes.is_empty() {
        return Err(Error::Config("missing required key \"schemes\"".into()));
    }
    let mut seen: Vec<String> = Vec::new();
    for scheme in &config.schemes {
        let label = scheme.label();
        if seen.contains(&label) {
            return Err(Error::Config(format!("duplicate scheme {label:?}")));
        }
        seen.push(label.clone());
        match scheme {
            SchemeSpec::InfTotal | SchemeSpec::InfPerAntenna => {
                if config.k_users != 1 {
                    return Err(Error::Config(format!(
                        "scheme {label:?} requires k_users = 1"
                    )));
                }
            }
            SchemeSpec::ZfInfinite | SchemeSpec::QuantizedZf => {
                if config.k_users > m_min {
                    return Err(Error::Config(format!(
                        "scheme {label:?} needs k_users <= m_antennas"
                    )));
                }
            }
            SchemeSpec::OneBit { m2, .. } => {
                if *m2 > COMPLETION_CAP {
                    return Err(Error::Config(format!(
                        "scheme {label:?}: m2 exceeds the completion cap {COMPLETION_CAP}"
                    )));
                }
                if *m2 > m_min {
                    return Err(Error::Config(format!(
                        "scheme {label:?}: m2 exceeds the smallest antenna count {m_min}"
                    )));
                }
            }
            SchemeSpec::OracleExhaustive => {
                if m_max > ORACLE_ANTENNA_CAP {
                    return Err(Error::Config(format!(
                        "scheme {label:?} needs m_antennas <= {ORACLE_ANTENNA_CAP}"
                    )));
                }
            }
        }
    }
    Ok(())
}
