//! Flat `key = value` configuration shared by config files and flags.

use std::collections::BTreeMap;
use std::path::Path;

use mtcsync::{BoundSettings, Constraints, LambdaRConvention, SimConfig, Topology};

use crate::error::{CliError, CliResult};

/// Every accepted key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("d", "transmitter-receiver distance"),
    ("d_t", "clock-transmitter distance"),
    ("d_r", "clock-receiver distance"),
    ("v_i", "drift velocity of the information link"),
    ("v_c", "drift velocity of both clock links"),
    ("sigma2", "variance of position increments per unit time"),
    (
        "diffusion_d",
        "diffusion coefficient; sets sigma2 = diffusion_d / 2",
    ),
    ("m", "mean input delay"),
    ("a", "bound on the input second moment"),
    ("a_over_m2", "second-moment bound as a multiple of m^2"),
    ("sweep", "swept parameter: v_i, v_c, v, m or d_r"),
    ("start", "first sweep value"),
    ("stop", "last sweep value"),
    ("points", "number of sweep values"),
    ("seed", "random seed"),
    ("samples", "Monte Carlo sample count"),
    ("wiener_dt", "time step of simulated diffusion paths"),
    ("format", "output format: csv or json"),
    ("out", "output file; stdout when absent"),
    ("bits", "report information in bits instead of nats"),
    (
        "lambda_r",
        "clock-receiver shape convention: squared or linear",
    ),
];

pub const DEFAULT_SEED: u64 = 42;

/// Raw key-value pairs with later sources overriding earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut raw = Self::default();
        for (number, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected `key = value`", number + 1))
            })?;
            raw.set(key.trim(), value.trim())?;
        }
        Ok(raw)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(CliError::Config(format!("unknown key `{key}`")));
        }
        self.values.insert(key.to_owned(), value.to_owned());
        Ok(())
    }

    /// Sets `key` only when it has no value yet.
    pub fn set_default(&mut self, key: &str, value: &str) {
        self.values
            .entry(key.to_owned())
            .or_insert_with(|| value.to_owned());
    }

    pub fn merge(&mut self, other: &RawConfig) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }

    pub fn remove(&mut self, key: &str) {
        self.values.remove(key);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| CliError::Config(format!("`{key}`: cannot parse `{v}`")))
            })
            .transpose()
    }

    fn number(&self, key: &str) -> CliResult<Option<f64>> {
        match self.parsed::<f64>(key)? {
            Some(v) if !v.is_finite() => Err(CliError::Config(format!("`{key}` must be finite"))),
            other => Ok(other),
        }
    }
}

/// Parameter varied across the rows of a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    VI,
    VC,
    /// Common drift velocity on all three links.
    V,
    M,
    DR,
}

impl SweepParam {
    pub fn parse(name: &str) -> CliResult<Self> {
        Ok(match name {
            "v_i" => Self::VI,
            "v_c" => Self::VC,
            "v" | "v_common" => Self::V,
            "m" => Self::M,
            "d_r" => Self::DR,
            other => {
                return Err(CliError::Config(format!(
                    "`sweep`: unknown parameter `{other}` (expected v_i, v_c, v, m or d_r)"
                )))
            }
        })
    }

    pub fn column(&self) -> &'static str {
        match self {
            Self::VI => "v_i",
            Self::VC => "v_c",
            Self::V => "v",
            Self::M => "m",
            Self::DR => "d_r",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Sweep {
    pub fn new(param: SweepParam, start: f64, stop: f64, points: usize) -> CliResult<Self> {
        if start.partial_cmp(&stop) != Some(std::cmp::Ordering::Less) {
            return Err(CliError::Config(format!(
                "`start` ({start}) must be below `stop` ({stop})"
            )));
        }
        if points < 2 {
            return Err(CliError::Config("`points` must be at least 2".into()));
        }
        Ok(Self {
            param,
            start,
            stop,
            points,
        })
    }

    /// Evenly spaced values from `start` to `stop` inclusive.
    pub fn values(&self) -> Vec<f64> {
        let span = self.stop - self.start;
        (0..self.points)
            .map(|k| {
                if k + 1 == self.points {
                    self.stop
                } else {
                    self.start + span * k as f64 / (self.points - 1) as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// How the second-moment bound is fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SecondMoment {
    Absolute(f64),
    RelativeToMeanSquared(f64),
}

/// Fully validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub topology: Topology,
    pub m: Option<f64>,
    pub second_moment: Option<SecondMoment>,
    pub sweep: Option<Sweep>,
    pub seed: u64,
    pub samples: Option<usize>,
    pub wiener_dt: Option<f64>,
    pub format: Format,
    pub out: Option<String>,
    pub bits: bool,
    pub lambda_r: LambdaRConvention,
    /// Every key with its resolved value, for the dataset header.
    pub resolved: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn resolve(raw: &RawConfig) -> CliResult<Self> {
        let length = |key: &str| -> CliResult<f64> { Ok(raw.number(key)?.unwrap_or(1.0)) };
        let sigma2 = match (raw.number("sigma2")?, raw.number("diffusion_d")?) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "`sigma2` and `diffusion_d` are mutually exclusive".into(),
                ))
            }
            (Some(s), None) => s,
            (None, Some(d)) => d / 2.0,
            (None, None) => 1.0,
        };
        let topology = Topology::new(
            length("d")?,
            length("d_t")?,
            length("d_r")?,
            length("v_i")?,
            length("v_c")?,
            sigma2,
        );
        for (key, value) in [
            ("d", topology.d),
            ("d_t", topology.d_t),
            ("d_r", topology.d_r),
            ("sigma2", topology.sigma2),
        ] {
            if value <= 0.0 {
                return Err(CliError::Config(format!(
                    "`{key}` must be positive, got {value}"
                )));
            }
        }

        let m = raw.number("m")?;
        let second_moment = match (raw.number("a")?, raw.number("a_over_m2")?) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "`a` and `a_over_m2` are mutually exclusive".into(),
                ))
            }
            (Some(a), None) => Some(SecondMoment::Absolute(a)),
            (None, Some(k)) => Some(SecondMoment::RelativeToMeanSquared(k)),
            (None, None) => None,
        };

        let sweep = match raw.get("sweep") {
            None => None,
            Some(name) => {
                let param = SweepParam::parse(name)?;
                let need = |key: &str| -> CliResult<f64> {
                    raw.number(key)?
                        .ok_or_else(|| CliError::Config(format!("`sweep` requires `{key}`")))
                };
                let points = raw
                    .parsed::<usize>("points")?
                    .ok_or_else(|| CliError::Config("`sweep` requires `points`".into()))?;
                Some(Sweep::new(param, need("start")?, need("stop")?, points)?)
            }
        };

        let format = match raw.get("format").unwrap_or("csv") {
            "csv" => Format::Csv,
            "json" => Format::Json,
            other => {
                return Err(CliError::Config(format!(
                    "`format`: expected csv or json, got `{other}`"
                )))
            }
        };
        let lambda_r = match raw.get("lambda_r").unwrap_or("squared") {
            "squared" => LambdaRConvention::Squared,
            "linear" => LambdaRConvention::Linear,
            other => {
                return Err(CliError::Config(format!(
                    "`lambda_r`: expected squared or linear, got `{other}`"
                )))
            }
        };
        let samples = raw.parsed::<usize>("samples")?;
        if samples == Some(0) {
            return Err(CliError::Config("`samples` must be at least 1".into()));
        }
        let wiener_dt = raw.number("wiener_dt")?;
        if let Some(dt) = wiener_dt {
            if dt <= 0.0 {
                return Err(CliError::Config(format!(
                    "`wiener_dt` must be positive, got {dt}"
                )));
            }
        }

        let mut resolved = BTreeMap::new();
        for (key, value) in [
            ("d", topology.d),
            ("d_t", topology.d_t),
            ("d_r", topology.d_r),
            ("v_i", topology.v_i),
            ("v_c", topology.v_c),
            ("sigma2", topology.sigma2),
        ] {
            resolved.insert(key.to_owned(), crate::table::format_number(value));
        }
        let seed = raw.parsed::<u64>("seed")?.unwrap_or(DEFAULT_SEED);
        let bits = raw.parsed::<bool>("bits")?.unwrap_or(false);
        for key in [
            "m",
            "a",
            "a_over_m2",
            "sweep",
            "start",
            "stop",
            "points",
            "samples",
            "wiener_dt",
        ] {
            if let Some(v) = raw.get(key) {
                resolved.insert(key.to_owned(), v.to_owned());
            }
        }
        resolved.insert("seed".into(), seed.to_string());
        resolved.insert("bits".into(), bits.to_string());
        resolved.insert(
            "lambda_r".into(),
            match lambda_r {
                LambdaRConvention::Squared => "squared",
                LambdaRConvention::Linear => "linear",
            }
            .into(),
        );

        Ok(Self {
            topology,
            m,
            second_moment,
            sweep,
            seed,
            samples,
            wiener_dt,
            format,
            out: raw.get("out").map(str::to_owned),
            bits,
            lambda_r,
            resolved,
        })
    }

    pub fn require_m(&self) -> CliResult<f64> {
        match self.m {
            Some(m) if m > 0.0 => Ok(m),
            Some(m) => Err(CliError::Config(format!("`m` must be positive, got {m}"))),
            None => Err(CliError::Config(
                "missing required key `m` (mean input delay)".into(),
            )),
        }
    }

    pub fn constraints_for(&self, m: f64) -> CliResult<Constraints> {
        let a = match self.second_moment {
            Some(SecondMoment::Absolute(a)) => a,
            Some(SecondMoment::RelativeToMeanSquared(k)) => k * m * m,
            None => {
                return Err(CliError::Config(
                    "missing required key `a` (or `a_over_m2`) for the upper bound".into(),
                ))
            }
        };
        Ok(Constraints::new(m, a)?)
    }

    pub fn settings(&self) -> BoundSettings {
        BoundSettings {
            lambda_r: self.lambda_r,
            ..BoundSettings::default()
        }
    }

    pub fn sim_config(&self, default_samples: usize) -> CliResult<SimConfig> {
        let cfg = SimConfig::new(self.samples.unwrap_or(default_samples), self.seed)?;
        Ok(cfg)
    }

    /// `# config: ` line listing every resolved key.
    pub fn header_comment(&self) -> String {
        let pairs: Vec<String> = self
            .resolved
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        format!("# config: {}", pairs.join(" "))
    }
}

/// Applies a sweep value to the topology and input mean.
pub fn apply_sweep(
    base: &Topology,
    m: Option<f64>,
    param: SweepParam,
    value: f64,
) -> (Topology, Option<f64>) {
    let mut t = *base;
    let mut m = m;
    match param {
        SweepParam::VI => t.v_i = value,
        SweepParam::VC => t.v_c = value,
        SweepParam::V => {
            t.v_i = value;
            t.v_c = value;
        }
        SweepParam::M => m = Some(value),
        SweepParam::DR => t.d_r = value,
    }
    (t, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_whitespace() {
        let raw = RawConfig::parse("# geometry\n d = 2.5 # metres\n\nv_i=3\n").unwrap();
        assert_eq!(raw.get("d"), Some("2.5"));
        assert_eq!(raw.get("v_i"), Some("3"));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lines() {
        assert!(RawConfig::parse("velocity = 3").is_err());
        assert!(RawConfig::parse("d 3").is_err());
    }

    #[test]
    fn later_sources_override() {
        let mut raw = RawConfig::parse("m = 1\nv_i = 2").unwrap();
        raw.merge(&RawConfig::parse("m = 3").unwrap());
        let cfg = RunConfig::resolve(&raw).unwrap();
        assert_eq!(cfg.m, Some(3.0));
        assert_eq!(cfg.topology.v_i, 2.0);
    }

    #[test]
    fn diffusion_coefficient_halves() {
        let raw = RawConfig::parse("diffusion_d = 3").unwrap();
        assert_eq!(RunConfig::resolve(&raw).unwrap().topology.sigma2, 1.5);
        let both = RawConfig::parse("diffusion_d = 3\nsigma2 = 1").unwrap();
        assert!(RunConfig::resolve(&both).is_err());
    }

    #[test]
    fn sweep_validation() {
        let bad = RawConfig::parse("sweep = v_i\nstart = 3\nstop = 1\npoints = 4").unwrap();
        assert!(RunConfig::resolve(&bad).is_err());
        let few = RawConfig::parse("sweep = v_i\nstart = 1\nstop = 3\npoints = 1").unwrap();
        assert!(RunConfig::resolve(&few).is_err());
        let unknown = RawConfig::parse("sweep = d\nstart = 1\nstop = 3\npoints = 4").unwrap();
        assert!(RunConfig::resolve(&unknown).is_err());
        let s = Sweep::new(SweepParam::V, 1.0, 10.0, 10).unwrap();
        assert_eq!(s.values(), (1..=10).map(f64::from).collect::<Vec<_>>());
    }

    #[test]
    fn missing_m_names_the_key() {
        let cfg = RunConfig::resolve(&RawConfig::default()).unwrap();
        match cfg.require_m() {
            Err(CliError::Config(msg)) => assert!(msg.contains("`m`")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn header_lists_resolved_values() {
        let cfg = RunConfig::resolve(&RawConfig::parse("m = 3\nseed = 7").unwrap()).unwrap();
        let line = cfg.header_comment();
        assert!(line.starts_with("# config: "));
        assert!(line.contains("m=3") && line.contains("seed=7") && line.contains("v_c=1"));
    }
}
