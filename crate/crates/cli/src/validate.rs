//! Self-checks of the numerical core against independent routes.

use mtcsync::channel::{tabulate_sum, SumGrid};
use mtcsync::numerics::{integrate_with_breaks, xlogx, QuadratureSpec};
use mtcsync::simulation::{
    conditional_atom_mass, empirical_binary_mi, grouped_atom_frequency, ks_statistic,
    simulate_first_hits_unchecked, substream, SimConfig, WienerLink,
};
use mtcsync::{lower_bound, IgParams, Topology};

use crate::config::RunConfig;
use crate::error::CliResult;
use crate::table::{Cell, Table};

/// Default sample count of the statistical gates.
pub const DEFAULT_VALIDATE_SAMPLES: usize = 100_000;

/// Statistical gates report "insufficient samples" below this count.
pub const MIN_GATE_SAMPLES: usize = 100;

/// Paths simulated by the hitting-time gate at most.
pub const WIENER_GATE_PATHS: usize = 10_000;

/// One-sample KS critical value at the 1% level, `c(α)/√n`.
const KS_CRITICAL_COEFFICIENT: f64 = 1.628;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    InsufficientSamples,
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::InsufficientSamples => "insufficient samples",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub name: &'static str,
    pub status: Status,
    pub statistic: f64,
    pub threshold: f64,
    pub samples: u64,
    pub detail: String,
}

impl Gate {
    fn check(
        name: &'static str,
        statistic: f64,
        threshold: f64,
        samples: u64,
        detail: String,
    ) -> Self {
        let status = if statistic <= threshold {
            Status::Pass
        } else {
            Status::Fail
        };
        Self {
            name,
            status,
            statistic,
            threshold,
            samples,
            detail,
        }
    }

    fn insufficient(name: &'static str, samples: u64) -> Self {
        Self {
            name,
            status: Status::InsufficientSamples,
            statistic: f64::NAN,
            threshold: f64::NAN,
            samples,
            detail: format!("needs at least {MIN_GATE_SAMPLES} samples"),
        }
    }
}

fn ks_threshold(floor: f64, n: usize) -> f64 {
    floor.max(KS_CRITICAL_COEFFICIENT / (n as f64).sqrt())
}

/// Largest gap between the closed-form entropy and `−∫ f ln f` on a 5×5 grid.
pub fn entropy_gate() -> CliResult<Gate> {
    let quad = QuadratureSpec::new(1e-13, 1e-12, 4000)?;
    let grid = [0.1, 0.5, 1.0, 2.0, 5.0];
    let mut worst: f64 = 0.0;
    for &mu in &grid {
        for &lambda in &grid {
            let p = IgParams::new(mu, lambda)?;
            let numeric = -integrate_with_breaks(
                |x| xlogx(p.pdf(x)),
                0.0,
                f64::INFINITY,
                &p.landmarks(),
                &quad,
            )?;
            worst = worst.max((p.entropy() - numeric).abs());
        }
    }
    Ok(Gate::check(
        "entropy_closed_form",
        worst,
        1e-6,
        25,
        "max |h - quadrature| over 25 laws".into(),
    ))
}

/// Convolution of a matched-ratio pair against its closed-form sum.
pub fn additivity_gates() -> CliResult<Vec<Gate>> {
    let (a, b) = (IgParams::new(0.5, 1.0)?, IgParams::new(0.25, 0.25)?);
    let exact = a.sum(&b).expect("shape ratios match");
    let tab = tabulate_sum(
        &a,
        &b,
        &SumGrid::default_for(&a, &b),
        &QuadratureSpec::default(),
    )?;
    let step = tab.step();
    let gaps: Vec<f64> = tab
        .pdf_values()
        .iter()
        .enumerate()
        .map(|(k, f)| (f - exact.pdf(k as f64 * step)).abs())
        .collect();
    let last = gaps.len() - 1;
    let l1 = step * (gaps.iter().sum::<f64>() - 0.5 * (gaps[0] + gaps[last]));
    let dh = (tab.entropy() - exact.entropy()).abs();
    Ok(vec![
        Gate::check(
            "additivity_l1",
            l1,
            1e-3,
            gaps.len() as u64,
            "IG(0.5,1) + IG(0.25,0.25)".into(),
        ),
        Gate::check(
            "additivity_entropy",
            dh,
            1e-4,
            gaps.len() as u64,
            "IG(0.5,1) + IG(0.25,0.25)".into(),
        ),
    ])
}

/// KS distance of the exact sampler against the IG cdf.
pub fn sampler_gate(n: usize, seed: u64) -> CliResult<Gate> {
    if n < MIN_GATE_SAMPLES {
        return Ok(Gate::insufficient("sampler_ks", n as u64));
    }
    let p = IgParams::new(0.5, 1.0)?;
    let xs: Vec<f64> = (0..n as u64)
        .map(|i| p.sample(&mut substream(seed, i)))
        .collect();
    let d = ks_statistic(&xs, |x| p.cdf(x))?;
    Ok(Gate::check(
        "sampler_ks",
        d,
        ks_threshold(0.01, n),
        n as u64,
        "IG(0.5,1)".into(),
    ))
}

/// KS distance of simulated first-hitting times (d = 1, v = 2, σ² = 1).
///
/// A step above the resolution limit is simulated anyway so that a coarse
/// `wiener_dt` shows up as a failing gate rather than a refusal.
pub fn wiener_gate(n: usize, seed: u64, dt: Option<f64>) -> CliResult<Gate> {
    let n = n.min(WIENER_GATE_PATHS);
    if n < MIN_GATE_SAMPLES {
        return Ok(Gate::insufficient("wiener_ks", n as u64));
    }
    let link = WienerLink::new(1.0, 2.0, 1.0)?;
    let dt = dt.unwrap_or_else(|| link.default_dt());
    let batch = simulate_first_hits_unchecked(&link, dt, &SimConfig::new(n, seed)?);
    let law = link.hitting_law();
    let d = if batch.times.is_empty() {
        1.0
    } else {
        ks_statistic(&batch.times, |x| law.cdf(x))?
    };
    let mut detail = format!("dt {dt}, {} truncated paths", batch.truncated);
    if dt > link.max_dt() {
        detail.push_str(", step above resolution limit");
    }
    let mut gate = Gate::check("wiener_ks", d, ks_threshold(0.02, n), n as u64, detail);
    if batch.truncated > 0 {
        gate.status = Status::Fail;
    }
    Ok(gate)
}

/// Monte Carlo binary mutual information against quadrature (common v = 5, m = 0.1).
pub fn mutual_information_gate(n: usize, seed: u64, cfg: &RunConfig) -> CliResult<Gate> {
    if n < MIN_GATE_SAMPLES {
        return Ok(Gate::insufficient("binary_mi_mc", n as u64));
    }
    let t = Topology::uniform(1.0, 5.0, 5.0, 1.0);
    let settings = cfg.settings();
    let exact = lower_bound(&t, 0.1, &settings)?;
    let links = t.links_with(settings.lambda_r)?;
    let mc = empirical_binary_mi(&links, 0.1, &SimConfig::new(n, seed)?, &settings)?;
    Ok(Gate::check(
        "binary_mi_mc",
        (mc.value - exact.value).abs(),
        3.0 * mc.std_error,
        n as u64,
        format!("mc {} vs quadrature {}", mc.value, exact.value),
    ))
}

/// Frequency of `Z = 0` with the clock delays held fixed.
pub fn atom_gate(n: usize, seed: u64) -> CliResult<Gate> {
    if n < MIN_GATE_SAMPLES {
        return Ok(Gate::insufficient("atom_frequency", n as u64));
    }
    let info = IgParams::new(0.5, 1.0)?;
    let (x, e_t, e_r) = (0.1, 0.2, 1.0);
    let p = conditional_atom_mass(x, e_t, e_r, &info);
    let f = grouped_atom_frequency(x, e_t, e_r, &info, &SimConfig::new(n, seed)?);
    let se = (p * (1.0 - p) / n as f64).sqrt();
    Ok(Gate::check(
        "atom_frequency",
        (f - p).abs(),
        3.0 * se,
        n as u64,
        format!("frequency {f} vs mass {p}"),
    ))
}

pub fn run_validate(cfg: &RunConfig) -> CliResult<(Table, Vec<Gate>)> {
    let n = cfg.samples.unwrap_or(DEFAULT_VALIDATE_SAMPLES);
    let mut gates = vec![entropy_gate()?];
    gates.extend(additivity_gates()?);
    gates.push(sampler_gate(n, cfg.seed)?);
    gates.push(wiener_gate(n, cfg.seed, cfg.wiener_dt)?);
    gates.push(mutual_information_gate(n, cfg.seed, cfg)?);
    gates.push(atom_gate(n, cfg.seed)?);

    let mut table = Table::new([
        "check",
        "status",
        "statistic",
        "threshold",
        "samples",
        "detail",
    ]);
    for g in &gates {
        table.push(vec![
            Cell::from(g.name),
            Cell::from(g.status.label()),
            Cell::Num(g.statistic),
            Cell::Num(g.threshold),
            Cell::Int(g.samples),
            Cell::from(g.detail.clone()),
        ]);
    }
    Ok((table, gates))
}
