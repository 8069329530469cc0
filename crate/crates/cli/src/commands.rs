//! Dataset builders behind each subcommand.

use rayon::prelude::*;

use mtcsync::capacity::UpperBoundModel;
use mtcsync::simulation::{simulate_channel, ExponentialInput};
use mtcsync::{BinaryReceiver, LowerBoundResult, Topology, UpperBoundBreakdown};

use crate::config::{apply_sweep, RawConfig, RunConfig};
use crate::error::{CliError, CliResult};
use crate::table::{Cell, Table};

/// Default number of channel uses written by `simulate`.
pub const DEFAULT_SIMULATE_SAMPLES: usize = 1000;

/// One row of a sweep: its leading coordinates, topology and input mean.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub lead: Vec<f64>,
    pub topology: Topology,
    pub m: Option<f64>,
}

/// Information unit of the output columns.
#[derive(Debug, Clone, Copy)]
struct Unit {
    bits: bool,
}

impl Unit {
    fn name(&self, stem: &str) -> String {
        format!("{stem}_{}", if self.bits { "bits" } else { "nats" })
    }

    fn value(&self, nats: f64) -> Cell {
        Cell::Num(if self.bits {
            nats / std::f64::consts::LN_2
        } else {
            nats
        })
    }
}

// Consecutive points sharing a topology share one model; groups run in
// parallel and rows come back in input order.
fn evaluate_grouped<M, T, B, E>(points: &[Point], build: B, eval: E) -> CliResult<Vec<T>>
where
    M: Send,
    T: Send,
    B: Fn(&Topology) -> CliResult<M> + Sync,
    E: Fn(&M, &Point) -> CliResult<T> + Sync,
{
    let mut groups: Vec<&[Point]> = Vec::new();
    let mut rest = points;
    while let Some(first) = rest.first() {
        let len = rest
            .iter()
            .take_while(|p| p.topology == first.topology)
            .count();
        let (head, tail) = rest.split_at(len);
        groups.push(head);
        rest = tail;
    }
    let results: Vec<CliResult<Vec<T>>> = groups
        .par_iter()
        .map(|group| {
            let model = build(&group[0].topology)?;
            group.iter().map(|p| eval(&model, p)).collect()
        })
        .collect();
    let mut rows = Vec::with_capacity(points.len());
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

fn upper_columns(unit: Unit) -> Vec<String> {
    vec![
        unit.name("c_ub"),
        unit.name("log_term"),
        unit.name("unit_term"),
        unit.name("g_term"),
        unit.name("sum_entropy"),
        "c_star".into(),
        "penalty_integral".into(),
        "variance_ratio".into(),
        "sum_analytic".into(),
    ]
}

fn upper_cells(b: &UpperBoundBreakdown, unit: Unit) -> Vec<Cell> {
    vec![
        unit.value(b.total),
        unit.value(b.log_term),
        unit.value(b.unit_term),
        unit.value(b.g_term),
        unit.value(b.sum_entropy),
        Cell::Num(b.c_star),
        Cell::Num(b.penalty_integral),
        Cell::Num(b.variance_ratio),
        Cell::Bool(b.sum_is_analytic),
    ]
}

fn lower_columns(unit: Unit) -> Vec<String> {
    vec![
        "f_y0".into(),
        unit.name("h_b"),
        unit.name("h_b_given_x"),
        unit.name("i_lb"),
    ]
}

fn lower_cells(r: &LowerBoundResult, unit: Unit) -> Vec<Cell> {
    vec![
        Cell::Num(r.f_y0),
        unit.value(r.h_b),
        unit.value(r.h_b_given_x),
        unit.value(r.value),
    ]
}

fn lead_cells(p: &Point) -> Vec<Cell> {
    p.lead.iter().copied().map(Cell::Num).collect()
}

fn require_point_m(p: &Point) -> CliResult<f64> {
    p.m.ok_or_else(|| CliError::Config("missing required key `m` (mean input delay)".into()))
}

/// Upper-bound rows for every point.
pub fn upper_table(lead: &[&str], points: &[Point], cfg: &RunConfig) -> CliResult<Table> {
    let unit = Unit { bits: cfg.bits };
    let settings = cfg.settings();
    let rows = evaluate_grouped(
        points,
        |t| {
            let links = t.links_with(settings.lambda_r)?;
            Ok(UpperBoundModel::new(&links, &settings)?)
        },
        |model, p| {
            let m = require_point_m(p)?;
            let b = model.evaluate(&cfg.constraints_for(m)?)?;
            let mut row = lead_cells(p);
            row.extend(upper_cells(&b, unit));
            Ok(row)
        },
    )?;
    let mut table = Table::new(
        lead.iter()
            .map(|s| s.to_string())
            .chain(upper_columns(unit)),
    );
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

/// Lower-bound rows for every point, optionally followed by the upper bound.
pub fn lower_table(
    lead: &[&str],
    points: &[Point],
    cfg: &RunConfig,
    with_upper: bool,
) -> CliResult<Table> {
    let unit = Unit { bits: cfg.bits };
    let settings = cfg.settings();
    let rows = evaluate_grouped(
        points,
        |t| {
            let links = t.links_with(settings.lambda_r)?;
            let receiver = BinaryReceiver::new(&links, &settings)?;
            let upper = if with_upper {
                Some(UpperBoundModel::new(&links, &settings)?)
            } else {
                None
            };
            Ok((receiver, upper))
        },
        |(receiver, upper), p| {
            let m = require_point_m(p)?;
            let r = receiver.lower_bound(m)?;
            let mut row = lead_cells(p);
            row.extend(lower_cells(&r, unit));
            if let Some(model) = upper {
                let b = model.evaluate(&cfg.constraints_for(m)?)?;
                row.push(unit.value(b.total));
            }
            Ok(row)
        },
    )?;
    let mut columns: Vec<String> = lead.iter().map(|s| s.to_string()).collect();
    columns.extend(lower_columns(unit));
    if with_upper {
        columns.push(unit.name("c_ub"));
    }
    let mut table = Table::new(columns);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

/// Points of the configured sweep, or the single configured point.
pub fn sweep_points(cfg: &RunConfig) -> (Vec<&'static str>, Vec<Point>) {
    match &cfg.sweep {
        None => (
            Vec::new(),
            vec![Point {
                lead: Vec::new(),
                topology: cfg.topology,
                m: cfg.m,
            }],
        ),
        Some(sweep) => {
            let points = sweep
                .values()
                .into_iter()
                .map(|v| {
                    let (topology, m) = apply_sweep(&cfg.topology, cfg.m, sweep.param, v);
                    Point {
                        lead: vec![v],
                        topology,
                        m,
                    }
                })
                .collect();
            (vec![sweep.param.column()], points)
        }
    }
}

pub fn run_upper_bound(cfg: &RunConfig) -> CliResult<Table> {
    if cfg.sweep.as_ref().map(|s| s.param) != Some(crate::config::SweepParam::M) {
        cfg.require_m()?;
    }
    let (lead, points) = sweep_points(cfg);
    upper_table(&lead, &points, cfg)
}

pub fn run_lower_bound(cfg: &RunConfig) -> CliResult<Table> {
    if cfg.sweep.as_ref().map(|s| s.param) != Some(crate::config::SweepParam::M) {
        cfg.require_m()?;
    }
    let (lead, points) = sweep_points(cfg);
    lower_table(&lead, &points, cfg, false)
}

/// Raw channel uses under an exponential input law.
pub fn run_simulate(cfg: &RunConfig) -> CliResult<Table> {
    if cfg.sweep.is_some() {
        return Err(CliError::Config("`simulate` does not take a sweep".into()));
    }
    let m = cfg.require_m()?;
    let links = cfg.topology.links_with(cfg.lambda_r)?;
    let sim = cfg.sim_config(DEFAULT_SIMULATE_SAMPLES)?;
    let law = ExponentialInput::new(m)?;
    let mut table = Table::new(["index", "x", "e_t", "e_r", "n", "y", "z", "b"]);
    for (i, s) in simulate_channel(&links, &law, &sim).into_iter().enumerate() {
        table.push(vec![
            Cell::Int(i as u64),
            Cell::Num(s.x),
            Cell::Num(s.e_t),
            Cell::Num(s.e_r),
            Cell::Num(s.n),
            Cell::Num(s.y),
            Cell::Num(s.z),
            Cell::Int(u64::from(s.b)),
        ]);
    }
    Ok(table)
}

/// Figure presets: fixed sweeps over otherwise configurable parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl Preset {
    pub fn parse(name: &str) -> CliResult<Self> {
        Ok(match name {
            "fig2" => Self::Fig2,
            "fig3" => Self::Fig3,
            "fig4" => Self::Fig4,
            "fig5" => Self::Fig5,
            other => {
                return Err(CliError::Config(format!(
                    "unknown preset `{other}` (expected fig2, fig3, fig4 or fig5)"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Fig2 => "fig2",
            Self::Fig3 => "fig3",
            Self::Fig4 => "fig4",
            Self::Fig5 => "fig5",
        }
    }

    fn defaults(&self) -> &'static [(&'static str, &'static str)] {
        match self {
            Self::Fig2 => &[("m", "3"), ("a", "18"), ("v_c", "4"), ("v_i", "4")],
            Self::Fig3 => &[("a_over_m2", "2"), ("v_c", "4"), ("v_i", "1"), ("m", "1")],
            Self::Fig4 => &[
                ("d", "0.1"),
                ("d_t", "0.1"),
                ("v_i", "4"),
                ("v_c", "4"),
                ("a_over_m2", "2"),
                ("m", "1"),
            ],
            Self::Fig5 => &[("m", "0.1"), ("a_over_m2", "2"), ("v_i", "5"), ("v_c", "5")],
        }
    }

    /// Layers the preset's defaults under the user's keys.
    pub fn configure(&self, user: &RawConfig) -> CliResult<RunConfig> {
        for key in ["sweep", "start", "stop", "points"] {
            if user.get(key).is_some() {
                return Err(CliError::Config(format!(
                    "`{key}` cannot be set for preset {}; its sweep is fixed",
                    self.name()
                )));
            }
        }
        let mut raw = user.clone();
        let user_moment = user.get("a").is_some() || user.get("a_over_m2").is_some();
        for (key, value) in self.defaults() {
            if user_moment && (*key == "a" || *key == "a_over_m2") {
                continue;
            }
            raw.set_default(key, value);
        }
        let mut cfg = RunConfig::resolve(&raw)?;
        cfg.resolved.insert("preset".into(), self.name().into());
        Ok(cfg)
    }

    pub fn run(&self, cfg: &RunConfig) -> CliResult<Table> {
        let base = cfg.topology;
        let linspace = |start: f64, stop: f64, n: usize| {
            (0..n)
                .map(|k| start + (stop - start) * k as f64 / (n - 1) as f64)
                .collect::<Vec<f64>>()
        };
        let velocities: Vec<f64> = (1..=10).map(f64::from).collect();
        match self {
            Self::Fig2 => {
                let m = cfg.require_m()?;
                let mut points = Vec::new();
                for v_c in [2.0, 4.0, 8.0] {
                    for &v_i in &velocities {
                        points.push(Point {
                            lead: vec![v_i, v_c],
                            topology: Topology { v_i, v_c, ..base },
                            m: Some(m),
                        });
                    }
                }
                upper_table(&["v_i", "v_c"], &points, cfg)
            }
            Self::Fig3 => {
                let mut points = Vec::new();
                for v_i in [1.0, 2.0, 3.0] {
                    for m in linspace(0.5, 10.0, 20) {
                        points.push(Point {
                            lead: vec![v_i, m],
                            topology: Topology { v_i, ..base },
                            m: Some(m),
                        });
                    }
                }
                upper_table(&["v_i", "m"], &points, cfg)
            }
            Self::Fig4 => {
                let mut points = Vec::new();
                for m in [0.5, 1.0, 2.0] {
                    for d_r in linspace(0.1, 5.0, 20) {
                        points.push(Point {
                            lead: vec![m, d_r],
                            topology: Topology { d_r, ..base },
                            m: Some(m),
                        });
                    }
                }
                upper_table(&["m", "d_r"], &points, cfg)
            }
            Self::Fig5 => {
                let m = cfg.require_m()?;
                let points: Vec<Point> = velocities
                    .iter()
                    .map(|&v| Point {
                        lead: vec![v],
                        topology: Topology {
                            v_i: v,
                            v_c: v,
                            ..base
                        },
                        m: Some(m),
                    })
                    .collect();
                lower_table(&["v"], &points, cfg, true)
            }
        }
    }
}
