//! Sweeps, checks and generation runs behind the `qwalk` binary.
//!
//! Every command reads a [`RunConfig`] and writes a CSV table. Unset fields
//! fall back to per-command defaults, and the resolved values are echoed as
//! `#` comment lines above the header so a file documents its own inputs.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bitbuf::{BitBuffer, TOOL_VERSION};
use crate::density::{density_cap, DensityEvolution};
use crate::error::{QwalkError, Result};
use crate::extraction::{
    commit_position, detection_distribution, generate_bits, CommitmentScheme, GenerationMode, ZeroPolicy,
};
use crate::randomness::{
    analytic_step1_randomness, analytic_step2_randomness, coin_randomness, position_randomness,
    JointDistribution, Measured, RandomnessReport,
};
use crate::state::InitialState;
use crate::stattests::{run_battery, write_report_csv, DEFAULT_ALPHA};
use crate::walk::{evolve_trajectory, WalkFamily, WalkSpec};

/// Probabilities above this count toward a support size.
pub const SUPPORT_EPS: f64 = 1e-24;
/// Largest tolerated gap between closed forms and simulation.
pub const ANALYTIC_TOL: f64 = 1e-10;

pub const DEFAULT_DQW_LOOPS: u32 = 2;
pub const DEFAULT_GEN_STEPS: usize = 8;
pub const DEFAULT_ROUNDS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    Standard,
    #[serde(alias = "split-step")]
    #[value(alias = "split_step")]
    SplitStep,
    Directed,
}

impl FamilyName {
    pub const ALL: [FamilyName; 3] = [FamilyName::Standard, FamilyName::SplitStep, FamilyName::Directed];
}

/// Inclusive list of step counts, written `25`, `0,25,50`, `1..=50` or `1..51`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "StepsRepr", into = "Vec<usize>")]
pub struct StepList(pub Vec<usize>);

#[derive(Deserialize)]
#[serde(untagged)]
enum StepsRepr {
    One(usize),
    Many(Vec<usize>),
    Text(String),
}

impl TryFrom<StepsRepr> for StepList {
    type Error = String;

    fn try_from(r: StepsRepr) -> std::result::Result<Self, String> {
        match r {
            StepsRepr::One(n) => Ok(StepList(vec![n])),
            StepsRepr::Many(v) => Ok(StepList(v)),
            StepsRepr::Text(s) => s.parse(),
        }
    }
}

impl From<StepList> for Vec<usize> {
    fn from(s: StepList) -> Self {
        s.0
    }
}

impl FromStr for StepList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let bad = |part: &str| format!("cannot read step list item {part:?}");
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if let Some((a, b)) = part.split_once("..") {
                let lo: usize = a.trim().parse().map_err(|_| bad(part))?;
                let (hi, inclusive) = match b.strip_prefix('=') {
                    Some(b) => (b, true),
                    None => (b, false),
                };
                let hi: usize = hi.trim().parse().map_err(|_| bad(part))?;
                if inclusive {
                    out.extend(lo..=hi);
                } else {
                    out.extend(lo..hi);
                }
            } else {
                out.push(part.parse().map_err(|_| bad(part))?);
            }
        }
        Ok(StepList(out))
    }
}

/// Reads `0.3`, `pi`, `-pi/4`, `3pi/8` or `3*pi/8`.
pub fn parse_angle(s: &str) -> std::result::Result<f64, String> {
    let t: String = s.to_ascii_lowercase().chars().filter(|c| !c.is_whitespace() && *c != '*').collect();
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let err = || format!("cannot read angle {s:?}");
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a, b.parse::<f64>().map_err(|_| err())?),
        None => (t.as_str(), 1.0),
    };
    let coef = match num.strip_suffix("pi").or_else(|| num.strip_suffix('π')) {
        Some("") | Some("+") => 1.0,
        Some("-") => -1.0,
        Some(c) => c.parse::<f64>().map_err(|_| err())?,
        None => return Err(err()),
    };
    Ok(coef * PI / den)
}

fn parse_snake<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_"))).map_err(|e| e.to_string())
}

/// Command settings. Every field is optional so a JSON file and CLI flags
/// can be layered; see [`RunConfig::overlay`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    /// Walk families (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub family: Option<Vec<FamilyName>>,
    /// Coin angles; accepts forms like `pi/4`.
    #[arg(long, value_delimiter = ',', value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta: Option<Vec<f64>>,
    /// Split-step first coin; defaults to theta.
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta1: Option<f64>,
    /// Split-step second coin; defaults to theta.
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta2: Option<f64>,
    /// Directed-walk loop count n.
    #[arg(long)]
    pub loop_count: Option<u32>,
    #[arg(long, value_delimiter = ',', value_parser = parse_angle, allow_hyphen_values = true)]
    pub delta: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', value_parser = parse_angle, allow_hyphen_values = true)]
    pub eta: Option<Vec<f64>>,
    /// Step counts: `8`, `0,25,50` or `1..=50`.
    #[arg(long)]
    pub steps: Option<StepList>,
    /// Bit-flip probabilities.
    #[arg(long, value_delimiter = ',')]
    pub noise_p: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub rounds: Option<usize>,
    /// skip, assign-zero or assign-one.
    #[arg(long, value_parser = parse_snake::<ZeroPolicy>)]
    pub zero_policy: Option<ZeroPolicy>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub include_coin_bit: Option<bool>,
    /// walk or uniform-reference.
    #[arg(long, value_parser = parse_snake::<GenerationMode>)]
    pub mode: Option<GenerationMode>,
    /// Output file; stdout when absent (required for genbits).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Significance level for the test battery.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// JSON file with the same keys as the flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

macro_rules! overlay_fields {
    ($top:ident, $base:ident; $($f:ident),* $(,)?) => {
        RunConfig { $($f: $top.$f.or($base.$f),)* config: None }
    };
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| QwalkError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| QwalkError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Fields set on `self` win; the rest come from `base`.
    pub fn overlay(self, base: RunConfig) -> RunConfig {
        overlay_fields!(self, base; family, theta, theta1, theta2, loop_count, delta, eta, steps,
            noise_p, seed, rounds, zero_policy, include_coin_bit, mode, out, alpha)
    }

    /// Merges in the file named by `config`, if any.
    pub fn resolve(self) -> Result<RunConfig> {
        match self.config.clone() {
            Some(path) => Ok(self.overlay(Self::load(&path)?)),
            None => Ok(self),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let lists: [(&str, Option<usize>); 6] = [
            ("family", self.family.as_ref().map(Vec::len)),
            ("theta", self.theta.as_ref().map(Vec::len)),
            ("delta", self.delta.as_ref().map(Vec::len)),
            ("eta", self.eta.as_ref().map(Vec::len)),
            ("steps", self.steps.as_ref().map(|s| s.0.len())),
            ("noise-p", self.noise_p.as_ref().map(Vec::len)),
        ];
        if let Some((name, _)) = lists.iter().find(|(_, n)| *n == Some(0)) {
            return Err(QwalkError::Config(format!("{name} grid is empty")));
        }
        let angles = [&self.theta, &self.delta, &self.eta];
        let singles = [self.theta1, self.theta2];
        if angles.iter().flat_map(|a| a.iter().flatten()).chain(singles.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(QwalkError::Config("angles must be finite".into()));
        }
        if let Some(p) = self.noise_p.iter().flatten().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(QwalkError::NoiseOutOfRange(*p));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < 1.0) {
                return Err(QwalkError::Config(format!("alpha {a} outside (0, 1)")));
            }
        }
        if self.rounds == Some(0) {
            return Err(QwalkError::RoundsTooSmall);
        }
        if let Some(out) = &self.out {
            let parent = out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
            if !parent.is_dir() {
                return Err(QwalkError::Config(format!("output directory {} does not exist", parent.display())));
            }
        }
        Ok(())
    }

    fn family_with(&self, name: FamilyName, theta: f64) -> WalkFamily {
        match name {
            FamilyName::Standard => WalkFamily::Standard { theta },
            FamilyName::SplitStep => WalkFamily::SplitStep {
                theta1: self.theta1.unwrap_or(theta),
                theta2: self.theta2.unwrap_or(theta),
            },
            FamilyName::Directed => WalkFamily::Directed {
                loop_count: self.loop_count.unwrap_or(DEFAULT_DQW_LOOPS),
            },
        }
    }

    fn first_theta(&self) -> f64 {
        first_or(&self.theta, FRAC_PI_4)
    }

    fn first_init(&self) -> InitialState {
        InitialState::new(first_or(&self.delta, 0.0), first_or(&self.eta, 0.0))
    }

    /// The single walk used by `genbits`.
    pub fn walk_spec(&self) -> WalkSpec {
        let name = self.family.as_ref().and_then(|f| f.first().copied()).unwrap_or(FamilyName::Standard);
        let steps = self.steps.as_ref().and_then(|s| s.0.first().copied()).unwrap_or(DEFAULT_GEN_STEPS);
        WalkSpec::new(self.family_with(name, self.first_theta()), self.first_init(), steps)
            .with_noise(first_or(&self.noise_p, 0.0))
    }
}

fn first_or(v: &Option<Vec<f64>>, default: f64) -> f64 {
    v.as_ref().and_then(|v| v.first().copied()).unwrap_or(default)
}

/// `n` evenly spaced points over `[a, b]`, both ends included.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// A CSV document: `# ` comment lines, a fixed header, then rows.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub comments: Vec<String>,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl Table {
    fn new(command: &str, header: &[&'static str]) -> Self {
        Self {
            comments: vec![format!("{TOOL_VERSION} {command}")],
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn note(&mut self, key: &str, set: bool, value: impl std::fmt::Display) {
        let origin = if set { "" } else { " (default)" };
        self.comments.push(format!("{key}{origin} = {value}"));
    }

    pub fn write_to<W: Write + ?Sized>(&self, out: &mut W) -> std::io::Result<()> {
        out.write_all(self.to_string().as_bytes())
    }
}

impl std::fmt::Display for Table {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.comments {
            writeln!(f, "# {c}")?;
        }
        writeln!(f, "{}", self.header.join(","))?;
        for row in &self.rows {
            writeln!(f, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn list(v: &[f64]) -> String {
    let mut s = String::new();
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        let _ = write!(s, "{x}");
    }
    format!("[{s}]")
}

fn steps_label(v: &[usize]) -> String {
    let contiguous = v.windows(2).all(|w| w[1] == w[0] + 1);
    match (v.first(), v.last()) {
        (Some(a), Some(b)) if contiguous && v.len() > 2 => format!("{a}..={b}"),
        _ => format!("{v:?}"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeltaRow {
    pub family: &'static str,
    pub delta: f64,
    pub eta: f64,
    pub theta: f64,
    pub steps: usize,
    pub r_coin: f64,
    pub r_pos: f64,
    pub r_joint: f64,
}

struct DeltaGrid {
    families: Vec<FamilyName>,
    thetas: Vec<f64>,
    etas: Vec<f64>,
    deltas: Vec<f64>,
    steps: Vec<usize>,
}

impl DeltaGrid {
    fn from_config(cfg: &RunConfig) -> Result<Self> {
        let families = cfg.family.clone().unwrap_or_else(|| vec![FamilyName::Standard]);
        if families.contains(&FamilyName::Directed) {
            return Err(QwalkError::Config("sweep-delta varies theta, which the directed walk does not use".into()));
        }
        Ok(Self {
            families,
            thetas: cfg.theta.clone().unwrap_or_else(|| vec![PI / 12.0, FRAC_PI_4, 5.0 * PI / 12.0]),
            etas: cfg.eta.clone().unwrap_or_else(|| vec![0.0]),
            deltas: cfg.delta.clone().unwrap_or_else(|| linspace(0.0, FRAC_PI_2, 65)),
            steps: cfg.steps.clone().map(|s| s.0).unwrap_or_else(|| vec![0, 25, 50]),
        })
    }
}

/// Coin, position and joint randomness against the initial coin angle δ.
/// Rows run family, θ, η, δ, steps from slowest to fastest.
pub fn sweep_delta(cfg: &RunConfig) -> Result<Vec<DeltaRow>> {
    let g = DeltaGrid::from_config(cfg)?;
    let max_t = g.steps.iter().copied().max().unwrap_or(0);
    let mut points = Vec::new();
    for &f in &g.families {
        for &theta in &g.thetas {
            for &eta in &g.etas {
                for &delta in &g.deltas {
                    points.push((f, theta, eta, delta));
                }
            }
        }
    }
    let blocks: Vec<Vec<DeltaRow>> = points
        .par_iter()
        .map(|&(f, theta, eta, delta)| {
            let family = cfg.family_with(f, theta);
            let traj = evolve_trajectory(&WalkSpec::new(family, InitialState::new(delta, eta), max_t))?;
            Ok(g.steps
                .iter()
                .map(|&t| {
                    let joint = traj[t].joint_distribution();
                    DeltaRow {
                        family: family.name(),
                        delta,
                        eta,
                        theta,
                        steps: t,
                        r_coin: coin_randomness(&joint),
                        r_pos: position_randomness(&joint),
                        r_joint: joint.entropy(),
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(blocks.concat())
}

pub fn sweep_delta_table(cfg: &RunConfig) -> Result<Table> {
    let g = DeltaGrid::from_config(cfg)?;
    let rows = sweep_delta(cfg)?;
    let mut t = Table::new(
        "sweep-delta",
        &["family", "delta", "eta", "theta", "steps", "r_coin", "r_pos", "r_joint"],
    );
    let names: Vec<_> = g.families.iter().map(|f| cfg.family_with(*f, 0.0).name()).collect();
    t.note("family", cfg.family.is_some(), names.join(", "));
    t.note("theta", cfg.theta.is_some(), list(&g.thetas));
    split_step_notes(&mut t, cfg, &g.families);
    t.note("eta", cfg.eta.is_some(), list(&g.etas));
    t.note("delta", cfg.delta.is_some(), list(&g.deltas));
    t.note("steps", cfg.steps.is_some(), steps_label(&g.steps));
    t.rows = rows
        .iter()
        .map(|r| {
            vec![
                r.family.to_string(),
                fmt_f64(r.delta),
                fmt_f64(r.eta),
                fmt_f64(r.theta),
                r.steps.to_string(),
                fmt_f64(r.r_coin),
                fmt_f64(r.r_pos),
                fmt_f64(r.r_joint),
            ]
        })
        .collect();
    Ok(t)
}

fn split_step_notes(t: &mut Table, cfg: &RunConfig, families: &[FamilyName]) {
    if families.contains(&FamilyName::SplitStep) {
        t.note("theta1", cfg.theta1.is_some(), cfg.theta1.map_or("theta".into(), |v| v.to_string()));
        t.note("theta2", cfg.theta2.is_some(), cfg.theta2.map_or("theta".into(), |v| v.to_string()));
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepsRow {
    pub t: usize,
    pub family: &'static str,
    pub r_pos: f64,
    pub r_joint: f64,
    pub support_size: usize,
    /// `|r_pos(directed) − r_pos(standard)|` at this `t`, the same on each family's row.
    pub dqw_dtqw_abs_diff: f64,
}

fn steps_grid(cfg: &RunConfig) -> Vec<usize> {
    cfg.steps.clone().map(|s| s.0).unwrap_or_else(|| (1..=50).collect())
}

/// Position and joint randomness against the number of steps for each family.
/// Rows run t, then family.
pub fn sweep_steps(cfg: &RunConfig) -> Result<Vec<StepsRow>> {
    let families = cfg.family.clone().unwrap_or_else(|| FamilyName::ALL.to_vec());
    let ts = steps_grid(cfg);
    let max_t = ts.iter().copied().max().unwrap_or(0);
    let theta = cfg.first_theta();
    let init = cfg.first_init();
    let mut needed = families.clone();
    for f in [FamilyName::Standard, FamilyName::Directed] {
        if !needed.contains(&f) {
            needed.push(f);
        }
    }
    let trajs: Vec<_> = needed
        .par_iter()
        .map(|&f| evolve_trajectory(&WalkSpec::new(cfg.family_with(f, theta), init, max_t)))
        .collect::<Result<_>>()?;
    let traj_of = |f: FamilyName| &trajs[needed.iter().position(|&g| g == f).expect("family evolved")];
    let mut rows = Vec::with_capacity(ts.len() * families.len());
    for &t in &ts {
        let diff = (position_randomness(&traj_of(FamilyName::Directed)[t])
            - position_randomness(&traj_of(FamilyName::Standard)[t]))
        .abs();
        for &f in &families {
            let joint = traj_of(f)[t].joint_distribution();
            rows.push(StepsRow {
                t,
                family: cfg.family_with(f, theta).name(),
                r_pos: position_randomness(&joint),
                r_joint: joint.entropy(),
                support_size: joint.position().support_size(SUPPORT_EPS),
                dqw_dtqw_abs_diff: diff,
            });
        }
    }
    Ok(rows)
}

pub fn sweep_steps_table(cfg: &RunConfig) -> Result<Table> {
    let rows = sweep_steps(cfg)?;
    let families = cfg.family.clone().unwrap_or_else(|| FamilyName::ALL.to_vec());
    let init = cfg.first_init();
    let mut t = Table::new(
        "sweep-steps",
        &["t", "family", "r_pos", "r_joint", "support_size", "dqw_dtqw_abs_diff"],
    );
    let names: Vec<_> = families.iter().map(|f| cfg.family_with(*f, 0.0).name()).collect();
    t.note("family", cfg.family.is_some(), names.join(", "));
    t.note("theta", cfg.theta.is_some(), cfg.first_theta());
    split_step_notes(&mut t, cfg, &families);
    t.note("loop-count", cfg.loop_count.is_some(), cfg.loop_count.unwrap_or(DEFAULT_DQW_LOOPS));
    t.note("delta", cfg.delta.is_some(), init.delta);
    t.note("eta", cfg.eta.is_some(), init.eta);
    t.note("steps", cfg.steps.is_some(), steps_label(&steps_grid(cfg)));
    t.comments.push(format!("support_size counts positions with probability > {SUPPORT_EPS:e}"));
    t.rows = rows
        .iter()
        .map(|r| {
            vec![
                r.t.to_string(),
                r.family.to_string(),
                fmt_f64(r.r_pos),
                fmt_f64(r.r_joint),
                r.support_size.to_string(),
                fmt_f64(r.dqw_dtqw_abs_diff),
            ]
        })
        .collect();
    Ok(t)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NoiseRow {
    pub t: usize,
    pub p: f64,
    /// Joint measurement randomness of ρ(t).
    pub r: f64,
    /// Von Neumann entropy of ρ(t).
    pub e: f64,
    pub qr: f64,
}

fn noise_grid(cfg: &RunConfig) -> Vec<f64> {
    cfg.noise_p.clone().unwrap_or_else(|| vec![0.0, 0.1, 0.4])
}

/// Randomness split under bit-flip noise. Rows run p, then t.
pub fn noise_scan(cfg: &RunConfig) -> Result<Vec<NoiseRow>> {
    noise_scan_with_cap(cfg, density_cap())
}

pub fn noise_scan_with_cap(cfg: &RunConfig, cap: usize) -> Result<Vec<NoiseRow>> {
    let name = cfg.family.as_ref().and_then(|f| f.first().copied()).unwrap_or(FamilyName::Standard);
    let family = cfg.family_with(name, cfg.first_theta());
    let ts = steps_grid(cfg);
    let max_t = ts.iter().copied().max().unwrap_or(0);
    let init = cfg.first_init();
    let blocks: Vec<Vec<NoiseRow>> = noise_grid(cfg)
        .par_iter()
        .map(|&p| {
            let mut evo = DensityEvolution::new(&WalkSpec::new(family, init, max_t).with_noise(p), cap)?;
            let mut seen = std::collections::BTreeMap::new();
            loop {
                if ts.contains(&evo.t()) {
                    let rep = RandomnessReport::for_density(evo.rho(), p)?;
                    seen.insert(evo.t(), NoiseRow { t: evo.t(), p, r: rep.r_joint, e: rep.e_vn, qr: rep.qr });
                }
                if evo.t() == max_t {
                    break;
                }
                evo.advance()?;
            }
            Ok(ts.iter().map(|t| seen[t]).collect())
        })
        .collect::<Result<_>>()?;
    Ok(blocks.concat())
}

pub fn noise_scan_table(cfg: &RunConfig) -> Result<Table> {
    let rows = noise_scan(cfg)?;
    let init = cfg.first_init();
    let mut t = Table::new("noise-scan", &["t", "p", "R", "E", "QR"]);
    let name = cfg.family.as_ref().and_then(|f| f.first().copied()).unwrap_or(FamilyName::Standard);
    t.note("family", cfg.family.is_some(), cfg.family_with(name, 0.0).name());
    t.note("theta", cfg.theta.is_some(), cfg.first_theta());
    split_step_notes(&mut t, cfg, &[name]);
    t.note("delta", cfg.delta.is_some(), init.delta);
    t.note("eta", cfg.eta.is_some(), init.eta);
    t.note("noise-p", cfg.noise_p.is_some(), list(&noise_grid(cfg)));
    t.note("steps", cfg.steps.is_some(), steps_label(&steps_grid(cfg)));
    t.rows = rows
        .iter()
        .map(|r| vec![r.t.to_string(), fmt_f64(r.p), fmt_f64(r.r), fmt_f64(r.e), fmt_f64(r.qr)])
        .collect();
    Ok(t)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnalyticRow {
    pub delta: f64,
    pub eta: f64,
    pub theta: f64,
    /// Closed-form values: step-1 coin, step-1 position, step-2 coin, step-2 position.
    pub analytic: [f64; 4],
    pub simulated: [f64; 4],
}

impl AnalyticRow {
    pub fn max_deviation(&self) -> f64 {
        self.analytic
            .iter()
            .zip(&self.simulated)
            .map(|(a, s)| (a - s).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyticCheck {
    pub rows: Vec<AnalyticRow>,
    pub max_deviation: f64,
}

fn analytic_axis(v: &Option<Vec<f64>>) -> Vec<f64> {
    v.clone().unwrap_or_else(|| linspace(0.0, FRAC_PI_2, 5))
}

/// Closed-form one- and two-step randomness against simulated walks over a
/// (δ, η, θ) grid.
pub fn verify_analytic(cfg: &RunConfig) -> Result<AnalyticCheck> {
    let (ds, es, ths) = (analytic_axis(&cfg.delta), analytic_axis(&cfg.eta), analytic_axis(&cfg.theta));
    let mut points = Vec::new();
    for &delta in &ds {
        for &eta in &es {
            for &theta in &ths {
                points.push((delta, eta, theta));
            }
        }
    }
    let rows: Vec<AnalyticRow> = points
        .par_iter()
        .map(|&(delta, eta, theta)| {
            let traj = evolve_trajectory(&WalkSpec::standard(theta, InitialState::new(delta, eta), 2))?;
            let (a1c, a1p) = analytic_step1_randomness(delta, eta, theta);
            let (a2c, a2p) = analytic_step2_randomness(delta, eta, theta);
            Ok(AnalyticRow {
                delta,
                eta,
                theta,
                analytic: [a1c, a1p, a2c, a2p],
                simulated: [
                    coin_randomness(&traj[1]),
                    position_randomness(&traj[1]),
                    coin_randomness(&traj[2]),
                    position_randomness(&traj[2]),
                ],
            })
        })
        .collect::<Result<_>>()?;
    let max_deviation = rows.iter().map(AnalyticRow::max_deviation).fold(0.0, f64::max);
    Ok(AnalyticCheck { rows, max_deviation })
}

pub fn analytic_table(cfg: &RunConfig, check: &AnalyticCheck) -> Table {
    let mut t = Table::new(
        "verify-analytic",
        &["delta", "eta", "theta", "r1_coin", "r1_pos", "r2_coin", "r2_pos", "max_abs_dev"],
    );
    t.note("delta", cfg.delta.is_some(), list(&analytic_axis(&cfg.delta)));
    t.note("eta", cfg.eta.is_some(), list(&analytic_axis(&cfg.eta)));
    t.note("theta", cfg.theta.is_some(), list(&analytic_axis(&cfg.theta)));
    t.comments.push(format!("r* columns are closed-form values; tolerance {ANALYTIC_TOL:e}"));
    t.rows = check
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![fmt_f64(r.delta), fmt_f64(r.eta), fmt_f64(r.theta)];
            row.extend(r.analytic.iter().map(|&v| fmt_f64(v)));
            row.push(fmt_f64(r.max_deviation()));
            row
        })
        .collect();
    t
}

/// Resolved generation inputs for `genbits`.
pub fn generation_plan(cfg: &RunConfig) -> Result<(WalkSpec, CommitmentScheme, usize, u64, GenerationMode)> {
    let spec = cfg.walk_spec();
    let scheme = CommitmentScheme::new(
        spec.steps,
        cfg.zero_policy.unwrap_or_default(),
        cfg.include_coin_bit.unwrap_or(false),
    )?;
    Ok((
        spec,
        scheme,
        cfg.rounds.unwrap_or(DEFAULT_ROUNDS),
        cfg.seed.unwrap_or(0),
        cfg.mode.unwrap_or_default(),
    ))
}

/// Path of the battery report written next to a generated stream.
pub fn report_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".tests.csv");
    PathBuf::from(name)
}

/// Where genbits puts the sampled distribution when a battery test fails.
pub fn distribution_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".distribution.csv");
    PathBuf::from(name)
}

/// Detection probabilities with the codeword each position commits to.
pub fn distribution_table(joint: &JointDistribution, scheme: &CommitmentScheme) -> Result<Table> {
    let mut t = Table::new("genbits", &["x", "p_up", "p_down", "codeword"]);
    t.comments.push(format!("t = {}, zero policy {:?}", scheme.t, scheme.zero_policy));
    for (i, [up, down]) in joint.probs().iter().enumerate() {
        let x = joint.offset_min() + i as i64;
        let word = commit_position(x, scheme)?.map_or(String::new(), |w| w.to_string());
        t.rows.push(vec![x.to_string(), fmt_f64(*up), fmt_f64(*down), word]);
    }
    Ok(t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Command {
    SweepDelta,
    SweepSteps,
    NoiseScan,
    VerifyAnalytic,
    Genbits,
    StatTest,
}

/// Runs `cmd`. Tables go to `cfg.out` when set, otherwise to `stdout`;
/// progress and summaries go to `log`. `input` is the stream for `stat-test`.
pub fn execute(
    cmd: Command,
    cfg: &RunConfig,
    input: Option<&Path>,
    stdout: &mut dyn Write,
    log: &mut dyn Write,
) -> Result<()> {
    cfg.validate()?;
    let logln = |log: &mut dyn Write, msg: String| {
        let _ = writeln!(log, "{msg}");
    };
    match cmd {
        Command::SweepDelta => emit(&sweep_delta_table(cfg)?.to_string(), cfg, stdout),
        Command::SweepSteps => emit(&sweep_steps_table(cfg)?.to_string(), cfg, stdout),
        Command::NoiseScan => emit(&noise_scan_table(cfg)?.to_string(), cfg, stdout),
        Command::VerifyAnalytic => {
            let check = verify_analytic(cfg)?;
            emit(&analytic_table(cfg, &check).to_string(), cfg, stdout)?;
            logln(log, format!("max abs deviation: {:e} over {} points", check.max_deviation, check.rows.len()));
            if check.max_deviation > ANALYTIC_TOL || check.max_deviation.is_nan() {
                return Err(QwalkError::Verification(format!(
                    "closed forms deviate from simulation by {:e}",
                    check.max_deviation
                )));
            }
            Ok(())
        }
        Command::Genbits => {
            let out = cfg
                .out
                .as_deref()
                .ok_or_else(|| QwalkError::Config("genbits needs --out".into()))?;
            let (spec, scheme, rounds, seed, mode) = generation_plan(cfg)?;
            let buf = generate_bits(&spec, &scheme, rounds, seed, mode)?;
            buf.write_files(out)?;
            logln(log, format!("wrote {} bits to {}", buf.len(), out.display()));
            match run_battery(&buf.to_vec(), cfg.alpha.unwrap_or(DEFAULT_ALPHA)) {
                Ok(reports) => {
                    let path = report_path(out);
                    let mut text = Vec::new();
                    write_report_csv(&mut text, &reports).map_err(|e| QwalkError::io(&path, e))?;
                    fs::write(&path, text).map_err(|e| QwalkError::io(&path, e))?;
                    for r in &reports {
                        logln(log, format!("{:<16} p = {:.6} {}", r.test, r.p_value, if r.pass { "pass" } else { "FAIL" }));
                    }
                    if reports.iter().any(|r| !r.pass) {
                        let joint = detection_distribution(&spec, &scheme, mode)?;
                        let path = distribution_path(out);
                        fs::write(&path, distribution_table(&joint, &scheme)?.to_string())
                            .map_err(|e| QwalkError::io(&path, e))?;
                        logln(log, format!("detection distribution written to {}", path.display()));
                    }
                    Ok(())
                }
                Err(e) => {
                    logln(log, format!("battery skipped: {e}"));
                    Ok(())
                }
            }
        }
        Command::StatTest => {
            let input = input.ok_or_else(|| QwalkError::Config("stat-test needs an input stream".into()))?;
            let buf = BitBuffer::read_files(input)?;
            let reports = run_battery(&buf.to_vec(), cfg.alpha.unwrap_or(DEFAULT_ALPHA))?;
            let mut text = Vec::new();
            write_report_csv(&mut text, &reports).expect("write to memory");
            emit(&String::from_utf8(text).expect("ascii csv"), cfg, stdout)
        }
    }
}

fn emit(text: &str, cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    match &cfg.out {
        Some(path) => fs::write(path, text).map_err(|e| QwalkError::io(path, e)),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| QwalkError::io("<stdout>", e)),
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::LN_2;

    use super::*;

    #[test]
    fn angles_and_steps_parse() {
        assert_eq!(parse_angle("pi/4").unwrap(), FRAC_PI_4);
        assert_eq!(parse_angle("3*pi/8").unwrap(), 3.0 * PI / 8.0);
        assert_eq!(parse_angle("-pi").unwrap(), -PI);
        assert_eq!(parse_angle("0.25").unwrap(), 0.25);
        assert!(parse_angle("tau").is_err());
        assert_eq!("0,25,50".parse::<StepList>().unwrap().0, vec![0, 25, 50]);
        assert_eq!("1..=3, 7".parse::<StepList>().unwrap().0, vec![1, 2, 3, 7]);
        assert_eq!("1..3".parse::<StepList>().unwrap().0, vec![1, 2]);
        assert!("x".parse::<StepList>().is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = RunConfig::from_json(r#"{"theta": [0.1], "seed": 7, "steps": "1..=4", "zero-policy": "assign_one"}"#)
            .unwrap();
        let flags = RunConfig {
            theta: Some(vec![0.2]),
            ..Default::default()
        };
        let merged = flags.overlay(file);
        assert_eq!(merged.theta, Some(vec![0.2]));
        assert_eq!(merged.seed, Some(7));
        assert_eq!(merged.steps, Some(StepList(vec![1, 2, 3, 4])));
        assert_eq!(merged.zero_policy, Some(ZeroPolicy::AssignOne));
        assert!(RunConfig::from_json(r#"{"thetta": [1]}"#).is_err());
    }

    #[test]
    fn validation() {
        let empty = RunConfig {
            delta: Some(vec![]),
            ..Default::default()
        };
        assert!(matches!(empty.validate(), Err(QwalkError::Config(_))));
        let noisy = RunConfig {
            noise_p: Some(vec![1.5]),
            ..Default::default()
        };
        assert!(matches!(noisy.validate(), Err(QwalkError::NoiseOutOfRange(_))));
        let bad_out = RunConfig {
            out: Some("/no/such/dir/x.csv".into()),
            ..Default::default()
        };
        assert!(bad_out.validate().is_err());
    }

    #[test]
    fn sweep_delta_trivial_rows() {
        let cfg = RunConfig {
            delta: Some(vec![0.0, FRAC_PI_4]),
            steps: Some(StepList(vec![0, 50])),
            ..Default::default()
        };
        let rows = sweep_delta(&cfg).unwrap();
        assert_eq!(rows.len(), 3 * 2 * 2);
        for r in &rows {
            match (r.steps, r.delta == 0.0) {
                (0, true) => assert_eq!((r.r_coin, r.r_pos), (0.0, 0.0)),
                (0, false) => assert!((r.r_coin - LN_2).abs() < 1e-12),
                _ => assert!(r.r_coin > 0.0),
            }
        }
    }

    #[test]
    fn sweep_steps_first_row() {
        let cfg = RunConfig {
            steps: Some(StepList(vec![1, 2])),
            ..Default::default()
        };
        let rows = sweep_steps(&cfg).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!((rows[0].t, rows[0].family), (1, "standard"));
        assert!((rows[0].r_pos - LN_2).abs() < 1e-12);
        assert_eq!(rows[0].support_size, 2);
    }

    #[test]
    fn noise_scan_rows() {
        let cfg = RunConfig {
            steps: Some(StepList(vec![0, 3, 1])),
            noise_p: Some(vec![0.0, 0.3]),
            delta: Some(vec![FRAC_PI_4]),
            ..Default::default()
        };
        let rows = noise_scan_with_cap(&cfg, 10).unwrap();
        assert_eq!(rows.iter().map(|r| r.t).collect::<Vec<_>>(), vec![0, 3, 1, 0, 3, 1]);
        for r in &rows {
            if r.p == 0.0 || r.t == 0 {
                assert_eq!(r.e, 0.0);
                assert_eq!(r.qr, r.r);
            }
        }
        assert!((rows[0].r - LN_2).abs() < 1e-12);
        assert!(matches!(
            noise_scan_with_cap(&cfg, 2),
            Err(QwalkError::DensityCapExceeded { steps: 3, cap: 2 })
        ));
    }

    #[test]
    fn analytic_default_grid() {
        let check = verify_analytic(&RunConfig::default()).unwrap();
        assert_eq!(check.rows.len(), 125);
        assert!(check.max_deviation <= ANALYTIC_TOL);
    }

    #[test]
    fn table_comments_mark_defaults() {
        let cfg = RunConfig {
            theta: Some(vec![FRAC_PI_4]),
            delta: Some(vec![0.0]),
            steps: Some(StepList(vec![0])),
            ..Default::default()
        };
        let text = sweep_delta_table(&cfg).unwrap().to_string();
        assert!(text.contains("# theta = [0.7853981633974483]"));
        assert!(text.contains("# eta (default) = [0]"));
        let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(header, "family,delta,eta,theta,steps,r_coin,r_pos,r_joint");
    }

    #[test]
    fn genbits_requires_out() {
        let mut sink = Vec::new();
        let mut log = Vec::new();
        let err = execute(Command::Genbits, &RunConfig::default(), None, &mut sink, &mut log).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
