//! Experiment configuration, Monte Carlo estimation with Wilson intervals, and
//! δ-sweeps written as CSV.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::HarnessError;
use crate::gff::{BoundaryCondition, GffSampler};
use crate::lattice::LatticeRect;
use crate::limits::SleScheme;
use crate::metric::{sample_edge_states, EdgeStates};
use crate::percolation::{closed_pivotal_exists, discrete_crossing, metric_crossing, CrossingMode, LevelLinePath};

/// Default numeric value of the symbolic `LAMBDA0`: `sqrt(pi / 2)`.
pub const DEFAULT_LAMBDA0: f64 = 1.253_314_137_315_500_3;

/// Two-sided 95% standard normal quantile.
pub const WILSON_Z: f64 = 1.959_963_984_540_054;

/// Environment variable consulted when no worker count is configured.
pub const WORKERS_ENV: &str = "GFFPERC_WORKERS";

pub const MIN_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lambda {
    Value(f64),
    /// The symbolic threshold, carrying its configured numeric value.
    Lambda0(f64),
}

impl Lambda {
    pub fn value(self) -> f64 {
        match self {
            Lambda::Value(x) | Lambda::Lambda0(x) => x,
        }
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lambda::Value(x) => write!(f, "{x}"),
            Lambda::Lambda0(x) => write!(f, "LAMBDA0={x}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcKind {
    Zero,
    Alternating,
}

impl BcKind {
    pub fn name(self) -> &'static str {
        match self {
            BcKind::Zero => "zero",
            BcKind::Alternating => "alternating",
        }
    }

    /// Discrete and metric modes compared by the gap event.
    pub fn gap_modes(self) -> (CrossingMode, CrossingMode) {
        match self {
            BcKind::Zero => (CrossingMode::DiscreteZero, CrossingMode::MetricZero),
            BcKind::Alternating => (CrossingMode::DiscreteAlt, CrossingMode::MetricAlt),
        }
    }
}

impl FromStr for BcKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zero" => Ok(BcKind::Zero),
            "alternating" | "alt" => Ok(BcKind::Alternating),
            other => Err(HarnessError::Config(format!("unknown boundary condition '{other}'"))),
        }
    }
}

/// A Bernoulli event evaluated once per replica.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Event {
    Crossing(CrossingMode),
    /// Some closed edge would create an open LEFT-RIGHT crossing.
    ClosedPivotal,
    /// Discrete crossing without metric crossing, for the modes of the boundary condition.
    Gap,
}

impl Event {
    pub fn name(self) -> &'static str {
        match self {
            Event::Crossing(m) => m.name(),
            Event::ClosedPivotal => "closed_pivotal",
            Event::Gap => "gap",
        }
    }

    fn needs_edges(self) -> bool {
        match self {
            Event::Crossing(m) => m.is_metric(),
            Event::ClosedPivotal | Event::Gap => true,
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Event {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        match key.as_str() {
            "closed_pivotal" | "pivotal" => Ok(Event::ClosedPivotal),
            "gap" | "discrete_minus_metric_gap" => Ok(Event::Gap),
            _ => key.parse::<CrossingMode>().map(Event::Crossing).map_err(HarnessError::Config),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub width: f64,
    pub lambda: Lambda,
    pub bc: BcKind,
    pub events: Vec<Event>,
    pub deltas: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    /// `None` falls back to the environment, then to rayon's default.
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    /// Fill the `seconds` CSV column; off by default so reruns are byte-identical.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            width: 1.0,
            lambda: Lambda::Lambda0(DEFAULT_LAMBDA0),
            bc: BcKind::Alternating,
            events: vec![Event::Crossing(CrossingMode::DiscreteAlt)],
            deltas: Vec::new(),
            samples: 1000,
            seed: 0,
            workers: None,
            out: None,
            timing: false,
        }
    }
}

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

/// Parses a positive number, accepting fractions such as `1/32`.
pub fn parse_number(s: &str) -> Result<f64, HarnessError> {
    let s = s.trim();
    let parsed = match s.split_once('/') {
        Some((num, den)) => num
            .trim()
            .parse::<f64>()
            .ok()
            .zip(den.trim().parse::<f64>().ok())
            .map(|(n, d)| n / d),
        None => s.parse::<f64>().ok(),
    };
    parsed.filter(|x| x.is_finite()).ok_or_else(|| config_err(format!("not a number: '{s}'")))
}

fn parse_list<T>(s: &str, item: impl Fn(&str) -> Result<T, HarnessError>) -> Result<Vec<T>, HarnessError> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(item).collect()
}

fn parse_bool(s: &str) -> Result<bool, HarnessError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        other => Err(config_err(format!("not a boolean: '{other}'"))),
    }
}

impl ExperimentConfig {
    /// Parses `key = value` lines; `#` starts a comment. Later keys override earlier ones.
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut cfg = Self::default();
        let mut lambda_symbolic = matches!(cfg.lambda, Lambda::Lambda0(_));
        let mut lambda0 = DEFAULT_LAMBDA0;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected 'key = value'", lineno + 1)))?;
            let value = value.trim();
            match key.trim() {
                "L" => cfg.width = parse_number(value)?,
                "lambda" => {
                    if value.eq_ignore_ascii_case("LAMBDA0") {
                        lambda_symbolic = true;
                    } else {
                        lambda_symbolic = false;
                        cfg.lambda = Lambda::Value(parse_number(value)?);
                    }
                }
                "lambda0" => lambda0 = parse_number(value)?,
                "bc" => cfg.bc = value.parse()?,
                "mode" => cfg.events = parse_list(value, str::parse)?,
                "deltas" => cfg.deltas = parse_list(value, parse_number)?,
                "samples" => {
                    cfg.samples = value.parse().map_err(|_| config_err(format!("bad sample count '{value}'")))?
                }
                "seed" => cfg.seed = value.parse().map_err(|_| config_err(format!("bad seed '{value}'")))?,
                "workers" => {
                    cfg.workers = Some(value.parse().map_err(|_| config_err(format!("bad worker count '{value}'")))?)
                }
                "out" => cfg.out = Some(PathBuf::from(value)),
                "timing" => cfg.timing = parse_bool(value)?,
                other => return Err(config_err(format!("line {}: unknown key '{other}'", lineno + 1))),
            }
        }
        if lambda_symbolic {
            cfg.lambda = Lambda::Lambda0(lambda0);
        }
        Ok(cfg)
    }

    pub fn boundary_condition(&self) -> BoundaryCondition {
        match self.bc {
            BcKind::Zero => BoundaryCondition::Zero,
            BcKind::Alternating => BoundaryCondition::Alternating(self.lambda.value()),
        }
    }

    /// Checks every field except the δ count, which only `sweep` constrains.
    pub fn validate(&self) -> Result<(), HarnessError> {
        if !(self.width.is_finite() && self.width > 0.0) {
            return Err(config_err(format!("L must be positive, got {}", self.width)));
        }
        if self.bc == BcKind::Alternating && (self.lambda.value().is_nan() || self.lambda.value() <= 0.0) {
            return Err(config_err(format!("lambda must be positive, got {}", self.lambda.value())));
        }
        if self.samples < MIN_SAMPLES {
            return Err(config_err(format!("samples must be at least {MIN_SAMPLES}, got {}", self.samples)));
        }
        if self.events.is_empty() {
            return Err(config_err("no events configured"));
        }
        if self.workers == Some(0) {
            return Err(config_err("workers must be positive"));
        }
        for &d in &self.deltas {
            LatticeRect::new(self.width, d)?;
        }
        Ok(())
    }

    /// Configured worker count, else `GFFPERC_WORKERS`, else `None`.
    pub fn resolved_workers(&self) -> Result<Option<usize>, HarnessError> {
        if let Some(w) = self.workers {
            return Ok(Some(w));
        }
        match std::env::var(WORKERS_ENV) {
            Ok(v) => match v.trim().parse::<usize>() {
                Ok(w) if w > 0 => Ok(Some(w)),
                _ => Err(config_err(format!("{WORKERS_ENV} must be a positive integer, got '{v}'"))),
            },
            Err(_) => Ok(None),
        }
    }
}

/// Wilson score interval for `successes` out of `n` at the given normal quantile.
pub fn wilson(successes: u64, n: u64, z: f64) -> (f64, f64) {
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let low = (centre - half).clamp(0.0, 1.0).min(p);
    let high = (centre + half).clamp(0.0, 1.0).max(p);
    (low, high)
}

/// A proportion with its 95% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub p_hat: f64,
    pub n: u64,
    pub successes: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    pub seconds: f64,
}

impl Estimate {
    pub fn from_counts(successes: u64, n: u64, seed: u64, seconds: f64) -> Self {
        let (ci_low, ci_high) = wilson(successes, n, WILSON_Z);
        Self { p_hat: successes as f64 / n as f64, n, successes, ci_low, ci_high, seed, seconds }
    }

    /// Binomial standard error at `p_hat`.
    pub fn standard_error(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.n as f64).sqrt()
    }

    pub fn contains(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }
}

/// Outcome of one δ point: an estimate per event plus the sanity counters.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub delta: f64,
    pub estimates: Vec<(Event, Estimate)>,
    /// Replicas where a metric crossing occurred without the discrete one.
    pub inclusion_violations: u64,
    /// Open edges with a boundary endpoint, summed over replicas; zero-boundary only.
    pub boundary_opens: u64,
}

impl PointResult {
    pub fn estimate(&self, event: Event) -> Option<&Estimate> {
        self.estimates.iter().find(|(e, _)| *e == event).map(|(_, est)| est)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Tally {
    hits: Vec<u64>,
    violations: u64,
    boundary_opens: u64,
}

impl Tally {
    fn zero(k: usize) -> Self {
        Self { hits: vec![0; k], violations: 0, boundary_opens: 0 }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.hits.iter_mut().zip(other.hits) {
            *a += b;
        }
        self.violations += other.violations;
        self.boundary_opens += other.boundary_opens;
        self
    }
}

/// Seed of the replica streams at one δ, mixed from the base seed.
pub fn point_seed(base: u64, delta: f64) -> u64 {
    let mut z = (base ^ delta.to_bits()).wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Replica `r`'s generator: one ChaCha stream per replica.
pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

/// Runs `f` in a pool of the given size, or in the global pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    match workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| HarnessError::Config(format!("cannot start {w} workers: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

struct PointContext<'a> {
    lat: LatticeRect,
    sampler: GffSampler,
    events: &'a [Event],
    bc: BcKind,
    seed: u64,
    needs_edges: bool,
}

impl PointContext<'_> {
    fn replica(&self, r: u64) -> Result<Tally, HarnessError> {
        let lat = &self.lat;
        let mut rng = replica_rng(self.seed, r);
        let field = self.sampler.sample(lat, &mut rng);
        let edges: Option<EdgeStates> =
            if self.needs_edges { Some(sample_edge_states(lat, &field, &mut rng)?) } else { None };
        let mut tally = Tally::zero(self.events.len());
        let mut cache: [Option<bool>; 4] = [None; 4];
        let mut crossing = |mode: CrossingMode| -> Result<bool, HarnessError> {
            let slot = &mut cache[mode as usize];
            if let Some(c) = *slot {
                return Ok(c);
            }
            let c = if mode.is_metric() {
                metric_crossing(lat, edges.as_ref().expect("edge states sampled"), mode)?
            } else {
                discrete_crossing(lat, &field, mode)?
            };
            *slot = Some(c);
            Ok(c)
        };
        for (k, &event) in self.events.iter().enumerate() {
            let hit = match event {
                Event::Crossing(mode) => crossing(mode)?,
                Event::ClosedPivotal => closed_pivotal_exists(lat, edges.as_ref().expect("edge states sampled"))?.0,
                Event::Gap => {
                    let (d, m) = self.bc.gap_modes();
                    crossing(d)? && !crossing(m)?
                }
            };
            tally.hits[k] = u64::from(hit);
        }
        if let Some(edges) = &edges {
            for (d, m) in [BcKind::Zero.gap_modes(), BcKind::Alternating.gap_modes()] {
                if crossing(m)? && !crossing(d)? {
                    tally.violations += 1;
                }
            }
            if self.bc == BcKind::Zero {
                tally.boundary_opens = lat
                    .edges()
                    .iter()
                    .enumerate()
                    .filter(|&(e, &(u, v))| edges.is_open(e) && (lat.is_boundary(u) || lat.is_boundary(v)))
                    .count() as u64;
            }
        }
        Ok(tally)
    }
}

/// Estimates every event at mesh `delta` on coupled replicas: all events of a
/// replica see the same field and the same edge states.
///
/// Fails with [`HarnessError::Invariant`] if any replica has a metric crossing
/// without the corresponding discrete one, or, under zero boundary values, an
/// open boundary edge. No estimate is returned in that case.
pub fn estimate_events(config: &ExperimentConfig, delta: f64, events: &[Event]) -> Result<PointResult, HarnessError> {
    config.validate()?;
    if events.is_empty() {
        return Err(config_err("no events requested"));
    }
    let start = Instant::now();
    let lat = LatticeRect::new(config.width, delta)?;
    let sampler = GffSampler::new(&lat, config.boundary_condition())?;
    let seed = point_seed(config.seed, delta);
    let ctx = PointContext {
        lat,
        sampler,
        events,
        bc: config.bc,
        seed,
        needs_edges: events.iter().any(|e| e.needs_edges()),
    };
    let n = config.samples as u64;
    let k = events.len();
    let tally = with_workers(config.resolved_workers()?, || {
        (0..n)
            .into_par_iter()
            .map(|r| ctx.replica(r))
            .try_reduce(|| Tally::zero(k), |a, b| Ok(a.merge(b)))
    })??;
    if tally.violations > 0 {
        return Err(HarnessError::Invariant(format!(
            "{} replicas at delta = {delta} had a metric crossing without the discrete one",
            tally.violations
        )));
    }
    if tally.boundary_opens > 0 {
        return Err(HarnessError::Invariant(format!(
            "{} boundary edges opened under zero boundary values at delta = {delta}",
            tally.boundary_opens
        )));
    }
    let seconds = start.elapsed().as_secs_f64();
    let estimates = events
        .iter()
        .zip(&tally.hits)
        .map(|(&e, &h)| (e, Estimate::from_counts(h, n, config.seed, seconds)))
        .collect();
    Ok(PointResult { delta, estimates, inclusion_violations: tally.violations, boundary_opens: tally.boundary_opens })
}

pub fn estimate_event(config: &ExperimentConfig, delta: f64, event: Event) -> Result<Estimate, HarnessError> {
    Ok(estimate_events(config, delta, &[event])?.estimates[0].1)
}

/// Per-event trend diagnostics over a sweep, δ ordered from coarse to fine.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendSummary {
    pub event: Event,
    /// Least-squares slope of `log p_hat` against `log log(1/δ)`; NaN if some
    /// `p_hat` is zero or fewer than two δ have `δ < 1`.
    pub loglog_slope: f64,
    /// Point estimates strictly decrease as δ decreases.
    pub strictly_decreasing: bool,
    /// The finest point's interval lies entirely below the coarsest one's.
    pub separated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<PointResult>,
    pub summaries: Vec<TrendSummary>,
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub fn trend_summary(event: Event, points: &[(f64, Estimate)]) -> TrendSummary {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| b.0.total_cmp(&a.0));
    let usable: Vec<_> = pts.iter().filter(|(d, e)| *d < 1.0 && e.p_hat > 0.0).collect();
    let loglog_slope = if usable.len() == pts.len() && usable.len() >= 2 {
        let xs: Vec<f64> = usable.iter().map(|(d, _)| (1.0 / d).ln().ln()).collect();
        let ys: Vec<f64> = usable.iter().map(|(_, e)| e.p_hat.ln()).collect();
        least_squares_slope(&xs, &ys)
    } else {
        f64::NAN
    };
    let strictly_decreasing = pts.windows(2).all(|w| w[1].1.p_hat < w[0].1.p_hat);
    let separated = match (pts.first(), pts.last()) {
        (Some(first), Some(last)) if pts.len() >= 2 => last.1.ci_high < first.1.ci_low,
        _ => false,
    };
    TrendSummary { event, loglog_slope, strictly_decreasing, separated }
}

/// Estimates all configured events at each δ (in the given order) and the
/// per-event trend summaries. Requires at least three δ values.
pub fn sweep(config: &ExperimentConfig) -> Result<SweepResult, HarnessError> {
    if config.deltas.len() < 3 {
        return Err(config_err(format!("sweep needs at least 3 delta values, got {}", config.deltas.len())));
    }
    config.validate()?;
    let points = config
        .deltas
        .iter()
        .map(|&d| estimate_events(config, d, &config.events))
        .collect::<Result<Vec<_>, _>>()?;
    let summaries = config
        .events
        .iter()
        .map(|&ev| {
            let series: Vec<_> = points.iter().map(|p| (p.delta, *p.estimate(ev).expect("event estimated"))).collect();
            trend_summary(ev, &series)
        })
        .collect();
    Ok(SweepResult { points, summaries })
}

pub const CSV_HEADER: [&str; 11] =
    ["L", "lambda", "bc", "event", "delta", "n", "p_hat", "ci_low", "ci_high", "seed", "seconds"];

/// Writes the sweep table: one row per (δ, event), then per event a
/// `<event>/loglog_slope` row and a `<event>/strictly_decreasing` row whose
/// value sits in the `p_hat` column.
pub fn write_sweep_csv<W: Write>(config: &ExperimentConfig, result: &SweepResult, w: W) -> Result<(), HarnessError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    let width = config.width.to_string();
    let lambda = match config.bc {
        BcKind::Zero => String::new(),
        BcKind::Alternating => config.lambda.value().to_string(),
    };
    let bc = config.bc.name();
    for point in &result.points {
        for (event, est) in &point.estimates {
            let seconds = if config.timing { format!("{:.3}", est.seconds) } else { String::new() };
            out.write_record([
                width.clone(),
                lambda.clone(),
                bc.to_string(),
                event.name().to_string(),
                point.delta.to_string(),
                est.n.to_string(),
                est.p_hat.to_string(),
                est.ci_low.to_string(),
                est.ci_high.to_string(),
                est.seed.to_string(),
                seconds,
            ])?;
        }
    }
    let total: u64 = result.points.iter().filter_map(|p| p.estimates.first()).map(|(_, e)| e.n).sum();
    for s in &result.summaries {
        for (label, value) in [
            ("loglog_slope", s.loglog_slope.to_string()),
            ("strictly_decreasing", u8::from(s.strictly_decreasing).to_string()),
        ] {
            out.write_record([
                width.clone(),
                lambda.clone(),
                bc.to_string(),
                format!("{}/{label}", s.event.name()),
                String::new(),
                total.to_string(),
                value,
                String::new(),
                String::new(),
                config.seed.to_string(),
                String::new(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Hitting side of the SLE driving diffusion from `x0`, as a proportion of
/// paths absorbed at `+1`, run in parallel with one stream per path.
pub fn sle_hitting_estimate(
    x0: f64,
    scheme: SleScheme,
    samples: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<Estimate, HarnessError> {
    if !(x0 > -1.0 && x0 < 1.0) {
        return Err(config_err(format!("x0 must lie in (-1, 1), got {x0}")));
    }
    if samples < MIN_SAMPLES {
        return Err(config_err(format!("samples must be at least {MIN_SAMPLES}, got {samples}")));
    }
    let start = Instant::now();
    let hits: u64 = with_workers(workers, || {
        (0..samples as u64)
            .into_par_iter()
            .map(|r| u64::from(scheme.hit(x0, &mut replica_rng(seed, r)).0 == Some(1.0)))
            .sum()
    })?;
    Ok(Estimate::from_counts(hits, samples as u64, seed, start.elapsed().as_secs_f64()))
}

/// Coupled estimates at steps `dt` and `dt / 2` on shared Brownian increments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledSleEstimate {
    pub coarse: Estimate,
    pub fine: Estimate,
    /// Paths whose absorbing side differs between the two steps.
    pub discordant: u64,
}

pub fn sle_hitting_coupled(
    x0: f64,
    scheme: SleScheme,
    samples: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<CoupledSleEstimate, HarnessError> {
    if !(x0 > -1.0 && x0 < 1.0) {
        return Err(config_err(format!("x0 must lie in (-1, 1), got {x0}")));
    }
    let start = Instant::now();
    let (c, f, d) = with_workers(workers, || {
        (0..samples as u64)
            .into_par_iter()
            .map(|r| {
                let (c, f) = scheme.hit_coupled(x0, &mut replica_rng(seed, r));
                let (c, f) = (c == Some(1.0), f == Some(1.0));
                (u64::from(c), u64::from(f), u64::from(c != f))
            })
            .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2))
    })?;
    let secs = start.elapsed().as_secs_f64();
    let n = samples as u64;
    Ok(CoupledSleEstimate {
        coarse: Estimate::from_counts(c, n, seed, secs),
        fine: Estimate::from_counts(f, n, seed, secs),
        discordant: d,
    })
}

/// Raw SVG with the rectangle outline and the level line as a polyline.
pub fn level_line_svg(lat: &LatticeRect, path: &LevelLinePath) -> String {
    let scale = 400.0;
    let (w, h) = (lat.width() * scale, scale);
    let pts: Vec<String> = path
        .points(lat.delta())
        .into_iter()
        .map(|(x, y)| format!("{:.3},{:.3}", x * scale, h - y * scale))
        .collect();
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.3} {h:.3}\">\n\
         <rect x=\"0\" y=\"0\" width=\"{w:.3}\" height=\"{h:.3}\" fill=\"none\" stroke=\"black\"/>\n\
         <polyline fill=\"none\" stroke=\"red\" points=\"{}\"/>\n</svg>\n",
        pts.join(" ")
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_config_text() {
        let cfg = ExperimentConfig::parse(
            "# sweep\nL = 2\nlambda = LAMBDA0\nlambda0 = 1.5\nbc = zero\nmode = metric_zero, discrete-zero, gap\n\
             deltas = 1/8, 0.0625 ,1/32\nsamples = 200\nseed = 7 # trailing\nworkers = 2\nout = x.csv\ntiming = yes\n",
        )
        .unwrap();
        assert_eq!(cfg.width, 2.0);
        assert_eq!(cfg.lambda, Lambda::Lambda0(1.5));
        assert_eq!(cfg.bc, BcKind::Zero);
        assert_eq!(
            cfg.events,
            vec![Event::Crossing(CrossingMode::MetricZero), Event::Crossing(CrossingMode::DiscreteZero), Event::Gap]
        );
        assert_eq!(cfg.deltas, vec![0.125, 0.0625, 0.03125]);
        assert_eq!((cfg.samples, cfg.seed, cfg.workers), (200, 7, Some(2)));
        assert_eq!(cfg.out, Some(PathBuf::from("x.csv")));
        assert!(cfg.timing);
        cfg.validate().unwrap();
    }

    #[test]
    fn numeric_lambda_and_defaults() {
        let cfg = ExperimentConfig::parse("lambda = 0.75").unwrap();
        assert_eq!(cfg.lambda, Lambda::Value(0.75));
        let cfg = ExperimentConfig::parse("").unwrap();
        assert_eq!(cfg.lambda, Lambda::Lambda0(DEFAULT_LAMBDA0));
        assert!((DEFAULT_LAMBDA0 - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_config() {
        for text in ["foo = 1", "L 2", "samples = 99\nmode=gap", "deltas = 1/2", "mode = sideways", "bc = periodic", "workers = 0"] {
            let parsed = ExperimentConfig::parse(text).and_then(|c| c.validate().map(|_| c));
            assert!(matches!(parsed, Err(HarnessError::Config(_)) | Err(HarnessError::Lattice(_))), "{text}");
        }
    }

    #[test]
    fn wilson_properties() {
        for n in [10u64, 100, 1000] {
            for s in 0..=n {
                let (lo, hi) = wilson(s, n, WILSON_Z);
                let p = s as f64 / n as f64;
                assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
            }
        }
        let (l1, h1) = wilson(300, 1000, WILSON_Z);
        let (l2, h2) = wilson(600, 2000, WILSON_Z);
        let ratio = (h1 - l1) / (h2 - l2);
        assert!((ratio - 2f64.sqrt()).abs() < 0.01);
        let (lo, hi) = wilson(5, 10, WILSON_Z);
        assert!((lo - 0.236_593).abs() < 1e-5 && (hi - 0.763_407).abs() < 1e-5);
    }

    #[test]
    fn sweep_needs_three_deltas() {
        let cfg = ExperimentConfig { deltas: vec![0.25, 0.125], samples: 100, ..Default::default() };
        assert!(matches!(sweep(&cfg), Err(HarnessError::Config(_))));
        let cfg = ExperimentConfig { deltas: vec![], samples: 100, ..Default::default() };
        assert!(matches!(sweep(&cfg), Err(HarnessError::Config(_))));
    }

    #[test]
    fn trend_summary_flags() {
        let est = |s| Estimate::from_counts(s, 1000, 0, 0.0);
        let pts = vec![(0.25, est(600)), (0.125, est(500)), (0.0625, est(400))];
        let s = trend_summary(Event::Gap, &pts);
        assert!(s.strictly_decreasing && s.separated && s.loglog_slope < 0.0);
        let pts = vec![(0.25, est(600)), (0.125, est(610)), (0.0625, est(0))];
        let s = trend_summary(Event::Gap, &pts);
        assert!(!s.strictly_decreasing && s.loglog_slope.is_nan());
    }

    #[test]
    fn point_seeds_differ() {
        assert_ne!(point_seed(1, 0.125), point_seed(1, 0.0625));
        assert_ne!(point_seed(1, 0.125), point_seed(2, 0.125));
    }

    #[test]
    fn svg_contains_polyline() {
        let lat = LatticeRect::new(1.0, 0.25).unwrap();
        let path = LevelLinePath {
            vertices: vec![
                crate::percolation::DualVertex { p: 0, q: 1 },
                crate::percolation::DualVertex { p: 1, q: 1 },
            ],
            terminal: crate::lattice::Arc::Right,
        };
        let svg = level_line_svg(&lat, &path);
        assert!(svg.starts_with("<svg") && svg.contains("points=\"0.000,250.000 150.000,250.000\""));
    }
}
