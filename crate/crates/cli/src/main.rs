use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gffperc::error::HarnessError;
use gffperc::gff::GffSampler;
use gffperc::harness::{
    estimate_events, level_line_svg, point_seed, replica_rng, sle_hitting_estimate, sweep, write_sweep_csv,
    BcKind, Event, ExperimentConfig, Lambda,
};
use gffperc::lattice::LatticeRect;
use gffperc::limits::{crossing_limit, modulus_for_aspect, SleScheme};
use gffperc::metric::sample_edge_states;
use gffperc::percolation::{first_passage_sets, trace_level_line, write_masks_csv};

#[derive(Parser, Debug)]
#[command(name = "gffperc", version, about = "Level-set percolation experiments for the Gaussian free field")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dump one field, its edge states, first-passage masks and level line.
    Sample(Common),
    /// Estimate the configured events at a single mesh size.
    Estimate(Common),
    /// Estimate the configured events over a list of mesh sizes and write CSV.
    Sweep(Common),
    /// Print the limiting crossing probability and the corner images.
    Limit {
        #[arg(long = "L", default_value_t = 1.0)]
        width: f64,
    },
    /// Hitting probability of the SLE driving diffusion against its closed form.
    Sle {
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        x0: f64,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 1e-4)]
        dt: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Cross-check the fast routines against the reference implementations.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Key-value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "L")]
    width: Option<f64>,
    /// Mesh size, or a comma-separated list; fractions such as 1/32 are accepted.
    #[arg(long)]
    delta: Option<String>,
    /// Boundary height, or LAMBDA0.
    #[arg(long)]
    lambda: Option<String>,
    /// zero or alternating.
    #[arg(long)]
    bc: Option<String>,
    /// Comma-separated events: crossing modes, closed_pivotal, gap.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig, HarnessError> {
        let mut text = match &self.config {
            Some(path) => fs::read_to_string(path)
                .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?,
            None => String::new(),
        };
        let mut set = |key: &str, value: String| text.push_str(&format!("\n{key} = {value}"));
        if let Some(v) = self.width {
            set("L", v.to_string());
        }
        if let Some(v) = &self.delta {
            set("deltas", v.clone());
        }
        if let Some(v) = &self.lambda {
            set("lambda", v.clone());
        }
        if let Some(v) = &self.bc {
            set("bc", v.clone());
        }
        if let Some(v) = &self.mode {
            set("mode", v.clone());
        }
        if let Some(v) = self.samples {
            set("samples", v.to_string());
        }
        if let Some(v) = self.seed {
            set("seed", v.to_string());
        }
        if let Some(v) = self.workers {
            set("workers", v.to_string());
        }
        if let Some(v) = &self.out {
            set("out", v.display().to_string());
        }
        let cfg = ExperimentConfig::parse(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn single_delta(cfg: &ExperimentConfig) -> Result<f64, HarnessError> {
    match cfg.deltas.as_slice() {
        [d] => Ok(*d),
        [] => Err(HarnessError::Config("a mesh size is required (--delta)".into())),
        _ => Err(HarnessError::Config("exactly one mesh size expected".into())),
    }
}

fn describe_lambda(cfg: &ExperimentConfig) -> String {
    match (cfg.bc, cfg.lambda) {
        (BcKind::Zero, _) => "none (zero boundary)".into(),
        (BcKind::Alternating, Lambda::Value(x)) => format!("{x}"),
        (BcKind::Alternating, Lambda::Lambda0(x)) => format!("{x} (LAMBDA0)"),
    }
}

fn run_sample(common: &Common) -> Result<(), HarnessError> {
    let cfg = common.config()?;
    let delta = single_delta(&cfg)?;
    let dir = cfg.out.clone().ok_or_else(|| HarnessError::Config("sample needs --out <directory>".into()))?;
    fs::create_dir_all(&dir)?;
    let lat = LatticeRect::new(cfg.width, delta)?;
    let sampler = GffSampler::new(&lat, cfg.boundary_condition())?;
    let mut rng = replica_rng(point_seed(cfg.seed, delta), 0);
    let field = sampler.sample(&lat, &mut rng);
    let edges = sample_edge_states(&lat, &field, &mut rng)?;
    let create = |name: &str| -> Result<BufWriter<File>, HarnessError> { Ok(BufWriter::new(File::create(dir.join(name))?)) };

    field.write_binary(&lat, create("field.bin")?)?;
    let mut w = csv::Writer::from_writer(create("edges.csv")?);
    w.write_record(["edge", "u", "v", "open"])?;
    for (e, &(u, v)) in lat.edges().iter().enumerate() {
        w.write_record([e.to_string(), u.to_string(), v.to_string(), u8::from(edges.is_open(e)).to_string()])?;
    }
    w.flush()?;
    write_masks_csv(&lat, &first_passage_sets(&lat, &field)?, create("masks.csv")?)?;
    let path = trace_level_line(&lat, &field)?;
    path.write_csv(delta, create("level_line.csv")?)?;
    create("level_line.svg")?.write_all(level_line_svg(&lat, &path).as_bytes())?;
    println!(
        "wrote field.bin, edges.csv, masks.csv, level_line.csv, level_line.svg to {}\n\
         vertices {}, open edges {}/{}, level line {} steps ending on {}",
        dir.display(),
        lat.num_vertices(),
        edges.count_open(),
        lat.num_edges(),
        path.vertices.len() - 1,
        path.terminal
    );
    Ok(())
}

fn run_estimate(common: &Common) -> Result<(), HarnessError> {
    let cfg = common.config()?;
    let delta = single_delta(&cfg)?;
    let result = estimate_events(&cfg, delta, &cfg.events)?;
    println!("L = {}, delta = {delta}, bc = {}, lambda = {}", cfg.width, cfg.bc.name(), describe_lambda(&cfg));
    for (event, est) in &result.estimates {
        println!(
            "{:<16} p_hat = {:.6}  95% CI [{:.6}, {:.6}]  n = {}",
            event.name(),
            est.p_hat,
            est.ci_low,
            est.ci_high,
            est.n
        );
    }
    if cfg.events.contains(&Event::Crossing(gffperc::CrossingMode::DiscreteAlt)) && cfg.bc == BcKind::Alternating {
        println!("continuum limit for L = {}: {:.6}", cfg.width, crossing_limit(cfg.width)?);
    }
    Ok(())
}

fn run_sweep(common: &Common) -> Result<(), HarnessError> {
    let cfg = common.config()?;
    let result = sweep(&cfg)?;
    match &cfg.out {
        Some(path) => {
            let mut buf = Vec::new();
            write_sweep_csv(&cfg, &result, &mut buf)?;
            write_atomic(path, &buf)?;
            eprintln!("lambda = {}; wrote {}", describe_lambda(&cfg), path.display());
        }
        None => write_sweep_csv(&cfg, &result, io::stdout().lock())?,
    }
    Ok(())
}

/// Writes through a sibling temporary file so a failed run leaves no partial table.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    let tmp = path.with_extension("partial");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn run_limit(width: f64) -> Result<(), HarnessError> {
    let images = modulus_for_aspect(width).map_err(|e| HarnessError::Config(e.to_string()))?;
    println!("{:.12}", crossing_limit(width)?);
    println!("k = {:.15}", images.k);
    println!(
        "corner images: a = {:.12}, b = {:.12}, c = {:.12}, d = {:.12}",
        images.ya, images.yb, images.yc, images.yd
    );
    Ok(())
}

fn run_sle(x0: f64, samples: usize, dt: f64, seed: u64, workers: Option<usize>) -> Result<(), HarnessError> {
    let scheme = SleScheme::new(dt).map_err(|e| HarnessError::Config(e.to_string()))?;
    let est = sle_hitting_estimate(x0, scheme, samples, seed, workers)?;
    let analytic = (1.0 + x0) / 2.0;
    println!(
        "x0 = {x0}, dt = {dt}, n = {}: empirical {:.6} (95% CI [{:.6}, {:.6}]), analytic {analytic:.6}",
        est.n, est.p_hat, est.ci_low, est.ci_high
    );
    Ok(())
}

fn run_selftest(seed: u64) -> Result<bool, HarnessError> {
    let checks = gffperc::selftest::run(seed);
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(checks.iter().all(|c| c.passed))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Sample(c) => run_sample(c).map(|_| true),
        Command::Estimate(c) => run_estimate(c).map(|_| true),
        Command::Sweep(c) => run_sweep(c).map(|_| true),
        Command::Limit { width } => run_limit(*width).map(|_| true),
        Command::Sle { x0, samples, dt, seed, workers } => run_sle(*x0, *samples, *dt, *seed, *workers).map(|_| true),
        Command::Selftest { seed } => run_selftest(*seed),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 1 } else { 2 })
        }
    }
}
