use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rbf_ols::demos::{run_demo, DemoName};
use rbf_ols::feedback::{
    default_grid_size, jacobian_eigenvalues, nyquist_q, oscillation_slope_bound, rms, simulate_recording,
    stability_margin, AnalysisReport, CoefficientPerturbation, DisturbanceSchedule, FeedbackSystem, FirFilter,
    LinearMap, LoopState, NoiseWindow, ScalarMap,
};
use rbf_ols::io::write_atomic;
use rbf_ols::numerics::{linspace, seeded_uniform};
use rbf_ols::trainer::{CandidateGrid, StopReason};
use rbf_ols::{train, BasisKind, Error, RbfNetwork, Result, TrainerConfig, TrainingSet};

/// Fit RBF networks to values and derivatives; simulate and analyze feedback loops.
#[derive(Parser)]
#[command(name = "rbf-ols", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a network on an `x,t[,d1,...]` CSV.
    Fit(FitArgs),
    /// Evaluate a network or one of its derivatives.
    Eval(EvalArgs),
    /// Run the feedback loop and write its trace.
    Simulate(SimulateArgs),
    /// Nyquist crossing, stability margin or Jacobian roots as JSON.
    Analyze(AnalyzeArgs),
    /// Write the data behind one of the reference experiments.
    Demo(DemoArgs),
}

#[derive(Args)]
struct FitArgs {
    data: PathBuf,
    /// Channel weights, one per column after `x`.
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    #[arg(long)]
    max_units: Option<usize>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// `data` for data-only centers, or the number of uniform grid points.
    #[arg(long)]
    grid: Option<String>,
    /// `cubic` or `gaussian:WIDTH`.
    #[arg(long, default_value = "cubic")]
    basis: String,
    #[arg(long)]
    out: PathBuf,
    /// Defaults to the model path with a `.report.json` suffix.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    model: PathBuf,
    /// One input per line.
    #[arg(long, conflicts_with = "range", required_unless_present = "range")]
    points: Option<PathBuf>,
    /// `lo:hi:n`.
    #[arg(long)]
    range: Option<String>,
    #[arg(long, default_value_t = 0)]
    order: usize,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, conflicts_with = "linear_slope", required_unless_present = "linear_slope")]
    model: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    linear_slope: Option<f64>,
    /// Delay length.
    #[arg(long = "L", short = 'L')]
    delay: usize,
    /// `b1,b2`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    filter: Option<Vec<f64>>,
    /// A file with `L` delay-line samples (first one played first), or `random:lo,hi`.
    #[arg(long, allow_hyphen_values = true)]
    init: String,
    #[arg(long)]
    steps: usize,
    /// `start:end:snr_db`.
    #[arg(long)]
    noise: Option<String>,
    /// `start:end:bound`.
    #[arg(long)]
    perturb: Option<String>,
    /// RMS the SNR refers to; defaults to the RMS of the initial delay line.
    #[arg(long)]
    reference_rms: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the state vector before each step.
    #[arg(long)]
    states: bool,
    /// Trace CSV; events go next to it with an `.events.json` suffix.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct AnalyzeMode {
    /// `b1,b2,L`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    nyquist: Option<Vec<f64>>,
    /// `L,b1,b2`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    margin: Option<Vec<f64>>,
    /// `L,b1,b2,d`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    roots: Option<Vec<f64>>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    mode: AnalyzeMode,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DemoArgs {
    name: String,
    /// Output directory; defaults to `demo-<name>`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
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
    let result = match cli.command {
        Command::Fit(a) => fit(a),
        Command::Eval(a) => eval(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Analyze(a) => analyze(a),
        Command::Demo(a) => demo(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn parse_basis(s: &str) -> Result<BasisKind> {
    match s.split_once(':') {
        None if s == "cubic" => Ok(BasisKind::Cubic),
        None if s == "gaussian" => BasisKind::gaussian(1.0),
        Some(("gaussian", w)) => BasisKind::gaussian(w.parse().map_err(|_| invalid(format!("bad width '{w}'")))?),
        _ => Err(invalid(format!("unknown basis '{s}' (use cubic or gaussian:WIDTH)"))),
    }
}

fn parse_fields<const N: usize>(s: &str, what: &str) -> Result<[f64; N]> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || invalid(format!("{what} must have {N} ':'-separated numbers, got '{s}'"));
    if parts.len() != N {
        return Err(bad());
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.trim().parse().map_err(|_| bad())?;
    }
    Ok(out)
}

fn as_index(v: f64, what: &str) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 && v.is_finite() {
        Ok(v as usize)
    } else {
        Err(invalid(format!("{what} must be a nonnegative integer, got {v}")))
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn read_values(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) => out.push(v),
            // a header line is allowed
            Err(_) if i == 0 => {}
            Err(_) => return Err(Error::Parse { line: i as u64 + 1, message: format!("not a number: '{line}'") }),
        }
    }
    Ok(out)
}

fn fit(a: FitArgs) -> Result<()> {
    let data = TrainingSet::from_csv_reader(std::fs::File::open(&a.data)?)?;
    let mut cfg = TrainerConfig::for_training_set(&data).with_tolerance(a.tol);
    if let Some(lambda) = a.lambda {
        cfg = cfg.with_lambda(lambda);
    }
    match a.grid.as_deref() {
        None => {}
        Some("data") => cfg = cfg.with_grid(CandidateGrid::data_only()),
        Some(n) => {
            let n: usize = n.parse().map_err(|_| invalid(format!("--grid takes 'data' or a count, got '{n}'")))?;
            cfg = cfg.with_grid(CandidateGrid::uniform(n));
        }
    }
    if let Some(h) = a.max_units {
        cfg = cfg.with_max_units(h);
    }
    let (net, report) = train(&data, &cfg, parse_basis(&a.basis)?)?;
    write_atomic(&a.out, net.to_json()? + "\n")?;
    let report_path = a.report.unwrap_or_else(|| with_suffix(&a.out, ".report.json"));
    write_atomic(&report_path, report.to_json()? + "\n")?;
    if report.stopped_reason == StopReason::CandidatesExhausted {
        eprintln!("note: candidates exhausted before reaching the tolerance");
    }
    eprintln!(
        "{} units, combined rms {:e}, {:?}",
        net.units(),
        report.final_rms().unwrap_or(f64::NAN),
        report.stopped_reason
    );
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let net = RbfNetwork::from_json(&std::fs::read_to_string(&a.model)?)?;
    net.basis().check_order(a.order)?;
    let xs = match (&a.points, &a.range) {
        (Some(p), _) => read_values(p)?,
        (None, Some(r)) => {
            let [lo, hi, n] = parse_fields::<3>(r, "--range")?;
            let n = as_index(n, "range count")?;
            if n == 0 {
                return Err(invalid("--range needs at least one point"));
            }
            linspace(lo, hi, n)
        }
        (None, None) => unreachable!("clap requires one input source"),
    };
    let header = if a.order == 0 { "x,f".to_string() } else { format!("x,f{}", a.order) };
    let mut out = header + "\n";
    for x in xs {
        out.push_str(&format!("{x},{}\n", net.eval_derivative(x, a.order)?));
    }
    match a.out {
        Some(p) => write_atomic(p, out),
        None => {
            print!("{out}");
            Ok(())
        }
    }
}

fn simulate_cmd(a: SimulateArgs) -> Result<()> {
    let map: Box<dyn ScalarMap> = match (&a.model, a.linear_slope) {
        (Some(p), _) => Box::new(RbfNetwork::from_json(&std::fs::read_to_string(p)?)?),
        (None, Some(d)) => Box::new(LinearMap(d)),
        (None, None) => unreachable!("clap requires one map source"),
    };
    let filter = match a.filter.as_deref() {
        None => None,
        Some([b1, b2]) => Some(FirFilter::new(*b1, *b2)?),
        Some(_) => return Err(invalid("--filter takes b1,b2")),
    };
    let sys = FeedbackSystem::new(a.delay, filter, map)?;
    let samples = match a.init.strip_prefix("random:") {
        Some(range) => {
            let (lo, hi) = range.split_once(',').ok_or_else(|| invalid("--init random:lo,hi"))?;
            let lo: f64 = lo.parse().map_err(|_| invalid("bad random init bounds"))?;
            let hi: f64 = hi.parse().map_err(|_| invalid("bad random init bounds"))?;
            seeded_uniform(a.seed, lo, hi, a.delay)?
        }
        None => read_values(Path::new(&a.init))?,
    };
    if samples.len() != a.delay {
        return Err(invalid(format!("init has {} samples, the delay line holds {}", samples.len(), a.delay)));
    }
    let init = LoopState::from_delay_line(&samples)?;

    let reference_rms = a.reference_rms.unwrap_or_else(|| rms(&samples));
    let mut dist = DisturbanceSchedule::none();
    if let Some(n) = &a.noise {
        let [s, e, snr] = parse_fields::<3>(n, "--noise")?;
        dist.noise = Some(NoiseWindow {
            start: as_index(s, "noise start")?,
            end: as_index(e, "noise end")?,
            snr_db: snr,
            seed: a.seed,
            reference_rms,
        });
    }
    if let Some(p) = &a.perturb {
        let [s, e, bound] = parse_fields::<3>(p, "--perturb")?;
        dist.coeff_perturb = Some(CoefficientPerturbation {
            start: as_index(s, "perturbation start")?,
            end: as_index(e, "perturbation end")?,
            bound,
            // distinct stream from the noise
            seed: a.seed.wrapping_add(1),
        });
    }
    let trace = simulate_recording(&sys, &init, a.steps, &dist, a.states)?;
    write_atomic(&a.out, trace.to_csv())?;
    write_atomic(with_suffix(&a.out, ".events.json"), trace.events_json()? + "\n")
}

fn analyze(a: AnalyzeArgs) -> Result<()> {
    let m = a.mode;
    let mut report = AnalysisReport::default();
    if let Some(v) = m.nyquist {
        let [b1, b2, l] = v[..].try_into().map_err(|_| invalid("--nyquist takes b1,b2,L"))?;
        let l = as_index(l, "L")?;
        let q = nyquist_q(b1, b2, l, default_grid_size(l), 1e-12)?;
        report.q = Some(q);
        report.slope_bound = Some(oscillation_slope_bound(q)?);
    } else if let Some(v) = m.margin {
        let [l, b1, b2] = v[..].try_into().map_err(|_| invalid("--margin takes L,b1,b2"))?;
        report.d_star = Some(stability_margin(as_index(l, "L")?, b1, b2, 1e-10)?.d_star);
    } else if let Some(v) = m.roots {
        let [l, b1, b2, d] = v[..].try_into().map_err(|_| invalid("--roots takes L,b1,b2,d"))?;
        report.roots = Some(jacobian_eigenvalues(as_index(l, "L")?, b1, b2, d)?);
    }
    let json = serde_json::to_string_pretty(&report)? + "\n";
    match a.out {
        Some(p) => write_atomic(p, json),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn demo(a: DemoArgs) -> Result<()> {
    let name: DemoName = a.name.parse()?;
    let dir = a.out.unwrap_or_else(|| PathBuf::from(format!("demo-{name}")));
    let output = run_demo(name, a.seed)?;
    output.write_to(&dir)?;
    eprintln!("wrote {} files to {}", output.files.len() + 1, dir.display());
    Ok(())
}
