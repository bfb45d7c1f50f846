use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use pdembed::bounded::{rho3_linear_slope, step_heights, DenseLayout, DEFAULT_DENSE_CAP};
use pdembed::inject::DEFAULT_ANGLE_TOLERANCE;
use pdembed::io;
use pdembed::verify::{run_checks, CheckConfig, CheckReport};
use pdembed::{
    bottleneck_distance, certified_distance, injective_embed, non_injectivity_witness, phi3, phi_scale,
    reconstruct, rho3_linear, rho3_steps, rho_minus, rho_minus_improved, uniform_spec, AnchorSet, BoundedSpec,
    Diagram, Error, Schedule, ScheduleKind,
};

mod exit;

#[derive(Parser)]
#[command(name = "pdembed", version, about = "Lipschitz embeddings of persistence diagrams")]
struct Cli {
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true, env = "PDEMBED_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Embed each diagram with φ₃ (or φ_R with --scale).
    Embed(EmbedArgs),
    /// Pairwise bottleneck and/or embedded distances.
    Dist(DistArgs),
    /// Lower distortion tables.
    Profile(ProfileArgs),
    /// Landmark counts and distortion constants of a bounded spec.
    Spec(SpecArgs),
    /// Two distinct diagrams with identical φ₃ images.
    Witness(SpecArgs),
    /// Angle vectors of the injective map.
    Inject(InjectArgs),
    /// Diagrams recovered from angle vectors.
    Reconstruct(ReconstructArgs),
    /// Randomized verification of every bound.
    Check(CheckArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Diagram files (.csv or .json).
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Pad every diagram to this many points.
    #[arg(long)]
    arity: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Clone, Default)]
struct BoundedArgs {
    #[arg(long)]
    frame: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    scales: Vec<f64>,
    /// Unit weight vector; equal weights when omitted.
    #[arg(long, value_delimiter = ',')]
    weights: Vec<f64>,
    /// Evenly spaced scales `m,M,N` on frame `M`.
    #[arg(long, value_parser = parse_uniform)]
    uniform: Option<(f64, f64, usize)>,
}

impl BoundedArgs {
    fn given(&self) -> bool {
        self.frame.is_some() || self.uniform.is_some()
    }

    fn build(&self, arity: usize) -> pdembed::Result<BoundedSpec> {
        if let Some((m, big_m, n)) = self.uniform {
            return Ok(uniform_spec(m, big_m, n, arity)?.spec);
        }
        let frame = self
            .frame
            .ok_or_else(|| Error::InvalidSpec("--frame or --uniform is required".into()))?;
        let weights = if self.weights.is_empty() {
            vec![1.0 / (self.scales.len() as f64).sqrt(); self.scales.len()]
        } else {
            self.weights.clone()
        };
        BoundedSpec::new(frame, self.scales.clone(), weights, arity)
    }
}

fn parse_uniform(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [m, big_m, n] = parts.as_slice() else {
        return Err("expected m,M,N".into());
    };
    Ok((
        m.parse().map_err(|_| format!("bad m {m:?}"))?,
        big_m.parse().map_err(|_| format!("bad M {big_m:?}"))?,
        n.parse().map_err(|_| format!("bad N {n:?}"))?,
    ))
}

fn parse_schedule(s: &str) -> Result<ScheduleKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args)]
struct EmbedArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    bounded: BoundedArgs,
    /// Single-scale map φ_R instead of φ₃.
    #[arg(long, conflicts_with_all = ["frame", "uniform"])]
    scale: Option<f64>,
    /// Dense CSV rows in the canonical landmark order.
    #[arg(long)]
    dense: bool,
    /// Write the dense column keys here, one per line.
    #[arg(long, requires = "dense")]
    header: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_DENSE_CAP)]
    dense_cap: u128,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistMode {
    Bottleneck,
    Embedded,
    Both,
}

#[derive(Args)]
struct DistArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "bottleneck")]
    mode: DistMode,
    #[command(flatten)]
    bounded: BoundedArgs,
    #[arg(long)]
    scale: Option<f64>,
    /// Multi-scale schedule: coarse, uniform or combined.
    #[arg(long, value_parser = parse_schedule)]
    schedule: Option<ScheduleKind>,
    /// Width of certified multi-scale intervals.
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long, value_parser = parse_schedule)]
    schedule: Option<ScheduleKind>,
    #[command(flatten)]
    bounded: BoundedArgs,
    #[arg(long, default_value_t = 1)]
    arity: usize,
    /// Largest argument; defaults to the frame, or 10 for schedules.
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SpecArgs {
    #[command(flatten)]
    bounded: BoundedArgs,
    #[arg(long, default_value_t = 1)]
    arity: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct InjectArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    frame: f64,
    /// Distinct negative anchors; `n + 1` evenly spread ones by default.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    anchors: Vec<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct ReconstructArgs {
    /// File with one comma-separated vector per line.
    vectors: PathBuf,
    #[arg(long)]
    frame: f64,
    #[arg(long)]
    arity: usize,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    anchors: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_ANGLE_TOLERANCE)]
    tau: f64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Comma-separated check names, or `all`.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    suite: Vec<String>,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 10.0)]
    frame: f64,
    #[arg(long, default_value_t = 0.2)]
    diag_prob: f64,
    #[arg(long, value_delimiter = ',')]
    scales: Option<Vec<f64>>,
    #[arg(long, env = "PDEMBED_TOLERANCE", default_value_t = 1e-9)]
    tolerance: f64,
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    /// Write the JSON report here instead of after the table.
    #[arg(long)]
    json: Option<PathBuf>,
}

/// Failure of a subcommand: a library error, an I/O error, or failed checks.
enum Failure {
    Lib(Error),
    Io(String),
    ChecksFailed,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome<T> = Result<T, Failure>;

fn emit(output: Option<&Path>, text: &str) -> Outcome<()> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(input: &InputArgs) -> Outcome<Vec<Diagram>> {
    let mut all = Vec::new();
    for path in &input.inputs {
        if !path.exists() {
            return Err(Failure::Io(format!("{}: no such file", path.display())));
        }
        all.extend(io::read_diagrams(path, input.arity)?);
    }
    let n = all.iter().map(Diagram::arity).max().unwrap_or(0);
    Ok(all
        .iter()
        .map(|d| pdembed::diagram::pad_to_arity(d, n))
        .collect::<pdembed::Result<Vec<_>>>()?)
}

fn sparse_line<'a>(entries: impl Iterator<Item = (String, f64)> + 'a) -> String {
    entries.map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
}

fn embed(a: &EmbedArgs) -> Outcome<()> {
    let diagrams = load(&a.input)?;
    let arity = diagrams[0].arity();
    let mut out = String::new();
    if let Some(r) = a.scale {
        if a.dense {
            return Err(Error::InvalidSpec("--dense needs a bounded spec".into()).into());
        }
        let lines = diagrams
            .par_iter()
            .map(|x| Ok(sparse_line(phi_scale(x, r)?.entries.iter().map(|(k, v)| (k.to_text(1), *v)))))
            .collect::<pdembed::Result<Vec<_>>>()?;
        for l in lines {
            writeln!(out, "{l}").unwrap();
        }
        return emit(a.input.output.as_deref(), &out);
    }
    let spec = a.bounded.build(arity)?;
    let images = diagrams
        .par_iter()
        .map(|x| phi3(x, &spec))
        .collect::<pdembed::Result<Vec<_>>>()?;
    if a.dense {
        let layout = DenseLayout::new(&spec, a.dense_cap)?;
        if let Some(h) = &a.header {
            let mut keys = layout.keys().join("\n");
            keys.push('\n');
            std::fs::write(h, keys).map_err(|e| Failure::Io(format!("{}: {e}", h.display())))?;
        }
        for img in &images {
            let row = img.to_dense(&spec, a.dense_cap)?;
            writeln!(out, "{}", io::write_vector(&row)).unwrap();
        }
    } else {
        for img in &images {
            let line = sparse_line(img.entries().map(|(i, k, v)| (k.to_text(i), v)));
            writeln!(out, "{line}").unwrap();
        }
    }
    emit(a.input.output.as_deref(), &out)
}

fn matrix(title: &str, size: usize, values: &[(usize, usize, f64)]) -> String {
    let mut m = vec![vec![0.0; size]; size];
    for &(i, j, v) in values {
        m[i][j] = v;
        m[j][i] = v;
    }
    let mut out = format!("# {title}\n");
    for row in m {
        writeln!(out, "{}", io::write_vector(&row)).unwrap();
    }
    out
}

fn dist(a: &DistArgs) -> Outcome<()> {
    let diagrams = load(&a.input)?;
    let arity = diagrams[0].arity();
    let size = diagrams.len();
    let pairs: Vec<(usize, usize)> = (0..size).flat_map(|i| (i + 1..size).map(move |j| (i, j))).collect();
    let mut out = String::new();
    if matches!(a.mode, DistMode::Bottleneck | DistMode::Both) {
        let values = pairs
            .par_iter()
            .map(|&(i, j)| Ok((i, j, bottleneck_distance(&diagrams[i], &diagrams[j])?)))
            .collect::<pdembed::Result<Vec<_>>>()?;
        out.push_str(&matrix("bottleneck", size, &values));
    }
    if matches!(a.mode, DistMode::Embedded | DistMode::Both) {
        if let Some(kind) = a.schedule {
            let s = Schedule::default_for(kind, arity)?;
            let iv = pairs
                .par_iter()
                .map(|&(i, j)| certified_distance(&diagrams[i], &diagrams[j], &s, a.epsilon))
                .collect::<pdembed::Result<Vec<_>>>()?;
            let lower: Vec<_> = pairs.iter().zip(&iv).map(|(&(i, j), c)| (i, j, c.lower)).collect();
            let upper: Vec<_> = pairs.iter().zip(&iv).map(|(&(i, j), c)| (i, j, c.upper)).collect();
            out.push_str(&matrix("embedded-lower", size, &lower));
            out.push_str(&matrix("embedded-upper", size, &upper));
        } else if let Some(r) = a.scale {
            let images = diagrams
                .par_iter()
                .map(|x| phi_scale(x, r))
                .collect::<pdembed::Result<Vec<_>>>()?;
            let values = pairs
                .iter()
                .map(|&(i, j)| Ok((i, j, images[i].distance(&images[j])?)))
                .collect::<pdembed::Result<Vec<_>>>()?;
            out.push_str(&matrix("embedded", size, &values));
        } else if a.bounded.given() {
            let spec = a.bounded.build(arity)?;
            let images = diagrams
                .par_iter()
                .map(|x| phi3(x, &spec))
                .collect::<pdembed::Result<Vec<_>>>()?;
            let values = pairs
                .iter()
                .map(|&(i, j)| Ok((i, j, images[i].distance(&images[j])?)))
                .collect::<pdembed::Result<Vec<_>>>()?;
            out.push_str(&matrix("embedded", size, &values));
        } else {
            return Err(Error::InvalidSpec("embedded distances need --schedule, --scale, --frame or --uniform".into()).into());
        }
    }
    emit(a.input.output.as_deref(), &out)
}

fn grid_points(t_max: f64, steps: usize) -> Outcome<Vec<f64>> {
    if !(t_max.is_finite() && t_max > 0.0) || steps == 0 {
        return Err(Error::InvalidConfig("need --t-max > 0 and --steps > 0".into()).into());
    }
    Ok((0..=steps).map(|i| t_max * i as f64 / steps as f64).collect())
}

fn profile(a: &ProfileArgs) -> Outcome<()> {
    let mut out = String::new();
    if let Some(kind) = a.schedule {
        let s = Schedule::default_for(kind, a.arity)?;
        out.push_str("t,rho_minus,rho_minus_improved\n");
        for t in grid_points(a.t_max.unwrap_or(10.0), a.steps)? {
            writeln!(out, "{t},{},{}", rho_minus(&s, t)?, rho_minus_improved(&s, t)?).unwrap();
        }
    } else {
        let spec = a.bounded.build(a.arity)?;
        out.push_str("t,steps,linear\n");
        for t in grid_points(a.t_max.unwrap_or(spec.frame()), a.steps)? {
            writeln!(out, "{t},{},{}", rho3_steps(&spec, t)?, rho3_linear(&spec, t)?).unwrap();
        }
    }
    emit(a.output.as_deref(), &out)
}

fn count_value(v: u128) -> Value {
    u64::try_from(v).map(Value::from).unwrap_or_else(|_| Value::String(v.to_string()))
}

fn spec(a: &SpecArgs) -> Outcome<()> {
    let spec = a.bounded.build(a.arity)?;
    let counts = spec.landmark_counts()?;
    let total = spec.dense_len().map(count_value).unwrap_or(Value::Null);
    let mut table = Vec::new();
    for &t in spec.scales().iter().chain(std::iter::once(&spec.frame())) {
        table.push(json!({ "t": t, "steps": rho3_steps(&spec, t)?, "linear": rho3_linear(&spec, t)? }));
    }
    let mut report = json!({
        "frame": spec.frame(),
        "arity": spec.arity(),
        "scales": spec.scales(),
        "weights": spec.weights(),
        "landmarks": counts.into_iter().map(count_value).collect::<Vec<_>>(),
        "dense_len": total,
        "step_heights": step_heights(&spec),
        "linear_slope": rho3_linear_slope(&spec),
        "table": table,
    });
    if let Some((m, big_m, n)) = a.bounded.uniform {
        let u = uniform_spec(m, big_m, n, a.arity)?;
        report["uniform"] = json!({ "a": u.a, "mu": u.mu, "lambda": u.lambda, "slope": u.slope });
    }
    emit(a.output.as_deref(), &format!("{}\n", serde_json::to_string_pretty(&report).unwrap()))
}

fn witness(a: &SpecArgs) -> Outcome<()> {
    let spec = a.bounded.build(a.arity)?;
    let w = non_injectivity_witness(&spec)?;
    let distance = phi3(&w.first, &spec)?.distance(&phi3(&w.second, &spec)?)?;
    let report = json!({
        "first": io::diagram_to_json(&w.first),
        "second": io::diagram_to_json(&w.second),
        "gap": w.gap,
        "bottleneck": w.bottleneck,
        "image_distance": distance,
    });
    emit(a.output.as_deref(), &format!("{}\n", serde_json::to_string_pretty(&report).unwrap()))
}

fn anchors_for(values: &[f64], arity: usize, frame: f64) -> pdembed::Result<AnchorSet<f64>> {
    if values.is_empty() {
        AnchorSet::default_for(arity, frame)
    } else {
        AnchorSet::new(values.to_vec())
    }
}

fn inject(a: &InjectArgs) -> Outcome<()> {
    let diagrams = load(&a.input)?;
    let anchors = anchors_for(&a.anchors, diagrams[0].arity(), a.frame)?;
    let rows = diagrams
        .par_iter()
        .map(|x| injective_embed(x, &anchors, a.frame))
        .collect::<pdembed::Result<Vec<_>>>()?;
    let mut out = String::new();
    for r in rows {
        writeln!(out, "{}", io::write_vector(&r)).unwrap();
    }
    emit(a.input.output.as_deref(), &out)
}

fn reconstruct_cmd(a: &ReconstructArgs) -> Outcome<()> {
    let text = std::fs::read_to_string(&a.vectors).map_err(|e| Failure::Io(format!("{}: {e}", a.vectors.display())))?;
    let vectors = io::read_vectors(&text)?;
    let anchors = anchors_for(&a.anchors, a.arity, a.frame)?;
    let diagrams = vectors
        .par_iter()
        .map(|v| reconstruct(v, &anchors, a.arity, a.frame, a.tau))
        .collect::<pdembed::Result<Vec<_>>>()?;
    let text = match a.format {
        Format::Json => format!("{}\n", io::write_json(&diagrams)),
        Format::Csv => io::write_csv(&diagrams),
    };
    emit(a.output.as_deref(), &text)
}

fn report_table(reports: &[CheckReport]) -> String {
    let mut out = format!("{:<24} {:>8} {:>14} {:>10}  status\n", "check", "samples", "worst_margin", "tolerance");
    for r in reports {
        writeln!(
            out,
            "{:<24} {:>8} {:>14.6e} {:>10.1e}  {}",
            r.name,
            r.samples,
            r.worst_margin,
            r.tolerance,
            if r.passed { "PASS" } else { "FAIL" }
        )
        .unwrap();
    }
    out
}

fn check(a: &CheckArgs) -> Outcome<()> {
    let defaults = CheckConfig::default();
    let config = CheckConfig {
        arity: a.n,
        samples: a.samples,
        seed: a.seed,
        frame: a.frame,
        diag_prob: a.diag_prob,
        scales: a.scales.clone().unwrap_or(defaults.scales.clone()),
        tolerance: a.tolerance,
        epsilon: a.epsilon,
        ..defaults
    };
    let reports = run_checks(&a.suite, &config)?;
    let json = serde_json::to_string_pretty(&reports).unwrap();
    let mut out = report_table(&reports);
    match &a.json {
        Some(p) => std::fs::write(p, format!("{json}\n")).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?,
        None => writeln!(out, "\n{json}").unwrap(),
    }
    emit(None, &out)?;
    if reports.iter().all(|r| r.passed) {
        Ok(())
    } else {
        Err(Failure::ChecksFailed)
    }
}

fn run(cli: &Cli) -> Outcome<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Io(e.to_string()))?;
    }
    match &cli.command {
        Command::Embed(a) => embed(a),
        Command::Dist(a) => dist(a),
        Command::Profile(a) => profile(a),
        Command::Spec(a) => spec(a),
        Command::Witness(a) => witness(a),
        Command::Inject(a) => inject(a),
        Command::Reconstruct(a) => reconstruct_cmd(a),
        Command::Check(a) => check(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::ChecksFailed) => ExitCode::from(exit::CHECKS_FAILED),
        Err(Failure::Io(msg)) => {
            eprintln!("pdembed: {msg}");
            ExitCode::from(exit::IO)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("pdembed: {e}");
            ExitCode::from(exit::code(&e))
        }
    }
}
