//! Command-line driver: configuration, experiment dispatch and artifacts.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use cohomflow::analysis::{build_initial, identity_check, midregion_sign, ScalarResult};
use cohomflow::io::{write_curvature, write_report, write_trace};
use cohomflow::svg::{render_profiles, render_series, Series};
use cohomflow::{
    calibrate_slope, check_smoothness, curvature_profile, einstein_regression, evolve, min_sec_global,
    read_profiles, theorem_check, write_profiles, Error, ExperimentReport, InitialMetric, ManifoldSpec,
    MinSecOptions, ModelMetric, ProfileSet, RunConfig, Side, SlopeSetting, TheoremParams, Verdict,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Environment variable that overrides the output directory.
pub const OUT_ENV: &str = "COHOMFLOW_OUT";

#[derive(Debug, Parser)]
#[command(name = "cohomflow", version, about = "Ricci flow of diagonal cohomogeneity-one metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the initial metric and write its profiles.
    Build(Common),
    /// Curvature of the initial metric (or of `--input`).
    Curvature(Common),
    /// Run the flow and write snapshots and diagnostics.
    Evolve(Common),
    /// Flat radial plane turning negative under the flow.
    CheckTheorem(Common),
    /// Flow an Einstein model and compare with the homothety.
    CheckEinstein(Common),
    /// Integral of the first variation along the radial geodesic.
    CheckIdentity(Common),
    /// Smooth collapsing slopes at the poles.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides COHOMFLOW_OUT and the configuration).
    #[arg(long)]
    out: Option<PathBuf>,
    /// s4, cp2, mn (with --n), m1, m2, s2xs2, cp2#cp2.
    #[arg(long)]
    manifold: Option<String>,
    #[arg(long)]
    n: Option<u32>,
    /// Bracket constant.
    #[arg(long)]
    c: Option<f64>,
    /// Plateau constant K.
    #[arg(long)]
    plateau: Option<f64>,
    /// Transition width.
    #[arg(long)]
    width: Option<f64>,
    /// `default`, `calibrate`, or `MINUS,PLUS`.
    #[arg(long)]
    slopes: Option<String>,
    /// Number of grid nodes.
    #[arg(long = "N", visible_alias = "nodes")]
    nodes: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    output_stride: Option<usize>,
    #[arg(long)]
    max_steps: Option<usize>,
    /// Seed of the Grassmannian sampler.
    #[arg(long)]
    seed: Option<u64>,
    /// Random planes per node.
    #[arg(long)]
    samples: Option<usize>,
    /// Einstein model or cylinder: round-s4, fubini-study, cylinder.
    #[arg(long)]
    model: Option<String>,
    /// Profile CSV to start from instead of building one.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    #[command(flatten)]
    common: Common,
    /// Pole to calibrate; both when absent.
    #[arg(long, value_enum)]
    side: Option<SideArg>,
    /// Trial interval `LO,HI`; defaults to `[c/4, 8c]`.
    #[arg(long)]
    range: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SideArg {
    Minus,
    Plus,
}

/// Failure of a command, already mapped to an exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter { .. } | Error::InvalidSpec(_) | Error::WrongLength { .. } => EXIT_USAGE,
            _ => EXIT_NUMERIC,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

type Outcome = std::result::Result<i32, Failure>;

/// Parse `argv` and execute; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Build(c) => build(&c),
        Command::Curvature(c) => curvature(&c),
        Command::Evolve(c) => run_evolve(&c),
        Command::CheckTheorem(c) => check_theorem(&c),
        Command::CheckEinstein(c) => check_einstein(&c),
        Command::CheckIdentity(c) => check_identity(&c),
        Command::Calibrate(a) => calibrate(&a),
    }
}

/// Resolved configuration plus where to write.
struct Setup {
    cfg: RunConfig,
    out: PathBuf,
}

fn setup(args: &Common, default_dir: &str) -> std::result::Result<Setup, Failure> {
    let mut cfg = match &args.config {
        Some(path) => {
            if !path.is_file() {
                return Err(usage(format!("config file {} not found", path.display())));
            }
            RunConfig::load(path).map_err(|e| usage(e.to_string()))?
        }
        None => RunConfig::default(),
    };
    if let Some(v) = &args.manifold {
        cfg.manifold = v.clone();
    }
    if args.n.is_some() {
        cfg.n = args.n;
    }
    if let Some(v) = args.c {
        cfg.c = v;
    }
    if let Some(v) = args.plateau {
        cfg.plateau = v;
    }
    if args.width.is_some() {
        cfg.width = args.width;
    }
    if let Some(s) = &args.slopes {
        cfg.slopes = parse_slopes(s)?;
    }
    if let Some(v) = args.nodes {
        cfg.nodes = v;
    }
    if let Some(v) = args.t_end {
        cfg.t_end = v;
    }
    if let Some(v) = args.cfl {
        cfg.cfl = v;
    }
    if let Some(v) = args.output_stride {
        cfg.output_stride = v;
    }
    if let Some(v) = args.max_steps {
        cfg.max_steps = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.samples {
        cfg.samples = v;
    }
    if args.model.is_some() {
        cfg.model = args.model.clone();
    }
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let out = args
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(default_dir));
    fs::create_dir_all(&out).map_err(|e| Failure {
        code: EXIT_NUMERIC,
        message: format!("cannot create {}: {e}", out.display()),
    })?;
    Ok(Setup { cfg, out })
}

fn parse_pair(s: &str, what: &str) -> std::result::Result<[f64; 2], Failure> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => match (a.parse(), b.parse()) {
            (Ok(a), Ok(b)) => Ok([a, b]),
            _ => Err(usage(format!("{what} `{s}` is not a pair of numbers"))),
        },
        _ => Err(usage(format!("{what} `{s}` must be two comma-separated numbers"))),
    }
}

fn parse_slopes(s: &str) -> std::result::Result<SlopeSetting, Failure> {
    match s {
        "default" | "calibrate" => Ok(SlopeSetting::Keyword(s.into())),
        _ => parse_pair(s, "--slopes").map(SlopeSetting::Values),
    }
}

fn calibration_range(c: f64) -> (f64, f64) {
    (0.25 * c, 8.0 * c)
}

fn manifold_spec(cfg: &RunConfig) -> std::result::Result<ManifoldSpec, Failure> {
    let spec = ManifoldSpec::from_label(&cfg.manifold, cfg.n, cfg.c)?;
    Ok(match &cfg.slopes {
        SlopeSetting::Values([a, b]) => spec.with_slopes(*a, *b),
        SlopeSetting::Keyword(k) if k == "calibrate" => {
            let range = calibration_range(cfg.c);
            let minus = calibrate_slope(&spec, Side::Minus, range)?;
            let plus = calibrate_slope(&spec, Side::Plus, range)?;
            spec.with_slopes(minus, plus)
        }
        SlopeSetting::Keyword(_) => spec,
    })
}

fn theorem_params(cfg: &RunConfig) -> TheoremParams {
    TheoremParams {
        plateau: cfg.plateau,
        width: cfg.width,
        nodes: cfg.nodes,
        t_end: cfg.t_end,
        cfl: cfg.cfl,
        min_sec: min_sec_options(cfg),
    }
}

fn min_sec_options(cfg: &RunConfig) -> MinSecOptions {
    MinSecOptions {
        samples: cfg.samples,
        seed: cfg.seed,
        ..Default::default()
    }
}

fn model(cfg: &RunConfig) -> std::result::Result<Option<ModelMetric>, Failure> {
    cfg.model
        .as_deref()
        .map(|name| ModelMetric::from_name(name, cfg.cylinder_k))
        .transpose()
        .map_err(Failure::from)
}

fn initial_metric(cfg: &RunConfig) -> std::result::Result<(ManifoldSpec, InitialMetric), Failure> {
    Ok(match model(cfg)? {
        Some(m) => (m.spec(cfg.c, cfg.cylinder_length), InitialMetric::Model { model: m }),
        None => (manifold_spec(cfg)?, InitialMetric::GroveZiller),
    })
}

/// The starting profiles: `--input` if given, otherwise the configured metric.
fn initial_profiles(args: &Common, cfg: &RunConfig) -> std::result::Result<ProfileSet, Failure> {
    if let Some(path) = &args.input {
        return read_profiles(path).map_err(|e| usage(format!("{}: {e}", path.display())));
    }
    let (spec, initial) = initial_metric(cfg)?;
    Ok(build_initial(spec, initial, &theorem_params(cfg))?)
}

fn write_text(path: &Path, text: &str) -> std::result::Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::from(Error::Io(e)))
}

fn finish(setup: &Setup, mut report: ExperimentReport, artifacts: Vec<PathBuf>) -> Outcome {
    report.artifacts = artifacts.iter().map(|p| p.display().to_string()).collect();
    let path = setup.out.join("report.json");
    write_report(&path, &report)?;
    println!(
        "{} {}: {} ({})",
        report.experiment,
        report.manifold,
        report.verdict.name(),
        path.display()
    );
    Ok(match report.verdict {
        Verdict::Pass => EXIT_OK,
        Verdict::Fail => EXIT_FAIL,
        Verdict::Inconclusive => EXIT_NUMERIC,
    })
}

fn profile_artifacts(out: &Path, p: &ProfileSet, stem: &str, title: &str) -> std::result::Result<Vec<PathBuf>, Failure> {
    let csv = out.join(format!("{stem}.csv"));
    write_profiles(&csv, p)?;
    let svg = out.join(format!("{stem}.svg"));
    write_text(&svg, &render_profiles(p, title))?;
    Ok(vec![csv.clone(), csv.with_extension("json"), svg])
}

fn build(args: &Common) -> Outcome {
    let s = setup(args, "build")?;
    let p = initial_profiles(args, &s.cfg)?;
    let artifacts = profile_artifacts(&s.out, &p, "profiles", &format!("{} t = 0", p.spec.family))?;
    let mut report = ExperimentReport::new("build", &p.spec, p.grid.len(), p.t);
    let smooth = check_smoothness(&p);
    for side in [Side::Minus, Side::Plus] {
        if let Some(r) = smooth.get(side) {
            report.results.push(ScalarResult::at_most(
                &format!("smoothness_{}", side.name()),
                r.max(),
                r.tolerance,
            ));
        }
    }
    report.settle();
    finish(&s, report, artifacts)
}

fn curvature(args: &Common) -> Outcome {
    let s = setup(args, "curvature")?;
    let p = initial_profiles(args, &s.cfg)?;
    let curv = curvature_profile(&p, s.cfg.ghost_mode);
    let path = s.out.join("curvature.csv");
    write_curvature(&path, &p, &curv)?;
    let (m, node, plane) = min_sec_global(&p, &min_sec_options(&s.cfg));
    let mut report = ExperimentReport::new("curvature", &p.spec, p.grid.len(), p.t);
    report.min_sec_t0 = Some(m);
    report.r0 = Some(p.grid.node(node));
    report.note = Some(format!("minimizing plane v = {:?}, w = {:?}", plane.v, plane.w));
    report.settle();
    finish(&s, report, vec![path])
}

fn run_evolve(args: &Common) -> Outcome {
    let s = setup(args, "evolve")?;
    let p0 = initial_profiles(args, &s.cfg)?;
    let trace = evolve(&p0, &s.cfg.flow_options())?;
    let mut artifacts = write_trace(&s.out.join("trace"), &trace)?;
    let series = Series::new(
        "min sec",
        trace.times().into_iter().zip(trace.snapshot_min_sec.iter().copied()).collect(),
    );
    let svg = s.out.join("minsec.svg");
    write_text(&svg, &render_series(&[series], "minimum sectional curvature", "t", "min sec"))?;
    artifacts.push(svg);
    let last = trace.last();
    artifacts.extend(profile_artifacts(
        &s.out,
        last,
        "profiles_final",
        &format!("{} t = {:.3e}", last.spec.family, last.t),
    )?);
    let mut report = ExperimentReport::new("evolve", &p0.spec, p0.grid.len(), s.cfg.t_end);
    report.min_sec_t0 = trace.snapshot_min_sec.first().copied();
    report.first_negative_t = trace
        .times()
        .into_iter()
        .zip(&trace.snapshot_min_sec)
        .find(|(_, &m)| m < -cohomflow::analysis::NEGATIVE_THRESHOLD / (s.cfg.plateau * s.cfg.plateau))
        .map(|(t, _)| t);
    report.settle();
    if !trace.completed() {
        report.verdict = Verdict::Inconclusive;
        report.note = Some(format!("flow stopped early: {:?}", trace.stop));
    }
    finish(&s, report, artifacts)
}

fn check_theorem(args: &Common) -> Outcome {
    let s = setup(args, "check-theorem")?;
    let (spec, initial) = initial_metric(&s.cfg)?;
    let out = theorem_check(spec, initial, &theorem_params(&s.cfg))?;
    let mut artifacts = Vec::new();
    let svg = s.out.join("sec_r0.svg");
    let label = format!("sec(e0, e{}) at r0", out.axis);
    write_text(
        &svg,
        &render_series(&[Series::new(label, out.sec_series.clone())], "radial plane at r0", "t", "sec"),
    )?;
    artifacts.push(svg);
    if let Some(trace) = &out.trace {
        let diag = s.out.join("diagnostics.csv");
        cohomflow::io::write_diagnostics(&diag, trace)?;
        artifacts.push(diag);
        artifacts.extend(profile_artifacts(&s.out, trace.initial(), "profiles_initial", "initial metric")?);
    }
    finish(&s, out.report, artifacts)
}

fn check_einstein(args: &Common) -> Outcome {
    let s = setup(args, "check-einstein")?;
    let m = model(&s.cfg)?.ok_or_else(|| usage("check-einstein needs --model"))?;
    let (report, trace) = einstein_regression(m, s.cfg.c, s.cfg.t_end, s.cfg.nodes, s.cfg.cylinder_length)?;
    let diag = s.out.join("diagnostics.csv");
    cohomflow::io::write_diagnostics(&diag, &trace)?;
    let series = Series::new(
        "min sec",
        trace.times().into_iter().zip(trace.snapshot_min_sec.iter().copied()).collect(),
    );
    let svg = s.out.join("minsec.svg");
    write_text(&svg, &render_series(&[series], m.name(), "t", "min sec"))?;
    finish(&s, report, vec![diag, svg])
}

fn check_identity(args: &Common) -> Outcome {
    let s = setup(args, "check-identity")?;
    let spec = manifold_spec(&s.cfg)?;
    let (report, trace, results) = identity_check(spec, &theorem_params(&s.cfg))?;
    let mid = midregion_sign(&trace)?;
    let path = s.out.join("identity.json");
    let payload = serde_json::json!({ "identity": results, "midregion": mid });
    write_text(&path, &(serde_json::to_string_pretty(&payload).map_err(Error::from)? + "\n"))?;
    finish(&s, report, vec![path])
}

fn calibrate(a: &CalibrateArgs) -> Outcome {
    let s = setup(&a.common, "calibrate")?;
    let spec = ManifoldSpec::from_label(&s.cfg.manifold, s.cfg.n, s.cfg.c)?;
    let range = match &a.range {
        Some(r) => {
            let [lo, hi] = parse_pair(r, "--range")?;
            (lo, hi)
        }
        None => calibration_range(s.cfg.c),
    };
    let sides: Vec<Side> = match a.side {
        Some(SideArg::Minus) => vec![Side::Minus],
        Some(SideArg::Plus) => vec![Side::Plus],
        None => vec![Side::Minus, Side::Plus],
    };
    let mut report = ExperimentReport::new("calibrate", &spec, 0, 0.0);
    for side in sides {
        let Some(pole) = spec.pole(side) else { continue };
        let slope = calibrate_slope(&spec, side, range)?;
        println!("{} pole: smooth slope {slope:.12} (configured {})", side.name(), pole.slope);
        report.results.push(ScalarResult {
            name: format!("slope_{}", side.name()),
            value: slope,
            tolerance: pole.slope,
            passed: true,
        });
    }
    report.note = Some("tolerance holds the configured slope for comparison".into());
    report.settle();
    finish(&s, report, Vec::new())
}
