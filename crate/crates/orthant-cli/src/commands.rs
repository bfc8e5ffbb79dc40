//! Subcommand implementations.

use crate::render::{render_svg, Layer, RenderSpec};
use clap::Args;
use orthant_core::analysis;
use orthant_core::bands;
use orthant_core::closure::{
    boundary_path, classify_phase, closure as fill_closure, extract_blocking_function,
    BlockingKind,
};
use orthant_core::cluster::{backward_cluster, biconnected_cluster, forward_cluster};
use orthant_core::coupling::monotone_coupling_check;
use orthant_core::env::{realize_general, realize_named, ModelDescriptor};
use orthant_core::export;
use orthant_core::field::derive_seed;
use orthant_core::otsp;
use orthant_core::snapshot::{read_snapshot, write_snapshot};
use orthant_core::walks::{greedy_path, nws_path, path_slope, predicted_slopes, SlopeMethod};
use orthant_core::{
    Direction, EnvSet, EnvironmentModel, EnvironmentWindow, LazyEnvironment, Region, Site,
    TwoValuedModel, UniformField,
};
use rayon::prelude::*;
use serde::Serialize;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

pub enum CommandError {
    Usage(String),
    Runtime(String),
}

type CmdResult = Result<(), CommandError>;

fn usage(msg: impl Into<String>) -> CommandError {
    CommandError::Usage(msg.into())
}

fn runtime(msg: impl std::fmt::Display) -> CommandError {
    CommandError::Runtime(msg.to_string())
}

/// Write atomically: temp file in the same directory, then rename.
fn write_output(path: &Path, bytes: &[u8]) -> CmdResult {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp",
            path.file_name().and_then(|n| n.to_str()).unwrap_or("out")
        )),
        None => PathBuf::from(format!(
            ".{}.tmp",
            path.file_name().and_then(|n| n.to_str()).unwrap_or("out")
        )),
    };
    let mut f = fs::File::create(&tmp).map_err(runtime)?;
    f.write_all(bytes).map_err(runtime)?;
    f.sync_all().map_err(runtime)?;
    drop(f);
    fs::rename(&tmp, path).map_err(runtime)?;
    Ok(())
}

/// Emit to the given path, or stdout when none.
fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> CmdResult {
    match out {
        Some(path) => write_output(path, bytes),
        None => {
            std::io::stdout().write_all(bytes).map_err(runtime)?;
            Ok(())
        }
    }
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

fn parse_site(text: &str) -> Result<Site, CommandError> {
    let (x, y) = text
        .split_once(',')
        .ok_or_else(|| usage(format!("origin must be x,y: {text}")))?;
    Ok(Site::new(
        x.trim().parse().map_err(|_| usage("bad origin x"))?,
        y.trim().parse().map_err(|_| usage("bad origin y"))?,
    ))
}

fn parse_probability(text: &str) -> Result<f64, CommandError> {
    let p: f64 = text
        .parse()
        .map_err(|_| usage(format!("bad probability {text}")))?;
    if !(0.0..=1.0).contains(&p) {
        return Err(usage(format!("probability {p} outside [0, 1]")));
    }
    Ok(p)
}

fn parse_support(text: &str) -> Result<EnvironmentModel, CommandError> {
    let mut support = Vec::new();
    for entry in text.split(',') {
        let (set, prob) = entry
            .split_once('=')
            .ok_or_else(|| usage(format!("bad support entry {entry}; expected SET=num/den")))?;
        let set = EnvSet::parse(set.trim())
            .ok_or_else(|| usage(format!("unknown environment set {set}")))?;
        let prob = orthant_core::algebra::parse_rational(prob)
            .ok_or_else(|| usage(format!("bad probability {prob}")))?;
        support.push((set, prob));
    }
    EnvironmentModel::new(support).map_err(|e| usage(e.to_string()))
}

fn model_descriptor(name: &str) -> Result<ModelDescriptor, CommandError> {
    match name {
        "orthant" => Ok(ModelDescriptor::Orthant),
        "swe-n" => Ok(ModelDescriptor::SweN),
        "ud-lr" => Ok(ModelDescriptor::UdLr),
        "ne-w" => Ok(ModelDescriptor::NeW),
        other => Err(usage(format!(
            "unknown model {other}; expected orthant|swe-n|ud-lr|ne-w|custom"
        ))),
    }
}

fn load_snapshot(path: &Path) -> Result<EnvironmentWindow, CommandError> {
    let bytes = fs::read(path).map_err(runtime)?;
    read_snapshot(&mut bytes.as_slice()).map_err(runtime)
}

fn default_margin_for(region: Region, margin: Option<i64>) -> i64 {
    margin.unwrap_or_else(|| orthant_core::closure::default_margin(region))
}

// ---------------------------------------------------------------- env-gen

#[derive(Args)]
pub struct EnvGenArgs {
    /// Model name: orthant | swe-n | ud-lr | ne-w | custom.
    #[arg(long, default_value = "orthant")]
    model: String,
    /// Occupation parameter as a decimal string (two-valued models).
    #[arg(long, default_value = "0.5")]
    p: String,
    /// Custom support, e.g. "NE=2/3,SW=1/3" (with --model custom).
    #[arg(long)]
    support: Option<String>,
    #[arg(long)]
    seed: u64,
    /// Window side; the window is a centered square of this odd size.
    #[arg(long)]
    size: u32,
    #[arg(long)]
    out: PathBuf,
}

pub fn env_gen(args: EnvGenArgs) -> CmdResult {
    let region = Region::centered_square(args.size);
    let field = UniformField::new(args.seed);
    let env = if args.model == "custom" {
        let support = args
            .support
            .as_deref()
            .ok_or_else(|| usage("--model custom requires --support"))?;
        realize_general(&field, &parse_support(support)?, region)
    } else {
        let descriptor = model_descriptor(&args.model)?;
        let p = parse_probability(&args.p)?;
        realize_named(&field, descriptor, &args.p, p, region).map_err(|e| usage(e.to_string()))?
    };
    let mut bytes = Vec::new();
    write_snapshot(&mut bytes, &env).map_err(runtime)?;
    write_output(&args.out, &bytes)
}

// ---------------------------------------------------------------- cluster

#[derive(Args)]
pub struct ClusterArgs {
    /// Snapshot produced by env-gen.
    #[arg(long)]
    env: PathBuf,
    /// forward | backward | biconnected.
    #[arg(long, default_value = "forward")]
    kind: String,
    /// Origin site as x,y.
    #[arg(long, default_value = "0,0")]
    origin: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn cluster(args: ClusterArgs) -> CmdResult {
    let env = load_snapshot(&args.env)?;
    let origin = parse_site(&args.origin)?;
    let result = match args.kind.as_str() {
        "forward" => forward_cluster(&env, origin),
        "backward" => backward_cluster(&env, origin),
        "biconnected" => biconnected_cluster(&env, origin),
        other => return Err(usage(format!("unknown cluster kind {other}"))),
    }
    .map_err(runtime)?;
    emit(&args.out, &json_bytes(&export::ClusterDocument::new(&result)))
}

// ---------------------------------------------------------------- closure

#[derive(Args)]
pub struct ClosureArgs {
    #[arg(long)]
    env: PathBuf,
    #[arg(long, default_value = "0,0")]
    origin: String,
    /// Interior margin; defaults to 20% of the window radius.
    #[arg(long)]
    margin: Option<i64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn closure(args: ClosureArgs) -> CmdResult {
    let env = load_snapshot(&args.env)?;
    let origin = parse_site(&args.origin)?;
    let margin = default_margin_for(env.region(), args.margin);
    let cluster = forward_cluster(&env, origin).map_err(runtime)?;
    let result = fill_closure(&cluster, margin).map_err(runtime)?;
    let blocking = extract_blocking_function(&result, BlockingKind::Flbf).ok();
    emit(
        &args.out,
        &json_bytes(&export::ClosureDocument::new(&result, blocking.as_ref())),
    )
}

// ---------------------------------------------------------------- classify

#[derive(Args)]
pub struct ClassifyArgs {
    #[arg(long, default_value = "0.5")]
    p: String,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 501)]
    size: u32,
    #[arg(long)]
    margin: Option<i64>,
    #[arg(long, default_value_t = 1)]
    replicas: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct ClassifyReport {
    p: f64,
    size: u32,
    margin: i64,
    replicas: usize,
    full_plane: usize,
    blocked_below: usize,
    blocked_above: usize,
    ambiguous: usize,
}

pub fn classify(args: ClassifyArgs) -> CmdResult {
    let p = parse_probability(&args.p)?;
    let region = Region::centered_square(args.size);
    let margin = default_margin_for(region, args.margin);
    let model = TwoValuedModel::orthant(p).map_err(|e| usage(e.to_string()))?;
    let phases: Vec<_> = (0..args.replicas)
        .into_par_iter()
        .map(|i| {
            let field = UniformField::new(derive_seed(args.seed, i as u64));
            let env = orthant_core::realize_two_valued(&field, &model, region);
            classify_phase(&env, Site::ORIGIN, margin)
        })
        .collect();
    use orthant_core::closure::PhaseClass;
    let mut report = ClassifyReport {
        p,
        size: args.size,
        margin,
        replicas: args.replicas,
        full_plane: 0,
        blocked_below: 0,
        blocked_above: 0,
        ambiguous: 0,
    };
    for phase in phases {
        match phase.map_err(runtime)? {
            PhaseClass::FullPlane => report.full_plane += 1,
            PhaseClass::BlockedBelow => report.blocked_below += 1,
            PhaseClass::BlockedAbove => report.blocked_above += 1,
            PhaseClass::Ambiguous => report.ambiguous += 1,
        }
    }
    emit(&args.out, &json_bytes(&report))
}

// ---------------------------------------------------------------- couple-check

#[derive(Args)]
pub struct CoupleCheckArgs {
    #[arg(long)]
    p1: String,
    #[arg(long)]
    p2: String,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 401)]
    size: u32,
    #[arg(long)]
    margin: Option<i64>,
    #[arg(long, default_value_t = 1)]
    replicas: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct CoupleReport {
    p1: f64,
    p2: f64,
    size: u32,
    margin: i64,
    replicas: usize,
    inclusion_holds: usize,
    strict: usize,
}

pub fn couple_check(args: CoupleCheckArgs) -> CmdResult {
    let p1 = parse_probability(&args.p1)?;
    let p2 = parse_probability(&args.p2)?;
    if p1 > p2 {
        return Err(usage("expected p1 <= p2"));
    }
    let region = Region::centered_square(args.size);
    let margin = default_margin_for(region, args.margin);
    let results: Vec<_> = (0..args.replicas)
        .into_par_iter()
        .map(|i| {
            let field = UniformField::new(derive_seed(args.seed, i as u64));
            monotone_coupling_check(&field, p1, p2, region, margin)
        })
        .collect();
    let mut report = CoupleReport {
        p1,
        p2,
        size: args.size,
        margin,
        replicas: args.replicas,
        inclusion_holds: 0,
        strict: 0,
    };
    for r in results {
        let r = r.map_err(runtime)?;
        report.inclusion_holds += r.inclusion_holds as usize;
        report.strict += r.strict as usize;
    }
    emit(&args.out, &json_bytes(&report))
}

// ---------------------------------------------------------------- slope

#[derive(Args)]
pub struct SlopeArgs {
    #[arg(long, default_value = "orthant")]
    model: String,
    #[arg(long)]
    p: String,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    steps: usize,
    /// Walk rule: nw (up then left), n-w (left then up), se, s-e, nws.
    #[arg(long, default_value = "nw")]
    walk: String,
    /// Optional CSV dump of the path sites.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct SlopeReport {
    model: String,
    p: f64,
    walk: String,
    steps: usize,
    empirical_slope: f64,
    vertical: bool,
    predicted_slope: Option<f64>,
}

pub fn slope(args: SlopeArgs) -> CmdResult {
    let p = parse_probability(&args.p)?;
    let descriptor = model_descriptor(&args.model)?;
    let model = descriptor
        .two_valued(p)
        .ok_or_else(|| usage("slope needs a two-valued model"))?;
    let env = LazyEnvironment {
        field: UniformField::new(args.seed),
        model,
    };
    let path = match args.walk.as_str() {
        "nw" => greedy_path(&env, Site::ORIGIN, Direction::Up, Direction::Left, args.steps),
        "n-w" => greedy_path(&env, Site::ORIGIN, Direction::Left, Direction::Up, args.steps),
        "se" => greedy_path(&env, Site::ORIGIN, Direction::Down, Direction::Right, args.steps),
        "s-e" => greedy_path(&env, Site::ORIGIN, Direction::Right, Direction::Down, args.steps),
        "nws" => nws_path(&env, Site::ORIGIN, args.steps),
        other => return Err(usage(format!("unknown walk {other}"))),
    }
    .map_err(runtime)?;
    let est = path_slope(&path, SlopeMethod::EndpointRatio);
    let table = predicted_slopes(&model.to_model());
    let predicted = match args.walk.as_str() {
        "nw" => table.nw.to_f64(),
        "n-w" => table.n_w.to_f64(),
        "se" => table.se.to_f64(),
        "s-e" => table.s_e.to_f64(),
        _ => None,
    };
    if let Some(csv) = &args.csv {
        write_output(csv, export::path_csv(&path).as_bytes())?;
    }
    let report = SlopeReport {
        model: args.model,
        p,
        walk: args.walk,
        steps: path.steps(),
        empirical_slope: est.value,
        vertical: est.vertical,
        predicted_slope: predicted,
    };
    emit(&args.out, &json_bytes(&report))
}

// ---------------------------------------------------------------- otsp-stats

#[derive(Args)]
pub struct OtspStatsArgs {
    #[arg(long)]
    p: String,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 501)]
    size: u32,
    #[arg(long, default_value_t = 50)]
    replicas: usize,
    /// Per-replica boundary sequences CSV (n, w, v, a).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Slope summary CSV.
    #[arg(long)]
    summary_out: Option<PathBuf>,
}

pub fn otsp_stats(args: OtspStatsArgs) -> CmdResult {
    let p = parse_probability(&args.p)?;
    let radius = (args.size as i64 - 1) / 2;
    let height = (radius as f64 * p / (1.0 - p) * 1.3).ceil() as i64 + 200;
    let region = Region::new(-radius, 0, 0, height);
    let stats: Vec<_> = (0..args.replicas)
        .into_par_iter()
        .map(|i| {
            let field = UniformField::new(derive_seed(args.seed, i as u64));
            let env = otsp::realize_otsp(&field, p, region);
            let cluster = otsp::forward_tri_cluster(&env, Site::ORIGIN);
            otsp::perc_stats(&env, &cluster)
        })
        .collect();
    if let Some(out) = &args.out {
        write_output(out, export::perc_stats_csv(&stats).as_bytes())?;
    }
    let rho = otsp::estimate_rho(p, args.size, args.replicas, args.seed).map_err(runtime)?;
    let summary = export::rho_summary_csv(p, &rho);
    match &args.summary_out {
        Some(path) => write_output(path, summary.as_bytes()),
        None => {
            print!("{summary}");
            Ok(())
        }
    }
}

// ---------------------------------------------------------------- duality-check

#[derive(Args)]
pub struct DualityCheckArgs {
    #[arg(long)]
    p: String,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 401)]
    size: u32,
    #[arg(long)]
    margin: Option<i64>,
    #[arg(long, default_value_t = 1)]
    replicas: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct DualityAggregate {
    p: f64,
    size: u32,
    margin: i64,
    replicas: usize,
    anchored: usize,
    fully_agreeing: usize,
    columns_checked: usize,
    mismatched_columns: usize,
    /// Every observed mismatch as (seed_index, column, closure, formula).
    mismatches: Vec<(usize, i64, i64, Option<i64>)>,
}

pub fn duality_check(args: DualityCheckArgs) -> CmdResult {
    let p = parse_probability(&args.p)?;
    let region = Region::centered_square(args.size);
    let margin = default_margin_for(region, args.margin);
    let reports: Vec<_> = (0..args.replicas)
        .into_par_iter()
        .map(|i| {
            let field = UniformField::new(derive_seed(args.seed, i as u64));
            otsp::duality_check_w(&field, p, region, margin)
        })
        .collect();
    let mut agg = DualityAggregate {
        p,
        size: args.size,
        margin,
        replicas: args.replicas,
        anchored: 0,
        fully_agreeing: 0,
        columns_checked: 0,
        mismatched_columns: 0,
        mismatches: Vec::new(),
    };
    for (i, r) in reports.into_iter().enumerate() {
        let r = r.map_err(runtime)?;
        if r.k0.is_some() {
            agg.anchored += 1;
        }
        if r.agree() {
            agg.fully_agreeing += 1;
        }
        agg.columns_checked += r.columns_checked;
        agg.mismatched_columns += r.mismatches.len();
        for m in r.mismatches {
            agg.mismatches
                .push((i, m.column, m.from_closure, m.from_formula));
        }
    }
    emit(&args.out, &json_bytes(&agg))
}

// ---------------------------------------------------------------- bound

#[derive(Args)]
pub struct BoundArgs {
    /// Band height K.
    #[arg(long)]
    order: u32,
    #[arg(long, default_value_t = 1e-12)]
    tolerance: f64,
    /// Monte Carlo sample budget for K >= 3.
    #[arg(long, default_value_t = 8_000_000)]
    budget: u64,
    /// Bracket half-width target for stochastic bisection.
    #[arg(long, default_value_t = 5e-4)]
    halfwidth: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn bound(args: BoundArgs) -> CmdResult {
    let report = match args.order {
        0 => return Err(usage("order must be at least 1")),
        1 => {
            let b = analysis::bound_p1(args.tolerance).map_err(runtime)?;
            export::BoundReport::exact(1, &b, &analysis::p1_cubic())
        }
        2 => {
            let b = analysis::bound_p2(args.tolerance).map_err(runtime)?;
            export::BoundReport::exact(2, &b, &analysis::q_polynomial())
        }
        k => {
            let est = analysis::estimate_pk(k, args.budget, args.seed, args.halfwidth)
                .map_err(runtime)?;
            export::BoundReport::monte_carlo(k, &est, args.seed)
        }
    };
    emit(&args.out, &json_bytes(&report))
}

// ---------------------------------------------------------------- band-sim

#[derive(Args)]
pub struct BandSimArgs {
    #[arg(long)]
    p: String,
    #[arg(long)]
    seed: u64,
    /// Band height K.
    #[arg(long, default_value_t = 1)]
    k: u32,
    #[arg(long, default_value_t = 10_000)]
    bands: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also print the per-row drift estimate.
    #[arg(long, default_value_t = false)]
    summary: bool,
}

pub fn band_sim(args: BandSimArgs) -> CmdResult {
    let p = parse_probability(&args.p)?;
    let trace = bands::band_path(p, args.seed, args.k, args.bands, bands::DEFAULT_LATERAL_CAP)
        .map_err(runtime)?;
    if args.summary {
        let est = analysis::estimate_gk(p, args.k, args.bands as u64, args.seed)
            .map_err(runtime)?;
        println!(
            "{{\"k\": {}, \"p\": {}, \"mean\": {}, \"standard_error\": {}}}",
            args.k, p, est.mean, est.standard_error
        );
    }
    emit(&args.out, export::band_trace_csv(&trace).as_bytes())
}

// ---------------------------------------------------------------- render

#[derive(Args)]
pub struct RenderArgs {
    #[arg(long)]
    env: PathBuf,
    #[arg(long, default_value = "0,0")]
    origin: String,
    /// Comma list drawn in order: forward, backward, closure, holes, boundary.
    #[arg(long, default_value = "closure,forward,backward,holes,boundary")]
    layers: String,
    /// Cell size in pixels.
    #[arg(long, default_value_t = 3)]
    cell: u32,
    #[arg(long)]
    margin: Option<i64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn render(args: RenderArgs) -> CmdResult {
    let env = load_snapshot(&args.env)?;
    let origin = parse_site(&args.origin)?;
    let region = env.region();
    let margin = default_margin_for(region, args.margin);
    let fwd = forward_cluster(&env, origin).map_err(runtime)?;
    let mut layers = Vec::new();
    let mut closure_result = None;
    for name in args.layers.split(',') {
        match name.trim() {
            "forward" => layers.push(Layer::from_set("forward", "#1f77b4", &fwd.members)),
            "backward" => {
                let bwd = backward_cluster(&env, origin).map_err(runtime)?;
                layers.push(Layer::from_set("backward", "#d62728", &bwd.members));
            }
            "closure" => {
                let cl = closure_result
                    .get_or_insert_with(|| fill_closure(&fwd, margin))
                    .as_ref()
                    .map_err(|e| runtime(e.to_string()))?;
                layers.push(Layer::from_set("closure", "#aec7e8", &cl.closure));
            }
            "holes" => {
                let cl = closure_result
                    .get_or_insert_with(|| fill_closure(&fwd, margin))
                    .as_ref()
                    .map_err(|e| runtime(e.to_string()))?;
                for hole in &cl.holes {
                    layers.push(Layer::from_set("hole", "#2ca02c", &hole.sites));
                }
            }
            "boundary" => {
                let cl = closure_result
                    .get_or_insert_with(|| fill_closure(&fwd, margin))
                    .as_ref()
                    .map_err(|e| runtime(e.to_string()))?;
                if let Ok(bf) = extract_blocking_function(cl, BlockingKind::Flbf) {
                    if let Ok(path) = boundary_path(&bf) {
                        layers.push(Layer {
                            name: "boundary",
                            color: "#000000",
                            sites: path.sites.clone(),
                        });
                    }
                }
            }
            other => return Err(usage(format!("unknown layer {other}"))),
        }
    }
    let svg = render_svg(
        region,
        &layers,
        RenderSpec {
            cell: args.cell,
            background: "#ffffff",
        },
    );
    emit(&args.out, svg.as_bytes())
}
