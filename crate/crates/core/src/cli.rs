//! The `homfill` command line.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::backend::BUDGET_ENV;
use crate::cayley::CayleyBall;
use crate::corpus::{random_two_chains, ChainShape};
use crate::error::{Error, Result};
use crate::experiments::{
    compare_presentations, hyperbolic_ar_pair, measure_ar_pair, polynomial_degree_report, FillingPolicy,
    GeneratorDictionary, PositiveRational, BALL_CAVEAT,
};
use crate::extension::{
    ball_cells_to_words, compute_constants, push_down, verify_theorem_bound, words_to_ball_cells, AreaTable,
    TransferConstants,
};
use crate::filling::{fa_table, harea_fill_with, EnumerationScope, FillConfig, FillStatus, Solver};
use crate::format::{load_group, GroupSpec};
use crate::presentation::parse_word;
use crate::surface::{assemble_surface, measure, project_boundary, to_dot, verify_surface, DiagramDocument};

pub const TOOL: &str = "homfill";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug, Serialize)]
#[command(name = "homfill", version, about = "Homological filling areas in Cayley complexes and free extensions")]
pub struct Cli {
    /// Report failures as a JSON object on stderr.
    #[arg(long, global = true)]
    pub json_errors: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for randomized corpora.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Ball vertex budget; overrides the environment variable.
    #[arg(long, global = true)]
    pub budget_vertices: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Minimal-area filling of one loop.
    Fill(FillArgs),
    /// Filling-area table over all loops up to a length.
    Fa(FaArgs),
    /// Surface diagrams from a filling or from random chains.
    Surface(SurfaceArgs),
    /// Transfer constants of an extension, with certificates.
    Constants(ConstantsArgs),
    /// Push a filling down into the kernel coset.
    Pushdown(PushdownArgs),
    /// Area-radius pair over all loops up to a length.
    Arpair(ArpairArgs),
    /// Composite bound and its fitted degree for the log-type pair.
    Degree(DegreeArgs),
    /// Check a diagram file.
    Verify(VerifyArgs),
    /// Export a ball of the Cayley complex.
    Ball(BallArgs),
    /// Compare the filling pairs of two presentations of one group.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverArg {
    Ilp,
    Brute,
}

impl From<SolverArg> for Solver {
    fn from(s: SolverArg) -> Solver {
        match s {
            SolverArg::Ilp => Solver::ExactIlp,
            SolverArg::Brute => Solver::BruteForce,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyArg {
    MinArea,
    MinRadius,
    Budgeted,
}

impl From<PolicyArg> for FillingPolicy {
    fn from(p: PolicyArg) -> FillingPolicy {
        match p {
            PolicyArg::MinArea => FillingPolicy::MinAreaThenMeasureRadius,
            PolicyArg::MinRadius => FillingPolicy::MinRadiusAmongMinArea,
            PolicyArg::Budgeted => FillingPolicy::SearchBudgeted,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FSourceArg {
    /// Kernel filling areas measured in a kernel ball.
    KernelFa,
    /// The area of the input filling, for every length.
    Input,
}

#[derive(Args, Debug, Serialize)]
pub struct FillArgs {
    #[arg(long)]
    pub pres: PathBuf,
    #[arg(long)]
    pub word: String,
    #[arg(long)]
    pub ball: usize,
    #[arg(long, value_enum, default_value = "ilp")]
    pub solver: SolverArg,
    /// Branch-and-bound node budget.
    #[arg(long, default_value_t = 20_000)]
    pub node_limit: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the assembled surface diagram here.
    #[arg(long)]
    pub diagram: Option<PathBuf>,
    #[arg(long)]
    pub dot: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct FaArgs {
    #[arg(long)]
    pub pres: PathBuf,
    #[arg(long)]
    pub max_n: usize,
    #[arg(long)]
    pub ball: usize,
    #[arg(long, value_enum, default_value = "ilp")]
    pub solver: SolverArg,
    /// Report the superadditive closure instead of the loop maxima.
    #[arg(long)]
    pub closure: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Two-column text table `n value`.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct SurfaceArgs {
    #[arg(long)]
    pub pres: PathBuf,
    #[arg(long)]
    pub ball: usize,
    /// Fill this loop and assemble the minimal chain.
    #[arg(long, conflicts_with = "random")]
    pub word: Option<String>,
    /// Assemble this many seeded random chains instead.
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(long, default_value_t = 6)]
    pub max_terms: usize,
    #[arg(long, default_value_t = 2)]
    pub max_coeff: i64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub dot: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ConstantsArgs {
    #[arg(long)]
    pub pres: PathBuf,
    /// Radius of the kernel ball holding the certificates.
    #[arg(long)]
    pub ball: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct PushdownArgs {
    #[arg(long)]
    pub pres: PathBuf,
    /// A loop in the kernel generators.
    #[arg(long)]
    pub word: String,
    /// Radius of the extension ball the push-down runs in.
    #[arg(long)]
    pub ball: usize,
    /// Radius of the balls for the initial filling and the kernel areas
    /// (default: half the word length plus one, at most `--ball`).
    #[arg(long)]
    pub fill_ball: Option<usize>,
    /// Radius of the kernel ball for the constants.
    #[arg(long, default_value_t = 4)]
    pub constants_ball: usize,
    #[arg(long, value_enum, default_value = "kernel-fa")]
    pub f_source: FSourceArg,
    #[arg(long, alias = "trace")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ArpairArgs {
    #[arg(long)]
    pub pres: PathBuf,
    #[arg(long)]
    pub max_n: usize,
    #[arg(long)]
    pub ball: usize,
    #[arg(long, value_enum, default_value = "min-area")]
    pub policy: PolicyArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for the two-column tables f.txt and g.txt.
    #[arg(long)]
    pub tables: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct DegreeArgs {
    /// Output of `homfill constants`; supplies M.
    #[arg(long, required_unless_present = "m")]
    pub constants: Option<PathBuf>,
    #[arg(long = "M", id = "m")]
    pub m: Option<i64>,
    #[arg(long = "B", id = "b")]
    pub b: String,
    #[arg(long = "C", id = "c")]
    pub c: String,
    #[arg(long)]
    pub max_n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Two-column text table `n composite`.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub diagram: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct BallArgs {
    #[arg(long)]
    pub pres: PathBuf,
    #[arg(long)]
    pub ball: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct CompareArgs {
    #[arg(long)]
    pub pres: PathBuf,
    #[arg(long)]
    pub other: PathBuf,
    /// Images of the first generators, `a -> w ; b -> w` over the second.
    #[arg(long)]
    pub forward: Option<String>,
    /// Images of the second generators over the first.
    #[arg(long)]
    pub backward: Option<String>,
    #[arg(long)]
    pub max_n: usize,
    #[arg(long)]
    pub ball: usize,
    #[arg(long, default_value_t = 64)]
    pub c_max: i64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Result of a command: the JSON body, its output path, and whether the
/// findings call for a nonzero exit.
struct Outcome {
    result: Value,
    ball_radius: Option<usize>,
    out: Option<PathBuf>,
    exit: i32,
}

impl Outcome {
    fn ok(result: impl Serialize, ball_radius: Option<usize>, out: &Option<PathBuf>) -> Result<Outcome> {
        Ok(Outcome { result: serde_json::to_value(result)?, ball_radius, out: out.clone(), exit: 0 })
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_invariant() {
        2
    } else {
        1
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Parse { .. } => "parse",
        Error::InvalidPresentation(_) => "invalid_presentation",
        Error::LetterOutOfRange { .. } => "letter_out_of_range",
        Error::LiftInverse { .. } => "lift_inverse",
        Error::Unsupported(_) => "unsupported",
        Error::VertexBudget { .. } => "vertex_budget",
        Error::LeavesBall { .. } => "leaves_ball",
        Error::NotClosed(_) => "not_closed",
        Error::NotACycle(_) => "not_a_cycle",
        Error::Infeasible { .. } => "infeasible",
        Error::Budget(_) => "budget",
        Error::Coverage(_) => "coverage",
        Error::Dictionary(_) => "dictionary",
        Error::InvalidSurface(_) => "invalid_surface",
        Error::Invariant(_) => "invariant",
        Error::Io(_) => "io",
    }
}

pub fn error_json(e: &Error) -> Value {
    json!({ "error": { "kind": error_kind(e), "message": e.to_string(), "exit_code": exit_code(e) } })
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

pub fn two_column(header: [&str; 2], rows: impl IntoIterator<Item = (usize, String)>) -> String {
    let mut s = format!("# {}\t{}\n", header[0], header[1]);
    for (n, v) in rows {
        s.push_str(&format!("{n}\t{v}\n"));
    }
    s
}

fn unix_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

fn load_pres(path: &Path) -> Result<GroupSpec> {
    load_group(path)
}

fn fill_config(solver: SolverArg, node_limit: usize) -> FillConfig {
    FillConfig { node_limit, ..FillConfig::with_solver(solver.into()) }
}

fn run_fill(a: &FillArgs) -> Result<Outcome> {
    let g = load_pres(&a.pres)?;
    let ball = CayleyBall::build(&g.backend, &g.presentation, a.ball)?;
    let w = g.presentation.parse_word(&a.word)?;
    let gamma = ball.loop_to_cycle(0, &w)?;
    let r = harea_fill_with(&ball, &gamma, &fill_config(a.solver, a.node_limit))?;
    let exit = if r.status == FillStatus::Optimal { 0 } else { 1 };
    if exit == 0 && (a.diagram.is_some() || a.dot.is_some()) {
        let s = assemble_surface(&ball, &r.chain)?;
        if let Some(p) = &a.dot {
            write_atomic(p, to_dot(&s, g.presentation.generators()).as_bytes())?;
        }
        if let Some(p) = &a.diagram {
            let doc = DiagramDocument { metrics: Some(measure(&s)?), diagram: s };
            write_atomic(p, &pretty(&doc)?)?;
        }
    }
    let result = json!({
        "cycle": g.presentation.format_word(&w),
        "area": (r.status == FillStatus::Optimal).then_some(r.area),
        "status": r.status,
        "chain": r.chain.to_pairs(),
        "ball_radius": r.ball_radius,
        "solver": r.solver,
    });
    Ok(Outcome { result, ball_radius: Some(a.ball), out: a.out.clone(), exit })
}

fn run_fa(a: &FaArgs) -> Result<Outcome> {
    let g = load_pres(&a.pres)?;
    let ball = CayleyBall::build(&g.backend, &g.presentation, a.ball)?;
    let scope = if a.closure { EnumerationScope::LoopsPlusSuperadditive } else { EnumerationScope::LoopsOnly };
    let t = fa_table(&ball, a.max_n, &fill_config(a.solver, FillConfig::default().node_limit), scope)?;
    if let Some(p) = &a.table {
        let rows = t.value_array().into_iter().enumerate().map(|(n, v)| (n, v.to_string()));
        write_atomic(p, two_column(["n", "FA"], rows).as_bytes())?;
    }
    Outcome::ok(&t, Some(a.ball), &a.out)
}

fn run_surface(a: &SurfaceArgs, seed: u64) -> Result<Outcome> {
    let g = load_pres(&a.pres)?;
    let ball = CayleyBall::build(&g.backend, &g.presentation, a.ball)?;
    if let Some(count) = a.random {
        let shape = ChainShape { max_terms: a.max_terms, max_coeff: a.max_coeff };
        let mut rows = Vec::with_capacity(count);
        let mut failures = 0;
        for c in random_two_chains(&ball, count, shape, seed) {
            let s = assemble_surface(&ball, &c)?;
            let report = verify_surface(&s);
            let area_ok = s.area() as i64 == c.l1_norm();
            let boundary_ok = project_boundary(&s)? == ball.boundary_2(&c);
            let pass = report.is_valid() && area_ok && boundary_ok;
            failures += usize::from(!pass);
            rows.push(json!({
                "chain": c.to_pairs(),
                "pass": pass,
                "area": s.area(),
                "violations": report.violations,
                "metrics": if report.is_valid() { Some(measure(&s)?) } else { None },
            }));
        }
        let result = json!({ "samples": count, "failures": failures, "seed": seed, "chains": rows });
        let exit = if failures == 0 { 0 } else { 2 };
        return Ok(Outcome { result, ball_radius: Some(a.ball), out: a.out.clone(), exit });
    }
    let text = a.word.as_deref().ok_or_else(|| Error::Unsupported("give --word or --random".into()))?;
    let w = g.presentation.parse_word(text)?;
    let r = harea_fill_with(&ball, &ball.loop_to_cycle(0, &w)?, &FillConfig::default())?;
    if r.status != FillStatus::Optimal {
        return Err(Error::Infeasible { radius: a.ball, detail: format!("no filling found ({:?})", r.status) });
    }
    let s = assemble_surface(&ball, &r.chain)?;
    if let Some(p) = &a.dot {
        write_atomic(p, to_dot(&s, g.presentation.generators()).as_bytes())?;
    }
    let doc = DiagramDocument { metrics: Some(measure(&s)?), diagram: s };
    Outcome::ok(&doc, Some(a.ball), &a.out)
}

fn extension_of(g: &GroupSpec) -> Result<&crate::extension::FreeExtension> {
    g.extension.as_ref().ok_or_else(|| Error::Unsupported("the group file must declare `backend: extension`".into()))
}

fn run_constants(a: &ConstantsArgs) -> Result<Outcome> {
    let g = load_pres(&a.pres)?;
    let k = compute_constants(extension_of(&g)?, a.ball)?;
    Outcome::ok(&k, Some(a.ball), &a.out)
}

fn run_pushdown(a: &PushdownArgs) -> Result<Outcome> {
    let g = load_pres(&a.pres)?;
    let ext = extension_of(&g)?;
    let constants = compute_constants(ext, a.constants_ball)?;
    let w = g.presentation.parse_word(&a.word)?;
    let n = w.len();
    // The exact ILP is dense in the cell count, so the loop is filled in a
    // small ball and the chain carried into the push-down ball.
    let fill_radius = a.fill_ball.unwrap_or(n / 2 + 1).min(a.ball);
    let small = CayleyBall::build(ext.backend(), ext.presentation(), fill_radius)?;
    let fill = harea_fill_with(&small, &small.loop_to_cycle(0, &w)?, &FillConfig::default())?;
    if fill.status != FillStatus::Optimal {
        return Err(Error::Infeasible { radius: fill_radius, detail: format!("no filling found ({:?})", fill.status) });
    }
    let h_ball = CayleyBall::build(ext.backend(), ext.presentation(), a.ball)?;
    let gamma = h_ball.loop_to_cycle(0, &w)?;
    let chain = words_to_ball_cells(&h_ball, &ball_cells_to_words(&small, &fill.chain))?;
    let f_table = match a.f_source {
        FSourceArg::Input => AreaTable::new(vec![fill.area; n + 1], "area of the input filling"),
        FSourceArg::KernelFa => {
            let kb = CayleyBall::build(ext.kernel_backend(), ext.kernel(), fill_radius)?;
            let t = fa_table(&kb, n.max(1), &FillConfig::default(), EnumerationScope::LoopsOnly)?;
            AreaTable::new(t.value_array(), format!("kernel filling areas in a ball of radius {fill_radius}"))
        }
    };
    let trace = push_down(ext, &h_ball, &gamma, &chain, &constants, &f_table)?;
    let bound = verify_theorem_bound(&trace, &f_table, trace.depth)?;
    let exit = if trace.final_holds && bound.holds { 0 } else { 2 };
    let result = json!({ "constants": constants, "trace": trace, "bound": bound });
    Ok(Outcome { result, ball_radius: Some(a.ball), out: a.out.clone(), exit })
}

fn run_arpair(a: &ArpairArgs) -> Result<Outcome> {
    let g = load_pres(&a.pres)?;
    let r = measure_ar_pair(&g.backend, &g.presentation, a.max_n, a.ball, a.policy.into())?;
    if let Some(dir) = &a.tables {
        std::fs::create_dir_all(dir)?;
        let f = r.f_table.iter().enumerate().map(|(n, v)| (n, v.to_string()));
        write_atomic(&dir.join("f.txt"), two_column(["n", "f"], f).as_bytes())?;
        let gt = r.g_table.iter().enumerate().map(|(n, v)| (n, v.to_string()));
        write_atomic(&dir.join("g.txt"), two_column(["n", "g"], gt).as_bytes())?;
    }
    Outcome::ok(&r, Some(a.ball), &a.out)
}

fn read_constants(path: &Path) -> Result<TransferConstants> {
    let v: Value = serde_json::from_slice(&std::fs::read(path)?)?;
    let body = v.get("result").cloned().unwrap_or(v);
    Ok(serde_json::from_value(body)?)
}

fn run_degree(a: &DegreeArgs) -> Result<Outcome> {
    let (m, ball_radius) = match (&a.m, &a.constants) {
        (Some(m), _) => (*m, None),
        (None, Some(p)) => {
            let k = read_constants(p)?;
            (k.m, Some(k.ball_radius))
        }
        (None, None) => return Err(Error::Unsupported("give --constants or --M".into())),
    };
    let b: PositiveRational = a.b.parse()?;
    let c: PositiveRational = a.c.parse()?;
    let hyp = hyperbolic_ar_pair(b, c, a.max_n);
    let report = polynomial_degree_report(m, &hyp)?;
    if let Some(p) = &a.table {
        let rows = report.composite.iter().cloned().enumerate();
        write_atomic(p, two_column(["n", "composite"], rows).as_bytes())?;
    }
    Outcome::ok(json!({ "pair": hyp, "report": report }), ball_radius, &a.out)
}

fn run_verify(a: &VerifyArgs) -> Result<Outcome> {
    let v: Value = serde_json::from_slice(&std::fs::read(&a.diagram)?)?;
    let body = v.get("result").cloned().unwrap_or(v);
    let doc: DiagramDocument = serde_json::from_value(body)?;
    let report = verify_surface(&doc.diagram);
    let metrics = if report.is_valid() { Some(measure(&doc.diagram)?) } else { None };
    let exit = if report.is_valid() { 0 } else { 1 };
    let result = json!({ "valid": report.is_valid(), "report": report, "metrics": metrics });
    Ok(Outcome { result, ball_radius: None, out: a.out.clone(), exit })
}

fn run_ball(a: &BallArgs) -> Result<Outcome> {
    let g = load_pres(&a.pres)?;
    let ball = CayleyBall::build(&g.backend, &g.presentation, a.ball)?;
    Outcome::ok(ball.export(), Some(a.ball), &a.out)
}

fn parse_images(text: &str, from: &GroupSpec, to: &GroupSpec) -> Result<Vec<crate::word::Word>> {
    let names = from.presentation.generators();
    let mut images: Vec<Option<crate::word::Word>> = vec![None; names.len()];
    for clause in text.split(';').filter(|c| !c.trim().is_empty()) {
        let (lhs, rhs) = clause
            .split_once("->")
            .ok_or_else(|| Error::Parse { line: 1, column: 1, message: format!("expected `g -> word` in {clause:?}") })?;
        let g = names
            .iter()
            .position(|n| n == lhs.trim())
            .ok_or_else(|| Error::Dictionary(format!("unknown generator {:?}", lhs.trim())))?;
        images[g] = Some(parse_word(rhs, to.presentation.generators(), 1, 1)?);
    }
    images
        .into_iter()
        .enumerate()
        .map(|(g, w)| w.ok_or_else(|| Error::Dictionary(format!("no image for {}", names[g]))))
        .collect()
}

fn run_compare(a: &CompareArgs) -> Result<Outcome> {
    let first = load_pres(&a.pres)?;
    let second = load_pres(&a.other)?;
    let dict = match (&a.forward, &a.backward) {
        (Some(f), Some(b)) => {
            GeneratorDictionary { forward: parse_images(f, &first, &second)?, backward: parse_images(b, &second, &first)? }
        }
        (None, None) if first.presentation.generators() == second.presentation.generators() => {
            GeneratorDictionary::identity(first.presentation.rank())
        }
        _ => return Err(Error::Dictionary("give both --forward and --backward".into())),
    };
    let r = compare_presentations(
        &first.presentation,
        &first.backend,
        &second.presentation,
        &second.backend,
        &dict,
        a.max_n,
        a.ball,
        a.c_max,
    )?;
    let exit = if r.holds { 0 } else { 1 };
    Ok(Outcome { result: serde_json::to_value(&r)?, ball_radius: Some(a.ball), out: a.out.clone(), exit })
}

fn pretty(v: &impl Serialize) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(v)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Fill(a) => run_fill(a),
        Command::Fa(a) => run_fa(a),
        Command::Surface(a) => run_surface(a, cli.seed),
        Command::Constants(a) => run_constants(a),
        Command::Pushdown(a) => run_pushdown(a),
        Command::Arpair(a) => run_arpair(a),
        Command::Degree(a) => run_degree(a),
        Command::Verify(a) => run_verify(a),
        Command::Ball(a) => run_ball(a),
        Command::Compare(a) => run_compare(a),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Fill(_) => "fill",
        Command::Fa(_) => "fa",
        Command::Surface(_) => "surface",
        Command::Constants(_) => "constants",
        Command::Pushdown(_) => "pushdown",
        Command::Arpair(_) => "arpair",
        Command::Degree(_) => "degree",
        Command::Verify(_) => "verify",
        Command::Ball(_) => "ball",
        Command::Compare(_) => "compare",
    }
}

/// Runs a parsed command line, writes its outputs, and returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    let started = unix_ms();
    let clock = Instant::now();
    if let Some(b) = cli.budget_vertices {
        std::env::set_var(BUDGET_ENV, b.to_string());
    }
    if let Some(n) = cli.threads {
        // A second call in one process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let fail = |e: &Error| {
        if cli.json_errors {
            eprintln!("{}", error_json(e));
        } else {
            eprintln!("homfill: {e}");
        }
        exit_code(e)
    };
    let outcome = match dispatch(cli) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    let document = json!({
        "meta": {
            "tool": TOOL,
            "version": VERSION,
            "command": command_name(&cli.command),
            "config": cli,
            "seed": cli.seed,
            "ball_radius": outcome.ball_radius,
            "caveat": BALL_CAVEAT,
        },
        "result": outcome.result,
    });
    let bytes = match pretty(&document) {
        Ok(b) => b,
        Err(e) => return fail(&e),
    };
    let written = match &outcome.out {
        Some(path) => write_atomic(path, &bytes).and_then(|_| {
            let mut side = path.clone().into_os_string();
            side.push(".meta.json");
            let meta = json!({
                "started_unix_ms": started,
                "finished_unix_ms": unix_ms(),
                "elapsed_ms": clock.elapsed().as_millis(),
                "threads": rayon::current_num_threads(),
            });
            write_atomic(Path::new(&side), &pretty(&meta)?)
        }),
        None => std::io::stdout().write_all(&bytes).map_err(Error::from),
    };
    match written {
        Ok(()) => outcome.exit,
        Err(e) => fail(&e),
    }
}

/// Entry point for the binary: parses `args` and runs. Usage errors exit 1,
/// keeping 2 for internal invariant failures.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn tables_have_two_columns() {
        let t = two_column(["n", "FA"], vec![(0, "0".into()), (4, "1".into())]);
        assert_eq!(t, "# n\tFA\n0\t0\n4\t1\n");
    }

    #[test]
    fn invariant_errors_exit_two() {
        assert_eq!(exit_code(&Error::Invariant("x".into())), 2);
        assert_eq!(exit_code(&Error::NotClosed("x".into())), 1);
        assert_eq!(error_json(&Error::Budget("b".into()))["error"]["kind"], "budget");
    }
}
