//! Command-line surface for the witness engine: parameter parsing, schedule
//! construction, JSON artifacts, and run traces.
//!
//! Every subcommand produces one JSON artifact. Without `--json` the
//! artifact is the standard output; with `--json <path>` it is written
//! there and a short human summary is printed instead. All integers inside
//! artifacts are decimal strings so arbitrary precision survives any JSON
//! reader; the single exception is the `case` tag of a dichotomy outcome,
//! which is the number 1 or 2 (or the string "inconclusive"). Artifacts
//! also carry a full parameter echo and the deterministic trace of the run;
//! the only field that varies between identical runs is `timestamp`.
//!
//! Witness-producing commands re-verify their own output through the
//! independent checker before emitting it and refuse to write an unverified
//! certificate.
//!
//! Exit codes: 0 success, 1 a `verify` run that concluded anything other
//! than Ok, 2 usage or parse errors, 3 exhausted search budgets (window or
//! stabilization failures, inconclusive outcomes), 4 internal errors,
//! including a failed self-check of the engine's own emission.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use serde_json::{json, Map, Value};

use monogrid::coloring::{Coloring, ColoringError, ColoringSpec};
use monogrid::construct::{self, DiffMode, LevelParams};
use monogrid::dichotomy::{
    self, Budgets, Case1Witness, Case2Witness, DichotomyError, DichotomyOutcome, DriverOutcome,
    FinalWitness, LengthSchedule,
};
use monogrid::grid;
use monogrid::verify::{self, Verdict};
use monogrid::windows;

#[derive(Parser)]
#[command(
    name = "monogrid",
    version,
    about = "Witness engine for monochromatic grid structures in finite colorings"
)]
struct Cli {
    /// Write the JSON artifact to this path and print a one-line summary
    /// instead of the artifact itself.
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact van der Waerden number W(k, c) with an extremal certificate.
    Vdw {
        /// Progression length k, at least 2.
        k: u64,
        /// Palette size c.
        colors: u32,
        /// Cap on partial colorings examined by the exhaustive search.
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
    },
    /// One monochromatic grid inside an ambient window above the base.
    FindGrid(FindGridArgs),
    /// A stabilized grid family: coherent strides across truncation depths.
    Stabilize(StabilizeArgs),
    /// One dichotomy round: block family (case 1), stride regrouping
    /// avoiding the run's color (case 2), or an inconclusive report.
    Dichotomy(RoundArgs),
    /// The full driver: decreasing induction on colors down to a verified
    /// monochromatic witness whose strides carry the color too.
    BrauerSchur(RoundArgs),
    /// Re-check an emitted artifact against a coloring.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct FindGridArgs {
    /// Coloring oracle: const:<c> | periodic:<c1,c2,..> | rand:<seed>:<c> |
    /// file:<path>:<c>.
    #[arg(long)]
    coloring: String,
    /// Number of grid levels n.
    #[arg(long)]
    depth: usize,
    /// Target progression lengths k_1,..,k_n.
    #[arg(long, value_name = "LIST")]
    k: String,
    /// Window plan: certified:<budget> | assumed:<w1,w2,..> |
    /// adaptive:<start,factor,max>.
    #[arg(long)]
    windows: String,
    /// Explicit per-level strides l_1,..,l_n; minimal strides satisfying
    /// the gap condition are generated when omitted.
    #[arg(long, value_name = "LIST")]
    diffs: Option<String>,
    /// Least element of the ambient window.
    #[arg(long, default_value = "1")]
    base: String,
    /// Palette size; taken from the coloring when omitted.
    #[arg(long)]
    colors: Option<u32>,
}

#[derive(Args)]
struct StabilizeArgs {
    /// Coloring oracle: const:<c> | periodic:<c1,c2,..> | rand:<seed>:<c> |
    /// file:<path>:<c>.
    #[arg(long)]
    coloring: String,
    /// Stabilization depth r: how many coherent strides to pin.
    #[arg(long)]
    depth: usize,
    /// Horizon M >= r of truncation depths to search before stabilizing.
    #[arg(long)]
    horizon: Option<usize>,
    /// Target progression lengths k_1,..,k_M.
    #[arg(long, value_name = "LIST")]
    k: String,
    /// Window plan: certified:<budget> | assumed:<w1,w2,..> |
    /// adaptive:<start,factor,max>.
    #[arg(long)]
    windows: String,
    /// Explicit strides; generated minimal under the gap law when omitted.
    #[arg(long, value_name = "LIST")]
    diffs: Option<String>,
    /// Least element of the ambient window.
    #[arg(long, default_value = "1")]
    base: String,
}

#[derive(Args)]
struct RoundArgs {
    /// Coloring oracle: const:<c> | periodic:<c1,c2,..> | rand:<seed>:<c> |
    /// file:<path>:<c>.
    #[arg(long)]
    coloring: String,
    /// Effective palette size; taken from the coloring when omitted.
    #[arg(long)]
    colors: Option<u32>,
    /// Length schedule: affine:<a,b> for k_i = a*i + b, or
    /// list:<v1,v2,..>:affine:<a,b> with an explicit head.
    #[arg(long = "k-schedule", value_name = "RULE")]
    k_schedule: String,
    /// Window plan: certified:<budget> | assumed:<w1,w2,..> |
    /// adaptive:<start,factor,max>.
    #[arg(long)]
    windows: String,
    /// Explicit strides; generated minimal under the gap law when omitted.
    #[arg(long, value_name = "LIST")]
    diffs: Option<String>,
    /// Base of the ambient window the first round works above.
    #[arg(long, default_value = "1")]
    base: String,
    /// Stabilization depth r of the round's base run.
    #[arg(long)]
    depth: u64,
    /// Horizon M >= r of truncation depths searched per base run.
    #[arg(long)]
    horizon: Option<u64>,
    /// Blocks R demanded of a case-1 family (default: the block horizon).
    #[arg(long)]
    blocks: Option<u64>,
    /// Largest stride index H the block search may use, at most r.
    #[arg(long = "block-horizon", value_name = "H")]
    block_horizon: Option<u64>,
    /// Largest number of stride indices in one block.
    #[arg(long = "block-size", value_name = "S")]
    block_size: Option<u64>,
    /// Levels re-enumerated when gating an emission.
    #[arg(long = "verify-depth", value_name = "R")]
    verify_depth: Option<u64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Coloring oracle the witness claims to live in.
    #[arg(long)]
    coloring: String,
    /// Path of an artifact emitted by a witness-producing subcommand.
    #[arg(long)]
    witness: PathBuf,
    /// Levels to re-enumerate; the witness depth when omitted.
    #[arg(long)]
    depth: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let sink = Sink { path: cli.json };
    let run = match cli.command {
        Command::Vdw { k, colors, budget } => run_vdw(k, colors, budget, &sink),
        Command::FindGrid(a) => run_find_grid(&a, &sink),
        Command::Stabilize(a) => run_stabilize(&a, &sink),
        Command::Dichotomy(a) => run_dichotomy(&a, &sink),
        Command::BrauerSchur(a) => run_driver(&a, &sink),
        Command::Verify(a) => run_verify(&a, &sink),
    };
    match run {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

// ---------------------------------------------------------------- failures

/// A run that produced no artifact, sorted by exit code: usage errors (2),
/// exhausted search budgets (3), broken internal invariants (4).
enum Failure {
    Usage(String),
    Budget(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Budget(_) => 3,
            Failure::Internal(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Budget(m) | Failure::Internal(m) => m,
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn window_failure(e: windows::WindowError) -> Failure {
    match e {
        windows::WindowError::BudgetExceeded { .. } | windows::WindowError::PlanExhausted { .. } => {
            Failure::Budget(e.to_string())
        }
        windows::WindowError::Spec(_) | windows::WindowError::Coloring(_) => {
            Failure::Usage(e.to_string())
        }
    }
}

fn construct_failure(e: construct::ConstructError) -> Failure {
    use construct::ConstructError as E;
    match e {
        E::WindowExhausted { .. } | E::StabilizationFailed { .. } => Failure::Budget(e.to_string()),
        E::Window(w) => window_failure(w),
        E::Coloring(_) | E::Spec(_) => Failure::Usage(e.to_string()),
        E::Grid(_) | E::Internal(_) => Failure::Internal(e.to_string()),
    }
}

fn dichotomy_failure(e: DichotomyError) -> Failure {
    if e.is_budget() {
        return Failure::Budget(e.to_string());
    }
    match e {
        DichotomyError::Construct(c) => construct_failure(c),
        DichotomyError::Window(w) => window_failure(w),
        DichotomyError::Coloring(_) | DichotomyError::Spec(_) => Failure::Usage(e.to_string()),
        _ => Failure::Internal(e.to_string()),
    }
}

/// Gates an emission on its own verification: anything short of Ok means
/// the engine is about to publish a certificate it cannot stand behind,
/// which is an internal error, never the user's.
fn gate(outcome: Result<Verdict, ColoringError>, what: &str) -> Result<Verdict, Failure> {
    match outcome {
        Ok(v) if v.is_ok() => Ok(v),
        Ok(v) => Err(Failure::Internal(format!(
            "emitted {what} failed its self-check: {v:?}"
        ))),
        Err(e) => Err(Failure::Internal(format!(
            "self-check of the {what} could not re-query the oracle: {e}"
        ))),
    }
}

// ---------------------------------------------------------------- plumbing

struct Sink {
    path: Option<PathBuf>,
}

impl Sink {
    /// Emits the artifact: to the path given with `--json` (printing the
    /// summary lines on standard output), or as the standard output itself.
    fn emit(&self, artifact: &Value, summary: &str) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(artifact)
            .map_err(|e| Failure::Internal(format!("artifact serialization failed: {e}")))?;
        match &self.path {
            Some(path) => {
                std::fs::write(path, text + "\n")
                    .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
                if !summary.is_empty() {
                    println!("{summary}");
                }
            }
            None => println!("{text}"),
        }
        Ok(())
    }
}

fn to_obj(serialized: serde_json::Result<Value>) -> Result<Map<String, Value>, Failure> {
    match serialized {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(Failure::Internal(
            "artifact payload is not a JSON object".into(),
        )),
        Err(e) => Err(Failure::Internal(format!(
            "artifact serialization failed: {e}"
        ))),
    }
}

fn to_val(serialized: serde_json::Result<Value>) -> Result<Value, Failure> {
    serialized.map_err(|e| Failure::Internal(format!("artifact serialization failed: {e}")))
}

fn echo(pairs: &[(&str, String)]) -> Value {
    Value::Object(
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), Value::String(v.clone())))
            .collect(),
    )
}

fn dec_u64s(v: &[u64]) -> Value {
    Value::Array(v.iter().map(|x| Value::String(x.to_string())).collect())
}

fn dec_bigs(v: &[BigUint]) -> Value {
    Value::Array(v.iter().map(|x| Value::String(x.to_string())).collect())
}

/// Seconds since the Unix epoch, as a decimal string. The one artifact
/// field excluded from byte-stability comparisons.
fn timestamp() -> Value {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Value::String(secs.to_string())
}

fn parse_u64_list(s: &str, what: &str) -> Result<Vec<u64>, Failure> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| usage(format!("bad {what} entry {t:?}")))
        })
        .collect()
}

fn parse_big(s: &str, what: &str) -> Result<BigUint, Failure> {
    s.trim()
        .parse::<BigUint>()
        .map_err(|_| usage(format!("bad {what} value {s:?}")))
}

fn parse_big_list(s: &str, what: &str) -> Result<Vec<BigUint>, Failure> {
    s.split(',').map(|t| parse_big(t, what)).collect()
}

fn build_oracle(spec: &str) -> Result<Box<dyn Coloring>, Failure> {
    ColoringSpec::parse(spec)
        .and_then(|s| s.build())
        .map_err(|e| usage(e.to_string()))
}

fn parse_diff_mode(diffs: &Option<String>) -> Result<DiffMode, Failure> {
    Ok(match diffs {
        Some(list) => DiffMode::Explicit(parse_big_list(list, "stride")?),
        None => DiffMode::Auto,
    })
}

fn diffs_echo(diffs: &Option<String>) -> String {
    diffs.clone().unwrap_or_else(|| "auto".into())
}

// ------------------------------------------------------------ subcommands

fn run_vdw(k: u64, colors: u32, budget: u64, sink: &Sink) -> Result<ExitCode, Failure> {
    if k < 2 {
        return Err(usage("progression length k must be at least 2"));
    }
    if colors == 0 {
        return Err(usage("palette size must be at least 1"));
    }
    let result = windows::vdw_number(k, &BigUint::from(colors), budget).map_err(window_failure)?;
    if result.extremal.len() + 1 != result.value as usize {
        return Err(Failure::Internal(
            "extremal certificate does not span the window below the value".into(),
        ));
    }
    if windows::find_mono_ap(&result.extremal, k).is_some() {
        return Err(Failure::Internal(
            "extremal certificate contains a monochromatic progression".into(),
        ));
    }
    let word: String = result.extremal.iter().map(u32::to_string).collect();
    let mut art = Map::new();
    art.insert("kind".into(), json!("vdw"));
    art.insert("k".into(), Value::String(k.to_string()));
    art.insert("colors".into(), Value::String(colors.to_string()));
    art.insert("value".into(), Value::String(result.value.to_string()));
    art.insert(
        "extremal".into(),
        Value::Array(
            result
                .extremal
                .iter()
                .map(|c| Value::String(c.to_string()))
                .collect(),
        ),
    );
    art.insert(
        "params".into(),
        echo(&[
            ("budget", budget.to_string()),
            ("colors", colors.to_string()),
            ("k", k.to_string()),
        ]),
    );
    art.insert("verified".into(), to_val(serde_json::to_value(Verdict::Ok { depth: 0 }))?);
    art.insert("timestamp".into(), timestamp());
    sink.emit(&Value::Object(art), &format!("{}\n{word}", result.value))?;
    Ok(ExitCode::SUCCESS)
}

fn run_find_grid(a: &FindGridArgs, sink: &Sink) -> Result<ExitCode, Failure> {
    let oracle = build_oracle(&a.coloring)?;
    let lengths = parse_u64_list(&a.k, "length")?;
    if lengths.len() != a.depth {
        return Err(usage(format!(
            "--depth {} disagrees with the {} lengths in --k",
            a.depth,
            lengths.len()
        )));
    }
    let plan = windows::WindowPlan::parse(&a.windows).map_err(window_failure)?;
    let palette = match a.colors {
        Some(0) => return Err(usage("palette size must be at least 1")),
        Some(c) => c,
        None => oracle.palette_size(),
    };
    let resolved = construct::resolve_windows(&plan, &lengths, palette).map_err(window_failure)?;
    let diffs = match parse_diff_mode(&a.diffs)? {
        DiffMode::Explicit(ls) => ls,
        DiffMode::Auto => grid::minimal_diffs(&resolved),
    };
    let base = parse_big(&a.base, "base")?;
    let params = LevelParams::new(base, diffs, resolved.clone(), lengths, palette)
        .map_err(construct_failure)?;
    let witness = construct::find_mono_grid(oracle.as_ref(), &params).map_err(construct_failure)?;
    let depth = witness.depth();
    let verdict = gate(
        verify::verify_grid_witness(oracle.as_ref(), &witness, depth),
        "grid witness",
    )?;

    let summary = format!(
        "base {} diffs {} color {}",
        witness.base,
        witness
            .diffs
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(","),
        witness.color
    );
    let mut art = to_obj(serde_json::to_value(&witness))?;
    art.insert("kind".into(), json!("grid"));
    art.insert(
        "params".into(),
        echo(&[
            ("base", a.base.clone()),
            ("coloring", a.coloring.clone()),
            ("colors", palette.to_string()),
            ("depth", a.depth.to_string()),
            ("diffs", diffs_echo(&a.diffs)),
            ("k", a.k.clone()),
            ("windows", a.windows.clone()),
        ]),
    );
    art.insert(
        "trace".into(),
        json!({
            "strides": dec_bigs(&params.diffs),
            "windows": dec_u64s(&resolved),
        }),
    );
    art.insert("verified".into(), to_val(serde_json::to_value(&verdict))?);
    art.insert("timestamp".into(), timestamp());
    sink.emit(&Value::Object(art), &summary)?;
    Ok(ExitCode::SUCCESS)
}

fn run_stabilize(a: &StabilizeArgs, sink: &Sink) -> Result<ExitCode, Failure> {
    let oracle = build_oracle(&a.coloring)?;
    let lengths = parse_u64_list(&a.k, "length")?;
    let horizon = a.horizon.unwrap_or(a.depth);
    let plan = windows::WindowPlan::parse(&a.windows).map_err(window_failure)?;
    let diff_mode = parse_diff_mode(&a.diffs)?;
    let base = parse_big(&a.base, "base")?;
    let witness = construct::infinitary_vdw(
        oracle.as_ref(),
        &base,
        &diff_mode,
        &plan,
        &lengths,
        a.depth,
        horizon,
    )
    .map_err(construct_failure)?;
    let verdict = gate(
        verify::verify_triple(oracle.as_ref(), &witness.triple, witness.color, a.depth),
        "stabilized family",
    )?;

    let summary = format!(
        "depth {} color {} strides {}",
        a.depth,
        witness.color,
        witness
            .triple
            .diffs
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(","),
    );
    let mut art = to_obj(serde_json::to_value(&witness))?;
    art.insert("kind".into(), json!("stabilized"));
    art.insert(
        "params".into(),
        echo(&[
            ("base", a.base.clone()),
            ("coloring", a.coloring.clone()),
            ("depth", a.depth.to_string()),
            ("diffs", diffs_echo(&a.diffs)),
            ("horizon", horizon.to_string()),
            ("k", a.k.clone()),
            ("windows", a.windows.clone()),
        ]),
    );
    art.insert("verified".into(), to_val(serde_json::to_value(&verdict))?);
    art.insert("timestamp".into(), timestamp());
    sink.emit(&Value::Object(art), &summary)?;
    Ok(ExitCode::SUCCESS)
}

/// Everything a round or driver run parses out of [`RoundArgs`].
struct RoundSetup {
    oracle: Box<dyn Coloring>,
    palette: u32,
    schedule: LengthSchedule,
    plan: windows::WindowPlan,
    diff_mode: DiffMode,
    base: BigUint,
    budgets: Budgets,
}

impl RoundSetup {
    fn parse(a: &RoundArgs) -> Result<Self, Failure> {
        let oracle = build_oracle(&a.coloring)?;
        let palette = match a.colors {
            Some(0) => return Err(usage("palette size must be at least 1")),
            Some(c) => c,
            None => oracle.palette_size(),
        };
        let schedule =
            LengthSchedule::parse(&a.k_schedule).map_err(|e| usage(e.to_string()))?;
        schedule.validate().map_err(|e| usage(e.to_string()))?;
        if !schedule.is_unbounded() {
            return Err(usage(
                "the length schedule must be unbounded here; give the affine tail a positive slope",
            ));
        }
        let plan = windows::WindowPlan::parse(&a.windows).map_err(window_failure)?;
        let diff_mode = parse_diff_mode(&a.diffs)?;
        let base = parse_big(&a.base, "base")?;
        let block_horizon = a.block_horizon.unwrap_or(a.depth);
        let budgets = Budgets {
            depth: a.depth,
            horizon: a.horizon.unwrap_or(a.depth),
            blocks: a.blocks.unwrap_or(block_horizon),
            block_horizon,
            block_size: a.block_size.unwrap_or(block_horizon),
            verify_depth: a.verify_depth.unwrap_or(a.depth),
        };
        budgets.validate().map_err(|e| usage(e.to_string()))?;
        Ok(RoundSetup {
            oracle,
            palette,
            schedule,
            plan,
            diff_mode,
            base,
            budgets,
        })
    }

    fn echo(&self, a: &RoundArgs) -> Value {
        echo(&[
            ("base", a.base.clone()),
            ("block-horizon", self.budgets.block_horizon.to_string()),
            ("block-size", self.budgets.block_size.to_string()),
            ("blocks", self.budgets.blocks.to_string()),
            ("coloring", a.coloring.clone()),
            ("colors", self.palette.to_string()),
            ("depth", self.budgets.depth.to_string()),
            ("diffs", diffs_echo(&a.diffs)),
            ("horizon", self.budgets.horizon.to_string()),
            ("k-schedule", a.k_schedule.clone()),
            ("verify-depth", self.budgets.verify_depth.to_string()),
            ("windows", a.windows.clone()),
        ])
    }
}

fn case1_artifact(w: &Case1Witness) -> Result<Map<String, Value>, Failure> {
    let mut art = to_obj(serde_json::to_value(w))?;
    art.insert("case".into(), json!(1));
    Ok(art)
}

fn case2_artifact(w: &Case2Witness) -> Result<Map<String, Value>, Failure> {
    let mut art = to_obj(serde_json::to_value(w))?;
    art.insert("case".into(), json!(2));
    Ok(art)
}

fn run_dichotomy(a: &RoundArgs, sink: &Sink) -> Result<ExitCode, Failure> {
    let setup = RoundSetup::parse(a)?;
    let outcome = dichotomy::dichotomy(
        setup.oracle.as_ref(),
        &setup.base,
        setup.palette,
        &setup.schedule,
        &setup.plan,
        &setup.diff_mode,
        &setup.budgets,
    )
    .map_err(dichotomy_failure)?;

    let (mut art, summary, code) = match &outcome {
        DichotomyOutcome::Case1(w) => {
            let verdict = gate(
                verify::verify_case1(
                    setup.oracle.as_ref(),
                    w,
                    setup.budgets.verify_depth as usize,
                ),
                "case-1 witness",
            )?;
            let mut art = case1_artifact(w)?;
            art.insert("verified".into(), to_val(serde_json::to_value(&verdict))?);
            let summary = format!(
                "case 1: {} strides share color {} with their grid",
                w.dset.len(),
                w.color
            );
            (art, summary, ExitCode::SUCCESS)
        }
        DichotomyOutcome::Case2(w) => {
            let verdict = gate(
                verify::verify_case2(setup.oracle.as_ref(), w, w.depth()),
                "case-2 witness",
            )?;
            let mut art = case2_artifact(w)?;
            art.insert("verified".into(), to_val(serde_json::to_value(&verdict))?);
            let summary = format!(
                "case 2: {} regrouped strides avoid color {}",
                w.newdiffs.len(),
                w.forbidden
            );
            (art, summary, ExitCode::SUCCESS)
        }
        DichotomyOutcome::Inconclusive { reason } => {
            let mut art = Map::new();
            art.insert("case".into(), json!("inconclusive"));
            art.insert("reason".into(), json!(reason));
            (art, format!("inconclusive: {reason}"), ExitCode::from(3))
        }
    };
    art.insert("kind".into(), json!("dichotomy"));
    art.insert("params".into(), setup.echo(a));
    art.insert("timestamp".into(), timestamp());
    sink.emit(&Value::Object(art), &summary)?;
    Ok(code)
}

fn run_driver(a: &RoundArgs, sink: &Sink) -> Result<ExitCode, Failure> {
    let setup = RoundSetup::parse(a)?;
    if let Some(c) = a.colors {
        let actual = setup.oracle.palette_size();
        if c != actual {
            return Err(usage(format!(
                "--colors {c} disagrees with the coloring's palette of {actual}"
            )));
        }
    }
    let outcome = dichotomy::brauer_schur(
        setup.oracle.as_ref(),
        &setup.base,
        &setup.schedule,
        &setup.plan,
        &setup.diff_mode,
        &setup.budgets,
    )
    .map_err(dichotomy_failure)?;

    let (mut art, summary, code) = match &outcome {
        DriverOutcome::Witness(fw) => {
            let verdict = gate(
                verify::verify_case1(
                    setup.oracle.as_ref(),
                    &fw.witness,
                    setup.budgets.verify_depth as usize,
                ),
                "final witness",
            )?;
            let mut art = Map::new();
            art.insert("bases".into(), dec_bigs(&fw.witness.triple.bases));
            art.insert("diffs".into(), dec_bigs(&fw.witness.triple.diffs));
            art.insert("lengths".into(), dec_u64s(&fw.witness.triple.lengths));
            art.insert("dset".into(), dec_bigs(&fw.witness.dset));
            art.insert("color".into(), to_val(serde_json::to_value(fw.witness.color))?);
            art.insert("rounds".into(), to_val(serde_json::to_value(&fw.rounds))?);
            art.insert("witness".into(), to_val(serde_json::to_value(&fw.witness))?);
            art.insert("verified".into(), to_val(serde_json::to_value(&verdict))?);
            let summary = format!(
                "witness after {} round(s): {} strides monochromatic in color {}",
                fw.rounds.len(),
                fw.witness.dset.len(),
                fw.witness.color
            );
            (art, summary, ExitCode::SUCCESS)
        }
        DriverOutcome::Inconclusive { reason, rounds } => {
            let mut art = Map::new();
            art.insert("reason".into(), json!(reason));
            art.insert("rounds".into(), to_val(serde_json::to_value(rounds))?);
            let summary = format!("inconclusive after {} round(s): {reason}", rounds.len());
            (art, summary, ExitCode::from(3))
        }
    };
    art.insert("kind".into(), json!("final"));
    art.insert("params".into(), setup.echo(a));
    art.insert("timestamp".into(), timestamp());
    sink.emit(&Value::Object(art), &summary)?;
    Ok(code)
}

// ----------------------------------------------------------- verification

fn run_verify(a: &VerifyArgs, sink: &Sink) -> Result<ExitCode, Failure> {
    let oracle = build_oracle(&a.coloring)?;
    let text = std::fs::read_to_string(&a.witness)
        .map_err(|e| usage(format!("cannot read {}: {e}", a.witness.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| usage(format!("{} is not JSON: {e}", a.witness.display())))?;
    let kind = value
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| usage("artifact carries no \"kind\" tag"))?
        .to_string();

    let verdict = check_artifact(oracle.as_ref(), &kind, &value, a.depth)?;
    let summary = match &verdict {
        Verdict::Ok { depth } => format!("ok (depth {depth})"),
        Verdict::CounterexampleAt {
            element,
            expected,
            found,
            level,
        } => format!(
            "counterexample at {element}: expected color {expected}, found {found} (level {level})"
        ),
        Verdict::ContainmentFailure { element, level } => {
            format!("containment failure at {element} (level {level})")
        }
        Verdict::StructureFailure(m) => format!("structure failure: {m}"),
    };
    let mut art = Map::new();
    art.insert("kind".into(), json!("verdict"));
    art.insert(
        "params".into(),
        echo(&[
            ("coloring", a.coloring.clone()),
            (
                "depth",
                a.depth.map_or_else(|| "witness".into(), |d| d.to_string()),
            ),
            ("witness", a.witness.display().to_string()),
        ]),
    );
    art.insert("verdict".into(), to_val(serde_json::to_value(&verdict))?);
    art.insert("timestamp".into(), timestamp());
    sink.emit(&Value::Object(art), &summary)?;
    Ok(if verdict.is_ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn malformed(e: serde_json::Error) -> Failure {
    usage(format!("malformed witness: {e}"))
}

fn check_artifact(
    oracle: &dyn Coloring,
    kind: &str,
    value: &Value,
    depth: Option<u64>,
) -> Result<Verdict, Failure> {
    let oracle_err =
        |e: ColoringError| usage(format!("the coloring cannot cover the witness: {e}"));
    match kind {
        "vdw" => check_vdw_artifact(value),
        "grid" => {
            let w: construct::GridWitness =
                serde_json::from_value(value.clone()).map_err(malformed)?;
            let d = depth.unwrap_or(w.depth() as u64).max(1) as usize;
            verify::verify_grid_witness(oracle, &w, d).map_err(oracle_err)
        }
        "stabilized" => {
            let w: construct::InfinitaryWitness =
                serde_json::from_value(value.clone()).map_err(malformed)?;
            let d = depth.unwrap_or(w.triple.depth() as u64).max(1) as usize;
            verify::verify_triple(oracle, &w.triple, w.color, d).map_err(oracle_err)
        }
        "dichotomy" => match value.get("case") {
            Some(Value::Number(n)) if n.as_u64() == Some(1) => {
                let w: Case1Witness = serde_json::from_value(value.clone()).map_err(malformed)?;
                let d = depth.unwrap_or(w.triple.depth() as u64).max(1) as usize;
                verify::verify_case1(oracle, &w, d).map_err(oracle_err)
            }
            Some(Value::Number(n)) if n.as_u64() == Some(2) => {
                let w: Case2Witness = serde_json::from_value(value.clone()).map_err(malformed)?;
                let d = depth.unwrap_or(w.depth() as u64).max(1) as usize;
                verify::verify_case2(oracle, &w, d).map_err(oracle_err)
            }
            Some(Value::String(s)) if s == "inconclusive" => Err(usage(
                "an inconclusive outcome carries no witness to verify",
            )),
            _ => Err(usage("dichotomy artifact carries no usable \"case\" tag")),
        },
        "final" => {
            if value.get("witness").is_none() {
                return Err(usage(
                    "an inconclusive driver run carries no witness to verify",
                ));
            }
            let fw: FinalWitness = serde_json::from_value(value.clone()).map_err(malformed)?;
            let d = depth.unwrap_or(fw.witness.triple.depth() as u64).max(1) as usize;
            verify::verify_case1(oracle, &fw.witness, d).map_err(oracle_err)
        }
        other => Err(usage(format!("unknown artifact kind {other:?}"))),
    }
}

/// Re-derives the two claims a `vdw` artifact makes: the extremal word
/// spans exactly the window below the value, and it contains no
/// monochromatic k-progression. The coloring flag plays no part; the word
/// itself is the coloring under test.
fn check_vdw_artifact(value: &Value) -> Result<Verdict, Failure> {
    let field = |name: &str| -> Result<u64, Failure> {
        value
            .get(name)
            .and_then(Value::as_str)
            .and_then(|s| s.parse::<u64>().ok())
            .ok_or_else(|| usage(format!("vdw artifact lacks a decimal \"{name}\"")))
    };
    let k = field("k")?;
    let v = field("value")?;
    let colors = field("colors")?;
    let word = value
        .get("extremal")
        .and_then(Value::as_array)
        .ok_or_else(|| usage("vdw artifact lacks an \"extremal\" array"))?
        .iter()
        .map(|e| {
            e.as_str()
                .and_then(|s| s.parse::<u32>().ok())
                .ok_or_else(|| usage("bad color entry in the extremal word"))
        })
        .collect::<Result<Vec<u32>, Failure>>()?;
    if k < 2 {
        return Err(usage("vdw artifact needs k of at least 2"));
    }
    if word.len() as u64 + 1 != v {
        return Ok(Verdict::StructureFailure(format!(
            "extremal word has {} entries, the value {v} demands {}",
            word.len(),
            v - 1
        )));
    }
    if let Some(c) = word.iter().find(|&&c| c == 0 || u64::from(c) > colors) {
        return Ok(Verdict::StructureFailure(format!(
            "extremal word entry {c} lies outside the palette [1, {colors}]"
        )));
    }
    Ok(match windows::find_mono_ap(&word, k) {
        None => Verdict::Ok { depth: 0 },
        Some(ap) => Verdict::StructureFailure(format!(
            "monochromatic {k}-term progression at start {}, step {}",
            ap.start, ap.step
        )),
    })
}
