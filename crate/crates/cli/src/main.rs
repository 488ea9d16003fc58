//! `sca`: command-line front end. Every subcommand prints one JSON result on
//! stdout and a one-line summary on stderr. Exit codes: 0 true, 1 false,
//! 2 error, 3 resource exhausted.

mod render;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use sca_core::corpus;
use sca_core::ppt_pfa::{self, Pfa, Threshold};
use sca_core::rational::format_rational;
use sca_core::simulation::{self as sim, GadgetKind, Injection, Mode, RescaleParams, SearchBounds, Surjection, Trim};
use sca_core::symbolic::{self, Verdict};
use sca_core::weighted;
use sca_core::{
    conservation_check, cylinder_prob, parse_sca, pushforward_distribution, sample_diagram, Alphabet, Budget,
    Conservation, Error, PeriodicConfig, Sca, Word,
};

use render::Style;

#[derive(Parser)]
#[command(name = "sca", version, about = "Decision procedures and constructions for stochastic cellular automata")]
struct Cli {
    #[command(flatten)]
    budget: BudgetArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct BudgetArgs {
    /// Maximum rule-table entries
    #[arg(long, global = true)]
    max_table: Option<u64>,
    /// Maximum enumerated assignments or candidates
    #[arg(long, global = true)]
    max_enum: Option<u64>,
    /// Maximum automaton or graph states
    #[arg(long, global = true)]
    max_states: Option<u64>,
}

impl BudgetArgs {
    fn budget(&self) -> Budget {
        let mut b = Budget::default();
        if let Some(v) = self.max_table {
            b.max_table = v;
        }
        if let Some(v) = self.max_enum {
            b.max_enum = v;
        }
        if let Some(v) = self.max_states {
            b.max_states = v;
        }
        b
    }
}

/// An SCA document path, or `corpus:NAME` for a built-in automaton.
type Source = String;

#[derive(Args)]
struct Pair {
    #[arg(long)]
    a: Source,
    #[arg(long)]
    b: Source,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    D,
    N,
    S,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::D => Mode::D,
            ModeArg::N => Mode::N,
            ModeArg::S => Mode::S,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GadgetArg {
    SurjectivityLift,
    SquareNoise,
}

#[derive(Subcommand)]
enum Command {
    /// Probability that `t` steps on WINDOW produce TARGET
    Prob {
        #[arg(long)]
        sca: Source,
        #[arg(long)]
        window: String,
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 1)]
        t: usize,
    },
    /// Exact output distribution of `t` steps on WINDOW
    Distribution {
        #[arg(long)]
        sca: Source,
        #[arg(long)]
        window: String,
        #[arg(long, default_value_t = 1)]
        t: usize,
    },
    /// Seeded space-time diagram from a periodic configuration
    Simulate {
        #[arg(long)]
        sca: Source,
        /// One period of the initial configuration
        #[arg(long)]
        config: String,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// Defaults to $SCA_SEED, then 0
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "text")]
        style: Style,
        /// Where to write the rendering; required for pgm
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Whether the rule ignores its random input
    Deterministic {
        #[arg(long)]
        sca: Source,
    },
    /// Whether V' = {0}; prints the local distributions when it is
    Cfca {
        #[arg(long)]
        sca: Source,
    },
    /// Equality of the stochastic global functions of `t` steps
    Equal {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, default_value_t = 1)]
        t: usize,
    },
    /// Equality of the non-deterministic global functions of `t` steps
    NdEqual {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, default_value_t = 1)]
        t: usize,
    },
    Noisy {
        #[arg(long)]
        sca: Source,
    },
    Surjective {
        #[arg(long)]
        sca: Source,
    },
    Injective {
        #[arg(long)]
        sca: Source,
    },
    Preinjective {
        #[arg(long)]
        sca: Source,
    },
    /// Pattern probability threshold for a CFCA, exponential threshold
    PptCfca {
        #[command(flatten)]
        ppt: PptArgs,
    },
    /// Pattern probability threshold for any SCA, superexponential threshold
    PptSca {
        #[command(flatten)]
        ppt: PptArgs,
    },
    /// Acceptance probability of a word by a PFA
    PfaProb {
        #[arg(long)]
        pfa: PathBuf,
        #[arg(long)]
        word: String,
    },
    /// The SCA encoding a PFA
    EncodePfa {
        #[arg(long)]
        pfa: PathBuf,
    },
    /// Rescaling by "m,t,z"
    Rescale {
        #[arg(long)]
        sca: Source,
        #[arg(long)]
        params: String,
    },
    /// Restriction to the listed states (comma separated)
    Restrict {
        #[arg(long)]
        sca: Source,
        #[arg(long)]
        states: String,
    },
    /// Projection by a map "q=img,q2=img2,..."; unlisted states map to themselves
    Project {
        #[arg(long)]
        sca: Source,
        #[arg(long)]
        map: String,
    },
    /// Whether A^pa equals the trimmed B^pb
    Simulates {
        /// Simulated automaton
        #[arg(long)]
        a: Source,
        /// Simulator
        #[arg(long)]
        b: Source,
        #[arg(long, default_value = "1,1,0")]
        pa: String,
        #[arg(long, default_value = "1,1,0")]
        pb: String,
        /// Restrict B^pb to the tokens of A
        #[arg(long)]
        inject: bool,
        /// Then project by "q=img,..."
        #[arg(long)]
        project: Option<String>,
        #[arg(long, value_enum, default_value = "s")]
        mode: ModeArg,
    },
    /// Bounded search for a simulation of A by B
    SearchSim {
        #[arg(long)]
        a: Source,
        #[arg(long)]
        b: Source,
        #[arg(long, default_value_t = 2)]
        max_m: usize,
        #[arg(long, default_value_t = 2)]
        max_t: usize,
        #[arg(long, default_value_t = 1)]
        max_shift: i64,
        #[arg(long, value_enum, default_value = "s")]
        mode: ModeArg,
    },
    /// The correlation-free host whose square restricts to the automaton
    CfcaHost {
        #[arg(long)]
        sca: Source,
    },
    /// Finite coupling stage on one window
    Coupling {
        #[command(flatten)]
        pair: Pair,
        #[arg(long)]
        window: String,
        #[arg(long, default_value_t = 0)]
        n: usize,
    },
    /// Gadget construction from a deterministic CA
    Gadget {
        #[arg(long, value_enum)]
        kind: GadgetArg,
        #[arg(long)]
        sca: Source,
    },
    /// Number conservation of `t` steps on finite supports
    Conserve {
        #[arg(long)]
        sca: Source,
        #[arg(long, default_value_t = 3)]
        support: usize,
        #[arg(long, default_value_t = 1)]
        t: usize,
    },
    /// Prints a built-in automaton or PFA as a document
    Corpus {
        #[arg(long)]
        name: Option<String>,
    },
}

#[derive(Args)]
struct PptArgs {
    #[arg(long)]
    sca: Source,
    #[arg(long)]
    x: String,
    #[arg(long)]
    y: String,
    #[arg(long)]
    z: String,
    /// `exp:alpha,lambda` or `sup:theta,c,d`
    #[arg(long)]
    threshold: String,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Prob { .. } => "prob",
            Command::Distribution { .. } => "distribution",
            Command::Simulate { .. } => "simulate",
            Command::Deterministic { .. } => "deterministic",
            Command::Cfca { .. } => "cfca",
            Command::Equal { .. } => "equal",
            Command::NdEqual { .. } => "nd-equal",
            Command::Noisy { .. } => "noisy",
            Command::Surjective { .. } => "surjective",
            Command::Injective { .. } => "injective",
            Command::Preinjective { .. } => "preinjective",
            Command::PptCfca { .. } => "ppt-cfca",
            Command::PptSca { .. } => "ppt-sca",
            Command::PfaProb { .. } => "pfa-prob",
            Command::EncodePfa { .. } => "encode-pfa",
            Command::Rescale { .. } => "rescale",
            Command::Restrict { .. } => "restrict",
            Command::Project { .. } => "project",
            Command::Simulates { .. } => "simulates",
            Command::SearchSim { .. } => "search-sim",
            Command::CfcaHost { .. } => "cfca-host",
            Command::Coupling { .. } => "coupling",
            Command::Gadget { .. } => "gadget",
            Command::Conserve { .. } => "conserve",
            Command::Corpus { .. } => "corpus",
        }
    }
}

/// What a command produced before it is wrapped into the result document.
struct Outcome {
    status: bool,
    payload: Value,
    summary: String,
}

impl Outcome {
    fn new(status: bool, payload: Value, summary: impl Into<String>) -> Outcome {
        Outcome { status, payload, summary: summary.into() }
    }
}

type Res = Result<Outcome, Error>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let doc = json!({
                "status": "error",
                "command": Value::Null,
                "payload": {"error": "usage", "message": e.to_string()},
                "timing_ms": 0,
            });
            emit(&doc);
            eprint!("{}", e.render());
            return ExitCode::from(2);
        }
    };
    let budget = cli.budget.budget();
    let name = cli.command.name();
    let start = Instant::now();
    let result = run(cli.command, &budget);
    let timing = start.elapsed().as_secs_f64() * 1000.0;
    let (status, payload, code, summary) = match result {
        Ok(o) => {
            let s = if o.status { "true" } else { "false" };
            (s, o.payload, if o.status { 0 } else { 1 }, o.summary)
        }
        Err(e) if e.is_resource_exhausted() => {
            ("resource-exhausted", json!({"error": format!("{e:?}"), "message": e.to_string()}), 3, e.to_string())
        }
        Err(e) => ("error", json!({"error": format!("{e:?}"), "message": e.to_string()}), 2, e.to_string()),
    };
    let doc = json!({
        "status": status,
        "command": name,
        "payload": payload,
        "timing_ms": (timing * 1000.0).round() / 1000.0,
    });
    emit(&doc);
    eprintln!("{name}: {status}: {summary}");
    ExitCode::from(code)
}

/// Writes the result document; a closed stdout is not worth a panic.
fn emit(doc: &Value) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(doc).unwrap());
}

fn load_sca(src: &str, budget: &Budget) -> Result<Sca, Error> {
    if let Some(name) = src.strip_prefix("corpus:") {
        return corpus::by_name(name).ok_or_else(|| Error::InvalidArgument(format!("no corpus automaton `{name}`")));
    }
    parse_sca(&read(Path::new(src))?, budget)
}

fn load_pfa(path: &Path) -> Result<Pfa, Error> {
    if let Some(name) = path.to_str().and_then(|s| s.strip_prefix("corpus:")) {
        return corpus::named_pfas()
            .into_iter()
            .find(|(n, _)| *n == name)
            .map(|(_, p)| p)
            .ok_or_else(|| Error::InvalidArgument(format!("no corpus PFA `{name}`")));
    }
    ppt_pfa::parse_pfa(&read(path)?)
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

fn state(a: &Sca, tok: &str) -> Result<usize, Error> {
    a.states().index_of(tok).ok_or_else(|| Error::UnknownSymbol {
        symbol: tok.to_string(),
        alphabet: "state".into(),
    })
}

fn doc_value(a: &Sca) -> Value {
    serde_json::to_value(a.to_document()).expect("serializable document")
}

fn rat(r: &sca_core::Rational) -> Value {
    Value::String(format_rational(r))
}

/// Replaces symbol-index arrays under known keys by rendered words.
fn render_syms(v: &mut Value, states: &Alphabet, random: &Alphabet) {
    match v {
        Value::Object(map) => {
            for (k, x) in map.iter_mut() {
                let alpha = match k.as_str() {
                    "input" | "output" | "word" | "left" | "right" | "window" | "prefix" | "anchor" | "loop"
                    | "suffix" => Some(states),
                    "random" | "left_random" | "right_random" => Some(random),
                    _ => None,
                };
                match (alpha, as_syms(x)) {
                    (Some(al), Some(w)) => *x = Value::String(al.format_word(&w)),
                    _ => render_syms(x, states, random),
                }
            }
        }
        Value::Array(xs) => xs.iter_mut().for_each(|x| render_syms(x, states, random)),
        _ => {}
    }
}

fn as_syms(v: &Value) -> Option<Vec<usize>> {
    v.as_array()?.iter().map(|x| x.as_u64().map(|n| n as usize)).collect()
}

fn verdict(a: &Sca, v: &Verdict, what: &str) -> Outcome {
    verdict_with(a.states(), a.random(), v, what)
}

fn verdict_with(states: &Alphabet, random: &Alphabet, v: &Verdict, what: &str) -> Outcome {
    let mut payload = serde_json::to_value(v).expect("serializable verdict");
    render_syms(&mut payload, states, random);
    let summary = if v.answer { what.to_string() } else { format!("not {what}") };
    Outcome::new(v.answer, payload, summary)
}

fn parse_map(text: &str) -> Result<BTreeMap<String, String>, Error> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("expected q=img, got `{pair}`")))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

fn surjection(states: &Alphabet, text: &str) -> Result<Surjection, Error> {
    let given = parse_map(text)?;
    let mut pairs = BTreeMap::new();
    for t in states.tokens() {
        pairs.insert(t.clone(), given.get(t).cloned().unwrap_or_else(|| t.clone()));
    }
    if let Some(k) = given.keys().find(|k| !states.contains(k)) {
        return Err(Error::UnknownSymbol { symbol: k.clone(), alphabet: "state".into() });
    }
    Surjection::from_pairs(states, &pairs)
}

fn seed(explicit: Option<u64>) -> Result<u64, Error> {
    if let Some(s) = explicit {
        return Ok(s);
    }
    match std::env::var("SCA_SEED") {
        Ok(s) => s.trim().parse().map_err(|_| Error::InvalidArgument(format!("SCA_SEED `{s}` is not an integer"))),
        Err(_) => Ok(0),
    }
}

fn run(cmd: Command, budget: &Budget) -> Res {
    match cmd {
        Command::Prob { sca, window, target, t } => {
            let a = load_sca(&sca, budget)?;
            let u = a.states().parse_word(&window)?;
            let v = a.states().parse_word(&target)?;
            let p = cylinder_prob(&a, &u, &v, t, budget)?;
            Ok(Outcome::new(true, json!({"value": format_rational(&p)}), format_rational(&p)))
        }
        Command::Distribution { sca, window, t } => {
            let a = load_sca(&sca, budget)?;
            let u = a.states().parse_word(&window)?;
            let d = pushforward_distribution(&a, &Word::at_origin(u), t, budget)?;
            let support: Map<String, Value> =
                d.support.iter().map(|(w, p)| (a.states().format_word(w), rat(p))).collect();
            let n = support.len();
            Ok(Outcome::new(true, json!({"offset": d.offset, "support": support}), format!("{n} output words")))
        }
        Command::Simulate { sca, config, steps, seed: s, style, output } => {
            let a = load_sca(&sca, budget)?;
            let period = a.states().parse_word(&config)?;
            if period.is_empty() {
                return Err(Error::InvalidArgument("empty configuration".into()));
            }
            let s = seed(s)?;
            let d = sample_diagram(&a, &PeriodicConfig::new(period), steps, s, budget)?;
            let bytes = render::render_diagram(&d, a.states(), style);
            let rows: Vec<String> = d.rows.iter().map(|r| a.states().format_word(&r.period)).collect();
            let random_rows: Vec<String> = d
                .randomness_rows
                .iter()
                .flatten()
                .map(|r| a.random().format_word(&r.period))
                .collect();
            let mut payload = json!({"seed": s, "steps": steps, "rows": rows, "random_rows": random_rows});
            match (&output, style) {
                (Some(path), _) => {
                    std::fs::write(path, &bytes)
                        .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
                    payload["output"] = json!(path.display().to_string());
                }
                (None, Style::Pgm) => return Err(Error::InvalidArgument("--style pgm needs --output".into())),
                (None, Style::Text) => {}
            }
            Ok(Outcome::new(true, payload, format!("{} rows", steps + 1)))
        }
        Command::Deterministic { sca } => {
            let a = load_sca(&sca, budget)?;
            let d = a.is_deterministic();
            Ok(Outcome::new(d, json!({"answer": d}), if d { "deterministic" } else { "not deterministic" }))
        }
        Command::Cfca { sca } => {
            let a = load_sca(&sca, budget)?;
            if !a.is_cfca() {
                return Ok(Outcome::new(false, json!({"answer": false}), "not correlation-free"));
            }
            let table: Map<String, Value> = a
                .local_distribution_table()?
                .into_iter()
                .map(|(u, d)| {
                    let row: Map<String, Value> =
                        a.states().tokens().iter().cloned().zip(d.iter().map(rat)).collect();
                    (a.states().format_word(&u), Value::Object(row))
                })
                .collect();
            Ok(Outcome::new(true, json!({"answer": true, "local_distribution": table}), "correlation-free"))
        }
        Command::Equal { pair, t } => {
            let a = load_sca(&pair.a, budget)?;
            let b = load_sca(&pair.b, budget)?;
            let r = weighted::stochastic_equal_report(&a, &b, t, budget)?;
            let payload = json!({
                "answer": r.equal,
                "precheck": r.precheck,
                "witness": r.witness,
                "left": r.left.as_ref().map(rat),
                "right": r.right.as_ref().map(rat),
                "states": [r.states.0, r.states.1],
            });
            Ok(Outcome::new(r.equal, payload, if r.equal { "equal" } else { "different" }))
        }
        Command::NdEqual { pair, t } => {
            let a = load_sca(&pair.a, budget)?;
            let b = load_sca(&pair.b, budget)?;
            let v = symbolic::ndet_equal(&a, &b, t, budget)?;
            Ok(verdict(&a, &v, "equal"))
        }
        Command::Noisy { sca } => {
            let a = load_sca(&sca, budget)?;
            Ok(verdict(&a, &symbolic::is_noisy(&a, budget)?, "noisy"))
        }
        Command::Surjective { sca } => {
            let a = load_sca(&sca, budget)?;
            Ok(verdict(&a, &symbolic::is_surjective(&a, budget)?, "surjective"))
        }
        Command::Injective { sca } => {
            let a = load_sca(&sca, budget)?;
            Ok(verdict(&a, &symbolic::is_injective(&a, budget)?, "injective"))
        }
        Command::Preinjective { sca } => {
            let a = load_sca(&sca, budget)?;
            Ok(verdict(&a, &symbolic::is_preinjective(&a, budget)?, "pre-injective"))
        }
        Command::PptCfca { ppt } => run_ppt(ppt, budget, true),
        Command::PptSca { ppt } => run_ppt(ppt, budget, false),
        Command::PfaProb { pfa, word } => {
            let p = load_pfa(&pfa)?;
            let u = p.alphabet().parse_word(&word)?;
            let v = ppt_pfa::pfa_accept_prob(&p, &u)?;
            Ok(Outcome::new(true, json!({"value": format_rational(&v)}), format_rational(&v)))
        }
        Command::EncodePfa { pfa } => {
            let p = load_pfa(&pfa)?;
            let a = ppt_pfa::encode_pfa(&p, budget)?;
            let summary = format!("{} states, {} random symbols", a.states().len(), a.random().len());
            Ok(Outcome::new(true, json!({"sca": doc_value(&a)}), summary))
        }
        Command::Rescale { sca, params } => {
            let a = load_sca(&sca, budget)?;
            let p = RescaleParams::parse(&params)?;
            let r = sim::rescale_sca(&a, p, budget)?;
            let summary = format!("{p}: {} states", r.states().len());
            Ok(Outcome::new(true, json!({"params": p, "sca": doc_value(&r)}), summary))
        }
        Command::Restrict { sca, states } => {
            let a = load_sca(&sca, budget)?;
            let sub = Alphabet::new(states.split(',').map(str::trim).filter(|s| !s.is_empty()))?;
            let inj = Injection::by_tokens(&sub, a.states())?;
            trimming(sim::check_restriction(&a, &inj, budget), json!({"injection": inj}))
        }
        Command::Project { sca, map } => {
            let a = load_sca(&sca, budget)?;
            let pi = surjection(a.states(), &map)?;
            trimming(sim::check_projection(&a, &pi, budget), json!({"surjection": pi}))
        }
        Command::Simulates { a, b, pa, pb, inject, project, mode } => {
            let sa = load_sca(&a, budget)?;
            let sb = load_sca(&b, budget)?;
            let pa = RescaleParams::parse(&pa)?;
            let pb = RescaleParams::parse(&pb)?;
            let mut trim = Trim::default();
            let mut states = sim::rescale_sca(&sb, pb, budget)?.states().clone();
            if inject {
                let target = sim::rescale_sca(&sa, pa, budget)?.states().clone();
                let inj = Injection::by_tokens(&target, &states)?;
                states = target;
                trim.injection = Some(inj);
            }
            if let Some(m) = project {
                trim.surjection = Some(surjection(&states, &m)?);
            }
            let mode: Mode = mode.into();
            let mut payload = json!({"pa": pa, "pb": pb, "trim": trim, "mode": mode});
            // an invalid trim means these parameters give no simulation
            let (ok, summary) = match sim::simulates(&sa, &sb, pa, pb, &trim, mode, budget) {
                Ok(ok) => (ok, if ok { "simulates".to_string() } else { "does not simulate".to_string() }),
                Err(e @ (Error::Stability { .. } | Error::Compatibility { .. })) => {
                    payload["trim_error"] = json!(e.to_string());
                    (false, e.to_string())
                }
                Err(e) => return Err(e),
            };
            payload["answer"] = json!(ok);
            Ok(Outcome::new(ok, payload, summary))
        }
        Command::SearchSim { a, b, max_m, max_t, max_shift, mode } => {
            let sa = load_sca(&a, budget)?;
            let sb = load_sca(&b, budget)?;
            let bounds = SearchBounds { max_m, max_t, max_shift };
            let out = sim::search_simulation(&sa, &sb, &bounds, mode.into(), &[], budget)?;
            let found = matches!(out, sim::SearchOutcome::Found(_));
            let payload = json!({"bounds": bounds, "outcome": out});
            Ok(Outcome::new(found, payload, if found { "found" } else { "not found within bounds" }))
        }
        Command::CfcaHost { sca } => {
            let a = load_sca(&sca, budget)?;
            let h = sim::cfca_host(&a, budget)?;
            let summary = format!("host with {} states", h.host.states().len());
            Ok(Outcome::new(true, json!({"sca": doc_value(&h.host), "injection": h.injection}), summary))
        }
        Command::Coupling { pair, window, n } => {
            let a = load_sca(&pair.a, budget)?;
            let b = load_sca(&pair.b, budget)?;
            let b = weighted::align_states(&a, &b)?;
            let w = a.states().parse_word(&window)?;
            let out = sim::build_finite_coupling(&a, &b, &w, n, budget)?;
            let ok = matches!(out, sim::CouplingOutcome::Coupled(_));
            let payload = serde_json::to_value(&out).expect("serializable coupling");
            Ok(Outcome::new(ok, payload, if ok { "coupled" } else { "infeasible" }))
        }
        Command::Gadget { kind, sca } => {
            let a = load_sca(&sca, budget)?;
            let kind = match kind {
                GadgetArg::SurjectivityLift => GadgetKind::SurjectivityLift,
                GadgetArg::SquareNoise => GadgetKind::SquareNoise,
            };
            let g = sim::gadget(kind, &a, budget)?;
            let summary = format!("{} states, {} random symbols", g.states().len(), g.random().len());
            Ok(Outcome::new(true, json!({"kind": kind, "sca": doc_value(&g)}), summary))
        }
        Command::Conserve { sca, support, t } => {
            let a = load_sca(&sca, budget)?;
            match conservation_check(&a, support, t, budget)? {
                Conservation::Conserving => Ok(Outcome::new(true, json!({"answer": true}), "number-conserving")),
                Conservation::Violation { window, input_sum, outputs } => {
                    let q = a.states();
                    let outs: Vec<Value> = outputs
                        .iter()
                        .map(|(w, s)| json!({"word": q.format_word(&w.symbols), "offset": w.offset, "sum": s}))
                        .collect();
                    let payload = json!({
                        "answer": false,
                        "witness": {
                            "window": q.format_word(&window.symbols),
                            "offset": window.offset,
                            "input_sum": input_sum,
                            "outputs": outs,
                        }
                    });
                    Ok(Outcome::new(false, payload, "sum not preserved"))
                }
            }
        }
        Command::Corpus { name } => {
            let Some(name) = name else {
                let scas: Vec<&str> = corpus::named().iter().map(|(n, _)| *n).collect();
                let pfas: Vec<&str> = corpus::named_pfas().iter().map(|(n, _)| *n).collect();
                return Ok(Outcome::new(true, json!({"sca": scas, "pfa": pfas}), "corpus listing"));
            };
            if let Some(a) = corpus::by_name(&name) {
                return Ok(Outcome::new(true, json!({"sca": doc_value(&a)}), name));
            }
            match corpus::named_pfas().into_iter().find(|(n, _)| *n == name) {
                Some((_, p)) => Ok(Outcome::new(true, json!({"pfa": p.to_document()}), name)),
                None => Err(Error::InvalidArgument(format!("no corpus entry `{name}`"))),
            }
        }
    }
}

/// Stability and compatibility failures are answers, not errors.
fn trimming(r: Result<Sca, Error>, mut payload: Value) -> Res {
    match r {
        Ok(s) => {
            payload["sca"] = doc_value(&s);
            Ok(Outcome::new(true, payload, format!("{} states", s.states().len())))
        }
        Err(e @ (Error::Stability { .. } | Error::Compatibility { .. })) => {
            let witness = match &e {
                Error::Stability { neighborhood, random, output } => {
                    json!({"neighborhood": neighborhood, "random": random, "output": output})
                }
                Error::Compatibility { left, right, random } => {
                    json!({"left": left, "right": right, "random": random})
                }
                _ => unreachable!(),
            };
            payload["witness"] = witness;
            Ok(Outcome::new(false, payload, e.to_string()))
        }
        Err(e) => Err(e),
    }
}

fn run_ppt(p: PptArgs, budget: &Budget, cfca: bool) -> Res {
    let a = load_sca(&p.sca, budget)?;
    let (x, y, z) = (state(&a, &p.x)?, state(&a, &p.y)?, state(&a, &p.z)?);
    let th = Threshold::parse(&p.threshold)?;
    let v = if cfca {
        ppt_pfa::ppt_decide_cfca(&a, x, y, z, &th, budget)?
    } else {
        ppt_pfa::ppt_decide_sca(&a, x, y, z, &th, budget)?
    };
    let mut payload = serde_json::to_value(&v).expect("serializable verdict");
    render_syms(&mut payload, a.states(), a.random());
    let summary = if v.answer { "YES".to_string() } else { format!("NO ({})", v.reason) };
    Ok(Outcome::new(v.answer, payload, summary))
}
