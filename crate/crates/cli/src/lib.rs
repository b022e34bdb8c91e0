//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use wilf_core::automaton::{ClassModel, ClassSpec, Side, StateGraph};
use wilf_core::sampler::{empirical_suite, sample_batch, ClassSampler, EmpiricalConfig};
use wilf_core::wilf::{self, OrbitKind};
use wilf_core::word::{self, leq, Word};
use wilf_core::{Permutation, Strategy};

#[derive(Debug, Parser)]
#[command(name = "wilf", version, about = "Permutation classes, their automata and Wilf classes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    config: RunConfig,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, clap::Args)]
pub struct RunConfig {
    /// Class spec file (JSON).
    #[arg(long, global = true)]
    pub class: Option<PathBuf>,
    /// Largest weight computed.
    #[arg(long, global = true)]
    pub max: Option<usize>,
    /// Pattern size, or word weight for sampling.
    #[arg(long, global = true)]
    pub size: Option<usize>,
    /// A permutation such as 132, or a word such as 21.1.
    #[arg(long, global = true)]
    pub pattern: Option<String>,
    #[arg(long, global = true, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Run pattern-level work on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SeriesKind {
    /// Words of the class alphabet containing the pattern word.
    I,
    /// Minimal containers only.
    Istar,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dump the prefix and suffix state graphs.
    Automaton,
    /// Growth data per state and the class counts.
    Growth,
    /// c_n for n = 1..=max.
    Count,
    /// I_W or I*_W of a word, with the quotient identity check.
    Series {
        #[arg(long, value_enum, default_value_t = SeriesKind::I)]
        kind: SeriesKind,
    },
    /// Avoider counts of one pattern.
    Avoid,
    /// Wilf partition at one size (json) or the collapse table up to it (csv).
    Wilf,
    /// Predicted equivalences checked against the observed partition.
    Orbits,
    /// Uniform random class members.
    Sample,
    /// Empirical structure of uniform class members.
    Stats,
    /// Embedding-order axioms and oracle cross-checks.
    Validate,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
enum Failure {
    Input(anyhow::Error),
    Internal(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

/// Runs one command line; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            let msg = e.to_string();
            eprintln!("error: {}", msg.lines().next().unwrap_or("").trim_start_matches("error: "));
            return 1;
        }
    };
    match std::panic::catch_unwind(|| dispatch(&cli)) {
        Ok(Ok(())) => 0,
        Ok(Err(Failure::Input(e))) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            1
        }
        Ok(Err(Failure::Internal(msg))) => {
            eprintln!("assertion failed: {msg}");
            2
        }
        Err(_) => 2,
    }
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    let cfg = &cli.config;
    let model = load_model(cfg)?;
    let strategy = if cfg.sequential {
        Strategy::Sequential
    } else {
        Strategy::default()
    };
    let mut internal = None;
    let text = match &cli.command {
        Command::Automaton => automaton(&model, cfg.format),
        Command::Growth => growth(&model, cfg),
        Command::Count => count(&model, cfg)?,
        Command::Series { kind } => series(&model, cfg, *kind)?,
        Command::Avoid => avoid(&model, cfg)?,
        Command::Wilf => wilf_cmd(&model, cfg, strategy)?,
        Command::Orbits => {
            let (text, failed) = orbits(&model, cfg, strategy)?;
            if failed {
                internal = Some("a guaranteed orbit is split at an exact horizon".to_string());
            }
            text
        }
        Command::Sample => sample(&model, cfg, strategy)?,
        Command::Stats => stats(&model, cfg, strategy)?,
        Command::Validate => {
            let (text, failed) = validate(&model, cfg)?;
            if let Some(name) = failed {
                internal = Some(format!("check {name} failed"));
            }
            text
        }
    };
    emit(cfg, &text)?;
    match internal {
        Some(msg) => Err(Failure::Internal(msg)),
        None => Ok(()),
    }
}

fn load_model(cfg: &RunConfig) -> anyhow::Result<ClassModel> {
    let path = cfg.class.as_ref().ok_or_else(|| anyhow!("--class is required"))?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let spec = ClassSpec::from_json(&text)?;
    Ok(ClassModel::build(&spec)?)
}

fn emit(cfg: &RunConfig, text: &str) -> anyhow::Result<()> {
    match &cfg.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value");
    s.push('\n');
    s
}

fn need(v: Option<usize>, flag: &str) -> anyhow::Result<usize> {
    v.ok_or_else(|| anyhow!("--{flag} is required"))
}

fn pattern_word(model: &ClassModel, cfg: &RunConfig) -> anyhow::Result<Word> {
    let text = cfg.pattern.as_deref().ok_or_else(|| anyhow!("--pattern is required"))?;
    if let Ok(w) = model.alphabet().parse_word(text) {
        return Ok(w);
    }
    let p: Permutation = text.parse()?;
    Ok(model.alphabet().word_of_permutation(&p)?)
}

fn pattern_perm(cfg: &RunConfig) -> anyhow::Result<Permutation> {
    let text = cfg.pattern.as_deref().ok_or_else(|| anyhow!("--pattern is required"))?;
    Ok(text.parse()?)
}

fn tuple(t: &[usize]) -> String {
    let parts: Vec<String> = t.iter().map(usize::to_string).collect();
    format!("({})", parts.join(" "))
}

fn automaton(model: &ClassModel, format: Format) -> String {
    match format {
        Format::Json => pretty(&model.to_json()),
        Format::Csv => {
            let mut out = String::from("side,state,loop_alphabet,successors,dominant\n");
            for side in [Side::Prefix, Side::Suffix] {
                let g = model.graph(side);
                for s in 0..g.len() {
                    let loops: Vec<String> = g.loop_alphabet(s).iter().map(|&a| model.alphabet().letter(a).label()).collect();
                    let succ: Vec<String> = g.successors(s).into_iter().map(|t| tuple(g.state(t))).collect();
                    writeln!(
                        out,
                        "{},{},{},{},{}",
                        side_name(side),
                        tuple(g.state(s)),
                        loops.join(" "),
                        succ.join(" "),
                        g.is_dominant(s)
                    )
                    .unwrap();
                }
            }
            out
        }
    }
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Prefix => "prefix",
        Side::Suffix => "suffix",
    }
}

fn growth(model: &ClassModel, cfg: &RunConfig) -> String {
    let max = cfg.max.unwrap_or(10);
    let counts = model.class_counts(max);
    let d = model.d();
    let gamma = model.gamma();
    let ratio = |n: usize| {
        let c: f64 = counts[n].to_string().parse().unwrap_or(f64::INFINITY);
        c / ((n as f64).powi(d as i32 - 1) * gamma.powi(n as i32))
    };
    let state_rows = |g: &StateGraph| -> Vec<(String, f64, f64, f64, bool)> {
        (0..g.len())
            .map(|s| {
                let gr = g.growth(s);
                (tuple(g.state(s)), gr.rho, gr.gamma, gr.c, g.is_dominant(s))
            })
            .collect()
    };
    match cfg.format {
        Format::Json => {
            let states = |g: &StateGraph| -> Vec<Value> {
                state_rows(g)
                    .into_iter()
                    .map(|(t, rho, gamma, c, dom)| {
                        json!({"state": t, "rho": if rho.is_finite() { json!(rho) } else { Value::Null }, "gamma": gamma, "c": c, "dominant": dom})
                    })
                    .collect()
            };
            pretty(&json!({
                "gamma": gamma,
                "d": d,
                "prefix": states(model.prefix()),
                "suffix": states(model.suffix()),
                "counts": (1..=max).map(|n| json!({"n": n, "c": counts[n].to_string(), "ratio": ratio(n)})).collect::<Vec<_>>(),
            }))
        }
        Format::Csv => {
            let mut out = format!("# gamma={gamma} d={d}\nside,state,rho,gamma,c,dominant\n");
            for side in [Side::Prefix, Side::Suffix] {
                for (t, rho, g, c, dom) in state_rows(model.graph(side)) {
                    writeln!(out, "{},{t},{rho},{g},{c},{dom}", side_name(side)).unwrap();
                }
            }
            out
        }
    }
}

fn count(model: &ClassModel, cfg: &RunConfig) -> anyhow::Result<String> {
    let max = need(cfg.max, "max")?;
    let counts = model.class_counts(max);
    Ok(match cfg.format {
        Format::Json => pretty(&json!({
            "counts": (1..=max).map(|n| json!({"n": n, "c": counts[n].to_string()})).collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let mut out = String::from("n,c_n\n");
            for (n, c) in counts.iter().enumerate().skip(1) {
                writeln!(out, "{n},{c}").unwrap();
            }
            out
        }
    })
}

fn series(model: &ClassModel, cfg: &RunConfig, kind: SeriesKind) -> anyhow::Result<String> {
    let max = need(cfg.max, "max")?;
    let alphabet = model.alphabet();
    let w = pattern_word(model, cfg)?;
    let s = match kind {
        SeriesKind::I => word::series_i(alphabet, &w, max)?,
        SeriesKind::Istar => word::series_i_star(alphabet, &w, max)?,
    };
    let quotient = word::check_quotient_identity(alphabet, &w, max)?;
    Ok(match cfg.format {
        Format::Json => pretty(&json!({
            "word": alphabet.format_word(&w),
            "kind": match kind { SeriesKind::I => "i", SeriesKind::Istar => "istar" },
            "cutoff": max,
            "coefficients": s.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "quotient_identity": quotient,
        })),
        Format::Csv => s.to_csv(),
    })
}

fn avoid(model: &ClassModel, cfg: &RunConfig) -> anyhow::Result<String> {
    let p = pattern_perm(cfg)?;
    let horizon = wilf::signature_horizon(model, &p)?;
    let max = cfg.max.unwrap_or(horizon.n_exact);
    let sig = wilf::avoider_series(model, &p, max)?;
    Ok(match cfg.format {
        Format::Json => pretty(&json!({
            "pattern": p.to_string(),
            "k": sig.k,
            "horizon": sig.horizon,
            "n_exact": horizon.n_exact,
            "exact": sig.exact,
            "counts": sig.counts.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let mut out = String::from("n,a_n\n");
            for (i, c) in sig.counts.iter().enumerate() {
                writeln!(out, "{},{c}", sig.k + i).unwrap();
            }
            out
        }
    })
}

fn wilf_cmd(model: &ClassModel, cfg: &RunConfig, strategy: Strategy) -> anyhow::Result<String> {
    let k = need(cfg.size, "size")?;
    let max = cfg.max.unwrap_or(usize::MAX);
    Ok(match cfg.format {
        Format::Json => pretty(&wilf::wilf_partition(model, k, max, strategy)?.to_json()),
        Format::Csv => {
            let report = wilf::collapse_report(model, 1..=k, max, strategy)?;
            format!("# non_increasing={}\n{}", report.non_increasing(), report.to_csv())
        }
    })
}

fn orbits(model: &ClassModel, cfg: &RunConfig, strategy: Strategy) -> anyhow::Result<(String, bool)> {
    let k = need(cfg.size, "size")?;
    let r = wilf::verify_predictions(model, k, cfg.max.unwrap_or(usize::MAX), strategy)?;
    let kind = |k: OrbitKind| match k {
        OrbitKind::Symmetry => "symmetry",
        OrbitKind::Shuffle => "shuffle",
        OrbitKind::BlockShift => "block_shift",
        OrbitKind::LoopShuffle => "loop_shuffle",
    };
    let members = |o: &wilf::Orbit| o.members.iter().map(Permutation::to_string).collect::<Vec<_>>();
    let text = match cfg.format {
        Format::Json => pretty(&json!({
            "k": k,
            "exact": r.partition.exact,
            "horizon": r.partition.horizon,
            "w": r.partition.w(),
            "orbits": r.orbits.iter().map(|o| json!({
                "kind": kind(o.kind),
                "guaranteed": o.kind.guaranteed(),
                "members": members(o),
                "consistent": o.consistent,
            })).collect::<Vec<_>>(),
            "violations": r.violations().len(),
            "heuristic_misses": r.heuristic_misses(),
        })),
        Format::Csv => {
            let mut out = String::from("kind,guaranteed,members,consistent\n");
            for o in &r.orbits {
                writeln!(out, "{},{},{},{}", kind(o.kind), o.kind.guaranteed(), members(o).join(" "), o.consistent).unwrap();
            }
            out
        }
    };
    Ok((text, r.hard_failure()))
}

fn sample(model: &ClassModel, cfg: &RunConfig, strategy: Strategy) -> anyhow::Result<String> {
    let n = need(cfg.size, "size")?;
    let sampler = ClassSampler::new(model, n)?;
    let words: Vec<String> = sample_batch(strategy, cfg.seed, cfg.samples, |rng| model.alphabet().format_word(&sampler.sample(rng)));
    Ok(match cfg.format {
        Format::Json => pretty(&json!({"seed": cfg.seed, "n": n, "count": sampler.count().to_string(), "words": words})),
        Format::Csv => {
            let mut out = format!("# seed={}\nindex,word\n", cfg.seed);
            for (i, w) in words.iter().enumerate() {
                writeln!(out, "{i},{w}").unwrap();
            }
            out
        }
    })
}

fn stats(model: &ClassModel, cfg: &RunConfig, strategy: Strategy) -> anyhow::Result<String> {
    let n = need(cfg.size, "size")?;
    let mut config = EmpiricalConfig::new(n, cfg.samples, cfg.seed);
    config.strategy = strategy;
    config.letters = n;
    config.trials = cfg.samples;
    if cfg.pattern.is_some() {
        config.patterns.push(pattern_word(model, cfg)?);
    }
    let report = empirical_suite(model, &config)?;
    Ok(match cfg.format {
        Format::Json => pretty(&json!({
            "seed": report.seed,
            "rows": report.rows,
            "histograms": report.histograms,
        })),
        Format::Csv => report.to_csv(),
    })
}

/// Returns the output and the name of the first failing check.
fn validate(model: &ClassModel, cfg: &RunConfig) -> anyhow::Result<(String, Option<&'static str>)> {
    let max = cfg.max.unwrap_or(6) as u64;
    let alphabet = model.alphabet();
    let mut checks: Vec<(&'static str, bool, usize)> = Vec::new();

    let order = word::validate_embedding_order(alphabet, max);
    let pairs = match order {
        word::OrderReport::Holds { pairs, .. } => pairs,
        _ => 0,
    };
    checks.push(("embedding_order_axioms", order.holds(), pairs));

    let words = alphabet.words_up_to(max);
    if alphabet.letters().iter().all(|l| l.permutation().is_some()) {
        let perms: Vec<Permutation> = words.iter().map(|w| alphabet.permutation_of(w.letters())).collect::<Result<_, _>>()?;
        let mut ok = true;
        for (w, p) in words.iter().zip(&perms) {
            for (v, q) in words.iter().zip(&perms) {
                ok &= leq(alphabet, w, v)? == q.contains(p);
            }
        }
        checks.push(("greedy_vs_containment", ok, words.len() * words.len()));
    }
    if let Some(basis) = model.basis() {
        let mut ok = true;
        for w in &words {
            let p = alphabet.permutation_of(w.letters())?;
            ok &= model.contains_word(w)? == !basis.iter().any(|b| p.contains(b));
        }
        checks.push(("membership_vs_basis", ok, words.len()));
    }
    let failed = checks.iter().find(|c| !c.1).map(|c| c.0);
    let text = match cfg.format {
        Format::Json => pretty(&json!({
            "max": max,
            "checks": checks.iter().map(|(name, ok, cases)| json!({"check": name, "passed": ok, "cases": cases})).collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let mut out = String::from("check,passed,cases\n");
            for (name, ok, cases) in &checks {
                writeln!(out, "{name},{ok},{cases}").unwrap();
            }
            out
        }
    };
    if failed.is_none() && checks.is_empty() {
        bail!("nothing to validate");
    }
    Ok((text, failed))
}
