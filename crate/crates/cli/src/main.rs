//! `clear`: run the exchange protocol, verify its guarantees, sweep random
//! instances and replay the demo catalog.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use clear_core::demos::{catalog, demo, Demo};
use clear_core::engine::{build_protocol_tree, execute, explore_focal_tree, DEFAULT_BUDGET};
use clear_core::format::{default_names, parse_instance, write_instance, Document};
use clear_core::gen::{random_instance, GenConfig};
use clear_core::strategies::{parse_scripted, Profile};
use clear_core::verify::{
    betagood_from_outcomes, check_conjecture, check_ir, check_pareto, check_stability, classify_coalition,
    nic_from_outcomes, tracked_decomposition, CoalitionKind, ParetoMethod,
};
use clear_core::{AgentId, Instance, ParticipantSet, ProtocolConfig, ProtocolKind};

#[derive(Parser)]
#[command(
    name = "clear",
    version,
    about = "Pairwise exchange of replicable goods among competing agents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the protocol on an instance file or `demo NAME` and print the trace.
    Run(RunArgs),
    /// Run verification suites; exits nonzero if any check fails.
    Verify(VerifyArgs),
    /// Random sweep checking that some agent ends up with every good; CSV on stdout.
    Simulate(SimulateArgs),
    /// Show a catalog demo and check its expected outcomes.
    Demo(DemoArgs),
    /// Print a seeded random instance.
    Gen(GenArgs),
    /// Print the full response tree of an instance.
    Tree(TreeArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OptLevel {
    All,
    None,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Args)]
struct ProtocolFlags {
    #[arg(long, default_value = "clear")]
    protocol: ProtocolKind,
    /// Disable the repair step.
    #[arg(long)]
    no_retrospect: bool,
    #[arg(long, value_enum, default_value = "all")]
    opt: OptLevel,
}

impl ProtocolFlags {
    fn config(&self) -> ProtocolConfig {
        let mut cfg = ProtocolConfig::default()
            .with_protocol(self.protocol)
            .with_optimizations(self.opt == OptLevel::All);
        if self.no_retrospect {
            cfg = cfg.without_retrospect();
        }
        cfg
    }
}

#[derive(Args)]
struct RunArgs {
    /// An instance file, or `demo NAME`.
    #[arg(required = true, num_args = 1..=2)]
    source: Vec<String>,
    /// Comma-separated agent indices; defaults to everyone.
    #[arg(long, value_delimiter = ',')]
    participants: Option<Vec<usize>>,
    #[command(flatten)]
    protocol: ProtocolFlags,
    /// Scripted decisions, one `agent round|* ((a,r),(b,s)) 0|1` per line, 0-based indices.
    #[arg(long)]
    strategies: Option<PathBuf>,
    /// Named strategy profile of a demo.
    #[arg(long)]
    profile: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Suite {
    Stability,
    Nic,
    Ir,
    Betagood,
    Tracked,
    Pe,
    All,
}

#[derive(Args)]
struct VerifyArgs {
    /// `FILE SUITE`, `demo NAME SUITE`, or just `SUITE` with `--random`.
    #[arg(required = true, num_args = 1..=3)]
    args: Vec<String>,
    /// Random instances instead of a file: agents, goods, density, trials, seed.
    #[arg(long, num_args = 5, value_names = ["N", "M", "P", "TRIALS", "SEED"])]
    random: Option<Vec<String>>,
    #[command(flatten)]
    protocol: ProtocolFlags,
    /// Named strategy profile of a demo, used for the other agents.
    #[arg(long)]
    profile: Option<String>,
    /// Only check this agent.
    #[arg(long)]
    focal: Option<usize>,
    /// Cap on protocol runs per exhaustive enumeration.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Args)]
struct SimulateArgs {
    agents: usize,
    goods: usize,
    density: f64,
    trials: u64,
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
    /// Write 0 for every runtime so reruns are byte-identical.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct DemoArgs {
    name: Option<String>,
    #[arg(long)]
    list: bool,
}

#[derive(Args)]
struct GenArgs {
    agents: usize,
    goods: usize,
    density: f64,
    seed: u64,
    #[arg(long, default_value_t = 0)]
    trial: u64,
    /// Drop goods nobody holds.
    #[arg(long)]
    normalize: bool,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum TreeFormat {
    Dot,
    Json,
}

#[derive(Args)]
struct TreeArgs {
    #[arg(required = true, num_args = 1..=2)]
    source: Vec<String>,
    #[command(flatten)]
    protocol: ProtocolFlags,
    #[arg(long, value_enum, default_value = "dot")]
    format: TreeFormat,
    #[arg(long, default_value_t = 1 << 16)]
    budget: u64,
}

enum Source {
    File(Document),
    Demo(Box<Demo>),
}

impl Source {
    fn document(&self) -> &Document {
        match self {
            Source::File(d) => d,
            Source::Demo(d) => &d.document,
        }
    }

    fn label(&self, fallback: &str) -> String {
        match self {
            Source::File(_) => fallback.to_string(),
            Source::Demo(d) => format!("demo {}", d.name),
        }
    }
}

fn load(words: &[String]) -> Result<Source> {
    match words {
        [kw, name] if kw == "demo" => Ok(Source::Demo(Box::new(demo(name)?))),
        [path] => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read {path}"))?;
            let doc = parse_instance(&text).with_context(|| path.to_string())?;
            Ok(Source::File(doc))
        }
        _ => bail!("expected an instance file or `demo NAME`, got {words:?}"),
    }
}

fn participants(instance: &Instance, list: &Option<Vec<usize>>) -> Result<ParticipantSet> {
    let set = match list {
        Some(v) => v.iter().map(|&a| AgentId(a)).collect(),
        None => ParticipantSet::all(instance),
    };
    set.validate(instance)?;
    Ok(set)
}

fn demo_profile(source: &Source, name: &Option<String>) -> Result<Option<(Profile, AgentId, ProtocolKind)>> {
    let Some(name) = name else { return Ok(None) };
    let Source::Demo(d) = source else {
        bail!("--profile needs a demo source");
    };
    let p = d
        .profile(name)
        .with_context(|| format!("demo {} has no profile `{name}`", d.name))?;
    Ok(Some((p.profile.clone(), p.focal, p.protocol)))
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let source = load(&args.source)?;
    let doc = source.document();
    let parts = participants(&doc.instance, &args.participants)?;
    let mut cfg = args.protocol.config();
    let mut profile = Profile::accepting();
    if let Some((p, _, kind)) = demo_profile(&source, &args.profile)? {
        profile = p;
        cfg = cfg.with_protocol(kind);
    }
    if let Some(path) = &args.strategies {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        for (agent, s) in parse_scripted(&text).with_context(|| format!("{}", path.display()))? {
            profile.set(agent, Arc::new(s));
        }
    }
    let trace = execute(&doc.instance, &parts, &profile, &cfg)?;
    let mut out = io::stdout().lock();
    match args.format {
        OutputFormat::Text => write!(out, "{}", trace.render(&doc.names))?,
        OutputFormat::Json => writeln!(out, "{}", serde_json::to_string_pretty(&trace)?)?,
    }
    Ok(ExitCode::SUCCESS)
}

struct Line {
    passed: bool,
    value: serde_json::Value,
}

fn line(suite: &str, label: &str, focal: Option<AgentId>, passed: bool, report: serde_json::Value) -> Line {
    Line {
        passed,
        value: json!({ "suite": suite, "instance": label, "focal": focal, "passed": passed, "report": report }),
    }
}

fn run_suites(
    instance: &Instance,
    label: &str,
    suites: &[Suite],
    cfg: &ProtocolConfig,
    co: &Profile,
    focals: &[AgentId],
    budget: u64,
) -> Result<Vec<Line>> {
    let all = ParticipantSet::all(instance);
    let mut out = Vec::new();
    for &suite in suites {
        match suite {
            Suite::Stability => {
                let t = execute(instance, &all, co, cfg)?;
                let r = check_stability(instance, &t, &all);
                out.push(line("stability", label, None, r.passed, serde_json::to_value(&r)?));
            }
            Suite::Nic | Suite::Betagood => {
                for &f in focals {
                    let outcomes = explore_focal_tree(instance, &all, f, cfg, co, budget)?;
                    if suite == Suite::Nic {
                        let r = nic_from_outcomes(f, &outcomes)?;
                        out.push(line("nic", label, Some(f), r.passed, serde_json::to_value(&r)?));
                    } else {
                        let mut levels = instance.distinct_betas();
                        levels.push(1.0);
                        for b in levels {
                            let r = betagood_from_outcomes(f, b, &outcomes)?;
                            out.push(line("betagood", label, Some(f), r.passed, serde_json::to_value(&r)?));
                        }
                    }
                }
            }
            Suite::Ir => {
                for &f in focals {
                    let r = check_ir(instance, f, cfg, budget)?;
                    out.push(line("ir", label, Some(f), r.passed, serde_json::to_value(&r)?));
                }
            }
            Suite::Tracked => {
                for &f in focals {
                    let r = tracked_decomposition(instance, &all.without(f), f, cfg)?;
                    out.push(line("tracked", label, Some(f), r.passed, serde_json::to_value(&r)?));
                }
            }
            Suite::Pe => {
                let t = execute(instance, &all, &Profile::accepting(), cfg)?;
                let conj = check_conjecture(instance, &t);
                let class = classify_coalition(instance, &all);
                let pareto = if class.kind == CoalitionKind::Lec {
                    Some(check_pareto(
                        instance,
                        &t.final_allocation,
                        ParetoMethod::LecShortcut,
                        0,
                    )?)
                } else {
                    None
                };
                let passed = conj.passed && pareto.as_ref().is_none_or(|p| p.passed);
                let report = json!({ "conjecture": conj, "coalition": class, "pareto": pareto });
                out.push(line("pe", label, None, passed, report));
            }
            Suite::All => unreachable!("expanded before dispatch"),
        }
    }
    Ok(out)
}

fn parse_suite(s: &str) -> Result<Vec<Suite>> {
    let suite = Suite::from_str(s, true).map_err(|e| anyhow::anyhow!("unknown suite `{s}`: {e}"))?;
    Ok(if suite == Suite::All {
        vec![
            Suite::Stability,
            Suite::Nic,
            Suite::Betagood,
            Suite::Ir,
            Suite::Tracked,
            Suite::Pe,
        ]
    } else {
        vec![suite]
    })
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let mut cfg = args.protocol.config();
    let lines: Vec<Line> = if let Some(r) = &args.random {
        let [suite] = args.args.as_slice() else {
            bail!("with --random give only the suite name");
        };
        let suites = parse_suite(suite)?;
        let n: usize = r[0].parse().context("agents")?;
        let m: usize = r[1].parse().context("goods")?;
        let p: f64 = r[2].parse().context("density")?;
        let trials: u64 = r[3].parse().context("trials")?;
        let seed: u64 = r[4].parse().context("seed")?;
        let gen = GenConfig::new(n, m, p, seed);
        gen.validate()?;
        let batches: Vec<Vec<Line>> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let inst = random_instance(&gen, t)?;
                let focals: Vec<AgentId> = match args.focal {
                    Some(f) => vec![AgentId(f)],
                    None => inst.agents().collect(),
                };
                run_suites(
                    &inst,
                    &format!("random trial {t}"),
                    &suites,
                    &cfg,
                    &Profile::accepting(),
                    &focals,
                    args.budget,
                )
            })
            .collect::<Result<_>>()?;
        batches.into_iter().flatten().collect()
    } else {
        let (src, suite) = args.args.split_at(args.args.len() - 1);
        let suites = parse_suite(&suite[0])?;
        let source = load(src)?;
        let inst = &source.document().instance;
        let mut co = Profile::accepting();
        let mut focals: Vec<AgentId> = inst.agents().collect();
        if let Some((p, focal, kind)) = demo_profile(&source, &args.profile)? {
            co = p;
            focals = vec![focal];
            cfg = cfg.with_protocol(kind);
        }
        if let Some(f) = args.focal {
            focals = vec![AgentId(f)];
        }
        if let Some(f) = focals.iter().find(|f| f.0 >= inst.num_agents()) {
            bail!("focal agent {f} out of range");
        }
        run_suites(inst, &source.label(&src[0]), &suites, &cfg, &co, &focals, args.budget)?
    };
    let mut out = io::stdout().lock();
    let failed = lines.iter().filter(|l| !l.passed).count();
    for l in &lines {
        writeln!(out, "{}", l.value)?;
    }
    writeln!(
        out,
        "{}",
        json!({ "checks": lines.len(), "failed": failed, "passed": failed == 0 })
    )?;
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode> {
    let gen = GenConfig::new(args.agents, args.goods, args.density, args.seed);
    gen.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads.unwrap_or(0))
        .build()
        .context("cannot start worker threads")?;
    let rows: Vec<(u64, u64, usize, usize, bool, u128)> = pool.install(|| {
        (0..args.trials)
            .into_par_iter()
            .map(|t| {
                let inst = random_instance(&gen, t)?;
                let all = ParticipantSet::all(&inst);
                let start = Instant::now();
                let trace = execute(&inst, &all, &Profile::accepting(), &ProtocolConfig::clear())?;
                let micros = if args.no_timing { 0 } else { start.elapsed().as_micros() };
                let perfect = check_conjecture(&inst, &trace).passed;
                Ok((
                    t,
                    gen.trial_seed(t),
                    trace.num_rounds(),
                    trace.total_proposals(),
                    perfect,
                    micros,
                ))
            })
            .collect::<clear_core::Result<_>>()
    })?;
    let stdout = io::stdout();
    let mut w = csv::Writer::from_writer(stdout.lock());
    w.write_record(["trial", "seed", "rounds", "proposals", "perfect_agent", "runtime_us"])?;
    for (t, seed, rounds, proposals, perfect, micros) in &rows {
        w.serialize((t, seed, rounds, proposals, u8::from(*perfect), micros))?;
    }
    w.flush()?;
    drop(w);
    let counter = rows.iter().filter(|r| !r.4).count();
    writeln!(io::stdout(), "# trials={} counterexamples={counter}", rows.len())?;
    Ok(if counter == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn cmd_demo(args: DemoArgs) -> Result<ExitCode> {
    let mut out = io::stdout().lock();
    let Some(name) = args.name.filter(|_| !args.list) else {
        for d in catalog() {
            writeln!(out, "{:<10} {}", d.name, d.summary)?;
        }
        return Ok(ExitCode::SUCCESS);
    };
    let d = demo(&name)?;
    writeln!(out, "{}: {}\n", d.name, d.summary)?;
    writeln!(out, "{}\n", write_instance(&d.document))?;
    let t = execute(
        d.instance(),
        &ParticipantSet::all(d.instance()),
        &Profile::accepting(),
        &ProtocolConfig::clear(),
    )?;
    write!(out, "{}", t.render(d.names()))?;
    for v in &d.variants {
        writeln!(out, "variant {}:", v.label)?;
        let t = execute(
            &v.instance,
            &ParticipantSet::all(&v.instance),
            &Profile::accepting(),
            &ProtocolConfig::clear(),
        )?;
        write!(out, "{}", t.render(d.names()))?;
    }
    for p in &d.profiles {
        writeln!(
            out,
            "profile {} ({}, focal {}): {}",
            p.name,
            p.protocol.name(),
            d.names()[p.focal.0],
            p.profile.describe()
        )?;
    }
    writeln!(out)?;
    let checks = d.checks()?;
    let mut ok = true;
    for c in &checks {
        ok &= c.passed;
        let mark = if c.passed { "PASS" } else { "FAIL" };
        writeln!(
            out,
            "{mark} {}{}",
            c.label,
            if c.detail.is_empty() {
                String::new()
            } else {
                format!(": {}", c.detail)
            }
        )?;
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode> {
    let mut gen = GenConfig::new(args.agents, args.goods, args.density, args.seed);
    if args.normalize {
        gen = gen.normalized();
    }
    let instance = random_instance(&gen, args.trial)?;
    let names = default_names(instance.num_agents());
    println!("{}", write_instance(&Document { instance, names }));
    Ok(ExitCode::SUCCESS)
}

fn cmd_tree(args: TreeArgs) -> Result<ExitCode> {
    let source = load(&args.source)?;
    let doc = source.document();
    let tree = build_protocol_tree(
        &doc.instance,
        &ParticipantSet::all(&doc.instance),
        &args.protocol.config(),
        args.budget,
    )?;
    match args.format {
        TreeFormat::Dot => print!("{}", tree.to_dot(&doc.names)),
        TreeFormat::Json => println!("{}", serde_json::to_string_pretty(&tree)?),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Demo(a) => cmd_demo(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Tree(a) => cmd_tree(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
