//! The `epicomp` command line. [`execute`] does all the work and returns the
//! exit status with the report text, so it can be driven from tests.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::composition::{check_independence, derive, IndependenceKind, Schema, SequentialSchema};
use crate::error::{Error, Result};
use crate::formula::{parse, truth_set};
use crate::properties::{check_property, PropertySpec};
use crate::scenarios::{
    bomb_schema, bomb_system, exhaustive_sweep, falsify, falsify_exhaustive, paper_system,
    random_sweep, ClaimBench, ClaimId, ClaimReport, ClaimStats, GenConfig, PartitionPolicy,
    RunStyle, Shape, Tally, Verdict, PAPER_SYSTEMS,
};
use crate::sysfile::{load_system, save_system, to_json, write_system};
use crate::system::{AgentId, InterpretedSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    /// Everything checked holds.
    Holds,
    /// Some check fails or a claim is refuted.
    Fails,
    /// Bad usage or unreadable input.
    Error,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Holds => 0,
            ExitStatus::Fails => 1,
            ExitStatus::Error => 2,
        }
    }

    fn from_holds(holds: bool) -> Self {
        if holds {
            ExitStatus::Holds
        } else {
            ExitStatus::Fails
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    /// One `key=value` record per line.
    Machine,
    Json,
}

#[derive(Parser, Debug)]
#[command(
    name = "epicomp",
    version,
    about = "Check anonymity, privacy, onymity and identity in finite interpreted systems"
)]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a formula at every run (or one run).
    Eval {
        /// System file, or the name of a bundled system.
        file: String,
        formula: String,
        #[arg(long)]
        run: Option<String>,
        /// Also print the indistinguishability blocks as a DOT graph.
        #[arg(long)]
        dot: bool,
    },
    /// Check a property such as `min-anon(i1, use(k1), j)`.
    Check { file: String, property: String },
    /// Check an independence condition of a composition schema.
    Indep {
        file: String,
        schema: String,
        /// basic, pairwise, disjunctive, posneg, negpos or parallel.
        kind: String,
        #[arg(long)]
        observer: Option<String>,
    },
    /// Derive the composite action and print or save the derived system.
    Compose {
        file: String,
        schema: String,
        #[arg(short = 'o', long = "out")]
        out: Option<PathBuf>,
    },
    /// List or run the registered claims.
    Claims {
        #[command(subcommand)]
        action: ClaimsCommand,
    },
    /// Look for a system refuting a claim once some hypotheses are dropped.
    Search {
        claim: String,
        #[arg(long = "drop-hypothesis")]
        drop: Vec<String>,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        gen: GenArgs,
        /// Enumerate every single-block system instead of sampling.
        #[arg(long)]
        exhaustive: bool,
        /// Save the counterexample system here.
        #[arg(short = 'o', long = "out")]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args, Debug)]
struct GenArgs {
    /// Real-name agents (agents, for parallel claims).
    #[arg(long, default_value_t = 2)]
    real: usize,
    #[arg(long, default_value_t = 2)]
    pseudo: usize,
    #[arg(long, default_value_t = 2)]
    articles: usize,
    #[arg(long = "max-runs", default_value_t = 4)]
    max_runs: usize,
    #[arg(long, value_enum, default_value_t = PartitionArg::Single)]
    partition: PartitionArg,
    #[arg(long, value_enum, default_value_t = StyleArg::Uniform)]
    style: StyleArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PartitionArg {
    Single,
    Random,
    Discrete,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StyleArg {
    Uniform,
    Board,
}

#[derive(Subcommand, Debug)]
enum ClaimsCommand {
    /// Print every claim with its hypotheses.
    List,
    /// Run one claim, or `all`. Without `--system` each theorem is swept
    /// over generated systems and C3.1 is checked on the bundled s12.
    Run {
        target: String,
        /// System file or bundled system to check the claims on.
        #[arg(long)]
        system: Option<String>,
        /// Composition schema; the bulletin-board schema by default.
        #[arg(long)]
        schema: Option<String>,
        #[arg(long)]
        observer: Option<String>,
        #[arg(long = "drop-hypothesis")]
        drop: Vec<String>,
        /// Random systems per shape in a sweep.
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "max-runs", default_value_t = 4)]
        max_runs: usize,
        /// Largest entity count of a random system.
        #[arg(long = "max-count", default_value_t = 3)]
        max_count: usize,
    },
}

/// A rendered command outcome.
struct Report {
    status: ExitStatus,
    human: String,
    machine: Vec<(String, String)>,
    json: Value,
}

impl Report {
    fn render(&self, format: Format) -> String {
        match format {
            Format::Human => self.human.clone(),
            Format::Machine => self
                .machine
                .iter()
                .map(|(k, v)| format!("{k}={}\n", v.replace('\n', " ")))
                .collect(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("json values print");
                s.push('\n');
                s
            }
        }
    }
}

fn kv(key: impl Into<String>, value: impl ToString) -> (String, String) {
    (key.into(), value.to_string())
}

/// Parses `args` (including the program name) and runs the command.
pub fn execute<I, T>(args: I) -> (ExitStatus, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let status = if e.use_stderr() {
                ExitStatus::Error
            } else {
                ExitStatus::Holds
            };
            return (status, e.render().to_string());
        }
    };
    match run(cli.command) {
        Ok(report) => (report.status, report.render(cli.format)),
        Err(e) => {
            let text = match cli.format {
                Format::Human => format!("error: {e}\n"),
                Format::Machine => format!("verdict=error\nerror={e}\n"),
                Format::Json => format!(
                    "{}\n",
                    json!({ "verdict": "error", "error": e.to_string() })
                ),
            };
            (ExitStatus::Error, text)
        }
    }
}

fn run(command: Command) -> Result<Report> {
    match command {
        Command::Eval {
            file,
            formula,
            run,
            dot,
        } => eval_cmd(&file, &formula, run.as_deref(), dot),
        Command::Check { file, property } => check_cmd(&file, &property),
        Command::Indep {
            file,
            schema,
            kind,
            observer,
        } => indep_cmd(&file, &schema, &kind, observer.as_deref()),
        Command::Compose { file, schema, out } => compose_cmd(&file, &schema, out.as_deref()),
        Command::Claims { action } => match action {
            ClaimsCommand::List => Ok(claims_list()),
            ClaimsCommand::Run {
                target,
                system,
                schema,
                observer,
                drop,
                budget,
                seed,
                max_runs,
                max_count,
            } => {
                let claims = claim_targets(&target)?;
                match system {
                    Some(file) => claims_on_system(
                        &claims,
                        &file,
                        schema.as_deref(),
                        observer.as_deref(),
                        &drop,
                    ),
                    None => claims_sweep(&claims, &drop, budget, seed, max_runs, max_count),
                }
            }
        },
        Command::Search {
            claim,
            drop,
            budget,
            seed,
            gen,
            exhaustive,
            out,
        } => search_cmd(
            &claim,
            &drop,
            budget,
            seed,
            &gen,
            exhaustive,
            out.as_deref(),
        ),
    }
}

/// Loads a system file, falling back to the bundled systems by name.
fn load(file: &str) -> Result<InterpretedSystem> {
    if !Path::new(file).exists() {
        if PAPER_SYSTEMS.contains(&file) {
            return paper_system(file);
        }
        if file == "bomb" {
            return bomb_system();
        }
    }
    load_system(file)
}

fn observer_for(sys: &InterpretedSystem, given: Option<&str>) -> Result<AgentId> {
    if let Some(j) = given {
        return Ok(AgentId::new(j));
    }
    let observers: Vec<&AgentId> = sys.observers().collect();
    match observers.as_slice() {
        [j] => Ok((*j).clone()),
        _ => Err(Error::Mismatch(format!(
            "system `{}` has {} observers; pass --observer",
            sys.name(),
            observers.len()
        ))),
    }
}

fn dot(sys: &InterpretedSystem) -> String {
    let mut s = format!("graph \"{}\" {{\n", sys.name());
    for j in sys.observers() {
        let p = sys.partition(j).expect("listed observers have partitions");
        for (b, block) in p.blocks().iter().enumerate() {
            s.push_str(&format!(
                "  subgraph \"cluster_{j}_{b}\" {{\n    label=\"{j} block {}\";\n",
                b + 1
            ));
            for &r in block {
                let id = &sys.runs()[r].id;
                s.push_str(&format!("    \"{j}/{id}\" [label=\"{id}\"];\n"));
            }
            s.push_str("  }\n");
        }
    }
    s.push_str("}\n");
    s
}

fn eval_cmd(file: &str, text: &str, run: Option<&str>, want_dot: bool) -> Result<Report> {
    let sys = load(file)?;
    let f = parse(text)?;
    let truth = truth_set(&sys, &f)?;
    let selected: Vec<usize> = match run {
        Some(id) => vec![sys
            .run_position(&id.into())
            .ok_or_else(|| Error::UnknownRun(id.into()))?],
        None => (0..sys.run_count()).collect(),
    };
    let failing = selected.iter().copied().find(|&r| !truth.contains(r));
    let holds = failing.is_none();
    let verdict = if holds { "holds" } else { "fails" };

    let mut human = format!("{f}\n");
    let mut machine = vec![kv("verdict", verdict)];
    let mut table = Vec::new();
    for &r in &selected {
        let id = &sys.runs()[r].id;
        let t = truth.contains(r);
        human.push_str(&format!("  {id}  {t}\n"));
        table.push(json!({ "run": id.as_str(), "value": t }));
    }
    if let Some(r) = failing {
        let id = &sys.runs()[r].id;
        human.push_str(&format!("FAILS at {id}\n"));
        machine.push(kv("counterexample_run", id));
    } else if run.is_some() {
        human.push_str("HOLDS\n");
    } else {
        human.push_str("HOLDS at every run\n");
    }
    for &r in &selected {
        machine.push(kv(format!("run.{}", sys.runs()[r].id), truth.contains(r)));
    }
    let mut json = json!({
        "verdict": verdict,
        "formula": f.to_string(),
        "runs": table,
        "counterexample_run": failing.map(|r| sys.runs()[r].id.to_string()),
    });
    if want_dot {
        let d = dot(&sys);
        human.push_str(&d);
        json["dot"] = Value::String(d);
    }
    Ok(Report {
        status: ExitStatus::from_holds(holds),
        human,
        machine,
        json,
    })
}

fn check_cmd(file: &str, text: &str) -> Result<Report> {
    let sys = load(file)?;
    let spec: PropertySpec = text.trim().parse()?;
    let report = check_property(&sys, &spec)?;
    let verdict = if report.holds { "holds" } else { "fails" };
    let mut human = format!(
        "{}\n{} ({})\n  formula: {}\n",
        spec,
        verdict.to_uppercase(),
        report.definition,
        report.witness_formula
    );
    let mut machine = vec![kv("verdict", verdict), kv("definition", report.definition)];
    if let Some(c) = &report.counterexample {
        human.push_str(&format!(
            "  fails at {} on conjunct {}: {}\n",
            c.run, c.conjunct, c.conjunct_formula
        ));
        machine.push(kv("counterexample_run", &c.run));
        machine.push(kv("failing_conjunct", &c.conjunct));
    }
    Ok(Report {
        status: ExitStatus::from_holds(report.holds),
        human,
        machine,
        json: serde_json::to_value(&report).expect("reports serialize"),
    })
}

fn indep_cmd(file: &str, schema: &str, kind: &str, observer: Option<&str>) -> Result<Report> {
    let sys = load(file)?;
    let schema = Schema::parse_for(schema, &sys)?;
    let kind = IndependenceKind::from_keyword(kind).ok_or_else(|| {
        let names: Vec<_> = IndependenceKind::ALL.iter().map(|k| k.keyword()).collect();
        Error::Mismatch(format!(
            "unknown independence kind `{kind}`; expected one of: {}",
            names.join(", ")
        ))
    })?;
    let j = observer_for(&sys, observer)?;
    let report = check_independence(&sys, &j, &schema, kind)?;
    let verdict = if report.holds { "holds" } else { "fails" };
    let mut human = format!(
        "{} for {} under {schema}\n{} ({} instances checked)\n",
        report.condition,
        j,
        verdict.to_uppercase(),
        report.instances_checked
    );
    let mut machine = vec![
        kv("verdict", verdict),
        kv("instances_checked", report.instances_checked),
    ];
    if let Some(f) = &report.failure {
        human.push_str(&format!(
            "  fails for {} at {}: {}\n",
            f.instance, f.run, f.formula
        ));
        machine.push(kv("counterexample_run", &f.run));
        machine.push(kv("failing_instance", &f.instance));
    }
    Ok(Report {
        status: ExitStatus::from_holds(report.holds),
        human,
        machine,
        json: serde_json::to_value(&report).expect("reports serialize"),
    })
}

fn compose_cmd(file: &str, schema: &str, out: Option<&Path>) -> Result<Report> {
    let sys = load(file)?;
    let schema = Schema::parse_for(schema, &sys)?;
    let derived = derive(&sys, &schema)?;
    let family = schema.derived_family();
    let derived_facts: usize = derived
        .runs()
        .iter()
        .map(|r| {
            r.facts
                .iter()
                .filter(|f| f.action.family() == family)
                .count()
        })
        .sum();
    let mut machine = vec![
        kv("verdict", "derived"),
        kv("runs", derived.run_count()),
        kv("derived_facts", derived_facts),
    ];
    let human = match out {
        Some(path) => {
            save_system(&derived, path)?;
            machine.push(kv("output", path.display()));
            format!(
                "wrote {} ({} runs, {derived_facts} {family} facts)\n",
                path.display(),
                derived.run_count()
            )
        }
        None => write_system(&derived),
    };
    let json: Value = serde_json::from_str(&to_json(&derived)).expect("system json parses");
    Ok(Report {
        status: ExitStatus::Holds,
        human,
        machine,
        json,
    })
}

fn claims_list() -> Report {
    let mut human = String::new();
    let mut machine = Vec::new();
    let mut list = Vec::new();
    for c in ClaimId::ALL {
        let hyps: Vec<&str> = c.hypotheses().iter().map(|(n, _)| *n).collect();
        let conclusion = c.conclusion().map(|(n, _)| n);
        human.push_str(&format!("{:<8} {}\n", c.label(), c.statement()));
        if !hyps.is_empty() {
            human.push_str(&format!("         hypotheses: {}\n", hyps.join(", ")));
        }
        machine.push(kv(format!("claim.{}", c.label()), hyps.join(",")));
        list.push(json!({
            "claim": c.label(),
            "statement": c.statement(),
            "hypotheses": hyps,
            "conclusion": conclusion,
        }));
    }
    Report {
        status: ExitStatus::Holds,
        human,
        machine,
        json: Value::Array(list),
    }
}

fn claim_targets(target: &str) -> Result<Vec<ClaimId>> {
    if target.eq_ignore_ascii_case("all") {
        Ok(ClaimId::ALL.to_vec())
    } else {
        Ok(vec![target.parse()?])
    }
}

fn failing_verdict(v: Verdict) -> bool {
    matches!(v, Verdict::Refuted | Verdict::NotWitnessed)
}

/// `verdict`, `hypothesis.<n>` and, when the conclusion fails, the
/// counterexample run and failing conjunct of one claim report.
fn claim_records(report: &ClaimReport, prefix: &str) -> Vec<(String, String)> {
    let mut out = vec![kv(format!("{prefix}verdict"), report.verdict)];
    for (n, (name, _)) in report.claim.hypotheses().iter().enumerate() {
        let state = if report.dropped.iter().any(|d| d == name) {
            "dropped"
        } else {
            match report.hypotheses.iter().find(|h| h.name == *name) {
                Some(h) if h.holds => "holds",
                Some(_) => "fails",
                None => "unchecked",
            }
        };
        out.push(kv(
            format!("{prefix}hypothesis.{}", n + 1),
            format!("{name}:{state}"),
        ));
    }
    for item in &report.items {
        out.push(kv(
            format!("{prefix}item.{}", item.name),
            if item.holds {
                "confirmed"
            } else {
                "not-confirmed"
            },
        ));
    }
    if let Some(c) = report.conclusion.as_ref().filter(|c| !c.holds) {
        if let Some(run) = &c.run {
            out.push(kv(format!("{prefix}counterexample_run"), run));
        }
        if let Some(conj) = &c.conjunct {
            out.push(kv(format!("{prefix}failing_conjunct"), conj));
        }
        if let Some(inst) = &c.instance {
            out.push(kv(format!("{prefix}failing_instance"), inst));
        }
    }
    out
}

fn schema_for(sys: &InterpretedSystem, text: Option<&str>) -> Result<Schema> {
    match text {
        Some(t) => Schema::parse_for(t, sys),
        None if sys.name() == "bomb" => Ok(Schema::Parallel(bomb_schema())),
        None => Ok(Schema::Sequential(SequentialSchema::bulletin_board(sys))),
    }
}

fn flavor_matches(claim: ClaimId, schema: &Schema) -> bool {
    use crate::scenarios::Flavor;
    matches!(
        (claim.flavor(), schema),
        (Flavor::Sequential, Schema::Sequential(_)) | (Flavor::Parallel, Schema::Parallel(_))
    )
}

fn claims_on_system(
    claims: &[ClaimId],
    file: &str,
    schema: Option<&str>,
    observer: Option<&str>,
    drop: &[String],
) -> Result<Report> {
    let sys = load(file)?;
    let schema = schema_for(&sys, schema)?;
    let j = observer_for(&sys, observer)?;
    let single = claims.len() == 1;
    if single && !flavor_matches(claims[0], &schema) {
        return Err(Error::Mismatch(format!(
            "claim {} needs a {} schema",
            claims[0],
            match claims[0].flavor() {
                crate::scenarios::Flavor::Sequential => "sequential",
                crate::scenarios::Flavor::Parallel => "parallel",
            }
        )));
    }
    let mut bench = ClaimBench::new(&sys, &schema, &j);
    let mut reports = Vec::new();
    for &c in claims.iter().filter(|c| flavor_matches(**c, &schema)) {
        // Dropped names apply to every claim that has them.
        let dropped: Vec<String> = if single {
            c.validate_dropped(drop)?;
            drop.to_vec()
        } else {
            drop.iter()
                .filter(|d| c.hypotheses().iter().any(|(n, _)| n == d))
                .cloned()
                .collect()
        };
        reports.push(bench.report(c, &dropped)?);
    }
    let failed = reports.iter().any(|r| failing_verdict(r.verdict));
    let human: String = reports.iter().map(ToString::to_string).collect();
    let machine = if single {
        claim_records(&reports[0], "")
    } else {
        let mut m = vec![kv("verdict", if failed { "fails" } else { "holds" })];
        for r in &reports {
            m.extend(claim_records(r, &format!("claim.{}.", r.claim)));
        }
        m
    };
    let json = if single {
        serde_json::to_value(&reports[0])
    } else {
        serde_json::to_value(&reports)
    }
    .expect("reports serialize");
    Ok(Report {
        status: ExitStatus::from_holds(!failed),
        human,
        machine,
        json,
    })
}

fn sweep_verdict(s: &ClaimStats) -> Verdict {
    if s.refuted > 0 {
        Verdict::Refuted
    } else if s.confirmed > 0 {
        Verdict::Confirmed
    } else {
        Verdict::Vacuous
    }
}

fn claims_sweep(
    claims: &[ClaimId],
    drop: &[String],
    budget: usize,
    seed: u64,
    max_runs: usize,
    max_count: usize,
) -> Result<Report> {
    if max_runs == 0 || max_count == 0 {
        return Err(Error::Mismatch(
            "--max-runs and --max-count must be at least 1".into(),
        ));
    }
    if !drop.is_empty() {
        return Err(Error::Mismatch(
            "--drop-hypothesis needs --system; use `search` to look for counterexamples".into(),
        ));
    }
    let theorems: Vec<ClaimId> = claims
        .iter()
        .copied()
        .filter(|c| *c != ClaimId::C3_1)
        .collect();
    let mut human = String::new();
    let mut machine = Vec::new();
    let mut json_claims = Vec::new();
    let mut failed = false;
    let single = claims.len() == 1;
    let prefix = |c: ClaimId| {
        if single {
            String::new()
        } else {
            format!("claim.{c}.")
        }
    };

    if claims.contains(&ClaimId::C3_1) {
        let sys = paper_system("s12")?;
        let schema = Schema::Sequential(SequentialSchema::bulletin_board(&sys));
        let report =
            ClaimBench::new(&sys, &schema, &AgentId::new("j")).report(ClaimId::C3_1, &[])?;
        failed |= failing_verdict(report.verdict);
        human.push_str(&report.to_string());
        machine.extend(claim_records(&report, &prefix(ClaimId::C3_1)));
        json_claims.push(serde_json::to_value(&report).expect("reports serialize"));
    }
    if !theorems.is_empty() {
        let mut tally: Tally = exhaustive_sweep(&theorems, 2)?;
        tally.merge(random_sweep(&theorems, budget, max_count, max_runs, seed)?);
        for (claim, stats) in &tally.stats {
            let verdict = sweep_verdict(stats);
            failed |= verdict == Verdict::Refuted;
            human.push_str(&format!(
                "{claim}: {verdict} over {} systems ({} confirmed, {} vacuous, {} refuted)\n",
                stats.systems, stats.confirmed, stats.vacuous, stats.refuted
            ));
            let p = prefix(*claim);
            machine.push(kv(format!("{p}verdict"), verdict));
            machine.push(kv(format!("{p}systems"), stats.systems));
            machine.push(kv(format!("{p}confirmed"), stats.confirmed));
            machine.push(kv(format!("{p}vacuous"), stats.vacuous));
            machine.push(kv(format!("{p}refuted"), stats.refuted));
            let mut entry = json!({ "verdict": verdict, "stats": stats });
            if let Some(sys) = tally.refutations.get(claim) {
                human.push_str(&write_system(sys));
                machine.push(kv(format!("{p}counterexample_system"), sys.name()));
                entry["counterexample"] =
                    serde_json::from_str(&to_json(sys)).expect("system json parses");
            }
            json_claims.push(entry);
        }
    }
    if !single {
        machine.insert(0, kv("verdict", if failed { "fails" } else { "holds" }));
    }
    Ok(Report {
        status: ExitStatus::from_holds(!failed),
        human,
        machine,
        json: if single {
            json_claims.remove(0)
        } else {
            Value::Array(json_claims)
        },
    })
}

#[allow(clippy::too_many_arguments)]
fn search_cmd(
    claim: &str,
    drop: &[String],
    budget: usize,
    seed: u64,
    gen: &GenArgs,
    exhaustive: bool,
    out: Option<&Path>,
) -> Result<Report> {
    let claim: ClaimId = claim.parse()?;
    if claim == ClaimId::C3_1 {
        return Err(Error::Mismatch(
            "C3.1 is an existence claim; check it with `claims run C3.1`".into(),
        ));
    }
    let cfg = GenConfig {
        shape: Shape::Sequential,
        real: gen.real,
        pseudo: gen.pseudo,
        articles: gen.articles,
        max_runs: gen.max_runs,
        partition: match gen.partition {
            PartitionArg::Single => PartitionPolicy::SingleBlock,
            PartitionArg::Random => PartitionPolicy::Random,
            PartitionArg::Discrete => PartitionPolicy::Discrete,
        },
        style: match gen.style {
            StyleArg::Uniform => RunStyle::Uniform,
            StyleArg::Board => RunStyle::BulletinBoard,
        },
        seed,
        budget,
    };
    let found = if exhaustive {
        let shaped = GenConfig {
            shape: match claim.flavor() {
                crate::scenarios::Flavor::Sequential => Shape::Sequential,
                crate::scenarios::Flavor::Parallel => Shape::Parallel,
            },
            ..cfg
        };
        shaped.validate()?;
        falsify_exhaustive(claim, &shaped.universe(), gen.max_runs, drop)?
    } else {
        falsify(claim, &cfg, drop)?
    };
    let examined = found.stats.systems;
    match &found.counterexample {
        Some((sys, report)) => {
            let mut machine = claim_records(report, "");
            machine.push(kv("system", sys.name()));
            machine.push(kv("samples", examined));
            if let Some(path) = out {
                save_system(sys, path)?;
                machine.push(kv("output", path.display()));
            }
            let human = format!(
                "counterexample after {examined} systems\n{report}{}",
                write_system(sys)
            );
            let json = json!({
                "verdict": report.verdict,
                "samples": examined,
                "report": report,
                "system": serde_json::from_str::<Value>(&to_json(sys)).expect("system json parses"),
            });
            Ok(Report {
                status: ExitStatus::Fails,
                human,
                machine,
                json,
            })
        }
        None => Ok(Report {
            status: ExitStatus::Holds,
            human: format!(
                "{claim}: no counterexample in {examined} systems ({} confirmed, {} vacuous)\n",
                found.stats.confirmed, found.stats.vacuous
            ),
            machine: vec![
                kv("verdict", "no-counterexample"),
                kv("samples", examined),
                kv("confirmed", found.stats.confirmed),
                kv("vacuous", found.stats.vacuous),
            ],
            json: json!({ "verdict": "no-counterexample", "stats": found.stats }),
        }),
    }
}
