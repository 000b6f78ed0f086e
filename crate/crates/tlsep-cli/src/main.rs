//! Command-line surface for the learner: model I/O, single-query tools, the
//! learn command, and the benchmark table.
//!
//! Exit codes: 0 on success, 1 when learning or verification fails, 2 on
//! malformed input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};

use tlsep::consistency::{check_consistency, ConsistencyVerdict, EdgeOrigin};
use tlsep::format::{dera_to_dot, emit_dera, parse_dera, parse_region_word};
use tlsep::learner::{learn, ExtractMode, LearnOptions, LearnResult, RoundEvent};
use tlsep::models;
use tlsep::teacher::{
    DeraTeacher, EquivalenceOutcome, InclusionMode, InclusionOutcome, Teacher,
};
use tlsep::{Alphabet, ConsistencyChecker, Dera};

#[derive(Parser)]
#[command(
    name = "tlsep",
    version,
    about = "Learn small event-recording automata from a reference model",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn an automaton for the language of a reference model.
    Learn(LearnCmd),
    /// Learn every requested model and print a result table.
    Bench(BenchCmd),
    /// Decide whether a region word has a timed realization.
    CheckConsistency(CheckConsistencyCmd),
    /// Ask whether a region word belongs to a reference model's language.
    Membership(MembershipCmd),
    /// Check one language inclusion between a candidate and a reference.
    Inclusion(InclusionCmd),
    /// Parse a model and print it back, canonically or as DOT.
    Show(ShowCmd),
}

/// Knobs shared by `learn` and `bench`.
#[derive(Args, Clone)]
struct LearnFlags {
    /// Override the clock-constant bound declared by the model file.
    #[arg(long = "K", value_name = "N")]
    k: Option<u32>,

    /// How candidates are extracted from each hypothesis.
    #[arg(long, value_enum, default_value_t = ExtractArg::Greedy)]
    extract: ExtractArg,

    /// Prefer compatible sets already used as transition targets.
    #[arg(long)]
    reuse_targets: bool,

    /// Also check each hypothesis's strongly classified words against the
    /// realizable-word recognizer and report the verdicts.
    #[arg(long)]
    strong_complete_check: bool,

    /// Give up after this many learning rounds.
    #[arg(long, value_name = "N", default_value_t = 200)]
    max_iter: usize,

    /// Print one trace line per learning round.
    #[arg(short, long)]
    verbose: bool,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum ExtractArg {
    Greedy,
    Exact,
}

impl From<ExtractArg> for ExtractMode {
    fn from(a: ExtractArg) -> ExtractMode {
        match a {
            ExtractArg::Greedy => ExtractMode::Greedy,
            ExtractArg::Exact => ExtractMode::Exact,
        }
    }
}

#[derive(Args)]
struct LearnCmd {
    /// Bundled model name (echo, ex1..ex4) or path to a model file.
    model: String,

    #[command(flatten)]
    flags: LearnFlags,

    /// Write the learned model here instead of standard output.
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,

    /// Also write the learned model as DOT.
    #[arg(long, value_name = "FILE")]
    dot: Option<PathBuf>,
}

#[derive(Args)]
struct BenchCmd {
    /// Bundled model names or paths; all bundled models when empty.
    models: Vec<String>,

    #[command(flatten)]
    flags: LearnFlags,

    /// Learn the models concurrently, one teacher per model.
    #[arg(long)]
    parallel: bool,
}

#[derive(Args)]
struct CheckConsistencyCmd {
    /// Region word, e.g. "(a, x_a=0 & x_b=0) (b, x_a=1 & x_b=1)".
    word: String,

    /// Alphabet letters, comma separated.
    #[arg(long, value_delimiter = ',', required = true, value_name = "LETTERS")]
    letters: Vec<String>,

    /// Clock-constant bound of the region alphabet.
    #[arg(long = "K", value_name = "N")]
    k: u32,
}

#[derive(Args)]
struct MembershipCmd {
    /// Region word over the reference's alphabet.
    word: String,

    /// Bundled model name or path to the reference model.
    reference: String,

    /// Override the reference's clock-constant bound.
    #[arg(long = "K", value_name = "N")]
    k: Option<u32>,
}

#[derive(Args)]
struct InclusionCmd {
    /// Bundled model name or path to the candidate model.
    candidate: String,

    /// Bundled model name or path to the reference model.
    reference: String,

    /// Direction to check.
    #[arg(long, value_enum)]
    mode: ModeArg,

    /// Override both models' clock-constant bound.
    #[arg(long = "K", value_name = "N")]
    k: Option<u32>,
}

#[derive(ValueEnum, Clone, Copy)]
enum ModeArg {
    CandidateInTarget,
    TargetInCandidate,
    CandidateInTargetComplement,
}

impl From<ModeArg> for InclusionMode {
    fn from(m: ModeArg) -> InclusionMode {
        match m {
            ModeArg::CandidateInTarget => InclusionMode::CandidateInTarget,
            ModeArg::TargetInCandidate => InclusionMode::TargetInCandidate,
            ModeArg::CandidateInTargetComplement => InclusionMode::CandidateInTargetComplement,
        }
    }
}

#[derive(Args)]
struct ShowCmd {
    /// Bundled model name or path.
    model: String,

    /// Print DOT instead of the canonical text form.
    #[arg(long)]
    dot: bool,

    /// Override the model's clock-constant bound.
    #[arg(long = "K", value_name = "N")]
    k: Option<u32>,
}

/// What went wrong, split by exit code: `Run` exits 1, `Input` exits 2.
enum Failure {
    Run(String),
    Input(String),
}

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Learn(cmd) => cmd_learn(cmd),
        Command::Bench(cmd) => cmd_bench(cmd),
        Command::CheckConsistency(cmd) => cmd_check_consistency(cmd),
        Command::Membership(cmd) => cmd_membership(cmd),
        Command::Inclusion(cmd) => cmd_inclusion(cmd),
        Command::Show(cmd) => cmd_show(cmd),
    }
}

/// Loads a bundled model by name or a model file by path, with an optional
/// rewrite of its clock-constant bound before parsing.
fn load_model(name_or_path: &str, k_override: Option<u32>) -> Result<(String, Dera), Failure> {
    let (label, text) = match models::bundled_model_text(name_or_path) {
        Some(text) => (name_or_path.to_string(), text.to_string()),
        None => {
            let path = Path::new(name_or_path);
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Input(format!("cannot read {name_or_path}: {e}")))?;
            let label = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| name_or_path.to_string());
            (label, text)
        }
    };
    let text = match k_override {
        Some(k) => override_k(&text, k),
        None => text,
    };
    let dera =
        parse_dera(&text).map_err(|e| Failure::Input(format!("{name_or_path}: {e}")))?;
    Ok((label, dera))
}

fn override_k(text: &str, k: u32) -> String {
    let mut out = String::new();
    for line in text.lines() {
        if line.trim_start().starts_with("k:") {
            out.push_str(&format!("k: {k}"));
        } else {
            out.push_str(line);
        }
        out.push('\n');
    }
    out
}

struct RunOutcome {
    result: LearnResult,
    wall: Duration,
    equivalent: bool,
}

/// Runs the learner against a fresh teacher for `reference` and re-verifies
/// the answer with an uncounted two-sided check.
fn run_model(reference: &Dera, flags: &LearnFlags) -> Result<RunOutcome, Failure> {
    let mut teacher = DeraTeacher::new(reference.clone()).map_err(input)?;
    let options = LearnOptions {
        extract: flags.extract.into(),
        reuse_targets: flags.reuse_targets,
        strong_check: flags.strong_complete_check,
        max_iterations: flags.max_iter,
    };
    let start = Instant::now();
    let result = learn(&mut teacher, &options).map_err(|e| Failure::Run(e.to_string()))?;
    let wall = start.elapsed();
    let equivalent =
        matches!(teacher.verify_equivalence(&result.dfa), EquivalenceOutcome::Equivalent);
    Ok(RunOutcome { result, wall, equivalent })
}

fn mode_name(mode: InclusionMode) -> &'static str {
    match mode {
        InclusionMode::CandidateInTarget => "candidate-in-target",
        InclusionMode::TargetInCandidate => "target-in-candidate",
        InclusionMode::CandidateInTargetComplement => "candidate-in-target-complement",
    }
}

/// One structured trace line per learning round, as comment lines.
fn print_rounds(alphabet: &Alphabet, result: &LearnResult) {
    for (i, r) in result.rounds.iter().enumerate() {
        let mut line = format!(
            "# round={} rows={} cols={} hyp_states={}",
            i + 1,
            r.prefix_count,
            r.suffix_count,
            r.hypothesis.n_states()
        );
        if let Some(c) = &r.candidate {
            line.push_str(&format!(" candidate_states={}", c.dera_states));
        }
        if let Some(ok) = r.strong_complete {
            line.push_str(&format!(" strong_complete={ok}"));
        }
        line.push_str(&format!(
            " mq={} iq={} eq={}",
            r.stats_after.membership, r.stats_after.inclusion, r.stats_after.equivalence
        ));
        match &r.event {
            RoundEvent::SuffixAdded { mode, counterexample, suffix } => {
                line.push_str(&format!(
                    " event=suffix-added mode={} cex=\"{}\" suffix=\"{}\"",
                    mode_name(*mode),
                    counterexample.display(alphabet),
                    suffix.display(alphabet)
                ));
            }
            RoundEvent::PrefixesAdded { counterexample, added } => {
                line.push_str(&format!(
                    " event=prefixes-added cex=\"{}\" added={added}",
                    counterexample.display(alphabet)
                ));
            }
            RoundEvent::Converged => line.push_str(" event=converged"),
        }
        println!("{line}");
    }
}

fn cmd_learn(cmd: LearnCmd) -> Result<(), Failure> {
    let (name, reference) = load_model(&cmd.model, cmd.flags.k)?;
    let outcome = run_model(&reference, &cmd.flags)?;
    if cmd.flags.verbose {
        print_rounds(&reference.alphabet, &outcome.result);
    }
    let doc = emit_dera(&outcome.result.dera);
    match &cmd.output {
        Some(path) => fs::write(path, &doc)
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{doc}"),
    }
    if let Some(path) = &cmd.dot {
        fs::write(path, dera_to_dot(&outcome.result.dera))
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    let stats = outcome.result.stats;
    println!(
        "# {name}: learned {} states in {} rounds; MQ={} IQ={} EQ={}; wall {:.2}s",
        outcome.result.dera_states,
        outcome.result.iterations,
        stats.membership,
        stats.inclusion,
        stats.equivalence,
        outcome.wall.as_secs_f64()
    );
    if !outcome.equivalent {
        return Err(Failure::Run(format!(
            "{name}: learned automaton failed re-verification against the reference"
        )));
    }
    println!("# verified: equivalent to the reference");
    Ok(())
}

struct BenchRow {
    name: String,
    alphabet: Alphabet,
    k: u32,
    total_states: usize,
    letters: usize,
    outcome: RunOutcome,
}

fn bench_row(name_or_path: &str, flags: &LearnFlags) -> Result<BenchRow, Failure> {
    let (name, reference) = load_model(name_or_path, flags.k)?;
    let total_states = reference
        .to_symbolic_dfa()
        .map_err(|e| Failure::Input(format!("{name}: {e}")))?
        .n_states();
    let outcome = run_model(&reference, flags).map_err(|e| match e {
        Failure::Run(m) => Failure::Run(format!("{name}: {m}")),
        Failure::Input(m) => Failure::Input(format!("{name}: {m}")),
    })?;
    Ok(BenchRow {
        name,
        alphabet: reference.alphabet.clone(),
        k: reference.alphabet.k(),
        total_states,
        letters: reference.alphabet.letter_count(),
        outcome,
    })
}

/// Runs every requested model, isolating per-model failures, and prints the
/// result table. Any input failure exits 2, any learning failure exits 1.
fn cmd_bench(cmd: BenchCmd) -> Result<(), Failure> {
    let names: Vec<String> = if cmd.models.is_empty() {
        models::MODEL_NAMES.iter().map(|n| n.to_string()).collect()
    } else {
        cmd.models.clone()
    };

    let rows: Vec<Result<BenchRow, Failure>> = if cmd.parallel {
        std::thread::scope(|scope| {
            let flags = &cmd.flags;
            let handles: Vec<_> = names
                .iter()
                .map(|name| scope.spawn(move || bench_row(name, flags)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("bench worker panicked"))
                .collect()
        })
    } else {
        names.iter().map(|name| bench_row(name, &cmd.flags)).collect()
    };

    if cmd.flags.verbose {
        for row in rows.iter().flatten() {
            println!("# {}", row.name);
            print_rounds(&row.alphabet, &row.outcome.result);
        }
    }

    println!(
        "{:<8} {:>3} {:>4} {:>4} {:>6} {:>5} {:>5} {:>8} {:>9}  equivalent",
        "model", "K", "|Q|", "|Σ|", "MQ", "IQ", "EQ", "learned", "wall"
    );
    let mut bad_runs = 0usize;
    let mut bad_inputs = 0usize;
    for row in &rows {
        match row {
            Ok(r) => {
                let stats = r.outcome.result.stats;
                println!(
                    "{:<8} {:>3} {:>4} {:>4} {:>6} {:>5} {:>5} {:>8} {:>8.2}s  {}",
                    r.name,
                    r.k,
                    r.total_states,
                    r.letters,
                    stats.membership,
                    stats.inclusion,
                    stats.equivalence,
                    r.outcome.result.dera_states,
                    r.outcome.wall.as_secs_f64(),
                    if r.outcome.equivalent { "yes" } else { "NO" }
                );
                if !r.outcome.equivalent {
                    bad_runs += 1;
                }
            }
            Err(Failure::Run(msg)) => {
                println!("failed: {msg}");
                bad_runs += 1;
            }
            Err(Failure::Input(msg)) => {
                println!("failed: {msg}");
                bad_inputs += 1;
            }
        }
    }
    let failed = bad_runs + bad_inputs;
    if failed == 0 {
        Ok(())
    } else {
        let msg = format!("{failed} of {} models failed", rows.len());
        if bad_inputs > 0 {
            Err(Failure::Input(msg))
        } else {
            Err(Failure::Run(msg))
        }
    }
}

fn cmd_check_consistency(cmd: CheckConsistencyCmd) -> Result<(), Failure> {
    let alphabet = Alphabet::new(cmd.letters, cmd.k).map_err(input)?;
    let word = parse_region_word(&alphabet, &cmd.word).map_err(input)?;
    match check_consistency(&alphabet, &word) {
        ConsistencyVerdict::Consistent(witness) => {
            println!("consistent");
            println!("witness: {}", witness.display(&alphabet));
        }
        ConsistencyVerdict::Inconsistent(cert) => {
            println!("inconsistent");
            let (value, strict) = cert.weight();
            println!(
                "certificate: cycle of {} difference bounds with total weight {value}{}",
                cert.cycle.len(),
                if strict { " (strict)" } else { "" }
            );
            for edge in &cert.cycle {
                let rel = if edge.strict { "<" } else { "<=" };
                let origin = match edge.origin {
                    EdgeOrigin::Order { pos } => format!("event order at position {pos}"),
                    EdgeOrigin::Clock { pos, clock } => {
                        format!("clock {} at position {pos}", alphabet.clock_name(clock))
                    }
                };
                println!("  t{} - t{} {rel} {}  ({origin})", edge.to, edge.from, edge.value);
            }
        }
    }
    Ok(())
}

fn cmd_membership(cmd: MembershipCmd) -> Result<(), Failure> {
    let (_, reference) = load_model(&cmd.reference, cmd.k)?;
    let word = parse_region_word(&reference.alphabet, &cmd.word).map_err(input)?;
    let mut checker = ConsistencyChecker::new(reference.alphabet.clone());
    if !checker.is_consistent(&word) {
        println!("unrealizable: the word admits no timed realization");
        return Ok(());
    }
    let mut teacher = DeraTeacher::new(reference).map_err(input)?;
    let verdict = teacher.membership(&word).map_err(|e| Failure::Run(e.to_string()))?;
    println!("{}", if verdict { "in the language" } else { "not in the language" });
    Ok(())
}

fn cmd_inclusion(cmd: InclusionCmd) -> Result<(), Failure> {
    let (_, candidate) = load_model(&cmd.candidate, cmd.k)?;
    let (_, reference) = load_model(&cmd.reference, cmd.k)?;
    let candidate_dfa = candidate.to_symbolic_dfa().map_err(input)?;
    let mut teacher = DeraTeacher::new(reference.clone()).map_err(input)?;
    let outcome = teacher
        .inclusion(&candidate_dfa, cmd.mode.into())
        .map_err(|e| Failure::Input(e.to_string()))?;
    match outcome {
        InclusionOutcome::Holds => println!("holds"),
        InclusionOutcome::Counterexample(w) => {
            println!("fails");
            println!("counterexample: {}", w.display(&reference.alphabet));
        }
    }
    Ok(())
}

fn cmd_show(cmd: ShowCmd) -> Result<(), Failure> {
    let (_, dera) = load_model(&cmd.model, cmd.k)?;
    if cmd.dot {
        print!("{}", dera_to_dot(&dera));
    } else {
        print!("{}", emit_dera(&dera));
    }
    Ok(())
}
