//! The learning loop: query the teacher, grow the table, extract a small
//! candidate, and repeat until the candidate matches the target.

pub mod compat;
pub mod exact;
pub mod extract;
pub mod table;

use crate::automata::{AutomataError, Class3, LangRef, Product, SymbolicDfa, ThreeDfa};
use crate::automata::determinize;
use crate::consistency::ConsistencyChecker;
use crate::regions::build_regl;
use crate::teacher::{
    EquivalenceOutcome, InclusionMode, InclusionOutcome, QueryStats, Teacher, TeacherError,
};
use crate::words::RegionWord;

pub use extract::Candidate;
pub use table::{Hypothesis, ObservationTable};

/// How candidates are extracted from the hypothesis.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ExtractMode {
    /// Cover the hypothesis with maximal compatible sets, largest first.
    Greedy,
    /// Search exhaustively for the smallest consistent automaton.
    Exact,
}

#[derive(Clone, Debug)]
pub struct LearnOptions {
    pub extract: ExtractMode,
    /// During greedy extraction, prefer compatible sets already used as
    /// transition targets over larger undiscovered ones.
    pub reuse_targets: bool,
    /// Also check each hypothesis's strongly classified words against the
    /// realizable-word recognizer and record the outcome.
    pub strong_check: bool,
    pub max_iterations: usize,
}

impl Default for LearnOptions {
    fn default() -> Self {
        LearnOptions {
            extract: ExtractMode::Greedy,
            reuse_targets: false,
            strong_check: false,
            max_iterations: 200,
        }
    }
}

/// What moved the learner forward in one round.
#[derive(Clone, Debug)]
pub enum RoundEvent {
    /// An inclusion check failed; the separating suffix went into the
    /// table's columns.
    SuffixAdded {
        mode: InclusionMode,
        counterexample: RegionWord,
        suffix: RegionWord,
    },
    /// The candidate missed equivalence; the counterexample's prefixes went
    /// into the table's rows.
    PrefixesAdded {
        counterexample: RegionWord,
        added: usize,
    },
    /// The candidate matched the target.
    Converged,
}

/// Trace of one learning round.
#[derive(Clone, Debug)]
pub struct RoundRecord {
    pub hypothesis: ThreeDfa,
    pub accesses: Vec<RegionWord>,
    pub prefix_count: usize,
    pub suffix_count: usize,
    /// Present when the round got past the inclusion checks.
    pub candidate: Option<Candidate>,
    /// Whether the extracted candidate accepts every strongly accepted word
    /// and rejects every strongly rejected one; audited locally per
    /// extraction.
    pub extraction_consistent: Option<bool>,
    /// Outcome of the optional strongly-classified-words diagnostic.
    pub strong_complete: Option<bool>,
    pub stats_after: QueryStats,
    pub event: RoundEvent,
}

/// The finished product of a learning run.
#[derive(Clone, Debug)]
pub struct LearnResult {
    /// The trimmed output automaton.
    pub dera: crate::automata::Dera,
    /// Its total symbolic form, the one equivalence accepted.
    pub dfa: SymbolicDfa,
    /// State count of the trimmed automaton.
    pub dera_states: usize,
    pub iterations: usize,
    pub rounds: Vec<RoundRecord>,
    pub stats: QueryStats,
}

#[derive(Debug, thiserror::Error)]
pub enum LearnError {
    #[error(transparent)]
    Teacher(#[from] TeacherError),
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error(transparent)]
    Capacity(#[from] compat::TooManyStates),
    #[error("no table growth from the last counterexample; giving up")]
    NoProgress,
    #[error(
        "no convergence within {limit} iterations \
         ({prefixes} rows, {suffixes} columns); raise the iteration cap"
    )]
    IterationLimit {
        limit: usize,
        prefixes: usize,
        suffixes: usize,
    },
}

/// Classification with no teacher contact for unrealizable words.
fn classify(
    checker: &mut ConsistencyChecker,
    teacher: &mut dyn Teacher,
    word: &RegionWord,
) -> Result<Class3, TeacherError> {
    if !checker.is_consistent(word) {
        return Ok(Class3::DontCare);
    }
    teacher.membership(word).map(|b| {
        if b {
            Class3::Accept
        } else {
            Class3::Reject
        }
    })
}

/// Whether the candidate accepts all strongly accepted and rejects all
/// strongly rejected words of the hypothesis. Holds by construction for
/// both extraction modes; checked anyway after every extraction.
pub fn extraction_consistent(
    three: &ThreeDfa,
    candidate: &SymbolicDfa,
) -> Result<bool, AutomataError> {
    let plus = three.plus_dfa();
    let co = candidate.complement();
    if !Product::new(vec![LangRef::Dfa(&plus), LangRef::Dfa(&co)])?.is_empty() {
        return Ok(false);
    }
    let minus = three.minus_dfa();
    Ok(Product::new(vec![LangRef::Dfa(&minus), LangRef::Dfa(candidate)])?.is_empty())
}

/// Whether every strongly classified word of the hypothesis is realizable.
pub fn strong_completeness(three: &ThreeDfa) -> Result<bool, AutomataError> {
    let regl = build_regl(&three.alphabet).automaton;
    let co_regl = determinize(&regl, regl.n_states() + 2)?.complement();
    let plus = three.plus_dfa();
    if !Product::new(vec![LangRef::Dfa(&plus), LangRef::Dfa(&co_regl)])?.is_empty() {
        return Ok(false);
    }
    let minus = three.minus_dfa();
    Ok(Product::new(vec![LangRef::Dfa(&minus), LangRef::Dfa(&co_regl)])?.is_empty())
}

/// Finds the suffix that separates two currently merged rows, by binary
/// search over the positions of `cex`.
///
/// At split point i the probe word is the access word of the state reached
/// on the first i symbols, concatenated with the rest of `cex`. The probe
/// values at the two ends differ (the hypothesis misclassifies `cex`), so
/// some adjacent pair differs, and the tail after that position is the
/// suffix to add.
fn distinguishing_suffix(
    hypothesis: &Hypothesis,
    checker: &mut ConsistencyChecker,
    teacher: &mut dyn Teacher,
    cex: &RegionWord,
) -> Result<Option<RegionWord>, TeacherError> {
    let three = &hypothesis.three;
    let syms = cex.sym_indices(&three.alphabet);
    let mut states = Vec::with_capacity(syms.len() + 1);
    states.push(three.initial);
    for &s in &syms {
        states.push(three.delta[*states.last().expect("nonempty")][s]);
    }
    let probe = |i: usize, checker: &mut ConsistencyChecker, teacher: &mut dyn Teacher| {
        let word = hypothesis.accesses[states[i]].concat(&cex.suffix(i));
        classify(checker, teacher, &word)
    };
    let mut lo = 0;
    let mut hi = syms.len();
    let value_lo = probe(lo, checker, teacher)?;
    if value_lo == probe(hi, checker, teacher)? {
        // Not actually misclassified; the caller treats this as no
        // progress.
        return Ok(None);
    }
    // probe(lo) stays value_lo and probe(hi) stays different from it, so
    // the two ends keep disagreeing until they are adjacent.
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if probe(mid, checker, teacher)? == value_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(cex.suffix(lo + 1)))
}

/// Runs the learning loop against `teacher` until a candidate passes
/// equivalence.
pub fn learn(teacher: &mut dyn Teacher, options: &LearnOptions) -> Result<LearnResult, LearnError> {
    let alphabet = teacher.alphabet().clone();
    let mut checker = ConsistencyChecker::new(alphabet.clone());
    let mut table = ObservationTable::new(alphabet);
    let mut rounds: Vec<RoundRecord> = Vec::new();
    let mut last_shape: Option<(usize, usize)> = None;
    for _ in 0..options.max_iterations {
        {
            let mut value = |w: &RegionWord| classify(&mut checker, teacher, w);
            table.close_and_fill(&mut value)?;
        }
        let shape = (table.prefix_count(), table.suffix_count());
        if let Some(previous) = last_shape {
            if shape == previous {
                return Err(LearnError::NoProgress);
            }
        }
        last_shape = Some(shape);
        let hypothesis = table.hypothesis();
        let strong_complete = options
            .strong_check
            .then(|| strong_completeness(&hypothesis.three))
            .transpose()?;
        // First make sure the strongly classified words are all correct;
        // each failure contributes a column and a fresh round. The pair of
        // inclusions amounts to one two-sided check.
        teacher.note_equivalence_check();
        let mut inclusion_cex = None;
        let plus = hypothesis.three.plus_dfa();
        match teacher.inclusion(&plus, InclusionMode::CandidateInTarget)? {
            InclusionOutcome::Counterexample(w) => {
                inclusion_cex = Some((InclusionMode::CandidateInTarget, w));
            }
            InclusionOutcome::Holds => {
                let minus = hypothesis.three.minus_dfa();
                match teacher.inclusion(&minus, InclusionMode::CandidateInTargetComplement)? {
                    InclusionOutcome::Counterexample(w) => {
                        inclusion_cex = Some((InclusionMode::CandidateInTargetComplement, w));
                    }
                    InclusionOutcome::Holds => {}
                }
            }
        }
        if let Some((mode, cex)) = inclusion_cex {
            let Some(suffix) = distinguishing_suffix(&hypothesis, &mut checker, teacher, &cex)?
            else {
                return Err(LearnError::NoProgress);
            };
            if !table.add_suffix(suffix.clone()) {
                return Err(LearnError::NoProgress);
            }
            rounds.push(RoundRecord {
                hypothesis: hypothesis.three,
                accesses: hypothesis.accesses,
                prefix_count: shape.0,
                suffix_count: shape.1,
                candidate: None,
                extraction_consistent: None,
                strong_complete,
                stats_after: teacher.stats(),
                event: RoundEvent::SuffixAdded {
                    mode,
                    counterexample: cex,
                    suffix,
                },
            });
            continue;
        }

        // The hypothesis is trustworthy where it commits; compress it.
        let bad = compat::incompatible_pairs(&hypothesis.three.delta, &hypothesis.three.classes);
        let candidate = match options.extract {
            ExtractMode::Greedy => {
                let sets = compat::maximal_compatible_sets(&bad)?;
                extract::greedy_candidate(&hypothesis.three, &sets, options.reuse_targets)
            }
            ExtractMode::Exact => {
                let sets = compat::maximal_compatible_sets(&bad)?;
                let bound =
                    extract::greedy_candidate(&hypothesis.three, &sets, options.reuse_targets)
                        .dera_states;
                exact::minimal_consistent(&hypothesis.three, &bad, bound)
                    .expect("the greedy size always admits a solution")
            }
        };
        let audited = extraction_consistent(&hypothesis.three, &candidate.dfa)?;
        debug_assert!(audited, "extraction broke consistency with the hypothesis");

        match teacher.equivalence(&candidate.dfa)? {
            EquivalenceOutcome::Equivalent => {
                let result = LearnResult {
                    dera: candidate.dera.clone(),
                    dfa: candidate.dfa.clone(),
                    dera_states: candidate.dera_states,
                    iterations: rounds.len() + 1,
                    rounds: {
                        rounds.push(RoundRecord {
                            hypothesis: hypothesis.three,
                            accesses: hypothesis.accesses,
                            prefix_count: shape.0,
                            suffix_count: shape.1,
                            candidate: Some(candidate),
                            extraction_consistent: Some(audited),
                            strong_complete,
                            stats_after: teacher.stats(),
                            event: RoundEvent::Converged,
                        });
                        rounds
                    },
                    stats: teacher.stats(),
                };
                return Ok(result);
            }
            EquivalenceOutcome::Counterexample(cex) => {
                let added = table.add_prefixes_of(&cex);
                if added == 0 {
                    return Err(LearnError::NoProgress);
                }
                rounds.push(RoundRecord {
                    hypothesis: hypothesis.three,
                    accesses: hypothesis.accesses,
                    prefix_count: shape.0,
                    suffix_count: shape.1,
                    candidate: Some(candidate),
                    extraction_consistent: Some(audited),
                    strong_complete,
                    stats_after: teacher.stats(),
                    event: RoundEvent::PrefixesAdded {
                        counterexample: cex,
                        added,
                    },
                });
            }
        }
    }
    Err(LearnError::IterationLimit {
        limit: options.max_iterations,
        prefixes: table.prefix_count(),
        suffixes: table.suffix_count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::Dera;
    use crate::models::bundled_model;
    use crate::teacher::DeraTeacher;

    fn learn_model(name: &str, options: &LearnOptions) -> (LearnResult, DeraTeacher) {
        let reference = bundled_model(name).unwrap();
        let mut teacher = DeraTeacher::new(reference).unwrap();
        let result = learn(&mut teacher, options).unwrap();
        (result, teacher)
    }

    #[test]
    fn learns_the_reference_echo_model() {
        let (result, teacher) = learn_model("echo", &LearnOptions::default());
        assert!(matches!(
            teacher.verify_equivalence(&result.dfa),
            EquivalenceOutcome::Equivalent
        ));
        assert!(result.dera_states <= 3);
        assert!(result
            .rounds
            .iter()
            .all(|r| r.extraction_consistent != Some(false)));
    }

    #[test]
    fn exact_extraction_matches_the_small_shape() {
        let options = LearnOptions {
            extract: ExtractMode::Exact,
            ..LearnOptions::default()
        };
        let (result, teacher) = learn_model("echo", &options);
        assert!(matches!(
            teacher.verify_equivalence(&result.dfa),
            EquivalenceOutcome::Equivalent
        ));
        assert_eq!(result.dera_states, 2);
    }

    #[test]
    fn empty_language_learns_in_one_round() {
        let alphabet = crate::alphabet::Alphabet::new(["a"], 1).unwrap();
        let reference = Dera::new(
            alphabet,
            vec!["q0".to_string()],
            0,
            vec![false],
            Vec::new(),
        )
        .unwrap();
        let mut teacher = DeraTeacher::new(reference).unwrap();
        let result = learn(&mut teacher, &LearnOptions::default()).unwrap();
        assert_eq!(result.iterations, 1);
        assert_eq!(result.dera_states, 1);
        assert!(!result.dera.accepting[0]);
        // One completeness check plus one final equivalence check.
        assert_eq!(result.stats.equivalence, 2);
    }

    #[test]
    fn every_bundled_model_learns_and_verifies() {
        for name in crate::models::MODEL_NAMES {
            let (result, teacher) = learn_model(name, &LearnOptions::default());
            assert!(
                matches!(
                    teacher.verify_equivalence(&result.dfa),
                    EquivalenceOutcome::Equivalent
                ),
                "{name} failed verification"
            );
            assert_eq!(teacher.protocol_violations(), 0, "{name} broke protocol");
        }
    }

    #[test]
    fn strong_check_records_a_verdict_each_round() {
        let options = LearnOptions {
            strong_check: true,
            ..LearnOptions::default()
        };
        let (result, _) = learn_model("ex4", &options);
        assert!(result.rounds.iter().all(|r| r.strong_complete.is_some()));
    }

    #[test]
    fn learned_output_round_trips_through_guard_form() {
        let (result, teacher) = learn_model("ex2", &LearnOptions::default());
        // The trimmed output, completed back to a total automaton, must
        // agree with the candidate the teacher approved.
        let completed = result.dera.to_symbolic_dfa().unwrap();
        assert!(matches!(
            teacher.verify_equivalence(&completed),
            EquivalenceOutcome::Equivalent
        ));
    }
}
