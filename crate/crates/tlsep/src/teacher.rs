//! The query interface a learner talks to, and its simulated implementation
//! backed by a reference automaton.
//!
//! Three query kinds exist. Membership asks whether one realizable region
//! word belongs to the target language. Inclusion compares a candidate
//! automaton's realizable language against the target (or its complement)
//! in one direction and returns the shortest separating word. Equivalence
//! runs up to two inclusions, one per direction, stopping at the first
//! failure.
//!
//! The simulated teacher answers from the reference automaton, restricting
//! every comparison to realizable words so that counterexamples always
//! correspond to actual timed behavior. Answers are memoized: repeating a
//! membership query for the same word, or an inclusion query for a
//! structurally identical candidate, costs nothing.

use std::collections::HashMap;

use crate::alphabet::Alphabet;
use crate::automata::{AutomataError, Dera, DfaKey, LangRef, Product, SymbolicDfa, SymbolicNfa};
use crate::consistency::ConsistencyChecker;
use crate::regions::build_regl;
use crate::words::RegionWord;

/// Direction of an inclusion query, always about realizable words only.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum InclusionMode {
    /// Candidate language inside the target language.
    CandidateInTarget,
    /// Target language inside the candidate language.
    TargetInCandidate,
    /// Candidate language disjoint from the target language.
    CandidateInTargetComplement,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum InclusionOutcome {
    Holds,
    /// The shortest realizable word (least in canonical order among equally
    /// short ones) witnessing the failure.
    Counterexample(RegionWord),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum EquivalenceOutcome {
    Equivalent,
    /// A shortest realizable word on which candidate and target disagree,
    /// taken from the first direction found to fail.
    Counterexample(RegionWord),
}

/// Query counts. Equivalence counts two-sided checks: [`Teacher::equivalence`]
/// calls, plus composite checks a learner assembles out of direct inclusion
/// calls and announces via [`Teacher::note_equivalence_check`]. Every such
/// check issues at most two inclusions, so equivalence never exceeds
/// inclusion.
#[derive(Clone, Copy, Default, PartialEq, Eq, Debug)]
pub struct QueryStats {
    pub membership: usize,
    pub inclusion: usize,
    pub equivalence: usize,
}

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum TeacherError {
    #[error("membership asked for an unrealizable word")]
    InconsistentWord(RegionWord),
    #[error("candidate automaton uses a different alphabet")]
    AlphabetMismatch,
}

pub trait Teacher {
    fn alphabet(&self) -> &Alphabet;

    /// Whether the realizable `word` is in the target language. Asking
    /// about an unrealizable word is a protocol violation.
    fn membership(&mut self, word: &RegionWord) -> Result<bool, TeacherError>;

    /// One-directional comparison of `candidate` with the target.
    fn inclusion(
        &mut self,
        candidate: &SymbolicDfa,
        mode: InclusionMode,
    ) -> Result<InclusionOutcome, TeacherError>;

    /// Two-directional comparison of `candidate` with the target, issued as
    /// up to two inclusion queries (candidate-inside-target first). Counts
    /// one equivalence check plus the inclusions it needed.
    fn equivalence(&mut self, candidate: &SymbolicDfa)
        -> Result<EquivalenceOutcome, TeacherError>;

    /// Record one two-sided check the learner assembled out of direct
    /// inclusion calls rather than through [`Teacher::equivalence`].
    fn note_equivalence_check(&mut self);

    fn stats(&self) -> QueryStats;
}

/// A teacher simulated from a reference automaton.
pub struct DeraTeacher {
    reference: Dera,
    ref_dfa: SymbolicDfa,
    ref_co: SymbolicDfa,
    regl: SymbolicNfa,
    checker: ConsistencyChecker,
    mq_memo: HashMap<RegionWord, bool>,
    iq_memo: HashMap<(InclusionMode, DfaKey), Option<RegionWord>>,
    stats: QueryStats,
    protocol_violations: usize,
}

impl DeraTeacher {
    pub fn new(reference: Dera) -> Result<Self, AutomataError> {
        let ref_dfa = reference.to_symbolic_dfa()?;
        let ref_co = ref_dfa.complement();
        let regl = build_regl(&reference.alphabet).automaton;
        let checker = ConsistencyChecker::new(reference.alphabet.clone());
        Ok(DeraTeacher {
            reference,
            ref_dfa,
            ref_co,
            regl,
            checker,
            mq_memo: HashMap::new(),
            iq_memo: HashMap::new(),
            stats: QueryStats::default(),
            protocol_violations: 0,
        })
    }

    pub fn reference(&self) -> &Dera {
        &self.reference
    }

    /// Number of ill-formed queries received (unrealizable membership words,
    /// foreign-alphabet candidates). A correct learner causes none.
    pub fn protocol_violations(&self) -> usize {
        self.protocol_violations
    }

    /// The shortest realizable word separating `candidate` from the target,
    /// if any; the candidate-side gap and target-side gap are compared and
    /// the overall shortest (then canonically least) wins.
    fn equivalence_gap(&self, candidate: &SymbolicDfa) -> Option<RegionWord> {
        let co_c = candidate.complement();
        let extra = Product::new(vec![
            LangRef::Dfa(candidate),
            LangRef::Nfa(&self.regl),
            LangRef::Dfa(&self.ref_co),
        ])
        .expect("alphabet checked")
        .shortest_accepted();
        let missing = Product::new(vec![
            LangRef::Dfa(&self.ref_dfa),
            LangRef::Nfa(&self.regl),
            LangRef::Dfa(&co_c),
        ])
        .expect("alphabet checked")
        .shortest_accepted();
        let alphabet = &self.reference.alphabet;
        match (extra, missing) {
            (None, None) => None,
            (Some(w), None) | (None, Some(w)) => Some(w),
            (Some(x), Some(m)) => {
                let kx = (x.len(), x.sym_indices(alphabet));
                let km = (m.len(), m.sym_indices(alphabet));
                Some(if kx <= km { x } else { m })
            }
        }
    }

    /// Uncounted, unmemoized check for final verification by callers.
    pub fn verify_equivalence(&self, candidate: &SymbolicDfa) -> EquivalenceOutcome {
        match self.equivalence_gap(candidate) {
            None => EquivalenceOutcome::Equivalent,
            Some(w) => EquivalenceOutcome::Counterexample(w),
        }
    }

    fn check_candidate(&mut self, candidate: &SymbolicDfa) -> Result<(), TeacherError> {
        if candidate.alphabet != self.reference.alphabet {
            self.protocol_violations += 1;
            return Err(TeacherError::AlphabetMismatch);
        }
        Ok(())
    }
}

impl Teacher for DeraTeacher {
    fn alphabet(&self) -> &Alphabet {
        &self.reference.alphabet
    }

    fn membership(&mut self, word: &RegionWord) -> Result<bool, TeacherError> {
        if !self.checker.is_consistent(word) {
            self.protocol_violations += 1;
            return Err(TeacherError::InconsistentWord(word.clone()));
        }
        if let Some(&v) = self.mq_memo.get(word) {
            return Ok(v);
        }
        // For realizable words, following the guard regions through the
        // reference is exact: every region lies wholly inside or outside
        // each guard, so the symbolic run and the timed runs agree.
        let v = self.ref_dfa.accepts(word);
        self.mq_memo.insert(word.clone(), v);
        self.stats.membership += 1;
        Ok(v)
    }

    fn inclusion(
        &mut self,
        candidate: &SymbolicDfa,
        mode: InclusionMode,
    ) -> Result<InclusionOutcome, TeacherError> {
        self.check_candidate(candidate)?;
        let key = (mode, candidate.key());
        if let Some(cached) = self.iq_memo.get(&key) {
            return Ok(match cached {
                None => InclusionOutcome::Holds,
                Some(w) => InclusionOutcome::Counterexample(w.clone()),
            });
        }
        let co_c;
        let parts = match mode {
            InclusionMode::CandidateInTarget => {
                vec![LangRef::Dfa(candidate), LangRef::Nfa(&self.regl), LangRef::Dfa(&self.ref_co)]
            }
            InclusionMode::TargetInCandidate => {
                co_c = candidate.complement();
                vec![LangRef::Dfa(&self.ref_dfa), LangRef::Nfa(&self.regl), LangRef::Dfa(&co_c)]
            }
            InclusionMode::CandidateInTargetComplement => {
                vec![LangRef::Dfa(candidate), LangRef::Nfa(&self.regl), LangRef::Dfa(&self.ref_dfa)]
            }
        };
        let gap = Product::new(parts).expect("alphabet checked").shortest_accepted();
        self.iq_memo.insert(key, gap.clone());
        self.stats.inclusion += 1;
        Ok(match gap {
            None => InclusionOutcome::Holds,
            Some(w) => InclusionOutcome::Counterexample(w),
        })
    }

    fn equivalence(&mut self, candidate: &SymbolicDfa) -> Result<EquivalenceOutcome, TeacherError> {
        self.check_candidate(candidate)?;
        self.stats.equivalence += 1;
        if let InclusionOutcome::Counterexample(w) =
            self.inclusion(candidate, InclusionMode::CandidateInTarget)?
        {
            return Ok(EquivalenceOutcome::Counterexample(w));
        }
        match self.inclusion(candidate, InclusionMode::TargetInCandidate)? {
            InclusionOutcome::Holds => Ok(EquivalenceOutcome::Equivalent),
            InclusionOutcome::Counterexample(w) => Ok(EquivalenceOutcome::Counterexample(w)),
        }
    }

    fn note_equivalence_check(&mut self) {
        self.stats.equivalence += 1;
    }

    fn stats(&self) -> QueryStats {
        self.stats
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::ElementaryConstraint::{AboveK, Open, Point};
    use crate::constraint::SimpleConstraint;
    use crate::models::bundled_model;
    use crate::words::TimedWord;
    use crate::alphabet::Letter;

    fn echo_teacher() -> DeraTeacher {
        DeraTeacher::new(bundled_model("echo").unwrap()).unwrap()
    }

    fn rw(alphabet: &Alphabet, steps: &[(&str, &[ElemSpec])]) -> RegionWord {
        RegionWord::new(
            steps
                .iter()
                .map(|(l, es)| {
                    (
                        alphabet.letter_index(l).unwrap(),
                        SimpleConstraint::new(es.to_vec()),
                    )
                })
                .collect(),
        )
    }
    type ElemSpec = crate::constraint::ElementaryConstraint;

    #[test]
    fn membership_follows_the_reference() {
        let mut t = echo_teacher();
        let a = t.alphabet().clone();
        // a at 0, b at 1: one full round, accepted.
        let yes = rw(&a, &[("a", &[Point(0), Point(0)]), ("b", &[Point(1), Point(1)])]);
        assert_eq!(t.membership(&yes), Ok(true));
        // a at 0, b strictly inside (0,1): the answer comes too early.
        let no = rw(&a, &[("a", &[Point(0), Point(0)]), ("b", &[Open(0), Open(0)])]);
        assert_eq!(t.membership(&no), Ok(false));
        // The empty word is in the language.
        assert_eq!(t.membership(&RegionWord::empty()), Ok(true));
        assert_eq!(t.stats().membership, 3);
        assert_eq!(t.protocol_violations(), 0);
    }

    #[test]
    fn unrealizable_membership_is_refused() {
        let mut t = echo_teacher();
        let a = t.alphabet().clone();
        let bad = rw(&a, &[("a", &[AboveK, AboveK]), ("b", &[AboveK, Point(0)])]);
        assert!(matches!(t.membership(&bad), Err(TeacherError::InconsistentWord(_))));
        assert_eq!(t.protocol_violations(), 1);
        // Refused queries are not billed.
        assert_eq!(t.stats().membership, 0);
    }

    #[test]
    fn membership_is_memoized() {
        let mut t = echo_teacher();
        let a = t.alphabet().clone();
        let w = rw(&a, &[("a", &[Point(0), Point(0)])]);
        for _ in 0..5 {
            assert_eq!(t.membership(&w), Ok(true));
        }
        assert_eq!(t.stats().membership, 1);
    }

    #[test]
    fn inclusion_modes_and_memoization() {
        let mut t = echo_teacher();
        let c = t.reference().to_symbolic_dfa().unwrap();
        // The reference is included in itself, both ways.
        assert_eq!(t.inclusion(&c, InclusionMode::CandidateInTarget), Ok(InclusionOutcome::Holds));
        assert_eq!(t.inclusion(&c, InclusionMode::TargetInCandidate), Ok(InclusionOutcome::Holds));
        // It is not disjoint from itself; the shortest overlap is empty.
        assert_eq!(
            t.inclusion(&c, InclusionMode::CandidateInTargetComplement),
            Ok(InclusionOutcome::Counterexample(RegionWord::empty()))
        );
        assert_eq!(t.stats().inclusion, 3);
        // Same candidate again: no new charges.
        let _ = t.inclusion(&c, InclusionMode::CandidateInTarget);
        let _ = t.inclusion(&c, InclusionMode::CandidateInTargetComplement);
        assert_eq!(t.stats().inclusion, 3);
        // The complement is disjoint from the target.
        let co = c.complement();
        assert_eq!(
            t.inclusion(&co, InclusionMode::CandidateInTargetComplement),
            Ok(InclusionOutcome::Holds)
        );
        assert_eq!(t.stats().inclusion, 4);
    }

    #[test]
    fn inclusion_counterexamples_are_realizable_and_shortest() {
        let mut t = echo_teacher();
        let a = t.alphabet().clone();
        // A candidate accepting every symbolic word: its gap against the
        // target must be a realizable word outside the target.
        let all = SymbolicDfa {
            alphabet: a.clone(),
            initial: 0,
            delta: vec![vec![0; a.sym_count()]],
            accepting: vec![true],
            state_names: vec!["all".into()],
        };
        match t.inclusion(&all, InclusionMode::CandidateInTarget) {
            Ok(InclusionOutcome::Counterexample(w)) => {
                assert_eq!(w.len(), 1, "one letter suffices: {}", w.display(&a));
                let mut checker = ConsistencyChecker::new(a.clone());
                assert!(checker.is_consistent(&w));
                assert!(!t.reference().to_symbolic_dfa().unwrap().accepts(&w));
                // Shortest and canonically least: no earlier one-letter
                // realizable word lies outside the target.
                let ref_dfa = t.reference().to_symbolic_dfa().unwrap();
                let wi = w.sym_indices(&a)[0];
                for s in 0..wi {
                    let u = RegionWord::from_sym_indices(&a, &[s]);
                    assert!(!checker.is_consistent(&u) || ref_dfa.accepts(&u));
                }
            }
            other => panic!("expected counterexample, got {other:?}"),
        }
    }

    #[test]
    fn equivalence_agrees_with_inclusions() {
        let mut t = echo_teacher();
        let c = t.reference().to_symbolic_dfa().unwrap();
        assert_eq!(t.equivalence(&c), Ok(EquivalenceOutcome::Equivalent));
        assert_eq!(t.verify_equivalence(&c), EquivalenceOutcome::Equivalent);
        // Flip acceptance of the initial state: the empty word separates.
        let mut tweaked = c.clone();
        tweaked.accepting[c.initial] = false;
        assert_eq!(
            t.equivalence(&tweaked),
            Ok(EquivalenceOutcome::Counterexample(RegionWord::empty()))
        );
        // Both calls above counted themselves along with their inclusions:
        // the equivalent candidate needed both directions, and the tweaked
        // one only failed in the second (it accepts strictly less).
        assert_eq!(t.stats().equivalence, 2);
        assert_eq!(t.stats().inclusion, 4);
        t.note_equivalence_check();
        assert_eq!(t.stats().equivalence, 3);
    }

    #[test]
    fn foreign_alphabet_candidates_are_refused() {
        let mut t = echo_teacher();
        let other = Alphabet::new(["a"], 1).unwrap();
        let c = SymbolicDfa {
            alphabet: other.clone(),
            initial: 0,
            delta: vec![vec![0; other.sym_count()]],
            accepting: vec![true],
            state_names: vec!["s".into()],
        };
        assert_eq!(t.inclusion(&c, InclusionMode::CandidateInTarget), Err(TeacherError::AlphabetMismatch));
        assert_eq!(t.equivalence(&c), Err(TeacherError::AlphabetMismatch));
        assert_eq!(t.protocol_violations(), 2);
    }

    #[test]
    fn membership_matches_timed_simulation_on_specific_words() {
        // The same words, asked as region words of concrete timed words,
        // must agree with direct guard evaluation.
        let mut t = echo_teacher();
        let a = t.alphabet().clone();
        let la = a.letter_index("a").unwrap();
        let lb = a.letter_index("b").unwrap();
        let words = [
            vec![(la, crate::words::Time::new(1, 2))],
            vec![(la, crate::words::Time::new(1, 2)), (lb, crate::words::Time::new(3, 2))],
            vec![
                (la, crate::words::Time::new(1, 2)),
                (lb, crate::words::Time::new(3, 2)),
                (la, crate::words::Time::new(2, 1)),
            ],
            vec![(lb, crate::words::Time::new(1, 1))],
        ];
        for pairs in words {
            let tw = TimedWord::new(pairs).unwrap();
            let verdict = t.membership(&tw.region_word(&a)).unwrap();
            assert_eq!(verdict, t.reference().accepts_timed(&tw), "{}", tw.display(&a));
        }
    }

    #[test]
    fn letters_are_shared_between_alphabet_instances() {
        // A letter index from one alphabet value addresses the same letter
        // in any equal alphabet value.
        let t = echo_teacher();
        let a1 = t.alphabet().clone();
        let a2 = Alphabet::new(["a", "b"], 1).unwrap();
        assert_eq!(a1, a2);
        assert_eq!(a1.letter_index("b"), a2.letter_index("b"));
        assert_eq!(Letter(1), a2.letter_index("b").unwrap());
    }
}
