//! Timed, clocked, region, and symbolic words, and the projections between
//! them.

use num_rational::Ratio;

use crate::alphabet::{Alphabet, Letter};
use crate::constraint::{region_of_valuation, Guard, SimpleConstraint};

/// Exact rational time.
pub type Time = Ratio<i64>;

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum WordError {
    #[error("timestamps must be non-negative and non-decreasing (position {position})")]
    NotMonotone { position: usize },
    #[error("letter index {letter} out of range for the alphabet")]
    UnknownLetter { letter: usize },
}

/// A word of events with absolute, non-decreasing timestamps.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TimedWord {
    pairs: Vec<(Letter, Time)>,
}

impl TimedWord {
    pub fn new(pairs: Vec<(Letter, Time)>) -> Result<Self, WordError> {
        let mut prev = Time::from_integer(0);
        for (i, (_, t)) in pairs.iter().enumerate() {
            if *t < prev {
                return Err(WordError::NotMonotone { position: i + 1 });
            }
            prev = *t;
        }
        Ok(TimedWord { pairs })
    }

    pub fn empty() -> Self {
        TimedWord { pairs: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(Letter, Time)] {
        &self.pairs
    }

    /// The clock valuations read at each event, before the event's own reset:
    /// clock `x_l` holds the time since the last `l`, or the absolute time if
    /// `l` has not occurred.
    pub fn clocked(&self, alphabet: &Alphabet) -> ClockedWord {
        let n_clocks = alphabet.letter_count();
        let mut last = vec![Time::from_integer(0); n_clocks];
        let mut out = Vec::with_capacity(self.pairs.len());
        for (letter, t) in &self.pairs {
            let valuation: Vec<Time> = last.iter().map(|l| *t - *l).collect();
            out.push((*letter, valuation));
            last[letter.0] = *t;
        }
        ClockedWord { pairs: out }
    }

    /// The unique region word this timed word satisfies.
    pub fn region_word(&self, alphabet: &Alphabet) -> RegionWord {
        RegionWord {
            pairs: self
                .clocked(alphabet)
                .pairs
                .into_iter()
                .map(|(l, v)| (l, region_of_valuation(alphabet, &v)))
                .collect(),
        }
    }

    pub fn display(&self, alphabet: &Alphabet) -> String {
        if self.pairs.is_empty() {
            return "(empty)".into();
        }
        self.pairs
            .iter()
            .map(|(l, t)| format!("({}, {})", alphabet.letter_name(*l), t))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// A word of events with explicit clock valuations.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ClockedWord {
    pairs: Vec<(Letter, Vec<Time>)>,
}

impl ClockedWord {
    pub fn pairs(&self) -> &[(Letter, Vec<Time>)] {
        &self.pairs
    }
}

/// A word over the symbolic alphabet: each event paired with a simple
/// constraint on all clocks.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct RegionWord {
    pairs: Vec<(Letter, SimpleConstraint)>,
}

impl RegionWord {
    pub fn new(pairs: Vec<(Letter, SimpleConstraint)>) -> Self {
        RegionWord { pairs }
    }

    pub fn empty() -> Self {
        RegionWord { pairs: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(Letter, SimpleConstraint)] {
        &self.pairs
    }

    pub fn letter(&self, i: usize) -> Letter {
        self.pairs[i].0
    }

    pub fn prefix(&self, len: usize) -> RegionWord {
        RegionWord {
            pairs: self.pairs[..len].to_vec(),
        }
    }

    pub fn suffix(&self, from: usize) -> RegionWord {
        RegionWord {
            pairs: self.pairs[from..].to_vec(),
        }
    }

    pub fn concat(&self, other: &RegionWord) -> RegionWord {
        let mut pairs = self.pairs.clone();
        pairs.extend(other.pairs.iter().cloned());
        RegionWord { pairs }
    }

    pub fn push(&self, letter: Letter, region: SimpleConstraint) -> RegionWord {
        let mut pairs = self.pairs.clone();
        pairs.push((letter, region));
        RegionWord { pairs }
    }

    /// Dense indices into the symbolic alphabet, one per position.
    pub fn sym_indices(&self, alphabet: &Alphabet) -> Vec<usize> {
        self.pairs
            .iter()
            .map(|(l, r)| alphabet.sym_index(*l, alphabet.region_index(r)))
            .collect()
    }

    pub fn from_sym_indices(alphabet: &Alphabet, syms: &[usize]) -> RegionWord {
        RegionWord {
            pairs: syms
                .iter()
                .map(|&s| {
                    let (l, r) = alphabet.sym_at(s);
                    (l, alphabet.region_at(r))
                })
                .collect(),
        }
    }

    pub fn display(&self, alphabet: &Alphabet) -> String {
        if self.pairs.is_empty() {
            return "(empty)".into();
        }
        self.pairs
            .iter()
            .map(|(l, r)| format!("({}, {})", alphabet.letter_name(*l), r.display(alphabet)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// A word over events paired with arbitrary guards; the raw transition labels
/// of an automaton, before guard splitting.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SymbolicWord {
    pub pairs: Vec<(Letter, Guard)>,
}

impl SymbolicWord {
    pub fn display(&self, alphabet: &Alphabet) -> String {
        if self.pairs.is_empty() {
            return "(empty)".into();
        }
        self.pairs
            .iter()
            .map(|(l, g)| format!("({}, {})", alphabet.letter_name(*l), g.display(alphabet)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::ElementaryConstraint;

    fn ab1() -> Alphabet {
        Alphabet::new(["a", "b"], 1).unwrap()
    }

    fn tw(alphabet: &Alphabet, spec: &[(&str, Time)]) -> TimedWord {
        TimedWord::new(
            spec.iter()
                .map(|(l, t)| (alphabet.letter_index(l).unwrap(), *t))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn rejects_decreasing_timestamps() {
        let a = ab1();
        let l = a.letter_index("a").unwrap();
        let r = TimedWord::new(vec![
            (l, Time::from_integer(2)),
            (l, Time::from_integer(1)),
        ]);
        assert_eq!(r, Err(WordError::NotMonotone { position: 2 }));
        let r = TimedWord::new(vec![(l, Time::from_integer(-1))]);
        assert_eq!(r, Err(WordError::NotMonotone { position: 1 }));
    }

    #[test]
    fn clock_valuations_measure_since_last_occurrence() {
        let a = ab1();
        // (a, 1) (b, 3/2) (a, 3/2)
        let w = tw(&a, &[("a", Time::from_integer(1)), ("b", Time::new(3, 2)), ("a", Time::new(3, 2))]);
        let cw = w.clocked(&a);
        // First event: both clocks read the absolute time.
        assert_eq!(cw.pairs()[0].1, vec![Time::from_integer(1), Time::from_integer(1)]);
        // Second: x_a since the a at 1, x_b since the start.
        assert_eq!(cw.pairs()[1].1, vec![Time::new(1, 2), Time::new(3, 2)]);
        // Third: x_a since the a at 1 (reset not yet applied for this event's
        // own letter until after the read), x_b zero delay after the b.
        assert_eq!(cw.pairs()[2].1, vec![Time::new(1, 2), Time::from_integer(0)]);
    }

    #[test]
    fn region_word_projection() {
        let a = ab1();
        // (a, 0) (b, 1) -> (a, x_a=0 & x_b=0) (b, x_a=1 & x_b=1)
        let w = tw(&a, &[("a", Time::from_integer(0)), ("b", Time::from_integer(1))]);
        let rw = w.region_word(&a);
        assert_eq!(rw.display(&a), "(a, x_a=0 & x_b=0) (b, x_a=1 & x_b=1)");
        let elems0 = rw.pairs()[0].1.elems();
        assert_eq!(
            elems0,
            &[ElementaryConstraint::Point(0), ElementaryConstraint::Point(0)]
        );
    }

    #[test]
    fn sym_indices_roundtrip() {
        let a = ab1();
        let w = tw(&a, &[("a", Time::new(1, 2)), ("b", Time::new(5, 2))]);
        let rw = w.region_word(&a);
        let syms = rw.sym_indices(&a);
        assert_eq!(RegionWord::from_sym_indices(&a, &syms), rw);
    }
}
