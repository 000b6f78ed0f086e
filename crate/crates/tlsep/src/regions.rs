//! Clock regions with fractional-part ordering, their time successors, and
//! the automaton recognizing exactly the realizable guard sequences.
//!
//! A per-clock constraint alone does not determine what happens as time
//! elapses: which clock crosses the next integer first depends on the
//! ordering of the fractional parts. A [`FullRegion`] therefore carries that
//! ordering alongside the per-clock positions, which makes the time
//! successor a function and keeps the elapse relation finite.

use std::collections::HashMap;
use std::collections::VecDeque;

use crate::alphabet::{Alphabet, Letter};
use crate::automata::SymbolicNfa;
use crate::constraint::{ElementaryConstraint, SimpleConstraint};

/// Where one clock value sits relative to the integer grid up to K.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum ClockRegion {
    /// Value in [ip, ip+1): exactly ip when `frac_zero`, strictly between
    /// ip and ip+1 otherwise. A fractional clock always has `ip < K`; the
    /// whole range above K collapses into [`ClockRegion::AboveK`].
    Bounded { ip: u32, frac_zero: bool },
    AboveK,
}

/// A region of the full clock space: one [`ClockRegion`] per clock plus the
/// ordering of the positive fractional parts, stored as a partition of the
/// fractional clocks into classes of equal fraction, listed in increasing
/// fraction order. Clocks above K need no fractional bookkeeping.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FullRegion {
    clocks: Vec<ClockRegion>,
    frac_order: Vec<Vec<usize>>,
}

impl FullRegion {
    /// The region containing the all-zeros valuation.
    pub fn initial(alphabet: &Alphabet) -> FullRegion {
        FullRegion {
            clocks: vec![ClockRegion::Bounded { ip: 0, frac_zero: true }; alphabet.letter_count()],
            frac_order: Vec::new(),
        }
    }

    pub fn clocks(&self) -> &[ClockRegion] {
        &self.clocks
    }

    pub fn frac_order(&self) -> &[Vec<usize>] {
        &self.frac_order
    }

    #[cfg(debug_assertions)]
    fn check(&self, k: u32) {
        let mut seen = vec![false; self.clocks.len()];
        for class in &self.frac_order {
            assert!(!class.is_empty());
            assert!(class.windows(2).all(|w| w[0] < w[1]));
            for &i in class {
                assert!(!seen[i]);
                seen[i] = true;
            }
        }
        for (i, c) in self.clocks.iter().enumerate() {
            match c {
                ClockRegion::Bounded { ip, frac_zero: false } => {
                    assert!(*ip < k, "fractional clocks stay below K");
                    assert!(seen[i]);
                }
                _ => assert!(!seen[i]),
            }
        }
    }

    /// The region reached next as time elapses. The all-AboveK region is its
    /// own successor; every other region has a distinct one. Zero-fraction
    /// clocks move first, becoming the new smallest fraction class (or
    /// leaving through K); otherwise the largest fraction class reaches the
    /// next integer.
    pub fn time_successor(&self, k: u32) -> FullRegion {
        #[cfg(debug_assertions)]
        self.check(k);
        let zero: Vec<usize> = (0..self.clocks.len())
            .filter(|&i| matches!(self.clocks[i], ClockRegion::Bounded { frac_zero: true, .. }))
            .collect();
        if !zero.is_empty() {
            let mut clocks = self.clocks.clone();
            let mut new_min = Vec::new();
            for &i in &zero {
                let ClockRegion::Bounded { ip, .. } = clocks[i] else { unreachable!() };
                if ip == k {
                    clocks[i] = ClockRegion::AboveK;
                } else {
                    clocks[i] = ClockRegion::Bounded { ip, frac_zero: false };
                    new_min.push(i);
                }
            }
            let mut frac_order = self.frac_order.clone();
            if !new_min.is_empty() {
                frac_order.insert(0, new_min);
            }
            return FullRegion { clocks, frac_order };
        }
        if let Some(last) = self.frac_order.last() {
            let mut clocks = self.clocks.clone();
            for &i in last {
                let ClockRegion::Bounded { ip, .. } = clocks[i] else { unreachable!() };
                clocks[i] = ClockRegion::Bounded { ip: ip + 1, frac_zero: true };
            }
            let mut frac_order = self.frac_order.clone();
            frac_order.pop();
            return FullRegion { clocks, frac_order };
        }
        self.clone()
    }

    /// This region followed by every later one, ending at the absorbing
    /// all-AboveK region.
    pub fn time_successors(&self, k: u32) -> Vec<FullRegion> {
        let mut out = vec![self.clone()];
        loop {
            let next = out.last().unwrap().time_successor(k);
            if &next == out.last().unwrap() {
                break;
            }
            out.push(next);
        }
        out
    }

    /// Drops the fractional ordering, leaving the per-clock constraint.
    pub fn projection(&self) -> SimpleConstraint {
        SimpleConstraint::new(
            self.clocks
                .iter()
                .map(|c| match c {
                    ClockRegion::Bounded { ip, frac_zero: true } => ElementaryConstraint::Point(*ip),
                    ClockRegion::Bounded { ip, frac_zero: false } => ElementaryConstraint::Open(*ip),
                    ClockRegion::AboveK => ElementaryConstraint::AboveK,
                })
                .collect(),
        )
    }

    /// The region after `letter`'s clock snaps back to zero.
    pub fn reset(&self, letter: Letter) -> FullRegion {
        let mut clocks = self.clocks.clone();
        clocks[letter.0] = ClockRegion::Bounded { ip: 0, frac_zero: true };
        let mut frac_order = Vec::with_capacity(self.frac_order.len());
        for class in &self.frac_order {
            let kept: Vec<usize> = class.iter().copied().filter(|&i| i != letter.0).collect();
            if !kept.is_empty() {
                frac_order.push(kept);
            }
        }
        FullRegion { clocks, frac_order }
    }

    pub fn display(&self, alphabet: &Alphabet) -> String {
        let mut s = self.projection().display(alphabet);
        let fractional: usize = self.frac_order.iter().map(|c| c.len()).sum();
        if fractional >= 2 {
            let classes: Vec<String> = self
                .frac_order
                .iter()
                .map(|class| {
                    let names: Vec<String> = class
                        .iter()
                        .map(|&i| alphabet.clock_name(Letter(i)))
                        .collect();
                    format!("{{{}}}", names.join(", "))
                })
                .collect();
            s.push_str("  fracs ");
            s.push_str(&classes.join(" < "));
        }
        s
    }
}

/// The automaton of realizable guard sequences, with the region behind each
/// state kept for display.
pub struct Regl {
    pub automaton: SymbolicNfa,
    pub state_labels: Vec<String>,
    pub regions: Vec<FullRegion>,
}

/// Explores regions reachable by alternating time elapse and one-clock
/// resets, recording for each region and symbolic letter (letter, guard) the
/// region reached by elapsing into the guard and resetting the letter's
/// clock. Every state accepts: realizability is prefix-closed, so a word is
/// realizable exactly when the run never dies.
///
/// Within one elapse chain all projections are distinct (each step strictly
/// advances some clock's constraint), so at most one chain element matches a
/// given guard and the automaton is in fact deterministic, if partial.
pub fn build_regl(alphabet: &Alphabet) -> Regl {
    let syms = alphabet.sym_count();
    let mut index: HashMap<FullRegion, usize> = HashMap::new();
    let mut regions: Vec<FullRegion> = Vec::new();
    let mut delta: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut queue = VecDeque::new();
    let init = FullRegion::initial(alphabet);
    index.insert(init.clone(), 0);
    regions.push(init);
    queue.push_back(0usize);
    while let Some(cur) = queue.pop_front() {
        while delta.len() <= cur {
            delta.push(vec![Vec::new(); syms]);
        }
        let here = regions[cur].clone();
        for succ in here.time_successors(alphabet.k()) {
            let region_idx = alphabet.region_index(&succ.projection());
            for l in alphabet.letters() {
                let target = succ.reset(l);
                let id = match index.get(&target) {
                    Some(&id) => id,
                    None => {
                        let id = regions.len();
                        index.insert(target.clone(), id);
                        regions.push(target);
                        queue.push_back(id);
                        id
                    }
                };
                let s = alphabet.sym_index(l, region_idx);
                debug_assert!(delta[cur][s].is_empty(), "distinct projections along a chain");
                delta[cur][s].push(id);
            }
        }
    }
    while delta.len() < regions.len() {
        delta.push(vec![Vec::new(); syms]);
    }
    let state_labels = regions.iter().map(|r| r.display(alphabet)).collect();
    let automaton = SymbolicNfa {
        alphabet: alphabet.clone(),
        initials: vec![0],
        delta,
        accepting: vec![true; regions.len()],
    };
    Regl { automaton, state_labels, regions }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::RegionWord;

    fn ab1() -> Alphabet {
        Alphabet::new(["a", "b"], 1).unwrap()
    }

    fn parse_rw(alphabet: &Alphabet, elems: &[&[ElementaryConstraint]]) -> RegionWord {
        // Letters cycle a, b, a, b for brevity in these tests.
        RegionWord::new(
            elems
                .iter()
                .enumerate()
                .map(|(i, es)| {
                    (
                        Letter(i % alphabet.letter_count()),
                        SimpleConstraint::new(es.to_vec()),
                    )
                })
                .collect(),
        )
    }

    #[test]
    fn single_clock_chain_walks_the_line() {
        let a = Alphabet::new(["a"], 1).unwrap();
        let chain = FullRegion::initial(&a).time_successors(1);
        let shown: Vec<String> = chain.iter().map(|r| r.display(&a)).collect();
        assert_eq!(shown, ["x_a=0", "0<x_a<1", "x_a=1", "x_a>1"]);
        // The final region is absorbing.
        let last = chain.last().unwrap();
        assert_eq!(&last.time_successor(1), last);
    }

    #[test]
    fn synchronized_clocks_share_a_class() {
        let a = ab1();
        let chain = FullRegion::initial(&a).time_successors(1);
        let shown: Vec<String> = chain.iter().map(|r| r.display(&a)).collect();
        assert_eq!(
            shown,
            [
                "x_a=0 & x_b=0",
                "0<x_a<1 & 0<x_b<1  fracs {x_a, x_b}",
                "x_a=1 & x_b=1",
                "x_a>1 & x_b>1",
            ]
        );
    }

    #[test]
    fn reset_splits_the_fractions() {
        let a = ab1();
        let lb = a.letter_index("b").unwrap();
        // From the common fractional region, reset x_b and elapse.
        let both = FullRegion::initial(&a).time_successors(1)[1].clone();
        let after = both.reset(lb);
        assert_eq!(after.display(&a), "0<x_a<1 & x_b=0");
        let chain = after.time_successors(1);
        let shown: Vec<String> = chain.iter().map(|r| r.display(&a)).collect();
        assert_eq!(
            shown,
            [
                "0<x_a<1 & x_b=0",
                "0<x_a<1 & 0<x_b<1  fracs {x_b} < {x_a}",
                "x_a=1 & 0<x_b<1",
                "x_a>1 & 0<x_b<1",
                "x_a>1 & x_b=1",
                "x_a>1 & x_b>1",
            ]
        );
    }

    #[test]
    fn single_letter_words_are_all_realizable() {
        // With one clock, each step constrains only the gap since the last
        // event, so every sequence is realizable: one state, all loops.
        let a = Alphabet::new(["a"], 1).unwrap();
        let regl = build_regl(&a);
        assert_eq!(regl.automaton.n_states(), 1);
        for s in 0..a.sym_count() {
            assert_eq!(regl.automaton.delta[0][s], [0]);
        }
    }

    #[test]
    fn membership_matches_known_verdicts() {
        let a = ab1();
        let regl = build_regl(&a);
        use ElementaryConstraint::{AboveK, Open, Point};
        // (a, x_a=0 & x_b=0)(b, x_a=1 & x_b=1): both letters at times 0, 1.
        let good = parse_rw(&a, &[&[Point(0), Point(0)], &[Point(1), Point(1)]]);
        assert!(regl.automaton.accepts(&good));
        // (a, x_a>1 & x_b>1)(b, x_a>1 & x_b=0): the b would have to occur
        // both after a late a and at time zero.
        let bad = parse_rw(&a, &[&[AboveK, AboveK], &[AboveK, Point(0)]]);
        assert!(!regl.automaton.accepts(&bad));
        // A fractional run: a at 0.6, b at 1.2, a again at 1.8.
        let frac = parse_rw(
            &a,
            &[
                &[Open(0), Open(0)],
                &[Open(0), AboveK],
                &[AboveK, Open(0)],
            ],
        );
        assert!(regl.automaton.accepts(&frac));
        // The gap since the a exceeds one unit while the b itself sits
        // below one unit, yet the a came first: impossible.
        let off = parse_rw(&a, &[&[Open(0), Open(0)], &[AboveK, Open(0)]]);
        assert!(!regl.automaton.accepts(&off));
    }

    #[test]
    fn prefix_closure_holds_on_samples() {
        let a = ab1();
        let regl = build_regl(&a);
        // Walk a few hundred words breadth-first; whenever a word is
        // accepted, all of its prefixes must be accepted too.
        let mut frontier = vec![RegionWord::empty()];
        for _ in 0..2 {
            let mut next = Vec::new();
            for w in &frontier {
                for s in 0..a.sym_count() {
                    let mut syms = w.sym_indices(&a);
                    syms.push(s);
                    let ext = RegionWord::from_sym_indices(&a, &syms);
                    if regl.automaton.accepts(&ext) {
                        assert!(regl.automaton.accepts(w));
                        next.push(ext);
                    }
                }
            }
            frontier = next;
        }
        assert!(!frontier.is_empty());
    }
}
