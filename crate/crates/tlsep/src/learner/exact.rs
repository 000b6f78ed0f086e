//! Backtracking search for a smallest candidate automaton.
//!
//! The search covers only the part of the hypothesis that can still reach
//! acceptance. Transitions whose image is entirely hopeless stay undefined
//! and fall to an implicit rejecting sink, so the reported size counts the
//! states that matter, the same convention the trimmed output uses.

use std::collections::VecDeque;

use crate::automata::{Class3, ThreeDfa};
use crate::learner::extract::{assemble, Candidate};

/// Hypothesis states from which an accept-class state is reachable.
fn accept_reaching(three: &ThreeDfa) -> Vec<bool> {
    let n = three.n_states();
    let mut reversed = vec![Vec::new(); n];
    for (src, row) in three.delta.iter().enumerate() {
        for &t in row {
            reversed[t].push(src);
        }
    }
    let mut live: Vec<bool> = three.classes.iter().map(|&c| c == Class3::Accept).collect();
    let mut queue: Vec<usize> = (0..n).filter(|&q| live[q]).collect();
    while let Some(q) = queue.pop() {
        for &p in &reversed[q] {
            if !live[p] {
                live[p] = true;
                queue.push(p);
            }
        }
    }
    live
}

#[derive(Clone)]
struct Partial {
    /// Hypothesis states placed in each slot so far.
    masks: Vec<u128>,
    /// Slots already holding at least one state.
    used: usize,
    /// Chosen slot targets; `None` is undecided (and becomes the sink if it
    /// survives to the end).
    targets: Vec<Vec<Option<usize>>>,
    /// Hopeless successors waiting on an undecided transition; they join
    /// the target slot if one is ever chosen.
    pending: Vec<Vec<Vec<usize>>>,
    /// Placement obligations still to process: (hypothesis state, slot,
    /// symbol).
    queue: VecDeque<(usize, usize, usize)>,
}

struct Search<'a> {
    three: &'a ThreeDfa,
    bad: &'a [Vec<bool>],
    live: Vec<bool>,
    slot_budget: usize,
    sym_count: usize,
}

impl Search<'_> {
    /// Puts `q` into slot `j` unless an incompatibility forbids it; newly
    /// placed states owe one obligation per symbol.
    fn place(&self, partial: &mut Partial, q: usize, j: usize) -> bool {
        if partial.masks[j] & (1u128 << q) != 0 {
            return true;
        }
        let mut rest = partial.masks[j];
        while rest != 0 {
            let p = rest.trailing_zeros() as usize;
            if self.bad[p][q] {
                return false;
            }
            rest &= rest - 1;
        }
        partial.masks[j] |= 1u128 << q;
        for s in 0..self.sym_count {
            partial.queue.push_back((q, j, s));
        }
        true
    }

    fn decide_target(&self, partial: &mut Partial, slot: usize, sym: usize, j: usize) -> bool {
        partial.targets[slot][sym] = Some(j);
        let waiting = std::mem::take(&mut partial.pending[slot][sym]);
        waiting.into_iter().all(|p| self.place(partial, p, j))
    }

    fn solve(&self, mut partial: Partial) -> Option<Partial> {
        loop {
            let Some((q, slot, sym)) = partial.queue.pop_front() else {
                return Some(partial);
            };
            let successor = self.three.delta[q][sym];
            match partial.targets[slot][sym] {
                Some(j) => {
                    if !self.place(&mut partial, successor, j) {
                        return None;
                    }
                }
                None if !self.live[successor] => {
                    partial.pending[slot][sym].push(successor);
                }
                None => {
                    // Try existing slots in order, then at most one fresh
                    // slot; opening any fresh slot is equivalent to opening
                    // the first unused one.
                    let limit = (partial.used + 1).min(self.slot_budget);
                    for j in 0..limit {
                        let mut child = partial.clone();
                        if j == child.used {
                            child.used += 1;
                        }
                        if !self.decide_target(&mut child, slot, sym, j) {
                            continue;
                        }
                        if !self.place(&mut child, successor, j) {
                            continue;
                        }
                        if let Some(done) = self.solve(child) {
                            return Some(done);
                        }
                    }
                    return None;
                }
            }
        }
    }
}

/// A candidate with at most `size` states (sink excluded) that accepts
/// every strongly accepted word and rejects every strongly rejected one, if
/// such an automaton exists.
pub fn consistent_with_size(three: &ThreeDfa, bad: &[Vec<bool>], size: usize) -> Option<Candidate> {
    let live = accept_reaching(three);
    if !live[three.initial] {
        // Nothing is strongly accepted from the start: a bare rejecting
        // state suffices, and no smaller automaton exists.
        let sym_count = three.alphabet.sym_count();
        return Some(assemble(
            three,
            vec![1u128 << three.initial],
            vec![vec![0; sym_count]],
        ));
    }
    if size == 0 {
        return None;
    }
    let sym_count = three.alphabet.sym_count();
    let search = Search {
        three,
        bad,
        live,
        slot_budget: size,
        sym_count,
    };
    let mut start = Partial {
        masks: vec![0; size],
        used: 0,
        targets: vec![vec![None; sym_count]; size],
        pending: vec![vec![Vec::new(); sym_count]; size],
        queue: VecDeque::new(),
    };
    start.used = 1;
    let placed = search.place(&mut start, three.initial, 0);
    debug_assert!(placed, "an empty slot accepts any state");
    let solved = search.solve(start)?;
    let used = solved.used;
    let mut slots: Vec<u128> = solved.masks[..used].to_vec();
    let needs_sink = solved.targets[..used]
        .iter()
        .any(|row| row.iter().any(Option::is_none));
    let sink = if needs_sink {
        slots.push(0);
        Some(used)
    } else {
        None
    };
    let delta: Vec<Vec<usize>> = solved.targets[..used]
        .iter()
        .map(|row| {
            row.iter()
                .map(|t| t.unwrap_or_else(|| sink.expect("undecided targets imply a sink")))
                .collect()
        })
        .collect();
    let mut delta = delta;
    if let Some(sink) = sink {
        delta.push(vec![sink; sym_count]);
    }
    Some(assemble(three, slots, delta))
}

/// The smallest candidate within `max_size`, searching sizes upward.
pub fn minimal_consistent(three: &ThreeDfa, bad: &[Vec<bool>], max_size: usize) -> Option<Candidate> {
    (1..=max_size).find_map(|n| consistent_with_size(three, bad, n))
}
