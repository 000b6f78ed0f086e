//! Candidate automata assembled from compatible sets, and their conversion
//! back to guard form.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::alphabet::{Alphabet, Letter};
use crate::automata::{Class3, Dera, DeraEdge, SymbolicDfa, ThreeDfa};
use crate::constraint::{ClockInterval, ElementaryConstraint, Guard, SimpleConstraint};
use crate::learner::compat::set_members;

/// An extracted candidate in both of its working forms.
#[derive(Clone, Debug)]
pub struct Candidate {
    /// Total automaton over the symbolic alphabet; the object the teacher
    /// is queried with and the audits run against.
    pub dfa: SymbolicDfa,
    /// The hypothesis-state set behind each automaton state (empty mask for
    /// an explicit sink).
    pub slots: Vec<u128>,
    /// Which automaton states can still reach acceptance.
    pub live: Vec<bool>,
    /// Size of the trimmed output automaton; what run reports count.
    pub dera_states: usize,
    /// The trimmed output: states that accept nothing are dropped and the
    /// surviving region bundles are merged back into interval guards.
    pub dera: Dera,
}

fn accept_mask(classes: &[Class3]) -> u128 {
    classes
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == Class3::Accept)
        .fold(0u128, |m, (i, _)| m | (1u128 << i))
}

/// Best compatible superset of `image`: largest, ties to the earliest in
/// the family's canonical order. `within` restricts the search when the
/// caller prefers reusing sets it already placed.
fn best_superset(sets: &[u128], image: u128, within: Option<&HashMap<u128, usize>>) -> Option<u128> {
    let mut best: Option<u128> = None;
    for &t in sets {
        if t & image != image {
            continue;
        }
        if let Some(placed) = within {
            if !placed.contains_key(&t) {
                continue;
            }
        }
        if best.is_none_or(|b| t.count_ones() > b.count_ones()) {
            best = Some(t);
        }
    }
    best
}

/// Builds a candidate by covering the hypothesis with maximal compatible
/// sets.
///
/// The start state is the largest set holding the hypothesis start state;
/// each transition's target must contain the pointwise image of the whole
/// source set, preferring the largest such set. With `reuse_targets`, an
/// already-placed set that contains the image wins over a larger
/// undiscovered one.
pub fn greedy_candidate(three: &ThreeDfa, sets: &[u128], reuse_targets: bool) -> Candidate {
    let sym_count = three.alphabet.sym_count();
    let init = best_superset(sets, 1u128 << three.initial, None)
        .expect("every state lies in some maximal compatible set");
    let mut chosen: Vec<u128> = vec![init];
    let mut placed: HashMap<u128, usize> = HashMap::from([(init, 0)]);
    let mut delta: Vec<Vec<usize>> = Vec::new();
    let mut at = 0;
    while at < chosen.len() {
        let src = chosen[at];
        let mut row = Vec::with_capacity(sym_count);
        for s in 0..sym_count {
            let image = set_members(src)
                .into_iter()
                .fold(0u128, |m, q| m | (1u128 << three.delta[q][s]));
            let target = reuse_targets
                .then(|| best_superset(sets, image, Some(&placed)))
                .flatten()
                .or_else(|| best_superset(sets, image, None))
                .expect("the image of a compatible set is compatible");
            let j = *placed.entry(target).or_insert_with(|| {
                chosen.push(target);
                chosen.len() - 1
            });
            row.push(j);
        }
        delta.push(row);
        at += 1;
    }
    assemble(three, chosen, delta)
}

/// Finishes a candidate from its slot masks and total transition table:
/// names the states, marks liveness, and produces the trimmed output
/// automaton.
pub fn assemble(three: &ThreeDfa, slots: Vec<u128>, delta: Vec<Vec<usize>>) -> Candidate {
    let accepting_mask = accept_mask(&three.classes);
    let accepting: Vec<bool> = slots.iter().map(|&m| m & accepting_mask != 0).collect();
    let state_names: Vec<String> = slots
        .iter()
        .map(|&m| {
            if m == 0 {
                "sink".to_string()
            } else {
                let names: Vec<&str> = set_members(m)
                    .into_iter()
                    .map(|q| three.state_names[q].as_str())
                    .collect();
                format!("{{{}}}", names.join(" "))
            }
        })
        .collect();
    let dfa = SymbolicDfa {
        alphabet: three.alphabet.clone(),
        initial: 0,
        delta,
        accepting,
        state_names,
    };
    let live = live_states(&dfa);
    let dera = trimmed_dera(&dfa, &live);
    let dera_states = dera.n_states();
    Candidate {
        dfa,
        slots,
        live,
        dera_states,
        dera,
    }
}

/// States from which an accepting state is reachable.
fn live_states(dfa: &SymbolicDfa) -> Vec<bool> {
    let n = dfa.n_states();
    let mut reversed = vec![Vec::new(); n];
    for (src, row) in dfa.delta.iter().enumerate() {
        for &t in row {
            reversed[t].push(src);
        }
    }
    let mut live = dfa.accepting.clone();
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

/// Drops states that accept nothing and rebuilds interval guards from the
/// surviving regions. An automaton with no live state keeps one rejecting
/// state so it still has a start.
fn trimmed_dera(dfa: &SymbolicDfa, live: &[bool]) -> Dera {
    let alphabet = &dfa.alphabet;
    if !live.iter().any(|&l| l) {
        return Dera::new(
            alphabet.clone(),
            vec!["c0".to_string()],
            0,
            vec![false],
            Vec::new(),
        )
        .expect("a single bare state is a valid automaton");
    }
    debug_assert!(live[dfa.initial], "a live state exists but not the start");
    let mut renumber = vec![usize::MAX; dfa.n_states()];
    let mut accepting = Vec::new();
    for (old, &keep) in live.iter().enumerate() {
        if keep {
            renumber[old] = accepting.len();
            accepting.push(dfa.accepting[old]);
        }
    }
    let names: Vec<String> = (0..accepting.len()).map(|i| format!("c{i}")).collect();
    let mut edges = Vec::new();
    for (old, &keep) in live.iter().enumerate() {
        if !keep {
            continue;
        }
        // Regions grouped by letter and (live) target, then merged.
        let mut groups: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for s in 0..alphabet.sym_count() {
            let target = dfa.delta[old][s];
            if !live[target] {
                continue;
            }
            let (letter, region) = alphabet.sym_at(s);
            groups.entry((letter.0, target)).or_default().push(region);
        }
        for ((letter, target), regions) in groups {
            for guard in regions_to_guards(alphabet, &regions) {
                edges.push(DeraEdge {
                    source: renumber[old],
                    letter: Letter(letter),
                    guard,
                    target: renumber[target],
                });
            }
        }
    }
    Dera::new(
        alphabet.clone(),
        names,
        renumber[dfa.initial],
        accepting,
        edges,
    )
    .expect("region groups are disjoint, so the guards are too")
}

/// Covers a region set with as few interval-conjunction guards as it can
/// find greedily.
///
/// Works in the per-clock index space where every interval guard is an axis
/// box: repeatedly grows a box from the smallest uncovered region while
/// every region in the grown box is still uncovered, then emits it.
pub fn regions_to_guards(alphabet: &Alphabet, regions: &[usize]) -> Vec<Guard> {
    let k = alphabet.k();
    let clocks = alphabet.letter_count();
    let elem_count = 2 * k as usize + 2;
    let elems_of = |region: usize| -> Vec<usize> {
        alphabet
            .region_at(region)
            .elems()
            .iter()
            .map(|e| e.index(k))
            .collect()
    };
    let index_of = |elems: &[usize]| -> usize {
        let parts = elems
            .iter()
            .map(|&i| ElementaryConstraint::from_index(k, i))
            .collect();
        alphabet.region_index(&SimpleConstraint::new(parts))
    };
    let mut remaining: BTreeSet<usize> = regions.iter().copied().collect();
    let mut guards = Vec::new();
    while let Some(&seed) = remaining.iter().next() {
        let mut lo = elems_of(seed);
        let mut hi = lo.clone();
        // Whether every region with clock `c` pinned to `v` and the other
        // clocks ranging over the current box is still uncovered.
        let slab_uncovered = |remaining: &BTreeSet<usize>, c: usize, v: usize, lo: &[usize], hi: &[usize]| {
            let mut probe = lo.to_vec();
            probe[c] = v;
            loop {
                if !remaining.contains(&index_of(&probe)) {
                    return false;
                }
                let mut d = 0;
                while d < clocks {
                    if d != c && probe[d] < hi[d] {
                        probe[d] += 1;
                        break;
                    }
                    if d != c {
                        probe[d] = lo[d];
                    }
                    d += 1;
                }
                if d == clocks {
                    return true;
                }
            }
        };
        loop {
            let mut grew = false;
            for c in 0..clocks {
                while hi[c] + 1 < elem_count && slab_uncovered(&remaining, c, hi[c] + 1, &lo, &hi) {
                    hi[c] += 1;
                    grew = true;
                }
                while lo[c] > 0 && slab_uncovered(&remaining, c, lo[c] - 1, &lo, &hi) {
                    lo[c] -= 1;
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        // Remove everything inside the box and emit it as one guard.
        let mut cursor = lo.clone();
        loop {
            remaining.remove(&index_of(&cursor));
            let mut d = 0;
            loop {
                if d == clocks {
                    break;
                }
                if cursor[d] < hi[d] {
                    cursor[d] += 1;
                    break;
                }
                cursor[d] = lo[d];
                d += 1;
            }
            if d == clocks {
                break;
            }
        }
        let atoms = (0..clocks).map(|c| (Letter(c), range_interval(k, lo[c], hi[c])));
        guards.push(Guard::from_atoms(alphabet, atoms).expect("box bounds stay within 0..=k"));
    }
    guards
}

/// The clock interval covering exactly the elementary constraints from
/// index `lo_idx` through `hi_idx`.
fn range_interval(k: u32, lo_idx: usize, hi_idx: usize) -> ClockInterval {
    let (lo, lo_strict) = match ElementaryConstraint::from_index(k, lo_idx) {
        ElementaryConstraint::Point(c) => (c, false),
        ElementaryConstraint::Open(d) => (d, true),
        ElementaryConstraint::AboveK => (k, true),
    };
    let (hi, hi_strict) = match ElementaryConstraint::from_index(k, hi_idx) {
        ElementaryConstraint::Point(c) => (Some(c), false),
        ElementaryConstraint::Open(d) => (Some(d + 1), true),
        ElementaryConstraint::AboveK => (None, false),
    };
    ClockInterval {
        lo,
        lo_strict,
        hi,
        hi_strict,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use crate::learner::compat::{incompatible_pairs, maximal_compatible_sets};

    fn two_letters() -> Alphabet {
        Alphabet::new(["a", "b"], 1).unwrap()
    }

    #[test]
    fn full_region_set_becomes_the_trivial_guard() {
        let alphabet = two_letters();
        let regions: Vec<usize> = (0..alphabet.region_count()).collect();
        let guards = regions_to_guards(&alphabet, &regions);
        assert_eq!(guards.len(), 1);
        assert!(guards[0].is_top());
    }

    #[test]
    fn one_pinned_clock_merges_into_a_line() {
        let alphabet = two_letters();
        // All regions with x_a = 1, x_b free.
        let regions: Vec<usize> = alphabet
            .regions()
            .enumerate()
            .filter(|(_, r)| r.elems()[0] == ElementaryConstraint::Point(1))
            .map(|(i, _)| i)
            .collect();
        assert_eq!(regions.len(), 4);
        let guards = regions_to_guards(&alphabet, &regions);
        assert_eq!(guards.len(), 1);
        assert_eq!(guards[0].interval(Letter(0)), &ClockInterval::point(1));
        assert!(guards[0].interval(Letter(1)).is_full());
    }

    #[test]
    fn gaps_force_separate_guards() {
        let alphabet = two_letters();
        // x_a = 0 and x_a = 1 with x_b free, skipping the open cell between.
        let regions: Vec<usize> = alphabet
            .regions()
            .enumerate()
            .filter(|(_, r)| {
                matches!(
                    r.elems()[0],
                    ElementaryConstraint::Point(0) | ElementaryConstraint::Point(1)
                )
            })
            .map(|(i, _)| i)
            .collect();
        let guards = regions_to_guards(&alphabet, &regions);
        assert_eq!(guards.len(), 2);
    }

    #[test]
    fn every_region_lands_in_exactly_one_guard() {
        let alphabet = two_letters();
        // An L-shaped set: the x_a=0 row plus the x_b=0 column.
        let regions: Vec<usize> = alphabet
            .regions()
            .enumerate()
            .filter(|(_, r)| {
                r.elems()[0] == ElementaryConstraint::Point(0)
                    || r.elems()[1] == ElementaryConstraint::Point(0)
            })
            .map(|(i, _)| i)
            .collect();
        let guards = regions_to_guards(&alphabet, &regions);
        for (i, region) in alphabet.regions().enumerate() {
            let inside = guards
                .iter()
                .filter(|g| crate::constraint::region_satisfies_guard(&alphabet, &region, g))
                .count();
            let expected = usize::from(regions.contains(&i));
            assert_eq!(inside, expected, "region {}", region.display(&alphabet));
        }
    }

    #[test]
    fn greedy_cover_of_an_alternating_hypothesis() {
        use Class3::*;
        let alphabet = Alphabet::new(["a"], 1).unwrap();
        let syms = alphabet.sym_count();
        // accept -> reject -> accept cycling on every symbol.
        let three = ThreeDfa {
            alphabet: alphabet.clone(),
            initial: 0,
            delta: vec![vec![1; syms], vec![0; syms]],
            classes: vec![Accept, Reject],
            state_names: vec!["s0".into(), "s1".into()],
        };
        let bad = incompatible_pairs(&three.delta, &three.classes);
        let sets = maximal_compatible_sets(&bad).unwrap();
        let candidate = greedy_candidate(&three, &sets, false);
        assert_eq!(candidate.dfa.n_states(), 2);
        assert!(candidate.live.iter().all(|&l| l));
        assert_eq!(candidate.dera_states, 2);
        assert!(candidate.dfa.accepting[0]);
        assert!(!candidate.dfa.accepting[1]);
    }

    #[test]
    fn dead_candidate_states_are_trimmed_from_the_output() {
        use Class3::*;
        let alphabet = Alphabet::new(["a"], 1).unwrap();
        let syms = alphabet.sym_count();
        // One accepting state that leaves immediately for a dead state.
        let three = ThreeDfa {
            alphabet: alphabet.clone(),
            initial: 0,
            delta: vec![vec![1; syms], vec![1; syms]],
            classes: vec![Accept, Reject],
            state_names: vec!["s0".into(), "s1".into()],
        };
        let bad = incompatible_pairs(&three.delta, &three.classes);
        let sets = maximal_compatible_sets(&bad).unwrap();
        let candidate = greedy_candidate(&three, &sets, false);
        assert_eq!(candidate.dfa.n_states(), 2);
        assert_eq!(candidate.dera_states, 1);
        assert_eq!(candidate.dera.n_states(), 1);
        assert!(candidate.dera.accepting[0]);
        assert!(candidate.dera.edges.is_empty());
    }

    #[test]
    fn all_dont_care_hypothesis_extracts_to_one_rejecting_state() {
        let alphabet = Alphabet::new(["a"], 1).unwrap();
        let syms = alphabet.sym_count();
        let three = ThreeDfa {
            alphabet: alphabet.clone(),
            initial: 0,
            delta: vec![vec![0; syms]],
            classes: vec![Class3::DontCare],
            state_names: vec!["s0".into()],
        };
        let bad = incompatible_pairs(&three.delta, &three.classes);
        let sets = maximal_compatible_sets(&bad).unwrap();
        let candidate = greedy_candidate(&three, &sets, false);
        assert_eq!(candidate.dfa.n_states(), 1);
        assert!(!candidate.dfa.accepting[0]);
        assert_eq!(candidate.dera_states, 1);
        assert!(!candidate.dera.accepting[0]);
    }
}
