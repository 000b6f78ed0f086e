//! Which hypothesis states can share a candidate state, and the maximal
//! sets of mutually agreeable ones.

use std::cmp::Ordering;
use std::fmt;

use crate::automata::Class3;

/// Compatible-set bookkeeping packs states into `u128` bitmasks.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct TooManyStates {
    pub count: usize,
}

impl fmt::Display for TooManyStates {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} states exceed the 128-state bitmask limit", self.count)
    }
}

impl std::error::Error for TooManyStates {}

/// Symmetric matrix of state pairs that no single candidate state can
/// serve.
///
/// A pair conflicts outright when one member accepts and the other rejects;
/// conflicts then propagate backwards through the total transition function
/// until stable: a pair whose successors on some symbol conflict conflicts
/// too. Don't-care states conflict with nothing by themselves.
pub fn incompatible_pairs(delta: &[Vec<usize>], classes: &[Class3]) -> Vec<Vec<bool>> {
    let n = classes.len();
    let mut bad = vec![vec![false; n]; n];
    for p in 0..n {
        for q in 0..n {
            let direct = matches!(
                (classes[p], classes[q]),
                (Class3::Accept, Class3::Reject) | (Class3::Reject, Class3::Accept)
            );
            if direct {
                bad[p][q] = true;
            }
        }
    }
    loop {
        let mut changed = false;
        for p in 0..n {
            for q in p + 1..n {
                if bad[p][q] {
                    continue;
                }
                if (0..delta[p].len()).any(|s| bad[delta[p][s]][delta[q][s]]) {
                    bad[p][q] = true;
                    bad[q][p] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return bad;
        }
    }
}

/// States in a mask, ascending.
pub fn set_members(mask: u128) -> Vec<usize> {
    let mut members = Vec::with_capacity(mask.count_ones() as usize);
    let mut rest = mask;
    while rest != 0 {
        members.push(rest.trailing_zeros() as usize);
        rest &= rest - 1;
    }
    members
}

/// Whether no two members of `mask` are marked incompatible.
pub fn is_compatible(mask: u128, bad: &[Vec<bool>]) -> bool {
    let members = set_members(mask);
    members
        .iter()
        .enumerate()
        .all(|(i, &p)| members[i + 1..].iter().all(|&q| !bad[p][q]))
}

/// Orders masks by their ascending member sequences, shorter prefixes first.
fn cmp_member_sequences(a: u128, b: u128) -> Ordering {
    let (mut x, mut y) = (a, b);
    while x != 0 && y != 0 {
        let i = x.trailing_zeros();
        let j = y.trailing_zeros();
        if i != j {
            return i.cmp(&j);
        }
        x &= x - 1;
        y &= y - 1;
    }
    x.cmp(&y)
}

/// All ⊆-maximal subsets of `{0, .., n-1}` containing no incompatible pair.
///
/// Starts from the full set and splits every member set that still holds
/// both halves of a conflicting pair into the two one-sided restrictions,
/// discarding any result subsumed by another; what survives is exactly the
/// family of maximal conflict-free sets. Result is sorted by member
/// sequence.
pub fn maximal_compatible_sets(bad: &[Vec<bool>]) -> Result<Vec<u128>, TooManyStates> {
    let n = bad.len();
    if n > 128 {
        return Err(TooManyStates { count: n });
    }
    let full: u128 = if n == 128 { u128::MAX } else { (1u128 << n) - 1 };
    let mut sets = vec![full];
    for p in 0..n {
        for q in p + 1..n {
            if !bad[p][q] {
                continue;
            }
            let pbit = 1u128 << p;
            let qbit = 1u128 << q;
            let mut raw: Vec<u128> = Vec::with_capacity(sets.len() * 2);
            for &t in &sets {
                if t & pbit != 0 && t & qbit != 0 {
                    raw.push(t & !pbit);
                    raw.push(t & !qbit);
                } else {
                    raw.push(t);
                }
            }
            raw.sort_unstable();
            raw.dedup();
            sets = raw
                .iter()
                .copied()
                .filter(|&s| !raw.iter().any(|&t| t != s && t & s == s))
                .collect();
        }
    }
    sets.sort_by(|a, b| cmp_member_sequences(*a, *b));
    Ok(sets)
}
