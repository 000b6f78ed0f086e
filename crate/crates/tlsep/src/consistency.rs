//! Deciding whether a region word is satisfiable by some timed word.
//!
//! A region word of length n induces a difference constraint system over the
//! timestamps t_1..t_n plus the origin t_0 = 0: each elementary constraint
//! relates t_i to the timestamp of the previous occurrence of its clock's
//! letter, and monotonicity chains consecutive positions. The system is
//! satisfiable over the rationals iff the constraint graph has no cycle whose
//! weight is negative, or zero with a strict edge; weights are compared
//! lexicographically as (value, strictness).
//!
//! Witnesses are built by fixing t_1..t_n in order. Before each fix the
//! shortest-path closure of the graph yields the exact projection interval of
//! the next variable; the midpoint (or the sole value, when pinned) is chosen
//! and the closure re-tightened, so later variables always stay satisfiable.

use std::collections::HashMap;

use crate::alphabet::{Alphabet, Letter};
use crate::constraint::ElementaryConstraint;
use crate::words::{RegionWord, Time, TimedWord};

/// An upper bound on a timestamp difference: `t_to - t_from <= value`
/// (`< value` when strict).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct DiffEdge {
    pub from: usize,
    pub to: usize,
    pub value: i64,
    pub strict: bool,
    pub origin: EdgeOrigin,
}

/// Which part of the region word produced an edge; positions are 1-based.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EdgeOrigin {
    /// Timestamps never decrease between positions `pos` and `pos + 1`
    /// (position 0 is the origin).
    Order { pos: usize },
    /// The elementary constraint on `clock` at position `pos`.
    Clock { pos: usize, clock: Letter },
}

/// The timestamp constraints induced by a region word.
#[derive(Clone, Debug)]
pub struct DifferenceSystem {
    /// Number of event positions; variables are t_0..t_n.
    pub positions: usize,
    pub edges: Vec<DiffEdge>,
}

pub fn build_difference_system(alphabet: &Alphabet, word: &RegionWord) -> DifferenceSystem {
    let n = word.len();
    let k = alphabet.k() as i64;
    let mut edges = Vec::new();
    for i in 1..=n {
        edges.push(DiffEdge {
            from: i,
            to: i - 1,
            value: 0,
            strict: false,
            origin: EdgeOrigin::Order { pos: i - 1 },
        });
    }
    // Last occurrence of each letter so far, as a position (0 = none yet).
    let mut last = vec![0usize; alphabet.letter_count()];
    for (i0, (letter, region)) in word.pairs().iter().enumerate() {
        let i = i0 + 1;
        for (c, elem) in region.elems().iter().enumerate() {
            let clock = Letter(c);
            let j = last[c];
            let origin = EdgeOrigin::Clock { pos: i, clock };
            match elem {
                ElementaryConstraint::Point(v) => {
                    // t_i - t_j = v
                    edges.push(DiffEdge { from: j, to: i, value: *v as i64, strict: false, origin });
                    edges.push(DiffEdge { from: i, to: j, value: -(*v as i64), strict: false, origin });
                }
                ElementaryConstraint::Open(d) => {
                    // d < t_i - t_j < d + 1
                    edges.push(DiffEdge { from: j, to: i, value: *d as i64 + 1, strict: true, origin });
                    edges.push(DiffEdge { from: i, to: j, value: -(*d as i64), strict: true, origin });
                }
                ElementaryConstraint::AboveK => {
                    // t_i - t_j > k
                    edges.push(DiffEdge { from: i, to: j, value: -k, strict: true, origin });
                }
            }
        }
        last[letter.0] = i;
    }
    DifferenceSystem { positions: n, edges }
}

/// A shortest-path weight: either a finite (value, strictness) pair ordered
/// lexicographically with strict bounds tighter, or no bound at all.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Bound {
    Finite { value: Time, strict: bool },
    Infinite,
}

impl Bound {
    fn zero() -> Bound {
        Bound::Finite { value: Time::from_integer(0), strict: false }
    }

    fn add(self, other: Bound) -> Bound {
        match (self, other) {
            (Bound::Finite { value: a, strict: sa }, Bound::Finite { value: b, strict: sb }) => {
                Bound::Finite { value: a + b, strict: sa || sb }
            }
            _ => Bound::Infinite,
        }
    }

    fn tighter_than(self, other: Bound) -> bool {
        match (self, other) {
            (Bound::Finite { value: a, strict: sa }, Bound::Finite { value: b, strict: sb }) => {
                a < b || (a == b && sa && !sb)
            }
            (Bound::Finite { .. }, Bound::Infinite) => true,
            _ => false,
        }
    }

    fn is_negative(self) -> bool {
        self.tighter_than(Bound::zero())
    }
}

/// Proof of unsatisfiability: a cycle of edges whose total weight is negative,
/// or zero with at least one strict edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InconsistencyCertificate {
    pub cycle: Vec<DiffEdge>,
}

impl InconsistencyCertificate {
    /// The lexicographic weight of the cycle; always negative in the
    /// (value, strictness) order.
    pub fn weight(&self) -> (i64, bool) {
        let mut v = 0;
        let mut s = false;
        for e in &self.cycle {
            v += e.value;
            s |= e.strict;
        }
        (v, s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConsistencyVerdict {
    Consistent(TimedWord),
    Inconsistent(InconsistencyCertificate),
}

impl ConsistencyVerdict {
    pub fn is_consistent(&self) -> bool {
        matches!(self, ConsistencyVerdict::Consistent(_))
    }
}

/// The satisfying timed word of a consistent verdict.
pub fn witness_timed_word(verdict: &ConsistencyVerdict) -> Option<&TimedWord> {
    match verdict {
        ConsistencyVerdict::Consistent(w) => Some(w),
        ConsistencyVerdict::Inconsistent(_) => None,
    }
}

/// Finds a negative simple cycle in an unsatisfiable system, as edge
/// indices in traversal order.
///
/// Relaxation to a fixpoint cannot be trusted here: a cycle of weight
/// (0, strict) tightens each distance once and then saturates, so iterative
/// methods converge without flagging it. Instead, walks of each exact length
/// up to the vertex count are tabulated; some diagonal entry must go
/// negative, and the recovered closed walk is trimmed to a simple cycle.
fn find_negative_cycle(system: &DifferenceSystem) -> Option<Vec<usize>> {
    let n = system.positions + 1;
    // prev[u][v]: tightest weight of a walk u -> v with exactly l-1 edges.
    let mut prev = vec![vec![Bound::Infinite; n]; n];
    for (i, row) in prev.iter_mut().enumerate() {
        row[i] = Bound::zero();
    }
    // pars[l-1][u][v]: last edge of the walk behind dist_l[u][v].
    let mut pars: Vec<Vec<Vec<Option<usize>>>> = Vec::new();
    for l in 1..=n {
        let mut cur = vec![vec![Bound::Infinite; n]; n];
        let mut par = vec![vec![None; n]; n];
        for (idx, e) in system.edges.iter().enumerate() {
            let w = Bound::Finite { value: Time::from_integer(e.value), strict: e.strict };
            for u in 0..n {
                let cand = prev[u][e.from].add(w);
                if cand.tighter_than(cur[u][e.to]) {
                    cur[u][e.to] = cand;
                    par[u][e.to] = Some(idx);
                }
            }
        }
        pars.push(par);
        for j in 0..n {
            if cur[j][j].is_negative() {
                let mut walk = Vec::with_capacity(l);
                let mut v = j;
                for step in (1..=l).rev() {
                    let idx = pars[step - 1][j][v].expect("walk reconstruction");
                    walk.push(idx);
                    v = system.edges[idx].from;
                }
                debug_assert_eq!(v, j);
                walk.reverse();
                return Some(simplify_cycle(system, walk));
            }
        }
        prev = cur;
    }
    None
}

/// Trims a negative closed walk down to a negative simple cycle by cutting
/// out repeated-vertex sub-cycles. A removed sub-cycle is itself either
/// negative (then it is the answer) or not, in which case the remaining
/// walk is still negative and strictly shorter.
fn simplify_cycle(system: &DifferenceSystem, mut walk: Vec<usize>) -> Vec<usize> {
    fn is_negative_weight(system: &DifferenceSystem, edges: &[usize]) -> bool {
        let mut v = 0i64;
        let mut s = false;
        for &i in edges {
            v += system.edges[i].value;
            s |= system.edges[i].strict;
        }
        v < 0 || (v == 0 && s)
    }
    loop {
        let start = system.edges[walk[0]].from;
        let mut seen: HashMap<usize, usize> = HashMap::new();
        seen.insert(start, 0);
        let mut cut = None;
        let mut v = start;
        for (i, &eidx) in walk.iter().enumerate() {
            debug_assert_eq!(system.edges[eidx].from, v);
            v = system.edges[eidx].to;
            if let Some(&first) = seen.get(&v) {
                cut = Some((first, i + 1));
                break;
            }
            seen.insert(v, i + 1);
        }
        let (s, t) = cut.expect("a closed walk revisits its start");
        let sub: Vec<usize> = walk[s..t].to_vec();
        if is_negative_weight(system, &sub) {
            return sub;
        }
        walk.splice(s..t, std::iter::empty());
        debug_assert!(is_negative_weight(system, &walk));
    }
}

/// All-pairs shortest-path matrix: `mat[u][v]` bounds `t_v - t_u`.
struct Closure {
    n: usize,
    mat: Vec<Vec<Bound>>,
}

impl Closure {
    fn new(system: &DifferenceSystem) -> Closure {
        let n = system.positions + 1;
        let mut mat = vec![vec![Bound::Infinite; n]; n];
        for i in 0..n {
            mat[i][i] = Bound::zero();
        }
        for e in &system.edges {
            let w = Bound::Finite { value: Time::from_integer(e.value), strict: e.strict };
            if w.tighter_than(mat[e.from][e.to]) {
                mat[e.from][e.to] = w;
            }
        }
        let mut c = Closure { n, mat };
        c.close_all();
        c
    }

    fn close_all(&mut self) {
        for w in 0..self.n {
            for u in 0..self.n {
                for v in 0..self.n {
                    let cand = self.mat[u][w].add(self.mat[w][v]);
                    if cand.tighter_than(self.mat[u][v]) {
                        self.mat[u][v] = cand;
                    }
                }
            }
        }
    }

    /// Re-close after tightening the single entry (a, b).
    fn close_through(&mut self, a: usize, b: usize) {
        for u in 0..self.n {
            for v in 0..self.n {
                let cand = self.mat[u][a].add(self.mat[a][b]).add(self.mat[b][v]);
                if cand.tighter_than(self.mat[u][v]) {
                    self.mat[u][v] = cand;
                }
            }
        }
    }

    fn tighten(&mut self, a: usize, b: usize, bound: Bound) {
        if bound.tighter_than(self.mat[a][b]) {
            self.mat[a][b] = bound;
            self.close_through(a, b);
        }
    }

    /// Some diagonal entry is negative exactly when the system has a
    /// negative cycle, since the closed matrix holds tightest path weights.
    fn has_negative_diagonal(&self) -> bool {
        (0..self.n).any(|i| self.mat[i][i].is_negative())
    }
}

/// Decides consistency of a region word and produces a witness timed word or
/// an unsatisfiable cycle.
pub fn check_consistency(alphabet: &Alphabet, word: &RegionWord) -> ConsistencyVerdict {
    let system = build_difference_system(alphabet, word);
    let mut closure = Closure::new(&system);
    if closure.has_negative_diagonal() {
        let cycle = find_negative_cycle(&system).expect("negative diagonal has a cycle behind it");
        return ConsistencyVerdict::Inconsistent(InconsistencyCertificate {
            cycle: cycle.into_iter().map(|i| system.edges[i]).collect(),
        });
    }
    let n = system.positions;
    let mut times = Vec::with_capacity(n);
    for i in 1..=n {
        // Exact projection of t_i - t_0 given everything fixed so far.
        let upper = closure.mat[0][i];
        let lower = closure.mat[i][0];
        let (lo, lo_strict) = match lower {
            Bound::Finite { value, strict } => (-value, strict),
            Bound::Infinite => unreachable!("order chain bounds every t_i from below"),
        };
        let value = match upper {
            Bound::Infinite => {
                if lo_strict {
                    lo + Time::from_integer(1)
                } else {
                    lo
                }
            }
            Bound::Finite { value: hi, strict: hi_strict } => {
                if lo == hi {
                    debug_assert!(!lo_strict && !hi_strict, "empty projection interval");
                    lo
                } else {
                    debug_assert!(lo < hi);
                    (lo + hi) / 2
                }
            }
        };
        closure.tighten(0, i, Bound::Finite { value, strict: false });
        closure.tighten(i, 0, Bound::Finite { value: -value, strict: false });
        debug_assert!(!(0..closure.n).any(|j| closure.mat[j][j].is_negative()));
        times.push(value);
    }
    let pairs = word
        .pairs()
        .iter()
        .zip(&times)
        .map(|((l, _), t)| (*l, *t))
        .collect();
    let witness = TimedWord::new(pairs).expect("projection keeps timestamps monotone");
    debug_assert_eq!(&witness.region_word(alphabet), word, "witness satisfies its word");
    ConsistencyVerdict::Consistent(witness)
}

/// A memoizing wrapper around [`check_consistency`] for one alphabet.
pub struct ConsistencyChecker {
    alphabet: Alphabet,
    cache: HashMap<RegionWord, ConsistencyVerdict>,
}

impl ConsistencyChecker {
    pub fn new(alphabet: Alphabet) -> Self {
        ConsistencyChecker { alphabet, cache: HashMap::new() }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn check(&mut self, word: &RegionWord) -> ConsistencyVerdict {
        if let Some(v) = self.cache.get(word) {
            return v.clone();
        }
        let v = check_consistency(&self.alphabet, word);
        self.cache.insert(word.clone(), v.clone());
        v
    }

    pub fn is_consistent(&mut self, word: &RegionWord) -> bool {
        self.check(word).is_consistent()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::ElementaryConstraint as E;
    use crate::constraint::SimpleConstraint;

    fn ab1() -> Alphabet {
        Alphabet::new(["a", "b"], 1).unwrap()
    }

    fn rw(alphabet: &Alphabet, spec: &[(&str, &[E])]) -> RegionWord {
        RegionWord::new(
            spec.iter()
                .map(|(l, es)| {
                    (
                        alphabet.letter_index(l).unwrap(),
                        SimpleConstraint::new(es.to_vec()),
                    )
                })
                .collect(),
        )
    }

    #[test]
    fn empty_word_is_consistent() {
        let a = ab1();
        let v = check_consistency(&a, &RegionWord::empty());
        assert_eq!(v, ConsistencyVerdict::Consistent(TimedWord::empty()));
    }

    #[test]
    fn accepted_example_has_the_expected_witness() {
        let a = ab1();
        // (a, x_a=0 & x_b=0)(b, x_a=1 & x_b=1): forced to (a, 0)(b, 1).
        let w = rw(
            &a,
            &[
                ("a", &[E::Point(0), E::Point(0)]),
                ("b", &[E::Point(1), E::Point(1)]),
            ],
        );
        match check_consistency(&a, &w) {
            ConsistencyVerdict::Consistent(tw) => {
                assert_eq!(tw.display(&a), "(a, 0) (b, 1)");
            }
            v => panic!("expected consistent, got {v:?}"),
        }
    }

    #[test]
    fn crossed_point_constraints_are_inconsistent() {
        let a = ab1();
        // (a, x_a=0 & x_b=1)(b, x_a=1 & x_b=0): t_1=0 and t_1=1 collide.
        let w = rw(
            &a,
            &[
                ("a", &[E::Point(0), E::Point(1)]),
                ("b", &[E::Point(1), E::Point(0)]),
            ],
        );
        match check_consistency(&a, &w) {
            ConsistencyVerdict::Inconsistent(cert) => {
                let (v, s) = cert.weight();
                assert!(v < 0 || (v == 0 && s), "cycle weight ({v}, {s}) not negative");
                // The certificate must really be a cycle.
                for (e, f) in cert.cycle.iter().zip(cert.cycle.iter().cycle().skip(1)) {
                    assert_eq!(e.to, f.from);
                }
            }
            v => panic!("expected inconsistent, got {v:?}"),
        }
    }

    #[test]
    fn strict_zero_cycle_is_inconsistent() {
        let a = ab1();
        // (a, x_a>1 & x_b>1)(b, x_a>1 & x_b=0): t_2 = 0 but t_2 >= t_1 > 1.
        let w = rw(
            &a,
            &[
                ("a", &[E::AboveK, E::AboveK]),
                ("b", &[E::AboveK, E::Point(0)]),
            ],
        );
        assert!(!check_consistency(&a, &w).is_consistent());
    }

    #[test]
    fn open_intervals_get_interior_witnesses() {
        let a = ab1();
        // (a, 0<x_a<1 & 0<x_b<1)(b, 0<x_a<1 & x_b=1)
        let w = rw(
            &a,
            &[
                ("a", &[E::Open(0), E::Open(0)]),
                ("b", &[E::Open(0), E::Point(1)]),
            ],
        );
        match check_consistency(&a, &w) {
            ConsistencyVerdict::Consistent(tw) => {
                assert_eq!(tw.region_word(&a), w);
            }
            v => panic!("expected consistent, got {v:?}"),
        }
    }

    #[test]
    fn above_k_needs_room_after_its_anchor() {
        let a = ab1();
        // Second a more than one unit after the first, but second position
        // pinned at absolute time 1: (a, 0<x_a<1 ...)(a, x_a>1 & x_b=1) has
        // t_2 = 1, t_2 - t_1 > 1, t_1 > 0: impossible.
        let w = rw(
            &a,
            &[
                ("a", &[E::Open(0), E::Open(0)]),
                ("a", &[E::AboveK, E::Point(1)]),
            ],
        );
        assert!(!check_consistency(&a, &w).is_consistent());
        // Relaxing the pin makes it consistent.
        let w = rw(
            &a,
            &[
                ("a", &[E::Open(0), E::Open(0)]),
                ("a", &[E::AboveK, E::AboveK]),
            ],
        );
        assert!(check_consistency(&a, &w).is_consistent());
    }

    #[test]
    fn memoized_checker_agrees() {
        let a = ab1();
        let mut checker = ConsistencyChecker::new(a.clone());
        let w = rw(
            &a,
            &[
                ("a", &[E::Point(0), E::Point(0)]),
                ("b", &[E::Point(1), E::Point(1)]),
            ],
        );
        let first = checker.check(&w);
        let second = checker.check(&w);
        assert_eq!(first, second);
        assert_eq!(first, check_consistency(&a, &w));
    }

    #[test]
    fn simultaneous_events_allowed() {
        let a = ab1();
        // (a, x_a=0 & x_b=0)(b, x_a=0 & x_b=0): both at time 0.
        let w = rw(
            &a,
            &[
                ("a", &[E::Point(0), E::Point(0)]),
                ("b", &[E::Point(0), E::Point(0)]),
            ],
        );
        match check_consistency(&a, &w) {
            ConsistencyVerdict::Consistent(tw) => {
                assert_eq!(tw.display(&a), "(a, 0) (b, 0)");
            }
            v => panic!("expected consistent, got {v:?}"),
        }
    }
}
