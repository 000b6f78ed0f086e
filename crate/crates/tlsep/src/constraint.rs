//! Clock constraints: elementary constraints, simple constraints (regions of
//! valuations), and transition guards.
//!
//! Guards are per-clock intervals with integer endpoints in `0..=k` (or
//! unbounded above). Because every endpoint is an integer, an elementary
//! constraint is always either contained in a guard's interval or disjoint
//! from it; `region_satisfies_guard` relies on that dichotomy.

use std::fmt::Write as _;

use crate::alphabet::{Alphabet, Letter};
use crate::words::Time;

/// One clock's atom inside a simple constraint: `x = c`, `c < x < c + 1`, or
/// `x > k`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum ElementaryConstraint {
    Point(u32),
    /// The open unit interval `(d, d + 1)`; requires `d < k`.
    Open(u32),
    AboveK,
}

impl ElementaryConstraint {
    /// Position in the canonical per-clock order `0, (0,1), 1, .., k, >k`.
    pub fn index(self, k: u32) -> usize {
        match self {
            ElementaryConstraint::Point(c) => {
                debug_assert!(c <= k);
                2 * c as usize
            }
            ElementaryConstraint::Open(d) => {
                debug_assert!(d < k);
                2 * d as usize + 1
            }
            ElementaryConstraint::AboveK => 2 * k as usize + 1,
        }
    }

    pub fn from_index(k: u32, idx: usize) -> Self {
        debug_assert!(idx < 2 * k as usize + 2);
        if idx == 2 * k as usize + 1 {
            ElementaryConstraint::AboveK
        } else if idx % 2 == 0 {
            ElementaryConstraint::Point((idx / 2) as u32)
        } else {
            ElementaryConstraint::Open((idx / 2) as u32)
        }
    }

    pub fn contains(self, v: Time, k: u32) -> bool {
        match self {
            ElementaryConstraint::Point(c) => v == Time::from_integer(c as i64),
            ElementaryConstraint::Open(d) => {
                v > Time::from_integer(d as i64) && v < Time::from_integer(d as i64 + 1)
            }
            ElementaryConstraint::AboveK => v > Time::from_integer(k as i64),
        }
    }

    pub fn display(self, clock: &str, k: u32) -> String {
        match self {
            ElementaryConstraint::Point(c) => format!("{clock}={c}"),
            ElementaryConstraint::Open(d) => format!("{}<{clock}<{}", d, d + 1),
            ElementaryConstraint::AboveK => format!("{clock}>{k}"),
        }
    }
}

/// A total map from clocks to elementary constraints; the letters of the
/// symbolic alphabet pair these with events.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SimpleConstraint {
    elems: Vec<ElementaryConstraint>,
}

impl SimpleConstraint {
    pub fn new(elems: Vec<ElementaryConstraint>) -> Self {
        SimpleConstraint { elems }
    }

    pub fn elems(&self) -> &[ElementaryConstraint] {
        &self.elems
    }

    pub fn elem(&self, clock: Letter) -> ElementaryConstraint {
        self.elems[clock.0]
    }

    pub fn satisfied_by(&self, valuation: &[Time], k: u32) -> bool {
        debug_assert_eq!(valuation.len(), self.elems.len());
        self.elems
            .iter()
            .zip(valuation)
            .all(|(e, v)| e.contains(*v, k))
    }

    pub fn display(&self, alphabet: &Alphabet) -> String {
        let mut out = String::new();
        for (i, e) in self.elems.iter().enumerate() {
            if i > 0 {
                out.push_str(" & ");
            }
            let _ = write!(
                out,
                "{}",
                e.display(&alphabet.clock_name(Letter(i)), alphabet.k())
            );
        }
        out
    }
}

/// The region of a clock valuation: the unique simple constraint containing
/// it. Valuations must be non-negative.
pub fn region_of_valuation(alphabet: &Alphabet, valuation: &[Time]) -> SimpleConstraint {
    let k = alphabet.k();
    let elems = valuation
        .iter()
        .map(|v| {
            debug_assert!(*v >= Time::from_integer(0));
            if *v > Time::from_integer(k as i64) {
                ElementaryConstraint::AboveK
            } else if v.is_integer() {
                ElementaryConstraint::Point(v.to_integer() as u32)
            } else {
                ElementaryConstraint::Open(v.floor().to_integer() as u32)
            }
        })
        .collect();
    SimpleConstraint::new(elems)
}

/// One clock's interval inside a guard. `lo..hi` with integer endpoints in
/// `0..=k`; `hi = None` means unbounded above. The full interval `[0, inf)`
/// stands for an unconstrained clock.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct ClockInterval {
    pub lo: u32,
    pub lo_strict: bool,
    pub hi: Option<u32>,
    pub hi_strict: bool,
}

impl ClockInterval {
    pub fn full() -> Self {
        ClockInterval {
            lo: 0,
            lo_strict: false,
            hi: None,
            hi_strict: false,
        }
    }

    pub fn point(c: u32) -> Self {
        ClockInterval {
            lo: c,
            lo_strict: false,
            hi: Some(c),
            hi_strict: false,
        }
    }

    pub fn is_full(&self) -> bool {
        *self == ClockInterval::full()
    }

    pub fn is_empty(&self) -> bool {
        match self.hi {
            None => false,
            Some(h) => self.lo > h || (self.lo == h && (self.lo_strict || self.hi_strict)),
        }
    }

    /// Intersection; `None` when empty.
    pub fn intersect(&self, other: &ClockInterval) -> Option<ClockInterval> {
        let (lo, lo_strict) = match self.lo.cmp(&other.lo) {
            std::cmp::Ordering::Greater => (self.lo, self.lo_strict),
            std::cmp::Ordering::Less => (other.lo, other.lo_strict),
            std::cmp::Ordering::Equal => (self.lo, self.lo_strict || other.lo_strict),
        };
        let (hi, hi_strict) = match (self.hi, other.hi) {
            (None, None) => (None, false),
            (Some(h), None) => (Some(h), self.hi_strict),
            (None, Some(h)) => (Some(h), other.hi_strict),
            (Some(h1), Some(h2)) => match h1.cmp(&h2) {
                std::cmp::Ordering::Less => (Some(h1), self.hi_strict),
                std::cmp::Ordering::Greater => (Some(h2), other.hi_strict),
                std::cmp::Ordering::Equal => (Some(h1), self.hi_strict || other.hi_strict),
            },
        };
        let r = ClockInterval {
            lo,
            lo_strict,
            hi,
            hi_strict,
        };
        if r.is_empty() {
            None
        } else {
            Some(r)
        }
    }

    pub fn contains_value(&self, v: Time) -> bool {
        let lo = Time::from_integer(self.lo as i64);
        if v < lo || (v == lo && self.lo_strict) {
            return false;
        }
        match self.hi {
            None => true,
            Some(h) => {
                let h = Time::from_integer(h as i64);
                v < h || (v == h && !self.hi_strict)
            }
        }
    }

    /// Whether the elementary constraint's whole set of values lies in this
    /// interval. Integer endpoints make "intersects" and "is contained"
    /// coincide for `Open` and `AboveK` atoms.
    pub fn contains_elem(&self, e: ElementaryConstraint, k: u32) -> bool {
        match e {
            ElementaryConstraint::Point(c) => self.contains_value(Time::from_integer(c as i64)),
            ElementaryConstraint::Open(d) => {
                self.lo <= d && self.hi.map_or(true, |h| h >= d + 1)
            }
            ElementaryConstraint::AboveK => {
                debug_assert!(self.lo <= k);
                self.hi.is_none()
            }
        }
    }

    /// Whether some value of the elementary constraint lies in this interval.
    pub fn intersects_elem(&self, e: ElementaryConstraint, k: u32) -> bool {
        match e {
            ElementaryConstraint::Point(_) | ElementaryConstraint::Open(_) => {
                self.contains_elem(e, k)
            }
            ElementaryConstraint::AboveK => match self.hi {
                None => true,
                // Values above k meet [lo, h] iff h > k, which normalized
                // guards (h <= k) never satisfy.
                Some(h) => h > k,
            },
        }
    }

    pub fn display(&self, clock: &str) -> String {
        if self.is_full() {
            return "true".into();
        }
        match self.hi {
            Some(h) if h == self.lo => format!("{clock}={h}"),
            Some(h) => {
                if self.lo == 0 && !self.lo_strict {
                    format!("{clock}{}{}", if self.hi_strict { "<" } else { "<=" }, h)
                } else {
                    format!(
                        "{}{}{clock}{}{}",
                        self.lo,
                        if self.lo_strict { "<" } else { "<=" },
                        if self.hi_strict { "<" } else { "<=" },
                        h
                    )
                }
            }
            None => format!("{clock}{}{}", if self.lo_strict { ">" } else { ">=" }, self.lo),
        }
    }
}

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum GuardError {
    #[error("constant {value} exceeds the clock bound k={k}")]
    ConstantAboveK { value: u32, k: u32 },
    #[error("guard is unsatisfiable on clock {clock}")]
    Empty { clock: String },
}

/// A transition guard: a conjunction of per-clock interval constraints.
/// Normalized: unconstrained clocks hold the full interval, every stored
/// interval is non-empty, and all endpoints are at most `k`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Guard {
    intervals: Vec<ClockInterval>,
}

impl Guard {
    pub fn top(alphabet: &Alphabet) -> Self {
        Guard {
            intervals: vec![ClockInterval::full(); alphabet.letter_count()],
        }
    }

    /// Builds a guard from per-clock atoms, intersecting repeated clocks.
    /// Rejects constants above `k` and contradictory conjunctions.
    pub fn from_atoms(
        alphabet: &Alphabet,
        atoms: impl IntoIterator<Item = (Letter, ClockInterval)>,
    ) -> Result<Self, GuardError> {
        let mut g = Guard::top(alphabet);
        for (clock, iv) in atoms {
            if iv.lo > alphabet.k() {
                return Err(GuardError::ConstantAboveK {
                    value: iv.lo,
                    k: alphabet.k(),
                });
            }
            if let Some(h) = iv.hi {
                if h > alphabet.k() {
                    return Err(GuardError::ConstantAboveK {
                        value: h,
                        k: alphabet.k(),
                    });
                }
            }
            let cur = &g.intervals[clock.0];
            match cur.intersect(&iv) {
                Some(next) => g.intervals[clock.0] = next,
                None => {
                    return Err(GuardError::Empty {
                        clock: alphabet.clock_name(clock),
                    })
                }
            }
        }
        Ok(g)
    }

    pub fn interval(&self, clock: Letter) -> &ClockInterval {
        &self.intervals[clock.0]
    }

    pub fn is_top(&self) -> bool {
        self.intervals.iter().all(ClockInterval::is_full)
    }

    pub fn satisfied_by(&self, valuation: &[Time]) -> bool {
        debug_assert_eq!(valuation.len(), self.intervals.len());
        self.intervals
            .iter()
            .zip(valuation)
            .all(|(iv, v)| iv.contains_value(*v))
    }

    pub fn display(&self, alphabet: &Alphabet) -> String {
        if self.is_top() {
            return "true".into();
        }
        let mut parts = Vec::new();
        for (i, iv) in self.intervals.iter().enumerate() {
            if !iv.is_full() {
                parts.push(iv.display(&alphabet.clock_name(Letter(i))));
            }
        }
        parts.join(" & ")
    }
}

/// Whether every valuation of the region satisfies the guard. By the
/// endpoint dichotomy this is containment clock by clock.
pub fn region_satisfies_guard(alphabet: &Alphabet, region: &SimpleConstraint, guard: &Guard) -> bool {
    region
        .elems()
        .iter()
        .enumerate()
        .all(|(i, e)| guard.intervals[i].contains_elem(*e, alphabet.k()))
}

/// All regions contained in the guard, as indices in canonical order.
pub fn split_guard_indices(alphabet: &Alphabet, guard: &Guard) -> Vec<usize> {
    let k = alphabet.k();
    let base = alphabet.elementary_count();
    // Per clock, the list of allowed elementary indices in canonical order.
    let allowed: Vec<Vec<usize>> = (0..alphabet.letter_count())
        .map(|c| {
            (0..base)
                .filter(|&i| {
                    guard.intervals[c].contains_elem(ElementaryConstraint::from_index(k, i), k)
                })
                .collect()
        })
        .collect();
    // Cartesian product, most significant clock first, so the resulting
    // indices come out strictly increasing.
    fn rec(allowed: &[Vec<usize>], depth: usize, acc: usize, base: usize, out: &mut Vec<usize>) {
        if depth == allowed.len() {
            out.push(acc);
            return;
        }
        for &e in &allowed[depth] {
            rec(allowed, depth + 1, acc * base + e, base, out);
        }
    }
    let mut out = Vec::new();
    rec(&allowed, 0, 0, base, &mut out);
    out
}

/// All regions contained in the guard, materialized.
pub fn split_guard(alphabet: &Alphabet, guard: &Guard) -> Vec<SimpleConstraint> {
    split_guard_indices(alphabet, guard)
        .into_iter()
        .map(|i| alphabet.region_at(i))
        .collect()
}
