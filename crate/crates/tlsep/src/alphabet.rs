//! Event alphabets with a shared constant bound.
//!
//! Every letter `a` owns one recording clock `x_a` that measures the time
//! since the previous `a` (or since the start of the word if there is none).
//! All guard and region constants live in `0..=k`. The alphabet also fixes
//! the canonical numbering used throughout the crate: elementary constraints
//! per clock are ordered `0, (0,1), 1, (1,2), .., k, >k`, simple constraints
//! (total per-clock maps) are numbered lexicographically with the first
//! letter most significant, and the symbolic alphabet is numbered
//! letter-major: `letter * region_count + region`.

use std::fmt;

use crate::constraint::{ElementaryConstraint, SimpleConstraint};

/// Index of a letter in its [`Alphabet`]. The clock of letter `i` shares the
/// same index.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Letter(pub usize);

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum AlphabetError {
    #[error("alphabet must contain at least one letter")]
    Empty,
    #[error("duplicate letter {0:?}")]
    DuplicateLetter(String),
    #[error("letter {0:?} is not a valid identifier")]
    BadLetter(String),
    #[error("clock bound k must be at least 1")]
    ZeroBound,
}

/// A finite set of letters together with the clock constant bound `k >= 1`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Alphabet {
    letters: Vec<String>,
    k: u32,
}

fn valid_letter(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Alphabet {
    pub fn new<S: Into<String>>(
        letters: impl IntoIterator<Item = S>,
        k: u32,
    ) -> Result<Self, AlphabetError> {
        let letters: Vec<String> = letters.into_iter().map(Into::into).collect();
        if letters.is_empty() {
            return Err(AlphabetError::Empty);
        }
        if k == 0 {
            return Err(AlphabetError::ZeroBound);
        }
        for (i, l) in letters.iter().enumerate() {
            if !valid_letter(l) {
                return Err(AlphabetError::BadLetter(l.clone()));
            }
            if letters[..i].contains(l) {
                return Err(AlphabetError::DuplicateLetter(l.clone()));
            }
        }
        Ok(Alphabet { letters, k })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn letter_count(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        (0..self.letters.len()).map(Letter)
    }

    pub fn letter_index(&self, name: &str) -> Option<Letter> {
        self.letters.iter().position(|l| l == name).map(Letter)
    }

    pub fn letter_name(&self, l: Letter) -> &str {
        &self.letters[l.0]
    }

    /// Resolves a clock written as `x_<letter>`.
    pub fn clock_index(&self, clock: &str) -> Option<Letter> {
        clock.strip_prefix("x_").and_then(|n| self.letter_index(n))
    }

    pub fn clock_name(&self, l: Letter) -> String {
        format!("x_{}", self.letters[l.0])
    }

    /// Number of elementary constraints per clock: `2k + 2`.
    pub fn elementary_count(&self) -> usize {
        2 * self.k as usize + 2
    }

    /// Number of simple constraints: `(2k + 2) ^ |letters|`.
    pub fn region_count(&self) -> usize {
        self.elementary_count().pow(self.letters.len() as u32)
    }

    /// Size of the symbolic alphabet `letters x regions`.
    pub fn sym_count(&self) -> usize {
        self.letters.len() * self.region_count()
    }

    pub fn region_index(&self, r: &SimpleConstraint) -> usize {
        let base = self.elementary_count();
        r.elems()
            .iter()
            .fold(0, |acc, e| acc * base + e.index(self.k))
    }

    pub fn region_at(&self, mut idx: usize) -> SimpleConstraint {
        let base = self.elementary_count();
        let n = self.letters.len();
        let mut elems = vec![ElementaryConstraint::Point(0); n];
        for slot in (0..n).rev() {
            elems[slot] = ElementaryConstraint::from_index(self.k, idx % base);
            idx /= base;
        }
        debug_assert_eq!(idx, 0, "region index out of range");
        SimpleConstraint::new(elems)
    }

    /// All simple constraints in canonical order.
    pub fn regions(&self) -> impl Iterator<Item = SimpleConstraint> + '_ {
        (0..self.region_count()).map(|i| self.region_at(i))
    }

    pub fn sym_index(&self, letter: Letter, region: usize) -> usize {
        letter.0 * self.region_count() + region
    }

    pub fn sym_at(&self, idx: usize) -> (Letter, usize) {
        let rc = self.region_count();
        (Letter(idx / rc), idx % rc)
    }

    pub fn display_sym(&self, idx: usize) -> String {
        let (letter, region) = self.sym_at(idx);
        format!(
            "({}, {})",
            self.letter_name(letter),
            self.region_at(region).display(self)
        )
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}, k={}", self.letters.join(", "), self.k)
    }
}
