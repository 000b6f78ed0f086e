//! Three-valued observation table: the learner's growing record of answers.

use std::collections::{HashMap, HashSet};

use crate::alphabet::Alphabet;
use crate::automata::{Class3, ThreeDfa};
use crate::teacher::TeacherError;
use crate::words::RegionWord;

/// Prefix-closed row words, suffix columns, and three-valued cells.
///
/// A cell for row word `s` and suffix `e` holds the classification of the
/// concatenation `s·e`: accept, reject, or don't-care for unrealizable
/// words. Rows compare by their full cell vector, question marks included,
/// so two rows merge only when they agree everywhere.
pub struct ObservationTable {
    alphabet: Alphabet,
    prefixes: Vec<RegionWord>,
    prefix_set: HashSet<RegionWord>,
    suffixes: Vec<RegionWord>,
    cells: HashMap<RegionWord, Vec<Class3>>,
}

/// A hypothesis automaton together with the access word of each state.
pub struct Hypothesis {
    pub three: ThreeDfa,
    /// `accesses[q]` is the first row word whose row became state `q`; the
    /// automaton provably reaches `q` on it.
    pub accesses: Vec<RegionWord>,
}

impl ObservationTable {
    /// Starts from the single row ε and the single suffix ε.
    pub fn new(alphabet: Alphabet) -> Self {
        let empty = RegionWord::empty();
        ObservationTable {
            alphabet,
            prefixes: vec![empty.clone()],
            prefix_set: HashSet::from([empty.clone()]),
            suffixes: vec![empty],
            cells: HashMap::new(),
        }
    }

    pub fn prefix_count(&self) -> usize {
        self.prefixes.len()
    }

    pub fn suffix_count(&self) -> usize {
        self.suffixes.len()
    }

    /// Number of distinct filled cells (words with a stored classification).
    pub fn filled_words(&self) -> usize {
        self.cells.len()
    }

    fn extension(&self, base: &RegionWord, sym: usize) -> RegionWord {
        let (letter, region) = self.alphabet.sym_at(sym);
        base.push(letter, self.alphabet.region_at(region))
    }

    fn add_prefix(&mut self, w: RegionWord) -> bool {
        if self.prefix_set.contains(&w) {
            return false;
        }
        self.prefix_set.insert(w.clone());
        self.prefixes.push(w);
        true
    }

    /// Adds every prefix of `w`, the word itself included; returns how many
    /// were new. Adding whole prefix chains keeps the row set prefix-closed.
    pub fn add_prefixes_of(&mut self, w: &RegionWord) -> usize {
        let mut added = 0;
        for len in 0..=w.len() {
            if self.add_prefix(w.prefix(len)) {
                added += 1;
            }
        }
        added
    }

    pub fn has_suffix(&self, e: &RegionWord) -> bool {
        self.suffixes.contains(e)
    }

    pub fn add_suffix(&mut self, e: RegionWord) -> bool {
        if self.has_suffix(&e) {
            return false;
        }
        self.suffixes.push(e);
        true
    }

    fn row(&self, w: &RegionWord) -> &[Class3] {
        self.cells
            .get(w)
            .map(Vec::as_slice)
            .expect("row requested before fill")
    }

    fn ensure_row<F>(
        cells: &mut HashMap<RegionWord, Vec<Class3>>,
        suffixes: &[RegionWord],
        word: &RegionWord,
        value: &mut F,
    ) -> Result<(), TeacherError>
    where
        F: FnMut(&RegionWord) -> Result<Class3, TeacherError>,
    {
        let row = cells.entry(word.clone()).or_default();
        while row.len() < suffixes.len() {
            let joint = word.concat(&suffixes[row.len()]);
            row.push(value(&joint)?);
        }
        Ok(())
    }

    /// Fills every missing cell for the rows and their one-symbol extensions.
    pub fn fill<F>(&mut self, value: &mut F) -> Result<(), TeacherError>
    where
        F: FnMut(&RegionWord) -> Result<Class3, TeacherError>,
    {
        let sym_count = self.alphabet.sym_count();
        for i in 0..self.prefixes.len() {
            let base = self.prefixes[i].clone();
            Self::ensure_row(&mut self.cells, &self.suffixes, &base, value)?;
            for s in 0..sym_count {
                let ext = self.extension(&base, s);
                Self::ensure_row(&mut self.cells, &self.suffixes, &ext, value)?;
            }
        }
        Ok(())
    }

    /// One extension per missing row vector: each listed word's row matches
    /// no current row word's row, and no two listed words share a row.
    fn unclosed_extensions(&self) -> Vec<RegionWord> {
        let mut known: HashSet<Vec<Class3>> =
            self.prefixes.iter().map(|w| self.row(w).to_vec()).collect();
        let mut picked = Vec::new();
        for base in &self.prefixes {
            for s in 0..self.alphabet.sym_count() {
                let ext = self.extension(base, s);
                if !known.contains(self.row(&ext)) {
                    known.insert(self.row(&ext).to_vec());
                    picked.push(ext);
                }
            }
        }
        picked
    }

    /// Looks for two row words with equal rows whose same-symbol extensions
    /// disagree somewhere; returns the separating suffix `σ·e` if found.
    fn inconsistency_suffix(&self) -> Option<RegionWord> {
        let sym_count = self.alphabet.sym_count();
        for i in 0..self.prefixes.len() {
            for j in i + 1..self.prefixes.len() {
                if self.row(&self.prefixes[i]) != self.row(&self.prefixes[j]) {
                    continue;
                }
                for s in 0..sym_count {
                    let ri = self.row(&self.extension(&self.prefixes[i], s));
                    let rj = self.row(&self.extension(&self.prefixes[j], s));
                    if let Some(col) = (0..ri.len()).find(|&c| ri[c] != rj[c]) {
                        let (letter, region) = self.alphabet.sym_at(s);
                        let step = RegionWord::empty().push(letter, self.alphabet.region_at(region));
                        return Some(step.concat(&self.suffixes[col]));
                    }
                }
            }
        }
        None
    }

    /// Fills, then restores closedness (promoting unmatched extensions to
    /// rows) and row consistency (adding separating suffixes) until both
    /// hold.
    pub fn close_and_fill<F>(&mut self, value: &mut F) -> Result<(), TeacherError>
    where
        F: FnMut(&RegionWord) -> Result<Class3, TeacherError>,
    {
        loop {
            self.fill(value)?;
            let missing = self.unclosed_extensions();
            if !missing.is_empty() {
                for w in missing {
                    self.add_prefix(w);
                }
                continue;
            }
            if let Some(e) = self.inconsistency_suffix() {
                let fresh = self.add_suffix(e);
                debug_assert!(fresh, "separating suffix already present");
                continue;
            }
            return Ok(());
        }
    }

    /// Builds the hypothesis automaton from a closed, consistent table:
    /// states are the distinct rows, transitions follow one-symbol
    /// extensions, and each state's class is its row's entry at suffix ε.
    pub fn hypothesis(&self) -> Hypothesis {
        let sym_count = self.alphabet.sym_count();
        let mut state_of: HashMap<&[Class3], usize> = HashMap::new();
        let mut accesses: Vec<RegionWord> = Vec::new();
        for w in &self.prefixes {
            let row = self.row(w);
            if !state_of.contains_key(row) {
                state_of.insert(row, accesses.len());
                accesses.push(w.clone());
            }
        }
        let n = accesses.len();
        let mut delta = vec![vec![0usize; sym_count]; n];
        for (q, access) in accesses.iter().enumerate() {
            for s in 0..sym_count {
                let row = self.row(&self.extension(access, s));
                delta[q][s] = *state_of.get(row).expect("table is closed");
            }
        }
        let classes = accesses.iter().map(|w| self.row(w)[0]).collect();
        let state_names = (0..n).map(|i| format!("s{i}")).collect();
        let three = ThreeDfa {
            alphabet: self.alphabet.clone(),
            initial: *state_of
                .get(self.row(&RegionWord::empty()))
                .expect("ε is always a row"),
            delta,
            classes,
            state_names,
        };
        Hypothesis { three, accesses }
    }

    /// Whether the automaton reproduces every filled cell. Holds for every
    /// hypothesis built from a closed, consistent table; exposed so callers
    /// can audit.
    pub fn agrees_with(&self, three: &ThreeDfa) -> bool {
        self.cells.iter().all(|(word, row)| {
            row.iter().enumerate().all(|(col, &cell)| {
                three.class_of(&word.concat(&self.suffixes[col])) == cell
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Letter;
    use crate::constraint::ElementaryConstraint;

    fn single_letter() -> Alphabet {
        Alphabet::new(["a"], 1).unwrap()
    }

    fn ok_value(
        f: impl Fn(&RegionWord) -> Class3,
    ) -> impl FnMut(&RegionWord) -> Result<Class3, TeacherError> {
        move |w| Ok(f(w))
    }

    fn sym_point_zero(alphabet: &Alphabet) -> usize {
        let region = crate::constraint::SimpleConstraint::new(vec![ElementaryConstraint::Point(0)]);
        alphabet.sym_index(Letter(0), alphabet.region_index(&region))
    }

    fn sym_point_one(alphabet: &Alphabet) -> usize {
        let region = crate::constraint::SimpleConstraint::new(vec![ElementaryConstraint::Point(1)]);
        alphabet.sym_index(Letter(0), alphabet.region_index(&region))
    }

    #[test]
    fn parity_language_needs_two_states() {
        let alphabet = single_letter();
        let mut table = ObservationTable::new(alphabet.clone());
        let mut value = ok_value(|w| {
            if w.len() % 2 == 0 {
                Class3::Accept
            } else {
                Class3::Reject
            }
        });
        table.close_and_fill(&mut value).unwrap();
        let hyp = table.hypothesis();
        assert_eq!(hyp.three.n_states(), 2);
        assert_eq!(hyp.three.classes, vec![Class3::Accept, Class3::Reject]);
        assert!(hyp.three.delta[0].iter().all(|&t| t == 1));
        assert!(hyp.three.delta[1].iter().all(|&t| t == 0));
        assert!(table.agrees_with(&hyp.three));
    }

    #[test]
    fn dont_care_rows_form_their_own_state() {
        let alphabet = single_letter();
        let p0 = sym_point_zero(&alphabet);
        let mut table = ObservationTable::new(alphabet.clone());
        // Words not starting with the x_a=0 symbol are treated as
        // unrealizable; the rest alternate by parity.
        let mut value = ok_value(move |w: &RegionWord| {
            let syms = w.sym_indices(&alphabet);
            if !syms.is_empty() && syms[0] != p0 {
                Class3::DontCare
            } else if syms.len() % 2 == 0 {
                Class3::Accept
            } else {
                Class3::Reject
            }
        });
        table.close_and_fill(&mut value).unwrap();
        let hyp = table.hypothesis();
        assert_eq!(hyp.three.n_states(), 3);
        let dc = hyp
            .three
            .classes
            .iter()
            .position(|&c| c == Class3::DontCare)
            .unwrap();
        // The don't-care state absorbs everything.
        assert!(hyp.three.delta[dc].iter().all(|&t| t == dc));
        assert!(table.agrees_with(&hyp.three));
    }

    #[test]
    fn equal_rows_with_different_futures_get_split() {
        let alphabet = single_letter();
        let p1 = sym_point_one(&alphabet);
        let mut table = ObservationTable::new(alphabet.clone());
        let al = alphabet.clone();
        // Accept exactly the words whose last two symbols are both x_a=1.
        let mut value = ok_value(move |w: &RegionWord| {
            let syms = w.sym_indices(&al);
            if syms.len() >= 2 && syms[syms.len() - 1] == p1 && syms[syms.len() - 2] == p1 {
                Class3::Accept
            } else {
                Class3::Reject
            }
        });
        let (letter, region) = alphabet.sym_at(p1);
        let seed = RegionWord::empty()
            .push(letter, alphabet.region_at(region))
            .push(letter, alphabet.region_at(region));
        table.add_prefixes_of(&seed);
        table.close_and_fill(&mut value).unwrap();
        // The rows for ε and for the single x_a=1 word start out equal and
        // must have been separated by a new suffix.
        assert!(table.suffix_count() >= 2);
        let hyp = table.hypothesis();
        assert_eq!(hyp.three.n_states(), 3);
        assert!(table.agrees_with(&hyp.three));
    }

    #[test]
    fn prefix_additions_count_only_new_words() {
        let alphabet = single_letter();
        let p0 = sym_point_zero(&alphabet);
        let (letter, region) = alphabet.sym_at(p0);
        let w = RegionWord::empty()
            .push(letter, alphabet.region_at(region))
            .push(letter, alphabet.region_at(region));
        let mut table = ObservationTable::new(alphabet);
        assert_eq!(table.add_prefixes_of(&w), 2);
        assert_eq!(table.add_prefixes_of(&w), 0);
        assert_eq!(table.prefix_count(), 3);
    }
}
