//! Automata: event-recording automata with guards, their region-split
//! symbolic form, nondeterministic symbolic automata, three-valued DFAs, and
//! products over the symbolic alphabet.

use std::collections::HashMap;
use std::collections::VecDeque;

use crate::alphabet::{Alphabet, Letter};
use crate::constraint::{split_guard_indices, Guard};
use crate::words::{RegionWord, SymbolicWord, TimedWord};

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum AutomataError {
    #[error("automata operate over different alphabets")]
    AlphabetMismatch,
    #[error("state index {index} out of range")]
    BadState { index: usize },
    #[error("duplicate state name {0:?}")]
    DuplicateState(String),
    #[error(
        "overlapping guards from state {state} on letter {letter}: {left} and {right} both admit {region}"
    )]
    OverlappingGuards {
        state: String,
        letter: String,
        left: String,
        right: String,
        region: String,
    },
    #[error("state limit {limit} exceeded during subset construction")]
    StateLimit { limit: usize },
}

/// A (syntactic) event-recording automaton: finitely many states, edges
/// labeled with a letter and a guard over the recording clocks. Language
/// definitions assume determinism (pairwise disjoint guards per state and
/// letter), which [`Dera::to_symbolic_dfa`] verifies.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Dera {
    pub alphabet: Alphabet,
    pub state_names: Vec<String>,
    pub initial: usize,
    pub accepting: Vec<bool>,
    pub edges: Vec<DeraEdge>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DeraEdge {
    pub source: usize,
    pub letter: Letter,
    pub guard: Guard,
    pub target: usize,
}

impl Dera {
    pub fn new(
        alphabet: Alphabet,
        state_names: Vec<String>,
        initial: usize,
        accepting: Vec<bool>,
        mut edges: Vec<DeraEdge>,
    ) -> Result<Self, AutomataError> {
        let n = state_names.len();
        for (i, name) in state_names.iter().enumerate() {
            if state_names[..i].iter().any(|m| m == name) {
                return Err(AutomataError::DuplicateState(name.clone()));
            }
        }
        if initial >= n {
            return Err(AutomataError::BadState { index: initial });
        }
        if accepting.len() != n {
            return Err(AutomataError::BadState { index: accepting.len() });
        }
        for e in &edges {
            if e.source >= n {
                return Err(AutomataError::BadState { index: e.source });
            }
            if e.target >= n {
                return Err(AutomataError::BadState { index: e.target });
            }
        }
        // Canonical edge order makes construction and emission stable.
        edges.sort_by(|x, y| {
            (x.source, x.letter)
                .cmp(&(y.source, y.letter))
                .then_with(|| {
                    split_guard_indices(&alphabet, &x.guard)
                        .cmp(&split_guard_indices(&alphabet, &y.guard))
                })
                .then(x.target.cmp(&y.target))
        });
        Ok(Dera { alphabet, state_names, initial, accepting, edges })
    }

    pub fn n_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.state_names.iter().position(|s| s == name)
    }

    /// Splits every guard into the regions it contains and completes the
    /// result with a rejecting sink when some (state, letter, region) slot is
    /// uncovered. Two edges claiming the same slot violate determinism.
    pub fn to_symbolic_dfa(&self) -> Result<SymbolicDfa, AutomataError> {
        let n = self.n_states();
        let syms = self.alphabet.sym_count();
        let mut delta: Vec<Vec<Option<usize>>> = vec![vec![None; syms]; n];
        let mut claimed: Vec<Vec<Option<usize>>> = vec![vec![None; syms]; n];
        for (idx, e) in self.edges.iter().enumerate() {
            for region in split_guard_indices(&self.alphabet, &e.guard) {
                let s = self.alphabet.sym_index(e.letter, region);
                if let Some(prev) = claimed[e.source][s] {
                    let prev_edge: &DeraEdge = &self.edges[prev];
                    return Err(AutomataError::OverlappingGuards {
                        state: self.state_names[e.source].clone(),
                        letter: self.alphabet.letter_name(e.letter).to_string(),
                        left: prev_edge.guard.display(&self.alphabet),
                        right: e.guard.display(&self.alphabet),
                        region: self.alphabet.region_at(region).display(&self.alphabet),
                    });
                }
                claimed[e.source][s] = Some(idx);
                delta[e.source][s] = Some(e.target);
            }
        }
        let total = delta.iter().all(|row| row.iter().all(Option::is_some));
        let mut state_names = self.state_names.clone();
        let sink = if total {
            None
        } else {
            let mut name = String::from("sink");
            while state_names.contains(&name) {
                name.push('_');
            }
            state_names.push(name);
            Some(n)
        };
        let n_out = state_names.len();
        let mut out = vec![vec![0usize; syms]; n_out];
        for q in 0..n {
            for s in 0..syms {
                out[q][s] = delta[q][s].unwrap_or_else(|| sink.expect("missing slot implies sink"));
            }
        }
        if let Some(sk) = sink {
            for s in 0..syms {
                out[sk][s] = sk;
            }
        }
        let mut accepting = self.accepting.clone();
        if sink.is_some() {
            accepting.push(false);
        }
        Ok(SymbolicDfa {
            alphabet: self.alphabet.clone(),
            initial: self.initial,
            delta: out,
            accepting,
            state_names,
        })
    }

    /// Runs the automaton directly on a timed word, evaluating guards on the
    /// clock valuations. The word is rejected when no edge applies.
    pub fn accepts_timed(&self, word: &TimedWord) -> bool {
        let mut state = self.initial;
        for (letter, valuation) in word.clocked(&self.alphabet).pairs() {
            let mut next = None;
            for e in &self.edges {
                if e.source == state && e.letter == *letter && e.guard.satisfied_by(valuation) {
                    debug_assert!(next.is_none(), "deterministic automaton, one edge at most");
                    next = Some(e.target);
                }
            }
            match next {
                Some(q) => state = q,
                None => return false,
            }
        }
        self.accepting[state]
    }

    /// Runs on a raw symbolic word by syntactic label equality. This is the
    /// automaton seen as a plain DFA over (letter, guard) labels.
    pub fn accepts_symbolic(&self, word: &SymbolicWord) -> bool {
        let mut state = self.initial;
        for (letter, guard) in &word.pairs {
            let mut next = None;
            for e in &self.edges {
                if e.source == state && e.letter == *letter && &e.guard == guard {
                    next = Some(e.target);
                    break;
                }
            }
            match next {
                Some(q) => state = q,
                None => return false,
            }
        }
        self.accepting[state]
    }
}

/// A total deterministic automaton over the symbolic alphabet.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SymbolicDfa {
    pub alphabet: Alphabet,
    pub initial: usize,
    /// `delta[state][sym]`, total.
    pub delta: Vec<Vec<usize>>,
    pub accepting: Vec<bool>,
    pub state_names: Vec<String>,
}

/// Structural identity of a DFA, used as a memoization key.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct DfaKey {
    pub initial: usize,
    pub delta: Vec<Vec<usize>>,
    pub accepting: Vec<bool>,
}

impl SymbolicDfa {
    pub fn n_states(&self) -> usize {
        self.delta.len()
    }

    pub fn step(&self, state: usize, sym: usize) -> usize {
        self.delta[state][sym]
    }

    pub fn run_syms(&self, syms: &[usize]) -> usize {
        syms.iter().fold(self.initial, |q, &s| self.delta[q][s])
    }

    pub fn accepts_syms(&self, syms: &[usize]) -> bool {
        self.accepting[self.run_syms(syms)]
    }

    pub fn accepts(&self, word: &RegionWord) -> bool {
        self.accepts_syms(&word.sym_indices(&self.alphabet))
    }

    /// Complement; sound because the automaton is total.
    pub fn complement(&self) -> SymbolicDfa {
        SymbolicDfa {
            alphabet: self.alphabet.clone(),
            initial: self.initial,
            delta: self.delta.clone(),
            accepting: self.accepting.iter().map(|a| !a).collect(),
            state_names: self.state_names.clone(),
        }
    }

    pub fn key(&self) -> DfaKey {
        DfaKey {
            initial: self.initial,
            delta: self.delta.clone(),
            accepting: self.accepting.clone(),
        }
    }
}

/// A nondeterministic automaton over the symbolic alphabet, possibly with
/// several initial states.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SymbolicNfa {
    pub alphabet: Alphabet,
    pub initials: Vec<usize>,
    /// `delta[state][sym]` lists successors in increasing order.
    pub delta: Vec<Vec<Vec<usize>>>,
    pub accepting: Vec<bool>,
}

impl SymbolicNfa {
    pub fn n_states(&self) -> usize {
        self.delta.len()
    }

    pub fn from_dfa(dfa: &SymbolicDfa) -> SymbolicNfa {
        SymbolicNfa {
            alphabet: dfa.alphabet.clone(),
            initials: vec![dfa.initial],
            delta: dfa
                .delta
                .iter()
                .map(|row| row.iter().map(|&t| vec![t]).collect())
                .collect(),
            accepting: dfa.accepting.clone(),
        }
    }

    pub fn accepts_syms(&self, syms: &[usize]) -> bool {
        let mut cur: Vec<usize> = self.initials.clone();
        cur.sort_unstable();
        cur.dedup();
        for &s in syms {
            let mut next: Vec<usize> = Vec::new();
            for &q in &cur {
                next.extend_from_slice(&self.delta[q][s]);
            }
            next.sort_unstable();
            next.dedup();
            if next.is_empty() {
                return false;
            }
            cur = next;
        }
        cur.iter().any(|&q| self.accepting[q])
    }

    pub fn accepts(&self, word: &RegionWord) -> bool {
        self.accepts_syms(&word.sym_indices(&self.alphabet))
    }
}

/// The three verdict classes of a three-valued DFA, also used for
/// observation-table cells: accept, reject, or unconstrained.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Class3 {
    Accept,
    Reject,
    DontCare,
}

impl std::fmt::Display for Class3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Class3::Accept => write!(f, "1"),
            Class3::Reject => write!(f, "0"),
            Class3::DontCare => write!(f, "?"),
        }
    }
}

/// A total DFA whose states are partitioned into accept / reject / don't-care
/// classes.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ThreeDfa {
    pub alphabet: Alphabet,
    pub initial: usize,
    pub delta: Vec<Vec<usize>>,
    pub classes: Vec<Class3>,
    pub state_names: Vec<String>,
}

impl ThreeDfa {
    pub fn n_states(&self) -> usize {
        self.delta.len()
    }

    pub fn run_syms(&self, syms: &[usize]) -> usize {
        syms.iter().fold(self.initial, |q, &s| self.delta[q][s])
    }

    /// The three-valued verdict on a word.
    pub fn class_of(&self, word: &RegionWord) -> Class3 {
        self.classes[self.run_syms(&word.sym_indices(&self.alphabet))]
    }

    fn with_accepting(&self, accept_class: Class3) -> SymbolicDfa {
        SymbolicDfa {
            alphabet: self.alphabet.clone(),
            initial: self.initial,
            delta: self.delta.clone(),
            accepting: self.classes.iter().map(|c| *c == accept_class).collect(),
            state_names: self.state_names.clone(),
        }
    }

    /// The DFA accepting exactly the accept class.
    pub fn plus_dfa(&self) -> SymbolicDfa {
        self.with_accepting(Class3::Accept)
    }

    /// The DFA accepting exactly the reject class.
    pub fn minus_dfa(&self) -> SymbolicDfa {
        self.with_accepting(Class3::Reject)
    }
}

/// A borrowed automaton usable as a product component.
#[derive(Clone, Copy)]
pub enum LangRef<'a> {
    Dfa(&'a SymbolicDfa),
    Nfa(&'a SymbolicNfa),
}

impl<'a> LangRef<'a> {
    pub fn alphabet(&self) -> &Alphabet {
        match self {
            LangRef::Dfa(d) => &d.alphabet,
            LangRef::Nfa(n) => &n.alphabet,
        }
    }

    fn initials(&self) -> Vec<usize> {
        match self {
            LangRef::Dfa(d) => vec![d.initial],
            LangRef::Nfa(n) => {
                let mut v = n.initials.clone();
                v.sort_unstable();
                v.dedup();
                v
            }
        }
    }

    fn step(&self, state: usize, sym: usize) -> Vec<usize> {
        match self {
            LangRef::Dfa(d) => vec![d.delta[state][sym]],
            LangRef::Nfa(n) => n.delta[state][sym].clone(),
        }
    }

    fn accepting(&self, state: usize) -> bool {
        match self {
            LangRef::Dfa(d) => d.accepting[state],
            LangRef::Nfa(n) => n.accepting[state],
        }
    }
}

/// A synchronous product of several automata, explored lazily: member words
/// are exactly the words accepted by every component.
pub struct Product<'a> {
    parts: Vec<LangRef<'a>>,
}

impl<'a> Product<'a> {
    pub fn new(parts: Vec<LangRef<'a>>) -> Result<Self, AutomataError> {
        assert!(!parts.is_empty());
        let alphabet = parts[0].alphabet();
        if parts[1..].iter().any(|p| p.alphabet() != alphabet) {
            return Err(AutomataError::AlphabetMismatch);
        }
        Ok(Product { parts })
    }

    fn alphabet(&self) -> &Alphabet {
        self.parts[0].alphabet()
    }

    fn initial_tuples(&self) -> Vec<Vec<usize>> {
        let per_part: Vec<Vec<usize>> = self.parts.iter().map(|p| p.initials()).collect();
        cartesian(&per_part)
    }

    fn successors(&self, tuple: &[usize], sym: usize) -> Vec<Vec<usize>> {
        let per_part: Vec<Vec<usize>> = self
            .parts
            .iter()
            .zip(tuple)
            .map(|(p, &q)| p.step(q, sym))
            .collect();
        if per_part.iter().any(|v| v.is_empty()) {
            return Vec::new();
        }
        cartesian(&per_part)
    }

    fn tuple_accepting(&self, tuple: &[usize]) -> bool {
        self.parts
            .iter()
            .zip(tuple)
            .all(|(p, &q)| p.accepting(q))
    }

    /// The shortest accepted word; among equally short words, the least in
    /// the canonical symbolic-letter order. BFS discovers states in exactly
    /// that order, so the first accepting state found yields the answer.
    pub fn shortest_accepted(&self) -> Option<RegionWord> {
        let syms = self.alphabet().sym_count();
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut parents: Vec<Option<(usize, usize)>> = Vec::new();
        let mut tuples: Vec<Vec<usize>> = Vec::new();
        let mut queue = VecDeque::new();
        let mut found = None;
        for t in self.initial_tuples() {
            if index.contains_key(&t) {
                continue;
            }
            let id = tuples.len();
            index.insert(t.clone(), id);
            parents.push(None);
            if self.tuple_accepting(&t) && found.is_none() {
                found = Some(id);
            }
            tuples.push(t);
            queue.push_back(id);
        }
        'bfs: while let Some(cur) = queue.pop_front() {
            if found.is_some() {
                break;
            }
            for s in 0..syms {
                for next in self.successors(&tuples[cur], s) {
                    if index.contains_key(&next) {
                        continue;
                    }
                    let id = tuples.len();
                    index.insert(next.clone(), id);
                    parents.push(Some((cur, s)));
                    let hit = self.tuple_accepting(&next);
                    tuples.push(next);
                    queue.push_back(id);
                    if hit {
                        found = Some(id);
                        break 'bfs;
                    }
                }
            }
        }
        let mut at = found?;
        let mut rev = Vec::new();
        while let Some((prev, s)) = parents[at] {
            rev.push(s);
            at = prev;
        }
        rev.reverse();
        Some(RegionWord::from_sym_indices(self.alphabet(), &rev))
    }

    pub fn is_empty(&self) -> bool {
        self.shortest_accepted().is_none()
    }

    /// Fully explores the product into a materialized automaton.
    pub fn to_nfa(&self) -> SymbolicNfa {
        let syms = self.alphabet().sym_count();
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut tuples: Vec<Vec<usize>> = Vec::new();
        let mut queue = VecDeque::new();
        let mut initials = Vec::new();
        for t in self.initial_tuples() {
            let id = *index.entry(t.clone()).or_insert_with(|| {
                tuples.push(t.clone());
                tuples.len() - 1
            });
            if !initials.contains(&id) {
                initials.push(id);
                queue.push_back(id);
            }
        }
        let mut delta: Vec<Vec<Vec<usize>>> = Vec::new();
        while let Some(cur) = queue.pop_front() {
            while delta.len() <= cur {
                delta.push(vec![Vec::new(); syms]);
            }
            for s in 0..syms {
                let mut row = Vec::new();
                for next in self.successors(&tuples[cur], s) {
                    let id = match index.get(&next) {
                        Some(&id) => id,
                        None => {
                            let id = tuples.len();
                            index.insert(next.clone(), id);
                            tuples.push(next);
                            queue.push_back(id);
                            id
                        }
                    };
                    row.push(id);
                }
                row.sort_unstable();
                row.dedup();
                delta[cur][s] = row;
            }
        }
        while delta.len() < tuples.len() {
            delta.push(vec![Vec::new(); syms]);
        }
        let accepting = tuples.iter().map(|t| self.tuple_accepting(t)).collect();
        SymbolicNfa {
            alphabet: self.alphabet().clone(),
            initials,
            delta,
            accepting,
        }
    }
}

fn cartesian(parts: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for p in parts {
        let mut next = Vec::with_capacity(out.len() * p.len());
        for prefix in &out {
            for &q in p {
                let mut t = prefix.clone();
                t.push(q);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

/// Synchronous product of automata accepting the intersection language.
pub fn product_intersection(parts: &[LangRef]) -> Result<SymbolicNfa, AutomataError> {
    Ok(Product::new(parts.to_vec())?.to_nfa())
}

/// Subset construction. Fails once more than `state_limit` subset states
/// appear.
pub fn determinize(nfa: &SymbolicNfa, state_limit: usize) -> Result<SymbolicDfa, AutomataError> {
    let syms = nfa.alphabet.sym_count();
    let mut initial: Vec<usize> = nfa.initials.clone();
    initial.sort_unstable();
    initial.dedup();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::new();
    index.insert(initial.clone(), 0);
    subsets.push(initial);
    queue.push_back(0);
    let mut delta: Vec<Vec<usize>> = Vec::new();
    while let Some(cur) = queue.pop_front() {
        while delta.len() <= cur {
            delta.push(vec![usize::MAX; syms]);
        }
        for s in 0..syms {
            let mut next: Vec<usize> = Vec::new();
            for &q in &subsets[cur] {
                next.extend_from_slice(&nfa.delta[q][s]);
            }
            next.sort_unstable();
            next.dedup();
            let id = match index.get(&next) {
                Some(&id) => id,
                None => {
                    let id = subsets.len();
                    if id >= state_limit {
                        return Err(AutomataError::StateLimit { limit: state_limit });
                    }
                    index.insert(next.clone(), id);
                    subsets.push(next);
                    queue.push_back(id);
                    id
                }
            };
            delta[cur][s] = id;
        }
    }
    let accepting = subsets
        .iter()
        .map(|sub| sub.iter().any(|&q| nfa.accepting[q]))
        .collect();
    let state_names = (0..subsets.len()).map(|i| format!("d{i}")).collect();
    Ok(SymbolicDfa {
        alphabet: nfa.alphabet.clone(),
        initial: 0,
        delta,
        accepting,
        state_names,
    })
}
