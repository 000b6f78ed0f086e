//! Text formats: the line-oriented automaton description, region and timed
//! word literals, and Graphviz output.
//!
//! An automaton file looks like:
//!
//! ```text
//! era 1
//! alphabet: a b
//! k: 1
//! states: q0 q1 q2
//! initial: q0
//! accepting: q0 q1 q2
//! edge: q0 a q1 | true
//! edge: q1 b q2 | x_a=1
//! edge: q2 a q1 | x_b<=1
//! ```
//!
//! `#` starts a comment. Guards are `&`-joined atoms: `true`, `x_a=1`,
//! `x_a<1`, `x_a<=1`, `x_a>0`, `x_a>=1`, or chained forms like `0<x_a<1`.
//! Emission is canonical, so `parse(emit(d)) == d`.

use crate::alphabet::{Alphabet, AlphabetError, Letter};
use crate::automata::{AutomataError, Class3, Dera, DeraEdge, SymbolicDfa, ThreeDfa};
use crate::constraint::{ClockInterval, ElementaryConstraint, GuardError, SimpleConstraint};
use crate::constraint::Guard;
use crate::regions::Regl;
use crate::words::{RegionWord, Time, TimedWord, WordError};

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("expected header `era 1`")]
    BadHeader,
    #[error("unknown directive {0:?}")]
    UnknownDirective(String),
    #[error("{0:?} given twice")]
    Duplicate(&'static str),
    #[error("{0:?} missing or given after first use")]
    Missing(&'static str),
    #[error(transparent)]
    Alphabet(AlphabetError),
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("unknown letter {0:?}")]
    UnknownLetter(String),
    #[error("unknown clock {0:?}")]
    UnknownClock(String),
    #[error("expected `edge: source letter target | guard`")]
    MalformedEdge,
    #[error("cannot read guard atom {0:?}")]
    MalformedAtom(String),
    #[error(transparent)]
    Guard(GuardError),
    #[error("bad number {0:?}")]
    BadNumber(String),
    #[error("expected a parenthesized pair like ({0})")]
    MalformedPair(&'static str),
    #[error("{0:?} does not pin its clock to a single region; use x=c, c<x<c+1, or x>K")]
    NotElementary(String),
    #[error("clock {0:?} constrained twice in one step")]
    DuplicateClock(String),
    #[error("no constraint for clock {0:?}")]
    MissingClock(String),
    #[error(transparent)]
    Automaton(AutomataError),
    #[error(transparent)]
    Word(WordError),
}

fn err<T>(line: usize, kind: ParseErrorKind) -> Result<T, ParseError> {
    Err(ParseError { line, kind })
}

fn parse_u32(line: usize, s: &str) -> Result<u32, ParseError> {
    s.parse().map_err(|_| ParseError { line, kind: ParseErrorKind::BadNumber(s.to_string()) })
}

/// Parses one guard atom into its clock and interval. `true` yields nothing.
fn parse_atom(
    alphabet: &Alphabet,
    line: usize,
    atom: &str,
) -> Result<Option<(Letter, ClockInterval)>, ParseError> {
    let atom = atom.trim();
    if atom == "true" {
        return Ok(None);
    }
    let malformed = || ParseError { line, kind: ParseErrorKind::MalformedAtom(atom.to_string()) };
    if atom.starts_with(|c: char| c.is_ascii_digit()) {
        // Chained form: NUM (< | <=) clock (< | <=) NUM.
        let (lo_txt, rest) = atom.split_at(atom.find(['<']).ok_or_else(malformed)?);
        let (lo_strict, rest) = match rest.strip_prefix("<=") {
            Some(r) => (false, r),
            None => (true, rest.strip_prefix('<').ok_or_else(malformed)?),
        };
        let cut = rest.find('<').ok_or_else(malformed)?;
        let (clock_txt, rest) = rest.split_at(cut);
        let (hi_strict, hi_txt) = match rest.strip_prefix("<=") {
            Some(r) => (false, r),
            None => (true, rest.strip_prefix('<').ok_or_else(malformed)?),
        };
        let clock_txt = clock_txt.trim();
        let clock = alphabet.clock_index(clock_txt).ok_or(ParseError {
            line,
            kind: ParseErrorKind::UnknownClock(clock_txt.to_string()),
        })?;
        let lo = parse_u32(line, lo_txt.trim())?;
        let hi = parse_u32(line, hi_txt.trim())?;
        return Ok(Some((
            clock,
            ClockInterval { lo, lo_strict, hi: Some(hi), hi_strict },
        )));
    }
    let op_at = atom.find(['=', '<', '>']).ok_or_else(malformed)?;
    let (clock_txt, rest) = atom.split_at(op_at);
    let clock_txt = clock_txt.trim();
    let clock = alphabet.clock_index(clock_txt).ok_or(ParseError {
        line,
        kind: ParseErrorKind::UnknownClock(clock_txt.to_string()),
    })?;
    let (op, num_txt) = ["<=", ">=", "=", "<", ">"]
        .iter()
        .find_map(|op| rest.strip_prefix(op).map(|r| (*op, r)))
        .ok_or_else(malformed)?;
    let c = parse_u32(line, num_txt.trim())?;
    let interval = match op {
        "=" => ClockInterval::point(c),
        "<" => ClockInterval { lo: 0, lo_strict: false, hi: Some(c), hi_strict: true },
        "<=" => ClockInterval { lo: 0, lo_strict: false, hi: Some(c), hi_strict: false },
        ">" => ClockInterval { lo: c, lo_strict: true, hi: None, hi_strict: false },
        ">=" => ClockInterval { lo: c, lo_strict: false, hi: None, hi_strict: false },
        _ => unreachable!(),
    };
    Ok(Some((clock, interval)))
}

fn parse_guard(alphabet: &Alphabet, line: usize, text: &str) -> Result<Guard, ParseError> {
    let mut atoms = Vec::new();
    for atom in text.split('&') {
        if let Some(pair) = parse_atom(alphabet, line, atom)? {
            atoms.push(pair);
        }
    }
    Guard::from_atoms(alphabet, atoms)
        .map_err(|e| ParseError { line, kind: ParseErrorKind::Guard(e) })
}

pub fn parse_dera(text: &str) -> Result<Dera, ParseError> {
    let mut header_seen = false;
    let mut letters: Option<(usize, Vec<String>)> = None;
    let mut k: Option<(usize, u32)> = None;
    let mut alphabet: Option<Alphabet> = None;
    let mut states: Option<Vec<String>> = None;
    let mut initial: Option<usize> = None;
    let mut accepting: Option<Vec<bool>> = None;
    let mut edges: Vec<DeraEdge> = Vec::new();
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if !header_seen {
            if content != "era 1" {
                return err(line, ParseErrorKind::BadHeader);
            }
            header_seen = true;
            continue;
        }
        let (keyword, rest) = match content.split_once(':') {
            Some((k, r)) => (k.trim(), r.trim()),
            None => return err(line, ParseErrorKind::UnknownDirective(content.to_string())),
        };
        // The alphabet is built as soon as both its pieces are known, since
        // guards and clock names depend on it.
        match keyword {
            "alphabet" => {
                if letters.is_some() || alphabet.is_some() {
                    return err(line, ParseErrorKind::Duplicate("alphabet"));
                }
                letters = Some((line, rest.split_whitespace().map(String::from).collect()));
            }
            "k" => {
                if k.is_some() {
                    return err(line, ParseErrorKind::Duplicate("k"));
                }
                k = Some((line, parse_u32(line, rest)?));
            }
            "states" => {
                if states.is_some() {
                    return err(line, ParseErrorKind::Duplicate("states"));
                }
                states = Some(rest.split_whitespace().map(String::from).collect());
            }
            "initial" | "accepting" | "edge" => {
                if alphabet.is_none() {
                    let (ll, ls) = letters.take().ok_or(ParseError {
                        line,
                        kind: ParseErrorKind::Missing("alphabet"),
                    })?;
                    let (_, kk) =
                        k.ok_or(ParseError { line, kind: ParseErrorKind::Missing("k") })?;
                    alphabet = Some(Alphabet::new(ls, kk).map_err(|e| ParseError {
                        line: ll,
                        kind: ParseErrorKind::Alphabet(e),
                    })?);
                }
                let ab = alphabet.as_ref().unwrap();
                let sts = states
                    .as_ref()
                    .ok_or(ParseError { line, kind: ParseErrorKind::Missing("states") })?;
                let state_of = |name: &str| {
                    sts.iter().position(|s| s == name).ok_or(ParseError {
                        line,
                        kind: ParseErrorKind::UnknownState(name.to_string()),
                    })
                };
                match keyword {
                    "initial" => {
                        if initial.is_some() {
                            return err(line, ParseErrorKind::Duplicate("initial"));
                        }
                        initial = Some(state_of(rest)?);
                    }
                    "accepting" => {
                        if accepting.is_some() {
                            return err(line, ParseErrorKind::Duplicate("accepting"));
                        }
                        let mut acc = vec![false; sts.len()];
                        for name in rest.split_whitespace() {
                            acc[state_of(name)?] = true;
                        }
                        accepting = Some(acc);
                    }
                    "edge" => {
                        let (head, guard_txt) = rest
                            .split_once('|')
                            .ok_or(ParseError { line, kind: ParseErrorKind::MalformedEdge })?;
                        let parts: Vec<&str> = head.split_whitespace().collect();
                        let [src, letter_txt, dst] = parts[..] else {
                            return err(line, ParseErrorKind::MalformedEdge);
                        };
                        let letter = ab.letter_index(letter_txt).ok_or(ParseError {
                            line,
                            kind: ParseErrorKind::UnknownLetter(letter_txt.to_string()),
                        })?;
                        edges.push(DeraEdge {
                            source: state_of(src)?,
                            letter,
                            guard: parse_guard(ab, line, guard_txt)?,
                            target: state_of(dst)?,
                        });
                    }
                    _ => unreachable!(),
                }
            }
            other => return err(line, ParseErrorKind::UnknownDirective(other.to_string())),
        }
    }
    if !header_seen {
        return err(last_line.max(1), ParseErrorKind::BadHeader);
    }
    let missing = |what| ParseError { line: last_line, kind: ParseErrorKind::Missing(what) };
    let alphabet = match alphabet {
        Some(a) => a,
        None => {
            let (ll, ls) = letters.ok_or_else(|| missing("alphabet"))?;
            let (_, kk) = k.ok_or_else(|| missing("k"))?;
            Alphabet::new(ls, kk)
                .map_err(|e| ParseError { line: ll, kind: ParseErrorKind::Alphabet(e) })?
        }
    };
    let states = states.ok_or_else(|| missing("states"))?;
    let initial = initial.ok_or_else(|| missing("initial"))?;
    let accepting = accepting.ok_or_else(|| missing("accepting"))?;
    Dera::new(alphabet, states, initial, accepting, edges)
        .map_err(|e| ParseError { line: last_line, kind: ParseErrorKind::Automaton(e) })
}

pub fn emit_dera(d: &Dera) -> String {
    let mut s = String::from("era 1\n");
    let letters: Vec<&str> = d.alphabet.letters().map(|l| d.alphabet.letter_name(l)).collect();
    s.push_str(&format!("alphabet: {}\n", letters.join(" ")));
    s.push_str(&format!("k: {}\n", d.alphabet.k()));
    s.push_str(&format!("states: {}\n", d.state_names.join(" ")));
    s.push_str(&format!("initial: {}\n", d.state_names[d.initial]));
    let acc: Vec<&str> = d
        .state_names
        .iter()
        .zip(&d.accepting)
        .filter(|(_, a)| **a)
        .map(|(n, _)| n.as_str())
        .collect();
    s.push_str(&format!("accepting: {}\n", acc.join(" ")));
    for e in &d.edges {
        s.push_str(&format!(
            "edge: {} {} {} | {}\n",
            d.state_names[e.source],
            d.alphabet.letter_name(e.letter),
            d.state_names[e.target],
            e.guard.display(&d.alphabet),
        ));
    }
    s
}

/// Splits `(...)` groups at the top level of a word literal.
fn pair_groups<'t>(
    text: &'t str,
    expected: &'static str,
) -> Result<Vec<&'t str>, ParseError> {
    let mut groups = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        if !rest.starts_with('(') {
            return err(1, ParseErrorKind::MalformedPair(expected));
        }
        let close = rest
            .find(')')
            .ok_or(ParseError { line: 1, kind: ParseErrorKind::MalformedPair(expected) })?;
        groups.push(rest[1..close].trim());
        rest = rest[close + 1..].trim_start();
    }
    Ok(groups)
}

/// Reads a region word like `(a, x_a=0 & x_b=0) (b, x_a=1 & x_b=1)`. The
/// empty word is an empty string or `(empty)`. Each step must pin every
/// clock to a single region.
pub fn parse_region_word(alphabet: &Alphabet, text: &str) -> Result<RegionWord, ParseError> {
    let trimmed = text.trim();
    if trimmed.is_empty() || trimmed == "(empty)" {
        return Ok(RegionWord::empty());
    }
    let mut pairs = Vec::new();
    for group in pair_groups(trimmed, "a, x_a=0 & x_b=0")? {
        let (letter_txt, constraint_txt) = group
            .split_once(',')
            .ok_or(ParseError { line: 1, kind: ParseErrorKind::MalformedPair("a, x_a=0 & x_b=0") })?;
        let letter_txt = letter_txt.trim();
        let letter = alphabet.letter_index(letter_txt).ok_or(ParseError {
            line: 1,
            kind: ParseErrorKind::UnknownLetter(letter_txt.to_string()),
        })?;
        let mut elems: Vec<Option<ElementaryConstraint>> = vec![None; alphabet.letter_count()];
        for atom in constraint_txt.split('&') {
            let Some((clock, interval)) = parse_atom(alphabet, 1, atom)? else {
                return err(1, ParseErrorKind::NotElementary(atom.trim().to_string()));
            };
            let elem = elementary_of_interval(&interval, alphabet.k()).ok_or(ParseError {
                line: 1,
                kind: ParseErrorKind::NotElementary(atom.trim().to_string()),
            })?;
            if elems[clock.0].is_some() {
                return err(1, ParseErrorKind::DuplicateClock(alphabet.clock_name(clock)));
            }
            elems[clock.0] = Some(elem);
        }
        let elems: Vec<ElementaryConstraint> = elems
            .into_iter()
            .enumerate()
            .map(|(c, e)| {
                e.ok_or(ParseError {
                    line: 1,
                    kind: ParseErrorKind::MissingClock(alphabet.clock_name(Letter(c))),
                })
            })
            .collect::<Result<_, _>>()?;
        pairs.push((letter, SimpleConstraint::new(elems)));
    }
    Ok(RegionWord::new(pairs))
}

fn elementary_of_interval(iv: &ClockInterval, k: u32) -> Option<ElementaryConstraint> {
    match (iv.lo, iv.lo_strict, iv.hi, iv.hi_strict) {
        (c, false, Some(h), false) if c == h && c <= k => Some(ElementaryConstraint::Point(c)),
        (d, true, Some(h), true) if h == d + 1 && d < k => Some(ElementaryConstraint::Open(d)),
        (c, true, None, _) if c == k => Some(ElementaryConstraint::AboveK),
        _ => None,
    }
}

/// Reads a timed word like `(a, 1) (b, 3/2)`; timestamps are integers,
/// fractions, or decimals. The empty word is an empty string or `(empty)`.
pub fn parse_timed_word(alphabet: &Alphabet, text: &str) -> Result<TimedWord, ParseError> {
    let trimmed = text.trim();
    if trimmed.is_empty() || trimmed == "(empty)" {
        return Ok(TimedWord::empty());
    }
    let mut pairs = Vec::new();
    for group in pair_groups(trimmed, "a, 3/2")? {
        let (letter_txt, time_txt) = group
            .split_once(',')
            .ok_or(ParseError { line: 1, kind: ParseErrorKind::MalformedPair("a, 3/2") })?;
        let letter_txt = letter_txt.trim();
        let letter = alphabet.letter_index(letter_txt).ok_or(ParseError {
            line: 1,
            kind: ParseErrorKind::UnknownLetter(letter_txt.to_string()),
        })?;
        pairs.push((letter, parse_time(time_txt.trim())?));
    }
    TimedWord::new(pairs).map_err(|e| ParseError { line: 1, kind: ParseErrorKind::Word(e) })
}

fn parse_time(s: &str) -> Result<Time, ParseError> {
    let bad = || ParseError { line: 1, kind: ParseErrorKind::BadNumber(s.to_string()) };
    if let Some((int, frac)) = s.split_once('.') {
        let scale = 10i64.checked_pow(frac.len() as u32).ok_or_else(bad)?;
        let int: i64 = int.parse().map_err(|_| bad())?;
        let frac: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        if int < 0 || frac < 0 {
            return Err(bad());
        }
        return Ok(Time::new(int * scale + frac, scale));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.parse().map_err(|_| bad())?;
        let d: i64 = d.parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Time::new(n, d));
    }
    let n: i64 = s.parse().map_err(|_| bad())?;
    Ok(Time::from_integer(n))
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn dot_graph(
    names: &[String],
    initial: usize,
    shape_of: impl Fn(usize) -> &'static str,
    edges: impl Iterator<Item = (usize, usize, String)>,
) -> String {
    let mut s = String::from("digraph automaton {\n  rankdir=LR;\n  start [shape=point];\n");
    for (i, name) in names.iter().enumerate() {
        s.push_str(&format!("  n{} [label=\"{}\", shape={}];\n", i, dot_escape(name), shape_of(i)));
    }
    s.push_str(&format!("  start -> n{initial};\n"));
    for (src, dst, label) in edges {
        s.push_str(&format!("  n{} -> n{} [label=\"{}\"];\n", src, dst, dot_escape(&label)));
    }
    s.push_str("}\n");
    s
}

pub fn dera_to_dot(d: &Dera) -> String {
    dot_graph(
        &d.state_names,
        d.initial,
        |i| if d.accepting[i] { "doublecircle" } else { "circle" },
        d.edges.iter().map(|e| {
            (
                e.source,
                e.target,
                format!("{} | {}", d.alphabet.letter_name(e.letter), e.guard.display(&d.alphabet)),
            )
        }),
    )
}

/// Edges with the same endpoints are drawn once, their labels stacked.
fn grouped_sym_edges<'d>(
    alphabet: &'d Alphabet,
    delta: &'d [Vec<usize>],
) -> impl Iterator<Item = (usize, usize, String)> + 'd {
    delta.iter().enumerate().flat_map(move |(src, row)| {
        let mut by_target: Vec<(usize, Vec<usize>)> = Vec::new();
        for (sym, &dst) in row.iter().enumerate() {
            match by_target.iter_mut().find(|(t, _)| *t == dst) {
                Some((_, syms)) => syms.push(sym),
                None => by_target.push((dst, vec![sym])),
            }
        }
        by_target.into_iter().map(move |(dst, syms)| {
            let labels: Vec<String> = syms.iter().map(|&s| alphabet.display_sym(s)).collect();
            (src, dst, labels.join("\\n"))
        })
    })
}

pub fn symbolic_dfa_to_dot(d: &SymbolicDfa) -> String {
    dot_graph(
        &d.state_names,
        d.initial,
        |i| if d.accepting[i] { "doublecircle" } else { "circle" },
        grouped_sym_edges(&d.alphabet, &d.delta),
    )
}

pub fn three_dfa_to_dot(t: &ThreeDfa) -> String {
    let names: Vec<String> = t
        .state_names
        .iter()
        .zip(&t.classes)
        .map(|(n, c)| format!("{n} [{c}]"))
        .collect();
    dot_graph(
        &names,
        t.initial,
        |i| match t.classes[i] {
            Class3::Accept => "doublecircle",
            Class3::Reject => "circle",
            Class3::DontCare => "box",
        },
        grouped_sym_edges(&t.alphabet, &t.delta),
    )
}

pub fn regl_to_dot(r: &Regl) -> String {
    let a = &r.automaton.alphabet;
    dot_graph(
        &r.state_labels,
        r.automaton.initials[0],
        |_| "circle",
        r.automaton.delta.iter().enumerate().flat_map(|(src, row)| {
            let mut out = Vec::new();
            let mut by_target: Vec<(usize, Vec<usize>)> = Vec::new();
            for (sym, dsts) in row.iter().enumerate() {
                for &dst in dsts {
                    match by_target.iter_mut().find(|(t, _)| *t == dst) {
                        Some((_, syms)) => syms.push(sym),
                        None => by_target.push((dst, vec![sym])),
                    }
                }
            }
            for (dst, syms) in by_target {
                let labels: Vec<String> = syms.iter().map(|&s| a.display_sym(s)).collect();
                out.push((src, dst, labels.join("\\n")));
            }
            out
        }),
    )
}
