//! Class automata for permutation classes with finitely many
//! sum-indecomposables: forbidden words, prefix and suffix states, loop
//! alphabets, growth rates and dominance, decompositions and typicality.

mod decomp;
mod graph;
mod growth;

use std::collections::BTreeSet;

use log::warn;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::perm::{PermError, Permutation};
use crate::word::{leq, Alphabet, LetterId, Word, WordError};

pub use decomp::{Condition, Decomposition, LoopBlock, Slice, SliceCheck, Transition, TypicalityReport};
pub use graph::{Side, StateGraph, StateId};
pub use growth::{growth, loop_counts, Growth};

pub(crate) use growth::bisect;

pub const DEFAULT_INDEC_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error("alphabet not finite under cap {0}")]
    AlphabetNotFinite(usize),
    #[error("class has no sum-indecomposables")]
    EmptyAlphabet,
    #[error("forbidden word is empty")]
    EmptyForbidden,
    #[error("word leaves the class at letter {position}")]
    NotInClass { position: usize },
    #[error("loop alphabet has no weight-1 letter")]
    NoUnitLetter,
    #[error("word too short for equitable partition (weight {n} < Q = {q})")]
    TooShort { n: u64, q: usize },
    #[error("invalid state {0}")]
    InvalidState(usize),
    #[error("class spec: {0}")]
    Spec(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedLetter {
    pub name: String,
    pub weight: u32,
}

/// How a class is specified; the JSON form is tagged by `"kind"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassSpec {
    /// `Av(basis)`, with sum-indecomposables enumerated up to `indec_cap` points.
    Basis {
        basis: Vec<Permutation>,
        #[serde(default = "default_cap")]
        indec_cap: usize,
    },
    /// The sum closure of the given permutations.
    Alphabet { letters: Vec<Permutation> },
    /// Named letters under the subword order, minus the upward closure of `forbidden`.
    Abstract {
        letters: Vec<NamedLetter>,
        #[serde(default)]
        forbidden: Vec<String>,
    },
}

fn default_cap() -> usize {
    DEFAULT_INDEC_CAP
}

impl ClassSpec {
    pub fn basis<I: IntoIterator<Item = &'static str>>(basis: I) -> Result<Self, PermError> {
        Ok(ClassSpec::Basis {
            basis: basis.into_iter().map(str::parse).collect::<Result<_, _>>()?,
            indec_cap: DEFAULT_INDEC_CAP,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, ClassError> {
        serde_json::from_str(text).map_err(|e| ClassError::Spec(e.to_string()))
    }
}

/// Every class member lies in the sum closure of `alphabet`; `forbidden` are
/// the minimal words over it that are not members.
#[derive(Debug, Clone)]
pub struct ClassModel {
    alphabet: Alphabet,
    forbidden: Vec<Word>,
    basis: Option<Vec<Permutation>>,
    prefix: StateGraph,
    suffix: StateGraph,
}

/// Sum-indecomposables avoiding `basis`, by size. Errors if some exist above `cap`.
fn indecomposables_avoiding(basis: &[Permutation], cap: usize) -> Result<Vec<Permutation>, ClassError> {
    let avoids = |p: &Permutation| basis.iter().all(|b| !p.contains(b));
    let one = Permutation::identity(1);
    if !avoids(&one) {
        return Err(ClassError::EmptyAlphabet);
    }
    let mut all = vec![one.clone()];
    let mut level = BTreeSet::from([one]);
    for n in 2.. {
        let next: BTreeSet<Permutation> = level
            .iter()
            .flat_map(Permutation::insertions)
            .filter(|p| p.is_sum_indecomposable().unwrap_or(false) && avoids(p))
            .collect();
        if next.is_empty() {
            break;
        }
        if n > cap {
            return Err(ClassError::AlphabetNotFinite(cap));
        }
        all.extend(next.iter().cloned());
        level = next;
    }
    Ok(all)
}

/// Sum-indecomposable patterns of the given permutations.
fn indecomposable_closure(letters: &[Permutation]) -> BTreeSet<Permutation> {
    let mut out = BTreeSet::new();
    let mut frontier: Vec<Permutation> = letters.iter().flat_map(|p| p.sum_decompose()).collect();
    while let Some(p) = frontier.pop() {
        if p.is_empty() || !out.insert(p.clone()) {
            continue;
        }
        for d in p.deletions() {
            frontier.extend(d.sum_decompose());
        }
    }
    out
}

/// Basis of the sum closure of the indecomposables `a`: indecomposables
/// outside `a` all of whose one-point deletions stay in the closure.
fn sum_closure_basis(a: &BTreeSet<Permutation>) -> Vec<Permutation> {
    let in_closure = |p: &Permutation| p.sum_decompose().iter().all(|c| a.contains(c));
    let max = a.iter().map(Permutation::len).max().unwrap_or(0);
    let mut out = Vec::new();
    for n in 1..=max + 1 {
        for p in Permutation::all_of_size(n) {
            if p.is_sum_indecomposable().unwrap_or(false)
                && !a.contains(&p)
                && p.deletions().iter().all(in_closure)
            {
                out.push(p);
            }
        }
    }
    out
}

fn minimal_words(alphabet: &Alphabet, words: Vec<Word>) -> Result<Vec<Word>, ClassError> {
    let mut words: Vec<Word> = words.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
    if words.iter().any(Word::is_empty) {
        return Err(ClassError::EmptyForbidden);
    }
    let mut keep = vec![true; words.len()];
    for i in 0..words.len() {
        for j in 0..words.len() {
            if i != j && keep[j] && leq(alphabet, &words[j], &words[i])? {
                keep[i] = false;
                break;
            }
        }
    }
    if keep.iter().any(|k| !k) {
        warn!("dropping forbidden words that contain other forbidden words");
    }
    let mut i = 0;
    words.retain(|_| {
        i += 1;
        keep[i - 1]
    });
    Ok(words)
}

impl ClassModel {
    pub fn build(spec: &ClassSpec) -> Result<Self, ClassError> {
        match spec {
            ClassSpec::Basis { basis, indec_cap } => {
                let a = indecomposables_avoiding(basis, *indec_cap)?;
                let alphabet = Alphabet::permutations(a.iter().cloned())?;
                let in_a: BTreeSet<&Permutation> = a.iter().collect();
                let forbidden = basis
                    .iter()
                    .filter(|b| b.sum_decompose().iter().all(|c| in_a.contains(c)))
                    .map(|b| alphabet.word_of_permutation(b))
                    .collect::<Result<Vec<_>, _>>()?;
                let forbidden = minimal_words(&alphabet, forbidden)?;
                Self::assemble(alphabet, forbidden, Some(basis.clone()))
            }
            ClassSpec::Alphabet { letters } => {
                let a = indecomposable_closure(letters);
                if a.is_empty() {
                    return Err(ClassError::EmptyAlphabet);
                }
                let basis = sum_closure_basis(&a);
                let alphabet = Alphabet::permutations(a)?;
                Self::assemble(alphabet, Vec::new(), Some(basis))
            }
            ClassSpec::Abstract { letters, forbidden } => {
                if letters.is_empty() {
                    return Err(ClassError::EmptyAlphabet);
                }
                let alphabet = Alphabet::named(letters.iter().map(|l| (l.name.clone(), l.weight)))?;
                let words = forbidden
                    .iter()
                    .map(|f| alphabet.parse_word(f))
                    .collect::<Result<Vec<_>, _>>()?;
                let words = minimal_words(&alphabet, words)?;
                Self::assemble(alphabet, words, None)
            }
        }
    }

    fn assemble(alphabet: Alphabet, forbidden: Vec<Word>, basis: Option<Vec<Permutation>>) -> Result<Self, ClassError> {
        let prefix = StateGraph::build(&alphabet, &forbidden, Side::Prefix)?;
        let suffix = StateGraph::build(&alphabet, &forbidden, Side::Suffix)?;
        let model = ClassModel {
            alphabet,
            forbidden,
            basis,
            prefix,
            suffix,
        };
        if !model.dominance_agrees() {
            warn!(
                "prefix and suffix dominance disagree: gamma {} vs {}, D {} vs {}",
                model.prefix.gamma(),
                model.suffix.gamma(),
                model.prefix.d(),
                model.suffix.d()
            );
        }
        Ok(model)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn forbidden(&self) -> &[Word] {
        &self.forbidden
    }

    /// The basis, when the class is a permutation class.
    pub fn basis(&self) -> Option<&[Permutation]> {
        self.basis.as_deref()
    }

    pub fn is_sum_closed(&self) -> bool {
        self.forbidden.is_empty()
    }

    pub fn prefix(&self) -> &StateGraph {
        &self.prefix
    }

    pub fn suffix(&self) -> &StateGraph {
        &self.suffix
    }

    pub fn graph(&self, side: Side) -> &StateGraph {
        match side {
            Side::Prefix => &self.prefix,
            Side::Suffix => &self.suffix,
        }
    }

    /// Largest letter weight.
    pub fn k(&self) -> u64 {
        self.alphabet.max_weight() as u64
    }

    pub fn q(&self) -> usize {
        3 * (self.prefix.len() + self.suffix.len())
    }

    pub fn gamma(&self) -> f64 {
        self.prefix.gamma()
    }

    pub fn d(&self) -> usize {
        self.prefix.d()
    }

    /// Structural check that both sides give the same `gamma` and `D`.
    pub fn dominance_agrees(&self) -> bool {
        (self.prefix.gamma() - self.suffix.gamma()).abs() <= 1e-9 && self.prefix.d() == self.suffix.d()
    }

    /// Prefix transition on raw tuples; the result may be invalid.
    pub fn prefix_transition(&self, p: &[usize], a: LetterId) -> Result<Vec<usize>, ClassError> {
        self.checked_step(Side::Prefix, p, a)
    }

    /// Suffix transition (prepending `a`) on raw tuples; the result may be invalid.
    pub fn suffix_transition(&self, s: &[usize], a: LetterId) -> Result<Vec<usize>, ClassError> {
        self.checked_step(Side::Suffix, s, a)
    }

    fn checked_step(&self, side: Side, state: &[usize], a: LetterId) -> Result<Vec<usize>, ClassError> {
        if state.len() != self.forbidden.len() {
            return Err(ClassError::InvalidState(state.len()));
        }
        if let Some(i) = self.forbidden.iter().zip(state).position(|(phi, &p)| p >= phi.len()) {
            return Err(ClassError::InvalidState(i));
        }
        Ok(graph::step_tuple(&self.alphabet, &self.forbidden, side, state, a))
    }

    pub fn is_valid_tuple(&self, state: &[usize]) -> bool {
        state.len() == self.forbidden.len() && self.forbidden.iter().zip(state).all(|(phi, &p)| p < phi.len())
    }

    pub fn contains_word(&self, w: &Word) -> Result<bool, ClassError> {
        self.alphabet.check(w)?;
        Ok(self.prefix.run(w.letters()).is_ok())
    }

    /// Membership of a permutation: all components in the alphabet and no forbidden word below it.
    pub fn contains_permutation(&self, p: &Permutation) -> bool {
        match self.alphabet.word_of_permutation(p) {
            Ok(w) => self.prefix.run(w.letters()).is_ok(),
            Err(_) => false,
        }
    }

    /// Word of a class member.
    pub fn word_of(&self, p: &Permutation) -> Result<Word, ClassError> {
        let w = self.alphabet.word_of_permutation(p)?;
        self.prefix
            .run(w.letters())
            .map_err(|i| ClassError::NotInClass { position: i + 1 })?;
        Ok(w)
    }

    /// Some `p_i + s_i` reaches `ℓ_i`: no word with prefix state `p` followed by
    /// a word with suffix state `s` is in the class.
    pub fn overlap(&self, p: StateId, s: StateId) -> bool {
        self.forbidden
            .iter()
            .zip(self.prefix.state(p).iter().zip(self.suffix.state(s)))
            .any(|(phi, (&a, &b))| a + b >= phi.len())
    }

    pub fn compatible(&self, p: StateId, s: StateId) -> bool {
        !self.overlap(p, s)
    }

    /// Compatible, and every one-step successor on either side overlaps the other state.
    pub fn matches(&self, p: StateId, s: StateId) -> bool {
        let m = self.compatible(p, s)
            && self.prefix.successors(p).into_iter().all(|q| self.overlap(q, s))
            && self.suffix.successors(s).into_iter().all(|t| self.overlap(p, t));
        if m {
            assert_eq!(
                self.prefix.loop_alphabet(p),
                self.suffix.loop_alphabet(s),
                "matching states with different loop alphabets"
            );
        }
        m
    }

    /// `table[r][s]`: number of words of weight `r` that keep prefix state `s` inside the class.
    pub fn completion_table(&self, max: usize) -> Vec<Vec<BigUint>> {
        let states = self.prefix.len();
        let mut table = vec![vec![BigUint::zero(); states]; max + 1];
        table[0] = vec![BigUint::one(); states];
        for r in 1..=max {
            for s in 0..states {
                let mut acc = BigUint::zero();
                for a in 0..self.alphabet.len() {
                    let w = self.alphabet.weight(a) as usize;
                    if w > r {
                        continue;
                    }
                    if let Some(t) = self.prefix.step(s, a) {
                        acc += &table[r - w][t];
                    }
                }
                table[r][s] = acc;
            }
        }
        table
    }

    /// `c_0..=c_max`.
    pub fn class_counts(&self, max: usize) -> Vec<BigUint> {
        self.completion_table(max).into_iter().map(|row| row[0].clone()).collect()
    }

    pub fn class_count(&self, n: usize) -> BigUint {
        self.completion_table(n).swap_remove(n).swap_remove(0)
    }

    /// Members of weight `n` whose prefix transition path is `path` with
    /// transition letters `letters`.
    pub fn count_by_path(&self, path: &[StateId], letters: &[LetterId], n: usize) -> BigUint {
        let consistent = !path.is_empty()
            && path[0] == self.prefix.initial()
            && letters.len() + 1 == path.len()
            && letters
                .iter()
                .enumerate()
                .all(|(j, &a)| path[j] != path[j + 1] && self.prefix.step(path[j], a) == Some(path[j + 1]));
        if !consistent {
            return BigUint::zero();
        }
        let shift: usize = letters.iter().map(|&a| self.alphabet.weight(a) as usize).sum();
        if shift > n {
            return BigUint::zero();
        }
        let m = n - shift;
        let mut acc = vec![BigUint::zero(); m + 1];
        acc[0] = BigUint::one();
        for &s in path {
            let weights: Vec<u32> = self.prefix.loop_alphabet(s).iter().map(|&a| self.alphabet.weight(a)).collect();
            let star = loop_counts(&weights, m);
            let mut out = vec![BigUint::zero(); m + 1];
            for (i, x) in acc.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
                for (j, y) in star[..=m - i].iter().enumerate() {
                    out[i + j] += x * y;
                }
            }
            acc = out;
        }
        acc.swap_remove(m)
    }

    /// Every prefix transition path from the initial state with its transition letters.
    pub fn transition_paths(&self) -> Vec<(Vec<StateId>, Vec<LetterId>)> {
        let mut out = Vec::new();
        let mut path = vec![self.prefix.initial()];
        let mut letters = Vec::new();
        self.collect_paths(&mut path, &mut letters, &mut out);
        out
    }

    fn collect_paths(&self, path: &mut Vec<StateId>, letters: &mut Vec<LetterId>, out: &mut Vec<(Vec<StateId>, Vec<LetterId>)>) {
        out.push((path.clone(), letters.clone()));
        let s = *path.last().expect("nonempty path");
        for a in 0..self.alphabet.len() {
            match self.prefix.step(s, a) {
                Some(t) if t != s => {
                    path.push(t);
                    letters.push(a);
                    self.collect_paths(path, letters, out);
                    path.pop();
                    letters.pop();
                }
                _ => {}
            }
        }
    }

    /// JSON dump of both state graphs.
    pub fn to_json(&self) -> Value {
        let graph_json = |g: &StateGraph| {
            let states: Vec<Value> = (0..g.len())
                .map(|s| {
                    let gr = g.growth(s);
                    let transitions: Vec<Value> = (0..self.alphabet.len())
                        .filter_map(|a| match g.step(s, a) {
                            Some(t) if t != s => Some(json!({
                                "letter": self.alphabet.letter(a).label(),
                                "to": g.state(t),
                            })),
                            _ => None,
                        })
                        .collect();
                    json!({
                        "state": g.state(s),
                        "loop_alphabet": g.loop_alphabet(s).iter().map(|&a| self.alphabet.letter(a).label()).collect::<Vec<_>>(),
                        "transitions": transitions,
                        "rho": if gr.rho.is_finite() { json!(gr.rho) } else { Value::Null },
                        "gamma": gr.gamma,
                        "c": gr.c,
                        "dominant": g.is_dominant(s),
                    })
                })
                .collect();
            json!({ "gamma": g.gamma(), "d": g.d(), "states": states })
        };
        json!({
            "alphabet": self.alphabet.letters().iter().map(|l| json!({"letter": l.label(), "weight": l.weight()})).collect::<Vec<_>>(),
            "forbidden": self.forbidden.iter().map(|w| self.alphabet.format_word(w)).collect::<Vec<_>>(),
            "k": self.k(),
            "q": self.q(),
            "gamma": self.gamma(),
            "d": self.d(),
            "prefix": graph_json(&self.prefix),
            "suffix": graph_json(&self.suffix),
        })
    }
}
