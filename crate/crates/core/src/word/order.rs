use std::collections::{BTreeSet, VecDeque};

use super::{Alphabet, LetterId, Word, WordError};

/// The embedding order, decided greedily: each letter of `v` absorbs the
/// longest remaining prefix of `w` that embeds into it.
pub fn leq(alphabet: &Alphabet, w: &Word, v: &Word) -> Result<bool, WordError> {
    alphabet.check(w)?;
    alphabet.check(v)?;
    Ok(greedy_progress(alphabet, w.letters(), v.letters()) == w.len())
}

/// How much of `w` the greedy scan of `v` consumes.
pub(crate) fn greedy_progress(alphabet: &Alphabet, w: &[LetterId], v: &[LetterId]) -> usize {
    let mut start = 0;
    for &b in v {
        if start == w.len() {
            break;
        }
        start = alphabet.extend_forward(w, start, b);
    }
    start
}

/// `v` contains `w` but no proper prefix of `v` does.
pub fn leq_star(alphabet: &Alphabet, w: &Word, v: &Word) -> Result<bool, WordError> {
    if !leq(alphabet, w, v)? {
        return Ok(false);
    }
    if v.is_empty() {
        // ε is its own minimal container and contains nothing else.
        return Ok(w.is_empty());
    }
    Ok(!leq(alphabet, w, &v.without_last())?)
}

/// No letter of the alphabet contains the two-letter word `ab`.
pub fn incompatible(alphabet: &Alphabet, a: LetterId, b: LetterId) -> bool {
    (0..alphabet.len()).all(|c| !alphabet.segment_le_letter(&[a, b], c))
}

/// Splits `w` after each cut position. Cuts must be strictly increasing and
/// strictly inside the word.
pub fn split_at_cuts(w: &Word, cuts: &[usize]) -> Result<Vec<Word>, WordError> {
    let mut parts = Vec::with_capacity(cuts.len() + 1);
    let mut start = 0;
    for &cut in cuts {
        if cut <= start || cut >= w.len() {
            return Err(WordError::EmptyPart);
        }
        parts.push(w.slice(start..cut));
        start = cut;
    }
    parts.push(w.slice(start..w.len()));
    Ok(parts)
}

pub fn is_incompatible_factorisation(
    alphabet: &Alphabet,
    w: &Word,
    cuts: &[usize],
) -> Result<bool, WordError> {
    alphabet.check(w)?;
    let parts = split_at_cuts(w, cuts)?;
    Ok(parts_incompatible(alphabet, &parts))
}

fn parts_incompatible(alphabet: &Alphabet, parts: &[Word]) -> bool {
    parts.windows(2).all(|pair| match (pair[0].last(), pair[1].first()) {
        (Some(a), Some(b)) => incompatible(alphabet, a, b),
        _ => false,
    })
}

/// The finest factorisation of `w` cutting between every incompatible
/// adjacent pair.
pub fn finest_incompatible_parts(alphabet: &Alphabet, w: &Word) -> Vec<Word> {
    let letters = w.letters();
    if letters.is_empty() {
        return vec![w.clone()];
    }
    let mut parts = Vec::new();
    let mut start = 0;
    for i in 1..letters.len() {
        if incompatible(alphabet, letters[i - 1], letters[i]) {
            parts.push(w.slice(start..i));
            start = i;
        }
    }
    parts.push(w.slice(start..letters.len()));
    parts
}

/// All rearrangements of `parts` whose factorisation is again incompatible.
pub fn shuffle_orbit(alphabet: &Alphabet, parts: &[Word]) -> Result<BTreeSet<Word>, WordError> {
    for part in parts {
        alphabet.check(part)?;
        if part.is_empty() {
            return Err(WordError::EmptyPart);
        }
    }
    if parts.is_empty() {
        return Err(WordError::EmptyPart);
    }
    if !parts_incompatible(alphabet, parts) {
        return Err(WordError::NotIncompatible);
    }
    let mut sorted: Vec<Word> = parts.to_vec();
    sorted.sort();
    let mut used = vec![false; sorted.len()];
    let mut order = Vec::with_capacity(sorted.len());
    let mut out = BTreeSet::new();
    arrange(alphabet, &sorted, &mut used, &mut order, &mut out);
    Ok(out)
}

fn arrange(
    alphabet: &Alphabet,
    parts: &[Word],
    used: &mut [bool],
    order: &mut Vec<usize>,
    out: &mut BTreeSet<Word>,
) {
    if order.len() == parts.len() {
        let mut word = parts[order[0]].clone();
        for &i in &order[1..] {
            word = word.concat(&parts[i]);
        }
        out.insert(word);
        return;
    }
    for i in 0..parts.len() {
        if used[i] || (i > 0 && !used[i - 1] && parts[i] == parts[i - 1]) {
            continue;
        }
        if let Some(&prev) = order.last() {
            let a = parts[prev].last().expect("nonempty part");
            let b = parts[i].first().expect("nonempty part");
            if !incompatible(alphabet, a, b) {
                continue;
            }
        }
        used[i] = true;
        order.push(i);
        arrange(alphabet, parts, used, order, out);
        order.pop();
        used[i] = false;
    }
}

/// Closure of `{w}` under repeated shuffles of finest incompatible
/// factorisations, stopping once `cap` words are known.
pub fn shuffle_closure(alphabet: &Alphabet, w: &Word, cap: usize) -> BTreeSet<Word> {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(w.clone());
    queue.push_back(w.clone());
    while let Some(current) = queue.pop_front() {
        if current.is_empty() {
            continue;
        }
        let parts = finest_incompatible_parts(alphabet, &current);
        let orbit = shuffle_orbit(alphabet, &parts).expect("finest factorisation is incompatible");
        for next in orbit {
            if seen.len() >= cap {
                return seen;
            }
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    seen
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axiom {
    EmptyIsLeast,
    StrictlyHeavier,
    Factorisation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderReport {
    Holds { words: usize, pairs: usize },
    Counterexample { axiom: Axiom, w: Word, v: Word },
}

impl OrderReport {
    pub fn holds(&self) -> bool {
        matches!(self, OrderReport::Holds { .. })
    }
}

/// Brute-force check of the embedding-order axioms for the greedy order.
pub fn validate_embedding_order(alphabet: &Alphabet, max_weight: u64) -> OrderReport {
    validate_embedding_order_with(alphabet, max_weight, |w, v| {
        leq(alphabet, w, v).expect("same alphabet")
    })
}

/// Checks the axioms for an arbitrary candidate order on all words up to
/// `max_weight`. The factorisation axiom is evaluated against the alphabet's
/// letter-containment oracle by exhaustive search over factorisations.
pub fn validate_embedding_order_with<F>(alphabet: &Alphabet, max_weight: u64, order: F) -> OrderReport
where
    F: Fn(&Word, &Word) -> bool,
{
    let words = alphabet.words_up_to(max_weight);
    let empty = alphabet.empty_word();
    let mut pairs = 0;
    for w in &words {
        if !order(&empty, w) {
            return OrderReport::Counterexample {
                axiom: Axiom::EmptyIsLeast,
                w: empty,
                v: w.clone(),
            };
        }
    }
    for w in &words {
        for v in &words {
            pairs += 1;
            let le = order(w, v);
            if le && w != v && w.weight(alphabet) >= v.weight(alphabet) {
                return OrderReport::Counterexample {
                    axiom: Axiom::StrictlyHeavier,
                    w: w.clone(),
                    v: v.clone(),
                };
            }
            if le != factorises(alphabet, w.letters(), v.letters()) {
                return OrderReport::Counterexample {
                    axiom: Axiom::Factorisation,
                    w: w.clone(),
                    v: v.clone(),
                };
            }
        }
    }
    OrderReport::Holds {
        words: words.len(),
        pairs,
    }
}

/// `w = W_1..W_k` with `W_i` embedding into the i-th letter of `v`, by
/// dynamic programming over split points.
fn factorises(alphabet: &Alphabet, w: &[LetterId], v: &[LetterId]) -> bool {
    // reach[i]: some factorisation of w[..i] over the letters seen so far.
    let mut reach = vec![false; w.len() + 1];
    reach[0] = true;
    for &b in v {
        let mut next = vec![false; w.len() + 1];
        for start in (0..=w.len()).filter(|&s| reach[s]) {
            for end in start..=w.len() {
                if alphabet.segment_le_letter(&w[start..end], b) {
                    next[end] = true;
                }
            }
        }
        reach = next;
    }
    reach[w.len()]
}
