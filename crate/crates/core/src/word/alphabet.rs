use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use super::WordError;
use crate::perm::{contains, Permutation};

/// Index of a letter inside its [`Alphabet`].
pub type LetterId = usize;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Payload {
    Perm(Permutation),
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Letter {
    payload: Payload,
    weight: u32,
}

impl Letter {
    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn permutation(&self) -> Option<&Permutation> {
        match &self.payload {
            Payload::Perm(p) => Some(p),
            Payload::Named(_) => None,
        }
    }

    pub fn label(&self) -> String {
        match &self.payload {
            Payload::Perm(p) => p.to_string(),
            Payload::Named(name) => name.clone(),
        }
    }
}

/// Which letter-containment oracle the embedding order is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderMode {
    /// Letters are sum-indecomposable permutations and a segment embeds into a
    /// letter when its direct sum is a pattern of the letter.
    Permutation,
    /// Letters form an antichain; only `ε` and the letter itself embed into it.
    Subword,
}

/// A finite weighted alphabet. Letters are kept sorted by weight, then by
/// payload, so letter ids are canonical for a given letter set.
#[derive(Debug, Clone)]
pub struct Alphabet {
    letters: Vec<Letter>,
    mode: OrderMode,
    id: u64,
    by_label: HashMap<String, LetterId>,
    /// `letter_le[a][b]`: letter `a` embeds into letter `b`.
    letter_le: Vec<Vec<bool>>,
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && self.mode == other.mode && self.letters == other.letters
    }
}

impl Eq for Alphabet {}

impl Alphabet {
    /// Alphabet of sum-indecomposable permutations under permutation containment.
    pub fn permutations<I>(perms: I) -> Result<Self, WordError>
    where
        I: IntoIterator<Item = Permutation>,
    {
        let mut letters = Vec::new();
        for perm in perms {
            if perm.is_empty() || !perm.is_sum_indecomposable().unwrap_or(false) {
                return Err(WordError::NotIndecomposable(perm.to_string()));
            }
            letters.push(Letter {
                weight: perm.len() as u32,
                payload: Payload::Perm(perm),
            });
        }
        Self::build(letters, OrderMode::Permutation)
    }

    /// Alphabet of named letters under the subword order.
    pub fn named<I, S>(letters: I) -> Result<Self, WordError>
    where
        I: IntoIterator<Item = (S, u32)>,
        S: Into<String>,
    {
        let mut out = Vec::new();
        for (name, weight) in letters {
            let name = name.into();
            if weight == 0 {
                return Err(WordError::ZeroWeight(name));
            }
            if name.is_empty() || name.contains('.') || name == "ε" {
                return Err(WordError::BadLetterName(name));
            }
            out.push(Letter {
                payload: Payload::Named(name),
                weight,
            });
        }
        Self::build(out, OrderMode::Subword)
    }

    fn build(mut letters: Vec<Letter>, mode: OrderMode) -> Result<Self, WordError> {
        letters.sort_by(|a, b| (a.weight, &a.payload).cmp(&(b.weight, &b.payload)));
        if let Some(w) = letters.windows(2).find(|w| w[0] == w[1]) {
            return Err(WordError::DuplicateLetter(w[0].label()));
        }
        let mut hasher = DefaultHasher::new();
        mode.hash(&mut hasher);
        letters.hash(&mut hasher);
        let id = hasher.finish();
        let by_label = letters
            .iter()
            .enumerate()
            .map(|(i, l)| (l.label(), i))
            .collect();
        let letter_le = letters
            .iter()
            .enumerate()
            .map(|(a, la)| {
                letters
                    .iter()
                    .enumerate()
                    .map(|(b, lb)| match (&la.payload, &lb.payload) {
                        (Payload::Perm(pa), Payload::Perm(pb)) => contains(pa, pb),
                        _ => a == b,
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            letters,
            mode,
            id,
            by_label,
            letter_le,
        })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn mode(&self) -> OrderMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn letter(&self, id: LetterId) -> &Letter {
        &self.letters[id]
    }

    pub fn weight(&self, id: LetterId) -> u32 {
        self.letters[id].weight
    }

    pub fn max_weight(&self) -> u32 {
        self.letters.iter().map(|l| l.weight).max().unwrap_or(0)
    }

    pub fn lookup(&self, label: &str) -> Option<LetterId> {
        self.by_label.get(label).copied()
    }

    pub fn letter_le(&self, a: LetterId, b: LetterId) -> bool {
        self.letter_le[a][b]
    }

    pub fn word(&self, letters: Vec<LetterId>) -> Result<Word, WordError> {
        if let Some(&bad) = letters.iter().find(|&&l| l >= self.len()) {
            return Err(WordError::UnknownLetter(bad.to_string()));
        }
        Ok(Word {
            alphabet: self.id,
            letters,
        })
    }

    pub(crate) fn word_unchecked(&self, letters: Vec<LetterId>) -> Word {
        Word {
            alphabet: self.id,
            letters,
        }
    }

    pub fn empty_word(&self) -> Word {
        self.word_unchecked(Vec::new())
    }

    pub fn single(&self, letter: LetterId) -> Word {
        self.word_unchecked(vec![letter])
    }

    /// Parses `"21.1.21"` (or names for named alphabets). `""` and `"ε"` are empty.
    pub fn parse_word(&self, text: &str) -> Result<Word, WordError> {
        let text = text.trim();
        if text.is_empty() || text == "ε" {
            return Ok(self.empty_word());
        }
        let letters = text
            .split('.')
            .map(|label| {
                self.lookup(label.trim())
                    .ok_or_else(|| WordError::UnknownLetter(label.to_string()))
            })
            .collect::<Result<_, _>>()?;
        Ok(self.word_unchecked(letters))
    }

    pub fn format_word(&self, word: &Word) -> String {
        if word.is_empty() {
            return "ε".to_string();
        }
        word.letters
            .iter()
            .map(|&l| self.letters[l].label())
            .collect::<Vec<_>>()
            .join(".")
    }

    /// The word of a permutation's sum decomposition.
    pub fn word_of_permutation(&self, perm: &Permutation) -> Result<Word, WordError> {
        if self.mode != OrderMode::Permutation {
            return Err(WordError::NotPermutationAlphabet);
        }
        let letters = perm
            .sum_decompose()
            .into_iter()
            .map(|part| {
                self.lookup(&part.to_string())
                    .ok_or_else(|| WordError::UnknownLetter(part.to_string()))
            })
            .collect::<Result<_, _>>()?;
        Ok(self.word_unchecked(letters))
    }

    /// `σ(W)`, the direct sum of the letters of `W`.
    pub fn permutation_of(&self, letters: &[LetterId]) -> Result<Permutation, WordError> {
        let mut out = Permutation::empty();
        for &l in letters {
            match &self.letters[l].payload {
                Payload::Perm(p) => out = out.sum(p),
                Payload::Named(_) => return Err(WordError::NotPermutationAlphabet),
            }
        }
        Ok(out)
    }

    pub fn weight_of(&self, letters: &[LetterId]) -> u64 {
        letters.iter().map(|&l| self.letters[l].weight as u64).sum()
    }

    pub(crate) fn check(&self, word: &Word) -> Result<(), WordError> {
        if word.alphabet == self.id {
            Ok(())
        } else {
            Err(WordError::MixedAlphabets)
        }
    }

    /// Letter-containment oracle: does the segment embed into the single letter `b`?
    pub fn segment_le_letter(&self, segment: &[LetterId], b: LetterId) -> bool {
        match segment {
            [] => true,
            [a] => self.letter_le[*a][b],
            _ => match self.mode {
                OrderMode::Subword => false,
                OrderMode::Permutation => {
                    if self.weight_of(segment) > self.letters[b].weight as u64 {
                        return false;
                    }
                    let sum = self
                        .permutation_of(segment)
                        .expect("permutation alphabet");
                    match &self.letters[b].payload {
                        Payload::Perm(pb) => contains(&sum, pb),
                        Payload::Named(_) => unreachable!(),
                    }
                }
            },
        }
    }

    /// Largest `m >= start` with `word[start..m]` embedding into letter `b`.
    pub fn extend_forward(&self, word: &[LetterId], start: usize, b: LetterId) -> usize {
        let mut m = start;
        while m < word.len() && self.segment_le_letter(&word[start..m + 1], b) {
            m += 1;
        }
        m
    }

    /// Smallest `m <= end` with `word[m..end]` embedding into letter `b`.
    pub fn extend_backward(&self, word: &[LetterId], end: usize, b: LetterId) -> usize {
        let mut m = end;
        while m > 0 && self.segment_le_letter(&word[m - 1..end], b) {
            m -= 1;
        }
        m
    }

    /// All words of weight exactly `n`, in lexicographic letter-id order.
    pub fn words_of_weight(&self, n: u64) -> Vec<Word> {
        let mut out = Vec::new();
        let mut current = Vec::new();
        self.fill_words(n, &mut current, &mut out);
        out
    }

    fn fill_words(&self, remaining: u64, current: &mut Vec<LetterId>, out: &mut Vec<Word>) {
        if remaining == 0 {
            out.push(self.word_unchecked(current.clone()));
            return;
        }
        for (id, letter) in self.letters.iter().enumerate() {
            if letter.weight as u64 <= remaining {
                current.push(id);
                self.fill_words(remaining - letter.weight as u64, current, out);
                current.pop();
            }
        }
    }

    pub fn words_up_to(&self, max_weight: u64) -> Vec<Word> {
        (0..=max_weight)
            .flat_map(|n| self.words_of_weight(n))
            .collect()
    }
}

/// A finite sequence of letters of one alphabet.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    alphabet: u64,
    letters: Vec<LetterId>,
}

impl Word {
    pub fn letters(&self) -> &[LetterId] {
        &self.letters
    }

    pub fn into_letters(self) -> Vec<LetterId> {
        self.letters
    }

    pub fn alphabet_id(&self) -> u64 {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn first(&self) -> Option<LetterId> {
        self.letters.first().copied()
    }

    pub fn last(&self) -> Option<LetterId> {
        self.letters.last().copied()
    }

    pub fn weight(&self, alphabet: &Alphabet) -> u64 {
        alphabet.weight_of(&self.letters)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Word {
            alphabet: self.alphabet,
            letters,
        }
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> Word {
        Word {
            alphabet: self.alphabet,
            letters: self.letters[range].to_vec(),
        }
    }

    /// Same word with the last letter dropped (`ε` stays `ε`).
    pub fn without_last(&self) -> Word {
        let mut letters = self.letters.clone();
        letters.pop();
        Word {
            alphabet: self.alphabet,
            letters,
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.letters.iter().map(usize::to_string).collect();
        write!(f, "[{}]", ids.join(","))
    }
}
