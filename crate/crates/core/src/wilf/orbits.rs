use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;

use super::WilfError;
use crate::automaton::{ClassModel, Decomposition, LoopBlock, Side};
use crate::perm::{Permutation, Symmetry};
use crate::word::{shuffle_closure, LetterId, Word};

/// Words reachable by shuffles are capped at this many per pattern.
const SHUFFLE_CAP: usize = 10_000;

/// Symmetries mapping the basis onto itself.
pub fn class_symmetries(model: &ClassModel) -> Vec<Symmetry> {
    let Some(basis) = model.basis() else {
        return vec![Symmetry::IDENTITY];
    };
    let set: BTreeSet<&Permutation> = basis.iter().collect();
    Symmetry::all()
        .into_iter()
        .filter(|s| {
            let image: BTreeSet<Permutation> = basis.iter().map(|b| s.apply(b)).collect();
            image.len() == set.len() && image.iter().all(|b| set.contains(b))
        })
        .collect()
}

pub fn symmetry_orbit(model: &ClassModel, pattern: &Permutation) -> Result<BTreeSet<Permutation>, WilfError> {
    model.word_of(pattern)?;
    Ok(class_symmetries(model).into_iter().map(|s| s.apply(pattern)).collect())
}

/// Rearrangements of incompatible factorisations, repeated to closure.
pub fn shuffle_equivalents(model: &ClassModel, pattern: &Permutation) -> Result<BTreeSet<Permutation>, WilfError> {
    if !model.is_sum_closed() {
        return Err(WilfError::NotSumClosed);
    }
    let w = model.word_of(pattern)?;
    let alphabet = model.alphabet();
    Ok(shuffle_closure(alphabet, &w, SHUFFLE_CAP)
        .iter()
        .map(|v| alphabet.permutation_of(v.letters()).expect("permutation alphabet"))
        .collect())
}

/// Every dominant loop alphabet is the single weight-1 letter, and D > 1.
pub fn is_unbounded_polynomial(model: &ClassModel) -> bool {
    let unit = |g: &crate::automaton::StateGraph| {
        (0..g.len()).filter(|&s| g.is_dominant(s)).all(|s| {
            let l = g.loop_alphabet(s);
            l.len() == 1 && model.alphabet().weight(l[0]) == 1
        })
    };
    model.d() > 1 && unit(model.prefix()) && unit(model.suffix())
}

fn unit_letter(model: &ClassModel) -> Option<LetterId> {
    (0..model.alphabet().len()).find(|&a| model.alphabet().weight(a) == 1)
}

/// Keeps the transition letters and path of `w`, redistributing weight-1
/// letters among its dominant prefix loop blocks (empty ones included).
/// Only meaningful for unbounded polynomial classes; not backed by a proof
/// at small sizes.
pub fn block_shift_orbit(model: &ClassModel, w: &Word) -> Result<BTreeSet<Word>, WilfError> {
    if !is_unbounded_polynomial(model) {
        return Err(WilfError::NotPolynomial);
    }
    let d = model.prefix_decomposition(w)?;
    let path = d.path();
    let letters: Vec<LetterId> = d.transitions.iter().map(|t| t.letter).collect();
    let one = unit_letter(model).expect("polynomial class has a unit letter");
    let dominant: Vec<usize> = (0..d.blocks.len())
        .filter(|&i| model.prefix().is_dominant(d.blocks[i].state))
        .collect();
    let rebuild = |sizes: &[usize]| -> Word {
        let mut out = Vec::new();
        let mut next_dominant = 0;
        for (i, block) in d.blocks.iter().enumerate() {
            if dominant.get(next_dominant) == Some(&i) {
                out.extend(std::iter::repeat_n(one, sizes[next_dominant]));
                next_dominant += 1;
            } else {
                out.extend_from_slice(&block.letters);
            }
            if let Some(t) = d.transitions.get(i) {
                out.push(t.letter);
            }
        }
        model.alphabet().word(out).expect("own alphabet")
    };
    let start: Vec<usize> = dominant.iter().map(|&i| d.blocks[i].len()).collect();
    if dominant.iter().any(|&i| d.blocks[i].letters.iter().any(|&a| a != one)) {
        return Ok(BTreeSet::from([w.clone()]));
    }
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    let mut out = BTreeSet::new();
    while let Some(sizes) = queue.pop_front() {
        out.insert(rebuild(&sizes));
        for from in 0..sizes.len() {
            if sizes[from] == 0 {
                continue;
            }
            for to in 0..sizes.len() {
                if to == from {
                    continue;
                }
                let mut next = sizes.clone();
                next[from] -= 1;
                next[to] += 1;
                if seen.contains(&next) {
                    continue;
                }
                let candidate = rebuild(&next);
                let keeps_path = model.prefix_decomposition(&candidate).ok().is_some_and(|e| {
                    e.path() == path && e.transitions.iter().map(|t| t.letter).collect::<Vec<_>>() == letters
                });
                if keeps_path {
                    seen.insert(next.clone());
                    queue.push_back(next);
                }
            }
        }
    }
    Ok(out)
}

/// Shuffles each dominant prefix loop block of `w` on its own, keeping the
/// rest of the word. Results that leave the class or change the transition
/// path are dropped. A heuristic for classes that are not sum closed.
pub fn loop_block_shuffles(model: &ClassModel, w: &Word) -> Result<BTreeSet<Word>, WilfError> {
    let d = model.prefix_decomposition(w)?;
    let path = d.path();
    let alphabet = model.alphabet();
    let mut out = BTreeSet::from([w.clone()]);
    for (i, block) in d.blocks.iter().enumerate() {
        if block.is_empty() || !model.prefix().is_dominant(block.state) {
            continue;
        }
        let block_word = alphabet.word(block.letters.clone())?;
        for shuffled in shuffle_closure(alphabet, &block_word, SHUFFLE_CAP) {
            let mut letters = w.letters()[..block.start].to_vec();
            letters.extend_from_slice(shuffled.letters());
            letters.extend_from_slice(&w.letters()[block.end..]);
            let candidate = alphabet.word(letters)?;
            let same_path = model
                .prefix_decomposition(&candidate)
                .ok()
                .is_some_and(|e| e.path() == path && e.blocks.len() == d.blocks.len() && e.blocks[i].start == block.start);
            if same_path {
                out.insert(candidate);
            }
        }
    }
    Ok(out)
}

/// Which hypothesis of the polynomial mass move failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveFailure {
    NotPolynomial,
    NotInClass,
    NotTypical { slice: usize, condition: usize },
    BlockNotLarge,
    BRightmost,
    KOutOfRange { k: usize, m: usize },
    NoTargetBlock,
}

impl fmt::Display for MoveFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MoveFailure::NotPolynomial => write!(f, "class is not an unbounded polynomial class"),
            MoveFailure::NotInClass => write!(f, "word is not in the class"),
            MoveFailure::NotTypical { slice, condition } => {
                write!(f, "not-typical: slice {slice} fails condition {condition}")
            }
            MoveFailure::BlockNotLarge => write!(f, "block-not-large: a dominant loop block is shorter than 2KQ+1"),
            MoveFailure::BRightmost => write!(f, "B-rightmost: no source block with a target block beyond it"),
            MoveFailure::KOutOfRange { k, m } => write!(f, "k out of range: k = {k}, central piece has {m} letters"),
            MoveFailure::NoTargetBlock => write!(f, "no dominant block with central letters on the far side"),
        }
    }
}

/// Options for [`move_poly`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MoveOptions {
    /// Abundance threshold for the typicality check; `None` means `ceil(sqrt(n))`.
    pub threshold: Option<u64>,
}

/// Result of a successful mass move.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveOutcome {
    pub word: Word,
    pub side: Side,
    /// Letters of the source block `B`.
    pub source: (usize, usize),
    /// Central letters of the target block `B'`.
    pub target: (usize, usize),
}

fn free_triple_inside(slices: &[crate::automaton::Slice], block: &LoopBlock) -> bool {
    slices.windows(3).any(|t| {
        t.iter().all(|s| s.free) && t[0].start >= block.start && t[2].end <= block.end && t[0].start < t[2].end
    })
}

/// Moves `k` weight-1 letters from the central piece of a dominant loop
/// block `B` into the central piece of a later dominant block `B'`, after
/// checking every hypothesis that makes the result Wilf-equivalent.
pub fn move_poly(model: &ClassModel, w: &Word, k: usize, options: MoveOptions) -> Result<MoveOutcome, WilfError> {
    let fail = |f| Err(WilfError::Move(f));
    if !is_unbounded_polynomial(model) {
        return fail(MoveFailure::NotPolynomial);
    }
    if !model.contains_word(w)? {
        return fail(MoveFailure::NotInClass);
    }
    if k == 0 {
        return Ok(MoveOutcome {
            word: w.clone(),
            side: Side::Prefix,
            source: (0, 0),
            target: (0, 0),
        });
    }
    let report = model.is_typical(w, options.threshold)?;
    if let Some((slice, condition)) = report.first_failure() {
        return fail(MoveFailure::NotTypical {
            slice,
            condition: condition.number(),
        });
    }
    let pd = model.prefix_decomposition(w)?;
    let sd = model.suffix_decomposition(w)?;
    if !model.dominant_blocks_large(&pd) || !model.dominant_blocks_large(&sd) {
        return fail(MoveFailure::BlockNotLarge);
    }
    let margin = model.large_threshold();
    let dominant = |d: &Decomposition| -> Vec<usize> {
        (0..d.blocks.len())
            .filter(|&i| model.is_dominant_block(d, &d.blocks[i]))
            .collect()
    };

    // Prefix side: B is not the rightmost dominant prefix block.
    let pdom = dominant(&pd);
    let source = pdom
        .iter()
        .copied()
        .find(|&i| Some(&i) != pdom.last() && free_triple_inside(&report.slices, &pd.blocks[i]));
    if let Some(i) = source {
        let b = &pd.blocks[i];
        let c = b.start + margin..b.end - margin;
        if k > c.len() {
            return fail(MoveFailure::KOutOfRange { k, m: c.len() });
        }
        let y = w.slice(b.end - margin..w.len());
        let yd = model.suffix_decomposition(&y)?;
        let offset = b.end - margin;
        let target = yd
            .blocks
            .iter()
            .filter(|blk| model.is_dominant_block(&yd, blk) && blk.start + offset >= b.end)
            .map(|blk| model.central_range(blk))
            .find(|r| !r.is_empty());
        let Some(t) = target else {
            return fail(MoveFailure::NoTargetBlock);
        };
        let (ts, te) = (t.start + offset, t.end + offset);
        let letters = w.letters();
        let mut out = letters[..c.start].to_vec();
        out.extend_from_slice(&letters[c.start + k..ts]);
        out.extend_from_slice(&letters[c.start..c.start + k]);
        out.extend_from_slice(&letters[ts..]);
        return finish(model, out, Side::Prefix, (b.start, b.end), (ts - k, te - k));
    }

    // Suffix side: B is not the leftmost dominant suffix block.
    let sdom = dominant(&sd);
    let source = sdom
        .iter()
        .copied()
        .find(|&i| Some(&i) != sdom.first() && free_triple_inside(&report.slices, &sd.blocks[i]));
    let Some(i) = source else {
        return fail(MoveFailure::BRightmost);
    };
    let b = &sd.blocks[i];
    let c = b.start + margin..b.end - margin;
    if k > c.len() {
        return fail(MoveFailure::KOutOfRange { k, m: c.len() });
    }
    let x = w.slice(0..b.start + margin);
    let xd = model.prefix_decomposition(&x)?;
    let target = xd
        .blocks
        .iter()
        .rev()
        .filter(|blk| model.is_dominant_block(&xd, blk) && blk.end <= b.start)
        .map(|blk| model.central_range(blk))
        .find(|r| !r.is_empty());
    let Some(t) = target else {
        return fail(MoveFailure::NoTargetBlock);
    };
    let letters = w.letters();
    let mut out = letters[..t.end].to_vec();
    out.extend_from_slice(&letters[c.end - k..c.end]);
    out.extend_from_slice(&letters[t.end..c.end - k]);
    out.extend_from_slice(&letters[c.end..]);
    finish(model, out, Side::Suffix, (b.start, b.end), (t.start, t.end + k))
}

fn finish(model: &ClassModel, letters: Vec<LetterId>, side: Side, source: (usize, usize), target: (usize, usize)) -> Result<MoveOutcome, WilfError> {
    let word = model.alphabet().word(letters)?;
    assert!(model.contains_word(&word)?, "moved word left the class");
    Ok(MoveOutcome {
        word,
        side,
        source,
        target,
    })
}
