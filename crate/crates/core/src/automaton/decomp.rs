use std::ops::Range;

use serde::Serialize;

use super::{ClassError, ClassModel, Side, StateId};
use crate::sampler::count_disjoint_blocks;
use crate::word::{LetterId, Word};

/// A maximal run of loop letters `word[start..end]` of one state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoopBlock {
    pub start: usize,
    pub end: usize,
    pub state: StateId,
    pub letters: Vec<LetterId>,
}

impl LoopBlock {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transition {
    pub position: usize,
    pub letter: LetterId,
    pub from: StateId,
    pub to: StateId,
}

/// Loop blocks and transition letters of a word, both listed left to right.
/// Blocks and transitions alternate starting and ending with a block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub side: Side,
    pub blocks: Vec<LoopBlock>,
    pub transitions: Vec<Transition>,
}

impl Decomposition {
    pub fn reassemble(&self) -> Vec<LetterId> {
        let mut out = Vec::new();
        for (i, block) in self.blocks.iter().enumerate() {
            out.extend_from_slice(&block.letters);
            if let Some(t) = self.transitions.get(i) {
                out.push(t.letter);
            }
        }
        out
    }

    /// Transition path in reading order: left to right for prefix
    /// decompositions, right to left for suffix ones.
    pub fn path(&self) -> Vec<StateId> {
        let mut path: Vec<StateId> = self.blocks.iter().map(|b| b.state).collect();
        if self.side == Side::Suffix {
            path.reverse();
        }
        path
    }
}

/// One slice `word[start..end]` of an equitable partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Slice {
    pub start: usize,
    pub end: usize,
    pub weight: u64,
    /// No prefix or suffix transition happens inside the slice.
    pub free: bool,
}

/// The four conditions a free slice of a typical word satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// The slice sits in dominant loop blocks on both sides.
    DominantBlocks,
    /// `d_X + d_Y = D + 1` for the pieces left and right of the slice.
    DominantCount,
    /// The flanking prefix and suffix states match.
    Match,
    /// Every loop word of length `max(4, |L|)` has enough disjoint blocks in the slice.
    Abundance,
}

impl Condition {
    pub const ALL: [Condition; 4] = [
        Condition::DominantBlocks,
        Condition::DominantCount,
        Condition::Match,
        Condition::Abundance,
    ];

    pub fn number(self) -> usize {
        self as usize + 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SliceCheck {
    pub slice: usize,
    pub prefix_state: StateId,
    pub suffix_state: StateId,
    pub d_x: usize,
    pub d_y: usize,
    /// Indexed like [`Condition::ALL`].
    pub holds: [bool; 4],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TypicalityReport {
    pub typical: bool,
    pub threshold: u64,
    pub slices: Vec<Slice>,
    pub checks: Vec<SliceCheck>,
    /// Free slices where compatible dominant states with equal loop alphabets
    /// and `d_X + d_Y = D + 1` failed to match. Always empty for a correct model.
    pub tightness_violations: Vec<usize>,
}

impl TypicalityReport {
    /// First failing `(slice, condition)` pair.
    pub fn first_failure(&self) -> Option<(usize, Condition)> {
        self.checks.iter().find_map(|c| {
            Condition::ALL
                .iter()
                .zip(c.holds)
                .find(|(_, ok)| !ok)
                .map(|(cond, _)| (c.slice, *cond))
        })
    }

    pub fn fails(&self, condition: Condition) -> bool {
        self.checks.iter().any(|c| !c.holds[condition as usize])
    }
}

/// All words of length `len` over `letters`, in lexicographic order of positions.
fn words_over(letters: &[LetterId], len: usize) -> Vec<Vec<LetterId>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                letters.iter().map(move |&a| {
                    let mut v = w.clone();
                    v.push(a);
                    v
                })
            })
            .collect();
    }
    out
}

impl ClassModel {
    fn states_or_exit(&self, side: Side, w: &Word) -> Result<Vec<StateId>, ClassError> {
        self.alphabet.check(w)?;
        self.graph(side)
            .run(w.letters())
            .map_err(|i| ClassError::NotInClass { position: i + 1 })
    }

    pub fn prefix_decomposition(&self, w: &Word) -> Result<Decomposition, ClassError> {
        let states = self.states_or_exit(Side::Prefix, w)?;
        let letters = w.letters();
        let mut blocks = Vec::new();
        let mut transitions = Vec::new();
        let mut start = 0;
        for i in 0..letters.len() {
            if states[i + 1] != states[i] {
                blocks.push(LoopBlock {
                    start,
                    end: i,
                    state: states[i],
                    letters: letters[start..i].to_vec(),
                });
                transitions.push(Transition {
                    position: i,
                    letter: letters[i],
                    from: states[i],
                    to: states[i + 1],
                });
                start = i + 1;
            }
        }
        blocks.push(LoopBlock {
            start,
            end: letters.len(),
            state: states[letters.len()],
            letters: letters[start..].to_vec(),
        });
        Ok(Decomposition {
            side: Side::Prefix,
            blocks,
            transitions,
        })
    }

    pub fn suffix_decomposition(&self, w: &Word) -> Result<Decomposition, ClassError> {
        let states = self.states_or_exit(Side::Suffix, w)?;
        let letters = w.letters();
        let mut blocks = Vec::new();
        let mut transitions = Vec::new();
        let mut start = 0;
        for i in 0..letters.len() {
            // states[i] is the state of letters[i..].
            if states[i] != states[i + 1] {
                blocks.push(LoopBlock {
                    start,
                    end: i,
                    state: states[i],
                    letters: letters[start..i].to_vec(),
                });
                transitions.push(Transition {
                    position: i,
                    letter: letters[i],
                    from: states[i + 1],
                    to: states[i],
                });
                start = i + 1;
            }
        }
        blocks.push(LoopBlock {
            start,
            end: letters.len(),
            state: states[letters.len()],
            letters: letters[start..].to_vec(),
        });
        Ok(Decomposition {
            side: Side::Suffix,
            blocks,
            transitions,
        })
    }

    pub fn block_weight(&self, block: &LoopBlock) -> u64 {
        self.alphabet.weight_of(&block.letters)
    }

    pub fn is_dominant_block(&self, d: &Decomposition, block: &LoopBlock) -> bool {
        self.graph(d.side).is_dominant(block.state)
    }

    /// Number of blocks whose state is dominant (empty blocks included).
    pub fn dominant_blocks(&self, d: &Decomposition) -> usize {
        d.blocks.iter().filter(|b| self.is_dominant_block(d, b)).count()
    }

    /// Total weight of the loop blocks of non-dominant states.
    pub fn non_dominant_weight(&self, d: &Decomposition) -> u64 {
        d.blocks
            .iter()
            .filter(|b| !self.is_dominant_block(d, b))
            .map(|b| self.block_weight(b))
            .sum()
    }

    /// Smallest number of letters a block needs to count as large: `2KQ + 1`.
    pub fn large_threshold(&self) -> usize {
        2 * self.k() as usize * self.q() + 1
    }

    pub fn is_large(&self, block: &LoopBlock) -> bool {
        block.len() >= self.large_threshold()
    }

    /// Positions of letters with at least `KQ` block letters on each side.
    pub fn central_range(&self, block: &LoopBlock) -> Range<usize> {
        let margin = self.k() as usize * self.q();
        let lo = block.start + margin;
        let hi = block.end.saturating_sub(margin);
        if lo < hi {
            lo..hi
        } else {
            lo..lo
        }
    }

    /// Whether every dominant block of `d` is large.
    pub fn dominant_blocks_large(&self, d: &Decomposition) -> bool {
        d.blocks
            .iter()
            .filter(|b| self.is_dominant_block(d, b))
            .all(|b| self.is_large(b))
    }

    /// When `XY` is in the class, the dominant block counts satisfy
    /// `d_X + d_Y <= D + 1`. Returns `None` if `XY` leaves the class.
    pub fn xy_dominance(&self, x: &Word, y: &Word) -> Result<Option<bool>, ClassError> {
        if !self.contains_word(&x.concat(y))? {
            return Ok(None);
        }
        let dx = self.dominant_blocks(&self.prefix_decomposition(x)?);
        let dy = self.dominant_blocks(&self.suffix_decomposition(y)?);
        Ok(Some(dx + dy <= self.d() + 1))
    }

    /// Slices `W_1..W_Q`: `W_1..W_j` is the shortest prefix of weight at least `jn/Q`.
    pub fn equitable_partition(&self, w: &Word) -> Result<Vec<Slice>, ClassError> {
        let pstates = self.states_or_exit(Side::Prefix, w)?;
        let sstates = self.states_or_exit(Side::Suffix, w)?;
        let n = w.weight(&self.alphabet);
        let q = self.q();
        if n < q as u64 {
            return Err(ClassError::TooShort { n, q });
        }
        let letters = w.letters();
        let mut cumulative = Vec::with_capacity(letters.len() + 1);
        cumulative.push(0u64);
        for &a in letters {
            cumulative.push(cumulative.last().unwrap() + self.alphabet.weight(a) as u64);
        }
        let transition_at = |i: usize| pstates[i] != pstates[i + 1] || sstates[i] != sstates[i + 1];
        let mut slices = Vec::with_capacity(q);
        let mut start = 0;
        for j in 1..=q as u64 {
            let end = (start..=letters.len())
                .find(|&i| cumulative[i] * q as u64 >= j * n)
                .expect("whole word reaches weight n");
            slices.push(Slice {
                start,
                end,
                weight: cumulative[end] - cumulative[start],
                free: !(start..end).any(transition_at),
            });
            start = end;
        }
        assert!(
            slices.windows(3).any(|s| s.iter().all(|x| x.free)),
            "no three consecutive free slices"
        );
        Ok(slices)
    }

    /// Evaluates the four typicality conditions on every free slice.
    /// `threshold` defaults to `ceil(sqrt(n))`.
    pub fn is_typical(&self, w: &Word, threshold: Option<u64>) -> Result<TypicalityReport, ClassError> {
        let slices = self.equitable_partition(w)?;
        let n = w.weight(&self.alphabet);
        let threshold = threshold.unwrap_or_else(|| (n as f64).sqrt().ceil() as u64);
        let pstates = self.prefix.run(w.letters()).expect("member");
        let sstates = self.suffix.run(w.letters()).expect("member");
        let big_d = self.d();

        let mut checks = Vec::new();
        let mut tightness_violations = Vec::new();
        for (j, slice) in slices.iter().enumerate().filter(|(_, s)| s.free) {
            let p = pstates[slice.start];
            let s = sstates[slice.end];
            let d_x = self.prefix.dominant_count(&w.letters()[..slice.start]).expect("member");
            let d_y = self.suffix.dominant_count(&w.letters()[slice.end..]).expect("member");

            let dominant = self.prefix.is_dominant(p) && self.suffix.is_dominant(s);
            let count_ok = d_x + d_y == big_d + 1;
            let matched = self.matches(p, s);
            let loops = self.prefix.loop_alphabet(p);
            let abundance = self.abundant(&w.letters()[slice.start..slice.end], loops, threshold);

            if count_ok
                && self.compatible(p, s)
                && self.prefix.is_dominant(p)
                && loops == self.suffix.loop_alphabet(s)
                && !matched
            {
                tightness_violations.push(j);
            }
            checks.push(SliceCheck {
                slice: j,
                prefix_state: p,
                suffix_state: s,
                d_x,
                d_y,
                holds: [dominant, count_ok, matched, abundance],
            });
        }
        let typical = checks.iter().all(|c| c.holds.iter().all(|&h| h));
        Ok(TypicalityReport {
            typical,
            threshold,
            slices,
            checks,
            tightness_violations,
        })
    }

    fn abundant(&self, slice: &[LetterId], loops: &[LetterId], threshold: u64) -> bool {
        let len = loops.len().max(4);
        if (slice.len() as u64) < threshold * len as u64 {
            return loops.is_empty() || threshold == 0;
        }
        let slice = self.alphabet.word_unchecked(slice.to_vec());
        words_over(loops, len).into_iter().all(|p| {
            let p = self.alphabet.word_unchecked(p);
            count_disjoint_blocks(&slice, &p).expect("nonempty pattern") as u64 >= threshold
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::{abcd, layered, poly};
    use super::*;

    #[test]
    fn prefix_decomposition_of_fixture_word() {
        let m = poly();
        let w = m.alphabet().parse_word("1.1.21.1").unwrap();
        let d = m.prefix_decomposition(&w).unwrap();
        assert_eq!(d.blocks.len(), 2);
        assert_eq!(d.blocks[0].letters, vec![0, 0]);
        assert_eq!(d.blocks[1].letters, vec![0]);
        assert_eq!(d.transitions[0].letter, 1);
        assert_eq!(d.transitions[0].position, 2);
        assert_eq!(d.path(), vec![0, 1]);
        assert_eq!(d.reassemble(), w.letters());
    }

    #[test]
    fn loop_only_word_is_one_block() {
        let m = layered();
        let w = m.alphabet().parse_word("21.1.21.21").unwrap();
        let d = m.prefix_decomposition(&w).unwrap();
        assert_eq!(d.blocks.len(), 1);
        assert!(d.transitions.is_empty());
    }

    #[test]
    fn exit_position_is_reported() {
        let m = poly();
        let w = m.alphabet().parse_word("21.1.21").unwrap();
        assert_eq!(m.prefix_decomposition(&w), Err(ClassError::NotInClass { position: 3 }));
    }

    #[test]
    fn reassembly_and_loop_membership() {
        for m in [poly(), abcd(), layered()] {
            for w in m.alphabet().words_up_to(8) {
                if !m.contains_word(&w).unwrap() {
                    continue;
                }
                for d in [m.prefix_decomposition(&w).unwrap(), m.suffix_decomposition(&w).unwrap()] {
                    assert_eq!(d.reassemble(), w.letters());
                    let g = m.graph(d.side);
                    for b in &d.blocks {
                        assert!(b.letters.iter().all(|a| g.loop_alphabet(b.state).contains(a)));
                    }
                    assert_eq!(d.path()[0], 0);
                }
            }
        }
    }

    #[test]
    fn suffix_decomposition_reads_right_to_left() {
        let m = poly();
        let w = m.alphabet().parse_word("1.21.1.1").unwrap();
        let d = m.suffix_decomposition(&w).unwrap();
        assert_eq!(d.blocks.len(), 2);
        assert_eq!(d.blocks[0].letters, vec![0]);
        assert_eq!(d.blocks[1].letters, vec![0, 0]);
        assert_eq!(d.blocks[1].state, 0);
        assert_eq!(d.path(), vec![0, 1]);
    }

    #[test]
    fn equitable_partition_toy() {
        let m = layered();
        let w = m.alphabet().parse_word("1.21.1.1.21.21.1.1.1").unwrap();
        let slices = m.equitable_partition(&w).unwrap();
        assert_eq!(slices.len(), 6);
        assert_eq!(slices.last().unwrap().end, w.len());
        for s in &slices {
            assert!(s.weight >= 1 && s.weight <= 3, "{s:?}");
            assert!(s.free);
        }
        let short = m.alphabet().parse_word("1.1").unwrap();
        assert_eq!(m.equitable_partition(&short), Err(ClassError::TooShort { n: 2, q: 6 }));
    }

    #[test]
    fn partition_weight_bounds() {
        let m = poly();
        let k = m.k() as f64;
        for a in 0..40 {
            let text: Vec<&str> = std::iter::repeat_n("1", a).chain(["21"]).chain(std::iter::repeat_n("1", 40 - a)).collect();
            let w = m.alphabet().parse_word(&text.join(".")).unwrap();
            let n = w.weight(m.alphabet()) as f64;
            let q = m.q() as f64;
            for s in m.equitable_partition(&w).unwrap() {
                assert!((s.weight as f64) > n / q - k && (s.weight as f64) < n / q + k);
            }
        }
    }

    #[test]
    fn typicality_reduces_to_abundance_when_sum_closed() {
        let m = layered();
        let text = ["1", "1", "21", "1", "21", "21", "1", "21", "1", "1", "1", "21"].repeat(12).join(".");
        let w = m.alphabet().parse_word(&text).unwrap();
        let r = m.is_typical(&w, Some(1)).unwrap();
        for c in &r.checks {
            assert!(c.holds[..3].iter().all(|&h| h));
        }
        assert!(r.tightness_violations.is_empty());
        let strict = m.is_typical(&w, None).unwrap();
        assert_eq!(strict.first_failure().map(|f| f.1), Some(Condition::Abundance));
    }

    #[test]
    fn unmatched_states_fail_condition_three() {
        let m = abcd();
        // Enough a's after "d.b" keep the prefix state at (1,2) through a free slice,
        // and the trailing c gives suffix state (1,1) on the right.
        let mut text = vec!["d", "b"];
        text.extend(std::iter::repeat_n("a", 120));
        text.push("c");
        let w = m.alphabet().parse_word(&text.join(".")).unwrap();
        let r = m.is_typical(&w, Some(0)).unwrap();
        let p2 = m.prefix().find(&[1, 2]).unwrap();
        let s = m.suffix().find(&[1, 1]).unwrap();
        assert!(r
            .checks
            .iter()
            .any(|c| c.prefix_state == p2 && c.suffix_state == s && !c.holds[Condition::Match as usize]));
        assert!(!r.typical);
        assert!(r.fails(Condition::Match));
    }

    #[test]
    fn helper_predicates() {
        let m = poly();
        assert_eq!(m.large_threshold(), 49);
        let text: Vec<&str> = std::iter::repeat_n("1", 60).chain(["21"]).chain(std::iter::repeat_n("1", 60)).collect();
        let w = m.alphabet().parse_word(&text.join(".")).unwrap();
        let d = m.prefix_decomposition(&w).unwrap();
        assert_eq!(m.dominant_blocks(&d), 2);
        assert_eq!(m.non_dominant_weight(&d), 0);
        assert!(m.dominant_blocks_large(&d));
        assert_eq!(m.central_range(&d.blocks[0]), 24..36);

        let x = m.alphabet().parse_word("1.21.1").unwrap();
        let y = m.alphabet().parse_word("1.1").unwrap();
        assert_eq!(m.xy_dominance(&x, &y).unwrap(), Some(true));
        assert_eq!(m.xy_dominance(&x, &x).unwrap(), None);
    }

    #[test]
    fn xy_dominance_exhaustive() {
        for m in [poly(), abcd()] {
            let words: Vec<Word> = m
                .alphabet()
                .words_up_to(5)
                .into_iter()
                .filter(|w| m.contains_word(w).unwrap())
                .collect();
            for x in &words {
                for y in &words {
                    assert_ne!(m.xy_dominance(x, y).unwrap(), Some(false));
                }
            }
        }
    }
}
