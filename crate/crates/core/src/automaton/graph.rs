use std::collections::{BTreeSet, HashMap, VecDeque};

use log::warn;
use serde::Serialize;

use super::growth::{growth, Growth};
use super::ClassError;
use crate::word::{Alphabet, LetterId, Word};

const DOMINANCE_TOL: f64 = 1e-9;

/// Reading direction of a state graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// States record embedded prefixes of the forbidden words; letters are appended.
    Prefix,
    /// States record embedded suffixes; letters are prepended.
    Suffix,
}

/// Index of a state inside its [`StateGraph`]. The initial state is 0.
pub type StateId = usize;

/// Reachable valid states of one side, with transitions, loop alphabets and
/// growth data. States are numbered in increasing order of their component
/// sum, which is a topological order of the transition DAG.
#[derive(Debug, Clone)]
pub struct StateGraph {
    side: Side,
    states: Vec<Vec<usize>>,
    /// `next[s][a]`: state after letter `a`, `None` when the word leaves the class.
    next: Vec<Vec<Option<StateId>>>,
    loops: Vec<Vec<LetterId>>,
    growth: Vec<Growth>,
    dominant: Vec<bool>,
    gamma: f64,
    d: usize,
}

/// One step of the state automaton on raw tuples. The result may be invalid.
pub(crate) fn step_tuple(
    alphabet: &Alphabet,
    forbidden: &[Word],
    side: Side,
    state: &[usize],
    letter: LetterId,
) -> Vec<usize> {
    forbidden
        .iter()
        .zip(state)
        .map(|(phi, &p)| {
            let l = phi.len();
            match side {
                Side::Prefix => alphabet.extend_forward(phi.letters(), p, letter),
                Side::Suffix => l - alphabet.extend_backward(phi.letters(), l - p, letter),
            }
        })
        .collect()
}

fn is_valid(forbidden: &[Word], state: &[usize]) -> bool {
    forbidden.iter().zip(state).all(|(phi, &p)| p < phi.len())
}

impl StateGraph {
    pub(crate) fn build(alphabet: &Alphabet, forbidden: &[Word], side: Side) -> Result<Self, ClassError> {
        let initial = vec![0; forbidden.len()];
        let mut seen: HashMap<Vec<usize>, ()> = HashMap::new();
        let mut queue = VecDeque::from([initial.clone()]);
        seen.insert(initial, ());
        while let Some(s) = queue.pop_front() {
            for a in 0..alphabet.len() {
                let t = step_tuple(alphabet, forbidden, side, &s, a);
                if is_valid(forbidden, &t) && !seen.contains_key(&t) {
                    seen.insert(t.clone(), ());
                    queue.push_back(t);
                }
            }
        }
        let mut states: Vec<Vec<usize>> = seen.into_keys().collect();
        states.sort_by_key(|s| (s.iter().sum::<usize>(), s.clone()));
        let index: HashMap<&[usize], StateId> =
            states.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();

        let next: Vec<Vec<Option<StateId>>> = states
            .iter()
            .map(|s| {
                (0..alphabet.len())
                    .map(|a| {
                        let t = step_tuple(alphabet, forbidden, side, s, a);
                        index.get(t.as_slice()).copied()
                    })
                    .collect()
            })
            .collect();
        let loops: Vec<Vec<LetterId>> = next
            .iter()
            .enumerate()
            .map(|(s, row)| (0..alphabet.len()).filter(|&a| row[a] == Some(s)).collect())
            .collect();
        let weights: Vec<Vec<u32>> = loops
            .iter()
            .map(|l| l.iter().map(|&a| alphabet.weight(a)).collect())
            .collect();
        let growth = weights
            .iter()
            .map(|w| growth(w))
            .collect::<Result<Vec<_>, _>>()?;

        let mut graph = StateGraph {
            side,
            states,
            next,
            loops,
            growth,
            dominant: Vec::new(),
            gamma: 0.0,
            d: 0,
        };
        graph.compute_dominance(&weights);
        Ok(graph)
    }

    fn compute_dominance(&mut self, weights: &[Vec<u32>]) {
        let gamma = self.growth.iter().map(|g| g.gamma).fold(0.0, f64::max);
        let leaders: Vec<&Vec<u32>> = (0..self.len())
            .filter(|&s| !weights[s].is_empty() && self.growth[s].gamma == gamma)
            .map(|s| &weights[s])
            .collect();
        self.dominant = (0..self.len())
            .map(|s| {
                if weights[s].is_empty() {
                    return false;
                }
                if leaders.contains(&&weights[s]) {
                    return true;
                }
                let close = (self.growth[s].gamma - gamma).abs() <= DOMINANCE_TOL;
                if close {
                    warn!(
                        "{:?} state {:?} treated as dominant by numeric comparison of growth rates",
                        self.side, self.states[s]
                    );
                }
                close
            })
            .collect();
        self.gamma = gamma;

        let mut best = vec![0usize; self.len()];
        best[0] = self.dominant[0] as usize;
        for s in 0..self.len() {
            for t in self.successors(s) {
                best[t] = best[t].max(best[s] + self.dominant[t] as usize);
            }
        }
        self.d = best.into_iter().max().unwrap_or(0);
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn initial(&self) -> StateId {
        0
    }

    pub fn state(&self, s: StateId) -> &[usize] {
        &self.states[s]
    }

    pub fn states(&self) -> &[Vec<usize>] {
        &self.states
    }

    pub fn find(&self, tuple: &[usize]) -> Option<StateId> {
        self.states.iter().position(|s| s == tuple)
    }

    pub fn step(&self, s: StateId, letter: LetterId) -> Option<StateId> {
        self.next[s][letter]
    }

    pub fn loop_alphabet(&self, s: StateId) -> &[LetterId] {
        &self.loops[s]
    }

    /// Distinct states other than `s` reachable by one letter.
    pub fn successors(&self, s: StateId) -> BTreeSet<StateId> {
        self.next[s].iter().flatten().copied().filter(|&t| t != s).collect()
    }

    pub fn growth(&self, s: StateId) -> Growth {
        self.growth[s]
    }

    pub fn is_dominant(&self, s: StateId) -> bool {
        self.dominant[s]
    }

    /// Largest loop growth rate over reachable states.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Largest number of dominant states on a path from the initial state.
    pub fn d(&self) -> usize {
        self.d
    }

    /// States along the word: for the prefix side `out[i]` is the state of
    /// `letters[..i]`, for the suffix side the state of `letters[i..]`.
    /// On exit from the class returns the 0-based index of the offending letter.
    pub fn run(&self, letters: &[LetterId]) -> Result<Vec<StateId>, usize> {
        let n = letters.len();
        let mut out = vec![0; n + 1];
        match self.side {
            Side::Prefix => {
                for i in 0..n {
                    out[i + 1] = self.step(out[i], letters[i]).ok_or(i)?;
                }
            }
            Side::Suffix => {
                for i in (0..n).rev() {
                    out[i] = self.step(out[i + 1], letters[i]).ok_or(i)?;
                }
            }
        }
        Ok(out)
    }

    /// Final state of the whole word, or `None` if it leaves the class.
    pub fn state_of(&self, letters: &[LetterId]) -> Option<StateId> {
        let states = self.run(letters).ok()?;
        Some(match self.side {
            Side::Prefix => states[letters.len()],
            Side::Suffix => states[0],
        })
    }

    /// Number of distinct dominant states on the path of `letters`.
    pub fn dominant_count(&self, letters: &[LetterId]) -> Option<usize> {
        let mut states = self.run(letters).ok()?;
        states.dedup();
        Some(states.into_iter().filter(|&s| self.dominant[s]).count())
    }
}
