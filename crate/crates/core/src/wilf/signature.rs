use std::collections::{BTreeMap, HashMap, VecDeque};

use log::warn;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use super::WilfError;
use crate::automaton::{ClassModel, StateId};
use crate::exec::{self, Strategy};
use crate::perm::Permutation;
use crate::word::Word;

/// Reachable pairs (class prefix state, greedy progress into the pattern word)
/// that have not yet absorbed the pattern.
#[derive(Debug, Clone)]
pub(crate) struct ProductGraph {
    states: Vec<(StateId, usize)>,
    /// `edges[v]`: `(letter weight, target)` for every letter that keeps the
    /// word in the class without completing the pattern.
    edges: Vec<Vec<(usize, usize)>>,
}

impl ProductGraph {
    pub(crate) fn new(model: &ClassModel, pattern: &Word) -> Self {
        let alphabet = model.alphabet();
        let graph = model.prefix();
        let len = pattern.len();
        let mut index: HashMap<(StateId, usize), usize> = HashMap::new();
        let mut states = Vec::new();
        if len > 0 {
            index.insert((graph.initial(), 0), 0);
            states.push((graph.initial(), 0));
        }
        let mut queue: VecDeque<usize> = (0..states.len()).collect();
        let mut raw_edges: Vec<Vec<(usize, (StateId, usize))>> = vec![Vec::new(); states.len()];
        while let Some(v) = queue.pop_front() {
            let (s, j) = states[v];
            for a in 0..alphabet.len() {
                let Some(t) = graph.step(s, a) else { continue };
                let k = alphabet.extend_forward(pattern.letters(), j, a);
                if k == len {
                    continue;
                }
                if let std::collections::hash_map::Entry::Vacant(e) = index.entry((t, k)) {
                    e.insert(states.len());
                    states.push((t, k));
                    raw_edges.push(Vec::new());
                    queue.push_back(states.len() - 1);
                }
                raw_edges[v].push((alphabet.weight(a) as usize, (t, k)));
            }
        }
        let edges = raw_edges
            .into_iter()
            .map(|row| row.into_iter().map(|(w, key)| (w, index[&key])).collect())
            .collect();
        Self { states, edges }
    }

    pub(crate) fn len(&self) -> usize {
        self.states.len()
    }

    /// Avoider counts for weights `0..=max`.
    pub(crate) fn counts(&self, max: usize) -> Vec<BigUint> {
        let mut f = vec![vec![BigUint::zero(); self.len()]; max + 1];
        if self.len() > 0 {
            f[0][0] = BigUint::one();
        }
        for n in 1..=max {
            let (done, rest) = f.split_at_mut(n);
            let row = &mut rest[0];
            for (v, edges) in self.edges.iter().enumerate() {
                for &(w, t) in edges {
                    if w <= n && !done[n - w][v].is_zero() {
                        row[t] += &done[n - w][v];
                    }
                }
            }
        }
        f.into_iter().map(|row| row.into_iter().sum()).collect()
    }

    /// Degree bounds `(numerator, denominator)` of the rational avoider
    /// generating function. The graph is a DAG plus self-loops, so the
    /// denominator divides the product of `1 - L_v(x)` over loop polynomials.
    pub(crate) fn degree_bounds(&self) -> (usize, usize) {
        let dq: usize = self
            .edges
            .iter()
            .enumerate()
            .map(|(v, e)| e.iter().filter(|&&(_, t)| t == v).map(|&(w, _)| w).max().unwrap_or(0))
            .sum();
        // (state, progress) order is topological: any non-loop step raises one of them.
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&v| self.states[v]);
        let mut longest = vec![0usize; self.len()];
        for &v in &order {
            for &(w, t) in &self.edges[v] {
                if t != v {
                    longest[t] = longest[t].max(longest[v] + w);
                }
            }
        }
        (dq + longest.into_iter().max().unwrap_or(0), dq)
    }
}

/// Avoider counts `a_k..=a_N` of one pattern inside a class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WilfSignature {
    pub pattern: Permutation,
    pub k: usize,
    pub horizon: usize,
    #[serde(serialize_with = "as_strings")]
    pub counts: Vec<BigUint>,
    /// Agreement through `horizon` already implies equal growth functions.
    pub exact: bool,
}

fn as_strings<S: serde::Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(BigUint::to_string))
}

impl WilfSignature {
    pub fn a(&self, n: usize) -> &BigUint {
        &self.counts[n - self.k]
    }
}

/// Comparison bound for the avoider series of one pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Horizon {
    pub numerator_degree: usize,
    pub denominator_degree: usize,
    pub product_states: usize,
    /// Agreement of two series through this weight proves equality.
    pub n_exact: usize,
}

impl Horizon {
    /// Bound for comparing any two series among `bounds`.
    pub fn joint(bounds: &[Horizon], k: usize) -> usize {
        let p = bounds.iter().map(|h| h.numerator_degree).max().unwrap_or(0);
        let q = bounds.iter().map(|h| h.denominator_degree).max().unwrap_or(0);
        (p + q).max(k)
    }
}

pub fn signature_horizon(model: &ClassModel, pattern: &Permutation) -> Result<Horizon, WilfError> {
    let w = model.word_of(pattern)?;
    let g = ProductGraph::new(model, &w);
    let (p, q) = g.degree_bounds();
    Ok(Horizon {
        numerator_degree: p,
        denominator_degree: q,
        product_states: g.len(),
        n_exact: (p + q).max(pattern.len()),
    })
}

/// `a_n = |C_n ∩ Av(pattern)|` for `n = |pattern|..=max`.
pub fn avoider_series(model: &ClassModel, pattern: &Permutation, max: usize) -> Result<WilfSignature, WilfError> {
    let k = pattern.len();
    if max < k {
        return Err(WilfError::HorizonTooSmall { max, k });
    }
    let w = model.word_of(pattern)?;
    let g = ProductGraph::new(model, &w);
    let (p, q) = g.degree_bounds();
    let counts = g.counts(max).split_off(k);
    Ok(WilfSignature {
        pattern: pattern.clone(),
        k,
        horizon: max,
        counts,
        exact: max >= (p + q).max(k),
    })
}

/// Class members of size `k`, in lexicographic order.
pub fn class_level(model: &ClassModel, k: usize) -> Vec<Permutation> {
    let alphabet = model.alphabet();
    let mut out: Vec<Permutation> = alphabet
        .words_of_weight(k as u64)
        .into_iter()
        .filter(|w| model.prefix().run(w.letters()).is_ok())
        .map(|w| alphabet.permutation_of(w.letters()).expect("permutation alphabet"))
        .collect();
    out.sort();
    out
}

/// Patterns of one size grouped by equal avoider counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WilfPartition {
    pub k: usize,
    pub c: usize,
    pub horizon: usize,
    pub n_exact: usize,
    pub exact: bool,
    pub blocks: Vec<Vec<Permutation>>,
    pub signatures: Vec<WilfSignature>,
}

impl WilfPartition {
    pub fn w(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_of(&self, p: &Permutation) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(p))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "k": self.k,
            "c": self.c,
            "w": self.w(),
            "exact": self.exact,
            "blocks": self.blocks.iter()
                .map(|b| b.iter().map(Permutation::to_string).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })
    }
}

/// Observed Wilf classes of `C_k`, comparing signatures through
/// `min(max, n_exact)`.
pub fn wilf_partition(model: &ClassModel, k: usize, max: usize, strategy: Strategy) -> Result<WilfPartition, WilfError> {
    if max < k {
        return Err(WilfError::HorizonTooSmall { max, k });
    }
    if model.alphabet().letters().iter().any(|l| l.permutation().is_none()) {
        return Err(WilfError::NotPermutationClass);
    }
    let level = class_level(model, k);
    let graphs: Vec<ProductGraph> = exec::map(strategy, &level, |p| {
        ProductGraph::new(model, &model.word_of(p).expect("class member"))
    });
    let bounds: Vec<Horizon> = graphs
        .iter()
        .map(|g| {
            let (p, q) = g.degree_bounds();
            Horizon {
                numerator_degree: p,
                denominator_degree: q,
                product_states: g.len(),
                n_exact: (p + q).max(k),
            }
        })
        .collect();
    let n_exact = Horizon::joint(&bounds, k);
    let horizon = max.min(n_exact);
    let exact = max >= n_exact;
    let counts = exec::map(strategy, &graphs, |g| g.counts(horizon).split_off(k));
    let signatures: Vec<WilfSignature> = level
        .iter()
        .zip(counts)
        .map(|(p, counts)| WilfSignature {
            pattern: p.clone(),
            k,
            horizon,
            counts,
            exact,
        })
        .collect();

    let mut groups: BTreeMap<&[BigUint], Vec<Permutation>> = BTreeMap::new();
    for s in &signatures {
        groups.entry(&s.counts).or_default().push(s.pattern.clone());
    }
    let mut blocks: Vec<Vec<Permutation>> = groups.into_values().collect();
    blocks.sort();
    if !exact && blocks.iter().any(|b| b.len() > 1) {
        warn!("size {k}: blocks merged at horizon {horizon} < {n_exact} are provisional");
    }
    Ok(WilfPartition {
        k,
        c: level.len(),
        horizon,
        n_exact,
        exact,
        blocks,
        signatures,
    })
}
