use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::ops::RangeInclusive;

use serde::Serialize;

use super::orbits::{
    block_shift_orbit, is_unbounded_polynomial, loop_block_shuffles, shuffle_equivalents, symmetry_orbit,
};
use super::signature::{wilf_partition, WilfPartition};
use super::WilfError;
use crate::automaton::ClassModel;
use crate::exec::Strategy;
use crate::perm::Permutation;
use crate::word::Word;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitKind {
    Symmetry,
    Shuffle,
    BlockShift,
    LoopShuffle,
}

impl OrbitKind {
    /// Whether membership is known to imply Wilf-equivalence.
    pub fn guaranteed(self) -> bool {
        matches!(self, OrbitKind::Symmetry | OrbitKind::Shuffle)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Orbit {
    pub kind: OrbitKind,
    pub seed: Permutation,
    pub members: Vec<Permutation>,
    /// All members share one observed block.
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PredictionReport {
    pub partition: WilfPartition,
    pub orbits: Vec<Orbit>,
}

impl PredictionReport {
    /// Guaranteed orbits split across blocks.
    pub fn violations(&self) -> Vec<&Orbit> {
        self.orbits.iter().filter(|o| o.kind.guaranteed() && !o.consistent).collect()
    }

    /// A violation that cannot be blamed on a short horizon.
    pub fn hard_failure(&self) -> bool {
        self.partition.exact && !self.violations().is_empty()
    }

    /// Heuristic orbits that the observed partition separates.
    pub fn heuristic_misses(&self) -> usize {
        self.orbits.iter().filter(|o| !o.kind.guaranteed() && !o.consistent).count()
    }
}

fn to_perms(model: &ClassModel, words: BTreeSet<Word>) -> BTreeSet<Permutation> {
    words
        .iter()
        .map(|w| model.alphabet().permutation_of(w.letters()).expect("permutation alphabet"))
        .collect()
}

/// Checks every predicted orbit at size `k` against the observed Wilf
/// partition through `max`.
pub fn verify_predictions(model: &ClassModel, k: usize, max: usize, strategy: Strategy) -> Result<PredictionReport, WilfError> {
    let partition = wilf_partition(model, k, max, strategy)?;
    let polynomial = is_unbounded_polynomial(model);
    let mut orbits = Vec::new();
    let mut seen: BTreeSet<(OrbitKind, Vec<Permutation>)> = BTreeSet::new();
    for block in &partition.blocks {
        for p in block {
            let mut found = vec![(OrbitKind::Symmetry, symmetry_orbit(model, p)?)];
            if model.is_sum_closed() {
                found.push((OrbitKind::Shuffle, shuffle_equivalents(model, p)?));
            }
            let w = model.word_of(p)?;
            if polynomial {
                found.push((OrbitKind::BlockShift, to_perms(model, block_shift_orbit(model, &w)?)));
            } else if !model.is_sum_closed() && model.gamma() > 1.0 {
                found.push((OrbitKind::LoopShuffle, to_perms(model, loop_block_shuffles(model, &w)?)));
            }
            for (kind, members) in found {
                let members: Vec<Permutation> = members.into_iter().collect();
                if members.len() < 2 || !seen.insert((kind, members.clone())) {
                    continue;
                }
                let home = partition.block_of(&members[0]);
                let consistent = members.iter().all(|m| partition.block_of(m) == home);
                orbits.push(Orbit {
                    kind,
                    seed: p.clone(),
                    members,
                    consistent,
                });
            }
        }
    }
    Ok(PredictionReport { partition, orbits })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollapseRow {
    pub k: usize,
    pub c_k: usize,
    pub w_k: usize,
    pub ratio: f64,
    pub mean_block: f64,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollapseReport {
    pub rows: Vec<CollapseRow>,
}

impl CollapseReport {
    /// `w_k / c_k` never increases along the rows.
    pub fn non_increasing(&self) -> bool {
        self.rows.windows(2).all(|r| r[1].ratio <= r[0].ratio)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,c_k,w_k,ratio,mean_block,exact\n");
        for r in &self.rows {
            writeln!(out, "{},{},{},{},{},{}", r.k, r.c_k, r.w_k, r.ratio, r.mean_block, r.exact).unwrap();
        }
        out
    }
}

/// Number of Wilf classes against class size over a range of sizes.
pub fn collapse_report(model: &ClassModel, sizes: RangeInclusive<usize>, max: usize, strategy: Strategy) -> Result<CollapseReport, WilfError> {
    let mut rows = Vec::new();
    for k in sizes {
        let p = wilf_partition(model, k, max.max(k), strategy)?;
        let w = p.w();
        rows.push(CollapseRow {
            k,
            c_k: p.c,
            w_k: w,
            ratio: if p.c == 0 { 0.0 } else { w as f64 / p.c as f64 },
            mean_block: if w == 0 { 0.0 } else { p.c as f64 / w as f64 },
            exact: p.exact,
        });
    }
    Ok(CollapseReport { rows })
}
