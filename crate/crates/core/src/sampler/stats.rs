use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::{sample_batch, ClassSampler, SamplerError, SamplerModel};
use crate::automaton::ClassModel;
use crate::exec::{self, Strategy};
use crate::word::Word;

use super::count_disjoint_blocks;

#[derive(Debug, Clone)]
pub struct EmpiricalConfig {
    /// Weight of the sampled class words.
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub strategy: Strategy,
    /// Letters per trial in the concentration check; 0 skips it.
    pub letters: usize,
    pub trials: usize,
    /// Words whose disjoint blocks are counted in every sample.
    pub patterns: Vec<Word>,
    /// Abundance threshold for typicality; `None` means `ceil(sqrt(n))`.
    pub typicality_threshold: Option<u64>,
}

impl EmpiricalConfig {
    pub fn new(n: usize, samples: usize, seed: u64) -> Self {
        Self {
            n,
            samples,
            seed,
            strategy: Strategy::default(),
            letters: 0,
            trials: 0,
            patterns: Vec::new(),
            typicality_threshold: None,
        }
    }
}

/// Structure of one sampled class word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WordStats {
    pub blocks: Vec<usize>,
    pub non_dominant_weight: u64,
    /// Lightest dominant loop block over both decompositions.
    pub min_dominant_block: Option<u64>,
    pub prefix_dominant_blocks: usize,
    pub suffix_dominant_blocks: usize,
    pub all_dominant_large: bool,
    /// `None` when the word is too short for an equitable partition.
    pub typical: Option<bool>,
    pub tightness_violations: usize,
}

impl WordStats {
    pub fn of(model: &ClassModel, w: &Word, patterns: &[Word], threshold: Option<u64>) -> Result<Self, SamplerError> {
        let blocks = patterns
            .iter()
            .map(|p| count_disjoint_blocks(w, p))
            .collect::<Result<Vec<_>, _>>()?;
        let pd = model.prefix_decomposition(w)?;
        let sd = model.suffix_decomposition(w)?;
        let min_dominant_block = [&pd, &sd]
            .iter()
            .flat_map(|d| {
                d.blocks
                    .iter()
                    .filter(|b| model.is_dominant_block(d, b))
                    .map(|b| model.block_weight(b))
            })
            .min();
        let (typical, tightness_violations) = match model.is_typical(w, threshold) {
            Ok(r) => (Some(r.typical), r.tightness_violations.len()),
            Err(crate::automaton::ClassError::TooShort { .. }) => (None, 0),
            Err(e) => return Err(e.into()),
        };
        Ok(Self {
            blocks,
            non_dominant_weight: model.non_dominant_weight(&pd),
            min_dominant_block,
            prefix_dominant_blocks: model.dominant_blocks(&pd),
            suffix_dominant_blocks: model.dominant_blocks(&sd),
            all_dominant_large: model.dominant_blocks_large(&pd) && model.dominant_blocks_large(&sd),
            typical,
            tightness_violations,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub statistic: String,
    pub n: usize,
    pub samples: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalReport {
    pub seed: u64,
    pub rows: Vec<ReportRow>,
    pub histograms: BTreeMap<String, BTreeMap<u64, usize>>,
    pub words: Vec<WordStats>,
}

impl EmpiricalReport {
    pub fn value(&self, statistic: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.statistic == statistic).map(|r| r.value)
    }

    /// `statistic,n,samples,value` rows under a seed comment line.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# seed={}\nstatistic,n,samples,value\n", self.seed);
        for r in &self.rows {
            writeln!(out, "{},{},{},{}", r.statistic, r.n, r.samples, r.value).unwrap();
        }
        out
    }

    pub fn histogram_csv(&self, name: &str) -> Option<String> {
        let h = self.histograms.get(name)?;
        let mut out = String::from("value,count\n");
        for (v, c) in h {
            writeln!(out, "{v},{c}").unwrap();
        }
        Some(out)
    }
}

/// Nearest-rank percentile of a sorted slice, `p` in `[0, 1]`.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

fn histogram<I: IntoIterator<Item = u64>>(values: I) -> BTreeMap<u64, usize> {
    let mut h = BTreeMap::new();
    for v in values {
        *h.entry(v).or_default() += 1;
    }
    h
}

fn fraction<I: IntoIterator<Item = bool>>(flags: I) -> f64 {
    let (mut hit, mut total) = (0usize, 0usize);
    for f in flags {
        hit += f as usize;
        total += 1;
    }
    hit as f64 / total.max(1) as f64
}

/// Samples uniform words of `C_n` and letter sequences, and tabulates their
/// structure. Nothing is asserted here.
pub fn empirical_suite(model: &ClassModel, config: &EmpiricalConfig) -> Result<EmpiricalReport, SamplerError> {
    let mut rows = Vec::new();
    let mut histograms = BTreeMap::new();
    let mut row = |statistic: String, n: usize, samples: usize, value: f64| {
        rows.push(ReportRow {
            statistic,
            n,
            samples,
            value,
        })
    };

    if config.letters > 0 && config.trials > 0 {
        let boltzmann = SamplerModel::new(model.alphabet())?;
        let k = config.letters;
        let target = k as f64 * boltzmann.mean_weight();
        let ratios: Vec<f64> = sample_batch(config.strategy, config.seed, config.trials, |rng| {
            boltzmann.draw_letters(k, rng).weight(model.alphabet()) as f64 / target
        });
        row("concentration_mean_ratio".into(), k, config.trials, ratios.iter().sum::<f64>() / ratios.len() as f64);
        row(
            "concentration_outside_10pct".into(),
            k,
            config.trials,
            fraction(ratios.iter().map(|r| (r - 1.0).abs() >= 0.1)),
        );
    }

    let n = config.n;
    let m = config.samples;
    let sampler = ClassSampler::new(model, n)?;
    let words: Vec<Word> = sample_batch(config.strategy, config.seed.wrapping_add(1 << 32), m, |rng| sampler.sample(rng));
    let stats = exec::map(config.strategy, &words, |w| {
        WordStats::of(model, w, &config.patterns, config.typicality_threshold)
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;

    for (i, p) in config.patterns.iter().enumerate() {
        let label = model.alphabet().format_word(p);
        let counts: Vec<usize> = stats.iter().map(|s| s.blocks[i]).collect();
        let mut ratios: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
        ratios.sort_by(f64::total_cmp);
        row(format!("blocks_min[{label}]"), n, m, *counts.iter().min().unwrap_or(&0) as f64);
        row(format!("blocks_mean[{label}]"), n, m, counts.iter().sum::<usize>() as f64 / m.max(1) as f64);
        row(format!("blocks_ratio_p01[{label}]"), n, m, percentile(&ratios, 0.01));
        row(format!("blocks_ratio_median[{label}]"), n, m, percentile(&ratios, 0.5));
        histograms.insert(format!("blocks[{label}]"), histogram(counts.iter().map(|&c| c as u64)));
    }

    let sqrt_n = (n as f64).sqrt();
    row(
        "non_dominant_weight_max".into(),
        n,
        m,
        stats.iter().map(|s| s.non_dominant_weight).max().unwrap_or(0) as f64,
    );
    row(
        "non_dominant_within_sqrt_n".into(),
        n,
        m,
        fraction(stats.iter().map(|s| (s.non_dominant_weight as f64) <= sqrt_n)),
    );
    histograms.insert("non_dominant_weight".into(), histogram(stats.iter().map(|s| s.non_dominant_weight)));

    let mins: Vec<u64> = stats.iter().filter_map(|s| s.min_dominant_block).collect();
    row("min_dominant_block_min".into(), n, m, mins.iter().min().copied().unwrap_or(0) as f64);
    row(
        "min_dominant_block_mean".into(),
        n,
        m,
        mins.iter().sum::<u64>() as f64 / mins.len().max(1) as f64,
    );
    histograms.insert("min_dominant_block".into(), histogram(mins.iter().copied()));
    row(
        "all_dominant_large".into(),
        n,
        m,
        fraction(stats.iter().map(|s| s.all_dominant_large)),
    );
    let d = model.d();
    row(
        "full_dominance".into(),
        n,
        m,
        fraction(stats.iter().map(|s| s.prefix_dominant_blocks == d && s.suffix_dominant_blocks == d)),
    );

    if stats.iter().all(|s| s.typical.is_some()) {
        row(
            "typical_fraction".into(),
            n,
            m,
            fraction(stats.iter().map(|s| s.typical == Some(true))),
        );
    }
    row(
        "tightness_violations".into(),
        n,
        m,
        stats.iter().map(|s| s.tightness_violations).sum::<usize>() as f64,
    );

    Ok(EmpiricalReport {
        seed: config.seed,
        rows,
        histograms,
        words: stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::ClassSpec;

    #[test]
    fn percentile_nearest_rank() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile(&v, 0.01), 1.0);
        assert_eq!(percentile(&v, 0.5), 2.0);
        assert_eq!(percentile(&v, 1.0), 4.0);
        assert!(percentile(&[], 0.5).is_nan());
    }

    #[test]
    fn suite_is_deterministic_and_complete() {
        let model = ClassModel::build(&ClassSpec::basis(["231", "312", "321"]).unwrap()).unwrap();
        let mut config = EmpiricalConfig::new(60, 40, 5);
        config.letters = 100;
        config.trials = 50;
        config.patterns = vec![model.alphabet().parse_word("1.21.1").unwrap()];
        let a = empirical_suite(&model, &config).unwrap();
        config.strategy = Strategy::Sequential;
        let b = empirical_suite(&model, &config).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_csv(), b.to_csv());
        assert!(a.to_csv().starts_with("# seed=5\nstatistic,n,samples,value\n"));
        assert!(a.value("typical_fraction").is_some());
        assert_eq!(a.value("non_dominant_weight_max"), Some(0.0));
        assert_eq!(a.value("tightness_violations"), Some(0.0));
        assert!(a.histogram_csv("blocks[1.21.1]").unwrap().starts_with("value,count\n"));
        assert_eq!(a.words.len(), 40);
    }

    #[test]
    fn short_words_skip_typicality() {
        let model = ClassModel::build(&ClassSpec::basis(["231", "312", "321", "2143"]).unwrap()).unwrap();
        let report = empirical_suite(&model, &EmpiricalConfig::new(5, 10, 0)).unwrap();
        assert!(report.value("typical_fraction").is_none());
        assert_eq!(report.value("full_dominance").map(|f| f > 0.0), Some(true));
    }
}
