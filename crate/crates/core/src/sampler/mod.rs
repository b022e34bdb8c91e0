//! Boltzmann sampling of words over a finite alphabet, exact uniform
//! sampling of class levels from counting tables, and empirical statistics.

mod stats;

use log::warn;
use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::Zero;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::automaton::{bisect, ClassError, ClassModel};
use crate::exec::{self, Strategy};
use crate::word::{Alphabet, LetterId, Word, WordError};

pub use stats::{empirical_suite, percentile, EmpiricalConfig, EmpiricalReport, ReportRow, WordStats};

/// Restarts allowed per Boltzmann sample before giving up.
pub const MAX_RESTARTS: u64 = 10_000_000;

/// Independent random streams used for batch sampling. Sample `j` always
/// comes from stream `j % WORKER_STREAMS`, whatever the thread count.
pub const WORKER_STREAMS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SamplerError {
    #[error("alphabet is empty")]
    EmptyAlphabet,
    #[error("weight {n} is not a multiple of the letter-weight period {period}")]
    Periodic { n: u64, period: u64 },
    #[error("no accepted sample after {0} restarts")]
    RestartCap(u64),
    #[error("class has no members of weight {0}")]
    EmptyLevel(usize),
    #[error("pattern word is empty")]
    EmptyPattern,
    #[error(transparent)]
    Class(#[from] ClassError),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Seeded generator; equal seeds give equal streams on every platform.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Stream of worker `index` for a batch seeded with `seed`.
    pub fn worker(seed: u64, index: usize) -> Self {
        Self::new(seed.wrapping_add(index as u64))
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// Letter distribution `P(a) = kappa^weight(a)` with `A(kappa) = 1`.
#[derive(Debug, Clone)]
pub struct SamplerModel {
    alphabet: Alphabet,
    kappa: f64,
    probs: Vec<f64>,
    cdf: Vec<f64>,
    mean_weight: f64,
    period: u64,
}

impl SamplerModel {
    pub fn new(alphabet: &Alphabet) -> Result<Self, SamplerError> {
        if alphabet.is_empty() {
            return Err(SamplerError::EmptyAlphabet);
        }
        let weights: Vec<i32> = alphabet.letters().iter().map(|l| l.weight() as i32).collect();
        let a = |x: f64| weights.iter().map(|&w| x.powi(w)).sum::<f64>();
        // A is increasing with A(0) = 0; bracket the root before bisecting.
        let mut hi = 1.0;
        while a(hi) < 1.0 {
            hi *= 2.0;
        }
        let kappa = bisect(|x| a(x) - 1.0, 0.0, hi);
        let probs: Vec<f64> = weights.iter().map(|&w| kappa.powi(w)).collect();
        let total: f64 = probs.iter().sum();
        let mut acc = 0.0;
        let cdf = probs
            .iter()
            .map(|p| {
                acc += p / total;
                acc
            })
            .collect();
        let mean_weight = weights.iter().zip(&probs).map(|(&w, p)| w as f64 * p).sum();
        let period = weights.iter().fold(0u64, |g, &w| g.gcd(&(w as u64)));
        if period != 1 {
            warn!("letter weights have period {period}; the sampler is not aperiodic");
        }
        Ok(Self {
            alphabet: alphabet.clone(),
            kappa,
            probs,
            cdf,
            mean_weight,
            period,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// Expected letter weight `kappa * A'(kappa)`.
    pub fn mean_weight(&self) -> f64 {
        self.mean_weight
    }

    /// Always true for a finite alphabet: `A(x)` is a polynomial and exceeds 1.
    pub fn is_supercritical(&self) -> bool {
        true
    }

    pub fn is_aperiodic(&self) -> bool {
        self.period == 1
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    /// Inverse-CDF draw of one letter.
    pub fn draw_letter<R: Rng + ?Sized>(&self, rng: &mut R) -> LetterId {
        let u: f64 = rng.gen();
        self.cdf.iter().position(|&c| u < c).unwrap_or(self.cdf.len() - 1)
    }

    /// `k` independent letters.
    pub fn draw_letters<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Word {
        let letters = (0..k).map(|_| self.draw_letter(rng)).collect();
        self.alphabet.word(letters).expect("own alphabet")
    }
}

/// A uniformly random word of weight exactly `n`, and the number of rejected attempts.
pub fn boltzmann_sample<R: Rng + ?Sized>(model: &SamplerModel, n: u64, rng: &mut R) -> Result<(Word, u64), SamplerError> {
    if !n.is_multiple_of(model.period) {
        return Err(SamplerError::Periodic { n, period: model.period });
    }
    let mut letters = Vec::new();
    for rejections in 0..MAX_RESTARTS {
        letters.clear();
        let mut weight = 0u64;
        while weight < n {
            let a = model.draw_letter(rng);
            weight += model.alphabet.weight(a) as u64;
            letters.push(a);
        }
        if weight == n {
            return Ok((model.alphabet.word(letters).expect("own alphabet"), rejections));
        }
    }
    Err(SamplerError::RestartCap(MAX_RESTARTS))
}

/// Exact uniform sampler for the level `C_n` of a class.
#[derive(Debug, Clone)]
pub struct ClassSampler<'a> {
    model: &'a ClassModel,
    n: usize,
    table: Vec<Vec<BigUint>>,
}

impl<'a> ClassSampler<'a> {
    pub fn new(model: &'a ClassModel, n: usize) -> Result<Self, SamplerError> {
        let table = model.completion_table(n);
        if table[n][0].is_zero() {
            return Err(SamplerError::EmptyLevel(n));
        }
        Ok(Self { model, n, table })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn count(&self) -> &BigUint {
        &self.table[self.n][0]
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Word {
        let alphabet = self.model.alphabet();
        let graph = self.model.prefix();
        let mut letters = Vec::new();
        let mut state = graph.initial();
        let mut remaining = self.n;
        while remaining > 0 {
            let mut r = rng.gen_biguint_below(&self.table[remaining][state]);
            let (a, next) = (0..alphabet.len())
                .filter_map(|a| {
                    let w = alphabet.weight(a) as usize;
                    let t = graph.step(state, a)?;
                    (w <= remaining).then_some((a, t))
                })
                .find(|&(a, t)| {
                    let c = &self.table[remaining - alphabet.weight(a) as usize][t];
                    if r < *c {
                        true
                    } else {
                        r -= c;
                        false
                    }
                })
                .expect("counts add up");
            letters.push(a);
            remaining -= alphabet.weight(a) as usize;
            state = next;
        }
        alphabet.word(letters).expect("own alphabet")
    }
}

pub fn uniform_class_sample<R: Rng + ?Sized>(model: &ClassModel, n: usize, rng: &mut R) -> Result<Word, SamplerError> {
    Ok(ClassSampler::new(model, n)?.sample(rng))
}

/// Draws `count` items, item `j` from worker stream `j % WORKER_STREAMS`.
/// The output depends only on `seed`, never on the strategy.
pub fn sample_batch<T, F>(strategy: Strategy, seed: u64, count: usize, draw: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut RandomSource) -> T + Sync + Send,
{
    let workers: Vec<usize> = (0..WORKER_STREAMS.min(count.max(1))).collect();
    let streams = exec::map(strategy, &workers, |&i| {
        let mut rng = RandomSource::worker(seed, i);
        let mine = (count + WORKER_STREAMS - 1 - i) / WORKER_STREAMS;
        (0..mine).map(|_| draw(&mut rng)).collect::<Vec<T>>()
    });
    let mut iters: Vec<_> = streams.into_iter().map(Vec::into_iter).collect();
    (0..count)
        .map(|j| iters[j % WORKER_STREAMS].next().expect("stream length"))
        .collect()
}

/// Largest number of pairwise disjoint consecutive occurrences of `p` in `w`.
pub fn count_disjoint_blocks(w: &Word, p: &Word) -> Result<usize, SamplerError> {
    if p.is_empty() {
        return Err(SamplerError::EmptyPattern);
    }
    let (w, p) = (w.letters(), p.letters());
    let mut count = 0;
    let mut i = 0;
    while i + p.len() <= w.len() {
        if &w[i..i + p.len()] == p {
            count += 1;
            i += p.len();
        } else {
            i += 1;
        }
    }
    Ok(count)
}

/// Fraction of attempts accepted by the rejection phase over `draws` samples.
pub fn acceptance_rate<R: Rng + ?Sized>(model: &SamplerModel, n: u64, draws: usize, rng: &mut R) -> Result<f64, SamplerError> {
    let mut attempts = 0u64;
    for _ in 0..draws {
        attempts += boltzmann_sample(model, n, rng)?.1 + 1;
    }
    Ok(draws as f64 / attempts as f64)
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;
    use crate::automaton::ClassSpec;
    use crate::perm::Permutation;

    fn perms(labels: &[&str]) -> Alphabet {
        Alphabet::permutations(labels.iter().map(|s| s.parse::<Permutation>().unwrap())).unwrap()
    }

    #[test]
    fn kappa_values() {
        let m = SamplerModel::new(&perms(&["1", "21"])).unwrap();
        assert!((m.kappa() - 0.6180339887).abs() < 1e-9);
        assert!((m.mean_weight() - 1.3819660113).abs() < 1e-9);
        assert!((m.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(m.is_aperiodic());

        let m = SamplerModel::new(&perms(&["1"])).unwrap();
        assert!((m.kappa() - 1.0).abs() < 1e-11);
        assert!((m.mean_weight() - 1.0).abs() < 1e-9);

        let abcd = Alphabet::named([("a", 1), ("b", 1), ("c", 1), ("d", 1)]).unwrap();
        let m = SamplerModel::new(&abcd).unwrap();
        assert!((m.kappa() - 0.25).abs() < 1e-11);
        assert!((m.mean_weight() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn periodic_alphabet_is_refused() {
        let even = Alphabet::named([("x", 2), ("y", 4)]).unwrap();
        let m = SamplerModel::new(&even).unwrap();
        assert_eq!(m.period(), 2);
        let mut rng = RandomSource::new(0);
        assert_eq!(
            boltzmann_sample(&m, 5, &mut rng).unwrap_err(),
            SamplerError::Periodic { n: 5, period: 2 }
        );
        assert_eq!(boltzmann_sample(&m, 6, &mut rng).unwrap().0.weight(m.alphabet()), 6);
    }

    #[test]
    fn empty_weight_gives_empty_word() {
        let m = SamplerModel::new(&perms(&["1", "21"])).unwrap();
        let (w, rejections) = boltzmann_sample(&m, 0, &mut RandomSource::new(1)).unwrap();
        assert!(w.is_empty());
        assert_eq!(rejections, 0);
    }

    #[test]
    fn weight_two_is_balanced() {
        let m = SamplerModel::new(&perms(&["1", "21"])).unwrap();
        let mut rng = RandomSource::new(7);
        let singles = (0..20_000)
            .filter(|_| boltzmann_sample(&m, 2, &mut rng).unwrap().0.len() == 1)
            .count();
        // Binomial(20000, 1/2): 5 sigma is about 354.
        assert!((singles as i64 - 10_000).abs() < 354, "{singles}");
    }

    #[test]
    fn reproducible_streams() {
        let m = SamplerModel::new(&perms(&["1", "21"])).unwrap();
        let a: Vec<Word> = sample_batch(Strategy::Sequential, 42, 50, |r| boltzmann_sample(&m, 30, r).unwrap().0);
        let b: Vec<Word> = sample_batch(Strategy::Parallel, 42, 50, |r| boltzmann_sample(&m, 30, r).unwrap().0);
        assert_eq!(a, b);
        let c: Vec<Word> = sample_batch(Strategy::Parallel, 43, 50, |r| boltzmann_sample(&m, 30, r).unwrap().0);
        assert_ne!(a, c);
        assert!(a.iter().all(|w| w.weight(m.alphabet()) == 30));
        assert_eq!(sample_batch(Strategy::Sequential, 0, 3, |r| r.next_u64()).len(), 3);
    }

    #[test]
    fn class_sampler_counts_and_membership() {
        let model = ClassModel::build(&ClassSpec::basis(["231", "312", "321", "2143"]).unwrap()).unwrap();
        let sampler = ClassSampler::new(&model, 4).unwrap();
        assert_eq!(*sampler.count(), BigUint::from(4u32));
        let mut rng = RandomSource::new(3);
        let mut seen: HashMap<Word, usize> = HashMap::new();
        for _ in 0..4000 {
            let w = sampler.sample(&mut rng);
            assert!(model.contains_word(&w).unwrap());
            assert_eq!(w.weight(model.alphabet()), 4);
            *seen.entry(w).or_default() += 1;
        }
        assert_eq!(seen.len(), 4);
        // Binomial(4000, 1/4): 5 sigma is about 137.
        assert!(seen.values().all(|&c| (c as i64 - 1000).abs() < 137), "{seen:?}");

        let one = uniform_class_sample(&model, 1, &mut rng).unwrap();
        assert_eq!(model.alphabet().format_word(&one), "1");
    }

    #[test]
    fn empty_level_is_an_error() {
        let model = ClassModel::build(&ClassSpec::basis(["12", "21"]).unwrap()).unwrap();
        assert!(uniform_class_sample(&model, 1, &mut RandomSource::new(0)).is_ok());
        assert_eq!(
            uniform_class_sample(&model, 2, &mut RandomSource::new(0)).unwrap_err(),
            SamplerError::EmptyLevel(2)
        );
    }

    #[test]
    fn disjoint_blocks() {
        let a = perms(&["1", "21"]);
        let w = |t: &str| a.parse_word(t).unwrap();
        assert_eq!(count_disjoint_blocks(&w("1.1.1.1"), &w("1.1")).unwrap(), 2);
        assert_eq!(count_disjoint_blocks(&w("1.21.1.21"), &w("21.1")).unwrap(), 1);
        assert_eq!(count_disjoint_blocks(&w("1"), &w("1.1")).unwrap(), 0);
        assert_eq!(count_disjoint_blocks(&w("1"), &w("ε")).unwrap_err(), SamplerError::EmptyPattern);
    }

    #[test]
    fn greedy_block_count_is_optimal() {
        let a = perms(&["1", "21"]);
        for w in a.words_up_to(9) {
            for p in a.words_up_to(3).into_iter().filter(|p| !p.is_empty()) {
                let (wl, pl) = (w.letters(), p.letters());
                // best[i]: most disjoint occurrences inside wl[..i]
                let mut best = vec![0usize; wl.len() + 1];
                for i in 1..=wl.len() {
                    best[i] = best[i - 1];
                    if i >= pl.len() && &wl[i - pl.len()..i] == pl {
                        best[i] = best[i].max(best[i - pl.len()] + 1);
                    }
                }
                assert_eq!(count_disjoint_blocks(&w, &p).unwrap(), best[wl.len()]);
            }
        }
    }

    #[test]
    fn acceptance_stays_bounded_below() {
        let m = SamplerModel::new(&perms(&["1", "21"])).unwrap();
        let mut rng = RandomSource::new(11);
        for n in [50, 200, 500] {
            assert!(acceptance_rate(&m, n, 300, &mut rng).unwrap() > 0.3);
        }
    }
}
