//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigUint;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use wilf_core::automaton::{growth, ClassModel, ClassSpec};
use wilf_core::perm::Permutation;
use wilf_core::sampler::{
    acceptance_rate, boltzmann_sample, empirical_suite, sample_batch, ClassSampler, EmpiricalConfig, RandomSource,
    SamplerModel,
};
use wilf_core::wilf::{
    avoider_series, collapse_report, move_poly, signature_horizon, verify_predictions, wilf_partition, MoveOptions,
};
use wilf_core::word::{
    check_factorisation_identity, check_quotient_identity, is_incompatible_factorisation, leq, Alphabet, Word,
};
use wilf_core::Strategy;

const GROWTH_RHO_TOL: f64 = 1e-9;
const GROWTH_C_TOL: f64 = 1e-4;
const GROWTH_C: f64 = 0.7236067977;
const TRANSFER_REL_TOL: f64 = 0.01;
const RATIO_TOL: f64 = 1e-12;
const CHI2_MIN_P: f64 = 0.001;
const MIN_ACCEPTANCE: f64 = 0.1;
const STRUCTURE_MIN_FRACTION: f64 = 0.9;
const TYPICAL_MIN_FRACTION: f64 = 0.5;

const SEED: u64 = 20_240_601;

type Criterion = (u32, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn perms(labels: &[&str]) -> Alphabet {
    Alphabet::permutations(labels.iter().map(|s| s.parse::<Permutation>().unwrap())).unwrap()
}

fn layered() -> ClassModel {
    ClassModel::build(&ClassSpec::Alphabet {
        letters: vec!["1".parse().unwrap(), "21".parse().unwrap()],
    })
    .unwrap()
}

fn poly() -> ClassModel {
    ClassModel::build(&ClassSpec::basis(["231", "312", "321", "2143"]).unwrap()).unwrap()
}

fn p(s: &str) -> Permutation {
    s.parse().unwrap()
}

fn chi2_p_value(observed: &BTreeMap<Word, usize>, cells: usize, total: usize) -> f64 {
    let expected = total as f64 / cells as f64;
    let mut stat: f64 = observed.values().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    stat += (cells - observed.len()) as f64 * expected;
    1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat)
}

fn criterion_1() -> Outcome {
    let mut pairs = 0usize;
    let mut bad = Vec::new();
    for labels in [&["1", "21"][..], &["1", "21", "231"]] {
        let a = perms(labels);
        let words = a.words_up_to(7);
        let ps: Vec<Permutation> = words.iter().map(|w| a.permutation_of(w.letters()).unwrap()).collect();
        for (w, pw) in words.iter().zip(&ps) {
            for (v, pv) in words.iter().zip(&ps) {
                pairs += 1;
                if leq(&a, w, v).unwrap() != pv.contains(pw) {
                    bad.push(format!("{} vs {}", a.format_word(w), a.format_word(v)));
                }
            }
        }
    }
    outcome(bad.is_empty(), format!("{pairs} pairs, {} disagreements {:?}", bad.len(), bad.iter().take(3).collect::<Vec<_>>()))
}

fn criterion_2() -> Outcome {
    let t = p("31524");
    let s = p("231").sum(&p("2413"));
    let parts = s.sum_decompose();
    let ok = t.contains(&p("123")) && !t.contains(&p("321")) && s == p("2315746") && parts == [p("231"), p("2413")];
    let parts: Vec<String> = parts.iter().map(Permutation::to_string).collect();
    outcome(ok, format!("231+2413 = {s}, parts {parts:?}"))
}

fn criterion_3() -> Outcome {
    let a = perms(&["1", "21"]);
    let words = a.words_up_to(5);
    let failing: Vec<String> = words
        .iter()
        .filter(|w| !check_quotient_identity(&a, w, 12).unwrap())
        .map(|w| a.format_word(w))
        .collect();
    outcome(failing.is_empty(), format!("{} words, failing {failing:?}", words.len()))
}

fn criterion_4() -> Outcome {
    let mut rng = RandomSource::new(SEED);
    let mut checked = 0;
    let mut failing = Vec::new();
    for labels in [&["1", "21"][..], &["1", "21", "231"]] {
        let a = perms(labels);
        let mut found = 0;
        while found < 50 {
            let len = rng.gen_range(2..=6);
            let letters: Vec<usize> = (0..len).map(|_| rng.gen_range(0..a.len())).collect();
            let w = a.word(letters).unwrap();
            if w.weight(&a) > 12 {
                continue;
            }
            let cuts: Vec<usize> = (1..len).filter(|_| rng.gen_bool(0.5)).collect();
            if cuts.is_empty() || !is_incompatible_factorisation(&a, &w, &cuts).unwrap() {
                continue;
            }
            found += 1;
            checked += 1;
            if !check_factorisation_identity(&a, &w, &cuts, 12).unwrap() {
                failing.push(format!("{} at {cuts:?}", a.format_word(&w)));
            }
        }
    }
    outcome(failing.is_empty(), format!("{checked} factorisations, failing {failing:?}"))
}

fn criterion_5() -> Outcome {
    let m = layered();
    let a = m.alphabet();
    let mut groups: BTreeMap<(u64, Vec<usize>), Vec<Word>> = BTreeMap::new();
    for w in a.words_up_to(6).into_iter().filter(|w| !w.is_empty()) {
        let mut key = w.letters().to_vec();
        key.sort();
        groups.entry((w.weight(a), key)).or_default().push(w);
    }
    let mut pairs = 0;
    let mut bad = Vec::new();
    for words in groups.values() {
        let sigs: Vec<_> = words
            .iter()
            .map(|w| avoider_series(&m, &a.permutation_of(w.letters()).unwrap(), 14).unwrap().counts)
            .collect();
        for i in 0..words.len() {
            for j in i + 1..words.len() {
                pairs += 1;
                if sigs[i] != sigs[j] {
                    bad.push(format!("{} / {}", a.format_word(&words[i]), a.format_word(&words[j])));
                }
            }
        }
    }
    let s132 = avoider_series(&m, &p("132"), 14).unwrap();
    let s213 = avoider_series(&m, &p("213"), 14).unwrap();
    let head: Vec<u32> = s132.counts[..2].iter().map(|c| c.to_u32_digits().first().copied().unwrap_or(0)).collect();
    let ok = bad.is_empty() && s132.counts == s213.counts && head == [2, 2];
    outcome(ok, format!("{pairs} anagram pairs, {} differ; 132 starts {head:?}", bad.len()))
}

fn criterion_6() -> Outcome {
    let m = ClassModel::build(
        &ClassSpec::from_json(
            r#"{"kind":"abstract","letters":[{"name":"a","weight":1},{"name":"b","weight":1},
            {"name":"c","weight":1},{"name":"d","weight":1}],"forbidden":["a.b.c","d.b.d.b.c"]}"#,
        )
        .unwrap(),
    )
    .unwrap();
    let w = |t: &str| m.alphabet().parse_word(t).unwrap();
    let pid = |t: &str| m.prefix().state_of(w(t).letters()).unwrap();
    let sid = |t: &str| m.suffix().state_of(w(t).letters()).unwrap();
    let (p1, s1, p2) = (pid("d.a"), sid("c"), pid("d.b.a"));
    let ok = m.prefix().state(p1) == [1, 1]
        && m.suffix().state(s1) == [1, 1]
        && m.matches(p1, s1)
        && m.prefix().state(p2) == [1, 2]
        && m.compatible(p2, s1)
        && !m.matches(p2, s1);
    outcome(
        ok,
        format!(
            "da -> {:?}, c -> {:?}, match {}; dba -> {:?}, compatible {}, match {}",
            m.prefix().state(p1),
            m.suffix().state(s1),
            m.matches(p1, s1),
            m.prefix().state(p2),
            m.compatible(p2, s1),
            m.matches(p2, s1)
        ),
    )
}

fn criterion_7() -> Outcome {
    let g = growth(&[1, 2]).unwrap();
    let rho = (5f64.sqrt() - 1.0) / 2.0;
    let a = perms(&["1", "21"]);
    let l30 = a.words_of_weight(30).len() as f64;
    let transfer = l30 * g.rho.powi(30);
    let ok = (g.rho - rho).abs() <= GROWTH_RHO_TOL
        && (g.c - GROWTH_C).abs() <= GROWTH_C_TOL
        && ((transfer - g.c) / g.c).abs() <= TRANSFER_REL_TOL;
    outcome(ok, format!("rho = {:.12}, c = {:.10}, |L_30| rho^30 = {transfer:.6}", g.rho, g.c))
}

fn criterion_8() -> Outcome {
    let m = poly();
    let a = m.alphabet();
    let letters: Vec<String> = a.letters().iter().map(|l| l.label()).collect();
    let forbidden: Vec<String> = m.forbidden().iter().map(|w| a.format_word(w)).collect();
    let counts = m.class_counts(30);
    let counts_ok = (1..=30).all(|n| counts[n] == BigUint::from(n));
    let (d, gamma) = (m.d(), m.gamma());
    let ratio_ok = (1..=30).all(|n| {
        let r = n as f64 / ((n as f64).powi(d as i32 - 1) * gamma.powi(n));
        (r - 1.0).abs() <= RATIO_TOL
    });
    let part = wilf_partition(&m, 3, usize::MAX, Strategy::default()).unwrap();
    let blocks_ok = part.exact && part.w() == 2 && part.blocks == [vec![p("123")], vec![p("132"), p("213")]];
    let ok = letters == ["1", "21"] && forbidden == ["21.21"] && counts_ok && gamma == 1.0 && d == 2 && ratio_ok && blocks_ok;
    outcome(
        ok,
        format!(
            "A = {letters:?}, F = {forbidden:?}, c_n = n: {counts_ok}, gamma = {gamma}, D = {d}, w_3 = {} at horizon {} (exact {})",
            part.w(),
            part.horizon,
            part.exact
        ),
    )
}

fn criterion_9() -> Outcome {
    const DRAWS: usize = 100_000;
    let lay = layered();
    let boltzmann = SamplerModel::new(lay.alphabet()).unwrap();
    let words = sample_batch(Strategy::default(), SEED, DRAWS, |rng| boltzmann_sample(&boltzmann, 8, rng).unwrap().0);
    let mut observed = BTreeMap::new();
    for w in words {
        *observed.entry(w).or_insert(0) += 1;
    }
    let cells = lay.alphabet().words_of_weight(8).len();
    let p_boltzmann = chi2_p_value(&observed, cells, DRAWS);

    let pm = poly();
    let sampler = ClassSampler::new(&pm, 8).unwrap();
    let words = sample_batch(Strategy::default(), SEED + 1, DRAWS, |rng| sampler.sample(rng));
    let mut observed = BTreeMap::new();
    for w in words {
        *observed.entry(w).or_insert(0) += 1;
    }
    let p_class = chi2_p_value(&observed, 8, DRAWS);

    let mut rng = RandomSource::new(SEED + 2);
    let rates: Vec<(u64, f64)> = [10, 50, 100, 200, 300, 400, 500]
        .into_iter()
        .map(|n| (n, acceptance_rate(&boltzmann, n, 2000, &mut rng).unwrap()))
        .collect();
    let min_rate = rates.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let ok = cells == 34 && p_boltzmann > CHI2_MIN_P && p_class > CHI2_MIN_P && min_rate >= MIN_ACCEPTANCE;
    outcome(
        ok,
        format!("{cells} cells, p = {p_boltzmann:.4}; class sampler p = {p_class:.4}; min acceptance {min_rate:.3}"),
    )
}

fn criterion_10() -> Outcome {
    let m = layered();
    let mut config = EmpiricalConfig::new(300, 1000, SEED);
    config.patterns = vec![m.alphabet().parse_word("1.21.1").unwrap()];
    let r = empirical_suite(&m, &config).unwrap();
    let min = r.value("blocks_min[1.21.1]").unwrap();
    let p01 = r.value("blocks_ratio_p01[1.21.1]").unwrap();
    let median = r.value("blocks_ratio_median[1.21.1]").unwrap();
    outcome(min >= 1.0 && p01 > 0.0, format!("min blocks {min}, p01 ratio {p01:.4}, median ratio {median:.4}"))
}

fn criterion_11() -> Outcome {
    let m = poly();
    let run = |n: usize, threshold: Option<u64>| {
        let mut config = EmpiricalConfig::new(n, 1000, SEED);
        config.typicality_threshold = threshold;
        empirical_suite(&m, &config).unwrap()
    };
    let r400 = run(400, None);
    let r200 = run(200, None);
    let sqrt_n = 400f64.sqrt();
    let joint = r400
        .words
        .iter()
        .filter(|s| s.all_dominant_large && (s.non_dominant_weight as f64) <= sqrt_n)
        .count() as f64
        / r400.words.len() as f64;
    let t400 = r400.value("typical_fraction").unwrap_or(0.0);
    let t200 = r200.value("typical_fraction").unwrap_or(0.0);
    let rescaled = |n: usize| ((n as f64 / m.q() as f64).sqrt().ceil()) as u64;
    let s400 = run(400, Some(rescaled(400))).value("typical_fraction").unwrap_or(0.0);
    let violations = r400.value("tightness_violations").unwrap_or(0.0) + r200.value("tightness_violations").unwrap_or(0.0);
    let ok = joint >= STRUCTURE_MIN_FRACTION && t400 >= TYPICAL_MIN_FRACTION && t400 >= t200 && violations == 0.0;
    outcome(
        ok,
        format!(
            "large+light {joint:.3} (large {:.3}, light {:.3}), typical {t400:.3} at 400 vs {t200:.3} at 200, \
             rescaled-threshold typical {s400:.3} (reported only), tightness violations {violations}",
            r400.value("all_dominant_large").unwrap(),
            r400.value("non_dominant_within_sqrt_n").unwrap()
        ),
    )
}

fn criterion_12() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, m, kmax) in [("layered", layered(), 5), ("poly", poly(), 4)] {
        for k in 1..=kmax {
            let r = verify_predictions(&m, k, usize::MAX, Strategy::default()).unwrap();
            if !r.partition.exact || !r.violations().is_empty() {
                ok = false;
                notes.push(format!("{name} k={k}: exact {} violations {}", r.partition.exact, r.violations().len()));
            }
            if r.heuristic_misses() > 0 {
                notes.push(format!("{name} k={k}: {} heuristic orbits split", r.heuristic_misses()));
            }
        }
    }

    let m = poly();
    let a = m.alphabet();
    let mass = |x: usize, y: usize| {
        let mut t = vec!["1"; x];
        t.push("21");
        t.extend(vec!["1"; y]);
        a.parse_word(&t.join(".")).unwrap()
    };
    let w = mass(110, 50);
    match move_poly(&m, &w, 5, MoveOptions { threshold: Some(1) }) {
        Ok(moved) => {
            let pi = a.permutation_of(w.letters()).unwrap();
            let sigma = a.permutation_of(moved.word.letters()).unwrap();
            let horizon = signature_horizon(&m, &pi).unwrap().n_exact.max(signature_horizon(&m, &sigma).unwrap().n_exact);
            let same = avoider_series(&m, &pi, horizon).unwrap().counts == avoider_series(&m, &sigma, horizon).unwrap().counts;
            ok &= same && moved.word == mass(105, 55);
            notes.push(format!("mass move 110|50 -> 105|55, equal signatures through {horizon}: {same}"));
        }
        Err(e) => {
            ok = false;
            notes.push(format!("mass move refused: {e}"));
        }
    }

    for (name, m, range) in [("layered", layered(), 3..=7), ("poly", poly(), 3..=8)] {
        let r = collapse_report(&m, range, usize::MAX, Strategy::default()).unwrap();
        let below = r.rows.iter().all(|row| row.ratio < 1.0);
        let ratios: Vec<String> = r.rows.iter().map(|row| format!("{}/{}", row.w_k, row.c_k)).collect();
        ok &= below && r.non_increasing() && r.rows.iter().all(|row| row.exact);
        notes.push(format!("{name} w/c {}", ratios.join(" ")));
    }
    outcome(ok, notes.join("; "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        (1, "greedy order equals containment", criterion_1),
        (2, "sums and containment examples", criterion_2),
        (3, "quotient identity", criterion_3),
        (4, "factorisation identity", criterion_4),
        (5, "anagram words are Wilf-equivalent", criterion_5),
        (6, "abstract prefix/suffix example", criterion_6),
        (7, "growth constants", criterion_7),
        (8, "polynomial fixture", criterion_8),
        (9, "sampler uniformity", criterion_9),
        (10, "block abundance", criterion_10),
        (11, "structure of random words", criterion_11),
        (12, "predicted orbits and collapse", criterion_12),
    ];
    let filter: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (id, name, check) in criteria {
        if filter.is_some_and(|f| f != id) {
            continue;
        }
        let start = Instant::now();
        let o = check();
        failed += !o.pass as usize;
        println!(
            "criterion {id:>2} {}: {name} ({:.1}s): {}",
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
