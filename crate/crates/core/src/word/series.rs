use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::order::{leq, leq_star, split_at_cuts};
use super::{is_incompatible_factorisation, Alphabet, Word, WordError};

/// A power series known exactly through degree `cutoff`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TruncatedSeries {
    coeffs: Vec<BigInt>,
}

impl TruncatedSeries {
    pub fn zero(cutoff: usize) -> Self {
        Self {
            coeffs: vec![BigInt::zero(); cutoff + 1],
        }
    }

    pub fn one(cutoff: usize) -> Self {
        let mut s = Self::zero(cutoff);
        s.coeffs[0] = BigInt::one();
        s
    }

    /// Pads with zeros or truncates to `cutoff`.
    pub fn from_coeffs<I, T>(cutoff: usize, coeffs: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<BigInt>,
    {
        let mut s = Self::zero(cutoff);
        for (slot, c) in s.coeffs.iter_mut().zip(coeffs) {
            *slot = c.into();
        }
        s
    }

    pub fn cutoff(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, degree: usize) -> &BigInt {
        &self.coeffs[degree]
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    fn same_cutoff(&self, other: &Self) -> Result<(), WordError> {
        if self.cutoff() == other.cutoff() {
            Ok(())
        } else {
            Err(WordError::CutoffMismatch(self.cutoff(), other.cutoff()))
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, WordError> {
        self.same_cutoff(other)?;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, WordError> {
        self.same_cutoff(other)?;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, WordError> {
        self.same_cutoff(other)?;
        let n = self.cutoff();
        let mut out = Self::zero(n);
        for (i, a) in self.coeffs.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
            for (j, b) in other.coeffs[..=n - i].iter().enumerate() {
                out.coeffs[i + j] += a * b;
            }
        }
        Ok(out)
    }

    /// Multiplicative inverse of a series with constant term 1.
    pub fn reciprocal(&self) -> Result<Self, WordError> {
        if !self.coeffs[0].is_one() {
            return Err(WordError::NotInvertible);
        }
        let n = self.cutoff();
        let mut out = Self::zero(n);
        out.coeffs[0] = BigInt::one();
        for k in 1..=n {
            let mut acc = BigInt::zero();
            for i in 1..=k {
                acc -= &self.coeffs[i] * &out.coeffs[k - i];
            }
            out.coeffs[k] = acc;
        }
        Ok(out)
    }

    /// CSV rows `degree,coefficient` with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("degree,coefficient\n");
        for (d, c) in self.coeffs.iter().enumerate() {
            out.push_str(&format!("{d},{c}\n"));
        }
        out
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: Self) -> TruncatedSeries {
        self.try_add(rhs).expect("matching cutoffs")
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: Self) -> TruncatedSeries {
        self.try_sub(rhs).expect("matching cutoffs")
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: Self) -> TruncatedSeries {
        self.try_mul(rhs).expect("matching cutoffs")
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self.coeffs.iter().map(BigInt::to_string).collect();
        write!(f, "[{}]", terms.join(", "))
    }
}

/// `A(x)`: letters counted by weight.
pub fn series_a(alphabet: &Alphabet, cutoff: usize) -> TruncatedSeries {
    let mut s = TruncatedSeries::zero(cutoff);
    for letter in alphabet.letters() {
        let w = letter.weight() as usize;
        if w <= cutoff {
            s.coeffs[w] += 1;
        }
    }
    s
}

/// `1 / (1 - A(x))`.
fn series_a_star(alphabet: &Alphabet, cutoff: usize) -> TruncatedSeries {
    (&TruncatedSeries::one(cutoff) - &series_a(alphabet, cutoff))
        .reciprocal()
        .expect("A has no constant term")
}

fn check_cutoff(alphabet: &Alphabet, w: &Word, cutoff: usize) -> Result<(), WordError> {
    alphabet.check(w)?;
    let weight = w.weight(alphabet);
    if (cutoff as u64) < weight {
        return Err(WordError::CutoffTooSmall {
            cutoff: cutoff as u64,
            weight,
        });
    }
    Ok(())
}

/// Containers of `w` by weight, by enumerating every word up to the cutoff.
pub fn series_i_oracle(alphabet: &Alphabet, w: &Word, cutoff: usize) -> Result<TruncatedSeries, WordError> {
    check_cutoff(alphabet, w, cutoff)?;
    count_by_enumeration(alphabet, cutoff, |v| leq(alphabet, w, v))
}

/// Minimal containers of `w` by weight, by exhaustive enumeration.
pub fn series_i_star_oracle(
    alphabet: &Alphabet,
    w: &Word,
    cutoff: usize,
) -> Result<TruncatedSeries, WordError> {
    check_cutoff(alphabet, w, cutoff)?;
    count_by_enumeration(alphabet, cutoff, |v| leq_star(alphabet, w, v))
}

fn count_by_enumeration<F>(alphabet: &Alphabet, cutoff: usize, keep: F) -> Result<TruncatedSeries, WordError>
where
    F: Fn(&Word) -> Result<bool, WordError>,
{
    let mut s = TruncatedSeries::zero(cutoff);
    for n in 0..=cutoff {
        for v in alphabet.words_of_weight(n as u64) {
            if keep(&v)? {
                s.coeffs[n] += 1;
            }
        }
    }
    Ok(s)
}

/// Progress-state counts: `f[n][j]` words of weight `n` whose greedy scan has
/// consumed exactly `j < |w|` letters of `w`, and `star[n]` words of weight
/// `n` that complete `w` on their last letter.
fn progress_dp(alphabet: &Alphabet, w: &Word, cutoff: usize) -> Vec<BigInt> {
    let len = w.len();
    let mut star = vec![BigInt::zero(); cutoff + 1];
    if len == 0 {
        star[0] = BigInt::one();
        return star;
    }
    let step: Vec<Vec<usize>> = (0..len)
        .map(|j| {
            (0..alphabet.len())
                .map(|a| alphabet.extend_forward(w.letters(), j, a))
                .collect()
        })
        .collect();
    let mut f = vec![vec![BigInt::zero(); len]; cutoff + 1];
    f[0][0] = BigInt::one();
    for n in 1..=cutoff {
        for (a, letter) in alphabet.letters().iter().enumerate() {
            let wt = letter.weight() as usize;
            if wt > n {
                continue;
            }
            for j in 0..len {
                if f[n - wt][j].is_zero() {
                    continue;
                }
                let to = step[j][a];
                let add = f[n - wt][j].clone();
                if to == len {
                    star[n] += add;
                } else {
                    f[n][to] += add;
                }
            }
        }
    }
    star
}

/// `I*_W` through the progress-state DP.
pub fn series_i_star(alphabet: &Alphabet, w: &Word, cutoff: usize) -> Result<TruncatedSeries, WordError> {
    check_cutoff(alphabet, w, cutoff)?;
    Ok(TruncatedSeries {
        coeffs: progress_dp(alphabet, w, cutoff),
    })
}

/// `I_W` through the progress-state DP: a container is a minimal container
/// followed by an arbitrary word.
pub fn series_i(alphabet: &Alphabet, w: &Word, cutoff: usize) -> Result<TruncatedSeries, WordError> {
    let star = series_i_star(alphabet, w, cutoff)?;
    let mut total = vec![BigInt::zero(); cutoff + 1];
    for n in 0..=cutoff {
        let mut acc = star.coeffs[n].clone();
        for letter in alphabet.letters() {
            let wt = letter.weight() as usize;
            if wt <= n {
                acc += &total[n - wt];
            }
        }
        total[n] = acc;
    }
    Ok(TruncatedSeries { coeffs: total })
}

/// `I_W = I*_W / (1 - A)` coefficientwise, both sides by enumeration.
pub fn check_quotient_identity(alphabet: &Alphabet, w: &Word, cutoff: usize) -> Result<bool, WordError> {
    let lhs = series_i_oracle(alphabet, w, cutoff)?;
    let star = series_i_star_oracle(alphabet, w, cutoff)?;
    Ok(lhs == &star * &series_a_star(alphabet, cutoff))
}

/// `I_W = Π I*_{W_i} / (1 - A)` for an incompatible factorisation, both
/// sides by enumeration.
pub fn check_factorisation_identity(
    alphabet: &Alphabet,
    w: &Word,
    cuts: &[usize],
    cutoff: usize,
) -> Result<bool, WordError> {
    if !is_incompatible_factorisation(alphabet, w, cuts)? {
        return Err(WordError::NotIncompatible);
    }
    let lhs = series_i_oracle(alphabet, w, cutoff)?;
    let mut rhs = series_a_star(alphabet, cutoff);
    for part in split_at_cuts(w, cuts)? {
        rhs = &rhs * &series_i_star_oracle(alphabet, &part, cutoff)?;
    }
    Ok(lhs == rhs)
}


#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    fn alphabet3() -> Alphabet {
        Alphabet::permutations(["1", "21", "231"].map(|s| s.parse().unwrap())).unwrap()
    }

    fn word(max_len: usize) -> impl Strategy<Value = Word> {
        prop::collection::vec(0usize..3, 0..=max_len).prop_map(|l| alphabet3().word(l).unwrap())
    }

    proptest! {
        #[test]
        fn quotient_identity_random(w in word(4)) {
            let a = alphabet3();
            let w = a.word(w.letters().to_vec()).unwrap();
            prop_assert!(check_quotient_identity(&a, &w, 12).unwrap());
        }

        #[test]
        fn fast_series_matches_oracle(w in word(3)) {
            let a = alphabet3();
            let w = a.word(w.letters().to_vec()).unwrap();
            prop_assert_eq!(series_i(&a, &w, 11).unwrap(), series_i_oracle(&a, &w, 11).unwrap());
        }
    }
}
