//! The approximant words `s_n`, the limit word `c_α`, rotation words
//! `v_{α,θ}` and finite pieces of the language `W_α`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cf::{floor_int, parse_real, ContinuedFraction};
use crate::error::{Error, Result};
use crate::word::Word;

/// Default cap on the number of letters of a single constructed word.
pub const DEFAULT_WORD_BUDGET: usize = 1 << 28;

/// The words `s_{-1}, s_0, …, s_N` of one continued fraction.
#[derive(Clone, Debug)]
pub struct Approximants {
    cf: ContinuedFraction,
    words: Vec<Word>,
}

impl Approximants {
    /// Builds `s_{-1}` through `s_top`.
    pub fn new(cf: &ContinuedFraction, top: usize) -> Result<Self> {
        Self::with_budget(cf, top, DEFAULT_WORD_BUDGET)
    }

    pub fn with_budget(cf: &ContinuedFraction, top: usize, budget: usize) -> Result<Self> {
        let lengths = cf.length_table(top)?;
        if let Some(n) = (0..=top as i64).find(|&n| lengths.get_usize(n).is_none_or(|l| l > budget)) {
            return Err(Error::Resource(format!(
                "s_{n} has {} letters, above the budget of {budget}",
                lengths.get(n).expect("in table")
            )));
        }
        let mut words = vec![Word::letter(1), Word::letter(0)];
        for n in 1..=top {
            let a = cf.coefficients()[n - 1] as usize;
            let next = if n == 1 {
                let mut s1 = words[1].repeat(a - 1);
                s1.append(&words[0]);
                s1
            } else {
                let mut s = words[n].repeat(a);
                s.append(&words[n - 1]);
                s
            };
            words.push(next);
        }
        Ok(Self {
            cf: cf.clone(),
            words,
        })
    }

    /// Builds approximants until `|s_n| ≥ len` with `n ≥ min_level`.
    pub fn covering(cf: &ContinuedFraction, len: usize, min_level: usize) -> Result<Self> {
        let lengths = cf.length_table(cf.depth())?;
        let top = (min_level..=cf.depth())
            .find(|&n| lengths.get_usize(n as i64).is_none_or(|l| l >= len))
            .ok_or(Error::DepthExhausted {
                requested: cf.depth() as i64 + 1,
                available: cf.depth(),
            })?;
        Self::new(cf, top)
    }

    pub fn cf(&self) -> &ContinuedFraction {
        &self.cf
    }

    pub fn top(&self) -> usize {
        self.words.len() - 2
    }

    /// `s_n` for `-1 ≤ n ≤ top`.
    pub fn get(&self, n: i64) -> &Word {
        &self.words[(n + 1) as usize]
    }

    pub fn try_get(&self, n: i64) -> Option<&Word> {
        usize::try_from(n + 1).ok().and_then(|i| self.words.get(i))
    }

    pub fn len_of(&self, n: i64) -> usize {
        self.get(n).len()
    }

    /// Longest stored word; a prefix of `c_α` when `top ≥ 1`.
    pub fn longest(&self) -> &Word {
        self.words.last().expect("non-empty")
    }
}

/// `s_n` from `s_{-1} = 1`, `s_0 = 0`, `s_1 = s_0^{a_1−1} s_{−1}`,
/// `s_n = s_{n−1}^{a_n} s_{n−2}`.
pub fn build_sn(cf: &ContinuedFraction, n: i64) -> Result<Word> {
    build_sn_with_budget(cf, n, DEFAULT_WORD_BUDGET)
}

pub fn build_sn_with_budget(cf: &ContinuedFraction, n: i64, budget: usize) -> Result<Word> {
    match n {
        i64::MIN..=-2 => Err(Error::InvalidArgument(format!("s_{n} is not defined"))),
        -1 => Ok(Word::letter(1)),
        0 => Ok(Word::letter(0)),
        _ => {
            let mut a = Approximants::with_budget(cf, n as usize, budget)?;
            Ok(a.words.pop().expect("non-empty"))
        }
    }
}

/// The first `len` letters of `c_α = lim s_n`.
pub fn c_prefix(cf: &ContinuedFraction, len: usize) -> Result<Word> {
    let approx = Approximants::covering(cf, len, 1)?;
    Ok(approx.longest().prefix(len))
}

/// A phase θ ∈ [0, 1), held exactly.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Phase(BigRational);

impl Phase {
    pub fn zero() -> Self {
        Phase(BigRational::zero())
    }

    pub fn new(theta: BigRational) -> Result<Self> {
        if theta.is_negative() || theta >= BigRational::one() {
            return Err(Error::InvalidArgument(format!("θ = {theta} is not in [0,1)")));
        }
        Ok(Phase(theta))
    }

    pub fn from_ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        Self::new(BigRational::new(num.into(), den.into()))
    }

    /// The exact binary value of the double.
    pub fn from_f64(theta: f64) -> Result<Self> {
        let r = BigRational::from_float(theta)
            .ok_or_else(|| Error::InvalidArgument(format!("θ = {theta} is not finite")))?;
        Self::new(r)
    }

    /// Decimal digits are taken at face value (`0.3` is exactly 3/10).
    pub fn parse(s: &str) -> Result<Self> {
        Self::new(parse_real(s)?.0)
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl Serialize for Phase {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Phase {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Phase::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Parameters of one operator `H_{λ,α,θ}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RotationParams {
    pub cf: ContinuedFraction,
    pub theta: Phase,
    pub lambda: f64,
}

impl RotationParams {
    pub fn new(cf: ContinuedFraction, theta: Phase, lambda: f64) -> Self {
        Self { cf, theta, lambda }
    }
}

/// `v_{α,θ}(n) = χ_[1−α,1)(nα + θ mod 1)` for `n ∈ [first, last]`.
///
/// Uses `v(n) = ⌊(n+1)α + θ⌋ − ⌊nα + θ⌋`, where every floor is decided
/// exactly from a rational bracket of α. Brackets start from the first
/// convergent whose denominator exceeds the window width and tighten as
/// needed; the last one is the enclosure implied by all stored coefficients.
pub fn rotation_word(params: &RotationParams, first: i64, last: i64) -> Result<Word> {
    rotation_letters(&params.cf, &params.theta, first, last)
}

pub fn rotation_letters(
    cf: &ContinuedFraction,
    theta: &Phase,
    first: i64,
    last: i64,
) -> Result<Word> {
    if last < first {
        return Ok(Word::new());
    }
    let floors = FloorOracle::new(cf, theta, (last - first + 2) as u128);
    let mut word = Word::with_capacity((last - first + 1) as usize);
    let mut prev = floors.floor(first).ok_or(Error::AmbiguousPosition { position: first })?;
    for n in first..=last {
        let next = floors
            .floor(n + 1)
            .ok_or(Error::AmbiguousPosition { position: n })?;
        let letter = &next - &prev;
        if !(letter.is_zero() || letter.is_one()) {
            return Err(Error::Internal(format!(
                "rotation letter at n = {n} evaluated to {letter}"
            )));
        }
        word.push(u8::from(letter.is_one()));
        prev = next;
    }
    Ok(word)
}

struct Bracket {
    lo: (BigInt, BigInt),
    hi: (BigInt, BigInt),
    small: Option<[i128; 4]>,
}

/// Decides `⌊kα + θ⌋` exactly.
struct FloorOracle {
    brackets: Vec<Bracket>,
    theta: (BigInt, BigInt),
    theta_small: Option<(i128, i128)>,
}

impl FloorOracle {
    fn new(cf: &ContinuedFraction, theta: &Phase, width: u128) -> Self {
        let conv = cf.convergents();
        let d = cf.depth();
        let start = (1..d)
            .find(|&k| conv[k].1.to_u128().is_none_or(|q| q > width))
            .unwrap_or(d);
        let mut brackets = Vec::new();
        for k in start..d {
            brackets.push(Self::bracket(conv[k].clone(), conv[k + 1].clone()));
        }
        let mediant = (&conv[d].0 + &conv[d - 1].0, &conv[d].1 + &conv[d - 1].1);
        brackets.push(Self::bracket(conv[d].clone(), mediant));
        let t = theta.as_rational();
        let theta = (t.numer().clone(), t.denom().clone());
        let theta_small = theta.0.to_i128().zip(theta.1.to_i128());
        Self {
            brackets,
            theta,
            theta_small,
        }
    }

    fn bracket(a: (BigInt, BigInt), b: (BigInt, BigInt)) -> Bracket {
        let (lo, hi) = if &a.0 * &b.1 < &b.0 * &a.1 { (a, b) } else { (b, a) };
        let small = match (lo.0.to_i128(), lo.1.to_i128(), hi.0.to_i128(), hi.1.to_i128()) {
            (Some(a), Some(b), Some(c), Some(d)) => Some([a, b, c, d]),
            _ => None,
        };
        Bracket { lo, hi, small }
    }

    fn floor(&self, k: i64) -> Option<BigInt> {
        if k == 0 {
            return Some(BigInt::zero());
        }
        self.brackets.iter().find_map(|b| {
            b.small
                .zip(self.theta_small)
                .and_then(|(s, t)| floor_small(k as i128, s, t))
                .unwrap_or_else(|| floor_big(k, b, &self.theta))
        })
    }
}

/// `Some(Some(f))` decided, `Some(None)` ambiguous, `None` overflow.
fn floor_small(k: i128, s: [i128; 4], t: (i128, i128)) -> Option<Option<BigInt>> {
    let affine = |p: i128, q: i128| -> Option<(i128, i128)> {
        let num = k.checked_mul(p)?.checked_mul(t.1)?.checked_add(t.0.checked_mul(q)?)?;
        Some((num, q.checked_mul(t.1)?))
    };
    let (mut a, mut b) = (affine(s[0], s[1])?, affine(s[2], s[3])?);
    if k < 0 {
        std::mem::swap(&mut a, &mut b);
    }
    let fa = a.0.div_euclid(a.1);
    let bound = fa.checked_add(1)?.checked_mul(b.1)?;
    Some((b.0 <= bound).then(|| BigInt::from(fa)))
}

fn floor_big(k: i64, b: &Bracket, theta: &(BigInt, BigInt)) -> Option<BigInt> {
    let k = BigInt::from(k);
    let affine = |(p, q): &(BigInt, BigInt)| {
        BigRational::new(&k * p * &theta.1 + &theta.0 * q, q * &theta.1)
    };
    let (mut lo, mut hi) = (affine(&b.lo), affine(&b.hi));
    if k.is_negative() {
        std::mem::swap(&mut lo, &mut hi);
    }
    let f = floor_int(&lo);
    (hi <= BigRational::from_integer(&f + 1)).then_some(f)
}

/// `(π_n, tail)` with `s_n = π_n · tail`, tail `10` for even `n` and `01`
/// for odd `n`, and `π_n` a palindrome.
pub fn palindrome_factor(cf: &ContinuedFraction, n: usize) -> Result<(Word, Word)> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "palindromic factorisation needs n ≥ 2, got {n}"
        )));
    }
    let s = build_sn(cf, n as i64)?;
    let split = s.len() - 2;
    let (pi, tail) = (s.prefix(split), s.suffix(2));
    let expected: Word = if n % 2 == 0 { "10" } else { "01" }.parse()?;
    if tail != expected || !pi.is_palindrome() {
        return Err(Error::Internal(format!(
            "s_{n} does not factor as palindrome·{expected}"
        )));
    }
    Ok((pi, tail))
}

/// Smallest `n ≥ 2` with `|s_n| > len`.
pub(crate) fn scan_level(cf: &ContinuedFraction, len: usize) -> Result<usize> {
    let lengths = cf.length_table(cf.depth())?;
    (2..=cf.depth())
        .find(|&n| lengths.get_usize(n as i64).is_none_or(|l| l > len))
        .filter(|&n| n + 2 <= cf.depth())
        .ok_or(Error::DepthExhausted {
            requested: cf.depth() as i64 + 1,
            available: cf.depth(),
        })
}

/// All words of length `ell` in `W_α`, read off `s_{n+2}` for the smallest
/// `n ≥ 2` with `|s_n| > ell` (every such word occurs there).
pub fn subwords(cf: &ContinuedFraction, ell: usize) -> Result<BTreeSet<Word>> {
    if ell == 0 {
        return Err(Error::InvalidArgument("subword length must be positive".into()));
    }
    let n = scan_level(cf, ell)?;
    let host = build_sn(cf, n as i64 + 2)?;
    Ok(windows(&host, ell))
}

/// Distinct length-`ell` factors of `w`.
pub fn windows(w: &Word, ell: usize) -> BTreeSet<Word> {
    if ell > w.len() {
        return BTreeSet::new();
    }
    (0..=w.len() - ell).map(|i| w.slice(i..i + ell)).collect()
}

pub fn reverse(w: &Word) -> Word {
    w.reversed()
}

/// Fraction of ones in `w`.
pub fn letter_density(w: &Word) -> f64 {
    if w.is_empty() {
        return 0.0;
    }
    w.count_ones() as f64 / w.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    /// Floating-point rotation formula, usable only where no point is near a
    /// boundary; independent of the exact oracle.
    fn rotation_float(alpha: f64, theta: f64, first: i64, last: i64) -> Word {
        (first..=last)
            .map(|n| {
                let x = (n as f64 * alpha + theta).rem_euclid(1.0);
                u8::from(x >= 1.0 - alpha)
            })
            .collect()
    }

    #[test]
    fn base_words() {
        let cf = ContinuedFraction::silver();
        assert_eq!(build_sn(&cf, -1).unwrap(), w("1"));
        assert_eq!(build_sn(&cf, 0).unwrap(), w("0"));
        assert!(build_sn(&cf, -2).is_err());
    }

    #[test]
    fn fibonacci_words() {
        let cf = ContinuedFraction::fibonacci();
        let expected = ["1", "0", "1", "10", "101", "10110", "10110101"];
        for (i, e) in expected.iter().enumerate() {
            assert_eq!(build_sn(&cf, i as i64 - 1).unwrap(), w(e));
        }
    }

    #[test]
    fn silver_words() {
        let cf = ContinuedFraction::silver();
        assert_eq!(build_sn(&cf, 1).unwrap(), w("01"));
        assert_eq!(build_sn(&cf, 2).unwrap(), w("01010"));
    }

    #[test]
    fn word_budget() {
        let cf = ContinuedFraction::fibonacci();
        assert!(matches!(
            build_sn_with_budget(&cf, 30, 1000),
            Err(Error::Resource(_))
        ));
        assert!(matches!(
            build_sn(&ContinuedFraction::new(vec![1, 1]).unwrap(), 3),
            Err(Error::DepthExhausted { .. })
        ));
    }

    #[test]
    fn c_alpha_prefixes() {
        let cf = ContinuedFraction::fibonacci();
        assert_eq!(c_prefix(&cf, 8).unwrap(), w("10110101"));
        let s6 = build_sn(&cf, 6).unwrap();
        assert_eq!(c_prefix(&cf, 13).unwrap(), s6);
        for n in 1..12 {
            let s = build_sn(&cf, n).unwrap();
            assert_eq!(c_prefix(&cf, s.len()).unwrap(), s);
        }
    }

    #[test]
    fn rotation_matches_c_alpha() {
        let cf = ContinuedFraction::fibonacci();
        let params = RotationParams::new(cf.clone(), Phase::zero(), 1.0);
        assert_eq!(rotation_word(&params, 1, 1).unwrap(), w("1"));
        assert_eq!(rotation_word(&params, 0, 0).unwrap(), w("0"));
        assert_eq!(rotation_word(&params, 1, 8).unwrap(), w("10110101"));
        let s12 = build_sn(&cf, 12).unwrap();
        assert_eq!(rotation_word(&params, 1, s12.len() as i64).unwrap(), s12);
    }

    #[test]
    fn rotation_agrees_with_floats_away_from_boundaries() {
        let alpha = (5f64.sqrt() - 1.0) / 2.0;
        let cf = ContinuedFraction::fibonacci();
        for theta in ["0.25", "0.3", "0.7"] {
            let t = Phase::parse(theta).unwrap();
            let exact = rotation_letters(&cf, &t, -500, 500).unwrap();
            let approx = rotation_float(alpha, t.to_f64(), -500, 500);
            assert_eq!(exact, approx, "θ = {theta}");
        }
    }

    #[test]
    fn rotation_precision_error_on_short_expansion() {
        // two coefficients cannot resolve a long window
        let cf = ContinuedFraction::new(vec![1, 1]).unwrap();
        let err = rotation_letters(&cf, &Phase::zero(), 1, 100).unwrap_err();
        assert!(matches!(err, Error::AmbiguousPosition { .. }));
    }

    #[test]
    fn palindromes() {
        let cf = ContinuedFraction::fibonacci();
        let (pi4, tail4) = palindrome_factor(&cf, 4).unwrap();
        assert_eq!((pi4, tail4), (w("101"), w("10")));
        let (pi5, tail5) = palindrome_factor(&cf, 5).unwrap();
        assert_eq!((pi5, tail5), (w("101101"), w("01")));
        assert!(palindrome_factor(&cf, 1).is_err());
        for cf in [
            ContinuedFraction::silver(),
            ContinuedFraction::new(vec![3, 1, 4, 1, 5, 9, 2, 6, 5, 3]).unwrap(),
        ] {
            for n in 2..=9 {
                let (pi, _) = palindrome_factor(&cf, n).unwrap();
                assert_eq!(reverse(&pi), pi);
            }
        }
    }

    #[test]
    fn small_subword_sets() {
        let cf = ContinuedFraction::fibonacci();
        let one: Vec<String> = subwords(&cf, 1).unwrap().iter().map(|x| x.to_string()).collect();
        assert_eq!(one, vec!["0", "1"]);
        let two: BTreeSet<Word> = subwords(&cf, 2).unwrap();
        assert_eq!(two, ["10", "01", "11"].iter().map(|s| w(s)).collect());
        assert_eq!(subwords(&cf, 3).unwrap().len(), 4);
        assert!(subwords(&cf, 0).is_err());
    }

    /// Exhaustive oracle: scan a long prefix of c_α directly.
    #[test]
    fn complexity_is_ell_plus_one() {
        for cf in [ContinuedFraction::fibonacci(), ContinuedFraction::silver()] {
            let long = c_prefix(&cf, 20_000).unwrap();
            for ell in 1..=50 {
                let set = subwords(&cf, ell).unwrap();
                assert_eq!(set.len(), ell + 1);
                assert_eq!(set, windows(&long, ell));
            }
        }
    }

    #[test]
    fn prefix_identity() {
        let cf = ContinuedFraction::new(vec![2, 1, 3, 1, 1, 4, 2, 1, 1, 2, 1, 1]).unwrap();
        let a = Approximants::new(&cf, 12).unwrap();
        for n in 2..=12 {
            let joined = a.get(n - 1).concat(a.get(n));
            assert!(a.get(n).is_prefix_of(&joined), "n = {n}");
        }
    }

    #[test]
    fn density_tends_to_alpha() {
        let cf = ContinuedFraction::fibonacci();
        let alpha = cf.to_f64();
        let coarse = (letter_density(&c_prefix(&cf, 100).unwrap()) - alpha).abs();
        let fine = (letter_density(&c_prefix(&cf, 100_000).unwrap()) - alpha).abs();
        assert!(fine < 1e-4);
        assert!(fine < coarse);
    }
}
