//! Continued fraction representation of the rotation number.
//!
//! α is always carried by its coefficients `[a_1, a_2, …, a_D]`; a float is
//! never used to decide anything combinatorial. Expansion of a real input is
//! done on an exact rational interval that contains the input, and a
//! coefficient is only emitted when every point of the interval agrees on it.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of stored coefficients.
pub const DEFAULT_DEPTH: usize = 64;

/// Minimum number of coefficients a continued fraction must carry.
pub const MIN_DEPTH: usize = 2;

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct ContinuedFraction {
    coeffs: Vec<u64>,
}

impl fmt::Debug for ContinuedFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ContinuedFraction{:?}", self.coeffs)
    }
}

impl fmt::Display for ContinuedFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|a| a.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

impl TryFrom<Vec<u64>> for ContinuedFraction {
    type Error = Error;

    fn try_from(coeffs: Vec<u64>) -> Result<Self> {
        Self::new(coeffs)
    }
}

impl From<ContinuedFraction> for Vec<u64> {
    fn from(cf: ContinuedFraction) -> Self {
        cf.coeffs
    }
}

impl ContinuedFraction {
    pub fn new(coeffs: Vec<u64>) -> Result<Self> {
        if coeffs.len() < MIN_DEPTH {
            return Err(Error::InvalidCoefficients(format!(
                "at least {MIN_DEPTH} coefficients are required, got {}",
                coeffs.len()
            )));
        }
        if let Some(k) = coeffs.iter().position(|&a| a == 0) {
            return Err(Error::InvalidCoefficients(format!(
                "coefficient a_{} is 0; every a_k must be at least 1",
                k + 1
            )));
        }
        Ok(Self { coeffs })
    }

    /// `pattern` repeated until `depth` coefficients are stored.
    pub fn periodic(pattern: &[u64], depth: usize) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::InvalidCoefficients("empty period".into()));
        }
        Self::new(pattern.iter().copied().cycle().take(depth).collect())
    }

    /// Golden mean α = (√5 − 1)/2 = [1, 1, 1, …].
    pub fn fibonacci() -> Self {
        Self::periodic(&[1], DEFAULT_DEPTH).expect("valid preset")
    }

    /// Silver mean α = √2 − 1 = [2, 2, 2, …].
    pub fn silver() -> Self {
        Self::periodic(&[2], DEFAULT_DEPTH).expect("valid preset")
    }

    /// Named presets: `fibonacci`, `silver`, `one-two` (= [1,2,1,2,…]).
    pub fn preset(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "fibonacci" | "golden" => Ok(Self::fibonacci()),
            "silver" => Ok(Self::silver()),
            "one-two" | "onetwo" | "12" => Self::periodic(&[1, 2], DEFAULT_DEPTH),
            other => Err(Error::InvalidArgument(format!("unknown preset {other:?}"))),
        }
    }

    /// Parses a comma-separated coefficient list, e.g. `1,1,2,3`.
    pub fn parse_list(s: &str) -> Result<Self> {
        let coeffs = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<u64>()
                    .map_err(|e| Error::InvalidCoefficients(format!("{t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(coeffs)
    }

    pub fn depth(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coefficients(&self) -> &[u64] {
        &self.coeffs
    }

    /// The coefficient `a_k`, 1-based.
    pub fn coefficient(&self, k: usize) -> Result<u64> {
        if k == 0 || k > self.depth() {
            return Err(Error::DepthExhausted {
                requested: k as i64,
                available: self.depth(),
            });
        }
        Ok(self.coeffs[k - 1])
    }

    pub fn max_coefficient(&self) -> u64 {
        self.coeffs.iter().copied().max().unwrap_or(0)
    }

    /// Expands a double. The double is treated as a real number known to
    /// within one relative unit of roundoff.
    pub fn expand(x: f64, depth: usize) -> Result<Self> {
        if !x.is_finite() || x <= 0.0 || x >= 1.0 {
            return Err(Error::InvalidArgument(format!("α = {x} is not in (0,1)")));
        }
        let centre = BigRational::from_float(x).expect("finite");
        let radius = &centre * BigRational::from_float(f64::EPSILON).expect("finite");
        Self::expand_interval(&(&centre - &radius), &(&centre + &radius), depth)
    }

    /// Expands a decimal (`0.6180339887`) or ratio (`3/7`) string. A decimal
    /// is known to within half a unit in its last digit; a ratio is exact.
    pub fn expand_str(s: &str, depth: usize) -> Result<Self> {
        let (centre, radius) = parse_real(s)?;
        Self::expand_interval(&(&centre - &radius), &(&centre + &radius), depth)
    }

    /// Expands an exact rational. The expansion terminates, so this only
    /// succeeds when the rational has at least `depth` coefficients
    /// (using `[…, k] = […, k−1, 1]` for the final one).
    pub fn expand_rational(x: &BigRational, depth: usize) -> Result<Self> {
        Self::expand_interval(x, x, depth)
    }

    /// Expands every real in the closed interval `[lo, hi]` simultaneously;
    /// fails as soon as the interval does not pin down the next coefficient.
    pub fn expand_interval(lo: &BigRational, hi: &BigRational, depth: usize) -> Result<Self> {
        if depth < MIN_DEPTH {
            return Err(Error::InvalidArgument(format!(
                "depth must be at least {MIN_DEPTH}"
            )));
        }
        if lo > hi || !lo.is_positive() || *hi >= BigRational::one() {
            return Err(Error::InvalidArgument(
                "expansion interval must lie inside (0,1)".into(),
            ));
        }
        let mut lo = lo.clone();
        let mut hi = hi.clone();
        let mut coeffs: Vec<u64> = Vec::with_capacity(depth);
        while coeffs.len() < depth {
            let k = coeffs.len() + 1;
            if !lo.is_positive() {
                return Err(Error::Precision(format!(
                    "coefficient a_{k} is not determined: the input is indistinguishable \
                     from a rational with {} coefficients",
                    k - 1
                )));
            }
            let r_lo = hi.recip();
            let r_hi = lo.recip();
            let a = r_lo.floor();
            if a != r_hi.floor() {
                return Err(Error::Precision(format!(
                    "coefficient a_{k} is not determined at the working precision"
                )));
            }
            let a_u64 = a.to_integer().to_u64().ok_or_else(|| {
                Error::Precision(format!("coefficient a_{k} overflows 64 bits"))
            })?;
            let next_lo = &r_lo - &a;
            let next_hi = &r_hi - &a;
            if next_hi.is_zero() {
                // exact rational whose expansion ends here
                match depth - coeffs.len() {
                    1 => coeffs.push(a_u64),
                    2 if a_u64 >= 2 => {
                        coeffs.push(a_u64 - 1);
                        coeffs.push(1);
                    }
                    _ => {
                        return Err(Error::Precision(format!(
                            "rational input: expansion terminates at a_{k}, \
                             before the requested depth {depth}"
                        )))
                    }
                }
                break;
            }
            coeffs.push(a_u64);
            lo = next_lo;
            hi = next_hi;
        }
        Self::new(coeffs)
    }

    /// Numerator and denominator sequences `p_k, q_k` for `k = -1..=D`
    /// (index `k + 1`).
    fn convergent_table(&self) -> (Vec<BigInt>, Vec<BigInt>) {
        let mut p = vec![BigInt::one(), BigInt::zero()];
        let mut q = vec![BigInt::zero(), BigInt::one()];
        for &a in &self.coeffs {
            let a = BigInt::from(a);
            let k = p.len();
            p.push(&a * &p[k - 1] + &p[k - 2]);
            q.push(&a * &q[k - 1] + &q[k - 2]);
        }
        (p, q)
    }

    /// The `n`-th convergent `p_n/q_n = [a_1, …, a_n]`, `1 ≤ n ≤ D`.
    pub fn value(&self, n: usize) -> Result<BigRational> {
        let (p, q) = self.convergent_pair(n)?;
        Ok(BigRational::new(p, q))
    }

    pub fn convergent_pair(&self, n: usize) -> Result<(BigInt, BigInt)> {
        if n == 0 || n > self.depth() {
            return Err(Error::DepthExhausted {
                requested: n as i64,
                available: self.depth(),
            });
        }
        let (p, q) = self.convergent_table();
        Ok((p[n + 1].clone(), q[n + 1].clone()))
    }

    /// All convergents `(p_k, q_k)` for `k = 0..=D`.
    pub fn convergents(&self) -> Vec<(BigInt, BigInt)> {
        let (p, q) = self.convergent_table();
        p.into_iter().zip(q).skip(1).collect()
    }

    /// Open interval known to contain α given only the stored coefficients:
    /// between `p_D/q_D` and the mediant `(p_D + p_{D−1})/(q_D + q_{D−1})`.
    pub fn alpha_enclosure(&self) -> (BigRational, BigRational) {
        let (p, q) = self.convergent_table();
        let d = self.depth() + 1;
        let a = BigRational::new(p[d].clone(), q[d].clone());
        let b = BigRational::new(&p[d] + &p[d - 1], &q[d] + &q[d - 1]);
        if a < b {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// Floating-point approximation of α (display and diagnostics only).
    pub fn to_f64(&self) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0_f64, |tail, &a| 1.0 / (a as f64 + tail))
    }

    /// Running means `(1/n) Σ_{j≤n} a_j`, `n = 1..=D`.
    pub fn bounded_density_profile(&self) -> Vec<f64> {
        let mut sum = 0.0;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                sum += a as f64;
                sum / (i + 1) as f64
            })
            .collect()
    }

    /// Lengths `|s_n|`, `n = -1..=max_level`.
    pub fn length_table(&self, max_level: usize) -> Result<LengthTable> {
        if max_level > self.depth() {
            return Err(Error::DepthExhausted {
                requested: max_level as i64,
                available: self.depth(),
            });
        }
        let mut lengths = vec![BigUint::one(), BigUint::one()];
        for n in 1..=max_level {
            let a = BigUint::from(self.coeffs[n - 1]);
            let next = if n == 1 {
                a
            } else {
                &a * &lengths[n] + &lengths[n - 1]
            };
            lengths.push(next);
        }
        Ok(LengthTable { lengths })
    }
}

/// `|s_{-1}|, |s_0|, …, |s_N|` as exact integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LengthTable {
    lengths: Vec<BigUint>,
}

impl LengthTable {
    pub fn max_level(&self) -> usize {
        self.lengths.len() - 2
    }

    /// `|s_n|` for `-1 ≤ n ≤ N`.
    pub fn get(&self, n: i64) -> Option<&BigUint> {
        usize::try_from(n + 1).ok().and_then(|i| self.lengths.get(i))
    }

    pub fn get_usize(&self, n: i64) -> Option<usize> {
        self.get(n).and_then(|l| l.to_usize())
    }

    pub fn get_f64(&self, n: i64) -> Option<f64> {
        self.get(n).and_then(|l| l.to_f64())
    }

    pub fn as_slice(&self) -> &[BigUint] {
        &self.lengths
    }
}

/// Parses `0.123`, `.5`, `3/7` into (centre, radius) with exact rationals.
pub(crate) fn parse_real(s: &str) -> Result<(BigRational, BigRational)> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("cannot parse {s:?} as a real number"));
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok((BigRational::new(num, den), BigRational::zero()));
    }
    let (int_part, frac_part) = s.split_once('.').unwrap_or((s, ""));
    if !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let negative = int_part.starts_with('-');
    let int_digits = int_part.trim_start_matches(['-', '+']);
    if !int_digits.chars().all(|c| c.is_ascii_digit()) || (int_digits.is_empty() && frac_part.is_empty())
    {
        return Err(bad());
    }
    let digits = format!("{int_digits}{frac_part}");
    let mut num: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| bad())?
    };
    if negative {
        num = -num;
    }
    let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
    let centre = BigRational::new(num, scale.clone());
    let radius = if frac_part.is_empty() && !s.contains('.') {
        BigRational::zero()
    } else {
        BigRational::new(BigInt::one(), scale * 2)
    };
    Ok((centre, radius))
}

/// Floor of an exact rational as an integer.
pub(crate) fn floor_int(x: &BigRational) -> BigInt {
    x.numer().div_floor(x.denom())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exact comparison p/q < (√5−1)/2, i.e. (2p+q)² < 5q² for positive p, q.
    fn below_golden(p: &BigInt, q: &BigInt) -> bool {
        let lhs = (p * 2 + q) * (p * 2 + q);
        lhs < q * q * 5
    }

    /// Textbook Euclid on a double with a hard iteration cap: independent of
    /// the interval expansion.
    fn naive_expansion(mut x: f64, depth: usize) -> Vec<u64> {
        let mut out = Vec::new();
        for _ in 0..depth {
            let r = 1.0 / x;
            let a = r.floor();
            out.push(a as u64);
            x = r - a;
        }
        out
    }

    #[test]
    fn expands_golden_mean() {
        let x = (5f64.sqrt() - 1.0) / 2.0;
        let cf = ContinuedFraction::expand(x, 20).unwrap();
        assert_eq!(cf.coefficients(), &[1; 20]);
        assert_eq!(naive_expansion(x, 20), vec![1; 20]);
    }

    #[test]
    fn expands_silver_mean() {
        let x = 2f64.sqrt() - 1.0;
        let cf = ContinuedFraction::expand(x, 10).unwrap();
        assert_eq!(cf.coefficients(), &[2; 10]);
        assert_eq!(naive_expansion(x, 10), vec![2; 10]);
    }

    #[test]
    fn rational_input_is_a_precision_error() {
        assert!(matches!(
            ContinuedFraction::expand(0.5, 5),
            Err(Error::Precision(_))
        ));
        assert!(matches!(
            ContinuedFraction::expand_str("1/2", 5),
            Err(Error::Precision(_))
        ));
        assert!(matches!(
            ContinuedFraction::expand_str("0.5", 5),
            Err(Error::Precision(_))
        ));
    }

    #[test]
    fn double_precision_is_finite() {
        let x = (5f64.sqrt() - 1.0) / 2.0;
        // q_n² must stay below ~1/ε; depth 60 needs q ~ 1.5e12 → fails.
        assert!(matches!(
            ContinuedFraction::expand(x, 60),
            Err(Error::Precision(_))
        ));
        // ten decimal digits resolve roughly two dozen golden coefficients
        let short = ContinuedFraction::expand_str("0.6180339887", 20).unwrap();
        assert_eq!(short.coefficients(), &[1; 20]);
        assert!(ContinuedFraction::expand_str("0.6180339887", 32).is_err());
    }

    #[test]
    fn rejects_zero_coefficients_and_short_sequences() {
        assert!(matches!(
            ContinuedFraction::parse_list("1,0,1"),
            Err(Error::InvalidCoefficients(_))
        ));
        assert!(ContinuedFraction::new(vec![3]).is_err());
        assert!(ContinuedFraction::parse_list("1, 2,3").is_ok());
    }

    #[test]
    fn convergents_of_golden_mean() {
        let cf = ContinuedFraction::fibonacci();
        assert_eq!(
            cf.value(5).unwrap(),
            BigRational::new(BigInt::from(5), BigInt::from(8))
        );
        // alternation: odd convergents above α, even below
        for n in 1..=40 {
            let (p, q) = cf.convergent_pair(n).unwrap();
            assert_eq!(below_golden(&p, &q), n % 2 == 0, "n = {n}");
        }
    }

    #[test]
    fn silver_first_convergent() {
        let cf = ContinuedFraction::silver();
        assert_eq!(
            cf.value(1).unwrap(),
            BigRational::new(BigInt::from(1), BigInt::from(2))
        );
        assert!(cf.value(0).is_err());
        assert!(cf.value(65).is_err());
    }

    #[test]
    fn enclosure_contains_golden_mean() {
        let cf = ContinuedFraction::periodic(&[1], 30).unwrap();
        let (lo, hi) = cf.alpha_enclosure();
        assert!(below_golden(lo.numer(), lo.denom()));
        assert!(!below_golden(hi.numer(), hi.denom()));
    }

    #[test]
    fn density_profiles() {
        assert!(ContinuedFraction::fibonacci()
            .bounded_density_profile()
            .iter()
            .all(|&m| m == 1.0));

        let arith = ContinuedFraction::new((1..=10).collect()).unwrap();
        let means = arith.bounded_density_profile();
        for (j, m) in means.iter().enumerate() {
            assert_eq!(*m, (j as f64 + 2.0) / 2.0);
        }
        assert!(means.windows(2).all(|w| w[1] > w[0]));

        let alt = ContinuedFraction::preset("one-two").unwrap();
        let last = *alt.bounded_density_profile().last().unwrap();
        assert!((last - 1.5).abs() < 1e-12);
    }

    #[test]
    fn length_tables() {
        let fib = ContinuedFraction::fibonacci().length_table(6).unwrap();
        let got: Vec<usize> = (-1..=6).map(|n| fib.get_usize(n).unwrap()).collect();
        assert_eq!(got, vec![1, 1, 1, 2, 3, 5, 8, 13]);

        let silver = ContinuedFraction::silver().length_table(3).unwrap();
        assert_eq!(silver.get_usize(1), Some(2));
        assert_eq!(silver.get_usize(2), Some(5));
        assert_eq!(silver.get_usize(3), Some(12));

        assert!(ContinuedFraction::fibonacci().length_table(65).is_err());
    }

    #[test]
    fn lengths_are_convergent_denominators() {
        let cf = ContinuedFraction::new(vec![3, 1, 4, 1, 5, 9, 2, 6]).unwrap();
        let table = cf.length_table(8).unwrap();
        for (n, (_, q)) in cf.convergents().iter().enumerate().skip(1) {
            assert_eq!(BigInt::from(table.get(n as i64).unwrap().clone()), *q);
        }
    }

    #[test]
    fn json_is_an_integer_array() {
        let cf = ContinuedFraction::new(vec![1, 2, 3]).unwrap();
        assert_eq!(serde_json::to_string(&cf).unwrap(), "[1,2,3]");
        let back: ContinuedFraction = serde_json::from_str("[1,2,3]").unwrap();
        assert_eq!(back, cf);
        assert!(serde_json::from_str::<ContinuedFraction>("[1,0,3]").is_err());
    }

    #[test]
    fn parse_real_forms() {
        let (c, r) = parse_real("0.25").unwrap();
        assert_eq!(c, BigRational::new(1.into(), 4.into()));
        assert_eq!(r, BigRational::new(1.into(), 200.into()));
        let (c, r) = parse_real("3/7").unwrap();
        assert_eq!(c, BigRational::new(3.into(), 7.into()));
        assert!(r.is_zero());
        assert!(parse_real("abc").is_err());
        assert!(parse_real("1/0").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn round_trip_through_last_convergent(coeffs in prop::collection::vec(1u64..12, 2..24)) {
                let cf = ContinuedFraction::new(coeffs.clone()).unwrap();
                let d = cf.depth();
                let back = ContinuedFraction::expand_rational(&cf.value(d).unwrap(), d).unwrap();
                prop_assert_eq!(&back.coefficients()[..d - 1], &coeffs[..d - 1]);
            }

            #[test]
            fn length_recursion_is_exact(coeffs in prop::collection::vec(1u64..1000, 2..40)) {
                let cf = ContinuedFraction::new(coeffs.clone()).unwrap();
                let t = cf.length_table(cf.depth()).unwrap();
                prop_assert_eq!(t.get(1).unwrap(), &BigUint::from(coeffs[0]));
                for n in 2..=cf.depth() as i64 {
                    let a = BigUint::from(coeffs[n as usize - 1]);
                    prop_assert_eq!(t.get(n).unwrap(), &(a * t.get(n - 1).unwrap() + t.get(n - 2).unwrap()));
                    prop_assert!(t.get(n).unwrap() > t.get(n - 1).unwrap());
                }
            }

            #[test]
            fn running_mean_bounded_by_max(coeffs in prop::collection::vec(1u64..50, 2..64)) {
                let cf = ContinuedFraction::new(coeffs).unwrap();
                let cap = cf.max_coefficient() as f64;
                prop_assert!(cf.bounded_density_profile().iter().all(|&m| m <= cap));
            }
        }
    }
}
