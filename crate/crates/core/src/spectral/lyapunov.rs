//! Lyapunov exponent estimates from the `s_n` products, the `F^(n)`
//! certificate, and normalised log-norms along rotation words.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cf::ContinuedFraction;
use crate::error::{Error, Result};
use crate::sturmian::{build_sn, c_prefix, rotation_word, RotationParams};
use crate::transfer::{word_product, Energy, PrefixProducts, SnProducts};
use crate::word::Word;

/// Default stabilisation tolerance of the `F^(n)` certificate.
pub const DEFAULT_CERT_TOL: f64 = 1e-2;

/// Coefficient size above which the bounded-coefficient hypothesis is
/// reported as doubtful.
pub const BOUNDED_COEFFICIENT_LIMIT: u64 = 1000;

/// A real functional on words, evaluated at least on the approximants.
pub trait WordFunctional: Sync {
    fn eval(&self, w: &Word) -> Result<f64>;

    /// `F(s_n)`; the default builds the word.
    fn eval_sn(&self, cf: &ContinuedFraction, n: usize) -> Result<Vec<f64>> {
        (0..=n).map(|k| self.eval(&build_sn(cf, k as i64)?)).collect()
    }
}

/// `F(w) = |w|`.
pub struct WordLength;

impl WordFunctional for WordLength {
    fn eval(&self, w: &Word) -> Result<f64> {
        Ok(w.len() as f64)
    }
}

/// `F(w) = #1(w)`.
pub struct OnesCount;

impl WordFunctional for OnesCount {
    fn eval(&self, w: &Word) -> Result<f64> {
        Ok(w.count_ones() as f64)
    }
}

/// `F(w) = L(λ,E)(w) = ln ‖M(λ,E,w)‖`.
pub struct LogNorm {
    pub lambda: f64,
    pub energy: Energy,
}

impl WordFunctional for LogNorm {
    fn eval(&self, w: &Word) -> Result<f64> {
        Ok(word_product(self.lambda, self.energy, w)?.log_norm())
    }

    fn eval_sn(&self, cf: &ContinuedFraction, n: usize) -> Result<Vec<f64>> {
        let table = SnProducts::new(self.lambda, self.energy, cf, n.max(1))?;
        Ok((0..=n).map(|k| table.get(k as i64).log_norm()).collect())
    }
}

/// One level of the `F^(n)` sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LevelSample {
    pub n: usize,
    pub len: f64,
    pub value: f64,
    /// `F(s_n)/|s_n|`.
    pub rate: f64,
    /// `F(s_{n−1})/|s_{n−1}|`.
    pub prev_rate: f64,
    /// `F^(n)`, the larger of the two rates.
    pub f_upper: f64,
    /// `min_{k ≤ n} F^(k)`.
    pub inf_f: f64,
}

/// `inf_n F^(n)` with the stabilisation certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SubadditiveLimit {
    pub samples: Vec<LevelSample>,
    pub limit: f64,
    /// `|F^(last) − inf F|`.
    pub gap: f64,
    pub tolerance: f64,
    pub converged: bool,
    pub warnings: Vec<String>,
}

impl SubadditiveLimit {
    pub fn last(&self) -> &LevelSample {
        self.samples.last().expect("at least one level")
    }
}

fn coefficient_warnings(cf: &ContinuedFraction, max_level: usize) -> Vec<String> {
    let big = cf.coefficients()[..max_level]
        .iter()
        .copied()
        .max()
        .unwrap_or(1);
    if big > BOUNDED_COEFFICIENT_LIMIT {
        vec![format!(
            "coefficient {big} exceeds {BOUNDED_COEFFICIENT_LIMIT}; the bounded-coefficient hypothesis is doubtful"
        )]
    } else {
        Vec::new()
    }
}

fn level_samples(values: &[f64], cf: &ContinuedFraction, max_level: usize) -> Result<Vec<LevelSample>> {
    let lengths = cf.length_table(max_level)?;
    let len = |k: usize| lengths.get_f64(k as i64).expect("in table");
    let mut inf = f64::INFINITY;
    let mut out = Vec::with_capacity(max_level);
    for n in 1..=max_level {
        let rate = values[n] / len(n);
        let prev_rate = values[n - 1] / len(n - 1);
        let f_upper = rate.max(prev_rate);
        inf = inf.min(f_upper);
        out.push(LevelSample {
            n,
            len: len(n),
            value: values[n],
            rate,
            prev_rate,
            f_upper,
            inf_f: inf,
        });
    }
    Ok(out)
}

/// Spot-checks `F(ab) ≤ F(a) + F(b)` on random factors of `c_α`.
pub fn check_subadditive<F: WordFunctional + ?Sized>(
    f: &F,
    cf: &ContinuedFraction,
    trials: usize,
    max_len: usize,
    seed: u64,
) -> Result<()> {
    let host = c_prefix(cf, 4 * max_len.max(2))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let len = rng.random_range(2..=max_len.max(2));
        let start = rng.random_range(0..=host.len() - len);
        let cut = rng.random_range(1..len);
        let w = host.slice(start..start + len);
        let (a, b) = (w.prefix(cut), w.suffix(len - cut));
        let (fw, fa, fb) = (f.eval(&w)?, f.eval(&a)?, f.eval(&b)?);
        let slack = 1e-9 * (1.0 + fa.abs() + fb.abs());
        if fw > fa + fb + slack {
            return Err(Error::Contract(format!(
                "functional is not subadditive: F(ab) = {fw} > F(a) + F(b) = {}",
                fa + fb
            )));
        }
    }
    Ok(())
}

/// `lim F(w)/|w|` as `inf_n F^(n)`, after a subadditivity spot check.
pub fn subadditive_limit<F: WordFunctional + ?Sized>(
    f: &F,
    cf: &ContinuedFraction,
    max_level: usize,
    tol: f64,
) -> Result<SubadditiveLimit> {
    if max_level < 1 || max_level > cf.depth() {
        return Err(Error::DepthExhausted {
            requested: max_level as i64,
            available: cf.depth(),
        });
    }
    check_subadditive(f, cf, 50, 64, 0x5eed)?;
    let values = f.eval_sn(cf, max_level)?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("functional value".into()));
    }
    let samples = level_samples(&values, cf, max_level)?;
    let last = samples.last().expect("max_level ≥ 1");
    let gap = (last.f_upper - last.inf_f).abs();
    Ok(SubadditiveLimit {
        limit: last.inf_f,
        gap,
        tolerance: tol,
        converged: gap <= tol,
        warnings: coefficient_warnings(cf, max_level),
        samples,
    })
}

/// Estimate of `γ(E) = lim ln‖M(λ,E,s_n)‖ / |s_n|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LyapunovEstimate {
    pub lambda: f64,
    pub energy: Energy,
    pub samples: Vec<LevelSample>,
    pub inf_f: f64,
    pub gamma: f64,
    pub gap: f64,
    pub tolerance: f64,
    pub converged: bool,
    /// A-priori relative roundoff bound of the deepest product.
    pub error_bound: f64,
    pub warnings: Vec<String>,
}

impl LyapunovEstimate {
    pub fn f_upper(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.f_upper).collect()
    }

    pub fn rates(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.rate).collect()
    }
}

pub fn lyapunov_estimate(
    lambda: f64,
    energy: Energy,
    cf: &ContinuedFraction,
    max_level: usize,
) -> Result<LyapunovEstimate> {
    lyapunov_estimate_with_tol(lambda, energy, cf, max_level, DEFAULT_CERT_TOL)
}

pub fn lyapunov_estimate_with_tol(
    lambda: f64,
    energy: Energy,
    cf: &ContinuedFraction,
    max_level: usize,
    tol: f64,
) -> Result<LyapunovEstimate> {
    if max_level < 1 || max_level > cf.depth() {
        return Err(Error::DepthExhausted {
            requested: max_level as i64,
            available: cf.depth(),
        });
    }
    let table = SnProducts::new(lambda, energy, cf, max_level)?;
    let values: Vec<f64> = (0..=max_level)
        .map(|k| table.get(k as i64).log_norm())
        .collect();
    let samples = level_samples(&values, cf, max_level)?;
    let last = samples.last().expect("max_level ≥ 1");
    let gap = (last.f_upper - last.inf_f).abs();
    Ok(LyapunovEstimate {
        lambda,
        energy,
        inf_f: last.inf_f,
        gamma: last.inf_f.max(0.0),
        gap,
        tolerance: tol,
        converged: gap <= tol,
        error_bound: table.get(max_level as i64).error_bound(),
        warnings: coefficient_warnings(cf, max_level),
        samples,
    })
}

/// Largest level whose word length is at most `max_len`.
pub fn level_for_length(cf: &ContinuedFraction, max_len: usize) -> Result<usize> {
    let lengths = cf.length_table(cf.depth())?;
    (1..=cf.depth())
        .rev()
        .find(|&n| lengths.get_usize(n as i64).is_some_and(|l| l <= max_len))
        .ok_or_else(|| Error::InvalidArgument(format!("no level has |s_n| ≤ {max_len}")))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PhaseSample {
    pub len: usize,
    pub log_norm: f64,
    pub rate: f64,
}

/// `L(v^N)/N` along `v_{α,θ}(1) ⋯ v_{α,θ}(N)` for each requested `N`.
pub fn lyapunov_along_phase(
    energy: Energy,
    params: &RotationParams,
    lengths: &[usize],
) -> Result<Vec<PhaseSample>> {
    let mut wanted: Vec<usize> = lengths.to_vec();
    wanted.sort_unstable();
    wanted.dedup();
    let Some(&top) = wanted.last() else {
        return Ok(Vec::new());
    };
    if wanted[0] == 0 {
        return Err(Error::InvalidArgument("prefix lengths must be positive".into()));
    }
    let word = rotation_word(params, 1, top as i64)?;
    let mut acc = PrefixProducts::new(params.lambda, energy)?;
    let mut out = Vec::with_capacity(wanted.len());
    let mut next = wanted.iter().peekable();
    for (i, a) in word.letters().enumerate() {
        acc.push(a);
        if next.peek().is_some_and(|&&n| n == i + 1) {
            next.next();
            let l = acc.log_norm();
            out.push(PhaseSample {
                len: i + 1,
                log_norm: l,
                rate: l / (i + 1) as f64,
            });
        }
    }
    Ok(out)
}

/// Geometric sample of prefix lengths `1, 2, 4, …` ending exactly at `max`.
pub fn geometric_lengths(max: usize) -> Vec<usize> {
    let mut out: Vec<usize> = std::iter::successors(Some(1usize), |&n| n.checked_mul(2))
        .take_while(|&n| n < max)
        .collect();
    out.push(max);
    out
}

/// Random phases in `[0, 1)` with a short decimal expansion, from `seed`.
pub fn random_phases(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| f64::from(rng.random_range(0..1_000_000u32)) / 1e6)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sturmian::Phase;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    #[test]
    fn free_quarter_turn_has_zero_exponent() {
        let cf = ContinuedFraction::fibonacci();
        let est = lyapunov_estimate(0.0, Energy::real(0.0), &cf, 20).unwrap();
        assert_eq!(est.gamma, 0.0);
        assert!(est.samples.iter().all(|s| s.value.abs() < 1e-12));
    }

    #[test]
    fn hyperbolic_energy() {
        let cf = ContinuedFraction::fibonacci();
        let est = lyapunov_estimate(1.0, Energy::real(5.0), &cf, 20).unwrap();
        assert!(est.gamma > 1.0);
        // Between the free exponents for potentials 0 and 1.
        let free = |e: f64| ((e + (e * e - 4.0).sqrt()) / 2.0).ln();
        assert!(est.gamma < free(5.0) && est.gamma > free(4.0));
        let r = est.rates();
        let tail = &r[r.len() - 3..];
        assert!((tail[0] - tail[2]).abs() < 1e-4);
        assert!(est.converged);
    }

    #[test]
    fn certificate_sandwich() {
        for cf in [ContinuedFraction::fibonacci(), ContinuedFraction::silver()] {
            let est = lyapunov_estimate(1.0, Energy::new(2.0, 0.5), &cf, 18).unwrap();
            for s in &est.samples {
                assert!(est.inf_f <= s.f_upper);
                assert!(s.inf_f <= s.f_upper);
            }
            assert!(est.gamma >= 0.0 && est.gamma <= est.samples.last().unwrap().f_upper);
        }
    }

    #[test]
    fn length_and_frequency_limits() {
        let cf = ContinuedFraction::fibonacci();
        let len = subadditive_limit(&WordLength, &cf, 15, 1e-12).unwrap();
        assert_eq!(len.limit, 1.0);
        assert!(len.converged);

        let ones = subadditive_limit(&OnesCount, &cf, 18, 1e-2).unwrap();
        let prefix = c_prefix(&cf, 100_000).unwrap();
        let freq = prefix.count_ones() as f64 / prefix.len() as f64;
        let q = cf.length_table(18).unwrap();
        let gap = 1.0 / q.get_f64(17).unwrap();
        assert!((ones.limit - freq).abs() < gap + 1e-4, "{} vs {freq}", ones.limit);
        // Letter frequency of 1 is α for α = [0; 1, 1, …].
        assert!((freq - cf.to_f64()).abs() < 1e-4);
    }

    #[test]
    fn log_norm_functional_matches_estimate() {
        let cf = ContinuedFraction::silver();
        let f = LogNorm { lambda: 1.0, energy: Energy::new(0.3, 0.2) };
        let lim = subadditive_limit(&f, &cf, 10, 1e-2).unwrap();
        let est = lyapunov_estimate(1.0, Energy::new(0.3, 0.2), &cf, 10).unwrap();
        assert_eq!(lim.limit, est.inf_f);
    }

    struct Squared;
    impl WordFunctional for Squared {
        fn eval(&self, w: &Word) -> Result<f64> {
            Ok((w.len() * w.len()) as f64)
        }
    }

    #[test]
    fn superadditive_functional_is_rejected() {
        let cf = ContinuedFraction::fibonacci();
        assert!(matches!(
            subadditive_limit(&Squared, &cf, 8, 1e-2),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn phase_zero_matches_levels() {
        let cf = ContinuedFraction::fibonacci();
        let est = lyapunov_estimate(1.0, Energy::new(0.4, 0.1), &cf, 14).unwrap();
        let params = RotationParams::new(cf.clone(), Phase::zero(), 1.0);
        let lens: Vec<usize> = est.samples.iter().map(|s| s.len as usize).collect();
        let along = lyapunov_along_phase(Energy::new(0.4, 0.1), &params, &lens).unwrap();
        assert_eq!(along.len(), 14);
        for p in &along {
            let k = est.samples.iter().find(|s| s.len as usize == p.len).unwrap();
            assert_abs_diff_eq!(p.rate, k.rate, epsilon = 1e-9);
        }
    }

    #[test]
    fn single_letter_phase_sample() {
        let cf = ContinuedFraction::fibonacci();
        let params = RotationParams::new(cf, Phase::from_ratio(3, 10).unwrap(), 2.0);
        let e = Energy(Complex64::new(0.5, 0.0));
        let s = lyapunov_along_phase(e, &params, &[1]).unwrap();
        let w = rotation_word(&params, 1, 1).unwrap();
        let direct = word_product(2.0, e, &w).unwrap().log_norm();
        assert_abs_diff_eq!(s[0].rate, direct, epsilon = 1e-15);
    }

    #[test]
    fn helpers() {
        assert_eq!(geometric_lengths(10), vec![1, 2, 4, 8, 10]);
        assert_eq!(geometric_lengths(8), vec![1, 2, 4, 8]);
        let cf = ContinuedFraction::fibonacci();
        assert_eq!(level_for_length(&cf, 100_000).unwrap(), 24);
        assert_eq!(random_phases(3, 7), random_phases(3, 7));
    }
}
