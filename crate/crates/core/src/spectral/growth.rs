//! Power-law envelopes `ln‖M(λ,E,w)‖ ≤ ln C + μ ln|w|` and the two-block
//! bound for arbitrary factors of `c_α`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cf::ContinuedFraction;
use crate::error::{Error, Result};
use crate::partition::{is_member, two_block_decomposition};
use crate::sturmian::c_prefix;
use crate::transfer::{local_matrix, word_product, Energy, PrefixProducts};
use crate::word::Word;

/// Running mean of the coefficients above which the bounded-density
/// hypothesis is reported as doubtful.
pub const BOUNDED_DENSITY_LIMIT: f64 = 100.0;

/// A line `y = ln C + μ x` in `(ln|w|, L(w))` coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Envelope {
    pub ln_c: f64,
    pub mu: f64,
}

impl Envelope {
    /// Envelope value at length `len`; `0` for the empty word.
    pub fn at(&self, len: usize) -> f64 {
        if len == 0 {
            0.0
        } else {
            self.ln_c + self.mu * (len as f64).ln()
        }
    }

    /// `max_i L_i − envelope(len_i)`.
    pub fn max_violation(&self, points: &[(usize, f64)]) -> f64 {
        points
            .iter()
            .map(|&(len, l)| l - self.at(len))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Minimal envelope with `μ ≥ 0`: the supporting line of the upper hull
    /// at the middle of the sampled `ln|w|` range, with `ln C` raised until
    /// every point lies on or below it.
    pub fn fit(points: &[(usize, f64)]) -> Result<Envelope> {
        let mut best: Vec<(usize, f64)> = Vec::new();
        let mut sorted: Vec<(usize, f64)> = points.iter().copied().filter(|p| p.0 > 0).collect();
        if sorted.is_empty() {
            return Err(Error::InvalidArgument("envelope fit needs samples".into()));
        }
        if sorted.iter().any(|p| !p.1.is_finite()) {
            return Err(Error::NonFinite("log-norm sample".into()));
        }
        sorted.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        for p in sorted {
            match best.last_mut() {
                Some(last) if last.0 == p.0 => last.1 = p.1,
                _ => best.push(p),
            }
        }
        let xy: Vec<(f64, f64)> = best.iter().map(|&(n, l)| ((n as f64).ln(), l)).collect();
        let mut hull: Vec<(f64, f64)> = Vec::new();
        for &p in &xy {
            while hull.len() >= 2 {
                let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
                if cross >= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        let mid = 0.5 * (xy[0].0 + xy[xy.len() - 1].0);
        let mu = hull
            .windows(2)
            .find(|e| e[1].0 >= mid)
            .map(|e| (e[1].1 - e[0].1) / (e[1].0 - e[0].0))
            .unwrap_or(0.0)
            .max(0.0);
        let mut env = Envelope {
            ln_c: xy.iter().map(|&(x, y)| y - mu * x).fold(f64::NEG_INFINITY, f64::max),
            mu,
        };
        while env.max_violation(&best) > 0.0 {
            env.ln_c = env.ln_c.next_up();
        }
        Ok(env)
    }
}

/// Envelope data for one energy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EnergyFit {
    pub energy: Energy,
    /// Envelope over prefixes and random factors.
    pub envelope: Envelope,
    /// Envelope over the prefixes of `c_α` only (`Ĉ`, `μ̂`).
    pub prefix_envelope: Envelope,
    pub max_violation: f64,
    /// `max(‖T(λ,E,0)‖, ‖T(λ,E,1)‖)`.
    pub letter_norm: f64,
    pub points: usize,
    /// Largest `L(w)/|w|` seen among the samples.
    pub max_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GrowthFit {
    pub lambda: f64,
    pub max_len: usize,
    pub samples_per_length: usize,
    pub seed: u64,
    pub fits: Vec<EnergyFit>,
    /// Envelope over all energies' samples.
    pub envelope: Envelope,
    pub max_violation: f64,
    /// Largest per-energy exponent.
    pub mu_max: f64,
    pub warnings: Vec<String>,
}

impl GrowthFit {
    pub fn fit_for(&self, energy: Energy) -> Option<&EnergyFit> {
        self.fits.iter().find(|f| f.energy == energy)
    }
}

/// Geometric window lengths `2, 4, …` not exceeding `max_len`.
fn window_lengths(max_len: usize) -> Vec<usize> {
    std::iter::successors(Some(2usize), |&n| n.checked_mul(2))
        .take_while(|&n| n <= max_len)
        .collect()
}

/// `k` random factors of `c_α` per window length, drawn from `host`.
fn random_windows(host: &Word, max_len: usize, k: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for len in window_lengths(max_len) {
        for _ in 0..k {
            out.push((rng.random_range(0..=host.len() - len), len));
        }
    }
    out
}

/// `(|w|, L(w))` over all prefixes of `host` up to `max_len`.
fn prefix_points(lambda: f64, energy: Energy, host: &Word, max_len: usize) -> Result<Vec<(usize, f64)>> {
    let mut acc = PrefixProducts::new(lambda, energy)?;
    let mut out = Vec::with_capacity(max_len);
    for (i, a) in host.letters().take(max_len).enumerate() {
        acc.push(a);
        out.push((i + 1, acc.log_norm()));
    }
    Ok(out)
}

fn window_points(
    lambda: f64,
    energy: Energy,
    host: &Word,
    windows: &[(usize, usize)],
) -> Result<Vec<(usize, f64)>> {
    windows
        .iter()
        .map(|&(start, len)| {
            let l = word_product(lambda, energy, &host.slice(start..start + len))?.log_norm();
            Ok((len, l))
        })
        .collect()
}

fn letter_norm(lambda: f64, energy: Energy) -> f64 {
    local_matrix(lambda, energy, 0)
        .op_norm()
        .max(local_matrix(lambda, energy, 1).op_norm())
}

fn host_word(cf: &ContinuedFraction, max_len: usize) -> Result<Word> {
    c_prefix(cf, 4 * max_len.max(2))
}

/// Envelopes over all prefixes of `c_α` of length `≤ max_len` plus
/// `samples` random factors per geometric length.
pub fn growth_fit(
    lambda: f64,
    cf: &ContinuedFraction,
    energies: &[Energy],
    max_len: usize,
    samples: usize,
    seed: u64,
) -> Result<GrowthFit> {
    if energies.is_empty() {
        return Err(Error::InvalidArgument("growth fit needs at least one energy".into()));
    }
    if max_len < 2 {
        return Err(Error::InvalidArgument("maximal length must be at least 2".into()));
    }
    let host = host_word(cf, max_len)?;
    let windows = random_windows(&host, max_len, samples, seed);
    let fits = energies
        .par_iter()
        .map(|&energy| -> Result<(EnergyFit, Vec<(usize, f64)>)> {
            let prefixes = prefix_points(lambda, energy, &host, max_len)?;
            let mut all = window_points(lambda, energy, &host, &windows)?;
            all.extend_from_slice(&prefixes);
            let envelope = Envelope::fit(&all)?;
            let fit = EnergyFit {
                energy,
                envelope,
                prefix_envelope: Envelope::fit(&prefixes)?,
                max_violation: envelope.max_violation(&all),
                letter_norm: letter_norm(lambda, energy),
                points: all.len(),
                max_rate: all
                    .iter()
                    .map(|&(n, l)| l / n as f64)
                    .fold(0.0, f64::max),
            };
            Ok((fit, all))
        })
        .collect::<Result<Vec<_>>>()?;

    let merged: Vec<(usize, f64)> = fits.iter().flat_map(|(_, p)| p.iter().copied()).collect();
    let envelope = Envelope::fit(&merged)?;
    let fits: Vec<EnergyFit> = fits.into_iter().map(|(f, _)| f).collect();
    let mut warnings = Vec::new();
    let worst_mean = cf
        .bounded_density_profile()
        .into_iter()
        .fold(0.0, f64::max);
    if worst_mean > BOUNDED_DENSITY_LIMIT {
        warnings.push(format!(
            "running coefficient mean reaches {worst_mean:.1}; the bounded-density hypothesis is doubtful"
        ));
    }
    Ok(GrowthFit {
        lambda,
        max_len,
        samples_per_length: samples,
        seed,
        mu_max: fits.iter().map(|f| f.envelope.mu).fold(0.0, f64::max),
        max_violation: envelope.max_violation(&merged),
        envelope,
        fits,
        warnings,
    })
}

/// Largest violation of each per-energy envelope by a fresh sample of random
/// factors drawn with `seed`, of the same size as the fitted one.
pub fn resample_violation(cf: &ContinuedFraction, fit: &GrowthFit, seed: u64) -> Result<Vec<f64>> {
    let host = host_word(cf, fit.max_len)?;
    let windows = random_windows(&host, fit.max_len, fit.samples_per_length, seed);
    fit.fits
        .par_iter()
        .map(|f| {
            let points = window_points(fit.lambda, f.energy, &host, &windows)?;
            Ok(f.envelope.max_violation(&points))
        })
        .collect()
}

/// The two-block bound for one word, with its witness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CertifiedBound {
    pub energy: Energy,
    pub len: usize,
    pub t: usize,
    pub x: Word,
    pub y: Word,
    /// `ln ‖M(w)‖`.
    pub direct: f64,
    /// `ln(F²(Ĉ² + 1)) + 2μ̂ ln|w|`.
    pub log_bound: f64,
    /// `ln ‖M(x)‖ + ln ‖M(y)‖` bounded term by term.
    pub log_witness: f64,
    /// Whether `|x| − 2` and `|y|` lie within the fitted length range, so
    /// the envelope is used only where it was sampled.
    pub within_fit_range: bool,
}

/// Bounds `ln ‖M(λ,E,w)‖` through `w = x·y`: `y` is a prefix of `c_α` and
/// `x^R = b·a·v` with `v` a prefix of `c_α`, so
/// `‖M(w)‖ ≤ F² Ĉ|v|^μ̂ · Ĉ|y|^μ̂`.
pub fn certified_bound(
    lambda: f64,
    energy: Energy,
    w: &Word,
    cf: &ContinuedFraction,
    baseline: &GrowthFit,
) -> Result<CertifiedBound> {
    let fit = baseline.fit_for(energy).ok_or_else(|| {
        Error::InvalidArgument(format!("energy {:?} is not part of the baseline fit", energy.0))
    })?;
    if !is_member(w, cf)? {
        return Err(Error::NotInLanguage(w.to_string()));
    }
    let split = two_block_decomposition(w, cf)?;
    let env = fit.prefix_envelope;
    let f = fit.letter_norm;
    let prefix = c_prefix(cf, w.len().max(2))?;

    if !split.y.is_prefix_of(&prefix) {
        return Err(Error::Internal(format!("y = {} is not a prefix of c_α", split.y)));
    }
    let x_len = split.x.len();
    let log_x = match x_len {
        0 => 0.0,
        1 | 2 => x_len as f64 * f.ln(),
        _ => {
            let v = split.x.reversed().suffix(x_len - 2);
            if !v.is_prefix_of(&prefix) {
                return Err(Error::Internal(format!(
                    "x^R = {} is not of the form b·a·v with v a prefix of c_α",
                    split.x.reversed()
                )));
            }
            2.0 * f.ln() + env.at(v.len())
        }
    };
    let log_witness = log_x + env.at(split.y.len());
    let n = w.len() as f64;
    let log_bound = (f * f * (env.ln_c.exp().powi(2) + 1.0)).ln() + 2.0 * env.mu * n.ln();
    let direct = word_product(lambda, energy, w)?.log_norm();
    let slack = 1e-9 * (1.0 + direct.abs());
    if direct > log_witness + slack || direct > log_bound + slack {
        return Err(Error::Internal(format!(
            "ln‖M(w)‖ = {direct} exceeds the certified bound {} (witness {log_witness}) for |w| = {}",
            log_bound,
            w.len()
        )));
    }
    Ok(CertifiedBound {
        energy,
        len: w.len(),
        t: split.t,
        within_fit_range: x_len.saturating_sub(2) <= baseline.max_len
            && split.y.len() <= baseline.max_len,
        x: split.x,
        y: split.y,
        direct,
        log_bound,
        log_witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_is_minimal_and_covers() {
        let pts: Vec<(usize, f64)> = (1..200).map(|n| (n, 0.5 * (n as f64).ln() + 0.1 * ((n % 7) as f64))).collect();
        let env = Envelope::fit(&pts).unwrap();
        assert!(env.max_violation(&pts) <= 0.0);
        assert!((env.mu - 0.5).abs() < 0.2);
        // Touches the sample somewhere.
        assert!(env.max_violation(&pts) > -1e-9);

        let flat = vec![(1, 1.0), (10, 0.5), (100, 0.2)];
        let env = Envelope::fit(&flat).unwrap();
        assert_eq!(env.mu, 0.0);
        assert_eq!(env.ln_c, 1.0);
    }

    #[test]
    fn free_case_has_flat_envelope() {
        let cf = ContinuedFraction::fibonacci();
        let fit = growth_fit(0.0, &cf, &[Energy::real(1.0)], 4096, 8, 1).unwrap();
        assert!(fit.fits[0].envelope.mu < 0.05);
        assert!(fit.max_violation <= 0.0);
        assert!(fit.fits[0].max_violation <= 0.0);
    }

    #[test]
    fn fibonacci_envelope_and_bounds() {
        let cf = ContinuedFraction::fibonacci();
        let energies = [Energy::real(0.0), Energy::new(1.0, 0.0)];
        let fit = growth_fit(1.0, &cf, &energies, 8192, 8, 3).unwrap();
        assert!(fit.max_violation <= 0.0);
        for f in &fit.fits {
            assert!(f.max_violation <= 0.0);
            assert!(f.envelope.mu.is_finite());
        }
        let w: Word = "0110".parse().unwrap();
        let b = certified_bound(1.0, energies[0], &w, &cf, &fit).unwrap();
        assert_eq!((b.t, b.x.to_string(), b.y.to_string()), (3, "01".into(), "10".into()));
        assert!(b.log_bound >= b.direct && b.log_witness >= b.direct);

        let p = c_prefix(&cf, 500).unwrap();
        let b = certified_bound(1.0, energies[1], &p, &cf, &fit).unwrap();
        assert!(b.x.is_empty());
        assert!(b.log_bound >= b.log_witness);
    }

    #[test]
    fn unknown_energy_and_foreign_words() {
        let cf = ContinuedFraction::fibonacci();
        let fit = growth_fit(1.0, &cf, &[Energy::real(0.0)], 64, 2, 3).unwrap();
        assert!(certified_bound(1.0, Energy::real(0.5), &"1".parse().unwrap(), &cf, &fit).is_err());
        assert!(matches!(
            certified_bound(1.0, Energy::real(0.0), &"00".parse().unwrap(), &cf, &fit),
            Err(Error::NotInLanguage(_))
        ));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let cf = ContinuedFraction::silver();
        let e = [Energy::new(0.5, 0.1)];
        let a = growth_fit(1.0, &cf, &e, 1000, 4, 9).unwrap();
        let b = growth_fit(1.0, &cf, &e, 1000, 4, 9).unwrap();
        assert_eq!(a, b);
    }
}
