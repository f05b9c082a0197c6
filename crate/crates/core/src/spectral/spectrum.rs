//! Trace bands `{E ∈ ℝ : |tr M(λ,E,s_n)| ≤ 2}` of the periodic approximants.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cf::ContinuedFraction;
use crate::error::{Error, Result};
use crate::transfer::{Energy, SnProducts};

/// Default number of coarse grid points.
pub const DEFAULT_GRID: usize = 40_000;

/// Default edge resolution.
pub const DEFAULT_TOL: f64 = 1e-9;

const MAX_BISECTIONS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, e: f64) -> bool {
        self.lo <= e && e <= self.hi
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpectrumApprox {
    pub lambda: f64,
    /// Levels whose bands were combined; a single entry for one level.
    pub levels: Vec<usize>,
    pub window: (f64, f64),
    pub resolution: f64,
    pub grid: usize,
    pub bands: Vec<Band>,
    /// Set when some edge could not be resolved to `resolution` in double
    /// precision.
    pub precision_warning: bool,
}

impl SpectrumApprox {
    pub fn level(&self) -> usize {
        self.levels[0]
    }

    pub fn total_width(&self) -> f64 {
        self.bands.iter().map(Band::width).sum()
    }

    /// Indices of the `k` widest bands, in increasing energy order.
    pub fn widest(&self, k: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.bands.len()).collect();
        idx.sort_by(|&i, &j| {
            self.bands[j]
                .width()
                .total_cmp(&self.bands[i].width())
                .then(i.cmp(&j))
        });
        idx.truncate(k);
        idx.sort_unstable();
        idx
    }

    /// `(band_id, midpoint)` of the `k` widest bands.
    pub fn widest_midpoints(&self, k: usize) -> Vec<(usize, f64)> {
        self.widest(k)
            .into_iter()
            .map(|i| (i, self.bands[i].midpoint()))
            .collect()
    }

    pub fn band_of(&self, e: f64) -> Option<usize> {
        self.bands.iter().position(|b| b.contains(e))
    }

    /// Distance from `e` to the union of the bands.
    pub fn distance(&self, e: f64) -> f64 {
        self.bands
            .iter()
            .map(|b| {
                if b.contains(e) {
                    0.0
                } else {
                    (b.lo - e).abs().min((e - b.hi).abs())
                }
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// `[−2.05 − |λ|, 2.05 + |λ|]`, which contains every band.
pub fn default_window(lambda: f64) -> (f64, f64) {
    let r = 2.05 + lambda.abs();
    (-r, r)
}

/// Evaluates `tr M(λ,E,s_n)` for real `E`.
#[derive(Clone, Debug)]
pub struct TraceFunction<'a> {
    lambda: f64,
    cf: &'a ContinuedFraction,
    level: usize,
}

impl<'a> TraceFunction<'a> {
    pub fn new(lambda: f64, cf: &'a ContinuedFraction, level: usize) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::NonFinite(format!("λ = {lambda}")));
        }
        if level < 1 || level > cf.depth() {
            return Err(Error::DepthExhausted {
                requested: level as i64,
                available: cf.depth(),
            });
        }
        Ok(Self { lambda, cf, level })
    }

    pub fn eval(&self, e: f64) -> f64 {
        let table = SnProducts::new(self.lambda, Energy::real(e), self.cf, self.level)
            .expect("validated inputs");
        table.get(self.level as i64).trace().re
    }

    /// `|tr| − 2`; non-positive inside a band.
    pub fn excess(&self, e: f64) -> f64 {
        self.eval(e).abs() - 2.0
    }
}

/// Bands of level `n`, located on a grid and refined by bisection.
pub fn approximate_spectrum(
    lambda: f64,
    cf: &ContinuedFraction,
    n: usize,
    window: Option<(f64, f64)>,
    tol: f64,
) -> Result<SpectrumApprox> {
    approximate_spectrum_with_grid(lambda, cf, n, window, tol, DEFAULT_GRID)
}

pub fn approximate_spectrum_with_grid(
    lambda: f64,
    cf: &ContinuedFraction,
    n: usize,
    window: Option<(f64, f64)>,
    tol: f64,
    grid: usize,
) -> Result<SpectrumApprox> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("spectrum level must be ≥ 2, got {n}")));
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if grid < 2 {
        return Err(Error::InvalidArgument("grid needs at least two points".into()));
    }
    let (lo, hi) = window.unwrap_or_else(|| default_window(lambda));
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!("bad energy window [{lo}, {hi}]")));
    }
    let f = TraceFunction::new(lambda, cf, n)?;
    let step = (hi - lo) / (grid - 1) as f64;
    let points: Vec<f64> = (0..grid).map(|i| lo + step * i as f64).collect();
    let traces: Vec<f64> = points.par_iter().map(|&e| f.eval(e)).collect();
    let inside = |t: f64| t.abs() <= 2.0;

    let mut warning = false;
    let mut bisect = |a: f64, b: f64| -> f64 {
        let (e, ok) = refine_edge(&f, a, b, tol);
        warning |= !ok;
        e
    };

    let mut bands = Vec::new();
    let mut start: Option<f64> = None;
    for i in 0..grid {
        let here = inside(traces[i]);
        match (start, here) {
            (None, true) => {
                let e = if i == 0 { points[0] } else { bisect(points[i], points[i - 1]) };
                start = Some(e);
            }
            (Some(s), false) => {
                bands.push(Band {
                    lo: s,
                    hi: bisect(points[i - 1], points[i]),
                });
                start = None;
            }
            (None, false) if i > 0 && traces[i] * traces[i - 1] < 0.0 => {
                // The trace crossed from above 2 to below −2 between grid
                // points, so a band hides in between.
                if let Some(b) = hidden_band(&f, points[i - 1], points[i], tol) {
                    bands.push(b);
                }
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        bands.push(Band { lo: s, hi: points[grid - 1] });
    }

    Ok(SpectrumApprox {
        lambda,
        levels: vec![n],
        window: (lo, hi),
        resolution: tol,
        grid,
        bands: merge(bands, tol),
        precision_warning: warning,
    })
}

/// Shrinks `[inside, outside]` to width `tol`; returns the in-band end and
/// whether the requested resolution was reached.
fn refine_edge(f: &TraceFunction, inside: f64, outside: f64, tol: f64) -> (f64, bool) {
    let (mut a, mut b) = (inside, outside);
    for _ in 0..MAX_BISECTIONS {
        if (b - a).abs() <= tol {
            return (a, true);
        }
        let m = 0.5 * (a + b);
        if m == a || m == b {
            return (a, false);
        }
        if f.excess(m) <= 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    (a, (b - a).abs() <= tol)
}

/// Searches `(a, b)`, where `tr` changes sign outside the band region, for a
/// point with `|tr| ≤ 2` and grows it into a band.
fn hidden_band(f: &TraceFunction, a: f64, b: f64, tol: f64) -> Option<Band> {
    let (mut lo, mut hi) = (a, b);
    let sign_lo = f.eval(lo).signum();
    for _ in 0..MAX_BISECTIONS {
        let m = 0.5 * (lo + hi);
        if m == lo || m == hi {
            return None;
        }
        let t = f.eval(m);
        if t.abs() <= 2.0 {
            let (l, _) = refine_edge(f, m, a, tol);
            let (h, _) = refine_edge(f, m, b, tol);
            return Some(Band { lo: l, hi: h });
        }
        if t.signum() == sign_lo {
            lo = m;
        } else {
            hi = m;
        }
    }
    None
}

/// Sorts and merges bands whose gap is at most `tol`.
fn merge(mut bands: Vec<Band>, tol: f64) -> Vec<Band> {
    bands.sort_by(|x, y| x.lo.total_cmp(&y.lo));
    let mut out: Vec<Band> = Vec::with_capacity(bands.len());
    for b in bands {
        match out.last_mut() {
            Some(last) if b.lo - last.hi <= tol => last.hi = last.hi.max(b.hi),
            _ => out.push(b),
        }
    }
    out
}

/// Union of the level-`n` and level-`n+1` bands, a superset proxy for the
/// limiting spectrum.
pub fn sigma_proxy(
    lambda: f64,
    cf: &ContinuedFraction,
    n: usize,
    window: Option<(f64, f64)>,
    tol: f64,
) -> Result<SpectrumApprox> {
    let a = approximate_spectrum(lambda, cf, n, window, tol)?;
    let b = approximate_spectrum(lambda, cf, n + 1, window, tol)?;
    let mut bands = a.bands;
    bands.extend(b.bands);
    Ok(SpectrumApprox {
        lambda,
        levels: vec![n, n + 1],
        window: a.window,
        resolution: tol,
        grid: a.grid,
        bands: merge(bands, tol),
        precision_warning: a.precision_warning || b.precision_warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// `tr M(0,E,s_n) = 2 cos(|s_n| k)` with `E = 2 cos k`.
    fn free_trace(q: usize, e: f64) -> f64 {
        2.0 * (q as f64 * (e / 2.0).acos()).cos()
    }

    #[test]
    fn free_trace_oracle() {
        let cf = ContinuedFraction::fibonacci();
        let f = TraceFunction::new(0.0, &cf, 8).unwrap();
        let q = cf.length_table(8).unwrap().get_usize(8).unwrap();
        for i in 0..200 {
            let e = -1.99 + 0.02 * i as f64;
            assert_abs_diff_eq!(f.eval(e), free_trace(q, e), epsilon = 1e-9);
        }
    }

    #[test]
    fn free_spectrum_is_one_band() {
        for cf in [ContinuedFraction::fibonacci(), ContinuedFraction::silver()] {
            for n in [2, 6, 12] {
                let s = approximate_spectrum(0.0, &cf, n, None, 1e-6).unwrap();
                assert_eq!(s.bands.len(), 1, "n = {n}: {:?}", &s.bands[..s.bands.len().min(4)]);
                assert_abs_diff_eq!(s.bands[0].lo, -2.0, epsilon = 1e-6);
                assert_abs_diff_eq!(s.bands[0].hi, 2.0, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn bands_thin_with_level() {
        let cf = ContinuedFraction::fibonacci();
        let coarse = approximate_spectrum(1.0, &cf, 6, None, 1e-9).unwrap();
        let fine = approximate_spectrum(1.0, &cf, 12, None, 1e-9).unwrap();
        assert!(fine.total_width() < coarse.total_width());
        // A period-|s_6| operator has |s_6| = 13 bands.
        assert_eq!(coarse.bands.len(), 13);
    }

    #[test]
    fn band_predicate_holds() {
        let cf = ContinuedFraction::fibonacci();
        let tol = 1e-9;
        let s = approximate_spectrum(1.0, &cf, 9, None, tol).unwrap();
        let f = TraceFunction::new(1.0, &cf, 9).unwrap();
        for w in s.bands.windows(2) {
            assert!(w[0].hi < w[1].lo);
        }
        for b in &s.bands {
            assert!(f.eval(b.lo).abs() <= 2.0 + tol);
            assert!(f.eval(b.hi).abs() <= 2.0 + tol);
            for k in 0..=20 {
                let e = b.lo + b.width() * k as f64 / 20.0;
                assert!(f.eval(e).abs() <= 2.0 + tol);
            }
        }
        let mids = s.widest_midpoints(3);
        assert_eq!(mids.len(), 3);
        assert!(mids.windows(2).all(|p| p[0].1 < p[1].1));
    }

    #[test]
    fn proxy_contains_both_levels() {
        let cf = ContinuedFraction::fibonacci();
        let p = sigma_proxy(1.0, &cf, 7, None, 1e-9).unwrap();
        for n in [7, 8] {
            let s = approximate_spectrum(1.0, &cf, n, None, 1e-9).unwrap();
            for b in s.bands {
                assert!(p.band_of(b.midpoint()).is_some());
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        let cf = ContinuedFraction::fibonacci();
        assert!(approximate_spectrum(1.0, &cf, 1, None, 1e-6).is_err());
        assert!(approximate_spectrum(1.0, &cf, 4, None, 0.0).is_err());
        assert!(approximate_spectrum(1.0, &cf, 4, Some((1.0, -1.0)), 1e-6).is_err());
    }
}
