//! Transfer matrices `T(λ,E,a) = [[E − λa, −1], [1, 0]]` and their products
//! over words, kept in the factored form `e^{log_scale} · m` with `m` of unit
//! max-entry magnitude so that products of any length stay finite.

use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cf::ContinuedFraction;
use crate::error::{Error, Result};
use crate::word::Word;

/// Maximum number of plain multiplies between renormalisations.
pub const RENORM_STRIDE: usize = 32;

/// Unit roundoff used by the a-priori error budget.
const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// A spectral parameter `E ∈ ℂ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Energy(pub Complex64);

impl Energy {
    pub fn new(re: f64, im: f64) -> Self {
        Energy(Complex64::new(re, im))
    }

    pub fn real(re: f64) -> Self {
        Energy(Complex64::new(re, 0.0))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    pub fn re(self) -> f64 {
        self.0.re
    }

    pub fn im(self) -> f64 {
        self.0.im
    }

    pub fn is_finite(self) -> bool {
        self.0.re.is_finite() && self.0.im.is_finite()
    }
}

impl From<f64> for Energy {
    fn from(re: f64) -> Self {
        Energy::real(re)
    }
}

impl From<Complex64> for Energy {
    fn from(z: Complex64) -> Self {
        Energy(z)
    }
}

/// Row-major 2×2 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [Complex64; 4]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
    ]);

    pub fn new(m00: Complex64, m01: Complex64, m10: Complex64, m11: Complex64) -> Self {
        Mat2([m00, m01, m10, m11])
    }

    pub fn from_real(m: [[f64; 2]; 2]) -> Self {
        Mat2([
            m[0][0].into(),
            m[0][1].into(),
            m[1][0].into(),
            m[1][1].into(),
        ])
    }

    pub fn det(&self) -> Complex64 {
        let [a, b, c, d] = self.0;
        a * d - b * c
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0] + self.0[3]
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Largest singular value, closed form:
    /// `σ² = (‖A‖_F² + √(‖A‖_F⁴ − 4|det A|²)) / 2`.
    pub fn op_norm(&self) -> f64 {
        let f = self.frobenius_sq();
        let d = self.det().norm();
        let disc = (f * f - 4.0 * d * d).max(0.0);
        ((f + disc.sqrt()) / 2.0).sqrt()
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        Mat2(self.0.map(|z| z * s))
    }

    /// Adjugate; the inverse when `det = 1`.
    pub fn adjugate(&self) -> Mat2 {
        let [a, b, c, d] = self.0;
        Mat2([d, -b, -c, a])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_diff(&self, other: &Mat2) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, r: Mat2) -> Mat2 {
        let [a, b, c, d] = self.0;
        let [e, f, g, h] = r.0;
        Mat2([a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h])
    }
}

/// `T(λ, E, a)`.
pub fn local_matrix(lambda: f64, energy: Energy, letter: u8) -> Mat2 {
    let one = Complex64::new(1.0, 0.0);
    Mat2([
        energy.0 - lambda * f64::from(letter),
        -one,
        one,
        Complex64::new(0.0, 0.0),
    ])
}

/// `M = e^{log_scale} · m` together with bookkeeping for the error budget.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferProduct {
    m: Mat2,
    log_scale: f64,
    length: u64,
    multiplies: u64,
}

impl TransferProduct {
    pub fn identity() -> Self {
        Self {
            m: Mat2::IDENTITY,
            log_scale: 0.0,
            length: 0,
            multiplies: 0,
        }
    }

    /// A single local matrix, counted as one letter.
    pub fn letter(lambda: f64, energy: Energy, a: u8) -> Self {
        Self {
            m: local_matrix(lambda, energy, a),
            log_scale: 0.0,
            length: 1,
            multiplies: 0,
        }
        .renormalized()
    }

    pub fn from_parts(m: Mat2, log_scale: f64, length: u64) -> Self {
        Self {
            m,
            log_scale,
            length,
            multiplies: 0,
        }
    }

    /// Scaled factor `m`.
    pub fn scaled(&self) -> &Mat2 {
        &self.m
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// Letters consumed.
    pub fn length(&self) -> u64 {
        self.length
    }

    pub fn multiplies(&self) -> u64 {
        self.multiplies
    }

    fn renormalized(mut self) -> Self {
        let s = self.m.max_abs();
        if s > 0.0 && s.is_finite() && s != 1.0 {
            self.m = self.m.scale(1.0 / s);
            self.log_scale += s.ln();
        }
        self
    }

    /// `L = ln ‖M‖` with the operator norm.
    pub fn log_norm(&self) -> f64 {
        self.log_scale + self.m.op_norm().ln()
    }

    /// `ln |tr M|`; `-∞` for a vanishing trace.
    pub fn log_abs_trace(&self) -> f64 {
        self.log_scale + self.m.trace().norm().ln()
    }

    /// `tr M`; infinite when the product is too large for a double.
    pub fn trace(&self) -> Complex64 {
        self.m.trace() * self.log_scale.exp()
    }

    /// `M` itself when it fits in double range.
    pub fn matrix(&self) -> Option<Mat2> {
        let s = self.log_scale.exp();
        s.is_finite().then(|| self.m.scale(s))
    }

    /// `det M` computed from the factored form; overflows for large norms.
    pub fn det(&self) -> Complex64 {
        self.m.det() * (2.0 * self.log_scale).exp()
    }

    /// `|det M − 1| / ‖M‖²`, the determinant defect measured against the
    /// size of the entries that produce it. Equals `|det M − 1|` up to a
    /// factor ≤ 1 for bounded products; stays meaningful for products whose
    /// norm exceeds double range.
    pub fn det_defect(&self) -> f64 {
        let target = (-2.0 * self.log_scale).exp();
        let sigma = self.m.op_norm();
        (self.m.det() - target).norm() / (sigma * sigma)
    }

    /// A-priori bound on the relative (to `‖M‖`) roundoff accumulated in `m`.
    pub fn error_bound(&self) -> f64 {
        8.0 * UNIT_ROUNDOFF * (self.length + self.multiplies + 1) as f64
    }

    /// Product `self · rhs`, i.e. `rhs` is applied first.
    pub fn then_after(&self, rhs: &TransferProduct) -> TransferProduct {
        TransferProduct {
            m: self.m * rhs.m,
            log_scale: self.log_scale + rhs.log_scale,
            length: self.length + rhs.length,
            multiplies: self.multiplies + rhs.multiplies + 1,
        }
        .renormalized()
    }

    /// `self^k` by repeated squaring.
    pub fn pow(&self, mut k: u64) -> TransferProduct {
        let mut base = *self;
        let mut acc = TransferProduct::identity();
        while k > 0 {
            if k & 1 == 1 {
                acc = base.then_after(&acc);
            }
            k >>= 1;
            if k > 0 {
                base = base.then_after(&base);
            }
        }
        acc
    }

    pub fn is_finite(&self) -> bool {
        self.m.is_finite() && self.log_scale.is_finite()
    }

    pub fn to_record(&self) -> ProductRecord {
        ProductRecord {
            matrix: self.m.0.map(|z| [z.re, z.im]),
            log_scale: self.log_scale,
            length: self.length,
            error_bound: self.error_bound(),
        }
    }
}

impl Mul for TransferProduct {
    type Output = TransferProduct;

    fn mul(self, rhs: TransferProduct) -> TransferProduct {
        self.then_after(&rhs)
    }
}

/// JSON form of a product: `{matrix: [[re,im]×4], logScale, length, errorBound}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProductRecord {
    pub matrix: [[f64; 2]; 4],
    pub log_scale: f64,
    pub length: u64,
    pub error_bound: f64,
}

impl From<&ProductRecord> for TransferProduct {
    fn from(r: &ProductRecord) -> Self {
        TransferProduct::from_parts(
            Mat2(r.matrix.map(|[re, im]| Complex64::new(re, im))),
            r.log_scale,
            r.length,
        )
    }
}

fn check_inputs(lambda: f64, energy: Energy) -> Result<()> {
    if !lambda.is_finite() || !energy.is_finite() {
        return Err(Error::NonFinite(format!("λ = {lambda}, E = {:?}", energy.0)));
    }
    Ok(())
}

/// Number of plain multiplies that cannot overflow given the entry growth per
/// letter.
fn stride_for(lambda: f64, energy: Energy) -> usize {
    let growth = energy.0.norm() + lambda.abs() + 1.0;
    if growth <= 2.0 {
        return RENORM_STRIDE;
    }
    ((250.0 / growth.log10()) as usize).clamp(1, RENORM_STRIDE)
}

/// Incremental left-multiplication by local matrices; yields `M(w_1…w_k)`
/// after every pushed letter.
#[derive(Clone, Debug)]
pub struct PrefixProducts {
    lambda: f64,
    local: [Mat2; 2],
    m: Mat2,
    log_scale: f64,
    length: u64,
    stride: usize,
    since_renorm: usize,
}

impl PrefixProducts {
    pub fn new(lambda: f64, energy: Energy) -> Result<Self> {
        check_inputs(lambda, energy)?;
        Ok(Self {
            lambda,
            local: [local_matrix(lambda, energy, 0), local_matrix(lambda, energy, 1)],
            m: Mat2::IDENTITY,
            log_scale: 0.0,
            length: 0,
            stride: stride_for(lambda, energy),
            since_renorm: 0,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn push(&mut self, letter: u8) {
        self.m = self.local[usize::from(letter != 0)] * self.m;
        self.length += 1;
        self.since_renorm += 1;
        if self.since_renorm >= self.stride {
            self.renormalize();
        }
    }

    fn renormalize(&mut self) {
        let s = self.m.max_abs();
        if s > 0.0 && s.is_finite() {
            self.m = self.m.scale(1.0 / s);
            self.log_scale += s.ln();
        }
        self.since_renorm = 0;
    }

    /// `ln ‖M‖` of the current prefix.
    pub fn log_norm(&self) -> f64 {
        self.log_scale + self.m.op_norm().ln()
    }

    pub fn product(&self) -> TransferProduct {
        TransferProduct {
            m: self.m,
            log_scale: self.log_scale,
            length: self.length,
            multiplies: self.length / self.stride as u64,
        }
        .renormalized()
    }
}

/// `M(λ,E,w) = T(w_n) ⋯ T(w_1)`.
pub fn word_product(lambda: f64, energy: Energy, w: &Word) -> Result<TransferProduct> {
    let mut acc = PrefixProducts::new(lambda, energy)?;
    for a in w.letters() {
        acc.push(a);
    }
    let p = acc.product();
    if !p.is_finite() {
        return Err(Error::NonFinite("transfer product".into()));
    }
    Ok(p)
}

/// `M(λ,E,w^R)`; its norm equals that of `M(λ,E,w)`.
pub fn reversed_product(lambda: f64, energy: Energy, w: &Word) -> Result<TransferProduct> {
    let mut acc = PrefixProducts::new(lambda, energy)?;
    for a in w.letters().rev() {
        acc.push(a);
    }
    Ok(acc.product())
}

pub fn log_norm(p: &TransferProduct) -> f64 {
    p.log_norm()
}

/// Memo table `M(s_{-1}), M(s_0), …, M(s_N)` from
/// `M(s_n) = M(s_{n−2}) · M(s_{n−1})^{a_n}`.
#[derive(Clone, Debug)]
pub struct SnProducts {
    table: Vec<TransferProduct>,
}

impl SnProducts {
    pub fn new(lambda: f64, energy: Energy, cf: &ContinuedFraction, top: usize) -> Result<Self> {
        check_inputs(lambda, energy)?;
        if top > cf.depth() {
            return Err(Error::DepthExhausted {
                requested: top as i64,
                available: cf.depth(),
            });
        }
        let mut table = vec![
            TransferProduct::letter(lambda, energy, 1),
            TransferProduct::letter(lambda, energy, 0),
        ];
        for n in 1..=top {
            let a = cf.coefficients()[n - 1];
            let next = if n == 1 {
                table[0].then_after(&table[1].pow(a - 1))
            } else {
                table[n - 1].then_after(&table[n].pow(a))
            };
            table.push(next);
        }
        Ok(Self { table })
    }

    pub fn top(&self) -> usize {
        self.table.len() - 2
    }

    /// `M(s_n)`, `-1 ≤ n ≤ top`.
    pub fn get(&self, n: i64) -> &TransferProduct {
        &self.table[(n + 1) as usize]
    }
}

/// `M(λ,E,s_n)` via the matrix recursion.
pub fn sn_product(
    lambda: f64,
    energy: Energy,
    cf: &ContinuedFraction,
    n: usize,
) -> Result<TransferProduct> {
    if n == 0 {
        return Err(Error::InvalidArgument("sn_product needs n ≥ 1".into()));
    }
    Ok(*SnProducts::new(lambda, energy, cf, n)?.get(n as i64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sturmian::build_sn;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Plain product without any rescaling.
    fn naive_product(lambda: f64, e: Energy, w: &Word) -> Mat2 {
        w.letters()
            .fold(Mat2::IDENTITY, |m, a| local_matrix(lambda, e, a) * m)
    }

    /// σ_max from the eigenvalues of A*A computed by hand.
    fn sigma_max_oracle(m: &Mat2) -> f64 {
        let [a, b, cc, d] = m.0;
        // A*A = [[p, q], [q̄, r]]
        let p = a.norm_sqr() + cc.norm_sqr();
        let r = b.norm_sqr() + d.norm_sqr();
        let q = a.conj() * b + cc.conj() * d;
        let mean = (p + r) / 2.0;
        let rad = (((p - r) / 2.0).powi(2) + q.norm_sqr()).sqrt();
        (mean + rad).sqrt()
    }

    #[test]
    fn local_matrices() {
        let e = Energy::new(0.3, -1.2);
        assert_eq!(
            local_matrix(7.0, e, 0),
            Mat2::new(c(0.3, -1.2), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0))
        );
        assert_eq!(
            local_matrix(2.0, Energy::real(0.0), 1),
            Mat2::from_real([[-2.0, -1.0], [1.0, 0.0]])
        );
        for k in 0..100 {
            let lambda = -3.0 + 0.06 * k as f64;
            let e = Energy::new((k as f64).sin() * 4.0, (k as f64).cos());
            let det = local_matrix(lambda, e, (k % 2) as u8).det();
            assert_eq!(det, c(1.0, 0.0));
        }
    }

    #[test]
    fn empty_and_short_words() {
        let p = word_product(1.0, Energy::real(0.5), &Word::new()).unwrap();
        assert_eq!(p.log_norm(), 0.0);
        assert_eq!(p.matrix().unwrap(), Mat2::IDENTITY);

        // T(0)·T(1) at λ = 2, E = 0: [[0,−1],[1,0]]·[[−2,−1],[1,0]]
        let w: Word = "10".parse().unwrap();
        let p = word_product(2.0, Energy::real(0.0), &w).unwrap();
        let expected = Mat2::from_real([[-1.0, 0.0], [-2.0, -1.0]]);
        assert!(p.matrix().unwrap().max_diff(&expected) < 1e-15);
        assert_relative_eq!(p.log_norm(), sigma_max_oracle(&expected).ln(), epsilon = 1e-14);
        // σ_max² of [[−1,0],[−2,−1]] is 3 + 2√2
        assert_relative_eq!(p.log_norm(), (3.0 + 8f64.sqrt()).sqrt().ln(), epsilon = 1e-14);
    }

    #[test]
    fn free_quarter_turn() {
        let w: Word = "0110100111000101".parse().unwrap();
        let p = word_product(0.0, Energy::real(0.0), &w).unwrap();
        assert_eq!(p.matrix().unwrap(), Mat2::IDENTITY);
        assert_eq!(p.log_norm(), 0.0);
    }

    #[test]
    fn matches_naive_product() {
        let cf = ContinuedFraction::fibonacci();
        let w = build_sn(&cf, 9).unwrap();
        let e = Energy::new(1.3, 0.2);
        let p = word_product(1.5, e, &w).unwrap();
        let naive = naive_product(1.5, e, &w);
        let m = p.matrix().unwrap();
        assert!(m.max_diff(&naive) <= 1e-12 * naive.max_abs());
    }

    #[test]
    fn op_norm_matches_oracle() {
        let m = Mat2::new(c(1.0, 2.0), c(-0.5, 0.1), c(3.0, -1.0), c(0.2, 0.7));
        assert_relative_eq!(m.op_norm(), sigma_max_oracle(&m), epsilon = 1e-13);
    }

    #[test]
    fn sn_recursion_matches_direct_product() {
        let cf = ContinuedFraction::fibonacci();
        let table = SnProducts::new(1.0, Energy::real(0.5), &cf, 12).unwrap();
        for n in 1..=10 {
            let direct = word_product(1.0, Energy::real(0.5), &build_sn(&cf, n).unwrap()).unwrap();
            let fast = table.get(n);
            let scale = direct.log_scale().exp();
            let d = direct.matrix().unwrap();
            let f = fast.matrix().unwrap();
            assert!(d.max_diff(&f) <= 1e-10 * scale.max(d.max_abs()), "n = {n}");
        }
        let silver = ContinuedFraction::new(vec![2, 3, 1, 4, 2, 2, 1, 5]).unwrap();
        let t = SnProducts::new(0.7, Energy::new(-1.0, 0.3), &silver, 8).unwrap();
        for n in 1..=8 {
            let direct =
                word_product(0.7, Energy::new(-1.0, 0.3), &build_sn(&silver, n).unwrap()).unwrap();
            assert_relative_eq!(t.get(n).log_norm(), direct.log_norm(), max_relative = 1e-10);
        }
    }

    #[test]
    fn fibonacci_trace_map() {
        let cf = ContinuedFraction::fibonacci();
        let t = SnProducts::new(1.0, Energy::real(0.5), &cf, 16).unwrap();
        let x = |n: i64| t.get(n).trace().re;
        for n in 2..=15 {
            let lhs = x(n + 1);
            let rhs = x(n) * x(n - 1) - x(n - 2);
            let scale = (x(n) * x(n - 1)).abs() + x(n - 2).abs() + 1.0;
            assert!((lhs - rhs).abs() <= 1e-9 * scale, "n = {n}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn deep_levels_stay_finite_and_unimodular() {
        let cf = ContinuedFraction::fibonacci();
        let t = SnProducts::new(1.0, Energy::real(5.0), &cf, 30).unwrap();
        let p = t.get(30);
        assert!(p.is_finite());
        assert!(p.log_norm() > 1e5);
        assert!(p.det_defect() < 1e-10 * p.length() as f64);

        let bounded = SnProducts::new(0.0, Energy::real(0.0), &cf, 30).unwrap();
        assert!((bounded.get(30).det() - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn reversal_keeps_the_norm() {
        let w: Word = "1011010110110".parse().unwrap();
        let e = Energy::new(0.7, 0.4);
        let a = word_product(1.3, e, &w).unwrap();
        let b = reversed_product(1.3, e, &w).unwrap();
        assert_relative_eq!(a.log_norm(), b.log_norm(), max_relative = 1e-12);

        let pal: Word = "1011101".parse().unwrap();
        assert_eq!(
            word_product(1.3, e, &pal).unwrap(),
            reversed_product(1.3, e, &pal).unwrap()
        );
        let one = Word::letter(1);
        assert_eq!(
            word_product(1.3, e, &one).unwrap().log_norm(),
            reversed_product(1.3, e, &one).unwrap().log_norm()
        );
    }

    #[test]
    fn non_finite_inputs() {
        assert!(matches!(
            word_product(f64::NAN, Energy::real(0.0), &Word::letter(1)),
            Err(Error::NonFinite(_))
        ));
        assert!(SnProducts::new(1.0, Energy::new(f64::INFINITY, 0.0), &ContinuedFraction::fibonacci(), 3).is_err());
    }

    #[test]
    fn record_round_trip() {
        let p = word_product(1.0, Energy::new(0.2, 0.1), &"110101".parse().unwrap()).unwrap();
        let json = serde_json::to_string(&p.to_record()).unwrap();
        assert!(json.contains("\"logScale\""));
        assert!(json.contains("\"errorBound\""));
        let back: ProductRecord = serde_json::from_str(&json).unwrap();
        let q = TransferProduct::from(&back);
        assert_relative_eq!(q.log_norm(), p.log_norm(), max_relative = 1e-15);
    }
}
