//! Exponential sums over `F_q`: the canonical additive character, the
//! quadratic Gauss sum, twisted Kloosterman sums and their Salié closed form,
//! and Kloosterman angle statistics.
//!
//! Kloosterman-type sums run over `c ∈ F_q^×`; the multiplicative twist is
//! taken to vanish at 0.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::finite_field::{Elem, FieldCtx, FieldElement};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    BruteForce,
}

/// Value of an exponential sum and how it was obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SumValue {
    pub value: Complex64,
    pub method: Method,
}

impl SumValue {
    fn closed(value: Complex64) -> Self {
        SumValue { value, method: Method::ClosedForm }
    }

    fn brute(value: Complex64) -> Self {
        SumValue { value, method: Method::BruteForce }
    }
}

/// Multiplicative characters used here: trivial and quadratic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CharSpec {
    Trivial,
    Quadratic,
}

impl CharSpec {
    /// `χ^d`: trivial for even `d`, quadratic for odd `d`.
    pub fn chi_power(d: usize) -> Self {
        if d % 2 == 0 {
            CharSpec::Trivial
        } else {
            CharSpec::Quadratic
        }
    }

    /// Value at `c`, with `η(0) = 0` for both characters.
    pub fn eval(self, ctx: &FieldCtx, c: Elem) -> i32 {
        match self {
            _ if c.is_zero() => 0,
            CharSpec::Trivial => 1,
            CharSpec::Quadratic => ctx.chi(c),
        }
    }
}

/// `ω_p^j` for `j ∈ [0, p)`.
pub fn omega_table(p: u32) -> Vec<Complex64> {
    (0..p)
        .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / p as f64))
        .collect()
}

/// Sum `Σ_j counts[j] ω_p^j` of an integer histogram of trace values.
pub fn sum_trace_histogram(counts: &[i64], omega: &[Complex64]) -> Complex64 {
    counts.iter().zip(omega).map(|(&c, &w)| w * c as f64).sum()
}

/// `ω_p^{tr a}`.
pub fn additive_char(ctx: &FieldCtx, a: Elem) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * ctx.trace(a) as f64 / ctx.p() as f64)
}

/// `G_1 = -(-1)^m √q` for `p ≡ 1 (mod 4)` and `-(-i)^m √q` for `p ≡ 3`.
pub fn gauss_sum(ctx: &FieldCtx) -> SumValue {
    let root_q = (ctx.q() as f64).sqrt();
    let unit = if ctx.p() % 4 == 1 { Complex64::new(-1.0, 0.0) } else { Complex64::new(0.0, -1.0) };
    SumValue::closed(-unit.powu(ctx.m()) * root_q)
}

/// `Σ_{c ∈ F_q^×} χ(c) ω_p^{tr c}` by direct summation.
pub fn gauss_sum_brute(ctx: &FieldCtx) -> SumValue {
    let mut counts = vec![0i64; ctx.p() as usize];
    for c in ctx.nonzero_elements() {
        counts[ctx.trace(c) as usize] += ctx.chi(c) as i64;
    }
    SumValue::brute(sum_trace_histogram(&counts, &omega_table(ctx.p())))
}

/// `K_η(a,b) = Σ_{c ∈ F_q^×} η(c) ω_p^{tr(ac + b/c)}` by direct summation.
pub fn kloosterman(ctx: &FieldCtx, a: Elem, b: Elem, eta: CharSpec) -> SumValue {
    let mut counts = vec![0i64; ctx.p() as usize];
    for c in ctx.nonzero_elements() {
        let c_inv = ctx.inv(c).expect("nonzero");
        let arg = ctx.add(ctx.mul(a, c), ctx.mul(b, c_inv));
        counts[ctx.trace(arg) as usize] += eta.eval(ctx, c) as i64;
    }
    SumValue::brute(sum_trace_histogram(&counts, &omega_table(ctx.p())))
}

/// Checked variant of [`kloosterman`] for elements carrying their field.
pub fn kloosterman_checked(a: &FieldElement, b: &FieldElement, eta: CharSpec) -> Result<SumValue> {
    a.sub(b)?;
    Ok(kloosterman(a.ctx(), a.value(), b.value(), eta))
}

/// Untwisted Kloosterman sum through the discriminant identity
/// `K_1(a,b) = Σ_{u ∈ F_q} χ(u² - 4ab) ω_p^{tr u}`, valid unless `a = b = 0`.
pub fn kloosterman_via_discriminant(ctx: &FieldCtx, a: Elem, b: Elem) -> SumValue {
    let four_ab = ctx.mul(ctx.from_int(4), ctx.mul(a, b));
    let mut counts = vec![0i64; ctx.p() as usize];
    for u in ctx.elements() {
        let disc = ctx.sub(ctx.square(u), four_ab);
        counts[ctx.trace(u) as usize] += ctx.chi(disc) as i64;
    }
    SumValue::brute(sum_trace_histogram(&counts, &omega_table(ctx.p())))
}

/// Salié sum `K_χ(a,b)` in closed form.
///
/// * `ab = 0`, not both zero: `χ(a + b)·G_1`
/// * `χ(ab) = 1`: `2 χ(b) G_1 cos(4π tr√(ab) / p)`
/// * `χ(ab) = -1` or `a = b = 0`: `0`
///
/// Either square root may be used; the cosine is even and `tr(-x) = -tr(x)`.
pub fn salie(ctx: &FieldCtx, a: Elem, b: Elem) -> SumValue {
    let g = gauss_sum(ctx).value;
    let ab = ctx.mul(a, b);
    let value = if a.is_zero() && b.is_zero() {
        Complex64::new(0.0, 0.0)
    } else if ab.is_zero() {
        // the twist does not drop out: Σ χ(c) ω^{tr(ac)} = χ(a) G_1
        g * ctx.chi(ctx.add(a, b)) as f64
    } else if ctx.chi(ab) == 1 {
        let root = ctx.sqrt(ab).expect("square");
        let tr = ctx.trace(root) as f64;
        g * (2.0 * ctx.chi(b) as f64 * (4.0 * PI * tr / ctx.p() as f64).cos())
    } else {
        Complex64::new(0.0, 0.0)
    };
    SumValue::closed(value)
}

/// `K_η(a,b)`: Salié closed form for the quadratic twist, summation otherwise.
pub fn twisted_kloosterman(ctx: &FieldCtx, a: Elem, b: Elem, eta: CharSpec) -> SumValue {
    match eta {
        CharSpec::Quadratic => salie(ctx, a, b),
        CharSpec::Trivial => kloosterman(ctx, a, b, eta),
    }
}

/// JSON-facing record of an evaluated sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumRecord {
    pub q: u32,
    pub kind: String,
    pub a: String,
    pub b: String,
    pub re: f64,
    pub im: f64,
    pub method: Method,
}

impl SumRecord {
    pub fn new(ctx: &FieldCtx, kind: &str, a: Elem, b: Elem, v: SumValue) -> Self {
        SumRecord {
            q: ctx.q(),
            kind: kind.to_string(),
            a: ctx.format_elem(a),
            b: ctx.format_elem(b),
            re: v.value.re,
            im: v.value.im,
            method: v.method,
        }
    }
}

/// Distribution of Kloosterman angles `K_1(1,a) = 2√q cos θ_a`, `a ∈ F_q^×`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SatoTateReport {
    pub q: u32,
    pub bins: usize,
    pub counts: Vec<u64>,
    /// Σ over bins of |empirical mass - semicircle mass|.
    pub l1_distance: f64,
    /// max_a |K_1(1,a)| / (2√q); at most 1 by the Weil bound.
    pub max_normalized: f64,
    pub max_imaginary: f64,
    /// Kolmogorov–Smirnov distance between the empirical angle distribution
    /// and the semicircle law; does not depend on the binning.
    pub ks_distance: f64,
}

/// Mass of the density `(2/π) sin²θ` on `[lo, hi]`.
pub fn semicircle_mass(lo: f64, hi: f64) -> f64 {
    let antideriv = |t: f64| (t - (2.0 * t).sin() / 2.0) / PI;
    antideriv(hi) - antideriv(lo)
}

pub fn sato_tate_histogram(ctx: &FieldCtx, bins: usize) -> SatoTateReport {
    let one = ctx.one();
    let values: Vec<Complex64> =
        ctx.nonzero_elements().map(|a| kloosterman(ctx, one, a, CharSpec::Trivial).value).collect();
    sato_tate_from_values(ctx.q(), &values, bins)
}

/// Angle statistics of given values `2√q cos θ`.
pub fn sato_tate_from_values(q: u32, values: &[Complex64], bins: usize) -> SatoTateReport {
    let bins = bins.max(1);
    let bound = 2.0 * (q as f64).sqrt();
    let mut counts = vec![0u64; bins];
    let mut max_normalized = 0.0f64;
    let mut max_imaginary = 0.0f64;
    let mut thetas = Vec::with_capacity(values.len());
    for k in values {
        max_imaginary = max_imaginary.max(k.im.abs());
        let x = k.re / bound;
        max_normalized = max_normalized.max(x.abs());
        let theta = x.clamp(-1.0, 1.0).acos();
        thetas.push(theta);
        let bin = ((theta / PI * bins as f64) as usize).min(bins - 1);
        counts[bin] += 1;
    }
    let total = values.len().max(1) as f64;
    let width = PI / bins as f64;
    let l1_distance = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let expect = semicircle_mass(i as f64 * width, (i + 1) as f64 * width);
            (c as f64 / total - expect).abs()
        })
        .sum();
    thetas.sort_by(f64::total_cmp);
    let ks_distance = thetas
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let f = semicircle_mass(0.0, t);
            (f - i as f64 / total).abs().max(((i + 1) as f64 / total - f).abs())
        })
        .fold(0.0, f64::max);
    SatoTateReport {
        q,
        bins,
        counts,
        l1_distance,
        max_normalized,
        max_imaginary,
        ks_distance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_field::build_ctx;

    const TOL: f64 = 1e-9;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn additive_character_basics() {
        let f5 = build_ctx(5, 1).unwrap();
        assert!(close(additive_char(&f5, Elem(0)), Complex64::new(1.0, 0.0), TOL));
        assert!(close(additive_char(&f5, Elem(1)), Complex64::from_polar(1.0, 2.0 * PI / 5.0), TOL));
        for (p, m) in [(5, 1), (3, 2), (7, 1)] {
            let ctx = build_ctx(p, m).unwrap();
            let total: Complex64 = ctx.elements().map(|a| additive_char(&ctx, a)).sum();
            assert!(total.norm() < TOL);
            for a in ctx.elements() {
                assert!((additive_char(&ctx, a).norm() - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gauss_sum_values() {
        let f5 = build_ctx(5, 1).unwrap();
        assert!(close(gauss_sum(&f5).value, Complex64::new(5f64.sqrt(), 0.0), TOL));
        let f3 = build_ctx(3, 1).unwrap();
        assert!(close(gauss_sum(&f3).value, Complex64::new(0.0, 3f64.sqrt()), TOL));
        for (p, m) in [(3, 1), (3, 2), (3, 3), (5, 1), (5, 2), (7, 1), (7, 2), (11, 1), (13, 1)] {
            let ctx = build_ctx(p, m).unwrap();
            let closed = gauss_sum(&ctx).value;
            let brute = gauss_sum_brute(&ctx).value;
            let q = ctx.q() as f64;
            assert!((closed.norm_sqr() - q).abs() < 1e-9 * q);
            assert!(close(closed, brute, 1e-9 * q.sqrt()), "q={}", ctx.q());
        }
    }

    #[test]
    fn kloosterman_examples() {
        let f5 = build_ctx(5, 1).unwrap();
        // four-term oracle: c + 1/c for c = 1..4 is 2, 0, 0, 3
        let oracle = (Complex64::from_polar(1.0, 4.0 * PI / 5.0)
            + Complex64::from_polar(1.0, 6.0 * PI / 5.0))
            + 2.0;
        let k = kloosterman(&f5, Elem(1), Elem(1), CharSpec::Trivial).value;
        assert!(close(k, oracle, TOL));
        assert!((k.re - 0.381966).abs() < 1e-6);
        let via = kloosterman_via_discriminant(&f5, Elem(1), Elem(1)).value;
        assert!(close(k, via, TOL));
        let k00 = kloosterman(&f5, Elem(0), Elem(0), CharSpec::Trivial).value;
        assert!(close(k00, Complex64::new(4.0, 0.0), TOL));
        let k10 = kloosterman(&f5, Elem(1), Elem(0), CharSpec::Trivial).value;
        assert!(close(k10, Complex64::new(-1.0, 0.0), TOL));
    }

    #[test]
    fn salie_examples() {
        let f5 = build_ctx(5, 1).unwrap();
        let s = salie(&f5, Elem(1), Elem(1)).value;
        let expect = 2.0 * 5f64.sqrt() * (4.0 * PI / 5.0).cos();
        assert!(close(s, Complex64::new(expect, 0.0), TOL));
        assert!((s.re + 3.618034).abs() < 1e-6);
        let brute = kloosterman(&f5, Elem(1), Elem(1), CharSpec::Quadratic).value;
        let four_terms = Complex64::from_polar(1.0, 4.0 * PI / 5.0)
            + Complex64::from_polar(1.0, 6.0 * PI / 5.0)
            - 2.0;
        assert!(close(brute, four_terms, TOL));
        assert!(close(salie(&f5, Elem(1), Elem(2)).value, Complex64::new(0.0, 0.0), TOL));
        assert!(close(salie(&f5, Elem(1), Elem(0)).value, gauss_sum(&f5).value, TOL));
    }

    #[test]
    fn salie_zero_product_branch_carries_the_character() {
        // Σ χ(c) ω^{2c} over F_5^× is ω² + ω³ - ω - ω⁴ = -√5
        let f5 = build_ctx(5, 1).unwrap();
        let brute = kloosterman(&f5, Elem(2), Elem(0), CharSpec::Quadratic).value;
        assert!(close(brute, Complex64::new(-(5f64.sqrt()), 0.0), TOL));
        assert!(close(salie(&f5, Elem(2), Elem(0)).value, brute, TOL));
        assert!(close(salie(&f5, Elem(0), Elem(2)).value, brute, TOL));
    }

    #[test]
    fn salie_closed_form_matches_summation_exhaustively() {
        for q in [3u64, 5, 7, 9, 11, 13, 25, 27, 49] {
            let ctx = FieldCtx::from_order(q).unwrap();
            let tol = 1e-9 * (q as f64).sqrt();
            for a in ctx.elements() {
                for b in ctx.elements() {
                    let c = salie(&ctx, a, b).value;
                    let s = kloosterman(&ctx, a, b, CharSpec::Quadratic).value;
                    assert!(close(c, s, tol), "q={q} a={a:?} b={b:?}: {c} vs {s}");
                }
            }
        }
    }

    #[test]
    fn kloosterman_identities_small_fields() {
        for q in [3u64, 5, 7, 9, 11, 25, 27] {
            let ctx = FieldCtx::from_order(q).unwrap();
            let tol = 1e-9 * q as f64;
            for a in ctx.elements() {
                for b in ctx.elements() {
                    for eta in [CharSpec::Trivial, CharSpec::Quadratic] {
                        let ab = kloosterman(&ctx, a, b, eta).value;
                        let ba = kloosterman(&ctx, b, a, eta).value;
                        assert!(close(ab, ba, tol));
                        if eta == CharSpec::Trivial {
                            assert!(ab.im.abs() < tol);
                        }
                        assert!(ab.norm() <= q as f64);
                    }
                    if !(a.is_zero() && b.is_zero()) {
                        let k = kloosterman(&ctx, a, b, CharSpec::Trivial).value;
                        let via = kloosterman_via_discriminant(&ctx, a, b).value;
                        assert!(close(k, via, tol), "q={q}");
                    }
                }
            }
        }
    }

    #[test]
    fn weil_bound_and_histogram_totals() {
        for q in [5u64, 7, 9, 11, 13, 25] {
            let ctx = FieldCtx::from_order(q).unwrap();
            let rep = sato_tate_histogram(&ctx, 8);
            assert_eq!(rep.counts.iter().sum::<u64>(), q - 1);
            assert!(rep.max_normalized <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn kloosterman_angles_near_semicircle_at_q_1009() {
        let ctx = FieldCtx::from_order(1009).unwrap();
        let rep = sato_tate_histogram(&ctx, 10);
        assert!(rep.l1_distance < 0.15, "{}", rep.l1_distance);
        assert!(rep.ks_distance < 0.05);
        assert!(rep.max_imaginary < 1e-9);
    }

    #[test]
    fn semicircle_is_a_probability_density() {
        assert!((semicircle_mass(0.0, PI) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn chi_power_parity() {
        assert_eq!(CharSpec::chi_power(2), CharSpec::Trivial);
        assert_eq!(CharSpec::chi_power(3), CharSpec::Quadratic);
    }
}
