//! Sparse multivariate polynomials over `F_q` with exact division and gcd.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::finite_field::{Elem, FieldCtx};

/// Polynomial in `x1..x_n`. Terms are keyed by exponent vectors; the map
/// order is lexicographic with `x1 > x2 > ..`, so the last entry is the
/// leading term.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Elem>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Elem) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn one(ctx: &FieldCtx, nvars: usize) -> Self {
        Self::constant(nvars, ctx.one())
    }

    /// `c · x^e`.
    pub fn monomial(exps: Vec<u32>, c: Elem) -> Self {
        let mut p = Self::zero(exps.len());
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    /// The variable `x_{i+1}` (zero-based `i`).
    pub fn var(ctx: &FieldCtx, nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, ctx.one())
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, Elem)>, ctx: &FieldCtx) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            p.add_term(ctx, e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Elem)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exps: &[u32]) -> Elem {
        self.terms.get(exps).copied().unwrap_or(Elem::ZERO)
    }

    fn add_term(&mut self, ctx: &FieldCtx, e: Vec<u32>, c: Elem) {
        let v = ctx.add(self.coefficient(&e), c);
        if v.is_zero() {
            self.terms.remove(&e);
        } else {
            self.terms.insert(e, v);
        }
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn degree(&self) -> u32 {
        self.total_degree().unwrap_or(0)
    }

    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|e| e[v]).max().unwrap_or(0)
    }

    /// Homogeneous part of total degree `t`.
    pub fn homogeneous_part(&self, t: u32) -> MPoly {
        MPoly {
            nvars: self.nvars,
            terms: self.terms.iter().filter(|(e, _)| e.iter().sum::<u32>() == t).map(|(e, c)| (e.clone(), *c)).collect(),
        }
    }

    pub fn leading(&self) -> Option<(&Vec<u32>, Elem)> {
        self.terms.iter().next_back().map(|(e, c)| (e, *c))
    }

    pub fn add(&self, ctx: &FieldCtx, o: &MPoly) -> MPoly {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(ctx, e.clone(), *c);
        }
        r
    }

    pub fn neg(&self, ctx: &FieldCtx) -> MPoly {
        MPoly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), ctx.neg(*c))).collect() }
    }

    pub fn sub(&self, ctx: &FieldCtx, o: &MPoly) -> MPoly {
        self.add(ctx, &o.neg(ctx))
    }

    pub fn scale(&self, ctx: &FieldCtx, c: Elem) -> MPoly {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        MPoly { nvars: self.nvars, terms: self.terms.iter().map(|(e, v)| (e.clone(), ctx.mul(*v, c))).collect() }
    }

    /// `self - c`.
    pub fn shift(&self, ctx: &FieldCtx, c: Elem) -> MPoly {
        self.sub(ctx, &Self::constant(self.nvars, c))
    }

    pub fn mul(&self, ctx: &FieldCtx, o: &MPoly) -> MPoly {
        let mut r = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                r.add_term(ctx, e, ctx.mul(*ca, *cb));
            }
        }
        r
    }

    fn mul_var_pow(&self, v: usize, k: u32) -> MPoly {
        MPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e = e.clone();
                    e[v] += k;
                    (e, *c)
                })
                .collect(),
        }
    }

    /// Coefficient of `x_v^k`, as a polynomial free of `x_v`.
    pub fn coeff_in(&self, v: usize, k: u32) -> MPoly {
        MPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e[v] == k)
                .map(|(e, c)| {
                    let mut e = e.clone();
                    e[v] = 0;
                    (e, *c)
                })
                .collect(),
        }
    }

    pub fn eval(&self, ctx: &FieldCtx, x: &[Elem]) -> Elem {
        self.terms.iter().fold(Elem::ZERO, |acc, (e, c)| {
            let m = e.iter().zip(x).fold(*c, |m, (&k, &xi)| ctx.mul(m, ctx.pow(xi, k as u64)));
            ctx.add(acc, m)
        })
    }

    /// Scale so the leading coefficient is 1.
    pub fn monic(&self, ctx: &FieldCtx) -> MPoly {
        match self.leading() {
            Some((_, c)) => self.scale(ctx, ctx.inv(c).expect("leading coefficient is nonzero")),
            None => self.clone(),
        }
    }

    /// Apply a map to every coefficient (e.g. an embedding into an extension).
    pub fn map_coeffs(&self, f: impl Fn(Elem) -> Elem) -> MPoly {
        MPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), f(*c))).filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    /// `self / d` when `d` divides `self`, else `None`.
    pub fn div_exact(&self, ctx: &FieldCtx, d: &MPoly) -> Option<MPoly> {
        let (ed, cd) = d.leading()?;
        let (ed, cd_inv) = (ed.clone(), ctx.inv(cd)?);
        let mut q = Self::zero(self.nvars);
        let mut r = self.clone();
        while let Some((er, cr)) = r.leading() {
            if er.iter().zip(&ed).any(|(a, b)| a < b) {
                return None;
            }
            let t = Self::monomial(er.iter().zip(&ed).map(|(a, b)| a - b).collect(), ctx.mul(cr, cd_inv));
            r = r.sub(ctx, &t.mul(ctx, d));
            q = q.add(ctx, &t);
        }
        Some(q)
    }

    /// Monic greatest common divisor. `gcd(0, 0) = 0`.
    pub fn gcd(ctx: &FieldCtx, a: &MPoly, b: &MPoly) -> MPoly {
        gcd_from(ctx, a, b, 0)
    }

    /// Whether the polynomials share a factor of positive degree.
    pub fn have_common_factor(ctx: &FieldCtx, a: &MPoly, b: &MPoly) -> bool {
        Self::gcd(ctx, a, b).degree() > 0
    }

    pub fn format(&self, ctx: &FieldCtx) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                out.push_str(" + ");
            }
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(j, &k)| if k == 1 { format!("x{}", j + 1) } else { format!("x{}^{k}", j + 1) })
                .collect();
            let coef = if ctx.m() == 1 { ctx.format_elem(*c) } else { format!("({})", ctx.format_elem(*c)) };
            if mono.is_empty() {
                out.push_str(&coef);
            } else {
                if *c != ctx.one() {
                    let _ = write!(out, "{coef}*");
                }
                out.push_str(&mono.join("*"));
            }
        }
        out
    }

    /// Parse sums of terms such as `x1^2 - 3*x2 + (1,2)*x1*x2 + 4`.
    /// Integer coefficients are reduced mod `p`; parenthesized ones are
    /// field elements in coefficient-list form.
    pub fn parse(ctx: &FieldCtx, nvars: usize, s: &str) -> Result<MPoly> {
        let err = |msg: &str| Error::Parse(format!("polynomial {s:?}: {msg}"));
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        if chars.is_empty() {
            return Err(err("empty"));
        }
        let mut p = Self::zero(nvars);
        let mut i = 0;
        while i < chars.len() {
            let mut sign = 1i64;
            while i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                if chars[i] == '-' {
                    sign = -sign;
                }
                i += 1;
            }
            let mut coef = ctx.from_int(sign);
            let mut exps = vec![0u32; nvars];
            loop {
                match chars.get(i) {
                    Some('x') => {
                        i += 1;
                        let v = read_number(&chars, &mut i).ok_or_else(|| err("variable index"))? as usize;
                        if v == 0 || v > nvars {
                            return Err(err(&format!("variable x{v} outside x1..x{nvars}")));
                        }
                        let mut k = 1;
                        if chars.get(i) == Some(&'^') {
                            i += 1;
                            k = read_number(&chars, &mut i).ok_or_else(|| err("exponent"))? as u32;
                        }
                        exps[v - 1] += k;
                    }
                    Some('(') => {
                        let close = chars[i..].iter().position(|&c| c == ')').ok_or_else(|| err("unclosed '('"))?;
                        let inner: String = chars[i + 1..i + close].iter().collect();
                        coef = ctx.mul(coef, ctx.parse_elem(&inner)?);
                        i += close + 1;
                    }
                    Some(c) if c.is_ascii_digit() => {
                        let n = read_number(&chars, &mut i).ok_or_else(|| err("coefficient"))?;
                        coef = ctx.mul(coef, ctx.from_int((n % ctx.p() as u64) as i64));
                    }
                    _ => return Err(err(&format!("unexpected input at position {i}"))),
                }
                if chars.get(i) == Some(&'*') {
                    i += 1;
                } else {
                    break;
                }
            }
            if i < chars.len() && chars[i] != '+' && chars[i] != '-' {
                return Err(err(&format!("unexpected {:?}", chars[i])));
            }
            p.add_term(ctx, exps, coef);
        }
        Ok(p)
    }
}

fn read_number(chars: &[char], i: &mut usize) -> Option<u64> {
    let start = *i;
    while *i < chars.len() && chars[*i].is_ascii_digit() {
        *i += 1;
    }
    chars[start..*i].iter().collect::<String>().parse().ok()
}

/// Pseudo-remainder of `f` by `g` as polynomials in `x_v`.
fn prem(ctx: &FieldCtx, f: &MPoly, g: &MPoly, v: usize) -> MPoly {
    let dg = g.degree_in(v);
    let lg = g.coeff_in(v, dg);
    let mut r = f.clone();
    while !r.is_zero() && r.degree_in(v) >= dg {
        let dr = r.degree_in(v);
        let lr = r.coeff_in(v, dr);
        r = r.mul(ctx, &lg).sub(ctx, &lr.mul(ctx, g).mul_var_pow(v, dr - dg));
    }
    r
}

/// Gcd of the coefficients of `a` in `x_v`.
fn content(ctx: &FieldCtx, a: &MPoly, v: usize) -> MPoly {
    (0..=a.degree_in(v)).fold(MPoly::zero(a.nvars), |g, k| gcd_from(ctx, &g, &a.coeff_in(v, k), v + 1))
}

/// Gcd of polynomials involving only `x_v, x_{v+1}, ..`, by recursion on
/// the variable and a primitive remainder sequence in `x_v`.
fn gcd_from(ctx: &FieldCtx, a: &MPoly, b: &MPoly, v: usize) -> MPoly {
    let n = a.nvars;
    if a.is_zero() {
        return b.monic(ctx);
    }
    if b.is_zero() {
        return a.monic(ctx);
    }
    if v == n {
        return MPoly::one(ctx, n);
    }
    let (ca, cb) = (content(ctx, a, v), content(ctx, b, v));
    let c = gcd_from(ctx, &ca, &cb, v + 1);
    let mut f = a.div_exact(ctx, &ca).expect("content divides");
    let mut g = b.div_exact(ctx, &cb).expect("content divides");
    if f.degree_in(v) < g.degree_in(v) {
        std::mem::swap(&mut f, &mut g);
    }
    while !g.is_zero() {
        let r = prem(ctx, &f, &g, v);
        f = g;
        g = if r.is_zero() { r } else { r.div_exact(ctx, &content(ctx, &r, v)).expect("content divides") };
    }
    if f.degree_in(v) == 0 {
        c
    } else {
        let pf = f.div_exact(ctx, &content(ctx, &f, v)).expect("content divides");
        c.mul(ctx, &pf).monic(ctx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_field::build_ctx;

    #[test]
    fn parse_format_round_trip() {
        let ctx = build_ctx(7, 1).unwrap();
        let p = MPoly::parse(&ctx, 2, "x1^2 - 3*x2 + 2*x1*x2 + 4").unwrap();
        assert_eq!(p.degree(), 2);
        assert_eq!(p.coefficient(&[0, 1]), ctx.from_int(-3));
        assert_eq!(MPoly::parse(&ctx, 2, &p.format(&ctx)).unwrap(), p);
        assert!(MPoly::parse(&ctx, 2, "x3").is_err());
        assert!(MPoly::parse(&ctx, 2, "x1 +* 2").is_err());
        let c9 = build_ctx(3, 2).unwrap();
        let p = MPoly::parse(&c9, 2, "(1,2)*x1 + x2^2").unwrap();
        assert_eq!(MPoly::parse(&c9, 2, &p.format(&c9)).unwrap(), p);
    }

    #[test]
    fn arithmetic_and_division() {
        let ctx = build_ctx(5, 1).unwrap();
        let a = MPoly::parse(&ctx, 2, "x1 + 2*x2 + 1").unwrap();
        let b = MPoly::parse(&ctx, 2, "x1*x2 - x2^2 + 3").unwrap();
        let ab = a.mul(&ctx, &b);
        assert_eq!(ab.div_exact(&ctx, &a).unwrap(), b);
        assert_eq!(ab.div_exact(&ctx, &b).unwrap(), a);
        assert!(b.div_exact(&ctx, &a).is_none());
        assert_eq!(ab.eval(&ctx, &[Elem(2), Elem(3)]), ctx.mul(a.eval(&ctx, &[Elem(2), Elem(3)]), b.eval(&ctx, &[Elem(2), Elem(3)])));
        assert!(a.sub(&ctx, &a).is_zero());
    }

    #[test]
    fn gcd_finds_shared_factors() {
        let ctx = build_ctx(7, 1).unwrap();
        let p = |s: &str| MPoly::parse(&ctx, 2, s).unwrap();
        assert_eq!(MPoly::gcd(&ctx, &p("x1*x2"), &p("x1*x2 + x1")), p("x1"));
        assert!(!MPoly::have_common_factor(&ctx, &p("x1^2 + x2^2 - 1"), &p("x1 - x2")));
        let f = p("x1 + x2^2 + 3");
        let g = p("2*x1*x2 + 5");
        let h = p("x1^2 - x2");
        let d = MPoly::gcd(&ctx, &f.mul(&ctx, &g), &f.mul(&ctx, &h));
        assert_eq!(d, f.monic(&ctx));
        assert_eq!(MPoly::gcd(&ctx, &p("3"), &p("x1")), p("1"));
        let ctx3 = build_ctx(3, 1).unwrap();
        let a = MPoly::parse(&ctx3, 3, "x1*x3 + x2").unwrap();
        let b = MPoly::parse(&ctx3, 3, "x3 - x1").unwrap();
        let c = MPoly::parse(&ctx3, 3, "x2*x3 + 1").unwrap();
        let d = MPoly::gcd(&ctx3, &a.mul(&ctx3, &b).mul(&ctx3, &c), &a.mul(&ctx3, &c.mul(&ctx3, &c)));
        assert_eq!(d, a.mul(&ctx3, &c).monic(&ctx3));
    }
}
