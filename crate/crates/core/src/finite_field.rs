//! Arithmetic in `F_q`, `q = p^m` with `p` odd.
//!
//! Elements are stored as an index into the canonical enumeration of the
//! field: the coefficient list `[c0, c1, .., c_{m-1}]` (little-endian
//! polynomial basis) read lexicographically, so
//! `index = c0·p^{m-1} + c1·p^{m-2} + .. + c_{m-1}`. The zero element has
//! index 0 and for `m = 1` the index is the residue itself.
//!
//! A [`FieldCtx`] holds discrete log/exp tables built from a primitive
//! element, so multiplication, inversion, the quadratic character and
//! square roots are table lookups. The fast API works on bare [`Elem`]
//! indices; [`FieldElement`] is the checked wrapper that carries its context.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest supported field order.
pub const MAX_FIELD_ORDER: u64 = 1 << 20;

/// Index of an element in the canonical enumeration of its field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Elem(pub u32);

impl Elem {
    pub const ZERO: Elem = Elem(0);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// Immutable arithmetic context for `F_{p^m}`.
pub struct FieldCtx {
    p: u32,
    m: u32,
    q: u32,
    modulus: Vec<u32>,
    /// `digit_weight[i] = p^{m-1-i}`, the place value of coefficient `c_i`.
    digit_weight: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
    trace: Vec<u32>,
    neg: Vec<u32>,
    add_table: Option<Vec<u32>>,
    one: Elem,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("p", &self.p)
            .field("m", &self.m)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl fmt::Display for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.p, self.m)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Write `q` as `p^m` for a prime `p`, if possible.
pub fn factor_prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = *prime_factors(q).first()?;
    let mut m = 0;
    let mut rest = q;
    while rest % p == 0 {
        rest /= p;
        m += 1;
    }
    (rest == 1).then_some((p as u32, m))
}

// Dense univariate polynomials over F_p, little-endian, used while building
// a context. Trailing zeros are trimmed.
mod fp_poly {
    pub fn trim(mut a: Vec<u32>) -> Vec<u32> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    pub fn inv_mod(a: u32, p: u32) -> u32 {
        pow_mod(a, p - 2, p)
    }

    pub fn pow_mod(mut b: u32, mut e: u32, p: u32) -> u32 {
        let mut r = 1u64;
        let mut b64 = b as u64 % p as u64;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b64 % p as u64;
            }
            b64 = b64 * b64 % p as u64;
            e >>= 1;
        }
        b = r as u32;
        b
    }

    pub fn sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let n = a.len().max(b.len());
        let out = (0..n)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0);
                let y = b.get(i).copied().unwrap_or(0);
                (x + p - y) % p
            })
            .collect();
        trim(out)
    }

    pub fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
            }
        }
        trim(out.into_iter().map(|v| v as u32).collect())
    }

    pub fn rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        let mut r = trim(a.to_vec());
        let dm = m.len() - 1;
        let lead_inv = inv_mod(m[dm], p) as u64;
        while r.len() > dm {
            let dr = r.len() - 1;
            let c = r[dr] as u64 * lead_inv % p as u64;
            let shift = dr - dm;
            for (i, &mi) in m.iter().enumerate() {
                let sub = c * mi as u64 % p as u64;
                r[shift + i] = ((r[shift + i] as u64 + p as u64 - sub) % p as u64) as u32;
            }
            r = trim(r);
        }
        r
    }

    pub fn mul_mod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        rem(&mul(a, b, p), m, p)
    }

    pub fn pow_poly_mod(base: &[u32], mut e: u64, m: &[u32], p: u32) -> Vec<u32> {
        let mut result = vec![1u32];
        let mut b = rem(base, m, p);
        while e > 0 {
            if e & 1 == 1 {
                result = mul_mod(&result, &b, m, p);
            }
            b = mul_mod(&b, &b, m, p);
            e >>= 1;
        }
        result
    }

    pub fn gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let mut a = trim(a.to_vec());
        let mut b = trim(b.to_vec());
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        a
    }

    /// Ben-Or: `f` of degree `m` is irreducible iff
    /// `gcd(f, x^{p^i} - x) = 1` for `1 <= i <= m/2`.
    pub fn is_irreducible(f: &[u32], p: u32) -> bool {
        let m = f.len() - 1;
        if m == 0 {
            return false;
        }
        let x = vec![0u32, 1];
        let mut xp = x.clone();
        for _ in 1..=m / 2 {
            xp = pow_poly_mod(&xp, p as u64, f, p);
            let g = gcd(f, &sub(&xp, &x, p), p);
            if g.len() > 1 {
                return false;
            }
        }
        true
    }
}

impl FieldCtx {
    /// Build `F_{p^m}` with the lexicographically smallest monic irreducible
    /// modulus (coefficient list `[c0, .., c_{m-1}, 1]` compared from `c0`).
    pub fn new(p: u32, m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidField("extension degree must be >= 1".into()));
        }
        if !is_prime(p as u64) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        if p == 2 {
            return Err(Error::InvalidField("characteristic 2 is not supported".into()));
        }
        let q = (p as u64).checked_pow(m).unwrap_or(u64::MAX);
        if q > MAX_FIELD_ORDER {
            return Err(Error::InvalidField(format!(
                "{p}^{m} exceeds the maximum field order {MAX_FIELD_ORDER}"
            )));
        }
        let q = q as u32;
        let modulus = (0..q)
            .map(|n| {
                let mut coeffs = digits_of(n, p, m);
                coeffs.push(1);
                coeffs
            })
            .find(|f| fp_poly::is_irreducible(f, p))
            .expect("an irreducible polynomial of every degree exists");
        Self::with_modulus(p, modulus)
    }

    /// Build a context from an explicit monic irreducible modulus.
    pub fn with_modulus(p: u32, modulus: Vec<u32>) -> Result<Self> {
        if !is_prime(p as u64) || p == 2 {
            return Err(Error::InvalidField(format!("{p} is not an odd prime")));
        }
        let modulus = fp_poly::trim(modulus.into_iter().map(|c| c % p).collect());
        if modulus.len() < 2 || *modulus.last().unwrap() != 1 {
            return Err(Error::InvalidField("modulus must be monic of degree >= 1".into()));
        }
        if !fp_poly::is_irreducible(&modulus, p) {
            return Err(Error::InvalidField(format!("modulus {modulus:?} is reducible")));
        }
        let m = (modulus.len() - 1) as u32;
        let q64 = (p as u64).pow(m);
        if q64 > MAX_FIELD_ORDER {
            return Err(Error::InvalidField(format!("{p}^{m} is too large")));
        }
        let q = q64 as u32;
        let digit_weight: Vec<u32> = (0..m).map(|i| p.pow(m - 1 - i)).collect();
        let to_index = |coeffs: &[u32]| -> u32 {
            coeffs.iter().zip(&digit_weight).map(|(c, w)| c * w).sum()
        };

        // primitive element search with schoolbook arithmetic
        let order = q as u64 - 1;
        let factors = prime_factors(order);
        let generator = (1..q)
            .map(|n| fp_poly::trim(digits_of(n, p, m)))
            .find(|g| {
                factors.iter().all(|&l| {
                    fp_poly::pow_poly_mod(g, order / l, &modulus, p) != vec![1u32]
                })
            })
            .expect("F_q^x is cyclic");

        let mut exp = Vec::with_capacity(order as usize);
        let mut log = vec![0u32; q as usize];
        let mut cur = vec![1u32];
        for i in 0..order as u32 {
            let mut coeffs = cur.clone();
            coeffs.resize(m as usize, 0);
            let idx = to_index(&coeffs);
            exp.push(idx);
            log[idx as usize] = i;
            cur = fp_poly::mul_mod(&cur, &generator, &modulus, p);
        }

        // tr is F_p-linear: tabulate tr(alpha^j) and extend.
        let basis_trace: Vec<u32> = (0..m as usize)
            .map(|j| {
                let mut xj = vec![0u32; j + 1];
                xj[j] = 1;
                let mut acc: Vec<u32> = Vec::new();
                let mut frob = fp_poly::rem(&xj, &modulus, p);
                for _ in 0..m {
                    acc = add_polys(&acc, &frob, p);
                    frob = fp_poly::pow_poly_mod(&frob, p as u64, &modulus, p);
                }
                debug_assert!(acc.len() <= 1, "trace must land in F_p");
                acc.first().copied().unwrap_or(0)
            })
            .collect();
        let trace = (0..q)
            .map(|n| {
                digits_of(n, p, m)
                    .iter()
                    .zip(&basis_trace)
                    .map(|(c, t)| (c * t) % p)
                    .sum::<u32>()
                    % p
            })
            .collect();

        let neg = (0..q)
            .map(|n| {
                let d: Vec<u32> = digits_of(n, p, m).iter().map(|c| (p - c) % p).collect();
                to_index(&d)
            })
            .collect();

        let mut ctx = FieldCtx {
            p,
            m,
            q,
            modulus,
            digit_weight,
            exp,
            log,
            trace,
            neg,
            add_table: None,
            one: Elem(0),
        };
        ctx.one = ctx.from_int(1);
        if m > 1 && q <= 1024 {
            let table = (0..q * q)
                .map(|i| ctx.add_digits(Elem(i / q), Elem(i % q)).0)
                .collect();
            ctx.add_table = Some(table);
        }
        Ok(ctx)
    }

    /// Parse `"p^m"` or a bare prime power `"q"`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (p, m) = match spec.split_once('^') {
            Some((p, m)) => {
                let p = p.trim().parse::<u32>().map_err(|e| Error::Parse(format!("{spec}: {e}")))?;
                let m = m.trim().parse::<u32>().map_err(|e| Error::Parse(format!("{spec}: {e}")))?;
                (p, m)
            }
            None => {
                let q = spec.parse::<u64>().map_err(|e| Error::Parse(format!("{spec}: {e}")))?;
                factor_prime_power(q)
                    .ok_or_else(|| Error::InvalidField(format!("{q} is not a prime power")))?
            }
        };
        FieldCtx::new(p, m)
    }

    /// Build from an order `q = p^m`.
    pub fn from_order(q: u64) -> Result<Self> {
        let (p, m) = factor_prime_power(q)
            .ok_or_else(|| Error::InvalidField(format!("{q} is not a prime power")))?;
        FieldCtx::new(p, m)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn order(&self) -> usize {
        self.q as usize
    }

    /// Modulus coefficients, little-endian, including the leading 1.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// Contexts are interchangeable iff they describe the same quotient ring.
    pub fn same_field(&self, other: &FieldCtx) -> bool {
        self.p == other.p && self.modulus == other.modulus
    }

    #[inline]
    pub fn zero(&self) -> Elem {
        Elem::ZERO
    }

    #[inline]
    pub fn one(&self) -> Elem {
        self.one
    }

    /// Image of an integer under `Z -> F_p ⊂ F_q`.
    pub fn from_int(&self, n: i64) -> Elem {
        let c = n.rem_euclid(self.p as i64) as u32;
        Elem(c * self.digit_weight[0])
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<Elem> {
        if coeffs.len() > self.m as usize {
            return Err(Error::InvalidInput(format!(
                "{} coefficients for a degree-{} extension",
                coeffs.len(),
                self.m
            )));
        }
        if let Some(c) = coeffs.iter().find(|&&c| c >= self.p) {
            return Err(Error::InvalidInput(format!("coefficient {c} not reduced mod {}", self.p)));
        }
        Ok(Elem(coeffs.iter().zip(&self.digit_weight).map(|(c, w)| c * w).sum()))
    }

    pub fn from_index(&self, index: usize) -> Result<Elem> {
        if index >= self.q as usize {
            return Err(Error::InvalidInput(format!("index {index} outside F_{}", self.q)));
        }
        Ok(Elem(index as u32))
    }

    pub fn coeffs(&self, a: Elem) -> Vec<u32> {
        digits_of(a.0, self.p, self.m)
    }

    /// All `q` elements in canonical order.
    pub fn elements(&self) -> impl Iterator<Item = Elem> + '_ {
        (0..self.q).map(Elem)
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = Elem> + '_ {
        (1..self.q).map(Elem)
    }

    fn add_digits(&self, a: Elem, b: Elem) -> Elem {
        let (mut x, mut y) = (a.0, b.0);
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..self.m {
            let d = (x % self.p + y % self.p) % self.p;
            out += d * place;
            place *= self.p;
            x /= self.p;
            y /= self.p;
        }
        Elem(out)
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        if self.m == 1 {
            let s = a.0 + b.0;
            return Elem(if s >= self.p { s - self.p } else { s });
        }
        match &self.add_table {
            Some(t) => Elem(t[(a.0 * self.q + b.0) as usize]),
            None => self.add_digits(a, b),
        }
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        Elem(self.neg[a.index()])
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a.is_zero() || b.is_zero() {
            return Elem::ZERO;
        }
        let s = self.log[a.index()] as u64 + self.log[b.index()] as u64;
        Elem(self.exp[(s % (self.q as u64 - 1)) as usize])
    }

    #[inline]
    pub fn inv(&self, a: Elem) -> Option<Elem> {
        if a.is_zero() {
            return None;
        }
        let l = self.log[a.index()];
        let n = self.q - 1;
        Some(Elem(self.exp[((n - l) % n) as usize]))
    }

    pub fn div(&self, a: Elem, b: Elem) -> Option<Elem> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return self.one;
        }
        if a.is_zero() {
            return Elem::ZERO;
        }
        let n = self.q as u64 - 1;
        let l = self.log[a.index()] as u64;
        Elem(self.exp[((l * (e % n)) % n) as usize])
    }

    pub fn square(&self, a: Elem) -> Elem {
        self.mul(a, a)
    }

    /// Absolute trace `F_q -> F_p`, returned as a residue in `[0, p)`.
    #[inline]
    pub fn trace(&self, a: Elem) -> u32 {
        self.trace[a.index()]
    }

    /// Quadratic character: 0 at 0, +1 on nonzero squares, -1 otherwise.
    #[inline]
    pub fn chi(&self, a: Elem) -> i32 {
        if a.is_zero() {
            0
        } else if self.log[a.index()] % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Some square root of `a`, or `None` when `a` is a non-square.
    pub fn sqrt(&self, a: Elem) -> Option<Elem> {
        if a.is_zero() {
            return Some(Elem::ZERO);
        }
        let l = self.log[a.index()];
        (l % 2 == 0).then(|| Elem(self.exp[(l / 2) as usize]))
    }

    /// Discrete log base the internal primitive element.
    pub fn log(&self, a: Elem) -> Option<u32> {
        (!a.is_zero()).then(|| self.log[a.index()])
    }

    pub fn primitive_element(&self) -> Elem {
        Elem(self.exp[if self.q > 2 { 1 } else { 0 }])
    }

    pub fn format_elem(&self, a: Elem) -> String {
        self.coeffs(a).iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
    }

    /// Parse the textual form `"c0,c1,..,c_{m-1}"`; missing trailing
    /// coefficients are zero.
    pub fn parse_elem(&self, s: &str) -> Result<Elem> {
        let coeffs = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<i64>()
                    .map(|v| v.rem_euclid(self.p as i64) as u32)
                    .map_err(|e| Error::Parse(format!("element {s:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        self.from_coeffs(&coeffs)
    }

    /// Images of the elements of `self` inside `big`, indexed by element
    /// index. `big` must have the same characteristic and degree divisible by
    /// `self.m`. Found by locating a root of `self`'s modulus in `big`.
    pub fn embedding_into(&self, big: &FieldCtx) -> Result<Vec<Elem>> {
        if big.p != self.p || big.m % self.m != 0 {
            return Err(Error::InvalidInput(format!("F_{} does not embed into F_{}", self.q, big.q)));
        }
        let eval = |x: Elem| -> Elem {
            self.modulus.iter().rev().fold(Elem::ZERO, |acc, &c| {
                big.add(big.mul(acc, x), big.from_int(c as i64))
            })
        };
        let root = big
            .elements()
            .find(|&x| eval(x).is_zero())
            .ok_or_else(|| Error::InvalidInput("modulus has no root in the extension".into()))?;
        let root_powers: Vec<Elem> = (0..self.m as u64).map(|j| big.pow(root, j)).collect();
        Ok(self
            .elements()
            .map(|a| {
                self.coeffs(a).iter().zip(&root_powers).fold(Elem::ZERO, |acc, (&c, &rp)| {
                    big.add(acc, big.mul(big.from_int(c as i64), rp))
                })
            })
            .collect())
    }
}

fn add_polys(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let n = a.len().max(b.len());
    fp_poly::trim(
        (0..n)
            .map(|i| (a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0)) % p)
            .collect(),
    )
}

/// Coefficient list `[c0, .., c_{m-1}]` of the element with index `n`.
fn digits_of(mut n: u32, p: u32, m: u32) -> Vec<u32> {
    let mut out = vec![0u32; m as usize];
    for slot in out.iter_mut().rev() {
        *slot = n % p;
        n /= p;
    }
    out
}

/// Shared handle to a field context.
pub type Field = Arc<FieldCtx>;

pub fn build_ctx(p: u32, m: u32) -> Result<Field> {
    FieldCtx::new(p, m).map(Arc::new)
}

/// An element together with its field; cross-field operations are errors.
#[derive(Clone)]
pub struct FieldElement {
    ctx: Field,
    value: Elem,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldElement({} in F_{})", self.ctx.format_elem(self.value), self.ctx)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.ctx.format_elem(self.value))
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.same_field(&other.ctx) && self.value == other.value
    }
}

impl Eq for FieldElement {}

impl FieldElement {
    pub fn new(ctx: &Field, value: Elem) -> Self {
        debug_assert!(value.0 < ctx.q());
        FieldElement { ctx: ctx.clone(), value }
    }

    pub fn from_int(ctx: &Field, n: i64) -> Self {
        Self::new(ctx, ctx.from_int(n))
    }

    pub fn from_coeffs(ctx: &Field, coeffs: &[u32]) -> Result<Self> {
        Ok(Self::new(ctx, ctx.from_coeffs(coeffs)?))
    }

    pub fn parse(ctx: &Field, s: &str) -> Result<Self> {
        Ok(Self::new(ctx, ctx.parse_elem(s)?))
    }

    pub fn ctx(&self) -> &Field {
        &self.ctx
    }

    pub fn value(&self) -> Elem {
        self.value
    }

    pub fn coeffs(&self) -> Vec<u32> {
        self.ctx.coeffs(self.value)
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    fn check(&self, other: &FieldElement) -> Result<()> {
        if self.ctx.same_field(&other.ctx) {
            Ok(())
        } else {
            Err(Error::CtxMismatch(self.ctx.to_string(), other.ctx.to_string()))
        }
    }

    pub fn add(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check(other)?;
        Ok(Self::new(&self.ctx, self.ctx.add(self.value, other.value)))
    }

    pub fn sub(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check(other)?;
        Ok(Self::new(&self.ctx, self.ctx.sub(self.value, other.value)))
    }

    pub fn mul(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check(other)?;
        Ok(Self::new(&self.ctx, self.ctx.mul(self.value, other.value)))
    }

    pub fn neg(&self) -> FieldElement {
        Self::new(&self.ctx, self.ctx.neg(self.value))
    }

    pub fn inv(&self) -> Result<FieldElement> {
        let v = self.ctx.inv(self.value).ok_or(Error::DivisionByZero)?;
        Ok(Self::new(&self.ctx, v))
    }

    pub fn pow(&self, e: u64) -> FieldElement {
        Self::new(&self.ctx, self.ctx.pow(self.value, e))
    }

    pub fn trace(&self) -> u32 {
        self.ctx.trace(self.value)
    }

    pub fn quad_char(&self) -> i32 {
        self.ctx.chi(self.value)
    }

    pub fn sqrt(&self) -> Option<FieldElement> {
        self.ctx.sqrt(self.value).map(|v| Self::new(&self.ctx, v))
    }
}

/// All elements of the field in canonical order.
pub fn enumerate(ctx: &Field) -> Vec<FieldElement> {
    ctx.elements().map(|e| FieldElement::new(ctx, e)).collect()
}
