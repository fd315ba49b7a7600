//! Absolute irreducibility of bivariate polynomials of degree at most 3 by
//! exhaustive search for a linear factor over `F_{q^k}`, `k ≤ deg`.
//!
//! For degree ≤ 3 any nontrivial factorization has a linear factor. A linear
//! factor over the algebraic closure has at most `deg` Frobenius conjugates
//! up to scalars, all dividing the polynomial, so its normalized form has
//! coefficients in `F_{q^k}` for some `k ≤ deg`.

use serde::{Deserialize, Serialize};

use super::poly::MPoly;
use crate::error::{Error, Result};
use crate::finite_field::{build_ctx, Elem, Field, FieldCtx};

pub const MAX_ORACLE_DEGREE: u32 = 3;
pub const MAX_ORACLE_Q: u32 = 9;

struct Extension {
    k: u32,
    big: Field,
    embed: Vec<Elem>,
}

/// A factor `a·x1 + b·x2 + c` found over `F_{q^k}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearFactor {
    pub k: u32,
    pub a: String,
    pub b: String,
    pub c: String,
}

pub struct IrreducibilityOracle {
    ctx: Field,
    exts: Vec<Extension>,
}

impl IrreducibilityOracle {
    /// Oracle for polynomials of degree up to `max_degree` over `ctx`.
    pub fn new(ctx: &Field, max_degree: u32) -> Result<Self> {
        if max_degree > MAX_ORACLE_DEGREE || ctx.q() > MAX_ORACLE_Q {
            return Err(Error::ResourceCap(format!(
                "factor search limited to degree ≤ {MAX_ORACLE_DEGREE} and q ≤ {MAX_ORACLE_Q} (got degree {max_degree}, q = {})",
                ctx.q()
            )));
        }
        let exts = (1..=max_degree.max(1))
            .map(|k| {
                let big = build_ctx(ctx.p(), ctx.m() * k)?;
                let embed = ctx.embedding_into(&big)?;
                Ok(Extension { k, big, embed })
            })
            .collect::<Result<_>>()?;
        Ok(IrreducibilityOracle { ctx: ctx.clone(), exts })
    }

    pub fn ctx(&self) -> &Field {
        &self.ctx
    }

    fn check(&self, f: &MPoly) -> Result<()> {
        if f.nvars() != 2 {
            return Err(Error::InvalidInput(format!("factor search needs 2 variables, got {}", f.nvars())));
        }
        if f.degree() as usize > self.exts.len() {
            return Err(Error::ResourceCap(format!(
                "degree {} exceeds the oracle's {}",
                f.degree(),
                self.exts.len()
            )));
        }
        Ok(())
    }

    /// First linear factor found, searching `k = 1, 2, ..`.
    pub fn linear_factor(&self, f: &MPoly) -> Result<Option<LinearFactor>> {
        self.check(f)?;
        let t = f.degree();
        if t == 0 {
            return Ok(None);
        }
        for ext in self.exts.iter().take(t as usize) {
            let big: &FieldCtx = &ext.big;
            let g = f.map_coeffs(|c| ext.embed[c.index()]);
            let coeffs: Vec<(u32, u32, Elem)> = g.terms().map(|(e, &c)| (e[0], e[1], c)).collect();
            let fmt = |x: Elem| big.format_elem(x);
            // x1 + b·x2 + c
            for b in big.elements() {
                let nb = big.neg(b);
                let top = coeffs.iter().filter(|(i, j, _)| i + j == t).fold(Elem::ZERO, |acc, &(i, _, c)| {
                    big.add(acc, big.mul(c, big.pow(nb, i as u64)))
                });
                if !top.is_zero() {
                    continue;
                }
                for c in big.elements() {
                    if vanishes_on_line(big, &coeffs, t, nb, big.neg(c)) {
                        return Ok(Some(LinearFactor { k: ext.k, a: fmt(big.one()), b: fmt(b), c: fmt(c) }));
                    }
                }
            }
            // x2 + c
            if coeffs.iter().all(|&(i, _, _)| i != t) {
                for c in big.elements() {
                    let nc = big.neg(c);
                    let mut by_power = vec![Elem::ZERO; t as usize + 1];
                    for &(i, j, v) in &coeffs {
                        by_power[i as usize] = big.add(by_power[i as usize], big.mul(v, big.pow(nc, j as u64)));
                    }
                    if by_power.iter().all(|v| v.is_zero()) {
                        return Ok(Some(LinearFactor { k: ext.k, a: fmt(Elem::ZERO), b: fmt(big.one()), c: fmt(c) }));
                    }
                }
            }
        }
        Ok(None)
    }

    /// True iff `f` is nonconstant and has no nontrivial factorization over
    /// any extension of `F_q`.
    pub fn is_absolutely_irreducible(&self, f: &MPoly) -> Result<bool> {
        self.check(f)?;
        match f.degree() {
            0 => Ok(false),
            1 => Ok(true),
            _ => Ok(self.linear_factor(f)?.is_none()),
        }
    }
}

/// Whether `f(u·x2 + v, x2)` is the zero polynomial in `x2`.
fn vanishes_on_line(big: &FieldCtx, coeffs: &[(u32, u32, Elem)], t: u32, u: Elem, v: Elem) -> bool {
    let n = t as usize + 1;
    // powers[i] = (u·x2 + v)^i as coefficient lists in x2
    let mut powers: Vec<Vec<Elem>> = vec![vec![Elem::ZERO; n]; n];
    powers[0][0] = big.one();
    for i in 1..n {
        for j in 0..n {
            let mut acc = big.mul(powers[i - 1][j], v);
            if j > 0 {
                acc = big.add(acc, big.mul(powers[i - 1][j - 1], u));
            }
            powers[i][j] = acc;
        }
    }
    let mut out = vec![Elem::ZERO; n];
    for &(i, j, c) in coeffs {
        for (s, &pc) in powers[i as usize].iter().enumerate() {
            if s + (j as usize) < n && !pc.is_zero() {
                out[s + j as usize] = big.add(out[s + j as usize], big.mul(c, pc));
            }
        }
    }
    out.iter().all(|v| v.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(ctx: &Field, s: &str) -> MPoly {
        MPoly::parse(ctx, 2, s).unwrap()
    }

    #[test]
    fn examples() {
        let c5 = build_ctx(5, 1).unwrap();
        let o = IrreducibilityOracle::new(&c5, 3).unwrap();
        let f = o.linear_factor(&poly(&c5, "x1^2 + x2^2")).unwrap().unwrap();
        assert_eq!(f.k, 1);
        assert!(!o.is_absolutely_irreducible(&poly(&c5, "x1^2 + x2^2")).unwrap());
        for y in 0..5 {
            assert!(o.is_absolutely_irreducible(&poly(&c5, &format!("x1 - x2^2 - {y}"))).unwrap());
        }
        assert!(!o.is_absolutely_irreducible(&poly(&c5, "x1*x2")).unwrap());
        assert!(o.is_absolutely_irreducible(&poly(&c5, "x1^2 + x2^2 - 1")).unwrap());
        // x1^2 - 2 is irreducible over F_5 but splits over F_25.
        let f = o.linear_factor(&poly(&c5, "x1^2 - 2")).unwrap().unwrap();
        assert_eq!(f.k, 2);
        // 3^3 = 2 in F_5.
        assert!(!o.is_absolutely_irreducible(&poly(&c5, "x1^3 - 2")).unwrap());
        assert!(!o.is_absolutely_irreducible(&poly(&c5, "4")).unwrap());
        let c7 = build_ctx(7, 1).unwrap();
        let o7 = IrreducibilityOracle::new(&c7, 3).unwrap();
        // x1^3 - 3: 3 is not a cube mod 7, root lives in F_343.
        assert_eq!(o7.linear_factor(&poly(&c7, "x1^3 - 3")).unwrap().unwrap().k, 3);
        assert!(o7.linear_factor(&poly(&c7, "x1^3 + x2^3 + x1*x2 + 1")).unwrap().is_some());
        assert!(o7.is_absolutely_irreducible(&poly(&c7, "x1^3 - x2^2 - 1")).unwrap());
    }

    #[test]
    fn found_factors_divide() {
        let c7 = build_ctx(7, 1).unwrap();
        let o = IrreducibilityOracle::new(&c7, 3).unwrap();
        let f = poly(&c7, "x1*x2 + x2^2 + 2*x1 + 6");
        let g = poly(&c7, "x1 + 4*x2 + 5");
        let fg = f.mul(&c7, &g);
        let lf = o.linear_factor(&fg).unwrap().unwrap();
        let l = MPoly::from_terms(
            2,
            [
                (vec![1, 0], c7.parse_elem(&lf.a).unwrap()),
                (vec![0, 1], c7.parse_elem(&lf.b).unwrap()),
                (vec![0, 0], c7.parse_elem(&lf.c).unwrap()),
            ],
            &c7,
        );
        assert!(fg.div_exact(&c7, &l).is_some());
    }

    #[test]
    fn conics_match_determinant_criterion() {
        // A conic is absolutely reducible iff its 3x3 symmetric matrix is singular.
        for (p, m) in [(3, 1), (5, 1), (3, 2)] {
            let ctx = build_ctx(p, m).unwrap();
            let o = IrreducibilityOracle::new(&ctx, 2).unwrap();
            let half = ctx.inv(ctx.from_int(2)).unwrap();
            let els: Vec<Elem> = ctx.elements().collect();
            let mut checked = 0;
            for (idx, &a) in els.iter().enumerate() {
                for &b in &els {
                    for &c in &els[..3] {
                        for &e in &els[..2] {
                            let (d0, f0) = (els[(idx + 1) % els.len()], els[idx % 2]);
                            if a.is_zero() && b.is_zero() && c.is_zero() {
                                continue;
                            }
                            let poly = MPoly::from_terms(
                                2,
                                [(vec![2, 0], a), (vec![1, 1], b), (vec![0, 2], c), (vec![1, 0], d0), (vec![0, 1], e), (vec![0, 0], f0)],
                                &ctx,
                            );
                            let h = |x: Elem| ctx.mul(x, half);
                            let mtx = [[a, h(b), h(d0)], [h(b), c, h(e)], [h(d0), h(e), f0]];
                            let det = det3(&ctx, &mtx);
                            assert_eq!(o.is_absolutely_irreducible(&poly).unwrap(), !det.is_zero(), "{}", poly.format(&ctx));
                            checked += 1;
                        }
                    }
                }
            }
            assert!(checked > 0);
        }
    }

    fn det3(ctx: &FieldCtx, m: &[[Elem; 3]; 3]) -> Elem {
        let t = |a: usize, b: usize, c: usize| ctx.mul(ctx.mul(m[0][a], m[1][b]), m[2][c]);
        let pos = ctx.add(ctx.add(t(0, 1, 2), t(1, 2, 0)), t(2, 0, 1));
        let neg = ctx.add(ctx.add(t(2, 1, 0), t(0, 2, 1)), t(1, 0, 2));
        ctx.sub(pos, neg)
    }

    #[test]
    fn caps() {
        let c11 = build_ctx(11, 1).unwrap();
        assert!(matches!(IrreducibilityOracle::new(&c11, 2), Err(Error::ResourceCap(_))));
        let c5 = build_ctx(5, 1).unwrap();
        assert!(matches!(IrreducibilityOracle::new(&c5, 4), Err(Error::ResourceCap(_))));
        let o = IrreducibilityOracle::new(&c5, 2).unwrap();
        assert!(o.is_absolutely_irreducible(&poly(&c5, "x1^3")).is_err());
    }
}
