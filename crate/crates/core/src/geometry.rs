//! The affine space `F_q^d` with the norm form `d(x) = Σ x_j²`: spheres,
//! flats, state vectors and the Fourier transform over `F_q^d`.
//!
//! Points are addressed by a mixed-radix index, first coordinate most
//! significant, each digit being the field element index. Index 0 is the
//! origin and index order is lexicographic order on coordinates.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::char_sums::{gauss_sum, omega_table, sum_trace_histogram, twisted_kloosterman, CharSpec, SumValue};
use crate::error::{Error, Result};
use crate::finite_field::{Elem, Field, FieldCtx};

/// Largest number of points (and state-vector amplitudes) supported.
pub const MAX_POINTS: u64 = 1 << 24;

/// Largest `q` for which the `q × q` Fourier kernel is tabulated.
const KERNEL_TABLE_MAX_Q: u32 = 4096;

/// A point of `F_q^d` as an explicit coordinate list.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point(pub Vec<Elem>);

/// `F_q^d` together with its point indexing.
#[derive(Clone)]
pub struct Space {
    field: Field,
    d: usize,
    size: usize,
    /// `place[j] = q^{d-1-j}`.
    place: Vec<usize>,
}

impl fmt::Debug for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Space(F_{}^{})", self.field.q(), self.d)
    }
}

impl Space {
    pub fn new(field: Field, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        let q = field.q() as u64;
        let mut needed: u64 = 1;
        for _ in 0..d {
            needed = needed.saturating_mul(q);
        }
        if needed > MAX_POINTS {
            return Err(Error::SizeOverflow {
                what: format!("F_{q}^{d}"),
                needed,
                cap: MAX_POINTS,
            });
        }
        let place = (0..d).map(|j| (q as usize).pow((d - 1 - j) as u32)).collect();
        Ok(Space { field, d, size: needed as usize, place })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.field
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn q(&self) -> u32 {
        self.field.q()
    }

    /// `q^d`.
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn coord(&self, x: usize, j: usize) -> Elem {
        Elem(((x / self.place[j]) % self.q() as usize) as u32)
    }

    pub fn coords(&self, x: usize) -> Vec<Elem> {
        (0..self.d).map(|j| self.coord(x, j)).collect()
    }

    pub fn point(&self, x: usize) -> Point {
        Point(self.coords(x))
    }

    pub fn index_of(&self, coords: &[Elem]) -> Result<usize> {
        if coords.len() != self.d {
            return Err(Error::InvalidInput(format!(
                "point has {} coordinates, expected {}",
                coords.len(),
                self.d
            )));
        }
        if let Some(c) = coords.iter().find(|c| c.0 >= self.q()) {
            return Err(Error::InvalidInput(format!("coordinate {} out of range", c.0)));
        }
        Ok(self.index_unchecked(coords))
    }

    #[inline]
    fn index_unchecked(&self, coords: &[Elem]) -> usize {
        coords.iter().fold(0usize, |acc, c| acc * self.q() as usize + c.index())
    }

    pub fn index(&self, p: &Point) -> Result<usize> {
        self.index_of(&p.0)
    }

    fn zip_with(&self, a: usize, b: usize, op: impl Fn(Elem, Elem) -> Elem) -> usize {
        let q = self.q() as usize;
        let (mut a, mut b) = (a, b);
        let mut out = 0usize;
        let mut place = 1usize;
        for _ in 0..self.d {
            let c = op(Elem((a % q) as u32), Elem((b % q) as u32));
            out += c.index() * place;
            place *= q;
            a /= q;
            b /= q;
        }
        out
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.zip_with(a, b, |x, y| self.field.add(x, y))
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.zip_with(a, b, |x, y| self.field.sub(x, y))
    }

    pub fn neg(&self, a: usize) -> usize {
        self.zip_with(a, 0, |x, _| self.field.neg(x))
    }

    pub fn scale(&self, c: Elem, a: usize) -> usize {
        self.zip_with(a, 0, |x, _| self.field.mul(c, x))
    }

    /// `d(x) = Σ x_j²`.
    pub fn norm(&self, x: usize) -> Elem {
        (0..self.d).fold(Elem::ZERO, |acc, j| self.field.add(acc, self.field.square(self.coord(x, j))))
    }

    /// `k · x = Σ k_j x_j`.
    pub fn dot(&self, k: usize, x: usize) -> Elem {
        (0..self.d).fold(Elem::ZERO, |acc, j| {
            self.field.add(acc, self.field.mul(self.coord(k, j), self.coord(x, j)))
        })
    }

    /// `d(x)` for every point, by index.
    pub fn norm_table(&self) -> Vec<Elem> {
        let q = self.q() as usize;
        let squares: Vec<Elem> = self.field.elements().map(|a| self.field.square(a)).collect();
        let mut out = vec![Elem::ZERO; self.size];
        // a point and its prefix (leading zero prepended) differ by the last square
        for x in 1..self.size {
            out[x] = self.field.add(out[x / q], squares[x % q]);
        }
        out
    }

    /// `|S_r|` for every `r`, by element index.
    pub fn level_sizes(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.q() as usize];
        for n in self.norm_table() {
            counts[n.index()] += 1;
        }
        counts
    }

    /// Points of `S_r` in index order.
    pub fn sphere_points(&self, r: Elem) -> Vec<usize> {
        self.norm_table()
            .into_iter()
            .enumerate()
            .filter_map(|(x, n)| (n == r).then_some(x))
            .collect()
    }

    /// Text form: `"1,2,0"` over a prime field, `"(c0,c1),(c0,c1)"` otherwise.
    pub fn format_point(&self, x: usize) -> String {
        let parts: Vec<String> = self
            .coords(x)
            .into_iter()
            .map(|c| {
                let s = self.field.format_elem(c);
                if self.field.m() == 1 {
                    s
                } else {
                    format!("({s})")
                }
            })
            .collect();
        parts.join(",")
    }

    pub fn parse_point(&self, s: &str) -> Result<usize> {
        let s = s.trim();
        let coords: Vec<Elem> = if self.field.m() == 1 {
            s.split(',').map(|t| self.field.parse_elem(t)).collect::<Result<_>>()?
        } else {
            let mut out = Vec::new();
            let mut rest = s;
            while !rest.is_empty() {
                let rest_t = rest.trim_start_matches([',', ' ']);
                if rest_t.is_empty() {
                    break;
                }
                let body = rest_t
                    .strip_prefix('(')
                    .ok_or_else(|| Error::Parse(format!("point {s:?}: expected '('")))?;
                let end = body
                    .find(')')
                    .ok_or_else(|| Error::Parse(format!("point {s:?}: missing ')'")))?;
                out.push(self.field.parse_elem(&body[..end])?);
                rest = &body[end + 1..];
            }
            out
        };
        self.index_of(&coords).map_err(|e| Error::Parse(format!("point {s:?}: {e}")))
    }
}

/// `|S_r|` from the closed form, four cases by parity of `d` and `r = 0`.
pub fn sphere_size_formula(ctx: &FieldCtx, d: usize, r: Elem) -> u64 {
    let q = ctx.q() as i128;
    let pw = |e: usize| q.pow(e as u32);
    let minus_one_pow = |e: usize| if e % 2 == 0 { ctx.one() } else { ctx.neg(ctx.one()) };
    let value = if d % 2 == 1 {
        let h = (d - 1) / 2;
        if r.is_zero() {
            pw(d - 1)
        } else {
            pw(d - 1) + ctx.chi(ctx.mul(minus_one_pow(h), r)) as i128 * pw(h)
        }
    } else {
        let h = d / 2;
        let s = ctx.chi(minus_one_pow(h)) as i128;
        if r.is_zero() {
            pw(d - 1) + s * (q - 1) * pw(h - 1)
        } else {
            pw(d - 1) - s * pw(h - 1)
        }
    };
    value as u64
}

/// A sphere `{x : d(x - center) = radius}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Sphere {
    pub radius: Elem,
    pub center: usize,
}

impl Sphere {
    pub fn contains(&self, space: &Space, x: usize) -> bool {
        space.norm(space.sub(x, self.center)) == self.radius
    }

    pub fn points(&self, space: &Space) -> Vec<usize> {
        let mut pts: Vec<usize> = space
            .sphere_points(self.radius)
            .into_iter()
            .map(|s| space.add(s, self.center))
            .collect();
        pts.sort_unstable();
        pts
    }
}

/// `Σ_{x ∈ S_r} ω_p^{tr k·x}` by direct summation.
pub fn sphere_fourier_brute(space: &Space, r: Elem, k: usize) -> Complex64 {
    let ctx = space.ctx();
    let mut counts = vec![0i64; ctx.p() as usize];
    for x in space.sphere_points(r) {
        counts[ctx.trace(space.dot(k, x)) as usize] += 1;
    }
    sum_trace_histogram(&counts, &omega_table(ctx.p()))
}

/// Closed form of the sphere sum for `k ≠ 0`:
/// `χ(-1)^d (G_1^d / q) K_{χ^d}(r, d(k)/4)`.
pub fn sphere_fourier_closed(space: &Space, r: Elem, k: usize) -> Result<SumValue> {
    if k == 0 {
        return Err(Error::InvalidInput("closed form requires k != 0; use |S_r| at k = 0".into()));
    }
    let ctx = space.ctx();
    Ok(sphere_fourier_from_norm(ctx, space.d(), r, space.norm(k)))
}

/// The closed form as a function of `d(k)` alone (`k ≠ 0` implied).
pub fn sphere_fourier_from_norm(ctx: &FieldCtx, d: usize, r: Elem, norm_k: Elem) -> SumValue {
    let g = gauss_sum(ctx).value;
    let quarter = ctx.inv(ctx.from_int(4)).expect("odd characteristic");
    let b = ctx.mul(norm_k, quarter);
    let k = twisted_kloosterman(ctx, r, b, CharSpec::chi_power(d));
    let sign = ctx.chi(ctx.neg(ctx.one())).pow(d as u32) as f64;
    SumValue {
        value: g.powu(d as u32) * k.value * (sign / ctx.q() as f64),
        method: k.method,
    }
}

/// Complex amplitudes indexed by the points of a [`Space`].
#[derive(Clone, Debug)]
pub struct StateVector {
    space: Space,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(space: &Space) -> Self {
        StateVector { space: space.clone(), amps: vec![Complex64::new(0.0, 0.0); space.size()] }
    }

    pub fn basis(space: &Space, x: usize) -> Self {
        let mut v = Self::zero(space);
        v.amps[x] = Complex64::new(1.0, 0.0);
        v
    }

    /// Normalized uniform superposition over `points` (assumed distinct).
    pub fn uniform(space: &Space, points: &[usize]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("uniform superposition over an empty set".into()));
        }
        let mut v = Self::zero(space);
        let a = Complex64::new(1.0 / (points.len() as f64).sqrt(), 0.0);
        for &x in points {
            v.amps[x] = a;
        }
        Ok(v)
    }

    pub fn from_amps(space: &Space, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != space.size() {
            return Err(Error::InvalidInput(format!(
                "{} amplitudes for a space of {} points",
                amps.len(),
                space.size()
            )));
        }
        Ok(StateVector { space: space.clone(), amps })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Apply `U`, kernel `ω_p^{tr k·x} / √(q^d)`, in place.
    pub fn fourier_in_place(&mut self) {
        self.transform(false);
    }

    /// Apply `U†` in place.
    pub fn inverse_fourier_in_place(&mut self) {
        self.transform(true);
    }

    fn transform(&mut self, inverse: bool) {
        let ctx = self.space.ctx();
        let q = ctx.q() as usize;
        let p = ctx.p();
        let scale = 1.0 / (q as f64).sqrt();
        let omega: Vec<Complex64> = omega_table(p)
            .into_iter()
            .map(|w| if inverse { w.conj() * scale } else { w * scale })
            .collect();
        let kernel: Option<Vec<u32>> = (ctx.q() <= KERNEL_TABLE_MAX_Q).then(|| {
            let mut t = vec![0u32; q * q];
            for k in 0..q {
                for x in 0..q {
                    t[k * q + x] = ctx.trace(ctx.mul(Elem(k as u32), Elem(x as u32)));
                }
            }
            t
        });
        let tr_kx = |k: usize, x: usize| -> usize {
            match &kernel {
                Some(t) => t[k * q + x] as usize,
                None => ctx.trace(ctx.mul(Elem(k as u32), Elem(x as u32))) as usize,
            }
        };
        let mut line = vec![Complex64::new(0.0, 0.0); q];
        let mut out = vec![Complex64::new(0.0, 0.0); q];
        for j in 0..self.space.d {
            let stride = self.space.place[j];
            let block = stride * q;
            for start in (0..self.space.size).step_by(block) {
                for off in 0..stride {
                    let base = start + off;
                    for (x, slot) in line.iter_mut().enumerate() {
                        *slot = self.amps[base + x * stride];
                    }
                    for (k, o) in out.iter_mut().enumerate() {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (x, &a) in line.iter().enumerate() {
                            if a.re != 0.0 || a.im != 0.0 {
                                acc += omega[tr_kx(k, x)] * a;
                            }
                        }
                        *o = acc;
                    }
                    for (k, &v) in out.iter().enumerate() {
                        self.amps[base + k * stride] = v;
                    }
                }
            }
        }
    }
}

pub fn fourier(v: &StateVector) -> StateVector {
    let mut w = v.clone();
    w.fourier_in_place();
    w
}

pub fn inverse_fourier(v: &StateVector) -> StateVector {
    let mut w = v.clone();
    w.inverse_fourier_in_place();
    w
}

/// An affine subspace in canonical form: a reduced row-echelon basis of the
/// direction space (unit pivots, zero above and below each pivot) and the
/// base point with zero entries in all pivot columns, which is the
/// lexicographically smallest point of the flat.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Flat {
    base: usize,
    basis: Vec<Vec<Elem>>,
    pivots: Vec<usize>,
}

/// JSON form of a flat.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlatRecord {
    pub basepoint: String,
    pub basis: Vec<String>,
}

impl Flat {
    /// The flat `{x}`.
    pub fn point(x: usize) -> Self {
        Flat { base: x, basis: Vec::new(), pivots: Vec::new() }
    }

    /// `base + span(directions)`.
    pub fn from_parts(space: &Space, base: usize, directions: &[usize]) -> Self {
        let rows: Vec<Vec<Elem>> = directions.iter().map(|&v| space.coords(v)).collect();
        Self::canonical(space, space.coords(base), rows)
    }

    /// Smallest flat containing every point of `pts`.
    pub fn affine_span(space: &Space, pts: &[usize]) -> Result<Self> {
        let (&first, rest) = pts
            .split_first()
            .ok_or_else(|| Error::InvalidInput("affine span of an empty set".into()))?;
        let rows = rest.iter().map(|&x| space.coords(space.sub(x, first))).collect();
        Ok(Self::canonical(space, space.coords(first), rows))
    }

    pub fn ambient(space: &Space) -> Self {
        let dirs: Vec<usize> = (0..space.d()).map(|j| space.place[j]).collect();
        Self::from_parts(space, 0, &dirs)
    }

    fn canonical(space: &Space, mut base: Vec<Elem>, mut rows: Vec<Vec<Elem>>) -> Self {
        let ctx = space.ctx();
        let d = space.d();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..d {
            let Some(sel) = (rank..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
                continue;
            };
            rows.swap(rank, sel);
            let inv = ctx.inv(rows[rank][col]).expect("nonzero pivot");
            for e in rows[rank].iter_mut() {
                *e = ctx.mul(*e, inv);
            }
            for i in 0..rows.len() {
                if i != rank && !rows[i][col].is_zero() {
                    let f = rows[i][col];
                    for c in 0..d {
                        let t = ctx.mul(f, rows[rank][c]);
                        rows[i][c] = ctx.sub(rows[i][c], t);
                    }
                }
            }
            pivots.push(col);
            rank += 1;
        }
        rows.truncate(rank);
        for (row, &col) in rows.iter().zip(&pivots) {
            let f = base[col];
            if !f.is_zero() {
                for c in 0..d {
                    base[c] = ctx.sub(base[c], ctx.mul(f, row[c]));
                }
            }
        }
        Flat { base: space.index_unchecked(&base), basis: rows, pivots }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basepoint(&self) -> usize {
        self.base
    }

    pub fn basis(&self) -> &[Vec<Elem>] {
        &self.basis
    }

    /// `q^dim`.
    pub fn size(&self, space: &Space) -> usize {
        (space.q() as usize).pow(self.dim() as u32)
    }

    pub fn contains(&self, space: &Space, x: usize) -> bool {
        let ctx = space.ctx();
        let mut v = space.coords(space.sub(x, self.base));
        for (row, &col) in self.basis.iter().zip(&self.pivots) {
            let f = v[col];
            if !f.is_zero() {
                for c in 0..v.len() {
                    v[c] = ctx.sub(v[c], ctx.mul(f, row[c]));
                }
            }
        }
        v.iter().all(|c| c.is_zero())
    }

    /// Linear equations `a · x = c` cutting out the flat, one per
    /// non-pivot column.
    pub fn equations(&self, space: &Space) -> Vec<(Vec<Elem>, Elem)> {
        let ctx = space.ctx();
        let base = space.coords(self.base);
        (0..space.d())
            .filter(|c| !self.pivots.contains(c))
            .map(|f| {
                let mut a = vec![Elem::ZERO; space.d()];
                a[f] = ctx.one();
                for (row, &pc) in self.basis.iter().zip(&self.pivots) {
                    a[pc] = ctx.neg(row[f]);
                }
                let c = a.iter().zip(&base).fold(Elem::ZERO, |acc, (&ai, &bi)| ctx.add(acc, ctx.mul(ai, bi)));
                (a, c)
            })
            .collect()
    }

    /// All points, in index order.
    pub fn points(&self, space: &Space) -> Vec<usize> {
        let q = space.q() as usize;
        let dirs: Vec<usize> = self.basis.iter().map(|r| space.index_unchecked(r)).collect();
        let mut out = Vec::with_capacity(self.size(space));
        for n in 0..self.size(space) {
            let mut x = self.base;
            let mut rest = n;
            for &v in &dirs {
                let a = Elem((rest % q) as u32);
                rest /= q;
                x = space.add(x, space.scale(a, v));
            }
            out.push(x);
        }
        out.sort_unstable();
        out
    }

    /// Smallest flat containing `self` and `x`.
    pub fn join(&self, space: &Space, x: usize) -> Self {
        let mut rows = self.basis.clone();
        rows.push(space.coords(space.sub(x, self.base)));
        Self::canonical(space, space.coords(self.base), rows)
    }

    pub fn record(&self, space: &Space) -> FlatRecord {
        FlatRecord {
            basepoint: space.format_point(self.base),
            basis: self.basis.iter().map(|r| space.format_point(space.index_unchecked(r))).collect(),
        }
    }

    pub fn from_record(space: &Space, rec: &FlatRecord) -> Result<Self> {
        let base = space.parse_point(&rec.basepoint)?;
        let dirs = rec.basis.iter().map(|s| space.parse_point(s)).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_parts(space, base, &dirs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_field::build_ctx;

    fn space(p: u32, m: u32, d: usize) -> Space {
        Space::new(build_ctx(p, m).unwrap(), d).unwrap()
    }

    #[test]
    fn norm_examples() {
        let s3 = space(3, 1, 3);
        assert_eq!(s3.norm(0), Elem(0));
        assert_eq!(s3.norm(s3.index_of(&[Elem(1), Elem(1), Elem(1)]).unwrap()), Elem(0));
        let s5 = space(5, 1, 3);
        assert_eq!(s5.norm(s5.index_of(&[Elem(1), Elem(2), Elem(0)]).unwrap()), Elem(0));
        let table = s5.norm_table();
        for x in 0..s5.size() {
            assert_eq!(table[x], s5.norm(x));
        }
    }

    #[test]
    fn sphere_examples() {
        assert_eq!(space(3, 1, 3).sphere_points(Elem(1)).len(), 6);
        assert_eq!(space(3, 1, 2).sphere_points(Elem(0)), vec![0]);
        assert_eq!(space(5, 1, 2).sphere_points(Elem(0)).len(), 9);
        let f3 = build_ctx(3, 1).unwrap();
        let f5 = build_ctx(5, 1).unwrap();
        assert_eq!(sphere_size_formula(&f3, 3, Elem(1)), 6);
        assert_eq!(sphere_size_formula(&f3, 3, Elem(0)), 9);
        assert_eq!(sphere_size_formula(&f5, 2, Elem(1)), 4);
    }

    #[test]
    fn sphere_sizes_match_enumeration() {
        for (p, m) in [(3, 1), (5, 1), (7, 1), (3, 2), (11, 1)] {
            for d in 2..=5 {
                let sp = space(p, m, d);
                let sizes = sp.level_sizes();
                assert_eq!(sizes.iter().sum::<u64>(), sp.size() as u64);
                for r in sp.ctx().elements() {
                    assert_eq!(sizes[r.index()], sphere_size_formula(sp.ctx(), d, r), "q={} d={d} r={r:?}", p.pow(m));
                }
            }
        }
    }

    #[test]
    fn point_text_round_trip() {
        let s = space(5, 1, 3);
        let x = s.parse_point("1,2,0").unwrap();
        assert_eq!(s.format_point(x), "1,2,0");
        let s9 = space(3, 2, 2);
        for x in 0..s9.size() {
            assert_eq!(s9.parse_point(&s9.format_point(x)).unwrap(), x);
        }
        assert!(s.parse_point("1,2").is_err());
    }

    #[test]
    fn fourier_of_delta_is_uniform_and_round_trips() {
        let s = space(5, 1, 3);
        let v = StateVector::basis(&s, 0);
        let w = fourier(&v);
        let u = 1.0 / (s.size() as f64).sqrt();
        assert!(w.amps().iter().all(|a| (a - Complex64::new(u, 0.0)).norm() < 1e-12));
        let back = inverse_fourier(&w);
        assert!((back.amps()[0] - Complex64::new(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn fourier_matches_dense_kernel() {
        let s = space(3, 2, 2);
        let ctx = s.ctx();
        let mut amps = Vec::new();
        for x in 0..s.size() {
            amps.push(Complex64::new((x as f64 * 0.37).sin(), (x as f64 * 1.3).cos()));
        }
        let v = StateVector::from_amps(&s, amps.clone()).unwrap();
        let w = fourier(&v);
        let norm = 1.0 / (s.size() as f64).sqrt();
        for k in 0..s.size() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, &a) in amps.iter().enumerate() {
                acc += crate::char_sums::additive_char(ctx, s.dot(k, x)) * a;
            }
            assert!((acc * norm - w.amps()[k]).norm() < 1e-9);
        }
    }

    #[test]
    fn sphere_state_fourier_amplitude() {
        // k ≠ 0 with d(k) = 0, d = 3, q = 5: sum is G_1^4 / 5 = 5.
        let s = space(5, 1, 3);
        let sphere = s.sphere_points(Elem(1));
        assert_eq!(sphere.len(), 30);
        let w = fourier(&StateVector::uniform(&s, &sphere).unwrap());
        let k = s.index_of(&[Elem(1), Elem(2), Elem(0)]).unwrap();
        let expect = 5.0 / (125.0f64 * 30.0).sqrt();
        assert!((w.amps()[k] - Complex64::new(expect, 0.0)).norm() < 1e-9);
        let closed = sphere_fourier_closed(&s, Elem(1), k).unwrap().value;
        assert!((closed - Complex64::new(5.0, 0.0)).norm() < 1e-9);
        assert!(sphere_fourier_closed(&s, Elem(1), 0).is_err());
    }

    #[test]
    fn sphere_fourier_closed_matches_direct_sum() {
        for (p, m, d) in [(3, 1, 2), (3, 1, 3), (5, 1, 2), (5, 1, 3), (7, 1, 3), (3, 2, 3), (3, 1, 4), (7, 1, 2)] {
            let s = space(p, m, d);
            let tol = 1e-8 * s.q() as f64;
            for r in s.ctx().elements() {
                for k in 1..s.size() {
                    let c = sphere_fourier_closed(&s, r, k).unwrap().value;
                    let b = sphere_fourier_brute(&s, r, k);
                    assert!((c - b).norm() < tol, "q={} d={d} r={r:?} k={k}: {c} vs {b}", s.q());
                }
            }
        }
    }

    #[test]
    fn zero_branch_of_odd_dimensional_transform() {
        let s = space(5, 1, 3);
        let ctx = s.ctx();
        for r in ctx.nonzero_elements() {
            for k in 1..s.size() {
                let b = ctx.mul(ctx.mul(r, s.norm(k)), ctx.inv(ctx.from_int(4)).unwrap());
                if ctx.chi(b) == -1 {
                    assert!(sphere_fourier_closed(&s, r, k).unwrap().value.norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn flat_examples() {
        let s = space(3, 1, 3);
        let origin = Flat::affine_span(&s, &[0]).unwrap();
        assert_eq!(origin.dim(), 0);
        assert_eq!(origin.points(&s), vec![0]);
        let e1 = s.index_of(&[Elem(1), Elem(0), Elem(0)]).unwrap();
        let line = Flat::affine_span(&s, &[0, e1]).unwrap();
        assert_eq!(line.points(&s).len(), 3);
        let two_e1 = s.scale(Elem(2), e1);
        let col = Flat::affine_span(&s, &[e1, two_e1, 0]).unwrap();
        assert_eq!(col.dim(), 1);
        assert_eq!(col, line);
        assert!(Flat::affine_span(&s, &[]).is_err());
    }

    #[test]
    fn flat_canonical_base_is_smallest_point() {
        let s = space(5, 1, 3);
        let a = s.parse_point("3,1,4").unwrap();
        let b = s.parse_point("2,2,1").unwrap();
        let c = s.parse_point("0,4,4").unwrap();
        for pts in [vec![a], vec![a, b], vec![a, b, c]] {
            let f = Flat::affine_span(&s, &pts).unwrap();
            let all = f.points(&s);
            assert_eq!(all.len(), f.size(&s));
            assert_eq!(f.basepoint(), all[0]);
            for x in 0..s.size() {
                assert_eq!(f.contains(&s, x), all.binary_search(&x).is_ok());
            }
            for &x in &pts {
                assert!(f.contains(&s, x));
            }
            let eqs = f.equations(&s);
            assert_eq!(eqs.len(), 3 - f.dim());
            for x in 0..s.size() {
                let cx = s.coords(x);
                let on = eqs.iter().all(|(a, c)| {
                    let v = a.iter().zip(&cx).fold(Elem::ZERO, |acc, (&ai, &xi)| s.ctx().add(acc, s.ctx().mul(ai, xi)));
                    v == *c
                });
                assert_eq!(on, f.contains(&s, x));
            }
            let rec = f.record(&s);
            assert_eq!(Flat::from_record(&s, &rec).unwrap(), f);
        }
        assert_eq!(Flat::ambient(&s).points(&s).len(), 125);
    }

    #[test]
    fn oversized_space_rejected() {
        let f = build_ctx(17, 1).unwrap();
        assert!(matches!(Space::new(f, 7), Err(Error::SizeOverflow { .. })));
    }
}
