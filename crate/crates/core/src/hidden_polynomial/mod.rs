//! Level-set states of hidden polynomials, their exact pairwise fidelity,
//! the combinatorial fidelity bounds and a census of absolute irreducibility.
//!
//! One query to `f = π ∘ h` prepares
//! `ρ_h = Σ_y (|L_y| / |X|) |L_y⟩⟨L_y|` with `|L_y⟩` the uniform superposition
//! over the level set `L_y = h^{-1}(y)`. Level sets of one function are
//! disjoint, so `{|L_y⟩}` is orthonormal and `√ρ √ρ'` has entries
//! `⟨L_y| · |L'_{y'}⟩ = N_{yy'} / |X|` with `N_{yy'} = |L_y ∩ L'_{y'}|`.
//! Hence `F(ρ_h, ρ_h') = ‖N‖_* / |X|`.
//!
//! Throughout, `Y = F_q`, `|X| = q^d`, and empty level sets are dropped
//! wherever a level-set size enters as a denominator.

pub mod irreducible;
pub mod poly;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use irreducible::{IrreducibilityOracle, LinearFactor};
pub use poly::MPoly;

use crate::error::{Error, Result};
use crate::finite_field::{Elem, Field, FieldCtx};
use crate::geometry::Space;
use crate::rng::stream;
use crate::stats::{wilson, WilsonInterval};

/// Largest `q^d` for which level sets are enumerated.
pub const MAX_LEVEL_POINTS: usize = 1 << 22;
/// Largest `q^d` for the dense density-matrix oracle.
pub const MAX_DENSE_POINTS: usize = 729;
/// Largest number of projective classes in an exhaustive census.
pub const MAX_CENSUS_CLASSES: u64 = 5_000_000;

const EPS: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct HiddenPolynomial {
    space: Space,
    poly: MPoly,
}

impl HiddenPolynomial {
    pub fn new(space: &Space, poly: MPoly) -> Result<Self> {
        if poly.nvars() != space.d() {
            return Err(Error::InvalidInput(format!(
                "polynomial in {} variables over a {}-dimensional space",
                poly.nvars(),
                space.d()
            )));
        }
        if space.size() > MAX_LEVEL_POINTS {
            return Err(Error::SizeOverflow {
                what: "level-set enumeration".into(),
                needed: space.size() as u64,
                cap: MAX_LEVEL_POINTS as u64,
            });
        }
        Ok(HiddenPolynomial { space: space.clone(), poly })
    }

    pub fn parse(space: &Space, s: &str) -> Result<Self> {
        Self::new(space, MPoly::parse(space.ctx(), space.d(), s)?)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn ctx(&self) -> &FieldCtx {
        self.space.ctx()
    }

    pub fn poly(&self) -> &MPoly {
        &self.poly
    }

    pub fn degree(&self) -> u32 {
        self.poly.degree()
    }

    pub fn format(&self) -> String {
        self.poly.format(self.ctx())
    }

    /// `h(x)` for every point, in point-index order.
    pub fn values(&self) -> Vec<Elem> {
        let ctx = self.ctx();
        let top = self.poly.degree() as usize;
        let powers: Vec<Vec<Elem>> =
            ctx.elements().map(|v| (0..=top).map(|e| ctx.pow(v, e as u64)).collect()).collect();
        let terms: Vec<(&Vec<u32>, Elem)> = self.poly.terms().map(|(e, &c)| (e, c)).collect();
        (0..self.space.size())
            .map(|x| {
                let xs = self.space.coords(x);
                terms.iter().fold(Elem::ZERO, |acc, (e, c)| {
                    let m = e.iter().zip(&xs).fold(*c, |m, (&k, xi)| ctx.mul(m, powers[xi.index()][k as usize]));
                    ctx.add(acc, m)
                })
            })
            .collect()
    }

    fn same_space(&self, other: &HiddenPolynomial) -> Result<()> {
        if self.space.d() != other.space.d() || !self.ctx().same_field(other.ctx()) {
            return Err(Error::InvalidInput("polynomials live over different spaces".into()));
        }
        Ok(())
    }
}

/// `|L_y|` for every `y ∈ F_q`.
pub fn level_sets(h: &HiddenPolynomial) -> Vec<u64> {
    let mut sizes = vec![0u64; h.space().q() as usize];
    for v in h.values() {
        sizes[v.index()] += 1;
    }
    sizes
}

/// Level-set sizes of two polynomials and their intersection counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSetProfile {
    pub q: usize,
    /// `|L_y|` for `h`.
    pub rows: Vec<u64>,
    /// `|L'_{y'}|` for `h'`.
    pub cols: Vec<u64>,
    /// `N_{yy'}`, row-major.
    pub counts: Vec<u64>,
}

impl LevelSetProfile {
    #[inline]
    pub fn get(&self, y: usize, y2: usize) -> u64 {
        self.counts[y * self.q + y2]
    }

    pub fn points(&self) -> u64 {
        self.rows.iter().sum()
    }

    /// Rows and columns of `N` sum to the level-set sizes, which sum to `|X|`.
    pub fn is_consistent(&self) -> bool {
        let q = self.q;
        (0..q).all(|y| (0..q).map(|y2| self.get(y, y2)).sum::<u64>() == self.rows[y])
            && (0..q).all(|y2| (0..q).map(|y| self.get(y, y2)).sum::<u64>() == self.cols[y2])
            && self.rows.iter().sum::<u64>() == self.cols.iter().sum::<u64>()
    }

    /// Whether the two level-set partitions coincide up to relabeling.
    pub fn same_partition(&self) -> bool {
        let q = self.q;
        (0..q).all(|y| self.rows[y] == 0 || (0..q).any(|y2| self.get(y, y2) == self.rows[y] && self.cols[y2] == self.rows[y]))
    }

    fn nonempty_matrix(&self) -> DMatrix<f64> {
        let rows: Vec<usize> = (0..self.q).filter(|&y| self.rows[y] > 0).collect();
        let cols: Vec<usize> = (0..self.q).filter(|&y| self.cols[y] > 0).collect();
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]) as f64)
    }
}

pub fn intersections(h: &HiddenPolynomial, h2: &HiddenPolynomial) -> Result<LevelSetProfile> {
    h.same_space(h2)?;
    let q = h.space().q() as usize;
    let mut counts = vec![0u64; q * q];
    let (mut rows, mut cols) = (vec![0u64; q], vec![0u64; q]);
    for (a, b) in h.values().into_iter().zip(h2.values()) {
        counts[a.index() * q + b.index()] += 1;
        rows[a.index()] += 1;
        cols[b.index()] += 1;
    }
    Ok(LevelSetProfile { q, rows, cols, counts })
}

/// `‖N‖_* / |X|`.
pub fn fidelity_from_profile(profile: &LevelSetProfile) -> f64 {
    let n = profile.nonempty_matrix();
    n.singular_values().iter().sum::<f64>() / profile.points() as f64
}

pub fn fidelity(h: &HiddenPolynomial, h2: &HiddenPolynomial) -> Result<f64> {
    Ok(fidelity_from_profile(&intersections(h, h2)?))
}

/// `ρ_h` as a dense `q^d × q^d` matrix: `1/|X|` where `h(x) = h(x')`.
pub fn dense_state(h: &HiddenPolynomial) -> Result<DMatrix<f64>> {
    let n = h.space().size();
    if n > MAX_DENSE_POINTS {
        return Err(Error::ResourceCap(format!("dense state with {n} points exceeds {MAX_DENSE_POINTS}")));
    }
    let v = h.values();
    Ok(DMatrix::from_fn(n, n, |i, j| if v[i] == v[j] { 1.0 / n as f64 } else { 0.0 }))
}

/// Square root of a positive semidefinite symmetric matrix. Eigenvalues
/// below `1e-12` of the largest are rounding noise and are set to zero.
pub fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let cut = 1e-12 * eig.eigenvalues.iter().fold(0.0f64, |a, &l| a.max(l));
    let s = eig.eigenvalues.map(|l| if l > cut { l.sqrt() } else { 0.0 });
    &eig.eigenvectors * DMatrix::from_diagonal(&s) * eig.eigenvectors.transpose()
}

/// `tr |√ρ √σ|` by eigendecomposition and singular values.
pub fn dense_fidelity(rho: &DMatrix<f64>, sigma: &DMatrix<f64>) -> f64 {
    (psd_sqrt(rho) * psd_sqrt(sigma)).singular_values().iter().sum()
}

/// `m^{⊗ℓ}`.
pub fn tensor_power(m: &DMatrix<f64>, l: u32) -> DMatrix<f64> {
    (1..l).fold(m.clone(), |acc, _| acc.kronecker(m))
}

/// Lemma parameters. `gamma` is used by the second bound only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: Option<f64>,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundOutcome {
    pub params: BoundParams,
    /// Upper bound on `F²`.
    pub value: f64,
    /// Whether the profile satisfies the bound's hypotheses for `params`.
    pub hypotheses_hold: bool,
}

/// `Pr_{y,y'}[N_{yy'} ≥ α]` over `Y × Y`.
pub fn pair_fraction_at_least(profile: &LevelSetProfile, alpha: f64) -> f64 {
    profile.counts.iter().filter(|&&n| n as f64 >= alpha).count() as f64 / (profile.q * profile.q) as f64
}

/// `max_{y'} Pr_y[N_{yy'} ≥ α]`.
pub fn column_fraction_at_least(profile: &LevelSetProfile, alpha: f64) -> f64 {
    let q = profile.q;
    (0..q)
        .map(|y2| (0..q).filter(|&y| profile.get(y, y2) as f64 >= alpha).count())
        .max()
        .unwrap_or(0) as f64
        / q as f64
}

fn max_level(profile: &LevelSetProfile) -> u64 {
    profile.rows.iter().copied().max().unwrap_or(0)
}

fn min_nonempty_level(profile: &LevelSetProfile) -> u64 {
    profile.rows.iter().copied().filter(|&s| s > 0).min().unwrap_or(0)
}

/// `F² ≤ (α² + βδ²)|Y|³/|X|²` given `Pr_{y,y'}[N ≥ α] ≤ β` and `|L_y| ≤ δ`.
pub fn bound_comb1(profile: &LevelSetProfile, params: &BoundParams) -> BoundOutcome {
    let (y, x) = (profile.q as f64, profile.points() as f64);
    let BoundParams { alpha, beta, delta, .. } = *params;
    let value = (alpha * alpha + beta * delta * delta) * y.powi(3) / (x * x);
    let hypotheses_hold = pair_fraction_at_least(profile, alpha) <= beta + EPS && max_level(profile) as f64 <= delta;
    BoundOutcome { params: params.clone(), value, hypotheses_hold }
}

/// `F² ≤ α|Y|²/(γ|X|) + βδ|Y|/|X|` given `Pr_y[N_{yy'} ≥ α] ≤ β` for every
/// `y'` and `γ ≤ |L_y| ≤ δ` on nonempty level sets.
pub fn bound_comb2(profile: &LevelSetProfile, params: &BoundParams) -> Result<BoundOutcome> {
    let gamma = params.gamma.ok_or_else(|| Error::InvalidInput("second bound needs γ".into()))?;
    if gamma <= 0.0 {
        return Err(Error::InvalidInput(format!("γ must be positive, got {gamma}")));
    }
    let (y, x) = (profile.q as f64, profile.points() as f64);
    let BoundParams { alpha, beta, delta, .. } = *params;
    let value = alpha * y * y / (gamma * x) + beta * delta * y / x;
    let hypotheses_hold = column_fraction_at_least(profile, alpha) <= beta + EPS
        && profile.rows.iter().filter(|&&s| s > 0).all(|&s| gamma <= s as f64 && s as f64 <= delta);
    Ok(BoundOutcome { params: params.clone(), value, hypotheses_hold })
}

/// The second bound with `|Y_bad| ≤ β|Y|²`, which is what the column-wise
/// hypothesis guarantees: `α|Y|²/(γ|X|) + βδ|Y|²/|X|`.
pub fn bound_comb2_union(profile: &LevelSetProfile, params: &BoundParams) -> Result<f64> {
    let gamma = params.gamma.filter(|&g| g > 0.0).ok_or_else(|| Error::InvalidInput("γ must be positive".into()))?;
    let (y, x) = (profile.q as f64, profile.points() as f64);
    Ok(params.alpha * y * y / (gamma * x) + params.beta * params.delta * y * y / x)
}

fn alpha_candidates(profile: &LevelSetProfile) -> Vec<f64> {
    let mut v: Vec<u64> = profile.counts.clone();
    v.push(profile.counts.iter().copied().max().unwrap_or(0) + 1);
    v.sort_unstable();
    v.dedup();
    v.into_iter().map(|a| a as f64).collect()
}

fn tightest(outcomes: impl Iterator<Item = BoundOutcome>) -> BoundOutcome {
    outcomes
        .min_by(|a, b| a.value.total_cmp(&b.value).then(a.params.alpha.total_cmp(&b.params.alpha)))
        .expect("at least one candidate α")
}

/// First bound with the α that minimizes it, β measured exactly and
/// `δ = max |L_y|`.
pub fn auto_comb1(profile: &LevelSetProfile) -> BoundOutcome {
    let delta = max_level(profile) as f64;
    tightest(alpha_candidates(profile).into_iter().map(|alpha| {
        let beta = pair_fraction_at_least(profile, alpha);
        bound_comb1(profile, &BoundParams { alpha, beta, gamma: None, delta })
    }))
}

/// Second bound with the α that minimizes it, β measured exactly,
/// `γ = min` and `δ = max` over nonempty level sets.
pub fn auto_comb2(profile: &LevelSetProfile) -> BoundOutcome {
    let delta = max_level(profile) as f64;
    let gamma = Some(min_nonempty_level(profile) as f64);
    tightest(alpha_candidates(profile).into_iter().map(|alpha| {
        let beta = column_fraction_at_least(profile, alpha);
        bound_comb2(profile, &BoundParams { alpha, beta, gamma, delta }).expect("γ ≥ 1 on nonempty levels")
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CopiesReport {
    pub f_max: f64,
    pub candidates: u64,
    pub epsilon: f64,
    /// `⌈2(ln N − ln ε) / ln(1/F_max)⌉`, at least 1.
    pub copies: u64,
    /// `1 − N √(F_max^ℓ)`.
    pub success_lower_bound: f64,
}

pub fn copies_needed(f_max: f64, candidates: u64, epsilon: f64) -> Result<CopiesReport> {
    if !(0.0..1.0).contains(&f_max) {
        return Err(Error::InvalidInput(format!("F_max must lie in [0, 1), got {f_max}")));
    }
    if candidates < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 candidates, got {candidates}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidInput(format!("ε must lie in (0, 1), got {epsilon}")));
    }
    let n = candidates as f64;
    let copies = if f_max == 0.0 {
        1
    } else {
        ((2.0 * (n.ln() - epsilon.ln()) / (1.0 / f_max).ln()).ceil() as u64).max(1)
    };
    let success_lower_bound = 1.0 - n * f_max.powf(copies as f64).sqrt();
    Ok(CopiesReport { f_max, candidates, epsilon, copies, success_lower_bound })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub h: String,
    pub h_prime: String,
    pub fidelity: f64,
    pub fidelity_squared: f64,
    pub comb1: BoundOutcome,
    pub comb2: BoundOutcome,
    pub comb2_union: f64,
    pub copies: Option<CopiesReport>,
}

/// Exact fidelity, both bounds with auto-extracted parameters and, when
/// `F < 1`, the copy count for `target = (N, ε)`.
pub fn fidelity_report(h: &HiddenPolynomial, h2: &HiddenPolynomial, target: Option<(u64, f64)>) -> Result<FidelityReport> {
    let profile = intersections(h, h2)?;
    let f = fidelity_from_profile(&profile).min(1.0);
    let comb2 = auto_comb2(&profile);
    let comb2_union = bound_comb2_union(&profile, &comb2.params)?;
    let copies = match target {
        Some((n, eps)) if f < 1.0 - 1e-9 => Some(copies_needed(f, n, eps)?),
        _ => None,
    };
    Ok(FidelityReport {
        h: h.format(),
        h_prime: h2.format(),
        fidelity: f,
        fidelity_squared: f * f,
        comb1: auto_comb1(&profile),
        comb2,
        comb2_union,
        copies,
    })
}

/// The corollaries' explicit constants and per-`(y, y')` common-factor flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SzParams {
    /// `q^{d-2} · deg h · deg h' · min(deg h, deg h')`.
    pub alpha: u64,
    /// `q^{d-1} · deg h`.
    pub delta: u64,
    /// Whether `h − y` and `h' − y'` share a factor, row-major in `(y, y')`.
    pub common_factor: Vec<bool>,
    pub common_factor_fraction: f64,
    /// Largest `N_{yy'}` over pairs without a common factor.
    pub max_coprime_intersection: u64,
    pub alpha_certified: bool,
    /// Largest `|L_y|` over `y` with `h − y ≠ 0`.
    pub max_level_size: u64,
    pub delta_certified: bool,
}

pub fn common_factor_and_sz_params(h: &HiddenPolynomial, h2: &HiddenPolynomial) -> Result<SzParams> {
    let d = h.space().d();
    if d < 2 {
        return Err(Error::InvalidInput(format!("needs d ≥ 2, got {d}")));
    }
    let profile = intersections(h, h2)?;
    let ctx = h.ctx();
    let q = profile.q;
    let (a, b) = (h.degree() as u64, h2.degree() as u64);
    let qq = q as u64;
    let alpha = qq.pow(d as u32 - 2) * a * b * a.min(b);
    let delta = qq.pow(d as u32 - 1) * a;
    let shifted = |p: &MPoly| -> Vec<MPoly> { ctx.elements().map(|y| p.shift(ctx, y)).collect() };
    let (hs, h2s) = (shifted(h.poly()), shifted(h2.poly()));
    let common_factor: Vec<bool> = (0..q * q)
        .into_par_iter()
        .map(|i| MPoly::have_common_factor(ctx, &hs[i / q], &h2s[i % q]))
        .collect();
    let max_coprime_intersection =
        (0..q * q).filter(|&i| !common_factor[i]).map(|i| profile.counts[i]).max().unwrap_or(0);
    let max_level_size = (0..q).filter(|&y| !hs[y].is_zero()).map(|y| profile.rows[y]).max().unwrap_or(0);
    Ok(SzParams {
        alpha,
        delta,
        common_factor_fraction: common_factor.iter().filter(|&&c| c).count() as f64 / (q * q) as f64,
        common_factor,
        max_coprime_intersection,
        alpha_certified: max_coprime_intersection <= alpha,
        max_level_size,
        delta_certified: max_level_size <= delta,
    })
}

/// Monomials of total degree ≤ t in `d` variables, highest degree first.
pub fn monomials(d: usize, t: u32) -> Vec<Vec<u32>> {
    fn rec(d: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == d - 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e);
            rec(d, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for deg in (0..=t).rev() {
        rec(d, deg, &mut Vec::new(), &mut out);
    }
    out
}

/// Uniform polynomial of total degree ≤ t.
pub fn random_polynomial_upto(ctx: &FieldCtx, d: usize, t: u32, rng: &mut ChaCha8Rng) -> MPoly {
    let q = ctx.q();
    MPoly::from_terms(d, monomials(d, t).into_iter().map(|e| (e, Elem(rng.random_range(0..q)))), ctx)
}

/// Uniform polynomial of total degree exactly `t`.
pub fn random_polynomial(ctx: &FieldCtx, d: usize, t: u32, rng: &mut ChaCha8Rng) -> MPoly {
    loop {
        let p = random_polynomial_upto(ctx, d, t, rng);
        if p.total_degree() == Some(t) {
            return p;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub q: u32,
    pub d: usize,
    pub t: u32,
    pub exhaustive: bool,
    /// Projective classes (exhaustive) or polynomials (sampled) examined.
    pub examined: u64,
    pub failing: u64,
    pub fraction: f64,
    pub fraction_times_q: f64,
    pub interval: WilsonInterval,
}

/// Fraction of bivariate polynomials `h` of total degree `t` that are not
/// absolutely irreducible. Shifting by `y` permutes the constant term, so
/// this equals the fraction of pairs `(h, y)` with `h − y` not absolutely
/// irreducible. The exhaustive mode visits each class `{c·h : c ≠ 0}` once,
/// normalized so its first nonzero top-degree coefficient is 1; the sampled
/// mode draws `samples` uniform polynomials.
pub fn typicality_census(ctx: &Field, t: u32, samples: Option<usize>, seed: u64) -> Result<CensusReport> {
    let d = 2;
    if t == 0 {
        return Err(Error::InvalidInput("census needs t ≥ 1".into()));
    }
    let oracle = IrreducibilityOracle::new(ctx, t.max(1))?;
    let q = ctx.q();
    let mons = monomials(d, t);
    let ntop = mons.iter().filter(|e| e.iter().sum::<u32>() == t).count();
    let qq = q as u64;
    let fails = |p: &MPoly| -> Result<bool> { Ok(!oracle.is_absolutely_irreducible(p)?) };
    let (examined, failing, exhaustive) = match samples {
        Some(n) => {
            let domain = format!("hpp/census/{q}/{t}");
            let bad = (0..n)
                .into_par_iter()
                .map(|i| fails(&random_polynomial(ctx, d, t, &mut stream(seed, &domain, i as u64))))
                .collect::<Result<Vec<bool>>>()?;
            (n as u64, bad.iter().filter(|&&b| b).count() as u64, false)
        }
        None => {
            // Classes whose first nonzero top coefficient sits at position `lead`.
            let blocks: Vec<(usize, u64)> =
                (0..ntop).map(|lead| (lead, qq.pow((mons.len() - lead - 1) as u32))).collect();
            let total: u64 = blocks.iter().map(|b| b.1).sum();
            if total > MAX_CENSUS_CLASSES {
                return Err(Error::ResourceCap(format!(
                    "{total} classes exceed {MAX_CENSUS_CLASSES}; use a sampled census"
                )));
            }
            let mut failing = 0u64;
            for &(lead, count) in &blocks {
                failing += (0..count)
                    .into_par_iter()
                    .map(|mut idx| {
                        let mut terms = vec![(mons[lead].clone(), ctx.one())];
                        for e in &mons[lead + 1..] {
                            terms.push((e.clone(), Elem((idx % qq) as u32)));
                            idx /= qq;
                        }
                        fails(&MPoly::from_terms(d, terms, ctx)).map(u64::from)
                    })
                    .try_reduce(|| 0, |a, b| Ok(a + b))?;
            }
            (total, failing, true)
        }
    };
    let fraction = failing as f64 / examined.max(1) as f64;
    Ok(CensusReport {
        q,
        d,
        t,
        exhaustive,
        examined,
        failing,
        fraction,
        fraction_times_q: fraction * q as f64,
        interval: wilson(failing, examined),
    })
}

/// Median and maximum fidelity over random pairs `(h, h')` with `h` of
/// degree `t` absolutely irreducible and `h'` of degree ≤ t with a
/// different level-set partition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendPoint {
    pub q: u32,
    pub t: u32,
    pub pairs: usize,
    pub median_fidelity: f64,
    pub max_fidelity: f64,
}

pub fn fidelity_trend(space: &Space, t: u32, pairs: usize, seed: u64) -> Result<TrendPoint> {
    let oracle = IrreducibilityOracle::new(space.field(), t)?;
    let ctx = space.ctx();
    let domain = format!("hpp/trend/{}/{}", space.q(), t);
    let mut fs = (0..pairs)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut rng = stream(seed, &domain, i as u64);
            let h = loop {
                let p = random_polynomial(ctx, 2, t, &mut rng);
                if oracle.is_absolutely_irreducible(&p)? {
                    break HiddenPolynomial::new(space, p)?;
                }
            };
            loop {
                let h2 = HiddenPolynomial::new(space, random_polynomial_upto(ctx, 2, t, &mut rng))?;
                let profile = intersections(&h, &h2)?;
                if !profile.same_partition() {
                    return Ok(fidelity_from_profile(&profile));
                }
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    fs.sort_by(f64::total_cmp);
    let median = if fs.is_empty() {
        0.0
    } else if fs.len() % 2 == 1 {
        fs[fs.len() / 2]
    } else {
        0.5 * (fs[fs.len() / 2 - 1] + fs[fs.len() / 2])
    };
    Ok(TrendPoint { q: space.q(), t, pairs, median_fidelity: median, max_fidelity: fs.last().copied().unwrap_or(0.0) })
}

/// `C = max √q · | |L_y| / q^{d-1} − 1 |` over random `h` of degree `t` and
/// the `y` for which `h − y` is absolutely irreducible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSizeFit {
    pub q: u32,
    pub t: u32,
    pub level_sets: u64,
    pub fitted_c: f64,
}

pub fn level_size_fit(space: &Space, t: u32, samples: usize, seed: u64) -> Result<LevelSizeFit> {
    let oracle = IrreducibilityOracle::new(space.field(), t)?;
    let ctx = space.ctx();
    let q = space.q();
    let scale = (q as f64).powi(space.d() as i32 - 1);
    let domain = format!("hpp/levels/{q}/{t}");
    let per = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<(u64, f64)> {
            let mut rng = stream(seed, &domain, i as u64);
            let h = HiddenPolynomial::new(space, random_polynomial(ctx, 2, t, &mut rng))?;
            let sizes = level_sets(&h);
            let mut n = 0;
            let mut c: f64 = 0.0;
            for y in ctx.elements() {
                if oracle.is_absolutely_irreducible(&h.poly().shift(ctx, y))? {
                    n += 1;
                    c = c.max((sizes[y.index()] as f64 / scale - 1.0).abs() * (q as f64).sqrt());
                }
            }
            Ok((n, c))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LevelSizeFit {
        q,
        t,
        level_sets: per.iter().map(|p| p.0).sum(),
        fitted_c: per.iter().map(|p| p.1).fold(0.0, f64::max),
    })
}

/// Fidelity reports for random pairs of polynomials of degree ≤ t.
pub fn fidelity_sweep(space: &Space, t: u32, pairs: usize, seed: u64, target: Option<(u64, f64)>) -> Result<Vec<FidelityReport>> {
    let ctx = space.ctx();
    let domain = format!("hpp/pairs/{}/{}/{}", space.q(), space.d(), t);
    (0..pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, &domain, i as u64);
            let h = HiddenPolynomial::new(space, random_polynomial_upto(ctx, space.d(), t, &mut rng))?;
            let h2 = HiddenPolynomial::new(space, random_polynomial_upto(ctx, space.d(), t, &mut rng))?;
            fidelity_report(&h, &h2, target)
        })
        .collect()
}

/// Every polynomial of degree ≤ t in `d` variables, in coefficient order.
pub fn all_polynomials(ctx: &FieldCtx, d: usize, t: u32) -> Result<Vec<MPoly>> {
    let mons = monomials(d, t);
    let q = ctx.q() as u64;
    let total = q
        .checked_pow(mons.len() as u32)
        .filter(|&n| n <= MAX_CENSUS_CLASSES)
        .ok_or_else(|| Error::ResourceCap(format!("{} coefficients over F_{q}", mons.len())))?;
    Ok((0..total)
        .map(|mut idx| {
            let terms: Vec<(Vec<u32>, Elem)> = mons
                .iter()
                .map(|e| {
                    let c = Elem((idx % q) as u32);
                    idx /= q;
                    (e.clone(), c)
                })
                .collect();
            MPoly::from_terms(d, terms, ctx)
        })
        .collect())
}
