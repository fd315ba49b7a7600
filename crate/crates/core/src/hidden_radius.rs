//! Fourier sampling for the hidden radius problem.
//!
//! After the Fourier transform the mixed state `ρ_r` is diagonal with
//! `Pr(k|r) = |Σ_{x∈S_r} ω^{tr k·x}|² / (q^d |S_r|)`. For `k ≠ 0` this depends
//! on `k` only through `d(k)`, so distributions are stored per level
//! `w = d(k)` (probability of each single `k ≠ 0` on the level, and the
//! number of such `k`) plus the atom at `k = 0`.

use std::f64::consts::PI;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::char_sums::{gauss_sum, sato_tate_from_values, SatoTateReport};
use crate::error::{Error, Result};
use crate::finite_field::{Elem, FieldCtx};
use crate::geometry::{fourier, sphere_fourier_brute, Space, StateVector};
use crate::rng::stream;
use crate::stats::{wilson, WilsonInterval};

/// `Pr(k|r)` stored on the statistic `d(k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusDistribution {
    pub q: u32,
    pub d: usize,
    /// Element index of `r`.
    pub r: u32,
    pub sphere_size: u64,
    /// `Pr(k = 0 | r)`.
    pub atom0: f64,
    /// `level_prob[w]`: probability of each single `k ≠ 0` with `d(k) = w`.
    pub level_prob: Vec<f64>,
    /// `level_count[w]`: number of `k ≠ 0` with `d(k) = w`.
    pub level_count: Vec<u64>,
}

impl RadiusDistribution {
    pub fn total(&self) -> f64 {
        self.atom0
            + self
                .level_prob
                .iter()
                .zip(&self.level_count)
                .map(|(p, &c)| p * c as f64)
                .sum::<f64>()
    }

    /// `Pr(k|r)` of a single point, given its norm.
    pub fn prob(&self, k: usize, norm_k: Elem) -> f64 {
        if k == 0 {
            self.atom0
        } else {
            self.level_prob[norm_k.index()]
        }
    }

    /// Probability of the event `d(k) = w` (including `k = 0` when `w = 0`).
    pub fn level_mass(&self, w: usize) -> f64 {
        let m = self.level_prob[w] * self.level_count[w] as f64;
        if w == 0 {
            m + self.atom0
        } else {
            m
        }
    }

    /// Full vector over `F_q^d`.
    pub fn pmf(&self, space: &Space) -> Vec<f64> {
        space
            .norm_table()
            .into_iter()
            .enumerate()
            .map(|(k, n)| self.prob(k, n))
            .collect()
    }
}

/// Number of `k ≠ 0` on each level `d(k) = w`.
fn nonzero_level_counts(space: &Space) -> Vec<u64> {
    let mut c = space.level_sizes();
    c[0] -= 1;
    c
}

/// Closed form for odd `d`:
///
/// `Pr(k|r) · q|S_r|` is `|S_r|²/q^{d-1}` at `k = 0`; `1` when `r d(k) = 0`
/// but not `r = d(k) = 0`; `4 cos²(2π tr√(r d(k)) / p)` when `χ(r d(k)) = 1`;
/// `0` otherwise.
pub fn radius_distribution(space: &Space, r: Elem) -> Result<RadiusDistribution> {
    let d = space.d();
    if d % 2 == 0 {
        return Err(Error::InvalidInput("the closed-form distribution needs odd d".into()));
    }
    let ctx = space.ctx();
    let q = ctx.q() as f64;
    let sizes = space.level_sizes();
    let s_r = sizes[r.index()];
    if s_r == 0 {
        return Err(Error::InvalidInput("empty sphere".into()));
    }
    let denom = q * s_r as f64;
    let atom0 = (s_r as f64).powi(2) / q.powi(d as i32 - 1) / denom;
    let level_prob = ctx
        .elements()
        .map(|w| {
            let rw = ctx.mul(r, w);
            let v = if rw.is_zero() {
                if r.is_zero() && w.is_zero() {
                    0.0
                } else {
                    1.0
                }
            } else if ctx.chi(rw) == 1 {
                let tr = ctx.trace(ctx.sqrt(rw).expect("square")) as f64;
                4.0 * (2.0 * PI * tr / ctx.p() as f64).cos().powi(2)
            } else {
                0.0
            };
            v / denom
        })
        .collect();
    Ok(RadiusDistribution {
        q: ctx.q(),
        d,
        r: r.0,
        sphere_size: s_r,
        atom0,
        level_prob,
        level_count: nonzero_level_counts(space),
    })
}

/// `Pr(k|r)` for every `k`, from the Fourier transform of `|S_r⟩`.
pub fn pointwise_brute(space: &Space, r: Elem) -> Result<Vec<f64>> {
    let pts = space.sphere_points(r);
    let v = StateVector::uniform(space, &pts)?;
    Ok(fourier(&v).probabilities())
}

/// Per-level distribution from direct evaluation (any `d`), together with
/// the largest spread of `Pr(k|r)` within one level.
pub fn radius_distribution_brute(space: &Space, r: Elem) -> Result<(RadiusDistribution, f64)> {
    let probs = pointwise_brute(space, r)?;
    let norms = space.norm_table();
    let q = space.q() as usize;
    let mut lo = vec![f64::INFINITY; q];
    let mut hi = vec![f64::NEG_INFINITY; q];
    for k in 1..space.size() {
        let w = norms[k].index();
        lo[w] = lo[w].min(probs[k]);
        hi[w] = hi[w].max(probs[k]);
    }
    let counts = nonzero_level_counts(space);
    let spread = (0..q).filter(|&w| counts[w] > 0).map(|w| hi[w] - lo[w]).fold(0.0, f64::max);
    let level_prob = (0..q).map(|w| if counts[w] > 0 { (lo[w] + hi[w]) / 2.0 } else { 0.0 }).collect();
    Ok((
        RadiusDistribution {
            q: space.q(),
            d: space.d(),
            r: r.0,
            sphere_size: space.level_sizes()[r.index()],
            atom0: probs[0],
            level_prob,
            level_count: counts,
        },
        spread,
    ))
}

/// Distribution for any `d`: closed form when `d` is odd, direct
/// evaluation otherwise.
pub fn radius_distribution_any(space: &Space, r: Elem) -> Result<RadiusDistribution> {
    if space.d() % 2 == 1 {
        radius_distribution(space, r)
    } else {
        radius_distribution_brute(space, r).map(|(d, _)| d)
    }
}

/// Draws `k` from `Pr(·|r)`: a level (or the atom) by weight, then a uniform
/// point on that level.
pub struct KSampler {
    levels: Vec<Vec<usize>>,
    /// category 0 is `k = 0`, category `w + 1` is level `w`.
    weights: WeightedIndex<f64>,
}

impl KSampler {
    pub fn new(space: &Space, dist: &RadiusDistribution) -> Result<Self> {
        let mut levels = vec![Vec::new(); space.q() as usize];
        for (k, n) in space.norm_table().into_iter().enumerate().skip(1) {
            levels[n.index()].push(k);
        }
        let mut w = vec![dist.atom0.max(0.0)];
        for (i, lv) in levels.iter().enumerate() {
            w.push((dist.level_prob[i] * lv.len() as f64).max(0.0));
        }
        let weights = WeightedIndex::new(&w).map_err(|e| Error::InvalidInput(format!("distribution: {e}")))?;
        Ok(KSampler { levels, weights })
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let cat = self.weights.sample(rng);
        if cat == 0 {
            return 0;
        }
        let lv = &self.levels[cat - 1];
        lv[rng.random_range(0..lv.len())]
    }
}

pub fn sample_k(space: &Space, dist: &RadiusDistribution, rng: &mut ChaCha8Rng, n: usize) -> Result<Vec<usize>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let s = KSampler::new(space, dist)?;
    Ok((0..n).map(|_| s.sample(rng)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ChiPlus,
    ChiMinus,
    RadiusZero,
    Inconclusive,
}

impl Verdict {
    /// The verdict a correct run gives for radius `r`.
    pub fn truth(ctx: &FieldCtx, r: Elem) -> Self {
        match ctx.chi(r) {
            1 => Verdict::ChiPlus,
            -1 => Verdict::ChiMinus,
            _ => Verdict::RadiusZero,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierReport {
    pub samples: usize,
    pub discarded: usize,
    pub plus: usize,
    pub minus: usize,
    pub verdict: Verdict,
    /// For a sign verdict, `1 - 2^{1-kept}`: one minus the chance that
    /// radius 0 (signs ±1 near evenly) yields a unanimous sign. A zero-radius
    /// verdict is certain, since a nonzero radius never shows both signs.
    pub confidence: f64,
}

/// Repeat `reps` times: draw `k`, discard it if `d(k) = 0`. Both signs of
/// `χ(d(k))` seen means `r = 0`; otherwise report the common sign.
pub fn classify_chi_r(space: &Space, reps: usize, mut draw_k: impl FnMut() -> usize) -> ClassifierReport {
    let ctx = space.ctx();
    let (mut plus, mut minus, mut discarded) = (0, 0, 0);
    for _ in 0..reps {
        let k = draw_k();
        match ctx.chi(space.norm(k)) {
            0 => discarded += 1,
            1 => plus += 1,
            _ => minus += 1,
        }
    }
    let kept = plus + minus;
    let (verdict, confidence) = match (plus > 0, minus > 0) {
        (true, true) => (Verdict::RadiusZero, 1.0),
        (true, false) => (Verdict::ChiPlus, 1.0 - 0.5f64.powi(kept as i32 - 1)),
        (false, true) => (Verdict::ChiMinus, 1.0 - 0.5f64.powi(kept as i32 - 1)),
        (false, false) => (Verdict::Inconclusive, 0.0),
    };
    ClassifierReport { samples: reps, discarded, plus, minus, verdict, confidence }
}

/// Monte Carlo success rate of the classifier for radius `r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierStats {
    pub r: String,
    pub truth: Verdict,
    pub reps: usize,
    pub success: WilsonInterval,
    pub inconclusive: u64,
}

/// `trials` independent runs, trial `i` drawing from stream `i`.
pub fn classifier_success(space: &Space, r: Elem, reps: usize, trials: usize, seed: u64) -> Result<ClassifierStats> {
    let dist = radius_distribution_any(space, r)?;
    let sampler = KSampler::new(space, &dist)?;
    let truth = Verdict::truth(space.ctx(), r);
    let domain = format!("hrp/classify/{}/{}/{}", space.q(), space.d(), r.0);
    let verdicts: Vec<Verdict> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, &domain, i as u64);
            classify_chi_r(space, reps, || sampler.sample(&mut rng)).verdict
        })
        .collect();
    let ok = verdicts.iter().filter(|&&v| v == truth).count() as u64;
    let inconclusive = verdicts.iter().filter(|&&v| v == Verdict::Inconclusive).count() as u64;
    Ok(ClassifierStats {
        r: space.ctx().format_elem(r),
        truth,
        reps,
        success: wilson(ok, trials as u64),
        inconclusive,
    })
}

/// Exact total variation distance, evaluated level by level.
pub fn total_variation(a: &RadiusDistribution, b: &RadiusDistribution) -> f64 {
    let levels: f64 = a
        .level_prob
        .iter()
        .zip(&b.level_prob)
        .zip(&a.level_count)
        .map(|((x, y), &c)| (x - y).abs() * c as f64)
        .sum();
    0.5 * ((a.atom0 - b.atom0).abs() + levels)
}

/// `TV(Pr(·|r), Pr(·|r'))`.
pub fn total_variation_radii(space: &Space, r: Elem, r2: Elem) -> Result<f64> {
    Ok(total_variation(&radius_distribution_any(space, r)?, &radius_distribution_any(space, r2)?))
}

/// All pairwise distances over `F_q` with summary minima.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TvTable {
    pub q: u32,
    pub d: usize,
    pub radii: Vec<String>,
    pub table: Vec<Vec<f64>>,
    pub max_diagonal: f64,
    pub min_distinct: f64,
    /// Minimum over distinct nonzero pairs with `χ(r) = χ(r')`.
    pub min_chi_equal: f64,
    /// Minimum over nonzero pairs with `χ(r) ≠ χ(r')`.
    pub min_chi_mismatched: f64,
    /// `max |TV(1, r) - TV(c², c² r)|` over `r` and `c ≠ 0`.
    pub rescaling_error: f64,
}

pub fn min_pairwise_tv(space: &Space) -> Result<TvTable> {
    let ctx = space.ctx();
    let q = ctx.q() as usize;
    let dists: Vec<RadiusDistribution> = ctx
        .elements()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&r| radius_distribution_any(space, r))
        .collect::<Result<_>>()?;
    let table: Vec<Vec<f64>> = (0..q)
        .into_par_iter()
        .map(|i| (0..q).map(|j| total_variation(&dists[i], &dists[j])).collect())
        .collect();
    let mut max_diagonal: f64 = 0.0;
    let (mut min_distinct, mut min_eq, mut min_mis) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for i in 0..q {
        max_diagonal = max_diagonal.max(table[i][i]);
        for j in 0..q {
            if i == j {
                continue;
            }
            let t = table[i][j];
            min_distinct = min_distinct.min(t);
            if i == 0 || j == 0 {
                continue;
            }
            let (ci, cj) = (ctx.chi(Elem(i as u32)), ctx.chi(Elem(j as u32)));
            if ci == cj {
                min_eq = min_eq.min(t);
            } else {
                min_mis = min_mis.min(t);
            }
        }
    }
    let one = ctx.one();
    let mut rescaling_error: f64 = 0.0;
    for r in ctx.elements() {
        let base = table[one.index()][r.index()];
        for c in ctx.nonzero_elements() {
            let c2 = ctx.square(c);
            let t = table[c2.index()][ctx.mul(c2, r).index()];
            rescaling_error = rescaling_error.max((t - base).abs());
        }
    }
    Ok(TvTable {
        q: ctx.q(),
        d: space.d(),
        radii: ctx.elements().map(|r| ctx.format_elem(r)).collect(),
        table,
        max_diagonal,
        min_distinct,
        min_chi_equal: min_eq,
        min_chi_mismatched: min_mis,
        rescaling_error,
    })
}

/// The chain of bounds on the rescaled cosine distributions, each line
/// minimized over its own range of `r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CosineChain {
    pub q: u32,
    /// `min_{χ(r)=1, r≠1} (2/q) Σ_{χ(s)=1} |cos²(2π tr√s/p) - cos²(2π tr√(rs)/p)|`
    pub over_squares: f64,
    /// `min_{r≠0,±1} (2/q) Σ_s |cos²(2π tr s/p) - cos²(2π tr rs/p)|`
    pub over_field: f64,
    /// Same with `½|cos(4π tr s/p) - cos(4π tr rs/p)|`.
    pub half_angle: f64,
    /// `min (2/q) Σ_s ¼ |cos(4π tr s/p) - cos(4π tr rs/p)|²`.
    pub squared: f64,
    /// `min (1/q) Σ_s (cos²(4π tr s/p) - cos(4π tr s/p) cos(4π tr rs/p))`.
    pub expanded: f64,
    /// `(1/q) Σ_s cos²(4π tr s/p)`.
    pub final_value: f64,
    /// `max_r |(1/q) Σ_s cos(4π tr s/p) cos(4π tr rs/p)|` over `r ≠ 0, ±1`.
    pub max_cross_term: f64,
}

pub fn cosine_chain(ctx: &FieldCtx) -> CosineChain {
    let p = ctx.p() as f64;
    let q = ctx.q() as f64;
    let ang = |a: Elem, scale: f64| scale * PI * ctx.trace(a) as f64 / p;
    let one = ctx.one();
    let minus_one = ctx.neg(one);
    let mut over_squares = f64::INFINITY;
    for r in ctx.nonzero_elements().filter(|&r| ctx.chi(r) == 1 && r != one) {
        let s: f64 = ctx
            .nonzero_elements()
            .filter(|&s| ctx.chi(s) == 1)
            .map(|s| {
                let a = ang(ctx.sqrt(s).unwrap(), 2.0).cos().powi(2);
                let b = ang(ctx.sqrt(ctx.mul(r, s)).unwrap(), 2.0).cos().powi(2);
                (a - b).abs()
            })
            .sum();
        over_squares = over_squares.min(2.0 / q * s);
    }
    let (mut over_field, mut half_angle, mut squared, mut expanded) =
        (f64::INFINITY, f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut max_cross_term: f64 = 0.0;
    for r in ctx.nonzero_elements().filter(|&r| r != one && r != minus_one) {
        let (mut l2, mut l3, mut l4, mut l5, mut cross) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for s in ctx.elements() {
            let rs = ctx.mul(r, s);
            l2 += (ang(s, 2.0).cos().powi(2) - ang(rs, 2.0).cos().powi(2)).abs();
            let (cs, crs) = (ang(s, 4.0).cos(), ang(rs, 4.0).cos());
            l3 += 0.5 * (cs - crs).abs();
            l4 += 0.25 * (cs - crs).powi(2);
            l5 += cs * cs - cs * crs;
            cross += cs * crs;
        }
        over_field = over_field.min(2.0 / q * l2);
        half_angle = half_angle.min(2.0 / q * l3);
        squared = squared.min(2.0 / q * l4);
        expanded = expanded.min(l5 / q);
        max_cross_term = max_cross_term.max((cross / q).abs());
    }
    let final_value = ctx.elements().map(|s| ang(s, 4.0).cos().powi(2)).sum::<f64>() / q;
    CosineChain {
        q: ctx.q(),
        over_squares,
        over_field,
        half_angle,
        squared,
        expanded,
        final_value,
        max_cross_term,
    }
}

/// Evidence for even `d`: exact distributions by direct evaluation, their
/// pairwise distances, and Kloosterman angle statistics of the sphere
/// transform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvenDimensionEvidence {
    pub q: u32,
    pub d: usize,
    pub max_sum_error: f64,
    pub min_tv_nonzero: f64,
    pub tv: TvTable,
    /// Angles of `K_1(1, w/4)` recovered from the unit-sphere transform.
    pub sato_tate: SatoTateReport,
}

pub fn kloosterman_distribution_evidence(space: &Space, bins: usize) -> Result<EvenDimensionEvidence> {
    if space.d() % 2 == 1 {
        return Err(Error::InvalidInput("even d required".into()));
    }
    let ctx = space.ctx();
    let mut max_sum_error: f64 = 0.0;
    for r in ctx.elements() {
        let (dist, _) = radius_distribution_brute(space, r)?;
        max_sum_error = max_sum_error.max((dist.total() - 1.0).abs());
    }
    let tv = min_pairwise_tv(space)?;
    let mut min_tv_nonzero = f64::INFINITY;
    for i in 1..tv.table.len() {
        for j in 1..tv.table.len() {
            if i != j {
                min_tv_nonzero = min_tv_nonzero.min(tv.table[i][j]);
            }
        }
    }
    // Σ_{x∈S_1} ω^{tr k·x} = (G_1^d/q) K_1(1, d(k)/4) with G_1^d/q = ±q^{d/2-1}
    let prefactor = (gauss_sum(ctx).value.powu(space.d() as u32) / ctx.q() as f64).re;
    let norms = space.norm_table();
    let mut reps = vec![None; ctx.q() as usize];
    for (k, n) in norms.iter().enumerate().skip(1) {
        if reps[n.index()].is_none() {
            reps[n.index()] = Some(k);
        }
    }
    let values: Vec<_> = ctx
        .nonzero_elements()
        .map(|w| sphere_fourier_brute(space, ctx.one(), reps[w.index()].expect("level nonempty")) / prefactor)
        .collect();
    Ok(EvenDimensionEvidence {
        q: ctx.q(),
        d: space.d(),
        max_sum_error,
        min_tv_nonzero,
        tv,
        sato_tate: sato_tate_from_values(ctx.q(), &values, bins),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_field::build_ctx;
    use crate::stats::{chi_square_gof, total_variation as tv_vec};

    fn space(p: u32, m: u32, d: usize) -> Space {
        Space::new(build_ctx(p, m).unwrap(), d).unwrap()
    }

    #[test]
    fn closed_form_matches_fourier_pointwise() {
        for (p, m) in [(3, 1), (5, 1), (7, 1), (3, 2)] {
            let sp = space(p, m, 3);
            let norms = sp.norm_table();
            for r in sp.ctx().elements() {
                let dist = radius_distribution(&sp, r).unwrap();
                let brute = pointwise_brute(&sp, r).unwrap();
                for k in 0..sp.size() {
                    assert!((dist.prob(k, norms[k]) - brute[k]).abs() < 1e-9, "q={} r={r:?} k={k}", sp.q());
                }
                assert!((dist.total() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn distribution_examples() {
        let sp = space(3, 1, 3);
        let d = radius_distribution(&sp, Elem(1)).unwrap();
        assert!((d.atom0 - 6.0 / 27.0).abs() < 1e-12);
        let sp = space(7, 1, 3);
        let ctx = sp.ctx();
        for r in ctx.nonzero_elements() {
            let dist = radius_distribution(&sp, r).unwrap();
            for w in ctx.nonzero_elements() {
                if ctx.chi(ctx.mul(r, w)) == -1 {
                    assert_eq!(dist.level_prob[w.index()], 0.0);
                }
            }
        }
        assert!(radius_distribution(&space(5, 1, 2), Elem(1)).is_err());
    }

    #[test]
    fn even_dimension_brute_distribution_is_level_constant() {
        let sp = space(5, 1, 2);
        for r in sp.ctx().elements() {
            let (dist, spread) = radius_distribution_brute(&sp, r).unwrap();
            assert!(spread < 1e-12);
            assert!((dist.total() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn sampler_support_and_goodness_of_fit() {
        let sp = space(7, 1, 3);
        let ctx = sp.ctx();
        let r = Elem(1);
        let dist = radius_distribution(&sp, r).unwrap();
        let mut rng = stream(5, "test", 0);
        assert!(sample_k(&sp, &dist, &mut rng, 0).unwrap().is_empty());
        let ks = sample_k(&sp, &dist, &mut rng, 100_000).unwrap();
        assert!(ks.iter().all(|&k| ctx.chi(ctx.mul(r, sp.norm(k))) != -1));
        let mut counts = vec![0u64; sp.size()];
        for &k in &ks {
            counts[k] += 1;
        }
        let exact = pointwise_brute(&sp, r).unwrap();
        assert!(chi_square_gof(&counts, &exact).p_value > 0.01);
    }

    #[test]
    fn classifier_logic() {
        let sp = space(7, 1, 3);
        let rep = classify_chi_r(&sp, 0, || 0);
        assert_eq!(rep.verdict, Verdict::Inconclusive);
        let k_plus = (1..sp.size()).find(|&k| sp.ctx().chi(sp.norm(k)) == 1).unwrap();
        let k_minus = (1..sp.size()).find(|&k| sp.ctx().chi(sp.norm(k)) == -1).unwrap();
        let mut seq = [k_plus, 0, k_minus].into_iter().cycle();
        let rep = classify_chi_r(&sp, 3, || seq.next().unwrap());
        assert_eq!((rep.verdict, rep.discarded), (Verdict::RadiusZero, 1));
        let rep = classify_chi_r(&sp, 4, || k_minus);
        assert_eq!(rep.verdict, Verdict::ChiMinus);
        assert!((rep.confidence - 0.875).abs() < 1e-12);
    }

    #[test]
    fn classifier_success_rates() {
        let sp = space(7, 1, 3);
        for r in sp.ctx().elements() {
            let stats = classifier_success(&sp, r, 20, 1000, 9).unwrap();
            assert!(stats.success.estimate >= 0.9, "r={r:?}: {:?}", stats.success);
        }
        // a sign verdict is never wrong for r ≠ 0
        let stats = classifier_success(&sp, Elem(3), 20, 200, 1).unwrap();
        assert_eq!(stats.success.successes + stats.inconclusive, 200);
    }

    #[test]
    fn tv_level_form_matches_pointwise() {
        let sp = space(5, 1, 3);
        for r in sp.ctx().elements() {
            for r2 in sp.ctx().elements() {
                let a = radius_distribution(&sp, r).unwrap();
                let b = radius_distribution(&sp, r2).unwrap();
                let t = total_variation(&a, &b);
                assert!((t - tv_vec(&a.pmf(&sp), &b.pmf(&sp))).abs() < 1e-12);
                if r == r2 {
                    assert_eq!(t, 0.0);
                }
            }
        }
    }

    #[test]
    fn tv_table_properties() {
        for p in [7u32, 11, 13] {
            let t = min_pairwise_tv(&space(p, 1, 3)).unwrap();
            assert_eq!(t.max_diagonal, 0.0);
            assert!(t.min_distinct > 0.0);
            assert!(t.rescaling_error < 1e-12);
            for i in 0..t.table.len() {
                for j in 0..t.table.len() {
                    assert_eq!(t.table[i][j], t.table[j][i]);
                }
            }
            if p == 13 {
                assert!(t.min_chi_equal >= 0.25, "{}", t.min_chi_equal);
            }
        }
    }

    #[test]
    fn cosine_chain_at_13() {
        let c = cosine_chain(&build_ctx(13, 1).unwrap());
        assert!((c.final_value - 0.5).abs() < 1e-9);
        assert!((c.expanded - 0.5).abs() < 1e-9);
        assert!(c.max_cross_term < 1e-9);
        assert!((c.half_angle - c.over_field).abs() < 1e-9);
        assert!(c.half_angle + 1e-12 >= c.squared);
        assert!((c.squared - c.expanded).abs() < 1e-9);
        // squares are hit twice by s ↦ s², so the full-field sum doubles
        assert!((c.over_field - 2.0 * c.over_squares).abs() < 1e-9);
    }

    #[test]
    fn even_dimension_evidence() {
        let ev = kloosterman_distribution_evidence(&space(5, 1, 2), 10).unwrap();
        assert!(ev.max_sum_error < 1e-9);
        let ev = kloosterman_distribution_evidence(&space(7, 1, 2), 10).unwrap();
        assert!(ev.min_tv_nonzero > 0.0);
        assert_eq!(ev.sato_tate.counts.iter().sum::<u64>(), 6);
        // angles recovered from the sphere transform are the Kloosterman angles
        let direct = crate::char_sums::sato_tate_histogram(&build_ctx(7, 1).unwrap(), 10);
        assert_eq!(ev.sato_tate.counts, direct.counts);
        let l1: Vec<f64> = [11u32, 23, 47]
            .iter()
            .map(|&p| kloosterman_distribution_evidence(&space(p, 1, 2), 10).unwrap().sato_tate.l1_distance)
            .collect();
        assert!(l1[0] > l1[1] && l1[1] > l1[2], "{l1:?}");
    }
}
