//! Continuous-time walk on the Winnie Li graph (`x ~ x'` iff `d(x - x') = 1`)
//! and recovery of a hidden flat of unit-sphere centers.
//!
//! The adjacency matrix is diagonal in the Fourier basis with eigenvalue
//! `λ_k = Σ_{s∈S_1} ω^{tr k·s}`, which depends on `k ≠ 0` only through
//! `d(k)`. The walk uses `Ā`, the adjacency matrix with the `k = 0`
//! eigenvalue `|S_1|` replaced by 0.

use std::collections::{BTreeMap, HashSet};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite_field::Elem;
use crate::geometry::{sphere_fourier_from_norm, Flat, FlatRecord, Space, StateVector};
use crate::rng::stream;
use crate::stats::{wilson, WilsonInterval};

/// Largest number of candidate subsets examined by [`reconstruct_flat`].
pub const MAX_CANDIDATE_SUBSETS: u128 = 10_000_000;

/// Spectrum of the walk generator.
#[derive(Clone, Debug)]
pub struct WalkSpec {
    space: Space,
    /// `λ` for `k ≠ 0`, indexed by `d(k)`.
    levels: Vec<f64>,
    lambda0: f64,
    max_imaginary: f64,
    norms: Vec<Elem>,
}

impl WalkSpec {
    pub fn build(space: &Space) -> Self {
        let ctx = space.ctx();
        let mut max_imaginary: f64 = 0.0;
        let levels = ctx
            .elements()
            .map(|w| {
                let v = sphere_fourier_from_norm(ctx, space.d(), ctx.one(), w).value;
                max_imaginary = max_imaginary.max(v.im.abs());
                v.re
            })
            .collect();
        let lambda0 = space.level_sizes()[ctx.one().index()] as f64;
        WalkSpec { space: space.clone(), levels, lambda0, max_imaginary, norms: space.norm_table() }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    /// `λ_0 = |S_1|`, the eigenvalue removed from `A`.
    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    /// Eigenvalue of `A` for `k ≠ 0` on the level `d(k) = w`.
    pub fn level_eigenvalues(&self) -> &[f64] {
        &self.levels
    }

    /// Largest imaginary part met while evaluating the eigenvalues.
    pub fn max_imaginary(&self) -> f64 {
        self.max_imaginary
    }

    /// Eigenvalue of `Ā` at `k`.
    #[inline]
    pub fn eigenvalue(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.levels[self.norms[k].index()]
        }
    }

    /// `‖Ā‖ = max_{k≠0} |λ_k|` over the levels that occur.
    pub fn spectral_norm(&self) -> f64 {
        let counts = self.space.level_sizes();
        self.levels
            .iter()
            .enumerate()
            .filter(|&(w, _)| counts[w] > usize::from(w == 0) as u64)
            .map(|(_, l)| l.abs())
            .fold(0.0, f64::max)
    }

    /// `2 √(q^{d-1})`.
    pub fn weil_bound(&self) -> f64 {
        2.0 * (self.space.q() as f64).powi(self.space.d() as i32 - 1).sqrt()
    }

    /// `1 / √(q^{d-1} ln q)`.
    pub fn default_time(&self) -> f64 {
        let q = self.space.q() as f64;
        1.0 / (q.powi(self.space.d() as i32 - 1) * q.ln()).sqrt()
    }

    /// `Ā v`.
    pub fn apply_generator(&self, v: &StateVector) -> StateVector {
        let mut w = v.clone();
        w.fourier_in_place();
        for (k, a) in w.amps_mut().iter_mut().enumerate() {
            *a *= self.eigenvalue(k);
        }
        w.inverse_fourier_in_place();
        w
    }
}

/// `e^{-iĀt} v = U† diag(e^{-iλ_k t}) U v`.
pub fn walk_evolve(v: &StateVector, spec: &WalkSpec, t: f64) -> StateVector {
    let mut w = v.clone();
    w.fourier_in_place();
    for (k, a) in w.amps_mut().iter_mut().enumerate() {
        *a *= Complex64::from_polar(1.0, -spec.eigenvalue(k) * t);
    }
    w.inverse_fourier_in_place();
    w
}

/// `|S_r + center⟩`.
pub fn prepare_sphere_state(space: &Space, center: usize, r: Elem) -> Result<StateVector> {
    let pts: Vec<usize> = space.sphere_points(r).into_iter().map(|s| space.add(s, center)).collect();
    StateVector::uniform(space, &pts)
}

/// One mixture component of `ρ_H`: `|S_1 + h⟩` for `h` uniform on `H`.
pub fn prepare_rho_h_sample(space: &Space, flat: &Flat, rng: &mut ChaCha8Rng) -> Result<(usize, StateVector)> {
    let pts = flat.points(space);
    let h = pts[rng.random_range(0..pts.len())];
    Ok((h, prepare_sphere_state(space, h, space.ctx().one())?))
}

/// Output distribution of the walk started from `|S_1⟩` (center 0).
/// Translation invariance gives every other center by shifting.
pub fn base_output_distribution(spec: &WalkSpec, t: f64) -> Result<Vec<f64>> {
    let space = spec.space();
    let v = prepare_sphere_state(space, 0, space.ctx().one())?;
    Ok(walk_evolve(&v, spec, t).probabilities())
}

/// Exact measurement distribution of the walked `ρ_H`.
pub fn output_distribution(space: &Space, flat: &Flat, spec: &WalkSpec, t: f64) -> Result<Vec<f64>> {
    let base = base_output_distribution(spec, t)?;
    let hs = flat.points(space);
    let w = 1.0 / hs.len() as f64;
    let mut out = vec![0.0; space.size()];
    for &h in &hs {
        for (z, &p) in base.iter().enumerate() {
            if p != 0.0 {
                out[space.add(h, z)] += w * p;
            }
        }
    }
    Ok(out)
}

/// Per shot: draw `h`, evolve `|S_1 + h⟩`, sample `|amplitude|²`.
pub fn measure_walked_state(
    space: &Space,
    flat: &Flat,
    spec: &WalkSpec,
    t: f64,
    rng: &mut ChaCha8Rng,
    shots: usize,
) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(shots);
    for _ in 0..shots {
        let (_, v) = prepare_rho_h_sample(space, flat, rng)?;
        let probs = walk_evolve(&v, spec, t).probabilities();
        let idx = WeightedIndex::new(&probs).map_err(|e| Error::InvalidInput(format!("walk output: {e}")))?;
        out.push(idx.sample(rng));
    }
    Ok(out)
}

/// Sampler for the walked `ρ_H`: `h` uniform on `H` plus an offset drawn from
/// the base distribution. Same law as [`measure_walked_state`].
pub struct WalkSampler {
    space: Space,
    offsets: WeightedIndex<f64>,
    centers: Vec<usize>,
}

impl WalkSampler {
    pub fn new(space: &Space, flat: &Flat, base: &[f64]) -> Result<Self> {
        Ok(WalkSampler {
            space: space.clone(),
            offsets: WeightedIndex::new(base).map_err(|e| Error::InvalidInput(format!("walk output: {e}")))?,
            centers: flat.points(space),
        })
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let h = self.centers[rng.random_range(0..self.centers.len())];
        self.space.add(h, self.offsets.sample(rng))
    }
}

/// Measured quantities compared against the walk lemma.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkBands {
    pub t: f64,
    pub t_factor: f64,
    /// Total probability on `H`.
    pub on_flat_mass: f64,
    /// `on_flat_mass · ln q`; the lemma predicts about 1.
    pub on_flat_ratio: f64,
    pub max_off_flat: f64,
    /// `max_off_flat · q^d`.
    pub max_off_flat_scaled: f64,
    /// `|⟨0|e^{-iĀt}|S_1⟩|²`.
    pub center_prob: f64,
    /// `center_prob / (|S_1| t²)`.
    pub center_ratio: f64,
}

pub fn walk_bands(space: &Space, flat: &Flat, spec: &WalkSpec, t_factor: f64) -> Result<WalkBands> {
    let t = t_factor * spec.default_time();
    let base = base_output_distribution(spec, t)?;
    let dist = output_distribution(space, flat, spec, t)?;
    let (mut on, mut off_max) = (0.0, 0.0f64);
    for (y, &p) in dist.iter().enumerate() {
        if flat.contains(space, y) {
            on += p;
        } else {
            off_max = off_max.max(p);
        }
    }
    let q = space.q() as f64;
    Ok(WalkBands {
        t,
        t_factor,
        on_flat_mass: on,
        on_flat_ratio: on * q.ln(),
        max_off_flat: off_max,
        max_off_flat_scaled: off_max * space.size() as f64,
        center_prob: base[0],
        center_ratio: base[0] / (spec.lambda0() * t * t),
    })
}

/// Bands over a grid of multiples of the default time.
pub fn time_scan(space: &Space, flat: &Flat, spec: &WalkSpec, factors: &[f64]) -> Result<Vec<WalkBands>> {
    factors.iter().map(|&f| walk_bands(space, flat, spec, f)).collect()
}

pub const DEFAULT_TIME_FACTORS: [f64; 5] = [0.5, 0.75, 1.0, 1.5, 2.0];

/// Largest spread of the amplitudes of `e^{-iĀt}|S_r⟩` over a single level
/// `d(y) = w`, `y ≠ 0`. Zero when the evolved state is spherically symmetric
/// about the center.
pub fn symmetry_spread(spec: &WalkSpec, r: Elem, t: f64) -> Result<f64> {
    let space = spec.space();
    let v = walk_evolve(&prepare_sphere_state(space, 0, r)?, spec, t);
    let mut first: Vec<Option<Complex64>> = vec![None; space.q() as usize];
    let mut spread: f64 = 0.0;
    for (y, &a) in v.amps().iter().enumerate().skip(1) {
        let w = spec.norms[y].index();
        match first[w] {
            None => first[w] = Some(a),
            Some(b) => spread = spread.max((a - b).norm()),
        }
    }
    Ok(spread)
}

/// Dense-matrix check of the Fourier-diagonal walk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseCheck {
    /// `max |Ā_dense - Ā_fourier|` entrywise.
    pub generator_error: f64,
    /// `max |e^{-iĀt}_dense - e^{-iĀt}_fourier|` entrywise.
    pub evolution_error: f64,
}

/// Builds `A = Σ_x Σ_{s∈S_1} |x+s⟩⟨x|` explicitly, subtracts
/// `λ_0 |0̃⟩⟨0̃| = (λ_0 / q^d) J`, and compares with the Fourier route.
pub fn dense_oracle_check(spec: &WalkSpec, t: f64) -> Result<DenseCheck> {
    let space = spec.space();
    let n = space.size();
    if n > 4096 {
        return Err(Error::ResourceCap(format!("dense walk oracle with {n} points")));
    }
    let sphere = space.sphere_points(space.ctx().one());
    let mut a = DMatrix::<f64>::zeros(n, n);
    for x in 0..n {
        for &s in &sphere {
            a[(space.add(x, s), x)] += 1.0;
        }
    }
    let shift = spec.lambda0() / n as f64;
    a.apply(|v| *v -= shift);
    let eig = SymmetricEigen::new(a.clone());
    let vecs = &eig.eigenvectors;
    let mut generator_error: f64 = 0.0;
    let mut evolution_error: f64 = 0.0;
    for x in 0..n {
        let e = StateVector::basis(space, x);
        let col = spec.apply_generator(&e);
        let walked = walk_evolve(&e, spec, t);
        for y in 0..n {
            generator_error = generator_error.max((col.amps()[y] - Complex64::new(a[(y, x)], 0.0)).norm());
            let mut dense = Complex64::new(0.0, 0.0);
            for j in 0..n {
                dense += Complex64::from_polar(1.0, -eig.eigenvalues[j] * t) * (vecs[(y, j)] * vecs[(x, j)]);
            }
            evolution_error = evolution_error.max((walked.amps()[y] - dense).norm());
        }
    }
    Ok(DenseCheck { generator_error, evolution_error })
}

/// A candidate flat with the samples on it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatHypothesis {
    pub flat: Flat,
    /// Samples on the flat, counted with multiplicity.
    pub support: u64,
    /// Distinct sample points on the flat.
    pub distinct: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reconstruction {
    Found(FlatHypothesis),
    NotFound,
}

/// Distinct sample points with multiplicities and coordinates.
struct SampleSet {
    points: Vec<usize>,
    weights: Vec<u64>,
    coords: Vec<Vec<Elem>>,
}

impl SampleSet {
    fn new(space: &Space, samples: &[usize]) -> Self {
        let mut m: BTreeMap<usize, u64> = BTreeMap::new();
        for &x in samples {
            *m.entry(x).or_insert(0) += 1;
        }
        let points: Vec<usize> = m.keys().copied().collect();
        let weights = m.values().copied().collect();
        let coords = points.iter().map(|&x| space.coords(x)).collect();
        SampleSet { points, weights, coords }
    }

    fn score(&self, space: &Space, flat: &Flat) -> FlatHypothesis {
        let ctx = space.ctx();
        let eqs = flat.equations(space);
        let (mut support, mut distinct) = (0u64, 0usize);
        for (c, &w) in self.coords.iter().zip(&self.weights) {
            let on = eqs.iter().all(|(a, rhs)| {
                a.iter().zip(c).fold(Elem::ZERO, |acc, (&ai, &xi)| ctx.add(acc, ctx.mul(ai, xi))) == *rhs
            });
            if on {
                support += w;
                distinct += 1;
            }
        }
        FlatHypothesis { flat: flat.clone(), support, distinct }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Next `k`-combination of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn better(a: &FlatHypothesis, b: &FlatHypothesis) -> bool {
    a.support > b.support || (a.support == b.support && a.flat < b.flat)
}

/// Exhaustive search over `(dim+1)`-subsets of the distinct sample points
/// for the `dim`-flat with the most samples. Succeeds when that flat holds
/// at least `4(dim+1)` samples; ties go to the smaller canonical form.
pub fn reconstruct_flat(space: &Space, samples: &[usize], dim: usize) -> Result<Reconstruction> {
    if samples.is_empty() {
        return Ok(Reconstruction::NotFound);
    }
    let need = 4 * (dim as u64 + 1);
    let set = SampleSet::new(space, samples);
    let best = if dim >= space.d() {
        Some(set.score(space, &Flat::ambient(space)))
    } else if dim == 0 {
        let i = (0..set.points.len()).max_by(|&i, &j| set.weights[i].cmp(&set.weights[j]).then(j.cmp(&i)));
        i.map(|i| FlatHypothesis { flat: Flat::point(set.points[i]), support: set.weights[i], distinct: 1 })
    } else {
        let n = set.points.len();
        let k = dim + 1;
        let count = binomial(n, k);
        if count > MAX_CANDIDATE_SUBSETS {
            return Err(Error::ResourceCap(format!(
                "{count} candidate subsets for a {dim}-flat exceed {MAX_CANDIDATE_SUBSETS}"
            )));
        }
        let mut flats: HashSet<Flat> = HashSet::new();
        if n >= k {
            let mut comb: Vec<usize> = (0..k).collect();
            let mut pts = vec![0usize; k];
            loop {
                for (slot, &i) in pts.iter_mut().zip(&comb) {
                    *slot = set.points[i];
                }
                let f = Flat::affine_span(space, &pts)?;
                if f.dim() == dim {
                    flats.insert(f);
                }
                if !next_combination(&mut comb, n) {
                    break;
                }
            }
        }
        let mut best: Option<FlatHypothesis> = None;
        for f in &flats {
            let h = set.score(space, f);
            if best.as_ref().is_none_or(|b| better(&h, b)) {
                best = Some(h);
            }
        }
        best
    };
    Ok(match best {
        Some(h) if h.support >= need => Reconstruction::Found(h),
        _ => Reconstruction::NotFound,
    })
}

/// Best flat one dimension up spanned by `flat` and a sample point off it.
fn best_extension(space: &Space, set: &SampleSet, flat: &Flat) -> Option<FlatHypothesis> {
    let mut seen: HashSet<Flat> = HashSet::new();
    let mut best: Option<FlatHypothesis> = None;
    for &x in &set.points {
        if flat.contains(space, x) {
            continue;
        }
        let e = flat.join(space, x);
        if !seen.insert(e.clone()) {
            continue;
        }
        let h = set.score(space, &e);
        if best.as_ref().is_none_or(|b| better(&h, b)) {
            best = Some(h);
        }
    }
    best
}

/// Dimension escalation: for `D = 0, 1, ..`, take the reconstructed
/// `D`-flat and accept it unless some `(D+1)`-flat through it holds at least
/// twice as many samples (a lower-dimensional piece of a larger flat keeps
/// only about a `1/q` share of it).
pub fn reconstruct_with_escalation(space: &Space, samples: &[usize]) -> Result<Option<(FlatHypothesis, Vec<usize>)>> {
    let set = SampleSet::new(space, samples);
    let mut tried = Vec::new();
    for dim in 0..=space.d() {
        tried.push(dim);
        let Reconstruction::Found(h) = reconstruct_flat(space, samples, dim)? else {
            continue;
        };
        if dim == space.d() {
            return Ok(Some((h, tried)));
        }
        match best_extension(space, &set, &h.flat) {
            Some(e) if e.support >= 2 * h.support => continue,
            _ => return Ok(Some((h, tried))),
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HfcConfig {
    pub shots: usize,
    /// Walk time as a multiple of `1/√(q^{d-1} ln q)`.
    pub t_factor: f64,
}

impl Default for HfcConfig {
    fn default() -> Self {
        HfcConfig { shots: 400, t_factor: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointFrequency {
    pub point: String,
    pub count: u64,
    pub frequency: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HfcReport {
    pub q: u32,
    pub d: usize,
    pub t: f64,
    pub shots: usize,
    pub secret: FlatRecord,
    pub recovered: Option<FlatRecord>,
    pub recovered_dim: Option<usize>,
    pub support: u64,
    pub dims_tried: Vec<usize>,
    pub success: bool,
    /// Empirical frequency of every sampled point, most frequent first.
    pub points: Vec<PointFrequency>,
}

fn frequencies(space: &Space, samples: &[usize]) -> Vec<PointFrequency> {
    let mut m: BTreeMap<usize, u64> = BTreeMap::new();
    for &x in samples {
        *m.entry(x).or_insert(0) += 1;
    }
    let mut v: Vec<(usize, u64)> = m.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    v.into_iter()
        .map(|(x, c)| PointFrequency {
            point: space.format_point(x),
            count: c,
            frequency: c as f64 / samples.len().max(1) as f64,
        })
        .collect()
}

fn check_dimension(space: &Space) -> Result<()> {
    if space.d() > 5 {
        return Err(Error::InvalidInput(format!("d = {} exceeds 5", space.d())));
    }
    Ok(())
}

/// Sample the walked `ρ_H` for a secret flat and reconstruct it.
pub fn hfc_end_to_end(
    space: &Space,
    secret: &Flat,
    spec: &WalkSpec,
    config: &HfcConfig,
    rng: &mut ChaCha8Rng,
) -> Result<HfcReport> {
    check_dimension(space)?;
    let t = config.t_factor * spec.default_time();
    let sampler = WalkSampler::new(space, secret, &base_output_distribution(spec, t)?)?;
    let samples: Vec<usize> = (0..config.shots).map(|_| sampler.sample(rng)).collect();
    report_from_samples(space, secret, t, &samples)
}

fn report_from_samples(space: &Space, secret: &Flat, t: f64, samples: &[usize]) -> Result<HfcReport> {
    let found = reconstruct_with_escalation(space, samples)?;
    let (recovered, support, dims_tried) = match found {
        Some((h, tried)) => (Some(h.flat), h.support, tried),
        None => (None, 0, (0..=space.d()).collect()),
    };
    Ok(HfcReport {
        q: space.q(),
        d: space.d(),
        t,
        shots: samples.len(),
        secret: secret.record(space),
        recovered_dim: recovered.as_ref().map(Flat::dim),
        success: recovered.as_ref() == Some(secret),
        recovered: recovered.map(|f| f.record(space)),
        support,
        dims_tried,
        points: frequencies(space, samples),
    })
}

/// A uniformly random flat of the given dimension.
pub fn random_flat(space: &Space, dim: usize, rng: &mut ChaCha8Rng) -> Result<Flat> {
    if dim > space.d() {
        return Err(Error::InvalidInput(format!("flat dimension {dim} exceeds {}", space.d())));
    }
    let base = rng.random_range(0..space.size());
    loop {
        let dirs: Vec<usize> = (0..dim).map(|_| rng.random_range(0..space.size())).collect();
        let f = Flat::from_parts(space, base, &dirs);
        if f.dim() == dim {
            return Ok(f);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HfcTrialStats {
    pub q: u32,
    pub d: usize,
    pub flat_dim: usize,
    pub shots: usize,
    pub trials: usize,
    pub success: WilsonInterval,
    /// Runs whose search at the true dimension returned a flat other than
    /// the secret.
    pub wrong_flat_acceptances: u64,
}

/// Monte Carlo over random secrets; trial `i` uses stream `i`.
pub fn hfc_trials(space: &Space, flat_dim: usize, config: &HfcConfig, trials: usize, seed: u64) -> Result<HfcTrialStats> {
    check_dimension(space)?;
    let spec = WalkSpec::build(space);
    let t = config.t_factor * spec.default_time();
    let base = base_output_distribution(&spec, t)?;
    let domain = format!("hfc/{}/{}/{}/{}", space.q(), space.d(), flat_dim, config.shots);
    let outcomes: Vec<(bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<(bool, bool)> {
            let mut rng = stream(seed, &domain, i as u64);
            let secret = random_flat(space, flat_dim, &mut rng)?;
            let sampler = WalkSampler::new(space, &secret, &base)?;
            let samples: Vec<usize> = (0..config.shots).map(|_| sampler.sample(&mut rng)).collect();
            let report = report_from_samples(space, &secret, t, &samples)?;
            let wrong = match reconstruct_flat(space, &samples, flat_dim)? {
                Reconstruction::Found(h) => h.flat != secret,
                Reconstruction::NotFound => false,
            };
            Ok((report.success, wrong))
        })
        .collect::<Result<_>>()?;
    let ok = outcomes.iter().filter(|o| o.0).count() as u64;
    Ok(HfcTrialStats {
        q: space.q(),
        d: space.d(),
        flat_dim,
        shots: config.shots,
        trials,
        success: wilson(ok, trials as u64),
        wrong_flat_acceptances: outcomes.iter().filter(|o| o.1).count() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_field::build_ctx;
    use crate::geometry::sphere_fourier_brute;

    fn space(p: u32, d: usize) -> Space {
        Space::new(build_ctx(p, 1).unwrap(), d).unwrap()
    }

    fn line(space: &Space, base: &str, dir: &str) -> Flat {
        Flat::from_parts(space, space.parse_point(base).unwrap(), &[space.parse_point(dir).unwrap()])
    }

    #[test]
    fn eigenvalues_match_sphere_sums() {
        for (p, d) in [(3, 2), (5, 3), (7, 3), (5, 2)] {
            let sp = space(p, d);
            let spec = WalkSpec::build(&sp);
            for k in 1..sp.size() {
                let b = sphere_fourier_brute(&sp, Elem(1), k);
                assert!((b.re - spec.eigenvalue(k)).abs() < 1e-9);
                assert!(b.im.abs() < 1e-9);
            }
            assert!(spec.max_imaginary() < 1e-9);
            assert!(spec.spectral_norm() <= spec.weil_bound() + 1e-9);
        }
        assert_eq!(WalkSpec::build(&space(7, 3)).lambda0(), 42.0);
    }

    #[test]
    fn walk_is_unitary_and_trivial_at_zero_time() {
        let sp = space(7, 3);
        let spec = WalkSpec::build(&sp);
        let mut rng = stream(3, "test", 0);
        for _ in 0..20 {
            let amps: Vec<Complex64> =
                (0..sp.size()).map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
            let n: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            let v = StateVector::from_amps(&sp, amps.into_iter().map(|a| a / n).collect()).unwrap();
            let w = walk_evolve(&v, &spec, spec.default_time());
            assert!((w.norm_sqr() - 1.0).abs() < 1e-9);
            let same = walk_evolve(&v, &spec, 0.0);
            assert!(v.amps().iter().zip(same.amps()).all(|(a, b)| (a - b).norm() < 1e-12));
        }
    }

    #[test]
    fn dense_matrix_oracle() {
        let spec = WalkSpec::build(&space(3, 2));
        let c = dense_oracle_check(&spec, 0.7).unwrap();
        assert!(c.generator_error < 1e-8 && c.evolution_error < 1e-8, "{c:?}");
    }

    #[test]
    fn sphere_state_overlaps() {
        let sp = space(5, 3);
        let one = Elem(1);
        let s0 = prepare_sphere_state(&sp, 0, one).unwrap();
        assert!((s0.norm_sqr() - 1.0).abs() < 1e-12);
        let sphere = sp.sphere_points(one);
        let a = 1.0 / (sphere.len() as f64).sqrt();
        assert!(sphere.iter().all(|&x| (s0.amps()[x].re - a).abs() < 1e-12));
        for h in [1usize, 7, 31] {
            let sh = prepare_sphere_state(&sp, h, one).unwrap();
            let shifted: Vec<usize> = sphere.iter().map(|&s| sp.add(s, h)).collect();
            let common = sphere.iter().filter(|x| shifted.contains(x)).count();
            assert!((s0.inner(&sh).re - common as f64 / sphere.len() as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn evolved_spheres_are_spherically_symmetric() {
        let sp = space(5, 3);
        let spec = WalkSpec::build(&sp);
        for r in sp.ctx().elements() {
            assert!(symmetry_spread(&spec, r, spec.default_time()).unwrap() < 1e-12);
            assert!(symmetry_spread(&spec, r, 3.0).unwrap() < 1e-12);
        }
    }

    #[test]
    fn per_shot_measurement_matches_translated_distribution() {
        let sp = space(5, 3);
        let spec = WalkSpec::build(&sp);
        let t = spec.default_time();
        let flat = line(&sp, "1,0,2", "0,1,1");
        let base = base_output_distribution(&spec, t).unwrap();
        let mut rng = stream(7, "test", 0);
        for _ in 0..5 {
            let (h, v) = prepare_rho_h_sample(&sp, &flat, &mut rng).unwrap();
            let p = walk_evolve(&v, &spec, t).probabilities();
            for z in 0..sp.size() {
                assert!((p[sp.add(h, z)] - base[z]).abs() < 1e-12);
            }
        }
        let exact = output_distribution(&sp, &flat, &spec, t).unwrap();
        let shots = measure_walked_state(&sp, &flat, &spec, t, &mut rng, 20_000).unwrap();
        let mut counts = vec![0u64; sp.size()];
        for x in shots {
            counts[x] += 1;
        }
        assert!(crate::stats::chi_square_gof(&counts, &exact).p_value > 0.001);
    }

    #[test]
    fn lemma_bands_at_q11() {
        let sp = space(11, 3);
        let spec = WalkSpec::build(&sp);
        let flat = line(&sp, "2,3,4", "1,5,7");
        let b = walk_bands(&sp, &flat, &spec, 1.0).unwrap();
        assert!((0.5..=1.5).contains(&b.on_flat_ratio), "{b:?}");
        assert!(b.max_off_flat_scaled <= 10.0, "{b:?}");
        assert!((0.5..=1.5).contains(&b.center_ratio), "{b:?}");
    }

    #[test]
    fn reconstruction_examples() {
        let sp = space(11, 3);
        let x = sp.parse_point("3,1,4").unwrap();
        match reconstruct_flat(&sp, &[x; 6], 0).unwrap() {
            Reconstruction::Found(h) => assert_eq!(h.flat, Flat::point(x)),
            Reconstruction::NotFound => panic!("point not found"),
        }
        let l = line(&sp, "1,2,3", "0,1,5");
        let mut samples = l.points(&sp);
        samples.push(sp.parse_point("9,9,9").unwrap());
        match reconstruct_flat(&sp, &samples, 1).unwrap() {
            Reconstruction::Found(h) => {
                assert_eq!(h.flat, l);
                assert_eq!(h.support, 11);
            }
            Reconstruction::NotFound => panic!("line not found"),
        }
        let scattered: Vec<usize> = (0..12).map(|i| i * 97 + 5).collect();
        assert_eq!(reconstruct_flat(&sp, &scattered, 0).unwrap(), Reconstruction::NotFound);
        assert_eq!(reconstruct_flat(&sp, &scattered, 1).unwrap(), Reconstruction::NotFound);
    }

    #[test]
    fn reconstruction_caps_candidate_subsets() {
        let sp = space(11, 3);
        let samples: Vec<usize> = (0..sp.size()).collect();
        assert!(matches!(reconstruct_flat(&sp, &samples, 2), Err(Error::ResourceCap(_))));
    }

    #[test]
    fn escalation_recovers_point_line_and_ambient() {
        let sp = space(7, 3);
        let spec = WalkSpec::build(&sp);
        let mut rng = stream(1, "test", 0);
        let pt = Flat::point(sp.parse_point("1,2,3").unwrap());
        let rep = hfc_end_to_end(&sp, &pt, &spec, &HfcConfig { shots: 200, t_factor: 1.0 }, &mut rng).unwrap();
        assert!(rep.success, "{:?}", rep.recovered);
        let amb = Flat::ambient(&sp);
        let rep = hfc_end_to_end(&sp, &amb, &spec, &HfcConfig { shots: 200, t_factor: 1.0 }, &mut rng).unwrap();
        assert!(rep.success, "{:?}", rep.recovered);
        let sp = space(11, 3);
        let spec = WalkSpec::build(&sp);
        let l = line(&sp, "1,2,3", "1,0,4");
        let rep = hfc_end_to_end(&sp, &l, &spec, &HfcConfig::default(), &mut rng).unwrap();
        assert!(rep.success, "{:?}", rep.recovered);
        assert_eq!(rep.points.iter().map(|p| p.count).sum::<u64>(), 400);
    }

    #[test]
    fn trials_are_deterministic() {
        let sp = space(5, 3);
        let cfg = HfcConfig { shots: 150, t_factor: 1.0 };
        let a = hfc_trials(&sp, 0, &cfg, 8, 42).unwrap();
        let b = hfc_trials(&sp, 0, &cfg, 8, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn combination_helpers() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(2, 3), 0);
        let mut c = vec![0, 1];
        let mut n = 1;
        while next_combination(&mut c, 4) {
            n += 1;
        }
        assert_eq!(n, 6);
    }
}
