//! Named checks over every module, at a fast (q ≤ 7) or full grid.
//!
//! Each check returns a JSON detail payload; the payload of a whole run
//! (wall-clock excluded) depends only on the level and the seed.

use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::char_sums::{kloosterman, salie, CharSpec};
use crate::error::{Error, Result};
use crate::finite_field::{Elem, Field, FieldCtx};
use crate::geometry::{sphere_fourier_brute, sphere_fourier_closed, sphere_size_formula, Flat, Space, StateVector};
use crate::hidden_flat::{
    dense_oracle_check, hfc_trials, random_flat, symmetry_spread, walk_bands, walk_evolve, HfcConfig, WalkSpec,
};
use crate::hidden_polynomial::{
    all_polynomials, auto_comb1, auto_comb2, bound_comb1, bound_comb2, dense_state, fidelity_from_profile,
    intersections, psd_sqrt, random_polynomial_upto, typicality_census, HiddenPolynomial, LevelSetProfile,
};
use crate::hidden_radius::{classifier_success, cosine_chain, min_pairwise_tv, pointwise_brute, radius_distribution};
use crate::rng::stream;
use crate::shifted_subset_oracle::ShiftedSubsetInstance;
use crate::stats::chi_square_gof;

pub const SALIE_TOL_PER_SQRT_Q: f64 = 1e-9;
pub const SPHERE_FOURIER_TOL_PER_Q: f64 = 1e-8;
pub const DISTRIBUTION_TOL: f64 = 1e-9;
pub const CLASSIFIER_MIN_SUCCESS: f64 = 0.9;
pub const CLASSIFIER_REPS: usize = 20;
pub const TV_MISMATCHED_MIN: f64 = 0.9;
pub const RESCALING_TOL: f64 = 1e-12;
pub const CHAIN_TOL: f64 = 1e-9;
pub const UNITARITY_TOL: f64 = 1e-9;
pub const DENSE_WALK_TOL: f64 = 1e-8;
pub const SYMMETRY_TOL: f64 = 1e-12;
pub const ON_FLAT_BAND: (f64, f64) = (0.5, 1.5);
pub const OFF_FLAT_SCALED_MAX: f64 = 10.0;
pub const HFC_MIN_SUCCESS: f64 = 0.9;
pub const FIDELITY_TOL: f64 = 1e-8;
pub const TRANSVERSAL_TOL: f64 = 1e-12;
pub const BOUND_SLACK: f64 = 1e-9;
pub const CENSUS_MAX_C: f64 = 20.0;
pub const CHI_SQUARE_ALPHA: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Fast,
    Full,
}

impl Level {
    fn full(self) -> bool {
        self == Level::Full
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub id: String,
    pub name: String,
    pub passed: bool,
    pub detail: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckTiming {
    pub id: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub level: Level,
    pub seed: u64,
    pub threads: usize,
    pub checks: Vec<CheckOutcome>,
    pub timings: Vec<CheckTiming>,
}

impl VerifyReport {
    /// Canonical JSON of everything except thread count and wall-clock.
    pub fn payload(&self) -> String {
        serde_json::to_string(&json!({ "level": self.level, "seed": self.seed, "checks": self.checks }))
            .expect("serializable")
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, id: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.id == id)
    }
}

type CheckFn = fn(Level, u64) -> Result<(bool, Value)>;

/// `(id, name, check)` for every check except determinism.
pub const CHECKS: [(&str, &str, CheckFn); 12] = [
    ("c01", "sphere sizes", check_sphere_sizes),
    ("c02", "salie closed form", check_salie),
    ("c03", "sphere fourier transform", check_sphere_fourier),
    ("c04", "radius distribution", check_radius_distribution),
    ("c05", "chi(r) classifier", check_classifier),
    ("c06", "total variation", check_total_variation),
    ("c07", "walk simulator", check_walk),
    ("c08", "hidden flat end to end", check_hidden_flat),
    ("c09", "fidelity engine", check_fidelity),
    ("c10", "fidelity bounds", check_bounds),
    ("c11", "typicality census", check_census),
    ("c12", "oracle round trips", check_oracle),
];

pub const DETERMINISM_ID: &str = "c13";

fn field(q: u64) -> Result<Field> {
    Ok(Arc::new(FieldCtx::from_order(q)?))
}

fn space(q: u64, d: usize) -> Result<Space> {
    Space::new(field(q)?, d)
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::ResourceCap(format!("thread pool: {e}")))
}

/// Run the selected checks (all when `only` is empty) on a pool of
/// `threads` workers.
pub fn run_checks(level: Level, seed: u64, threads: usize, only: &[&str]) -> Result<VerifyReport> {
    let pool = pool(threads)?;
    let mut checks = Vec::new();
    let mut timings = Vec::new();
    for (id, name, f) in CHECKS {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let (passed, detail) = match pool.install(|| f(level, seed)) {
            Ok(r) => r,
            Err(e) => (false, json!({ "error": e.to_string() })),
        };
        timings.push(CheckTiming { id: id.into(), seconds: start.elapsed().as_secs_f64() });
        checks.push(CheckOutcome { id: id.into(), name: name.into(), passed, detail });
    }
    Ok(VerifyReport { level, seed, threads, checks, timings })
}

/// Compare two runs of the same checks at different thread counts.
pub fn determinism_outcome(a: &VerifyReport, b: &VerifyReport) -> CheckOutcome {
    let (pa, pb) = (a.payload(), b.payload());
    let first_difference = a
        .checks
        .iter()
        .zip(&b.checks)
        .find(|(x, y)| x != y)
        .map(|(x, _)| x.id.clone());
    CheckOutcome {
        id: DETERMINISM_ID.into(),
        name: "determinism".into(),
        passed: pa == pb,
        detail: json!({
            "threads": [a.threads, b.threads],
            "payload_bytes": [pa.len(), pb.len()],
            "first_difference": first_difference,
        }),
    }
}

/// All checks at `threads`, plus the determinism check that reruns them on
/// one thread and on eight.
pub fn run_suite(level: Level, seed: u64, threads: usize) -> Result<VerifyReport> {
    let mut report = run_checks(level, seed, threads, &[])?;
    let start = Instant::now();
    let (one, eight) = match threads {
        1 => (report.clone(), run_checks(level, seed, 8, &[])?),
        8 => (run_checks(level, seed, 1, &[])?, report.clone()),
        _ => (run_checks(level, seed, 1, &[])?, run_checks(level, seed, 8, &[])?),
    };
    report.checks.push(determinism_outcome(&one, &eight));
    report.timings.push(CheckTiming { id: DETERMINISM_ID.into(), seconds: start.elapsed().as_secs_f64() });
    Ok(report)
}

pub fn check_sphere_sizes(level: Level, _seed: u64) -> Result<(bool, Value)> {
    let (qs, ds): (&[u64], &[usize]) =
        if level.full() { (&[3, 5, 7, 9, 11], &[2, 3, 4, 5]) } else { (&[3, 5, 7], &[2, 3, 4]) };
    let mut cases = 0u64;
    let mut mismatches = Vec::new();
    for &q in qs {
        for &d in ds {
            let sp = space(q, d)?;
            let sizes = sp.level_sizes();
            for r in sp.ctx().elements() {
                cases += 1;
                let formula = sphere_size_formula(sp.ctx(), d, r);
                if formula != sizes[r.index()] {
                    mismatches.push(json!({ "q": q, "d": d, "r": r.0, "formula": formula, "count": sizes[r.index()] }));
                }
            }
        }
    }
    Ok((mismatches.is_empty(), json!({ "cases": cases, "mismatches": mismatches })))
}

/// Salié closed form (shifted by `perturb`) against direct summation.
pub fn salie_agreement(qs: &[u64], perturb: f64) -> Result<(bool, Value)> {
    let mut per_q = Vec::new();
    let mut ok = true;
    for &q in qs {
        let ctx = field(q)?;
        let tol = SALIE_TOL_PER_SQRT_Q * (q as f64).sqrt();
        let mut max_err: f64 = 0.0;
        for a in ctx.elements() {
            for b in ctx.elements() {
                let closed = salie(&ctx, a, b).value + Complex64::new(perturb, 0.0);
                let brute = kloosterman(&ctx, a, b, CharSpec::Quadratic).value;
                max_err = max_err.max((closed - brute).norm());
            }
        }
        ok &= max_err <= tol;
        per_q.push(json!({ "q": q, "max_error": max_err, "tolerance": tol }));
    }
    Ok((ok, json!({ "fields": per_q })))
}

pub fn check_salie(level: Level, _seed: u64) -> Result<(bool, Value)> {
    salie_agreement(if level.full() { &[3, 5, 7, 9, 13, 25] } else { &[3, 5, 7] }, 0.0)
}

pub fn check_sphere_fourier(level: Level, _seed: u64) -> Result<(bool, Value)> {
    let qs: &[u64] = if level.full() { &[3, 5, 7, 9] } else { &[3, 5, 7] };
    let mut per_q = Vec::new();
    let mut ok = true;
    for &q in qs {
        let sp = space(q, 3)?;
        let tol = SPHERE_FOURIER_TOL_PER_Q * q as f64;
        let radii: Vec<Elem> = sp.ctx().elements().collect();
        let errs = radii
            .par_iter()
            .map(|&r| -> Result<f64> {
                let mut e: f64 = 0.0;
                for k in 1..sp.size() {
                    let closed = sphere_fourier_closed(&sp, r, k)?.value;
                    e = e.max((closed - sphere_fourier_brute(&sp, r, k)).norm());
                }
                Ok(e)
            })
            .collect::<Result<Vec<f64>>>()?;
        let max_err = errs.into_iter().fold(0.0, f64::max);
        ok &= max_err <= tol;
        per_q.push(json!({ "q": q, "d": 3, "max_error": max_err, "tolerance": tol }));
    }
    Ok((ok, json!({ "fields": per_q })))
}

pub fn check_radius_distribution(level: Level, _seed: u64) -> Result<(bool, Value)> {
    let qs: &[u64] = if level.full() { &[7, 9, 11] } else { &[5, 7] };
    let mut per_q = Vec::new();
    let mut ok = true;
    for &q in qs {
        let sp = space(q, 3)?;
        let radii: Vec<Elem> = sp.ctx().elements().collect();
        let res = radii
            .par_iter()
            .map(|&r| -> Result<(f64, f64)> {
                let dist = radius_distribution(&sp, r)?;
                let pmf = dist.pmf(&sp);
                let brute = pointwise_brute(&sp, r)?;
                let err = pmf.iter().zip(&brute).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                Ok((err, (pmf.iter().sum::<f64>() - 1.0).abs()))
            })
            .collect::<Result<Vec<_>>>()?;
        let max_err = res.iter().map(|r| r.0).fold(0.0, f64::max);
        let max_mass_err = res.iter().map(|r| r.1).fold(0.0, f64::max);
        ok &= max_err <= DISTRIBUTION_TOL && max_mass_err <= DISTRIBUTION_TOL;
        per_q.push(json!({ "q": q, "max_pointwise_error": max_err, "max_mass_error": max_mass_err }));
    }
    Ok((ok, json!({ "tolerance": DISTRIBUTION_TOL, "fields": per_q })))
}

pub fn check_classifier(level: Level, seed: u64) -> Result<(bool, Value)> {
    let (qs, trials): (&[u64], usize) = if level.full() { (&[7, 9, 11], 1000) } else { (&[7], 200) };
    let mut rows = Vec::new();
    let mut ok = true;
    let mut worst: f64 = 1.0;
    for &q in qs {
        let sp = space(q, 3)?;
        for r in sp.ctx().elements() {
            let s = classifier_success(&sp, r, CLASSIFIER_REPS, trials, seed)?;
            ok &= s.success.estimate >= CLASSIFIER_MIN_SUCCESS;
            worst = worst.min(s.success.estimate);
            rows.push(json!({ "q": q, "stats": s }));
        }
    }
    Ok((ok, json!({ "reps": CLASSIFIER_REPS, "trials": trials, "min_success": worst, "radii": rows })))
}

pub fn check_total_variation(level: Level, _seed: u64) -> Result<(bool, Value)> {
    let qs: &[u64] = if level.full() { &[7, 11, 13] } else { &[5, 7] };
    let mut rows = Vec::new();
    let (mut a, mut b, mut c) = (true, true, true);
    for &q in qs {
        let t = min_pairwise_tv(&space(q, 3)?)?;
        a &= t.max_diagonal == 0.0;
        b &= t.min_chi_mismatched >= TV_MISMATCHED_MIN;
        c &= t.min_distinct > 0.0 && t.rescaling_error <= RESCALING_TOL;
        rows.push(json!({
            "q": q,
            "max_diagonal": t.max_diagonal,
            "min_distinct": t.min_distinct,
            "min_chi_equal": t.min_chi_equal,
            "min_chi_mismatched": t.min_chi_mismatched,
            "rescaling_error": t.rescaling_error,
        }));
    }
    let chain_q: u64 = if level.full() { 13 } else { 7 };
    let chain_field = field(chain_q)?;
    let chain = cosine_chain(&chain_field);
    let d = (chain.final_value - 0.5).abs() <= CHAIN_TOL;
    Ok((
        a && b && c && d,
        json!({
            "diagonal_zero": a,
            "mismatched_at_least_threshold": b,
            "threshold": TV_MISMATCHED_MIN,
            "distinct_positive_and_rescaling": c,
            "chain_final_half": d,
            "tables": rows,
            "chain": chain,
        }),
    ))
}

pub fn check_walk(level: Level, seed: u64) -> Result<(bool, Value)> {
    let mut rng = stream(seed, "verify/walk", 0);
    // (a) unitarity
    let mut unitarity: f64 = 0.0;
    for &(q, d) in if level.full() { &[(5u64, 3usize), (11, 3)][..] } else { &[(5, 3)][..] } {
        let sp = space(q, d)?;
        let spec = WalkSpec::build(&sp);
        for _ in 0..10 {
            let amps: Vec<Complex64> = (0..sp.size())
                .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            let v = StateVector::from_amps(&sp, amps.into_iter().map(|a| a / n).collect())?;
            let t = rng.random::<f64>() * 4.0 * spec.default_time();
            unitarity = unitarity.max((walk_evolve(&v, &spec, t).norm_sqr() - 1.0).abs());
        }
    }
    // (b) dense matrix oracle
    let dense = dense_oracle_check(&WalkSpec::build(&space(3, 2)?), 0.7)?;
    // (c) spherical symmetry
    let sp5 = space(5, 3)?;
    let spec5 = WalkSpec::build(&sp5);
    let mut spread: f64 = 0.0;
    for r in sp5.ctx().elements() {
        spread = spread.max(symmetry_spread(&spec5, r, spec5.default_time())?);
    }
    // (d) lemma bands on a line; the bands are asymptotic and q = 7 is
    // still outside them, so both levels use q = 11
    let q = 11;
    let sp = space(q, 3)?;
    let line = random_flat(&sp, 1, &mut rng)?;
    let bands = walk_bands(&sp, &line, &WalkSpec::build(&sp), 1.0)?;
    let a = unitarity <= UNITARITY_TOL;
    let b = dense.generator_error <= DENSE_WALK_TOL && dense.evolution_error <= DENSE_WALK_TOL;
    let c = spread <= SYMMETRY_TOL;
    let d = (ON_FLAT_BAND.0..=ON_FLAT_BAND.1).contains(&bands.on_flat_ratio)
        && bands.max_off_flat_scaled <= OFF_FLAT_SCALED_MAX;
    Ok((
        a && b && c && d,
        json!({
            "unitarity_error": unitarity,
            "dense": dense,
            "symmetry_spread": spread,
            "bands": { "q": q, "line": line.record(&sp), "report": bands },
            "passed": { "unitarity": a, "dense": b, "symmetry": c, "bands": d },
        }),
    ))
}

pub fn check_hidden_flat(level: Level, seed: u64) -> Result<(bool, Value)> {
    let runs: &[(u64, usize, usize, usize)] =
        if level.full() { &[(7, 0, 200, 100), (11, 1, 400, 100)] } else { &[(5, 0, 200, 20), (7, 1, 300, 20)] };
    let mut ok = true;
    let mut rows = Vec::new();
    for &(q, dim, shots, trials) in runs {
        let s = hfc_trials(&space(q, 3)?, dim, &HfcConfig { shots, t_factor: 1.0 }, trials, seed)?;
        ok &= s.success.estimate >= HFC_MIN_SUCCESS && s.wrong_flat_acceptances == 0;
        rows.push(serde_json::to_value(&s).expect("serializable"));
    }
    Ok((ok, json!({ "runs": rows })))
}

fn profile_from_values(q: usize, a: &[Elem], b: &[Elem]) -> LevelSetProfile {
    let mut counts = vec![0u64; q * q];
    let (mut rows, mut cols) = (vec![0u64; q], vec![0u64; q]);
    for (x, y) in a.iter().zip(b) {
        counts[x.index() * q + y.index()] += 1;
        rows[x.index()] += 1;
        cols[y.index()] += 1;
    }
    LevelSetProfile { q, rows, cols, counts }
}

pub fn check_fidelity(level: Level, seed: u64) -> Result<(bool, Value)> {
    // exhaustive over unordered pairs at q = 3
    let sp3 = space(3, 2)?;
    let polys: Vec<HiddenPolynomial> = all_polynomials(sp3.ctx(), 2, 2)?
        .into_iter()
        .map(|p| HiddenPolynomial::new(&sp3, p))
        .collect::<Result<_>>()?;
    let polys: Vec<HiddenPolynomial> = if level.full() {
        polys
    } else {
        let mut rng = stream(seed, "verify/fidelity/subset", 0);
        (0..60).map(|_| polys[rng.random_range(0..polys.len())].clone()).collect()
    };
    let values: Vec<Vec<Elem>> = polys.iter().map(|h| h.values()).collect();
    let roots = polys.iter().map(|h| Ok(psd_sqrt(&dense_state(h)?))).collect::<Result<Vec<_>>>()?;
    let exhaustive_err = (0..polys.len())
        .into_par_iter()
        .map(|i| {
            (i..polys.len())
                .map(|j| {
                    let nuclear = fidelity_from_profile(&profile_from_values(3, &values[i], &values[j]));
                    let dense: f64 = (&roots[i] * &roots[j]).singular_values().iter().sum();
                    (nuclear - dense).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(0.0, f64::max);
    // random pairs at q = 5
    let sp5 = space(5, 2)?;
    let random_pairs = if level.full() { 200 } else { 40 };
    let random_err = (0..random_pairs)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut rng = stream(seed, "verify/fidelity/q5", i as u64);
            let h = HiddenPolynomial::new(&sp5, random_polynomial_upto(sp5.ctx(), 2, 2, &mut rng))?;
            let h2 = HiddenPolynomial::new(&sp5, random_polynomial_upto(sp5.ctx(), 2, 2, &mut rng))?;
            let nuclear = fidelity_from_profile(&intersections(&h, &h2)?);
            let dense: f64 = (psd_sqrt(&dense_state(&h)?) * psd_sqrt(&dense_state(&h2)?)).singular_values().iter().sum();
            Ok((nuclear - dense).abs())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    // transversal lines
    let mut transversal = Vec::new();
    let mut transversal_ok = true;
    for q in [3u64, 5, 7] {
        let sp = space(q, 2)?;
        let f = fidelity_from_profile(&intersections(
            &HiddenPolynomial::parse(&sp, "x1")?,
            &HiddenPolynomial::parse(&sp, "x2")?,
        )?);
        transversal_ok &= (f - 1.0 / q as f64).abs() <= TRANSVERSAL_TOL;
        transversal.push(json!({ "q": q, "fidelity": f }));
    }
    let ok = exhaustive_err <= FIDELITY_TOL && random_err <= FIDELITY_TOL && transversal_ok;
    Ok((
        ok,
        json!({
            "q3_polynomials": polys.len(),
            "q3_max_error": exhaustive_err,
            "q5_pairs": random_pairs,
            "q5_max_error": random_err,
            "tolerance": FIDELITY_TOL,
            "transversal": transversal,
        }),
    ))
}

#[derive(Default)]
struct BoundTally {
    pairs: u64,
    comb1_held: u64,
    comb2_held: u64,
    comb1_violations: u64,
    comb2_violations: u64,
    worst_comb2: Option<(f64, String)>,
}

impl BoundTally {
    fn add(&mut self, profile: &LevelSetProfile, label: impl FnOnce() -> String) {
        let f2 = fidelity_from_profile(profile).powi(2);
        let c1 = auto_comb1(profile);
        let c2 = auto_comb2(profile);
        self.pairs += 1;
        if c1.hypotheses_hold {
            self.comb1_held += 1;
            if f2 > c1.value + BOUND_SLACK {
                self.comb1_violations += 1;
            }
        }
        if c2.hypotheses_hold {
            self.comb2_held += 1;
            if f2 > c2.value + BOUND_SLACK {
                self.comb2_violations += 1;
                let gap = f2 - c2.value;
                if self.worst_comb2.as_ref().is_none_or(|w| gap > w.0) {
                    self.worst_comb2 = Some((gap, label()));
                }
            }
        }
    }

    fn merge(mut self, o: BoundTally) -> BoundTally {
        self.pairs += o.pairs;
        self.comb1_held += o.comb1_held;
        self.comb2_held += o.comb2_held;
        self.comb1_violations += o.comb1_violations;
        self.comb2_violations += o.comb2_violations;
        self.worst_comb2 = match (self.worst_comb2, o.worst_comb2) {
            (Some(a), Some(b)) => Some(if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a }),
            (a, b) => a.or(b),
        };
        self
    }

    fn json(&self) -> Value {
        json!({
            "pairs": self.pairs,
            "comb1_hypotheses_held": self.comb1_held,
            "comb2_hypotheses_held": self.comb2_held,
            "comb1_violations": self.comb1_violations,
            "comb2_violations": self.comb2_violations,
            "worst_comb2_violation": self.worst_comb2.as_ref().map(|w| json!({ "gap": w.0, "pair": w.1 })),
        })
    }
}

/// Hypothesis flags flip exactly at the measured parameters.
fn hypothesis_probe(profile: &LevelSetProfile) -> bool {
    let q2 = (profile.q * profile.q) as f64;
    let c1 = auto_comb1(profile);
    let c2 = auto_comb2(profile);
    let mut ok = c1.hypotheses_hold && c2.hypotheses_hold;
    let mut p = c1.params.clone();
    p.delta -= 1.0;
    ok &= !bound_comb1(profile, &p).hypotheses_hold;
    if c1.params.beta > 0.0 {
        let mut p = c1.params.clone();
        p.beta -= 0.5 / q2;
        ok &= !bound_comb1(profile, &p).hypotheses_hold;
    }
    let mut p = c2.params.clone();
    p.gamma = p.gamma.map(|g| g + 1.0);
    ok &= !bound_comb2(profile, &p).map(|b| b.hypotheses_hold).unwrap_or(true);
    if c2.params.beta > 0.0 {
        let mut p = c2.params.clone();
        p.beta -= 0.5 / profile.q as f64;
        ok &= !bound_comb2(profile, &p).map(|b| b.hypotheses_hold).unwrap_or(true);
    }
    ok
}

pub fn check_bounds(level: Level, seed: u64) -> Result<(bool, Value)> {
    let sp3 = space(3, 2)?;
    let polys = all_polynomials(sp3.ctx(), 2, 2)?;
    let polys: Vec<_> = if level.full() {
        polys
    } else {
        let mut rng = stream(seed, "verify/bounds/subset", 0);
        (0..80).map(|_| polys[rng.random_range(0..polys.len())].clone()).collect()
    };
    let hs: Vec<HiddenPolynomial> = polys.into_iter().map(|p| HiddenPolynomial::new(&sp3, p)).collect::<Result<_>>()?;
    let values: Vec<Vec<Elem>> = hs.iter().map(|h| h.values()).collect();
    let exhaustive = (0..hs.len())
        .into_par_iter()
        .map(|i| {
            let mut t = BoundTally::default();
            for j in 0..hs.len() {
                t.add(&profile_from_values(3, &values[i], &values[j]), || {
                    format!("q=3: {} / {}", hs[i].format(), hs[j].format())
                });
            }
            t
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(BoundTally::default(), BoundTally::merge);
    let pairs = if level.full() { 500 } else { 60 };
    let mut random = Vec::new();
    let mut probe_ok = true;
    let mut all = exhaustive.comb1_violations == 0 && exhaustive.comb2_violations == 0;
    for q in [5u64, 7] {
        let sp = space(q, 2)?;
        let tallies = (0..pairs)
            .into_par_iter()
            .map(|i| -> Result<(BoundTally, bool)> {
                let mut rng = stream(seed, &format!("verify/bounds/{q}"), i as u64);
                let h = HiddenPolynomial::new(&sp, random_polynomial_upto(sp.ctx(), 2, 3, &mut rng))?;
                let h2 = HiddenPolynomial::new(&sp, random_polynomial_upto(sp.ctx(), 2, 3, &mut rng))?;
                let prof = intersections(&h, &h2)?;
                let mut t = BoundTally::default();
                t.add(&prof, || format!("q={q}: {} / {}", h.format(), h2.format()));
                Ok((t, hypothesis_probe(&prof)))
            })
            .collect::<Result<Vec<_>>>()?;
        probe_ok &= tallies.iter().all(|t| t.1);
        let tally = tallies.into_iter().map(|t| t.0).fold(BoundTally::default(), BoundTally::merge);
        all &= tally.comb1_violations == 0 && tally.comb2_violations == 0;
        random.push(json!({ "q": q, "degree": 3, "tally": tally.json() }));
    }
    Ok((
        all && probe_ok,
        json!({
            "exhaustive_q3": exhaustive.json(),
            "random": random,
            "hypothesis_probe": probe_ok,
            "slack": BOUND_SLACK,
        }),
    ))
}

pub fn check_census(level: Level, seed: u64) -> Result<(bool, Value)> {
    let qs: &[u64] = if level.full() { &[3, 5, 7] } else { &[3, 5] };
    let mut rows = Vec::new();
    let mut c: f64 = 0.0;
    for &q in qs {
        let r = typicality_census(&field(q)?, 2, None, seed)?;
        c = c.max(r.fraction_times_q);
        rows.push(serde_json::to_value(&r).expect("serializable"));
    }
    Ok((c <= CENSUS_MAX_C, json!({ "max_fraction_times_q": c, "bound": CENSUS_MAX_C, "censuses": rows })))
}

pub fn check_oracle(level: Level, seed: u64) -> Result<(bool, Value)> {
    let sp = space(5, 3)?;
    let s = sp.sphere_points(sp.ctx().one());
    let inst = ShiftedSubsetInstance::new(&sp, s.clone(), (0..sp.size()).collect(), seed)?;
    let mut round_trips = 0u64;
    let mut failures = 0u64;
    for &si in &s {
        let st = inst.encrypt_s(si).ok_or_else(|| Error::InvalidInput("s outside S".into()))?;
        for t in 0..sp.size() {
            let tt = inst.encrypt_t(t).ok_or_else(|| Error::InvalidInput("t outside T".into()))?;
            round_trips += 1;
            let back = inst.pi(st, tt).and_then(|x| inst.f(tt).and_then(|y| inst.g(x, y)));
            if back != Some((st, tt)) {
                failures += 1;
            }
        }
    }
    let off_image = inst.g(0, inst.y_size()).is_none();
    let e = sp.parse_point("1,2,3")?;
    let line = Flat::from_parts(&sp, 0, &[e]).points(&sp);
    let mixed = ShiftedSubsetInstance::new(&sp, s, line, seed ^ 1)?;
    let probs = mixed.exact_mixture();
    let draws = if level.full() { 100_000 } else { 20_000 };
    let mut rng = stream(seed, "verify/oracle/sampler", 0);
    let mut counts = vec![0u64; sp.size()];
    for _ in 0..draws {
        counts[mixed.sample(&mut rng).x] += 1;
    }
    let chi = chi_square_gof(&counts, &probs);
    let ok = failures == 0 && off_image && chi.p_value > CHI_SQUARE_ALPHA;
    Ok((
        ok,
        json!({
            "round_trips": round_trips,
            "failures": failures,
            "off_image_empty": off_image,
            "draws": draws,
            "chi_square": chi,
            "alpha": CHI_SQUARE_ALPHA,
        }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn salie_mutation_is_caught() {
        assert!(salie_agreement(&[3, 5], 0.0).unwrap().0);
        assert!(!salie_agreement(&[3, 5], 1e-3).unwrap().0);
    }

    #[test]
    fn fast_checks_pass_and_are_thread_independent() {
        let only = ["c01", "c02", "c04", "c09", "c12"];
        let a = run_checks(Level::Fast, 7, 1, &only).unwrap();
        let b = run_checks(Level::Fast, 7, 3, &only).unwrap();
        assert!(a.all_passed(), "{}", a.payload());
        let d = determinism_outcome(&a, &b);
        assert!(d.passed, "{:?}", d.detail);
        assert_eq!(a.timings.len(), only.len());
    }

    #[test]
    fn determinism_detects_differences() {
        let a = run_checks(Level::Fast, 1, 1, &["c01"]).unwrap();
        let mut b = a.clone();
        b.checks[0].detail = json!({ "cases": 0 });
        assert!(!determinism_outcome(&a, &b).passed);
    }
}
