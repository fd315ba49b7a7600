//! Black boxes hiding shifted subsets `S + t`, `t ∈ T`, of `F_q^d`.
//!
//! Two interfaces share one instance type:
//!
//! * the general oracle `(π, f, g)` with `π(s,t) = τ(t) + σ_t(s)`,
//!   `f: T → Y` injective and `g` inverting the pair `(π, f)`;
//! * the hidden-radius pair `f_1(x, enc s) = enc t`, `f_{-1}(x, enc t) = enc s`
//!   with `t = x - s`.
//!
//! Encryptions, `τ`, `σ_t` and `f` are keyed Feistel permutations with cycle
//! walking. They are deterministic in the seed and make no cryptographic
//! claim. Tokens and `Y` values live in `[0, 2 q^d)`; anything that does not
//! decode to a valid input yields `None` (the symbol ∅).

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::finite_field::Elem;
use crate::geometry::Space;
use crate::rng::{derive_key, mix64};

const FEISTEL_ROUNDS: usize = 6;

/// Keyed permutation of `[0, n)`.
#[derive(Clone, Debug)]
pub struct Prp {
    n: u64,
    half_bits: u32,
    keys: [u64; FEISTEL_ROUNDS],
}

impl Prp {
    pub fn new(n: u64, key: u64) -> Self {
        let bits = if n <= 1 { 2 } else { 64 - (n - 1).leading_zeros() }.max(2);
        let half_bits = bits.div_ceil(2);
        let mut keys = [0u64; FEISTEL_ROUNDS];
        let mut k = key;
        for slot in keys.iter_mut() {
            k = mix64(k);
            *slot = k;
        }
        Prp { n, half_bits, keys }
    }

    pub fn domain(&self) -> u64 {
        self.n
    }

    fn mask(&self) -> u64 {
        (1u64 << self.half_bits) - 1
    }

    fn round(&self, i: usize, half: u64) -> u64 {
        mix64(half ^ self.keys[i]) & self.mask()
    }

    fn feistel(&self, x: u64) -> u64 {
        let (mut l, mut r) = (x >> self.half_bits, x & self.mask());
        for i in 0..FEISTEL_ROUNDS {
            let next = l ^ self.round(i, r);
            l = r;
            r = next;
        }
        (l << self.half_bits) | r
    }

    fn feistel_inv(&self, y: u64) -> u64 {
        let (mut l, mut r) = (y >> self.half_bits, y & self.mask());
        for i in (0..FEISTEL_ROUNDS).rev() {
            let prev = r ^ self.round(i, l);
            r = l;
            l = prev;
        }
        (l << self.half_bits) | r
    }

    /// Image of `x < n`.
    pub fn forward(&self, x: u64) -> u64 {
        debug_assert!(x < self.n);
        let mut y = self.feistel(x);
        while y >= self.n {
            y = self.feistel(y);
        }
        y
    }

    /// Preimage of `y < n`.
    pub fn inverse(&self, y: u64) -> u64 {
        debug_assert!(y < self.n);
        let mut x = self.feistel_inv(y);
        while x >= self.n {
            x = self.feistel_inv(x);
        }
        x
    }
}

/// A seeded shifted-subset black box.
#[derive(Clone, Debug)]
pub struct ShiftedSubsetInstance {
    space: Space,
    s_set: Vec<usize>,
    t_set: Vec<usize>,
    s_cap: usize,
    scramble: bool,
    y_size: u64,
    enc_s: Prp,
    enc_t: Prp,
    f_map: Prp,
    tau: Prp,
    sigma_key: u64,
}

/// One draw of the state-preparation sampler.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    /// Measured point.
    pub x: usize,
    /// The shift `τ(t)` whose translate produced `x`.
    pub shift: usize,
    /// Register values rejected as ∅ before success.
    pub rejections: u64,
}

fn sorted_unique(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}

impl ShiftedSubsetInstance {
    pub fn new(space: &Space, s_set: Vec<usize>, t_set: Vec<usize>, seed: u64) -> Result<Self> {
        let s_set = sorted_unique(s_set);
        let t_set = sorted_unique(t_set);
        if s_set.is_empty() || t_set.is_empty() {
            return Err(Error::InvalidInput("S and T must be nonempty".into()));
        }
        if s_set.iter().chain(&t_set).any(|&x| x >= space.size()) {
            return Err(Error::InvalidInput("point index outside F_q^d".into()));
        }
        let y_size = 2 * space.size() as u64;
        Ok(ShiftedSubsetInstance {
            space: space.clone(),
            s_cap: s_set.len(),
            scramble: true,
            y_size,
            enc_s: Prp::new(y_size, derive_key(seed, "oracle/enc-s", 0)),
            enc_t: Prp::new(y_size, derive_key(seed, "oracle/enc-t", 0)),
            f_map: Prp::new(y_size, derive_key(seed, "oracle/f", 0)),
            tau: Prp::new(t_set.len() as u64, derive_key(seed, "oracle/tau", 0)),
            sigma_key: derive_key(seed, "oracle/sigma", 0),
            s_set,
            t_set,
        })
    }

    /// Hidden-radius instance: `S = S_r`, `T = F_q^d`, and a state-preparation
    /// register sized for the largest sphere.
    pub fn hidden_radius(space: &Space, r: Elem, seed: u64) -> Result<Self> {
        let s_cap = *space.level_sizes().iter().max().expect("q > 0") as usize;
        let mut inst = Self::new(space, space.sphere_points(r), (0..space.size()).collect(), seed)?;
        inst.s_cap = s_cap;
        Ok(inst)
    }

    /// Use `τ = id` and `σ_t = id`; tokens stay encrypted.
    pub fn with_identity_bijections(mut self) -> Self {
        self.scramble = false;
        self
    }

    /// Size of the state-preparation register for `s`; values beyond `|S|`
    /// are ∅.
    pub fn with_s_cap(mut self, cap: usize) -> Result<Self> {
        if cap < self.s_set.len() {
            return Err(Error::InvalidInput(format!("register size {cap} below |S| = {}", self.s_set.len())));
        }
        self.s_cap = cap;
        Ok(self)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn s_set(&self) -> &[usize] {
        &self.s_set
    }

    pub fn t_set(&self) -> &[usize] {
        &self.t_set
    }

    pub fn s_cap(&self) -> usize {
        self.s_cap
    }

    /// `|Y| = 2 q^d`, also the token range.
    pub fn y_size(&self) -> u64 {
        self.y_size
    }

    fn pos(set: &[usize], x: usize) -> Option<usize> {
        set.binary_search(&x).ok()
    }

    pub fn encrypt_s(&self, s: usize) -> Option<u64> {
        Self::pos(&self.s_set, s).map(|_| self.enc_s.forward(s as u64))
    }

    pub fn encrypt_t(&self, t: usize) -> Option<u64> {
        Self::pos(&self.t_set, t).map(|_| self.enc_t.forward(t as u64))
    }

    pub fn decrypt_s(&self, token: u64) -> Option<usize> {
        (token < self.y_size)
            .then(|| self.enc_s.inverse(token) as usize)
            .filter(|&s| s < self.space.size() && Self::pos(&self.s_set, s).is_some())
    }

    pub fn decrypt_t(&self, token: u64) -> Option<usize> {
        (token < self.y_size)
            .then(|| self.enc_t.inverse(token) as usize)
            .filter(|&t| t < self.space.size() && Self::pos(&self.t_set, t).is_some())
    }

    fn tau_of(&self, t: usize) -> usize {
        if !self.scramble {
            return t;
        }
        let i = Self::pos(&self.t_set, t).expect("t in T");
        self.t_set[self.tau.forward(i as u64) as usize]
    }

    fn sigma_prp(&self, t: usize) -> Prp {
        Prp::new(self.s_set.len() as u64, mix64(self.sigma_key ^ mix64(t as u64)))
    }

    fn sigma_of(&self, t: usize, s: usize) -> usize {
        if !self.scramble {
            return s;
        }
        let i = Self::pos(&self.s_set, s).expect("s in S");
        self.s_set[self.sigma_prp(t).forward(i as u64) as usize]
    }

    fn sigma_inv(&self, t: usize, z: usize) -> Option<usize> {
        let i = Self::pos(&self.s_set, z)?;
        if !self.scramble {
            return Some(z);
        }
        Some(self.s_set[self.sigma_prp(t).inverse(i as u64) as usize])
    }

    fn pi_raw(&self, s: usize, t: usize) -> usize {
        self.space.add(self.tau_of(t), self.sigma_of(t, s))
    }

    /// `π(s,t) = τ(t) + σ_t(s)` on encrypted inputs.
    pub fn pi(&self, s_token: u64, t_token: u64) -> Option<usize> {
        let s = self.decrypt_s(s_token)?;
        let t = self.decrypt_t(t_token)?;
        Some(self.pi_raw(s, t))
    }

    /// `f(t)`, an injection `T → Y`.
    pub fn f(&self, t_token: u64) -> Option<u64> {
        self.decrypt_t(t_token).map(|t| self.f_map.forward(t as u64))
    }

    /// The encrypted `(s, t)` with `π(s,t) = x` and `f(t) = y`, if any.
    pub fn g(&self, x: usize, y: u64) -> Option<(u64, u64)> {
        if y >= self.y_size || x >= self.space.size() {
            return None;
        }
        let t = self.f_map.inverse(y) as usize;
        if t >= self.space.size() || Self::pos(&self.t_set, t).is_none() {
            return None;
        }
        let z = self.space.sub(x, self.tau_of(t));
        let s = self.sigma_inv(t, z)?;
        Some((self.enc_s.forward(s as u64), self.enc_t.forward(t as u64)))
    }

    /// `f_1(x, enc s) = enc(x - s)`.
    pub fn f1(&self, x: usize, s_token: u64) -> Option<u64> {
        if x >= self.space.size() {
            return None;
        }
        let s = self.decrypt_s(s_token)?;
        self.encrypt_t(self.space.sub(x, s))
    }

    /// `f_{-1}(x, enc t) = enc(x - t)`.
    pub fn f_minus1(&self, x: usize, t_token: u64) -> Option<u64> {
        if x >= self.space.size() {
            return None;
        }
        let t = self.decrypt_t(t_token)?;
        self.encrypt_s(self.space.sub(x, t))
    }

    /// Computational-basis measurement of `ρ_{S,T}`: the `s` register is
    /// uniform on `[0, s_cap)` with values past `|S|` rejected as ∅, the
    /// shift is uniform on `T`.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Sample {
        let mut rejections = 0u64;
        loop {
            let u = rng.random_range(0..self.s_cap);
            if u >= self.s_set.len() {
                rejections += 1;
                continue;
            }
            let t = self.t_set[rng.random_range(0..self.t_set.len())];
            let s = self.s_set[u];
            return Sample { x: self.pi_raw(s, t), shift: self.tau_of(t), rejections };
        }
    }

    /// Probability of measuring each point under `ρ_{S,T}`.
    pub fn exact_mixture(&self) -> Vec<f64> {
        let mut probs = vec![0.0; self.space.size()];
        let w = 1.0 / (self.s_set.len() as f64 * self.t_set.len() as f64);
        for &t in &self.t_set {
            for &s in &self.s_set {
                probs[self.space.add(t, s)] += w;
            }
        }
        probs
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryKind {
    Pi,
    F,
    G,
    F1,
    Fm1,
    Sample,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub kind: QueryKind,
    pub input: Value,
    pub output: Value,
}

/// Append-only query log with per-kind counters.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OracleTranscript {
    records: Vec<QueryRecord>,
    counts: BTreeMap<QueryKind, u64>,
}

impl OracleTranscript {
    pub fn push(&mut self, kind: QueryKind, input: Value, output: Value) {
        self.records.push(QueryRecord { kind, input, output });
        *self.counts.entry(kind).or_insert(0) += 1;
    }

    pub fn records(&self) -> &[QueryRecord] {
        &self.records
    }

    pub fn count(&self, kind: QueryKind) -> u64 {
        self.counts.get(&kind).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &BTreeMap<QueryKind, u64> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.records.len() as u64
    }
}

/// One line of the session wire protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Request {
    Pi { s: u64, t: u64 },
    F { t: u64 },
    G { x: String, y: u64 },
    F1 { x: String, sigma: u64 },
    Fm1 { x: String, tau: u64 },
    Sample,
}

/// An adversary's session against one instance.
pub struct OracleSession<'a> {
    instance: &'a ShiftedSubsetInstance,
    rng: ChaCha8Rng,
    transcript: OracleTranscript,
}

impl<'a> OracleSession<'a> {
    pub fn new(instance: &'a ShiftedSubsetInstance, rng: ChaCha8Rng) -> Self {
        OracleSession { instance, rng, transcript: OracleTranscript::default() }
    }

    pub fn transcript(&self) -> &OracleTranscript {
        &self.transcript
    }

    pub fn into_transcript(self) -> OracleTranscript {
        self.transcript
    }

    fn point(&self, s: &str) -> Result<usize> {
        self.instance.space.parse_point(s)
    }

    /// Answer one request. The result is `null` for ∅.
    pub fn query(&mut self, req: &Request) -> Result<Value> {
        let inst = self.instance;
        let (kind, result) = match req {
            Request::Pi { s, t } => (QueryKind::Pi, json!(inst.pi(*s, *t).map(|x| inst.space.format_point(x)))),
            Request::F { t } => (QueryKind::F, json!(inst.f(*t))),
            Request::G { x, y } => {
                let x = self.point(x)?;
                (QueryKind::G, json!(inst.g(x, *y).map(|(s, t)| json!({"s": s, "t": t}))))
            }
            Request::F1 { x, sigma } => (QueryKind::F1, json!(inst.f1(self.point(x)?, *sigma))),
            Request::Fm1 { x, tau } => (QueryKind::Fm1, json!(inst.f_minus1(self.point(x)?, *tau))),
            Request::Sample => {
                let s = inst.sample(&mut self.rng);
                (QueryKind::Sample, json!({"x": inst.space.format_point(s.x), "rejections": s.rejections}))
            }
        };
        let input = serde_json::to_value(req).expect("request serializes");
        self.transcript.push(kind, input, result.clone());
        Ok(result)
    }

    /// Handle one NDJSON line, returning the response line.
    pub fn handle_line(&mut self, line: &str) -> String {
        let response = match serde_json::from_str::<Request>(line) {
            Ok(req) => match self.query(&req) {
                Ok(result) => json!({"ok": true, "result": result}),
                Err(e) => json!({"ok": false, "error": e.to_string()}),
            },
            Err(e) => json!({"ok": false, "error": format!("bad request: {e}")}),
        };
        response.to_string()
    }

    /// Final line of a session: per-kind counters.
    pub fn summary(&self) -> Value {
        json!({"counters": self.transcript.counts(), "total": self.transcript.total()})
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_field::build_ctx;
    use crate::rng::stream;
    use crate::stats::chi_square_gof;

    fn space(p: u32, d: usize) -> Space {
        Space::new(build_ctx(p, 1).unwrap(), d).unwrap()
    }

    fn line(space: &Space, base: usize, dir: usize) -> Vec<usize> {
        space.ctx().elements().map(|a| space.add(base, space.scale(a, dir))).collect()
    }

    #[test]
    fn prp_is_a_bijection() {
        for n in [1u64, 2, 3, 7, 64, 100, 250, 1001] {
            let prp = Prp::new(n, 99 + n);
            let mut seen = vec![false; n as usize];
            for x in 0..n {
                let y = prp.forward(x);
                assert!(y < n);
                assert!(!seen[y as usize]);
                seen[y as usize] = true;
                assert_eq!(prp.inverse(y), x);
            }
        }
    }

    #[test]
    fn identity_bijections_give_plain_translation() {
        let sp = space(5, 3);
        let s = sp.sphere_points(Elem(1));
        let inst = ShiftedSubsetInstance::new(&sp, s.clone(), (0..sp.size()).collect(), 3)
            .unwrap()
            .with_identity_bijections();
        for &si in s.iter().take(10) {
            for t in [0usize, 17, 88] {
                let x = inst.pi(inst.encrypt_s(si).unwrap(), inst.encrypt_t(t).unwrap()).unwrap();
                assert_eq!(x, sp.add(t, si));
            }
        }
    }

    #[test]
    fn g_inverts_pi_and_f_exhaustively() {
        let sp = space(5, 3);
        let s = sp.sphere_points(Elem(1));
        let inst = ShiftedSubsetInstance::new(&sp, s.clone(), (0..sp.size()).collect(), 11).unwrap();
        for &si in &s {
            let st = inst.encrypt_s(si).unwrap();
            for t in 0..sp.size() {
                let tt = inst.encrypt_t(t).unwrap();
                let x = inst.pi(st, tt).unwrap();
                assert_eq!(inst.g(x, inst.f(tt).unwrap()), Some((st, tt)));
            }
        }
        for t in [0usize, 42] {
            let tt = inst.encrypt_t(t).unwrap();
            let mut xs: Vec<usize> = s.iter().map(|&si| inst.pi(inst.encrypt_s(si).unwrap(), tt).unwrap()).collect();
            xs.sort_unstable();
            xs.dedup();
            assert_eq!(xs.len(), s.len());
        }
    }

    #[test]
    fn g_returns_empty_off_image() {
        let sp = space(5, 3);
        let s = sp.sphere_points(Elem(1));
        let e1 = sp.parse_point("1,0,0").unwrap();
        let t_set = line(&sp, 0, e1);
        let inst = ShiftedSubsetInstance::new(&sp, s.clone(), t_set.clone(), 5).unwrap();
        let image: Vec<u64> = t_set.iter().map(|&t| inst.f(inst.encrypt_t(t).unwrap()).unwrap()).collect();
        let outside = (0..inst.y_size()).find(|y| !image.contains(y)).unwrap();
        assert_eq!(inst.g(0, outside), None);
        assert_eq!(inst.g(0, inst.y_size() + 3), None);
        // x on the translate for t, y = f(t') with x ∉ S + τ(t')
        let t = t_set[1];
        let tt = inst.encrypt_t(t).unwrap();
        let x = inst.pi(inst.encrypt_s(s[0]).unwrap(), tt).unwrap();
        for &t2 in &t_set {
            let y2 = inst.f(inst.encrypt_t(t2).unwrap()).unwrap();
            let on = s.contains(&sp.sub(x, inst.tau_of(t2)));
            assert_eq!(inst.g(x, y2).is_some(), on);
        }
    }

    #[test]
    fn hidden_radius_pair_round_trips() {
        let sp = space(5, 3);
        let r = Elem(2);
        let inst = ShiftedSubsetInstance::hidden_radius(&sp, r, 21).unwrap();
        for &si in inst.s_set() {
            let sigma = inst.encrypt_s(si).unwrap();
            for x in [0usize, 7, 60, 124] {
                let et = inst.f1(x, sigma).unwrap();
                assert_eq!(inst.f_minus1(x, et), Some(sigma));
                let t = inst.decrypt_t(et).unwrap();
                assert_eq!(sp.norm(sp.sub(x, t)), r);
            }
        }
        let bad = (0..inst.y_size()).find(|&tok| inst.decrypt_s(tok).is_none()).unwrap();
        assert_eq!(inst.f1(0, bad), None);
        assert_eq!(inst.f1(0, u64::MAX), None);
        assert_eq!(inst.f_minus1(0, u64::MAX), None);
    }

    #[test]
    fn sampler_degenerate_marginals() {
        let sp = space(5, 2);
        let s = sp.sphere_points(Elem(1));
        let inst = ShiftedSubsetInstance::new(&sp, s.clone(), vec![0], 1).unwrap();
        let mut rng = stream(1, "test", 0);
        let mut counts = vec![0u64; sp.size()];
        for _ in 0..4000 {
            counts[inst.sample(&mut rng).x] += 1;
        }
        let probs: Vec<f64> = (0..sp.size()).map(|x| if s.contains(&x) { 1.0 / s.len() as f64 } else { 0.0 }).collect();
        assert!(chi_square_gof(&counts, &probs).p_value > 0.001);
        let inst = ShiftedSubsetInstance::new(&sp, vec![0], (0..sp.size()).collect(), 1).unwrap();
        let mut counts = vec![0u64; sp.size()];
        for _ in 0..5000 {
            counts[inst.sample(&mut rng).x] += 1;
        }
        let uniform = vec![1.0 / sp.size() as f64; sp.size()];
        assert!(chi_square_gof(&counts, &uniform).p_value > 0.001);
    }

    #[test]
    fn sampler_matches_exact_mixture() {
        let sp = space(5, 3);
        let e = sp.parse_point("1,2,3").unwrap();
        let inst = ShiftedSubsetInstance::new(&sp, sp.sphere_points(Elem(1)), line(&sp, 0, e), 8).unwrap();
        let probs = inst.exact_mixture();
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mut rng = stream(8, "test", 1);
        let mut counts = vec![0u64; sp.size()];
        for _ in 0..100_000 {
            counts[inst.sample(&mut rng).x] += 1;
        }
        assert!(chi_square_gof(&counts, &probs).p_value > 0.01);
    }

    #[test]
    fn rejection_rate_is_small() {
        for p in [5u32, 7, 11] {
            let sp = space(p, 3);
            // the smaller sphere size: χ(-r) = -1
            let ctx = sp.ctx();
            let r = ctx.nonzero_elements().find(|&r| ctx.chi(ctx.neg(r)) == -1).unwrap();
            let inst = ShiftedSubsetInstance::hidden_radius(&sp, r, 2).unwrap();
            let acc = inst.s_set().len() as f64 / inst.s_cap() as f64;
            assert!(acc >= 1.0 - 2.0 / (p as f64).sqrt(), "q={p}: {acc}");
            let mut rng = stream(2, "test", p as u64);
            let draws = 20_000u64;
            let rej: u64 = (0..draws).map(|_| inst.sample(&mut rng).rejections).sum();
            let measured = draws as f64 / (draws + rej) as f64;
            assert!((measured - acc).abs() < 0.02);
        }
    }

    #[test]
    fn f_bit_frequencies_are_uniform() {
        // 10^4 instances, one f value each; bit frequencies against the exact
        // frequency for a uniform value in [0, |Y|).
        let sp = space(5, 3);
        let s = sp.sphere_points(Elem(1));
        let n_inst = 10_000u64;
        let y_size = 2 * sp.size() as u64;
        let bits = 64 - (y_size - 1).leading_zeros();
        let mut ones = vec![0u64; bits as usize];
        for seed in 0..n_inst {
            let inst = ShiftedSubsetInstance::new(&sp, s.clone(), vec![0, 1, 2], seed).unwrap();
            let y = inst.f(inst.encrypt_t(1).unwrap()).unwrap();
            for (b, slot) in ones.iter_mut().enumerate() {
                *slot += (y >> b) & 1;
            }
        }
        for (b, &c) in ones.iter().enumerate() {
            let p = (0..y_size).filter(|y| (y >> b) & 1 == 1).count() as f64 / y_size as f64;
            let mean = p * n_inst as f64;
            let sd = (n_inst as f64 * p * (1.0 - p)).sqrt();
            assert!((c as f64 - mean).abs() <= 5.0 * sd, "bit {b}: {c} vs {mean}");
        }
    }

    #[test]
    fn sessions_are_deterministic_and_counted() {
        let sp = space(5, 3);
        let inst = ShiftedSubsetInstance::hidden_radius(&sp, Elem(1), 4).unwrap();
        let sigma = inst.encrypt_s(inst.s_set()[0]).unwrap();
        let lines = [
            r#"{"op":"sample"}"#.to_string(),
            format!(r#"{{"op":"f1","x":"1,2,3","sigma":{sigma}}}"#),
            r#"{"op":"f","t":5}"#.to_string(),
            r#"{"op":"g","x":"0,0,0","y":3}"#.to_string(),
            r#"{"op":"bogus"}"#.to_string(),
            r#"{"op":"sample"}"#.to_string(),
        ];
        let run = || {
            let mut sess = OracleSession::new(&inst, stream(4, "session", 0));
            let out: Vec<String> = lines.iter().map(|l| sess.handle_line(l)).collect();
            (out, sess.summary(), sess.into_transcript())
        };
        let (a, sa, ta) = run();
        let (b, sb, tb) = run();
        assert_eq!(a, b);
        assert_eq!(sa, sb);
        assert_eq!(ta, tb);
        assert_eq!(ta.count(QueryKind::Sample), 2);
        assert_eq!(ta.count(QueryKind::F1), 1);
        assert_eq!(ta.total(), 5);
        assert!(a[4].contains("\"ok\":false"));
        let et: u64 = serde_json::from_str::<Value>(&a[1]).unwrap()["result"].as_u64().unwrap();
        let t = inst.decrypt_t(et).unwrap();
        assert_eq!(sp.norm(sp.sub(sp.parse_point("1,2,3").unwrap(), t)), Elem(1));
    }
}
