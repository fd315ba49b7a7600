use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use hsl_core::char_sums::{gauss_sum, kloosterman, kloosterman_via_discriminant, salie, CharSpec};
use hsl_core::finite_field::{build_ctx, Elem, Field, FieldCtx};
use hsl_core::geometry::{fourier, inverse_fourier, sphere_fourier_brute, sphere_fourier_closed, Flat, Space, StateVector};
use hsl_core::hidden_flat::{hfc_trials, walk_evolve, HfcConfig, WalkSpec};
use hsl_core::hidden_polynomial::{copies_needed, fidelity, intersections, HiddenPolynomial, MPoly};
use hsl_core::hidden_radius::radius_distribution;
use hsl_core::rng::stream;
use hsl_core::shifted_subset_oracle::{OracleSession, ShiftedSubsetInstance};

const ORDERS: [u64; 9] = [3, 5, 7, 9, 11, 13, 25, 27, 49];

fn field(q: u64) -> Field {
    Arc::new(FieldCtx::from_order(q).unwrap())
}

fn any_field() -> impl Strategy<Value = Field> {
    prop::sample::select(ORDERS.to_vec()).prop_map(field)
}

fn field_and_elems(n: usize) -> impl Strategy<Value = (Field, Vec<Elem>)> {
    any_field().prop_flat_map(move |f| {
        let q = f.q();
        (Just(f), prop::collection::vec((0..q).prop_map(Elem), n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn field_axioms((ctx, e) in field_and_elems(3)) {
        let (a, b, c) = (e[0], e[1], e[2]);
        prop_assert_eq!(ctx.mul(a, ctx.add(b, c)), ctx.add(ctx.mul(a, b), ctx.mul(a, c)));
        prop_assert_eq!(ctx.add(a, ctx.neg(a)), ctx.zero());
        if !a.is_zero() {
            prop_assert_eq!(ctx.mul(a, ctx.inv(a).unwrap()), ctx.one());
        }
        prop_assert_eq!(ctx.trace(ctx.add(a, b)), (ctx.trace(a) + ctx.trace(b)) % ctx.p());
        prop_assert_eq!(ctx.trace(ctx.pow(a, ctx.p() as u64)), ctx.trace(a));
        prop_assert_eq!(ctx.chi(ctx.mul(a, b)), ctx.chi(a) * ctx.chi(b));
    }

    #[test]
    fn square_roots((ctx, e) in field_and_elems(1)) {
        let a = e[0];
        match ctx.sqrt(a) {
            Some(x) => prop_assert_eq!(ctx.square(x), a),
            None => prop_assert_eq!(ctx.chi(a), -1),
        }
    }

    #[test]
    fn element_text_round_trips((ctx, e) in field_and_elems(1)) {
        prop_assert_eq!(ctx.parse_elem(&ctx.format_elem(e[0])).unwrap(), e[0]);
    }

    #[test]
    fn kloosterman_symmetry_and_identities((ctx, e) in field_and_elems(2)) {
        let (a, b) = (e[0], e[1]);
        let tol = 1e-9 * (ctx.q() as f64).sqrt();
        for eta in [CharSpec::Trivial, CharSpec::Quadratic] {
            let d = kloosterman(&ctx, a, b, eta).value - kloosterman(&ctx, b, a, eta).value;
            prop_assert!(d.norm() < tol);
        }
        prop_assert!((salie(&ctx, a, b).value - kloosterman(&ctx, a, b, CharSpec::Quadratic).value).norm() < tol);
        if !(a.is_zero() && b.is_zero()) {
            let d = kloosterman(&ctx, a, b, CharSpec::Trivial).value - kloosterman_via_discriminant(&ctx, a, b).value;
            prop_assert!(d.norm() < tol);
        }
    }

    #[test]
    fn fourier_preserves_norm_and_inverts(seed in any::<u64>(), qi in 0usize..3, d in 1usize..4) {
        let sp = Space::new(field([3, 5, 9][qi]), d).unwrap();
        let mut rng = stream(seed, "prop/fourier", 0);
        let amps: Vec<Complex64> = (0..sp.size())
            .map(|_| Complex64::new(rand::Rng::random::<f64>(&mut rng) - 0.5, rand::Rng::random::<f64>(&mut rng) - 0.5))
            .collect();
        let v = StateVector::from_amps(&sp, amps).unwrap();
        let w = fourier(&v);
        prop_assert!((w.norm_sqr() - v.norm_sqr()).abs() < 1e-9);
        let back = inverse_fourier(&w);
        prop_assert!(back.amps().iter().zip(v.amps()).all(|(a, b)| (a - b).norm() < 1e-9));
    }

    #[test]
    fn affine_span_is_idempotent_and_order_free(seed in any::<u64>(), n in 1usize..5) {
        let sp = Space::new(field(5), 3).unwrap();
        let mut rng = stream(seed, "prop/span", 0);
        let mut pts: Vec<usize> = (0..n).map(|_| rand::Rng::random_range(&mut rng, 0..sp.size())).collect();
        let f = Flat::affine_span(&sp, &pts).unwrap();
        prop_assert!(pts.iter().all(|&x| f.contains(&sp, x)));
        prop_assert_eq!(Flat::affine_span(&sp, &f.points(&sp)).unwrap(), f.clone());
        pts.reverse();
        prop_assert_eq!(Flat::affine_span(&sp, &pts).unwrap(), f.clone());
        prop_assert_eq!(f.points(&sp).len() as u64, 5u64.pow(f.dim() as u32));
    }

    #[test]
    fn walk_is_unitary(seed in any::<u64>(), t in 0.0f64..5.0) {
        let sp = Space::new(field(7), 3).unwrap();
        let spec = WalkSpec::build(&sp);
        let mut rng = stream(seed, "prop/walk", 0);
        let amps: Vec<Complex64> = (0..sp.size())
            .map(|_| Complex64::new(rand::Rng::random::<f64>(&mut rng), rand::Rng::random::<f64>(&mut rng)))
            .collect();
        let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let v = StateVector::from_amps(&sp, amps.into_iter().map(|a| a / n).collect()).unwrap();
        prop_assert!((walk_evolve(&v, &spec, t).norm_sqr() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn polynomial_text_and_gcd(seed in any::<u64>()) {
        let ctx = build_ctx(5, 1).unwrap();
        let mut rng = stream(seed, "prop/poly", 0);
        let a = hsl_core::hidden_polynomial::random_polynomial_upto(&ctx, 2, 2, &mut rng);
        let b = hsl_core::hidden_polynomial::random_polynomial_upto(&ctx, 2, 2, &mut rng);
        let c = hsl_core::hidden_polynomial::random_polynomial_upto(&ctx, 2, 1, &mut rng);
        prop_assert_eq!(MPoly::parse(&ctx, 2, &a.format(&ctx)).unwrap(), a.clone());
        let (ac, bc) = (a.mul(&ctx, &c), b.mul(&ctx, &c));
        let g = MPoly::gcd(&ctx, &ac, &bc);
        if !g.is_zero() {
            prop_assert!(ac.div_exact(&ctx, &g).is_some());
            prop_assert!(bc.div_exact(&ctx, &g).is_some());
            if !c.is_zero() && !ac.is_zero() && !bc.is_zero() {
                prop_assert!(g.div_exact(&ctx, &c).is_some());
            }
        }
    }

    #[test]
    fn fidelity_symmetric_and_one_iff_same_partition(seed in any::<u64>()) {
        let sp = Space::new(field(5), 2).unwrap();
        let mut rng = stream(seed, "prop/fidelity", 0);
        let h = HiddenPolynomial::new(&sp, hsl_core::hidden_polynomial::random_polynomial_upto(sp.ctx(), 2, 2, &mut rng)).unwrap();
        let h2 = HiddenPolynomial::new(&sp, hsl_core::hidden_polynomial::random_polynomial_upto(sp.ctx(), 2, 2, &mut rng)).unwrap();
        let f = fidelity(&h, &h2).unwrap();
        prop_assert!((f - fidelity(&h2, &h).unwrap()).abs() < 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&f));
        let same = intersections(&h, &h2).unwrap().same_partition();
        prop_assert_eq!(same, f > 1.0 - 1e-9);
        let c = sp.ctx().from_int(3);
        let scaled = HiddenPolynomial::new(&sp, h.poly().scale(sp.ctx(), c).shift(sp.ctx(), c)).unwrap();
        prop_assert!((fidelity(&h, &scaled).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn copies_reach_target(f in 0.01f64..0.99, n in 2u64..1000, eps in 0.001f64..0.5) {
        let r = copies_needed(f, n, eps).unwrap();
        prop_assert!(r.success_lower_bound >= 1.0 - eps - 1e-9);
        if r.copies > 1 {
            prop_assert!(1.0 - (n as f64) * f.powf((r.copies - 1) as f64).sqrt() < 1.0 - eps + 1e-9);
        }
    }
}

#[test]
fn gauss_sum_has_norm_q() {
    for q in ORDERS {
        let ctx = field(q);
        assert!((gauss_sum(&ctx).value.norm_sqr() - q as f64).abs() < 1e-9 * q as f64);
    }
}

#[test]
fn sphere_sizes_partition_the_space() {
    for q in [3u64, 5, 7, 9, 11] {
        for d in 2..=5 {
            let sp = Space::new(field(q), d).unwrap();
            assert_eq!(sp.level_sizes().iter().sum::<u64>(), (q as u64).pow(d as u32));
        }
    }
}

#[test]
fn sphere_fourier_sampled_at_q13() {
    let sp = Space::new(field(13), 3).unwrap();
    let mut rng = stream(13, "prop/sphere", 0);
    for _ in 0..1000 {
        let k = rand::Rng::random_range(&mut rng, 1..sp.size());
        let r = Elem(rand::Rng::random_range(&mut rng, 0..13));
        let closed = sphere_fourier_closed(&sp, r, k).unwrap().value;
        assert!((closed - sphere_fourier_brute(&sp, r, k)).norm() < 1e-8 * 13.0);
    }
}

#[test]
fn radius_distributions_sum_to_one() {
    for q in [3u64, 5, 7, 9] {
        let sp = Space::new(field(q), 3).unwrap();
        for r in sp.ctx().elements() {
            assert!((radius_distribution(&sp, r).unwrap().total() - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn oracle_sessions_replay_identically() {
    let sp = Space::new(field(5), 3).unwrap();
    let inst = ShiftedSubsetInstance::hidden_radius(&sp, Elem(2), 77).unwrap();
    let lines = [r#"{"op":"sample"}"#, r#"{"op":"f","t":3}"#, r#"{"op":"sample"}"#, r#"{"op":"pi","s":1,"t":4}"#];
    let run = || {
        let mut s = OracleSession::new(&inst, stream(1, "prop/session", 0));
        lines.iter().map(|l| s.handle_line(l)).collect::<Vec<_>>()
    };
    assert_eq!(run(), run());
    let other = ShiftedSubsetInstance::hidden_radius(&sp, Elem(2), 77).unwrap();
    assert_eq!(inst.encrypt_t(9), other.encrypt_t(9));
}

#[test]
fn no_wrong_flat_at_true_dimension() {
    let sp = Space::new(field(11), 3).unwrap();
    let s = hfc_trials(&sp, 1, &HfcConfig { shots: 400, t_factor: 1.0 }, 1000, 99).unwrap();
    assert_eq!(s.wrong_flat_acceptances, 0, "{s:?}");
}
