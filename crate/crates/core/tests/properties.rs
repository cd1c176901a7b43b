use proptest::prelude::*;
use superholder::mahler::{mahler_coeffs, mahler_eval, ContinuousFn};
use superholder::puiseux::{gamma_act, gamma_act_element, parse_text};
use superholder::tate_colmez::{colmez_decompose, psi, tate_trace};
use superholder::{lucas_binom, GammaElement, PadicInt, Prime, PuiseuxSeries, Val, Q};

const PRIMES: [u64; 4] = [2, 3, 5, 7];

fn prime() -> impl Strategy<Value = Prime> {
    prop::sample::select(PRIMES.to_vec()).prop_map(|p| Prime::new(p).unwrap())
}

fn binom_mod(n: u64, k: u64, p: u64) -> u64 {
    if k > n {
        return 0;
    }
    let mut c: u128 = 1;
    for i in 0..k as u128 {
        c = c * (n as u128 - i) / (i + 1);
    }
    (c % p as u128) as u64
}

/// Random series as `(p, level, prec_num, raw terms)`.
fn series() -> impl Strategy<Value = PuiseuxSeries> {
    (
        prime(),
        0u32..3,
        1u64..60,
        prop::collection::vec((0u64..80, 1u64..7), 0..8),
    )
        .prop_map(|(p, level, prec_num, raw)| PuiseuxSeries::from_parts(p, level, prec_num, raw))
}

fn unit(p: Prime, a: u64) -> PadicInt {
    let q = p.as_u64();
    let a = if a % q == 0 { a + 1 } else { a };
    PadicInt::from_u64(p, a, 16)
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn lucas_matches_integer_binomials(p in prime(), z in 0u64..60, n in 0u64..60) {
        let b = lucas_binom(&PadicInt::from_u64(p, z, 8), n).unwrap();
        prop_assert_eq!(b.value() as u64, binom_mod(z, n, p.as_u64()));
    }

    #[test]
    fn gamma_group_laws(p in prime(), k in 1u32..3, a in 0u64..500, b in 0u64..500, c in 0u64..500) {
        let k = if p.as_u64() == 2 { k + 1 } else { k };
        let g = |x| GammaElement::from_coordinate(p, k, x, 12).unwrap();
        let (ga, gb, gc) = (g(a), g(b), g(c));
        let left = ga.compose(&gb).unwrap().compose(&gc).unwrap();
        let right = ga.compose(&gb.compose(&gc).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        let id = GammaElement::identity(p, k, 12).unwrap();
        prop_assert_eq!(ga.compose(&ga.inverse()).unwrap(), id);
        prop_assert_eq!(ga.compose(&gb).unwrap(), gb.compose(&ga).unwrap());
    }

    #[test]
    fn action_is_a_group_action(f in series(), a in 1u64..200, b in 1u64..200) {
        let p = f.prime();
        let (ua, ub) = (unit(p, a), unit(p, b));
        let ab = ua.mul(&ub).unwrap();
        let lhs = gamma_act(&ab, &f).unwrap();
        let rhs = gamma_act(&ub, &gamma_act(&ua, &f).unwrap()).unwrap();
        prop_assert!(lhs.eq_mod(&rhs));
    }

    #[test]
    fn action_is_an_isometry(f in series(), g in series(), a in 1u64..200) {
        prop_assume!(f.prime() == g.prime());
        let ua = unit(f.prime(), a);
        let d = f.sub(&g).unwrap().val();
        let gd = gamma_act(&ua, &f).unwrap().sub(&gamma_act(&ua, &g).unwrap()).unwrap().val();
        match d {
            Val::Exact(v) => prop_assert_eq!(gd, Val::Exact(v)),
            Val::AtLeast(_) => prop_assert!(gd.is_censored()),
        }
    }

    #[test]
    fn action_commutes_with_frobenius(f in series(), a in 1u64..200, i in -2i64..3) {
        let ua = unit(f.prime(), a);
        let lhs = gamma_act(&ua, &f.frobenius_pow(i)).unwrap();
        let rhs = gamma_act(&ua, &f).unwrap().frobenius_pow(i);
        prop_assert!(lhs.eq_mod(&rhs));
    }

    #[test]
    fn psi_is_a_left_inverse_of_frobenius(f in series()) {
        let f = f.frobenius_pow(f.level() as i64);
        let back = psi(&f.frobenius()).unwrap();
        prop_assert!(back.eq_mod(&f));
    }

    #[test]
    fn decomposition_reconstructs(f in series()) {
        let d = colmez_decompose(&f).unwrap();
        prop_assert!(d.reconstruct().unwrap().eq_mod(&f));
    }

    #[test]
    fn traces_are_equivariant(f in series(), a in 1u64..200, n in 0u32..3) {
        let ua = unit(f.prime(), a);
        let lhs = tate_trace(&gamma_act(&ua, &f).unwrap(), n).unwrap();
        let rhs = gamma_act(&ua, &tate_trace(&f, n).unwrap()).unwrap();
        prop_assert!(lhs.eq_mod(&rhs));
    }

    #[test]
    fn gamma_elements_act_through_their_unit(f in series(), a in 0u64..100) {
        let p = f.prime();
        let k = if p.as_u64() == 2 { 2 } else { 1 };
        let g = GammaElement::from_coordinate(p, k, a, 16).unwrap();
        let lhs = gamma_act_element(&g, &f).unwrap();
        let rhs = gamma_act(&g.unit(), &f).unwrap();
        prop_assert!(lhs.eq_mod(&rhs));
    }

    #[test]
    fn text_round_trip(f in series()) {
        let back = parse_text(&strip_order(&f.to_string()), f.prime(), f.prec()).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn mahler_round_trip(p in prime(), t in 0u32..3, seed in prop::collection::vec((0u64..30, 1u64..7), 49)) {
        let n = p.as_u64().pow(t) as usize;
        let values: Vec<PuiseuxSeries> = seed
            .iter()
            .take(n)
            .map(|&(e, c)| PuiseuxSeries::from_parts(p, 0, 30, vec![(e, c)]))
            .collect();
        let f = ContinuousFn::locally_constant(p, t, values).unwrap();
        let e = mahler_coeffs(&f, n - 1).unwrap();
        for z in 0..(2 * n as u64) {
            let at = PadicInt::from_u64(p, z, 8);
            prop_assert!(mahler_eval(&e, &at).unwrap().eq_mod(&f.eval(&at).unwrap()));
        }
        let longer = mahler_coeffs(&f, 2 * n).unwrap();
        for m in &longer.coeffs()[n..] {
            prop_assert!(m.is_zero());
        }
    }
}

/// The text form ends in ` + O(X^T)`; the parser takes the precision separately.
fn strip_order(s: &str) -> String {
    match s.rfind(" + O(") {
        Some(i) => s[..i].to_string(),
        None => s.trim_start_matches("O(").to_string(),
    }
}

#[test]
fn json_round_trip_is_byte_identical() {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
    let rng = TestRng::deterministic_rng(RngAlgorithm::ChaCha);
    let mut runner = TestRunner::new_with_rng(Config::default(), rng);
    for _ in 0..1000 {
        let f = series().new_tree(&mut runner).unwrap().current();
        let bytes = f.to_json();
        let back = PuiseuxSeries::from_json(&bytes).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.to_json(), bytes);
    }
}

#[test]
fn serialization_example() {
    let p = Prime::new(2).unwrap();
    let f = PuiseuxSeries::monomial(p, Q::new(1, 2), 1, Q::from_integer(3)).unwrap();
    assert_eq!(
        f.to_json(),
        r#"{"p":2,"level":1,"prec_num":6,"terms":[[1,1]]}"#
    );
}
