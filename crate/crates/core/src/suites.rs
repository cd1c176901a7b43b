//! Property batteries with deterministic seeds, shared by the `suite`
//! subcommand and the acceptance tests.

use crate::arith::{GammaElement, PadicInt, Prime};
use crate::commutant::{check_commute, gamma_series, solve_commutant};
use crate::error::{Error, Result};
use crate::mahler::{
    mahler_coeffs, mahler_eval, orbit_fn, sh_test_mahler, ContinuousFn, MahlerWitness,
};
use crate::phigamma::{
    fixed_point_series, gauge_module, inverse_sh_profile, matrix_sh_profile, validate_module,
    vector_sh_profile, MatrixSeries, PhiGammaModule,
};
use crate::puiseux::{gamma_act, gamma_act_element, PuiseuxSeries};
use crate::tate_colmez::{
    colmez_decompose, decomplete, psi_tower_sh_test, sh_level_classify, tate_trace, PsiTower,
};
use crate::valuation::{format_q, format_val, Val, Verdict, Q};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const PRNG: &str = "ChaCha8Rng (rand_chacha 0.3)";

const MAX_FAILURES: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Property {
    pub name: String,
    pub checked: usize,
    pub failed: usize,
    /// The first few failures.
    pub failures: Vec<String>,
}

impl Property {
    fn new(name: &str) -> Property {
        Property {
            name: name.to_string(),
            checked: 0,
            failed: 0,
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failed == 0 && self.checked > 0
    }

    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failed += 1;
            if self.failures.len() < MAX_FAILURES {
                self.failures.push(detail());
            }
        }
    }

    /// Errors count as failures.
    fn check_result(&mut self, r: Result<bool>, detail: impl FnOnce() -> String) {
        match r {
            Ok(ok) => self.check(ok, detail),
            Err(e) => self.check(false, || format!("{}: {e}", detail())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub prng: String,
    pub seed: u64,
    pub primes: Vec<u64>,
    pub properties: Vec<Property>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(Property::passed)
    }

    pub fn summary(&self) -> String {
        let failing: Vec<&str> = self
            .properties
            .iter()
            .filter(|p| !p.passed())
            .map(|p| p.name.as_str())
            .collect();
        if failing.is_empty() {
            format!("{} properties pass", self.properties.len())
        } else {
            format!("failing: {}", failing.join(", "))
        }
    }
}

#[derive(Default)]
struct Tally {
    props: Vec<Property>,
}

impl Tally {
    fn prop(&mut self, name: &str) -> &mut Property {
        if let Some(i) = self.props.iter().position(|p| p.name == name) {
            return &mut self.props[i];
        }
        self.props.push(Property::new(name));
        self.props.last_mut().expect("just pushed")
    }
}

type SuiteFn = fn(&mut Tally, Prime, &mut ChaCha8Rng) -> Result<()>;

pub struct SuiteInfo {
    pub name: &'static str,
    pub alias: &'static str,
    pub description: &'static str,
    pub default_primes: &'static [u64],
    run: SuiteFn,
}

pub const SUITES: &[SuiteInfo] = &[
    SuiteInfo {
        name: "mahler-round-trip",
        alias: "mahler",
        description: "Mahler coefficients and evaluation of locally constant functions",
        default_primes: &[2, 3, 5],
        run: mahler_round_trip,
    },
    SuiteInfo {
        name: "amice-classifier",
        alias: "shmahl",
        description: "super-Hölder test on Mahler coefficients of orbit functions",
        default_primes: &[2, 3],
        run: amice_classifier,
    },
    SuiteInfo {
        name: "orbit-floors",
        alias: "etnsh",
        description: "exact orbit floors of X^(1/p^n) and of series with nonzero derivative",
        default_primes: &[2, 3],
        run: orbit_floor_suite,
    },
    SuiteInfo {
        name: "tate-traces",
        alias: "colmtn",
        description: "Tate traces and the (1+X)^i decomposition",
        default_primes: &[2, 3],
        run: tate_trace_suite,
    },
    SuiteInfo {
        name: "decompletion",
        alias: "shdecet",
        description: "exponent-level decompletion against the orbit classifier",
        default_primes: &[2, 3],
        run: decompletion_suite,
    },
    SuiteInfo {
        name: "commutant",
        alias: "gmcom",
        description: "solving u = γ_b(X^(p^n)) and rejecting non-commutants",
        default_primes: &[2, 3],
        run: commutant_suite,
    },
    SuiteInfo {
        name: "phi-gamma",
        alias: "phigsh",
        description: "gauge (φ,Γ)-modules: validation, profiles, fixed-point series",
        default_primes: &[2, 3],
        run: phi_gamma_suite,
    },
    SuiteInfo {
        name: "psi-tower",
        alias: "llpsh",
        description: "ψ-towers: diagonal towers certified, perturbed towers refuted",
        default_primes: &[2, 3],
        run: psi_tower_suite,
    },
];

pub fn find_suite(name: &str) -> Option<&'static SuiteInfo> {
    SUITES.iter().find(|s| s.name == name || s.alias == name)
}

/// Independent stream per prime, so restricting the primes does not
/// change what is tested for the remaining ones.
fn rng_for(seed: u64, p: Prime) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ p.as_u64().wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

pub fn run_suite(name: &str, primes: Option<&[u64]>, seed: u64) -> Result<SuiteReport> {
    let info = find_suite(name)
        .ok_or_else(|| Error::PreconditionViolation(format!("unknown suite {name}")))?;
    let primes: Vec<u64> = primes
        .map(<[u64]>::to_vec)
        .unwrap_or_else(|| info.default_primes.to_vec());
    let mut tally = Tally::default();
    for &q in &primes {
        let p = Prime::new(q)?;
        let mut rng = rng_for(seed, p);
        (info.run)(&mut tally, p, &mut rng)?;
    }
    Ok(SuiteReport {
        suite: info.name.to_string(),
        prng: PRNG.to_string(),
        seed,
        primes,
        properties: tally.props,
    })
}

fn int(n: i64) -> Q {
    Q::from_integer(n)
}

fn pow(p: Prime, e: u32) -> u64 {
    p.as_u64().pow(e)
}

fn nonzero(rng: &mut ChaCha8Rng, p: Prime) -> u64 {
    rng.gen_range(1..p.as_u64())
}

fn unit(rng: &mut ChaCha8Rng, p: Prime, below: u64) -> u64 {
    loop {
        let a = rng.gen_range(1..below);
        if a % p.as_u64() != 0 {
            return a;
        }
    }
}

/// Random sparse series at `level` with numerators below `window`.
fn random_series(
    rng: &mut ChaCha8Rng,
    p: Prime,
    level: u32,
    window: u64,
    terms: usize,
    prec_num: u64,
) -> PuiseuxSeries {
    let raw = (0..terms)
        .map(|_| (rng.gen_range(0..window.max(1)), nonzero(rng, p)))
        .collect();
    PuiseuxSeries::from_parts(p, level, prec_num, raw)
}

/// Series in `Y = X^(1/p^n)` with a unit exponent `e0 <= p^k`, so the
/// exponent level is exactly `n` (for `n = 0`: nonzero derivative) and the
/// derivative has valuation below `p^k` in `Y`.
fn leveled_series(rng: &mut ChaCha8Rng, p: Prime, n: u32, k: u32, prec_num: u64) -> PuiseuxSeries {
    let window = pow(p, k) + 2;
    let e0 = loop {
        let e = rng.gen_range(1..=pow(p, k));
        if e % p.as_u64() != 0 {
            break e;
        }
    };
    let mut raw = vec![(e0, nonzero(rng, p))];
    for _ in 0..rng.gen_range(0..4) {
        raw.push((rng.gen_range(0..window), nonzero(rng, p)));
    }
    let s = PuiseuxSeries::from_parts(p, n, prec_num, raw);
    if s.exponent_level() == n
        && s.terms()
            .iter()
            .any(|&(e, _)| e % p.as_u64() != 0 && e <= pow(p, k))
    {
        s
    } else {
        // a collision cancelled the unit term
        leveled_series(rng, p, n, k, prec_num)
    }
}

fn min_depth(p: Prime) -> u32 {
    if p.get() == 2 {
        2
    } else {
        1
    }
}

fn mahler_round_trip(t: &mut Tally, p: Prime, rng: &mut ChaCha8Rng) -> Result<()> {
    for _ in 0..200 {
        let level = rng.gen_range(0..=3u32);
        let size = pow(p, level);
        let values = (0..size)
            .map(|_| {
                let l = rng.gen_range(0..=1u32);
                let tn = 6 * pow(p, l);
                let terms = rng.gen_range(0..4);
                random_series(rng, p, l, tn, terms, tn)
            })
            .collect();
        let f = ContinuousFn::locally_constant(p, level, values)?;
        let n_max = 2 * size as usize - 1;
        let e = mahler_coeffs(&f, n_max)?;
        t.prop("coefficients vanish from p^t on").check(
            e.coeffs()[size as usize..].iter().all(|m| m.is_zero()),
            || format!("p={p} t={level}"),
        );
        let mut all = true;
        for z in 0..size {
            let z = PadicInt::from_u64(p, z, 8);
            all &= mahler_eval(&e, &z)? == f.eval(&z)?;
        }
        t.prop("evaluation reproduces every residue")
            .check(all, || format!("p={p} t={level}"));
        let digits = (0..8).map(|_| rng.gen_range(0..p.get())).collect();
        let z = PadicInt::from_digits(p, digits)?;
        t.prop("evaluation at random p-adic points")
            .check(mahler_eval(&e, &z)? == f.eval(&z)?, || {
                format!("p={p} t={level} z={z}")
            });
    }
    Ok(())
}

fn amice_classifier(t: &mut Tally, p: Prime, _rng: &mut ChaCha8Rng) -> Result<()> {
    let table_level = if p.get() == 2 { 4 } else { 3 };
    for k in min_depth(p)..=3 {
        for n in 0..=2u32 {
            let prec = int(2 * pow(p, k + 4) as i64);
            let m = PuiseuxSeries::monomial(p, Q::new(1, pow(p, n) as i64), 1, prec)?;
            let orbit = orbit_fn(&m, k, table_level)?;
            let n_max = pow(p, table_level) as usize - 1;
            let e = mahler_coeffs(&orbit.function, n_max)?;
            let lambda = k as f64 - n as f64;
            let ok = sh_test_mahler(&e, lambda, 0.0);
            t.prop("certifies (k-n, 0)").check(ok.is_certified(), || {
                format!("p={p} k={k} n={n}: {}", ok.label())
            });
            let bad = sh_test_mahler(&e, lambda + 1.0, 0.0);
            t.prop("refutes (k-n+1, 0)").check(
                bad == Verdict::Refuted(MahlerWitness { n: 1, i: 0 }),
                || format!("p={p} k={k} n={n}: {bad:?}"),
            );
        }
    }
    Ok(())
}

fn orbit_floor_suite(t: &mut Tally, p: Prime, rng: &mut ChaCha8Rng) -> Result<()> {
    let digits = 24;
    for k in min_depth(p)..=3 {
        for n in 0..=2u32 {
            let prec = int(2 * pow(p, k + 3) as i64);
            let m = PuiseuxSeries::monomial(p, Q::new(1, pow(p, n) as i64), 1, prec)?;
            for i in 0..=3u32 {
                let expected = Val::Exact(Q::new(pow(p, k + i) as i64, pow(p, n) as i64));
                for _ in 0..4 {
                    let b = unit(rng, p, pow(p, 4));
                    let g = GammaElement::from_coordinate(p, k, pow(p, i) * b, digits)?;
                    let w = gamma_act_element(&g, &m)?.sub(&m)?.val();
                    t.prop("orbit floors equal p^(k-n+i) for unit b")
                        .check(w == expected, || {
                            format!("p={p} k={k} n={n} i={i} b={b}: {}", format_val(&w))
                        });
                }
            }
        }
    }
    let window = 8u64;
    let mut m = 0;
    while pow(p, m) <= 2 * window {
        m += 1;
    }
    let pm = pow(p, m);
    let a = PadicInt::from_u64(p, 1 + pm, digits);
    for _ in 0..50 {
        let f = loop {
            let f = random_series(rng, p, 0, window + 1, 6, 2 * pm + window + 2);
            if f.derivative().is_ok_and(|d| !d.is_zero()) {
                break f;
            }
        };
        let lhs = gamma_act(&a, &f)?.sub(&f)?.val();
        let expected = f.derivative()?.val().map(|v| v + int(pm as i64));
        t.prop("val(γ_(1+p^m) f - f) = p^m + val f' beyond twice the window")
            .check(lhs == expected, || {
                format!("p={p} f={f}: {}", format_val(&lhs))
            });
    }
    Ok(())
}

fn tate_trace_suite(t: &mut Tally, p: Prime, rng: &mut ChaCha8Rng) -> Result<()> {
    let top = 3u32;
    let tn = 6 * pow(p, top);
    for _ in 0..100 {
        let f = loop {
            let terms = rng.gen_range(1..7);
            let f = random_series(rng, p, top, tn, terms, tn);
            if f.exponent_level() == top {
                break f;
            }
        };
        let d = colmez_decompose(&f)?;
        t.prop("decomposition reconstructs f")
            .check_result(d.reconstruct().map(|r| r.eq_mod(&f)), || {
                format!("p={p} f={f}")
            });
        let v = f.val().exact().expect("f has a unit term");
        let inf = d.inf_val();
        t.prop("val f - 1 < inf val a_i <= val f").check(
            inf.exact().is_some_and(|w| v - int(1) < w && w <= v),
            || format!("p={p} f={f}: inf {}", format_val(&inf)),
        );
        for n in 0..top {
            // T_n f viewed at level 3 through a precision with denominator p^3
            let tf = tate_trace(&f, n)?;
            let g = tf.truncate(tf.prec() - Q::new(1, pow(p, top) as i64))?;
            t.prop("identity on E+_n").check_result(
                tate_trace(&g, n).map(|h| g.level() == top && h.eq_mod(&g)),
                || format!("p={p} n={n} f={f}"),
            );
            let up = tate_trace(&f, n + 1)?;
            let fv = f.val();
            t.prop("convergence: T_n T_(n+1) = T_n and T_n f = f from the level on")
                .check_result(
                    tate_trace(&up, n)
                        .map(|h| h.eq_mod(&tf) && tate_trace(&f, top).is_ok_and(|x| x == f)),
                    || format!("p={p} n={n} f={f}"),
                );
            let w = tf.val();
            t.prop("val T_n f >= val f - 1")
                .check(w.at_least(fv.bound() - int(1)) != Some(false), || {
                    format!("p={p} n={n} f={f}: {}", format_val(&w))
                });
            for _ in 0..(if n == 0 { 5 } else { 2 }) {
                let a = PadicInt::from_u64(p, unit(rng, p, pow(p, 6)), 16);
                let lhs = tate_trace(&gamma_act(&a, &f)?, n)?;
                let rhs = gamma_act(&a, &tf)?;
                t.prop("equivariance")
                    .check(lhs.eq_mod(&rhs), || format!("p={p} n={n} a={a} f={f}"));
            }
        }
    }
    Ok(())
}

fn decompletion_suite(t: &mut Tally, p: Prime, rng: &mut ChaCha8Rng) -> Result<()> {
    let k = min_depth(p);
    let i_max = 3;
    for _ in 0..100 {
        let n = rng.gen_range(0..=3u32);
        let f = leveled_series(rng, p, n, k, pow(p, k + i_max) + pow(p, k) + 1);
        let d = decomplete(&f, k, i_max)?;
        t.prop("decomplete returns the construction level")
            .check(d.n == n && d.stabilization == n, || {
                format!("p={p} n={n} f={f}: {d:?}")
            });
        t.prop("orbit classifier agrees")
            .check(d.consistent() == Some(true), || {
                format!(
                    "p={p} n={n} f={f}: {:?}",
                    d.classified
                        .as_ref()
                        .map(|c| (c.raw, c.profile.per_gap.clone()))
                )
            });
    }
    Ok(())
}

fn commutant_suite(t: &mut Tally, p: Prime, rng: &mut ChaCha8Rng) -> Result<()> {
    let digits = 6usize;
    let tf = pow(p, digits as u32);
    for trial in 0..100 {
        let b = PadicInt::from_u64(p, unit(rng, p, tf), digits + 2);
        let n = rng.gen_range(-2i64..=2);
        let u = gamma_series(&b, int(tf as i64))?.frobenius_pow(n);
        match solve_commutant(&u, digits) {
            Ok(s) => {
                t.prop("solver recovers (b mod p^6, n)")
                    .check(s.b == b.truncate(digits) && s.n == n, || {
                        format!("p={p} b={b} n={n}: {s:?}")
                    });
                if trial < 10 {
                    let samples: Vec<PadicInt> = (0..10)
                        .map(|_| PadicInt::from_u64(p, unit(rng, p, pow(p, 8)), 24))
                        .collect();
                    t.prop("solutions commute with fresh samples").check_result(
                        check_commute(&u, &samples).map(|v| v.is_consistent()),
                        || format!("p={p} b={b} n={n}"),
                    );
                }
            }
            Err(e) => t
                .prop("solver recovers (b mod p^6, n)")
                .check(false, || format!("p={p} b={b} n={n}: {e}")),
        }
    }
    for _ in 0..20 {
        let b = PadicInt::from_u64(p, unit(rng, p, tf), digits + 2);
        let n = rng.gen_range(-2i64..=2);
        let e = loop {
            let e = rng.gen_range(2..tf);
            if !(0..=digits as u32).any(|i| pow(p, i) == e) {
                break e;
            }
        };
        let bump = PuiseuxSeries::monomial(p, int(e as i64), nonzero(rng, p), int(tf as i64))?;
        let u = gamma_series(&b, int(tf as i64))?
            .add(&bump)?
            .frobenius_pow(n);
        let at = int(e as i64) * Q::from_integer(p.as_u64() as i64).pow(n as i32);
        let expected = format!("residual mismatch at X^{}", format_q(at));
        let got = solve_commutant(&u, digits);
        t.prop("non-examples rejected with a residual witness")
            .check(
                matches!(&got, Err(Error::NotCommutant(msg)) if *msg == expected),
                || format!("p={p} b={b} n={n} e={e}: {got:?}"),
            );
    }
    Ok(())
}

fn random_unimodular(rng: &mut ChaCha8Rng, p: Prime, d: usize, prec: u64) -> Result<MatrixSeries> {
    loop {
        let rows = (0..d)
            .map(|_| {
                (0..d)
                    .map(|_| {
                        let terms = rng.gen_range(1..5);
                        random_series(rng, p, 0, 5, terms, prec)
                    })
                    .collect()
            })
            .collect();
        let u = MatrixSeries::from_rows(rows)?;
        // a constant gauge gives the trivial cocycle
        let moving = u
            .entries()
            .iter()
            .any(|e| e.terms().iter().any(|&(x, _)| x % p.as_u64() != 0));
        if moving && u.det()?.coeff(Q::from_integer(0)) != 0 {
            return Ok(u);
        }
    }
}

fn phi_gamma_suite(t: &mut Tally, p: Prime, rng: &mut ChaCha8Rng) -> Result<()> {
    let k = min_depth(p);
    let prec = if p.get() == 2 { 100 } else { 200 };
    let mut fixed_point_depth = 0;
    while pow(p, fixed_point_depth + 1) <= prec {
        fixed_point_depth += 1;
    }
    for d in 1..=2usize {
        for _ in 0..5 {
            let u = random_unimodular(rng, p, d, prec)?;
            let m = gauge_module(&u, k)?;
            check_module(t, &m, p, k, d, rng, fixed_point_depth)?;
        }
    }
    Ok(())
}

fn check_module(
    t: &mut Tally,
    m: &PhiGammaModule,
    p: Prime,
    k: u32,
    d: usize,
    rng: &mut ChaCha8Rng,
    fixed_point_depth: u32,
) -> Result<()> {
    let samples: Vec<GammaElement> = [1, 2, p.as_u64(), 1 + p.as_u64()]
        .iter()
        .map(|&a| m.element(a))
        .collect::<Result<_>>()?;
    let report = validate_module(m, &samples)?;
    t.prop("gauge modules validate with censored residuals")
        .check(report.passes(), || {
            format!("p={p} d={d}: {}", report.to_json())
        });

    let prof = matrix_sh_profile(m, 3);
    let lambda = prof.as_ref().map(|x| x.lambda).unwrap_or(f64::NAN);
    t.prop("matrix profile fits λ within 1 of k")
        .check((lambda - k as f64).abs() <= 1.0, || {
            format!("p={p} d={d}: {prof:?}")
        });
    let inv = inverse_sh_profile(m, 3)
        .map(|x| x.lambda)
        .unwrap_or(f64::NAN);
    t.prop("inverse cocycle has the same fitted λ")
        .check(inv == lambda, || format!("p={p} d={d}: {inv} vs {lambda}"));

    for g in &samples[..2] {
        let rep = fixed_point_series(m, g, None, fixed_point_depth);
        t.prop("fixed-point series reproduces H_g mod X^(T-r)")
            .check_result(
                rep.and_then(|r| {
                    let res = r.residual()?;
                    Ok(res.is_censored() && res.bound() >= r.target.prec())
                }),
                || format!("p={p} d={d} g={:?}", g.coordinate().digits()),
            );
    }

    let level = rng.gen_range(0..=2u32);
    let i_max = 3;
    let prec_num = pow(p, k + i_max) + pow(p, k) + 1;
    let lead = leveled_series(rng, p, level, k, prec_num);
    let x: Vec<PuiseuxSeries> = (0..d)
        .map(|c| {
            if c == 0 {
                lead.clone()
            } else {
                random_series(rng, p, 0, 4, 2, (prec_num / pow(p, level)).max(1))
            }
        })
        .collect();
    let vp = vector_sh_profile(m, &x, i_max)?;
    t.prop("vector classification recovers the level").check(
        vp.level == level && vp.estimate.as_ref().is_some_and(|e| e.n == level),
        || {
            format!(
                "p={p} d={d} m={level}: {:?}",
                vp.estimate.map(|e| e.profile.per_gap)
            )
        },
    );
    Ok(())
}

fn psi_tower_suite(t: &mut Tally, p: Prime, rng: &mut ChaCha8Rng) -> Result<()> {
    let k = min_depth(p);
    let depth = crate::tate_colmez::DEFAULT_TOWER_DEPTH;
    let prec = 12;
    for _ in 0..50 {
        let f = loop {
            let terms = rng.gen_range(1..6);
            let f = random_series(rng, p, 0, 8, terms, prec);
            if !f.is_zero() {
                break f;
            }
        };
        let tower = PsiTower::embed(&f, depth)?;
        t.prop("diagonal towers certified").check_result(
            psi_tower_sh_test(&tower, k).map(|v| v.is_certified()),
            || format!("p={p} f={f}"),
        );
        t.prop("tower valuation of i(f) is floor(val f)").check(
            tower.tower_val() == f.val().map(|v| v.floor().to_integer()),
            || format!("p={p} f={f}"),
        );
    }
    for _ in 0..50 {
        let terms = rng.gen_range(0..5);
        let f = random_series(rng, p, 0, 8, terms, prec);
        let h = loop {
            let terms = rng.gen_range(1..4);
            let h = random_series(rng, p, 0, 4, terms, prec);
            if h.coeff(int(0)) != 0 {
                break h;
            }
        };
        let j0 = rng.gen_range(1..=depth);
        let tower = PsiTower::perturbed(&f, &h, j0, depth)?;
        t.prop("perturbed towers are ψ-compatible")
            .check(tower.validate().is_ok(), || format!("p={p} j0={j0}"));
        let verdict = psi_tower_sh_test(&tower, k);
        t.prop("perturbed towers refuted at the perturbed index")
            .check(
                matches!(verdict, Ok(Verdict::Refuted(j)) if j == j0),
                || format!("p={p} j0={j0} f={f} h={h}: {verdict:?}"),
            );
        let raw = sh_level_classify(&tower.entries()[j0], k, 2).map(|e| k as f64 - e.raw);
        t.prop("orbit profile at the perturbed index falls below k+j")
            .check_result(raw.map(|lambda| lambda < (k as usize + j0) as f64), || {
                format!("p={p} j0={j0}")
            });
    }
    Ok(())
}
