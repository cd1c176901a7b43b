//! Mahler calculus for continuous functions `Z_p -> E~+` and empirical
//! super-Hölder profiles.
//!
//! A function is carried by a table of values on `0..p^t`. For a locally
//! constant function of level `t` this table is the whole function, so its
//! Mahler expansion is exact and has no tail. Orbit functions are carried by
//! their first `p^t` samples; their Mahler coefficients `m_n`, `n < p^t`, are
//! still exact since `m_n` only depends on `f(0), ..., f(n)`.

use crate::arith::{lucas_binom, GammaElement, PadicInt, Prime, DEFAULT_DIGITS};
use crate::error::{mismatch, Error, Result};
use crate::puiseux::{gamma_act_element, PuiseuxSeries};
use crate::valuation::{q_to_f64, Val, Verdict, Q};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FnKind {
    /// Factors through `Z/p^t`; values repeat with period `p^t`.
    LocallyConstant,
    /// Only the first `p^t` values are known.
    Samples,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousFn {
    p: Prime,
    t: u32,
    kind: FnKind,
    values: Vec<PuiseuxSeries>,
}

impl ContinuousFn {
    pub fn new(p: Prime, t: u32, kind: FnKind, values: Vec<PuiseuxSeries>) -> Result<ContinuousFn> {
        let needed = p
            .checked_pow(t)
            .ok_or_else(|| Error::PreconditionViolation(format!("p^{t} overflows")))?
            as usize;
        if values.len() < needed {
            return Err(Error::TableTooShort {
                needed,
                have: values.len(),
            });
        }
        let mut values = values;
        values.truncate(needed);
        if let Some(v) = values.iter().find(|v| v.prime() != p) {
            return Err(mismatch(format!(
                "value over F_{} in a table over F_{p}",
                v.prime()
            )));
        }
        // common precision floor
        let floor = values
            .iter()
            .map(|v| v.prec())
            .min()
            .expect("p^t >= 1 values");
        let values = values
            .iter()
            .map(|v| v.truncate(floor))
            .collect::<Result<Vec<_>>>()?;
        Ok(ContinuousFn { p, t, kind, values })
    }

    pub fn locally_constant(p: Prime, t: u32, values: Vec<PuiseuxSeries>) -> Result<ContinuousFn> {
        ContinuousFn::new(p, t, FnKind::LocallyConstant, values)
    }

    /// Tabulate a callback on `0..p^t`.
    pub fn from_callback(
        p: Prime,
        t: u32,
        kind: FnKind,
        f: impl Fn(u64) -> Result<PuiseuxSeries>,
    ) -> Result<ContinuousFn> {
        let n = p
            .checked_pow(t)
            .ok_or_else(|| Error::PreconditionViolation(format!("p^{t} overflows")))?;
        let values = (0..n).map(f).collect::<Result<Vec<_>>>()?;
        ContinuousFn::new(p, t, kind, values)
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.t
    }

    pub fn kind(&self) -> FnKind {
        self.kind
    }

    pub fn values(&self) -> &[PuiseuxSeries] {
        &self.values
    }

    pub fn prec(&self) -> Q {
        self.values[0].prec()
    }

    /// `f(i)` for a nonnegative integer argument.
    pub fn value_at(&self, i: u64) -> Result<&PuiseuxSeries> {
        let len = self.values.len() as u64;
        match self.kind {
            FnKind::LocallyConstant => Ok(&self.values[(i % len) as usize]),
            FnKind::Samples if i < len => Ok(&self.values[i as usize]),
            FnKind::Samples => Err(Error::TableTooShort {
                needed: i as usize + 1,
                have: len as usize,
            }),
        }
    }

    /// Evaluate a locally constant function at a p-adic argument.
    pub fn eval(&self, z: &PadicInt) -> Result<PuiseuxSeries> {
        if z.precision() < self.t as usize {
            return Err(Error::InsufficientPrecision {
                needed: format!("{} digits", self.t),
                have: format!("{} digits", z.precision()),
            });
        }
        let r = z.truncate(self.t as usize);
        let idx = if self.t == 0 {
            0
        } else {
            r.to_u64().expect("p^t fits")
        };
        self.value_at(idx).cloned()
    }

    /// Pointwise product on the table.
    pub fn pointwise_mul(&self, other: &ContinuousFn) -> Result<ContinuousFn> {
        if self.p != other.p || self.t != other.t {
            return Err(mismatch("tables differ in prime or level"));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.mul(b))
            .collect::<Result<Vec<_>>>()?;
        let kind = if self.kind == other.kind {
            self.kind
        } else {
            FnKind::Samples
        };
        ContinuousFn::new(self.p, self.t, kind, values)
    }
}

/// Finitely many Mahler coefficients `m_0, ..., m_nmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct MahlerExpansion {
    p: Prime,
    coeffs: Vec<PuiseuxSeries>,
}

impl MahlerExpansion {
    pub fn new(p: Prime, coeffs: Vec<PuiseuxSeries>) -> Result<MahlerExpansion> {
        if coeffs.is_empty() {
            return Err(Error::PreconditionViolation(
                "an expansion needs at least m_0".into(),
            ));
        }
        if coeffs.iter().any(|c| c.prime() != p) {
            return Err(mismatch("coefficient over a different prime"));
        }
        Ok(MahlerExpansion { p, coeffs })
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn n_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[PuiseuxSeries] {
        &self.coeffs
    }
}

/// `m_n = (Delta^n f)(0)` for `n <= n_max`, by iterated forward differences.
pub fn mahler_coeffs(f: &ContinuousFn, n_max: usize) -> Result<MahlerExpansion> {
    let mut row = (0..=n_max as u64)
        .map(|i| f.value_at(i).cloned())
        .collect::<Result<Vec<_>>>()?;
    let mut coeffs = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        coeffs.push(row[0].clone());
        for i in 0..n_max - n {
            row[i] = row[i + 1].sub(&row[i])?;
        }
        row.pop();
    }
    MahlerExpansion::new(f.p, coeffs)
}

/// `f(z) = sum_n binom(z, n) m_n`.
pub fn mahler_eval(e: &MahlerExpansion, z: &PadicInt) -> Result<PuiseuxSeries> {
    let mut acc = PuiseuxSeries::zero(e.p, e.coeffs[0].prec())?;
    for (n, m) in e.coeffs.iter().enumerate() {
        let b = lucas_binom(z, n as u64)?;
        if m.is_zero() || b.is_zero() {
            // still carries the precision of m
            acc = acc.truncate(m.prec())?;
            continue;
        }
        acc = acc.add(&m.scale(b.value()))?;
    }
    Ok(acc)
}

/// Infimum of the coefficient valuations, censoring-aware.
pub fn sup_val(e: &MahlerExpansion) -> Val<Q> {
    e.coeffs
        .iter()
        .map(|m| m.val())
        .reduce(|a, b| a.min(b))
        .expect("nonempty")
}

/// Failing Mahler index `n` and depth `i` with `p^i <= n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MahlerWitness {
    pub n: usize,
    pub i: u32,
}

/// `p^(lambda + i) + mu`, computed exactly when `lambda` is an integer.
pub fn sh_bound(p: Prime, lambda: f64, i: u32, mu: f64) -> f64 {
    let e = lambda + i as f64;
    let base = if e.fract() == 0.0 && e.abs() < 60.0 {
        (p.as_u64() as f64).powi(e as i32)
    } else {
        (p.as_u64() as f64).powf(e)
    };
    base + mu
}

/// Checks `val(m_n) >= p^lambda * p^i + mu` whenever `n >= p^i`.
///
/// For each `n` only the largest admissible `i` binds. Refutations are
/// unconditional; certification is relative to `n_max` and the precision.
pub fn sh_test_mahler(e: &MahlerExpansion, lambda: f64, mu: f64) -> Verdict<MahlerWitness> {
    let p = e.p.as_u64();
    let mut unresolved = None;
    for n in 1..=e.n_max() {
        let mut i = 0u32;
        while (p.pow(i + 1)) as usize <= n {
            i += 1;
        }
        let bound = sh_bound(e.p, lambda, i, mu);
        match e.coeffs[n].val().at_least_real(bound) {
            Some(true) => {}
            Some(false) => return Verdict::Refuted(MahlerWitness { n, i }),
            None => {
                unresolved.get_or_insert(MahlerWitness { n, i });
            }
        }
    }
    match unresolved {
        None => Verdict::Certified,
        Some(w) => Verdict::Unresolved(format!(
            "m_{} censored below the bound at depth {}",
            w.n, w.i
        )),
    }
}

/// The stronger condition `val(m_n) >= p^lambda * n + mu` for all `n`.
pub fn w_test_mahler(e: &MahlerExpansion, lambda: f64, mu: f64) -> Verdict<usize> {
    let scale = sh_bound(e.p, lambda, 0, 0.0);
    let mut unresolved = None;
    for (n, m) in e.coeffs.iter().enumerate() {
        match m.val().at_least_real(scale * n as f64 + mu) {
            Some(true) => {}
            Some(false) => return Verdict::Refuted(n),
            None => {
                unresolved.get_or_insert(n);
            }
        }
    }
    match unresolved {
        None => Verdict::Certified,
        Some(n) => Verdict::Unresolved(format!("m_{n} censored below the bound")),
    }
}

/// Valuation floors per depth together with fitted constants.
#[derive(Debug, Clone, PartialEq)]
pub struct ShProfile {
    pub p: Prime,
    pub floors: BTreeMap<u32, Val<Q>>,
    /// Per-gap estimates `log_p((w(i+1) - w(i)) / (p - 1)) - i`.
    pub per_gap: Vec<f64>,
    pub lambda: f64,
    pub mu: f64,
    pub stable: bool,
    /// Precision relative to which the floors were measured.
    pub certified_to: Q,
}

impl ShProfile {
    /// `lambda` rounded to the nearest integer when finite.
    pub fn lambda_int(&self) -> Option<i64> {
        self.lambda.is_finite().then(|| self.lambda.round() as i64)
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    let n = xs.len();
    if n % 2 == 1 || xs[n / 2 - 1] == xs[n / 2] {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

/// Fit `(lambda, mu)` to floors `w(i) ~ p^(lambda + i) + mu` using medians.
pub fn sh_profile_fit(
    p: Prime,
    floors: &BTreeMap<u32, Val<Q>>,
    certified_to: Q,
) -> Result<ShProfile> {
    let exact: BTreeMap<u32, f64> = floors
        .iter()
        .filter_map(|(&i, v)| v.exact().map(|q| (i, q_to_f64(q))))
        .collect();
    if exact.len() < 2 {
        return Err(Error::TooFewPoints);
    }
    let pf = p.as_u64() as f64;
    let mut per_gap = Vec::new();
    for (&i, &w) in &exact {
        if let Some(&w_next) = exact.get(&(i + 1)) {
            let gap = w_next - w;
            per_gap.push(if gap > 0.0 {
                (gap / (pf - 1.0)).ln() / pf.ln() - i as f64
            } else {
                f64::NEG_INFINITY
            });
        }
    }
    if per_gap.is_empty() {
        return Err(Error::TooFewPoints);
    }
    // snap estimates that are integers up to rounding noise
    let per_gap: Vec<f64> = per_gap
        .into_iter()
        .map(|x| {
            if (x - x.round()).abs() < 1e-9 {
                x.round()
            } else {
                x
            }
        })
        .collect();
    let lambda = median(per_gap.clone());
    let mu = if lambda.is_finite() {
        median(
            exact
                .iter()
                .map(|(&i, &w)| w - sh_bound(p, lambda, i, 0.0))
                .collect(),
        )
    } else {
        median(exact.values().copied().collect())
    };
    let finite = per_gap.iter().all(|x| x.is_finite());
    let spread = per_gap.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - per_gap.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(ShProfile {
        p,
        floors: floors.clone(),
        per_gap,
        lambda,
        mu,
        stable: finite && spread <= 1.0,
        certified_to,
    })
}

impl Serialize for ShProfile {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Floors<'a>(&'a BTreeMap<u32, Val<Q>>);
        impl Serialize for Floors<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut m = s.serialize_map(Some(self.0.len()))?;
                for (i, v) in self.0 {
                    m.serialize_entry(&i.to_string(), v)?;
                }
                m.end()
            }
        }
        let mut m = s.serialize_map(Some(5))?;
        m.serialize_entry("floors", &Floors(&self.floors))?;
        m.serialize_entry("lambda", &JsonReal(self.lambda))?;
        m.serialize_entry("mu", &JsonReal(self.mu))?;
        m.serialize_entry("stable", &self.stable)?;
        m.serialize_entry(
            "certified_to",
            &crate::valuation::format_q(self.certified_to),
        )?;
        m.end()
    }
}

/// A real number that serializes non-finite values as strings.
pub(crate) struct JsonReal(pub f64);

impl Serialize for JsonReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else if self.0 > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

/// Digits needed so that `1 + p^k a` acts on series of precision numerator `t`.
pub(crate) fn digits_for(p: Prime, t: u64) -> usize {
    DEFAULT_DIGITS.max(p.digits_of(t.saturating_sub(1)).len())
}

/// Sampled elements of `Gamma_(k+i)`: coordinates `p^i b` with
/// `b in {1, ..., p-1, 1+p}`.
pub fn depth_samples(p: Prime, k: u32, i: u32, digits: usize) -> Result<Vec<GammaElement>> {
    let pi = p
        .checked_pow(i)
        .ok_or_else(|| Error::PreconditionViolation(format!("p^{i} overflows")))?;
    let q = p.as_u64();
    (1..q)
        .chain(std::iter::once(1 + q))
        .map(|b| GammaElement::from_coordinate(p, k, b * pi, digits))
        .collect()
}

/// Floors `w(i) = min_g val(g.m - m)` over the depth samples, made
/// nondecreasing by folding in deeper samples.
pub fn floors_by_depth(
    p: Prime,
    k: u32,
    i_max: u32,
    digits: usize,
    mut displacement: impl FnMut(&GammaElement) -> Result<Val<Q>>,
) -> Result<BTreeMap<u32, Val<Q>>> {
    let mut raw = Vec::with_capacity(i_max as usize + 1);
    for i in 0..=i_max {
        let mut w: Option<Val<Q>> = None;
        for g in depth_samples(p, k, i, digits)? {
            let d = displacement(&g)?;
            w = Some(match w {
                None => d,
                Some(prev) => prev.min(d),
            });
        }
        raw.push(w.expect("at least one sample"));
    }
    let mut floors = BTreeMap::new();
    let mut acc: Option<Val<Q>> = None;
    for (i, w) in raw.into_iter().enumerate().rev() {
        let v = match acc {
            None => w,
            Some(a) => a.min(w),
        };
        acc = Some(v);
        floors.insert(i as u32, v);
    }
    Ok(floors)
}

/// Orbit floors of a series under `Gamma_k`.
pub fn orbit_floors(m: &PuiseuxSeries, k: u32, i_max: u32) -> Result<BTreeMap<u32, Val<Q>>> {
    let digits = digits_for(m.prime(), m.prec_num()) + i_max as usize;
    floors_by_depth(m.prime(), k, i_max, digits, |g| {
        Ok(gamma_act_element(g, m)?.sub(m)?.val())
    })
}

/// An orbit function `a -> (1 + p^k a) . m` on `0..p^t`, with its floors
/// for depths `0..=t`.
#[derive(Debug, Clone)]
pub struct OrbitFunction {
    pub function: ContinuousFn,
    pub floors: BTreeMap<u32, Val<Q>>,
}

pub fn orbit_fn(m: &PuiseuxSeries, k: u32, t: u32) -> Result<OrbitFunction> {
    let p = m.prime();
    let digits = digits_for(p, m.prec_num()) + t as usize;
    let function = ContinuousFn::from_callback(p, t, FnKind::Samples, |a| {
        let g = GammaElement::from_coordinate(p, k, a, digits)?;
        gamma_act_element(&g, m)
    })?;
    let floors = orbit_floors(m, k, t)?;
    Ok(OrbitFunction { function, floors })
}

/// Fitted orbit profile of a series under `Gamma_k`.
pub fn orbit_profile(m: &PuiseuxSeries, k: u32, i_max: u32) -> Result<ShProfile> {
    let floors = orbit_floors(m, k, i_max)?;
    sh_profile_fit(m.prime(), &floors, m.prec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn q(n: i64) -> Q {
        Q::from_integer(n)
    }

    fn floors(pairs: &[(u32, i64)]) -> BTreeMap<u32, Val<Q>> {
        pairs.iter().map(|&(i, w)| (i, Val::Exact(q(w)))).collect()
    }

    #[test]
    fn binomial_basis_function() {
        let pr = p(3);
        let f = ContinuousFn::from_callback(pr, 2, FnKind::Samples, |z| {
            PuiseuxSeries::constant(pr, z, q(4))
        })
        .unwrap();
        let e = mahler_coeffs(&f, 8).unwrap();
        assert_eq!(e.coeffs()[1], PuiseuxSeries::one(pr, q(4)).unwrap());
        for (n, m) in e.coeffs().iter().enumerate() {
            if n != 1 {
                assert!(m.is_zero(), "m_{n} = {m}");
            }
        }
    }

    #[test]
    fn two_point_function() {
        let pr = p(2);
        let c0 = PuiseuxSeries::from_coeffs(pr, &[1, 1], 5);
        let c1 = PuiseuxSeries::from_coeffs(pr, &[0, 1, 1], 5);
        let f = ContinuousFn::locally_constant(pr, 1, vec![c0.clone(), c1.clone()]).unwrap();
        let e = mahler_coeffs(&f, 5).unwrap();
        assert_eq!(e.coeffs()[0], c0);
        assert_eq!(e.coeffs()[1], c1.sub(&c0).unwrap());
        assert!(e.coeffs()[2..].iter().all(|m| m.is_zero()));
    }

    #[test]
    fn orbit_of_one_plus_x() {
        let pr = p(3);
        let f = ContinuousFn::from_callback(pr, 2, FnKind::Samples, |a| {
            crate::puiseux::one_plus_x_pow(&PadicInt::from_u64(pr, a, 8), 0, q(30))
        })
        .unwrap();
        let e = mahler_coeffs(&f, 8).unwrap();
        for (n, m) in e.coeffs().iter().enumerate() {
            assert_eq!(
                *m,
                PuiseuxSeries::monomial(pr, q(n as i64), 1, q(30)).unwrap()
            );
        }
        assert_eq!(sup_val(&e), Val::Exact(q(0)));
        assert!(sh_test_mahler(&e, 0.0, 0.0).is_certified());
    }

    #[test]
    fn eval_examples() {
        let pr = p(3);
        let e = MahlerExpansion::new(
            pr,
            vec![
                PuiseuxSeries::one(pr, q(5)).unwrap(),
                PuiseuxSeries::x(pr, q(5)).unwrap(),
            ],
        )
        .unwrap();
        let two = PadicInt::from_u64(pr, 2, 4);
        assert_eq!(
            mahler_eval(&e, &two).unwrap(),
            PuiseuxSeries::from_coeffs(pr, &[1, 2], 5)
        );
        assert_eq!(
            mahler_eval(&e, &PadicInt::zero(pr, 4)).unwrap(),
            e.coeffs()[0]
        );
    }

    #[test]
    fn sup_val_examples() {
        let pr = p(3);
        let e = MahlerExpansion::new(
            pr,
            vec![
                PuiseuxSeries::monomial(pr, q(2), 1, q(5)).unwrap(),
                PuiseuxSeries::x(pr, q(5)).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(sup_val(&e), Val::Exact(q(1)));
        let z = MahlerExpansion::new(pr, vec![PuiseuxSeries::zero(pr, q(7)).unwrap(); 3]).unwrap();
        assert_eq!(sup_val(&z), Val::AtLeast(q(7)));
    }

    #[test]
    fn sh_test_examples() {
        let pr = p(2);
        let zero = PuiseuxSeries::zero(pr, q(10)).unwrap();
        let one = PuiseuxSeries::one(pr, q(10)).unwrap();
        let e = MahlerExpansion::new(pr, vec![zero.clone(), zero.clone(), one]).unwrap();
        assert_eq!(
            sh_test_mahler(&e, 0.0, 0.0),
            Verdict::Refuted(MahlerWitness { n: 2, i: 1 })
        );
        let z = MahlerExpansion::new(pr, vec![zero; 6]).unwrap();
        assert!(matches!(
            sh_test_mahler(&z, 5.0, 0.0),
            Verdict::Unresolved(_)
        ));
    }

    #[test]
    fn profile_fit_examples() {
        let fit = sh_profile_fit(p(3), &floors(&[(0, 3), (1, 9), (2, 27)]), q(100)).unwrap();
        assert_eq!((fit.lambda, fit.mu), (1.0, 0.0));
        assert!(fit.stable);
        let fit = sh_profile_fit(p(2), &floors(&[(0, 1), (1, 2), (2, 4)]), q(100)).unwrap();
        assert_eq!((fit.lambda, fit.mu), (0.0, 0.0));
        let flat = sh_profile_fit(p(2), &floors(&[(0, 1), (1, 1)]), q(100)).unwrap();
        assert_eq!(flat.lambda, f64::NEG_INFINITY);
        assert!(!flat.stable);
        let mut one = floors(&[(0, 1)]);
        one.insert(1, Val::AtLeast(q(5)));
        assert_eq!(sh_profile_fit(p(2), &one, q(5)), Err(Error::TooFewPoints));
    }

    #[test]
    fn orbit_floor_examples() {
        let pr = p(3);
        let x = PuiseuxSeries::x(pr, q(200)).unwrap();
        let w = orbit_floors(&x, 1, 2).unwrap();
        assert_eq!(w[&0], Val::Exact(q(3)));
        assert_eq!(w[&2], Val::Exact(q(27)));
        let one = PuiseuxSeries::one(pr, q(50)).unwrap();
        assert!(orbit_floors(&one, 1, 2)
            .unwrap()
            .values()
            .all(|v| v.is_censored()));
        let cube_root = PuiseuxSeries::monomial(pr, Q::new(1, 3), 1, q(60)).unwrap();
        let w = orbit_floors(&cube_root, 1, 3).unwrap();
        assert_eq!(w[&0], Val::Exact(q(1)));
        assert_eq!(w[&3], Val::Exact(q(27)));
    }

    #[test]
    fn table_length_is_checked() {
        let pr = p(2);
        let one = PuiseuxSeries::one(pr, q(3)).unwrap();
        assert_eq!(
            ContinuousFn::locally_constant(pr, 2, vec![one.clone(); 3]),
            Err(Error::TableTooShort { needed: 4, have: 3 })
        );
        let f = ContinuousFn::new(pr, 1, FnKind::Samples, vec![one.clone(); 2]).unwrap();
        assert!(matches!(
            mahler_coeffs(&f, 2),
            Err(Error::TableTooShort { .. })
        ));
    }

    #[test]
    fn profile_serializes_with_string_keys() {
        let fit = sh_profile_fit(p(2), &floors(&[(0, 1), (1, 2), (2, 4)]), q(16)).unwrap();
        let json = serde_json::to_string(&fit).unwrap();
        assert_eq!(
            json,
            r#"{"floors":{"0":"1","1":"2","2":"4"},"lambda":0.0,"mu":0.0,"stable":true,"certified_to":"16"}"#
        );
    }
}
