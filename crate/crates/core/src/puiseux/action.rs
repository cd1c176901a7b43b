//! Substitution and the cyclotomic action `a . f(X) = f((1+X)^a - 1)`.

use super::kernel::{self, Terms};
use super::{p_pow, split_exponent, PuiseuxSeries};
use crate::arith::{GammaElement, PadicInt, Prime};
use crate::error::{Error, Result};
use crate::valuation::{Val, Q};
use num_traits::{One, Zero};

pub fn check_level_zero(f: &PuiseuxSeries) -> Result<()> {
    if f.exponent_level() != 0 || f.level() != 0 {
        return Err(Error::PreconditionViolation(format!(
            "expected a series in E[[X]] at integral precision, got level {}",
            f.level()
        )));
    }
    Ok(())
}

/// Coefficients of `(1+Y)^a` below `Y^bound`, where `a` is read through its
/// digits: by Lucas only `j` digitwise below `a` contribute.
pub(crate) fn binomial_terms(a: &PadicInt, bound: u64) -> Result<Terms> {
    let p = a.prime();
    if bound == 0 {
        return Ok(Vec::new());
    }
    let need = p.digits_of(bound - 1).len();
    if need > a.precision() {
        return Err(Error::InsufficientPrecision {
            needed: format!("{need} digits"),
            have: format!("{} digits", a.precision()),
        });
    }
    let mut acc: Vec<(u64, u32)> = vec![(0, 1)];
    let mut place = 1u64;
    for i in 0..need {
        let d = a.digits()[i];
        if d > 0 {
            let mut next = Vec::with_capacity(acc.len() * (d as usize + 1));
            for &(j, c) in &acc {
                for t in 0..=d {
                    let e = j + t as u64 * place;
                    if e >= bound {
                        break;
                    }
                    next.push((e, p.mul(c, p.small_binom(d, t))));
                }
            }
            acc = next;
        }
        place = place.saturating_mul(p.as_u64());
    }
    acc.retain(|t| t.1 != 0);
    acc.sort_unstable_by_key(|t| t.0);
    Ok(acc)
}

/// `(1 + X^(1/p^n))^a` modulo `X^T`.
pub fn one_plus_x_pow(a: &PadicInt, n: u32, prec: Q) -> Result<PuiseuxSeries> {
    let p = a.prime();
    let (tn, tl) = split_exponent(p, prec)?;
    let level = n.max(tl);
    let t = tn * p_pow(p, level - tl);
    let step = p_pow(p, level - n);
    let bound = t.div_ceil(step);
    let terms = binomial_terms(a, bound)?
        .into_iter()
        .map(|(j, c)| (j * step, c))
        .collect();
    Ok(PuiseuxSeries::with_terms_at(p, level, t, terms))
}

/// `(1+Y)^a - 1` below `Y^t`.
fn gamma_series(a: &PadicInt, t: u64) -> Result<Terms> {
    let mut terms = binomial_terms(a, t)?;
    if terms.first().map(|x| x.0) == Some(0) {
        let c = a.prime().sub(terms[0].1, 1);
        if c == 0 {
            terms.remove(0);
        } else {
            terms[0].1 = c;
        }
    }
    Ok(terms)
}

/// The action of a unit `a` of Z_p: `X^(1/p^n) -> (1+X^(1/p^n))^a - 1`.
/// Preserves precision and valuation.
pub fn gamma_act(a: &PadicInt, f: &PuiseuxSeries) -> Result<PuiseuxSeries> {
    if !a.is_unit() {
        return Err(Error::NotAUnit);
    }
    let p = f.prime();
    if a.prime() != p {
        return Err(crate::error::mismatch("scalar and series primes differ"));
    }
    let t = f.prec_num();
    let u = gamma_series(a, t)?;
    let terms = kernel::compose(p, f.terms(), &u, t);
    Ok(PuiseuxSeries::with_terms_at(p, f.level(), t, terms))
}

/// Action of a group element `1 + p^k a`.
pub fn gamma_act_element(g: &GammaElement, f: &PuiseuxSeries) -> Result<PuiseuxSeries> {
    gamma_act(&g.unit(), f)
}

/// `f(u)` modulo `X^T'` with `T' = min(T_u, T_f * val(u))`.
///
/// A level-`L` outer series `f(X) = F(X^(1/p^L))` is handled by substituting
/// `phi^(-L)(u)` into `F`.
pub fn substitute(f: &PuiseuxSeries, u: &PuiseuxSeries) -> Result<PuiseuxSeries> {
    if f.prime() != u.prime() {
        return Err(crate::error::mismatch("series primes differ"));
    }
    let p = f.prime();
    let inner = u.frobenius_pow(-(f.level() as i64));
    let v = match inner.val() {
        Val::Exact(v) if v > Q::zero() => v,
        _ => return Err(Error::SubstitutionDiverges),
    };
    // f's exponent numerators are integers in the variable X^(1/p^L)
    let level = inner.level();
    let (tu, u_terms) = inner.at_level(level);
    let v_num = u_terms[0].0;
    let tf = f.prec_num();
    let t = tu.min(tf.saturating_mul(v_num));
    debug_assert_eq!(Q::new(v_num as i64, p_pow(p, level) as i64), v);
    let terms = compose_general(p, f.terms(), &kernel::truncate(&u_terms, t), v_num, t);
    Ok(PuiseuxSeries::with_terms_at(p, level, t, terms))
}

fn compose_general(p: Prime, f: &[(u64, u32)], u: &[(u64, u32)], v: u64, t: u64) -> Terms {
    if v == 0 {
        return Vec::new();
    }
    kernel::compose(p, f, u, t)
}

/// `u` composed with itself `m` times, for `u` in `X + X^2 E[[X]]`.
pub fn iterate_compose(u: &PuiseuxSeries, m: u64) -> Result<PuiseuxSeries> {
    check_level_zero(u)?;
    if u.val() != Val::Exact(Q::one()) || u.coeff(Q::one()) != 1 {
        return Err(Error::PreconditionViolation(
            "iterate_compose needs u = X + O(X^2)".into(),
        ));
    }
    let mut acc = PuiseuxSeries::x(u.prime(), u.prec())?;
    let mut base = u.clone();
    let mut m = m;
    while m > 0 {
        if m & 1 == 1 {
            acc = substitute(&acc, &base)?;
        }
        m >>= 1;
        if m > 0 {
            base = substitute(&base, &base)?;
        }
    }
    Ok(acc)
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

    fn poly(pr: u64, c: &[u64], t: u64) -> PuiseuxSeries {
        PuiseuxSeries::from_coeffs(p(pr), c, t)
    }

    #[test]
    fn substitute_examples() {
        let f = poly(2, &[0, 0, 1], 10);
        let u = poly(2, &[0, 1, 1], 10);
        assert!(substitute(&f, &u)
            .unwrap()
            .eq_mod(&poly(2, &[0, 0, 1, 0, 1], 10)));
        let g = poly(3, &[1, 2, 0, 1], 6);
        let x = PuiseuxSeries::x(p(3), q(6)).unwrap();
        assert_eq!(substitute(&g, &x).unwrap(), g);
        let f = poly(2, &[0, 1, 0, 1], 5);
        let u = poly(2, &[0, 1, 1, 1], 5);
        assert_eq!(substitute(&f, &u).unwrap(), poly(2, &[0, 1, 1, 0, 1], 5));
        let unit = poly(2, &[1, 1], 5);
        assert_eq!(substitute(&f, &unit), Err(Error::SubstitutionDiverges));
    }

    #[test]
    fn one_plus_x_pow_examples() {
        let a = PadicInt::from_u64(p(2), 3, 8);
        assert_eq!(
            one_plus_x_pow(&a, 0, q(4)).unwrap(),
            poly(2, &[1, 1, 1, 1], 4)
        );
        let one = PadicInt::from_u64(p(3), 1, 8);
        let s = one_plus_x_pow(&one, 2, q(2)).unwrap();
        assert_eq!(s.terms(), &[(0, 1), (1, 1)]);
        assert_eq!(s.level(), 2);
        let minus_one = PadicInt::from_i64(p(3), -1, 8);
        assert_eq!(
            one_plus_x_pow(&minus_one, 0, q(4)).unwrap(),
            poly(3, &[1, 2, 1, 2], 4)
        );
        let short = PadicInt::from_u64(p(2), 3, 2);
        assert!(matches!(
            one_plus_x_pow(&short, 0, q(8)),
            Err(Error::InsufficientPrecision { .. })
        ));
    }

    #[test]
    fn gamma_act_examples() {
        let x = |pr, t| PuiseuxSeries::x(p(pr), q(t)).unwrap();
        let four = PadicInt::from_u64(p(3), 4, 8);
        assert_eq!(
            gamma_act(&four, &x(3, 5)).unwrap(),
            poly(3, &[0, 1, 0, 1, 1], 5)
        );
        let five = PadicInt::from_u64(p(2), 5, 8);
        assert_eq!(
            gamma_act(&five, &x(2, 6)).unwrap(),
            poly(2, &[0, 1, 0, 0, 1, 1], 6)
        );
        let f = poly(5, &[3, 1, 4, 1], 7);
        assert_eq!(gamma_act(&PadicInt::from_u64(p(5), 1, 8), &f).unwrap(), f);
        assert_eq!(
            gamma_act(&PadicInt::from_u64(p(5), 5, 8), &f),
            Err(Error::NotAUnit)
        );
    }

    #[test]
    fn iterate_compose_examples() {
        let u = poly(2, &[0, 1, 1], 5);
        let u2 = iterate_compose(&u, 2).unwrap();
        assert_eq!(u2, poly(2, &[0, 1, 0, 0, 1], 5));
        assert_eq!(iterate_compose(&u, 1).unwrap(), u);
        let x = PuiseuxSeries::x(p(2), q(5)).unwrap();
        assert_eq!(u2.sub(&x).unwrap().val(), Val::Exact(q(4)));
        assert!(iterate_compose(&poly(2, &[0, 0, 1], 5), 2).is_err());
    }
}
