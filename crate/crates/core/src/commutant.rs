//! Series commuting with the action of `Z_p^×` by composition, and the
//! solver for `u = γ_b(X^(p^n))`.

use crate::arith::{PadicInt, Prime};
use crate::error::{Error, Result};
use crate::puiseux::{gamma_act, one_plus_x_pow, substitute, PuiseuxSeries};
use crate::valuation::{Val, Q};
use num_traits::{One, Zero};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub enum CommuteVerdict {
    ConsistentToPrec {
        verified_to: Q,
    },
    /// `u ∘ γ_a` and `γ_a ∘ u` first differ at `X^exponent`.
    Refuted {
        a: PadicInt,
        exponent: Q,
    },
}

impl CommuteVerdict {
    pub fn is_consistent(&self) -> bool {
        matches!(self, CommuteVerdict::ConsistentToPrec { .. })
    }
}

/// `γ_a(X) = (1+X)^a - 1` below `X^prec`.
pub fn gamma_series(a: &PadicInt, prec: Q) -> Result<PuiseuxSeries> {
    let one = PuiseuxSeries::one(a.prime(), prec)?;
    one_plus_x_pow(a, 0, prec)?.sub(&one)
}

/// Residues `1..p-1` times `1, 1+p, 1+p^2`.
pub fn default_samples(p: Prime, digits: usize) -> Vec<PadicInt> {
    let q = p.as_u64();
    let mut out = Vec::new();
    for r in 1..q {
        for s in [1, 1 + q, 1 + q * q] {
            out.push(PadicInt::from_u64(p, r * s, digits));
        }
    }
    out
}

fn positive_val(u: &PuiseuxSeries) -> Result<Q> {
    match u.val() {
        Val::Exact(v) if v > Q::zero() => Ok(v),
        _ => Err(Error::PreconditionViolation(
            "u must have positive valuation".into(),
        )),
    }
}

/// Compares `u ∘ γ_a` with `γ_a ∘ u` for every sample.
pub fn check_commute(u: &PuiseuxSeries, samples: &[PadicInt]) -> Result<CommuteVerdict> {
    let v = positive_val(u)?;
    let inner_prec = (u.prec() / v).ceil() + Q::one();
    let mut verified_to = u.prec();
    for a in samples {
        let lhs = gamma_act(a, u)?;
        let rhs = substitute(&gamma_series(a, inner_prec)?, u)?;
        let diff = lhs.sub(&rhs)?;
        match diff.val() {
            Val::Exact(e) => {
                return Ok(CommuteVerdict::Refuted {
                    a: a.clone(),
                    exponent: e,
                })
            }
            Val::AtLeast(t) => verified_to = verified_to.min(t),
        }
    }
    Ok(CommuteVerdict::ConsistentToPrec { verified_to })
}

/// Largest `N` with `p^(N-1) < prec`, the number of digits `f` determines.
pub fn available_digits(f: &PuiseuxSeries) -> usize {
    let p = Q::from_integer(f.prime().as_u64() as i64);
    let mut n = 0;
    let mut pw = Q::one();
    while pw < f.prec() && n < 63 {
        n += 1;
        pw *= p;
    }
    n
}

/// `digit_i(b)` is the coefficient of `X^(p^i)` in `γ_b(X)`, by Lucas.
pub fn digit_recover(f: &PuiseuxSeries, digit_count: usize) -> Result<PadicInt> {
    crate::puiseux::check_level_zero(f)?;
    if f.coeff(Q::zero()) != 0 {
        return Err(Error::PreconditionViolation(
            "digit recovery needs f in X E[[X]]".into(),
        ));
    }
    let have = available_digits(f);
    if digit_count > have {
        return Err(Error::InsufficientPrecision {
            needed: format!("precision above p^{}", digit_count.saturating_sub(1)),
            have: crate::valuation::format_q(f.prec()),
        });
    }
    let p = f.prime();
    let digits = (0..digit_count as u32)
        .map(|i| f.coeff(Q::from_integer(p.as_u64().pow(i) as i64)))
        .collect();
    PadicInt::from_digits(p, digits)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommutantSolution {
    pub b: PadicInt,
    pub n: i64,
    /// `u = γ_b(X^(p^n))` was verified below `X^residual_prec`.
    pub residual_prec: Q,
}

#[derive(Serialize)]
struct SolutionJson<'a> {
    b_digits: &'a [u32],
    n: i64,
    verified_to: String,
}

impl CommutantSolution {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SolutionJson {
            b_digits: self.b.digits(),
            n: self.n,
            verified_to: format!(
                "{}/{}",
                self.residual_prec.numer(),
                self.residual_prec.denom()
            ),
        })
        .expect("plain data")
    }
}

/// Exponent `n` with `v = p^n`, if any.
fn p_power_exponent(p: Prime, v: Q) -> Option<i64> {
    let q = p.as_u64() as i64;
    let (mut num, mut den) = (*v.numer(), *v.denom());
    let mut n = 0i64;
    if num != 1 && den != 1 {
        return None;
    }
    while num > 1 {
        if num % q != 0 {
            return None;
        }
        num /= q;
        n += 1;
    }
    while den > 1 {
        if den % q != 0 {
            return None;
        }
        den /= q;
        n -= 1;
    }
    Some(n)
}

/// Number of digits of `b` that the precision of `u` determines, or 1 when
/// `u` is not of the right shape (the solver then reports why).
pub fn solvable_digits(u: &PuiseuxSeries) -> usize {
    let Ok(v) = positive_val(u) else { return 1 };
    match p_power_exponent(u.prime(), v) {
        Some(n) => available_digits(&u.frobenius_pow(-n)).max(1),
        None => 1,
    }
}

/// Solves `u = γ_b(X^(p^n))`, returning `b` to `digit_count` digits.
pub fn solve_commutant(u: &PuiseuxSeries, digit_count: usize) -> Result<CommutantSolution> {
    let v = positive_val(u)?;
    let p = u.prime();
    let n = p_power_exponent(p, v).ok_or_else(|| {
        Error::NotCommutant(format!(
            "valuation {} is not a power of {p}",
            crate::valuation::format_q(v)
        ))
    })?;
    let f = u.frobenius_pow(-n);
    if f.level() != 0 {
        return Err(Error::NotCommutant(format!(
            "u(X^(1/p^{n})) has exponents outside Z at this precision"
        )));
    }
    // every digit the precision determines, so the residual check is complete
    let all = available_digits(&f);
    if digit_count > all {
        return Err(Error::NotCommutant(format!(
            "{digit_count} digits need precision above p^{} after rescaling by p^{n}, have {}",
            digit_count - 1,
            crate::valuation::format_q(f.prec())
        )));
    }
    let b_full = digit_recover(&f, all)?;
    if b_full.digit(0) == Some(0) {
        return Err(Error::NotCommutant("linear coefficient vanishes".into()));
    }
    let gamma = gamma_act(&b_full, &PuiseuxSeries::x(p, f.prec())?)?;
    if let Val::Exact(e) = gamma.sub(&f)?.val() {
        let at = e * Q::from_integer(p.as_u64() as i64).pow(n as i32);
        return Err(Error::NotCommutant(format!(
            "residual mismatch at X^{}",
            crate::valuation::format_q(at)
        )));
    }
    Ok(CommutantSolution {
        b: b_full.truncate(digit_count),
        n,
        residual_prec: u.prec(),
    })
}
