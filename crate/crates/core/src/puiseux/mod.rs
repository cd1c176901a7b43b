//! Truncated Puiseux series over F_p with exponents in `(1/p^n) Z_{>=0}`:
//! the ring of integers of the perfectoid field, at finite precision.
//!
//! A series at `level` n stores each exponent `e` as the integer numerator
//! `e * p^n`, and its truncation order `T` as `prec_num = T * p^n`. The
//! stored level is always minimal for the exponents and the precision
//! together, so structural equality is mathematical equality at matched
//! precision.

mod action;
pub(crate) mod kernel;
mod text;

pub use action::{
    check_level_zero, gamma_act, gamma_act_element, iterate_compose, one_plus_x_pow, substitute,
};
pub(crate) use text::json_offset;
pub use text::{parse_text, SeriesJson};

use crate::arith::{FpElem, Prime};
use crate::error::{mismatch, Error, Result};
use crate::valuation::{Val, Q};
use kernel::Terms;
use num_traits::{Signed, Zero};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PuiseuxSeries {
    p: Prime,
    level: u32,
    prec_num: u64,
    terms: Terms,
}

/// Decompose a nonnegative rational with p-power denominator into
/// `(numerator, level)` with minimal level.
pub fn split_exponent(p: Prime, q: Q) -> Result<(u64, u32)> {
    if q.is_negative() {
        return Err(Error::PreconditionViolation(format!(
            "negative exponent {q} not supported"
        )));
    }
    let mut den = *q.denom() as u64;
    let mut level = 0u32;
    while den > 1 {
        if den % p.as_u64() != 0 {
            return Err(Error::PreconditionViolation(format!(
                "denominator of {q} is not a power of {p}"
            )));
        }
        den /= p.as_u64();
        level += 1;
    }
    Ok((*q.numer() as u64, level))
}

pub(crate) fn p_pow(p: Prime, e: u32) -> u64 {
    p.checked_pow(e).expect("exponent denominator overflow")
}

impl PuiseuxSeries {
    /// Build from raw parts, reducing coefficients, merging duplicates and
    /// dropping terms at or above the precision.
    pub fn from_parts(
        p: Prime,
        level: u32,
        prec_num: u64,
        terms: Vec<(u64, u64)>,
    ) -> PuiseuxSeries {
        let mut terms: Vec<(u64, u64)> = terms.into_iter().filter(|t| t.0 < prec_num).collect();
        terms.sort_unstable_by_key(|t| t.0);
        let mut merged: Terms = Vec::with_capacity(terms.len());
        for (e, c) in terms {
            let c = p.reduce(c);
            match merged.last_mut() {
                Some(last) if last.0 == e => last.1 = p.add(last.1, c),
                _ => merged.push((e, c)),
            }
        }
        merged.retain(|t| t.1 != 0);
        PuiseuxSeries::from_sorted(p, level, prec_num, merged)
    }

    pub(crate) fn from_sorted(p: Prime, level: u32, prec_num: u64, terms: Terms) -> PuiseuxSeries {
        let mut s = PuiseuxSeries {
            p,
            level,
            prec_num,
            terms,
        };
        s.normalize();
        s
    }

    /// Strict constructor used by parsers: terms must already be canonical.
    pub fn try_from_parts(
        p: Prime,
        level: u32,
        prec_num: u64,
        terms: Vec<(u64, u32)>,
    ) -> Result<PuiseuxSeries> {
        for w in terms.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::PreconditionViolation(
                    "terms must be strictly ascending in exponent".into(),
                ));
            }
        }
        for &(e, c) in &terms {
            if c == 0 || c >= p.get() {
                return Err(Error::PreconditionViolation(format!(
                    "coefficient {c} outside 1..{p}"
                )));
            }
            if e >= prec_num {
                return Err(Error::PreconditionViolation(format!(
                    "exponent numerator {e} not below precision numerator {prec_num}"
                )));
            }
        }
        p.checked_pow(level)
            .ok_or_else(|| Error::PreconditionViolation(format!("level {level} too large")))?;
        Ok(PuiseuxSeries::from_sorted(p, level, prec_num, terms))
    }

    pub fn zero(p: Prime, prec: Q) -> Result<PuiseuxSeries> {
        let (num, level) = split_exponent(p, prec)?;
        Ok(PuiseuxSeries::from_sorted(p, level, num, Vec::new()))
    }

    pub fn monomial(p: Prime, exponent: Q, coeff: u64, prec: Q) -> Result<PuiseuxSeries> {
        let (en, el) = split_exponent(p, exponent)?;
        let (tn, tl) = split_exponent(p, prec)?;
        let level = el.max(tl);
        let en = en * p_pow(p, level - el);
        let tn = tn * p_pow(p, level - tl);
        Ok(PuiseuxSeries::from_parts(p, level, tn, vec![(en, coeff)]))
    }

    pub fn constant(p: Prime, c: u64, prec: Q) -> Result<PuiseuxSeries> {
        PuiseuxSeries::monomial(p, Q::zero(), c, prec)
    }

    pub fn one(p: Prime, prec: Q) -> Result<PuiseuxSeries> {
        PuiseuxSeries::constant(p, 1, prec)
    }

    /// The variable `X` itself.
    pub fn x(p: Prime, prec: Q) -> Result<PuiseuxSeries> {
        PuiseuxSeries::monomial(p, Q::from_integer(1), 1, prec)
    }

    /// Level-0 series from a dense coefficient list `c_0 + c_1 X + ...`.
    pub fn from_coeffs(p: Prime, coeffs: &[u64], prec: u64) -> PuiseuxSeries {
        PuiseuxSeries::from_parts(
            p,
            0,
            prec,
            coeffs
                .iter()
                .enumerate()
                .map(|(e, &c)| (e as u64, c))
                .collect(),
        )
    }

    fn normalize(&mut self) {
        let q = self.p.as_u64();
        while self.level > 0
            && self.prec_num % q == 0
            && self.terms.iter().all(|&(e, _)| e % q == 0)
        {
            self.level -= 1;
            self.prec_num /= q;
            for t in self.terms.iter_mut() {
                t.0 /= q;
            }
        }
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn prec_num(&self) -> u64 {
        self.prec_num
    }

    pub fn terms(&self) -> &[(u64, u32)] {
        &self.terms
    }

    pub fn denom(&self) -> u64 {
        p_pow(self.p, self.level)
    }

    pub fn prec(&self) -> Q {
        Q::new(self.prec_num as i64, self.denom() as i64)
    }

    pub fn exponent(&self, num: u64) -> Q {
        Q::new(num as i64, self.denom() as i64)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// `(exponent, coefficient)` pairs in ascending order.
    pub fn iter_terms(&self) -> impl Iterator<Item = (Q, FpElem)> + '_ {
        self.terms
            .iter()
            .map(move |&(e, c)| (self.exponent(e), FpElem::new(self.p, c as u64)))
    }

    pub fn coeff(&self, exponent: Q) -> u32 {
        let scaled = exponent * Q::from_integer(self.denom() as i64);
        if !scaled.is_integer() || scaled.is_negative() {
            return 0;
        }
        let e = *scaled.numer() as u64;
        match self.terms.binary_search_by_key(&e, |t| t.0) {
            Ok(i) => self.terms[i].1,
            Err(_) => 0,
        }
    }

    /// X-adic valuation; censored at the precision for a truncated zero.
    pub fn val(&self) -> Val<Q> {
        match self.terms.first() {
            Some(&(e, _)) => Val::Exact(self.exponent(e)),
            None => Val::AtLeast(self.prec()),
        }
    }

    /// Minimal `n` with every stored exponent in `(1/p^n) Z`, ignoring the
    /// precision's own denominator.
    pub fn exponent_level(&self) -> u32 {
        let q = self.p.as_u64();
        let mut level = self.level;
        let mut div = 1u64;
        while level > 0 && self.terms.iter().all(|&(e, _)| (e / div) % q == 0) {
            level -= 1;
            div *= q;
        }
        level
    }

    /// Numerators and precision rescaled to a level `>= self.level`.
    pub(crate) fn at_level(&self, level: u32) -> (u64, Terms) {
        debug_assert!(level >= self.level);
        let s = p_pow(self.p, level - self.level);
        (
            self.prec_num * s,
            self.terms.iter().map(|&(e, c)| (e * s, c)).collect(),
        )
    }

    fn check(&self, other: &PuiseuxSeries) -> Result<()> {
        if self.p != other.p {
            return Err(mismatch(format!(
                "series over F_{} vs F_{}",
                self.p, other.p
            )));
        }
        Ok(())
    }

    fn val_num_at(&self, level: u32) -> u64 {
        let s = p_pow(self.p, level - self.level);
        match self.terms.first() {
            Some(&(e, _)) => e * s,
            None => self.prec_num * s,
        }
    }

    pub fn truncate(&self, prec: Q) -> Result<PuiseuxSeries> {
        if prec >= self.prec() {
            return Ok(self.clone());
        }
        let (num, l) = split_exponent(self.p, prec)?;
        let level = l.max(self.level);
        let (_, terms) = self.at_level(level);
        let t = num * p_pow(self.p, level - l);
        Ok(PuiseuxSeries::from_sorted(
            self.p,
            level,
            t,
            kernel::truncate(&terms, t),
        ))
    }

    pub fn add(&self, other: &PuiseuxSeries) -> Result<PuiseuxSeries> {
        self.check(other)?;
        let level = self.level.max(other.level);
        let (ta, a) = self.at_level(level);
        let (tb, b) = other.at_level(level);
        let t = ta.min(tb);
        Ok(PuiseuxSeries::from_sorted(
            self.p,
            level,
            t,
            kernel::add(self.p, &a, &b, t),
        ))
    }

    pub fn neg(&self) -> PuiseuxSeries {
        PuiseuxSeries {
            p: self.p,
            level: self.level,
            prec_num: self.prec_num,
            terms: kernel::neg(self.p, &self.terms),
        }
    }

    pub fn sub(&self, other: &PuiseuxSeries) -> Result<PuiseuxSeries> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: u32) -> PuiseuxSeries {
        PuiseuxSeries::from_sorted(
            self.p,
            self.level,
            self.prec_num,
            kernel::scale(self.p, &self.terms, c),
        )
    }

    /// Product with precision `min(T_f + val g, T_g + val f)`.
    pub fn mul(&self, other: &PuiseuxSeries) -> Result<PuiseuxSeries> {
        self.check(other)?;
        let level = self.level.max(other.level);
        let (ta, a) = self.at_level(level);
        let (tb, b) = other.at_level(level);
        let t = (ta + other.val_num_at(level)).min(tb + self.val_num_at(level));
        Ok(PuiseuxSeries::from_sorted(
            self.p,
            level,
            t,
            kernel::mul(self.p, &a, &b, t),
        ))
    }

    pub fn pow(&self, e: u64) -> Result<PuiseuxSeries> {
        let mut acc = PuiseuxSeries::one(self.p, self.prec() * Q::from_integer(e.max(1) as i64))?;
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Multiply by `X^q`, raising the precision by `q`.
    pub fn mul_monomial(&self, q: Q) -> Result<PuiseuxSeries> {
        let (qn, ql) = split_exponent(self.p, q)?;
        let level = ql.max(self.level);
        let (t, terms) = self.at_level(level);
        let shift = qn * p_pow(self.p, level - ql);
        Ok(PuiseuxSeries::from_sorted(
            self.p,
            level,
            t + shift,
            kernel::shift(&terms, shift, t + shift),
        ))
    }

    /// Divide by `X^q`; every stored exponent must be at least `q` and the
    /// precision drops by `q`.
    pub fn div_monomial(&self, q: Q) -> Result<PuiseuxSeries> {
        let (qn, ql) = split_exponent(self.p, q)?;
        let level = ql.max(self.level);
        let (t, terms) = self.at_level(level);
        let shift = qn * p_pow(self.p, level - ql);
        if t < shift || terms.first().is_some_and(|&(e, _)| e < shift) {
            return Err(Error::PreconditionViolation(format!(
                "series not divisible by X^{q} at precision {}",
                self.prec()
            )));
        }
        Ok(PuiseuxSeries::from_sorted(
            self.p,
            level,
            t - shift,
            terms.into_iter().map(|(e, c)| (e - shift, c)).collect(),
        ))
    }

    /// Inverse of a unit (nonzero constant term), at the same precision.
    pub fn inv(&self) -> Result<PuiseuxSeries> {
        match self.terms.first() {
            Some(&(0, _)) => {}
            _ => return Err(Error::DivisionByZero),
        }
        let terms =
            kernel::inv_unit(self.p, &self.terms, self.prec_num).ok_or(Error::DivisionByZero)?;
        Ok(PuiseuxSeries::from_sorted(
            self.p,
            self.level,
            self.prec_num,
            terms,
        ))
    }

    /// Factor `f = X^v u` with `u` a unit and return `(v, u^{-1})`.
    pub fn inv_with_monomial(&self) -> Result<(Q, PuiseuxSeries)> {
        let v = self.val().exact().ok_or(Error::DivisionByZero)?;
        let unit = self.div_monomial(v)?;
        Ok((v, unit.inv()?))
    }

    /// `f(X) -> f(X^p)`.
    pub fn frobenius(&self) -> PuiseuxSeries {
        if self.level > 0 {
            PuiseuxSeries::from_sorted(self.p, self.level - 1, self.prec_num, self.terms.clone())
        } else {
            let q = self.p.as_u64();
            PuiseuxSeries::from_sorted(
                self.p,
                0,
                self.prec_num * q,
                kernel::frob(self.p, &self.terms, self.prec_num * q),
            )
        }
    }

    /// `f(X) -> f(X^(1/p))`; coefficientwise p-th roots are trivial over F_p.
    pub fn inv_frobenius(&self) -> PuiseuxSeries {
        PuiseuxSeries::from_sorted(self.p, self.level + 1, self.prec_num, self.terms.clone())
    }

    pub fn frobenius_pow(&self, i: i64) -> PuiseuxSeries {
        let mut out = self.clone();
        for _ in 0..i.unsigned_abs() {
            out = if i > 0 {
                out.frobenius()
            } else {
                out.inv_frobenius()
            };
        }
        out
    }

    /// Derivative of a level-0 series.
    pub fn derivative(&self) -> Result<PuiseuxSeries> {
        check_level_zero(self)?;
        let terms = self
            .terms
            .iter()
            .filter(|&&(e, _)| e > 0)
            .map(|&(e, c)| (e - 1, c as u64 * (e % self.p.as_u64())))
            .collect();
        Ok(PuiseuxSeries::from_parts(
            self.p,
            0,
            self.prec_num.saturating_sub(1),
            terms,
        ))
    }

    /// Valuation of `self - other` at the common precision.
    pub fn distance(&self, other: &PuiseuxSeries) -> Result<Val<Q>> {
        Ok(self.sub(other)?.val())
    }

    /// Agreement modulo the smaller of the two precisions.
    pub fn eq_mod(&self, other: &PuiseuxSeries) -> bool {
        self.sub(other).map(|d| d.is_zero()).unwrap_or(false)
    }

    /// The coefficients of a level-0 series as a dense vector below `X^T`.
    pub fn dense_coeffs(&self) -> Result<Vec<u32>> {
        check_level_zero(self)?;
        let mut out = vec![0u32; self.prec_num as usize];
        for &(e, c) in &self.terms {
            out[e as usize] = c;
        }
        Ok(out)
    }

    /// Same series with the level forced up to `level`.
    pub(crate) fn with_terms_at(
        p: Prime,
        level: u32,
        prec_num: u64,
        terms: Terms,
    ) -> PuiseuxSeries {
        PuiseuxSeries::from_sorted(p, level, prec_num, terms)
    }
}

impl fmt::Display for PuiseuxSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        text::write_text(self, f)?;
        write!(f, " + O(X^{})", text::format_exponent(self.prec()))
    }
}
