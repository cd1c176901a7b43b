//! Censored valuations and three-valued verdicts.
//!
//! A truncated quantity that vanishes modulo its precision has no exact
//! valuation, only a lower bound. Comparisons against such a bound either
//! succeed or come back unresolved; they never silently fail.

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::Serialize;
use std::fmt;

/// Exact rational exponent type used for X-adic valuations and precisions.
pub type Q = Ratio<i64>;

/// A valuation that is either known exactly or only bounded below.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Val<T> {
    Exact(T),
    AtLeast(T),
}

impl<T: Copy + Ord> Val<T> {
    pub fn bound(&self) -> T {
        match *self {
            Val::Exact(v) | Val::AtLeast(v) => v,
        }
    }

    pub fn exact(&self) -> Option<T> {
        match *self {
            Val::Exact(v) => Some(v),
            Val::AtLeast(_) => None,
        }
    }

    pub fn is_censored(&self) -> bool {
        matches!(self, Val::AtLeast(_))
    }

    /// Valuation of a sum-like combination where the result is bounded by the
    /// smaller of the two; exact when the exact side is the smaller one.
    pub fn min(self, other: Self) -> Self {
        use Val::*;
        match (self, other) {
            (Exact(a), Exact(b)) => Exact(a.min(b)),
            (Exact(a), AtLeast(b)) | (AtLeast(b), Exact(a)) => {
                if a <= b {
                    Exact(a)
                } else {
                    AtLeast(b)
                }
            }
            (AtLeast(a), AtLeast(b)) => AtLeast(a.min(b)),
        }
    }

    /// `Some(v >= t)` when decidable; `None` if censoring blocks the decision.
    pub fn at_least(&self, t: T) -> Option<bool> {
        match *self {
            Val::Exact(v) => Some(v >= t),
            Val::AtLeast(v) if v >= t => Some(true),
            Val::AtLeast(_) => None,
        }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Val<U> {
        match self {
            Val::Exact(v) => Val::Exact(f(v)),
            Val::AtLeast(v) => Val::AtLeast(f(v)),
        }
    }
}

impl Val<Q> {
    /// Same comparison as [`Val::at_least`] against a real threshold.
    pub fn at_least_real(&self, t: f64) -> Option<bool> {
        let v = q_to_f64(self.bound());
        match self {
            Val::Exact(_) => Some(v >= t),
            Val::AtLeast(_) if v >= t => Some(true),
            Val::AtLeast(_) => None,
        }
    }
}

impl<T: fmt::Display> fmt::Display for Val<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Val::Exact(v) => write!(f, "{v}"),
            Val::AtLeast(v) => write!(f, ">= {v}"),
        }
    }
}

impl Serialize for Val<Q> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_val(self))
    }
}

pub fn q_to_f64(q: Q) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn format_q(q: Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn format_val(v: &Val<Q>) -> String {
    match v {
        Val::Exact(q) => format_q(*q),
        Val::AtLeast(q) => format!(">={}", format_q(*q)),
    }
}

/// Outcome of a finite-precision membership test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict<W> {
    Certified,
    Refuted(W),
    Unresolved(String),
}

impl<W> Verdict<W> {
    pub fn is_certified(&self) -> bool {
        matches!(self, Verdict::Certified)
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self, Verdict::Refuted(_))
    }

    /// CLI exit code: 0 certified, 2 refuted, 3 unresolved.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Certified => 0,
            Verdict::Refuted(_) => 2,
            Verdict::Unresolved(_) => 3,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Certified => "certified",
            Verdict::Refuted(_) => "refuted",
            Verdict::Unresolved(_) => "unresolved",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_keeps_exact_when_smaller() {
        let a: Val<i64> = Val::Exact(2);
        assert_eq!(a.min(Val::AtLeast(5)), Val::Exact(2));
        assert_eq!(Val::Exact(7).min(Val::AtLeast(5)), Val::AtLeast(5));
        assert_eq!(Val::<i64>::AtLeast(3).min(Val::AtLeast(5)), Val::AtLeast(3));
    }

    #[test]
    fn censored_comparison_is_unresolved() {
        let v: Val<i64> = Val::AtLeast(4);
        assert_eq!(v.at_least(3), Some(true));
        assert_eq!(v.at_least(9), None);
        assert_eq!(Val::Exact(4).at_least(9), Some(false));
    }
}
