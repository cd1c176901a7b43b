//! Scalar arithmetic: the prime field, fixed-precision p-adic integers,
//! Lucas binomials and the groups `1 + p^k Z_p`.

use crate::error::{mismatch, Error, Result};
use crate::valuation::Val;
use std::fmt;

/// Default number of p-adic digits carried by scalars.
pub const DEFAULT_DIGITS: usize = 16;

/// A validated prime modulus. Kept below 2^16 so that products of residues
/// accumulate in `u64` without intermediate reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u32);

impl Prime {
    pub fn new(p: u64) -> Result<Prime> {
        if !(2..1 << 16).contains(&p) || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Prime(p as u32))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn as_u64(self) -> u64 {
        self.0 as u64
    }

    #[inline]
    pub fn reduce(self, x: u64) -> u32 {
        (x % self.0 as u64) as u32
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.0 {
            s - self.0
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.0 - b
        }
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.0 as u64) as u32
    }

    pub fn pow(self, a: u32, mut e: u64) -> u32 {
        let mut base = a % self.0;
        let mut acc = 1 % self.0;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(self, a: u32) -> Result<u32> {
        if a % self.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(a, self.0 as u64 - 2))
    }

    /// `binom(a, b) mod p` for residues `a, b < p`.
    pub fn small_binom(self, a: u32, b: u32) -> u32 {
        if b > a {
            return 0;
        }
        let b = b.min(a - b);
        let mut num = 1u32;
        let mut den = 1u32;
        for j in 0..b {
            num = self.mul(num, a - j);
            den = self.mul(den, j + 1);
        }
        // den is a product of integers < p, hence invertible
        self.mul(num, self.pow(den, self.0 as u64 - 2))
    }

    /// Base-p digits of `n`, little-endian; empty for zero.
    pub fn digits_of(self, mut n: u64) -> Vec<u32> {
        let p = self.as_u64();
        let mut out = Vec::new();
        while n > 0 {
            out.push((n % p) as u32);
            n /= p;
        }
        out
    }

    /// `p^e`, or `None` on overflow.
    pub fn checked_pow(self, e: u32) -> Option<u64> {
        self.as_u64().checked_pow(e)
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// An element of F_p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FpElem {
    p: Prime,
    value: u32,
}

impl FpElem {
    pub fn new(p: Prime, value: u64) -> FpElem {
        FpElem {
            p,
            value: p.reduce(value),
        }
    }

    pub fn from_i64(p: Prime, value: i64) -> FpElem {
        let m = p.as_u64() as i64;
        FpElem {
            p,
            value: value.rem_euclid(m) as u32,
        }
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn check(&self, other: &FpElem) -> Result<()> {
        if self.p != other.p {
            return Err(mismatch(format!("F_{} vs F_{}", self.p, other.p)));
        }
        Ok(())
    }

    pub fn add(&self, other: &FpElem) -> Result<FpElem> {
        self.check(other)?;
        Ok(FpElem {
            p: self.p,
            value: self.p.add(self.value, other.value),
        })
    }

    pub fn sub(&self, other: &FpElem) -> Result<FpElem> {
        self.check(other)?;
        Ok(FpElem {
            p: self.p,
            value: self.p.sub(self.value, other.value),
        })
    }

    pub fn mul(&self, other: &FpElem) -> Result<FpElem> {
        self.check(other)?;
        Ok(FpElem {
            p: self.p,
            value: self.p.mul(self.value, other.value),
        })
    }

    pub fn neg(&self) -> FpElem {
        FpElem {
            p: self.p,
            value: self.p.neg(self.value),
        }
    }

    pub fn inv(&self) -> Result<FpElem> {
        Ok(FpElem {
            p: self.p,
            value: self.p.inv(self.value)?,
        })
    }

    pub fn pow(&self, e: u64) -> FpElem {
        FpElem {
            p: self.p,
            value: self.p.pow(self.value, e),
        }
    }
}

impl fmt::Display for FpElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// A p-adic integer known modulo `p^N`, stored as `N` little-endian digits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PadicInt {
    p: Prime,
    digits: Vec<u32>,
}

impl PadicInt {
    pub fn from_digits(p: Prime, digits: Vec<u32>) -> Result<PadicInt> {
        if digits.is_empty() {
            return Err(Error::PreconditionViolation(
                "p-adic precision must be at least one digit".into(),
            ));
        }
        if let Some(d) = digits.iter().find(|&&d| d >= p.get()) {
            return Err(Error::PreconditionViolation(format!(
                "digit {d} out of range for p = {p}"
            )));
        }
        Ok(PadicInt { p, digits })
    }

    pub fn zero(p: Prime, precision: usize) -> PadicInt {
        PadicInt {
            p,
            digits: vec![0; precision.max(1)],
        }
    }

    pub fn from_u64(p: Prime, mut v: u64, precision: usize) -> PadicInt {
        let precision = precision.max(1);
        let mut digits = Vec::with_capacity(precision);
        for _ in 0..precision {
            digits.push((v % p.as_u64()) as u32);
            v /= p.as_u64();
        }
        PadicInt { p, digits }
    }

    /// Negative values are stored by their p-adic expansion, so `-1` has
    /// every digit equal to `p - 1`.
    pub fn from_i64(p: Prime, v: i64, precision: usize) -> PadicInt {
        let magnitude = PadicInt::from_u64(p, v.unsigned_abs(), precision);
        if v < 0 {
            magnitude.neg()
        } else {
            magnitude
        }
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn precision(&self) -> usize {
        self.digits.len()
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn digit(&self, i: usize) -> Option<u32> {
        self.digits.get(i).copied()
    }

    pub fn is_unit(&self) -> bool {
        self.digits[0] != 0
    }

    pub fn is_zero(&self) -> bool {
        self.digits.iter().all(|&d| d == 0)
    }

    /// The representative in `[0, p^N)`, if it fits in a `u64`.
    pub fn to_u64(&self) -> Option<u64> {
        let mut acc: u64 = 0;
        for &d in self.digits.iter().rev() {
            acc = acc.checked_mul(self.p.as_u64())?.checked_add(d as u64)?;
        }
        Some(acc)
    }

    /// p-adic valuation; censored at `N` when every stored digit vanishes.
    pub fn val(&self) -> Val<u32> {
        match self.digits.iter().position(|&d| d != 0) {
            Some(i) => Val::Exact(i as u32),
            None => Val::AtLeast(self.digits.len() as u32),
        }
    }

    /// Reduce to a lower precision.
    pub fn truncate(&self, precision: usize) -> PadicInt {
        let n = precision.clamp(1, self.digits.len());
        PadicInt {
            p: self.p,
            digits: self.digits[..n].to_vec(),
        }
    }

    fn check(&self, other: &PadicInt) -> Result<usize> {
        if self.p != other.p {
            return Err(mismatch(format!("Z_{} vs Z_{}", self.p, other.p)));
        }
        Ok(self.precision().min(other.precision()))
    }

    pub fn add(&self, other: &PadicInt) -> Result<PadicInt> {
        let n = self.check(other)?;
        let p = self.p.get();
        let mut carry = 0u32;
        let mut digits = Vec::with_capacity(n);
        for i in 0..n {
            let s = self.digits[i] + other.digits[i] + carry;
            digits.push(s % p);
            carry = s / p;
        }
        Ok(PadicInt { p: self.p, digits })
    }

    pub fn neg(&self) -> PadicInt {
        // -x = (p^N - 1 - x) + 1
        let p = self.p.get();
        let complement: Vec<u32> = self.digits.iter().map(|&d| p - 1 - d).collect();
        let one = PadicInt::from_u64(self.p, 1, self.precision());
        PadicInt {
            p: self.p,
            digits: complement,
        }
        .add(&one)
        .expect("same prime")
    }

    pub fn sub(&self, other: &PadicInt) -> Result<PadicInt> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &PadicInt) -> Result<PadicInt> {
        let n = self.check(other)?;
        let p = self.p.as_u64();
        let mut acc = vec![0u64; n];
        for (i, &a) in self.digits[..n].iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.digits[..n - i].iter().enumerate() {
                acc[i + j] += a as u64 * b as u64;
            }
        }
        let mut digits = Vec::with_capacity(n);
        let mut carry = 0u64;
        for slot in acc {
            let s = slot + carry;
            digits.push((s % p) as u32);
            carry = s / p;
        }
        Ok(PadicInt { p: self.p, digits })
    }

    /// Multiply by `p^k`, keeping the precision.
    pub fn shift_up(&self, k: usize) -> PadicInt {
        let n = self.precision();
        let mut digits = vec![0u32; n];
        for i in k..n {
            digits[i] = self.digits[i - k];
        }
        PadicInt { p: self.p, digits }
    }

    /// Inverse of a unit modulo `p^N`.
    pub fn inv(&self) -> Result<PadicInt> {
        if !self.is_unit() {
            return Err(Error::NotAUnit);
        }
        let n = self.precision();
        let d0 = self.p.inv(self.digits[0])?;
        let mut x = PadicInt::from_u64(self.p, d0 as u64, n);
        let two = PadicInt::from_u64(self.p, 2, n);
        let mut known = 1;
        while known < n {
            // Newton step doubles the number of correct digits
            let ax = self.mul(&x)?;
            x = x.mul(&two.sub(&ax)?)?;
            known *= 2;
        }
        Ok(x)
    }
}

impl fmt::Display for PadicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_u64() {
            Some(v) => write!(f, "{v} (mod {}^{})", self.p, self.precision()),
            None => write!(f, "{:?} (mod {}^{})", self.digits, self.p, self.precision()),
        }
    }
}

/// `binom(z, n)` reduced to F_p via Lucas' theorem.
pub fn lucas_binom(z: &PadicInt, n: u64) -> Result<FpElem> {
    let p = z.prime();
    let nd = p.digits_of(n);
    if nd.len() > z.precision() {
        return Err(Error::InsufficientPrecision {
            needed: format!("{} digits", nd.len()),
            have: format!("{} digits", z.precision()),
        });
    }
    let mut acc = 1 % p.get();
    for (i, &ni) in nd.iter().enumerate() {
        let zi = z.digits[i];
        if ni > zi {
            return Ok(FpElem::new(p, 0));
        }
        acc = p.mul(acc, p.small_binom(zi, ni));
    }
    Ok(FpElem::new(p, acc as u64))
}

/// An element `1 + p^k a` of the subgroup `Gamma_k`, carried by its
/// coordinate `a`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GammaElement {
    k: u32,
    a: PadicInt,
}

impl GammaElement {
    pub fn new(k: u32, a: PadicInt) -> Result<GammaElement> {
        let min_k = if a.prime().get() == 2 { 2 } else { 1 };
        if k < min_k {
            return Err(Error::PreconditionViolation(format!(
                "subgroup depth k = {k} too small for p = {} (need k >= {min_k})",
                a.prime()
            )));
        }
        Ok(GammaElement { k, a })
    }

    pub fn from_coordinate(p: Prime, k: u32, a: u64, precision: usize) -> Result<GammaElement> {
        GammaElement::new(k, PadicInt::from_u64(p, a, precision))
    }

    pub fn identity(p: Prime, k: u32, precision: usize) -> Result<GammaElement> {
        GammaElement::new(k, PadicInt::zero(p, precision))
    }

    pub fn depth(&self) -> u32 {
        self.k
    }

    pub fn coordinate(&self) -> &PadicInt {
        &self.a
    }

    pub fn prime(&self) -> Prime {
        self.a.prime()
    }

    /// The group element itself as a unit of Z_p, known modulo `p^(N+k)`.
    pub fn unit(&self) -> PadicInt {
        let n = self.a.precision() + self.k as usize;
        let mut digits = vec![0u32; n];
        digits[..self.a.precision()].copy_from_slice(self.a.digits());
        let shifted = PadicInt {
            p: self.prime(),
            digits,
        }
        .shift_up(self.k as usize);
        shifted
            .add(&PadicInt::from_u64(self.prime(), 1, n))
            .expect("same prime")
    }

    fn check(&self, other: &GammaElement) -> Result<()> {
        if self.k != other.k {
            return Err(mismatch(format!("Gamma_{} vs Gamma_{}", self.k, other.k)));
        }
        if self.prime() != other.prime() {
            return Err(mismatch(format!(
                "p = {} vs {}",
                self.prime(),
                other.prime()
            )));
        }
        Ok(())
    }

    /// Coordinate of the product is `a + b + p^k ab`.
    pub fn compose(&self, other: &GammaElement) -> Result<GammaElement> {
        self.check(other)?;
        let ab = self.a.mul(&other.a)?.shift_up(self.k as usize);
        let a = self.a.add(&other.a)?.add(&ab)?;
        Ok(GammaElement { k: self.k, a })
    }

    /// Coordinate of the inverse is `-a / (1 + p^k a)`.
    pub fn inverse(&self) -> GammaElement {
        let n = self.a.precision();
        let one = PadicInt::from_u64(self.prime(), 1, n);
        let unit = one
            .add(&self.a.shift_up(self.k as usize))
            .expect("same prime");
        let inv = unit.inv().expect("1 + p^k a is a unit");
        let a = self.a.neg().mul(&inv).expect("same prime");
        GammaElement { k: self.k, a }
    }

    pub fn pow(&self, mut e: u64) -> GammaElement {
        let mut base = self.clone();
        let mut acc =
            GammaElement::identity(self.prime(), self.k, self.a.precision()).expect("valid k");
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base).expect("same group");
            }
            base = base.compose(&base).expect("same group");
            e >>= 1;
        }
        acc
    }

    pub fn pow_p(&self) -> GammaElement {
        self.pow(self.prime().as_u64())
    }

    /// Largest `i` with `g` in `Gamma_(k+i)`; censored when the coordinate
    /// vanishes at the stored precision.
    pub fn depth_index(&self) -> Val<u32> {
        self.a.val()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    #[test]
    fn field_examples() {
        let two = FpElem::new(p(3), 2);
        assert_eq!(two.mul(&two).unwrap().value(), 1);
        assert_eq!(FpElem::new(p(2), 1).inv().unwrap().value(), 1);
        assert_eq!(FpElem::new(p(5), 3).pow(4).value(), 1);
        assert_eq!(FpElem::new(p(5), 0).inv(), Err(Error::DivisionByZero));
        assert!(matches!(
            FpElem::new(p(5), 1).add(&FpElem::new(p(3), 1)),
            Err(Error::ContextMismatch(_))
        ));
    }

    #[test]
    fn rejects_composites() {
        assert!(Prime::new(4).is_err());
        assert!(Prime::new(1).is_err());
        assert!(Prime::new(7).is_ok());
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(PadicInt::from_u64(p(3), 6, 2).val(), Val::Exact(1));
        assert_eq!(PadicInt::from_u64(p(2), 1, 4).val(), Val::Exact(0));
        assert_eq!(PadicInt::from_u64(p(3), 0, 4).val(), Val::AtLeast(4));
    }

    #[test]
    fn minus_one_has_all_top_digits() {
        let m = PadicInt::from_i64(p(5), -1, 6);
        assert!(m.digits().iter().all(|&d| d == 4));
        let sum = m.add(&PadicInt::from_u64(p(5), 1, 6)).unwrap();
        assert!(sum.is_zero());
    }

    #[test]
    fn lucas_examples() {
        let z = PadicInt::from_u64(p(3), 7, 4);
        assert_eq!(lucas_binom(&z, 2).unwrap().value(), 0);
        assert_eq!(lucas_binom(&z, 0).unwrap().value(), 1);
        let four = PadicInt::from_u64(p(3), 4, 4);
        assert_eq!(lucas_binom(&four, 1).unwrap().value(), 1);
        let short = PadicInt::from_u64(p(3), 4, 1);
        assert!(matches!(
            lucas_binom(&short, 9),
            Err(Error::InsufficientPrecision { .. })
        ));
    }

    #[test]
    fn gamma_examples() {
        let g = GammaElement::from_coordinate(p(3), 1, 1, 6).unwrap();
        let gg = g.compose(&g).unwrap();
        assert_eq!(gg.coordinate().to_u64(), Some(5));
        let id = GammaElement::identity(p(3), 1, 6).unwrap();
        let h = GammaElement::from_coordinate(p(3), 1, 17, 6).unwrap();
        assert_eq!(id.compose(&h).unwrap(), h);
        let d = GammaElement::from_coordinate(p(2), 2, 2, 6).unwrap();
        // g = 1 + 4*2 lies in Gamma_3 but not Gamma_4
        assert_eq!(d.depth_index(), Val::Exact(1));
        assert!(GammaElement::from_coordinate(p(2), 1, 1, 6).is_err());
    }

    #[test]
    fn padic_inverse() {
        let x = PadicInt::from_u64(p(3), 4, 8);
        let y = x.inv().unwrap();
        assert_eq!(x.mul(&y).unwrap().to_u64(), Some(1));
        assert_eq!(PadicInt::from_u64(p(3), 3, 8).inv(), Err(Error::NotAUnit));
    }
}
