//! Sparse polynomial kernels over F_p in a single variable `Y`, truncated
//! at `Y^t`. Terms are `(exponent, coefficient)` pairs, sorted ascending,
//! with nonzero coefficients.

use crate::arith::Prime;
use std::collections::HashMap;

pub(crate) type Terms = Vec<(u64, u32)>;

/// Products above this density go through a dense accumulator.
const DENSE_RATIO: u64 = 4;

pub(crate) fn truncate(terms: &[(u64, u32)], t: u64) -> Terms {
    let end = terms.partition_point(|&(e, _)| e < t);
    terms[..end].to_vec()
}

pub(crate) fn add(p: Prime, a: &[(u64, u32)], b: &[(u64, u32)], t: u64) -> Terms {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    loop {
        let next = match (a.get(i), b.get(j)) {
            (Some(&(ea, ca)), Some(&(eb, cb))) => {
                if ea < eb {
                    i += 1;
                    (ea, ca)
                } else if eb < ea {
                    j += 1;
                    (eb, cb)
                } else {
                    i += 1;
                    j += 1;
                    (ea, p.add(ca, cb))
                }
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => break,
        };
        if next.0 >= t {
            break;
        }
        if next.1 != 0 {
            out.push(next);
        }
    }
    out
}

pub(crate) fn neg(p: Prime, a: &[(u64, u32)]) -> Terms {
    a.iter().map(|&(e, c)| (e, p.neg(c))).collect()
}

pub(crate) fn scale(p: Prime, a: &[(u64, u32)], c: u32) -> Terms {
    if c % p.get() == 0 {
        return Vec::new();
    }
    a.iter().map(|&(e, x)| (e, p.mul(x, c))).collect()
}

pub(crate) fn shift(a: &[(u64, u32)], by: u64, t: u64) -> Terms {
    a.iter()
        .map(|&(e, c)| (e + by, c))
        .take_while(|&(e, _)| e < t)
        .collect()
}

pub(crate) fn dense_to_terms(p: Prime, acc: &[u64]) -> Terms {
    let m = p.as_u64();
    acc.iter()
        .enumerate()
        .filter_map(|(e, &v)| {
            let r = (v % m) as u32;
            (r != 0).then_some((e as u64, r))
        })
        .collect()
}

/// Product truncated at `Y^t`.
pub(crate) fn mul(p: Prime, a: &[(u64, u32)], b: &[(u64, u32)], t: u64) -> Terms {
    if a.is_empty() || b.is_empty() || t == 0 {
        return Vec::new();
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let work = small.len() as u64 * large.len() as u64;
    if work <= DENSE_RATIO * t {
        let mut prods: Vec<(u64, u64)> = Vec::with_capacity(work as usize);
        for &(ea, ca) in small {
            if ea >= t {
                break;
            }
            for &(eb, cb) in large {
                let e = ea + eb;
                if e >= t {
                    break;
                }
                prods.push((e, ca as u64 * cb as u64));
            }
        }
        prods.sort_unstable_by_key(|x| x.0);
        let m = p.as_u64();
        let mut out: Terms = Vec::new();
        let mut k = 0;
        while k < prods.len() {
            let e = prods[k].0;
            let mut s = 0u64;
            while k < prods.len() && prods[k].0 == e {
                s = (s + prods[k].1) % m;
                k += 1;
            }
            if s != 0 {
                out.push((e, s as u32));
            }
        }
        out
    } else {
        let t = t as usize;
        let mut dense = vec![0u32; t];
        for &(e, c) in large {
            if e as usize >= t {
                break;
            }
            dense[e as usize] = c;
        }
        let mut acc = vec![0u64; t];
        for &(ea, ca) in small {
            let ea = ea as usize;
            if ea >= t {
                break;
            }
            let ca = ca as u64;
            let dst = &mut acc[ea..];
            let src = &dense[..t - ea];
            for (d, &s) in dst.iter_mut().zip(src) {
                *d += ca * s as u64;
            }
        }
        dense_to_terms(p, &acc)
    }
}

pub(crate) fn pow(p: Prime, a: &[(u64, u32)], mut e: u64, t: u64) -> Terms {
    let mut acc: Terms = if t > 0 { vec![(0, 1)] } else { Vec::new() };
    let mut base = truncate(a, t);
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(p, &acc, &base, t);
        }
        e >>= 1;
        if e > 0 {
            base = mul(p, &base, &base, t);
        }
    }
    acc
}

/// Frobenius on `Y`-polynomials: `Y^j -> Y^(pj)`.
pub(crate) fn frob(p: Prime, a: &[(u64, u32)], t: u64) -> Terms {
    let q = p.as_u64();
    a.iter()
        .map(|&(e, c)| (e * q, c))
        .take_while(|&(e, _)| e < t)
        .collect()
}

/// Inverse of a series with nonzero constant term, modulo `Y^t`.
pub(crate) fn inv_unit(p: Prime, a: &[(u64, u32)], t: u64) -> Option<Terms> {
    let (e0, c0) = *a.first()?;
    if e0 != 0 {
        return None;
    }
    let c0_inv = p.inv(c0).ok()?;
    let t = t as usize;
    let mut out = vec![0u32; t];
    if t == 0 {
        return Some(Vec::new());
    }
    out[0] = c0_inv;
    let m = p.as_u64();
    let tail: Vec<(usize, u64)> = a[1..]
        .iter()
        .take_while(|&&(e, _)| (e as usize) < t)
        .map(|&(e, c)| (e as usize, c as u64))
        .collect();
    for n in 1..t {
        let mut s = 0u64;
        for &(e, c) in &tail {
            if e > n {
                break;
            }
            s += c * out[n - e] as u64;
        }
        let s = (s % m) as u32;
        out[n] = p.mul(p.neg(s), c0_inv);
    }
    Some(
        out.into_iter()
            .enumerate()
            .filter(|&(_, c)| c != 0)
            .map(|(e, c)| (e as u64, c))
            .collect(),
    )
}

/// Evaluate `f(u)` modulo `Y^t`, where `u` has valuation at least one.
///
/// Dense `f` is split by residues of exponents mod `p`:
/// `f(u) = sum_r u^r * phi(f_r(u))`, using that `u^p = phi(u)` over F_p.
pub(crate) fn compose(p: Prime, f: &[(u64, u32)], u: &[(u64, u32)], t: u64) -> Terms {
    if t == 0 || f.is_empty() {
        return Vec::new();
    }
    let v = match u.first() {
        Some(&(e, _)) => e,
        // f(0) is the constant term
        None => return f.iter().take_while(|x| x.0 == 0).copied().take(1).collect(),
    };
    debug_assert!(v >= 1);
    // terms of f that can reach below Y^t
    let f_live: Vec<(u64, u32)> = f
        .iter()
        .copied()
        .take_while(|&(e, _)| e == 0 || e.saturating_mul(v) < t)
        .collect();
    let q = p.as_u64();
    if f_live.len() <= 2 * q as usize + 4 || t <= 32 {
        return horner(p, &f_live, u, t);
    }
    let mut parts: Vec<Terms> = vec![Vec::new(); q as usize];
    for &(e, c) in &f_live {
        parts[(e % q) as usize].push((e / q, c));
    }
    let t_sub = t.div_ceil(q);
    let u_sub = truncate(u, t_sub);
    let mut out: Terms = Vec::new();
    let mut u_pow: Terms = vec![(0, 1)];
    for (r, part) in parts.iter().enumerate() {
        if r > 0 {
            u_pow = mul(p, &u_pow, u, t);
        }
        if part.is_empty() {
            continue;
        }
        let inner = compose(p, part, &u_sub, t_sub);
        let lifted = frob(p, &inner, t);
        out = add(p, &out, &mul(p, &u_pow, &lifted, t), t);
    }
    out
}

fn horner(p: Prime, f: &[(u64, u32)], u: &[(u64, u32)], t: u64) -> Terms {
    let mut cache: HashMap<u64, Terms> = HashMap::new();
    let mut power = |gap: u64| -> Terms {
        cache
            .entry(gap)
            .or_insert_with(|| pow(p, u, gap, t))
            .clone()
    };
    let mut iter = f.iter().rev();
    let Some(&(mut prev_e, c)) = iter.next() else {
        return Vec::new();
    };
    let mut acc: Terms = vec![(0, c)];
    for &(e, c) in iter {
        acc = mul(p, &acc, &power(prev_e - e), t);
        acc = add(p, &acc, &[(0, c)], t);
        prev_e = e;
    }
    if prev_e > 0 {
        acc = mul(p, &acc, &power(prev_e), t);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn naive_mul(p: Prime, a: &[(u64, u32)], b: &[(u64, u32)], t: u64) -> Terms {
        let mut acc = vec![0u64; t as usize];
        for &(ea, ca) in a {
            for &(eb, cb) in b {
                if ea + eb < t {
                    acc[(ea + eb) as usize] += (ca * cb) as u64;
                }
            }
        }
        dense_to_terms(p, &acc)
    }

    #[test]
    fn sparse_and_dense_products_agree() {
        let q = p(3);
        let a: Terms = (0..40)
            .filter(|e| e % 3 != 2)
            .map(|e| (e, 1 + (e % 2) as u32))
            .collect();
        let b: Terms = vec![(0, 1), (5, 2), (17, 1)];
        assert_eq!(mul(q, &a, &b, 50), naive_mul(q, &a, &b, 50));
        assert_eq!(mul(q, &a, &a, 60), naive_mul(q, &a, &a, 60));
    }

    #[test]
    fn split_composition_matches_horner() {
        let q = p(2);
        let f: Terms = (0..60).filter(|e| e % 5 != 3).map(|e| (e, 1)).collect();
        let u: Terms = vec![(1, 1), (2, 1), (7, 1)];
        assert_eq!(compose(q, &f, &u, 80), horner(q, &f, &u, 80));
        let q = p(5);
        let f: Terms = (0..70).map(|e| (e, 1 + (e % 4) as u32)).collect();
        let u: Terms = vec![(1, 3), (3, 1), (4, 4)];
        assert_eq!(compose(q, &f, &u, 90), horner(q, &f, &u, 90));
    }

    #[test]
    fn unit_inverse_multiplies_back() {
        let q = p(3);
        let a: Terms = vec![(0, 2), (1, 1), (4, 2)];
        let inv = inv_unit(q, &a, 20).unwrap();
        assert_eq!(mul(q, &a, &inv, 20), vec![(0, 1)]);
    }
}
