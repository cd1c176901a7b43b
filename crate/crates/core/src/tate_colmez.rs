//! The ψ operator, the `(1+X)^i` basis decomposition, Tate traces,
//! decompletion and ψ-towers.

use crate::arith::{GammaElement, PadicInt, Prime, DEFAULT_DIGITS};
use crate::error::{mismatch, Error, Result};
use crate::mahler::{orbit_floors, sh_profile_fit, ShProfile};
use crate::puiseux::kernel::{self, Terms};
use crate::puiseux::{
    check_level_zero, gamma_act_element, one_plus_x_pow, p_pow, PuiseuxSeries, SeriesJson,
};
use crate::valuation::{format_q, Val, Verdict, Q};
use serde::{Deserialize, Serialize};

/// Splits `g(Y)` (precision `t`) into `f_0..f_(p-1)` with
/// `g = sum_i (1+Y)^i f_i(Y^p)`; the parts are known below `Y^(t/p)`.
fn psi_split(p: Prime, g: &[(u64, u32)], t: u64) -> (Vec<Terms>, u64) {
    let q = p.as_u64();
    let mut h: Vec<Terms> = vec![Vec::new(); q as usize];
    for &(e, c) in g {
        h[(e % q) as usize].push((e / q, c));
    }
    let t_out = t / q;
    let parts = (0..q as u32)
        .map(|i| {
            let mut acc = Vec::new();
            for s in i..q as u32 {
                let mut c = p.small_binom(s, i);
                if (s - i) % 2 == 1 {
                    c = p.neg(c);
                }
                acc = kernel::add(p, &acc, &kernel::scale(p, &h[s as usize], c), t_out);
            }
            acc
        })
        .collect();
    (parts, t_out)
}

/// `(f_0, ..., f_(p-1))` with `g = sum_i phi(f_i) (1+X)^i`.
pub fn psi_decompose(g: &PuiseuxSeries) -> Result<Vec<PuiseuxSeries>> {
    check_level_zero(g)?;
    let p = g.prime();
    let (parts, t) = psi_split(p, g.terms(), g.prec_num());
    Ok(parts
        .into_iter()
        .map(|f| PuiseuxSeries::with_terms_at(p, 0, t, f))
        .collect())
}

pub fn psi(f: &PuiseuxSeries) -> Result<PuiseuxSeries> {
    Ok(psi_decompose(f)?.swap_remove(0))
}

fn decompose_raw(p: Prime, g: &[(u64, u32)], t: u64, m: u32) -> (Vec<Terms>, u64) {
    if m == 0 {
        return (vec![g.to_vec()], t);
    }
    let (parts, t1) = psi_split(p, g, t);
    let q = p.as_u64() as usize;
    let size = p_pow(p, m) as usize;
    let mut out = vec![Vec::new(); size];
    let mut t_final = t1;
    for (i, part) in parts.iter().enumerate() {
        let (sub, tf) = decompose_raw(p, part, t1, m - 1);
        t_final = tf;
        for (j, a) in sub.into_iter().enumerate() {
            out[i + q * j] = a;
        }
    }
    (out, t_final)
}

/// `f = sum_(j < p^m) (1+X)^(j/p^m) a_j` with every `a_j` in `E[[X]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColmezDecomposition {
    p: Prime,
    level: u32,
    entries: Vec<PuiseuxSeries>,
}

impl ColmezDecomposition {
    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// `a_(j/p^m)` indexed by `j`.
    pub fn entries(&self) -> &[PuiseuxSeries] {
        &self.entries
    }

    pub fn index(&self, j: usize) -> Q {
        Q::new(j as i64, p_pow(self.p, self.level) as i64)
    }

    /// `a_i` for `i` in `p^(-m) Z ∩ [0, 1)`.
    pub fn get(&self, i: Q) -> Option<&PuiseuxSeries> {
        let scaled = i * Q::from_integer(p_pow(self.p, self.level) as i64);
        if !scaled.is_integer() || *scaled.numer() < 0 {
            return None;
        }
        self.entries.get(*scaled.numer() as usize)
    }

    pub fn prec(&self) -> Q {
        self.entries[0].prec()
    }

    pub fn inf_val(&self) -> Val<Q> {
        self.entries
            .iter()
            .map(|a| a.val())
            .reduce(|a, b| a.min(b))
            .expect("p^m >= 1 entries")
    }

    /// `sum_j (1 + X^(1/p^m))^j a_j`.
    pub fn reconstruct(&self) -> Result<PuiseuxSeries> {
        partial_sum(self, self.level)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<serde_json::Value> = self
            .entries
            .iter()
            .enumerate()
            .map(|(j, a)| serde_json::json!([format_q(self.index(j)), SeriesJson::from(a)]))
            .collect();
        serde_json::json!({ "level": self.level, "entries": entries })
    }
}

pub fn colmez_decompose(f: &PuiseuxSeries) -> Result<ColmezDecomposition> {
    let p = f.prime();
    let m = f.level();
    let (raw, t) = decompose_raw(p, f.terms(), f.prec_num(), m);
    Ok(ColmezDecomposition {
        p,
        level: m,
        entries: raw
            .into_iter()
            .map(|a| PuiseuxSeries::with_terms_at(p, 0, t, a))
            .collect(),
    })
}

/// `sum over j divisible by p^(m-n)` of `(1 + X^(1/p^n))^(j / p^(m-n)) a_j`.
fn partial_sum(d: &ColmezDecomposition, n: u32) -> Result<PuiseuxSeries> {
    let p = d.p;
    let step = p_pow(p, d.level - n) as usize;
    let prec = d.prec();
    let digits = DEFAULT_DIGITS.max(n as usize + 1);
    let mut acc = PuiseuxSeries::zero(p, prec)?;
    for (j, a) in d.entries.iter().enumerate().step_by(step) {
        if a.is_zero() {
            continue;
        }
        let basis = one_plus_x_pow(&PadicInt::from_u64(p, (j / step) as u64, digits), n, prec)?;
        acc = acc.add(&basis.mul(a)?)?;
    }
    Ok(acc)
}

/// The Tate trace `T_n`, projecting onto `E+_n`.
pub fn tate_trace(f: &PuiseuxSeries, n: u32) -> Result<PuiseuxSeries> {
    if n >= f.level() {
        return Ok(f.clone());
    }
    partial_sum(&colmez_decompose(f)?, n)
}

/// All traces `T_0 f, ..., T_m f` from a single decomposition.
pub fn tate_traces(f: &PuiseuxSeries) -> Result<Vec<PuiseuxSeries>> {
    let d = colmez_decompose(f)?;
    let mut out = (0..d.level)
        .map(|n| partial_sum(&d, n))
        .collect::<Result<Vec<_>>>()?;
    out.push(f.clone());
    Ok(out)
}

/// Fitted level `n^ = k - lambda^` of an orbit profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelEstimate {
    pub n: u32,
    /// Unclamped `k - lambda^`; `-1` for elements of `E[[X^p]]`.
    pub raw: f64,
    #[serde(skip)]
    pub profile: ShProfile,
}

pub fn sh_level_classify(f: &PuiseuxSeries, k: u32, i_max: u32) -> Result<LevelEstimate> {
    let floors = orbit_floors(f, k, i_max)?;
    let profile = sh_profile_fit(f.prime(), &floors, f.prec())?;
    let raw = k as f64 - profile.lambda;
    let n = if raw.is_finite() {
        raw.round().max(0.0) as u32
    } else {
        0
    };
    Ok(LevelEstimate { n, raw, profile })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decompletion {
    /// Minimal `n` with `f` in `E_n` at this precision.
    pub n: u32,
    /// First index where `T_n(f)` agrees with `f`.
    pub stabilization: u32,
    /// The orbit classifier, when the floors are not all censored.
    pub classified: Option<LevelEstimate>,
}

impl Decompletion {
    /// Whether the orbit profile agrees with the exponent inspection.
    pub fn consistent(&self) -> Option<bool> {
        self.classified.as_ref().map(|c| c.n == self.n)
    }
}

pub fn decomplete(f: &PuiseuxSeries, k: u32, i_max: u32) -> Result<Decompletion> {
    GammaElement::identity(f.prime(), k, DEFAULT_DIGITS)?;
    let n = f.exponent_level();
    let traces = tate_traces(f)?;
    let stabilization = traces
        .iter()
        .position(|t| t.eq_mod(f))
        .expect("the last trace is f") as u32;
    let classified = match sh_level_classify(f, k, i_max) {
        Ok(c) => Some(c),
        Err(Error::TooFewPoints) => None,
        Err(e) => return Err(e),
    };
    Ok(Decompletion {
        n,
        stabilization,
        classified,
    })
}

/// A finite piece `(m_0, ..., m_J)` of an element of `lim_psi E+`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiTower {
    p: Prime,
    entries: Vec<PuiseuxSeries>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TowerJson {
    pub depth: usize,
    pub entries: Vec<SeriesJson>,
}

pub const DEFAULT_TOWER_DEPTH: usize = 4;

impl PsiTower {
    pub fn new(entries: Vec<PuiseuxSeries>) -> Result<PsiTower> {
        let p = entries
            .first()
            .ok_or_else(|| Error::PreconditionViolation("empty tower".into()))?
            .prime();
        for m in &entries {
            if m.prime() != p {
                return Err(mismatch("tower entries over different primes"));
            }
            check_level_zero(m)?;
        }
        Ok(PsiTower { p, entries })
    }

    /// `i(f) = (f, phi f, ..., phi^J f)`.
    pub fn embed(f: &PuiseuxSeries, depth: usize) -> Result<PsiTower> {
        let mut entries = vec![f.clone()];
        for j in 0..depth {
            entries.push(entries[j].frobenius());
        }
        PsiTower::new(entries)
    }

    /// The diagonal tower with `(1+X) phi(h)` added at index `j0 >= 1` and
    /// propagated upward by `phi`.
    pub fn perturbed(
        f: &PuiseuxSeries,
        h: &PuiseuxSeries,
        j0: usize,
        depth: usize,
    ) -> Result<PsiTower> {
        if j0 == 0 || j0 > depth {
            return Err(Error::PreconditionViolation(format!(
                "perturbation index {j0} outside 1..={depth}"
            )));
        }
        let mut t = PsiTower::embed(f, depth)?;
        let one_plus_x =
            PuiseuxSeries::from_coeffs(f.prime(), &[1, 1], h.prec_num() * f.prime().as_u64());
        let bump = one_plus_x.mul(&h.frobenius())?;
        t.entries[j0] = t.entries[j0 - 1].frobenius().add(&bump)?;
        for j in j0 + 1..=depth {
            t.entries[j] = t.entries[j - 1].frobenius();
        }
        Ok(t)
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn depth(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn entries(&self) -> &[PuiseuxSeries] {
        &self.entries
    }

    /// Checks `psi(m_(j+1)) = m_j` at the common precision.
    pub fn validate(&self) -> Result<()> {
        for j in 0..self.depth() {
            if !psi(&self.entries[j + 1])?.eq_mod(&self.entries[j]) {
                return Err(Error::NotPsiCompatible { index: j + 1 });
            }
        }
        Ok(())
    }

    /// `floor(min_j val(m_j) / p^j)`.
    pub fn tower_val(&self) -> Val<i64> {
        self.entries
            .iter()
            .enumerate()
            .map(|(j, m)| {
                m.val()
                    .map(|v| v / Q::from_integer(p_pow(self.p, j as u32) as i64))
            })
            .reduce(|a, b| a.min(b))
            .expect("nonempty")
            .map(|q| q.floor().to_integer())
    }

    /// `(f m)_j = phi^j(f) m_j`.
    pub fn scalar_mul(&self, f: &PuiseuxSeries) -> Result<PsiTower> {
        let mut phi_f = f.clone();
        let mut entries = Vec::with_capacity(self.entries.len());
        for m in &self.entries {
            entries.push(phi_f.mul(m)?);
            phi_f = phi_f.frobenius();
        }
        PsiTower::new(entries)
    }

    pub fn gamma_act(&self, g: &GammaElement) -> Result<PsiTower> {
        PsiTower::new(
            self.entries
                .iter()
                .map(|m| gamma_act_element(g, m))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn to_json(&self) -> TowerJson {
        TowerJson {
            depth: self.depth(),
            entries: self.entries.iter().map(SeriesJson::from).collect(),
        }
    }

    pub fn from_json(j: TowerJson) -> Result<PsiTower> {
        if j.entries.len() != j.depth + 1 {
            return Err(Error::PreconditionViolation(format!(
                "depth {} needs {} entries, got {}",
                j.depth,
                j.depth + 1,
                j.entries.len()
            )));
        }
        PsiTower::new(
            j.entries
                .into_iter()
                .map(PuiseuxSeries::try_from)
                .collect::<Result<Vec<_>>>()?,
        )
    }
}

/// Whether every exponent of a level-0 series is divisible by `p^j`.
pub fn in_frobenius_image(m: &PuiseuxSeries, j: u32) -> bool {
    let d = p_pow(m.prime(), j);
    m.terms().iter().all(|&(e, _)| e % d == 0)
}

/// Tests `m_j` in `phi^j(E+)` for every `j`; refutes with the first
/// failing index. A tower passing at every index is `i(m_0)`.
pub fn psi_tower_sh_test(t: &PsiTower, k: u32) -> Result<Verdict<usize>> {
    GammaElement::identity(t.p, k, DEFAULT_DIGITS)?;
    t.validate()?;
    for (j, m) in t.entries.iter().enumerate() {
        if !in_frobenius_image(m, j as u32) {
            return Ok(Verdict::Refuted(j));
        }
    }
    Ok(Verdict::Certified)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::puiseux::gamma_act;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn q(a: i64, b: i64) -> Q {
        Q::new(a, b)
    }

    fn poly(pr: u64, c: &[u64], t: u64) -> PuiseuxSeries {
        PuiseuxSeries::from_coeffs(p(pr), c, t)
    }

    fn constant_terms(parts: &[PuiseuxSeries]) -> Vec<u32> {
        parts.iter().map(|f| f.coeff(Q::from_integer(0))).collect()
    }

    #[test]
    fn psi_decompose_examples() {
        let parts = psi_decompose(&poly(2, &[0, 1], 10)).unwrap();
        assert_eq!(constant_terms(&parts), vec![1, 1]);
        assert!(parts.iter().all(|f| f.num_terms() <= 1));
        let parts = psi_decompose(&poly(3, &[0, 1], 12)).unwrap();
        assert_eq!(constant_terms(&parts), vec![2, 1, 0]);
        let h = poly(5, &[1, 2, 0, 3], 6);
        let parts = psi_decompose(&h.frobenius()).unwrap();
        assert_eq!(parts[0], h);
        assert!(parts[1..].iter().all(|f| f.is_zero()));
    }

    #[test]
    fn psi_examples() {
        let h = poly(3, &[1, 1, 1], 8);
        assert_eq!(psi(&h.frobenius()).unwrap(), h);
        assert!(psi(&poly(2, &[0, 1], 8)).unwrap().eq_mod(&poly(2, &[1], 4)));
        for pr in [2, 3, 5, 7] {
            assert!(psi(&poly(pr, &[1, 1], 20)).unwrap().is_zero());
        }
    }

    #[test]
    fn psi_projection_formula() {
        let f = poly(3, &[2, 0, 1, 1, 0, 2, 1, 1, 0, 1], 30);
        let h = poly(3, &[1, 2, 0, 1], 10);
        let lhs = psi(&f.mul(&h.frobenius()).unwrap()).unwrap();
        let rhs = h.mul(&psi(&f).unwrap()).unwrap();
        assert!(lhs.eq_mod(&rhs));
    }

    #[test]
    fn colmez_examples() {
        let half = |pr, e: i64, d: i64, t| {
            PuiseuxSeries::monomial(p(pr), q(e, d), 1, Q::from_integer(t)).unwrap()
        };
        let d = colmez_decompose(&half(2, 1, 2, 8)).unwrap();
        assert_eq!(d.level(), 1);
        assert!(d.get(q(0, 1)).unwrap().eq_mod(&poly(2, &[1], 8)));
        assert!(d.get(q(1, 2)).unwrap().eq_mod(&poly(2, &[1], 8)));
        let d = colmez_decompose(&half(2, 1, 4, 8)).unwrap();
        assert_eq!(d.level(), 2);
        assert_eq!(d.entries()[0].coeff(Q::from_integer(0)), 1);
        assert_eq!(d.get(q(1, 4)).unwrap().coeff(Q::from_integer(0)), 1);
        assert!(d.get(q(1, 2)).unwrap().is_zero());
        assert!(d.get(q(3, 4)).unwrap().is_zero());
        let f = poly(3, &[1, 2, 0, 1], 9);
        let d = colmez_decompose(&f).unwrap();
        assert_eq!(d.entries(), &[f]);
    }

    #[test]
    fn reconstruction_is_exact() {
        let pr = p(3);
        let f =
            PuiseuxSeries::from_parts(pr, 2, 120, vec![(1, 1), (5, 2), (9, 1), (31, 1), (70, 2)]);
        let d = colmez_decompose(&f).unwrap();
        assert!(d.reconstruct().unwrap().eq_mod(&f));
        let v = f.val().exact().unwrap();
        let inf = d.inf_val().exact().unwrap();
        assert!(v - Q::from_integer(1) < inf && inf <= v);
    }

    #[test]
    fn tate_trace_examples() {
        let pr = p(2);
        let f = PuiseuxSeries::monomial(pr, q(1, 2), 1, Q::from_integer(8)).unwrap();
        assert!(tate_trace(&f, 0).unwrap().eq_mod(&poly(2, &[1], 8)));
        let g = PuiseuxSeries::monomial(pr, q(1, 4), 1, Q::from_integer(8)).unwrap();
        let t1 = tate_trace(&g, 1).unwrap();
        assert!(t1.eq_mod(&poly(2, &[1], 8)));
        assert_eq!(t1.val(), Val::Exact(Q::from_integer(0)));
        assert_eq!(tate_trace(&f, 1).unwrap(), f);
    }

    #[test]
    fn tate_trace_is_equivariant() {
        let pr = p(3);
        let f = PuiseuxSeries::from_parts(pr, 2, 90, vec![(1, 1), (4, 2), (12, 1), (40, 1)]);
        for a in [2u64, 4, 5, 7, 10] {
            let a = PadicInt::from_u64(pr, a, 12);
            for n in 0..2 {
                let lhs = tate_trace(&gamma_act(&a, &f).unwrap(), n).unwrap();
                let rhs = gamma_act(&a, &tate_trace(&f, n).unwrap()).unwrap();
                assert!(lhs.eq_mod(&rhs), "n={n}");
            }
        }
    }

    #[test]
    fn decomplete_examples() {
        let pr = p(2);
        let f = PuiseuxSeries::from_parts(pr, 1, 40, vec![(1, 1), (6, 1)]);
        let d = decomplete(&f, 2, 2).unwrap();
        assert_eq!(d.n, 1);
        assert_eq!(d.stabilization, 1);
        let g = poly(3, &[0, 1, 1], 100);
        let d = decomplete(&g, 1, 2).unwrap();
        assert_eq!((d.n, d.stabilization), (0, 0));
        let cube_root = PuiseuxSeries::monomial(p(3), q(1, 3), 1, Q::from_integer(100)).unwrap();
        let d = decomplete(&cube_root, 1, 2).unwrap();
        assert_eq!(d.n, 1);
        assert_eq!(d.consistent(), Some(true));
        let w = &d.classified.unwrap().profile.floors;
        for i in 0..=2 {
            assert_eq!(w[&i], Val::Exact(Q::from_integer(3i64.pow(i))));
        }
    }

    #[test]
    fn level_classifier_examples() {
        let pr = p(3);
        let x = PuiseuxSeries::x(pr, Q::from_integer(200)).unwrap();
        let e = sh_level_classify(&x, 1, 2).unwrap();
        assert_eq!((e.profile.lambda, e.n), (1.0, 0));
        let r = PuiseuxSeries::monomial(pr, q(1, 3), 1, Q::from_integer(200)).unwrap();
        assert_eq!(sh_level_classify(&r, 1, 2).unwrap().n, 1);
        let g = poly(3, &[0, 1, 1], 300);
        let w = sh_level_classify(&g, 1, 3).unwrap().profile.floors;
        assert_eq!(w[&3], Val::Exact(Q::from_integer(81)));
        let flat = poly(3, &[0, 0, 0, 1], 300);
        assert_eq!(sh_level_classify(&flat, 1, 2).unwrap().raw, -1.0);
    }

    #[test]
    fn tower_examples() {
        let pr = p(2);
        let x = PuiseuxSeries::x(pr, Q::from_integer(10)).unwrap();
        let t = PsiTower::embed(&x, 2).unwrap();
        assert_eq!(
            t.entries()[2],
            PuiseuxSeries::monomial(pr, Q::from_integer(4), 1, Q::from_integer(40)).unwrap()
        );
        assert_eq!(t.tower_val(), Val::Exact(1));
        t.validate().unwrap();

        let f = poly(2, &[0, 1, 1], 10);
        assert_eq!(
            psi_tower_sh_test(&PsiTower::embed(&f, 4).unwrap(), 2).unwrap(),
            Verdict::Certified
        );
        let one = poly(2, &[1], 10);
        let bent = PsiTower::perturbed(&f, &one, 1, 3).unwrap();
        bent.validate().unwrap();
        assert_eq!(psi_tower_sh_test(&bent, 2).unwrap(), Verdict::Refuted(1));
        let zero =
            PsiTower::embed(&PuiseuxSeries::zero(pr, Q::from_integer(5)).unwrap(), 3).unwrap();
        assert_eq!(psi_tower_sh_test(&zero, 2).unwrap(), Verdict::Certified);

        let mut broken = PsiTower::embed(&f, 2).unwrap();
        broken.entries[2] = broken.entries[2]
            .add(&PuiseuxSeries::from_coeffs(pr, &[0, 0, 1], 40))
            .unwrap();
        assert_eq!(broken.validate(), Err(Error::NotPsiCompatible { index: 2 }));
    }

    #[test]
    fn tower_module_structure() {
        let pr = p(3);
        let f = poly(3, &[1, 2, 1], 8);
        let t = PsiTower::embed(&poly(3, &[0, 1, 0, 2], 8), 3).unwrap();
        t.scalar_mul(&f).unwrap().validate().unwrap();
        let g = GammaElement::from_coordinate(pr, 1, 2, 12).unwrap();
        t.gamma_act(&g).unwrap().validate().unwrap();
        let j = serde_json::to_string(&t.to_json()).unwrap();
        let back = PsiTower::from_json(serde_json::from_str(&j).unwrap()).unwrap();
        assert_eq!(back, t);
    }
}
