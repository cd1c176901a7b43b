//! Matrices over truncated series and (φ,Γ)-modules given by a Frobenius
//! matrix `P` and a cocycle `g -> G_g`.

use crate::arith::{GammaElement, PadicInt, Prime};
use crate::error::{mismatch, Error, Result};
use crate::mahler::{digits_for, floors_by_depth, sh_profile_fit, ShProfile};
use crate::puiseux::{gamma_act_element, PuiseuxSeries, SeriesJson};
use crate::tate_colmez::LevelEstimate;
use crate::valuation::{Val, Q};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSeries {
    p: Prime,
    d: usize,
    /// Row-major.
    entries: Vec<PuiseuxSeries>,
}

impl MatrixSeries {
    pub fn from_rows(rows: Vec<Vec<PuiseuxSeries>>) -> Result<MatrixSeries> {
        let d = rows.len();
        if d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(Error::PreconditionViolation(
                "matrix must be square and nonempty".into(),
            ));
        }
        let p = rows[0][0].prime();
        let entries: Vec<PuiseuxSeries> = rows.into_iter().flatten().collect();
        if entries.iter().any(|e| e.prime() != p) {
            return Err(mismatch("matrix entries over different primes"));
        }
        Ok(MatrixSeries { p, d, entries })
    }

    pub fn identity(p: Prime, d: usize, prec: Q) -> Result<MatrixSeries> {
        let zero = PuiseuxSeries::zero(p, prec)?;
        let one = PuiseuxSeries::one(p, prec)?;
        let entries = (0..d * d)
            .map(|k| {
                if k / d == k % d {
                    one.clone()
                } else {
                    zero.clone()
                }
            })
            .collect();
        Ok(MatrixSeries { p, d, entries })
    }

    pub fn scalar(s: PuiseuxSeries) -> MatrixSeries {
        MatrixSeries {
            p: s.prime(),
            d: 1,
            entries: vec![s],
        }
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> &PuiseuxSeries {
        &self.entries[i * self.d + j]
    }

    pub fn rows(&self) -> Vec<Vec<PuiseuxSeries>> {
        self.entries.chunks(self.d).map(<[_]>::to_vec).collect()
    }

    pub fn entries(&self) -> &[PuiseuxSeries] {
        &self.entries
    }

    /// Smallest entry precision.
    pub fn prec(&self) -> Q {
        self.entries
            .iter()
            .map(|e| e.prec())
            .min()
            .expect("nonempty")
    }

    pub fn val(&self) -> Val<Q> {
        self.entries
            .iter()
            .map(|e| e.val())
            .reduce(|a, b| a.min(b))
            .expect("nonempty")
    }

    fn check(&self, other: &MatrixSeries) -> Result<()> {
        if self.p != other.p || self.d != other.d {
            return Err(mismatch(format!(
                "{}x{} over F_{} vs {}x{} over F_{}",
                self.d, self.d, self.p, other.d, other.d, other.p
            )));
        }
        Ok(())
    }

    fn map(&self, f: impl Fn(&PuiseuxSeries) -> Result<PuiseuxSeries>) -> Result<MatrixSeries> {
        Ok(MatrixSeries {
            p: self.p,
            d: self.d,
            entries: self.entries.iter().map(f).collect::<Result<_>>()?,
        })
    }

    pub fn add(&self, other: &MatrixSeries) -> Result<MatrixSeries> {
        self.check(other)?;
        Ok(MatrixSeries {
            p: self.p,
            d: self.d,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.add(b))
                .collect::<Result<_>>()?,
        })
    }

    pub fn sub(&self, other: &MatrixSeries) -> Result<MatrixSeries> {
        self.add(&other.map(|e| Ok(e.neg()))?)
    }

    pub fn mul(&self, other: &MatrixSeries) -> Result<MatrixSeries> {
        self.check(other)?;
        let d = self.d;
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = self.get(i, 0).mul(other.get(0, j))?;
                for k in 1..d {
                    acc = acc.add(&self.get(i, k).mul(other.get(k, j))?)?;
                }
                entries.push(acc);
            }
        }
        Ok(MatrixSeries {
            p: self.p,
            d,
            entries,
        })
    }

    /// `M x` for a column vector.
    pub fn apply(&self, x: &[PuiseuxSeries]) -> Result<Vec<PuiseuxSeries>> {
        if x.len() != self.d {
            return Err(mismatch(format!(
                "vector of length {} for rank {}",
                x.len(),
                self.d
            )));
        }
        (0..self.d)
            .map(|i| {
                let mut acc = self.get(i, 0).mul(&x[0])?;
                for k in 1..self.d {
                    acc = acc.add(&self.get(i, k).mul(&x[k])?)?;
                }
                Ok(acc)
            })
            .collect()
    }

    pub fn scale(&self, s: &PuiseuxSeries) -> Result<MatrixSeries> {
        self.map(|e| e.mul(s))
    }

    pub fn frobenius(&self) -> MatrixSeries {
        self.map(|e| Ok(e.frobenius())).expect("infallible")
    }

    pub fn frobenius_pow(&self, i: i64) -> MatrixSeries {
        self.map(|e| Ok(e.frobenius_pow(i))).expect("infallible")
    }

    /// Entrywise action of a group element.
    pub fn gamma_act(&self, g: &GammaElement) -> Result<MatrixSeries> {
        self.map(|e| gamma_act_element(g, e))
    }

    pub fn mul_monomial(&self, q: Q) -> Result<MatrixSeries> {
        self.map(|e| e.mul_monomial(q))
    }

    pub fn div_monomial(&self, q: Q) -> Result<MatrixSeries> {
        self.map(|e| e.div_monomial(q))
    }

    /// `X^q M`, dividing when `q < 0`.
    pub fn shift(&self, q: Q) -> Result<MatrixSeries> {
        if q >= Q::zero() {
            self.mul_monomial(q)
        } else {
            self.div_monomial(-q)
        }
    }

    fn minor(&self, row: usize, col: usize) -> MatrixSeries {
        let d = self.d;
        let entries = (0..d * d)
            .filter(|k| k / d != row && k % d != col)
            .map(|k| self.entries[k].clone())
            .collect();
        MatrixSeries {
            p: self.p,
            d: d - 1,
            entries,
        }
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn det(&self) -> Result<PuiseuxSeries> {
        if self.d == 1 {
            return Ok(self.entries[0].clone());
        }
        let mut acc: Option<PuiseuxSeries> = None;
        for j in 0..self.d {
            let mut term = self.get(0, j).mul(&self.minor(0, j).det()?)?;
            if j % 2 == 1 {
                term = term.neg();
            }
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term)?,
            });
        }
        Ok(acc.expect("d >= 1"))
    }

    /// Adjugate, so that `M adj(M) = det(M) Id`.
    pub fn adj(&self) -> Result<MatrixSeries> {
        let d = self.d;
        if d == 1 {
            let one = PuiseuxSeries::one(self.p, self.prec())?;
            return Ok(MatrixSeries::scalar(one));
        }
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                // (i, j) entry is the (j, i) cofactor
                let c = self.minor(j, i).det()?;
                entries.push(if (i + j) % 2 == 1 { c.neg() } else { c });
            }
        }
        Ok(MatrixSeries {
            p: self.p,
            d,
            entries,
        })
    }

    /// `M^(-1) = X^(-v) N` with `N` integral; returns `(v, N)`.
    pub fn inverse_with_monomial(&self) -> Result<(Q, MatrixSeries)> {
        let det = self.det()?;
        let (v, unit_inv) = det.inv_with_monomial().map_err(|_| {
            Error::NotInvertible(format!("determinant {det} vanishes at this precision"))
        })?;
        Ok((v, self.adj()?.scale(&unit_inv)?))
    }

    /// Inverse when it is integral.
    pub fn inverse(&self) -> Result<MatrixSeries> {
        let (v, n) = self.inverse_with_monomial()?;
        n.div_monomial(v)
            .map_err(|_| Error::NotInvertible(format!("inverse has a pole of order up to {v}")))
    }

    pub fn to_json(&self) -> Vec<Vec<SeriesJson>> {
        self.entries
            .chunks(self.d)
            .map(|r| r.iter().map(SeriesJson::from).collect())
            .collect()
    }

    pub fn from_json(rows: Vec<Vec<SeriesJson>>) -> Result<MatrixSeries> {
        MatrixSeries::from_rows(
            rows.into_iter()
                .map(|r| {
                    r.into_iter()
                        .map(PuiseuxSeries::try_from)
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cocycle {
    /// `G_g` for finitely many sampled coordinates.
    Table(Vec<(GammaElement, MatrixSeries)>),
    /// `G_g = U^(-1) g(U)`, with `U^(-1) = X^(-v) N`.
    Gauge {
        u: MatrixSeries,
        v: Q,
        n: MatrixSeries,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhiGammaModule {
    p: Prime,
    d: usize,
    k: u32,
    phi: MatrixSeries,
    cocycle: Cocycle,
    digits: usize,
}

fn same_coordinate(g: &GammaElement, h: &GammaElement) -> bool {
    let n = g.coordinate().precision().min(h.coordinate().precision());
    g.depth() == h.depth() && g.coordinate().truncate(n) == h.coordinate().truncate(n)
}

impl PhiGammaModule {
    /// A module from a hand-authored table; validate before use.
    pub fn from_table(
        k: u32,
        phi: MatrixSeries,
        table: Vec<(GammaElement, MatrixSeries)>,
    ) -> Result<PhiGammaModule> {
        GammaElement::identity(phi.p, k, 1)?;
        for (g, m) in &table {
            phi.check(m)?;
            if g.prime() != phi.p || g.depth() != k {
                return Err(mismatch("cocycle sample outside Gamma_k"));
            }
        }
        let digits = table
            .iter()
            .map(|(g, _)| g.coordinate().precision())
            .max()
            .unwrap_or(1)
            .max(digits_for(phi.p, max_prec_num(&phi)));
        Ok(PhiGammaModule {
            p: phi.p,
            d: phi.d,
            k,
            phi,
            cocycle: Cocycle::Table(table),
            digits,
        })
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn rank(&self) -> usize {
        self.d
    }

    pub fn depth(&self) -> u32 {
        self.k
    }

    pub fn phi_matrix(&self) -> &MatrixSeries {
        &self.phi
    }

    pub fn cocycle(&self) -> &Cocycle {
        &self.cocycle
    }

    /// Digits used for sampled group elements.
    pub fn digits(&self) -> usize {
        self.digits
    }

    pub fn element(&self, a: u64) -> Result<GammaElement> {
        GammaElement::from_coordinate(self.p, self.k, a, self.digits)
    }

    /// `G_g`.
    pub fn matrix_of(&self, g: &GammaElement) -> Result<MatrixSeries> {
        if g.depth() != self.k {
            return Err(mismatch(format!(
                "element of Gamma_{} for a module over Gamma_{}",
                g.depth(),
                self.k
            )));
        }
        match &self.cocycle {
            Cocycle::Table(t) => t
                .iter()
                .find(|(h, _)| same_coordinate(g, h))
                .map(|(_, m)| m.clone())
                .ok_or_else(|| Error::MissingSample(format!("{:?}", g.coordinate().digits()))),
            Cocycle::Gauge { u, v, n } => n.mul(&u.gamma_act(g)?)?.div_monomial(*v),
        }
    }

    /// Materialize the cocycle on the given coordinates.
    pub fn tabulate(&self, samples: &[GammaElement]) -> Result<PhiGammaModule> {
        let table = samples
            .iter()
            .map(|g| Ok((g.clone(), self.matrix_of(g)?)))
            .collect::<Result<Vec<_>>>()?;
        PhiGammaModule::from_table(self.k, self.phi.clone(), table)
    }

    pub fn sample_elements(&self) -> Vec<GammaElement> {
        match &self.cocycle {
            Cocycle::Table(t) => t.iter().map(|(g, _)| g.clone()).collect(),
            Cocycle::Gauge { .. } => Vec::new(),
        }
    }

    pub fn to_json(&self, samples: &[GammaElement]) -> Result<ModuleJson> {
        let table = match &self.cocycle {
            Cocycle::Table(t) if samples.is_empty() => t.clone(),
            _ => samples
                .iter()
                .map(|g| Ok((g.clone(), self.matrix_of(g)?)))
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(ModuleJson {
            d: self.d,
            k: self.k,
            phi: self.phi.to_json(),
            cocycle: table
                .into_iter()
                .map(|(g, m)| CocycleEntry {
                    a_digits: g.coordinate().digits().to_vec(),
                    g: m.to_json(),
                })
                .collect(),
        })
    }

    pub fn from_json(j: ModuleJson) -> Result<PhiGammaModule> {
        let phi = MatrixSeries::from_json(j.phi)?;
        if phi.d != j.d {
            return Err(Error::PreconditionViolation(format!(
                "P has rank {}, declared {}",
                phi.d, j.d
            )));
        }
        let table = j
            .cocycle
            .into_iter()
            .map(|e| {
                let a = PadicInt::from_digits(phi.p, e.a_digits)?;
                Ok((GammaElement::new(j.k, a)?, MatrixSeries::from_json(e.g)?))
            })
            .collect::<Result<Vec<_>>>()?;
        PhiGammaModule::from_table(j.k, phi, table)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CocycleEntry {
    pub a_digits: Vec<u32>,
    #[serde(rename = "G")]
    pub g: Vec<Vec<SeriesJson>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModuleJson {
    pub d: usize,
    pub k: u32,
    #[serde(rename = "P")]
    pub phi: Vec<Vec<SeriesJson>>,
    pub cocycle: Vec<CocycleEntry>,
}

fn max_prec_num(m: &MatrixSeries) -> u64 {
    m.entries
        .iter()
        .map(|e| e.prec_num())
        .max()
        .expect("nonempty")
}

/// The trivial module twisted by `U`: `P = U^(-1) φ(U)`, `G_g = U^(-1) g(U)`.
pub fn gauge_module(u: &MatrixSeries, k: u32) -> Result<PhiGammaModule> {
    GammaElement::identity(u.p, k, 1)?;
    let (v, n) = u.inverse_with_monomial()?;
    let phi = n
        .mul(&u.frobenius())?
        .div_monomial(v)
        .map_err(|_| Error::NotInvertible("U^(-1) φ(U) is not integral".into()))?;
    let digits = digits_for(u.p, max_prec_num(u)) + 8;
    Ok(PhiGammaModule {
        p: u.p,
        d: u.d,
        k,
        phi,
        cocycle: Cocycle::Gauge { u: u.clone(), v, n },
        digits,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub samples: Vec<Vec<u32>>,
    pub val: Val<Q>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModuleReport {
    /// `G_(gh) - G_g g(G_h)` per pair whose product is available.
    pub cocycle: Vec<Residual>,
    /// `P φ(G_g) - G_g g(P)` per sample.
    pub commutation: Vec<Residual>,
}

impl ModuleReport {
    pub fn passes(&self) -> bool {
        self.cocycle
            .iter()
            .chain(&self.commutation)
            .all(|r| r.val.is_censored())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let enc = |rs: &[Residual]| -> Vec<serde_json::Value> {
            rs.iter()
                .map(|r| serde_json::json!({ "a_digits": r.samples, "val": crate::valuation::format_val(&r.val) }))
                .collect()
        };
        serde_json::json!({
            "pass": self.passes(),
            "cocycle": enc(&self.cocycle),
            "commutation": enc(&self.commutation),
        })
    }
}

/// Checks the cocycle law on sampled pairs and `P φ(G_g) = G_g g(P)`.
pub fn validate_module(m: &PhiGammaModule, samples: &[GammaElement]) -> Result<ModuleReport> {
    let digits_of = |g: &GammaElement| g.coordinate().digits().to_vec();
    let mut commutation = Vec::new();
    let mut cocycle = Vec::new();
    let mut mats = Vec::with_capacity(samples.len());
    for g in samples {
        let gm = m.matrix_of(g)?;
        let lhs = m.phi.mul(&gm.frobenius())?;
        let rhs = gm.mul(&m.phi.gamma_act(g)?)?;
        commutation.push(Residual {
            samples: vec![digits_of(g)],
            val: lhs.sub(&rhs)?.val(),
        });
        mats.push(gm);
    }
    for (x, g) in samples.iter().enumerate() {
        for (y, h) in samples.iter().enumerate() {
            let gh = g.compose(h)?;
            let gh_m = match m.matrix_of(&gh) {
                Ok(mm) => mm,
                Err(Error::MissingSample(_)) => continue,
                Err(e) => return Err(e),
            };
            let rhs = mats[x].mul(&mats[y].gamma_act(g)?)?;
            cocycle.push(Residual {
                samples: vec![digits_of(g), digits_of(h)],
                val: gh_m.sub(&rhs)?.val(),
            });
        }
    }
    Ok(ModuleReport {
        cocycle,
        commutation,
    })
}

fn identity_like(m: &MatrixSeries) -> Result<MatrixSeries> {
    MatrixSeries::identity(m.p, m.d, m.prec())
}

/// Floors `min val(G_g - Id)` over samples of `Γ_(k+i)`, fitted.
pub fn matrix_sh_profile(m: &PhiGammaModule, i_max: u32) -> Result<ShProfile> {
    cocycle_profile(m, i_max, false)
}

/// As [`matrix_sh_profile`] for `g -> G_g^(-1)`.
pub fn inverse_sh_profile(m: &PhiGammaModule, i_max: u32) -> Result<ShProfile> {
    cocycle_profile(m, i_max, true)
}

/// Raw floors of the cocycle, before fitting.
pub fn cocycle_floors(
    m: &PhiGammaModule,
    i_max: u32,
    invert: bool,
) -> Result<std::collections::BTreeMap<u32, Val<Q>>> {
    floors_by_depth(m.p, m.k, i_max, m.digits, |g| {
        let gm = m.matrix_of(g)?;
        let gm = if invert { gm.inverse()? } else { gm };
        Ok(gm.sub(&identity_like(&gm)?)?.val())
    })
}

fn cocycle_profile(m: &PhiGammaModule, i_max: u32, invert: bool) -> Result<ShProfile> {
    let floors = cocycle_floors(m, i_max, invert)?;
    let prec = match &m.cocycle {
        Cocycle::Gauge { u, .. } => u.prec(),
        Cocycle::Table(t) => t
            .iter()
            .map(|(_, g)| g.prec())
            .min()
            .unwrap_or(m.phi.prec()),
    };
    sh_profile_fit(m.p, &floors, prec)
}

/// `g . x = G_g g(x)` for a coordinate vector `x`.
pub fn act_on_vector(
    m: &PhiGammaModule,
    g: &GammaElement,
    x: &[PuiseuxSeries],
) -> Result<Vec<PuiseuxSeries>> {
    let gx = x
        .iter()
        .map(|e| gamma_act_element(g, e))
        .collect::<Result<Vec<_>>>()?;
    m.matrix_of(g)?.apply(&gx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorProfile {
    pub floors: std::collections::BTreeMap<u32, Val<Q>>,
    pub estimate: Option<LevelEstimate>,
    /// Largest exponent-denominator level among the coordinates.
    pub level: u32,
}

pub fn vector_sh_profile(
    m: &PhiGammaModule,
    x: &[PuiseuxSeries],
    i_max: u32,
) -> Result<VectorProfile> {
    if x.len() != m.d {
        return Err(mismatch(format!(
            "vector of length {} for rank {}",
            x.len(),
            m.d
        )));
    }
    let top = x.iter().map(|e| e.prec_num()).max().unwrap_or(1);
    let digits = m.digits.max(digits_for(m.p, top) + i_max as usize);
    let floors = floors_by_depth(m.p, m.k, i_max, digits, |g| {
        let gx = act_on_vector(m, g, x)?;
        Ok(gx
            .iter()
            .zip(x)
            .map(|(a, b)| a.sub(b).map(|d| d.val()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .reduce(|a, b| a.min(b))
            .expect("rank >= 1"))
    })?;
    let prec = x.iter().map(|e| e.prec()).min().expect("rank >= 1");
    let estimate = match sh_profile_fit(m.p, &floors, prec) {
        Ok(profile) => {
            let raw = m.k as f64 - profile.lambda;
            let n = if raw.is_finite() {
                raw.round().max(0.0) as u32
            } else {
                0
            };
            Some(LevelEstimate { n, raw, profile })
        }
        Err(Error::TooFewPoints) => None,
        Err(e) => return Err(e),
    };
    Ok(VectorProfile {
        floors,
        estimate,
        level: x.iter().map(|e| e.exponent_level()).max().unwrap_or(0),
    })
}

/// Smallest `r >= 1` with `X^r P^(-1)` in `X M_d(E+)`.
pub fn minimal_r(m: &PhiGammaModule) -> Result<u32> {
    let (v, n) = m.phi.inverse_with_monomial()?;
    let adj_val = n
        .val()
        .exact()
        .ok_or_else(|| Error::RPreconditionFailed("P^(-1) vanishes at this precision".into()))?;
    let need = (Q::from_integer(1) + v - adj_val).ceil().to_integer();
    Ok(need.max(1) as u32)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointReport {
    pub r: u32,
    /// `sum_(i <= i_max) f_i(g)`.
    pub sum: MatrixSeries,
    /// `H_g = X^(-r) (G_g - Id)`.
    pub target: MatrixSeries,
    /// Valuation of each term `f_i(g)`.
    pub term_vals: Vec<Val<Q>>,
    /// Valuation of `φ^(i-1)(Q_g) ... Q_g` for `i = 0..=i_max`.
    pub tail_vals: Vec<Val<Q>>,
}

impl FixedPointReport {
    /// `val(sum - H_g)`; censored when they agree at the attained precision.
    pub fn residual(&self) -> Result<Val<Q>> {
        Ok(self.sum.sub(&self.target)?.val())
    }
}

/// Partial sums of `H_g = sum_i P φ(P)...φ^(i-1)(P) φ^i(f(g)) φ^(i-1)(Q_g)...Q_g`.
pub fn fixed_point_series(
    m: &PhiGammaModule,
    g: &GammaElement,
    r: Option<u32>,
    i_max: u32,
) -> Result<FixedPointReport> {
    let r_min = minimal_r(m)?;
    let r = r.unwrap_or(r_min);
    if r < r_min {
        return Err(Error::RPreconditionFailed(format!(
            "X^{r} P^(-1) is not in X M_d(E+); need r >= {r_min}"
        )));
    }
    let rq = Q::from_integer(r as i64);
    let gm = m.matrix_of(g)?;
    let delta = gm.sub(&identity_like(&gm)?)?;
    if delta.val().at_least(rq) == Some(false) {
        return Err(Error::RPreconditionFailed(format!(
            "val(G_g - Id) = {} is below r = {r}",
            crate::valuation::format_val(&delta.val())
        )));
    }
    let target = delta.div_monomial(rq).map_err(|_| {
        Error::RPreconditionFailed("G_g - Id not divisible by X^r at this precision".into())
    })?;
    let g_phi = m.phi.gamma_act(g)?;
    let (v, n) = g_phi.inverse_with_monomial()?;
    let id = identity_like(&m.phi)?;
    // f(g) = X^(-r) (P g(P)^(-1) - Id), computed as X^(-r-v) (P N - X^v Id)
    let f = m
        .phi
        .mul(&n)?
        .sub(&id.mul_monomial(v)?)?
        .div_monomial(rq + v)
        .map_err(|_| Error::RPreconditionFailed("P g(P)^(-1) - Id not divisible by X^r".into()))?;
    let q_g = n
        .shift(rq * Q::from_integer(m.p.as_u64() as i64 - 1) - v)
        .map_err(|_| Error::RPreconditionFailed("Q_g is not integral".into()))?;
    let mut left = id.clone();
    let mut right = id.clone();
    let mut phi_f = f;
    let mut phi_p = m.phi.clone();
    let mut phi_q = q_g;
    let mut sum: Option<MatrixSeries> = None;
    let mut term_vals = Vec::new();
    let mut tail_vals = Vec::new();
    for _ in 0..=i_max {
        let term = left.mul(&phi_f)?.mul(&right)?;
        term_vals.push(term.val());
        tail_vals.push(right.val());
        sum = Some(match sum {
            None => term,
            Some(s) => s.add(&term)?,
        });
        left = left.mul(&phi_p)?;
        right = phi_q.mul(&right)?;
        phi_f = phi_f.frobenius();
        phi_p = phi_p.frobenius();
        phi_q = phi_q.frobenius();
    }
    Ok(FixedPointReport {
        r,
        sum: sum.expect("i_max >= 0"),
        target,
        term_vals,
        tail_vals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn int(n: i64) -> Q {
        Q::from_integer(n)
    }

    fn poly(pr: u64, c: &[u64], t: u64) -> PuiseuxSeries {
        PuiseuxSeries::from_coeffs(p(pr), c, t)
    }

    fn one_plus_x(pr: u64, t: u64) -> MatrixSeries {
        MatrixSeries::scalar(poly(pr, &[1, 1], t))
    }

    #[test]
    fn determinant_and_inverse() {
        let m = MatrixSeries::from_rows(vec![
            vec![poly(3, &[1, 1], 20), poly(3, &[0, 2], 20)],
            vec![poly(3, &[0, 0, 1], 20), poly(3, &[2, 0, 1], 20)],
        ])
        .unwrap();
        let inv = m.inverse().unwrap();
        let id = MatrixSeries::identity(p(3), 2, int(20)).unwrap();
        assert!(m.mul(&inv).unwrap().sub(&id).unwrap().val().is_censored());
        let diag = MatrixSeries::from_rows(vec![
            vec![poly(2, &[0, 1], 20), poly(2, &[], 20)],
            vec![poly(2, &[], 20), poly(2, &[1], 20)],
        ])
        .unwrap();
        let (v, _) = diag.inverse_with_monomial().unwrap();
        assert_eq!(v, int(1));
        assert!(matches!(diag.inverse(), Err(Error::NotInvertible(_))));
    }

    #[test]
    fn gauge_examples() {
        let m = gauge_module(&one_plus_x(3, 30), 1).unwrap();
        assert_eq!(m.phi_matrix().get(0, 0), &poly(3, &[1, 2, 1], 30));
        let g = m.element(1).unwrap();
        // (1+X)^(p^k a) with p^k a = 3
        assert!(m
            .matrix_of(&g)
            .unwrap()
            .get(0, 0)
            .eq_mod(&poly(3, &[1, 0, 0, 1], 30)));

        let id = MatrixSeries::identity(p(3), 2, int(10)).unwrap();
        let t = gauge_module(&id, 1).unwrap();
        assert!(t
            .matrix_of(&t.element(5).unwrap())
            .unwrap()
            .sub(&id)
            .unwrap()
            .val()
            .is_censored());

        let m2 = gauge_module(&one_plus_x(2, 30), 2).unwrap();
        let g = m2.element(1).unwrap();
        let gm = m2.matrix_of(&g).unwrap();
        assert_eq!(
            gm.sub(&identity_like(&gm).unwrap()).unwrap().val(),
            Val::Exact(int(4))
        );
    }

    #[test]
    fn validation_detects_corruption() {
        let u = MatrixSeries::from_rows(vec![
            vec![poly(3, &[1, 1], 40), poly(3, &[0, 2, 1], 40)],
            vec![poly(3, &[0, 0, 1], 40), poly(3, &[2, 0, 1], 40)],
        ])
        .unwrap();
        let m = gauge_module(&u, 1).unwrap();
        let samples: Vec<_> = [1u64, 2, 4]
            .iter()
            .map(|&a| m.element(a).unwrap())
            .collect();
        assert!(validate_module(&m, &samples).unwrap().passes());

        let gauge = gauge_module(&one_plus_x(3, 40), 1).unwrap();
        let table = gauge.tabulate(&samples).unwrap();
        assert!(validate_module(&table, &samples).unwrap().passes());
        let Cocycle::Table(mut t) = table.cocycle().clone() else {
            unreachable!()
        };
        let bump = PuiseuxSeries::monomial(p(3), int(5), 1, int(40)).unwrap();
        t[0].1 = MatrixSeries::scalar(t[0].1.get(0, 0).add(&bump).unwrap());
        let bad = PhiGammaModule::from_table(1, table.phi_matrix().clone(), t).unwrap();
        let report = validate_module(&bad, &samples).unwrap();
        assert!(!report.passes());
        assert_eq!(report.commutation[0].val, Val::Exact(int(5)));
    }

    #[test]
    fn matrix_profile_examples() {
        let m = gauge_module(&one_plus_x(3, 400), 1).unwrap();
        let prof = matrix_sh_profile(&m, 2).unwrap();
        for i in 0..=2u32 {
            assert_eq!(prof.floors[&i], Val::Exact(int(3i64.pow(1 + i))));
        }
        let m2 = gauge_module(&one_plus_x(2, 400), 2).unwrap();
        let prof = matrix_sh_profile(&m2, 1).unwrap();
        assert_eq!(prof.floors[&0], Val::Exact(int(4)));
        assert_eq!(prof.floors[&1], Val::Exact(int(8)));
        assert_eq!(prof.lambda, 2.0);
        assert_eq!(inverse_sh_profile(&m2, 1).unwrap().lambda, 2.0);
        let id = MatrixSeries::identity(p(3), 1, int(50)).unwrap();
        let triv = gauge_module(&id, 1).unwrap();
        assert_eq!(matrix_sh_profile(&triv, 2), Err(Error::TooFewPoints));
    }

    #[test]
    fn vector_profile_examples() {
        let pr = p(3);
        let id = MatrixSeries::identity(pr, 1, int(300)).unwrap();
        let triv = gauge_module(&id, 1).unwrap();
        let r = PuiseuxSeries::monomial(pr, Q::new(1, 3), 1, int(300)).unwrap();
        let vp = vector_sh_profile(&triv, &[r], 2).unwrap();
        assert_eq!((vp.estimate.unwrap().n, vp.level), (1, 1));
        let x = PuiseuxSeries::x(pr, int(300)).unwrap();
        assert_eq!(
            vector_sh_profile(&triv, &[x], 2)
                .unwrap()
                .estimate
                .unwrap()
                .n,
            0
        );

        let gauge = gauge_module(&one_plus_x(3, 300), 1).unwrap();
        let fixed = poly(3, &[1, 1], 300).inv().unwrap();
        let vp = vector_sh_profile(&gauge, &[fixed], 2).unwrap();
        assert!(vp.floors.values().all(|v| v.is_censored()));
    }

    #[test]
    fn fixed_point_examples() {
        let id = MatrixSeries::identity(p(3), 1, int(60)).unwrap();
        let triv = gauge_module(&id, 1).unwrap();
        let g = triv.element(1).unwrap();
        let rep = fixed_point_series(&triv, &g, None, 3).unwrap();
        assert!(rep.sum.val().is_censored());
        assert!(rep.residual().unwrap().is_censored());

        let m = gauge_module(&one_plus_x(3, 60), 1).unwrap();
        let g = m.element(1).unwrap();
        let rep = fixed_point_series(&m, &g, None, 3).unwrap();
        assert_eq!(rep.r, 1);
        assert!(rep.residual().unwrap().is_censored());
        assert_eq!(rep.target.prec(), int(59));
        assert!(rep.tail_vals[2].at_least(int(4)).unwrap_or(true));
        assert!(matches!(
            fixed_point_series(&m, &g, None, 0).map(|r| r.residual()),
            Ok(Ok(Val::Exact(_)))
        ));
    }
}
