//! Exact bivariate rational expressions and the closed-form Hilbert series.
//!
//! A [`RationalSeries`] is a Laurent polynomial in t (with polynomial
//! coefficients in s, tracked as coefficient vectors) over a denominator
//! held as a multiset of factors (1 - t^m). There is no gcd reduction
//! anywhere: sums move to a common denominator by taking multiset maxima,
//! and equality is decided exactly by clearing denominators. Coefficients
//! are arbitrary-precision rationals so alternating sums can never
//! overflow.

use crate::groups::Composition;
use crate::invariants::BasisFamily;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::json;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("twist {k} out of range {lo}..={hi}")]
    TwistOutOfRange { k: u64, lo: u64, hi: u64 },
    #[error("missing composition {0} in the per-composition mapping")]
    MissingComposition(String),
    #[error("coefficient at (t^{t}, s^{s}) is not a nonnegative integer")]
    NotADimension { t: i64, s: u32 },
    #[error("nonzero coefficient at negative degree t^{t}")]
    NegativeDegree { t: i64 },
    #[error("degree overflow while transcribing a closed form")]
    DegreeOverflow,
}

/// A Laurent polynomial in t; the coefficient of t^d is a polynomial in s
/// stored as its coefficient vector (index = s-degree).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LaurentPoly {
    terms: BTreeMap<i64, Vec<BigRational>>,
}

fn vec_is_zero(v: &[BigRational]) -> bool {
    v.iter().all(|c| c.is_zero())
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly::default()
    }

    pub fn one() -> Self {
        LaurentPoly::monomial(0, 0, BigRational::one())
    }

    pub fn monomial(tdeg: i64, sdeg: u32, coeff: BigRational) -> Self {
        let mut p = LaurentPoly::zero();
        p.add_term(tdeg, sdeg, coeff);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, tdeg: i64, sdeg: u32, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        let v = self.terms.entry(tdeg).or_default();
        if v.len() <= sdeg as usize {
            v.resize(sdeg as usize + 1, BigRational::zero());
        }
        v[sdeg as usize] += coeff;
        if vec_is_zero(v) {
            self.terms.remove(&tdeg);
        }
    }

    pub fn add(&self, other: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (t, v) in &other.terms {
            for (s, c) in v.iter().enumerate() {
                out.add_term(*t, s as u32, c.clone());
            }
        }
        out
    }

    pub fn sub(&self, other: &LaurentPoly) -> LaurentPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> LaurentPoly {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            for c in v.iter_mut() {
                *c = -c.clone();
            }
        }
        out
    }

    pub fn mul(&self, other: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (ta, va) in &self.terms {
            for (tb, vb) in &other.terms {
                let t = ta.checked_add(*tb).expect("t-degree overflow");
                for (sa, ca) in va.iter().enumerate() {
                    if ca.is_zero() {
                        continue;
                    }
                    for (sb, cb) in vb.iter().enumerate() {
                        if cb.is_zero() {
                            continue;
                        }
                        out.add_term(t, (sa + sb) as u32, ca * cb);
                    }
                }
            }
        }
        out
    }

    /// Iterate nonzero (tdeg, sdeg, coeff).
    pub fn iter(&self) -> impl Iterator<Item = (i64, u32, &BigRational)> {
        self.terms.iter().flat_map(|(t, v)| {
            v.iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(move |(s, c)| (*t, s as u32, c))
        })
    }

    /// Replace s by 1/s and multiply by s^n; the s-degree must not exceed n.
    pub fn reverse_s(&self, n: u32) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (t, s, c) in self.iter() {
            assert!(s <= n, "s-degree exceeds the exterior bound");
            out.add_term(t, n - s, c.clone());
        }
        out
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for (t, s, c) in self.iter() {
            let mut factors = Vec::new();
            if !c.is_one() || (t == 0 && s == 0) {
                factors.push(c.to_string());
            }
            match t {
                0 => {}
                1 => factors.push("t".into()),
                _ => factors.push(format!("t^{t}")),
            }
            match s {
                0 => {}
                1 => factors.push("s".into()),
                _ => factors.push(format!("s^{s}")),
            }
            parts.push(factors.join("*"));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// An exact rational expression num / prod (1 - t^m).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalSeries {
    num: LaurentPoly,
    den: BTreeMap<i64, u32>,
}

impl RationalSeries {
    pub fn from_poly(num: LaurentPoly) -> Self {
        RationalSeries {
            num,
            den: BTreeMap::new(),
        }
    }

    pub fn zero() -> Self {
        RationalSeries::from_poly(LaurentPoly::zero())
    }

    pub fn one() -> Self {
        RationalSeries::from_poly(LaurentPoly::one())
    }

    pub fn numerator(&self) -> &LaurentPoly {
        &self.num
    }

    /// Denominator factor exponents with multiplicity.
    pub fn denominator(&self) -> &BTreeMap<i64, u32> {
        &self.den
    }

    /// Append a factor (1 - t^m)^mult to the denominator.
    pub fn div_factor(mut self, m: i64, mult: u32) -> Self {
        assert!(m >= 1, "denominator exponents must be positive");
        if mult > 0 {
            *self.den.entry(m).or_insert(0) += mult;
        }
        self
    }

    pub fn neg(&self) -> Self {
        RationalSeries {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &RationalSeries) -> RationalSeries {
        let mut den = self.den.clone();
        for (m, c) in &other.den {
            *den.entry(*m).or_insert(0) += c;
        }
        RationalSeries {
            num: self.num.mul(&other.num),
            den,
        }
    }

    /// Addition over the common denominator taken as the multiset maximum;
    /// no polynomial gcd is ever computed.
    pub fn add(&self, other: &RationalSeries) -> RationalSeries {
        let mut den: BTreeMap<i64, u32> = self.den.clone();
        for (m, c) in &other.den {
            let e = den.entry(*m).or_insert(0);
            *e = (*e).max(*c);
        }
        let pad = |own: &BTreeMap<i64, u32>| {
            let mut extra = Vec::new();
            for (m, c) in &den {
                let have = own.get(m).copied().unwrap_or(0);
                if *c > have {
                    extra.push((*m, c - have));
                }
            }
            expand_factors(&extra)
        };
        let num = self
            .num
            .mul(&pad(&self.den))
            .add(&other.num.mul(&pad(&other.den)));
        RationalSeries { num, den }
    }

    pub fn sub(&self, other: &RationalSeries) -> RationalSeries {
        self.add(&other.neg())
    }

    /// Replace s by 1/s and multiply the numerator by s^n.
    pub fn reverse_s(&self, n: u32) -> RationalSeries {
        RationalSeries {
            num: self.num.reverse_s(n),
            den: self.den.clone(),
        }
    }

    /// Geometric-series expansion of every denominator factor, truncated at
    /// t-degree `t_max`.
    pub fn expand(&self, t_max: i64) -> SeriesTable {
        let t_min = self.num.terms.keys().next().copied().unwrap_or(0).min(0);
        let width = (t_max - t_min + 1).max(0) as usize;
        let s_max = self
            .num
            .terms
            .values()
            .map(|v| v.len())
            .max()
            .unwrap_or(1)
            .max(1);
        let mut grid: Vec<Vec<BigRational>> =
            vec![vec![BigRational::zero(); s_max]; width];
        for (t, v) in &self.num.terms {
            if *t > t_max {
                continue;
            }
            for (s, c) in v.iter().enumerate() {
                grid[(*t - t_min) as usize][s] = c.clone();
            }
        }
        // multiplying by 1/(1 - t^m) = sum t^(im) is a strided prefix sum
        for (&m, &mult) in &self.den {
            for _ in 0..mult {
                let m = m as usize;
                for d in m..width {
                    let (lo, hi) = grid.split_at_mut(d);
                    for (s, c) in hi[0].iter_mut().enumerate() {
                        *c += &lo[d - m][s];
                    }
                }
            }
        }
        let mut entries = BTreeMap::new();
        for (off, v) in grid.into_iter().enumerate() {
            for (s, c) in v.into_iter().enumerate() {
                if !c.is_zero() {
                    entries.insert((t_min + off as i64, s as u32), c);
                }
            }
        }
        SeriesTable { t_max, entries }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "numerator": self.num.terms.iter().map(|(t, v)| {
                json!([t, v.iter().map(|c| c.to_string()).collect::<Vec<_>>()])
            }).collect::<Vec<_>>(),
            "denominator": self.den.iter().flat_map(|(m, c)| {
                std::iter::repeat_n(*m, *c as usize)
            }).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for RationalSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            return write!(f, "{}", self.num);
        }
        let den: Vec<String> = self
            .den
            .iter()
            .flat_map(|(m, c)| std::iter::repeat_n(format!("(1-t^{m})"), *c as usize))
            .collect();
        write!(f, "({}) / ({})", self.num, den.join(""))
    }
}

/// prod over (m, mult) of (1 - t^m)^mult as a polynomial.
fn expand_factors(factors: &[(i64, u32)]) -> LaurentPoly {
    let mut acc = LaurentPoly::one();
    for &(m, mult) in factors {
        for _ in 0..mult {
            let f = LaurentPoly::one().sub(&LaurentPoly::monomial(m, 0, BigRational::one()));
            acc = acc.mul(&f);
        }
    }
    acc
}

/// Exact equality by clearing denominators. Factors common to both
/// denominators (as multisets) cancel first; the returned certificate is
/// the cleared-denominator difference, identically zero exactly on equality.
pub fn rational_equal(a: &RationalSeries, b: &RationalSeries) -> (bool, LaurentPoly) {
    let mut extra_a = Vec::new(); // factors of b's denominator missing from a's
    let mut extra_b = Vec::new();
    let keys: std::collections::BTreeSet<i64> =
        a.den.keys().chain(b.den.keys()).copied().collect();
    for m in keys {
        let ca = a.den.get(&m).copied().unwrap_or(0);
        let cb = b.den.get(&m).copied().unwrap_or(0);
        if cb > ca {
            extra_a.push((m, cb - ca));
        }
        if ca > cb {
            extra_b.push((m, ca - cb));
        }
    }
    let lhs = a.num.mul(&expand_factors(&extra_a));
    let rhs = b.num.mul(&expand_factors(&extra_b));
    let cert = lhs.sub(&rhs);
    (cert.is_zero(), cert)
}

/// Truncated coefficient table of a series: (t-degree, s-degree) -> value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesTable {
    t_max: i64,
    entries: BTreeMap<(i64, u32), BigRational>,
}

impl SeriesTable {
    pub fn t_max(&self) -> i64 {
        self.t_max
    }

    pub fn coeff(&self, t: i64, s: u32) -> BigRational {
        self.entries
            .get(&(t, s))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Interpret as a dimension table: every coefficient must be a
    /// nonnegative integer and no negative t-degree may survive. This is
    /// asserted only for final series; intermediate Laurent terms cancel.
    pub fn dims(&self) -> Result<BTreeMap<(i64, u32), u64>, SeriesError> {
        let mut out = BTreeMap::new();
        for ((t, s), c) in &self.entries {
            if *t < 0 {
                return Err(SeriesError::NegativeDegree { t: *t });
            }
            if !c.is_integer() || c.is_negative() {
                return Err(SeriesError::NotADimension { t: *t, s: *s });
            }
            let v = c
                .to_integer()
                .to_u64()
                .ok_or(SeriesError::NotADimension { t: *t, s: *s })?;
            if v > 0 {
                out.insert((*t, *s), v);
            }
        }
        Ok(out)
    }

    /// CSV rows "tDeg,sDeg,dim" for nonzero entries.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tDeg,sDeg,dim\n");
        for ((t, s), c) in &self.entries {
            out.push_str(&format!("{t},{s},{c}\n"));
        }
        out
    }
}

// ----- closed-form Hilbert series -----

/// Every closed-form series implemented by the crate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClosedForm {
    /// Hilbert series of the Dickson algebra S(V)^GL_n(q).
    DicksonAlgebra { n: usize },
    /// Hilbert series of S(V)^(P_I) (polynomial invariants only).
    ParabolicPolynomial { comp: Composition },
    /// Bigraded series of the twisted parabolic invariants, 1 <= k <= q-2.
    ParabolicTwisted { comp: Composition, k: u64 },
    /// Bigraded series of the untwisted parabolic invariants.
    ParabolicUntwisted { comp: Composition },
    /// Steinberg multiplicity series of S(V) (x) E(V).
    SteinbergUntwisted { n: usize },
    /// Steinberg multiplicity series of S(V) (x) E(V) (x) Det^k, k >= 1.
    SteinbergTwisted { n: usize, k: u64 },
    /// Steinberg multiplicity series of S(V) alone.
    SteinbergPolynomial { n: usize },
    /// Series of the invariants in S(V) (x) dual exterior algebra.
    DualExterior { comp: Composition },
}

fn qpow(q: u64, e: u32) -> Result<i64, SeriesError> {
    (q as i64).checked_pow(e).ok_or(SeriesError::DegreeOverflow)
}

/// (q^n - 1) / (q - 1) = 1 + q + ... + q^(n-1).
fn q_geometric(q: u64, n: u32) -> Result<i64, SeriesError> {
    let mut acc = 0i64;
    for i in 0..n {
        acc = acc
            .checked_add(qpow(q, i)?)
            .ok_or(SeriesError::DegreeOverflow)?;
    }
    Ok(acc)
}

/// Denominator of the parabolic invariant ring: factors (1 - t^(q^(m_i) - q^(m_i - j))).
fn parabolic_denominator(
    q: u64,
    comp: &Composition,
    series: RationalSeries,
) -> Result<RationalSeries, SeriesError> {
    let mut out = series;
    for i in 1..=comp.len() {
        let mi = comp.m(i) as u32;
        for j in 1..=comp.parts()[i - 1] as u32 {
            out = out.div_factor(qpow(q, mi)? - qpow(q, mi - j)?, 1);
        }
    }
    Ok(out)
}

/// prod_{i=lo}^{hi} (s + t^(q^i)).
fn s_plus_t_product(q: u64, lo: u32, hi: i64) -> Result<LaurentPoly, SeriesError> {
    let mut acc = LaurentPoly::one();
    let mut i = lo as i64;
    while i <= hi {
        let f = LaurentPoly::monomial(0, 1, BigRational::one())
            .add(&LaurentPoly::monomial(qpow(q, i as u32)?, 0, BigRational::one()));
        acc = acc.mul(&f);
        i += 1;
    }
    Ok(acc)
}

/// prod_{j=1}^{m} (1 + s t^(sign * q^(j-1))).
fn s_shift_product(q: u64, m: u32, sign_exponent: i64) -> Result<LaurentPoly, SeriesError> {
    let mut acc = LaurentPoly::one();
    for j in 1..=m {
        let f = LaurentPoly::one().add(&LaurentPoly::monomial(
            sign_exponent * qpow(q, j - 1)?,
            1,
            BigRational::one(),
        ));
        acc = acc.mul(&f);
    }
    Ok(acc)
}

pub fn closed_form(q: u64, kind: &ClosedForm) -> Result<RationalSeries, SeriesError> {
    match kind {
        ClosedForm::DicksonAlgebra { n } => {
            let mut out = RationalSeries::one();
            for j in 0..*n as u32 {
                out = out.div_factor(qpow(q, *n as u32)? - qpow(q, j)?, 1);
            }
            Ok(out)
        }
        ClosedForm::ParabolicPolynomial { comp } => parabolic_denominator(q, comp, RationalSeries::one()),
        ClosedForm::ParabolicTwisted { comp, k } => {
            check_twist(q, *k, 1)?;
            let n = comp.n() as u32;
            let pref = (q as i64 - 2 - *k as i64)
                .checked_mul(q_geometric(q, n)?)
                .ok_or(SeriesError::DegreeOverflow)?;
            let num = LaurentPoly::monomial(pref, 0, BigRational::one())
                .mul(&s_plus_t_product(q, 0, n as i64 - 1)?);
            parabolic_denominator(q, comp, RationalSeries::from_poly(num))
        }
        ClosedForm::ParabolicUntwisted { comp } => {
            let n = comp.n() as u32;
            let ell = comp.len();
            // 1 - t^(q^(m_1)-1)
            let mut num = LaurentPoly::one().sub(&LaurentPoly::monomial(
                qpow(q, comp.m(1) as u32)? - 1,
                0,
                BigRational::one(),
            ));
            // + sum_(i=1)^(l-1) (t^(q^(m_i)-1) - t^(q^(m_(i+1))-1)) prod_(j<=m_i)(1+s t^(-q^(j-1)))
            for i in 1..ell {
                let a = LaurentPoly::monomial(qpow(q, comp.m(i) as u32)? - 1, 0, BigRational::one());
                let b = LaurentPoly::monomial(
                    qpow(q, comp.m(i + 1) as u32)? - 1,
                    0,
                    BigRational::one(),
                );
                num = num.add(&a.sub(&b).mul(&s_shift_product(q, comp.m(i) as u32, -1)?));
            }
            // + t^(q^n - 1) prod_(j<=n)(1 + s t^(-q^(j-1)))
            let last = LaurentPoly::monomial(qpow(q, n)? - 1, 0, BigRational::one())
                .mul(&s_shift_product(q, n, -1)?);
            num = num.add(&last);
            parabolic_denominator(q, comp, RationalSeries::from_poly(num))
        }
        ClosedForm::SteinbergUntwisted { n } => {
            let n = *n as u32;
            let head = LaurentPoly::monomial(qpow(q, n)? - 1, 1, BigRational::one()).add(
                &LaurentPoly::monomial(qpow(q, n - 1)?, 0, BigRational::one()),
            );
            let num = LaurentPoly::monomial(-(n as i64), 0, BigRational::one())
                .mul(&head)
                .mul(&s_plus_t_product(q, 0, n as i64 - 2)?);
            let mut out = RationalSeries::from_poly(num);
            for i in 1..=n {
                out = out.div_factor(qpow(q, i)? - 1, 1);
            }
            Ok(out)
        }
        ClosedForm::SteinbergTwisted { n, k } => {
            check_twist(q, *k, 1)?;
            let n = *n as u32;
            let pref = (q as i64 - 1 - *k as i64)
                .checked_mul(q_geometric(q, n)?)
                .ok_or(SeriesError::DegreeOverflow)?
                - n as i64;
            let num = LaurentPoly::monomial(pref, 0, BigRational::one())
                .mul(&s_plus_t_product(q, 0, n as i64 - 1)?);
            let mut out = RationalSeries::from_poly(num);
            for i in 1..=n {
                out = out.div_factor(qpow(q, i)? - 1, 1);
            }
            Ok(out)
        }
        ClosedForm::SteinbergPolynomial { n } => {
            let n = *n as u32;
            let pref = q_geometric(q, n)? - n as i64;
            let mut out =
                RationalSeries::from_poly(LaurentPoly::monomial(pref, 0, BigRational::one()));
            for i in 1..=n {
                out = out.div_factor(qpow(q, i)? - 1, 1);
            }
            Ok(out)
        }
        ClosedForm::DualExterior { comp } => {
            let n = comp.n() as u32;
            let num = s_shift_product(q, n, 1)?;
            parabolic_denominator(q, comp, RationalSeries::from_poly(num))
        }
    }
}

fn check_twist(q: u64, k: u64, lo: u64) -> Result<(), SeriesError> {
    let hi = q.saturating_sub(2);
    if k < lo || k > hi {
        return Err(SeriesError::TwistOutOfRange { k, lo, hi });
    }
    Ok(())
}

/// The Curtis alternating sum over all compositions of n:
/// sum_I (-1)^(n - l(I)) series(I).
pub fn curtis_sum(
    n: usize,
    per_composition: &BTreeMap<Composition, RationalSeries>,
) -> Result<RationalSeries, SeriesError> {
    let mut acc = RationalSeries::zero();
    for comp in Composition::all(n) {
        let series = per_composition
            .get(&comp)
            .ok_or_else(|| SeriesError::MissingComposition(comp.to_string()))?;
        let signed = if (n - comp.len()) % 2 == 1 {
            series.neg()
        } else {
            series.clone()
        };
        acc = acc.add(&signed);
    }
    Ok(acc)
}

/// Hilbert series of a free module: sum of t^i s^j over the generators,
/// divided by prod (1 - t^d) over the base-ring degrees.
pub fn module_series(family: &BasisFamily) -> Result<RationalSeries, SeriesError> {
    let mut num = LaurentPoly::zero();
    for (_, (t, s)) in family.generators() {
        let t = i64::try_from(*t).map_err(|_| SeriesError::DegreeOverflow)?;
        num.add_term(t, *s as u32, BigRational::one());
    }
    let mut out = RationalSeries::from_poly(num);
    for d in family.base_degrees() {
        let d = i64::try_from(*d).map_err(|_| SeriesError::DegreeOverflow)?;
        out = out.div_factor(d, 1);
    }
    Ok(out)
}
