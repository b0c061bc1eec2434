//! The bigraded superalgebra F_q[x_1..x_n] (x) E[y_1..y_n].
//!
//! Elements are sparse maps from monomials to nonzero field coefficients.
//! A monomial x^a y_S is bigraded by (|a|, |S|); the y factors are stored as
//! an ascending index set with reordering signs absorbed into coefficients,
//! so every element is kept in canonical form. Products follow the standard
//! sign rule: (x^a y_S)(x^b y_T) = 0 when S and T meet, and otherwise equal
//! (-1)^inv(S,T) x^(a+b) y_(S u T) with inv counting pairs s > t.
//!
//! Monomial exponents are u128 with checked arithmetic: q-power degrees such
//! as q^(m-1) stay far below the limit for every enumerable field, and an
//! overflow aborts loudly instead of wrapping.

use crate::gf::{Field, FieldElement};
use rustc_hash::FxHashMap;
use smallvec::SmallVec;
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// Monomial exponent type.
pub type Exp = u128;

/// Maximum number of variables (y sets are stored as u32 bitmasks).
pub const MAX_VARS: usize = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("operands live in different ambient algebras")]
    AmbientMismatch,
    #[error("substitution image violates parity: {0}")]
    ParityViolation(String),
    #[error("not divisible")]
    NotDivisible,
    #[error("division by zero element")]
    ZeroDivisor,
    #[error("divisor must have pure exterior degree 0")]
    OddDivisor,
    #[error("variable index {0} out of range 1..={1}")]
    BadVariableIndex(usize, usize),
    #[error("at most {MAX_VARS} variables are supported, requested {0}")]
    TooManyVariables(usize),
    #[error("monomial exponent overflow")]
    ExponentOverflow,
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Field(#[from] crate::gf::GfError),
}

type ExpVec = SmallVec<[Exp; 4]>;

/// A monomial x_1^{a_1} ... x_n^{a_n} y_{s_1} ... y_{s_j} with s_1 < ... < s_j.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SuperMonomial {
    xexp: ExpVec,
    yset: u32,
}

impl SuperMonomial {
    pub fn one(n: usize) -> Self {
        SuperMonomial {
            xexp: smallvec::smallvec![0; n],
            yset: 0,
        }
    }

    pub fn x_exponents(&self) -> &[Exp] {
        &self.xexp
    }

    /// Ascending 1-based y indices.
    pub fn y_indices(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut m = self.yset;
        while m != 0 {
            out.push(m.trailing_zeros() as usize + 1);
            m &= m - 1;
        }
        out
    }

    pub fn x_degree(&self) -> Exp {
        self.xexp
            .iter()
            .try_fold(0 as Exp, |a, &b| a.checked_add(b))
            .expect("monomial exponent overflow")
    }

    pub fn y_degree(&self) -> usize {
        self.yset.count_ones() as usize
    }

    pub fn bidegree(&self) -> (Exp, usize) {
        (self.x_degree(), self.y_degree())
    }
}

/// Graded-lexicographic order: total x-degree first, then exponents with
/// x_1 most significant; y sets compared by size, then lexicographically.
fn cmp_mono(a: &SuperMonomial, b: &SuperMonomial) -> Ordering {
    (a.x_degree().cmp(&b.x_degree()))
        .then_with(|| a.xexp.iter().cmp(b.xexp.iter()))
        .then_with(|| a.y_degree().cmp(&b.y_degree()))
        .then_with(|| {
            // ascending index lists compared lexicographically; the reversed
            // bit pattern gives that order directly
            let ra = a.yset.reverse_bits();
            let rb = b.yset.reverse_bits();
            rb.cmp(&ra)
        })
}

impl PartialOrd for SuperMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SuperMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_mono(self, other)
    }
}

/// Sign for merging two disjoint ascending y sets: counts pairs (s, t) in
/// S x T with s > t. Returns None when the sets intersect (the product is 0).
fn merge_sign(s: u32, t: u32) -> Option<bool> {
    if s & t != 0 {
        return None;
    }
    let mut inversions = 0u32;
    let mut rest = t;
    while rest != 0 {
        let b = rest.trailing_zeros();
        inversions += (s >> (b + 1)).count_ones();
        rest &= rest - 1;
    }
    Some(inversions % 2 == 1)
}

/// Handle for a fixed ambient algebra: n variables over a fixed field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperAlgebra {
    field: Field,
    n: usize,
}

/// A sparse element of the superalgebra. Immutable in use: all operations
/// return fresh values, so elements are safely shared across threads.
#[derive(Debug, Clone)]
pub struct SuperElement {
    alg: SuperAlgebra,
    terms: FxHashMap<SuperMonomial, FieldElement>,
}

impl PartialEq for SuperElement {
    fn eq(&self, other: &Self) -> bool {
        self.alg == other.alg && self.terms == other.terms
    }
}
impl Eq for SuperElement {}

impl SuperAlgebra {
    pub fn new(field: Field, n: usize) -> Result<Self, AlgebraError> {
        if n > MAX_VARS {
            return Err(AlgebraError::TooManyVariables(n));
        }
        Ok(SuperAlgebra { field, n })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn zero(&self) -> SuperElement {
        SuperElement {
            alg: self.clone(),
            terms: FxHashMap::default(),
        }
    }

    pub fn one(&self) -> SuperElement {
        self.scalar(self.field.one())
    }

    pub fn scalar(&self, c: FieldElement) -> SuperElement {
        let mut e = self.zero();
        if c != self.field.zero() {
            e.terms.insert(SuperMonomial::one(self.n), c);
        }
        e
    }

    /// The polynomial generator x_i (1-based).
    pub fn x(&self, i: usize) -> Result<SuperElement, AlgebraError> {
        self.x_pow(i, 1)
    }

    /// x_i^e.
    pub fn x_pow(&self, i: usize, e: Exp) -> Result<SuperElement, AlgebraError> {
        if i == 0 || i > self.n {
            return Err(AlgebraError::BadVariableIndex(i, self.n));
        }
        let mut mono = SuperMonomial::one(self.n);
        mono.xexp[i - 1] = e;
        Ok(self.monomial(mono, self.field.one()))
    }

    /// The exterior generator y_i (1-based).
    pub fn y(&self, i: usize) -> Result<SuperElement, AlgebraError> {
        if i == 0 || i > self.n {
            return Err(AlgebraError::BadVariableIndex(i, self.n));
        }
        let mut mono = SuperMonomial::one(self.n);
        mono.yset = 1 << (i - 1);
        Ok(self.monomial(mono, self.field.one()))
    }

    pub fn monomial(&self, mono: SuperMonomial, coeff: FieldElement) -> SuperElement {
        let mut e = self.zero();
        if coeff != self.field.zero() {
            e.terms.insert(mono, coeff);
        }
        e
    }

    /// Square matrix over this algebra.
    pub fn matrix(&self, entries: Vec<Vec<SuperElement>>) -> Result<AlgebraMatrix, AlgebraError> {
        let m = entries.len();
        for row in &entries {
            if row.len() != m {
                return Err(AlgebraError::AmbientMismatch);
            }
            for e in row {
                if e.alg != *self {
                    return Err(AlgebraError::AmbientMismatch);
                }
            }
        }
        Ok(AlgebraMatrix {
            alg: self.clone(),
            entries,
        })
    }
}

impl SuperElement {
    pub fn algebra(&self) -> &SuperAlgebra {
        &self.alg
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in descending monomial order.
    pub fn sorted_terms(&self) -> Vec<(&SuperMonomial, FieldElement)> {
        let mut v: Vec<_> = self.terms.iter().map(|(m, c)| (m, *c)).collect();
        v.sort_by(|a, b| cmp_mono(b.0, a.0));
        v
    }

    pub fn coefficient(&self, mono: &SuperMonomial) -> FieldElement {
        self.terms
            .get(mono)
            .copied()
            .unwrap_or_else(|| self.alg.field.zero())
    }

    fn check_same(&self, other: &SuperElement) -> Result<(), AlgebraError> {
        if self.alg != other.alg {
            return Err(AlgebraError::AmbientMismatch);
        }
        Ok(())
    }

    fn accumulate(
        alg: &SuperAlgebra,
        terms: &mut FxHashMap<SuperMonomial, FieldElement>,
        mono: SuperMonomial,
        coeff: FieldElement,
    ) {
        if coeff == alg.field.zero() {
            return;
        }
        match terms.entry(mono) {
            std::collections::hash_map::Entry::Occupied(mut o) => {
                let s = alg.field.add(*o.get(), coeff).unwrap();
                if s == alg.field.zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
            std::collections::hash_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
        }
    }

    pub fn add(&self, other: &SuperElement) -> Result<SuperElement, AlgebraError> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            Self::accumulate(&self.alg, &mut out.terms, m.clone(), *c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &SuperElement) -> Result<SuperElement, AlgebraError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> SuperElement {
        let f = &self.alg.field;
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = f.neg(*c).unwrap();
        }
        out
    }

    pub fn scale(&self, c: FieldElement) -> Result<SuperElement, AlgebraError> {
        let f = &self.alg.field;
        if !f.contains(c) {
            return Err(AlgebraError::AmbientMismatch);
        }
        if c == f.zero() {
            return Ok(self.alg.zero());
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = f.mul(*v, c).unwrap();
        }
        Ok(out)
    }

    pub fn mul(&self, other: &SuperElement) -> Result<SuperElement, AlgebraError> {
        self.check_same(other)?;
        let f = &self.alg.field;
        let mut out = self.alg.zero();
        out.terms.reserve(self.terms.len().max(other.terms.len()));
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let Some(negate) = merge_sign(ma.yset, mb.yset) else {
                    continue;
                };
                let mut xexp: ExpVec = SmallVec::with_capacity(self.alg.n);
                for (ea, eb) in ma.xexp.iter().zip(mb.xexp.iter()) {
                    xexp.push(ea.checked_add(*eb).ok_or(AlgebraError::ExponentOverflow)?);
                }
                let mono = SuperMonomial {
                    xexp,
                    yset: ma.yset | mb.yset,
                };
                let mut c = f.mul(*ca, *cb).unwrap();
                if negate {
                    c = f.neg(c).unwrap();
                }
                Self::accumulate(&self.alg, &mut out.terms, mono, c);
            }
        }
        Ok(out)
    }

    /// True when every term has exterior degree 0.
    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|m| m.yset == 0)
    }

    /// f^e by binary powering, with a Frobenius shortcut when e is a power
    /// of the characteristic and f is even: (sum c m)^(p^j) = sum c^(p^j) m^(p^j).
    pub fn pow(&self, e: Exp) -> Result<SuperElement, AlgebraError> {
        if e == 0 {
            return Ok(self.alg.one());
        }
        if e == 1 {
            return Ok(self.clone());
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            if m.yset != 0 {
                return Ok(self.alg.zero()); // odd generators square to zero
            }
            let mut xexp: ExpVec = SmallVec::with_capacity(self.alg.n);
            for &a in m.xexp.iter() {
                xexp.push(a.checked_mul(e).ok_or(AlgebraError::ExponentOverflow)?);
            }
            let f = &self.alg.field;
            return Ok(self.alg.monomial(
                SuperMonomial { xexp, yset: 0 },
                f.pow(*c, e).unwrap(),
            ));
        }
        if self.is_even() && is_char_power(self.alg.field.p(), e) {
            let f = &self.alg.field;
            let mut out = self.alg.zero();
            for (m, c) in &self.terms {
                let mut xexp: ExpVec = SmallVec::with_capacity(self.alg.n);
                for &a in m.xexp.iter() {
                    xexp.push(a.checked_mul(e).ok_or(AlgebraError::ExponentOverflow)?);
                }
                out.terms.insert(
                    SuperMonomial { xexp, yset: 0 },
                    f.pow(*c, e).unwrap(),
                );
            }
            return Ok(out);
        }
        let mut base = self.clone();
        let mut acc = self.alg.one();
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

    /// The unique algebra endomorphism sending x_i to `xs[i]` and y_i to
    /// `ys[i]`, applied to self. Each x image must be even and each y image
    /// homogeneous of exterior degree 1 (or zero).
    pub fn substitute(
        &self,
        xs: &[SuperElement],
        ys: &[SuperElement],
    ) -> Result<SuperElement, AlgebraError> {
        let n = self.alg.n;
        if xs.len() != n || ys.len() != n {
            return Err(AlgebraError::AmbientMismatch);
        }
        for (i, img) in xs.iter().enumerate() {
            self.check_same(img)?;
            if !img.is_even() {
                return Err(AlgebraError::ParityViolation(format!(
                    "image of x{} has an odd part",
                    i + 1
                )));
            }
        }
        for (i, img) in ys.iter().enumerate() {
            self.check_same(img)?;
            if !img.terms.keys().all(|m| m.y_degree() == 1) {
                return Err(AlgebraError::ParityViolation(format!(
                    "image of y{} is not homogeneous of exterior degree 1",
                    i + 1
                )));
            }
        }
        let mut out = self.alg.zero();
        for (mono, coeff) in &self.terms {
            let mut acc = self.alg.scalar(*coeff);
            for (i, &e) in mono.xexp.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                acc = acc.mul(&xs[i].pow(e)?)?;
                if acc.is_zero() {
                    break;
                }
            }
            if !acc.is_zero() {
                // y factors applied in ascending index order
                let mut m = mono.yset;
                while m != 0 {
                    let b = m.trailing_zeros() as usize;
                    acc = acc.mul(&ys[b])?;
                    if acc.is_zero() {
                        break;
                    }
                    m &= m - 1;
                }
            }
            out = out.add(&acc)?;
        }
        Ok(out)
    }

    /// The identity assignment, for building substitutions that move only
    /// a few variables.
    pub fn identity_images(alg: &SuperAlgebra) -> (Vec<SuperElement>, Vec<SuperElement>) {
        let xs = (1..=alg.n).map(|i| alg.x(i).unwrap()).collect();
        let ys = (1..=alg.n).map(|i| alg.y(i).unwrap()).collect();
        (xs, ys)
    }

    /// Exact division f / g for an even divisor g; errors when g is zero,
    /// has odd terms, or does not divide f exactly.
    pub fn exact_divide(&self, g: &SuperElement) -> Result<SuperElement, AlgebraError> {
        self.check_same(g)?;
        if g.is_zero() {
            return Err(AlgebraError::ZeroDivisor);
        }
        if !g.is_even() {
            return Err(AlgebraError::OddDivisor);
        }
        let f_field = &self.alg.field;
        let gsorted: BTreeMap<SuperMonomial, FieldElement> =
            g.terms.iter().map(|(m, c)| (m.clone(), *c)).collect();
        let (glead, glc) = gsorted.iter().next_back().unwrap();
        let glc_inv = f_field.inv(*glc).unwrap();

        // divide each exterior sector independently; g is even so the y part
        // of every quotient term matches the dividend's
        let mut sectors: BTreeMap<u32, BTreeMap<SuperMonomial, FieldElement>> = BTreeMap::new();
        for (m, c) in &self.terms {
            sectors.entry(m.yset).or_default().insert(m.clone(), *c);
        }
        let mut out = self.alg.zero();
        for (yset, mut rem) in sectors {
            while let Some((rlead, rc)) = rem.iter().next_back().map(|(m, c)| (m.clone(), *c)) {
                // monomial divisibility of the leading terms is forced at
                // every step of an exact division
                let mut qexp: ExpVec = SmallVec::with_capacity(self.alg.n);
                for (ra, ga) in rlead.xexp.iter().zip(glead.xexp.iter()) {
                    match ra.checked_sub(*ga) {
                        Some(d) => qexp.push(d),
                        None => return Err(AlgebraError::NotDivisible),
                    }
                }
                let qc = f_field.mul(rc, glc_inv).unwrap();
                let qmono = SuperMonomial { xexp: qexp, yset };
                // rem -= qc * qmono * g
                for (gm, gc) in &gsorted {
                    let mut exp: ExpVec = SmallVec::with_capacity(self.alg.n);
                    for (qa, ga) in qmono.xexp.iter().zip(gm.xexp.iter()) {
                        exp.push(qa.checked_add(*ga).ok_or(AlgebraError::ExponentOverflow)?);
                    }
                    let mono = SuperMonomial { xexp: exp, yset };
                    let delta = f_field.neg(f_field.mul(qc, *gc).unwrap()).unwrap();
                    let cur = rem.get(&mono).copied().unwrap_or_else(|| f_field.zero());
                    let new = f_field.add(cur, delta).unwrap();
                    if new == f_field.zero() {
                        rem.remove(&mono);
                    } else {
                        rem.insert(mono, new);
                    }
                }
                Self::accumulate(&self.alg, &mut out.terms, qmono, qc);
            }
        }
        Ok(out)
    }

    /// Terms of exactly the given bidegree.
    pub fn component(&self, bidegree: (Exp, usize)) -> SuperElement {
        let mut out = self.alg.zero();
        for (m, c) in &self.terms {
            if m.bidegree() == bidegree {
                out.terms.insert(m.clone(), *c);
            }
        }
        out
    }

    /// The set of bidegrees with nonzero terms.
    pub fn bidegrees(&self) -> BTreeSet<(Exp, usize)> {
        self.terms.keys().map(|m| m.bidegree()).collect()
    }

    /// Some((i, j)) when nonzero and concentrated in one bidegree.
    pub fn homogeneous_bidegree(&self) -> Option<(Exp, usize)> {
        let degs = self.bidegrees();
        if degs.len() == 1 {
            degs.into_iter().next()
        } else {
            None
        }
    }
}

fn is_char_power(p: u64, e: Exp) -> bool {
    let mut v = p as Exp;
    while v <= e {
        if v == e {
            return true;
        }
        match v.checked_mul(p as Exp) {
            Some(next) => v = next,
            None => return false,
        }
    }
    false
}

/// A square matrix with entries in the superalgebra, for row determinants
/// of matrices whose entries need not commute.
#[derive(Debug, Clone)]
pub struct AlgebraMatrix {
    alg: SuperAlgebra,
    entries: Vec<Vec<SuperElement>>,
}

impl AlgebraMatrix {
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &SuperElement {
        &self.entries[i][j]
    }

    /// Row determinant: sum over permutations of sgn(s) a_{1,s(1)} ... a_{m,s(m)}
    /// with the factors multiplied in row order.
    pub fn row_det(&self) -> Result<SuperElement, AlgebraError> {
        let m = self.entries.len();
        if m == 0 {
            return Ok(self.alg.one());
        }
        let mut used = vec![false; m];
        let mut acc = self.alg.zero();
        self.det_rec(0, &mut used, &self.alg.one(), false, &mut acc)?;
        Ok(acc)
    }

    fn det_rec(
        &self,
        row: usize,
        used: &mut Vec<bool>,
        partial: &SuperElement,
        negate: bool,
        acc: &mut SuperElement,
    ) -> Result<(), AlgebraError> {
        let m = self.entries.len();
        if row == m {
            let term = if negate { partial.neg() } else { partial.clone() };
            *acc = acc.add(&term)?;
            return Ok(());
        }
        for col in 0..m {
            if used[col] {
                continue;
            }
            let next = partial.mul(&self.entries[row][col])?;
            if next.is_zero() {
                continue;
            }
            // inversions added by placing this column after the used ones
            let inv = used[col + 1..].iter().filter(|&&u| u).count();
            used[col] = true;
            self.det_rec(row + 1, used, &next, negate ^ (inv % 2 == 1), acc)?;
            used[col] = false;
        }
        Ok(())
    }
}

// ----- text grammar -----

impl fmt::Display for SuperElement {
    /// Canonical form: terms in descending monomial order joined by " + ",
    /// each as `[coeff "*"] factor ("*" factor)*`, e.g. "(u+1)*x1^2*x2*y1*y3".
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let field = &self.alg.field;
        let parts: Vec<String> = self
            .sorted_terms()
            .into_iter()
            .map(|(m, c)| {
                let mut factors: Vec<String> = Vec::new();
                for (i, &e) in m.xexp.iter().enumerate() {
                    match e {
                        0 => {}
                        1 => factors.push(format!("x{}", i + 1)),
                        _ => factors.push(format!("x{}^{}", i + 1, e)),
                    }
                }
                for i in m.y_indices() {
                    factors.push(format!("y{i}"));
                }
                let cs = field.format_element(c);
                let coeff = if cs.contains('+') {
                    format!("({cs})")
                } else {
                    cs
                };
                if factors.is_empty() {
                    coeff
                } else if c == field.one() {
                    factors.join("*")
                } else {
                    format!("{}*{}", coeff, factors.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl SuperAlgebra {
    /// Parse the grammar emitted by `Display`; also accepts " - " joins.
    pub fn parse(&self, s: &str) -> Result<SuperElement, AlgebraError> {
        let s = s.trim();
        if s == "0" {
            return Ok(self.zero());
        }
        let mut out = self.zero();
        for (negated, term) in split_terms(s) {
            let t = self.parse_term(term.trim())?;
            out = if negated { out.sub(&t)? } else { out.add(&t)? };
        }
        Ok(out)
    }

    fn parse_term(&self, term: &str) -> Result<SuperElement, AlgebraError> {
        if term.is_empty() {
            return Err(AlgebraError::Parse("empty term".into()));
        }
        let mut coeff = self.field.one();
        let mut mono = SuperMonomial::one(self.n);
        for factor in split_factors(term) {
            let factor = factor.trim();
            if let Some(rest) = factor.strip_prefix('x') {
                let (idx, exp) = parse_var(rest)?;
                if idx == 0 || idx > self.n {
                    return Err(AlgebraError::BadVariableIndex(idx, self.n));
                }
                mono.xexp[idx - 1] = mono.xexp[idx - 1]
                    .checked_add(exp)
                    .ok_or(AlgebraError::ExponentOverflow)?;
            } else if let Some(rest) = factor.strip_prefix('y') {
                let (idx, exp) = parse_var(rest)?;
                if idx == 0 || idx > self.n {
                    return Err(AlgebraError::BadVariableIndex(idx, self.n));
                }
                if exp != 1 || mono.yset & (1 << (idx - 1)) != 0 {
                    return Err(AlgebraError::Parse(format!(
                        "repeated exterior factor y{idx}"
                    )));
                }
                mono.yset |= 1 << (idx - 1);
            } else {
                let inner = factor
                    .strip_prefix('(')
                    .and_then(|r| r.strip_suffix(')'))
                    .unwrap_or(factor);
                let c = self.field.parse_element(inner)?;
                coeff = self.field.mul(coeff, c).unwrap();
            }
        }
        Ok(self.monomial(mono, coeff))
    }
}

fn parse_var(rest: &str) -> Result<(usize, Exp), AlgebraError> {
    let (idx_str, exp) = match rest.find('^') {
        Some(pos) => {
            let e: Exp = rest[pos + 1..]
                .parse()
                .map_err(|_| AlgebraError::Parse(format!("bad exponent in {rest}")))?;
            (&rest[..pos], e)
        }
        None => (rest, 1),
    };
    let idx: usize = idx_str
        .parse()
        .map_err(|_| AlgebraError::Parse(format!("bad variable index in {rest}")))?;
    Ok((idx, exp))
}

/// Split on top-level " + " / " - " (coefficients contain '+' only inside
/// parentheses or without surrounding spaces).
fn split_terms(s: &str) -> Vec<(bool, &str)> {
    let mut out = Vec::new();
    let bytes = s.as_bytes();
    let mut start = 0;
    let mut i = 0;
    let mut negated = false;
    while i + 2 < bytes.len() {
        if bytes[i] == b' ' && (bytes[i + 1] == b'+' || bytes[i + 1] == b'-') && bytes[i + 2] == b' '
        {
            out.push((negated, &s[start..i]));
            negated = bytes[i + 1] == b'-';
            start = i + 3;
            i = start;
        } else {
            i += 1;
        }
    }
    out.push((negated, &s[start..]));
    out
}

fn split_factors(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let bytes = s.as_bytes();
    let mut depth = 0;
    let mut start = 0;
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b'*' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::Field;

    fn alg(q: u64, n: usize) -> SuperAlgebra {
        SuperAlgebra::new(Field::gf(q).unwrap(), n).unwrap()
    }

    #[test]
    fn exterior_sign_rules() {
        let a = alg(3, 2);
        let y1 = a.y(1).unwrap();
        let y2 = a.y(2).unwrap();
        assert!(y1.mul(&y1).unwrap().is_zero());
        let y12 = y1.mul(&y2).unwrap();
        assert_eq!(y2.mul(&y1).unwrap(), y12.neg());
    }

    #[test]
    fn char_two_squares() {
        let a = alg(2, 2);
        let x1 = a.x(1).unwrap();
        let x2 = a.x(2).unwrap();
        let s = x1.add(&x2).unwrap();
        let sq = s.mul(&s).unwrap();
        let expect = x1.pow(2).unwrap().add(&x2.pow(2).unwrap()).unwrap();
        assert_eq!(sq, expect);
        assert_eq!(s.pow(2).unwrap(), expect);
    }

    #[test]
    fn ambient_mismatch_is_an_error() {
        let a2 = alg(2, 2);
        let a3 = alg(3, 2);
        assert_eq!(
            a2.x(1).unwrap().add(&a3.x(1).unwrap()),
            Err(AlgebraError::AmbientMismatch)
        );
    }

    #[test]
    fn row_det_examples() {
        let a = alg(2, 2);
        let x1 = a.x(1).unwrap();
        let x2 = a.x(2).unwrap();
        let y1 = a.y(1).unwrap();
        let y2 = a.y(2).unwrap();

        // [[y1, y2], [x1, x2]] = y1 x2 - y2 x1
        let m = a
            .matrix(vec![vec![y1.clone(), y2.clone()], vec![x1.clone(), x2.clone()]])
            .unwrap();
        let det = m.row_det().unwrap();
        let expect = y1
            .mul(&x2)
            .unwrap()
            .sub(&y2.mul(&x1).unwrap())
            .unwrap();
        assert_eq!(det, expect);

        // Moore matrix for q=2 gives L_2 = x1 x2^2 - x2 x1^2
        let m = a
            .matrix(vec![
                vec![x1.clone(), x2.clone()],
                vec![x1.pow(2).unwrap(), x2.pow(2).unwrap()],
            ])
            .unwrap();
        let l2 = m.row_det().unwrap();
        let expect = x1
            .mul(&x2.pow(2).unwrap())
            .unwrap()
            .sub(&x2.mul(&x1.pow(2).unwrap()).unwrap())
            .unwrap();
        assert_eq!(l2, expect);
        assert_eq!(l2.bidegrees().into_iter().collect::<Vec<_>>(), vec![(3, 0)]);

        // equal rows of commuting entries vanish
        let ones = a
            .matrix(vec![
                vec![a.one(), a.one()],
                vec![a.one(), a.one()],
            ])
            .unwrap();
        assert!(ones.row_det().unwrap().is_zero());
    }

    #[test]
    fn substitution_examples() {
        let a = alg(2, 2);
        let x1 = a.x(1).unwrap();
        let x2 = a.x(2).unwrap();
        let y1 = a.y(1).unwrap();
        let y2 = a.y(2).unwrap();

        // f = y1 x2 - y2 x1 with x2 -> 0
        let f = y1
            .mul(&x2)
            .unwrap()
            .sub(&y2.mul(&x1).unwrap())
            .unwrap();
        let (mut xs, ys) = SuperElement::identity_images(&a);
        xs[1] = a.zero();
        let g = f.substitute(&xs, &ys).unwrap();
        assert_eq!(g, y2.mul(&x1).unwrap().neg());

        // x1^2 with x1 -> x1 + x2 over F_2
        let (mut xs, ys) = SuperElement::identity_images(&a);
        xs[0] = x1.add(&x2).unwrap();
        let g = x1.pow(2).unwrap().substitute(&xs, &ys).unwrap();
        assert_eq!(g, x1.pow(2).unwrap().add(&x2.pow(2).unwrap()).unwrap());

        // swap y1, y2 in y1 y2: picks up a sign (over F_3 where -1 != 1)
        let a3 = alg(3, 2);
        let y1 = a3.y(1).unwrap();
        let y2 = a3.y(2).unwrap();
        let f = y1.mul(&y2).unwrap();
        let (xs, mut ys) = SuperElement::identity_images(&a3);
        ys.swap(0, 1);
        assert_eq!(f.substitute(&xs, &ys).unwrap(), f.neg());

        // identity assignment is the identity map
        let (xs, ys) = SuperElement::identity_images(&a3);
        let g = a3.parse("2*x1^2*y1 + x2*y2").unwrap();
        assert_eq!(g.substitute(&xs, &ys).unwrap(), g);
    }

    #[test]
    fn substitution_parity_violations() {
        let a = alg(3, 2);
        let (mut xs, ys) = SuperElement::identity_images(&a);
        xs[0] = a.y(1).unwrap();
        assert!(matches!(
            a.x(1).unwrap().substitute(&xs, &ys),
            Err(AlgebraError::ParityViolation(_))
        ));
        let (xs, mut ys) = SuperElement::identity_images(&a);
        ys[0] = a.x(1).unwrap();
        assert!(matches!(
            a.y(1).unwrap().substitute(&xs, &ys),
            Err(AlgebraError::ParityViolation(_))
        ));
    }

    #[test]
    fn exact_division_examples() {
        // q = 3: (x1 x2^3 - x2 x1^3) / x1 = x2^3 - x2 x1^2
        let a = alg(3, 2);
        let f = a.parse("x1*x2^3 + 2*x1^3*x2").unwrap();
        let g = a.x(1).unwrap();
        let h = f.exact_divide(&g).unwrap();
        assert_eq!(h, a.parse("x2^3 + 2*x1^2*x2").unwrap());

        // q = 2: (x1 x2^4 - x1^4 x2) / (x1 x2^2 - x1^2 x2) = x1^2 + x1 x2 + x2^2
        let a = alg(2, 2);
        let f = a.parse("x1*x2^4 + x1^4*x2").unwrap();
        let g = a.parse("x1*x2^2 + x1^2*x2").unwrap();
        assert_eq!(
            f.exact_divide(&g).unwrap(),
            a.parse("x1^2 + x1*x2 + x2^2").unwrap()
        );

        assert_eq!(
            a.x(1).unwrap().exact_divide(&a.x(2).unwrap()),
            Err(AlgebraError::NotDivisible)
        );
        assert_eq!(
            a.x(1).unwrap().exact_divide(&a.zero()),
            Err(AlgebraError::ZeroDivisor)
        );
        assert_eq!(
            a.x(1).unwrap().exact_divide(&a.y(1).unwrap()),
            Err(AlgebraError::OddDivisor)
        );
    }

    #[test]
    fn division_undoes_multiplication() {
        let a = alg(3, 3);
        let g = a.parse("x1^2 + 2*x2*x3 + x3").unwrap();
        let h = a.parse("x1*y1 + 2*x2^2*y2*y3 + x3^3").unwrap();
        let prod = g.mul(&h).unwrap();
        assert_eq!(prod.exact_divide(&g).unwrap(), h);
    }

    #[test]
    fn component_examples() {
        let a = alg(2, 2);
        let f = a.parse("x1 + x2*y1").unwrap();
        assert_eq!(f.component((1, 1)), a.parse("x2*y1").unwrap());
        assert!(a.zero().component((0, 0)).is_zero());
        let degs: Vec<_> = f.bidegrees().into_iter().collect();
        assert_eq!(degs, vec![(1, 0), (1, 1)]);
    }

    #[test]
    fn display_parse_roundtrip() {
        let a = alg(4, 3);
        let f4 = a.field().clone();
        let u = f4.element(2).unwrap();
        let mut e = a.parse("x1^2*x2*y1*y3 + x3 + y2").unwrap();
        e = e
            .add(&a.x(2).unwrap().scale(u).unwrap())
            .unwrap();
        let s = e.to_string();
        assert_eq!(a.parse(&s).unwrap(), e, "roundtrip of {s}");
        // printed form is stable
        assert_eq!(a.parse(&s).unwrap().to_string(), s);
    }

    /// Row determinants are linear in each row of even entries.
    #[test]
    fn row_det_multilinear_in_even_rows() {
        let a = alg(3, 2);
        let r1 = vec![a.parse("x1^2").unwrap(), a.parse("2*x2").unwrap()];
        let r1b = vec![a.parse("x2^3").unwrap(), a.parse("x1 + x2").unwrap()];
        let r2 = vec![a.parse("y1").unwrap(), a.parse("x1*y2").unwrap()];
        let sum_row: Vec<_> = r1
            .iter()
            .zip(&r1b)
            .map(|(u, v)| u.add(v).unwrap())
            .collect();
        let det =
            |rows: Vec<Vec<SuperElement>>| a.matrix(rows).unwrap().row_det().unwrap();
        let lhs = det(vec![sum_row, r2.clone()]);
        let rhs = det(vec![r1.clone(), r2.clone()])
            .add(&det(vec![r1b, r2]))
            .unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn supercommutativity_of_homogeneous_elements() {
        let a = alg(3, 3);
        let odd1 = a.parse("x1*y1 + 2*x3*y2").unwrap();
        let odd2 = a.parse("y3 + x2*y1").unwrap();
        let even = a.parse("x1^2 + x2").unwrap();
        // odd * odd anticommutes
        assert_eq!(odd1.mul(&odd2).unwrap(), odd2.mul(&odd1).unwrap().neg());
        // even commutes with everything
        assert_eq!(even.mul(&odd1).unwrap(), odd1.mul(&even).unwrap());
    }
}
