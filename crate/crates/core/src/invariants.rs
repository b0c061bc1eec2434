//! The named invariants: Dickson forms V_m, L_m, Q_{m,k}, the Mui
//! determinant elements, the parabolic generators v_{i,j}, theta_i, q_{i,k},
//! and the free-module bases attached to each invariant-ring theorem.
//!
//! Two independent routes exist for the Dickson invariants and are kept
//! separate on purpose: the quotient route divides Moore determinants, the
//! recursion route never forms a determinant at all. Their agreement is one
//! of the acceptance checks.

use crate::algebra::{AlgebraError, Exp, SuperAlgebra, SuperElement};
use crate::gf::GfError;
use crate::groups::{Composition, GroupError};
use serde_json::json;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InvariantError {
    #[error("index m = {0} out of range 1..={1}")]
    IndexOutOfRange(usize, usize),
    #[error("b-list must be strictly increasing within 0..={0}")]
    BadIndexList(usize),
    #[error("twist {k} out of range 0..={max}")]
    TwistOutOfRange { k: u64, max: u64 },
    #[error("product over F_q^{0} is too large to enumerate")]
    FieldTooLarge(usize),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Field(#[from] GfError),
}

/// Bound on the number of linear-form factors in brute-force products.
const PRODUCT_BOUND: u128 = 1 << 16;

// ----- Moore determinants -----

/// The m x m Moore-type determinant with rows x^(q^e) for e in `rows`.
fn moore_det(alg: &SuperAlgebra, m: usize, rows: &[u32]) -> Result<SuperElement, InvariantError> {
    assert_eq!(rows.len(), m);
    let q = alg.field().q() as Exp;
    let mut entries = Vec::with_capacity(m);
    for &e in rows {
        let qe = q
            .checked_pow(e)
            .ok_or(AlgebraError::ExponentOverflow)?;
        let row: Result<Vec<_>, AlgebraError> = (1..=m).map(|c| alg.x_pow(c, qe)).collect();
        entries.push(row?);
    }
    Ok(alg.matrix(entries)?.row_det()?)
}

/// L_m as the Moore determinant with rows x, x^q, ..., x^(q^(m-1)).
pub fn moore_l(alg: &SuperAlgebra, m: usize) -> Result<SuperElement, InvariantError> {
    check_m(alg, m)?;
    if m == 0 {
        return Ok(alg.one());
    }
    let rows: Vec<u32> = (0..m as u32).collect();
    moore_det(alg, m, &rows)
}

/// L_{m,k}: the Moore determinant with rows x, ..., x^(q^m) omitting x^(q^k).
pub fn moore_l_omit(alg: &SuperAlgebra, m: usize, k: usize) -> Result<SuperElement, InvariantError> {
    check_m(alg, m)?;
    if k > m {
        return Err(InvariantError::IndexOutOfRange(k, m));
    }
    let rows: Vec<u32> = (0..=m as u32).filter(|&e| e != k as u32).collect();
    moore_det(alg, m, &rows)
}

fn check_m(alg: &SuperAlgebra, m: usize) -> Result<(), InvariantError> {
    if m > alg.n() {
        return Err(InvariantError::IndexOutOfRange(m, alg.n()));
    }
    Ok(())
}

// ----- product forms -----

/// V_m = prod over (c_1, ..., c_(m-1)) in F_q^(m-1) of c_1 x_1 + ... + x_m.
pub fn v_product(alg: &SuperAlgebra, m: usize) -> Result<SuperElement, InvariantError> {
    check_m(alg, m)?;
    if m == 0 {
        return Ok(alg.one());
    }
    let q = alg.field().q();
    let count = (q as u128)
        .checked_pow(m as u32 - 1)
        .filter(|&c| c <= PRODUCT_BOUND)
        .ok_or(InvariantError::FieldTooLarge(m - 1))?;
    let (elements, _) = alg.field().enumerate()?;
    let mut acc = alg.one();
    let mut tuple = vec![0usize; m - 1];
    for _ in 0..count {
        let mut form = alg.x(m)?;
        for (i, &ci) in tuple.iter().enumerate() {
            if ci != 0 {
                form = form.add(&alg.x(i + 1)?.scale(elements[ci])?)?;
            }
        }
        acc = acc.mul(&form)?;
        // odometer over F_q^(m-1)
        for slot in tuple.iter_mut() {
            *slot += 1;
            if *slot < q as usize {
                break;
            }
            *slot = 0;
        }
    }
    Ok(acc)
}

/// V_m and L_m, each computed two independent ways (product of linear forms
/// vs. Moore determinant / recursion) and asserted equal.
pub fn dickson_vl(
    alg: &SuperAlgebra,
    m: usize,
) -> Result<(SuperElement, SuperElement), InvariantError> {
    check_m(alg, m)?;
    if m == 0 {
        return Err(InvariantError::IndexOutOfRange(0, alg.n()));
    }
    let mut l_prod = alg.one();
    let mut v_m = alg.one();
    for j in 1..=m {
        v_m = v_product(alg, j)?;
        l_prod = l_prod.mul(&v_m)?;
    }
    let l_det = moore_l(alg, m)?;
    assert_eq!(
        l_prod, l_det,
        "product and determinant forms of L_{m} disagree"
    );
    Ok((v_m, l_prod))
}

// ----- Dickson recursion tables -----

/// Dickson data for 1 <= m <= max_m built purely from the recursion
/// Q_{m,k} = Q_{m-1,k} V_m^(q-1) + Q_{m-1,k-1}^q with V_m expanded through
/// the lower Q's, so no determinant or enumeration is involved.
pub struct DicksonTables {
    alg: SuperAlgebra,
    v: Vec<SuperElement>,          // v[m-1] = V_m
    l: Vec<SuperElement>,          // l[m-1] = L_m = V_1 ... V_m
    q: Vec<Vec<SuperElement>>,     // q[m][k] = Q_{m,k}, 0 <= k <= m
}

impl DicksonTables {
    pub fn new(alg: &SuperAlgebra, max_m: usize) -> Result<Self, InvariantError> {
        check_m(alg, max_m)?;
        let qexp = alg.field().q() as Exp;
        let mut v: Vec<SuperElement> = Vec::with_capacity(max_m);
        let mut l: Vec<SuperElement> = Vec::with_capacity(max_m);
        let mut q: Vec<Vec<SuperElement>> = vec![vec![alg.one()]]; // Q_{0,0} = 1
        for m in 1..=max_m {
            // V_m = x_m^(q^(m-1)) + sum_(k=0)^(m-2) (-1)^(m-1-k) Q_{m-1,k} x_m^(q^k)
            let mut vm = alg.x_pow(m, pow_exp(qexp, m as u32 - 1)?)?;
            for (k, qk) in q[m - 1].iter().enumerate().take(m.saturating_sub(1)) {
                let mut t = qk.mul(&alg.x_pow(m, pow_exp(qexp, k as u32)?)?)?;
                if (m - 1 - k) % 2 == 1 {
                    t = t.neg();
                }
                vm = vm.add(&t)?;
            }
            let vpow = vm.pow(qexp - 1)?;
            let mut row = Vec::with_capacity(m + 1);
            for k in 0..m {
                // Q_{m-1,k} is zero above the diagonal, and Q_{m-1,-1} = 0
                let first = if k < m {
                    q[m - 1][k].mul(&vpow)?
                } else {
                    alg.zero()
                };
                let second = if k >= 1 {
                    q[m - 1][k - 1].pow(qexp)?
                } else {
                    alg.zero()
                };
                row.push(first.add(&second)?);
            }
            row.push(alg.one()); // Q_{m,m} = 1
            l.push(match l.last() {
                Some(prev) => prev.mul(&vm)?,
                None => vm.clone(),
            });
            v.push(vm);
            q.push(row);
        }
        Ok(DicksonTables {
            alg: alg.clone(),
            v,
            l,
            q,
        })
    }

    pub fn algebra(&self) -> &SuperAlgebra {
        &self.alg
    }

    pub fn v(&self, m: usize) -> &SuperElement {
        &self.v[m - 1]
    }

    pub fn l(&self, m: usize) -> &SuperElement {
        &self.l[m - 1]
    }

    /// Q_{m,k} with the boundary conventions Q_{m,m} = 1, Q_{m,k<0} = 0.
    pub fn q(&self, m: usize, k: i64) -> SuperElement {
        if k < 0 {
            return self.alg.zero();
        }
        self.q[m][k as usize].clone()
    }
}

fn pow_exp(base: Exp, e: u32) -> Result<Exp, InvariantError> {
    base.checked_pow(e)
        .ok_or(InvariantError::Algebra(AlgebraError::ExponentOverflow))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DicksonMethod {
    /// L_{m,k} / L_m by Moore determinants and exact division.
    Quotient,
    /// The two-term recursion seeded by Q_{0,0} = 1.
    Recursion,
}

/// The Dickson invariant Q_{m,k} by either route.
pub fn dickson_q(
    alg: &SuperAlgebra,
    m: usize,
    k: usize,
    method: DicksonMethod,
) -> Result<SuperElement, InvariantError> {
    check_m(alg, m)?;
    if k > m {
        return Err(InvariantError::IndexOutOfRange(k, m));
    }
    match method {
        DicksonMethod::Quotient => {
            if m == 0 {
                return Ok(alg.one());
            }
            let num = moore_l_omit(alg, m, k)?;
            let den = moore_l(alg, m)?;
            Ok(num.exact_divide(&den)?)
        }
        DicksonMethod::Recursion => Ok(DicksonTables::new(alg, m)?.q(m, k as i64)),
    }
}

// ----- Mui elements -----

/// M_{m; b_1, ..., b_j}: the mixed determinant with j repeated rows of
/// exterior generators and the Frobenius rows x^(q^(b_i)) omitted, read
/// combinatorially by Laplace expansion along the y block:
///
///   M = sum over j-subsets S of columns of
///       (-1)^(sum(s_i - i)) y_S det(Moore minor on the complement)
///
/// which equals Mui's (1/j!)-normalized row determinant and stays valid
/// when j! vanishes in F_q. Conventions: empty b-list gives L_m, and
/// m = 0 gives 1.
pub fn mui_element(
    alg: &SuperAlgebra,
    m: usize,
    blist: &[usize],
) -> Result<SuperElement, InvariantError> {
    check_m(alg, m)?;
    let j = blist.len();
    if m == 0 {
        return if j == 0 {
            Ok(alg.one())
        } else {
            Err(InvariantError::BadIndexList(0))
        };
    }
    if j > m
        || blist.windows(2).any(|w| w[0] >= w[1])
        || blist.last().is_some_and(|&b| b > m - 1)
    {
        return Err(InvariantError::BadIndexList(m - 1));
    }
    let q = alg.field().q() as Exp;
    let exps: Vec<usize> = (0..m).filter(|e| !blist.contains(e)).collect();
    let mut out = alg.zero();
    for subset in combinations(m, j) {
        // Laplace sign for expanding along the first j rows with columns S
        let sign_odd = subset
            .iter()
            .enumerate()
            .map(|(i, &s)| s - (i + 1))
            .sum::<usize>()
            % 2
            == 1;
        let mut y_part = alg.one();
        for &s in &subset {
            y_part = y_part.mul(&alg.y(s)?)?;
        }
        let cols: Vec<usize> = (1..=m).filter(|c| !subset.contains(c)).collect();
        let mut rows = Vec::with_capacity(cols.len());
        for &e in &exps {
            let qe = pow_exp(q, e as u32)?;
            let row: Result<Vec<_>, AlgebraError> =
                cols.iter().map(|&c| alg.x_pow(c, qe)).collect();
            rows.push(row?);
        }
        let minor = alg.matrix(rows)?.row_det()?;
        let mut term = y_part.mul(&minor)?;
        if sign_odd {
            term = term.neg();
        }
        out = out.add(&term)?;
    }
    Ok(out)
}

/// All ascending j-subsets of {1..m}.
fn combinations(m: usize, j: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(j);
    fn rec(start: usize, m: usize, j: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == j {
            out.push(cur.clone());
            return;
        }
        for s in start..=m {
            cur.push(s);
            rec(s + 1, m, j, cur, out);
            cur.pop();
        }
    }
    rec(1, m, j, &mut cur, &mut out);
    out
}

/// All strictly increasing b-lists 0 <= b_1 < ... < b_j <= hi of length j.
pub fn blists(hi: i64, j: usize) -> Vec<Vec<usize>> {
    if hi < 0 {
        return if j == 0 { vec![vec![]] } else { vec![] };
    }
    combinations(hi as usize + 1, j)
        .into_iter()
        .map(|c| c.into_iter().map(|s| s - 1).collect())
        .collect()
}

// ----- parabolic generators -----

/// The generators v_{i,j}, theta_i and q_{i,k} attached to a composition.
///
/// v_{i,j} is built from its q-power expansion with Dickson coefficients
/// rather than the q^(m_(i-1))-fold product; the product is exponentially
/// large while the expansion is polynomial-size, and their equality is
/// tested separately at tiny parameters.
pub struct ParabolicInvariants {
    alg: SuperAlgebra,
    comp: Composition,
    v: Vec<Vec<SuperElement>>,
    theta: Vec<SuperElement>,
    q_inv: Vec<Vec<SuperElement>>,
}

impl ParabolicInvariants {
    pub fn new(alg: &SuperAlgebra, comp: &Composition) -> Result<Self, InvariantError> {
        let n = comp.n();
        if n != alg.n() {
            return Err(InvariantError::IndexOutOfRange(n, alg.n()));
        }
        let q = alg.field().q() as Exp;
        let ell = comp.len();
        let tables = DicksonTables::new(alg, n)?;
        let mut v: Vec<Vec<SuperElement>> = Vec::with_capacity(ell);
        let mut theta: Vec<SuperElement> = Vec::with_capacity(ell);
        let mut q_inv: Vec<Vec<SuperElement>> = Vec::with_capacity(ell);
        for i in 1..=ell {
            let mi1 = comp.m(i - 1);
            let ni = comp.parts()[i - 1];
            let mut vi = Vec::with_capacity(ni);
            for jj in 1..=ni {
                let var = mi1 + jj;
                let mut vij = alg.x_pow(var, pow_exp(q, mi1 as u32)?)?;
                for k in 0..mi1 {
                    let mut t = tables
                        .q(mi1, k as i64)
                        .mul(&alg.x_pow(var, pow_exp(q, k as u32)?)?)?;
                    if (mi1 - k) % 2 == 1 {
                        t = t.neg();
                    }
                    vij = vij.add(&t)?;
                }
                vi.push(vij);
            }
            // theta_i = L_{n_i}(v_{i,1}, ..., v_{i,n_i}) and
            // q_{i,k} = Q_{n_i,k}(v_{i,1}, ..., v_{i,n_i})
            let (mut xs, ys) = SuperElement::identity_images(alg);
            for (t, img) in vi.iter().enumerate() {
                xs[t] = img.clone();
            }
            let th = tables.l(ni).substitute(&xs, &ys)?;
            let mut qi = Vec::with_capacity(ni + 1);
            for k in 0..=ni {
                qi.push(tables.q(ni, k as i64).substitute(&xs, &ys)?);
            }
            // q_{i,0} = theta_i^(q-1) is forced by the Dickson relation
            assert_eq!(qi[0], th.pow(q - 1)?, "q_(i,0) != theta_i^(q-1)");
            v.push(vi);
            theta.push(th);
            q_inv.push(qi);
        }
        Ok(ParabolicInvariants {
            alg: alg.clone(),
            comp: comp.clone(),
            v,
            theta,
            q_inv,
        })
    }

    pub fn algebra(&self) -> &SuperAlgebra {
        &self.alg
    }

    pub fn composition(&self) -> &Composition {
        &self.comp
    }

    /// v_{i,j} for 1 <= i <= l, 1 <= j <= n_i.
    pub fn v(&self, i: usize, j: usize) -> Result<&SuperElement, InvariantError> {
        self.v
            .get(i - 1)
            .and_then(|r| r.get(j - 1))
            .ok_or(InvariantError::IndexOutOfRange(j, self.comp.n()))
    }

    pub fn theta(&self, i: usize) -> Result<&SuperElement, InvariantError> {
        self.theta
            .get(i - 1)
            .ok_or(InvariantError::IndexOutOfRange(i, self.comp.len()))
    }

    /// q_{i,k} for 0 <= k <= n_i.
    pub fn q(&self, i: usize, k: usize) -> Result<&SuperElement, InvariantError> {
        self.q_inv
            .get(i - 1)
            .and_then(|r| r.get(k))
            .ok_or(InvariantError::IndexOutOfRange(k, self.comp.n()))
    }

    /// theta_1 theta_2 ... theta_i (i = 0 gives 1).
    pub fn theta_prefix(&self, i: usize) -> Result<SuperElement, InvariantError> {
        let mut acc = self.alg.one();
        for t in 0..i {
            acc = acc.mul(&self.theta[t])?;
        }
        Ok(acc)
    }
}

// ----- basis families -----

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyKind {
    MuiGL,
    MuiSL,
    MuiU,
    KI(Composition),
    PI(Composition, u64),
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyKind::MuiGL => write!(f, "MuiGL"),
            FamilyKind::MuiSL => write!(f, "MuiSL"),
            FamilyKind::MuiU => write!(f, "MuiU"),
            FamilyKind::KI(c) => write!(f, "KI({c})"),
            FamilyKind::PI(c, k) => write!(f, "PI({c},k={k})"),
        }
    }
}

/// A free-module basis over a polynomial base ring: the module generators
/// with their bidegrees, plus the base-ring generators and degrees.
pub struct BasisFamily {
    kind: FamilyKind,
    alg: SuperAlgebra,
    generators: Vec<(SuperElement, (Exp, usize))>,
    base_gens: Vec<SuperElement>,
    base_degrees: Vec<Exp>,
}

impl BasisFamily {
    /// Assemble a family from explicit parts (all homogeneous); used to probe
    /// the verifier with deliberately broken inputs.
    pub fn from_parts(
        kind: FamilyKind,
        alg: &SuperAlgebra,
        generators: Vec<SuperElement>,
        base_gens: Vec<SuperElement>,
    ) -> Result<Self, InvariantError> {
        let with_degrees = generators
            .into_iter()
            .map(|g| {
                let d = g
                    .homogeneous_bidegree()
                    .ok_or(InvariantError::BadIndexList(0))?;
                Ok((g, d))
            })
            .collect::<Result<Vec<_>, InvariantError>>()?;
        let base_degrees = base_gens
            .iter()
            .map(|g| {
                g.homogeneous_bidegree()
                    .map(|d| d.0)
                    .ok_or(InvariantError::BadIndexList(0))
            })
            .collect::<Result<Vec<_>, InvariantError>>()?;
        Ok(BasisFamily {
            kind,
            alg: alg.clone(),
            generators: with_degrees,
            base_gens,
            base_degrees,
        })
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn algebra(&self) -> &SuperAlgebra {
        &self.alg
    }

    pub fn generators(&self) -> &[(SuperElement, (Exp, usize))] {
        &self.generators
    }

    pub fn base_generators(&self) -> &[SuperElement] {
        &self.base_gens
    }

    pub fn base_degrees(&self) -> &[Exp] {
        &self.base_degrees
    }

    pub fn to_json(&self) -> serde_json::Value {
        let (comp, twist) = match &self.kind {
            FamilyKind::KI(c) => (Some(c.to_string()), None),
            FamilyKind::PI(c, k) => (Some(c.to_string()), Some(*k)),
            _ => (None, None),
        };
        let label = match &self.kind {
            FamilyKind::MuiGL => "MuiGL",
            FamilyKind::MuiSL => "MuiSL",
            FamilyKind::MuiU => "MuiU",
            FamilyKind::KI(_) => "KI",
            FamilyKind::PI(..) => "PI",
        };
        json!({
            "label": label,
            "n": self.alg.n(),
            "q": self.alg.field().q(),
            "I": comp,
            "k": twist,
            "baseDegrees": self.base_degrees.iter().map(|&d| d as u64).collect::<Vec<_>>(),
            "generators": self.generators.iter().map(|(g, (t, s))| json!({
                "bidegree": [*t as u64, *s as u64],
                "element": g.to_string(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// The module basis asserted by the corresponding structure theorem,
/// enumerated exactly as in its statement. Generator count is always 2^n.
pub fn basis_family(alg: &SuperAlgebra, kind: FamilyKind) -> Result<BasisFamily, InvariantError> {
    let n = alg.n();
    let q = alg.field().q();
    let qe = q as Exp;
    let mut generators: Vec<SuperElement> = Vec::new();
    let mut base_gens: Vec<SuperElement> = Vec::new();

    match &kind {
        FamilyKind::MuiGL | FamilyKind::MuiSL => {
            let tables = DicksonTables::new(alg, n)?;
            if matches!(kind, FamilyKind::MuiGL) {
                for k in 0..n {
                    base_gens.push(tables.q(n, k as i64));
                }
            } else {
                base_gens.push(tables.l(n).clone());
                for k in 1..n {
                    base_gens.push(tables.q(n, k as i64));
                }
            }
            generators.push(alg.one());
            let ln_pow = tables.l(n).pow(qe - 2)?;
            for j in 1..=n {
                for b in blists(n as i64 - 1, j) {
                    let m = mui_element(alg, n, &b)?;
                    generators.push(match kind {
                        FamilyKind::MuiGL => m.mul(&ln_pow)?,
                        _ => m,
                    });
                }
            }
        }
        FamilyKind::MuiU => {
            let tables = DicksonTables::new(alg, n)?;
            for m in 1..=n {
                base_gens.push(tables.v(m).clone());
            }
            generators.push(alg.one());
            for j in 1..=n {
                for m in j..=n {
                    // b_j = m - 1 is pinned
                    for mut b in blists(m as i64 - 2, j - 1) {
                        b.push(m - 1);
                        generators.push(mui_element(alg, m, &b)?);
                    }
                }
            }
        }
        FamilyKind::KI(comp) => {
            let para = ParabolicInvariants::new(alg, comp)?;
            for i in 1..=comp.len() {
                base_gens.push(para.theta(i)?.clone());
                for k in 1..comp.parts()[i - 1] {
                    base_gens.push(para.q(i, k)?.clone());
                }
            }
            generators.push(alg.one());
            for (i, b) in parabolic_blists(comp) {
                generators.push(mui_element(alg, comp.m(i), &b)?);
            }
        }
        FamilyKind::PI(comp, k) => {
            let max = if q == 2 { 0 } else { q - 2 };
            if *k > max {
                return Err(InvariantError::TwistOutOfRange { k: *k, max });
            }
            let para = ParabolicInvariants::new(alg, comp)?;
            let ell = comp.len();
            for i in 1..=ell {
                for kk in 0..comp.parts()[i - 1] {
                    base_gens.push(para.q(i, kk)?.clone());
                }
            }
            if *k == 0 {
                generators.push(alg.one());
                for (i, b) in parabolic_blists(comp) {
                    let m = mui_element(alg, comp.m(i), &b)?;
                    generators.push(m.mul(&para.theta_prefix(i)?.pow(qe - 2)?)?);
                }
            } else {
                let deficit = qe - 1 - *k as Exp;
                generators.push(para.theta_prefix(ell)?.pow(deficit)?);
                for (i, b) in parabolic_blists(comp) {
                    let m = mui_element(alg, comp.m(i), &b)?;
                    let mut g = m.mul(&para.theta_prefix(i)?.pow(deficit - 1)?)?;
                    for t in i + 1..=ell {
                        g = g.mul(&para.theta(t)?.pow(deficit)?)?;
                    }
                    generators.push(g);
                }
            }
        }
    }

    assert_eq!(
        generators.len(),
        1 << n,
        "module generator count must be 2^n"
    );
    let with_degrees: Vec<(SuperElement, (Exp, usize))> = generators
        .into_iter()
        .map(|g| {
            let d = g
                .homogeneous_bidegree()
                .expect("every module generator is homogeneous");
            (g, d)
        })
        .collect();
    let base_degrees: Vec<Exp> = base_gens
        .iter()
        .map(|g| {
            g.homogeneous_bidegree()
                .expect("every base generator is homogeneous")
                .0
        })
        .collect();
    Ok(BasisFamily {
        kind,
        alg: alg.clone(),
        generators: with_degrees,
        base_gens,
        base_degrees,
    })
}

/// The index pairs (i, b-list) of the parabolic structure theorems:
/// 1 <= i <= l, 1 <= j <= m_i, 0 <= b_1 < ... < b_j <= m_i - 1, b_j >= m_(i-1).
fn parabolic_blists(comp: &Composition) -> Vec<(usize, Vec<usize>)> {
    let mut out = Vec::new();
    for i in 1..=comp.len() {
        let mi = comp.m(i);
        let mi1 = comp.m(i - 1);
        for j in 1..=mi {
            for mut head in blists(mi as i64 - 2, j - 1) {
                // enumerate by the pinned last entry b_j in [max(m_(i-1), b_(j-1)+1), m_i - 1]
                let lo = head.last().map_or(0, |&b| b + 1).max(mi1);
                for last in lo..mi {
                    head.push(last);
                    out.push((i, head.clone()));
                    head.pop();
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::Field;
    use crate::groups::GroupMatrix;

    fn alg(q: u64, n: usize) -> SuperAlgebra {
        SuperAlgebra::new(Field::gf(q).unwrap(), n).unwrap()
    }

    #[test]
    fn dickson_vl_examples() {
        let a = alg(2, 2);
        let (v1, _) = dickson_vl(&a, 1).unwrap();
        assert_eq!(v1, a.x(1).unwrap());
        let (v2, l2) = dickson_vl(&a, 2).unwrap();
        assert_eq!(v2, a.parse("x2^2 + x1*x2").unwrap());
        assert_eq!(l2, a.parse("x1*x2^2 + x1^2*x2").unwrap());

        let a3 = alg(3, 2);
        let (_, l2) = dickson_vl(&a3, 2).unwrap();
        assert_eq!(l2, a3.parse("x1*x2^3 + 2*x1^3*x2").unwrap());
    }

    #[test]
    fn dickson_q_examples() {
        for q in [2u64, 3, 4] {
            let a = alg(q, 1);
            let q10 = dickson_q(&a, 1, 0, DicksonMethod::Recursion).unwrap();
            assert_eq!(q10, a.x(1).unwrap().pow(q as Exp - 1).unwrap());
        }
        let a = alg(2, 2);
        let q21 = dickson_q(&a, 2, 1, DicksonMethod::Quotient).unwrap();
        assert_eq!(q21, a.parse("x1^2 + x1*x2 + x2^2").unwrap());
        assert_eq!(
            dickson_q(&a, 2, 2, DicksonMethod::Recursion).unwrap(),
            a.one()
        );
        assert_eq!(
            dickson_q(&a, 2, 2, DicksonMethod::Quotient).unwrap(),
            a.one()
        );
    }

    #[test]
    fn dickson_methods_agree_small() {
        for q in [2u64, 3] {
            let a = alg(q, 3);
            for m in 1..=3 {
                for k in 0..=m {
                    let lhs = dickson_q(&a, m, k, DicksonMethod::Quotient).unwrap();
                    let rhs = dickson_q(&a, m, k, DicksonMethod::Recursion).unwrap();
                    assert_eq!(lhs, rhs, "Q_({m},{k}) over F_{q}");
                }
            }
        }
    }

    /// The identities survive on a field past the table bound, where all
    /// coefficient arithmetic runs through the generic polynomial path.
    #[test]
    fn dickson_and_mui_over_a_large_field() {
        let f512 = Field::new(2, 9, Some(&[1, 0, 0, 0, 1, 0, 0, 0, 0, 1])).unwrap();
        let a = SuperAlgebra::new(f512, 2).unwrap();
        for k in 0..=2usize {
            assert_eq!(
                dickson_q(&a, 2, k, DicksonMethod::Quotient).unwrap(),
                dickson_q(&a, 2, k, DicksonMethod::Recursion).unwrap(),
                "k = {k}"
            );
        }
        // cross-multiplied product lemma at m = 2
        let l2 = moore_l(&a, 2).unwrap();
        let lhs = mui_element(&a, 2, &[0])
            .unwrap()
            .mul(&mui_element(&a, 2, &[1]).unwrap())
            .unwrap();
        let rhs = l2
            .mul(&mui_element(&a, 2, &[0, 1]).unwrap())
            .unwrap()
            .neg();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn relation_q0_is_l_power() {
        for q in [2u64, 3] {
            let a = alg(q, 2);
            let t = DicksonTables::new(&a, 2).unwrap();
            for m in 1..=2 {
                assert_eq!(t.q(m, 0), t.l(m).pow(q as Exp - 1).unwrap());
            }
        }
    }

    #[test]
    fn mui_examples() {
        let a = alg(2, 2);
        assert_eq!(mui_element(&a, 1, &[0]).unwrap(), a.y(1).unwrap());
        assert_eq!(
            mui_element(&a, 2, &[0]).unwrap(),
            a.parse("x2^2*y1 + x1^2*y2").unwrap()
        );
        assert_eq!(
            mui_element(&a, 2, &[0, 1]).unwrap(),
            a.parse("y1*y2").unwrap()
        );
        // conventions
        assert_eq!(mui_element(&a, 2, &[]).unwrap(), moore_l(&a, 2).unwrap());
        assert_eq!(mui_element(&a, 0, &[]).unwrap(), a.one());
        assert!(matches!(
            mui_element(&a, 2, &[1, 0]),
            Err(InvariantError::BadIndexList(_))
        ));
        assert!(matches!(
            mui_element(&a, 2, &[0, 2]),
            Err(InvariantError::BadIndexList(_))
        ));
    }

    /// For j < p the normalized row determinant is literally computable:
    /// the Laplace form must match row_det / j!.
    #[test]
    fn mui_matches_row_determinant_when_j_factorial_is_invertible() {
        for (q, m, blist) in [
            (3u64, 2usize, vec![0usize]),
            (3, 2, vec![1]),
            (3, 2, vec![0, 1]),
            (3, 3, vec![0, 2]),
            (5, 3, vec![0, 1, 2]),
            (4, 3, vec![2]),
        ] {
            let p = Field::gf(q).unwrap().p();
            let j = blist.len();
            if (j as u64) >= p {
                continue;
            }
            let a = alg(q, m);
            let f = a.field().clone();
            let qexp = q as Exp;
            // assemble the defining matrix: j rows of y's, then the kept
            // Frobenius rows
            let mut rows: Vec<Vec<SuperElement>> = Vec::new();
            for _ in 0..j {
                rows.push((1..=m).map(|c| a.y(c).unwrap()).collect());
            }
            for e in 0..m {
                if blist.contains(&e) {
                    continue;
                }
                rows.push(
                    (1..=m)
                        .map(|c| a.x_pow(c, qexp.pow(e as u32)).unwrap())
                        .collect(),
                );
            }
            let det = a.matrix(rows).unwrap().row_det().unwrap();
            let mut fact = f.one();
            for t in 2..=j as u64 {
                fact = f.mul(fact, f.from_int(t as i64)).unwrap();
            }
            let expected = det.scale(f.inv(fact).unwrap()).unwrap();
            assert_eq!(
                mui_element(&a, m, &blist).unwrap(),
                expected,
                "q={q} m={m} b={blist:?}"
            );
        }
    }

    #[test]
    fn parabolic_generator_examples() {
        // I = (1,1), q = 2: v_{2,1} = V_2
        let a = alg(2, 2);
        let comp = Composition::new(vec![1, 1]).unwrap();
        let para = ParabolicInvariants::new(&a, &comp).unwrap();
        assert_eq!(
            para.v(2, 1).unwrap(),
            &a.parse("x2^2 + x1*x2").unwrap()
        );

        // single block: v_{1,j} = x_j, theta_1 = L_n, q_{1,k} = Q_{n,k}
        let a3 = alg(3, 2);
        let full = Composition::new(vec![2]).unwrap();
        let para = ParabolicInvariants::new(&a3, &full).unwrap();
        assert_eq!(para.v(1, 1).unwrap(), &a3.x(1).unwrap());
        assert_eq!(para.v(1, 2).unwrap(), &a3.x(2).unwrap());
        assert_eq!(para.theta(1).unwrap(), &moore_l(&a3, 2).unwrap());
        assert_eq!(
            para.q(1, 1).unwrap(),
            &dickson_q(&a3, 2, 1, DicksonMethod::Recursion).unwrap()
        );
    }

    #[test]
    fn v_matches_its_defining_product() {
        // v_{i,j} for the second block of (1,1) and (2,1) equals the product
        // over F_q^(m_1) of the shifted linear forms
        for q in [2u64, 3] {
            for parts in [vec![1, 1], vec![2, 1]] {
                let comp = Composition::new(parts).unwrap();
                let n = comp.n();
                let a = alg(q, n);
                let para = ParabolicInvariants::new(&a, &comp).unwrap();
                let m1 = comp.m(1);
                let (els, _) = a.field().enumerate().unwrap();
                let mut prod = a.one();
                let mut tuple = vec![0usize; m1];
                for _ in 0..(q as usize).pow(m1 as u32) {
                    let mut form = a.x(m1 + 1).unwrap();
                    for (t, &ct) in tuple.iter().enumerate() {
                        if ct != 0 {
                            form = form
                                .add(&a.x(t + 1).unwrap().scale(els[ct]).unwrap())
                                .unwrap();
                        }
                    }
                    prod = prod.mul(&form).unwrap();
                    for slot in tuple.iter_mut() {
                        *slot += 1;
                        if *slot < q as usize {
                            break;
                        }
                        *slot = 0;
                    }
                }
                assert_eq!(para.v(2, 1).unwrap(), &prod, "q={q} I={comp}");
            }
        }
    }

    #[test]
    fn theta_prefix_degree() {
        // deg theta_1 ... theta_i = (q^(m_i) - 1) / (q - 1)
        for q in [2u64, 3] {
            let comp = Composition::new(vec![2, 1]).unwrap();
            let a = alg(q, 3);
            let para = ParabolicInvariants::new(&a, &comp).unwrap();
            for i in 1..=2 {
                let mi = comp.m(i) as u32;
                let expect = ((q as Exp).pow(mi) - 1) / (q as Exp - 1);
                let deg = para
                    .theta_prefix(i)
                    .unwrap()
                    .homogeneous_bidegree()
                    .unwrap();
                assert_eq!(deg, (expect, 0));
            }
        }
    }

    #[test]
    fn family_counts_and_degrees() {
        let a = alg(2, 3);
        let comp = Composition::new(vec![2, 1]).unwrap();
        for kind in [
            FamilyKind::MuiGL,
            FamilyKind::MuiSL,
            FamilyKind::MuiU,
            FamilyKind::KI(comp.clone()),
            FamilyKind::PI(comp.clone(), 0),
        ] {
            let fam = basis_family(&a, kind).unwrap();
            assert_eq!(fam.generators().len(), 8);
        }
        // MuiU base degrees for n = 3, q = 2: deg V_m = q^(m-1)
        let fam = basis_family(&a, FamilyKind::MuiU).unwrap();
        assert_eq!(fam.base_degrees(), &[1, 2, 4]);

        // twisted lead generator theta_1 ... theta_l at k = q - 2
        let a3 = alg(3, 2);
        let fam = basis_family(
            &a3,
            FamilyKind::PI(Composition::new(vec![1, 1]).unwrap(), 1),
        )
        .unwrap();
        let (lead, bideg) = &fam.generators()[0];
        assert_eq!(*bideg, (4, 0)); // (q^n - 1)/(q - 1) = 4
        let para =
            ParabolicInvariants::new(&a3, &Composition::new(vec![1, 1]).unwrap()).unwrap();
        assert_eq!(lead, &para.theta_prefix(2).unwrap());

        assert!(matches!(
            basis_family(
                &a3,
                FamilyKind::PI(Composition::new(vec![2]).unwrap(), 5)
            ),
            Err(InvariantError::TwistOutOfRange { .. })
        ));
    }

    #[test]
    fn mui_elements_transform_by_determinant() {
        // g . M_{m;b} = det(g) M_{m;b} for g in GL_m embedded in GL_n
        let f3 = Field::gf(3).unwrap();
        let a = alg(3, 2);
        let g = GroupMatrix::new(
            f3.clone(),
            2,
            vec![f3.from_int(2), f3.one(), f3.zero(), f3.one()],
        )
        .unwrap();
        for b in [vec![0], vec![1], vec![0, 1]] {
            let m = mui_element(&a, 2, &b).unwrap();
            assert_eq!(
                g.act(&m, 0).unwrap(),
                m.scale(g.det()).unwrap(),
                "b = {b:?}"
            );
        }
    }

    /// The determinant transformation laws over every element of small
    /// enumerated groups, not just single matrices: M picks up det(g) under
    /// the embedded general linear group, theta_i picks up det(g_i) under
    /// P_I, v_{i,j} transforms by the columns of the block g_i, and the
    /// q_{i,k} are honest P_I-invariants.
    #[test]
    fn equivariance_over_enumerated_groups() {
        use crate::groups::SubgroupSpec;
        for q in [2u64, 3] {
            let n = 3usize;
            let a = alg(q, n);
            let f = a.field().clone();

            // embed GL_2(q) into the top-left of GL_3(q)
            let gl2 = SubgroupSpec::gl(f.clone(), 2);
            let mui: Vec<_> = [vec![0], vec![1], vec![0usize, 1]]
                .iter()
                .map(|b| mui_element(&a, 2, b).unwrap())
                .collect();
            for g2 in gl2.enumerate(100).unwrap() {
                let mut entries = Vec::new();
                for i in 1..=n {
                    for j in 1..=n {
                        entries.push(if i <= 2 && j <= 2 {
                            g2.entry(i, j)
                        } else if i == j {
                            f.one()
                        } else {
                            f.zero()
                        });
                    }
                }
                let g = GroupMatrix::new(f.clone(), n, entries).unwrap();
                for m in &mui {
                    assert_eq!(g.act(m, 0).unwrap(), m.scale(g2.det()).unwrap());
                }
            }

            let comp = Composition::new(vec![2, 1]).unwrap();
            let para = ParabolicInvariants::new(&a, &comp).unwrap();
            let p_spec = SubgroupSpec::parabolic(f.clone(), comp.clone());
            for g in p_spec.enumerate(1000).unwrap() {
                for i in 1..=2usize {
                    let gi = g.block(&comp, i).unwrap();
                    let theta = para.theta(i).unwrap();
                    assert_eq!(
                        g.act(theta, 0).unwrap(),
                        theta.scale(gi.det()).unwrap(),
                        "theta_{i} under q={q}"
                    );
                    for k in 1..comp.parts()[i - 1] {
                        let qik = para.q(i, k).unwrap();
                        assert_eq!(&g.act(qik, 0).unwrap(), qik);
                    }
                    // g . v_{i,j} = sum_k (g_i)_{k,j} v_{i,k}
                    for j in 1..=comp.parts()[i - 1] {
                        let mut expect = a.zero();
                        for k in 1..=comp.parts()[i - 1] {
                            expect = expect
                                .add(&para.v(i, k).unwrap().scale(gi.entry(k, j)).unwrap())
                                .unwrap();
                        }
                        assert_eq!(g.act(para.v(i, j).unwrap(), 0).unwrap(), expect);
                    }
                }
            }
        }
    }
}
