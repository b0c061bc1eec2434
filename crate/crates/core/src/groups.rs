//! Matrices over F_q and the subgroups of GL_n(q) acting on the superalgebra.
//!
//! Subgroups are described symbolically (GL, SL, the uni-uppertriangular
//! group U, and the parabolic P_I / K_I for a composition I) and realized by
//! finite generator sets. The twisted action g .k f = det(g)^k (g . f) sends
//! a variable to the matrix-column combination `g.x_j = sum_a g[a][j] x_a`,
//! with y transforming the same way.

use crate::algebra::{AlgebraError, SuperAlgebra, SuperElement};
use crate::gf::{Field, FieldElement, GfError};
use num_bigint::BigUint;
use num_traits::One;
use std::collections::HashSet;
use std::collections::VecDeque;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("matrix is singular")]
    Singular,
    #[error("matrix and element have mismatched ambient data")]
    AmbientMismatch,
    #[error("matrix does not lie in the requested subgroup")]
    NotInSubgroup,
    #[error("group order {order} exceeds the enumeration bound {bound}")]
    GroupTooLarge { order: BigUint, bound: u64 },
    #[error("composition parts must be positive and sum to n")]
    BadComposition,
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// A composition I = (n_1, ..., n_l) of n with positive parts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Composition {
    parts: Vec<usize>,
}

impl Composition {
    pub fn new(parts: Vec<usize>) -> Result<Self, GroupError> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(GroupError::BadComposition);
        }
        Ok(Composition { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Partial sum m_i = n_1 + ... + n_i, with m_0 = 0.
    pub fn m(&self, i: usize) -> usize {
        self.parts[..i].iter().sum()
    }

    /// Block index (1-based) containing the 1-based coordinate `pos`.
    pub fn block_of(&self, pos: usize) -> usize {
        let mut acc = 0;
        for (i, &p) in self.parts.iter().enumerate() {
            acc += p;
            if pos <= acc {
                return i + 1;
            }
        }
        self.parts.len()
    }

    /// All 2^(n-1) compositions of n, ordered with larger first parts first.
    pub fn all(n: usize) -> Vec<Composition> {
        assert!(n >= 1);
        let mut out = Vec::new();
        for first in (1..=n).rev() {
            if first == n {
                out.push(Composition { parts: vec![n] });
            } else {
                for rest in Composition::all(n - first) {
                    let mut parts = vec![first];
                    parts.extend_from_slice(&rest.parts);
                    out.push(Composition { parts });
                }
            }
        }
        out
    }

    /// Parse the flag syntax "2,1".
    pub fn parse(s: &str) -> Result<Self, GroupError> {
        let parts: Result<Vec<usize>, _> = s.split(',').map(|p| p.trim().parse()).collect();
        Composition::new(parts.map_err(|_| GroupError::BadComposition)?)
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "{}", s.join(","))
    }
}

/// An invertible n x n matrix over F_q, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupMatrix {
    field: Field,
    n: usize,
    entries: Vec<FieldElement>,
}

impl GroupMatrix {
    /// Invertibility is checked at construction.
    pub fn new(field: Field, n: usize, entries: Vec<FieldElement>) -> Result<Self, GroupError> {
        assert_eq!(entries.len(), n * n, "entry count must be n^2");
        for &e in &entries {
            if !field.contains(e) {
                return Err(GroupError::AmbientMismatch);
            }
        }
        let m = GroupMatrix { field, n, entries };
        if m.det() == m.field.zero() {
            return Err(GroupError::Singular);
        }
        Ok(m)
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        let mut entries = vec![field.zero(); n * n];
        for i in 0..n {
            entries[i * n + i] = field.one();
        }
        GroupMatrix {
            field: field.clone(),
            n,
            entries,
        }
    }

    /// I + b E_{i,j} for i != j (1-based indices).
    pub fn transvection(
        field: &Field,
        n: usize,
        i: usize,
        j: usize,
        b: FieldElement,
    ) -> Result<Self, GroupError> {
        assert!(i != j && i >= 1 && j >= 1 && i <= n && j <= n);
        let mut m = GroupMatrix::identity(field, n);
        if !field.contains(b) {
            return Err(GroupError::AmbientMismatch);
        }
        m.entries[(i - 1) * n + (j - 1)] = b;
        Ok(m)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry in row i, column j (1-based).
    pub fn entry(&self, i: usize, j: usize) -> FieldElement {
        self.entries[(i - 1) * self.n + (j - 1)]
    }

    pub fn is_identity(&self) -> bool {
        *self == GroupMatrix::identity(&self.field, self.n)
    }

    pub fn is_diagonal(&self) -> bool {
        let z = self.field.zero();
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.entries[i * self.n + j] == z))
    }

    pub fn mul(&self, other: &GroupMatrix) -> Result<GroupMatrix, GroupError> {
        if self.field != other.field || self.n != other.n {
            return Err(GroupError::AmbientMismatch);
        }
        let f = &self.field;
        let n = self.n;
        let mut entries = vec![f.zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = f.zero();
                for k in 0..n {
                    let prod = f
                        .mul(self.entries[i * n + k], other.entries[k * n + j])
                        .unwrap();
                    acc = f.add(acc, prod).unwrap();
                }
                entries[i * n + j] = acc;
            }
        }
        Ok(GroupMatrix {
            field: f.clone(),
            n,
            entries,
        })
    }

    /// Exact determinant by Gaussian elimination.
    pub fn det(&self) -> FieldElement {
        let f = &self.field;
        let n = self.n;
        let mut a: Vec<FieldElement> = self.entries.clone();
        let mut det = f.one();
        for col in 0..n {
            let pivot = (col..n).find(|&r| a[r * n + col] != f.zero());
            let Some(pr) = pivot else {
                return f.zero();
            };
            if pr != col {
                for j in 0..n {
                    a.swap(pr * n + j, col * n + j);
                }
                det = f.neg(det).unwrap();
            }
            let piv = a[col * n + col];
            det = f.mul(det, piv).unwrap();
            let inv = f.inv(piv).unwrap();
            for r in col + 1..n {
                let factor = f.mul(a[r * n + col], inv).unwrap();
                if factor == f.zero() {
                    continue;
                }
                for j in col..n {
                    let sub = f.mul(factor, a[col * n + j]).unwrap();
                    a[r * n + j] = f.sub(a[r * n + j], sub).unwrap();
                }
            }
        }
        det
    }

    /// Matrix inverse (always defined: invertibility is a construction
    /// invariant).
    pub fn inverse(&self) -> GroupMatrix {
        let f = &self.field;
        let n = self.n;
        let mut a = self.entries.clone();
        let mut inv = GroupMatrix::identity(f, n).entries;
        for col in 0..n {
            let pr = (col..n)
                .find(|&r| a[r * n + col] != f.zero())
                .expect("invertible by construction");
            if pr != col {
                for j in 0..n {
                    a.swap(pr * n + j, col * n + j);
                    inv.swap(pr * n + j, col * n + j);
                }
            }
            let piv_inv = f.inv(a[col * n + col]).unwrap();
            for j in 0..n {
                a[col * n + j] = f.mul(a[col * n + j], piv_inv).unwrap();
                inv[col * n + j] = f.mul(inv[col * n + j], piv_inv).unwrap();
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[r * n + col];
                if factor == f.zero() {
                    continue;
                }
                for j in 0..n {
                    let s = f.mul(factor, a[col * n + j]).unwrap();
                    a[r * n + j] = f.sub(a[r * n + j], s).unwrap();
                    let s = f.mul(factor, inv[col * n + j]).unwrap();
                    inv[r * n + j] = f.sub(inv[r * n + j], s).unwrap();
                }
            }
        }
        GroupMatrix {
            field: f.clone(),
            n,
            entries: inv,
        }
    }

    /// The i-th diagonal block (1-based) of a matrix in block
    /// upper-triangular P_I shape; errors when entries below the block
    /// diagonal are nonzero.
    pub fn block(&self, comp: &Composition, i: usize) -> Result<GroupMatrix, GroupError> {
        if comp.n() != self.n || i == 0 || i > comp.len() {
            return Err(GroupError::AmbientMismatch);
        }
        let f = &self.field;
        for row in 1..=self.n {
            for col in 1..=self.n {
                if comp.block_of(row) > comp.block_of(col) && self.entry(row, col) != f.zero() {
                    return Err(GroupError::NotInSubgroup);
                }
            }
        }
        let lo = comp.m(i - 1);
        let size = comp.parts()[i - 1];
        let mut entries = Vec::with_capacity(size * size);
        for r in 0..size {
            for c in 0..size {
                entries.push(self.entry(lo + r + 1, lo + c + 1));
            }
        }
        GroupMatrix::new(f.clone(), size, entries)
    }

    /// Twisted action det(g)^k (g . f); the twist exponent is normalized
    /// mod q - 1 since Det^(q-1) is trivial.
    pub fn act(&self, f: &SuperElement, k: u64) -> Result<SuperElement, GroupError> {
        let alg = f.algebra();
        if alg.n() != self.n || alg.field() != &self.field {
            return Err(GroupError::AmbientMismatch);
        }
        let fld = &self.field;
        let mut xs = Vec::with_capacity(self.n);
        let mut ys = Vec::with_capacity(self.n);
        for j in 1..=self.n {
            let mut xi = alg.zero();
            let mut yi = alg.zero();
            for a in 1..=self.n {
                let c = self.entry(a, j);
                if c == fld.zero() {
                    continue;
                }
                xi = xi.add(&alg.x(a)?.scale(c)?)?;
                yi = yi.add(&alg.y(a)?.scale(c)?)?;
            }
            xs.push(xi);
            ys.push(yi);
        }
        let image = f.substitute(&xs, &ys)?;
        let k = normalize_twist(k, fld.q());
        if k == 0 {
            return Ok(image);
        }
        let scale = fld.pow(self.det(), k as u128).unwrap();
        Ok(image.scale(scale)?)
    }
}

/// Twist exponents live in [0, q-2]; Det^(q-1) is trivial.
pub fn normalize_twist(k: u64, q: u64) -> u64 {
    if q == 2 {
        0
    } else {
        k % (q - 1)
    }
}

impl fmt::Display for GroupMatrix {
    /// Rows separated by ";", entries by ",", in field element syntax.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (1..=self.n)
            .map(|i| {
                (1..=self.n)
                    .map(|j| self.field.format_element(self.entry(i, j)))
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect();
        write!(f, "{}", rows.join(";"))
    }
}

impl GroupMatrix {
    pub fn parse(field: &Field, s: &str) -> Result<GroupMatrix, GroupError> {
        let rows: Vec<&str> = s.split(';').collect();
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            let cols: Vec<&str> = row.split(',').collect();
            if cols.len() != n {
                return Err(GroupError::AmbientMismatch);
            }
            for c in cols {
                entries.push(field.parse_element(c.trim())?);
            }
        }
        GroupMatrix::new(field.clone(), n, entries)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SubgroupKind {
    GL,
    SL,
    U,
    P(Composition),
    K(Composition),
}

impl fmt::Display for SubgroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubgroupKind::GL => write!(f, "GL"),
            SubgroupKind::SL => write!(f, "SL"),
            SubgroupKind::U => write!(f, "U"),
            SubgroupKind::P(c) => write!(f, "P({c})"),
            SubgroupKind::K(c) => write!(f, "K({c})"),
        }
    }
}

/// A symbolic subgroup of GL_n(q) with a concrete generator set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupSpec {
    kind: SubgroupKind,
    n: usize,
    field: Field,
}

impl SubgroupSpec {
    pub fn new(field: Field, n: usize, kind: SubgroupKind) -> Result<Self, GroupError> {
        match &kind {
            SubgroupKind::P(c) | SubgroupKind::K(c)
                if c.n() != n => {
                    return Err(GroupError::BadComposition);
                }
            _ => {}
        }
        Ok(SubgroupSpec { kind, n, field })
    }

    pub fn gl(field: Field, n: usize) -> Self {
        SubgroupSpec::new(field, n, SubgroupKind::GL).unwrap()
    }

    pub fn sl(field: Field, n: usize) -> Self {
        SubgroupSpec::new(field, n, SubgroupKind::SL).unwrap()
    }

    pub fn unitriangular(field: Field, n: usize) -> Self {
        SubgroupSpec::new(field, n, SubgroupKind::U).unwrap()
    }

    pub fn parabolic(field: Field, comp: Composition) -> Self {
        let n = comp.n();
        SubgroupSpec::new(field, n, SubgroupKind::P(comp)).unwrap()
    }

    pub fn parabolic_sl(field: Field, comp: Composition) -> Self {
        let n = comp.n();
        SubgroupSpec::new(field, n, SubgroupKind::K(comp)).unwrap()
    }

    pub fn kind(&self) -> &SubgroupKind {
        &self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn composition(&self) -> Option<&Composition> {
        match &self.kind {
            SubgroupKind::P(c) | SubgroupKind::K(c) => Some(c),
            _ => None,
        }
    }

    /// An F_p-basis of F_q, namely 1, u, ..., u^(r-1).
    fn fp_basis(&self) -> Vec<FieldElement> {
        let p = self.field.p();
        (0..self.field.r())
            .map(|i| self.field.element(p.pow(i)).unwrap())
            .collect()
    }

    /// A finite generating set. Identity matrices (e.g. the diagonal
    /// generator when q = 2) are dropped.
    pub fn generators(&self) -> Vec<GroupMatrix> {
        let f = &self.field;
        let n = self.n;
        let zeta = f.multiplicative_generator();
        let basis = self.fp_basis();
        let mut gens: Vec<GroupMatrix> = Vec::new();

        let push = |m: GroupMatrix, gens: &mut Vec<GroupMatrix>| {
            if !m.is_identity() && !gens.contains(&m) {
                gens.push(m);
            }
        };

        // embedded GL or SL generators for a block [lo+1 .. lo+size]
        let block_gens = |lo: usize, size: usize, special: bool, gens: &mut Vec<GroupMatrix>| {
            if !special && size >= 1 {
                let mut d = GroupMatrix::identity(f, n);
                d.entries[lo * n + lo] = zeta;
                push(GroupMatrix::new(f.clone(), n, d.entries).unwrap(), gens);
            }
            for i in 1..=size {
                for j in 1..=size {
                    if i == j {
                        continue;
                    }
                    for &b in &basis {
                        push(
                            GroupMatrix::transvection(f, n, lo + i, lo + j, b).unwrap(),
                            gens,
                        );
                    }
                }
            }
        };

        match &self.kind {
            SubgroupKind::GL => block_gens(0, n, false, &mut gens),
            SubgroupKind::SL => block_gens(0, n, true, &mut gens),
            SubgroupKind::U => {
                for i in 1..n {
                    for &b in &basis {
                        push(
                            GroupMatrix::transvection(f, n, i, i + 1, b).unwrap(),
                            &mut gens,
                        );
                    }
                }
            }
            SubgroupKind::P(comp) | SubgroupKind::K(comp) => {
                let special = matches!(self.kind, SubgroupKind::K(_));
                for (bi, &size) in comp.parts().iter().enumerate() {
                    block_gens(comp.m(bi), size, special, &mut gens);
                }
                // cross-block transvections above the block diagonal
                for a in 1..=n {
                    for c in a + 1..=n {
                        if comp.block_of(a) != comp.block_of(c) {
                            for &b in &basis {
                                push(
                                    GroupMatrix::transvection(f, n, a, c, b).unwrap(),
                                    &mut gens,
                                );
                            }
                        }
                    }
                }
            }
        }
        gens
    }

    /// Group order from the standard formulas.
    pub fn order(&self) -> BigUint {
        let q = BigUint::from(self.field.q());
        let gl_order = |m: usize| -> BigUint {
            let qm = q.pow(m as u32);
            let mut o = BigUint::one();
            for i in 0..m {
                o *= &qm - q.pow(i as u32);
            }
            o
        };
        let q1 = &q - 1u32;
        match &self.kind {
            SubgroupKind::GL => gl_order(self.n),
            SubgroupKind::SL => gl_order(self.n) / q1,
            SubgroupKind::U => q.pow((self.n * (self.n - 1) / 2) as u32),
            SubgroupKind::P(comp) | SubgroupKind::K(comp) => {
                let special = matches!(self.kind, SubgroupKind::K(_));
                let mut cross = 0usize;
                let parts = comp.parts();
                for i in 0..parts.len() {
                    for j in i + 1..parts.len() {
                        cross += parts[i] * parts[j];
                    }
                }
                let mut o = q.pow(cross as u32);
                for &p in parts {
                    o *= gl_order(p);
                    if special {
                        o /= &q1;
                    }
                }
                o
            }
        }
    }

    /// All elements by breadth-first closure of the generator set.
    pub fn enumerate(&self, bound: u64) -> Result<Vec<GroupMatrix>, GroupError> {
        let order = self.order();
        if order > BigUint::from(bound) {
            return Err(GroupError::GroupTooLarge { order, bound });
        }
        let gens = self.generators();
        let id = GroupMatrix::identity(&self.field, self.n);
        let mut seen: HashSet<Vec<FieldElement>> = HashSet::new();
        seen.insert(id.entries.clone());
        let mut out = vec![id.clone()];
        let mut queue = VecDeque::from([id]);
        while let Some(g) = queue.pop_front() {
            for h in &gens {
                let next = g.mul(h)?;
                if seen.insert(next.entries.clone()) {
                    out.push(next.clone());
                    queue.push_back(next);
                }
            }
        }
        debug_assert_eq!(BigUint::from(out.len() as u64), order);
        Ok(out)
    }
}

/// Convenience: the ambient algebra a spec acts on.
pub fn spec_algebra(spec: &SubgroupSpec) -> SuperAlgebra {
    SuperAlgebra::new(spec.field().clone(), spec.n()).unwrap()
}
