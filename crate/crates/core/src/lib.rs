//! Exact modular invariant theory for the finite general linear groups.
//!
//! The crate computes, over any F_q with q up to 2^16:
//!
//! - the bigraded superalgebra F_q[x_1..x_n] (x) E[y_1..y_n] with exact
//!   sparse arithmetic, row determinants, substitution and exact division;
//! - Dickson invariants, Mui determinant elements, and the twisted
//!   invariant bases of parabolic subgroups of GL_n(q);
//! - closed-form bivariate Hilbert series for the invariant rings and for
//!   Steinberg module multiplicities, as exact rational expressions;
//! - a brute-force oracle that recomputes every dimension by null-space
//!   linear algebra over F_q and certifies the closed forms against it.

pub mod algebra;
pub mod gf;
pub mod groups;
pub mod invariants;
pub mod oracle;
pub mod series;

pub use algebra::{AlgebraError, AlgebraMatrix, SuperAlgebra, SuperElement, SuperMonomial};
pub use gf::{Field, FieldElement, GfError};
pub use groups::{Composition, GroupError, GroupMatrix, SubgroupKind, SubgroupSpec};
pub use invariants::{BasisFamily, FamilyKind, InvariantError};
pub use oracle::{DimTable, FreeBasisReport, OracleError};
pub use series::{ClosedForm, RationalSeries, SeriesError, SeriesTable};
