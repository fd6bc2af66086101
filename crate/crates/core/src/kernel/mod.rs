//! Exact scalar expressions over jet coordinates.

mod atom;
mod calculus;
pub mod matrix;
pub(crate) mod expr;
mod print;
mod raw;
pub mod registry;

pub use atom::{Atom, JetSpace, MultiIndex, MAX_ORDER};
pub use calculus::{derive, equal, equals_zero, simplify, formal_derivative, formal_derivatives, partial, partial_atom, substitute};
pub use expr::{Expr, Monomial};
pub use print::atom_to_string;
pub use raw::{normalize, RawExpr};

