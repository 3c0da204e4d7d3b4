//! Exact arithmetic kernel: rationals, sparse polynomials, rational functions,
//! closed forms with rational powers, parsing and partial fractions.

pub mod closed;
pub mod factor;
pub mod gcd;
pub mod linsolve;
pub mod parse;
pub mod partial;
pub mod poly;
pub mod rat;
pub mod ratfunc;
pub mod upoly;
pub mod var;

pub use closed::{ClosedForm, Compiled};
pub use gcd::{gcd, lcm};
pub use parse::{parse_any, parse_expr, parse_poly, parse_ratfunc, split_tuple};
pub use partial::{partial_fractions, PartialFractions, PartialTerm};
pub use poly::{MPoly, Monomial};
pub use rat::{rat, ri, Rat};
pub use ratfunc::RatFunc;
pub use upoly::UPoly;
pub use var::Var;
