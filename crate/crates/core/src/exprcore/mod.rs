//! Exact symbolic kernel: rationals, quadratic surds, expression trees,
//! polynomials, exponential polynomials and root isolation.

pub mod coef;
pub mod eval;
pub mod expoly;
pub mod expr;
pub mod interval;
pub mod linalg;
pub mod normalize;
pub mod poly;
pub mod quad;
pub mod rat;

pub use coef::Coef;
pub use eval::{eval_exact, eval_quad, eval_with, Bindings, EvalError};
pub use expoly::{to_expoly, ExpPoly, ExpTerm, NotExpPoly};
pub use expr::{Expr, Func};
pub use normalize::normalize;
pub use poly::{Poly, RatFunc, RootError, RootInterval};
pub use quad::{FieldMismatch, Quad};
pub use rat::Rat;
pub use interval::{eval_interval, Interval};
