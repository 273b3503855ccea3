//! Symbolic calculus for flows of evolution equations.
//!
//! Expressions are built over a [`Context`] of declared time variables,
//! space variables and operator symbols. The [`calculus`] module provides
//! Frechet differentials, time derivatives and multilinear expansion,
//! [`rewrite`] applies the fundamental identity `F(E_F(t,u)) = d2E_F(t,u).F(u)`
//! and its differentiated forms, and [`numeric`] checks symbolic results
//! against concrete polynomial vector fields.

pub mod calculus;
pub mod cli;
pub mod error;
pub mod expr;
pub mod numeric;
pub mod render;
pub mod rewrite;
pub mod scenarios;

pub use error::{Error, Result};
pub use expr::{
    apply, flow, linear_combine, nonautonomous_apply, rational, Autonomy, Context, DeclKind, Declared, Expr,
    ExprKind, Expression, FunctionSymbol, Rational, TimeExpr,
};
