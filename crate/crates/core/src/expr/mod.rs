//! The operator-expression language: AST, parser, canonical printer and exact
//! time differentiation.

mod ast;
mod diff;
mod parser;
mod print;

pub use ast::{is_reserved, Env, EvalError, Expr, Func, OpLeaf, OperatorExpr, ScalarExpr, RESERVED};
pub use diff::differentiate_t;
pub use parser::{parse, parse_with, Declared, ParseError, ParseErrorKind};
pub use print::print;
