//! Exact and numerical verification of conserved operators, the one-parameter
//! unitary families they generate, and the Schrödinger solutions those
//! families map onto each other.

pub mod expr;
pub mod gauss;
pub mod numeric;
pub mod scenarios;
pub mod weyl;
