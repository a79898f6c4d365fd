//! Exact verification of polynomial generalized continued fraction
//! identities `b0 + K(a(n) / b(n)) = constant`.

pub mod cli;
pub mod expr;
pub mod factorize;
pub mod gcf;
pub mod numerics;
pub mod poly;
pub mod series;
pub mod verify;
