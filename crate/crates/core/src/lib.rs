//! Exact computations with the cyclotomic action on truncated Puiseux
//! series over F_p.

pub mod arith;
pub mod cli;
pub mod commutant;
pub mod error;
pub mod mahler;
pub mod phigamma;
pub mod puiseux;
pub mod suites;
pub mod tate_colmez;
pub mod valuation;

pub use arith::{lucas_binom, FpElem, GammaElement, PadicInt, Prime};
pub use error::{Error, Result};
pub use puiseux::PuiseuxSeries;
pub use valuation::{Val, Verdict, Q};
