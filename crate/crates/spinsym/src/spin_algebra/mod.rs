//! Exact half-integer arithmetic, factorials, Legendre polynomials and the
//! Clebsch-Gordan engine.

pub mod cg;
pub mod exact;
pub mod factorial;
pub mod half_int;
pub mod legendre;
pub mod signed_log;

pub use cg::{
    cgc, cgc_diag, cgc_diag_f64, cgc_diag_racah, cgc_f64, diag_column, diag_column_exact, diag_column_f64, diag_column_log,
    diag_value, ln_diag_top_l, magnetic, NeumaierSum, Precision, AUTO_EXACT_MAX_N,
};
pub use exact::ExactValue;
pub use factorial::{factorial, ln_factorial, FactorialCache};
pub use half_int::HalfInt;
pub use legendre::{gauss_legendre, legendre_all, legendre_eval};
pub use signed_log::SignedLog;
