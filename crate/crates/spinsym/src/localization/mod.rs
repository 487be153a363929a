//! Π-distributions, their moments, and localization sweeps.

mod bounds;
mod moments;
mod rule;
mod spectral;
mod test_function;

pub use bounds::{bound_check, edmonds_check, toeplitz_top, toeplitz_top_asymptotic, two_sided_bound_check, BoundReport, EdmondsRow, EdmondsTable};
pub use moments::{
    edmonds_factors, moment_sweep, moment_verdict, moments, rho_eval, rho_legendre_logs, rho_legendre_moments,
    rho_legendre_moments_with, spectral_moments, MomentRow, MomentSweep, MomentVerdict, Moments,
};
pub use rule::{KRule, Orientation, PiRule};
pub use spectral::{
    bernstein_of_pole, localization_error, localization_error_with, localization_sweep, mu_analytic_suite,
    pole_for_bernstein, LocalizationOutcome, MuAnalyticReport, PoleRow, TRUNCATION_TOL,
};
pub(crate) use spectral::level_ln_coeffs;
pub use test_function::{legendre_coeffs_quadrature, LegendreCoeffs, NamedSmooth, TestFunction, QUADRATURE_TOL};

/// a_0..a_L of f; closed form where available, Gauss–Legendre otherwise.
pub fn legendre_coeffs(f: &TestFunction, l_max: usize) -> crate::Result<LegendreCoeffs> {
    f.coeffs(l_max)
}
