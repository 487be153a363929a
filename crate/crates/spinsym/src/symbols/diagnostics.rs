use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::harmonics::{HarmonicCoeffs, SphereGrid};
use super::twisted_product;
use crate::catalog::CharFamily;
use crate::error::{domain, Result};

/// {f,g} = ∂θf ∂zg − ∂zf ∂θg sampled on a grid.
pub fn poisson_bracket_grid(f: &HarmonicCoeffs, g: &HarmonicCoeffs, grid: &SphereGrid) -> Vec<Complex64> {
    let sf = f.sample(grid, true);
    let sg = g.sample(grid, true);
    (0..grid.len()).map(|i| sf.dtheta[i] * sg.dz[i] - sf.dz[i] * sg.dtheta[i]).collect()
}

/// Sup-norm residuals at one level for f = Y_{l1}^{m1}, g = Y_{l2}^{m2}:
/// (i) f⋆g − g⋆f, (ii) f⋆g + g⋆f − 2fg, (iii) n(f⋆g − g⋆f) − 2i{f,g} and
/// (iii') n(f⋆g − g⋆f) + 2i{f,g}.
#[derive(Clone, Debug, Serialize)]
pub struct PoissonRow {
    pub n: usize,
    pub residual_i: f64,
    pub residual_ii: f64,
    pub residual_iii: f64,
    pub residual_iii_prime: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticReport {
    pub family: String,
    pub l1: usize,
    pub m1: i64,
    pub l2: usize,
    pub m2: i64,
    pub rows: Vec<PoissonRow>,
}

fn sup(v: impl Iterator<Item = Complex64>) -> f64 {
    v.map(|z| z.norm()).fold(0.0, f64::max)
}

fn row(l1: usize, m1: i64, l2: usize, m2: i64, family: &CharFamily, n: usize, grid: &SphereGrid) -> Result<PoissonRow> {
    let c = family.char_numbers(n)?;
    let f = HarmonicCoeffs::unit(n, l1, m1)?;
    let g = HarmonicCoeffs::unit(n, l2, m2)?;
    let fg = twisted_product(&f, &g, &c)?.eval_grid(grid);
    let gf = twisted_product(&g, &f, &c)?.eval_grid(grid);
    let fv = f.eval_grid(grid);
    let gv = g.eval_grid(grid);
    let pb = poisson_bracket_grid(&f, &g, grid);
    let two_i = Complex64::new(0.0, 2.0);
    let nf = n as f64;
    Ok(PoissonRow {
        n,
        residual_i: sup((0..grid.len()).map(|i| fg[i] - gf[i])),
        residual_ii: sup((0..grid.len()).map(|i| fg[i] + gf[i] - 2.0 * fv[i] * gv[i])),
        residual_iii: sup((0..grid.len()).map(|i| (fg[i] - gf[i]) * nf - two_i * pb[i])),
        residual_iii_prime: sup((0..grid.len()).map(|i| (fg[i] - gf[i]) * nf + two_i * pb[i])),
    })
}

/// Residuals of the Poisson-type conditions on the default 64×64 grid for
/// each level in `n_grid`.
pub fn poisson_diagnostic(
    l1: usize,
    m1: i64,
    l2: usize,
    m2: i64,
    family: &CharFamily,
    n_grid: &[usize],
) -> Result<DiagnosticReport> {
    if l1 == 0 || l2 == 0 {
        return domain("poisson diagnostic needs l1, l2 >= 1");
    }
    if m1.unsigned_abs() as usize > l1 || m2.unsigned_abs() as usize > l2 {
        return domain(format!("invalid harmonics ({l1}, {m1}), ({l2}, {m2})"));
    }
    if let Some(&n) = n_grid.iter().find(|&&n| n < l1.max(l2)) {
        return domain(format!("level n = {n} is below the harmonic degrees"));
    }
    let grid = SphereGrid::default();
    let rows = n_grid.par_iter().map(|&n| row(l1, m1, l2, m2, family, n, &grid)).collect::<Result<Vec<_>>>()?;
    Ok(DiagnosticReport { family: family.name(), l1, m1, l2, m2, rows })
}
