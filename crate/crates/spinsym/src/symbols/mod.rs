//! Coupled basis, symbol map, projector symbols and twisted products.

mod basis;
mod diagnostics;
mod harmonics;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

pub use basis::{lm_index, CoupledBasis, MAX_BASIS_N};
pub use diagnostics::{poisson_bracket_grid, poisson_diagnostic, DiagnosticReport, PoissonRow};
pub use harmonics::{
    normalized_assoc_legendre, normalized_assoc_legendre_dz, ylm, GridSamples, HarmonicCoeffs, SphereGrid,
};

use crate::error::{domain, Error, Result};
use crate::localization::{edmonds_factors, LegendreCoeffs};
use crate::spin_algebra::Precision;

/// Tolerance on c_0 = 1 for characteristic vectors.
pub const CHAR_ZERO_TOL: f64 = 1e-12;

/// An operator on the (n+1)-dimensional spin space, in the basis ordered by
/// descending magnetic number (row k ↔ m = j − k + 1).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatorMatrix {
    pub n: usize,
    #[serde(skip)]
    pub entries: DMatrix<Complex64>,
}

impl OperatorMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return domain(format!("operator must be square and nonempty, got {}x{}", entries.nrows(), entries.ncols()));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return domain("operator has non-finite entries");
        }
        Ok(OperatorMatrix { n: entries.nrows() - 1, entries })
    }

    pub fn zeros(n: usize) -> Self {
        OperatorMatrix { n, entries: DMatrix::zeros(n + 1, n + 1) }
    }

    pub fn identity(n: usize) -> Self {
        OperatorMatrix { n, entries: DMatrix::identity(n + 1, n + 1) }
    }

    /// Real diagonal operator.
    pub fn diagonal(d: &[f64]) -> Result<Self> {
        if d.is_empty() {
            return domain("empty diagonal");
        }
        let n = d.len() - 1;
        let mut out = Self::zeros(n);
        for (i, v) in d.iter().enumerate() {
            out.entries[(i, i)] = Complex64::new(*v, 0.0);
        }
        Ok(out)
    }

    /// Rank-one projector Π_k onto the k-th basis state, 1 ≤ k ≤ n+1.
    pub fn projector(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n + 1 {
            return domain(format!("projector index k = {k} outside 1..={}", n + 1));
        }
        let mut out = Self::zeros(n);
        out.entries[(k - 1, k - 1)] = Complex64::new(1.0, 0.0);
        Ok(out)
    }

    pub fn j_plus(n: usize) -> Self {
        let mut out = Self::zeros(n);
        for c in 1..=n {
            out.entries[(c - 1, c)] = Complex64::new(basis::ladder(n, c), 0.0);
        }
        out
    }

    pub fn j_minus(n: usize) -> Self {
        Self::j_plus(n).adjoint()
    }

    pub fn j3(n: usize) -> Self {
        let mut out = Self::zeros(n);
        for p in 0..=n {
            out.entries[(p, p)] = Complex64::new(n as f64 / 2.0 - p as f64, 0.0);
        }
        out
    }

    /// The three Cartesian spin components (J1, J2, J3).
    pub fn cartesian(n: usize) -> [Self; 3] {
        let (jp, jm) = (Self::j_plus(n).entries, Self::j_minus(n).entries);
        let j1 = (&jp + &jm) * Complex64::new(0.5, 0.0);
        let j2 = (&jp - &jm) * Complex64::new(0.0, -0.5);
        [OperatorMatrix { n, entries: j1 }, OperatorMatrix { n, entries: j2 }, Self::j3(n)]
    }

    pub fn adjoint(&self) -> Self {
        OperatorMatrix { n: self.n, entries: self.entries.adjoint() }
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn mul(&self, other: &Self) -> Self {
        OperatorMatrix { n: self.n, entries: &self.entries * &other.entries }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        OperatorMatrix { n: self.n, entries: &self.entries * &other.entries - &other.entries * &self.entries }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.entries - &other.entries).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }
}

/// The coupled basis element e(l,m) at level n as a dense operator.
pub fn coupled_basis(n: usize, l: usize, m: i64) -> Result<OperatorMatrix> {
    if l > n || m.unsigned_abs() as usize > l {
        return domain(format!("(l, m) = ({l}, {m}) invalid at level {n}"));
    }
    Ok(OperatorMatrix { n, entries: CoupledBasis::get(n)?.matrix(l, m) })
}

fn check_chars(n: usize, c: &[f64]) -> Result<()> {
    if c.len() != n + 1 {
        return domain(format!("characteristic vector has length {}, expected {}", c.len(), n + 1));
    }
    if (c[0] - 1.0).abs() > CHAR_ZERO_TOL {
        return domain(format!("c_0 must be 1, got {}", c[0]));
    }
    if c.iter().any(|v| !v.is_finite()) {
        return domain("characteristic vector has non-finite entries");
    }
    Ok(())
}

fn check_invertible(n: usize, c: &[f64]) -> Result<()> {
    check_chars(n, c)?;
    match c.iter().position(|v| *v == 0.0) {
        Some(l) => Err(Error::Singular { n, l }),
        None => Ok(()),
    }
}

/// Harmonic coefficients of the symbol of P: a_l^m = c_l·tr(e(l,m)ᵀP)/√(n+1).
pub fn symbol(p: &OperatorMatrix, c: &[f64]) -> Result<HarmonicCoeffs> {
    let n = p.n;
    check_chars(n, c)?;
    let b = CoupledBasis::get(n)?;
    let scale = 1.0 / ((n + 1) as f64).sqrt();
    let mut out = HarmonicCoeffs::zeros(n);
    for l in 0..=n {
        for m in -(l as i64)..=(l as i64) {
            out.a[lm_index(l, m)] = b.pair(l, m, &p.entries) * (c[l] * scale);
        }
    }
    Ok(out)
}

/// The operator whose symbol is f: Σ (a_l^m/c_l)√(n+1) e(l,m).
pub fn inverse_symbol(f: &HarmonicCoeffs, c: &[f64]) -> Result<OperatorMatrix> {
    let n = f.n;
    check_invertible(n, c)?;
    let b = CoupledBasis::get(n)?;
    let scale = ((n + 1) as f64).sqrt();
    let mut out = OperatorMatrix::zeros(n);
    for l in 0..=n {
        for m in -(l as i64)..=(l as i64) {
            let a = f.a[lm_index(l, m)];
            if a != Complex64::new(0.0, 0.0) {
                b.accumulate(l, m, a * (scale / c[l]), &mut out.entries);
            }
        }
    }
    Ok(out)
}

/// Legendre coefficients of the symbol of Π_k, computed from the diagonal
/// Clebsch-Gordan column without forming matrices.
pub fn projector_symbol(n: usize, k: usize, c: &[f64]) -> Result<LegendreCoeffs> {
    check_chars(n, c)?;
    let e = edmonds_factors(n, k, n, Precision::Auto)?;
    let a = (0..=n).map(|l| c[l] * e[l].to_f64() * (2 * l + 1) as f64 / (n + 1) as f64).collect();
    Ok(LegendreCoeffs { a })
}

/// Legendre coefficients of the symbol of a real diagonal operator.
pub fn diagonal_symbol(d: &[f64], c: &[f64]) -> Result<LegendreCoeffs> {
    if d.is_empty() {
        return domain("empty diagonal");
    }
    let n = d.len() - 1;
    check_chars(n, c)?;
    let mut a = vec![0.0; n + 1];
    for (k, dk) in d.iter().enumerate() {
        if *dk == 0.0 {
            continue;
        }
        let e = edmonds_factors(n, k + 1, n, Precision::Auto)?;
        for l in 0..=n {
            a[l] += dk * e[l].to_f64();
        }
    }
    for (l, v) in a.iter_mut().enumerate() {
        *v *= c[l] * (2 * l + 1) as f64 / (n + 1) as f64;
    }
    Ok(LegendreCoeffs { a })
}

/// f ⋆ g: the symbol of the product of the operators with symbols f and g.
pub fn twisted_product(f: &HarmonicCoeffs, g: &HarmonicCoeffs, c: &[f64]) -> Result<HarmonicCoeffs> {
    if f.n != g.n {
        return domain(format!("twisted product needs equal levels, got {} and {}", f.n, g.n));
    }
    let p = inverse_symbol(f, c)?;
    let q = inverse_symbol(g, c)?;
    symbol(&p.mul(&q), c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::CharFamily;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_operator(n: usize, rng: &mut ChaCha8Rng, hermitian: bool) -> OperatorMatrix {
        let mut m = DMatrix::from_fn(n + 1, n + 1, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        if hermitian {
            m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        }
        OperatorMatrix::new(m).unwrap()
    }

    fn binom(n: usize, k: usize) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    #[test]
    fn berezin_symbol_is_coherent_state_expectation() {
        // Φ_{k+1} = √C(n,k) cos^{n−k}(φ/2) sin^k(φ/2) e^{ikθ}, B_P = Φ*PΦ
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1usize, 2, 5, 9] {
            let c = CharFamily::standard_berezin().char_numbers(n).unwrap();
            let p = random_operator(n, &mut rng, false);
            let f = symbol(&p, &c).unwrap();
            for &(z, t) in &[(0.3f64, 0.7f64), (-0.8, 2.9), (0.95, -1.1), (0.0, 0.0)] {
                let phi = z.acos();
                let phis: Vec<Complex64> = (0..=n)
                    .map(|k| {
                        let r = binom(n, k).sqrt() * (phi / 2.0).cos().powi((n - k) as i32) * (phi / 2.0).sin().powi(k as i32);
                        Complex64::from_polar(r, k as f64 * t)
                    })
                    .collect();
                let mut want = Complex64::new(0.0, 0.0);
                for a in 0..=n {
                    for b in 0..=n {
                        want += phis[a].conj() * p.entries[(a, b)] * phis[b];
                    }
                }
                assert!((f.eval(z, t) - want).norm() < 1e-12, "n={n} z={z}: {} vs {want}", f.eval(z, t));
            }
        }
    }

    #[test]
    fn basis_is_equivariant_and_casimir() {
        for n in [1usize, 4, 9, 20] {
            let j = OperatorMatrix::cartesian(n);
            for l in 0..=n {
                for m in -(l as i64)..=(l as i64) {
                    let e = coupled_basis(n, l, m).unwrap();
                    let comm = j[2].commutator(&e);
                    let scaled = OperatorMatrix { n, entries: &e.entries * Complex64::new(m as f64, 0.0) };
                    assert!(comm.max_abs_diff(&scaled) < 1e-12);
                    let mut cas = OperatorMatrix::zeros(n);
                    for jk in &j {
                        cas.entries += jk.commutator(&jk.commutator(&e)).entries;
                    }
                    let want = OperatorMatrix { n, entries: &e.entries * Complex64::new((l * (l + 1)) as f64, 0.0) };
                    assert!(cas.max_abs_diff(&want) < 1e-10, "n={n} l={l} m={m}");
                }
            }
        }
    }

    #[test]
    fn hs_orthonormal_up_to_twenty() {
        for n in [1usize, 4, 11, 20] {
            let b = CoupledBasis::get(n).unwrap();
            let all: Vec<DMatrix<Complex64>> =
                (0..=n).flat_map(|l| (-(l as i64)..=l as i64).map(move |m| (l, m))).map(|(l, m)| b.matrix(l, m)).collect();
            for (i, x) in all.iter().enumerate() {
                for (k, y) in all.iter().enumerate() {
                    let ip = (x.adjoint() * y).trace();
                    let want = if i == k { 1.0 } else { 0.0 };
                    assert!((ip - want).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn identity_and_diagonal_basis() {
        let n = 4;
        let e00 = coupled_basis(n, 0, 0).unwrap();
        let want = OperatorMatrix { n, entries: DMatrix::identity(5, 5) * Complex64::new(1.0 / 5f64.sqrt(), 0.0) };
        assert!(e00.max_abs_diff(&want) < 1e-15);
        assert!(coupled_basis(n, 2, 3).is_err());
        assert!(coupled_basis(n, 5, 0).is_err());
    }

    #[test]
    fn round_trip_and_unit() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 6;
        for fam in [CharFamily::standard_sw(), CharFamily::standard_berezin(), CharFamily::alternate_sw()] {
            let c = fam.char_numbers(n).unwrap();
            let p = random_operator(n, &mut rng, true);
            let back = inverse_symbol(&symbol(&p, &c).unwrap(), &c).unwrap();
            assert!(back.max_abs_diff(&p) < 1e-11);
            let one = inverse_symbol(&HarmonicCoeffs::one(n), &c).unwrap();
            assert!(one.max_abs_diff(&OperatorMatrix::identity(n)) < 1e-13);
            let s = symbol(&OperatorMatrix::identity(n), &c).unwrap();
            assert!(s.max_abs_diff(&HarmonicCoeffs::one(n)) < 1e-13);
            // symbol of the adjoint is the conjugate symbol
            let q = random_operator(n, &mut rng, false);
            let lhs = symbol(&q.adjoint(), &c).unwrap();
            let rhs = symbol(&q, &c).unwrap().conj();
            assert!(lhs.max_abs_diff(&rhs) < 1e-13);
            // mean equals normalized trace
            assert!((symbol(&q, &c).unwrap().mean() - q.trace() / (n + 1) as f64).norm() < 1e-13);
        }
    }

    #[test]
    fn inverse_of_scaled_harmonic_is_basis_element() {
        let n = 5;
        let c = CharFamily::standard_berezin().char_numbers(n).unwrap();
        let f = HarmonicCoeffs::unit(n, 3, -2).unwrap().scale(Complex64::new(c[3], 0.0));
        let p = inverse_symbol(&f, &c).unwrap();
        let want = coupled_basis(n, 3, -2).unwrap();
        let want = OperatorMatrix { n, entries: want.entries * Complex64::new(6f64.sqrt(), 0.0) };
        assert!(p.max_abs_diff(&want) < 1e-13);
    }

    #[test]
    fn berezin_projector_symbol_closed_form() {
        let c = CharFamily::standard_berezin().char_numbers(3).unwrap();
        let f = projector_symbol(3, 1, &c).unwrap();
        assert!((f.eval(0.5) - 0.421875).abs() < 1e-14);
        for n in [1usize, 4, 10] {
            let c = CharFamily::standard_berezin().char_numbers(n).unwrap();
            let f = projector_symbol(n, 1, &c).unwrap();
            for &z in &[-0.7, 0.1, 0.9] {
                assert!((f.eval(z) - ((1.0 + z) / 2.0).powi(n as i32)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn projector_symbol_matches_matrix_path_and_reflects() {
        for fam in [CharFamily::standard_sw(), CharFamily::standard_toeplitz(), CharFamily::alternate_berezin()] {
            for n in [2usize, 7] {
                let c = fam.char_numbers(n).unwrap();
                for k in 1..=n + 1 {
                    let f = projector_symbol(n, k, &c).unwrap();
                    let full = symbol(&OperatorMatrix::projector(n, k).unwrap(), &c).unwrap();
                    assert!(HarmonicCoeffs::from_legendre(n, &f).max_abs_diff(&full) < 1e-13);
                    assert!((f.a[0] - 1.0 / (n + 1) as f64).abs() < 1e-15);
                    let g = projector_symbol(n, n + 2 - k, &c).unwrap();
                    for &z in &[-0.6, 0.2, 0.85] {
                        assert!((f.eval(z) - g.eval(-z)).abs() < 1e-13);
                    }
                }
            }
        }
        assert!(projector_symbol(3, 0, &[1.0; 4]).is_err());
        assert!(projector_symbol(3, 5, &[1.0; 4]).is_err());
    }

    #[test]
    fn diagonal_symbol_is_linear_in_projectors() {
        let n = 5;
        let c = CharFamily::standard_sw().char_numbers(n).unwrap();
        let d = [0.3, -1.0, 2.0, 0.0, 0.5, 1.5];
        let f = diagonal_symbol(&d, &c).unwrap();
        let full = symbol(&OperatorMatrix::diagonal(&d).unwrap(), &c).unwrap();
        assert!(HarmonicCoeffs::from_legendre(n, &f).max_abs_diff(&full) < 1e-13);
    }

    #[test]
    fn twisted_product_unit_associativity_and_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [3usize, 8, 12] {
            for fam in [CharFamily::standard_sw(), CharFamily::standard_berezin()] {
                let c = fam.char_numbers(n).unwrap();
                let rand_coeffs = |rng: &mut ChaCha8Rng| {
                    let mut f = HarmonicCoeffs::zeros(n);
                    for v in f.a.iter_mut() {
                        *v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    }
                    f
                };
                let (f, g, h) = (rand_coeffs(&mut rng), rand_coeffs(&mut rng), rand_coeffs(&mut rng));
                let one = HarmonicCoeffs::one(n);
                assert!(twisted_product(&one, &f, &c).unwrap().max_abs_diff(&f) < 1e-10);
                assert!(twisted_product(&f, &one, &c).unwrap().max_abs_diff(&f) < 1e-10);
                let left = twisted_product(&twisted_product(&f, &g, &c).unwrap(), &h, &c).unwrap();
                let right = twisted_product(&f, &twisted_product(&g, &h, &c).unwrap(), &c).unwrap();
                let scale = left.a.iter().map(|z| z.norm()).fold(1.0, f64::max);
                assert!(left.max_abs_diff(&right) < 1e-9 * scale, "n={n}");
            }
            let c = CharFamily::standard_sw().char_numbers(n).unwrap();
            let y = HarmonicCoeffs::unit(n, 1, 0).unwrap();
            let yy = twisted_product(&y, &y, &c).unwrap();
            assert!((yy.mean() - 1.0 / (c[1] * c[1])).norm() < 1e-12);
        }
    }

    #[test]
    fn product_degree_is_bounded() {
        let n = 10;
        let c = CharFamily::standard_sw().char_numbers(n).unwrap();
        let f = HarmonicCoeffs::unit(n, 2, 1).unwrap();
        let g = HarmonicCoeffs::unit(n, 3, -1).unwrap();
        let h = twisted_product(&f, &g, &c).unwrap();
        for l in 6..=n {
            for m in -(l as i64)..=(l as i64) {
                assert!(h.get(l, m).unwrap().norm() < 1e-12);
            }
        }
    }

    #[test]
    fn shape_errors() {
        let p = OperatorMatrix::identity(3);
        assert!(symbol(&p, &[1.0, 0.5]).is_err());
        assert!(symbol(&p, &[2.0, 0.5, 0.5, 0.5]).is_err());
        assert!(matches!(inverse_symbol(&HarmonicCoeffs::one(3), &[1.0, 0.5, 0.0, 0.5]), Err(Error::Singular { n: 3, l: 2 })));
    }
}
