//! Clebsch-Gordan coefficients ⟨j1 m1; j2 m2 | j3 m3⟩ in the Condon-Shortley
//! phase convention, so ⟨j j; j −j | l 0⟩ > 0.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::exact::ExactValue;
use super::factorial::{factorial, ln_factorial};
use super::half_int::HalfInt;
use super::signed_log::SignedLog;
use crate::error::{domain, Result};

/// Largest n for which [`Precision::Auto`] selects the exact path.
pub const AUTO_EXACT_MAX_N: usize = 200;

/// Arithmetic used for Clebsch-Gordan values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Exact,
    Float,
    #[default]
    Auto,
}

impl Precision {
    pub fn is_exact_at(self, n: usize) -> bool {
        match self {
            Precision::Exact => true,
            Precision::Float => false,
            Precision::Auto => n <= AUTO_EXACT_MAX_N,
        }
    }
}

/// Integer factorial arguments of the finite Racah sum, or `None` when the
/// coupling is forbidden.
struct RacahArgs {
    // prefactor numerator factorials and the (j1+j2+j3+1)! denominator
    pre: [i64; 9],
    pre_den: i64,
    two_j3_plus_1: i64,
    // z-sum denominators: z!, (a−z)!, (b−z)!, (c−z)!, (d+z)!, (e+z)!
    a: i64,
    b: i64,
    c: i64,
    d: i64,
    e: i64,
}

fn racah_args(j1: HalfInt, m1: HalfInt, j2: HalfInt, m2: HalfInt, j3: HalfInt, m3: HalfInt) -> Option<RacahArgs> {
    if !(j1.admits(m1) && j2.admits(m2) && j3.admits(m3)) {
        return None;
    }
    if m1 + m2 != m3 {
        return None;
    }
    let (t1, t2, t3) = (j1.twice(), j2.twice(), j3.twice());
    if t3 < (t1 - t2).abs() || t3 > t1 + t2 || (t1 + t2 + t3) % 2 != 0 {
        return None;
    }
    let half = |x: i64| x / 2;
    let (u1, u2, u3) = (m1.twice(), m2.twice(), m3.twice());
    Some(RacahArgs {
        pre: [
            half(t1 + t2 - t3),
            half(t1 - t2 + t3),
            half(-t1 + t2 + t3),
            half(t1 + u1),
            half(t1 - u1),
            half(t2 + u2),
            half(t2 - u2),
            half(t3 + u3),
            half(t3 - u3),
        ],
        pre_den: half(t1 + t2 + t3) + 1,
        two_j3_plus_1: t3 + 1,
        a: half(t1 + t2 - t3),
        b: half(t1 - u1),
        c: half(t2 + u2),
        d: half(t3 - t2 + u1),
        e: half(t3 - t1 - u2),
    })
}

impl RacahArgs {
    fn z_range(&self) -> (i64, i64) {
        let lo = 0.max(-self.d).max(-self.e);
        let hi = self.a.min(self.b).min(self.c);
        (lo, hi)
    }
}

fn fact(k: i64) -> Result<BigInt> {
    Ok(BigInt::from(factorial(k as usize)?))
}

/// Exact Clebsch-Gordan coefficient. Forbidden couplings give exact zero.
pub fn cgc(j1: HalfInt, m1: HalfInt, j2: HalfInt, m2: HalfInt, j3: HalfInt, m3: HalfInt) -> Result<ExactValue> {
    let Some(args) = racah_args(j1, m1, j2, m2, j3, m3) else {
        return Ok(ExactValue::zero());
    };
    let (lo, hi) = args.z_range();
    let mut sum = BigRational::zero();
    for z in lo..=hi {
        let den = fact(z)?
            * fact(args.a - z)?
            * fact(args.b - z)?
            * fact(args.c - z)?
            * fact(args.d + z)?
            * fact(args.e + z)?;
        let num = if z % 2 == 0 { BigInt::from(1) } else { BigInt::from(-1) };
        sum += BigRational::new(num, den);
    }
    if sum.is_zero() {
        return Ok(ExactValue::zero());
    }
    let mut pre_num = BigInt::from(args.two_j3_plus_1);
    for &k in &args.pre {
        pre_num *= fact(k)?;
    }
    let pre = BigRational::new(pre_num, fact(args.pre_den)?);
    let sign = if sum.is_negative() { -1 } else { 1 };
    Ok(ExactValue::new(sign, pre * &sum * &sum))
}

/// Clebsch-Gordan coefficient in double precision: each z-term is formed as
/// exp of a log-factorial combination and the terms are added with
/// Neumaier compensation.
pub fn cgc_f64(j1: HalfInt, m1: HalfInt, j2: HalfInt, m2: HalfInt, j3: HalfInt, m3: HalfInt) -> f64 {
    let Some(args) = racah_args(j1, m1, j2, m2, j3, m3) else {
        return 0.0;
    };
    let lf = |k: i64| ln_factorial(k as usize);
    let ln_pre = 0.5
        * ((args.two_j3_plus_1 as f64).ln() + args.pre.iter().map(|&k| lf(k)).sum::<f64>() - lf(args.pre_den));
    let (lo, hi) = args.z_range();
    let mut acc = NeumaierSum::default();
    for z in lo..=hi {
        let ln_den = lf(z) + lf(args.a - z) + lf(args.b - z) + lf(args.c - z) + lf(args.d + z) + lf(args.e + z);
        let term = (ln_pre - ln_den).exp();
        acc.add(if z % 2 == 0 { term } else { -term });
    }
    acc.total()
}

/// Compensated summation.
#[derive(Default, Clone, Copy, Debug)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

fn check_diag(n: usize, k: usize, l: usize) -> Result<()> {
    if n == 0 {
        return domain("spin level n must be at least 1");
    }
    if k < 1 || k > n + 1 {
        return domain(format!("projector index k = {k} outside 1..={}", n + 1));
    }
    if l > n {
        return domain(format!("l = {l} exceeds n = {n}"));
    }
    Ok(())
}

/// Magnetic label m = j − k + 1 of the k-th standard basis vector.
pub fn magnetic(n: usize, k: usize) -> HalfInt {
    HalfInt::from_twice(n as i64 - 2 * (k as i64 - 1))
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn int_rat(v: BigInt) -> BigRational {
    BigRational::from_integer(v)
}

/// ⟨j m; j −m | l 0⟩ with m = j − k + 1 and j = n/2.
///
/// Uses closed forms for l ∈ {1, 2}, l = n and k = 1, and the Racah sum
/// otherwise.
pub fn cgc_diag(n: usize, k: usize, l: usize) -> Result<ExactValue> {
    check_diag(n, k, l)?;
    let (ni, ki) = (n as i64, k as i64);
    if l == 0 {
        let sign = if (k - 1) % 2 == 0 { 1 } else { -1 };
        return Ok(ExactValue::new(sign, rat(1, ni + 1)));
    }
    if k == 1 {
        return cgc_diag_top(n, l);
    }
    if l == n {
        // (n!)² / ((j+m)! (j−m)! √((2n)!)) with j+m = n−k+1, j−m = k−1
        let num = fact(ni)?.pow(2);
        let den = fact(ni - ki + 1)? * fact(ki - 1)?;
        let r = BigRational::new(num, den);
        return Ok(ExactValue::new(1, &r * &r / int_rat(fact(2 * ni)?)));
    }
    if l == 1 {
        let x = if ki % 2 == 0 { -(ni - 2 * ki + 2) } else { ni - 2 * ki + 2 };
        let sq = rat(3 * x * x, (ni + 2) * (ni + 1) * ni);
        return Ok(ExactValue::new(x.signum() as i8, sq));
    }
    if l == 2 {
        let km = ki - 1;
        let poly = (ni - ki + 1) * (ni - ki) - 4 * km * (ni - ki + 1) + km * (km - 1);
        let x = if km % 2 == 0 { poly } else { -poly };
        let den = (ni - 1) * ni * (ni + 1) * (ni + 2) * (ni + 3);
        return Ok(ExactValue::new(x.signum() as i8, rat(5 * x * x, den)));
    }
    let j = HalfInt::spin(n);
    let m = magnetic(n, k);
    cgc(j, m, j, -m, HalfInt::from_int(l as i64), HalfInt::ZERO)
}

/// ⟨j j; j −j | l 0⟩ = √((2l+1)/(n+1)) · n!√(n+1)/√((n+l+1)!(n−l)!).
fn cgc_diag_top(n: usize, l: usize) -> Result<ExactValue> {
    let num = BigInt::from(2 * l + 1) * fact(n as i64)?.pow(2);
    let den = fact((n + l + 1) as i64)? * fact((n - l) as i64)?;
    Ok(ExactValue::new(1, BigRational::new(num, den)))
}

/// Generic Racah-sum evaluation of ⟨j m; j −m | l 0⟩ without closed-form
/// shortcuts.
pub fn cgc_diag_racah(n: usize, k: usize, l: usize) -> Result<ExactValue> {
    check_diag(n, k, l)?;
    let j = HalfInt::spin(n);
    let m = magnetic(n, k);
    cgc(j, m, j, -m, HalfInt::from_int(l as i64), HalfInt::ZERO)
}

/// Double-precision ⟨j m; j −m | l 0⟩ via [`cgc_f64`].
pub fn cgc_diag_f64(n: usize, k: usize, l: usize) -> Result<f64> {
    check_diag(n, k, l)?;
    let j = HalfInt::spin(n);
    let m = magnetic(n, k);
    Ok(cgc_f64(j, m, j, -m, HalfInt::from_int(l as i64), HalfInt::ZERO))
}

/// All ⟨j m; j −m | l 0⟩ for l = 0..=l_max at fixed (n, k), exactly.
///
/// The values are normalised discrete Chebyshev polynomials on the n+1 grid
/// points: (−1)^{k−1} C_l = t_l(x)/‖t_l‖ with x = n − k + 1, where
/// (l+1) t_{l+1} = (2l+1)(2x−n) t_l − l((n+1)² − l²) t_{l−1}.
pub fn diag_column_exact(n: usize, k: usize, l_max: usize) -> Result<Vec<ExactValue>> {
    check_diag(n, k, l_max)?;
    let big_n = BigInt::from(n + 1);
    let n2 = &big_n * &big_n;
    let y = BigInt::from(2 * (n as i64 - k as i64 + 1) - n as i64);
    let flip = (k - 1) % 2 == 1;
    let mut out = Vec::with_capacity(l_max + 1);
    // running ‖t_l‖² · (2l+1) = N ∏_{i≤l}(N² − i²)
    let mut norm_prod = big_n.clone();
    let mut prev = BigInt::zero();
    let mut cur = BigInt::from(1);
    for l in 0..=l_max {
        if l > 0 {
            let li = BigInt::from(l);
            norm_prod *= &n2 - &li * &li;
            let next = if l == 1 {
                y.clone()
            } else {
                let lm = BigInt::from(l - 1);
                let v = BigInt::from(2 * l - 1) * &y * &cur - &lm * (&n2 - &lm * &lm) * &prev;
                debug_assert!((&v % &li).is_zero());
                v / &li
            };
            prev = std::mem::replace(&mut cur, next);
        }
        let sign = match cur.sign() {
            num_bigint::Sign::Minus => -1,
            num_bigint::Sign::NoSign => 0,
            num_bigint::Sign::Plus => 1,
        } * if flip { -1 } else { 1 };
        let sq = BigRational::new(&cur * &cur * BigInt::from(2 * l + 1), norm_prod.clone());
        out.push(ExactValue::new(sign, sq));
    }
    Ok(out)
}

/// Double-precision column of ⟨j m; j −m | l 0⟩, l = 0..=l_max.
///
/// The orthonormal discrete Chebyshev recurrence is run downward from
/// l = n, seeded by t_{n+1} = 0 (it vanishes on every grid point), and the
/// result is scaled to the known value at l = 0. Upward evaluation loses
/// all accuracy once l passes the turning point of the column.
pub fn diag_column_f64(n: usize, k: usize, l_max: usize) -> Result<Vec<f64>> {
    Ok(diag_column_log(n, k, l_max)?.into_iter().map(SignedLog::to_f64).collect())
}

/// Column of ⟨j m; j −m | l 0⟩ for l = 0..=l_max as sign and log-magnitude.
///
/// Same downward recurrence as [`diag_column_f64`], but every entry keeps the
/// scale it was computed at, so entries far below the f64 range survive.
pub fn diag_column_log(n: usize, k: usize, l_max: usize) -> Result<Vec<SignedLog>> {
    check_diag(n, k, l_max)?;
    let big_n = (n + 1) as f64;
    let n2 = big_n * big_n;
    let y = 2.0 * (n as f64 - k as f64 + 1.0) - n as f64;
    // q_l = ‖t_{l+1}‖² / ‖t_l‖²
    let q = |l: usize| -> f64 {
        let lf = l as f64;
        (n2 - (lf + 1.0) * (lf + 1.0)) * (2.0 * lf + 1.0) / (2.0 * lf + 3.0)
    };
    // true value of entry l is u[l]·e^{off[l]}
    let mut u = vec![0.0; n + 1];
    let mut off = vec![0.0f64; n + 1];
    u[n] = 1.0;
    if n >= 1 {
        let nf = n as f64;
        u[n - 1] = (2.0 * nf + 1.0) * y * q(n - 1).sqrt() / (nf * (n2 - nf * nf));
    }
    const BIG: f64 = 1e250;
    let ln_big = BIG.ln();
    for l in (1..n).rev() {
        let lf = l as f64;
        let ql = q(l);
        let a = (2.0 * lf + 1.0) * y / ((lf + 1.0) * ql.sqrt());
        let b = lf * (n2 - lf * lf) / ((lf + 1.0) * (q(l - 1) * ql).sqrt());
        // u[l+1] may sit at an older scale than u[l]
        let prev = u[l + 1] * (off[l + 1] - off[l]).exp();
        u[l - 1] = (a * u[l] - prev) / b;
        off[l - 1] = off[l];
        if u[l - 1].abs() > BIG {
            u[l - 1] /= BIG;
            off[l - 1] += ln_big;
        }
    }
    let flip: i8 = if (k - 1) % 2 == 1 { -1 } else { 1 };
    let u0_sign: i8 = if u[0] < 0.0 { -1 } else { 1 };
    // Σ_l ⟨j m; j −m | l 0⟩² = 1 fixes the scale
    let ln_mag: Vec<f64> = (0..=n).map(|l| u[l].abs().ln() + off[l]).collect();
    let peak = ln_mag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut norm = NeumaierSum::default();
    for v in &ln_mag {
        norm.add((2.0 * (v - peak)).exp());
    }
    let ln_scale = -(peak + 0.5 * norm.total().ln());
    Ok((0..=l_max)
        .map(|l| {
            if u[l] == 0.0 {
                SignedLog::ZERO
            } else {
                let s = flip * u0_sign * if u[l] < 0.0 { -1 } else { 1 };
                SignedLog::new(s, u[l].abs().ln() + off[l] + ln_scale)
            }
        })
        .collect())
}

/// Column of ⟨j m; j −m | l 0⟩ as doubles at the requested precision.
pub fn diag_column(n: usize, k: usize, l_max: usize, precision: Precision) -> Result<Vec<f64>> {
    if precision.is_exact_at(n) {
        Ok(diag_column_exact(n, k, l_max)?.iter().map(ExactValue::to_f64).collect())
    } else {
        diag_column_f64(n, k, l_max)
    }
}

/// Single ⟨j m; j −m | l 0⟩ as a double at the requested precision.
pub fn diag_value(n: usize, k: usize, l: usize, precision: Precision) -> Result<f64> {
    if precision.is_exact_at(n) {
        Ok(cgc_diag(n, k, l)?.to_f64())
    } else if l == n {
        Ok(ln_diag_top_l(n, k)?.exp())
    } else {
        Ok(diag_column_f64(n, k, n)?[l])
    }
}

/// ln|⟨j m; j −m | n 0⟩| from the single-term closed form.
pub fn ln_diag_top_l(n: usize, k: usize) -> Result<f64> {
    check_diag(n, k, n)?;
    let km = k - 1;
    Ok(2.0 * ln_factorial(n) - ln_factorial(n - km) - ln_factorial(km) - 0.5 * ln_factorial(2 * n))
}
