use crate::error::{domain, Result};

/// Slack allowed outside [−1, 1] before evaluation is refused.
pub const DOMAIN_SLACK: f64 = 1e-9;

fn clamp_arg(z: f64) -> Result<f64> {
    if !z.is_finite() || z.abs() > 1.0 + DOMAIN_SLACK {
        return domain(format!("Legendre argument {z} outside [-1, 1]"));
    }
    Ok(z.clamp(-1.0, 1.0))
}

/// P_l(z) by the three-term recurrence.
pub fn legendre_eval(l: usize, z: f64) -> Result<f64> {
    let z = clamp_arg(z)?;
    Ok(recurrence(l, z, |_, _| {}))
}

/// P_0(z), …, P_l_max(z).
pub fn legendre_all(l_max: usize, z: f64) -> Result<Vec<f64>> {
    let z = clamp_arg(z)?;
    let mut out = vec![0.0; l_max + 1];
    recurrence(l_max, z, |l, v| out[l] = v);
    Ok(out)
}

fn recurrence(l: usize, z: f64, mut sink: impl FnMut(usize, f64)) -> f64 {
    let (mut p0, mut p1) = (1.0, z);
    sink(0, 1.0);
    if l == 0 {
        return 1.0;
    }
    sink(1, z);
    for i in 1..l {
        let fi = i as f64;
        let p2 = ((2.0 * fi + 1.0) * z * p1 - fi * p0) / (fi + 1.0);
        p0 = p1;
        p1 = p2;
        sink(i + 1, p1);
    }
    p1
}

/// P_l(z) and P_l'(z) for |z| < 1.
fn value_and_derivative(l: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for i in 1..l {
        let fi = i as f64;
        let p2 = ((2.0 * fi + 1.0) * z * p1 - fi * p0) / (fi + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let d = l as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss-Legendre nodes and weights on [−1, 1], nodes ascending.
///
/// Newton iteration on P_count from the Tricomi initial guesses.
pub fn gauss_legendre(count: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(count >= 1, "quadrature needs at least one node");
    if count == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let nf = count as f64;
    let mut nodes = vec![0.0; count];
    let mut weights = vec![0.0; count];
    let half = count.div_ceil(2);
    for i in 0..half {
        let theta = std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5);
        let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        for _ in 0..100 {
            let (p, d) = value_and_derivative(count, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = value_and_derivative(count, x);
        let w = 2.0 / ((1.0 - x * x) * d * d);
        nodes[count - 1 - i] = x;
        nodes[i] = -x;
        weights[count - 1 - i] = w;
        weights[i] = w;
    }
    if count % 2 == 1 {
        nodes[count / 2] = 0.0;
    }
    (nodes, weights)
}
