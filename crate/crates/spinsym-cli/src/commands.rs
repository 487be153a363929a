//! One function per subcommand, each turning parsed arguments into a
//! [`Report`].

use clap::Args;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use spinsym::catalog::{classify, Verdict};
use spinsym::ground::{apply_j3_operator, convergence_diagnostics, upper_bounded_check, FourierState, StateSequence};
use spinsym::localization::{
    bound_check, edmonds_check, localization_error_with, moment_sweep, mu_analytic_suite, rho_eval, two_sided_bound_check,
    BoundReport, LocalizationOutcome,
};
use spinsym::quantization::{asymptotic_norm_report, classical_expectation_with, quantize, EXPECTATION_TOL};
use spinsym::spin_algebra::Precision;
use spinsym::symbols::{poisson_diagnostic, twisted_product, HarmonicCoeffs, SphereGrid};

use crate::config::{
    parse_family, parse_function, parse_grid, parse_k_rule, parse_orientation, pi_rule, ConfigError,
};
use crate::output::{num, opt_num, Report, Table};
use crate::RunError;

fn verdict_value(v: Verdict) -> Value {
    match v {
        Verdict::True => json!(true),
        Verdict::False => json!(false),
        Verdict::Inconclusive => json!("inconclusive"),
    }
}

#[derive(Args, Debug, Serialize)]
pub struct CharnumsArgs {
    /// Family: short name, `dual:<name>` or JSON.
    #[arg(long)]
    pub family: String,
    /// Levels: `start:stop:x2` or a comma list.
    #[arg(long)]
    pub ngrid: String,
}

pub fn charnums(a: &CharnumsArgs, precision: Precision) -> Result<Report, RunError> {
    let family = parse_family(&a.family)?;
    let grid = parse_grid(&a.ngrid)?;
    let mut table = Table::new(&["n", "l", "c_l^n", "exact (c_l^n)^2 with sign"]);
    for &n in &grid {
        let row = family.char_numbers(n)?;
        for (l, c) in row.iter().enumerate() {
            let exact = if precision.is_exact_at(n) { family.exact(n, l)?.map(|e| e.signed_square().to_string()) } else { None };
            table.push(vec![n.to_string(), l.to_string(), num(*c), exact.unwrap_or_default()]);
        }
    }
    let mut report = Report::new(table);
    report.set("family", family.name());
    Ok(report)
}

#[derive(Args, Debug, Serialize)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub ngrid: String,
    /// Tolerance for the limit verdicts.
    #[arg(long, default_value_t = 1e-2)]
    pub tol: f64,
}

pub fn classify_cmd(a: &ClassifyArgs) -> Result<Report, RunError> {
    let family = parse_family(&a.family)?;
    let grid = parse_grid(&a.ngrid)?;
    let r = classify(&family, &grid, a.tol)?;
    let mut table = Table::new(&[
        "n",
        "isometric",
        "positivity bound",
        "mapping positive",
        "positive dual",
        "min kernel weight",
        "min dual kernel weight",
        "exact weights",
    ]);
    let flag = |b: Option<bool>| b.map(|v| v.to_string()).unwrap_or_else(|| "undecided".into());
    for lv in &r.levels {
        table.push(vec![
            lv.n.to_string(),
            lv.isometric.to_string(),
            lv.positivity_bound.to_string(),
            flag(lv.mapping_positive),
            flag(lv.positive_dual),
            opt_num(lv.min_weight),
            opt_num(lv.min_dual_weight),
            lv.exact_weights.to_string(),
        ]);
    }
    let mut report = Report::new(table);
    report.set("family", &r.family);
    for (key, v) in [
        ("isometric", &r.isometric),
        ("positivity_bound", &r.positivity_bound),
        ("mapping_positive", &r.mapping_positive),
        ("positive_dual", &r.positive_dual),
        ("limiting", &r.limiting),
        ("poisson", &r.poisson),
        ("anti_poisson", &r.anti_poisson),
        ("quasi_classical", &r.quasi_classical),
    ] {
        report.set(key, verdict_value(v.verdict));
        report.set(&format!("{key}_evidence"), &v.evidence);
    }
    report.set("warnings", &r.warnings);
    Ok(report)
}

#[derive(Args, Debug, Serialize)]
pub struct RhoArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub n: usize,
    /// Projector index, 1 ≤ k ≤ n+1.
    #[arg(long)]
    pub k: usize,
    /// Number of equally spaced sample points on [−1, 1].
    #[arg(long, default_value_t = 201)]
    pub points: usize,
}

pub fn rho(a: &RhoArgs) -> Result<Report, RunError> {
    let family = parse_family(&a.family)?;
    if a.points < 2 {
        return Err(ConfigError("need at least 2 sample points".into()).into());
    }
    let zs: Vec<f64> = (0..a.points).map(|i| -1.0 + 2.0 * i as f64 / (a.points - 1) as f64).collect();
    let values = zs.par_iter().map(|&z| rho_eval(a.n, a.k, &family, z)).collect::<spinsym::Result<Vec<f64>>>()?;
    let mut table = Table::new(&["z", "rho_k(z)"]);
    for (z, v) in zs.iter().zip(&values) {
        table.push(vec![num(*z), num(*v)]);
    }
    let m = spinsym::localization::moments(a.n, a.k, &family)?;
    let mut report = Report::new(table);
    report.set("family", family.name());
    report.set("mean", m.mu);
    report.set("variance", m.sigma2);
    report.set("min_value", values.iter().copied().fold(f64::INFINITY, f64::min));
    Ok(report)
}

/// Options shared by the sweeps along an r-convergent projector sequence.
#[derive(Args, Debug, Serialize)]
pub struct SequenceArgs {
    #[arg(long)]
    pub family: String,
    /// Limit of k_n/n.
    #[arg(long)]
    pub r: f64,
    #[arg(long)]
    pub ngrid: String,
    /// How k_n is rounded: nearest, clamped, floor, ceil or sqrt-shift.
    #[arg(long, default_value = "nearest")]
    pub k_rule: String,
}

#[derive(Args, Debug, Serialize)]
pub struct MomentsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub seq: SequenceArgs,
    /// localize (target 1−2r) or anti (target 2r−1).
    #[arg(long, default_value = "localize")]
    pub orientation: String,
    #[arg(long, default_value_t = 1e-2)]
    pub tol: f64,
}

pub fn moments_cmd(a: &MomentsArgs) -> Result<Report, RunError> {
    let family = parse_family(&a.seq.family)?;
    let rule = pi_rule(a.seq.r, parse_k_rule(&a.seq.k_rule)?)?;
    let grid = parse_grid(&a.seq.ngrid)?;
    let orientation = parse_orientation(&a.orientation)?;
    let sweep = moment_sweep(&family, &rule, orientation, &grid, a.tol)?;
    let mut table = Table::new(&["n", "k", "mu", "sigma^2", "|mu - z0|"]);
    for r in &sweep.rows {
        table.push(vec![
            r.n.to_string(),
            r.k.to_string(),
            num(r.mu),
            num(r.sigma2),
            num((r.mu - sweep.verdict.z0).abs()),
        ]);
    }
    let mut report = Report::new(table);
    report.set("family", family.name());
    report.set("verdict", &sweep.verdict);
    Ok(report)
}

#[derive(Args, Debug, Serialize)]
pub struct LocalizeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub seq: SequenceArgs,
    /// Test function: exp, exp:S, pole:C, p<L>, poly:a0,a1,..., gaussian, cos-pi, reflect:<f> or JSON.
    #[arg(long)]
    pub f: String,
    #[arg(long, default_value = "localize")]
    pub orientation: String,
    /// Truncate the Legendre sum at this degree.
    #[arg(long)]
    pub lmax: Option<usize>,
    /// Final error below which a decreasing tail counts as localizing.
    #[arg(long, default_value_t = 5e-3)]
    pub tol: f64,
}

/// "localizes" when the last three errors do not increase and the last is
/// below `tol`; "does-not-localize" when the last three strictly increase.
fn localization_verdict(errors: &[f64], tol: f64) -> &'static str {
    let tail = &errors[errors.len().saturating_sub(3)..];
    if tail.len() < 3 {
        return "inconclusive";
    }
    if tail.windows(2).all(|w| w[1] <= w[0]) && tail[2] < tol {
        "localizes"
    } else if tail.windows(2).all(|w| w[1] > w[0]) {
        "does-not-localize"
    } else {
        "inconclusive"
    }
}

pub fn localize(a: &LocalizeArgs, precision: Precision) -> Result<Report, RunError> {
    let family = parse_family(&a.seq.family)?;
    let rule = pi_rule(a.seq.r, parse_k_rule(&a.seq.k_rule)?)?;
    let grid = parse_grid(&a.seq.ngrid)?;
    let f = parse_function(&a.f)?;
    let orientation = parse_orientation(&a.orientation)?;
    let rows = grid
        .par_iter()
        .map(|&n| localization_error_with(&family, &rule, orientation, &f, n, a.lmax, precision))
        .collect::<spinsym::Result<Vec<LocalizationOutcome>>>()?;
    let mut table = Table::new(&["n", "k", "z0", "integral of f rho_k", "f(z0)", "error", "truncation bound"]);
    for o in &rows {
        table.push(vec![
            o.n.to_string(),
            o.k.to_string(),
            num(o.z0),
            num(o.integral),
            num(o.target),
            num(o.error),
            opt_num(o.truncation_bound),
        ]);
    }
    let errors: Vec<f64> = rows.iter().map(|o| o.error).collect();
    let warnings: Vec<String> = rows.iter().flat_map(|o| o.warnings.iter().map(move |w| format!("n = {}: {w}", o.n))).collect();
    let mut report = Report::new(table);
    report.set("family", family.name());
    report.set("verdict", localization_verdict(&errors, a.tol));
    report.set("final_error", errors[errors.len() - 1]);
    report.set("warnings", warnings);
    Ok(report)
}

#[derive(Args, Debug, Serialize)]
pub struct EdmondsArgs {
    /// Legendre degree l ≥ 1.
    #[arg(long)]
    pub l: usize,
    #[arg(long)]
    pub r: f64,
    #[arg(long)]
    pub ngrid: String,
    #[arg(long, default_value = "nearest")]
    pub k_rule: String,
}

pub fn edmonds(a: &EdmondsArgs) -> Result<Report, RunError> {
    let rule = pi_rule(a.r, parse_k_rule(&a.k_rule)?)?;
    let grid = parse_grid(&a.ngrid)?;
    let t = edmonds_check(a.l, &rule, &grid)?;
    let mut table = Table::new(&["n", "k", "scaled CG (float)", "scaled CG (exact)", "P_l(1-2r)", "error"]);
    for r in &t.rows {
        table.push(vec![r.n.to_string(), r.k.to_string(), num(r.lhs), opt_num(r.exact_lhs), num(r.target), num(r.error)]);
    }
    let mut report = Report::new(table);
    report.set("converging", t.converging);
    report.set("path_discrepancy", t.path_discrepancy);
    Ok(report)
}

#[derive(Args, Debug, Serialize)]
pub struct MuAnalyticArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub seq: SequenceArgs,
    /// Bernstein ellipse parameter μ > 1.
    #[arg(long)]
    pub mu: f64,
    /// Extra Runge poles c (|c| > 1); repeatable.
    #[arg(long = "pole")]
    pub poles: Vec<f64>,
    #[arg(long, default_value = "localize")]
    pub orientation: String,
}

pub fn mu_analytic(a: &MuAnalyticArgs) -> Result<Report, RunError> {
    let family = parse_family(&a.seq.family)?;
    let rule = pi_rule(a.seq.r, parse_k_rule(&a.seq.k_rule)?)?;
    let grid = parse_grid(&a.seq.ngrid)?;
    let orientation = parse_orientation(&a.orientation)?;
    let r = mu_analytic_suite(&family, a.mu, &rule, orientation, &grid, &a.poles)?;
    let mut table = Table::new(&["pole c", "Bernstein parameter", "in class", "n", "error"]);
    for row in &r.rows {
        for (n, e) in r.n_grid.iter().zip(&row.errors) {
            table.push(vec![num(row.c), num(row.bernstein), row.in_class.to_string(), n.to_string(), num(*e)]);
        }
    }
    let poles: Vec<Value> =
        r.rows.iter().map(|p| json!({"c": p.c, "in_class": p.in_class, "decreasing": p.decreasing})).collect();
    let mut report = Report::new(table);
    report.set("family", &r.family);
    report.set("in_class_decreasing", r.in_class_decreasing());
    report.set("poles", poles);
    Ok(report)
}

#[derive(Args, Debug, Serialize)]
pub struct BoundCheckArgs {
    #[arg(long)]
    pub family: String,
    /// Degree d of the upper bound.
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub nmax: usize,
    /// Also scan the lower bound of this degree.
    #[arg(long)]
    pub lower_d: Option<usize>,
}

pub fn bound(a: &BoundCheckArgs) -> Result<Report, RunError> {
    let family = parse_family(&a.family)?;
    let reports: Vec<(&str, BoundReport)> = match a.lower_d {
        None => vec![("upper", bound_check(&family, a.d, a.nmax)?)],
        Some(d1) => {
            let (lower, upper) = two_sided_bound_check(&family, d1, a.d, a.nmax)?;
            vec![("lower", lower), ("upper", upper)]
        }
    };
    let mut table = Table::new(&["bound", "d", "n", "ln K (levels up to n)"]);
    let mut summary = Vec::new();
    for (kind, r) in &reports {
        for (n, ln_k) in &r.running {
            table.push(vec![kind.to_string(), r.d.to_string(), n.to_string(), num(*ln_k)]);
        }
        summary.push(json!({"bound": kind, "d": r.d, "ln_k": r.ln_k, "k": r.k, "holds": r.holds}));
    }
    let mut report = Report::new(table);
    report.set("family", family.name());
    report.set("bounds", summary);
    Ok(report)
}

#[derive(Args, Debug, Serialize)]
pub struct QuantizeNormsArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub f: String,
    #[arg(long)]
    pub ngrid: String,
    /// Use the dual quantization.
    #[arg(long)]
    pub dual: bool,
}

pub fn quantize_norms(a: &QuantizeNormsArgs) -> Result<Report, RunError> {
    let family = parse_family(&a.family)?;
    let f = parse_function(&a.f)?;
    let grid = parse_grid(&a.ngrid)?;
    let r = asymptotic_norm_report(&family, &f, &grid, a.dual)?;
    let mut table = Table::new(&["n", "normalized operator norm", "norm of degree-n truncation"]);
    for row in &r.rows {
        table.push(vec![row.n.to_string(), num(row.norm), num(row.truncated_norm)]);
    }
    let mut report = Report::new(table);
    report.set("family", &r.family);
    report.set("dual", r.dual);
    report.set("f_norm", r.f_norm);
    report.set("liminf", r.liminf);
    report.set("limsup", r.limsup);
    report.set("verdict", &r.verdict);
    report.set("final_error", r.final_error);
    Ok(report)
}

#[derive(Args, Debug, Serialize)]
pub struct ExpectationArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub seq: SequenceArgs,
    #[arg(long)]
    pub f: String,
    #[arg(long, default_value_t = EXPECTATION_TOL)]
    pub tol: f64,
}

pub fn expectation(a: &ExpectationArgs) -> Result<Report, RunError> {
    let family = parse_family(&a.seq.family)?;
    let rule = pi_rule(a.seq.r, parse_k_rule(&a.seq.k_rule)?)?;
    let grid = parse_grid(&a.seq.ngrid)?;
    let f = parse_function(&a.f)?;
    let r = classical_expectation_with(&family, &rule, &f, &grid, a.tol)?;
    let mut table = Table::new(&["n", "k", "Re <Pi_k|F~_n>", "Im <Pi_k|F~_n>"]);
    for row in &r.rows {
        table.push(vec![row.n.to_string(), row.k.to_string(), num(row.expectation_re), num(row.expectation_im)]);
    }
    let mut report = Report::new(table);
    report.set("family", &r.family);
    report.set("verdict", r.verdict);
    report.set("limit_estimate", r.limit_estimate);
    report.set("target_localize", r.target_localize);
    report.set("target_anti", r.target_anti);
    report.set("matches", r.matches);
    report.set("warnings", &r.warnings);
    Ok(report)
}

#[derive(Args, Debug, Serialize)]
pub struct TwistedArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub n: usize,
    /// First factor Y_l^m as `l,m`.
    #[arg(long, allow_hyphen_values = true)]
    pub f: String,
    /// Second factor Y_l^m as `l,m`.
    #[arg(long, allow_hyphen_values = true)]
    pub g: String,
}

fn parse_lm(text: &str) -> Result<(usize, i64), ConfigError> {
    let err = || ConfigError(format!("harmonic `{text}`: expected l,m"));
    let (l, m) = text.split_once(',').ok_or_else(err)?;
    Ok((l.trim().parse().map_err(|_| err())?, m.trim().parse().map_err(|_| err())?))
}

pub fn twisted(a: &TwistedArgs) -> Result<Report, RunError> {
    let family = parse_family(&a.family)?;
    let (l1, m1) = parse_lm(&a.f)?;
    let (l2, m2) = parse_lm(&a.g)?;
    let c = family.char_numbers(a.n)?;
    let f = HarmonicCoeffs::unit(a.n, l1, m1)?;
    let g = HarmonicCoeffs::unit(a.n, l2, m2)?;
    let fg = twisted_product(&f, &g, &c)?;
    let gf = twisted_product(&g, &f, &c)?;
    let mut table = Table::new(&["l", "m", "Re (f*g)_lm", "Im (f*g)_lm"]);
    for l in 0..=a.n {
        for m in -(l as i64)..=l as i64 {
            let v = fg.get(l, m)?;
            if v.norm() > 0.0 {
                table.push(vec![l.to_string(), m.to_string(), num(v.re), num(v.im)]);
            }
        }
    }
    let grid = SphereGrid::default();
    let pointwise: Vec<Complex64> = f.eval_grid(&grid).iter().zip(g.eval_grid(&grid)).map(|(x, y)| x * y).collect();
    let sup_product_gap = fg.eval_grid(&grid).iter().zip(&pointwise).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let mut report = Report::new(table);
    report.set("family", family.name());
    report.set("commutator_sup_coeff", fg.max_abs_diff(&gf));
    report.set("sup_gap_to_pointwise_product", sup_product_gap);
    Ok(report)
}

#[derive(Args, Debug, Serialize)]
pub struct PoissonArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub l1: usize,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0)]
    pub m1: i64,
    #[arg(long)]
    pub l2: usize,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0)]
    pub m2: i64,
    #[arg(long)]
    pub ngrid: String,
}

pub fn poisson(a: &PoissonArgs) -> Result<Report, RunError> {
    let family = parse_family(&a.family)?;
    let grid = parse_grid(&a.ngrid)?;
    let r = poisson_diagnostic(a.l1, a.m1, a.l2, a.m2, &family, &grid)?;
    let mut table = Table::new(&["n", "(i) commutator", "(ii) symmetric defect", "(iii) n[f,g] - 2i{f,g}", "(iii') n[f,g] + 2i{f,g}"]);
    for row in &r.rows {
        table.push(vec![
            row.n.to_string(),
            num(row.residual_i),
            num(row.residual_ii),
            num(row.residual_iii),
            num(row.residual_iii_prime),
        ]);
    }
    let (first, last) = (&r.rows[0], &r.rows[r.rows.len() - 1]);
    let mut report = Report::new(table);
    report.set("family", &r.family);
    report.set(
        "ratio_last_to_first",
        json!({
            "i": last.residual_i / first.residual_i,
            "ii": last.residual_ii / first.residual_ii,
            "iii": last.residual_iii / first.residual_iii,
            "iii_prime": last.residual_iii_prime / first.residual_iii_prime,
        }),
    );
    report.set("poisson_sign", if last.residual_iii <= last.residual_iii_prime { "poisson" } else { "anti-poisson" });
    Ok(report)
}

#[derive(Args, Debug, Serialize)]
pub struct GroundSimArgs {
    /// Grid of spins j (integers).
    #[arg(long)]
    pub jgrid: String,
    /// Initial states: flat, basis:M, geometric:Q (α_m ∝ Q^|m|) or random.
    #[arg(long, default_value = "flat")]
    pub state: String,
    /// Apply the quantization of this function at n = 2j to each state.
    #[arg(long)]
    pub f: Option<String>,
    #[arg(long, default_value = "sw")]
    pub family: String,
    #[arg(long)]
    pub dual: bool,
}

fn state_sequence(spec: &str, seed: u64, j_max: usize) -> Result<StateSequence, RunError> {
    let c = Complex64::new;
    let (head, arg) = spec.split_once(':').map_or((spec, None), |(h, a)| (h, Some(a)));
    Ok(match (head, arg) {
        ("flat", None) => StateSequence::new(move |j| FourierState::from_fn(j, |_| c(1.0 / ((2 * j + 1) as f64).sqrt(), 0.0))),
        ("basis", Some(m)) => {
            let m: i64 = m.parse().map_err(|_| ConfigError(format!("state `{spec}`: bad m")))?;
            StateSequence::new(move |j| FourierState::basis(j, m))
        }
        ("geometric", Some(q)) => {
            let q: f64 = q.parse().map_err(|_| ConfigError(format!("state `{spec}`: bad ratio")))?;
            if !(0.0..1.0).contains(&q) {
                return Err(ConfigError(format!("state `{spec}`: ratio must lie in [0, 1)")).into());
            }
            StateSequence::new(move |j| FourierState::from_fn(j, |m| c(q.powi(m.unsigned_abs() as i32), 0.0)))
        }
        ("random", None) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let width = 2 * j_max + 1;
            let draws: Vec<Complex64> = (0..width)
                .map(|i| {
                    let decay = (-((i as f64) - j_max as f64).abs() / 4.0).exp();
                    c(rng.gen_range(-1.0..1.0) * decay, rng.gen_range(-1.0..1.0) * decay)
                })
                .collect();
            StateSequence::new(move |j| FourierState::from_fn(j, |m| draws[(j_max as i64 + m) as usize]))
        }
        _ => return Err(ConfigError(format!("unknown state `{spec}`")).into()),
    })
}

pub fn ground_sim(a: &GroundSimArgs, precision: Precision, seed: u64) -> Result<Report, RunError> {
    let grid = parse_grid(&a.jgrid)?;
    let j_max = *grid.last().expect("grid is nonempty");
    let base = state_sequence(&a.state, seed, j_max)?;
    let family = parse_family(&a.family)?;
    let f = a.f.as_deref().map(parse_function).transpose()?;
    let seq = match &f {
        None => base,
        Some(f) => {
            let (f, family, dual) = (f.clone(), family.clone(), a.dual);
            StateSequence::new(move |j| {
                let op = quantize(&family, &f, 2 * j, dual)?;
                apply_j3_operator(&op, &base.at(j)?, precision)
            })
        }
    };
    let diag = convergence_diagnostics(&seq, &grid)?;
    let mut table = Table::new(&["j", "m", "Re alpha", "Im alpha"]);
    for &j in &grid {
        let s = seq.at(j)?;
        for m in -(j as i64)..=j as i64 {
            let v = s.coeff(m);
            table.push(vec![j.to_string(), m.to_string(), num(v.re), num(v.im)]);
        }
    }
    let mut report = Report::new(table);
    report.set("diagnostics", &diag);
    if let Some(f) = &f {
        let n_grid: Vec<usize> = grid.iter().map(|j| 2 * j).collect();
        let ub = upper_bounded_check(&family, f, &n_grid, a.dual)?;
        report.set("upper_bounded", verdict_value(ub.upper_bounded));
        report.set("norms", &ub.norms);
    }
    Ok(report)
}
