//! Binomial logit GLM by iteratively reweighted least squares, and
//! likelihood-ratio tests between nested fits.

use serde::Serialize;

use super::design::{build_design, Dataset, Term};
use super::linalg::{lstsq, Matrix};
use super::special::chi2_sf;
use super::StatsError;

pub const TOLERANCE: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 50;
/// Coefficients beyond this magnitude signal (quasi-)complete separation.
pub const SEPARATION_LIMIT: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlmFit {
    pub coefficients: Vec<f64>,
    pub deviance: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Deviance after each accepted iteration.
    pub deviance_trace: Vec<f64>,
}

impl GlmFit {
    pub fn n_params(&self) -> usize {
        self.coefficients.len()
    }
}

fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

/// Binomial deviance of fitted probabilities `p`.
pub fn binomial_deviance(successes: &[f64], trials: &[f64], p: &[f64]) -> f64 {
    let mut d = 0.0;
    for ((&y, &n), &pi) in successes.iter().zip(trials).zip(p) {
        if n == 0.0 {
            continue;
        }
        let mu = n * pi;
        d += xlogy(y, y / mu) + xlogy(n - y, (n - y) / (n - mu));
    }
    (2.0 * d).max(0.0)
}

fn logistic(eta: f64) -> f64 {
    crate::splat_lod::sigmoid(eta)
}

/// Fit `logit P(success) = x β` to aggregated binomial counts; binary
/// trials are the case `trials[i] = 1`.
///
/// Iterates until the relative deviance change drops below 1e-8 or after
/// 50 iterations; a step that raises the deviance is halved until it does
/// not.
pub fn fit_logit_glm(x: &Matrix, successes: &[f64], trials: &[f64]) -> Result<GlmFit, StatsError> {
    let n = x.rows();
    if successes.len() != n || trials.len() != n {
        return Err(StatsError::Dimension(format!(
            "{} successes and {} trials for {n} rows",
            successes.len(),
            trials.len()
        )));
    }
    for (&y, &t) in successes.iter().zip(trials) {
        if !(t >= 0.0 && y >= 0.0 && y <= t) {
            return Err(StatsError::Dimension(format!("{y} successes out of {t} trials")));
        }
    }
    let rows: Vec<usize> = (0..n).filter(|&i| trials[i] > 0.0).collect();
    if rows.is_empty() {
        return Err(StatsError::Empty);
    }
    let x = {
        let mut m = Matrix::zeros(rows.len(), x.cols());
        for (r, &i) in rows.iter().enumerate() {
            for j in 0..x.cols() {
                m.set(r, j, x.get(i, j));
            }
        }
        m
    };
    let y: Vec<f64> = rows.iter().map(|&i| successes[i]).collect();
    let t: Vec<f64> = rows.iter().map(|&i| trials[i]).collect();

    // start from smoothed observed proportions
    let mut eta: Vec<f64> = y
        .iter()
        .zip(&t)
        .map(|(&y, &t)| {
            let m = (y + 0.5) / (t + 1.0);
            (m / (1.0 - m)).ln()
        })
        .collect();
    let mut beta: Option<Vec<f64>> = None;
    let mut deviance = f64::INFINITY;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let p: Vec<f64> = eta.iter().map(|&e| logistic(e)).collect();
        let w: Vec<f64> = p.iter().zip(&t).map(|(&p, &t)| (t * p * (1.0 - p)).max(1e-300)).collect();
        let z: Vec<f64> = (0..eta.len())
            .map(|i| eta[i] + (y[i] - t[i] * p[i]) / w[i])
            .collect();
        let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
        let xw = x.scale_rows(&sw);
        let zw: Vec<f64> = z.iter().zip(&sw).map(|(a, b)| a * b).collect();
        let target = lstsq(&xw, &zw).map_err(|e| match e {
            StatsError::RankDeficient { .. } => StatsError::Singular,
            other => other,
        })?;

        let mut step = target.clone();
        let mut new_eta = x.mul_vec(&step);
        let mut new_dev = binomial_deviance(&y, &t, &new_eta.iter().map(|&e| logistic(e)).collect::<Vec<_>>());
        if let Some(old) = &beta {
            let mut halvings = 0;
            while !(new_dev <= deviance * (1.0 + 1e-12)) && halvings < 30 {
                for (s, o) in step.iter_mut().zip(old) {
                    *s = (*s + o) / 2.0;
                }
                new_eta = x.mul_vec(&step);
                new_dev = binomial_deviance(&y, &t, &new_eta.iter().map(|&e| logistic(e)).collect::<Vec<_>>());
                halvings += 1;
            }
            if !(new_dev <= deviance * (1.0 + 1e-12)) {
                break;
            }
        }
        if let Some(c) = step.iter().position(|b| b.abs() > SEPARATION_LIMIT) {
            return Err(StatsError::Separation { column: c, value: step[c] });
        }
        let change = (deviance - new_dev).abs() / (new_dev.abs() + 0.1);
        let had_beta = beta.is_some();
        beta = Some(step);
        eta = new_eta;
        deviance = new_dev;
        trace.push(new_dev);
        if had_beta && change < TOLERANCE {
            converged = true;
            break;
        }
    }
    Ok(GlmFit {
        coefficients: beta.unwrap_or_default(),
        deviance,
        converged,
        iterations,
        deviance_trace: trace,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LrTest {
    pub lr: f64,
    pub df: usize,
    pub p: f64,
}

/// Likelihood-ratio test of `reduced` nested in `full`.
pub fn lr_test(full: &GlmFit, reduced: &GlmFit, df_diff: usize) -> Result<LrTest, StatsError> {
    if !full.converged || !reduced.converged {
        return Err(StatsError::NotConverged);
    }
    let lr = reduced.deviance - full.deviance;
    let tol = 1e-6 * full.deviance.abs().max(1.0);
    if lr < -tol {
        return Err(StatsError::NegativeLr(lr));
    }
    let lr = lr.max(0.0);
    let p = if df_diff == 0 || lr == 0.0 { 1.0 } else { chi2_sf(lr, df_diff as f64) };
    Ok(LrTest { lr, df: df_diff, p })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LrRow {
    pub effect: String,
    pub lr: f64,
    pub df: usize,
    pub p: f64,
}

/// Omnibus LR test per term: the full model against the model without the
/// term and every term containing it. `df` is the parameter-count
/// difference between the two.
pub fn lr_omnibus(
    data: &Dataset,
    successes: &[f64],
    trials: &[f64],
    terms: &[Term],
    tested: &[Term],
) -> Result<(GlmFit, Vec<LrRow>), StatsError> {
    let design = build_design(data, terms);
    let full = fit_logit_glm(&design.x, successes, trials)?;
    let mut rows = Vec::new();
    for effect in tested {
        let cols: Vec<usize> = design
            .term_of_column
            .iter()
            .enumerate()
            .filter(|(_, t)| t.map_or(true, |t| !terms[t].contains(effect)))
            .map(|(c, _)| c)
            .collect();
        let reduced = fit_logit_glm(&design.x.select_cols(&cols), successes, trials)?;
        let t = lr_test(&full, &reduced, design.x.cols() - cols.len())?;
        rows.push(LrRow {
            effect: effect.label(data),
            lr: t.lr,
            df: t.df,
            p: t.p,
        });
    }
    Ok((full, rows))
}

pub fn lr_rows_to_csv(rows: &[LrRow]) -> String {
    let mut s = String::from("effect,LR,df,p\n");
    for r in rows {
        s.push_str(&format!("{},{},{},{}\n", r.effect, r.lr, r.df, r.p));
    }
    s
}

pub fn lr_rows_to_text(rows: &[LrRow]) -> String {
    let w = rows.iter().map(|r| r.effect.chars().count()).max().unwrap_or(0).max(6);
    let mut s = format!("{:<w$} {:>10} {:>5} {:>10}\n", "Effect", "LR", "df", "p");
    for r in rows {
        s.push_str(&format!("{:<w$} {:>10.3} {:>5} {:>10.3e}\n", r.effect, r.lr, r.df, r.p));
    }
    s
}
