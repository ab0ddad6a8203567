//! Ordinary least squares and Type II ANOVA.

use serde::Serialize;

use super::design::{build_design, Dataset, DesignMatrix, Term};
use super::linalg::{dot, lstsq, Matrix};
use super::special::f_sf;
use super::StatsError;

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub rss: f64,
    pub df_residual: usize,
    pub residuals: Vec<f64>,
}

pub fn fit_ols(design: &DesignMatrix) -> Result<OlsFit, StatsError> {
    ols(&design.x, &design.y)
}

pub(crate) fn ols(x: &Matrix, y: &[f64]) -> Result<OlsFit, StatsError> {
    let coefficients = lstsq(x, y)?;
    let fitted = x.mul_vec(&coefficients);
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    Ok(OlsFit {
        rss: dot(&residuals, &residuals),
        df_residual: x.rows() - x.cols(),
        coefficients,
        residuals,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnovaRow {
    pub effect: String,
    pub df: usize,
    pub sum_sq: f64,
    pub f: f64,
    pub eta_squared: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnovaTable {
    pub rows: Vec<AnovaRow>,
    pub df_residual: usize,
    pub rss: f64,
    pub ss_total: f64,
}

impl AnovaTable {
    pub fn row(&self, effect: &str) -> Option<&AnovaRow> {
        self.rows.iter().find(|r| r.effect == effect)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("effect,df,sum_sq,F,eta_squared,p\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{},{},{}\n", r.effect, r.df, r.sum_sq, r.f, r.eta_squared, r.p));
        }
        s.push_str(&format!("Residuals,{},{},,,\n", self.df_residual, self.rss));
        s
    }

    pub fn to_text(&self) -> String {
        let w = self.rows.iter().map(|r| r.effect.chars().count()).max().unwrap_or(0).max(9);
        let mut s = format!("{:<w$} {:>5} {:>12} {:>10} {:>8} {:>10}\n", "Effect", "df", "SS", "F", "eta2", "p");
        for r in &self.rows {
            s.push_str(&format!(
                "{:<w$} {:>5} {:>12.5} {:>10.3} {:>8.4} {:>10.3e}\n",
                r.effect, r.df, r.sum_sq, r.f, r.eta_squared, r.p
            ));
        }
        s.push_str(&format!("{:<w$} {:>5} {:>12.5}\n", "Residuals", self.df_residual, self.rss));
        s
    }
}

/// Type II ANOVA over every term of the model `terms`.
///
/// For an effect E the reference model holds all terms that do not contain
/// E; SS(E) is the drop in RSS when E is added to it. F uses the residual
/// mean square of the full model, and η² = SS(E) / SS_total.
pub fn anova_type2(data: &Dataset, terms: &[Term]) -> Result<AnovaTable, StatsError> {
    if data.is_empty() {
        return Err(StatsError::Empty);
    }
    let design = build_design(data, terms);
    let full = fit_ols(&design)?;
    let mean = data.response.iter().sum::<f64>() / data.len() as f64;
    let ss_total: f64 = data.response.iter().map(|y| (y - mean).powi(2)).sum();
    if full.df_residual == 0 {
        return Err(StatsError::NoResidualDf);
    }
    let mse = full.rss / full.df_residual as f64;

    let rss_of = |keep: &dyn Fn(usize) -> bool| -> Result<f64, StatsError> {
        let cols: Vec<usize> = design
            .term_of_column
            .iter()
            .enumerate()
            .filter(|(_, t)| t.map_or(true, keep))
            .map(|(c, _)| c)
            .collect();
        Ok(ols(&design.x.select_cols(&cols), &design.y)?.rss)
    };

    let mut rows = Vec::with_capacity(terms.len());
    for (e, term) in terms.iter().enumerate() {
        let without = rss_of(&|t| !terms[t].contains(term))?;
        let with = rss_of(&|t| t == e || !terms[t].contains(term))?;
        let ss = (without - with).max(0.0);
        let df = term.df(data);
        let f = (ss / df as f64) / mse;
        rows.push(AnovaRow {
            effect: term.label(data),
            df,
            sum_sq: ss,
            f,
            eta_squared: if ss_total > 0.0 { ss / ss_total } else { 0.0 },
            p: f_sf(f, df as f64, full.df_residual as f64),
        });
    }
    Ok(AnovaTable {
        rows,
        df_residual: full.df_residual,
        rss: full.rss,
        ss_total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::study_stats::design::{full_factorial, Factor};

    #[test]
    fn one_way_two_groups() {
        let g = Factor::from_labels("G", &["a", "a", "a", "b", "b", "b"]);
        let d = Dataset::new(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], vec![g]).unwrap();
        let t = anova_type2(&d, &[Term::new(vec![0])]).unwrap();
        let r = &t.rows[0];
        assert_eq!((r.df, t.df_residual), (1, 4));
        assert!((r.sum_sq - 13.5).abs() < 1e-10);
        assert!((t.rss - 4.0).abs() < 1e-10);
        assert!((r.f - 13.5).abs() < 1e-8);
        assert!((r.eta_squared - 13.5 / 17.5).abs() < 1e-12);
        assert!((r.p - 0.021311641128756725847).abs() < 1e-10);
    }

    #[test]
    fn intercept_only_and_exact_fit() {
        let d = Dataset::new(vec![1.0, 2.0, 6.0], vec![]).unwrap();
        let fit = fit_ols(&build_design(&d, &[])).unwrap();
        assert!((fit.coefficients[0] - 3.0).abs() < 1e-12);
        assert!((fit.rss - 14.0).abs() < 1e-12);
        assert_eq!(fit.df_residual, 2);

        let g = Factor::from_labels("G", &["a", "b", "a", "b"]);
        let d = Dataset::new(vec![0.0, 1.0, 0.0, 1.0], vec![g]).unwrap();
        let fit = fit_ols(&build_design(&d, &[Term::new(vec![0])])).unwrap();
        assert!(fit.coefficients[0].abs() < 1e-12 && (fit.coefficients[1] - 1.0).abs() < 1e-12);
        assert!(fit.rss < 1e-24);
    }

    #[test]
    fn balanced_main_effects_match_sequential() {
        // 3×2 balanced with replication: Type II main-effect SS equal the
        // classical between-group sums of squares.
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut y = Vec::new();
        let vals = [3.1, 4.2, 5.0, 2.2, 6.3, 7.7, 1.1, 0.4, 9.9, 3.3, 4.4, 5.5];
        for (i, v) in vals.iter().enumerate() {
            a.push(["x", "y", "z"][i % 3]);
            b.push(["p", "q"][(i / 3) % 2]);
            y.push(*v);
        }
        let d = Dataset::new(y.clone(), vec![Factor::from_labels("A", &a), Factor::from_labels("B", &b)]).unwrap();
        let t = anova_type2(&d, &full_factorial(&[0, 1])).unwrap();
        let grand = y.iter().sum::<f64>() / 12.0;
        let between = |labels: &[&str]| {
            let mut groups: std::collections::BTreeMap<&str, Vec<f64>> = Default::default();
            for (l, v) in labels.iter().zip(&y) {
                groups.entry(l).or_default().push(*v);
            }
            groups
                .values()
                .map(|g| g.len() as f64 * (g.iter().sum::<f64>() / g.len() as f64 - grand).powi(2))
                .sum::<f64>()
        };
        assert!((t.rows[0].sum_sq - between(&a)).abs() < 1e-9);
        assert!((t.rows[1].sum_sq - between(&b)).abs() < 1e-9);
        let explained: f64 = t.rows.iter().map(|r| r.sum_sq).sum();
        assert!(explained + t.rss <= t.ss_total + 1e-9);
    }
}
