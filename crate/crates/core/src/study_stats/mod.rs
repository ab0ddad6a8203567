//! Analysis of forced-choice perceptual study data.
//!
//! Trials are averaged into per-subject selection proportions, which are
//! fitted by OLS with subject fixed effects and the full Representation ×
//! Distance × LoD × Mode factorial and summarized by a Type II ANOVA. The
//! same cells, kept as binomial counts, feed a logit GLM whose terms are
//! tested by likelihood ratios against reduced models.
//!
//! Factors use treatment coding with the first level as reference. Tail
//! probabilities come from the regularized incomplete beta and gamma
//! functions in [`special`].

mod anova;
mod design;
mod glm;
mod linalg;
pub mod special;
mod trials;

pub use anova::{anova_type2, fit_ols, AnovaRow, AnovaTable, OlsFit};
pub use design::{build_design, full_factorial, Dataset, DesignMatrix, Factor, Term};
pub use glm::{
    binomial_deviance, fit_logit_glm, lr_omnibus, lr_rows_to_csv, lr_rows_to_text, lr_test, GlmFit, LrRow, LrTest,
    MAX_ITERATIONS, SEPARATION_LIMIT, TOLERANCE,
};
pub use linalg::{lstsq, rank_of, Matrix};
pub use trials::{
    parse_trials, proportions_to_csv, selection_proportions, study_dataset, study_terms, trials_to_csv, Mode,
    ProportionRow, TrialRecord, FACTOR_NAMES, REPRESENTATION_LEVELS,
};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum StatsError {
    #[error("no data")]
    Empty,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("design has rank {rank} but {cols} columns")]
    RankDeficient { rank: usize, cols: usize },
    #[error("model leaves no residual degrees of freedom")]
    NoResidualDf,
    #[error("weighted least-squares system is singular")]
    Singular,
    #[error("separation: coefficient {column} reached {value}")]
    Separation { column: usize, value: f64 },
    #[error("fit did not converge")]
    NotConverged,
    #[error("negative likelihood ratio {0}; models are not nested or did not converge")]
    NegativeLr(f64),
    #[error("trials line {line}: {reason}")]
    Trials { line: usize, reason: String },
}

/// Everything the `analyze` workflow reports.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyAnalysis {
    pub proportions: Vec<ProportionRow>,
    pub anova: AnovaTable,
    /// LR omnibus rows, or the reason the GLM could not be fitted.
    pub lr: Result<Vec<LrRow>, StatsError>,
}

/// Run proportions, the Type II ANOVA over the factorial effects, and LR
/// omnibus tests for the factorial effects.
pub fn analyze(trials: &[TrialRecord]) -> Result<StudyAnalysis, StatsError> {
    let proportions = selection_proportions(trials);
    let (data, successes, counts) = study_dataset(&proportions)?;
    let mut terms = study_terms();
    // a single subject contributes no fixed-effect columns
    if data.factors[0].levels.len() < 2 {
        terms.remove(0);
    }
    let mut anova = anova_type2(&data, &terms)?;
    anova.rows.retain(|r| r.effect != FACTOR_NAMES[0]);
    let tested: Vec<Term> = terms.iter().filter(|t| !t.factors().contains(&0)).cloned().collect();
    let lr = lr_omnibus(&data, &successes, &counts, &terms, &tested).map(|(_, rows)| rows);
    Ok(StudyAnalysis { proportions, anova, lr })
}
