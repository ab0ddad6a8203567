//! Categorical factors, model terms and treatment-coded design matrices.

use super::linalg::Matrix;
use super::StatsError;

/// Categorical factor observed on every row. `codes[i]` indexes `levels`.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub name: String,
    pub levels: Vec<String>,
    pub codes: Vec<usize>,
}

impl Factor {
    pub fn new(name: impl Into<String>, levels: Vec<String>, codes: Vec<usize>) -> Result<Self, StatsError> {
        let name = name.into();
        if let Some(&c) = codes.iter().find(|&&c| c >= levels.len()) {
            return Err(StatsError::Dimension(format!("factor {name} code {c} has no level")));
        }
        Ok(Self { name, levels, codes })
    }

    /// Factor whose levels are the sorted unique labels.
    pub fn from_labels<S: AsRef<str>>(name: impl Into<String>, labels: &[S]) -> Self {
        let mut levels: Vec<String> = labels.iter().map(|s| s.as_ref().to_string()).collect();
        levels.sort();
        levels.dedup();
        let codes = labels
            .iter()
            .map(|s| levels.binary_search_by(|l| l.as_str().cmp(s.as_ref())).expect("level"))
            .collect();
        Self {
            name: name.into(),
            levels,
            codes,
        }
    }
}

/// Response plus factors, one entry per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub response: Vec<f64>,
    pub factors: Vec<Factor>,
}

impl Dataset {
    pub fn new(response: Vec<f64>, factors: Vec<Factor>) -> Result<Self, StatsError> {
        for f in &factors {
            if f.codes.len() != response.len() {
                return Err(StatsError::Dimension(format!(
                    "factor {} has {} rows, response has {}",
                    f.name,
                    f.codes.len(),
                    response.len()
                )));
            }
        }
        Ok(Self { response, factors })
    }

    pub fn len(&self) -> usize {
        self.response.len()
    }

    pub fn is_empty(&self) -> bool {
        self.response.is_empty()
    }

    pub fn factor_index(&self, name: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.name == name)
    }
}

/// Model term: a main effect (one factor) or an interaction. Holds sorted
/// factor indices into a [`Dataset`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term(Vec<usize>);

impl Term {
    pub fn new(mut factors: Vec<usize>) -> Self {
        factors.sort_unstable();
        factors.dedup();
        Self(factors)
    }

    pub fn factors(&self) -> &[usize] {
        &self.0
    }

    /// Whether every factor of `other` appears in `self`.
    pub fn contains(&self, other: &Term) -> bool {
        other.0.iter().all(|f| self.0.contains(f))
    }

    pub fn label(&self, data: &Dataset) -> String {
        self.0
            .iter()
            .map(|&f| data.factors[f].name.as_str())
            .collect::<Vec<_>>()
            .join("×")
    }

    /// Degrees of freedom under treatment coding: ∏ (levels − 1).
    pub fn df(&self, data: &Dataset) -> usize {
        self.0.iter().map(|&f| data.factors[f].levels.len() - 1).product()
    }
}

/// All non-empty interactions of `factors`, lower orders first.
pub fn full_factorial(factors: &[usize]) -> Vec<Term> {
    let k = factors.len();
    let mut terms: Vec<Term> = (1u32..1 << k)
        .map(|mask| Term::new((0..k).filter(|i| mask & (1 << i) != 0).map(|i| factors[i]).collect()))
        .collect();
    terms.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.cmp(b)));
    terms
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub x: Matrix,
    pub y: Vec<f64>,
    /// Column labels such as `(Intercept)` or `Representation[I]:Mode[Video]`.
    pub labels: Vec<String>,
    /// Index into the term list for each column; `None` for the intercept.
    pub term_of_column: Vec<Option<usize>>,
}

/// Intercept plus treatment-coded columns for each term; the first level of
/// every factor is the reference.
pub fn build_design(data: &Dataset, terms: &[Term]) -> DesignMatrix {
    let n = data.len();
    let mut columns = vec![vec![1.0; n]];
    let mut labels = vec!["(Intercept)".to_string()];
    let mut term_of_column = vec![None];
    for (t, term) in terms.iter().enumerate() {
        // cartesian product of non-reference levels
        let mut combos: Vec<Vec<(usize, usize)>> = vec![vec![]];
        for &f in term.factors() {
            let nl = data.factors[f].levels.len();
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    (1..nl).map(move |l| {
                        let mut c = c.clone();
                        c.push((f, l));
                        c
                    })
                })
                .collect();
        }
        for combo in combos {
            let col = (0..n)
                .map(|i| {
                    if combo.iter().all(|&(f, l)| data.factors[f].codes[i] == l) {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect();
            columns.push(col);
            labels.push(
                combo
                    .iter()
                    .map(|&(f, l)| format!("{}[{}]", data.factors[f].name, data.factors[f].levels[l]))
                    .collect::<Vec<_>>()
                    .join(":"),
            );
            term_of_column.push(Some(t));
        }
    }
    DesignMatrix {
        x: Matrix::from_columns(n, &columns),
        y: data.response.clone(),
        labels,
        term_of_column,
    }
}
