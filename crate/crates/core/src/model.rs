//! Immutable data model for binary ILP instances and normalization to a
//! canonical all-`<=` form.
//!
//! An [`IlpModel`] holds the objective vector `f` and the equality and
//! inequality constraint rows of
//!
//! ```text
//! min  f'x    s.t.  A_eq x = b_eq,  A_ineq x <= / >= b_ineq,  x in {0,1}^n
//! ```
//!
//! Models are validated once at construction and never mutated afterwards,
//! so they can be shared freely across concurrent solver replicas.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// Constraint sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::Le => f.write_str("<="),
            Relation::Ge => f.write_str(">="),
            Relation::Eq => f.write_str("="),
        }
    }
}

/// A sparse linear constraint `sum_j a_j x_j  <relation>  rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub name: String,
    /// Sparse `(var_index, coefficient)` pairs; no duplicate indices.
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl LinearConstraint {
    pub fn new(
        name: impl Into<String>,
        terms: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> Self {
        Self {
            name: name.into(),
            terms,
            relation,
            rhs,
        }
    }

    /// Left-hand side value at a binary point.
    pub fn lhs(&self, x: &[bool]) -> f64 {
        self.terms
            .iter()
            .map(|&(j, a)| if x[j] { a } else { 0.0 })
            .sum()
    }

    /// Signed violation at `x`: positive means the constraint fails by that
    /// amount. `Le` rows report `lhs - rhs`, `Ge` rows `rhs - lhs`, `Eq`
    /// rows the signed residual `lhs - rhs` (violated when its magnitude
    /// exceeds the tolerance).
    pub fn violation(&self, x: &[bool]) -> f64 {
        let lhs = self.lhs(x);
        match self.relation {
            Relation::Le => lhs - self.rhs,
            Relation::Ge => self.rhs - lhs,
            Relation::Eq => lhs - self.rhs,
        }
    }

    fn is_violated(&self, x: &[bool], tol: f64) -> bool {
        match self.relation {
            Relation::Le | Relation::Ge => self.violation(x) > tol,
            Relation::Eq => self.violation(x).abs() > tol,
        }
    }
}

/// Errors from model construction and model queries.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    NoVariables,
    ObjectiveLength { expected: usize, got: usize },
    DuplicateVarName(String),
    EmptyConstraint(String),
    DuplicateTerm { constraint: String, var: usize },
    IndexOutOfRange { constraint: String, index: usize, n_vars: usize },
    NonFinite(String),
    DimensionMismatch { expected: usize, got: usize },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::NoVariables => f.write_str("model has no variables"),
            ModelError::ObjectiveLength { expected, got } => {
                write!(f, "objective has {got} coefficients, expected {expected}")
            }
            ModelError::DuplicateVarName(name) => write!(f, "duplicate variable name '{name}'"),
            ModelError::EmptyConstraint(name) => write!(f, "constraint '{name}' has no terms"),
            ModelError::DuplicateTerm { constraint, var } => {
                write!(f, "constraint '{constraint}' repeats variable index {var}")
            }
            ModelError::IndexOutOfRange { constraint, index, n_vars } => write!(
                f,
                "constraint '{constraint}' references variable {index} but the model has {n_vars}"
            ),
            ModelError::NonFinite(what) => write!(f, "non-finite coefficient in {what}"),
            ModelError::DimensionMismatch { expected, got } => {
                write!(f, "assignment has {got} entries, expected {expected}")
            }
        }
    }
}

impl core::error::Error for ModelError {}

/// A validated, immutable 0-1 ILP instance (minimization).
#[derive(Debug, Clone, PartialEq)]
pub struct IlpModel {
    name: String,
    var_names: Vec<String>,
    objective: Vec<f64>,
    eq_constraints: Vec<LinearConstraint>,
    ineq_constraints: Vec<LinearConstraint>,
}

impl IlpModel {
    /// Validates and builds a model. Constraints are partitioned by sense:
    /// `Eq` rows into `eq_constraints`, `Le`/`Ge` rows into
    /// `ineq_constraints`, preserving relative order.
    pub fn new(
        name: impl Into<String>,
        var_names: Vec<String>,
        objective: Vec<f64>,
        constraints: Vec<LinearConstraint>,
    ) -> Result<Self, ModelError> {
        let n = var_names.len();
        if n == 0 {
            return Err(ModelError::NoVariables);
        }
        if objective.len() != n {
            return Err(ModelError::ObjectiveLength { expected: n, got: objective.len() });
        }
        let mut seen = BTreeSet::new();
        for name in &var_names {
            if !seen.insert(name.as_str()) {
                return Err(ModelError::DuplicateVarName(name.clone()));
            }
        }
        if objective.iter().any(|c| !c.is_finite()) {
            return Err(ModelError::NonFinite("objective".to_string()));
        }
        for c in &constraints {
            if c.terms.is_empty() {
                return Err(ModelError::EmptyConstraint(c.name.clone()));
            }
            let mut vars = BTreeSet::new();
            for &(j, a) in &c.terms {
                if j >= n {
                    return Err(ModelError::IndexOutOfRange {
                        constraint: c.name.clone(),
                        index: j,
                        n_vars: n,
                    });
                }
                if !vars.insert(j) {
                    return Err(ModelError::DuplicateTerm { constraint: c.name.clone(), var: j });
                }
                if !a.is_finite() {
                    return Err(ModelError::NonFinite(c.name.clone()));
                }
            }
            if !c.rhs.is_finite() {
                return Err(ModelError::NonFinite(c.name.clone()));
            }
        }
        let (eq, ineq): (Vec<_>, Vec<_>) = constraints
            .into_iter()
            .partition(|c| c.relation == Relation::Eq);
        Ok(Self {
            name: name.into(),
            var_names,
            objective,
            eq_constraints: eq,
            ineq_constraints: ineq,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn m_eq(&self) -> usize {
        self.eq_constraints.len()
    }

    pub fn m_ineq(&self) -> usize {
        self.ineq_constraints.len()
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn eq_constraints(&self) -> &[LinearConstraint] {
        &self.eq_constraints
    }

    pub fn ineq_constraints(&self) -> &[LinearConstraint] {
        &self.ineq_constraints
    }

    /// All constraints, equalities first.
    pub fn constraints(&self) -> impl Iterator<Item = &LinearConstraint> {
        self.eq_constraints.iter().chain(self.ineq_constraints.iter())
    }

    /// Objective value `sum_j f_j x_j` of a binary point.
    pub fn evaluate_objective(&self, x: &[bool]) -> Result<f64, ModelError> {
        if x.len() != self.n_vars() {
            return Err(ModelError::DimensionMismatch { expected: self.n_vars(), got: x.len() });
        }
        Ok(self
            .objective
            .iter()
            .zip(x)
            .map(|(&f, &on)| if on { f } else { 0.0 })
            .sum())
    }

    /// Checks every constraint of the model at `x` with an absolute per-row
    /// tolerance and reports each violated row with its signed violation.
    ///
    /// The binary domain holds by construction of the `x: &[bool]` argument.
    pub fn check_feasible(&self, x: &[bool], tol: f64) -> Result<FeasibilityReport, ModelError> {
        assert!(tol >= 0.0, "tolerance must be nonnegative");
        if x.len() != self.n_vars() {
            return Err(ModelError::DimensionMismatch { expected: self.n_vars(), got: x.len() });
        }
        let mut violations = Vec::new();
        for (index, c) in self.constraints().enumerate() {
            if c.is_violated(x, tol) {
                violations.push(Violation {
                    index,
                    name: c.name.clone(),
                    amount: c.violation(x),
                });
            }
        }
        Ok(FeasibilityReport { feasible: violations.is_empty(), violations })
    }

    /// Canonicalizes the model: equalities split into opposing `<=` pairs,
    /// `>=` rows negated, and every row divided by
    /// `max(1, max_j |a_ij|)` so all coefficients land in `[-1, 1]`.
    /// The feasible set is unchanged.
    pub fn normalize(&self) -> NormalizedModel {
        let mut rows = Vec::with_capacity(2 * self.m_eq() + self.m_ineq());
        let mut row_scale = Vec::with_capacity(rows.capacity());
        let mut origin = Vec::with_capacity(rows.capacity());

        let scale_of = |c: &LinearConstraint| -> f64 {
            c.terms
                .iter()
                .map(|&(_, a)| a.abs())
                .fold(1.0_f64, f64::max)
        };
        let scaled = |c: &LinearConstraint, s: f64, neg: bool, suffix: &str| -> LinearConstraint {
            let sign = if neg { -1.0 } else { 1.0 };
            let mut name = c.name.clone();
            name.push_str(suffix);
            LinearConstraint::new(
                name,
                c.terms.iter().map(|&(j, a)| (j, sign * a / s)).collect(),
                Relation::Le,
                sign * c.rhs / s,
            )
        };

        for (i, c) in self.eq_constraints.iter().enumerate() {
            let s = scale_of(c);
            rows.push(scaled(c, s, false, ":ub"));
            row_scale.push(s);
            origin.push(RowOrigin::EqUpper(i));
            rows.push(scaled(c, s, true, ":lb"));
            row_scale.push(s);
            origin.push(RowOrigin::EqLower(i));
        }
        for (i, c) in self.ineq_constraints.iter().enumerate() {
            let s = scale_of(c);
            match c.relation {
                Relation::Le => {
                    rows.push(scaled(c, s, false, ""));
                    origin.push(RowOrigin::Le(i));
                }
                Relation::Ge => {
                    rows.push(scaled(c, s, true, ""));
                    origin.push(RowOrigin::Ge(i));
                }
                Relation::Eq => unreachable!("eq rows are partitioned at construction"),
            }
            row_scale.push(s);
        }

        NormalizedModel {
            n_vars: self.n_vars(),
            objective: self.objective.clone(),
            rows,
            row_scale,
            origin,
        }
    }
}

/// One violated constraint: `index` is the position in the combined
/// (equalities first) constraint order.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub index: usize,
    pub name: String,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

/// Source row behind a normalized row; indices point into the model's
/// `eq_constraints` / `ineq_constraints` lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowOrigin {
    /// `a.x <= b` half of an equality row.
    EqUpper(usize),
    /// `-a.x <= -b` half of an equality row.
    EqLower(usize),
    Le(usize),
    /// A `>=` row stored negated.
    Ge(usize),
}

/// The canonical all-`<=` form produced by [`IlpModel::normalize`].
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedModel {
    n_vars: usize,
    objective: Vec<f64>,
    rows: Vec<LinearConstraint>,
    row_scale: Vec<f64>,
    origin: Vec<RowOrigin>,
}

impl NormalizedModel {
    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    /// Rows all carry [`Relation::Le`].
    pub fn rows(&self) -> &[LinearConstraint] {
        &self.rows
    }

    pub fn row_scale(&self) -> &[f64] {
        &self.row_scale
    }

    pub fn origin(&self) -> &[RowOrigin] {
        &self.origin
    }

    /// Feasibility of a binary point under the normalized rows.
    pub fn is_feasible(&self, x: &[bool], tol: f64) -> bool {
        self.rows.iter().all(|r| r.lhs(x) - r.rhs <= tol)
    }
}

/// A binary point together with its objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    values: Vec<bool>,
    objective_value: f64,
}

impl Assignment {
    /// Builds an assignment for `model`, computing the objective value.
    pub fn new(model: &IlpModel, values: Vec<bool>) -> Result<Self, ModelError> {
        let objective_value = model.evaluate_objective(&values)?;
        Ok(Self { values, objective_value })
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn objective_value(&self) -> f64 {
        self.objective_value
    }
}
