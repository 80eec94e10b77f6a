//! Independent verification: optimality gaps, lower bounds, exhaustive
//! brute force for small instances, and checking of externally supplied
//! solutions.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::model::{IlpModel, Relation, Violation};

/// Default variable cap of [`brute_force`]: 2^24 enumerations.
pub const DEFAULT_ORACLE_MAX_VARS: u32 = 24;

#[derive(Debug, Clone, PartialEq)]
pub enum VerifyError {
    /// The gap is undefined for a zero best objective.
    UndefinedGap,
    TooManyVariables { n: usize, max: u32 },
    UnknownVariable(String),
    DuplicateEntry(String),
}

impl fmt::Display for VerifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyError::UndefinedGap => f.write_str("gap undefined: best objective is zero"),
            VerifyError::TooManyVariables { n, max } => {
                write!(f, "brute force limited to {max} variables, model has {n}")
            }
            VerifyError::UnknownVariable(name) => {
                write!(f, "solution names unknown variable '{name}'")
            }
            VerifyError::DuplicateEntry(name) => {
                write!(f, "solution repeats variable '{name}'")
            }
        }
    }
}

impl core::error::Error for VerifyError {}

/// Relative optimality gap `(O_best - O_lb) / |O_best|`.
///
/// The denominator uses the magnitude of the best objective so negative
/// objectives still report nonnegative gaps; callers should flag that
/// convention when `O_best < 0`.
pub fn gap(o_best: f64, o_lb: f64) -> Result<f64, VerifyError> {
    if o_best == 0.0 {
        return Err(VerifyError::UndefinedGap);
    }
    Ok((o_best - o_lb) / o_best.abs())
}

/// `sum_j min(f_j, 0)`: the objective of the best binary point with all
/// constraints dropped, hence a valid lower bound for any instance.
pub fn trivial_lower_bound(objective: &[f64]) -> f64 {
    objective.iter().map(|&f| f.min(0.0)).sum()
}

/// Best known lower bound: the trivial bound and, when supplied, an
/// external relaxation bound, merged by maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsReport {
    pub trivial_bound: f64,
    pub external_lp_bound: Option<f64>,
    pub best_known_lb: f64,
}

impl BoundsReport {
    pub fn new(objective: &[f64], external_lp_bound: Option<f64>) -> Self {
        let trivial_bound = trivial_lower_bound(objective);
        let best_known_lb = match external_lp_bound {
            Some(lp) => trivial_bound.max(lp),
            None => trivial_bound,
        };
        Self { trivial_bound, external_lp_bound, best_known_lb }
    }
}

/// Result of exhaustively enumerating all binary points.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub optimum: Option<f64>,
    pub arg_optimum: Option<Vec<bool>>,
    pub feasible_count: u64,
    pub enumerated: u64,
}

/// Rows prepared for exact enumeration: coefficients within 1e-9 of an
/// integer (and small enough for exact f64 sums) are snapped to it, so
/// feasibility at tolerance zero is decided without rounding noise.
/// Round half away from zero. Saturating casts keep huge inputs safe; they
/// are filtered out by the integer-size guard anyway.
fn round_nearest(c: f64) -> f64 {
    if c >= 0.0 {
        (c + 0.5) as u64 as f64
    } else {
        -((0.5 - c) as u64 as f64)
    }
}

fn enumeration_rows(model: &IlpModel) -> Vec<(Vec<(usize, f64)>, Relation, f64)> {
    const INT_LIMIT: f64 = (1u64 << 40) as f64;
    let near_small_int = |c: f64| -> bool {
        let r = round_nearest(c);
        (c - r).abs() <= 1e-9 * c.abs().max(1.0) && r.abs() <= INT_LIMIT
    };
    model
        .constraints()
        .map(|c| {
            let all_int = c
                .terms
                .iter()
                .map(|&(_, a)| a)
                .chain(core::iter::once(c.rhs))
                .all(near_small_int);
            if all_int {
                (
                    c.terms.iter().map(|&(j, a)| (j, round_nearest(a))).collect(),
                    c.relation,
                    round_nearest(c.rhs),
                )
            } else {
                (c.terms.clone(), c.relation, c.rhs)
            }
        })
        .collect()
}

/// Enumerates all `2^n` binary points and returns the minimum objective
/// among the feasible ones (tolerance zero).
pub fn brute_force(model: &IlpModel, max_vars: u32) -> Result<OracleResult, VerifyError> {
    let n = model.n_vars();
    if n > max_vars as usize || n >= 64 {
        return Err(VerifyError::TooManyVariables { n, max: max_vars });
    }
    let rows = enumeration_rows(model);
    let f = model.objective();

    let mut best: Option<(f64, u64)> = None;
    let mut feasible_count = 0u64;
    let total = 1u64 << n;
    let mut x = alloc::vec![false; n];
    for mask in 0..total {
        for (j, b) in x.iter_mut().enumerate() {
            *b = mask >> j & 1 == 1;
        }
        let ok = rows.iter().all(|(terms, rel, rhs)| {
            let lhs: f64 = terms.iter().map(|&(j, a)| if x[j] { a } else { 0.0 }).sum();
            match rel {
                Relation::Le => lhs <= *rhs,
                Relation::Ge => lhs >= *rhs,
                Relation::Eq => lhs == *rhs,
            }
        });
        if !ok {
            continue;
        }
        feasible_count += 1;
        let obj: f64 = f
            .iter()
            .enumerate()
            .map(|(j, &c)| if x[j] { c } else { 0.0 })
            .sum();
        if best.is_none_or(|(o, _)| obj < o) {
            best = Some((obj, mask));
        }
    }
    let (optimum, arg_optimum) = match best {
        Some((o, mask)) => (
            Some(o),
            Some((0..n).map(|j| mask >> j & 1 == 1).collect()),
        ),
        None => (None, None),
    };
    Ok(OracleResult { optimum, arg_optimum, feasible_count, enumerated: total })
}

/// Outcome of checking a named solution against a model.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionVerdict {
    pub feasible: bool,
    /// Objective recomputed from the reconstructed assignment.
    pub objective: f64,
    pub declared_objective: Option<f64>,
    /// Whether the declared objective matches the recomputed one within
    /// 1e-4 relative; `None` when nothing was declared.
    pub objective_matches: Option<bool>,
    pub violations: Vec<Violation>,
    /// Entries whose value was neither 0 nor 1 (within 1e-4); these force an
    /// infeasible verdict.
    pub non_integral: Vec<String>,
    /// Model variables absent from the solution, defaulted to 0.
    pub defaulted: Vec<String>,
}

/// Reconstructs a binary assignment from `(name, value)` entries, checks
/// feasibility at `tol` and recomputes the objective. Variables not named
/// default to 0 (reported in the verdict).
pub fn check_assignment_entries(
    model: &IlpModel,
    entries: &[(&str, f64)],
    declared_objective: Option<f64>,
    tol: f64,
) -> Result<SolutionVerdict, VerifyError> {
    let index: BTreeMap<&str, usize> = model
        .var_names()
        .iter()
        .enumerate()
        .map(|(j, name)| (name.as_str(), j))
        .collect();
    let n = model.n_vars();
    let mut x = alloc::vec![false; n];
    let mut seen = alloc::vec![false; n];
    let mut non_integral = Vec::new();
    for &(name, value) in entries {
        let &j = index
            .get(name)
            .ok_or_else(|| VerifyError::UnknownVariable(String::from(name)))?;
        if seen[j] {
            return Err(VerifyError::DuplicateEntry(String::from(name)));
        }
        seen[j] = true;
        if value.abs() <= 1e-4 {
            x[j] = false;
        } else if (value - 1.0).abs() <= 1e-4 {
            x[j] = true;
        } else {
            non_integral.push(String::from(name));
            x[j] = value >= 0.5;
        }
    }
    let defaulted: Vec<String> = model
        .var_names()
        .iter()
        .zip(&seen)
        .filter(|&(_, &was_named)| !was_named)
        .map(|(name, _)| name.clone())
        .collect();

    let report = model.check_feasible(&x, tol).expect("assignment sized to model");
    let objective = model.evaluate_objective(&x).expect("assignment sized to model");
    let objective_matches = declared_objective
        .map(|d| (objective - d).abs() <= 1e-4 * d.abs().max(objective.abs()).max(1.0));
    Ok(SolutionVerdict {
        feasible: report.feasible && non_integral.is_empty(),
        objective,
        declared_objective,
        objective_matches,
        violations: report.violations,
        non_integral,
        defaulted,
    })
}
