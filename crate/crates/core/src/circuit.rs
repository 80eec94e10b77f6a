//! Self-organizing algebraic circuit construction.
//!
//! Every normalized constraint row becomes one [`AlgebraicGate`]; the gate
//! self-organizes (through the dynamics module) until its linear inequality
//! holds at the relaxed point of the terminal voltages. The objective is
//! handled by one extra gate `f'x <= b~` whose bound only ever tightens.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::model::NormalizedModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    Constraint,
    Objective,
}

/// One gate: the inequality `sum_j a_j x_j <= rhs` with `a_j in [-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraicGate {
    pub terms: Vec<(usize, f64)>,
    pub rhs: f64,
    pub kind: GateKind,
    pub gate_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CircuitError {
    ObjectiveGatePresent,
    NoObjectiveGate,
    BoundNotDecreasing { current: f64, proposed: f64 },
}

impl fmt::Display for CircuitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CircuitError::ObjectiveGatePresent => f.write_str("objective gate already present"),
            CircuitError::NoObjectiveGate => f.write_str("circuit has no objective gate"),
            CircuitError::BoundNotDecreasing { current, proposed } => write!(
                f,
                "objective bound must strictly decrease (current {current}, proposed {proposed})"
            ),
        }
    }
}

impl core::error::Error for CircuitError {}

/// The assembled circuit: gates plus the variable-to-gate adjacency.
///
/// Constraint gates are immutable once built; only the objective gate's
/// right-hand side may change, and only downwards.
#[derive(Debug, Clone, PartialEq)]
pub struct Soac {
    gates: Vec<AlgebraicGate>,
    var_to_gates: Vec<Vec<usize>>,
    objective_gate: Option<usize>,
    objective_scale: f64,
    n_vars: usize,
}

impl Soac {
    /// One constraint gate per normalized row, adjacency included. No
    /// objective gate yet.
    pub fn build(nm: &NormalizedModel) -> Self {
        let mut gates = Vec::with_capacity(nm.rows().len());
        let mut var_to_gates = vec![Vec::new(); nm.n_vars()];
        for (gate_index, row) in nm.rows().iter().enumerate() {
            for &(j, _) in &row.terms {
                var_to_gates[j].push(gate_index);
            }
            gates.push(AlgebraicGate {
                terms: row.terms.clone(),
                rhs: row.rhs,
                kind: GateKind::Constraint,
                gate_index,
            });
        }
        Self {
            gates,
            var_to_gates,
            objective_gate: None,
            objective_scale: 1.0,
            n_vars: nm.n_vars(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_gates(&self) -> usize {
        self.gates.len()
    }

    pub fn gates(&self) -> &[AlgebraicGate] {
        &self.gates
    }

    /// Indices of the gates containing variable `j`.
    pub fn gates_of_var(&self, j: usize) -> &[usize] {
        &self.var_to_gates[j]
    }

    pub fn objective_gate_index(&self) -> Option<usize> {
        self.objective_gate
    }

    /// Current objective bound `b~` in the unscaled units of `f`, if the
    /// objective gate exists.
    pub fn objective_bound(&self) -> Option<f64> {
        self.objective_gate
            .map(|g| self.gates[g].rhs * self.objective_scale)
    }

    /// Appends the objective gate `f'x <= b~`, with both sides divided by
    /// `max(1, max_j |f_j|)` to keep coefficients in `[-1, 1]`.
    ///
    /// An all-zero objective is a no-op (the solver then runs
    /// feasibility-only); returns whether a gate was added.
    pub fn add_objective_gate(
        &mut self,
        objective: &[f64],
        bound: f64,
    ) -> Result<bool, CircuitError> {
        if self.objective_gate.is_some() {
            return Err(CircuitError::ObjectiveGatePresent);
        }
        let scale = objective.iter().map(|c| c.abs()).fold(1.0_f64, f64::max);
        let terms: Vec<(usize, f64)> = objective
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c != 0.0)
            .map(|(j, &c)| (j, c / scale))
            .collect();
        if terms.is_empty() {
            return Ok(false);
        }
        let gate_index = self.gates.len();
        for &(j, _) in &terms {
            self.var_to_gates[j].push(gate_index);
        }
        self.gates.push(AlgebraicGate {
            terms,
            rhs: bound / scale,
            kind: GateKind::Objective,
            gate_index,
        });
        self.objective_gate = Some(gate_index);
        self.objective_scale = scale;
        Ok(true)
    }

    /// Replaces the objective bound with a strictly smaller one (in the
    /// unscaled units of `f`). No other gate is touched.
    pub fn update_objective_bound(&mut self, new_bound: f64) -> Result<(), CircuitError> {
        let g = self.objective_gate.ok_or(CircuitError::NoObjectiveGate)?;
        let scaled = new_bound / self.objective_scale;
        if scaled >= self.gates[g].rhs {
            return Err(CircuitError::BoundNotDecreasing {
                current: self.gates[g].rhs * self.objective_scale,
                proposed: new_bound,
            });
        }
        self.gates[g].rhs = scaled;
        Ok(())
    }
}
