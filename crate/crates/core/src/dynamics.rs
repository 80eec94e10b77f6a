//! The circuit's flow field, its bounded forward-Euler integration, and the
//! digital readout.
//!
//! State layout: one terminal voltage `v_j in [-1, 1]` per variable, plus a
//! fast memory `xs_i in [0, 1]` and a slow memory `xl_i in [1, xl_max]` per
//! gate. A gate reads its terminals at the relaxed point
//! `v~_j = (v_j + 1) / 2 in [0, 1]` and, while its inequality is violated
//! there, injects a correction current into every terminal proportional to
//! the violation and weighted by the gate's memories. Variables whose
//! incident gates are all satisfied drift toward the nearest digital rail
//! (`+1`/`-1`), so equilibria are exactly the digital corners that satisfy
//! every gate.
//!
//! Concretely, with `C_i = max(0, sum_j a_ij v~_j - b_i)` and `[.]` the
//! indicator:
//!
//! ```text
//! dv_j  = - sum_{i in gates(j)} xl_i * xs_i * a_ij * [C_i > 0]   (some C_i > 0)
//! dv_j  =   zeta * v_j * (1 - v_j^2)                             (all C_i = 0)
//! dxs_i =   beta  * (C_i - gamma)
//! dxl_i =   alpha * (C_i - delta)
//! ```
//!
//! The voltage correction is the negative subgradient of the
//! memory-weighted hinge potential `sum_i 2 xl_i xs_i C_i` with respect to
//! `v`. A violated gate pushes with full force however small its residual,
//! so trajectories cross into the satisfied region in finite time instead
//! of stalling on its boundary. Integration is forward Euler followed by
//! componentwise clamping to the state bounds; clamping realizes the
//! saturation nonlinearity of the physical circuit and keeps every
//! trajectory bounded.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::circuit::{AlgebraicGate, Soac};

/// Tunable rates of the circuit dynamics.
///
/// The defaults are starting points for the replica tuning grid, not claims
/// of optimality; see [`crate::solver::default_params_grid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsParams {
    /// Euler step size.
    pub dt: f64,
    /// Fast-memory growth rate.
    pub beta: f64,
    /// Fast-memory decay threshold: `xs` shrinks while `C < gamma`.
    pub gamma: f64,
    /// Slow-memory growth rate.
    pub alpha: f64,
    /// Slow-memory decay threshold.
    pub delta: f64,
    /// Rail-drift rate applied when all incident gates are satisfied.
    pub zeta: f64,
    /// Upper clamp of the slow memory.
    pub xl_max: f64,
    /// Digital readout threshold on the voltages.
    pub threshold: f64,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        Self {
            dt: 0.1,
            beta: 20.0,
            gamma: 0.05,
            alpha: 1.0,
            delta: 0.1,
            zeta: 0.01,
            xl_max: 1e4,
            threshold: 0.0,
        }
    }
}

impl DynamicsParams {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let finite = self.dt.is_finite()
            && self.beta.is_finite()
            && self.gamma.is_finite()
            && self.alpha.is_finite()
            && self.delta.is_finite()
            && self.zeta.is_finite()
            && self.xl_max.is_finite()
            && self.threshold.is_finite();
        if !finite {
            return Err(DynamicsError::BadParams("parameters must be finite"));
        }
        if self.dt <= 0.0 {
            return Err(DynamicsError::BadParams("dt must be positive"));
        }
        if self.xl_max < 1.0 {
            return Err(DynamicsError::BadParams("xl_max must be at least 1"));
        }
        if self.beta < 0.0
            || self.gamma < 0.0
            || self.alpha < 0.0
            || self.delta < 0.0
            || self.zeta < 0.0
        {
            return Err(DynamicsError::BadParams("rates must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DynamicsError {
    /// A derivative component stopped being a number; the replica should be
    /// restarted rather than silently clamped.
    NonFinite { component: &'static str, index: usize },
    BadParams(&'static str),
}

impl fmt::Display for DynamicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DynamicsError::NonFinite { component, index } => {
                write!(f, "non-finite derivative in {component}[{index}]")
            }
            DynamicsError::BadParams(msg) => write!(f, "invalid dynamics parameters: {msg}"),
        }
    }
}

impl core::error::Error for DynamicsError {}

/// The full dynamical state of a circuit.
///
/// `step` maintains the bounds `v in [-1,1]`, `xs in [0,1]`,
/// `xl in [1, xl_max]` by clamping after every update.
#[derive(Debug, Clone, PartialEq)]
pub struct SoacState {
    pub v: Vec<f64>,
    pub xs: Vec<f64>,
    pub xl: Vec<f64>,
    pub t: f64,
}

impl SoacState {
    /// State with the given voltages and memories at their reference values
    /// (`xs = 0.5`, `xl = 1`).
    pub fn with_voltages(v: Vec<f64>, n_gates: usize) -> Self {
        Self {
            v,
            xs: vec![0.5; n_gates],
            xl: vec![1.0; n_gates],
            t: 0.0,
        }
    }

    pub fn in_bounds(&self, params: &DynamicsParams) -> bool {
        self.v.iter().all(|&v| (-1.0..=1.0).contains(&v))
            && self.xs.iter().all(|&x| (0.0..=1.0).contains(&x))
            && self.xl.iter().all(|&x| (1.0..=params.xl_max).contains(&x))
    }
}

/// Hinge violation of one gate at the relaxed point of the voltages:
/// `max(0, sum_j a_j (v_j+1)/2 - b)`. Zero exactly when the gate's
/// inequality holds there.
pub fn gate_violation(gate: &AlgebraicGate, v: &[f64]) -> f64 {
    let s: f64 = gate
        .terms
        .iter()
        .map(|&(j, a)| a * (v[j] + 1.0) * 0.5)
        .sum();
    (s - gate.rhs).max(0.0)
}

/// Largest gate violation and number of violated gates at `v`.
pub fn violation_summary(soac: &Soac, v: &[f64]) -> (f64, usize) {
    let mut max_c = 0.0_f64;
    let mut violated = 0;
    for gate in soac.gates() {
        let c = gate_violation(gate, v);
        if c > 0.0 {
            violated += 1;
            max_c = max_c.max(c);
        }
    }
    (max_c, violated)
}

/// Time derivative of a [`SoacState`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateDerivative {
    pub dv: Vec<f64>,
    pub dxs: Vec<f64>,
    pub dxl: Vec<f64>,
}

/// Reusable integrator workspace. Keeps the derivative and per-gate
/// violation buffers out of the hot loop's allocator traffic.
#[derive(Debug, Clone)]
pub struct Stepper {
    dv: Vec<f64>,
    dxs: Vec<f64>,
    dxl: Vec<f64>,
    violations: Vec<f64>,
    incident_violated: Vec<bool>,
}

impl Stepper {
    pub fn new(soac: &Soac) -> Self {
        Self {
            dv: vec![0.0; soac.n_vars()],
            dxs: vec![0.0; soac.n_gates()],
            dxl: vec![0.0; soac.n_gates()],
            violations: vec![0.0; soac.n_gates()],
            incident_violated: vec![false; soac.n_vars()],
        }
    }

    /// Gate violations computed by the most recent `step`/`compute_flow`.
    pub fn violations(&self) -> &[f64] {
        &self.violations
    }

    fn compute_flow(&mut self, state: &SoacState, soac: &Soac, params: &DynamicsParams) {
        // Buffers may come from a circuit whose objective gate was appended
        // after `Stepper::new`; grow them on demand.
        self.dxs.resize(soac.n_gates(), 0.0);
        self.dxl.resize(soac.n_gates(), 0.0);
        self.violations.resize(soac.n_gates(), 0.0);

        self.dv.fill(0.0);
        self.incident_violated.fill(false);

        for (i, gate) in soac.gates().iter().enumerate() {
            let c = gate_violation(gate, &state.v);
            self.violations[i] = c;
            self.dxs[i] = params.beta * (c - params.gamma);
            self.dxl[i] = params.alpha * (c - params.delta);
            if c > 0.0 {
                let w = state.xl[i] * state.xs[i];
                for &(j, a) in &gate.terms {
                    self.dv[j] -= w * a;
                    self.incident_violated[j] = true;
                }
            }
        }
        for j in 0..soac.n_vars() {
            if !self.incident_violated[j] {
                let v = state.v[j];
                self.dv[j] = params.zeta * v * (1.0 - v * v);
            }
        }
    }

    /// One forward-Euler step with componentwise clamping.
    ///
    /// State memories are resized on first use if the circuit gained its
    /// objective gate since the state was created (new memories start at
    /// their reference values).
    pub fn step(
        &mut self,
        state: &mut SoacState,
        soac: &Soac,
        params: &DynamicsParams,
    ) -> Result<(), DynamicsError> {
        state.xs.resize(soac.n_gates(), 0.5);
        state.xl.resize(soac.n_gates(), 1.0);

        self.compute_flow(state, soac, params);

        for (idx, &d) in self.dv.iter().enumerate() {
            if !d.is_finite() {
                return Err(DynamicsError::NonFinite { component: "dv", index: idx });
            }
        }
        for (idx, &d) in self.dxs.iter().enumerate() {
            if !d.is_finite() {
                return Err(DynamicsError::NonFinite { component: "dxs", index: idx });
            }
        }
        for (idx, &d) in self.dxl.iter().enumerate() {
            if !d.is_finite() {
                return Err(DynamicsError::NonFinite { component: "dxl", index: idx });
            }
        }

        let dt = params.dt;
        for (v, &d) in state.v.iter_mut().zip(&self.dv) {
            *v = (*v + dt * d).clamp(-1.0, 1.0);
        }
        for (xs, &d) in state.xs.iter_mut().zip(&self.dxs) {
            *xs = (*xs + dt * d).clamp(0.0, 1.0);
        }
        for (xl, &d) in state.xl.iter_mut().zip(&self.dxl) {
            *xl = (*xl + dt * d).clamp(1.0, params.xl_max);
        }
        state.t += dt;
        Ok(())
    }
}

/// The flow field at `state`. Pure; allocates fresh buffers.
pub fn flow(state: &SoacState, soac: &Soac, params: &DynamicsParams) -> StateDerivative {
    let mut stepper = Stepper::new(soac);
    stepper.compute_flow(state, soac, params);
    StateDerivative { dv: stepper.dv, dxs: stepper.dxs, dxl: stepper.dxl }
}

/// One Euler step as a pure function; see [`Stepper::step`].
pub fn step(
    state: &SoacState,
    soac: &Soac,
    params: &DynamicsParams,
) -> Result<SoacState, DynamicsError> {
    let mut next = state.clone();
    Stepper::new(soac).step(&mut next, soac, params)?;
    Ok(next)
}

/// Digital readout: `x_j = 1` iff `v_j > threshold` (ties read as 0).
pub fn readout(state: &SoacState, threshold: f64) -> Vec<bool> {
    state.v.iter().map(|&v| v > threshold).collect()
}
