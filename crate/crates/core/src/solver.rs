//! Anytime orchestration: random initialization, the integration loop with
//! periodic readouts, objective tightening, the replica portfolio, and
//! budget handling.
//!
//! A replica owns one circuit and one dynamical state. It integrates for
//! `readout_stride` steps at a time, reads the voltages out digitally and
//! checks the readout against the *original* model (never against gate
//! violations, so integrator artifacts cannot fake feasibility). Each
//! improving feasible readout is recorded, then the objective gate's bound
//! is tightened below the new best so the circuit is pushed toward strictly
//! better solutions. Replicas differ in their seed and dynamics parameters;
//! the best result across replicas wins.
//!
//! Budgets are either wall-clock (via a caller-supplied [`Clock`]) or a
//! fixed step count, which makes runs bit-reproducible for testing.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::Soac;
use crate::dynamics::{self, DynamicsParams, SoacState, Stepper};
use crate::model::{Assignment, IlpModel, NormalizedModel};
use crate::verify;

/// Consecutive blow-up restarts tolerated before a replica gives up.
const MAX_RESTARTS: u32 = 64;

/// Stopping rule for a solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Budget {
    /// Wall-clock limit in seconds; requires a real [`Clock`].
    TimeSeconds(f64),
    /// Deterministic step limit per replica (test mode).
    Steps(u64),
}

/// Monotone elapsed-time source, measured from the start of the solve.
pub trait Clock {
    fn elapsed_secs(&self) -> f64;
}

/// Clock that never advances; suitable only for [`Budget::Steps`] runs.
pub struct NullClock;

impl Clock for NullClock {
    fn elapsed_secs(&self) -> f64 {
        0.0
    }
}

/// Receives one event per improving feasible solution.
pub trait Progress {
    fn improvement(&self, replica: usize, elapsed_secs: f64, objective: f64);
}

/// Discards progress events.
pub struct NoProgress;

impl Progress for NoProgress {
    fn improvement(&self, _replica: usize, _elapsed_secs: f64, _objective: f64) {}
}

/// Receives one trajectory sample per readout (see the trace dump of the
/// dynamics interface).
pub trait TraceSink {
    fn record(&mut self, t: f64, max_violation: f64, violated_gates: usize, readout_objective: f64);
}

/// How the objective bound steps below each new best solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TightenRule {
    pub eps_abs: f64,
    pub eps_rel: f64,
    /// Integer-valued objective: step by whole units, which is exact.
    pub integral: bool,
}

impl TightenRule {
    /// Derives the rule from the objective vector: integral stepping when
    /// every coefficient is an integer, otherwise an absolute step of
    /// `1e-6 * ||f||_1`.
    pub fn for_objective(objective: &[f64]) -> Self {
        let integral = objective.iter().all(|&c| is_integral(c));
        let l1: f64 = objective.iter().map(|c| c.abs()).sum();
        Self { eps_abs: 1e-6 * l1, eps_rel: 0.0, integral }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.eps_abs.is_finite() || self.eps_abs < 0.0 {
            return Err(ConfigError::BadTightenRule("eps_abs must be finite and nonnegative"));
        }
        if !self.eps_rel.is_finite() || !(0.0..1.0).contains(&self.eps_rel) {
            return Err(ConfigError::BadTightenRule("eps_rel must lie in [0, 1)"));
        }
        Ok(())
    }
}

fn is_integral(c: f64) -> bool {
    c.abs() <= (1u64 << 52) as f64 && c == ((c as i64) as f64)
}

/// Next objective bound, strictly below `o_best`.
///
/// Integral objectives step by exactly 1; otherwise the step is
/// `max(eps_abs, eps_rel * |o_best|)`, with a floating-point fallback that
/// guarantees strict decrease even for degenerate rules.
pub fn tighten_bound(o_best: f64, rule: &TightenRule) -> f64 {
    let delta = if rule.integral {
        1.0
    } else {
        let d = rule.eps_abs.max(rule.eps_rel * o_best.abs());
        if d > 0.0 {
            d
        } else {
            1e-12 * o_best.abs().max(1.0)
        }
    };
    let bound = o_best - delta;
    if bound < o_best {
        bound
    } else {
        o_best.next_down()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    NoReplicas,
    BadStride,
    BadBudget(&'static str),
    EmptyParamsGrid,
    BadParams(&'static str),
    BadTolerance,
    BadTightenRule(&'static str),
    BadLowerBound,
    BadStagnation,
    /// A wall-clock budget was paired with [`NullClock`].
    ClockRequired,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::NoReplicas => f.write_str("at least one replica is required"),
            ConfigError::BadStride => f.write_str("readout stride must be at least 1"),
            ConfigError::BadBudget(msg) => write!(f, "invalid budget: {msg}"),
            ConfigError::EmptyParamsGrid => f.write_str("parameter grid must not be empty"),
            ConfigError::BadParams(msg) => write!(f, "invalid dynamics parameters: {msg}"),
            ConfigError::BadTolerance => f.write_str("feasibility tolerance must be finite and nonnegative"),
            ConfigError::BadTightenRule(msg) => write!(f, "invalid tightening rule: {msg}"),
            ConfigError::BadLowerBound => f.write_str("external lower bound must be finite"),
            ConfigError::BadStagnation => {
                f.write_str("stagnation restart interval must be at least 1 period")
            }
            ConfigError::ClockRequired => {
                f.write_str("wall-clock budget requires a real clock; use a step budget here")
            }
        }
    }
}

impl core::error::Error for ConfigError {}

/// Everything a solve needs besides the model.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub budget: Budget,
    pub n_replicas: usize,
    pub base_seed: u64,
    /// Per-replica dynamics parameters, cycled when shorter than the
    /// replica count.
    pub params_grid: Vec<DynamicsParams>,
    /// Steps between readouts (also the trace sampling stride).
    pub readout_stride: u64,
    /// `None` derives the rule from the objective at solve time.
    pub tighten: Option<TightenRule>,
    /// Absolute per-row feasibility tolerance for accepting readouts.
    pub feas_tol: f64,
    /// Externally computed lower bound (e.g. from an LP relaxation).
    pub external_lower_bound: Option<f64>,
    /// Base number of readout periods without an improving solution before
    /// the voltages are reinitialized from a derived seed. Successive
    /// restart intervals follow the Luby sequence (base, base, 2*base, ...)
    /// so short bursts dominate while occasional long runs still happen.
    /// The circuit and its tightened objective bound are kept across
    /// restarts, so later bursts keep hunting strictly better corners.
    /// `None` disables stagnation restarts.
    pub stagnation_periods: Option<u64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            budget: Budget::TimeSeconds(300.0),
            n_replicas: 1,
            base_seed: 0,
            params_grid: default_params_grid(),
            readout_stride: 50,
            tighten: None,
            feas_tol: 1e-6,
            external_lower_bound: None,
            stagnation_periods: Some(3),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_replicas == 0 {
            return Err(ConfigError::NoReplicas);
        }
        if self.readout_stride == 0 {
            return Err(ConfigError::BadStride);
        }
        match self.budget {
            Budget::TimeSeconds(t) => {
                if !(t.is_finite() && t > 0.0) {
                    return Err(ConfigError::BadBudget("time limit must be positive"));
                }
            }
            Budget::Steps(s) => {
                if s == 0 {
                    return Err(ConfigError::BadBudget("step limit must be at least 1"));
                }
            }
        }
        if self.params_grid.is_empty() {
            return Err(ConfigError::EmptyParamsGrid);
        }
        for p in &self.params_grid {
            p.validate().map_err(|_| ConfigError::BadParams("grid entry failed validation"))?;
        }
        if !self.feas_tol.is_finite() || self.feas_tol < 0.0 {
            return Err(ConfigError::BadTolerance);
        }
        if let Some(rule) = &self.tighten {
            rule.validate()?;
        }
        if let Some(lb) = self.external_lower_bound {
            if !lb.is_finite() {
                return Err(ConfigError::BadLowerBound);
            }
        }
        if self.stagnation_periods == Some(0) {
            return Err(ConfigError::BadStagnation);
        }
        Ok(())
    }

    /// Dynamics parameters of replica `index` (grid cycled).
    pub fn params_for(&self, index: usize) -> DynamicsParams {
        self.params_grid[index % self.params_grid.len()]
    }

    /// Seed of replica `index`.
    pub fn seed_for(&self, index: usize) -> u64 {
        self.base_seed.wrapping_add(index as u64)
    }
}

/// A small spread of parameter sets around the defaults, one per replica.
/// Entry 0 is the default set, so single-replica runs use the defaults.
pub fn default_params_grid() -> Vec<DynamicsParams> {
    let base = DynamicsParams::default();
    alloc::vec![
        base,
        DynamicsParams { dt: 0.15, beta: 10.0, gamma: 0.0, alpha: 2.0, delta: 0.05, zeta: 0.02, xl_max: 1e3, ..base },
        DynamicsParams { dt: 0.05, beta: 30.0, gamma: 0.02, alpha: 0.5, delta: 0.2, zeta: 0.005, xl_max: 1e4, ..base },
        DynamicsParams { dt: 0.12, beta: 25.0, gamma: 0.0, alpha: 1.5, delta: 0.15, zeta: 0.05, xl_max: 1e2, ..base },
        DynamicsParams { dt: 0.08, beta: 15.0, gamma: 0.1, alpha: 1.0, delta: 0.05, zeta: 0.01, xl_max: 1e3, ..base },
        DynamicsParams { dt: 0.2, beta: 20.0, gamma: 0.0, alpha: 0.8, delta: 0.1, zeta: 0.02, xl_max: 1e4, ..base },
        DynamicsParams { dt: 0.1, beta: 40.0, gamma: 0.05, alpha: 2.0, delta: 0.2, zeta: 0.005, xl_max: 1e2, ..base },
        DynamicsParams { dt: 0.06, beta: 5.0, gamma: 0.01, alpha: 0.3, delta: 0.0, zeta: 0.03, xl_max: 1e4, ..base },
    ]
}

/// Why a replica stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Budget ran out.
    Timeout,
    /// Too many non-finite blow-ups in a row.
    Aborted,
    /// The tightened bound fell below the trivial lower bound: no better
    /// objective value is representable, so the best found is optimal.
    BoundExhausted,
}

/// One improving feasible readout.
#[derive(Debug, Clone, PartialEq)]
pub struct Improvement {
    pub step: u64,
    /// Dynamical time of the state at the readout.
    pub time: f64,
    /// Wall-clock seconds since solve start (0 under [`NullClock`]).
    pub wall_secs: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaResult {
    pub replica: usize,
    pub seed: u64,
    pub best: Option<Assignment>,
    /// Improving feasible readouts, strictly decreasing in objective.
    pub history: Vec<Improvement>,
    pub steps_taken: u64,
    /// Blow-up recoveries (non-finite derivative).
    pub restarts: u32,
    /// Voltage reinitializations after stagnant periods.
    pub stagnation_restarts: u32,
    pub termination: Termination,
}

/// Merged outcome of a solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub model_name: String,
    pub best: Option<Assignment>,
    pub best_replica: Option<usize>,
    pub per_replica: Vec<ReplicaResult>,
    /// Best known lower bound (trivial bound merged with any external one).
    pub lower_bound: Option<f64>,
    /// Relative gap; `None` when no solution was found or the objective is
    /// zero (undefined).
    pub gap: Option<f64>,
    /// The gap denominator used `|objective|` with a negative objective.
    pub negative_objective_gap: bool,
    pub wall_time_secs: f64,
    pub seeds: Vec<u64>,
}

/// Random initial state: voltages uniform on the open interval (-1, 1),
/// memories at their reference values. Deterministic per seed.
pub fn init_state(soac: &Soac, seed: u64) -> SoacState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = (0..soac.n_vars())
        .map(|_| loop {
            let u: f64 = rng.gen_range(-1.0..1.0);
            if u != -1.0 {
                break u;
            }
        })
        .collect();
    SoacState::with_voltages(v, soac.n_gates())
}

fn derive_restart_seed(seed: u64, restart: u32) -> u64 {
    let mut z = seed ^ (restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Luby restart sequence (1-indexed): 1, 1, 2, 1, 1, 2, 4, 1, 1, 2, ...
fn luby(mut i: u64) -> u64 {
    loop {
        let mut k = 1u32;
        while (1u64 << k) <= i {
            k += 1;
        }
        if i == (1u64 << k) - 1 {
            return 1u64 << (k - 1);
        }
        i -= (1u64 << (k - 1)) - 1;
    }
}

/// One independent solver run over its own circuit and state.
///
/// Drive it with [`Replica::advance_period`] until [`Replica::is_done`];
/// periods from different replicas may be interleaved or run on separate
/// threads, since replicas share nothing mutable.
pub struct Replica<'a> {
    index: usize,
    seed: u64,
    source: &'a IlpModel,
    config: &'a SolverConfig,
    params: DynamicsParams,
    soac: Soac,
    state: SoacState,
    stepper: Stepper,
    rule: TightenRule,
    trivial_lb: f64,
    best: Option<Assignment>,
    history: Vec<Improvement>,
    steps_taken: u64,
    restarts: u32,
    stagnation_restarts: u32,
    periods_since_improvement: u64,
    reseed_counter: u32,
    termination: Option<Termination>,
    trace: Option<&'a mut dyn TraceSink>,
}

impl<'a> Replica<'a> {
    pub fn new(
        source: &'a IlpModel,
        nm: &NormalizedModel,
        config: &'a SolverConfig,
        index: usize,
        trace: Option<&'a mut dyn TraceSink>,
    ) -> Self {
        let seed = config.seed_for(index);
        let soac = Soac::build(nm);
        let state = init_state(&soac, seed);
        let stepper = Stepper::new(&soac);
        let rule = config
            .tighten
            .unwrap_or_else(|| TightenRule::for_objective(source.objective()));
        Self {
            index,
            seed,
            source,
            config,
            params: config.params_for(index),
            soac,
            state,
            stepper,
            rule,
            trivial_lb: verify::trivial_lower_bound(source.objective()),
            best: None,
            history: Vec::new(),
            steps_taken: 0,
            restarts: 0,
            stagnation_restarts: 0,
            periods_since_improvement: 0,
            reseed_counter: 0,
            termination: None,
            trace,
        }
    }

    pub fn is_done(&self) -> bool {
        self.termination.is_some()
    }

    /// Fresh voltages from the next derived seed; the circuit, its objective
    /// bound and the dynamical time all carry over.
    fn reinitialize(&mut self) {
        self.reseed_counter += 1;
        let t = self.state.t;
        self.state = init_state(&self.soac, derive_restart_seed(self.seed, self.reseed_counter));
        self.state.t = t;
    }

    /// Integrates one readout period, then reads out, records any improving
    /// feasible solution and tightens the objective gate.
    pub fn advance_period(&mut self, clock: &dyn Clock, progress: &dyn Progress) {
        if self.termination.is_some() {
            return;
        }
        let stride = self.config.readout_stride;
        let to_do = match self.config.budget {
            Budget::Steps(max) => stride.min(max.saturating_sub(self.steps_taken)),
            Budget::TimeSeconds(_) => stride,
        };
        for _ in 0..to_do {
            match self.stepper.step(&mut self.state, &self.soac, &self.params) {
                Ok(()) => {}
                Err(_) => {
                    // Parameter blow-up: restart this replica from a derived
                    // seed rather than failing the whole solve.
                    self.restarts += 1;
                    if self.restarts > MAX_RESTARTS {
                        self.termination = Some(Termination::Aborted);
                        return;
                    }
                    self.reinitialize();
                }
            }
            // a restarted step still consumes budget, keeping step
            // accounting deterministic
            self.steps_taken += 1;
        }

        let x = dynamics::readout(&self.state, self.params.threshold);
        let objective = self.source.evaluate_objective(&x).expect("readout sized to model");
        if let Some(sink) = self.trace.as_deref_mut() {
            let (max_c, violated) = dynamics::violation_summary(&self.soac, &self.state.v);
            sink.record(self.state.t, max_c, violated, objective);
        }

        let improving = self
            .best
            .as_ref()
            .is_none_or(|b| objective < b.objective_value());
        let mut recorded = false;
        if improving {
            let feas = self
                .source
                .check_feasible(&x, self.config.feas_tol)
                .expect("readout sized to model");
            if feas.feasible {
                recorded = true;
                let elapsed = clock.elapsed_secs();
                self.history.push(Improvement {
                    step: self.steps_taken,
                    time: self.state.t,
                    wall_secs: elapsed,
                    objective,
                });
                self.best = Some(Assignment::new(self.source, x).expect("readout sized to model"));
                progress.improvement(self.index, elapsed, objective);

                let new_bound = tighten_bound(objective, &self.rule);
                if new_bound < self.trivial_lb {
                    // No binary point can reach the tightened bound.
                    self.termination = Some(Termination::BoundExhausted);
                    return;
                }
                if self.soac.objective_gate_index().is_none() {
                    self.soac
                        .add_objective_gate(self.source.objective(), new_bound)
                        .expect("first objective gate");
                } else {
                    // Strict decrease holds mathematically; only f64
                    // rounding can collapse it, in which case the old bound
                    // is kept.
                    let _ = self.soac.update_objective_bound(new_bound);
                }
            }
        }

        if recorded {
            self.periods_since_improvement = 0;
        } else {
            self.periods_since_improvement += 1;
            if let Some(base) = self.config.stagnation_periods {
                let limit = base.saturating_mul(luby(self.stagnation_restarts as u64 + 1));
                if self.periods_since_improvement >= limit {
                    self.stagnation_restarts += 1;
                    self.periods_since_improvement = 0;
                    self.reinitialize();
                }
            }
        }

        match self.config.budget {
            Budget::Steps(max) => {
                if self.steps_taken >= max {
                    self.termination = Some(Termination::Timeout);
                }
            }
            Budget::TimeSeconds(limit) => {
                if clock.elapsed_secs() >= limit {
                    self.termination = Some(Termination::Timeout);
                }
            }
        }
    }

    pub fn into_result(self) -> ReplicaResult {
        ReplicaResult {
            replica: self.index,
            seed: self.seed,
            best: self.best,
            history: self.history,
            steps_taken: self.steps_taken,
            restarts: self.restarts,
            stagnation_restarts: self.stagnation_restarts,
            termination: self.termination.unwrap_or(Termination::Timeout),
        }
    }
}

/// Runs replica `index` to completion.
pub fn run_replica<'a>(
    source: &'a IlpModel,
    nm: &NormalizedModel,
    config: &'a SolverConfig,
    index: usize,
    clock: &dyn Clock,
    progress: &dyn Progress,
    trace: Option<&'a mut dyn TraceSink>,
) -> ReplicaResult {
    let mut replica = Replica::new(source, nm, config, index, trace);
    while !replica.is_done() {
        replica.advance_period(clock, progress);
    }
    replica.into_result()
}

/// Merges per-replica results by minimum objective (ties keep the lowest
/// replica index) and attaches bounds and gap.
pub fn merge_results(
    model: &IlpModel,
    config: &SolverConfig,
    per_replica: Vec<ReplicaResult>,
    wall_time_secs: f64,
) -> SolveReport {
    let bounds = verify::BoundsReport::new(model.objective(), config.external_lower_bound);
    let mut best: Option<(usize, Assignment)> = None;
    for r in &per_replica {
        if let Some(a) = &r.best {
            let better = best
                .as_ref()
                .is_none_or(|(_, cur)| a.objective_value() < cur.objective_value());
            if better {
                best = Some((r.replica, a.clone()));
            }
        }
    }
    let (best_replica, best) = match best {
        Some((i, a)) => (Some(i), Some(a)),
        None => (None, None),
    };
    let (gap, negative) = match &best {
        Some(a) if a.objective_value() != 0.0 => (
            Some(
                verify::gap(a.objective_value(), bounds.best_known_lb)
                    .expect("objective is nonzero"),
            ),
            a.objective_value() < 0.0,
        ),
        _ => (None, false),
    };
    let seeds = per_replica.iter().map(|r| r.seed).collect();
    SolveReport {
        model_name: String::from(model.name()),
        best,
        best_replica,
        per_replica,
        lower_bound: Some(bounds.best_known_lb),
        gap,
        negative_objective_gap: negative,
        wall_time_secs,
        seeds,
    }
}

/// Full solve: normalizes once, runs all replicas round-robin on the
/// calling thread (one readout period each per turn), then merges.
///
/// Replica results are independent of the interleaving, so a thread-based
/// driver that runs each replica to completion produces the same report.
pub fn solve_with(
    model: &IlpModel,
    config: &SolverConfig,
    clock: &dyn Clock,
    progress: &dyn Progress,
) -> Result<SolveReport, ConfigError> {
    config.validate()?;
    let nm = model.normalize();
    let mut replicas: Vec<Replica> = (0..config.n_replicas)
        .map(|i| Replica::new(model, &nm, config, i, None))
        .collect();
    loop {
        let mut all_done = true;
        for replica in replicas.iter_mut() {
            if !replica.is_done() {
                replica.advance_period(clock, progress);
                all_done = false;
            }
        }
        if all_done {
            break;
        }
    }
    let results = replicas.into_iter().map(Replica::into_result).collect();
    Ok(merge_results(model, config, results, clock.elapsed_secs()))
}

/// Deterministic solve under a step budget. Wall-clock budgets need
/// [`solve_with`] and a real clock.
pub fn solve(model: &IlpModel, config: &SolverConfig) -> Result<SolveReport, ConfigError> {
    if matches!(config.budget, Budget::TimeSeconds(_)) {
        return Err(ConfigError::ClockRequired);
    }
    solve_with(model, config, &NullClock, &NoProgress)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LinearConstraint, Relation};
    use core::cell::Cell;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|j| format!("x{j}")).collect()
    }

    fn steps_config(steps: u64) -> SolverConfig {
        SolverConfig {
            budget: Budget::Steps(steps),
            ..SolverConfig::default()
        }
    }

    #[test]
    fn init_state_is_deterministic_per_seed() {
        let m = IlpModel::new("m", names(6), vec![0.0; 6], vec![]).unwrap();
        let soac = Soac::build(&m.normalize());
        let a = init_state(&soac, 7);
        let b = init_state(&soac, 7);
        assert_eq!(a, b);
        assert!(a.v.iter().all(|&v| v.abs() < 1.0));
        assert!(a.xs.is_empty() && a.xl.is_empty());
        assert_eq!(a.t, 0.0);
    }

    #[test]
    fn different_seeds_give_different_states() {
        let m = IlpModel::new("m", names(8), vec![0.0; 8], vec![]).unwrap();
        let soac = Soac::build(&m.normalize());
        for pair in 0..100u64 {
            let a = init_state(&soac, 2 * pair);
            let b = init_state(&soac, 2 * pair + 1);
            assert!(a.v.iter().zip(&b.v).any(|(x, y)| x != y), "seed pair {pair}");
        }
    }

    #[test]
    fn tighten_bound_integral_steps_by_one() {
        let rule = TightenRule { eps_abs: 0.0, eps_rel: 0.0, integral: true };
        assert_eq!(tighten_bound(1950.0, &rule), 1949.0);
    }

    #[test]
    fn tighten_bound_absolute_step() {
        let rule = TightenRule { eps_abs: 0.5, eps_rel: 0.0, integral: false };
        assert_eq!(tighten_bound(10.0, &rule), 9.5);
    }

    #[test]
    fn tighten_bound_is_strictly_below_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let rule = TightenRule {
                eps_abs: if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..10.0) },
                eps_rel: rng.gen_range(0.0..0.99),
                integral: rng.gen_bool(0.3),
            };
            let o: f64 = rng.gen_range(-1e9..1e9);
            assert!(tighten_bound(o, &rule) < o);
        }
        // degenerate rule and huge magnitudes still decrease strictly
        let degenerate = TightenRule { eps_abs: 0.0, eps_rel: 0.0, integral: false };
        for o in [1e300, -1e300, 1e-300, 0.0] {
            assert!(tighten_bound(o, &degenerate) < o);
        }
    }

    #[test]
    fn rule_derivation_detects_integral_objectives() {
        assert!(TightenRule::for_objective(&[1.0, -3.0, 0.0]).integral);
        assert!(!TightenRule::for_objective(&[1.0, 0.5]).integral);
        let r = TightenRule::for_objective(&[2.0, -0.5]);
        assert_eq!(r.eps_abs, 1e-6 * 2.5);
    }

    #[test]
    fn unconstrained_zero_objective_terminates_bound_exhausted() {
        let m = IlpModel::new("m", names(4), vec![0.0; 4], vec![]).unwrap();
        let report = solve(&m, &steps_config(10_000)).unwrap();
        let r = &report.per_replica[0];
        assert_eq!(r.termination, Termination::BoundExhausted);
        assert_eq!(r.history.len(), 1);
        assert_eq!(r.history[0].objective, 0.0);
        assert_eq!(report.best.as_ref().unwrap().objective_value(), 0.0);
    }

    #[test]
    fn infeasible_model_times_out_without_solution() {
        // x1 <= 0 and x1 >= 1
        let m = IlpModel::new(
            "m",
            names(1),
            vec![0.0],
            vec![
                LinearConstraint::new("lo", vec![(0, 1.0)], Relation::Le, 0.0),
                LinearConstraint::new("hi", vec![(0, 1.0)], Relation::Ge, 1.0),
            ],
        )
        .unwrap();
        let report = solve(&m, &steps_config(3_000)).unwrap();
        assert!(report.best.is_none());
        assert!(report.gap.is_none());
        assert_eq!(report.per_replica[0].termination, Termination::Timeout);
        assert_eq!(report.per_replica[0].steps_taken, 3_000);
    }

    #[test]
    fn step_limited_solve_is_reproducible() {
        let m = IlpModel::new(
            "m",
            names(6),
            vec![1.0, -2.0, 3.0, -1.0, 2.0, -3.0],
            vec![LinearConstraint::new(
                "c",
                vec![(0, 1.0), (1, 1.0), (2, 1.0), (3, 1.0)],
                Relation::Le,
                2.0,
            )],
        )
        .unwrap();
        let config = SolverConfig { n_replicas: 3, base_seed: 11, ..steps_config(4_000) };
        let a = solve(&m, &config).unwrap();
        let b = solve(&m, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn merged_best_is_minimum_across_replicas() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 8;
        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
        let m = IlpModel::new(
            "m",
            names(n),
            f,
            vec![LinearConstraint::new(
                "c",
                (0..n).map(|j| (j, 1.0)).collect(),
                Relation::Le,
                4.0,
            )],
        )
        .unwrap();
        let config = SolverConfig { n_replicas: 4, ..steps_config(5_000) };
        let report = solve(&m, &config).unwrap();
        let best = report.best.as_ref().expect("feasible instance").objective_value();
        for r in &report.per_replica {
            if let Some(a) = &r.best {
                assert!(best <= a.objective_value());
            }
        }
        assert_eq!(report.seeds, vec![0, 1, 2, 3]);
    }

    #[test]
    fn histories_are_strictly_decreasing_and_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for trial in 0..10 {
            let n = 10;
            let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-9..=9) as f64).collect();
            let m = IlpModel::new(
                "m",
                names(n),
                f,
                vec![
                    LinearConstraint::new(
                        "c1",
                        (0..n).map(|j| (j, 1.0)).collect(),
                        Relation::Le,
                        5.0,
                    ),
                    LinearConstraint::new(
                        "c2",
                        vec![(0, 1.0), (1, 1.0), (2, 1.0)],
                        Relation::Ge,
                        1.0,
                    ),
                ],
            )
            .unwrap();
            let config = SolverConfig { base_seed: trial, ..steps_config(20_000) };
            let report = solve(&m, &config).unwrap();
            for r in &report.per_replica {
                for pair in r.history.windows(2) {
                    assert!(pair[1].objective < pair[0].objective);
                }
                // bound updates recomputed from the history are strictly
                // decreasing as well
                let rule = TightenRule::for_objective(m.objective());
                let bounds: Vec<f64> =
                    r.history.iter().map(|h| tighten_bound(h.objective, &rule)).collect();
                for pair in bounds.windows(2) {
                    assert!(pair[1] < pair[0]);
                }
                for h in &r.history {
                    assert!(h.objective >= verify::trivial_lower_bound(m.objective()));
                }
                if let Some(best) = &r.best {
                    assert_eq!(best.objective_value(), r.history.last().unwrap().objective);
                    assert!(m.check_feasible(best.values(), 0.0).unwrap().feasible);
                }
            }
        }
    }

    /// Clock that advances a fixed amount every query.
    struct TickClock {
        now: Cell<f64>,
        tick: f64,
    }

    impl Clock for TickClock {
        fn elapsed_secs(&self) -> f64 {
            let t = self.now.get() + self.tick;
            self.now.set(t);
            t
        }
    }

    #[test]
    fn wall_clock_budget_stops_the_solve() {
        let m = IlpModel::new(
            "m",
            names(4),
            vec![1.0; 4],
            vec![LinearConstraint::new("c", vec![(0, 1.0)], Relation::Ge, 1.0)],
        )
        .unwrap();
        let config = SolverConfig {
            budget: Budget::TimeSeconds(1.0),
            ..SolverConfig::default()
        };
        let clock = TickClock { now: Cell::new(0.0), tick: 0.3 };
        let report = solve_with(&m, &config, &clock, &NoProgress).unwrap();
        assert_eq!(report.per_replica[0].termination, Termination::Timeout);
        // the replica saw at most limit + one readout period of clock time
        assert!(report.wall_time_secs >= 1.0);
    }

    #[test]
    fn wall_clock_budget_requires_real_clock() {
        let m = IlpModel::new("m", names(1), vec![0.0], vec![]).unwrap();
        let config = SolverConfig::default();
        assert_eq!(solve(&m, &config), Err(ConfigError::ClockRequired));
    }

    #[test]
    fn config_validation_rejects_bad_settings() {
        let ok = SolverConfig::default();
        assert!(ok.validate().is_ok());
        assert!(SolverConfig { n_replicas: 0, ..ok.clone() }.validate().is_err());
        assert!(SolverConfig { readout_stride: 0, ..ok.clone() }.validate().is_err());
        assert!(SolverConfig { budget: Budget::TimeSeconds(0.0), ..ok.clone() }
            .validate()
            .is_err());
        assert!(SolverConfig { budget: Budget::Steps(0), ..ok.clone() }.validate().is_err());
        assert!(SolverConfig { params_grid: vec![], ..ok.clone() }.validate().is_err());
        assert!(SolverConfig { feas_tol: -1.0, ..ok.clone() }.validate().is_err());
        assert!(SolverConfig { external_lower_bound: Some(f64::NAN), ..ok.clone() }
            .validate()
            .is_err());
        let bad_rule = TightenRule { eps_abs: 1.0, eps_rel: 1.0, integral: false };
        assert!(SolverConfig { tighten: Some(bad_rule), ..ok }.validate().is_err());
    }

    #[test]
    fn luby_sequence_prefix() {
        let got: Vec<u64> = (1..=15).map(luby).collect();
        assert_eq!(got, vec![1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn stagnant_replicas_restart_from_derived_seeds() {
        // An infeasible model never improves, so restarts must fire on the
        // Luby schedule; the run stays deterministic.
        let m = IlpModel::new(
            "m",
            names(2),
            vec![0.0, 0.0],
            vec![
                LinearConstraint::new("lo", vec![(0, 1.0), (1, 1.0)], Relation::Le, 0.0),
                LinearConstraint::new("hi", vec![(0, 1.0), (1, 1.0)], Relation::Ge, 2.0),
            ],
        )
        .unwrap();
        let config = SolverConfig {
            stagnation_periods: Some(2),
            ..steps_config(5_000)
        };
        let a = solve(&m, &config).unwrap();
        assert!(a.per_replica[0].stagnation_restarts > 5);
        assert!(a.per_replica[0].best.is_none());
        let b = solve(&m, &config).unwrap();
        assert_eq!(a, b);

        let off = SolverConfig { stagnation_periods: None, ..steps_config(5_000) };
        let c = solve(&m, &off).unwrap();
        assert_eq!(c.per_replica[0].stagnation_restarts, 0);
    }

    #[test]
    fn progress_reports_every_improvement() {
        use std::cell::RefCell;
        struct Capture(RefCell<Vec<(usize, f64)>>);
        impl Progress for Capture {
            fn improvement(&self, replica: usize, _elapsed: f64, objective: f64) {
                self.0.borrow_mut().push((replica, objective));
            }
        }
        let m = IlpModel::new(
            "m",
            names(5),
            vec![-1.0, -2.0, -4.0, 3.0, 5.0],
            vec![LinearConstraint::new(
                "c",
                vec![(0, 1.0), (1, 1.0), (2, 1.0)],
                Relation::Le,
                2.0,
            )],
        )
        .unwrap();
        let capture = Capture(RefCell::new(Vec::new()));
        let config = steps_config(20_000);
        let report = solve_with(&m, &config, &NullClock, &capture).unwrap();
        let events = capture.0.into_inner();
        let total: usize = report.per_replica.iter().map(|r| r.history.len()).sum();
        assert_eq!(events.len(), total);
        assert!(!events.is_empty());
    }
}
