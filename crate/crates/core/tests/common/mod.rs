//! Shared instance generators for the integration suites. All coefficients
//! are integer-valued so feasibility questions have exact answers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use soac::model::{IlpModel, LinearConstraint, Relation};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn var_names(n: usize) -> Vec<String> {
    (0..n).map(|j| format!("x{j}")).collect()
}

fn random_terms(rng: &mut ChaCha8Rng, n: usize, max_terms: usize) -> Vec<(usize, f64)> {
    let k = rng.gen_range(1..=max_terms.min(n));
    let mut vars: Vec<usize> = (0..n).collect();
    for s in 0..k {
        let pick = rng.gen_range(s..n);
        vars.swap(s, pick);
    }
    vars[..k]
        .iter()
        .map(|&j| {
            let c = loop {
                let c = rng.gen_range(-5..=5);
                if c != 0 {
                    break c;
                }
            };
            (j, c as f64)
        })
        .collect()
}

/// Random model with mixed relations and integer data; feasibility is not
/// guaranteed.
pub fn random_model(rng: &mut ChaCha8Rng, n: usize, m: usize) -> IlpModel {
    let objective: Vec<f64> = (0..n).map(|_| rng.gen_range(-9..=9) as f64).collect();
    let constraints = (0..m)
        .map(|i| {
            let terms = random_terms(rng, n, 6);
            let relation = match rng.gen_range(0..3) {
                0 => Relation::Le,
                1 => Relation::Ge,
                _ => Relation::Eq,
            };
            let rhs = rng.gen_range(-6..=6) as f64;
            LinearConstraint::new(format!("c{i}"), terms, relation, rhs)
        })
        .collect();
    IlpModel::new("random", var_names(n), objective, constraints).unwrap()
}

/// Random model made feasible by construction: a planted binary point
/// satisfies every row (equalities exactly, inequalities with small slack).
pub fn random_feasible_model(rng: &mut ChaCha8Rng, n: usize, m: usize) -> IlpModel {
    let planted: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    let objective: Vec<f64> = (0..n).map(|_| rng.gen_range(-9..=9) as f64).collect();
    let constraints = (0..m)
        .map(|i| {
            let terms = random_terms(rng, n, 6);
            let lhs: f64 = terms.iter().map(|&(j, a)| if planted[j] { a } else { 0.0 }).sum();
            let (relation, rhs) = match rng.gen_range(0..3) {
                0 => (Relation::Le, lhs + rng.gen_range(0..3) as f64),
                1 => (Relation::Ge, lhs - rng.gen_range(0..3) as f64),
                _ => (Relation::Eq, lhs),
            };
            LinearConstraint::new(format!("c{i}"), terms, relation, rhs)
        })
        .collect();
    IlpModel::new("planted", var_names(n), objective, constraints).unwrap()
}

pub fn random_binary(rng: &mut ChaCha8Rng, n: usize) -> Vec<bool> {
    (0..n).map(|_| rng.gen_bool(0.5)).collect()
}
