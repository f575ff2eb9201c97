//! Classical expected-utility MDP algorithms, kept beside the possibilistic
//! solvers for side-by-side comparison, plus probabilistic belief updates.
//!
//! Floating-point comparisons on this side carry explicit tolerances; the
//! possibilistic side is tolerance-free by construction.

use thiserror::Error;

use crate::model::{ActionId, ObsId, StateId, StochMdpModel, ValidationReport, PROB_SUM_TOL};

#[derive(Debug, Error)]
pub enum StochError {
    #[error("model failed validation:\n{0}")]
    InvalidModel(ValidationReport),
    #[error("epsilon must be positive, got {0}")]
    BadEpsilon(f64),
    #[error("a finite horizon must be at least 1")]
    ZeroHorizon,
    #[error("belief does not sum to 1 (sum = {0})")]
    BeliefNotNormalized(f64),
    #[error("belief has {got} entries but the model has {want} states")]
    WrongLength { got: usize, want: usize },
    #[error("observation `{0}` has probability 0 under this belief")]
    ImpossibleObservation(ObsId),
}

fn validated(model: &StochMdpModel) -> Result<(), StochError> {
    let report = model.validate();
    if report.is_ok() {
        Ok(())
    } else {
        Err(StochError::InvalidModel(report))
    }
}

/// Per-stage values and greedy decision rules of a finite-horizon solve.
#[derive(Debug, Clone)]
pub struct StochFiniteSolution {
    /// values\[t\]\[s\] for t = 0..=n
    pub values: Vec<Vec<f64>>,
    /// chosen action per stage (t = 0..=n) and state
    pub policies: Vec<Vec<ActionId>>,
}

/// Exact finite-horizon backwards induction maximizing the expected sum of
/// rewards over stages 0..=n. The terminal stage still collects a reward,
/// so with a single stage (n = 1) two rewards accrue.
pub fn backwards_induction_stoch(
    model: &StochMdpModel,
    n: usize,
) -> Result<StochFiniteSolution, StochError> {
    if n == 0 {
        return Err(StochError::ZeroHorizon);
    }
    validated(model)?;
    let ns = model.n_states();
    let mut values = vec![vec![0.0; ns]; n + 2];
    let mut policies = vec![vec![0usize; ns]; n + 1];
    for t in (0..=n).rev() {
        for s in 0..ns {
            let mut best = f64::NEG_INFINITY;
            let mut best_a = model.available(s)[0];
            for &a in model.available(s) {
                let mut q = model.reward(s, a);
                for s2 in 0..ns {
                    q += model.prob(s, a, s2) * values[t + 1][s2];
                }
                if q > best {
                    best = q;
                    best_a = a;
                }
            }
            values[t][s] = best;
            policies[t][s] = best_a;
        }
    }
    values.pop();
    Ok(StochFiniteSolution { values, policies })
}

/// Q-table, values and greedy policy of a discounted stationary solve.
#[derive(Debug, Clone)]
pub struct StochStationarySolution {
    pub q: Vec<Vec<(ActionId, f64)>>,
    pub values: Vec<f64>,
    pub policy: Vec<ActionId>,
    pub iterations: usize,
}

/// Discounted value iteration, stopping when the sup-norm gap of successive
/// iterates falls below `epsilon * (1 - gamma) / (2 * gamma)`, which makes
/// the returned values epsilon-close to the optimum in sup norm.
pub fn value_iteration_stoch(
    model: &StochMdpModel,
    epsilon: f64,
) -> Result<StochStationarySolution, StochError> {
    if !(epsilon > 0.0) {
        return Err(StochError::BadEpsilon(epsilon));
    }
    validated(model)?;
    let gamma = model.discount();
    let ns = model.n_states();
    let threshold = epsilon * (1.0 - gamma) / (2.0 * gamma);
    let mut v = vec![0.0; ns];
    let mut iterations = 0usize;
    loop {
        iterations += 1;
        let mut next = vec![0.0; ns];
        for s in 0..ns {
            let mut best = f64::NEG_INFINITY;
            for &a in model.available(s) {
                let mut q = model.reward(s, a);
                for s2 in 0..ns {
                    q += gamma * model.prob(s, a, s2) * v[s2];
                }
                best = best.max(q);
            }
            next[s] = best;
        }
        let gap = v
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = next;
        if gap < threshold {
            break;
        }
    }
    let mut q_rows = Vec::with_capacity(ns);
    let mut policy = Vec::with_capacity(ns);
    for s in 0..ns {
        let mut row = Vec::new();
        let mut best = f64::NEG_INFINITY;
        let mut best_a = model.available(s)[0];
        for &a in model.available(s) {
            let mut q = model.reward(s, a);
            for s2 in 0..ns {
                q += gamma * model.prob(s, a, s2) * v[s2];
            }
            row.push((a, q));
            if q > best {
                best = q;
                best_a = a;
            }
        }
        q_rows.push(row);
        policy.push(best_a);
    }
    Ok(StochStationarySolution {
        q: q_rows,
        values: v,
        policy,
        iterations,
    })
}

/// A probability distribution over states.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbBelief(Vec<f64>);

impl ProbBelief {
    pub fn new(b: Vec<f64>) -> Result<ProbBelief, StochError> {
        let sum: f64 = b.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL || b.iter().any(|&x| x < 0.0) {
            return Err(StochError::BeliefNotNormalized(sum));
        }
        Ok(ProbBelief(b))
    }

    pub fn uniform(n: usize) -> ProbBelief {
        ProbBelief(vec![1.0 / n as f64; n])
    }

    pub fn point_mass(n: usize, s: StateId) -> ProbBelief {
        let mut b = vec![0.0; n];
        b[s] = 1.0;
        ProbBelief(b)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }
}

/// Outcome of one probabilistic belief update.
#[derive(Debug, Clone)]
pub struct ProbBeliefUpdate {
    /// predicted distribution after the action, before observing
    pub predicted: Vec<f64>,
    /// probability of the observation given the action and prior belief
    pub observation_prob: f64,
    /// posterior belief, normalized
    pub revised: ProbBelief,
}

/// Bayesian belief update: forward prediction through the transition
/// kernel, observation marginal, and the normalized posterior.
/// `obs_prob[s][a][o]` is the probability of observing `o` when the system
/// lands in `s` after `a`. Errors when the observation has probability 0.
pub fn prob_belief_update(
    model: &StochMdpModel,
    obs_prob: &[Vec<Vec<f64>>],
    b: &ProbBelief,
    a: ActionId,
    o: ObsId,
) -> Result<ProbBeliefUpdate, StochError> {
    let ns = model.n_states();
    if b.probs().len() != ns {
        return Err(StochError::WrongLength {
            got: b.probs().len(),
            want: ns,
        });
    }
    let mut predicted = vec![0.0; ns];
    for (s2, &w) in b.probs().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (s, slot) in predicted.iter_mut().enumerate() {
            *slot += model.prob(s2, a, s) * w;
        }
    }
    let observation_prob: f64 = (0..ns).map(|s| obs_prob[s][a][o] * predicted[s]).sum();
    if observation_prob <= 0.0 {
        return Err(StochError::ImpossibleObservation(o));
    }
    let revised: Vec<f64> = (0..ns)
        .map(|s| obs_prob[s][a][o] * predicted[s] / observation_prob)
        .collect();
    Ok(ProbBeliefUpdate {
        predicted,
        observation_prob,
        revised: ProbBelief(revised),
    })
}
