//! Exhaustive policy enumeration for fully observable possibilistic MDPs.
//!
//! A policy is a tuple of per-stage decision rules. Its value at a state is
//! the min over trajectories of max(n(pi(trajectory)), mu(trajectory)),
//! with pi the min of the stepwise possibilities and mu either the terminal
//! state's utility or the min over all visited states. Two structurally
//! different evaluators are provided: a depth-first walk of the trajectory
//! tree and a flat scan over all state sequences.

use pimdp::mdp::UtilityMode;
use pimdp::model::{ActionId, PiMdpModel};

use crate::OracleError;

/// Dense snapshot of a model's tables, rebuilt through the accessors so the
/// enumeration below touches no solver code.
pub struct PiTables {
    pub n: usize,
    pub top: u16,
    pub avail: Vec<Vec<ActionId>>,
    pub trans: Vec<Vec<Vec<u16>>>,
    pub util: Vec<u16>,
}

impl PiTables {
    pub fn from_model(model: &PiMdpModel) -> PiTables {
        let n = model.n_states();
        let na = model.n_actions();
        PiTables {
            n,
            top: (model.scale().size() - 1) as u16,
            avail: (0..n).map(|s| model.available(s).to_vec()).collect(),
            trans: (0..n)
                .map(|s| {
                    (0..na)
                        .map(|a| (0..n).map(|s2| model.trans_rank(s, a, s2)).collect())
                        .collect()
                })
                .collect(),
            util: (0..n).map(|s| model.util_rank(s)).collect(),
        }
    }
}

fn dfs(
    t: &PiTables,
    rules: &[Vec<ActionId>],
    stage: usize,
    s: usize,
    pi: u16,
    mu_before: u16,
    mode: UtilityMode,
) -> u16 {
    let mu_here = mu_before.min(t.util[s]);
    if stage == rules.len() {
        let mu_tau = match mode {
            UtilityMode::TerminalOnly => t.util[s],
            UtilityMode::Intermediate => mu_here,
        };
        return (t.top - pi).max(mu_tau);
    }
    let a = rules[stage][s];
    let mut value = t.top;
    for s2 in 0..t.n {
        let p = t.trans[s][a][s2];
        if p == 0 {
            continue; // an impossible step makes the trajectory neutral in the min
        }
        let v = dfs(t, rules, stage + 1, s2, pi.min(p), mu_here, mode);
        if v < value {
            value = v;
        }
    }
    value
}

/// Value of one policy at one start state, by depth-first trajectory walk.
pub fn policy_value_dfs(
    tables: &PiTables,
    rules: &[Vec<ActionId>],
    s0: usize,
    mode: UtilityMode,
) -> u16 {
    dfs(tables, rules, 0, s0, tables.top, tables.top, mode)
}

/// One realizable trajectory of a policy: the visited states, its joint
/// possibility (min of the stepwise possibilities) and its satisfaction
/// (min of the visited utilities).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub states: Vec<usize>,
    pub possibility: u16,
    pub satisfaction: u16,
}

impl Trajectory {
    /// The criterion contribution of this trajectory:
    /// max(n(possibility), mu(trajectory)) per the utility mode.
    pub fn guarded_value(&self, tables: &PiTables, mode: UtilityMode) -> u16 {
        let mu_tau = match mode {
            UtilityMode::TerminalOnly => tables.util[*self.states.last().unwrap()],
            UtilityMode::Intermediate => self.satisfaction,
        };
        (tables.top - self.possibility).max(mu_tau)
    }
}

/// All trajectories of positive possibility under `rules` from `s0`.
pub fn trajectories(tables: &PiTables, rules: &[Vec<ActionId>], s0: usize) -> Vec<Trajectory> {
    let mut out = Vec::new();
    let mut states = vec![s0];
    fn grow(
        t: &PiTables,
        rules: &[Vec<ActionId>],
        states: &mut Vec<usize>,
        pi: u16,
        out: &mut Vec<Trajectory>,
    ) {
        let stage = states.len() - 1;
        if stage == rules.len() {
            let satisfaction = states.iter().map(|&s| t.util[s]).min().unwrap();
            out.push(Trajectory {
                states: states.clone(),
                possibility: pi,
                satisfaction,
            });
            return;
        }
        let s = *states.last().unwrap();
        let a = rules[stage][s];
        for s2 in 0..t.n {
            let p = t.trans[s][a][s2];
            if p == 0 {
                continue;
            }
            states.push(s2);
            grow(t, rules, states, pi.min(p), out);
            states.pop();
        }
    }
    grow(tables, rules, &mut states, tables.top, &mut out);
    out
}

/// Same value computed by scanning every state sequence of length `n`
/// (impossible ones included; they evaluate to the neutral top).
pub fn policy_value_sequences(
    tables: &PiTables,
    rules: &[Vec<ActionId>],
    s0: usize,
    mode: UtilityMode,
) -> u16 {
    let n = rules.len();
    let mut seq = vec![0usize; n];
    let mut value = tables.top;
    loop {
        let mut pi = tables.top;
        let mut mu = tables.util[s0];
        let mut prev = s0;
        for (stage, &s) in seq.iter().enumerate() {
            let a = rules[stage][prev];
            pi = pi.min(tables.trans[prev][a][s]);
            mu = mu.min(tables.util[s]);
            prev = s;
        }
        let mu_tau = match mode {
            UtilityMode::TerminalOnly => tables.util[prev],
            UtilityMode::Intermediate => mu,
        };
        value = value.min((tables.top - pi).max(mu_tau));
        // advance the sequence odometer
        let mut i = 0;
        loop {
            if i == n {
                return value;
            }
            seq[i] += 1;
            if seq[i] < tables.n {
                break;
            }
            seq[i] = 0;
            i += 1;
        }
    }
}

/// Every policy's value at every state, plus the per-state optimum.
pub struct PolicyEnumeration {
    pub tables: PiTables,
    pub n_stages: usize,
    pub policy_count: u128,
    /// per_policy\[p\]\[s\] in enumeration order
    pub per_policy: Vec<Vec<u16>>,
    pub best: Vec<u16>,
}

impl PolicyEnumeration {
    /// Decodes a policy index back into stage-indexed decision rules.
    pub fn policy(&self, mut index: usize) -> Vec<Vec<ActionId>> {
        let mut rules = vec![vec![0; self.tables.n]; self.n_stages];
        for stage in 0..self.n_stages {
            for s in 0..self.tables.n {
                let m = self.tables.avail[s].len();
                rules[stage][s] = self.tables.avail[s][index % m];
                index /= m;
            }
        }
        rules
    }
}

/// Exhaustively evaluates every stage-indexed policy of horizon `n`.
pub fn enumerate_policy_values(
    model: &PiMdpModel,
    n: usize,
    mode: UtilityMode,
    cap: u128,
) -> Result<PolicyEnumeration, OracleError> {
    let tables = PiTables::from_model(model);
    let mut count: u128 = 1;
    for _ in 0..n {
        for s in 0..tables.n {
            count = count.saturating_mul(tables.avail[s].len() as u128);
        }
    }
    if count > cap {
        return Err(OracleError::CapExceeded { count, cap });
    }
    let mut rules: Vec<Vec<ActionId>> = (0..n)
        .map(|_| (0..tables.n).map(|s| tables.avail[s][0]).collect())
        .collect();
    let mut digits = vec![0usize; n * tables.n];
    let mut per_policy = Vec::with_capacity(count as usize);
    let mut best = vec![0u16; tables.n];
    loop {
        let values: Vec<u16> = (0..tables.n)
            .map(|s| policy_value_dfs(&tables, &rules, s, mode))
            .collect();
        for (b, &v) in best.iter_mut().zip(&values) {
            if v > *b {
                *b = v;
            }
        }
        per_policy.push(values);
        // advance the policy odometer
        let mut i = 0;
        loop {
            if i == digits.len() {
                return Ok(PolicyEnumeration {
                    tables,
                    n_stages: n,
                    policy_count: count,
                    per_policy,
                    best,
                });
            }
            let s = i % tables.n;
            let stage = i / tables.n;
            digits[i] += 1;
            if digits[i] < tables.avail[s].len() {
                rules[stage][s] = tables.avail[s][digits[i]];
                break;
            }
            digits[i] = 0;
            rules[stage][s] = tables.avail[s][0];
            i += 1;
        }
    }
}
