//! Exhaustive policy enumeration for the stochastic baseline: exact
//! expected reward sums by probability-weighted trajectory expansion.

use pimdp::model::{ActionId, StochMdpModel};

use crate::OracleError;

pub struct StochTables {
    pub n: usize,
    pub avail: Vec<Vec<ActionId>>,
    pub prob: Vec<Vec<Vec<f64>>>,
    pub reward: Vec<Vec<f64>>,
}

impl StochTables {
    pub fn from_model(model: &StochMdpModel) -> StochTables {
        let n = model.n_states();
        let na = model.n_actions();
        StochTables {
            n,
            avail: (0..n).map(|s| model.available(s).to_vec()).collect(),
            prob: (0..n)
                .map(|s| {
                    (0..na)
                        .map(|a| (0..n).map(|s2| model.prob(s, a, s2)).collect())
                        .collect()
                })
                .collect(),
            reward: (0..n)
                .map(|s| (0..na).map(|a| model.reward(s, a)).collect())
                .collect(),
        }
    }
}

/// Expected sum of rewards of `rules` (one decision rule per stage 0..=n)
/// from `s0`, expanding every trajectory branch with its probability.
pub fn policy_expectation(t: &StochTables, rules: &[Vec<ActionId>], stage: usize, s: usize) -> f64 {
    let a = rules[stage][s];
    let mut v = t.reward[s][a];
    if stage + 1 < rules.len() {
        for s2 in 0..t.n {
            let p = t.prob[s][a][s2];
            if p > 0.0 {
                v += p * policy_expectation(t, rules, stage + 1, s2);
            }
        }
    }
    v
}

pub struct StochEnumeration {
    pub tables: StochTables,
    pub policy_count: u128,
    pub per_policy: Vec<Vec<f64>>,
    pub best: Vec<f64>,
}

/// Enumerates every stage-indexed policy over stages 0..=n (the terminal
/// stage also acts and collects its reward) and evaluates it exactly.
pub fn enumerate_stoch_policy_values(
    model: &StochMdpModel,
    n: usize,
    cap: u128,
) -> Result<StochEnumeration, OracleError> {
    if n == 0 {
        return Err(OracleError::ZeroHorizon);
    }
    let tables = StochTables::from_model(model);
    let stages = n + 1;
    let mut count: u128 = 1;
    for _ in 0..stages {
        for s in 0..tables.n {
            count = count.saturating_mul(tables.avail[s].len() as u128);
        }
    }
    if count > cap {
        return Err(OracleError::CapExceeded { count, cap });
    }
    let mut rules: Vec<Vec<ActionId>> = (0..stages)
        .map(|_| (0..tables.n).map(|s| tables.avail[s][0]).collect())
        .collect();
    let mut digits = vec![0usize; stages * tables.n];
    let mut per_policy = Vec::with_capacity(count as usize);
    let mut best = vec![f64::NEG_INFINITY; tables.n];
    loop {
        let values: Vec<f64> = (0..tables.n)
            .map(|s| policy_expectation(&tables, &rules, 0, s))
            .collect();
        for (b, &v) in best.iter_mut().zip(&values) {
            if v > *b {
                *b = v;
            }
        }
        per_policy.push(values);
        let mut i = 0;
        loop {
            if i == digits.len() {
                return Ok(StochEnumeration {
                    tables,
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{random_stoch_mdp, StochGenConfig};

    #[test]
    fn deterministic_model_is_a_single_trajectory_sum() {
        let mut b = StochMdpModel::builder(0.9);
        for s in ["x", "y"] {
            b.add_state(s).unwrap();
        }
        b.add_action("a").unwrap();
        b.set_prob("x", "a", "y", 1.0).unwrap();
        b.set_prob("y", "a", "y", 1.0).unwrap();
        b.set_reward("x", "a", 1.5).unwrap();
        b.set_reward("y", "a", 0.25).unwrap();
        let model = b.build().unwrap();
        let e = enumerate_stoch_policy_values(&model, 2, 1000).unwrap();
        assert_eq!(e.policy_count, 1);
        // stages 0,1,2 from x: 1.5 + 0.25 + 0.25
        assert!((e.per_policy[0][0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn one_step_values_match_manual_bellman_expansion() {
        let model = random_stoch_mdp(
            11,
            &StochGenConfig {
                n_states: 3,
                n_actions: 2,
                nonneg_rewards: false,
            },
        );
        let t = StochTables::from_model(&model);
        let e = enumerate_stoch_policy_values(&model, 1, 100_000).unwrap();
        for p in 0..e.per_policy.len() {
            // decode the policy like the enumerator does
            let mut index = p;
            let mut rules = vec![vec![0usize; 3]; 2];
            for stage in 0..2 {
                for s in 0..3 {
                    let m = t.avail[s].len();
                    rules[stage][s] = t.avail[s][index % m];
                    index /= m;
                }
            }
            for s in 0..3 {
                let a = rules[0][s];
                let mut expect = t.reward[s][a];
                for s2 in 0..3 {
                    expect += t.prob[s][a][s2] * t.reward[s2][rules[1][s2]];
                }
                assert!((e.per_policy[p][s] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cap_trips() {
        let model = random_stoch_mdp(
            1,
            &StochGenConfig {
                n_states: 3,
                n_actions: 3,
                nonneg_rewards: true,
            },
        );
        assert!(matches!(
            enumerate_stoch_policy_values(&model, 2, 10),
            Err(OracleError::CapExceeded { .. })
        ));
    }
}
