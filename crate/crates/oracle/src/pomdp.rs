//! Exhaustive contingent-plan search and the backwards-unrolled
//! finite-horizon recursion for possibilistic POMDPs.
//!
//! The belief operations here (prediction, observation possibility,
//! min-based revision) are re-implemented on raw rank vectors, independent
//! of the solver crate's belief module.

use std::collections::HashMap;

use pimdp::mdp::UtilityMode;
use pimdp::model::{ActionId, PiPomdpModel};

use crate::OracleError;

pub struct PoTables {
    pub n: usize,
    pub na: usize,
    pub no: usize,
    pub top: u16,
    pub avail: Vec<Vec<ActionId>>,
    pub trans: Vec<Vec<Vec<u16>>>,
    pub obs: Vec<Vec<Vec<u16>>>,
    pub util: Vec<u16>,
}

impl PoTables {
    pub fn from_model(model: &PiPomdpModel) -> PoTables {
        let base = model.base();
        let n = base.n_states();
        let na = base.n_actions();
        let no = model.n_observations();
        PoTables {
            n,
            na,
            no,
            top: (model.scale().size() - 1) as u16,
            avail: (0..n).map(|s| base.available(s).to_vec()).collect(),
            trans: (0..n)
                .map(|s| {
                    (0..na)
                        .map(|a| (0..n).map(|s2| base.trans_rank(s, a, s2)).collect())
                        .collect()
                })
                .collect(),
            obs: (0..n)
                .map(|s| {
                    (0..na)
                        .map(|a| (0..no).map(|o| model.obs_rank(s, a, o)).collect())
                        .collect()
                })
                .collect(),
            util: (0..n).map(|s| base.util_rank(s)).collect(),
        }
    }

    pub fn available_in(&self, beta: &[u16], a: ActionId) -> bool {
        beta.iter()
            .enumerate()
            .any(|(s, &r)| r > 0 && self.avail[s].contains(&a))
    }

    pub fn predict(&self, beta: &[u16], a: ActionId) -> Vec<u16> {
        let mut out = vec![0u16; self.n];
        for (from, &w) in beta.iter().enumerate() {
            if w == 0 || !self.avail[from].contains(&a) {
                continue;
            }
            for (s, slot) in out.iter_mut().enumerate() {
                let v = self.trans[from][a][s].min(w);
                if v > *slot {
                    *slot = v;
                }
            }
        }
        out
    }

    pub fn obs_poss(&self, beta_a: &[u16], a: ActionId, o: usize) -> u16 {
        (0..self.n)
            .map(|s| self.obs[s][a][o].min(beta_a[s]))
            .max()
            .unwrap_or(0)
    }

    pub fn revise(&self, beta_a: &[u16], a: ActionId, o: usize) -> Option<Vec<u16>> {
        let joint: Vec<u16> = (0..self.n)
            .map(|s| self.obs[s][a][o].min(beta_a[s]))
            .collect();
        let m = joint.iter().copied().max().unwrap_or(0);
        if m == 0 {
            return None;
        }
        Some(
            joint
                .iter()
                .map(|&j| if j == m { self.top } else { j })
                .collect(),
        )
    }

    pub fn belief_utility(&self, beta: &[u16]) -> u16 {
        beta.iter()
            .zip(&self.util)
            .map(|(&b, &u)| (self.top - b).max(u))
            .min()
            .unwrap_or(self.top)
    }
}

/// An observation-indexed decision tree: the policy object of finite-horizon
/// partially observable planning. Every observation branch is present.
#[derive(Debug, Clone, PartialEq)]
pub enum Plan {
    Leaf,
    Node { action: ActionId, branches: Vec<Plan> },
}

impl Plan {
    pub fn depth(&self) -> usize {
        match self {
            Plan::Leaf => 0,
            Plan::Node { branches, .. } => {
                1 + branches.iter().map(Plan::depth).max().unwrap_or(0)
            }
        }
    }
}

fn count_plans(na: u128, no: u32, depth: usize) -> u128 {
    let mut c: u128 = 1;
    for _ in 0..depth {
        c = match c.checked_pow(no).and_then(|x| x.checked_mul(na)) {
            Some(x) => x,
            None => return u128::MAX,
        };
    }
    c
}

fn build_plans(na: usize, no: usize, depth: usize) -> Vec<Plan> {
    if depth == 0 {
        return vec![Plan::Leaf];
    }
    let subs = build_plans(na, no, depth - 1);
    let mut out = Vec::new();
    let mut pick = vec![0usize; no];
    for action in 0..na {
        loop {
            out.push(Plan::Node {
                action,
                branches: pick.iter().map(|&i| subs[i].clone()).collect(),
            });
            let mut i = 0;
            loop {
                if i == no {
                    pick.iter_mut().for_each(|x| *x = 0);
                    break;
                }
                pick[i] += 1;
                if pick[i] < subs.len() {
                    break;
                }
                pick[i] = 0;
                i += 1;
            }
            if pick.iter().all(|&x| x == 0) {
                break;
            }
        }
    }
    out
}

/// Value of a plan from a belief; `None` when the plan prescribes an action
/// that is available nowhere in some reached belief's support.
pub fn plan_value(tables: &PoTables, plan: &Plan, beta: &[u16], mode: UtilityMode) -> Option<u16> {
    match plan {
        Plan::Leaf => Some(tables.belief_utility(beta)),
        Plan::Node { action, branches } => {
            if !tables.available_in(beta, *action) {
                return None;
            }
            let beta_a = tables.predict(beta, *action);
            let mut v = tables.top;
            for (o, sub) in branches.iter().enumerate() {
                let poss = tables.obs_poss(&beta_a, *action, o);
                if poss == 0 {
                    continue;
                }
                let next = tables.revise(&beta_a, *action, o).expect("possible observation");
                let below = plan_value(tables, sub, &next, mode)?;
                v = v.min((tables.top - poss).max(below));
            }
            if mode == UtilityMode::Intermediate {
                v = v.min(tables.belief_utility(beta));
            }
            Some(v)
        }
    }
}

/// Best value over every depth-`n` contingent plan from `initial`.
/// Also returns the plans' count for reporting.
pub fn enumerate_plan_values(
    model: &PiPomdpModel,
    initial: &[u16],
    n: usize,
    mode: UtilityMode,
    cap: u128,
) -> Result<(u16, u128), OracleError> {
    let tables = PoTables::from_model(model);
    let count = count_plans(tables.na as u128, tables.no as u32, n);
    if count > cap {
        return Err(OracleError::CapExceeded { count, cap });
    }
    let plans = build_plans(tables.na, tables.no, n);
    let best = plans
        .iter()
        .filter_map(|p| plan_value(&tables, p, initial, mode))
        .max()
        .unwrap_or_else(|| tables.belief_utility(initial));
    Ok((best, count))
}

/// The finite-horizon recursion unrolled backwards with memoization:
/// `u_0 = mu(beta)`, and with `t` stages to go the value is the best action's
/// min over possible observations of max(n(poss), u_{t-1}(revised)).
pub fn finite_horizon_value(
    model: &PiPomdpModel,
    initial: &[u16],
    n: usize,
    mode: UtilityMode,
) -> u16 {
    let tables = PoTables::from_model(model);
    let mut memo: HashMap<(Vec<u16>, usize), u16> = HashMap::new();
    fn go(
        t: &PoTables,
        memo: &mut HashMap<(Vec<u16>, usize), u16>,
        beta: &[u16],
        togo: usize,
        mode: UtilityMode,
    ) -> u16 {
        if togo == 0 {
            return t.belief_utility(beta);
        }
        if let Some(&v) = memo.get(&(beta.to_vec(), togo)) {
            return v;
        }
        let mut best = 0u16;
        let mut any = false;
        for a in 0..t.na {
            if !t.available_in(beta, a) {
                continue;
            }
            any = true;
            let beta_a = t.predict(beta, a);
            let mut q = t.top;
            for o in 0..t.no {
                let poss = t.obs_poss(&beta_a, a, o);
                if poss == 0 {
                    continue;
                }
                let next = t.revise(&beta_a, a, o).expect("possible observation");
                let below = go(t, memo, &next, togo - 1, mode);
                q = q.min((t.top - poss).max(below));
            }
            if mode == UtilityMode::Intermediate {
                q = q.min(t.belief_utility(beta));
            }
            if q > best {
                best = q;
            }
        }
        if !any {
            best = t.belief_utility(beta);
        }
        memo.insert((beta.to_vec(), togo), best);
        best
    }
    go(&tables, &mut memo, initial, n, mode)
}
