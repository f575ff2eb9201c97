//! Optimal-policy computation for fully observable possibilistic MDPs:
//! finite-horizon backwards induction and stationary value iteration.
//!
//! Both solvers run the pessimistic max-min backup
//! `Q(s,a) = min over s' of max(n(pi(s'|s,a)), u(s'))` with synchronous
//! (two-table) sweeps, so results are independent of state order. Value
//! iteration starts from `u = mu` (the initialization is not arbitrary),
//! terminates on exact Q-table equality, and checks two invariants on every
//! run: snapshots must be pointwise nondecreasing and the sweep count must
//! stay within `|A| * |S| * |L|`. Models where no action maintains a good
//! state can break monotonicity; the solver reports that instead of looping.

use thiserror::Error;

use crate::model::{ActionId, PiMdpModel, StateId, ValidationReport};
use crate::scale::Level;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("model failed validation:\n{0}")]
    InvalidModel(ValidationReport),
    #[error("value function decreased at state index {state} in sweep {sweep}; the model has no value-maintaining action there")]
    NotMonotone { state: usize, sweep: usize },
    #[error("no fixpoint within the {bound}-sweep bound")]
    SweepBudget { bound: usize },
    #[error("a finite horizon must be at least 1")]
    ZeroHorizon,
    #[error("policy does not cover state `{0}`")]
    PartialPolicy(String),
    #[error("policy assigns unavailable action `{action}` to state `{state}`")]
    PolicyActionUnavailable { state: String, action: String },
}

/// Whether intermediate satisfaction degrees enter the criterion, or only
/// the degree of the final state of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UtilityMode {
    /// Only the terminal state's utility counts (the printed algorithms).
    #[default]
    TerminalOnly,
    /// Every visited state's utility is met into the trajectory value.
    Intermediate,
}

/// Per-state optimal action sets plus a canonical representative
/// (the lexicographically smallest action name, for deterministic output).
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySet {
    pub optimal: Vec<Vec<ActionId>>,
    pub canonical: Vec<ActionId>,
}

impl PolicySet {
    fn from_argmax(model: &PiMdpModel, optimal: Vec<Vec<ActionId>>) -> PolicySet {
        let canonical = optimal
            .iter()
            .map(|set| {
                *set.iter()
                    .min_by_key(|&&a| model.action_name(a))
                    .expect("argmax set is nonempty for validated models")
            })
            .collect();
        PolicySet { optimal, canonical }
    }
}

/// One synchronous sweep: the value snapshot and the argmax set per state,
/// in the order the state's actions are declared.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub values: Vec<Level>,
    pub optimal: Vec<Vec<ActionId>>,
}

/// Snapshots of every sweep of a solver run, for golden tests and traces.
#[derive(Debug, Clone)]
pub struct SolveTrace {
    pub initial: Vec<Level>,
    pub sweeps: Vec<Sweep>,
}

/// The policy read off a trace at the sweep where each state's value first
/// reached its level at sweep `upto`. Among the optimal actions this keeps
/// the latest-declared maximizer, mirroring an argmax scan that accepts
/// ties; the paper's worked policies fall out of exactly this rule.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilizedPolicy {
    pub settled_at: Vec<usize>,
    pub optimal: Vec<Vec<ActionId>>,
    pub action: Vec<ActionId>,
}

impl SolveTrace {
    pub fn len(&self) -> usize {
        self.sweeps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sweeps.is_empty()
    }

    /// Stabilized policy considering sweeps `1..=upto` (1-based).
    pub fn stabilized_policy(&self, upto: usize) -> StabilizedPolicy {
        assert!(upto >= 1 && upto <= self.sweeps.len());
        let n = self.initial.len();
        let mut settled_at = Vec::with_capacity(n);
        let mut optimal = Vec::with_capacity(n);
        let mut action = Vec::with_capacity(n);
        for s in 0..n {
            let target = self.sweeps[upto - 1].values[s];
            let k = (0..upto)
                .position(|i| self.sweeps[i].values[s] == target)
                .expect("value at upto is attained by upto");
            let set = self.sweeps[k].optimal[s].clone();
            settled_at.push(k + 1);
            action.push(*set.last().expect("nonempty argmax"));
            optimal.push(set);
        }
        StabilizedPolicy {
            settled_at,
            optimal,
            action,
        }
    }

    /// Line-oriented rendering: `sweep=<k> state=<id> value=<label> actions=<set>`.
    pub fn render<'a>(
        &self,
        name: impl Fn(usize) -> &'a str,
        label: impl Fn(Level) -> &'a str,
        action: impl Fn(ActionId) -> &'a str,
    ) -> String {
        let mut out = String::new();
        for (k, sweep) in self.sweeps.iter().enumerate() {
            for (s, &v) in sweep.values.iter().enumerate() {
                let set: Vec<&str> = sweep.optimal[s].iter().map(|&a| action(a)).collect();
                out.push_str(&format!(
                    "sweep={} state={} value={} actions={{{}}}\n",
                    k + 1,
                    name(s),
                    label(v),
                    set.join(",")
                ));
            }
        }
        out
    }
}

/// Values and argmax sets of a stationary solve.
#[derive(Debug, Clone)]
pub struct StationarySolution {
    /// Q-table rows aligned with each state's available actions.
    pub q: Vec<Vec<(ActionId, Level)>>,
    pub values: Vec<Level>,
    pub policy: PolicySet,
    pub trace: SolveTrace,
    pub sweeps: usize,
}

impl StationarySolution {
    pub fn stabilized_policy(&self) -> StabilizedPolicy {
        self.trace.stabilized_policy(self.trace.len())
    }
}

/// Values per stage (0..=N) and argmax sets per decision stage (0..N).
#[derive(Debug, Clone)]
pub struct FiniteHorizonSolution {
    pub values: Vec<Vec<Level>>,
    pub policies: Vec<PolicySet>,
    pub trace: SolveTrace,
}

struct RankTables {
    n: usize,
    top: u16,
    util: Vec<u16>,
}

fn tables(model: &PiMdpModel) -> RankTables {
    RankTables {
        n: model.n_states(),
        top: (model.scale().size() - 1) as u16,
        util: (0..model.n_states()).map(|s| model.util_rank(s)).collect(),
    }
}

fn backup(model: &PiMdpModel, t: &RankTables, u: &[u16], s: StateId, a: ActionId) -> u16 {
    let mut q = t.top;
    for s2 in 0..t.n {
        let p = model.trans_rank(s, a, s2);
        let guarded = (t.top - p).max(u[s2]);
        if guarded < q {
            q = guarded;
        }
    }
    q
}

/// One synchronous sweep over all states; returns per-state Q rows (aligned
/// with `model.available(s)`), the new values and the argmax sets.
fn sweep_once(
    model: &PiMdpModel,
    t: &RankTables,
    u: &[u16],
    mode: Option<UtilityMode>,
) -> (Vec<Vec<u16>>, Vec<u16>, Vec<Vec<ActionId>>) {
    let mut q_rows = Vec::with_capacity(t.n);
    let mut values = vec![0u16; t.n];
    let mut argmax = Vec::with_capacity(t.n);
    for s in 0..t.n {
        let avail = model.available(s);
        let mut row = Vec::with_capacity(avail.len());
        let mut best = 0u16;
        for &a in avail {
            let mut q = backup(model, t, u, s, a);
            if mode == Some(UtilityMode::Intermediate) {
                q = q.min(t.util[s]);
            }
            row.push(q);
            if q > best {
                best = q;
            }
        }
        let set: Vec<ActionId> = avail
            .iter()
            .zip(&row)
            .filter(|(_, &q)| q == best)
            .map(|(&a, _)| a)
            .collect();
        values[s] = best;
        q_rows.push(row);
        argmax.push(set);
    }
    (q_rows, values, argmax)
}

fn levels(model: &PiMdpModel, ranks: &[u16]) -> Vec<Level> {
    ranks
        .iter()
        .map(|&r| model.scale().level_at(r as usize))
        .collect()
}

fn validated(model: &PiMdpModel) -> Result<(), SolveError> {
    let report = model.validate();
    if report.is_ok() {
        Ok(())
    } else {
        Err(SolveError::InvalidModel(report))
    }
}

/// Possibilistic value iteration to the exact fixpoint.
///
/// Starts from `u = mu`, sweeps synchronously, and stops when two
/// consecutive Q-tables are identical; the finite scale makes the test
/// exact, no tolerance is involved.
pub fn value_iteration(model: &PiMdpModel) -> Result<StationarySolution, SolveError> {
    validated(model)?;
    let t = tables(model);
    let n_actions = model.n_actions().max(1);
    let bound = n_actions * t.n * model.scale().size();
    let mut u = t.util.clone();
    let mut trace = SolveTrace {
        initial: levels(model, &u),
        sweeps: Vec::new(),
    };
    let mut prev_q: Option<Vec<Vec<u16>>> = None;
    loop {
        let (q, new_u, argmax) = sweep_once(model, &t, &u, None);
        let sweep_no = trace.sweeps.len() + 1;
        if let Some(s) = (0..t.n).find(|&s| new_u[s] < u[s]) {
            return Err(SolveError::NotMonotone {
                state: s,
                sweep: sweep_no,
            });
        }
        trace.sweeps.push(Sweep {
            values: levels(model, &new_u),
            optimal: argmax.clone(),
        });
        let done = prev_q.as_ref() == Some(&q);
        u = new_u;
        if done {
            let q_rows = (0..t.n)
                .map(|s| {
                    model
                        .available(s)
                        .iter()
                        .zip(&q[s])
                        .map(|(&a, &r)| (a, model.scale().level_at(r as usize)))
                        .collect()
                })
                .collect();
            let sweeps = trace.sweeps.len();
            return Ok(StationarySolution {
                q: q_rows,
                values: levels(model, &u),
                policy: PolicySet::from_argmax(model, argmax),
                trace,
                sweeps,
            });
        }
        prev_q = Some(q);
        if trace.sweeps.len() > bound {
            return Err(SolveError::SweepBudget { bound });
        }
    }
}

/// Finite-horizon backwards induction over `n` decision stages.
///
/// With [`UtilityMode::TerminalOnly`] the backup is the bare max-min
/// recursion from `u^N = mu`; with [`UtilityMode::Intermediate`] each stage
/// additionally meets the state's own utility. The trace records sweeps in
/// computation order (stage N-1 first).
pub fn backwards_induction(
    model: &PiMdpModel,
    n: usize,
    mode: UtilityMode,
) -> Result<FiniteHorizonSolution, SolveError> {
    if n == 0 {
        return Err(SolveError::ZeroHorizon);
    }
    validated(model)?;
    let t = tables(model);
    let mut values = vec![Vec::new(); n + 1];
    values[n] = levels(model, &t.util);
    let mut policies: Vec<Option<PolicySet>> = (0..n).map(|_| None).collect();
    let mut trace = SolveTrace {
        initial: levels(model, &t.util),
        sweeps: Vec::new(),
    };
    let mut u = t.util.clone();
    for stage in (0..n).rev() {
        let (_, new_u, argmax) = sweep_once(model, &t, &u, Some(mode));
        trace.sweeps.push(Sweep {
            values: levels(model, &new_u),
            optimal: argmax.clone(),
        });
        values[stage] = levels(model, &new_u);
        policies[stage] = Some(PolicySet::from_argmax(model, argmax));
        u = new_u;
    }
    Ok(FiniteHorizonSolution {
        values,
        policies: policies.into_iter().map(Option::unwrap).collect(),
        trace,
    })
}

/// Evaluates a stationary decision rule over `n` stages: the qualitative
/// min-max expectation of trajectory satisfaction under the fixed policy.
pub fn policy_value(
    model: &PiMdpModel,
    policy: &[ActionId],
    n: usize,
    mode: UtilityMode,
) -> Result<Vec<Level>, SolveError> {
    if n == 0 {
        return Err(SolveError::ZeroHorizon);
    }
    validated(model)?;
    if policy.len() != model.n_states() {
        let missing = model.state_name(policy.len().min(model.n_states() - 1));
        return Err(SolveError::PartialPolicy(missing.to_string()));
    }
    for (s, &a) in policy.iter().enumerate() {
        if !model.is_available(s, a) {
            return Err(SolveError::PolicyActionUnavailable {
                state: model.state_name(s).to_string(),
                action: model.action_name(a).to_string(),
            });
        }
    }
    let t = tables(model);
    let mut u = t.util.clone();
    for _ in 0..n {
        let mut next = vec![0u16; t.n];
        for s in 0..t.n {
            let mut v = backup(model, &t, &u, s, policy[s]);
            if mode == UtilityMode::Intermediate {
                v = v.min(t.util[s]);
            }
            next[s] = v;
        }
        u = next;
    }
    Ok(levels(model, &u))
}
