//! Translation of a possibilistic POMDP into a fully observable
//! possibilistic MDP over the finite belief space, and its solver.
//!
//! The belief space is the closure of a set of initial beliefs under
//! prediction and revision for every available action and every possible
//! observation; impossible observation branches are pruned (they are
//! neutral in the min anyway and the revised belief is undefined there).
//! Beliefs are deduplicated exactly by their rank vectors, so the search
//! terminates within `|L|^|S|` entries.

use std::collections::HashMap;
use std::collections::VecDeque;

use thiserror::Error;

use crate::belief::{belief_utility, observation_possibility, predict, revise, Belief, BeliefError};
use crate::mdp::{PolicySet, SolveError, SolveTrace, StabilizedPolicy, Sweep, UtilityMode};
use crate::model::{ActionId, ObsId, PiPomdpModel, StateId};
use crate::scale::Level;

#[derive(Debug, Error)]
pub enum PomdpError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Belief(#[from] BeliefError),
    #[error("belief space is not closed: belief {belief} action {action} leads to an unindexed successor")]
    SpaceNotClosed { belief: usize, action: usize },
    #[error("{count} candidate beliefs exceed the cap of {cap}")]
    CapExceeded { count: u128, cap: u128 },
    #[error("initial belief index {0} is outside the space")]
    UnknownInitial(usize),
}

/// One transition of the induced belief MDP: observing `obs` after the
/// action has possibility `poss` and leads to belief `next`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefEdge {
    pub obs: ObsId,
    pub poss: Level,
    pub next: usize,
}

/// An indexed set of beliefs closed under predict+revise, with the
/// adjacency of the induced belief MDP.
#[derive(Debug, Clone)]
pub struct BeliefSpace {
    pub beliefs: Vec<Belief>,
    /// actions available per belief (union over the support), model order
    pub avail: Vec<Vec<ActionId>>,
    /// edges\[b\]\[i\] lists the successors of belief b under avail\[b\]\[i\]
    pub edges: Vec<Vec<Vec<BeliefEdge>>>,
}

impl BeliefSpace {
    pub fn len(&self) -> usize {
        self.beliefs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beliefs.is_empty()
    }

    pub fn index_of(&self, beta: &Belief) -> Option<usize> {
        self.beliefs.iter().position(|b| b == beta)
    }

    /// Dump format: one `beta=<idx> action=<id> obs=<id> poss=<label> next=<idx>`
    /// line per edge.
    pub fn render_edges(&self, model: &PiPomdpModel) -> String {
        let mut out = String::new();
        for (b, per_action) in self.edges.iter().enumerate() {
            for (i, edges) in per_action.iter().enumerate() {
                let a = self.avail[b][i];
                for e in edges {
                    out.push_str(&format!(
                        "beta={} action={} obs={} poss={} next={}\n",
                        b,
                        model.base().action_name(a),
                        model.observation_name(e.obs),
                        model.scale().label(e.poss),
                        e.next
                    ));
                }
            }
        }
        out
    }
}

fn close_over(
    model: &PiPomdpModel,
    seed: Vec<Belief>,
) -> Result<BeliefSpace, PomdpError> {
    let mut beliefs: Vec<Belief> = Vec::new();
    let mut index: HashMap<Belief, usize> = HashMap::new();
    let mut queue: VecDeque<usize> = VecDeque::new();
    for b in seed {
        if !index.contains_key(&b) {
            let id = beliefs.len();
            index.insert(b.clone(), id);
            beliefs.push(b);
            queue.push_back(id);
        }
    }
    let mut avail: Vec<Vec<ActionId>> = Vec::new();
    let mut edges: Vec<Vec<Vec<BeliefEdge>>> = Vec::new();
    while let Some(b) = queue.pop_front() {
        let beta = beliefs[b].clone();
        let actions = beta.available(model);
        let mut per_action = Vec::with_capacity(actions.len());
        for &a in &actions {
            let beta_a = predict(model, &beta, a)?;
            let mut outgoing = Vec::new();
            for o in 0..model.n_observations() {
                let poss = observation_possibility(model, &beta_a, a, o);
                if poss.is_bottom() {
                    continue;
                }
                let next_belief = revise(model, &beta_a, a, o)?;
                let next = match index.get(&next_belief) {
                    Some(&i) => i,
                    None => {
                        let id = beliefs.len();
                        index.insert(next_belief.clone(), id);
                        beliefs.push(next_belief);
                        queue.push_back(id);
                        id
                    }
                };
                outgoing.push(BeliefEdge { obs: o, poss, next });
            }
            per_action.push(outgoing);
        }
        debug_assert_eq!(avail.len(), b);
        avail.push(actions);
        edges.push(per_action);
    }
    Ok(BeliefSpace {
        beliefs,
        avail,
        edges,
    })
}

/// Breadth-first closure of `initials` under every available action and
/// every possible observation.
pub fn reachable_beliefs(
    model: &PiPomdpModel,
    initials: &[Belief],
) -> Result<BeliefSpace, PomdpError> {
    let space = close_over(model, initials.to_vec())?;
    if let Some(bound) = (model.scale().size() as u128).checked_pow(model.n_states() as u32) {
        debug_assert!((space.len() as u128) <= bound);
    }
    Ok(space)
}

/// Exhaustive belief space: every normalized belief over the scale, with
/// the same adjacency construction. Feasible only for tiny `|S|` and `|L|`;
/// callers pass a cap on the candidate count.
pub fn all_beliefs(model: &PiPomdpModel, cap: u128) -> Result<BeliefSpace, PomdpError> {
    let k = model.scale().size() as u128;
    let n = model.n_states() as u32;
    let count = k
        .checked_pow(n)
        .ok_or(PomdpError::CapExceeded { count: u128::MAX, cap })?;
    if count > cap {
        return Err(PomdpError::CapExceeded { count, cap });
    }
    let top = (model.scale().size() - 1) as u16;
    let mut seed = Vec::new();
    let mut ranks = vec![0u16; n as usize];
    loop {
        if ranks.iter().any(|&r| r == top) {
            seed.push(Belief::from_ranks(ranks.clone()));
        }
        // odometer
        let mut i = 0;
        loop {
            if i == ranks.len() {
                let space = close_over(model, seed)?;
                return Ok(space);
            }
            if ranks[i] < top {
                ranks[i] += 1;
                break;
            }
            ranks[i] = 0;
            i += 1;
        }
    }
}

/// Solution of a solve over a belief space.
#[derive(Debug, Clone)]
pub struct BeliefSolution {
    pub q: Vec<Vec<(ActionId, Level)>>,
    pub values: Vec<Level>,
    pub policy: PolicySet,
    pub trace: SolveTrace,
    pub sweeps: usize,
}

impl BeliefSolution {
    pub fn stabilized_policy(&self) -> StabilizedPolicy {
        self.trace.stabilized_policy(self.trace.len())
    }
}

/// Possibilistic value iteration over an explicit belief space.
///
/// Initializes `u(beta)` to the pessimistic belief utility and sweeps
/// `Q(beta,a) = min over possible o of max(n(beta_a(o)), u(beta_a^o))`
/// synchronously until exact Q-table equality. The same monotonicity and
/// sweep-bound checks as the fully observable solver apply.
pub fn value_iteration_po(
    model: &PiPomdpModel,
    space: &BeliefSpace,
    mode: UtilityMode,
) -> Result<BeliefSolution, PomdpError> {
    let report = model.validate();
    if !report.is_ok() {
        return Err(SolveError::InvalidModel(report).into());
    }
    let nb = space.len();
    for (b, per_action) in space.edges.iter().enumerate() {
        for (i, edges) in per_action.iter().enumerate() {
            if edges.iter().any(|e| e.next >= nb) {
                return Err(PomdpError::SpaceNotClosed {
                    belief: b,
                    action: space.avail[b][i],
                });
            }
        }
    }
    let top = (model.scale().size() - 1) as u16;
    let mu: Vec<u16> = space
        .beliefs
        .iter()
        .map(|b| belief_utility(model, b).rank() as u16)
        .collect();
    let bound = nb * model.base().n_actions().max(1) * model.scale().size();
    let mut u = mu.clone();
    let to_levels = |ranks: &[u16]| -> Vec<Level> {
        ranks
            .iter()
            .map(|&r| model.scale().level_at(r as usize))
            .collect()
    };
    let mut trace = SolveTrace {
        initial: to_levels(&u),
        sweeps: Vec::new(),
    };
    let mut prev_q: Option<Vec<Vec<u16>>> = None;
    loop {
        let mut q_table = Vec::with_capacity(nb);
        let mut new_u = vec![0u16; nb];
        let mut argmax = Vec::with_capacity(nb);
        for b in 0..nb {
            let mut row = Vec::with_capacity(space.avail[b].len());
            let mut best = 0u16;
            for edges in &space.edges[b] {
                let mut q = top;
                for e in edges {
                    let guarded = (top - e.poss.rank() as u16).max(u[e.next]);
                    if guarded < q {
                        q = guarded;
                    }
                }
                if mode == UtilityMode::Intermediate {
                    q = q.min(mu[b]);
                }
                row.push(q);
                if q > best {
                    best = q;
                }
            }
            let set: Vec<ActionId> = space.avail[b]
                .iter()
                .zip(&row)
                .filter(|(_, &q)| q == best)
                .map(|(&a, _)| a)
                .collect();
            new_u[b] = best;
            q_table.push(row);
            argmax.push(set);
        }
        let sweep_no = trace.sweeps.len() + 1;
        if let Some(b) = (0..nb).find(|&b| new_u[b] < u[b]) {
            return Err(SolveError::NotMonotone {
                state: b,
                sweep: sweep_no,
            }
            .into());
        }
        trace.sweeps.push(Sweep {
            values: to_levels(&new_u),
            optimal: argmax.clone(),
        });
        let done = prev_q.as_ref() == Some(&q_table);
        u = new_u;
        if done {
            let canonical = argmax
                .iter()
                .map(|set| {
                    *set.iter()
                        .min_by_key(|&&a| model.base().action_name(a))
                        .expect("nonempty argmax")
                })
                .collect();
            let q = (0..nb)
                .map(|b| {
                    space.avail[b]
                        .iter()
                        .zip(&q_table[b])
                        .map(|(&a, &r)| (a, model.scale().level_at(r as usize)))
                        .collect()
                })
                .collect();
            let sweeps = trace.sweeps.len();
            return Ok(BeliefSolution {
                q,
                values: to_levels(&u),
                policy: PolicySet {
                    optimal: argmax,
                    canonical,
                },
                trace,
                sweeps,
            });
        }
        prev_q = Some(q_table);
        if trace.sweeps.len() > bound {
            return Err(SolveError::SweepBudget { bound }.into());
        }
    }
}

/// End-to-end solve restricted to the space reachable from `initial`.
#[derive(Debug, Clone)]
pub struct PomdpSolution {
    pub space: BeliefSpace,
    pub solution: BeliefSolution,
    pub initial: usize,
}

impl PomdpSolution {
    pub fn value_at_initial(&self) -> Level {
        self.solution.values[self.initial]
    }
}

pub fn solve_pomdp(
    model: &PiPomdpModel,
    initial: &Belief,
    mode: UtilityMode,
) -> Result<PomdpSolution, PomdpError> {
    let space = reachable_beliefs(model, std::slice::from_ref(initial))?;
    let solution = value_iteration_po(model, &space, mode)?;
    let idx = space.index_of(initial).ok_or(PomdpError::UnknownInitial(0))?;
    Ok(PomdpSolution {
        space,
        solution,
        initial: idx,
    })
}

/// Crisp beliefs for every state of the model, in state order. Convenience
/// for reduction-soundness comparisons against the fully observable solver.
pub fn crisp_beliefs(model: &PiPomdpModel) -> Vec<Belief> {
    (0..model.n_states())
        .map(|s| Belief::crisp(model, s as StateId))
        .collect()
}
