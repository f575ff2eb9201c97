//! Possibilistic belief states and the min-based conditioning calculus.
//!
//! A [`Belief`] is a normalized possibility distribution over the states of
//! a model, expressing a plausibility ordering. Prediction pushes a belief
//! through the transition relation by max-min composition; revision
//! conditions the joint distribution min(pi(o|s,a), beta_a(s)) on the
//! observation using minimum-specificity conditioning: states achieving the
//! joint maximum are lifted to the top level, all others keep their joint
//! value. Conditioning on an observation of possibility `0_L` is an error:
//! such branches must be pruned, not revised.
//!
//! Because levels are finite ranks, belief equality is exact and the set of
//! beliefs reachable under repeated predict/revise is finite.

use thiserror::Error;

use crate::model::{ActionId, ObsId, PiPomdpModel, StateId};
use crate::one_stage::pessimistic_over;
use crate::scale::{Level, Scale};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BeliefError {
    #[error("belief has {got} entries but the model has {want} states")]
    WrongLength { got: usize, want: usize },
    #[error("belief is not normalized: no state carries the top level")]
    NotNormalized,
    #[error("action `{0}` is available in no state of the belief's support")]
    ActionOutsideSupport(String),
    #[error("observation `{0}` has possibility 0 under this belief; prune the branch instead of revising")]
    ImpossibleObservation(String),
    #[error("level does not belong to the model scale")]
    ForeignLevel,
}

/// A possibility distribution over a model's states, stored as ranks in
/// state order. Hashable and compared exactly, which makes beliefs
/// deduplicable during reachability search.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Belief {
    ranks: Vec<u16>,
}

impl Belief {
    /// Total ignorance: every state fully possible.
    pub fn ignorance(model: &PiPomdpModel) -> Belief {
        let top = (model.scale().size() - 1) as u16;
        Belief {
            ranks: vec![top; model.n_states()],
        }
    }

    /// Crisp belief: certainty that the system is in `state`.
    pub fn crisp(model: &PiPomdpModel, state: StateId) -> Belief {
        let mut ranks = vec![0u16; model.n_states()];
        ranks[state] = (model.scale().size() - 1) as u16;
        Belief { ranks }
    }

    /// Builds a belief from explicit levels, checking scale and normalization.
    pub fn from_levels(model: &PiPomdpModel, levels: &[Level]) -> Result<Belief, BeliefError> {
        if levels.len() != model.n_states() {
            return Err(BeliefError::WrongLength {
                got: levels.len(),
                want: model.n_states(),
            });
        }
        if levels.iter().any(|&l| !model.scale().contains(l)) {
            return Err(BeliefError::ForeignLevel);
        }
        let ranks: Vec<u16> = levels.iter().map(|l| l.rank() as u16).collect();
        let b = Belief { ranks };
        if !b.is_normalized(model.scale()) {
            return Err(BeliefError::NotNormalized);
        }
        Ok(b)
    }

    pub(crate) fn from_ranks(ranks: Vec<u16>) -> Belief {
        Belief { ranks }
    }

    pub fn rank(&self, s: StateId) -> u16 {
        self.ranks[s]
    }

    pub fn ranks(&self) -> &[u16] {
        &self.ranks
    }

    pub fn level(&self, model: &PiPomdpModel, s: StateId) -> Level {
        model.scale().level_at(self.ranks[s] as usize)
    }

    pub fn is_normalized(&self, scale: &Scale) -> bool {
        let top = (scale.size() - 1) as u16;
        self.ranks.iter().any(|&r| r == top)
    }

    /// States with possibility strictly above the bottom level.
    pub fn support(&self) -> impl Iterator<Item = StateId> + '_ {
        self.ranks
            .iter()
            .enumerate()
            .filter(|(_, &r)| r > 0)
            .map(|(s, _)| s)
    }

    /// Actions available in at least one state of the support, in model order.
    pub fn available(&self, model: &PiPomdpModel) -> Vec<ActionId> {
        (0..model.base().n_actions())
            .filter(|&a| self.support().any(|s| model.base().is_available(s, a)))
            .collect()
    }
}

/// Predicted belief after applying `a` in `beta`:
/// beta_a(s) = max over s' of min(pi(s|s',a), beta(s')).
///
/// States whose action set lacks `a` contribute nothing; the result is
/// normalized whenever some fully possible state of the support has `a`
/// available (always, with uniform availability and a validated model).
pub fn predict(model: &PiPomdpModel, beta: &Belief, a: ActionId) -> Result<Belief, BeliefError> {
    let base = model.base();
    let n = base.n_states();
    let mut supported = false;
    let mut out = vec![0u16; n];
    for from in 0..n {
        let b = beta.rank(from);
        if b == 0 || !base.is_available(from, a) {
            continue;
        }
        supported = true;
        for (s, slot) in out.iter_mut().enumerate() {
            let v = base.trans_rank(from, a, s).min(b);
            if v > *slot {
                *slot = v;
            }
        }
    }
    if !supported {
        return Err(BeliefError::ActionOutsideSupport(
            base.action_name(a).to_string(),
        ));
    }
    Ok(Belief { ranks: out })
}

/// Possibility of observing `o` after `a`, from the predicted belief:
/// beta_a(o) = max over s of min(pi(o|s,a), beta_a(s)). This is also the
/// transition possibility of the induced belief MDP.
pub fn observation_possibility(
    model: &PiPomdpModel,
    beta_a: &Belief,
    a: ActionId,
    o: ObsId,
) -> Level {
    let rank = (0..model.n_states())
        .map(|s| model.obs_rank(s, a, o).min(beta_a.rank(s)))
        .max()
        .unwrap_or(0);
    model.scale().level_at(rank as usize)
}

/// Minimum-specificity conditioning of a joint rank vector: entries that
/// achieve the maximum are lifted to `top`, the rest keep their joint value.
/// Returns `None` when the maximum is 0 (conditioning on the impossible).
fn condition_ranks(joint: &[u16], top: u16) -> Option<Vec<u16>> {
    let m = joint.iter().copied().max().unwrap_or(0);
    if m == 0 {
        return None;
    }
    Some(
        joint
            .iter()
            .map(|&j| if j == m { top } else { j })
            .collect(),
    )
}

/// Revised belief after applying `a` and observing `o`: the conditional of
/// the joint min(pi(o|s,a), beta_a(s)) on `o`. Errors when the observation
/// is impossible under `beta_a`.
pub fn revise(
    model: &PiPomdpModel,
    beta_a: &Belief,
    a: ActionId,
    o: ObsId,
) -> Result<Belief, BeliefError> {
    let top = (model.scale().size() - 1) as u16;
    let joint: Vec<u16> = (0..model.n_states())
        .map(|s| model.obs_rank(s, a, o).min(beta_a.rank(s)))
        .collect();
    let ranks = condition_ranks(&joint, top).ok_or_else(|| {
        BeliefError::ImpossibleObservation(model.observation_name(o).to_string())
    })?;
    Ok(Belief { ranks })
}

/// Pessimistic utility of holding belief `beta`:
/// mu(beta) = min over s of max(n(beta(s)), mu(s)).
pub fn belief_utility(model: &PiPomdpModel, beta: &Belief) -> Level {
    let base = model.base();
    let util: Vec<u16> = (0..base.n_states()).map(|s| base.util_rank(s)).collect();
    let top = (model.scale().size() - 1) as u16;
    let rank = pessimistic_over(beta.ranks(), &util, top);
    model.scale().level_at(rank as usize)
}

/// A joint possibility distribution over states and observations, the input
/// of standalone conditioning.
#[derive(Debug, Clone)]
pub struct JointDistribution {
    scale: Scale,
    /// ranks, indexed [s][o]
    ranks: Vec<Vec<u16>>,
}

impl JointDistribution {
    pub fn from_levels(scale: Scale, grid: Vec<Vec<Level>>) -> Result<Self, BeliefError> {
        let mut ranks = Vec::with_capacity(grid.len());
        for row in grid {
            if row.iter().any(|&l| !scale.contains(l)) {
                return Err(BeliefError::ForeignLevel);
            }
            ranks.push(row.iter().map(|l| l.rank() as u16).collect());
        }
        Ok(JointDistribution { scale, ranks })
    }

    pub fn scale(&self) -> &Scale {
        &self.scale
    }

    /// Marginal possibility of observation `o`: max over s of pi(s, o).
    pub fn marginal(&self, o: usize) -> Level {
        let rank = self.ranks.iter().map(|row| row[o]).max().unwrap_or(0);
        self.scale.level_at(rank as usize)
    }

    /// Conditional possibility over states given `o`, per minimum-specificity
    /// min-conditioning: states achieving the marginal are lifted to the top
    /// level, the rest keep pi(s, o). Errors when the marginal is 0.
    pub fn condition(&self, o: usize) -> Result<Vec<Level>, BeliefError> {
        let joint: Vec<u16> = self.ranks.iter().map(|row| row[o]).collect();
        let top = (self.scale.size() - 1) as u16;
        let ranks = condition_ranks(&joint, top)
            .ok_or_else(|| BeliefError::ImpossibleObservation(format!("column {o}")))?;
        Ok(ranks
            .into_iter()
            .map(|r| self.scale.level_at(r as usize))
            .collect())
    }
}
