//! Model types for possibilistic MDPs/POMDPs and stochastic MDPs,
//! with builders and semantic validation.
//!
//! Models are immutable after construction. Validation returns a report of
//! violations rather than failing, so a caller can surface every problem in
//! a file at once; solvers refuse to run on models whose report is not ok.

use std::collections::HashMap;

use thiserror::Error;

use crate::scale::{Level, Scale, ScaleError};

pub type StateId = usize;
pub type ActionId = usize;
pub type ObsId = usize;

/// Planning horizon: a fixed number of decision stages, or none.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizon {
    Finite(usize),
    Infinite,
}

impl Horizon {
    pub fn finite(n: usize) -> Result<Horizon, ModelBuildError> {
        if n == 0 {
            return Err(ModelBuildError::ZeroHorizon);
        }
        Ok(Horizon::Finite(n))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelBuildError {
    #[error("model has no states")]
    NoStates,
    #[error("model declares no actions")]
    NoActions,
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("unknown observation `{0}`")]
    UnknownObservation(String),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("duplicate action `{0}`")]
    DuplicateAction(String),
    #[error("duplicate observation `{0}`")]
    DuplicateObservation(String),
    #[error(transparent)]
    Scale(#[from] ScaleError),
    #[error("a finite horizon must be at least 1")]
    ZeroHorizon,
    #[error("discount factor must be in (0,1), got {0}")]
    BadDiscount(f64),
}

/// One violated model constraint, naming the offending entries.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// max over successors of pi(s'|s,a) is not the top level
    TransitionNotNormalized {
        state: String,
        action: String,
        max_label: String,
    },
    /// max over observations of pi(o|s,a) is not the top level
    ObservationNotNormalized {
        state: String,
        action: String,
        max_label: String,
    },
    /// a state with an empty action set has no defined backup
    NoAvailableActions { state: String },
    /// probabilities of a row do not sum to 1 within tolerance
    ProbRowSum { state: String, action: String, sum: f64 },
    /// a probability outside [0,1]
    ProbOutOfRange {
        state: String,
        action: String,
        next: String,
        value: f64,
    },
    RewardNotFinite { state: String, action: String },
    DiscountOutOfRange { gamma: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::TransitionNotNormalized { state, action, max_label } => write!(
                f,
                "transition row ({state}, {action}) is not normalized: max possibility is `{max_label}`"
            ),
            Violation::ObservationNotNormalized { state, action, max_label } => write!(
                f,
                "observation row ({state}, {action}) is not normalized: max possibility is `{max_label}`"
            ),
            Violation::NoAvailableActions { state } => {
                write!(f, "state {state} has no available actions")
            }
            Violation::ProbRowSum { state, action, sum } => {
                write!(f, "probability row ({state}, {action}) sums to {sum}, not 1")
            }
            Violation::ProbOutOfRange { state, action, next, value } => write!(
                f,
                "p({next}|{state},{action}) = {value} is outside [0,1]"
            ),
            Violation::RewardNotFinite { state, action } => {
                write!(f, "reward r({state}, {action}) is not finite")
            }
            Violation::DiscountOutOfRange { gamma } => {
                write!(f, "discount factor {gamma} is outside (0,1)")
            }
        }
    }
}

/// Outcome of [`PiMdpModel::validate`] and friends. Violations are data,
/// not failures; an empty report means every solver precondition holds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_ok() {
            write!(f, "ok")
        } else {
            for v in &self.violations {
                writeln!(f, "{v}")?;
            }
            Ok(())
        }
    }
}

/// Fully observable possibilistic MDP: finite states, per-state actions,
/// transition possibility tables pi(s'|s,a) and a qualitative utility mu,
/// all on one scale.
#[derive(Debug, Clone, PartialEq)]
pub struct PiMdpModel {
    scale: Scale,
    states: Vec<String>,
    actions: Vec<String>,
    avail: Vec<Vec<ActionId>>,
    /// ranks, indexed [s][a][s']; rows of unavailable actions stay at bottom
    trans: Vec<Vec<Vec<u16>>>,
    /// ranks, indexed [s]
    util: Vec<u16>,
}

impl PiMdpModel {
    pub fn builder(scale: Scale) -> PiMdpBuilder {
        PiMdpBuilder::new(scale)
    }

    pub fn scale(&self) -> &Scale {
        &self.scale
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s]
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        &self.actions[a]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name)
    }

    pub fn action_id(&self, name: &str) -> Option<ActionId> {
        self.actions.iter().position(|a| a == name)
    }

    /// Actions available in state `s`, in declaration order.
    pub fn available(&self, s: StateId) -> &[ActionId] {
        &self.avail[s]
    }

    pub fn is_available(&self, s: StateId, a: ActionId) -> bool {
        self.avail[s].contains(&a)
    }

    pub fn trans(&self, s: StateId, a: ActionId, next: StateId) -> Level {
        self.scale.level_at(self.trans[s][a][next] as usize)
    }

    pub fn util(&self, s: StateId) -> Level {
        self.scale.level_at(self.util[s] as usize)
    }

    pub fn trans_rank(&self, s: StateId, a: ActionId, next: StateId) -> u16 {
        self.trans[s][a][next]
    }

    pub fn util_rank(&self, s: StateId) -> u16 {
        self.util[s]
    }

    pub(crate) fn top_rank(&self) -> u16 {
        (self.scale.size() - 1) as u16
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let top = self.top_rank();
        for s in 0..self.n_states() {
            if self.avail[s].is_empty() {
                violations.push(Violation::NoAvailableActions {
                    state: self.states[s].clone(),
                });
            }
            for &a in &self.avail[s] {
                let max = self.trans[s][a].iter().copied().max().unwrap_or(0);
                if max != top {
                    violations.push(Violation::TransitionNotNormalized {
                        state: self.states[s].clone(),
                        action: self.actions[a].clone(),
                        max_label: self.scale.labels()[max as usize].clone(),
                    });
                }
            }
        }
        ValidationReport { violations }
    }
}

/// Builder for [`PiMdpModel`]. States and actions are declared first;
/// unset transition possibilities and utilities default to the bottom level.
/// Every declared action is available in every state unless the state is
/// explicitly restricted.
pub struct PiMdpBuilder {
    scale: Scale,
    states: Vec<String>,
    state_ix: HashMap<String, StateId>,
    actions: Vec<String>,
    action_ix: HashMap<String, ActionId>,
    restricted: HashMap<StateId, Vec<ActionId>>,
    trans: Vec<(StateId, ActionId, StateId, u16)>,
    util: Vec<(StateId, u16)>,
}

impl PiMdpBuilder {
    pub fn new(scale: Scale) -> Self {
        PiMdpBuilder {
            scale,
            states: Vec::new(),
            state_ix: HashMap::new(),
            actions: Vec::new(),
            action_ix: HashMap::new(),
            restricted: HashMap::new(),
            trans: Vec::new(),
            util: Vec::new(),
        }
    }

    pub fn add_state(&mut self, name: &str) -> Result<StateId, ModelBuildError> {
        if self.state_ix.contains_key(name) {
            return Err(ModelBuildError::DuplicateState(name.to_string()));
        }
        let id = self.states.len();
        self.states.push(name.to_string());
        self.state_ix.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn add_action(&mut self, name: &str) -> Result<ActionId, ModelBuildError> {
        if self.action_ix.contains_key(name) {
            return Err(ModelBuildError::DuplicateAction(name.to_string()));
        }
        let id = self.actions.len();
        self.actions.push(name.to_string());
        self.action_ix.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn state(&self, name: &str) -> Result<StateId, ModelBuildError> {
        self.state_ix
            .get(name)
            .copied()
            .ok_or_else(|| ModelBuildError::UnknownState(name.to_string()))
    }

    pub fn action(&self, name: &str) -> Result<ActionId, ModelBuildError> {
        self.action_ix
            .get(name)
            .copied()
            .ok_or_else(|| ModelBuildError::UnknownAction(name.to_string()))
    }

    /// Restrict the action set of `state` to the given actions.
    pub fn restrict_actions(&mut self, state: &str, actions: &[&str]) -> Result<(), ModelBuildError> {
        let s = self.state(state)?;
        let ids = actions
            .iter()
            .map(|a| self.action(a))
            .collect::<Result<Vec<_>, _>>()?;
        self.restricted.insert(s, ids);
        Ok(())
    }

    pub fn set_trans(
        &mut self,
        from: &str,
        action: &str,
        to: &str,
        label: &str,
    ) -> Result<(), ModelBuildError> {
        let s = self.state(from)?;
        let a = self.action(action)?;
        let s2 = self.state(to)?;
        let level = self.scale.level(label)?;
        self.trans.push((s, a, s2, level.rank() as u16));
        Ok(())
    }

    pub fn set_util(&mut self, state: &str, label: &str) -> Result<(), ModelBuildError> {
        let s = self.state(state)?;
        let level = self.scale.level(label)?;
        self.util.push((s, level.rank() as u16));
        Ok(())
    }

    pub fn build(self) -> Result<PiMdpModel, ModelBuildError> {
        if self.states.is_empty() {
            return Err(ModelBuildError::NoStates);
        }
        if self.actions.is_empty() {
            return Err(ModelBuildError::NoActions);
        }
        let n = self.states.len();
        let m = self.actions.len();
        let mut trans = vec![vec![vec![0u16; n]; m]; n];
        for (s, a, s2, r) in self.trans {
            trans[s][a][s2] = r;
        }
        let mut util = vec![0u16; n];
        for (s, r) in self.util {
            util[s] = r;
        }
        let avail = (0..n)
            .map(|s| {
                self.restricted
                    .get(&s)
                    .cloned()
                    .unwrap_or_else(|| (0..m).collect())
            })
            .collect();
        Ok(PiMdpModel {
            scale: self.scale,
            states: self.states,
            actions: self.actions,
            avail,
            trans,
            util,
        })
    }
}

/// Partially observable possibilistic MDP: a [`PiMdpModel`] plus a finite
/// observation set and observation possibility tables pi(o|s,a), where `s`
/// is the state resulting from `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiPomdpModel {
    base: PiMdpModel,
    observations: Vec<String>,
    /// ranks, indexed [s][a][o]
    obs: Vec<Vec<Vec<u16>>>,
}

impl PiPomdpModel {
    pub fn builder(scale: Scale) -> PiPomdpBuilder {
        PiPomdpBuilder {
            base: PiMdpBuilder::new(scale),
            observations: Vec::new(),
            obs_ix: HashMap::new(),
            obs: Vec::new(),
        }
    }

    pub fn base(&self) -> &PiMdpModel {
        &self.base
    }

    pub fn scale(&self) -> &Scale {
        self.base.scale()
    }

    pub fn n_states(&self) -> usize {
        self.base.n_states()
    }

    pub fn n_observations(&self) -> usize {
        self.observations.len()
    }

    pub fn observations(&self) -> &[String] {
        &self.observations
    }

    pub fn observation_name(&self, o: ObsId) -> &str {
        &self.observations[o]
    }

    pub fn observation_id(&self, name: &str) -> Option<ObsId> {
        self.observations.iter().position(|x| x == name)
    }

    pub fn obs(&self, s: StateId, a: ActionId, o: ObsId) -> Level {
        self.scale().level_at(self.obs[s][a][o] as usize)
    }

    pub fn obs_rank(&self, s: StateId, a: ActionId, o: ObsId) -> u16 {
        self.obs[s][a][o]
    }

    /// Validates the base model plus observation normalization:
    /// for every (s, a), max over o of pi(o|s,a) must be the top level.
    /// Without it some (s,a) would make every observation sub-possible and
    /// belief revision would produce non-normalized beliefs.
    pub fn validate(&self) -> ValidationReport {
        let mut report = self.base.validate();
        let top = self.base.top_rank();
        for s in 0..self.n_states() {
            for &a in self.base.available(s) {
                let max = self.obs[s][a].iter().copied().max().unwrap_or(0);
                if max != top {
                    report.violations.push(Violation::ObservationNotNormalized {
                        state: self.base.states()[s].clone(),
                        action: self.base.actions()[a].clone(),
                        max_label: self.scale().labels()[max as usize].clone(),
                    });
                }
            }
        }
        report
    }
}

pub struct PiPomdpBuilder {
    base: PiMdpBuilder,
    observations: Vec<String>,
    obs_ix: HashMap<String, ObsId>,
    obs: Vec<(StateId, ActionId, ObsId, u16)>,
}

impl PiPomdpBuilder {
    pub fn base(&mut self) -> &mut PiMdpBuilder {
        &mut self.base
    }

    pub fn add_observation(&mut self, name: &str) -> Result<ObsId, ModelBuildError> {
        if self.obs_ix.contains_key(name) {
            return Err(ModelBuildError::DuplicateObservation(name.to_string()));
        }
        let id = self.observations.len();
        self.observations.push(name.to_string());
        self.obs_ix.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn set_obs(
        &mut self,
        state: &str,
        action: &str,
        observation: &str,
        label: &str,
    ) -> Result<(), ModelBuildError> {
        let s = self.base.state(state)?;
        let a = self.base.action(action)?;
        let o = self
            .obs_ix
            .get(observation)
            .copied()
            .ok_or_else(|| ModelBuildError::UnknownObservation(observation.to_string()))?;
        let level = self.base.scale.level(label)?;
        self.obs.push((s, a, o, level.rank() as u16));
        Ok(())
    }

    pub fn build(self) -> Result<PiPomdpModel, ModelBuildError> {
        let base = self.base.build()?;
        let n = base.n_states();
        let m = base.n_actions();
        let k = self.observations.len();
        let mut obs = vec![vec![vec![0u16; k]; m]; n];
        for (s, a, o, r) in self.obs {
            obs[s][a][o] = r;
        }
        Ok(PiPomdpModel {
            base,
            observations: self.observations,
            obs,
        })
    }
}

/// Tolerance for probability rows summing to one. Slightly padded so a row
/// written as `0.999999999` is accepted despite decimal-to-binary noise.
pub const PROB_SUM_TOL: f64 = 1e-9 * (1.0 + 1e-6);

/// Classical stochastic MDP: p(s'|s,a), r(s,a) and a discount factor.
#[derive(Debug, Clone, PartialEq)]
pub struct StochMdpModel {
    states: Vec<String>,
    actions: Vec<String>,
    avail: Vec<Vec<ActionId>>,
    prob: Vec<Vec<Vec<f64>>>,
    reward: Vec<Vec<f64>>,
    discount: f64,
}

impl StochMdpModel {
    pub fn builder(discount: f64) -> StochMdpBuilder {
        StochMdpBuilder {
            states: Vec::new(),
            state_ix: HashMap::new(),
            actions: Vec::new(),
            action_ix: HashMap::new(),
            restricted: HashMap::new(),
            prob: Vec::new(),
            reward: Vec::new(),
            discount,
        }
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s]
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        &self.actions[a]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name)
    }

    pub fn available(&self, s: StateId) -> &[ActionId] {
        &self.avail[s]
    }

    pub fn prob(&self, s: StateId, a: ActionId, next: StateId) -> f64 {
        self.prob[s][a][next]
    }

    pub fn reward(&self, s: StateId, a: ActionId) -> f64 {
        self.reward[s][a]
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if !(self.discount > 0.0 && self.discount < 1.0) {
            violations.push(Violation::DiscountOutOfRange {
                gamma: self.discount,
            });
        }
        for s in 0..self.n_states() {
            if self.avail[s].is_empty() {
                violations.push(Violation::NoAvailableActions {
                    state: self.states[s].clone(),
                });
            }
            for &a in &self.avail[s] {
                if !self.reward[s][a].is_finite() {
                    violations.push(Violation::RewardNotFinite {
                        state: self.states[s].clone(),
                        action: self.actions[a].clone(),
                    });
                }
                let mut sum = 0.0;
                for (s2, &p) in self.prob[s][a].iter().enumerate() {
                    if !(0.0..=1.0).contains(&p) {
                        violations.push(Violation::ProbOutOfRange {
                            state: self.states[s].clone(),
                            action: self.actions[a].clone(),
                            next: self.states[s2].clone(),
                            value: p,
                        });
                    }
                    sum += p;
                }
                if (sum - 1.0).abs() > PROB_SUM_TOL {
                    violations.push(Violation::ProbRowSum {
                        state: self.states[s].clone(),
                        action: self.actions[a].clone(),
                        sum,
                    });
                }
            }
        }
        ValidationReport { violations }
    }
}

pub struct StochMdpBuilder {
    states: Vec<String>,
    state_ix: HashMap<String, StateId>,
    actions: Vec<String>,
    action_ix: HashMap<String, ActionId>,
    restricted: HashMap<StateId, Vec<ActionId>>,
    prob: Vec<(StateId, ActionId, StateId, f64)>,
    reward: Vec<(StateId, ActionId, f64)>,
    discount: f64,
}

impl StochMdpBuilder {
    pub fn add_state(&mut self, name: &str) -> Result<StateId, ModelBuildError> {
        if self.state_ix.contains_key(name) {
            return Err(ModelBuildError::DuplicateState(name.to_string()));
        }
        let id = self.states.len();
        self.states.push(name.to_string());
        self.state_ix.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn add_action(&mut self, name: &str) -> Result<ActionId, ModelBuildError> {
        if self.action_ix.contains_key(name) {
            return Err(ModelBuildError::DuplicateAction(name.to_string()));
        }
        let id = self.actions.len();
        self.actions.push(name.to_string());
        self.action_ix.insert(name.to_string(), id);
        Ok(id)
    }

    fn state(&self, name: &str) -> Result<StateId, ModelBuildError> {
        self.state_ix
            .get(name)
            .copied()
            .ok_or_else(|| ModelBuildError::UnknownState(name.to_string()))
    }

    fn action(&self, name: &str) -> Result<ActionId, ModelBuildError> {
        self.action_ix
            .get(name)
            .copied()
            .ok_or_else(|| ModelBuildError::UnknownAction(name.to_string()))
    }

    pub fn restrict_actions(&mut self, state: &str, actions: &[&str]) -> Result<(), ModelBuildError> {
        let s = self.state(state)?;
        let ids = actions
            .iter()
            .map(|a| self.action(a))
            .collect::<Result<Vec<_>, _>>()?;
        self.restricted.insert(s, ids);
        Ok(())
    }

    pub fn set_prob(
        &mut self,
        from: &str,
        action: &str,
        to: &str,
        p: f64,
    ) -> Result<(), ModelBuildError> {
        let s = self.state(from)?;
        let a = self.action(action)?;
        let s2 = self.state(to)?;
        self.prob.push((s, a, s2, p));
        Ok(())
    }

    pub fn set_reward(&mut self, state: &str, action: &str, r: f64) -> Result<(), ModelBuildError> {
        let s = self.state(state)?;
        let a = self.action(action)?;
        self.reward.push((s, a, r));
        Ok(())
    }

    pub fn build(self) -> Result<StochMdpModel, ModelBuildError> {
        if self.states.is_empty() {
            return Err(ModelBuildError::NoStates);
        }
        if self.actions.is_empty() {
            return Err(ModelBuildError::NoActions);
        }
        let n = self.states.len();
        let m = self.actions.len();
        let mut prob = vec![vec![vec![0.0; n]; m]; n];
        for (s, a, s2, p) in self.prob {
            prob[s][a][s2] = p;
        }
        let mut reward = vec![vec![0.0; m]; n];
        for (s, a, r) in self.reward {
            reward[s][a] = r;
        }
        let avail = (0..n)
            .map(|s| {
                self.restricted
                    .get(&s)
                    .cloned()
                    .unwrap_or_else(|| (0..m).collect())
            })
            .collect();
        Ok(StochMdpModel {
            states: self.states,
            actions: self.actions,
            avail,
            prob,
            reward,
            discount: self.discount,
        })
    }
}
