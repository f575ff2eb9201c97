//! JSON model files: loading with full diagnostics, and saving.
//!
//! A file carries a `scale` (ordered label array), `states`, per-state
//! `actions`, sparse `pi_trans`/`mu` sections (omitted entries are the
//! bottom level), optional `observations` + `pi_obs`, and an optional
//! `stochastic` section with `p_trans`, `reward` and `gamma`. Schema
//! problems are collected with their JSON paths instead of failing one at
//! a time, and loaded models are validated before being handed out.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::Belief;
use crate::model::{
    PiMdpModel, PiPomdpModel, StochMdpModel, ValidationReport,
};
use crate::scale::Scale;

type Table3<T> = BTreeMap<String, BTreeMap<String, BTreeMap<String, T>>>;

#[derive(Debug, Clone, Serialize, Deserialize, Default, PartialEq)]
pub struct StochSection {
    pub p_trans: Table3<f64>,
    #[serde(default)]
    pub reward: BTreeMap<String, BTreeMap<String, f64>>,
    pub gamma: f64,
}

/// On-disk shape of a model file.
#[derive(Debug, Clone, Serialize, Deserialize, Default, PartialEq)]
pub struct ModelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<Vec<String>>,
    pub states: Vec<String>,
    /// per-state action lists
    pub actions: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi_trans: Option<Table3<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observations: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi_obs: Option<Table3<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stochastic: Option<StochSection>,
}

/// The models a file can describe. `pi` is partially observable exactly
/// when the file has an `observations` section.
#[derive(Debug)]
pub enum PiModel {
    Mdp(PiMdpModel),
    Pomdp(PiPomdpModel),
}

impl PiModel {
    pub fn base(&self) -> &PiMdpModel {
        match self {
            PiModel::Mdp(m) => m,
            PiModel::Pomdp(m) => m.base(),
        }
    }
}

#[derive(Debug)]
pub struct ModelBundle {
    pub pi: Option<PiModel>,
    pub stoch: Option<StochMdpModel>,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("schema violations:\n{}", .0.join("\n"))]
    Schema(Vec<String>),
    #[error("model failed validation:\n{0}")]
    Validation(ValidationReport),
}

fn resolve_pi(file: &ModelFile, errs: &mut Vec<String>) -> Option<PiModel> {
    let scale_labels = match &file.scale {
        Some(s) => s.clone(),
        None => {
            if file.pi_trans.is_some() || file.mu.is_some() {
                errs.push("scale: required by pi_trans/mu but missing".to_string());
            }
            return None;
        }
    };
    let scale = match Scale::new(scale_labels) {
        Ok(s) => s,
        Err(e) => {
            errs.push(format!("scale: {e}"));
            return None;
        }
    };
    // global action order: first appearance over states in file order
    let mut actions: Vec<String> = Vec::new();
    for s in &file.states {
        match file.actions.get(s) {
            Some(list) => {
                for a in list {
                    if !actions.contains(a) {
                        actions.push(a.clone());
                    }
                }
            }
            None => errs.push(format!("actions.{s}: missing action list for state")),
        }
    }
    for s in file.actions.keys() {
        if !file.states.contains(s) {
            errs.push(format!("actions.{s}: not a declared state"));
        }
    }

    let build = || -> Result<PiModel, String> {
        let observed = file.observations.is_some();
        let mut pb = PiPomdpModel::builder(scale.clone());
        {
            let b = pb.base();
            for s in &file.states {
                b.add_state(s).map_err(|e| format!("states: {e}"))?;
            }
            for a in &actions {
                b.add_action(a).map_err(|e| format!("actions: {e}"))?;
            }
            for s in &file.states {
                if let Some(list) = file.actions.get(s) {
                    let refs: Vec<&str> = list.iter().map(String::as_str).collect();
                    b.restrict_actions(s, &refs)
                        .map_err(|e| format!("actions.{s}: {e}"))?;
                }
            }
        }
        let mut local = Vec::new();
        if let Some(trans) = &file.pi_trans {
            for (s, per_action) in trans {
                for (a, row) in per_action {
                    for (s2, label) in row {
                        if let Err(e) = pb.base().set_trans(s, a, s2, label) {
                            local.push(format!("pi_trans.{s}.{a}.{s2}: {e}"));
                        }
                    }
                }
            }
        } else {
            local.push("pi_trans: required when a scale is present".to_string());
        }
        if let Some(mu) = &file.mu {
            for (s, label) in mu {
                if let Err(e) = pb.base().set_util(s, label) {
                    local.push(format!("mu.{s}: {e}"));
                }
            }
        }
        if observed {
            for o in file.observations.as_ref().unwrap() {
                if let Err(e) = pb.add_observation(o) {
                    local.push(format!("observations: {e}"));
                }
            }
            match &file.pi_obs {
                Some(obs) => {
                    for (s, per_action) in obs {
                        for (a, row) in per_action {
                            for (o, label) in row {
                                if let Err(e) = pb.set_obs(s, a, o, label) {
                                    local.push(format!("pi_obs.{s}.{a}.{o}: {e}"));
                                }
                            }
                        }
                    }
                }
                None => local.push("pi_obs: required when observations are declared".to_string()),
            }
        }
        if !local.is_empty() {
            return Err(local.join("\n"));
        }
        let pomdp = pb.build().map_err(|e| format!("model: {e}"))?;
        Ok(if observed {
            PiModel::Pomdp(pomdp)
        } else {
            PiModel::Mdp(pomdp.base().clone())
        })
    };
    match build() {
        Ok(m) => Some(m),
        Err(joined) => {
            errs.extend(joined.lines().map(String::from));
            None
        }
    }
}

fn resolve_stoch(file: &ModelFile, errs: &mut Vec<String>) -> Option<StochMdpModel> {
    let section = file.stochastic.as_ref()?;
    let mut b = StochMdpModel::builder(section.gamma);
    for s in &file.states {
        if let Err(e) = b.add_state(s) {
            errs.push(format!("states: {e}"));
            return None;
        }
    }
    let mut actions: Vec<String> = Vec::new();
    for s in &file.states {
        if let Some(list) = file.actions.get(s) {
            for a in list {
                if !actions.contains(a) {
                    actions.push(a.clone());
                }
            }
        }
    }
    for a in &actions {
        if let Err(e) = b.add_action(a) {
            errs.push(format!("actions: {e}"));
            return None;
        }
    }
    let mut ok = true;
    for s in &file.states {
        if let Some(list) = file.actions.get(s) {
            let refs: Vec<&str> = list.iter().map(String::as_str).collect();
            if let Err(e) = b.restrict_actions(s, &refs) {
                errs.push(format!("actions.{s}: {e}"));
                ok = false;
            }
        }
    }
    for (s, per_action) in &section.p_trans {
        for (a, row) in per_action {
            for (s2, &p) in row {
                if let Err(e) = b.set_prob(s, a, s2, p) {
                    errs.push(format!("stochastic.p_trans.{s}.{a}.{s2}: {e}"));
                    ok = false;
                }
            }
        }
    }
    for (s, per_action) in &section.reward {
        for (a, &r) in per_action {
            if let Err(e) = b.set_reward(s, a, r) {
                errs.push(format!("stochastic.reward.{s}.{a}: {e}"));
                ok = false;
            }
        }
    }
    if !ok {
        return None;
    }
    match b.build() {
        Ok(m) => Some(m),
        Err(e) => {
            errs.push(format!("stochastic: {e}"));
            None
        }
    }
}

/// Parses and validates a model file read from `path`.
pub fn load_model(path: impl AsRef<Path>) -> Result<ModelBundle, LoadError> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|source| LoadError::Io {
        path: path.as_ref().display().to_string(),
        source,
    })?;
    load_model_str(&text)
}

/// Like [`load_model`], from an in-memory string.
pub fn load_model_str(text: &str) -> Result<ModelBundle, LoadError> {
    let file: ModelFile = serde_json::from_str(text)?;
    let mut errs = Vec::new();
    let pi = resolve_pi(&file, &mut errs);
    let stoch = resolve_stoch(&file, &mut errs);
    if !errs.is_empty() {
        return Err(LoadError::Schema(errs));
    }
    let mut report = ValidationReport::default();
    if let Some(pi) = &pi {
        let r = match pi {
            PiModel::Mdp(m) => m.validate(),
            PiModel::Pomdp(m) => m.validate(),
        };
        report.violations.extend(r.violations);
    }
    if let Some(st) = &stoch {
        report.violations.extend(st.validate().violations);
    }
    if !report.is_ok() {
        return Err(LoadError::Validation(report));
    }
    Ok(ModelBundle { pi, stoch })
}

fn pi_sections(model: &PiMdpModel) -> (Table3<String>, BTreeMap<String, String>) {
    let mut trans: Table3<String> = BTreeMap::new();
    let mut mu = BTreeMap::new();
    for s in 0..model.n_states() {
        for &a in model.available(s) {
            for s2 in 0..model.n_states() {
                let level = model.trans(s, a, s2);
                if !level.is_bottom() {
                    trans
                        .entry(model.state_name(s).to_string())
                        .or_default()
                        .entry(model.action_name(a).to_string())
                        .or_default()
                        .insert(
                            model.state_name(s2).to_string(),
                            model.scale().label(level).to_string(),
                        );
                }
            }
        }
        let u = model.util(s);
        if !u.is_bottom() {
            mu.insert(
                model.state_name(s).to_string(),
                model.scale().label(u).to_string(),
            );
        }
    }
    (trans, mu)
}

fn actions_map(states: &[String], avail: impl Fn(usize) -> Vec<String>) -> BTreeMap<String, Vec<String>> {
    states
        .iter()
        .enumerate()
        .map(|(s, name)| (name.clone(), avail(s)))
        .collect()
}

/// Serializes a fully observable model to the file schema.
pub fn pi_mdp_to_file(model: &PiMdpModel) -> ModelFile {
    let (pi_trans, mu) = pi_sections(model);
    ModelFile {
        scale: Some(model.scale().labels().to_vec()),
        states: model.states().to_vec(),
        actions: actions_map(model.states(), |s| {
            model
                .available(s)
                .iter()
                .map(|&a| model.action_name(a).to_string())
                .collect()
        }),
        pi_trans: Some(pi_trans),
        mu: Some(mu),
        ..ModelFile::default()
    }
}

/// Serializes a partially observable model to the file schema.
pub fn pi_pomdp_to_file(model: &PiPomdpModel) -> ModelFile {
    let mut file = pi_mdp_to_file(model.base());
    file.observations = Some(model.observations().to_vec());
    let mut obs: Table3<String> = BTreeMap::new();
    for s in 0..model.n_states() {
        for &a in model.base().available(s) {
            for o in 0..model.n_observations() {
                let level = model.obs(s, a, o);
                if !level.is_bottom() {
                    obs.entry(model.base().state_name(s).to_string())
                        .or_default()
                        .entry(model.base().action_name(a).to_string())
                        .or_default()
                        .insert(
                            model.observation_name(o).to_string(),
                            model.scale().label(level).to_string(),
                        );
                }
            }
        }
    }
    file.pi_obs = Some(obs);
    file
}

/// Renders a model file as deterministic pretty JSON.
pub fn to_json(file: &ModelFile) -> String {
    let mut s = serde_json::to_string_pretty(file).expect("model files always serialize");
    s.push('\n');
    s
}

/// Serializes a belief as a `{state: label}` map omitting bottom entries.
pub fn belief_to_json(model: &PiPomdpModel, beta: &Belief) -> String {
    let mut map = BTreeMap::new();
    for s in 0..model.n_states() {
        let l = beta.level(model, s);
        if !l.is_bottom() {
            map.insert(
                model.base().state_name(s).to_string(),
                model.scale().label(l).to_string(),
            );
        }
    }
    serde_json::to_string(&map).expect("belief maps always serialize")
}

/// Parses a belief from a `{state: label}` map; omitted states are bottom.
pub fn belief_from_json(model: &PiPomdpModel, text: &str) -> Result<Belief, LoadError> {
    let map: BTreeMap<String, String> = serde_json::from_str(text)?;
    let mut errs = Vec::new();
    let mut levels = vec![model.scale().bottom(); model.n_states()];
    for (state, label) in &map {
        let s = match model.base().state_id(state) {
            Some(s) => s,
            None => {
                errs.push(format!("belief.{state}: not a declared state"));
                continue;
            }
        };
        match model.scale().level(label) {
            Ok(l) => levels[s] = l,
            Err(e) => errs.push(format!("belief.{state}: {e}")),
        }
    }
    if !errs.is_empty() {
        return Err(LoadError::Schema(errs));
    }
    Belief::from_levels(model, &levels)
        .map_err(|e| LoadError::Schema(vec![format!("belief: {e}")]))
}
