//! Rendering of solver results in the three output formats.

use clap::ValueEnum;
use serde_json::json;

use pimdp::belief::Belief;
use pimdp::io::belief_to_json;
use pimdp::mdp::{FiniteHorizonSolution, StationarySolution};
use pimdp::model::{PiMdpModel, PiPomdpModel, StochMdpModel};
use pimdp::pomdp::{BeliefSolution, BeliefSpace};
use pimdp::scale::Level;
use pimdp::stoch::{StochFiniteSolution, StochStationarySolution};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Lines,
}

pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Table {
        Table {
            header,
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.len()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let mut out = String::new();
        let emit = |out: &mut String, cells: Vec<&str>| {
            let line: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        };
        emit(&mut out, self.header.clone());
        for row in &self.rows {
            emit(&mut out, row.iter().map(String::as_str).collect());
        }
        out
    }
}

pub fn belief_label(model: &PiPomdpModel, beta: &Belief) -> String {
    belief_to_json(model, beta)
}

fn action_set(model: &PiMdpModel, set: &[usize]) -> String {
    let names: Vec<&str> = set.iter().map(|&a| model.action_name(a)).collect();
    format!("{{{}}}", names.join(","))
}

pub fn render_stationary(model: &PiMdpModel, sol: &StationarySolution, format: Format) -> String {
    let settled = sol.stabilized_policy();
    let label = |l: Level| model.scale().label(l).to_string();
    match format {
        Format::Table => {
            let mut t = Table::new(vec!["state", "value", "policy", "optimal"]);
            for s in 0..model.n_states() {
                t.row(vec![
                    model.state_name(s).to_string(),
                    label(sol.values[s]),
                    model.action_name(settled.action[s]).to_string(),
                    action_set(model, &settled.optimal[s]),
                ]);
            }
            format!("sweeps: {}\n{}", sol.sweeps, t.render())
        }
        Format::Lines => {
            let mut out = String::new();
            for s in 0..model.n_states() {
                out.push_str(&format!(
                    "state={} value={} actions={} policy={}\n",
                    model.state_name(s),
                    label(sol.values[s]),
                    action_set(model, &settled.optimal[s]),
                    model.action_name(settled.action[s]),
                ));
            }
            out.push_str(&format!("sweeps={}\n", sol.sweeps));
            out
        }
        Format::Json => {
            let states: Vec<_> = (0..model.n_states())
                .map(|s| {
                    json!({
                        "state": model.state_name(s),
                        "value": label(sol.values[s]),
                        "policy": model.action_name(settled.action[s]),
                        "optimal": settled.optimal[s]
                            .iter()
                            .map(|&a| model.action_name(a))
                            .collect::<Vec<_>>(),
                        "settled_at_sweep": settled.settled_at[s],
                    })
                })
                .collect();
            let doc = json!({ "sweeps": sol.sweeps, "states": states });
            format!("{}\n", serde_json::to_string_pretty(&doc).unwrap())
        }
    }
}

pub fn render_finite(
    model: &PiMdpModel,
    sol: &FiniteHorizonSolution,
    n: usize,
    format: Format,
) -> String {
    let label = |l: Level| model.scale().label(l).to_string();
    match format {
        Format::Table => {
            let mut t = Table::new(vec!["state", "value", "policy", "optimal"]);
            for s in 0..model.n_states() {
                t.row(vec![
                    model.state_name(s).to_string(),
                    label(sol.values[0][s]),
                    model.action_name(sol.policies[0].canonical[s]).to_string(),
                    action_set(model, &sol.policies[0].optimal[s]),
                ]);
            }
            format!("horizon: {n}\n{}", t.render())
        }
        Format::Lines => {
            let mut out = String::new();
            for s in 0..model.n_states() {
                out.push_str(&format!(
                    "state={} value={} actions={} policy={}\n",
                    model.state_name(s),
                    label(sol.values[0][s]),
                    action_set(model, &sol.policies[0].optimal[s]),
                    model.action_name(sol.policies[0].canonical[s]),
                ));
            }
            out.push_str(&format!("horizon={n}\n"));
            out
        }
        Format::Json => {
            let stages: Vec<_> = (0..n)
                .map(|t| {
                    let states: Vec<_> = (0..model.n_states())
                        .map(|s| {
                            json!({
                                "state": model.state_name(s),
                                "value": label(sol.values[t][s]),
                                "policy": model.action_name(sol.policies[t].canonical[s]),
                                "optimal": sol.policies[t].optimal[s]
                                    .iter()
                                    .map(|&a| model.action_name(a))
                                    .collect::<Vec<_>>(),
                            })
                        })
                        .collect();
                    json!({ "stage": t, "states": states })
                })
                .collect();
            let terminal: Vec<_> = (0..model.n_states())
                .map(|s| {
                    json!({
                        "state": model.state_name(s),
                        "value": label(sol.values[n][s]),
                    })
                })
                .collect();
            let doc = json!({ "horizon": n, "stages": stages, "terminal": terminal });
            format!("{}\n", serde_json::to_string_pretty(&doc).unwrap())
        }
    }
}

pub fn render_pomdp(
    model: &PiPomdpModel,
    space: &BeliefSpace,
    sol: &BeliefSolution,
    initial: usize,
    format: Format,
) -> String {
    let settled = sol.stabilized_policy();
    let label = |l: Level| model.scale().label(l).to_string();
    let base = model.base();
    match format {
        Format::Table => {
            let mut t = Table::new(vec!["belief", "support", "value", "policy", "optimal"]);
            for b in 0..space.len() {
                t.row(vec![
                    format!("b{b}"),
                    belief_label(model, &space.beliefs[b]),
                    label(sol.values[b]),
                    base.action_name(settled.action[b]).to_string(),
                    action_set(base, &settled.optimal[b]),
                ]);
            }
            format!(
                "beliefs: {}\nsweeps: {}\ninitial: b{}\nvalue at initial: {}\n{}",
                space.len(),
                sol.sweeps,
                initial,
                label(sol.values[initial]),
                t.render()
            )
        }
        Format::Lines => {
            let mut out = String::new();
            for b in 0..space.len() {
                out.push_str(&format!(
                    "state=b{} value={} actions={} policy={}\n",
                    b,
                    label(sol.values[b]),
                    action_set(base, &settled.optimal[b]),
                    base.action_name(settled.action[b]),
                ));
            }
            out.push_str(&format!(
                "beliefs={} sweeps={} initial=b{} value={}\n",
                space.len(),
                sol.sweeps,
                initial,
                label(sol.values[initial])
            ));
            out
        }
        Format::Json => {
            let beliefs: Vec<_> = (0..space.len())
                .map(|b| {
                    json!({
                        "index": b,
                        "support": serde_json::from_str::<serde_json::Value>(
                            &belief_label(model, &space.beliefs[b])
                        )
                        .unwrap(),
                        "value": label(sol.values[b]),
                        "policy": base.action_name(settled.action[b]),
                        "optimal": settled.optimal[b]
                            .iter()
                            .map(|&a| base.action_name(a))
                            .collect::<Vec<_>>(),
                    })
                })
                .collect();
            let doc = json!({
                "beliefs": space.len(),
                "sweeps": sol.sweeps,
                "initial": initial,
                "value_at_initial": label(sol.values[initial]),
                "table": beliefs,
            });
            format!("{}\n", serde_json::to_string_pretty(&doc).unwrap())
        }
    }
}

pub fn render_beliefs(model: &PiPomdpModel, space: &BeliefSpace, format: Format) -> String {
    match format {
        Format::Json => {
            let beliefs: Vec<_> = (0..space.len())
                .map(|b| {
                    json!({
                        "index": b,
                        "support": serde_json::from_str::<serde_json::Value>(
                            &belief_label(model, &space.beliefs[b])
                        )
                        .unwrap(),
                    })
                })
                .collect();
            let mut edges = Vec::new();
            for (b, per_action) in space.edges.iter().enumerate() {
                for (i, list) in per_action.iter().enumerate() {
                    for e in list {
                        edges.push(json!({
                            "beta": b,
                            "action": model.base().action_name(space.avail[b][i]),
                            "obs": model.observation_name(e.obs),
                            "poss": model.scale().label(e.poss),
                            "next": e.next,
                        }));
                    }
                }
            }
            let doc = json!({ "beliefs": beliefs, "edges": edges });
            format!("{}\n", serde_json::to_string_pretty(&doc).unwrap())
        }
        Format::Table | Format::Lines => {
            let mut out = format!("beliefs: {}\n", space.len());
            for (b, beta) in space.beliefs.iter().enumerate() {
                out.push_str(&format!("b{b} = {}\n", belief_label(model, beta)));
            }
            out.push_str("edges:\n");
            out.push_str(&space.render_edges(model));
            out
        }
    }
}

pub fn render_values(model: &PiMdpModel, values: &[Level], format: Format) -> String {
    let label = |l: Level| model.scale().label(l).to_string();
    match format {
        Format::Table => {
            let mut t = Table::new(vec!["state", "value"]);
            for s in 0..model.n_states() {
                t.row(vec![model.state_name(s).to_string(), label(values[s])]);
            }
            t.render()
        }
        Format::Lines => {
            let mut out = String::new();
            for s in 0..model.n_states() {
                out.push_str(&format!(
                    "state={} value={}\n",
                    model.state_name(s),
                    label(values[s])
                ));
            }
            out
        }
        Format::Json => {
            let states: Vec<_> = (0..model.n_states())
                .map(|s| json!({ "state": model.state_name(s), "value": label(values[s]) }))
                .collect();
            format!(
                "{}\n",
                serde_json::to_string_pretty(&json!({ "states": states })).unwrap()
            )
        }
    }
}

pub fn render_stoch_stationary(
    model: &StochMdpModel,
    sol: &StochStationarySolution,
    format: Format,
) -> String {
    match format {
        Format::Table => {
            let mut t = Table::new(vec!["state", "value", "policy"]);
            for s in 0..model.n_states() {
                t.row(vec![
                    model.state_name(s).to_string(),
                    format!("{:.9}", sol.values[s]),
                    model.action_name(sol.policy[s]).to_string(),
                ]);
            }
            format!("iterations: {}\n{}", sol.iterations, t.render())
        }
        Format::Lines => {
            let mut out = String::new();
            for s in 0..model.n_states() {
                out.push_str(&format!(
                    "state={} value={:.9} policy={}\n",
                    model.state_name(s),
                    sol.values[s],
                    model.action_name(sol.policy[s])
                ));
            }
            out.push_str(&format!("iterations={}\n", sol.iterations));
            out
        }
        Format::Json => {
            let states: Vec<_> = (0..model.n_states())
                .map(|s| {
                    json!({
                        "state": model.state_name(s),
                        "value": sol.values[s],
                        "policy": model.action_name(sol.policy[s]),
                    })
                })
                .collect();
            let doc = json!({ "iterations": sol.iterations, "states": states });
            format!("{}\n", serde_json::to_string_pretty(&doc).unwrap())
        }
    }
}

pub fn render_stoch_finite(
    model: &StochMdpModel,
    sol: &StochFiniteSolution,
    n: usize,
    format: Format,
) -> String {
    match format {
        Format::Table => {
            let mut t = Table::new(vec!["state", "value", "policy"]);
            for s in 0..model.n_states() {
                t.row(vec![
                    model.state_name(s).to_string(),
                    format!("{:.9}", sol.values[0][s]),
                    model.action_name(sol.policies[0][s]).to_string(),
                ]);
            }
            format!("horizon: {n}\n{}", t.render())
        }
        Format::Lines => {
            let mut out = String::new();
            for s in 0..model.n_states() {
                out.push_str(&format!(
                    "state={} value={:.9} policy={}\n",
                    model.state_name(s),
                    sol.values[0][s],
                    model.action_name(sol.policies[0][s])
                ));
            }
            out.push_str(&format!("horizon={n}\n"));
            out
        }
        Format::Json => {
            let stages: Vec<_> = (0..=n)
                .map(|t| {
                    let states: Vec<_> = (0..model.n_states())
                        .map(|s| {
                            json!({
                                "state": model.state_name(s),
                                "value": sol.values[t][s],
                                "policy": model.action_name(sol.policies[t][s]),
                            })
                        })
                        .collect();
                    json!({ "stage": t, "states": states })
                })
                .collect();
            let doc = json!({ "horizon": n, "stages": stages });
            format!("{}\n", serde_json::to_string_pretty(&doc).unwrap())
        }
    }
}
