//! Seeded random instance generators for the certification suites.
//! Identical seeds produce identical models.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pimdp::model::{PiMdpModel, PiPomdpModel, StochMdpModel};
use pimdp::scale::Scale;

#[derive(Debug, Clone)]
pub struct PiGenConfig {
    pub n_states: usize,
    pub n_actions: usize,
    pub levels: usize,
    /// append a deterministic self-loop action; value iteration presumes
    /// states can be maintained, so its test instances set this
    pub with_stay: bool,
    /// force max over states of mu to the top level
    pub normalized_mu: bool,
}

fn labels(k: usize) -> Vec<String> {
    (0..k).map(|i| i.to_string()).collect()
}

fn fill_pi_base(
    b: &mut pimdp::model::PiMdpBuilder,
    rng: &mut ChaCha8Rng,
    cfg: &PiGenConfig,
) -> (Vec<String>, Vec<String>) {
    let names: Vec<String> = (0..cfg.n_states).map(|s| format!("s{s}")).collect();
    let mut actions: Vec<String> = (0..cfg.n_actions).map(|a| format!("a{a}")).collect();
    if cfg.with_stay {
        actions.push("stay".to_string());
    }
    for s in &names {
        b.add_state(s).unwrap();
    }
    for a in &actions {
        b.add_action(a).unwrap();
    }
    let lab = labels(cfg.levels);
    let top = &lab[cfg.levels - 1];
    for s in &names {
        for a in actions.iter().take(cfg.n_actions) {
            let anchor = rng.gen_range(0..cfg.n_states);
            for (s2i, s2) in names.iter().enumerate() {
                let rank = if s2i == anchor {
                    cfg.levels - 1
                } else {
                    rng.gen_range(0..cfg.levels)
                };
                if rank > 0 {
                    b.set_trans(s, a, s2, &lab[rank]).unwrap();
                }
            }
        }
        if cfg.with_stay {
            b.set_trans(s, "stay", s, top).unwrap();
        }
    }
    let mut mu: Vec<usize> = (0..cfg.n_states)
        .map(|_| rng.gen_range(0..cfg.levels))
        .collect();
    if cfg.normalized_mu {
        let at = rng.gen_range(0..cfg.n_states);
        mu[at] = cfg.levels - 1;
    }
    for (s, &rank) in names.iter().zip(&mu) {
        if rank > 0 {
            b.set_util(s, &lab[rank]).unwrap();
        }
    }
    (names, actions)
}

pub fn random_pi_mdp(seed: u64, cfg: &PiGenConfig) -> PiMdpModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = Scale::new(labels(cfg.levels)).unwrap();
    let mut b = PiMdpModel::builder(scale);
    fill_pi_base(&mut b, &mut rng, cfg);
    let model = b.build().unwrap();
    debug_assert!(model.validate().is_ok());
    model
}

/// Random partially observable model. With `identifying` the observations
/// reveal the resulting state exactly (one observation per state);
/// otherwise `n_obs` observations get random normalized rows.
pub fn random_pi_pomdp(
    seed: u64,
    cfg: &PiGenConfig,
    n_obs: usize,
    identifying: bool,
) -> PiPomdpModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = Scale::new(labels(cfg.levels)).unwrap();
    let mut b = PiPomdpModel::builder(scale);
    let (names, actions) = fill_pi_base(b.base(), &mut rng, cfg);
    let lab = labels(cfg.levels);
    let top = &lab[cfg.levels - 1];
    if identifying {
        for s in &names {
            b.add_observation(&format!("at-{s}")).unwrap();
        }
        for s in &names {
            for a in &actions {
                b.set_obs(s, a, &format!("at-{s}"), top).unwrap();
            }
        }
    } else {
        let obs: Vec<String> = (0..n_obs).map(|o| format!("o{o}")).collect();
        for o in &obs {
            b.add_observation(o).unwrap();
        }
        for s in &names {
            for a in &actions {
                let anchor = rng.gen_range(0..n_obs);
                for (oi, o) in obs.iter().enumerate() {
                    let rank = if oi == anchor {
                        cfg.levels - 1
                    } else {
                        rng.gen_range(0..cfg.levels)
                    };
                    if rank > 0 {
                        b.set_obs(s, a, o, &lab[rank]).unwrap();
                    }
                }
            }
        }
    }
    let model = b.build().unwrap();
    debug_assert!(model.validate().is_ok());
    model
}

#[derive(Debug, Clone)]
pub struct StochGenConfig {
    pub n_states: usize,
    pub n_actions: usize,
    pub nonneg_rewards: bool,
}

pub fn random_stoch_mdp(seed: u64, cfg: &StochGenConfig) -> StochMdpModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma = rng.gen_range(0.3..0.95);
    let mut b = StochMdpModel::builder(gamma);
    let names: Vec<String> = (0..cfg.n_states).map(|s| format!("s{s}")).collect();
    let actions: Vec<String> = (0..cfg.n_actions).map(|a| format!("a{a}")).collect();
    for s in &names {
        b.add_state(s).unwrap();
    }
    for a in &actions {
        b.add_action(a).unwrap();
    }
    for s in &names {
        for a in &actions {
            let mut weights: Vec<f64> = (0..cfg.n_states)
                .map(|_| rng.gen_range(0.01..1.0))
                .collect();
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            for (s2, w) in names.iter().zip(&weights) {
                b.set_prob(s, a, s2, *w).unwrap();
            }
            let r = if cfg.nonneg_rewards {
                rng.gen_range(0.0..1.0)
            } else {
                rng.gen_range(-1.0..1.0)
            };
            b.set_reward(s, a, r).unwrap();
        }
    }
    let model = b.build().unwrap();
    debug_assert!(model.validate().is_ok());
    model
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_models_validate_and_are_reproducible() {
        let cfg = PiGenConfig {
            n_states: 4,
            n_actions: 3,
            levels: 5,
            with_stay: true,
            normalized_mu: true,
        };
        let a = random_pi_mdp(9, &cfg);
        let b = random_pi_mdp(9, &cfg);
        assert_eq!(a, b);
        assert!(a.validate().is_ok());

        let p = random_pi_pomdp(9, &cfg, 3, false);
        assert!(p.validate().is_ok());
        let q = random_pi_pomdp(9, &cfg, 3, true);
        assert!(q.validate().is_ok());
        assert_eq!(q.n_observations(), 4);

        let s = random_stoch_mdp(
            9,
            &StochGenConfig {
                n_states: 3,
                n_actions: 2,
                nonneg_rewards: true,
            },
        );
        assert!(s.validate().is_ok());
    }
}
