//! The two one-step qualitative decision criteria.
//!
//! Given a possibility distribution over outcomes and a utility per outcome,
//! the optimistic criterion measures the overlap of plausible and preferred
//! outcomes (max of min), while the pessimistic one measures the inclusion
//! of plausible outcomes in preferred ones (min of max with the negated
//! possibility). Both are exposed over model rows so scale tagging stays
//! coherent; the raw-rank forms are shared with the belief calculus.

use thiserror::Error;

use crate::model::{ActionId, PiMdpModel, StateId};
use crate::scale::Level;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OneStageError {
    #[error("action `{action}` is not available in state `{state}`")]
    UnavailableAction { state: String, action: String },
}

/// max over outcomes of min(possibility, utility), on raw ranks.
pub fn optimistic_over(possibility: &[u16], utility: &[u16]) -> u16 {
    possibility
        .iter()
        .zip(utility)
        .map(|(&p, &u)| p.min(u))
        .max()
        .unwrap_or(0)
}

/// min over outcomes of max(neg(possibility), utility), on raw ranks.
/// `top` is the rank of the top level, i.e. K-1.
pub fn pessimistic_over(possibility: &[u16], utility: &[u16], top: u16) -> u16 {
    possibility
        .iter()
        .zip(utility)
        .map(|(&p, &u)| (top - p).max(u))
        .min()
        .unwrap_or(top)
}

fn check_available(model: &PiMdpModel, s: StateId, a: ActionId) -> Result<(), OneStageError> {
    if model.is_available(s, a) {
        Ok(())
    } else {
        Err(OneStageError::UnavailableAction {
            state: model.state_name(s).to_string(),
            action: model.action_name(a).to_string(),
        })
    }
}

/// Optimistic one-step utility of playing `a` in `s0`:
/// max over successors x of min(pi(x|s0,a), mu(x)).
pub fn optimistic_utility(
    model: &PiMdpModel,
    s0: StateId,
    a: ActionId,
) -> Result<Level, OneStageError> {
    check_available(model, s0, a)?;
    let n = model.n_states();
    let rank = (0..n)
        .map(|x| model.trans_rank(s0, a, x).min(model.util_rank(x)))
        .max()
        .unwrap_or(0);
    Ok(model.scale().level_at(rank as usize))
}

/// Pessimistic (conservative) one-step utility of playing `a` in `s0`:
/// min over successors x of max(n(pi(x|s0,a)), mu(x)).
pub fn pessimistic_utility(
    model: &PiMdpModel,
    s0: StateId,
    a: ActionId,
) -> Result<Level, OneStageError> {
    check_available(model, s0, a)?;
    let n = model.n_states();
    let top = (model.scale().size() - 1) as u16;
    let rank = (0..n)
        .map(|x| (top - model.trans_rank(s0, a, x)).max(model.util_rank(x)))
        .min()
        .unwrap_or(top);
    Ok(model.scale().level_at(rank as usize))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scale::Scale;

    /// Builds a single-action model with the given transition row out of s0
    /// and the given utilities, on a scale with `k` levels.
    fn row_model(k: usize, row: &[u16], util: &[u16]) -> PiMdpModel {
        let labels: Vec<String> = (0..k).map(|i| i.to_string()).collect();
        let scale = Scale::new(labels.clone()).unwrap();
        let mut b = PiMdpModel::builder(scale);
        for i in 0..row.len() {
            b.add_state(&format!("s{i}")).unwrap();
        }
        b.add_action("a").unwrap();
        for (i, &r) in row.iter().enumerate() {
            b.set_trans("s0", "a", &format!("s{i}"), &labels[r as usize])
                .unwrap();
        }
        // make the remaining rows normalized self-loops so validate passes
        for i in 1..row.len() {
            b.set_trans(&format!("s{i}"), "a", &format!("s{i}"), &labels[k - 1])
                .unwrap();
        }
        for (i, &u) in util.iter().enumerate() {
            b.set_util(&format!("s{i}"), &labels[u as usize]).unwrap();
        }
        b.build().unwrap()
    }

    #[test]
    fn certain_transition_collapses_both_criteria() {
        // a leads with certainty only to s1
        let m = row_model(5, &[0, 4, 0], &[3, 2, 0]);
        assert_eq!(optimistic_utility(&m, 0, 0).unwrap().rank(), 2);
        assert_eq!(pessimistic_utility(&m, 0, 0).unwrap().rank(), 2);
    }

    #[test]
    fn top_utility_gives_top_optimistic() {
        let m = row_model(5, &[2, 4, 1], &[4, 4, 4]);
        assert!(optimistic_utility(&m, 0, 0).unwrap().is_top());
    }

    #[test]
    fn bottom_utility_with_possible_successor_gives_bottom_pessimistic() {
        let m = row_model(5, &[0, 4, 2], &[0, 0, 0]);
        assert!(pessimistic_utility(&m, 0, 0).unwrap().is_bottom());
    }

    #[test]
    fn unavailable_action_is_an_error() {
        let scale = Scale::from_labels(&["0", "1"]).unwrap();
        let mut b = PiMdpModel::builder(scale);
        b.add_state("x").unwrap();
        b.add_action("a").unwrap();
        b.add_action("b").unwrap();
        b.set_trans("x", "a", "x", "1").unwrap();
        b.restrict_actions("x", &["a"]).unwrap();
        let m = b.build().unwrap();
        let bid = m.action_id("b").unwrap();
        assert!(matches!(
            pessimistic_utility(&m, 0, bid),
            Err(OneStageError::UnavailableAction { .. })
        ));
        assert!(matches!(
            optimistic_utility(&m, 0, bid),
            Err(OneStageError::UnavailableAction { .. })
        ));
    }

    /// Simple xorshift so the exhaustive checks don't need an RNG crate here.
    fn next(seed: &mut u64) -> u64 {
        let mut x = *seed;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        *seed = x;
        x
    }

    fn random_instance(seed: &mut u64, n: usize, k: u16) -> (Vec<u16>, Vec<u16>) {
        let mut row: Vec<u16> = (0..n).map(|_| (next(seed) % k as u64) as u16).collect();
        row[(next(seed) % n as u64) as usize] = k - 1; // normalize
        let util = (0..n).map(|_| (next(seed) % k as u64) as u16).collect();
        (row, util)
    }

    #[test]
    fn criteria_match_direct_exhaustive_evaluation() {
        let mut seed = 0x5eed_1234_u64;
        for _ in 0..300 {
            let (row, util) = random_instance(&mut seed, 4, 5);
            let m = row_model(5, &row, &util);
            // direct evaluation over all successors
            let mut opt = 0u16;
            let mut pess = 4u16;
            for x in 0..4 {
                opt = opt.max(row[x].min(util[x]));
                pess = pess.min((4 - row[x]).max(util[x]));
            }
            assert_eq!(optimistic_utility(&m, 0, 0).unwrap().rank() as u16, opt);
            assert_eq!(pessimistic_utility(&m, 0, 0).unwrap().rank() as u16, pess);
        }
    }

    #[test]
    fn pessimistic_bounded_by_optimistic_when_mu_normalized() {
        let mut seed = 0xabcd_ef01_u64;
        for _ in 0..300 {
            let (row, mut util) = random_instance(&mut seed, 4, 5);
            util[(next(&mut seed) % 4) as usize] = 4; // normalize mu
            let m = row_model(5, &row, &util);
            let p = pessimistic_utility(&m, 0, 0).unwrap();
            let o = optimistic_utility(&m, 0, 0).unwrap();
            assert!(p <= o, "pessimistic above optimistic on {row:?} {util:?}");
        }
    }

    #[test]
    fn criteria_monotone_in_utility() {
        // exhaustive over tiny instances: 2 states, 3 levels
        for p0 in 0..3u16 {
            for p1 in 0..3u16 {
                if p0 != 2 && p1 != 2 {
                    continue; // keep rows normalized
                }
                for u0 in 0..3u16 {
                    for u1 in 0..3u16 {
                        for v0 in u0..3u16 {
                            for v1 in u1..3u16 {
                                let low = row_model(3, &[p0, p1], &[u0, u1]);
                                let high = row_model(3, &[p0, p1], &[v0, v1]);
                                assert!(
                                    pessimistic_utility(&low, 0, 0).unwrap().rank()
                                        <= pessimistic_utility(&high, 0, 0).unwrap().rank()
                                );
                                assert!(
                                    optimistic_utility(&low, 0, 0).unwrap().rank()
                                        <= optimistic_utility(&high, 0, 0).unwrap().rank()
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn impossible_successors_never_matter() {
        let mut seed = 0x00c0_ffee_u64;
        for _ in 0..200 {
            let (mut row, util) = random_instance(&mut seed, 4, 5);
            row[1] = 0; // force an impossible successor
            let m = row_model(5, &row, &util);
            let opt = optimistic_utility(&m, 0, 0).unwrap().rank() as u16;
            let pess = pessimistic_utility(&m, 0, 0).unwrap().rank() as u16;
            // delete the impossible successor and re-evaluate directly
            let keep: Vec<usize> = (0..4).filter(|&x| row[x] > 0).collect();
            let opt2 = keep.iter().map(|&x| row[x].min(util[x])).max().unwrap_or(0);
            let pess2 = keep
                .iter()
                .map(|&x| (4 - row[x]).max(util[x]))
                .min()
                .unwrap_or(4);
            assert_eq!(opt, opt2);
            assert_eq!(pess, pess2);
        }
    }
}
