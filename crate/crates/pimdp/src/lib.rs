//! Qualitative sequential decision making under uncertainty: solvers for
//! possibilistic MDPs and POMDPs over finite ordinal scales, and a
//! classical stochastic baseline.
//!
//! The possibilistic side is exact: values live on a finite totally ordered
//! scale, the solvers are max-min dynamic programming to a fixpoint reached
//! in finitely many sweeps, and belief states form a finite space closed
//! under min-based prediction and revision. See the `grid` module for the
//! worked robot-in-a-room example and the `io` module for the file format.

pub mod belief;
pub mod grid;
pub mod io;
pub mod mdp;
pub mod model;
pub mod one_stage;
pub mod pomdp;
pub mod scale;
pub mod stoch;

pub use belief::{belief_utility, observation_possibility, predict, revise, Belief};
pub use mdp::{backwards_induction, policy_value, value_iteration, UtilityMode};
pub use model::{PiMdpModel, PiPomdpModel, StochMdpModel};
pub use pomdp::{reachable_beliefs, solve_pomdp, value_iteration_po, BeliefSpace};
pub use scale::{Level, Scale};
