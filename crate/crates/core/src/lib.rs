//! Hider-seeker network design games.
//!
//! A hider builds an undirected network on `n` nodes and hides at one node; a
//! seeker, after seeing the network, inspects one node. The hider is caught
//! when hiding in the inspected node's closed neighbourhood (payoff `-beta`);
//! otherwise the inspected node is deleted and the hider earns `f` of the
//! size of the component still holding the hiding node.
//!
//! The crate provides the payoff model ([`payoff`]), an exact zero-sum game
//! solver ([`game`], on top of [`lp`]), every closed-form threshold and bound
//! for the equilibrium ([`closed_form`]), constructors for the optimal
//! networks and strategies ([`designer`]), and a brute-force oracle that
//! enumerates all small graphs to check the closed forms ([`oracle`]).

pub mod closed_form;
pub mod designer;
pub mod formats;
pub mod game;
pub mod graph;
pub mod lp;
pub mod oracle;
pub mod payoff;
pub mod rational;

pub use game::{best_response_gap, solve_zero_sum, GameSolution, MixedStrategy};
pub use graph::{Graph, GraphError, SeekerPartition};
pub use payoff::{hider_payoff, payoff_matrix, PayoffMatrix, Utility, UtilitySpec};
pub use rational::Rational;
