//! Relative net utility evaluation.
//!
//! Exact models of the doubling coin-toss game and of additive-utility
//! plans, with reference-point evaluation, prefix truncation, resource
//! tie-breaking and a seeded Monte Carlo harness.

pub mod cli;
pub mod error;
pub mod evaluation;
pub mod game;
pub mod plans;
pub mod rational;
pub mod simulation;

pub use error::{Error, Result};
pub use evaluation::{
    break_tie, incremental_evaluate, incremental_evaluate_with, net_utility_vs_reference,
    relative_net_utility_table, Alternative, Evaluation, EvaluationOptions, EvaluationTrace,
    ReferencePoint, TerminationCriterion,
};
pub use game::{
    is_break_even, payoff_table, position, transformed_expected_utility, GamePosition, GameSpec,
    UtilityTransform,
};
pub use plans::{
    net_utility_of_action, prefer_by_net_utility, prefer_by_outcome, truncate, truncate_oracle,
    Plan, PlanAction, Polarity, Preference, StateUtility, TruncationResult,
};
pub use rational::Rational;
pub use simulation::{
    divergence_profile, simulate_position_frequency, simulate_truncated_game, SimulationReport,
};
