//! Jammed binary multiple-access channels whose senders modulate with
//! shared classical randomness, EPR pairs or PR boxes.
//!
//! The crate covers the closed-form capacities ([`capacity`]), the
//! modulation resources ([`correlation`]), admissible jammers ([`jamming`]),
//! block simulation ([`sim`]) and coding experiments ([`coding`]).

#![allow(clippy::needless_range_loop)]

pub mod bits;
pub mod capacity;
pub mod coding;
pub mod correlation;
pub mod error;
pub mod info;
pub mod jamming;
pub mod rng;
pub mod sim;
pub mod verify;

pub use bits::BitString;
pub use capacity::{
    avcei_capacity, compound_capacity, effective_noise_level, rate_endpoint, separation_sweep,
    symmetrizability_cost, CapacityQuery, CompoundClassQuery, ModulationClass, SweepRow, EPR_OMEGA,
};
pub use coding::{
    analytic_majority_success, estimate_success, exact_success, repetition_code, Code,
    SuccessEstimate,
};
pub use correlation::{
    deterministic_correlation, effective_flip_prob, epr_correlation, is_nonsignalling,
    local_correlation, pr_box, BoxStrength, Correlation, CorrelationKind, DeterministicModulator,
    ExtremalMap, LocalCorrelationSpec, QuantumModulation,
};
pub use error::{Error, Result};
pub use info::{binary_entropy, bsc, compose, mutual_information, BinaryChannel, BitDistribution};
pub use jamming::{
    greedy_jammer, typical_jammer, JammerBudget, JammerConfig, JammerKind, JammerStrategy,
    TypicalJammerParams,
};
pub use sim::{transmit_block, BlockTrace};
