//! Beam-wander tracking: disturbance generation, the PSD/PID/FSM loop,
//! conversion of residual pointing error to slot fades, and the choice of
//! compensation architecture.

mod fade;
mod fsm;
mod loop_sim;
mod pid;
mod strategy;
mod wander;

pub use fade::{residual_to_fade_mask, FadeMask};
pub use fsm::{fsm_step, FsmLimits, FsmParams, FsmState};
pub use loop_sim::{
    closed_loop_sim, closed_loop_sim_precompensated, plant_response, run_loop, seed_sweep,
    ultimate_point, ziegler_nichols, LoopResult, PreCompensation, TrackingLoopConfig,
    UltimatePoint, DIVERGENCE_FACTOR,
};
pub use pid::{pid_step, PidGains, PidOutput, PidState};
pub use strategy::{
    select_strategy, CompensationStrategy, FailedCondition, StrategyDecision,
    RECEIVER_COMPENSATION_MAX_RANGE_M,
};
pub use wander::{generate_wander, TimeSeries2, WanderProcess};
