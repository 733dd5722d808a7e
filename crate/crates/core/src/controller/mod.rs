//! Closed-loop controller: instructions, broadcast link, activation accounting.

mod identity;
mod link;
mod predict;
mod scaling;
mod sim;

pub use identity::{ActionId, EpochWindow, IdentityMap, Instruction};
pub use link::{crossover_from_link, induced_voltage, normal_tail, BroadcastModel, BroadcastSpec, ChannelSpec};
pub use predict::{
    predict_rates, stationary_edge_occupancy, AcceptanceTable, OccupancyProfile, PredictedRates, PredictionInputs,
};
pub use scaling::{addressing_bits, largest_prime_of_width, scaling_report, ScalingRequest, ScalingRow, ScalingTarget};
pub use sim::{
    run_epoch, write_metrics_csv, EpochMetrics, PredictionCheck, RunConfig, RunMetrics, RunOutput, Simulation,
    SimulationState, METRICS_CSV_HEADER,
};

use crate::error::Result;

/// Looks up the identity of an instruction.
pub fn encode_instruction(map: &IdentityMap, instr: &Instruction) -> Result<crate::coding::Identity> {
    map.encode_instruction(instr)
}
