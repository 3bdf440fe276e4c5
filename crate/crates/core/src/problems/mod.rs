//! Exemplar problems and their synthetic data.

mod builders;
mod generators;

pub use builders::{
    build_group_logistic, build_latent_lrr, build_nmc, build_parallel_bp, selection_matrix,
};
pub use generators::{
    gen_group_logistic_data, gen_latent_lrr_data, gen_nmc_data, overlapping_groups,
    GroupLogisticData, GroupLogisticSpec, LatentLrrSpec, NmcData, NmcSpec,
};

use crate::block::Block;
use crate::error::{check_shape, Result};

/// Relative nonnegative feasibility `‖min(X̂, 0)‖ / ‖X₀‖`. A zero truth is
/// replaced by `max(‖X₀‖, 1)`.
pub fn fa_metric(x_hat: &Block, x0: &Block) -> Result<f64> {
    check_shape("fa metric", x0.shape(), x_hat.shape())?;
    let negative = x_hat
        .as_slice()
        .iter()
        .map(|v| v.min(0.0).powi(2))
        .sum::<f64>()
        .sqrt();
    let norm = x0.norm();
    Ok(negative / if norm > 0.0 { norm } else { 1.0 })
}
