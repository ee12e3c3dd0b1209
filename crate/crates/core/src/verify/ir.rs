use serde::Serialize;

use crate::engine::{participation_battery, BatteryRow};
use crate::error::Result;
use crate::model::{AgentId, Instance, ParticipantSet, TOL};
use crate::protocol::ProtocolConfig;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IrReport {
    pub passed: bool,
    pub focal: AgentId,
    pub subsets: usize,
    pub min_margin: f64,
    pub worst_subset: ParticipantSet,
    /// Margin when every other agent participates.
    pub full_margin: f64,
    #[serde(skip)]
    pub rows: Vec<BatteryRow>,
}

/// Joining any coalition of accepting agents must not leave `focal` worse
/// off than staying out while they run the protocol.
pub fn check_ir(instance: &Instance, focal: AgentId, config: &ProtocolConfig, budget: u64) -> Result<IrReport> {
    let rows = participation_battery(instance, focal, config, budget)?;
    let worst = rows
        .iter()
        .min_by(|a, b| a.margin().total_cmp(&b.margin()))
        .expect("the empty coalition is always present");
    let full = rows.last().expect("the full coalition is always present");
    Ok(IrReport {
        passed: worst.margin() >= -TOL,
        focal,
        subsets: rows.len(),
        min_margin: worst.margin(),
        worst_subset: worst.subset.clone(),
        full_margin: full.margin(),
        rows,
    })
}
