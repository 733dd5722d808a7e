use serde::{Deserialize, Serialize};

use crate::coding::Identity;
use crate::error::{Error, Result};
use crate::population::RegionId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ActionId(pub usize);

/// Inclusive epoch range during which an instruction is valid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EpochWindow {
    pub start: u64,
    pub end: u64,
}

impl EpochWindow {
    pub fn contains(&self, epoch: u64) -> bool {
        (self.start..=self.end).contains(&epoch)
    }
}

/// A control instruction: where, what, and when.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Instruction {
    pub region: RegionId,
    pub action: ActionId,
    pub window: EpochWindow,
}

/// Injective map from the instruction vocabulary onto identities `1..=N`.
///
/// Time is cut into consecutive windows of `window_epochs` epochs starting at epoch 0; the
/// vocabulary is every (region, action, window) triple up to the run horizon. Indices are
/// assigned region-fastest, then action, then window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityMap {
    regions: usize,
    actions: Vec<String>,
    window_epochs: u64,
    windows: u64,
}

impl IdentityMap {
    pub fn new(
        regions: usize,
        actions: Vec<String>,
        window_epochs: u64,
        horizon: u64,
        identity_count: u128,
    ) -> Result<Self> {
        if regions == 0 {
            return Err(Error::Configuration("identity map needs at least one region".into()));
        }
        if actions.is_empty() {
            return Err(Error::Configuration("identity map needs at least one action".into()));
        }
        if window_epochs == 0 {
            return Err(Error::Configuration("window length must be at least one epoch".into()));
        }
        let windows = (horizon + 1).div_ceil(window_epochs).max(1);
        let map = Self { regions, actions, window_epochs, windows };
        if map.vocabulary_size() > identity_count {
            return Err(Error::Configuration(format!(
                "vocabulary of {} instructions exceeds {identity_count} identities",
                map.vocabulary_size()
            )));
        }
        Ok(map)
    }

    pub fn vocabulary_size(&self) -> u128 {
        self.regions as u128 * self.actions.len() as u128 * u128::from(self.windows)
    }

    pub fn action_id(&self, name: &str) -> Option<ActionId> {
        self.actions.iter().position(|a| a == name).map(ActionId)
    }

    pub fn action_name(&self, action: ActionId) -> &str {
        &self.actions[action.0]
    }

    pub fn window_for(&self, epoch: u64) -> EpochWindow {
        let slot = epoch / self.window_epochs;
        EpochWindow { start: slot * self.window_epochs, end: (slot + 1) * self.window_epochs - 1 }
    }

    pub fn instruction(&self, region: RegionId, action: ActionId, epoch: u64) -> Instruction {
        Instruction { region, action, window: self.window_for(epoch) }
    }

    pub fn encode_instruction(&self, instr: &Instruction) -> Result<Identity> {
        let unknown = || Error::Mapping(format!("{instr:?}"));
        if instr.region.0 >= self.regions || instr.action.0 >= self.actions.len() {
            return Err(unknown());
        }
        let slot = instr.window.start / self.window_epochs;
        if slot >= self.windows || self.window_for(instr.window.start) != instr.window {
            return Err(unknown());
        }
        let index = (u128::from(slot) * self.actions.len() as u128 + instr.action.0 as u128) * self.regions as u128
            + instr.region.0 as u128;
        Ok(index + 1)
    }

    pub fn decode(&self, identity: Identity) -> Option<Instruction> {
        if identity == 0 || identity > self.vocabulary_size() {
            return None;
        }
        let index = identity - 1;
        let region = (index % self.regions as u128) as usize;
        let rest = index / self.regions as u128;
        let action = (rest % self.actions.len() as u128) as usize;
        let slot = (rest / self.actions.len() as u128) as u64;
        Some(self.instruction(RegionId(region), ActionId(action), slot * self.window_epochs))
    }

    pub fn vocabulary(&self) -> impl Iterator<Item = Instruction> + '_ {
        (1..=self.vocabulary_size()).map(|i| self.decode(i).expect("in range"))
    }
}
