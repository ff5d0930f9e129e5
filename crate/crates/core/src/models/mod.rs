//! Plant and inverse-noise model structures, their step maps and rollouts.

mod layout;
mod model;
mod rollout;
mod separation;
mod structure;

pub use layout::{prune, transfer_blocks, Axis, Block, Layout, StateRef};
pub use model::{sinc, Model};
pub use rollout::{PredStep, RolloutResult};
pub use separation::{enforce_separation, separate_system, simulate_innovation_form, SeparatedSystem, SeparatedTrajectory};
pub use structure::{Family, MatrixFn, ModelStructure, NetShape, Noise, OutputMap, Plant, PsiInput, PsiMap};
