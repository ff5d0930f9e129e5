//! Estimation: objective, optimizers, initialization and drivers.

mod adam;
mod config;
mod init;
mod l1;
mod lbfgsb;
mod loss;
mod select;
mod train;

pub use adam::{adam_run, AdamResult};
pub use config::{AdamConfig, InitConfig, QnConfig, Selection, TrainConfig};
pub use init::{init_params, zero_noise_output};
pub use l1::SplitL1;
pub use lbfgsb::{qn_run, QnResult, QnStatus, CURV_EPS};
pub use loss::{pem_loss, regularizer, Masked, PemObjective, Regularization};
pub use select::{structure_select, SelectionReport, StateNorm};
pub use train::{
    bootstrap_train, evaluate, group_norms, multistart, reconstruct_initial_state, selection_score,
    state_group_norms, train, BootstrapResult, Evaluation, GroupNorm, MultistartResult, RunSummary,
    TrainReport, TrainResult,
};
