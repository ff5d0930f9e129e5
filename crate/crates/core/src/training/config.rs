use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nets::InitScheme;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamConfig {
    /// 0 skips the warm start.
    pub iters: usize,
    pub eta: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            iters: 1000,
            eta: 1e-3,
            beta1: 0.9,
            beta2: 0.99,
            eps: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QnConfig {
    pub max_iters: usize,
    /// Number of stored curvature pairs.
    pub memory: usize,
    /// Stop when the infinity norm of the projected gradient falls below this.
    pub grad_tol: f64,
    /// Stop when `(f_prev - f) <= step_tol * max(|f_prev|, |f|, 1)`; `0` disables the test.
    pub step_tol: f64,
}

impl Default for QnConfig {
    fn default() -> Self {
        QnConfig {
            max_iters: 10_000,
            memory: 10,
            grad_tol: 1e-8,
            step_tol: 1e-12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitConfig {
    /// Net weights; biases always start at zero.
    pub scheme: InitScheme,
    /// Model matrices are drawn from `N(0, (matrix_scale / sqrt(ncols))^2)`.
    pub matrix_scale: f64,
}

impl Default for InitConfig {
    fn default() -> Self {
        InitConfig {
            scheme: InitScheme::default(),
            matrix_scale: 0.5,
        }
    }
}

/// Which dataset decides the winner among multistart runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum Selection {
    /// The test set, as in the reference experiments.
    Test,
    /// The last `fraction` of the training data, held out from training.
    Validation { fraction: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// l2 weight on theta.
    pub rho_theta: f64,
    /// l1 weight on theta, handled by splitting `theta = theta_plus - theta_minus`.
    pub tau: f64,
    /// l2 weight on the initial state.
    pub rho_w: f64,
    /// Group-lasso weight on the per-state groups.
    pub tau_g: f64,
    /// Pruning threshold; `None` means `1e-3 * (largest group norm)`.
    pub eps_g: Option<f64>,
    /// Extra group-lasso passes weighted by the inverse previous group norms.
    pub reweight_passes: usize,
    pub adam: AdamConfig,
    pub qn: QnConfig,
    pub init: InitConfig,
    /// Train the plant alone first and start the combined fit from it.
    pub bootstrap: bool,
    /// With `bootstrap` and an LPV plant, fit an LTI plant first and start
    /// the LPV plant from its matrices.
    pub bootstrap_lti: bool,
    pub seeds: Vec<u64>,
    /// Worker threads for multistart; 0 means one per core.
    pub threads: usize,
    pub selection: Selection,
    /// Prefix used to reconstruct the initial state on fresh data;
    /// `None` means `min(100, N/10)`.
    pub burn_in: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            rho_theta: 2e-4,
            tau: 0.0,
            rho_w: 2e-8,
            tau_g: 0.0,
            eps_g: None,
            reweight_passes: 0,
            adam: AdamConfig::default(),
            qn: QnConfig::default(),
            init: InitConfig::default(),
            bootstrap: false,
            bootstrap_lti: true,
            seeds: vec![0],
            threads: 1,
            selection: Selection::Test,
            burn_in: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let weights = [
            ("rho_theta", self.rho_theta),
            ("tau", self.tau),
            ("rho_w", self.rho_w),
            ("tau_g", self.tau_g),
        ];
        for (name, v) in weights {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be a finite value >= 0, got {v}")));
            }
        }
        if let Some(e) = self.eps_g {
            if !(e > 0.0) {
                return Err(Error::Config(format!("eps_g must be > 0, got {e}")));
            }
        }
        let a = &self.adam;
        if !(a.eta > 0.0 && (0.0..1.0).contains(&a.beta1) && (0.0..1.0).contains(&a.beta2) && a.eps > 0.0) {
            return Err(Error::Config("adam: need eta > 0, beta1/beta2 in [0, 1), eps > 0".into()));
        }
        if self.qn.memory == 0 {
            return Err(Error::Config("qn.memory must be >= 1".into()));
        }
        if !(self.qn.grad_tol >= 0.0 && self.qn.step_tol >= 0.0) {
            return Err(Error::Config("qn tolerances must be >= 0".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        let mut s = self.seeds.clone();
        s.sort_unstable();
        s.dedup();
        if s.len() != self.seeds.len() {
            return Err(Error::Config("seeds must be distinct".into()));
        }
        if let Selection::Validation { fraction } = self.selection {
            if !(fraction > 0.0 && fraction < 1.0) {
                return Err(Error::Config("validation fraction must lie in (0, 1)".into()));
            }
        }
        if self.burn_in == Some(0) {
            return Err(Error::Config("burn_in must be >= 1".into()));
        }
        Ok(())
    }

    pub fn burn_in_for(&self, n: usize) -> usize {
        self.burn_in.unwrap_or((n / 10).min(100)).clamp(1, n.max(1))
    }
}
