use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use super::train::{state_group_norms, train, train_weighted, TrainResult};
use crate::error::{Error, Result};
use crate::io::Dataset;
use crate::models::{prune, Model, StateRef};

/// Group norms at or below this count as zero.
const NORM_FLOOR: f64 = 1e-8;

/// Norm of one state group before pruning.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateNorm {
    pub state: String,
    pub before: f64,
    pub kept: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionReport {
    pub norms: Vec<StateNorm>,
    pub threshold: f64,
    /// Fit of the full structure with the group penalty.
    pub sparse: TrainResult,
    /// Pruned structure, re-estimated without the group penalty.
    pub model: Model,
    pub result: TrainResult,
}

/// Group-lasso structure selection: penalized fit (optionally reweighted
/// with the inverse group norms), pruning of groups below `eps_g`, and a
/// final unpenalized re-estimation of the reduced structure.
pub fn structure_select(model: &Model, data: &Dataset, cfg: &TrainConfig, seed: u64) -> Result<SelectionReport> {
    cfg.validate()?;
    let refs: Vec<StateRef> = model.layout.state_groups().into_iter().map(|(s, _)| s).collect();
    if cfg.tau_g == 0.0 {
        let r = train(model, data, cfg, None, seed)?;
        let norms = state_group_norms(model, &r.params)
            .into_iter()
            .zip(&refs)
            .map(|(n, s)| StateNorm {
                state: s.to_string(),
                before: n,
                kept: true,
            })
            .collect();
        return Ok(SelectionReport {
            norms,
            threshold: 0.0,
            sparse: r.clone(),
            model: model.clone(),
            result: r,
        });
    }

    let mut sparse = train_weighted(model, data, cfg, None, None, seed)?;
    for _ in 0..cfg.reweight_passes {
        let w: Vec<f64> = state_group_norms(model, &sparse.params)
            .into_iter()
            .map(|n| 1.0 / n.max(NORM_FLOOR))
            .collect();
        sparse = train_weighted(model, data, cfg, Some(&sparse.params), Some(&w), seed)?;
    }
    let norms = state_group_norms(model, &sparse.params);
    let max = norms.iter().cloned().fold(0.0, f64::max);
    let threshold = cfg.eps_g.unwrap_or(1e-3 * max);
    if max <= NORM_FLOOR {
        return Err(Error::AllGroupsPruned { threshold });
    }
    let keep: Vec<bool> = norms.iter().map(|&n| n >= threshold).collect();
    let keep_x: Vec<usize> = refs
        .iter()
        .zip(&keep)
        .filter_map(|(s, &k)| match s {
            StateRef::X(i) if k => Some(*i),
            _ => None,
        })
        .collect();
    let keep_z: Vec<usize> = refs
        .iter()
        .zip(&keep)
        .filter_map(|(s, &k)| match s {
            StateRef::Z(i) if k => Some(*i),
            _ => None,
        })
        .collect();
    if keep_x.is_empty() {
        return Err(Error::AllGroupsPruned { threshold });
    }
    let (ms, p0) = prune(&model.structure, &sparse.params, &keep_x, &keep_z)?;
    let reduced = Model::new(ms)?;
    let refit = TrainConfig {
        tau_g: 0.0,
        ..cfg.clone()
    };
    let result = train(&reduced, data, &refit, Some(&p0), seed)?;
    Ok(SelectionReport {
        norms: norms
            .into_iter()
            .zip(&refs)
            .zip(keep)
            .map(|((n, s), kept)| StateNorm {
                state: s.to_string(),
                before: n,
                kept,
            })
            .collect(),
        threshold,
        sparse,
        model: reduced,
        result,
    })
}
