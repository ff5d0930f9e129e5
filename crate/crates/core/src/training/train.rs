use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adam::adam_run;
use super::config::{Selection, TrainConfig};
use super::init::{init_params, zero_noise_output};
use super::l1::SplitL1;
use super::lbfgsb::{qn_run, QnStatus};
use super::loss::{pem_loss, Masked, PemObjective, Regularization};
use crate::error::{Error, Result};
use crate::io::Dataset;
use crate::metrics::{bfr, sample_variance};
use crate::models::{transfer_blocks, Model, Noise, Plant};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupNorm {
    pub name: String,
    pub norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub seed: u64,
    /// Final regularized objective.
    pub loss: f64,
    /// Final mean squared prediction residual on the training data.
    pub pem_loss: f64,
    pub initial_pem_loss: f64,
    pub bfr_sim_train: f64,
    pub bfr_pred_train: f64,
    pub bfr_sim_test: Option<f64>,
    pub bfr_pred_test: Option<f64>,
    pub adam_iters: usize,
    pub qn_iters: usize,
    pub qn_evals: usize,
    pub qn_status: QnStatus,
    pub converged: bool,
    pub wall_time_s: f64,
    pub group_norms: Vec<GroupNorm>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainResult {
    /// `theta` followed by `w0`.
    pub params: Vec<f64>,
    pub report: TrainReport,
}

/// Scores of a trained model on one dataset, with the initial state
/// reconstructed from the data prefix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub bfr_sim: f64,
    pub bfr_pred: f64,
    pub var_v: f64,
    pub var_e: f64,
    pub w0: Vec<f64>,
}

fn regularization(cfg: &TrainConfig, model: &Model, weights: Option<&[f64]>) -> Regularization {
    let groups = if cfg.tau_g > 0.0 {
        model
            .layout
            .state_groups()
            .into_iter()
            .enumerate()
            .map(|(i, (_, idx))| (idx, weights.map_or(1.0, |w| w[i])))
            .collect()
    } else {
        Vec::new()
    };
    Regularization {
        rho_theta: cfg.rho_theta,
        tau: 0.0,
        rho_w: cfg.rho_w,
        tau_g: cfg.tau_g,
        groups,
    }
}

/// l2 norms of the named parameter groups and of each per-state group.
pub fn group_norms(model: &Model, params: &[f64]) -> Vec<GroupNorm> {
    let norm = |idx: &mut dyn Iterator<Item = usize>| idx.map(|i| params[i] * params[i]).sum::<f64>().sqrt();
    let mut out: Vec<GroupNorm> = model
        .layout
        .groups()
        .iter()
        .filter(|g| g.len > 0)
        .map(|g| GroupNorm {
            name: g.name.clone(),
            norm: norm(&mut g.range()),
        })
        .collect();
    for (s, idx) in model.layout.state_groups() {
        out.push(GroupNorm {
            name: s.to_string(),
            norm: norm(&mut idx.into_iter()),
        });
    }
    out
}

/// Norms of the per-state groups only, in layout order.
pub fn state_group_norms(model: &Model, params: &[f64]) -> Vec<f64> {
    model
        .layout
        .state_groups()
        .into_iter()
        .map(|(_, idx)| idx.iter().map(|&i| params[i] * params[i]).sum::<f64>().sqrt())
        .collect()
}

/// Adam warm start followed by bound-constrained quasi-Newton on
/// `V(theta, w0) + R(theta, w0)`.
pub fn train(model: &Model, data: &Dataset, cfg: &TrainConfig, init: Option<&[f64]>, seed: u64) -> Result<TrainResult> {
    train_weighted(model, data, cfg, init, None, seed)
}

pub(crate) fn train_weighted(
    model: &Model,
    data: &Dataset,
    cfg: &TrainConfig,
    init: Option<&[f64]>,
    group_weights: Option<&[f64]>,
    seed: u64,
) -> Result<TrainResult> {
    cfg.validate()?;
    model.check_data(data)?;
    let start = Instant::now();
    let p0 = match init {
        Some(p) => {
            if p.len() != model.n_params() {
                return Err(Error::dims("initial parameters", model.n_params(), p.len()));
            }
            p.to_vec()
        }
        None => init_params(model, &cfg.init, &mut ChaCha20Rng::seed_from_u64(seed)),
    };
    let initial_pem_loss = pem_loss(model, &p0, data).unwrap_or(f64::NAN);
    let obj = PemObjective::new(model, data, regularization(cfg, model, group_weights));

    let (params, loss, qn) = if cfg.tau > 0.0 {
        let split = SplitL1::new(&obj, model.n_theta(), cfg.tau);
        let bounds = split.bounds();
        let q = adam_run(&split, &split.split(&p0), &cfg.adam, Some(&bounds))?.p;
        let r = qn_run(&split, &q, Some(&bounds), &cfg.qn)?;
        (split.merge(&r.p), r.f, r)
    } else {
        let q = adam_run(&obj, &p0, &cfg.adam, None)?.p;
        let r = qn_run(&obj, &q, None, &cfg.qn)?;
        (r.p.clone(), r.f, r)
    };

    let roll = model.predictor_rollout(&params, data)?;
    let pem = roll.e_pred.iter().flatten().map(|e| e * e).sum::<f64>() / data.len() as f64;
    let report = TrainReport {
        seed,
        loss,
        pem_loss: pem,
        initial_pem_loss,
        bfr_sim_train: bfr(&data.y, &roll.y_sim)?,
        bfr_pred_train: bfr(&data.y, &roll.y_pred)?,
        bfr_sim_test: None,
        bfr_pred_test: None,
        adam_iters: cfg.adam.iters,
        qn_iters: qn.iters,
        qn_evals: qn.evals,
        qn_status: qn.status,
        converged: qn.status.converged(),
        wall_time_s: start.elapsed().as_secs_f64(),
        group_norms: group_norms(model, &params),
    };
    Ok(TrainResult { params, report })
}

/// Minimize `sum_{k<len} |e_pred_k|^2 + (rho_w/2)|w0|^2` over `w0` with
/// `theta` frozen, starting from `w0 = 0`.
pub fn reconstruct_initial_state(
    model: &Model,
    params: &[f64],
    data: &Dataset,
    len: usize,
    rho_w: f64,
    qn: &super::config::QnConfig,
) -> Result<Vec<f64>> {
    if len == 0 {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    if params.len() != model.n_params() {
        return Err(Error::dims("model parameters", model.n_params(), params.len()));
    }
    let len = len.min(data.len());
    // the objective averages over `len`; scaling the penalty keeps the minimizer of the sum
    let reg = Regularization {
        rho_w: rho_w / len as f64,
        ..Default::default()
    };
    let mut obj = PemObjective::new(model, data, reg);
    obj.len = len;
    let nt = model.n_theta();
    let mut base = params.to_vec();
    base[nt..].iter_mut().for_each(|v| *v = 0.0);
    let sub = Masked {
        inner: &obj,
        base,
        free: (nt..model.n_params()).collect(),
    };
    let r = qn_run(&sub, &vec![0.0; model.layout.n_w0()], None, qn)?;
    Ok(r.p)
}

/// Score a model on fresh data after reconstructing its initial state.
pub fn evaluate(model: &Model, params: &[f64], data: &Dataset, cfg: &TrainConfig) -> Result<Evaluation> {
    let w0 = reconstruct_initial_state(model, params, data, cfg.burn_in_for(data.len()), cfg.rho_w, &cfg.qn)?;
    let mut p = params.to_vec();
    p[model.n_theta()..].copy_from_slice(&w0);
    let roll = model.predictor_rollout(&p, data)?;
    let v: Vec<f64> = roll.v_hat.iter().flatten().copied().collect();
    let e: Vec<f64> = roll.e_pred.iter().flatten().copied().collect();
    Ok(Evaluation {
        bfr_sim: bfr(&data.y, &roll.y_sim)?,
        bfr_pred: bfr(&data.y, &roll.y_pred)?,
        var_v: sample_variance(&v)?,
        var_e: sample_variance(&e)?,
        w0,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BootstrapResult {
    /// LTI plant fit that seeds an LPV plant, when enabled.
    pub lti: Option<TrainResult>,
    /// Plant-only fit (structure with `nz = 0`).
    pub phase1: TrainResult,
    /// Combined fit started from the plant-only parameters.
    pub result: TrainResult,
    /// Prediction loss of the combined model at its starting point.
    pub phase2_initial_pem_loss: f64,
}

/// Random draw for `model` with the blocks of a finished fit copied in.
fn warm_start(model: &Model, from: &Model, src: &[f64], cfg: &TrainConfig, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut p0 = init_params(model, &cfg.init, &mut rng);
    transfer_blocks(&from.layout, src, &model.layout, &mut p0);
    p0
}

/// Zero every scheduling-dependent plant coefficient, leaving `A0, B0, C0`.
fn zero_scheduled_plant(model: &Model, p: &mut [f64]) {
    for b in model.layout.blocks() {
        let scheduled = ["A", "B", "C"].iter().any(|m| {
            b.name.strip_prefix(m).is_some_and(|i| i.parse::<usize>().is_ok_and(|i| i > 0))
        });
        if scheduled {
            p[b.range()].iter_mut().for_each(|v| *v = 0.0);
        }
    }
}

/// Plant-only fit first, then the combined fit from the plant parameters
/// with the noise output zeroed. LPV plants can be preceded by an LTI fit
/// (`bootstrap_lti`). Only the first stage runs the Adam warm start.
pub fn bootstrap_train(model: &Model, data: &Dataset, cfg: &TrainConfig, seed: u64) -> Result<BootstrapResult> {
    let mut warm = cfg.clone();
    warm.adam.iters = 0;
    let plant = Model::new(model.structure.plant_only())?;
    let lpv = matches!(model.structure.plant, Plant::LpvExternal { .. } | Plant::LpvSelf { .. });
    let (lti, phase1) = if lpv && cfg.bootstrap_lti {
        let mut s = plant.structure.clone();
        s.plant = Plant::Lti;
        s.noise = Noise::Lti;
        let lti_model = Model::new(s)?;
        let lti = train(&lti_model, data, cfg, None, seed)?;
        let mut p0 = warm_start(&plant, &lti_model, &lti.params, cfg, seed);
        zero_scheduled_plant(&plant, &mut p0);
        let mut phase1 = train(&plant, data, &warm, Some(&p0), seed)?;
        phase1.report.wall_time_s += lti.report.wall_time_s;
        (Some(lti), phase1)
    } else {
        (None, train(&plant, data, cfg, None, seed)?)
    };
    if model.structure.nz == 0 {
        return Ok(BootstrapResult {
            lti,
            phase2_initial_pem_loss: phase1.report.pem_loss,
            result: phase1.clone(),
            phase1,
        });
    }
    let mut p0 = warm_start(model, &plant, &phase1.params, cfg, seed);
    zero_noise_output(model, &mut p0);
    let phase2_initial_pem_loss = pem_loss(model, &p0, data)?;
    let mut result = train(model, data, &warm, Some(&p0), seed)?;
    result.report.wall_time_s += phase1.report.wall_time_s;
    Ok(BootstrapResult {
        lti,
        phase1,
        result,
        phase2_initial_pem_loss,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    /// Selection score, `None` when the run failed.
    pub score: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultistartResult {
    pub best: TrainResult,
    pub best_test: Evaluation,
    pub runs: Vec<RunSummary>,
    pub failures: usize,
}

/// Whether prediction (noise model present) or simulation decides.
pub fn selection_score(model: &Model, e: &Evaluation) -> f64 {
    if model.structure.nz > 0 {
        e.bfr_pred
    } else {
        e.bfr_sim
    }
}

/// Independent trainings, one per seed; the run scoring best on the
/// selection data wins. Failed runs are recorded and skipped.
pub fn multistart(model: &Model, train_data: &Dataset, test_data: &Dataset, cfg: &TrainConfig) -> Result<MultistartResult> {
    cfg.validate()?;
    let (fit_data, select_data) = match cfg.selection {
        Selection::Test => (train_data.clone(), None),
        Selection::Validation { fraction } => {
            let n = train_data.len();
            let cut = n - ((n as f64 * fraction).round() as usize).clamp(2, n - 2);
            (train_data.slice(0..cut), Some(train_data.slice(cut..n)))
        }
    };
    let one = |seed: u64| -> Result<(TrainResult, Evaluation, f64)> {
        let mut r = if cfg.bootstrap {
            bootstrap_train(model, &fit_data, cfg, seed)?.result
        } else {
            train(model, &fit_data, cfg, None, seed)?
        };
        let test = evaluate(model, &r.params, test_data, cfg)?;
        let score = match &select_data {
            None => selection_score(model, &test),
            Some(v) => selection_score(model, &evaluate(model, &r.params, v, cfg)?),
        };
        r.report.bfr_sim_test = Some(test.bfr_sim);
        r.report.bfr_pred_test = Some(test.bfr_pred);
        Ok((r, test, score))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let outcomes: Vec<Result<(TrainResult, Evaluation, f64)>> =
        pool.install(|| cfg.seeds.par_iter().map(|&s| one(s)).collect());

    let mut runs = Vec::with_capacity(outcomes.len());
    let mut best: Option<(TrainResult, Evaluation, f64)> = None;
    for (seed, o) in cfg.seeds.iter().zip(outcomes) {
        match o {
            Ok((r, e, score)) => {
                runs.push(RunSummary {
                    seed: *seed,
                    score: Some(score),
                    error: None,
                });
                if best.as_ref().is_none_or(|b| score > b.2) {
                    best = Some((r, e, score));
                }
            }
            Err(err) => runs.push(RunSummary {
                seed: *seed,
                score: None,
                error: Some(err.to_string()),
            }),
        }
    }
    let failures = runs.iter().filter(|r| r.error.is_some()).count();
    let (best, best_test, _) = best.ok_or(Error::AllRunsFailed(runs.len()))?;
    Ok(MultistartResult {
        best,
        best_test,
        runs,
        failures,
    })
}
