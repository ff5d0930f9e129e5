use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sysid_core::config::ExperimentConfig;
use sysid_core::io::{
    load_model, read_dataset, render_report, save_model, write_atomic, write_dataset, write_json, write_psd,
    write_scorecards, write_truth, Dataset, ReportLayout, ScoreCard,
};
use sysid_core::metrics::periodogram;
use sysid_core::models::Model;
use sysid_core::training::{
    evaluate, multistart, state_group_norms, structure_select, Evaluation, RunSummary, StateNorm, TrainConfig,
    TrainReport,
};

use crate::seeds::parse_seeds;

/// Failure tagged with the stage that produced it.
#[derive(Debug)]
pub struct StageError {
    stage: &'static str,
    msg: String,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.stage, self.msg)
    }
}

type Result<T> = std::result::Result<T, StageError>;

trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T, E: fmt::Display> Stage<T> for std::result::Result<T, E> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| StageError {
            stage,
            msg: e.to_string(),
        })
    }
}

fn resolve(out: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        out.join(p)
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::load(path).stage("config")
}

fn save_config(cfg: &ExperimentConfig, dir: &Path) -> Result<()> {
    let text = cfg.to_toml_string().stage("config")?;
    write_atomic(&dir.join("config.toml"), text.as_bytes()).stage("write")
}

fn read_pair(dir: &Path) -> Result<(Dataset, Dataset)> {
    let train = read_dataset(&dir.join("train.csv")).stage("read data")?;
    let test = read_dataset(&dir.join("test.csv")).stage("read data")?;
    Ok((train, test))
}

pub fn generate(out: &Path, config: &Path, seed: Option<u64>) -> Result<()> {
    let mut cfg = load_config(config)?;
    if let Some(s) = seed {
        cfg.benchmark.seed = s;
    }
    let (train, test) = cfg.benchmark.generate_pair().stage("generate")?;
    let dir = resolve(out, &cfg.paths.data_dir);
    for (name, g) in [("train", &train), ("test", &test)] {
        write_dataset(&g.data, &dir.join(format!("{name}.csv"))).stage("write")?;
        write_truth(&g.truth, &dir.join(format!("{name}_truth.csv"))).stage("write")?;
    }
    let (truth, theta) = cfg.benchmark.truth().stage("generate")?;
    save_model(&dir.join("truth_model.json"), &truth, &theta).stage("write")?;
    save_config(&cfg, &dir)?;
    println!(
        "wrote {} ({} + {} samples, SNR train {:.2} dB, test {:.2} dB)",
        dir.display(),
        train.data.len(),
        test.data.len(),
        train.snr_db().stage("generate")?,
        test.snr_db().stage("generate")?
    );
    Ok(())
}

pub struct TrainOverrides {
    pub seeds: Option<String>,
    pub multistart: Option<usize>,
    pub plant_only: bool,
    pub threads: Option<usize>,
}

fn apply_overrides(cfg: &mut ExperimentConfig, o: &TrainOverrides) -> Result<()> {
    let seeds = o.seeds.as_deref().map(parse_seeds).transpose().stage("arguments")?;
    match (seeds, o.multistart) {
        (Some(s), Some(n)) if s.len() != n => {
            return Err(StageError {
                stage: "arguments",
                msg: format!("--multistart {n} but --seeds lists {} seeds", s.len()),
            })
        }
        (Some(s), _) => cfg.train.seeds = s,
        (None, Some(n)) => cfg.train.seeds = (0..n as u64).collect(),
        (None, None) => {}
    }
    if o.plant_only {
        cfg.model = cfg.model.plant_only();
    }
    if let Some(t) = o.threads {
        cfg.train.threads = t;
    }
    cfg.validate().stage("config")
}

fn card(label: &str, cfg: &ExperimentConfig, model: &Model, train: Option<&Evaluation>, test: &Evaluation) -> ScoreCard {
    ScoreCard {
        label: label.into(),
        nx: model.structure.nx,
        nz: model.structure.nz,
        sched: cfg.sched_label().into(),
        bfr_sim_train: train.map(|e| e.bfr_sim),
        bfr_sim_test: Some(test.bfr_sim),
        bfr_pred_train: train.map(|e| e.bfr_pred),
        bfr_pred_test: Some(test.bfr_pred),
        var_v: Some(test.var_v),
        var_e: Some(test.var_e),
        time_s: None,
    }
}

#[derive(Serialize)]
struct TrainRunReport<'a> {
    best: &'a TrainReport,
    runs: &'a [RunSummary],
    failures: usize,
}

pub fn train(out: &Path, config: &Path, data: Option<&Path>, o: &TrainOverrides) -> Result<()> {
    let mut cfg = load_config(config)?;
    apply_overrides(&mut cfg, o)?;
    let data_dir = data.map(Path::to_path_buf).unwrap_or_else(|| resolve(out, &cfg.paths.data_dir));
    let (train_data, test_data) = read_pair(&data_dir)?;
    let model = Model::new(cfg.model.clone()).stage("model")?;
    let ms = multistart(&model, &train_data, &test_data, &cfg.train).stage("train")?;
    let run = resolve(out, &cfg.paths.run_dir);
    save_model(&run.join("model.json"), &model, &ms.best.params).stage("write")?;
    let report = TrainRunReport {
        best: &ms.best.report,
        runs: &ms.runs,
        failures: ms.failures,
    };
    write_json(&run.join("train_report.json"), &report).stage("write")?;
    let train_eval = evaluate(&model, &ms.best.params, &train_data, &cfg.train).stage("evaluate")?;
    let mut sc = card(&cfg.label, &cfg, &model, Some(&train_eval), &ms.best_test);
    sc.time_s = Some(ms.best.report.wall_time_s);
    write_scorecards(std::slice::from_ref(&sc), &run.join("scorecard.csv")).stage("write")?;
    let table = render_report(std::slice::from_ref(&sc), ReportLayout::default());
    write_atomic(&run.join("report.txt"), table.as_bytes()).stage("write")?;
    save_config(&cfg, &run)?;
    print!("{table}");
    println!(
        "{} runs, {} failed; best seed {} -> {}",
        ms.runs.len(),
        ms.failures,
        ms.best.report.seed,
        run.display()
    );
    Ok(())
}

pub fn eval(
    out: &Path,
    model_path: &Path,
    data: &Path,
    train_data: Option<&Path>,
    config: Option<&Path>,
    label: &str,
) -> Result<()> {
    let (model, params) = load_model(model_path).stage("load model")?;
    let cfg = match config {
        Some(c) => load_config(c)?,
        None => ExperimentConfig {
            label: label.into(),
            benchmark: Default::default(),
            model: model.structure.clone(),
            train: TrainConfig::default(),
            paths: Default::default(),
        },
    };
    let ds = read_dataset(data).stage("read data")?;
    let test = evaluate(&model, &params, &ds, &cfg.train).stage("evaluate")?;
    let train = match train_data {
        Some(p) => {
            let d = read_dataset(p).stage("read data")?;
            Some(evaluate(&model, &params, &d, &cfg.train).stage("evaluate")?)
        }
        None => None,
    };
    let sc = card(label, &cfg, &model, train.as_ref(), &test);
    let dir = out.join(format!("eval-{label}"));
    write_json(&dir.join("scorecard.json"), &sc).stage("write")?;
    write_json(&dir.join("w0.json"), &test.w0).stage("write")?;

    let mut p = params.clone();
    p[model.n_theta()..].copy_from_slice(&test.w0);
    let roll = model.predictor_rollout(&p, &ds).stage("evaluate")?;
    let seg = 256.min(ds.len());
    for (name, series) in [("v", &roll.v_hat), ("e", &roll.e_pred)] {
        let x: Vec<f64> = series.iter().map(|s| s[0]).collect();
        let psd = periodogram(&x, ds.ts, seg, seg / 2).stage("psd")?;
        write_psd(&psd, &dir.join(format!("psd_{name}.csv"))).stage("write")?;
    }
    let table = render_report(std::slice::from_ref(&sc), ReportLayout { sched: true, time: false });
    write_atomic(&dir.join("report.txt"), table.as_bytes()).stage("write")?;
    save_config(&cfg, &dir)?;
    print!("{table}");
    Ok(())
}

#[derive(Serialize)]
struct SelectReport<'a> {
    threshold: f64,
    norms: &'a [StateNorm],
    after: Vec<f64>,
    kept_nx: usize,
    kept_nz: usize,
    sparse: &'a TrainReport,
    result: &'a TrainReport,
}

fn norm_table(norms: &[StateNorm], after: &[f64], threshold: f64) -> String {
    let mut s = format!("threshold {threshold:.3e}\n{:>6} | {:>12} | {:>12} | kept\n", "state", "before", "after");
    let mut kept = after.iter();
    for n in norms {
        let a = if n.kept { kept.next().map(|v| format!("{v:.6e}")) } else { None };
        s += &format!(
            "{:>6} | {:>12.6e} | {:>12} | {}\n",
            n.state,
            n.before,
            a.unwrap_or_else(|| "-".into()),
            if n.kept { "yes" } else { "no" }
        );
    }
    s
}

pub fn select(out: &Path, config: &Path, data: Option<&Path>, seed: u64, reweight: Option<usize>) -> Result<()> {
    let mut cfg = load_config(config)?;
    if let Some(r) = reweight {
        cfg.train.reweight_passes = r;
    }
    let data_dir = data.map(Path::to_path_buf).unwrap_or_else(|| resolve(out, &cfg.paths.data_dir));
    let (train_data, test_data) = read_pair(&data_dir)?;
    let model = Model::new(cfg.model.clone()).stage("model")?;
    let sel = structure_select(&model, &train_data, &cfg.train, seed).stage("select")?;
    let after = state_group_norms(&sel.model, &sel.result.params);
    let dir = resolve(out, &cfg.paths.run_dir).join("select");
    save_model(&dir.join("model.json"), &sel.model, &sel.result.params).stage("write")?;
    let table = norm_table(&sel.norms, &after, sel.threshold);
    write_atomic(&dir.join("norms.txt"), table.as_bytes()).stage("write")?;
    let test = evaluate(&sel.model, &sel.result.params, &test_data, &cfg.train).stage("evaluate")?;
    let train_eval = evaluate(&sel.model, &sel.result.params, &train_data, &cfg.train).stage("evaluate")?;
    let sc = card(&cfg.label, &cfg, &sel.model, Some(&train_eval), &test);
    write_scorecards(std::slice::from_ref(&sc), &dir.join("scorecard.csv")).stage("write")?;
    let report = SelectReport {
        threshold: sel.threshold,
        norms: &sel.norms,
        after,
        kept_nx: sel.model.structure.nx,
        kept_nz: sel.model.structure.nz,
        sparse: &sel.sparse.report,
        result: &sel.result.report,
    };
    write_json(&dir.join("select_report.json"), &report).stage("write")?;
    save_config(&cfg, &dir)?;
    print!("{table}");
    print!("{}", render_report(std::slice::from_ref(&sc), ReportLayout { sched: true, time: false }));
    Ok(())
}
