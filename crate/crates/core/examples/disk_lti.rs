//! Linearized disk with Box-Jenkins noise: true, plant-only and combined
//! models on one seeded train/test pair.
//!
//!     cargo run -p sysid-core --example disk_lti [seed] [starts]

use std::time::Instant;

use sysid_core::benchmarks::{gen_lti_disk, truth_model, DiskParams, DiskVariant, NoiseSpec};
use sysid_core::io::{render_report, ReportLayout, ScoreCard};
use sysid_core::models::{Model, ModelStructure};
use sysid_core::training::{evaluate, multistart, AdamConfig, TrainConfig};

fn main() -> sysid_core::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed"));
    let starts: u64 = args.next().map_or(10, |s| s.parse().expect("starts"));
    let (d, noise) = (DiskParams::default(), NoiseSpec::default());
    let train = gen_lti_disk(&d, &noise, 2000, 2 * seed)?;
    let test = gen_lti_disk(&d, &noise, 2000, 2 * seed + 1)?;
    let cfg = TrainConfig {
        adam: AdamConfig { iters: 0, ..Default::default() },
        seeds: (0..starts).collect(),
        ..Default::default()
    };

    let (tm, tp) = truth_model(&d, &noise, DiskVariant::Lti)?;
    let (etr, ete) = (evaluate(&tm, &tp, &train.data, &cfg)?, evaluate(&tm, &tp, &test.data, &cfg)?);
    let mut cards = vec![ScoreCard {
        label: "true".into(),
        nx: 2,
        nz: 1,
        sched: "-".into(),
        bfr_sim_train: Some(etr.bfr_sim),
        bfr_sim_test: Some(ete.bfr_sim),
        bfr_pred_train: Some(etr.bfr_pred),
        bfr_pred_test: Some(ete.bfr_pred),
        var_v: Some(ete.var_v),
        var_e: Some(ete.var_e),
        time_s: None,
    }];
    for (label, nz) in [("plant only", 0), ("combined", 1)] {
        let m = Model::new(ModelStructure::lti(2, nz, 1, 1))?;
        let cfg = TrainConfig { bootstrap: nz > 0, ..cfg.clone() };
        let t = Instant::now();
        let r = multistart(&m, &train.data, &test.data, &cfg)?;
        let rep = &r.best.report;
        cards.push(ScoreCard {
            label: label.into(),
            nx: 2,
            nz,
            sched: "-".into(),
            bfr_sim_train: Some(rep.bfr_sim_train),
            bfr_sim_test: rep.bfr_sim_test,
            bfr_pred_train: Some(rep.bfr_pred_train),
            bfr_pred_test: rep.bfr_pred_test,
            var_v: Some(r.best_test.var_v),
            var_e: Some(r.best_test.var_e),
            time_s: Some(t.elapsed().as_secs_f64()),
        });
        eprintln!("{label}: failures {}, qn iters {}, status {:?}", r.failures, rep.qn_iters, rep.qn_status);
    }
    print!("{}", render_report(&cards, ReportLayout { sched: false, time: true }));
    Ok(())
}
