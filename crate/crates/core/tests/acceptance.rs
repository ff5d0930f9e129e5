//! One test per acceptance criterion. Each prints a single
//! `criterion N: PASS|FAIL ...` line before asserting.

mod common;

use std::path::PathBuf;
use std::sync::{Mutex, MutexGuard};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sysid_core::benchmarks::{gen_lti_disk, DiskParams, NoiseKind, NoiseSpec};
use sysid_core::config::{BenchmarkConfig, ExperimentConfig};
use sysid_core::diff::{finite_diff_grad, Bounds, FnObjective, Objective, Scalar, ScalarFn};
use sysid_core::io::Dataset;
use sysid_core::models::{separate_system, simulate_innovation_form, transfer_blocks, Model, ModelStructure};
use sysid_core::training::{
    evaluate, multistart, qn_run, structure_select, train, PemObjective, QnConfig, Regularization, SplitL1,
    TrainConfig,
};

use common::{gauss, max_abs_diff, random_dataset, random_params, random_structure, series, FAMILIES};

/// Timed criteria must not share the CPU with the others.
static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn verdict(n: usize, pass: bool, detail: &str) {
    println!("criterion {n:>2}: {} {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} failed: {detail}");
}

fn config(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ExperimentConfig::load(&path).unwrap()
}

fn run_experiment(cfg: &ExperimentConfig) -> (f64, f64, f64) {
    let t = Instant::now();
    let (train_set, test_set) = cfg.benchmark.generate_pair().unwrap();
    let model = Model::new(cfg.model.clone()).unwrap();
    let ms = multistart(&model, &train_set.data, &test_set.data, &cfg.train).unwrap();
    (ms.best_test.bfr_sim, ms.best_test.bfr_pred, t.elapsed().as_secs_f64())
}

#[test]
fn criterion_01_lti_disk_combined() {
    let _guard = serial();
    let cfg = config("lti_disk_combined.toml");
    assert!(cfg.train.seeds.len() >= 10);
    let (sim, pred, secs) = run_experiment(&cfg);
    let pass = (pred * 100.0 - 72.84).abs() <= 3.0 && (sim * 100.0 - 68.08).abs() <= 3.0 && secs <= 60.0;
    verdict(
        1,
        pass,
        &format!("pred-test {:.2}% (72.84 +- 3), sim-test {:.2}% (68.08 +- 3), {secs:.1} s (<= 60)", pred * 100.0, sim * 100.0),
    );
}

#[test]
fn criterion_02_true_baseline() {
    let _guard = serial();
    let (mut sim, mut pred) = (0.0, 0.0);
    for seed in 0..10 {
        let b = BenchmarkConfig {
            seed,
            ..BenchmarkConfig::default()
        };
        let (_, test) = b.generate_pair().unwrap();
        let (model, theta) = b.truth().unwrap();
        let e = evaluate(&model, &theta, &test.data, &TrainConfig::default()).unwrap();
        sim += e.bfr_sim / 10.0;
        pred += e.bfr_pred / 10.0;
    }
    let pass = (sim * 100.0 - 68.13).abs() <= 3.0 && (pred * 100.0 - 72.85).abs() <= 3.0;
    verdict(
        2,
        pass,
        &format!("mean over 10 seeds: sim-test {:.2}% (68.13 +- 3), pred-test {:.2}% (72.85 +- 3)", sim * 100.0, pred * 100.0),
    );
}

#[test]
fn criterion_03_self_scheduled_disk() {
    let _guard = serial();
    let cfg = config("self_scheduled_combined.toml");
    assert!(cfg.train.bootstrap && cfg.train.seeds.len() >= 10);
    let (_, pred, secs) = run_experiment(&cfg);
    let pass = pred >= 0.88 && secs <= 600.0;
    verdict(3, pass, &format!("pred-test {:.2}% (>= 88), {secs:.1} s (<= 600)", pred * 100.0));
}

#[test]
fn criterion_04_noise_round_trip() {
    let _guard = serial();
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let s = random_structure(FAMILIES[i % 4], &mut rng);
        let m = Model::new(s.clone()).unwrap();
        let theta = random_params(&m, 0.3, &mut rng);
        let n = 1000;
        let x = series(n, s.nx, 1.0, &mut rng);
        let u = series(n, s.nu, 1.0, &mut rng);
        let p: Vec<Vec<f64>> = (0..n).map(|_| (0..s.np()).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let z0: Vec<f64> = (0..s.nz).map(|_| 0.1 * gauss(&mut rng)).collect();
        let e = series(n, s.ny, 0.1, &mut rng);
        let v = m.noise_forward_rollout(&theta, &z0, &x, &u, &e, &p).unwrap();
        let e2 = m.noise_inverse_rollout(&theta, &z0, &x, &u, &v, &p).unwrap();
        let w = series(n, s.ny, 0.1, &mut rng);
        let ew = m.noise_inverse_rollout(&theta, &z0, &x, &u, &w, &p).unwrap();
        let w2 = m.noise_forward_rollout(&theta, &z0, &x, &u, &ew, &p).unwrap();
        let err = max_abs_diff(&e, &e2).max(max_abs_diff(&w, &w2));
        worst = worst.max(err);
    }
    verdict(4, worst <= 1e-10, &format!("100 models, N = 1000: max abs error {worst:.2e} (<= 1e-10)"));
}

fn mat(rows: usize, cols: usize, sd: f64, rng: &mut ChaCha20Rng) -> Vec<Vec<f64>> {
    series(rows, cols, sd, rng)
}

fn mv(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

#[test]
fn criterion_05_constructive_separation() {
    let _guard = serial();
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let nw = rng.random_range(1..=3);
        let (nu, ny) = (rng.random_range(1..=2), rng.random_range(1..=2));
        let (a, b, k) = (mat(nw, nw, 0.5, &mut rng), mat(nw, nu, 0.5, &mut rng), mat(nw, ny, 0.5, &mut rng));
        let (c, d) = (mat(ny, nw, 1.0, &mut rng), mat(ny, nu, 0.5, &mut rng));
        let f_w = move |w: &[f64], u: &[f64], e: &[f64]| -> Vec<f64> {
            let (aw, bu, ke) = (mv(&a, w), mv(&b, u), mv(&k, e));
            (0..w.len()).map(|i| 0.9 * (aw[i] + bu[i] + ke[i]).tanh() + 0.05 * (w[i] * u[0]).sin()).collect()
        };
        let g_w = move |w: &[f64], u: &[f64]| -> Vec<f64> {
            let s: Vec<f64> = w.iter().map(|v| v.sin() + 0.1 * v * v).collect();
            let (cw, du) = (mv(&c, &s), mv(&d, u));
            cw.iter().zip(&du).map(|(x, y)| x + y).collect()
        };
        let w0: Vec<f64> = (0..nw).map(|_| gauss(&mut rng)).collect();
        let u = series(200, nu, 1.0, &mut rng);
        let e = series(200, ny, 0.2, &mut rng);
        let direct = simulate_innovation_form(&f_w, &g_w, &w0, &u, &e);
        let sep = separate_system(&f_w, &g_w, &w0, ny).simulate(&u, &e);
        worst = worst.max(max_abs_diff(&direct, &sep.y));
    }
    verdict(5, worst <= 1e-12, &format!("20 systems, 200 steps: max output difference {worst:.2e} (<= 1e-12)"));
}

/// Central differences at h, h/2, h/4 with two Richardson levels (sixth
/// order), so a large base step keeps round-off near 1e-14.
fn fd_oracle(obj: &dyn Objective, p: &[f64]) -> Vec<f64> {
    let h = 2e-2;
    let d: Vec<Vec<f64>> = [h, h / 2.0, h / 4.0].iter().map(|&h| finite_diff_grad(obj, p, h).unwrap()).collect();
    (0..p.len())
        .map(|i| {
            let r1 = (4.0 * d[1][i] - d[0][i]) / 3.0;
            let r2 = (4.0 * d[2][i] - d[1][i]) / 3.0;
            (16.0 * r2 - r1) / 15.0
        })
        .collect()
}

#[test]
fn criterion_06_gradients_match_finite_differences() {
    let _guard = serial();
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for fam in FAMILIES {
        for _ in 0..100 {
            let s = random_structure(fam, &mut rng);
            let m = Model::new(s.clone()).unwrap();
            let data = random_dataset(&s, 12, &mut rng);
            let p = random_params(&m, 0.5, &mut rng);
            let reg = Regularization {
                rho_theta: 1e-2,
                rho_w: 1e-2,
                ..Regularization::default()
            };
            let obj = PemObjective::new(&m, &data, reg);
            let (_, g) = obj.value_and_grad(&p).unwrap();
            let fd = fd_oracle(&obj, &p);
            for (a, b) in g.iter().zip(&fd) {
                if a.abs() > 1e-8 {
                    worst = worst.max((a - b).abs() / a.abs());
                    checked += 1;
                }
            }
        }
    }
    verdict(
        6,
        worst <= 1e-5,
        &format!("4 families x 100 points, {checked} coordinates: max relative error {worst:.2e} (<= 1e-5)"),
    );
}

fn spd(n: usize, rng: &mut ChaCha20Rng) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| gauss(rng));
    &m * m.transpose() / n as f64 + DMatrix::identity(n, n)
}

fn quadratic(q: DMatrix<f64>, b: DVector<f64>) -> impl Objective {
    let (q2, b2) = (q.clone(), b.clone());
    FnObjective::new(
        b.len(),
        move |p: &[f64]| {
            let x = DVector::from_column_slice(p);
            0.5 * x.dot(&(&q * &x)) - b.dot(&x)
        },
        move |p: &[f64]| {
            let x = DVector::from_column_slice(p);
            (&q2 * &x - &b2).as_slice().to_vec()
        },
    )
}

struct Rosenbrock;

impl ScalarFn for Rosenbrock {
    fn dim(&self) -> usize {
        2
    }
    fn eval<T: Scalar>(&self, p: &[T]) -> T {
        let a = T::cst(1.0) - p[0];
        let b = p[1] - p[0] * p[0];
        a * a + b * b * 100.0
    }
}

#[test]
fn criterion_07_optimizer_oracles() {
    let _guard = serial();
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    // stop on the projected gradient only
    let cfg = QnConfig {
        grad_tol: 1e-10,
        step_tol: 0.0,
        ..QnConfig::default()
    };
    let mut err_free: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.random_range(2..=50);
        let q = spd(n, &mut rng);
        let b = DVector::from_fn(n, |_, _| gauss(&mut rng));
        let exact = q.clone().cholesky().unwrap().solve(&b);
        let r = qn_run(&quadratic(q, b), &vec![0.0; n], None, &cfg).unwrap();
        err_free = err_free.max((DVector::from_vec(r.p) - exact).amax());
    }
    let mut err_box: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.random_range(2..=50);
        let d = DVector::from_fn(n, |_, _| rng.random_range(0.5..5.0));
        let b = DVector::from_fn(n, |_, _| 3.0 * gauss(&mut rng));
        let lower: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..0.0)).collect();
        let upper: Vec<f64> = lower.iter().map(|l| l + rng.random_range(0.1..2.0)).collect();
        let expect: Vec<f64> = (0..n).map(|i| (b[i] / d[i]).clamp(lower[i], upper[i])).collect();
        let bounds = Bounds::new(lower, upper).unwrap();
        let r = qn_run(&quadratic(DMatrix::from_diagonal(&d), b), &vec![0.0; n], Some(&bounds), &cfg).unwrap();
        err_box = r.p.iter().zip(&expect).map(|(a, b)| (a - b).abs()).fold(err_box, f64::max);
    }
    let ros = qn_run(&Rosenbrock, &[-1.2, 1.0], None, &cfg).unwrap();
    let pass = err_free <= 1e-8 && err_box <= 1e-6 && ros.f < 1e-10 && ros.iters <= 10_000;
    verdict(
        7,
        pass,
        &format!(
            "SPD error {err_free:.1e} (<= 1e-8), box error {err_box:.1e} (<= 1e-6), Rosenbrock f = {:.1e} in {} iterations",
            ros.f, ros.iters
        ),
    );
}

struct LeastSquares {
    a: Vec<Vec<f64>>,
    y: Vec<f64>,
}

impl ScalarFn for LeastSquares {
    fn dim(&self) -> usize {
        self.a[0].len()
    }
    fn eval<T: Scalar>(&self, p: &[T]) -> T {
        let r: Vec<T> = self
            .a
            .iter()
            .zip(&self.y)
            .map(|(row, &y)| {
                let row: Vec<T> = row.iter().map(|&v| T::cst(v)).collect();
                T::dot(p, &row) - T::cst(y)
            })
            .collect();
        T::sum_sq(&r) * (0.5 / self.y.len() as f64)
    }
}

#[test]
fn criterion_08_l1_split_complementarity() {
    let _guard = serial();
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let (m, n) = (80, 20);
    let support = [2usize, 7, 11, 16];
    let mut truth = vec![0.0; n];
    for (k, &i) in support.iter().enumerate() {
        truth[i] = if k % 2 == 0 { 1.5 } else { -2.0 };
    }
    let a = series(m, n, 1.0, &mut rng);
    let y: Vec<f64> = a
        .iter()
        .map(|row| row.iter().zip(&truth).map(|(a, t)| a * t).sum::<f64>() + 0.01 * gauss(&mut rng))
        .collect();
    let ls = LeastSquares { a, y };
    let split = SplitL1::new(&ls, n, 0.05);
    let q0 = split.split(&vec![0.0; n]);
    let r = qn_run(&split, &q0, Some(&split.bounds()), &QnConfig::default()).unwrap();
    let comp = (0..n).map(|i| r.p[i].min(r.p[n + i])).fold(0.0, f64::max);
    let x = split.merge(&r.p);
    let found: Vec<usize> = (0..n).filter(|&i| x[i].abs() > 1e-6).collect();
    let pass = comp <= 1e-8 && found == support;
    verdict(
        8,
        pass,
        &format!("max min(theta+, theta-) = {comp:.1e} (<= 1e-8), support {found:?} (expected {support:?})"),
    );
}

#[test]
fn criterion_09_structure_selection() {
    let _guard = serial();
    let disk = DiskParams::default();
    let noise = NoiseSpec::with_kind(NoiseKind::White);
    let train_set = gen_lti_disk(&disk, &noise, 2000, 90).unwrap().data;
    let test_set = gen_lti_disk(&disk, &noise, 2000, 91).unwrap().data;
    let base = TrainConfig {
        seeds: vec![0],
        ..TrainConfig::default()
    };
    let direct_model = Model::new(ModelStructure::lti(2, 0, 1, 1)).unwrap();
    let direct = train(&direct_model, &train_set, &base, None, 0).unwrap();
    let direct_bfr = evaluate(&direct_model, &direct.params, &test_set, &base).unwrap().bfr_sim;

    let cfg = TrainConfig {
        tau_g: 1e-4,
        ..base.clone()
    };
    let big = Model::new(ModelStructure::lti(4, 0, 1, 1)).unwrap();
    let sel = structure_select(&big, &train_set, &cfg, 0).unwrap();
    let pruned = sel.norms.iter().filter(|n| !n.kept).count();
    let sel_bfr = evaluate(&sel.model, &sel.result.params, &test_set, &base).unwrap().bfr_sim;
    let loss = (direct_bfr - sel_bfr) * 100.0;
    verdict(
        9,
        pruned >= 2 && loss <= 1.0,
        &format!(
            "{pruned} of 4 state groups pruned (>= 2), test BFR {:.2}% vs direct nx=2 {:.2}% (loss {loss:.2} <= 1 point)",
            sel_bfr * 100.0,
            direct_bfr * 100.0
        ),
    );
}

#[test]
fn criterion_10_separation_invariant() {
    let _guard = serial();
    let mut rng = ChaCha20Rng::seed_from_u64(10);
    let (mut z_max, mut sim_diff): (f64, f64) = (0.0, 0.0);
    for i in 0..40 {
        let s = random_structure(FAMILIES[i % 4], &mut rng);
        let m = Model::new(s.clone()).unwrap();
        let mut p = random_params(&m, 0.3, &mut rng);
        p[m.layout.block("z0").unwrap().range()].iter_mut().for_each(|v| *v = 0.0);
        let noise_data = random_dataset(&s, 300, &mut rng);
        let x0 = m.x0(&p).to_vec();
        let y_sim = m.simulation_rollout(&p, &x0, &noise_data.u, noise_data.p.as_deref()).unwrap();

        let clean = Dataset::new(noise_data.ts, noise_data.u.clone(), y_sim.clone(), noise_data.p.clone()).unwrap();
        let roll = m.predictor_rollout(&p, &clean).unwrap();
        z_max = roll.z.iter().flatten().fold(z_max, |a, v| a.max(v.abs()));

        let plant = Model::new(s.plant_only()).unwrap();
        let mut pp = vec![0.0; plant.n_params()];
        transfer_blocks(&m.layout, &p, &plant.layout, &mut pp);
        let y_plant = plant.simulation_rollout(&pp, &x0, &noise_data.u, noise_data.p.as_deref()).unwrap();
        let noisy = m.predictor_rollout(&p, &noise_data).unwrap();
        sim_diff = sim_diff.max(max_abs_diff(&y_sim, &y_plant)).max(max_abs_diff(&noisy.y_sim, &y_plant));
    }
    let pass = z_max == 0.0 && sim_diff <= 1e-12;
    verdict(
        10,
        pass,
        &format!("zero residual max |z| = {z_max:e} (== 0), combined vs plant-only sim {sim_diff:.1e} (<= 1e-12)"),
    );
}
