//! Sample SNR and hidden-truth best-fit rates of the disk generators as a
//! function of the motor gain, averaged over seeds 1000..1100 of N = 2000.
//!
//!     cargo run -p sysid-core --example calibrate_disk

use sysid_core::benchmarks::{gen_lpv_disk, gen_lti_disk, gen_nl_disk, DiskParams, Generated, NoiseKind, NoiseSpec, Scheduling};
use sysid_core::metrics::bfr_scalar;

const N: usize = 2000;
const SEEDS: std::ops::Range<u64> = 1000..1100;

/// Mean (SNR dB, sim BFR, pred BFR) of the generating system.
fn stats(gen: impl Fn(u64) -> Generated) -> [f64; 3] {
    let mut acc = [0.0; 3];
    for s in SEEDS {
        let g = gen(s);
        let y: Vec<f64> = g.data.y.iter().map(|r| r[0]).collect();
        let sim: Vec<f64> = y.iter().zip(&g.truth.v).map(|(y, v)| y - v).collect();
        let pred: Vec<f64> = y.iter().zip(&g.truth.e).map(|(y, e)| y - e).collect();
        acc[0] += g.snr_db().unwrap();
        acc[1] += bfr_scalar(&y, &sim).unwrap();
        acc[2] += bfr_scalar(&y, &pred).unwrap();
    }
    acc.map(|v| v / SEEDS.count() as f64)
}

fn row(label: &str, s: [f64; 3]) {
    println!("{label:<34} {:>7.2} dB  sim {:>6.2}%  pred {:>6.2}%", s[0], 100.0 * s[1], 100.0 * s[2]);
}

fn main() {
    let bj = NoiseSpec::default();
    let lpv = NoiseSpec::with_kind(NoiseKind::BjLpv);
    for km in [12.0, 13.0, 14.0, 15.0, 15.3145] {
        let d = DiskParams { km, ..DiskParams::default() };
        row(&format!("lti, km = {km}"), stats(|s| gen_lti_disk(&d, &bj, N, s).unwrap()));
    }
    let d = DiskParams::default();
    row(
        &format!("lpv external, km = {}", d.km),
        stats(|s| gen_lpv_disk(&d, &lpv, N, s, &Scheduling::external_default(d.ts)).unwrap()),
    );
    for km in [40.0, 48.0, 52.0, 56.0] {
        let d = DiskParams { km, ..DiskParams::default() };
        row(&format!("self-scheduled / nonlinear, km = {km}"), stats(|s| gen_nl_disk(&d, &lpv, N, s).unwrap()));
    }
}
