//! Seeded unbalanced-disk data generators.
//!
//! Random streams: every generator seeds `ChaCha20Rng::seed_from_u64(seed)`
//! and draws the input from stream 0, the innovation from stream 1 and the
//! binary scheduling signal from stream 2. Gaussian samples come from
//! `rand_distr::Normal` (ziggurat). States are `x = (alpha_dot, alpha)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::Dataset;
use crate::metrics::sample_variance;
use crate::models::{sinc, MatrixFn, Model, ModelStructure, Noise, Plant, PsiMap};

const STREAM_U: u64 = 0;
const STREAM_E: u64 = 1;
const STREAM_P: u64 = 2;

/// Physical constants of the disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskParams {
    /// Lumped back-EMF time constant [s].
    pub tau: f64,
    pub km: f64,
    pub j: f64,
    pub m: f64,
    pub g: f64,
    pub l: f64,
    pub ts: f64,
}

impl Default for DiskParams {
    /// About 9.5 dB sample SNR against the default noise on N = 2000
    /// (see the `calibrate_disk` example).
    fn default() -> Self {
        DiskParams {
            tau: 0.5971,
            km: 14.0,
            j: 2.2e-4,
            m: 0.07,
            g: 9.81,
            l: 0.042,
            ts: 0.01,
        }
    }
}

impl DiskParams {
    /// Motor gain raised so the swing reaches the nonlinear regime
    /// (about 21 dB with the scheduled noise).
    pub fn large_swing() -> Self {
        DiskParams {
            km: 52.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.tau, self.km, self.j, self.m, self.g, self.l, self.ts];
        if all.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(Error::Config("disk constants must be positive".into()))
        }
    }

    /// `m g l / J`.
    pub fn omega2(&self) -> f64 {
        self.m * self.g * self.l / self.j
    }

    pub fn a0(&self) -> [[f64; 2]; 2] {
        [[1.0 - self.ts / self.tau, 0.0], [self.ts, 1.0]]
    }

    /// Coefficient of the scheduling signal, `p = sinc(alpha)` recovering `sin(alpha)`.
    pub fn a1(&self) -> [[f64; 2]; 2] {
        [[0.0, -self.omega2() * self.ts], [0.0, 0.0]]
    }

    pub fn b(&self) -> [f64; 2] {
        [self.ts * self.km / self.tau, 0.0]
    }

    pub fn c(&self) -> [f64; 2] {
        [0.0, 1.0]
    }

    /// Stationary variance of `alpha` for the linearized plant under
    /// unit-variance white input.
    pub fn linear_output_variance(&self) -> f64 {
        let mut a = self.a0();
        let a1 = self.a1();
        for r in 0..2 {
            for c in 0..2 {
                a[r][c] += a1[r][c];
            }
        }
        let b = self.b();
        let mut p = [[0.0; 2]; 2];
        for it in 0..1_000_000 {
            let mut n = [[0.0; 2]; 2];
            for r in 0..2 {
                for c in 0..2 {
                    let mut s = b[r] * b[c];
                    for i in 0..2 {
                        for k in 0..2 {
                            s += a[r][i] * p[i][k] * a[c][k];
                        }
                    }
                    n[r][c] = s;
                }
            }
            let d = (n[1][1] - p[1][1]).abs();
            p = n;
            if it > 10 && d <= 1e-16 * p[1][1] {
                break;
            }
        }
        p[1][1]
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    White,
    #[default]
    BjLti,
    BjLpv,
}

/// Box-Jenkins output noise `z+ = (Az0 + Az1 p) z + (Bz0 + Bz1 p) e`, `v = z + e`.
/// The LTI kind uses `p = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub sigma2: f64,
    pub az0: f64,
    pub az1: f64,
    pub bz0: f64,
    pub bz1: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            kind: NoiseKind::BjLti,
            sigma2: 3.75e-3,
            az0: 277.0 / 300.0,
            az1: 2.0 / 30.0,
            bz0: 41.0 / 150.0,
            bz1: -11.0 / 60.0,
        }
    }
}

impl NoiseSpec {
    pub fn with_kind(kind: NoiseKind) -> Self {
        NoiseSpec {
            kind,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma2 >= 0.0 && self.sigma2.is_finite()) {
            return Err(Error::Config("noise variance must be non-negative".into()));
        }
        if [self.az0, self.az1, self.bz0, self.bz1].iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("noise coefficients must be finite".into()));
        }
        Ok(())
    }

    fn coeffs(&self, p: f64) -> (f64, f64) {
        match self.kind {
            NoiseKind::White => (0.0, 0.0),
            NoiseKind::BjLti => (self.az0 + self.az1, self.bz0 + self.bz1),
            NoiseKind::BjLpv => (self.az0 + self.az1 * p, self.bz0 + self.bz1 * p),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum Scheduling {
    /// `p = (1 - p_mag) + p_mag n` with `n` a random binary signal.
    External { p_mag: f64, bandwidth_hz: f64 },
    /// `p = sinc(alpha)`, computed from the state and not stored.
    SelfSinc,
}

impl Scheduling {
    pub fn external_default(ts: f64) -> Self {
        Scheduling::External {
            p_mag: 0.25,
            bandwidth_hz: 0.05 / (2.0 * ts),
        }
    }
}

/// Noise-free output and noise realization behind a generated dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct Truth {
    pub y0: Vec<f64>,
    pub v: Vec<f64>,
    pub e: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Generated {
    pub data: Dataset,
    pub truth: Truth,
}

impl Generated {
    pub fn snr_db(&self) -> Result<f64> {
        snr_db(&self.truth.y0, &self.truth.v)
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn gaussian(n: usize, var: f64, seed: u64, stream: u64) -> Vec<f64> {
    if var == 0.0 {
        return vec![0.0; n];
    }
    let d = Normal::new(0.0, var.sqrt()).expect("finite variance");
    let mut r = rng(seed, stream);
    (0..n).map(|_| d.sample(&mut r)).collect()
}

/// Bernoulli(1/2) levels held for `ceil(1 / (2 bandwidth Ts))` samples.
pub fn random_binary_signal(n: usize, bandwidth_hz: f64, ts: f64, seed: u64) -> Result<Vec<f64>> {
    if !(bandwidth_hz > 0.0 && ts > 0.0 && bandwidth_hz <= 1.0 / (2.0 * ts) * (1.0 + 1e-12)) {
        return Err(Error::Config(format!(
            "binary-signal bandwidth must lie in (0, {}] Hz, got {bandwidth_hz}",
            1.0 / (2.0 * ts)
        )));
    }
    let hold = binary_hold(bandwidth_hz, ts);
    let mut r = rng(seed, STREAM_P);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let level = if r.random_bool(0.5) { 1.0 } else { 0.0 };
        out.extend(std::iter::repeat_n(level, hold.min(n - out.len())));
    }
    Ok(out)
}

/// Hold length of [`random_binary_signal`].
pub fn binary_hold(bandwidth_hz: f64, ts: f64) -> usize {
    ((1.0 / (2.0 * bandwidth_hz * ts)) - 1e-9).ceil().max(1.0) as usize
}

/// `10 log10(Var(y0) / Var(v))`, `+inf` for noise-free data.
pub fn snr_db(y0: &[f64], v: &[f64]) -> Result<f64> {
    let vs = sample_variance(y0)?;
    let vn = sample_variance(v)?;
    if vn == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (vs / vn).log10())
}

enum Dynamics<'a> {
    /// Plant matrices evaluated at the given scheduling value.
    Lpv(&'a dyn Fn(usize, f64) -> f64),
    /// Euler step of the nonlinear ODE.
    Euler,
}

fn check(params: &DiskParams, noise: &NoiseSpec, n: usize) -> Result<()> {
    params.validate()?;
    noise.validate()?;
    if n == 0 {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    Ok(())
}

fn simulate(params: &DiskParams, noise: &NoiseSpec, n: usize, seed: u64, dynamics: Dynamics, p_ext: Option<Vec<f64>>) -> Result<Generated> {
    let u = gaussian(n, 1.0, seed, STREAM_U);
    let e = gaussian(n, noise.sigma2, seed, STREAM_E);
    let (a0, a1, b) = (params.a0(), params.a1(), params.b());
    let w2 = params.omega2();
    let mut x = [0.0f64; 2];
    let mut z = 0.0;
    let (mut y0, mut v, mut y) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for k in 0..n {
        let p = match &dynamics {
            Dynamics::Lpv(sched) => sched(k, x[1]),
            Dynamics::Euler => sinc(x[1]),
        };
        let vk = z + e[k];
        y0.push(x[1]);
        v.push(vk);
        y.push(vec![x[1] + vk]);
        let (az, bz) = noise.coeffs(p);
        z = az * z + bz * e[k];
        x = match dynamics {
            Dynamics::Lpv(_) => [
                (a0[0][0] + a1[0][0] * p) * x[0] + (a0[0][1] + a1[0][1] * p) * x[1] + b[0] * u[k],
                (a0[1][0] + a1[1][0] * p) * x[0] + (a0[1][1] + a1[1][1] * p) * x[1] + b[1] * u[k],
            ],
            Dynamics::Euler => [
                x[0] + params.ts * (-x[0] / params.tau + params.km / params.tau * u[k] - w2 * x[1].sin()),
                x[1] + params.ts * x[0],
            ],
        };
        if !(x[0].is_finite() && x[1].is_finite() && z.is_finite()) {
            return Err(Error::NonFiniteValue("disk simulation"));
        }
    }
    let data = Dataset::new(params.ts, u.into_iter().map(|v| vec![v]).collect(), y, p_ext.map(|p| p.into_iter().map(|v| vec![v]).collect()))?
        .with_seed(seed);
    Ok(Generated {
        data,
        truth: Truth { y0, v, e },
    })
}

/// Linearized disk around the downward equilibrium.
pub fn gen_lti_disk(params: &DiskParams, noise: &NoiseSpec, n: usize, seed: u64) -> Result<Generated> {
    check(params, noise, n)?;
    simulate(params, noise, n, seed, Dynamics::Lpv(&|_, _| 1.0), None)
}

pub fn gen_lpv_disk(params: &DiskParams, noise: &NoiseSpec, n: usize, seed: u64, scheduling: &Scheduling) -> Result<Generated> {
    check(params, noise, n)?;
    match *scheduling {
        Scheduling::External { p_mag, bandwidth_hz } => {
            let p: Vec<f64> = random_binary_signal(n, bandwidth_hz, params.ts, seed)?
                .into_iter()
                .map(|b| (1.0 - p_mag) + p_mag * b)
                .collect();
            let sched = |k: usize, _: f64| p[k];
            simulate(params, noise, n, seed, Dynamics::Lpv(&sched), Some(p.clone()))
        }
        Scheduling::SelfSinc => simulate(params, noise, n, seed, Dynamics::Lpv(&|_, a| sinc(a)), None),
    }
}

/// Euler-discretized nonlinear disk. An LPV noise kind is scheduled by
/// `sinc(alpha)`.
pub fn gen_nl_disk(params: &DiskParams, noise: &NoiseSpec, n: usize, seed: u64) -> Result<Generated> {
    check(params, noise, n)?;
    simulate(params, noise, n, seed, Dynamics::Euler, None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiskVariant {
    Lti,
    LpvExternal,
    /// Also the exact truth of the nonlinear generator.
    LpvSelf,
}

fn set_block(model: &Model, p: &mut [f64], name: &str, vals: &[f64]) {
    let b = model.layout.block(name).unwrap_or_else(|| panic!("truth model lacks block {name}"));
    p[b.range()].copy_from_slice(vals);
}

/// Generating system written in the identified model form: plant matrices
/// plus the inverse noise filter `z+ = (Az - Bz) z + Bz v`, `g_z = -z`.
/// Initial states are zero.
pub fn truth_model(params: &DiskParams, noise: &NoiseSpec, variant: DiskVariant) -> Result<(Model, Vec<f64>)> {
    params.validate()?;
    noise.validate()?;
    let nz = usize::from(noise.kind != NoiseKind::White);
    let lpv_noise = noise.kind == NoiseKind::BjLpv;
    if lpv_noise && variant == DiskVariant::Lti {
        return Err(Error::InvalidStructure("scheduled noise needs a scheduled plant".into()));
    }
    let plant = match variant {
        DiskVariant::Lti => Plant::Lti,
        DiskVariant::LpvExternal => Plant::LpvExternal {
            np: 1,
            matrices: MatrixFn::Affine,
        },
        DiskVariant::LpvSelf => Plant::LpvSelf {
            np: 1,
            matrices: MatrixFn::Affine,
            psi: PsiMap::Sinc { state: 1 },
        },
    };
    let noise_ms = if lpv_noise {
        Noise::Lpv {
            matrices: MatrixFn::Affine,
        }
    } else {
        Noise::Lti
    };
    let model = Model::new(ModelStructure {
        nx: 2,
        nz,
        nu: 1,
        ny: 1,
        feedthrough: false,
        plant,
        noise: noise_ms,
    })?;
    let mut p = vec![0.0; model.n_params()];
    let flat = |m: [[f64; 2]; 2]| [m[0][0], m[0][1], m[1][0], m[1][1]];
    if variant == DiskVariant::Lti {
        let (a0, a1) = (params.a0(), params.a1());
        let mut a = a0;
        for r in 0..2 {
            for c in 0..2 {
                a[r][c] += a1[r][c];
            }
        }
        set_block(&model, &mut p, "A0", &flat(a));
    } else {
        set_block(&model, &mut p, "A0", &flat(params.a0()));
        set_block(&model, &mut p, "A1", &flat(params.a1()));
    }
    set_block(&model, &mut p, "B0", &params.b());
    set_block(&model, &mut p, "C0", &params.c());
    if nz == 1 {
        if lpv_noise {
            set_block(&model, &mut p, "Az0", &[noise.az0 - noise.bz0]);
            set_block(&model, &mut p, "Az1", &[noise.az1 - noise.bz1]);
            set_block(&model, &mut p, "Bz0", &[noise.bz0]);
            set_block(&model, &mut p, "Bz1", &[noise.bz1]);
        } else {
            let (az, bz) = noise.coeffs(1.0);
            set_block(&model, &mut p, "Az0", &[az - bz]);
            set_block(&model, &mut p, "Bz0", &[bz]);
        }
        set_block(&model, &mut p, "Cz0", &[-1.0]);
    }
    Ok((model, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_signal_hold() {
        assert_eq!(binary_hold(0.05 / (2.0 * 0.01), 0.01), 20);
        assert_eq!(binary_hold(50.0, 0.01), 1);
        let s = random_binary_signal(400, 2.5, 0.01, 3).unwrap();
        for c in s.chunks(20) {
            assert!(c.iter().all(|&v| v == c[0]));
        }
        assert!(s.iter().all(|&v| v == 0.0 || v == 1.0));
        assert_eq!(s, random_binary_signal(400, 2.5, 0.01, 3).unwrap());
        assert!(random_binary_signal(10, 51.0, 0.01, 0).is_err());
        assert!(random_binary_signal(10, 0.0, 0.01, 0).is_err());
    }

    #[test]
    fn snr_examples() {
        let a = [1.0, -1.0, 1.0, -1.0];
        assert!(snr_db(&a, &a).unwrap().abs() < 1e-12);
        let b: Vec<f64> = a.iter().map(|v| v * 10f64.sqrt()).collect();
        assert!((snr_db(&b, &a).unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(snr_db(&a, &[0.0; 4]).unwrap(), f64::INFINITY);
    }

    #[test]
    fn noise_pole() {
        let n = NoiseSpec::default();
        assert!((n.az0 + n.az1 - 0.99).abs() < 1e-15);
        assert!((n.bz0 + n.bz1 - 0.09).abs() < 1e-15);
    }

    #[test]
    fn zero_noise_gives_clean_output() {
        let noise = NoiseSpec {
            sigma2: 0.0,
            ..Default::default()
        };
        let g = gen_lti_disk(&DiskParams::default(), &noise, 300, 1).unwrap();
        assert!(g.truth.v.iter().all(|&v| v == 0.0));
        for (y, y0) in g.data.y.iter().zip(&g.truth.y0) {
            assert_eq!(y[0], *y0);
        }
        assert_eq!(g.snr_db().unwrap(), f64::INFINITY);
    }

    #[test]
    fn rejects_empty() {
        assert!(gen_lti_disk(&DiskParams::default(), &NoiseSpec::default(), 0, 0).is_err());
    }

    #[test]
    fn linearized_plant_is_stable_and_oscillatory() {
        let d = DiskParams::default();
        let a = d.a0();
        let a1 = d.a1();
        let tr = a[0][0] + a[1][1] + a1[0][0] + a1[1][1];
        let det = (a[0][0] + a1[0][0]) * (a[1][1] + a1[1][1]) - (a[0][1] + a1[0][1]) * (a[1][0] + a1[1][0]);
        // complex pair inside the unit circle
        assert!(tr * tr < 4.0 * det);
        assert!(det < 1.0);
    }
}
