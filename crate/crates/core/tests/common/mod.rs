#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use sysid_core::io::Dataset;
use sysid_core::models::{Family, MatrixFn, Model, ModelStructure, NetShape, Noise, OutputMap, Plant, PsiInput, PsiMap};
use sysid_core::nets::Activation;
use sysid_core::training::{init_params, InitConfig};

pub const FAMILIES: [Family; 4] = [Family::Lti, Family::LpvExternal, Family::LpvSelf, Family::Nonlinear];

pub fn act<R: Rng>(rng: &mut R) -> Activation {
    [Activation::Tanh, Activation::Sigmoid, Activation::Swish][rng.random_range(0..3)]
}

pub fn shape<R: Rng>(rng: &mut R) -> NetShape {
    let layers = rng.random_range(1..=2);
    let mut s = NetShape::new(
        (0..layers).map(|_| rng.random_range(2..=5)).collect(),
        (0..layers).map(|_| act(rng)).collect(),
    );
    s.bypass = rng.random_bool(0.3);
    s
}

fn matrices<R: Rng>(rng: &mut R) -> MatrixFn {
    if rng.random_bool(0.6) {
        MatrixFn::Affine
    } else {
        MatrixFn::Ffn(shape(rng))
    }
}

/// Random valid structure of the given family, all noise options allowed.
pub fn random_structure<R: Rng>(family: Family, rng: &mut R) -> ModelStructure {
    let np = rng.random_range(1..=2);
    let plant = match family {
        Family::Lti => Plant::Lti,
        Family::LpvExternal => Plant::LpvExternal { np, matrices: matrices(rng) },
        Family::LpvSelf => Plant::LpvSelf {
            np,
            matrices: matrices(rng),
            psi: PsiMap::Net {
                shape: shape(rng),
                input: if rng.random_bool(0.5) { PsiInput::State } else { PsiInput::StateInput },
            },
        },
        Family::Nonlinear => Plant::Nonlinear {
            fx: shape(rng),
            gx: if rng.random_bool(0.5) { OutputMap::Linear } else { OutputMap::Net(shape(rng)) },
        },
    };
    let lpv = matches!(family, Family::LpvExternal | Family::LpvSelf);
    let noise = match rng.random_range(0..3) {
        1 if lpv => Noise::Lpv { matrices: matrices(rng) },
        2 => Noise::Nonlinear { fz: shape(rng), gz: shape(rng) },
        _ => Noise::Lti,
    };
    ModelStructure {
        nx: rng.random_range(1..=3),
        nz: rng.random_range(1..=2),
        nu: rng.random_range(1..=2),
        ny: rng.random_range(1..=2),
        feedthrough: rng.random_bool(0.3),
        plant,
        noise,
    }
}

/// Random parameters with matrices and net weights shrunk by `scale`, so
/// that rollouts are contractive in both noise-model directions.
pub fn random_params<R: Rng>(model: &Model, scale: f64, rng: &mut R) -> Vec<f64> {
    let cfg = InitConfig {
        matrix_scale: scale,
        ..InitConfig::default()
    };
    let mut p = init_params(model, &cfg, rng);
    for b in model.layout.blocks().iter().filter(|b| b.name.contains('.')) {
        p[b.range()].iter_mut().for_each(|v| *v *= scale);
    }
    let nt = model.n_theta();
    for v in &mut p[nt..] {
        *v = 0.3 * gauss(rng);
    }
    p
}

pub fn gauss<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

pub fn series<R: Rng>(n: usize, dim: usize, sd: f64, rng: &mut R) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..dim).map(|_| sd * gauss(rng)).collect()).collect()
}

/// Random dataset matching the structure's dimensions.
pub fn random_dataset(s: &ModelStructure, n: usize, rng: &mut ChaCha20Rng) -> Dataset {
    let u = series(n, s.nu, 1.0, rng);
    let y = series(n, s.ny, 1.0, rng);
    let p = s
        .needs_external_scheduling()
        .then(|| (0..n).map(|_| (0..s.np()).map(|_| rng.random_range(-1.0..1.0)).collect()).collect());
    Dataset::new(0.01, u, y, p).unwrap()
}

pub fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}
