use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::config::InitConfig;
use crate::models::{Axis, Model};
use crate::nets::InitScheme;

fn normal<R: Rng + ?Sized>(rng: &mut R, sd: f64) -> f64 {
    if sd > 0.0 {
        Normal::new(0.0, sd).expect("positive std-dev").sample(rng)
    } else {
        0.0
    }
}

/// Random initial parameters: zero biases and initial states, net weights
/// per the configured scheme, model matrices from a scaled normal.
pub fn init_params<R: Rng + ?Sized>(model: &Model, cfg: &InitConfig, rng: &mut R) -> Vec<f64> {
    let mut p = vec![0.0; model.n_params()];
    for b in model.layout.blocks() {
        if b.group == "x0" || b.group == "z0" {
            continue;
        }
        let is_net = b.name.contains('.');
        if is_net && b.cols == Axis::One {
            continue;
        }
        let sd = if is_net {
            match cfg.scheme {
                InitScheme::Normal { sigma: Some(s) } => s,
                InitScheme::Normal { sigma: None } => 1.0 / (b.ncols.max(1) as f64).sqrt(),
                InitScheme::Xavier => (2.0 / (b.ncols + b.nrows).max(1) as f64).sqrt(),
            }
        } else {
            cfg.matrix_scale / (b.ncols.max(1) as f64).sqrt()
        };
        for v in &mut p[b.range()] {
            *v = normal(rng, sd);
        }
    }
    p
}

/// Zero the parameters through which the noise state reaches the output,
/// so that `g_z = 0` while the remaining noise parameters stay random.
pub fn zero_noise_output(model: &Model, p: &mut [f64]) {
    let s = &model.structure;
    for b in model.layout.blocks() {
        if b.group == "theta_e" && !b.name.contains('.') {
            p[b.range()].iter_mut().for_each(|v| *v = 0.0);
        }
    }
    // output layer (and bypass) of the raw g_z net
    for b in model.layout.blocks().iter().filter(|b| b.name.starts_with("gz.")) {
        if !matches!(b.rows, Axis::Hidden(_)) {
            p[b.range()].iter_mut().for_each(|v| *v = 0.0);
        }
    }
    // rows of the matrix net that produce Cz
    let ncz = s.ny * s.nz;
    for b in model.layout.blocks().iter().filter(|b| b.rows == Axis::MatZ) {
        let first_row = b.nrows - ncz;
        for r in first_row..b.nrows {
            for c in 0..b.ncols {
                p[b.offset + r * b.ncols + c] = 0.0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelStructure;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn seeded_and_zero_states() {
        let m = Model::new(ModelStructure::lti(2, 1, 1, 1)).unwrap();
        let a = init_params(&m, &InitConfig::default(), &mut ChaCha20Rng::seed_from_u64(4));
        let b = init_params(&m, &InitConfig::default(), &mut ChaCha20Rng::seed_from_u64(4));
        assert_eq!(a, b);
        assert!(a[m.n_theta()..].iter().all(|&v| v == 0.0));
        let mut c = a.clone();
        zero_noise_output(&m, &mut c);
        let cz = m.layout.block("Cz0").unwrap().range();
        assert!(c[cz.clone()].iter().all(|&v| v == 0.0));
        assert!(a[cz].iter().all(|&v| v != 0.0));
    }
}
