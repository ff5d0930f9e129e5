use super::config::AdamConfig;
use crate::diff::{Bounds, Objective};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct AdamResult {
    pub p: Vec<f64>,
    /// Objective at the returned point.
    pub loss: f64,
    pub iters: usize,
}

/// Full-batch Adam with bias correction. When `bounds` is given every
/// iterate is projected back onto the box.
pub fn adam_run(obj: &dyn Objective, p0: &[f64], cfg: &AdamConfig, bounds: Option<&Bounds>) -> Result<AdamResult> {
    let mut p = p0.to_vec();
    if let Some(b) = bounds {
        b.project(&mut p);
    }
    let n = p.len();
    let mut m = vec![0.0; n];
    let mut v = vec![0.0; n];
    let (b1, b2) = (cfg.beta1, cfg.beta2);
    let mut b1t = 1.0;
    let mut b2t = 1.0;
    for _ in 0..cfg.iters {
        let (_, g) = obj.value_and_grad(&p)?;
        b1t *= b1;
        b2t *= b2;
        for i in 0..n {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            let mh = m[i] / (1.0 - b1t);
            let vh = v[i] / (1.0 - b2t);
            p[i] -= cfg.eta * mh / (vh.sqrt() + cfg.eps);
        }
        if let Some(b) = bounds {
            b.project(&mut p);
        }
    }
    let loss = obj.value(&p)?;
    Ok(AdamResult {
        p,
        loss,
        iters: cfg.iters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff::FnObjective;

    fn square() -> impl Objective {
        FnObjective::new(1, |p: &[f64]| p[0] * p[0], |p: &[f64]| vec![2.0 * p[0]])
    }

    #[test]
    fn one_step_by_hand() {
        let cfg = AdamConfig {
            iters: 1,
            eta: 0.1,
            ..Default::default()
        };
        let r = adam_run(&square(), &[1.0], &cfg, None).unwrap();
        // m_hat = 2, v_hat = 4: step = 0.1 * 2 / (2 + 1e-8)
        let expect = 1.0 - 0.1 * 2.0 / (2.0 + 1e-8);
        assert!((r.p[0] - expect).abs() < 1e-15);
        assert!((r.p[0] - 0.9).abs() < 1e-8);
    }

    #[test]
    fn zero_iterations_is_identity() {
        let cfg = AdamConfig {
            iters: 0,
            ..Default::default()
        };
        assert_eq!(adam_run(&square(), &[3.5], &cfg, None).unwrap().p, vec![3.5]);
    }

    #[test]
    fn descends_on_quadratic() {
        let q = FnObjective::new(
            2,
            |p: &[f64]| p[0] * p[0] + 10.0 * p[1] * p[1],
            |p: &[f64]| vec![2.0 * p[0], 20.0 * p[1]],
        );
        let r = adam_run(&q, &[1.0, 1.0], &AdamConfig::default(), None).unwrap();
        let g0 = (4.0f64 + 400.0).sqrt();
        let g1 = (4.0 * r.p[0] * r.p[0] + 400.0 * r.p[1] * r.p[1]).sqrt();
        assert!(g1 < g0);
    }

    #[test]
    fn tiny_rate_barely_moves() {
        let cfg = AdamConfig {
            iters: 1,
            eta: 1e-12,
            ..Default::default()
        };
        let r = adam_run(&square(), &[0.7], &cfg, None).unwrap();
        assert!((r.p[0] - 0.7).abs() <= 1e-12);
    }

    #[test]
    fn projection_keeps_bounds() {
        let b = Bounds::new(vec![0.5], vec![2.0]).unwrap();
        let cfg = AdamConfig {
            iters: 200,
            eta: 0.1,
            ..Default::default()
        };
        let r = adam_run(&square(), &[1.0], &cfg, Some(&b)).unwrap();
        assert_eq!(r.p[0], 0.5);
    }
}
