use super::model::Model;
use crate::diff::Scalar;
use crate::error::{Error, Result};
use crate::io::Dataset;

/// Per-step output of the one-step-ahead predictor.
pub struct PredStep<'a, T> {
    pub k: usize,
    pub x: &'a [T],
    pub z: &'a [T],
    pub p: &'a [T],
    /// Plant output `g_x(x, u)`, which is also the simulated output.
    pub y_hat: &'a [T],
    pub v_hat: &'a [T],
    pub y_pred: &'a [T],
    pub e_pred: &'a [T],
}

/// Recorded trajectories of a predictor rollout.
#[derive(Clone, Debug, PartialEq)]
pub struct RolloutResult {
    pub y_pred: Vec<Vec<f64>>,
    pub e_pred: Vec<Vec<f64>>,
    pub y_sim: Vec<Vec<f64>>,
    /// `y - y_sim`, the reconstructed output disturbance.
    pub v_hat: Vec<Vec<f64>>,
    /// States `x_0..x_N`.
    pub x: Vec<Vec<f64>>,
    /// States `z_0..z_N`.
    pub z: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
}

fn finite<T: Scalar>(v: &[T]) -> bool {
    v.iter().all(|x| x.val().is_finite())
}

impl Model {
    pub(crate) fn check_data(&self, data: &Dataset) -> Result<()> {
        let s = &self.structure;
        if data.is_empty() {
            return Err(Error::TooShort { needed: 1, got: 0 });
        }
        if data.nu() != s.nu {
            return Err(Error::dims("dataset inputs", s.nu, data.nu()));
        }
        if data.ny() != s.ny {
            return Err(Error::dims("dataset outputs", s.ny, data.ny()));
        }
        if s.needs_external_scheduling() {
            if data.p.is_none() {
                return Err(Error::MissingScheduling);
            }
            if data.np() != s.np() {
                return Err(Error::dims("dataset scheduling", s.np(), data.np()));
            }
        }
        Ok(())
    }

    /// One-step-ahead predictor over the whole dataset:
    ///
    /// ```text
    /// y_hat = g_x(x, u),  v = y - y_hat,  y_pred = y_hat - g_z(z, x, u),  e = y - y_pred
    /// x+ = f_x(x, u),     z+ = f_z(z, x, u, v)
    /// ```
    ///
    /// `sink` sees every step. Stops with `NonFiniteValue` on divergence.
    pub fn predict_with<T: Scalar>(
        &self,
        params: &[T],
        data: &Dataset,
        len: usize,
        mut sink: impl FnMut(&PredStep<'_, T>),
    ) -> Result<(Vec<T>, Vec<T>)> {
        self.check_data(data)?;
        if params.len() != self.n_params() {
            return Err(Error::dims("model parameters", self.n_params(), params.len()));
        }
        let mut x = self.x0(params).to_vec();
        let mut z = self.z0(params).to_vec();
        let mut u: Vec<T> = Vec::with_capacity(self.structure.nu);
        for k in 0..len.min(data.len()) {
            u.clear();
            u.extend(data.u[k].iter().map(|&v| T::cst(v)));
            let y = &data.y[k];
            let p_ext = data.p.as_ref().map(|p| p[k].as_slice());
            let p = self.schedule(params, &x, &u, p_ext)?;
            let (xn, y_hat) = self.plant_step(params, &x, &u, &p);
            let (g, zn, v) = self.noise_step(params, &z, &x, &u, &p, |_| {
                y.iter().zip(&y_hat).map(|(&y, &yh)| T::cst(y) - yh).collect()
            });
            let y_pred: Vec<T> = y_hat.iter().zip(&g).map(|(&a, &b)| a - b).collect();
            let e_pred: Vec<T> = y.iter().zip(&y_pred).map(|(&y, &yp)| T::cst(y) - yp).collect();
            if !finite(&e_pred) || !finite(&xn) || !finite(&zn) {
                return Err(Error::NonFiniteValue("predictor rollout"));
            }
            sink(&PredStep {
                k,
                x: &x,
                z: &z,
                p: &p,
                y_hat: &y_hat,
                v_hat: &v,
                y_pred: &y_pred,
                e_pred: &e_pred,
            });
            x = xn;
            z = zn;
        }
        Ok((x, z))
    }

    /// Predictor rollout with every trajectory recorded.
    pub fn predictor_rollout(&self, params: &[f64], data: &Dataset) -> Result<RolloutResult> {
        let n = data.len();
        let mut r = RolloutResult {
            y_pred: Vec::with_capacity(n),
            e_pred: Vec::with_capacity(n),
            y_sim: Vec::with_capacity(n),
            v_hat: Vec::with_capacity(n),
            x: Vec::with_capacity(n + 1),
            z: Vec::with_capacity(n + 1),
            p: Vec::with_capacity(n),
        };
        let (xn, zn) = self.predict_with(params, data, n, |s| {
            r.y_pred.push(s.y_pred.to_vec());
            r.e_pred.push(s.e_pred.to_vec());
            r.y_sim.push(s.y_hat.to_vec());
            r.v_hat.push(s.v_hat.to_vec());
            r.x.push(s.x.to_vec());
            r.z.push(s.z.to_vec());
            r.p.push(s.p.to_vec());
        })?;
        r.x.push(xn);
        r.z.push(zn);
        Ok(r)
    }

    /// Plant-only simulation from `x0`; the noise model plays no part.
    pub fn simulation_rollout(
        &self,
        params: &[f64],
        x0: &[f64],
        u: &[Vec<f64>],
        p_ext: Option<&[Vec<f64>]>,
    ) -> Result<Vec<Vec<f64>>> {
        let s = &self.structure;
        if x0.len() != s.nx {
            return Err(Error::dims("initial plant state", s.nx, x0.len()));
        }
        if params.len() != self.n_params() {
            return Err(Error::dims("model parameters", self.n_params(), params.len()));
        }
        if s.needs_external_scheduling() && p_ext.is_none() {
            return Err(Error::MissingScheduling);
        }
        let mut x = x0.to_vec();
        let mut out = Vec::with_capacity(u.len());
        for (k, uk) in u.iter().enumerate() {
            if uk.len() != s.nu {
                return Err(Error::dims("input sample", s.nu, uk.len()));
            }
            let p = self.schedule(params, &x, uk, p_ext.map(|p| p[k].as_slice()))?;
            let (xn, y) = self.plant_step(params, &x, uk, &p);
            if !finite(&xn) || !finite(&y) {
                return Err(Error::NonFiniteValue("simulation rollout"));
            }
            out.push(y);
            x = xn;
        }
        Ok(out)
    }

    /// Run `Hθ` from `z0` along given plant states and inputs: maps `e` to `v`.
    pub fn noise_forward_rollout(
        &self,
        params: &[f64],
        z0: &[f64],
        x: &[Vec<f64>],
        u: &[Vec<f64>],
        e: &[Vec<f64>],
        p: &[Vec<f64>],
    ) -> Result<Vec<Vec<f64>>> {
        self.noise_rollout(params, z0, x, u, e, p, true)
    }

    /// Run `Hθ⁻¹` from `z0`: maps `v` to `e`.
    pub fn noise_inverse_rollout(
        &self,
        params: &[f64],
        z0: &[f64],
        x: &[Vec<f64>],
        u: &[Vec<f64>],
        v: &[Vec<f64>],
        p: &[Vec<f64>],
    ) -> Result<Vec<Vec<f64>>> {
        self.noise_rollout(params, z0, x, u, v, p, false)
    }

    #[allow(clippy::too_many_arguments)]
    fn noise_rollout(
        &self,
        params: &[f64],
        z0: &[f64],
        x: &[Vec<f64>],
        u: &[Vec<f64>],
        input: &[Vec<f64>],
        p: &[Vec<f64>],
        forward: bool,
    ) -> Result<Vec<Vec<f64>>> {
        let n = input.len();
        if x.len() < n || u.len() < n {
            return Err(Error::dims("noise rollout samples", n, x.len().min(u.len())));
        }
        if z0.len() != self.structure.nz {
            return Err(Error::dims("initial noise state", self.structure.nz, z0.len()));
        }
        let mut z = z0.to_vec();
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let pk: &[f64] = p.get(k).map_or(&[], |v| v.as_slice());
            let (zn, o) = if forward {
                self.noise_forward_step(params, &z, &x[k], &u[k], &input[k], pk)
            } else {
                self.noise_inverse_step(params, &z, &x[k], &u[k], &input[k], pk)
            };
            if !finite(&zn) || !finite(&o) {
                return Err(Error::NonFiniteValue("noise rollout"));
            }
            out.push(o);
            z = zn;
        }
        Ok(out)
    }
}
