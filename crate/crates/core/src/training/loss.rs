use crate::diff::{Scalar, ScalarFn};
use crate::io::Dataset;
use crate::models::Model;

/// Penalty weights. The l1 term is normally handled by [`SplitL1`](super::SplitL1)
/// and kept at zero here; it is evaluated directly only for reporting.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Regularization {
    pub rho_theta: f64,
    pub tau: f64,
    pub rho_w: f64,
    pub tau_g: f64,
    /// Index sets and weights of the group-lasso groups.
    pub groups: Vec<(Vec<usize>, f64)>,
}

/// `(rho_theta/2)|theta|^2 + tau |theta|_1 + (rho_w/2)|w0|^2 + tau_g sum_i w_i |theta_{g,i}|`
///
/// `p` is `theta` followed by `w0`; group indices refer to `p`.
pub fn regularizer<T: Scalar>(p: &[T], n_theta: usize, reg: &Regularization) -> T {
    let (theta, w0) = p.split_at(n_theta);
    let mut r = T::zero();
    if reg.rho_theta > 0.0 {
        r = r + T::sum_sq(theta) * (0.5 * reg.rho_theta);
    }
    if reg.tau > 0.0 {
        let abs: Vec<T> = theta.iter().map(|t| t.abs()).collect();
        r = r + T::sum(&abs) * reg.tau;
    }
    if reg.rho_w > 0.0 && !w0.is_empty() {
        r = r + T::sum_sq(w0) * (0.5 * reg.rho_w);
    }
    if reg.tau_g > 0.0 {
        let mut norms = Vec::with_capacity(reg.groups.len());
        for (idx, w) in &reg.groups {
            let members: Vec<T> = idx.iter().map(|&i| p[i]).collect();
            norms.push(T::sum_sq(&members).sqrt() * *w);
        }
        r = r + T::sum(&norms) * reg.tau_g;
    }
    r
}

/// `(1/L) sum_{k<L} |e_pred_k|^2 + R(theta, w0)` over the first `len` samples.
pub struct PemObjective<'a> {
    pub model: &'a Model,
    pub data: &'a Dataset,
    pub reg: Regularization,
    pub len: usize,
}

impl<'a> PemObjective<'a> {
    pub fn new(model: &'a Model, data: &'a Dataset, reg: Regularization) -> Self {
        PemObjective {
            model,
            data,
            reg,
            len: data.len(),
        }
    }

    /// Mean squared prediction residual, `NaN` if the rollout fails.
    pub fn pem<T: Scalar>(&self, p: &[T]) -> T {
        let len = self.len.min(self.data.len());
        let mut e = Vec::with_capacity(len * self.model.structure.ny);
        match self.model.predict_with(p, self.data, len, |s| e.extend_from_slice(s.e_pred)) {
            Ok(_) => T::sum_sq(&e) * (1.0 / len as f64),
            Err(_) => T::cst(f64::NAN),
        }
    }
}

impl ScalarFn for PemObjective<'_> {
    fn dim(&self) -> usize {
        self.model.n_params()
    }

    fn eval<T: Scalar>(&self, p: &[T]) -> T {
        let v = self.pem(p);
        if self.reg == Regularization::default() {
            v
        } else {
            v + regularizer(p, self.model.n_theta(), &self.reg)
        }
    }
}

/// Mean squared prediction residual of a model on a dataset.
pub fn pem_loss(model: &Model, params: &[f64], data: &Dataset) -> crate::Result<f64> {
    let mut acc = 0.0;
    model.predict_with(params, data, data.len(), |s| {
        acc += s.e_pred.iter().map(|e| e * e).sum::<f64>();
    })?;
    Ok(acc / data.len() as f64)
}

/// Optimize a subset of coordinates with the rest held at `base`.
pub struct Masked<'a, F> {
    pub inner: &'a F,
    pub base: Vec<f64>,
    pub free: Vec<usize>,
}

impl<F: ScalarFn> Masked<'_, F> {
    pub fn expand(&self, sub: &[f64]) -> Vec<f64> {
        let mut full = self.base.clone();
        for (&i, &v) in self.free.iter().zip(sub) {
            full[i] = v;
        }
        full
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&i| full[i]).collect()
    }
}

impl<F: ScalarFn> ScalarFn for Masked<'_, F> {
    fn dim(&self) -> usize {
        self.free.len()
    }

    fn eval<T: Scalar>(&self, p: &[T]) -> T {
        let mut full: Vec<T> = self.base.iter().map(|&v| T::cst(v)).collect();
        for (&i, &v) in self.free.iter().zip(p) {
            full[i] = v;
        }
        self.inner.eval(&full)
    }
}
