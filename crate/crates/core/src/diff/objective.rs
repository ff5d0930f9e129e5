use super::scalar::Scalar;
use super::tape::{value_and_grad, Var};
use crate::error::{Error, Result};

/// Scalar function written once for any [`Scalar`] type.
///
/// Implementors get an [`Objective`] for free: `f64` evaluation for values
/// and a tape recording for exact reverse-mode gradients.
pub trait ScalarFn {
    fn dim(&self) -> usize;
    fn eval<T: Scalar>(&self, p: &[T]) -> T;
}

/// Object-safe objective consumed by the optimizers.
pub trait Objective {
    fn dim(&self) -> usize;
    fn value(&self, p: &[f64]) -> Result<f64>;
    fn value_and_grad(&self, p: &[f64]) -> Result<(f64, Vec<f64>)>;
}

impl<F: ScalarFn> Objective for F {
    fn dim(&self) -> usize {
        ScalarFn::dim(self)
    }

    fn value(&self, p: &[f64]) -> Result<f64> {
        check_dim(ScalarFn::dim(self), p)?;
        let v = self.eval::<f64>(p);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteValue("objective value"))
        }
    }

    fn value_and_grad(&self, p: &[f64]) -> Result<(f64, Vec<f64>)> {
        check_dim(ScalarFn::dim(self), p)?;
        let (v, g) = value_and_grad(p, |x| self.eval::<Var>(x))?;
        if !v.is_finite() {
            return Err(Error::NonFiniteValue("objective value"));
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteValue("objective gradient"));
        }
        Ok((v, g))
    }
}

fn check_dim(dim: usize, p: &[f64]) -> Result<()> {
    if p.len() != dim {
        Err(Error::dims("objective input", dim, p.len()))
    } else {
        Ok(())
    }
}

/// Objective from a plain closure pair: value and analytic gradient.
pub struct FnObjective<V, G> {
    dim: usize,
    value: V,
    grad: G,
}

impl<V, G> FnObjective<V, G>
where
    V: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    pub fn new(dim: usize, value: V, grad: G) -> Self {
        FnObjective { dim, value, grad }
    }
}

impl<V, G> Objective for FnObjective<V, G>
where
    V: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, p: &[f64]) -> Result<f64> {
        check_dim(self.dim, p)?;
        let v = (self.value)(p);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteValue("objective value"))
        }
    }

    fn value_and_grad(&self, p: &[f64]) -> Result<(f64, Vec<f64>)> {
        let v = self.value(p)?;
        let g = (self.grad)(p);
        if g.len() != self.dim {
            return Err(Error::dims("gradient", self.dim, g.len()));
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteValue("objective gradient"));
        }
        Ok((v, g))
    }
}

/// Central finite-difference gradient, `(f(p + h e_i) - f(p - h e_i)) / 2h`.
///
/// Independent of the tape; used as the oracle for gradient checks.
pub fn finite_diff_grad(obj: &dyn Objective, p: &[f64], h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(Error::Config(format!("finite-difference step must be > 0, got {h}")));
    }
    check_dim(obj.dim(), p)?;
    let mut x = p.to_vec();
    let mut g = Vec::with_capacity(p.len());
    for i in 0..p.len() {
        let xi = x[i];
        x[i] = xi + h;
        let fp = obj.value(&x)?;
        x[i] = xi - h;
        let fm = obj.value(&x)?;
        x[i] = xi;
        g.push((fp - fm) / (2.0 * h));
    }
    Ok(g)
}

/// Default step for [`finite_diff_grad`].
pub const DEFAULT_FD_STEP: f64 = 1e-6;
