use crate::diff::{Bounds, Scalar, ScalarFn};

/// l1 penalty on the first `n` coordinates through `x = x_plus - x_minus`.
///
/// The split problem lives on `[x_plus (n), x_minus (n), rest]` with
/// `x_plus, x_minus >= 0` and the smooth linear penalty
/// `tau * sum(x_plus + x_minus)`.
pub struct SplitL1<'a, F> {
    pub inner: &'a F,
    pub n: usize,
    pub tau: f64,
}

impl<'a, F: ScalarFn> SplitL1<'a, F> {
    pub fn new(inner: &'a F, n: usize, tau: f64) -> Self {
        SplitL1 { inner, n, tau }
    }

    /// Canonical split `x_plus = max(x, 0)`, `x_minus = max(-x, 0)`.
    pub fn split(&self, p: &[f64]) -> Vec<f64> {
        let (x, rest) = p.split_at(self.n);
        let mut out = Vec::with_capacity(p.len() + self.n);
        out.extend(x.iter().map(|&v| v.max(0.0)));
        out.extend(x.iter().map(|&v| (-v).max(0.0)));
        out.extend_from_slice(rest);
        out
    }

    pub fn merge(&self, q: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out: Vec<f64> = (0..n).map(|i| q[i] - q[n + i]).collect();
        out.extend_from_slice(&q[2 * n..]);
        out
    }

    pub fn bounds(&self) -> Bounds {
        let dim = ScalarFn::dim(self);
        let mut lower = vec![f64::NEG_INFINITY; dim];
        lower[..2 * self.n].iter_mut().for_each(|v| *v = 0.0);
        Bounds {
            lower,
            upper: vec![f64::INFINITY; dim],
        }
    }
}

impl<F: ScalarFn> ScalarFn for SplitL1<'_, F> {
    fn dim(&self) -> usize {
        self.inner.dim() + self.n
    }

    fn eval<T: Scalar>(&self, q: &[T]) -> T {
        let n = self.n;
        let mut p: Vec<T> = (0..n).map(|i| q[i] - q[n + i]).collect();
        p.extend_from_slice(&q[2 * n..]);
        let v = self.inner.eval(&p);
        if self.tau > 0.0 {
            v + T::sum(&q[..2 * n]) * self.tau
        } else {
            v
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff::Objective;

    struct Quad;
    impl ScalarFn for Quad {
        fn dim(&self) -> usize {
            3
        }
        fn eval<T: Scalar>(&self, p: &[T]) -> T {
            T::sum_sq(p)
        }
    }

    #[test]
    fn canonical_split() {
        let s = SplitL1::new(&Quad, 2, 0.5);
        let q = s.split(&[2.0, -3.0, 7.0]);
        assert_eq!(q, vec![2.0, 0.0, 0.0, 3.0, 7.0]);
        assert_eq!(s.merge(&q), vec![2.0, -3.0, 7.0]);
        assert_eq!(s.value(&q).unwrap(), 4.0 + 9.0 + 49.0 + 0.5 * 5.0);
        let z = s.split(&[0.0, 0.0, 0.0]);
        assert_eq!(s.value(&z).unwrap(), 0.0);
        let b = s.bounds();
        assert_eq!(&b.lower[..4], &[0.0; 4]);
        assert_eq!(b.lower[4], f64::NEG_INFINITY);
    }
}
