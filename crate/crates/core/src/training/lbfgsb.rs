//! Bound-constrained limited-memory BFGS.
//!
//! Projected variant: variables sitting on a bound with the gradient pushing
//! outward are held fixed, the two-loop recursion runs on the remaining free
//! coordinates, and a backtracking Armijo search runs along the projected
//! path `P(x + t d)`. Every trial point is feasible. Without bounds the
//! step satisfies the strong Wolfe conditions.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::config::QnConfig;
use crate::diff::{Bounds, Objective};
use crate::error::{Error, Result};

const ARMIJO_C1: f64 = 1e-4;
const WOLFE_C2: f64 = 0.9;
const MAX_BACKTRACKS: usize = 60;
/// Relative slack on f for the approximate Wolfe test, which accepts a step
/// on the curvature condition once f changes only at round-off level.
const APPROX_F: f64 = 1e-12;
/// Curvature pairs with `s'y <= CURV_EPS |s| |y|` are discarded.
pub const CURV_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QnStatus {
    GradTol,
    StepTol,
    MaxIters,
    /// No acceptable step was found; the best point so far is returned.
    LineSearchFailure,
}

impl QnStatus {
    pub fn converged(self) -> bool {
        matches!(self, QnStatus::GradTol | QnStatus::StepTol)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QnResult {
    pub p: Vec<f64>,
    pub f: f64,
    pub grad_inf: f64,
    pub iters: usize,
    pub evals: usize,
    pub status: QnStatus,
}

fn dot_on(a: &[f64], b: &[f64], free: &[usize]) -> f64 {
    free.iter().map(|&i| a[i] * b[i]).sum()
}

fn projected_grad_inf(x: &[f64], g: &[f64], b: Option<&Bounds>) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..x.len() {
        let mut t = x[i] - g[i];
        if let Some(b) = b {
            t = t.clamp(b.lower[i], b.upper[i]);
        }
        m = m.max((t - x[i]).abs());
    }
    m
}

fn trial(obj: &dyn Objective, x: &[f64], d: &[f64], t: f64, xt: &mut [f64], evals: &mut usize) -> Result<Option<(f64, Vec<f64>)>> {
    for i in 0..x.len() {
        xt[i] = x[i] + t * d[i];
    }
    *evals += 1;
    match obj.value_and_grad(xt) {
        Ok(v) => Ok(Some(v)),
        Err(Error::NonFiniteValue(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Minimizer of the cubic through `(a, fa, da)` and `(b, fb, db)`, kept
/// away from the interval ends.
fn cubic_step(a: f64, fa: f64, da: f64, b: f64, fb: f64, db: f64) -> f64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let guard = 0.1 * (hi - lo);
    let d1 = da + db - 3.0 * (fa - fb) / (a - b);
    let disc = d1 * d1 - da * db;
    let t = if disc >= 0.0 {
        let d2 = (b - a).signum() * disc.sqrt();
        b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2)
    } else {
        f64::NAN
    };
    if t.is_finite() && t > lo + guard && t < hi - guard {
        t
    } else {
        0.5 * (lo + hi)
    }
}

/// Strong-Wolfe bracketing and zoom along `x + t d`. Failed (non-finite)
/// trials count as sufficient-decrease violations.
#[allow(clippy::too_many_arguments)]
fn wolfe_search(
    obj: &dyn Objective,
    x: &[f64],
    f0: f64,
    gd0: f64,
    d: &[f64],
    t0: f64,
    xt: &mut [f64],
    evals: &mut usize,
) -> Result<Option<(f64, Vec<f64>)>> {
    let dot = |g: &[f64]| g.iter().zip(d).map(|(a, b)| a * b).sum::<f64>();
    let armijo = |t: f64, ft: f64| ft <= f0 + ARMIJO_C1 * t * gd0;
    let curv = |dt: f64| dt.abs() <= WOLFE_C2 * gd0.abs();
    let approx = |ft: f64, dt: f64| ft <= f0 + APPROX_F * f0.abs() && curv(dt);
    // (t, f, slope, grad) of the best sufficient-decrease point so far
    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    let keep = |t: f64, ft: f64, g: &[f64], best: &mut Option<(f64, f64, Vec<f64>)>| {
        if best.as_ref().is_none_or(|b| ft < b.1) {
            *best = Some((t, ft, g.to_vec()));
        }
    };
    let (mut t_prev, mut f_prev, mut d_prev) = (0.0, f0, gd0);
    let mut t = t0;
    let mut bracket = None;
    for i in 0..MAX_BACKTRACKS {
        let Some((ft, gt)) = trial(obj, x, d, t, xt, evals)? else {
            bracket = Some((t_prev, f_prev, d_prev, t, f64::INFINITY, f64::NAN));
            break;
        };
        let dt = dot(&gt);
        if approx(ft, dt) {
            return Ok(Some((ft, gt)));
        }
        if !armijo(t, ft) || (i > 0 && ft >= f_prev) {
            bracket = Some((t_prev, f_prev, d_prev, t, ft, dt));
            break;
        }
        keep(t, ft, &gt, &mut best);
        if curv(dt) {
            return Ok(Some((ft, gt)));
        }
        if dt >= 0.0 {
            bracket = Some((t, ft, dt, t_prev, f_prev, d_prev));
            break;
        }
        t_prev = t;
        f_prev = ft;
        d_prev = dt;
        t *= 4.0;
    }
    if let Some((mut lo, mut flo, mut dlo, mut hi, mut fhi, mut dhi)) = bracket {
        for _ in 0..MAX_BACKTRACKS {
            let tj = if fhi.is_finite() && dhi.is_finite() {
                cubic_step(lo, flo, dlo, hi, fhi, dhi)
            } else {
                0.5 * (lo + hi)
            };
            if (hi - lo).abs() <= 1e-16 * lo.abs().max(hi.abs()) {
                break;
            }
            let Some((ft, gt)) = trial(obj, x, d, tj, xt, evals)? else {
                hi = tj;
                fhi = f64::INFINITY;
                dhi = f64::NAN;
                continue;
            };
            let dt = dot(&gt);
            if approx(ft, dt) {
                return Ok(Some((ft, gt)));
            }
            if !armijo(tj, ft) || ft >= flo {
                hi = tj;
                fhi = ft;
                dhi = dt;
            } else {
                keep(tj, ft, &gt, &mut best);
                if curv(dt) {
                    return Ok(Some((ft, gt)));
                }
                if dt * (hi - lo) >= 0.0 {
                    hi = lo;
                    fhi = flo;
                    dhi = dlo;
                }
                lo = tj;
                flo = ft;
                dlo = dt;
            }
        }
    }
    Ok(best.map(|(t, ft, gt)| {
        for i in 0..x.len() {
            xt[i] = x[i] + t * d[i];
        }
        (ft, gt)
    }))
}

/// Backtracking Armijo search along the projected path `P(x + t d)`.
#[allow(clippy::too_many_arguments)]
fn projected_search(
    obj: &dyn Objective,
    x: &[f64],
    f: f64,
    g: &[f64],
    d: &[f64],
    t0: f64,
    b: &Bounds,
    xt: &mut [f64],
    evals: &mut usize,
) -> Result<Option<(f64, Vec<f64>)>> {
    let n = x.len();
    let mut t = t0;
    for _ in 0..MAX_BACKTRACKS {
        for i in 0..n {
            xt[i] = x[i] + t * d[i];
        }
        b.project(xt);
        let mut moved = false;
        let mut gs = 0.0;
        for i in 0..n {
            let s = xt[i] - x[i];
            moved |= s != 0.0;
            gs += g[i] * s;
        }
        if !moved {
            return Ok(None);
        }
        *evals += 1;
        match obj.value_and_grad(xt) {
            Ok((ft, gt)) if ft <= f + ARMIJO_C1 * gs => return Ok(Some((ft, gt))),
            Ok(_) | Err(Error::NonFiniteValue(_)) => t *= 0.5,
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

/// Minimize `obj` over the box (or unconstrained when `bounds` is `None`).
pub fn qn_run(obj: &dyn Objective, p0: &[f64], bounds: Option<&Bounds>, cfg: &QnConfig) -> Result<QnResult> {
    let n = p0.len();
    if n != obj.dim() {
        return Err(Error::dims("optimizer start", obj.dim(), n));
    }
    if let Some(b) = bounds {
        if b.len() != n {
            return Err(Error::dims("optimizer bounds", n, b.len()));
        }
    }
    let mut x = p0.to_vec();
    if let Some(b) = bounds {
        b.project(&mut x);
    }
    let (mut f, mut g) = obj.value_and_grad(&x)?;
    let mut evals = 1;
    let mut mem: VecDeque<(Vec<f64>, Vec<f64>)> = VecDeque::with_capacity(cfg.memory);
    let mut status = QnStatus::MaxIters;
    let mut iters = 0;
    let mut xt = vec![0.0; n];

    while iters < cfg.max_iters {
        let pg = projected_grad_inf(&x, &g, bounds);
        if pg <= cfg.grad_tol {
            status = QnStatus::GradTol;
            break;
        }
        let free: Vec<usize> = match bounds {
            None => (0..n).collect(),
            Some(b) => (0..n)
                .filter(|&i| !((x[i] <= b.lower[i] && g[i] > 0.0) || (x[i] >= b.upper[i] && g[i] < 0.0)))
                .collect(),
        };

        // two-loop recursion on the free coordinates
        let mut q = vec![0.0; n];
        for &i in &free {
            q[i] = g[i];
        }
        let mut alphas = Vec::with_capacity(mem.len());
        let mut gamma = None;
        for (s, y) in mem.iter().rev() {
            let sy = dot_on(s, y, &free);
            if sy <= CURV_EPS * dot_on(s, s, &free).sqrt() * dot_on(y, y, &free).sqrt() || sy <= 0.0 {
                alphas.push(None);
                continue;
            }
            if gamma.is_none() {
                gamma = Some(sy / dot_on(y, y, &free));
            }
            let rho = 1.0 / sy;
            let a = rho * dot_on(s, &q, &free);
            for &i in &free {
                q[i] -= a * y[i];
            }
            alphas.push(Some((rho, a)));
        }
        let gamma = gamma.unwrap_or(1.0);
        for &i in &free {
            q[i] *= gamma;
        }
        for ((s, y), ra) in mem.iter().zip(alphas.iter().rev()) {
            if let Some((rho, a)) = ra {
                let b = rho * dot_on(y, &q, &free);
                for &i in &free {
                    q[i] += s[i] * (a - b);
                }
            }
        }
        let mut d: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut gd = dot_on(&g, &d, &free);
        if !(gd < 0.0) {
            mem.clear();
            d.iter_mut().for_each(|v| *v = 0.0);
            for &i in &free {
                d[i] = -g[i];
            }
            gd = -dot_on(&g, &g, &free);
        }
        if gd == 0.0 {
            status = QnStatus::GradTol;
            break;
        }
        let dmax = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let t0 = if mem.is_empty() { (1.0 / dmax).min(1.0) } else { 1.0 };

        let accepted = match bounds {
            None => wolfe_search(obj, &x, f, gd, &d, t0, &mut xt, &mut evals)?,
            Some(b) => projected_search(obj, &x, f, &g, &d, t0, b, &mut xt, &mut evals)?,
        };
        let Some((ft, gt)) = accepted else {
            status = QnStatus::LineSearchFailure;
            break;
        };
        iters += 1;
        let s: Vec<f64> = xt.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gt.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let ns = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if sy > CURV_EPS * ns * ny {
            if mem.len() == cfg.memory {
                mem.pop_front();
            }
            mem.push_back((s, y));
        }
        let f_prev = f;
        x.copy_from_slice(&xt);
        f = ft;
        g = gt;
        if cfg.step_tol > 0.0 && f_prev - f <= cfg.step_tol * f_prev.abs().max(f.abs()).max(1.0) {
            status = QnStatus::StepTol;
            break;
        }
    }
    let grad_inf = projected_grad_inf(&x, &g, bounds);
    if status == QnStatus::MaxIters && grad_inf <= cfg.grad_tol {
        status = QnStatus::GradTol;
    }
    Ok(QnResult {
        p: x,
        f,
        grad_inf,
        iters,
        evals,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff::{FnObjective, Scalar, ScalarFn};

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
    fn rosenbrock() {
        let r = qn_run(&Rosenbrock, &[-1.2, 1.0], None, &QnConfig::default()).unwrap();
        assert!(r.f < 1e-10, "{r:?}");
        assert!(r.iters <= 10_000);
    }

    #[test]
    fn active_upper_bound() {
        let o = FnObjective::new(1, |p: &[f64]| (p[0] - 2.0).powi(2), |p: &[f64]| vec![2.0 * (p[0] - 2.0)]);
        let b = Bounds::new(vec![0.0], vec![1.0]).unwrap();
        let r = qn_run(&o, &[0.3], Some(&b), &QnConfig::default()).unwrap();
        assert_eq!(r.p, vec![1.0]);
        assert_eq!(r.status, QnStatus::GradTol);
    }

    #[test]
    fn infeasible_start_is_projected() {
        let o = FnObjective::new(1, |p: &[f64]| p[0] * p[0], |p: &[f64]| vec![2.0 * p[0]]);
        let b = Bounds::new(vec![1.0], vec![3.0]).unwrap();
        let r = qn_run(&o, &[10.0], Some(&b), &QnConfig::default()).unwrap();
        assert_eq!(r.p, vec![1.0]);
    }

    #[test]
    fn monotone_and_feasible_on_box() {
        use std::cell::RefCell;
        let seen = RefCell::new(Vec::new());
        let b = Bounds::new(vec![-0.5, 0.2, -1.0], vec![0.5, 2.0, 1.0]).unwrap();
        let o = FnObjective::new(
            3,
            |p: &[f64]| {
                seen.borrow_mut().push(p.to_vec());
                (p[0] - 1.0).powi(2) + (p[1] + 1.0).powi(4) + (p[0] * p[2] - 0.3).powi(2)
            },
            |p: &[f64]| {
                let r = p[0] * p[2] - 0.3;
                vec![2.0 * (p[0] - 1.0) + 2.0 * r * p[2], 4.0 * (p[1] + 1.0).powi(3), 2.0 * r * p[0]]
            },
        );
        let r = qn_run(&o, &[0.0, 1.0, 0.0], Some(&b), &QnConfig::default()).unwrap();
        assert!(seen.borrow().iter().all(|p| b.contains(p)));
        assert!((r.p[0] - 0.5).abs() < 1e-9 && (r.p[1] - 0.2).abs() < 1e-9);
        assert!((r.p[2] - 0.6).abs() < 1e-6);
    }

    #[test]
    fn nonfinite_trial_backtracks() {
        // log barrier: steps past 0 are NaN and must be rejected
        let o = FnObjective::new(
            1,
            |p: &[f64]| p[0] - 2.0 * p[0].ln(),
            |p: &[f64]| vec![1.0 - 2.0 / p[0]],
        );
        let r = qn_run(&o, &[0.1], None, &QnConfig::default()).unwrap();
        assert!((r.p[0] - 2.0).abs() < 1e-6, "{r:?}");
    }
}
