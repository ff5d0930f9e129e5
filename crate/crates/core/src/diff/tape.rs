//! Thread-local reverse-mode tape.
//!
//! A [`Var`] is a value plus the index of the tape node that produced it.
//! Constants carry a sentinel index and never touch the tape, so data
//! sequences fed into a rollout cost nothing to record. Each node keeps a
//! variable-length list of `(parent, partial)` entries, which lets dot
//! products be recorded as a single node instead of a chain of binary ops.

use std::cell::RefCell;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::scalar::{sigmoid_f64, Scalar};
use crate::error::{Error, Result};

const CONST: u32 = u32::MAX;

/// Differentiable scalar recorded on the current thread's tape.
///
/// Values of this type are only meaningful inside the recording started by
/// [`value_and_grad`]; they must not be kept around after it returns.
#[derive(Clone, Copy, Debug)]
pub struct Var {
    val: f64,
    idx: u32,
}

struct Tape {
    active: bool,
    // ends[i] is one past the last parent entry of node i
    ends: Vec<u32>,
    parents: Vec<u32>,
    partials: Vec<f64>,
    adjoint: Vec<f64>,
}

impl Tape {
    const fn new() -> Self {
        Tape {
            active: false,
            ends: Vec::new(),
            parents: Vec::new(),
            partials: Vec::new(),
            adjoint: Vec::new(),
        }
    }

    #[inline]
    fn finish_node(&mut self) -> u32 {
        let id = self.ends.len();
        assert!(id < CONST as usize, "tape overflow");
        self.ends.push(self.parents.len() as u32);
        id as u32
    }
}

thread_local! {
    static TAPE: RefCell<Tape> = const { RefCell::new(Tape::new()) };
}

#[inline]
fn push1(a: u32, da: f64) -> u32 {
    TAPE.with(|t| {
        let mut t = t.borrow_mut();
        t.parents.push(a);
        t.partials.push(da);
        t.finish_node()
    })
}

#[inline]
fn push2(a: u32, da: f64, b: u32, db: f64) -> u32 {
    TAPE.with(|t| {
        let mut t = t.borrow_mut();
        t.parents.push(a);
        t.partials.push(da);
        t.parents.push(b);
        t.partials.push(db);
        t.finish_node()
    })
}

impl Var {
    #[inline]
    fn constant(val: f64) -> Self {
        Var { val, idx: CONST }
    }

    #[inline]
    fn unary(self, val: f64, d: f64) -> Self {
        if self.idx == CONST {
            Var::constant(val)
        } else {
            Var {
                val,
                idx: push1(self.idx, d),
            }
        }
    }

    #[inline]
    fn binary(a: Var, b: Var, val: f64, da: f64, db: f64) -> Self {
        let idx = match (a.idx == CONST, b.idx == CONST) {
            (true, true) => CONST,
            (false, true) => push1(a.idx, da),
            (true, false) => push1(b.idx, db),
            (false, false) => push2(a.idx, da, b.idx, db),
        };
        Var { val, idx }
    }

    pub fn is_constant(&self) -> bool {
        self.idx == CONST
    }
}

impl Add for Var {
    type Output = Var;
    #[inline]
    fn add(self, rhs: Var) -> Var {
        Var::binary(self, rhs, self.val + rhs.val, 1.0, 1.0)
    }
}

impl Sub for Var {
    type Output = Var;
    #[inline]
    fn sub(self, rhs: Var) -> Var {
        Var::binary(self, rhs, self.val - rhs.val, 1.0, -1.0)
    }
}

impl Mul for Var {
    type Output = Var;
    #[inline]
    fn mul(self, rhs: Var) -> Var {
        Var::binary(self, rhs, self.val * rhs.val, rhs.val, self.val)
    }
}

impl Div for Var {
    type Output = Var;
    #[inline]
    fn div(self, rhs: Var) -> Var {
        let q = self.val / rhs.val;
        Var::binary(self, rhs, q, 1.0 / rhs.val, -q / rhs.val)
    }
}

impl Neg for Var {
    type Output = Var;
    #[inline]
    fn neg(self) -> Var {
        self.unary(-self.val, -1.0)
    }
}

impl Add<f64> for Var {
    type Output = Var;
    #[inline]
    fn add(self, rhs: f64) -> Var {
        self.unary(self.val + rhs, 1.0)
    }
}

impl Sub<f64> for Var {
    type Output = Var;
    #[inline]
    fn sub(self, rhs: f64) -> Var {
        self.unary(self.val - rhs, 1.0)
    }
}

impl Mul<f64> for Var {
    type Output = Var;
    #[inline]
    fn mul(self, rhs: f64) -> Var {
        self.unary(self.val * rhs, rhs)
    }
}

impl Div<f64> for Var {
    type Output = Var;
    #[inline]
    fn div(self, rhs: f64) -> Var {
        self.unary(self.val / rhs, 1.0 / rhs)
    }
}

impl Scalar for Var {
    #[inline]
    fn cst(v: f64) -> Self {
        Var::constant(v)
    }
    #[inline]
    fn val(self) -> f64 {
        self.val
    }
    #[inline]
    fn exp(self) -> Self {
        let e = self.val.exp();
        self.unary(e, e)
    }
    #[inline]
    fn ln(self) -> Self {
        self.unary(self.val.ln(), 1.0 / self.val)
    }
    #[inline]
    fn sin(self) -> Self {
        self.unary(self.val.sin(), self.val.cos())
    }
    #[inline]
    fn cos(self) -> Self {
        self.unary(self.val.cos(), -self.val.sin())
    }
    #[inline]
    fn tanh(self) -> Self {
        let t = self.val.tanh();
        self.unary(t, 1.0 - t * t)
    }
    #[inline]
    fn sigmoid(self) -> Self {
        let s = sigmoid_f64(self.val);
        self.unary(s, s * (1.0 - s))
    }
    #[inline]
    fn swish(self) -> Self {
        let x = self.val;
        let s = sigmoid_f64(x);
        self.unary(x * s, s + x * s * (1.0 - s))
    }
    #[inline]
    fn sqrt(self) -> Self {
        let r = self.val.sqrt();
        let d = if r == 0.0 { 0.0 } else { 0.5 / r };
        self.unary(r, d)
    }
    #[inline]
    fn abs(self) -> Self {
        let d = if self.val > 0.0 {
            1.0
        } else if self.val < 0.0 {
            -1.0
        } else {
            0.0
        };
        self.unary(self.val.abs(), d)
    }

    fn dot(a: &[Var], b: &[Var]) -> Var {
        Var::affine(Var::constant(0.0), a, b)
    }

    fn affine(bias: Var, a: &[Var], b: &[Var]) -> Var {
        debug_assert_eq!(a.len(), b.len());
        let mut acc = 0.0;
        for (x, y) in a.iter().zip(b) {
            acc += x.val * y.val;
        }
        let val = bias.val + acc;
        let any = bias.idx != CONST || a.iter().chain(b).any(|v| v.idx != CONST);
        if !any {
            return Var::constant(val);
        }
        let idx = TAPE.with(|t| {
            let mut t = t.borrow_mut();
            if bias.idx != CONST {
                t.parents.push(bias.idx);
                t.partials.push(1.0);
            }
            for (x, y) in a.iter().zip(b) {
                if x.idx != CONST {
                    t.parents.push(x.idx);
                    t.partials.push(y.val);
                }
                if y.idx != CONST {
                    t.parents.push(y.idx);
                    t.partials.push(x.val);
                }
            }
            t.finish_node()
        });
        Var { val, idx }
    }

    fn sum(a: &[Var]) -> Var {
        let mut val = 0.0;
        for x in a {
            val += x.val;
        }
        if a.iter().all(|v| v.idx == CONST) {
            return Var::constant(val);
        }
        let idx = TAPE.with(|t| {
            let mut t = t.borrow_mut();
            for x in a.iter().filter(|v| v.idx != CONST) {
                t.parents.push(x.idx);
                t.partials.push(1.0);
            }
            t.finish_node()
        });
        Var { val, idx }
    }

    fn sum_sq(a: &[Var]) -> Var {
        let mut val = 0.0;
        for x in a {
            val += x.val * x.val;
        }
        if a.iter().all(|v| v.idx == CONST) {
            return Var::constant(val);
        }
        let idx = TAPE.with(|t| {
            let mut t = t.borrow_mut();
            for x in a.iter().filter(|v| v.idx != CONST) {
                t.parents.push(x.idx);
                t.partials.push(2.0 * x.val);
            }
            t.finish_node()
        });
        Var { val, idx }
    }
}

/// Closes the recording even if the user function panics.
struct Recording;

impl Drop for Recording {
    fn drop(&mut self) {
        TAPE.with(|t| {
            let mut t = t.borrow_mut();
            t.active = false;
            t.ends.clear();
            t.parents.clear();
            t.partials.clear();
        });
    }
}

/// Record `f` at `x` and return its value together with the full gradient.
///
/// The tape is thread-local, so concurrent calls on different threads are
/// independent. Nested calls on the same thread are rejected.
pub fn value_and_grad<F>(x: &[f64], f: F) -> Result<(f64, Vec<f64>)>
where
    F: FnOnce(&[Var]) -> Var,
{
    let n = x.len();
    let inputs = TAPE.with(|t| -> Result<Vec<Var>> {
        let mut t = t.borrow_mut();
        if t.active {
            return Err(Error::NestedRecording);
        }
        t.active = true;
        t.ends.clear();
        t.parents.clear();
        t.partials.clear();
        Ok(x.iter()
            .map(|&val| Var {
                val,
                idx: t.finish_node(),
            })
            .collect())
    })?;
    let _guard = Recording;

    let out = f(&inputs);

    let grad = TAPE.with(|t| {
        let mut t = t.borrow_mut();
        let Tape {
            ends,
            parents,
            partials,
            adjoint,
            ..
        } = &mut *t;
        adjoint.clear();
        adjoint.resize(ends.len(), 0.0);
        if out.idx != CONST {
            adjoint[out.idx as usize] = 1.0;
            let top = out.idx as usize;
            for i in (n..=top).rev() {
                let g = adjoint[i];
                if g == 0.0 {
                    continue;
                }
                let start = if i == 0 { 0 } else { ends[i - 1] as usize };
                let span = start..ends[i] as usize;
                for (&j, &d) in parents[span.clone()].iter().zip(&partials[span]) {
                    adjoint[j as usize] += d * g;
                }
            }
        }
        adjoint[..n].to_vec()
    });
    Ok((out.val, grad))
}

/// Number of nodes recorded so far in the active recording (diagnostics).
pub fn tape_len() -> usize {
    TAPE.with(|t| t.borrow().ends.len())
}
