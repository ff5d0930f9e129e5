//! Process/noise separation of an innovation-form system.
//!
//! The system `w+ = f_w(w, u, e)`, `y = g_w(w, u) + e` is split into a
//! deterministic part driven by `u` alone and a noise part with state
//! `z = w - x` that vanishes when `z = 0` and `e = 0`.

/// Subtract the `z = 0` (and `v = 0`) response of raw noise maps so that
/// `f(0, x, u, 0) = 0` and `g(0, x, u) = 0` hold for every parameter value.
#[allow(clippy::type_complexity)]
pub fn enforce_separation<F, G>(
    f_raw: F,
    g_raw: G,
) -> (
    impl Fn(&[f64], &[f64], &[f64], &[f64]) -> Vec<f64>,
    impl Fn(&[f64], &[f64], &[f64]) -> Vec<f64>,
)
where
    F: Fn(&[f64], &[f64], &[f64], &[f64]) -> Vec<f64>,
    G: Fn(&[f64], &[f64], &[f64]) -> Vec<f64>,
{
    let f = move |z: &[f64], x: &[f64], u: &[f64], v: &[f64]| {
        let z0 = vec![0.0; z.len()];
        let v0 = vec![0.0; v.len()];
        let a = f_raw(z, x, u, v);
        let b = f_raw(&z0, x, u, &v0);
        a.iter().zip(&b).map(|(a, b)| a - b).collect()
    };
    let g = move |z: &[f64], x: &[f64], u: &[f64]| {
        let z0 = vec![0.0; z.len()];
        let a = g_raw(z, x, u);
        let b = g_raw(&z0, x, u);
        a.iter().zip(&b).map(|(a, b)| a - b).collect()
    };
    (f, g)
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(a, b)| a - b).collect()
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(a, b)| a + b).collect()
}

/// Output of a simulated innovation-form system.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparatedTrajectory {
    /// Noise-free output `g_x(x, u)`.
    pub y0: Vec<Vec<f64>>,
    /// Output disturbance `v = g_z(z, x, u) + e`.
    pub v: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
}

/// The separated form of `(f_w, g_w, w0)`, with `x0 = w0` and `z0 = 0`.
pub struct SeparatedSystem<F, G> {
    f_w: F,
    g_w: G,
    ne: usize,
    pub x0: Vec<f64>,
    pub z0: Vec<f64>,
}

/// Build the separated system. `ne` is the dimension of `e`.
pub fn separate_system<F, G>(f_w: F, g_w: G, w0: &[f64], ne: usize) -> SeparatedSystem<F, G>
where
    F: Fn(&[f64], &[f64], &[f64]) -> Vec<f64>,
    G: Fn(&[f64], &[f64]) -> Vec<f64>,
{
    SeparatedSystem {
        f_w,
        g_w,
        ne,
        x0: w0.to_vec(),
        z0: vec![0.0; w0.len()],
    }
}

impl<F, G> SeparatedSystem<F, G>
where
    F: Fn(&[f64], &[f64], &[f64]) -> Vec<f64>,
    G: Fn(&[f64], &[f64]) -> Vec<f64>,
{
    pub fn f_x(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        (self.f_w)(x, u, &vec![0.0; self.ne])
    }

    pub fn g_x(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        (self.g_w)(x, u)
    }

    pub fn f_z(&self, z: &[f64], x: &[f64], u: &[f64], e: &[f64]) -> Vec<f64> {
        sub(&(self.f_w)(&add(z, x), u, e), &self.f_x(x, u))
    }

    pub fn g_z(&self, z: &[f64], x: &[f64], u: &[f64]) -> Vec<f64> {
        sub(&(self.g_w)(&add(z, x), u), &self.g_x(x, u))
    }

    pub fn simulate(&self, u: &[Vec<f64>], e: &[Vec<f64>]) -> SeparatedTrajectory {
        let mut x = self.x0.clone();
        let mut z = self.z0.clone();
        let mut t = SeparatedTrajectory {
            y0: Vec::with_capacity(u.len()),
            v: Vec::with_capacity(u.len()),
            y: Vec::with_capacity(u.len()),
        };
        for (uk, ek) in u.iter().zip(e) {
            let y0 = self.g_x(&x, uk);
            let v = add(&self.g_z(&z, &x, uk), ek);
            t.y.push(add(&y0, &v));
            t.y0.push(y0);
            t.v.push(v);
            let zn = self.f_z(&z, &x, uk, ek);
            x = self.f_x(&x, uk);
            z = zn;
        }
        t
    }
}

/// Simulate `w+ = f_w(w, u, e)`, `y = g_w(w, u) + e` directly.
pub fn simulate_innovation_form<F, G>(f_w: F, g_w: G, w0: &[f64], u: &[Vec<f64>], e: &[Vec<f64>]) -> Vec<Vec<f64>>
where
    F: Fn(&[f64], &[f64], &[f64]) -> Vec<f64>,
    G: Fn(&[f64], &[f64]) -> Vec<f64>,
{
    let mut w = w0.to_vec();
    let mut y = Vec::with_capacity(u.len());
    for (uk, ek) in u.iter().zip(e) {
        y.push(add(&g_w(&w, uk), ek));
        w = f_w(&w, uk, ek);
    }
    y
}
