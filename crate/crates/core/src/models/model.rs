//! Step maps of the plant, the scheduling map and the inverse noise model.
//!
//! Everything takes the full parameter slice (`theta` followed by
//! `w0 = (x0, z0)`) and is generic over [`Scalar`] so the same code yields
//! values and gradients.

use super::layout::{Coeffs, Layout, NetSlot, NoiseSlots, OutputSlots, PlantSlots, PsiSlots};
use super::structure::{ModelStructure, PsiInput};
use crate::diff::Scalar;
use crate::error::{Error, Result};

/// A validated structure together with its parameter layout.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub structure: ModelStructure,
    pub layout: Layout,
}

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc<T: Scalar>(x: T) -> T {
    if x.val().abs() < 1e-4 {
        let x2 = x * x;
        T::cst(1.0) - x2 * (T::cst(1.0 / 6.0) - x2 * (1.0 / 120.0))
    } else {
        x.sin() / x
    }
}

#[inline]
fn row<T: Scalar>(th: &[T], off: usize, r: usize, nc: usize) -> &[T] {
    &th[off + r * nc..off + (r + 1) * nc]
}

/// `rows_r(M1) v1 + rows_r(M2) v2` for one row, at most two tape nodes.
#[inline]
fn row2<T: Scalar>(m1: &[T], v1: &[T], m2: &[T], v2: &[T]) -> T {
    if v2.is_empty() {
        T::dot(m1, v1)
    } else {
        T::affine(T::dot(m1, v1), m2, v2)
    }
}

/// `sum_j w_j (M1_j v1 + M2_j v2)` with `w_0 = 1`, one dot node per row
/// over the shared products `w_j v`.
fn lpv_mv<T: Scalar>(
    th: &[T],
    m1: &Coeffs,
    v1: &[T],
    m2: Option<&Coeffs>,
    v2: &[T],
    p: &[T],
    nrows: usize,
) -> Vec<T> {
    let (n1, n2) = (v1.len(), if m2.is_some() { v2.len() } else { 0 });
    let nc = m1.0.len().min(p.len() + 1);
    if nc == 1 {
        return (0..nrows)
            .map(|r| match m2 {
                Some(m2) => row2(row(th, m1.0[0], r, n1), v1, row(th, m2.0[0], r, n2), v2),
                None => T::dot(row(th, m1.0[0], r, n1), v1),
            })
            .collect();
    }
    let width = n1 + n2;
    let mut scaled = Vec::with_capacity(nc * width);
    scaled.extend_from_slice(v1);
    scaled.extend_from_slice(&v2[..n2]);
    for &pj in &p[..nc - 1] {
        scaled.extend(v1.iter().chain(&v2[..n2]).map(|&v| pj * v));
    }
    let mut coef = Vec::with_capacity(nc * width);
    (0..nrows)
        .map(|r| {
            coef.clear();
            for j in 0..nc {
                coef.extend_from_slice(row(th, m1.0[j], r, n1));
                if let Some(m2) = m2 {
                    coef.extend_from_slice(row(th, m2.0[j], r, n2));
                }
            }
            T::dot(&coef, &scaled)
        })
        .collect()
}

fn dense_mv<T: Scalar>(m1: &[T], v1: &[T], m2: &[T], v2: &[T], nrows: usize) -> Vec<T> {
    let (n1, n2) = (v1.len(), v2.len());
    (0..nrows)
        .map(|r| row2(&m1[r * n1..(r + 1) * n1], v1, &m2[r * n2..(r + 1) * n2], v2))
        .collect()
}

fn net<T: Scalar>(slot: &NetSlot, th: &[T], x: &[T]) -> Vec<T> {
    slot.spec.forward(&th[slot.range()], x)
}

fn cat<T: Copy>(parts: &[&[T]]) -> Vec<T> {
    let mut v = Vec::with_capacity(parts.iter().map(|p| p.len()).sum());
    for p in parts {
        v.extend_from_slice(p);
    }
    v
}

impl Model {
    pub fn new(structure: ModelStructure) -> Result<Self> {
        structure.validate()?;
        let layout = Layout::new(&structure);
        Ok(Model { structure, layout })
    }

    pub fn n_params(&self) -> usize {
        self.layout.len()
    }

    pub fn n_theta(&self) -> usize {
        self.layout.n_theta()
    }

    pub fn x0<'a, T>(&self, params: &'a [T]) -> &'a [T] {
        &params[self.layout.x0..self.layout.x0 + self.structure.nx]
    }

    pub fn z0<'a, T>(&self, params: &'a [T]) -> &'a [T] {
        &params[self.layout.z0..self.layout.z0 + self.structure.nz]
    }

    /// Scheduling vector for the step: measured `p_ext` for externally
    /// scheduled plants, `psi(x, u)` for self-scheduled ones, empty otherwise.
    pub fn schedule<T: Scalar>(&self, th: &[T], x: &[T], u: &[T], p_ext: Option<&[f64]>) -> Result<Vec<T>> {
        if self.structure.needs_external_scheduling() {
            let p = p_ext.ok_or(Error::MissingScheduling)?;
            if p.len() != self.structure.np() {
                return Err(Error::dims("scheduling vector", self.structure.np(), p.len()));
            }
            return Ok(p.iter().map(|&v| T::cst(v)).collect());
        }
        Ok(match &self.layout.psi {
            PsiSlots::None => Vec::new(),
            PsiSlots::Sinc(s) => vec![sinc(x[*s])],
            PsiSlots::Net { net: slot, input } => match input {
                PsiInput::State => net(slot, th, x),
                PsiInput::StateInput => net(slot, th, &cat(&[x, u])),
            },
        })
    }

    /// `(x+, y_hat) = (f_x(x, u, p), g_x(x, u, p))`.
    pub fn plant_step<T: Scalar>(&self, th: &[T], x: &[T], u: &[T], p: &[T]) -> (Vec<T>, Vec<T>) {
        let s = &self.structure;
        let uy: &[T] = if s.feedthrough { u } else { &[] };
        match &self.layout.plant {
            PlantSlots::Matrices { a, b, c, d } => {
                let xn = lpv_mv(th, a, x, Some(b), u, p, s.nx);
                let y = lpv_mv(th, c, x, d.as_ref(), uy, p, s.ny);
                (xn, y)
            }
            PlantSlots::MatNet(slot) => {
                let m = net(slot, th, p);
                let (nx, nu, ny) = (s.nx, s.nu, s.ny);
                let (ma, rest) = m.split_at(nx * nx);
                let (mb, rest) = rest.split_at(nx * nu);
                let (mc, md) = rest.split_at(ny * nx);
                let xn = dense_mv(ma, x, mb, u, nx);
                let md: &[T] = if s.feedthrough { md } else { &[] };
                let y = dense_mv(mc, x, md, uy, ny);
                (xn, y)
            }
            PlantSlots::Nonlinear { fx, gx } => {
                let xn = net(fx, th, &cat(&[x, u]));
                let y = match gx {
                    OutputSlots::Linear { c, d } => (0..s.ny)
                        .map(|r| match d {
                            Some(d) => row2(row(th, *c, r, s.nx), x, row(th, *d, r, s.nu), u),
                            None => T::dot(row(th, *c, r, s.nx), x),
                        })
                        .collect(),
                    OutputSlots::Net(g) => {
                        if s.feedthrough {
                            net(g, th, &cat(&[x, u]))
                        } else {
                            net(g, th, x)
                        }
                    }
                };
                (xn, y)
            }
        }
    }

    /// Inverse-noise maps at one step: returns `(g_z(z, x, u), z+, v)` where
    /// `v = v_of(g_z)` feeds the state update `z+ = f_z(z, x, u, v)`.
    ///
    /// With `nz = 0` both maps vanish.
    pub fn noise_step<T: Scalar>(
        &self,
        th: &[T],
        z: &[T],
        x: &[T],
        u: &[T],
        p: &[T],
        v_of: impl FnOnce(&[T]) -> Vec<T>,
    ) -> (Vec<T>, Vec<T>, Vec<T>) {
        let s = &self.structure;
        let (nz, ny) = (s.nz, s.ny);
        match &self.layout.noise {
            NoiseSlots::None => {
                let g = vec![T::zero(); ny];
                let v = v_of(&g);
                (g, Vec::new(), v)
            }
            NoiseSlots::Matrices { az, bz, cz } => {
                let pz: &[T] = if az.0.len() > 1 { p } else { &[] };
                let g = lpv_mv(th, cz, z, None, &[], pz, ny);
                let v = v_of(&g);
                let zn = lpv_mv(th, az, z, Some(bz), &v, pz, nz);
                (g, zn, v)
            }
            NoiseSlots::MatNet(slot) => {
                let m = net(slot, th, p);
                let (maz, rest) = m.split_at(nz * nz);
                let (mbz, mcz) = rest.split_at(nz * ny);
                let g = dense_mv(mcz, z, &[], &[], ny);
                let v = v_of(&g);
                let zn = dense_mv(maz, z, mbz, &v, nz);
                (g, zn, v)
            }
            NoiseSlots::Nets { fz, gz } => {
                let zero_z = vec![T::zero(); nz];
                let g1 = net(gz, th, &cat(&[z, x, u]));
                let g0 = net(gz, th, &cat(&[&zero_z, x, u]));
                let g: Vec<T> = g1.iter().zip(&g0).map(|(&a, &b)| a - b).collect();
                let v = v_of(&g);
                let zero_v = vec![T::zero(); ny];
                let f1 = net(fz, th, &cat(&[z, x, u, &v]));
                let f0 = net(fz, th, &cat(&[&zero_z, x, u, &zero_v]));
                let zn = f1.iter().zip(&f0).map(|(&a, &b)| a - b).collect();
                (g, zn, v)
            }
        }
    }

    /// `Hθ⁻¹` at one step: `(z+, e)` with `e = g_z(z, x, u) + v`.
    pub fn noise_inverse_step<T: Scalar>(&self, th: &[T], z: &[T], x: &[T], u: &[T], v: &[T], p: &[T]) -> (Vec<T>, Vec<T>) {
        let (g, zn, _) = self.noise_step(th, z, x, u, p, |_| v.to_vec());
        let e = g.iter().zip(v).map(|(&g, &v)| g + v).collect();
        (zn, e)
    }

    /// `Hθ` at one step: `(z+, v)` with `v = e - g_z(z, x, u)`.
    pub fn noise_forward_step<T: Scalar>(&self, th: &[T], z: &[T], x: &[T], u: &[T], e: &[T], p: &[T]) -> (Vec<T>, Vec<T>) {
        let (_, zn, v) = self.noise_step(th, z, x, u, p, |g| e.iter().zip(g).map(|(&e, &g)| e - g).collect());
        (zn, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::structure::{MatrixFn, Noise, Plant};

    fn set(m: &Model, p: &mut [f64], name: &str, vals: &[f64]) {
        let b = m.layout.block(name).unwrap();
        p[b.range()].copy_from_slice(vals);
    }

    #[test]
    fn identity_dynamics() {
        let m = Model::new(ModelStructure::lti(2, 0, 1, 1)).unwrap();
        let mut p = vec![0.0; m.n_params()];
        set(&m, &mut p, "A0", &[1.0, 0.0, 0.0, 1.0]);
        set(&m, &mut p, "C0", &[0.0, 1.0]);
        let (xn, y) = m.plant_step(&p, &[3.0, 4.0], &[1.0], &[]);
        assert_eq!(xn, vec![3.0, 4.0]);
        assert_eq!(y, vec![4.0]);
    }

    #[test]
    fn affine_lpv_step() {
        let ms = ModelStructure {
            plant: Plant::LpvExternal {
                np: 1,
                matrices: MatrixFn::Affine,
            },
            ..ModelStructure::lti(2, 0, 1, 1)
        };
        let m = Model::new(ms).unwrap();
        let mut p = vec![0.0; m.n_params()];
        set(&m, &mut p, "A0", &[0.5, 0.0, 0.0, 0.5]);
        set(&m, &mut p, "A1", &[0.1, 0.0, 0.0, 0.1]);
        let sched = m.schedule(&p, &[1.0, 1.0], &[0.0], Some(&[2.0])).unwrap();
        let (xn, _) = m.plant_step(&p, &[1.0, 1.0], &[0.0], &sched);
        assert!((xn[0] - 0.7).abs() < 1e-15 && (xn[1] - 0.7).abs() < 1e-15);
        assert!(matches!(m.schedule(&p, &[1.0, 1.0], &[0.0], None), Err(Error::MissingScheduling)));
    }

    #[test]
    fn scalar_noise_recursions() {
        let m = Model::new(ModelStructure::lti(1, 1, 1, 1)).unwrap();
        let mut p = vec![0.0; m.n_params()];
        set(&m, &mut p, "Az0", &[0.5]);
        set(&m, &mut p, "Bz0", &[1.0]);
        set(&m, &mut p, "Cz0", &[0.3]);
        let (zn, e) = m.noise_inverse_step(&p, &[0.0], &[0.0], &[0.0], &[1.0], &[]);
        assert_eq!((zn, e), (vec![1.0], vec![1.0]));

        let mut z = vec![0.0];
        let mut vs = Vec::new();
        for e in [1.0, 0.0, 0.0] {
            let (zn, v) = m.noise_forward_step(&p, &z, &[0.0], &[0.0], &[e], &[]);
            vs.push(v[0]);
            z = zn;
        }
        let expect = [1.0, -0.3, -0.06];
        for (v, x) in vs.iter().zip(expect) {
            assert!((v - x).abs() < 1e-15, "{vs:?}");
        }

        let mut z = vec![0.0];
        for (k, v) in vs.iter().enumerate() {
            let (zn, e) = m.noise_inverse_step(&p, &z, &[0.0], &[0.0], &[*v], &[]);
            assert!((e[0] - [1.0, 0.0, 0.0][k]).abs() < 1e-15);
            z = zn;
        }
    }

    #[test]
    fn oe_noise_is_identity() {
        let m = Model::new(ModelStructure::lti(2, 0, 1, 1)).unwrap();
        let p = vec![0.3; m.n_params()];
        let (zn, e) = m.noise_inverse_step(&p, &[], &[1.0, 2.0], &[1.0], &[0.7], &[]);
        assert!(zn.is_empty());
        assert_eq!(e, vec![0.7]);
    }

    #[test]
    fn sinc_limit_and_values() {
        assert_eq!(sinc(0.0), 1.0);
        for x in [1e-6, 5e-5, 1e-4, 0.3, -2.0] {
            assert!((sinc(x) - if x.abs() < 1e-3 { 1.0 - x * x / 6.0 } else { x.sin() / x }).abs() < 1e-15);
        }
    }

    #[test]
    fn lpv_noise_needs_lpv_plant() {
        let ms = ModelStructure {
            noise: Noise::Lpv {
                matrices: MatrixFn::Affine,
            },
            ..ModelStructure::lti(2, 1, 1, 1)
        };
        assert!(Model::new(ms).is_err());
    }
}
