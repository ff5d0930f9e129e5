//! Flat parameter layout of a model structure.
//!
//! Every parameter belongs to a named block (a matrix, a net layer, or an
//! initial state). Block rows and columns carry axis tags so that per-state
//! groups, pruning and block transfer work the same way for every family.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::structure::{MatrixFn, ModelStructure, Noise, OutputMap, Plant, PsiInput, PsiMap};
use crate::diff::{ParamGroup, ParamVector};
use crate::error::{Error, Result};
use crate::nets::NetSpec;

/// A plant or noise state dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StateRef {
    X(usize),
    Z(usize),
}

impl std::fmt::Display for StateRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StateRef::X(i) => write!(f, "x{}", i + 1),
            StateRef::Z(i) => write!(f, "z{}", i + 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Axis {
    X,
    Z,
    U,
    Y,
    P,
    One,
    Hidden(usize),
    Cat(Vec<Axis>),
    /// Stacked row-major plant blocks `A, B, C[, D]`.
    MatX,
    /// Stacked row-major noise blocks `Az, Bz, Cz`.
    MatZ,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Dims {
    pub nx: usize,
    pub nz: usize,
    pub nu: usize,
    pub ny: usize,
    pub np: usize,
    pub feed: bool,
}

impl Dims {
    fn of(ms: &ModelStructure) -> Self {
        Dims {
            nx: ms.nx,
            nz: ms.nz,
            nu: ms.nu,
            ny: ms.ny,
            np: ms.np(),
            feed: ms.feedthrough,
        }
    }

    pub fn mat_x_len(&self) -> usize {
        self.nx * (self.nx + self.nu) + self.ny * self.nx + if self.feed { self.ny * self.nu } else { 0 }
    }

    pub fn mat_z_len(&self) -> usize {
        self.nz * self.nz + 2 * self.ny * self.nz
    }
}

fn mat_labels(out: &mut Vec<Vec<StateRef>>, rows: &[Option<StateRef>], cols: &[Option<StateRef>]) {
    for r in rows {
        for c in cols {
            out.push(r.iter().chain(c.iter()).copied().collect());
        }
    }
}

impl Axis {
    /// State dimensions touched by each index along the axis.
    pub(crate) fn labels(&self, d: &Dims) -> Vec<Vec<StateRef>> {
        let none = |n: usize| vec![Vec::new(); n];
        match self {
            Axis::X => (0..d.nx).map(|i| vec![StateRef::X(i)]).collect(),
            Axis::Z => (0..d.nz).map(|i| vec![StateRef::Z(i)]).collect(),
            Axis::U => none(d.nu),
            Axis::Y => none(d.ny),
            Axis::P => none(d.np),
            Axis::One => none(1),
            Axis::Hidden(n) => none(*n),
            Axis::Cat(parts) => parts.iter().flat_map(|a| a.labels(d)).collect(),
            Axis::MatX => {
                let x: Vec<_> = (0..d.nx).map(|i| Some(StateRef::X(i))).collect();
                let u = vec![None; d.nu];
                let y = vec![None; d.ny];
                let mut out = Vec::with_capacity(d.mat_x_len());
                mat_labels(&mut out, &x, &x);
                mat_labels(&mut out, &x, &u);
                mat_labels(&mut out, &y, &x);
                if d.feed {
                    mat_labels(&mut out, &y, &u);
                }
                out
            }
            Axis::MatZ => {
                let z: Vec<_> = (0..d.nz).map(|i| Some(StateRef::Z(i))).collect();
                let y = vec![None; d.ny];
                let mut out = Vec::with_capacity(d.mat_z_len());
                mat_labels(&mut out, &z, &z);
                mat_labels(&mut out, &z, &y);
                mat_labels(&mut out, &y, &z);
                out
            }
        }
    }

    pub(crate) fn len(&self, d: &Dims) -> usize {
        self.labels(d).len()
    }
}

/// A named row-major matrix of parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub name: String,
    pub group: &'static str,
    pub offset: usize,
    pub nrows: usize,
    pub ncols: usize,
    pub rows: Axis,
    pub cols: Axis,
}

impl Block {
    pub fn len(&self) -> usize {
        self.nrows * self.ncols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct NetSlot {
    pub offset: usize,
    pub spec: NetSpec,
}

impl NetSlot {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.spec.n_params()
    }
}

/// Offsets of the coefficient matrices `M_0..M_np`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Coeffs(pub Vec<usize>);

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum PlantSlots {
    Matrices {
        a: Coeffs,
        b: Coeffs,
        c: Coeffs,
        d: Option<Coeffs>,
    },
    MatNet(NetSlot),
    Nonlinear {
        fx: NetSlot,
        gx: OutputSlots,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum OutputSlots {
    Linear { c: usize, d: Option<usize> },
    Net(NetSlot),
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum PsiSlots {
    None,
    Net { net: NetSlot, input: PsiInput },
    Sinc(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum NoiseSlots {
    None,
    Matrices { az: Coeffs, bz: Coeffs, cz: Coeffs },
    MatNet(NetSlot),
    Nets { fz: NetSlot, gz: NetSlot },
}

/// Parameter layout: `theta` blocks first, then `x0`, then `z0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    pub(crate) dims: Dims,
    blocks: Vec<Block>,
    groups: Vec<ParamGroup>,
    n_theta: usize,
    pub(crate) plant: PlantSlots,
    pub(crate) psi: PsiSlots,
    pub(crate) noise: NoiseSlots,
    pub(crate) x0: usize,
    pub(crate) z0: usize,
}

struct Builder {
    dims: Dims,
    blocks: Vec<Block>,
    groups: Vec<ParamGroup>,
    next: usize,
}

impl Builder {
    fn group(&mut self, name: &'static str, body: impl FnOnce(&mut Self)) {
        let start = self.next;
        body(self);
        self.groups.push(ParamGroup {
            name: name.to_string(),
            start,
            len: self.next - start,
        });
    }

    fn block(&mut self, name: String, group: &'static str, rows: Axis, cols: Axis) -> usize {
        let (nrows, ncols) = (rows.len(&self.dims), cols.len(&self.dims));
        let offset = self.next;
        self.blocks.push(Block {
            name,
            group,
            offset,
            nrows,
            ncols,
            rows,
            cols,
        });
        self.next += nrows * ncols;
        offset
    }

    fn coeffs(&mut self, base: &str, group: &'static str, n: usize, rows: Axis, cols: Axis) -> Coeffs {
        Coeffs(
            (0..n)
                .map(|j| self.block(format!("{base}{j}"), group, rows.clone(), cols.clone()))
                .collect(),
        )
    }

    fn net(&mut self, name: &str, group: &'static str, spec: NetSpec, input: Axis, output: Axis) -> NetSlot {
        let offset = self.next;
        let nl = spec.n_layers();
        for l in 0..nl {
            let rows = if l + 1 == nl {
                output.clone()
            } else {
                Axis::Hidden(spec.widths[l + 1])
            };
            let cols = if l == 0 {
                input.clone()
            } else {
                Axis::Hidden(spec.widths[l])
            };
            self.block(format!("{name}.w{l}"), group, rows.clone(), cols);
            self.block(format!("{name}.b{l}"), group, rows, Axis::One);
        }
        if spec.bypass {
            self.block(format!("{name}.bypass"), group, output, input);
        }
        debug_assert_eq!(self.next - offset, spec.n_params());
        NetSlot { offset, spec }
    }
}

impl Layout {
    pub fn new(ms: &ModelStructure) -> Self {
        let d = Dims::of(ms);
        let mut b = Builder {
            dims: d,
            blocks: Vec::new(),
            groups: Vec::new(),
            next: 0,
        };
        let ncoef = d.np + 1;
        let xu = Axis::Cat(vec![Axis::X, Axis::U]);
        let gx_in = if d.feed { xu.clone() } else { Axis::X };

        let plant;
        let mut psi = PsiSlots::None;
        match &ms.plant {
            Plant::Lti | Plant::LpvExternal { matrices: MatrixFn::Affine, .. } | Plant::LpvSelf { matrices: MatrixFn::Affine, .. } => {
                let mut a = None;
                let mut bb = None;
                b.group("theta_x", |b| {
                    a = Some(b.coeffs("A", "theta_x", ncoef, Axis::X, Axis::X));
                    bb = Some(b.coeffs("B", "theta_x", ncoef, Axis::X, Axis::U));
                });
                let mut c = None;
                let mut dd = None;
                b.group("theta_y", |b| {
                    c = Some(b.coeffs("C", "theta_y", ncoef, Axis::Y, Axis::X));
                    if d.feed {
                        dd = Some(b.coeffs("D", "theta_y", ncoef, Axis::Y, Axis::U));
                    }
                });
                plant = Some(PlantSlots::Matrices {
                    a: a.unwrap(),
                    b: bb.unwrap(),
                    c: c.unwrap(),
                    d: dd,
                });
            }
            Plant::LpvExternal { matrices: MatrixFn::Ffn(shape), .. } | Plant::LpvSelf { matrices: MatrixFn::Ffn(shape), .. } => {
                b.group("theta_x", |_| {});
                b.group("theta_y", |_| {});
                let spec = shape.spec(d.np, d.mat_x_len());
                let mut slot = None;
                b.group("theta_mx", |b| slot = Some(b.net("mx", "theta_mx", spec, Axis::P, Axis::MatX)));
                plant = Some(PlantSlots::MatNet(slot.unwrap()));
            }
            Plant::Nonlinear { fx, gx } => {
                let mut fxs = None;
                b.group("theta_x", |b| {
                    fxs = Some(b.net("fx", "theta_x", fx.spec(d.nx + d.nu, d.nx), xu.clone(), Axis::X));
                });
                let mut gxs = None;
                b.group("theta_y", |b| {
                    gxs = Some(match gx {
                        OutputMap::Linear => OutputSlots::Linear {
                            c: b.block("C".into(), "theta_y", Axis::Y, Axis::X),
                            d: d.feed.then(|| b.block("D".into(), "theta_y", Axis::Y, Axis::U)),
                        },
                        OutputMap::Net(shape) => {
                            let n_in = if d.feed { d.nx + d.nu } else { d.nx };
                            OutputSlots::Net(b.net("gx", "theta_y", shape.spec(n_in, d.ny), gx_in.clone(), Axis::Y))
                        }
                    });
                });
                plant = Some(PlantSlots::Nonlinear {
                    fx: fxs.unwrap(),
                    gx: gxs.unwrap(),
                });
            }
        }
        if let Plant::LpvSelf { psi: map, .. } = &ms.plant {
            match map {
                PsiMap::Net { shape, input } => {
                    let (n_in, axis) = match input {
                        PsiInput::State => (d.nx, Axis::X),
                        PsiInput::StateInput => (d.nx + d.nu, xu.clone()),
                    };
                    let mut slot = None;
                    b.group("theta_psi", |b| {
                        slot = Some(b.net("psi", "theta_psi", shape.spec(n_in, d.np), axis, Axis::P));
                    });
                    psi = PsiSlots::Net {
                        net: slot.unwrap(),
                        input: *input,
                    };
                }
                PsiMap::Sinc { state } => psi = PsiSlots::Sinc(*state),
            }
        }

        let mut noise = NoiseSlots::None;
        if d.nz == 0 {
            b.group("theta_z", |_| {});
            b.group("theta_e", |_| {});
        } else {
            match &ms.noise {
                Noise::Lti | Noise::Lpv { matrices: MatrixFn::Affine } => {
                    let n = if matches!(ms.noise, Noise::Lti) { 1 } else { ncoef };
                    let mut az = None;
                    let mut bz = None;
                    let mut cz = None;
                    b.group("theta_z", |b| {
                        az = Some(b.coeffs("Az", "theta_z", n, Axis::Z, Axis::Z));
                        bz = Some(b.coeffs("Bz", "theta_z", n, Axis::Z, Axis::Y));
                    });
                    b.group("theta_e", |b| cz = Some(b.coeffs("Cz", "theta_e", n, Axis::Y, Axis::Z)));
                    noise = NoiseSlots::Matrices {
                        az: az.unwrap(),
                        bz: bz.unwrap(),
                        cz: cz.unwrap(),
                    };
                }
                Noise::Lpv { matrices: MatrixFn::Ffn(shape) } => {
                    b.group("theta_z", |_| {});
                    b.group("theta_e", |_| {});
                    let spec = shape.spec(d.np, d.mat_z_len());
                    let mut slot = None;
                    b.group("theta_mz", |b| slot = Some(b.net("mz", "theta_mz", spec, Axis::P, Axis::MatZ)));
                    noise = NoiseSlots::MatNet(slot.unwrap());
                }
                Noise::Nonlinear { fz, gz } => {
                    let fin = Axis::Cat(vec![Axis::Z, Axis::X, Axis::U, Axis::Y]);
                    let gin = Axis::Cat(vec![Axis::Z, Axis::X, Axis::U]);
                    let mut fzs = None;
                    let mut gzs = None;
                    b.group("theta_z", |b| {
                        fzs = Some(b.net("fz", "theta_z", fz.spec(d.nz + d.nx + d.nu + d.ny, d.nz), fin, Axis::Z));
                    });
                    b.group("theta_e", |b| {
                        gzs = Some(b.net("gz", "theta_e", gz.spec(d.nz + d.nx + d.nu, d.ny), gin, Axis::Y));
                    });
                    noise = NoiseSlots::Nets {
                        fz: fzs.unwrap(),
                        gz: gzs.unwrap(),
                    };
                }
            }
        }
        let n_theta = b.next;
        let mut x0 = 0;
        let mut z0 = 0;
        b.group("x0", |b| x0 = b.block("x0".into(), "x0", Axis::X, Axis::One));
        b.group("z0", |b| z0 = b.block("z0".into(), "z0", Axis::Z, Axis::One));

        Layout {
            dims: d,
            blocks: b.blocks,
            groups: b.groups,
            n_theta,
            plant: plant.unwrap(),
            psi,
            noise,
            x0,
            z0,
        }
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_w0(&self) -> usize {
        self.dims.nx + self.dims.nz
    }

    pub fn len(&self) -> usize {
        self.n_theta + self.n_w0()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, name: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.name == name)
    }

    pub fn groups(&self) -> &[ParamGroup] {
        &self.groups
    }

    /// Pack `theta` and `w0 = (x0, z0)` into one grouped vector.
    pub fn flatten(&self, theta: &[f64], w0: &[f64]) -> Result<ParamVector> {
        if theta.len() != self.n_theta {
            return Err(Error::dims("theta", self.n_theta, theta.len()));
        }
        if w0.len() != self.n_w0() {
            return Err(Error::dims("initial state", self.n_w0(), w0.len()));
        }
        let mut v = Vec::with_capacity(self.len());
        v.extend_from_slice(theta);
        v.extend_from_slice(w0);
        ParamVector::new(v, self.groups.clone())
    }

    /// Split a packed vector into `(theta, w0)`.
    pub fn unflatten(&self, p: &ParamVector) -> Result<(Vec<f64>, Vec<f64>)> {
        if p.len() != self.len() {
            return Err(Error::dims("parameter vector", self.len(), p.len()));
        }
        let v = p.values();
        Ok((v[..self.n_theta].to_vec(), v[self.n_theta..].to_vec()))
    }

    /// Indices of every parameter that reads from or writes to each state.
    ///
    /// Groups overlap: `A[i][j]` belongs to the groups of both `x_i`and `x_j`.
    pub fn state_groups(&self) -> Vec<(StateRef, Vec<usize>)> {
        let mut refs: Vec<StateRef> = (0..self.dims.nx).map(StateRef::X).collect();
        refs.extend((0..self.dims.nz).map(StateRef::Z));
        let mut members = vec![Vec::new(); refs.len()];
        let slot = |s: StateRef| match s {
            StateRef::X(i) => i,
            StateRef::Z(i) => self.dims.nx + i,
        };
        for blk in &self.blocks {
            let rl = blk.rows.labels(&self.dims);
            let cl = blk.cols.labels(&self.dims);
            for (r, rs) in rl.iter().enumerate() {
                for (c, cs) in cl.iter().enumerate() {
                    let idx = blk.offset + r * blk.ncols + c;
                    let touched: BTreeSet<StateRef> = rs.iter().chain(cs).copied().collect();
                    for s in touched {
                        members[slot(s)].push(idx);
                    }
                }
            }
        }
        refs.into_iter().zip(members).collect()
    }
}

/// Drop the states not listed in `keep_x` / `keep_z` together with every
/// parameter that touches them. The remaining parameters keep their values.
pub fn prune(
    ms: &ModelStructure,
    params: &[f64],
    keep_x: &[usize],
    keep_z: &[usize],
) -> Result<(ModelStructure, Vec<f64>)> {
    let old = Layout::new(ms);
    if params.len() != old.len() {
        return Err(Error::dims("parameter vector", old.len(), params.len()));
    }
    let kx: BTreeSet<usize> = keep_x.iter().copied().collect();
    let kz: BTreeSet<usize> = keep_z.iter().copied().collect();
    if kx.iter().any(|&i| i >= ms.nx) || kz.iter().any(|&i| i >= ms.nz) {
        return Err(Error::InvalidStructure("kept state index out of range".into()));
    }
    let mut new_ms = ms.clone();
    new_ms.nx = kx.len();
    new_ms.nz = kz.len();
    if let Plant::LpvSelf { psi: PsiMap::Sinc { state }, .. } = &mut new_ms.plant {
        if !kx.contains(state) {
            return Err(Error::InvalidStructure("pruning removes the scheduling state".into()));
        }
        *state = kx.range(..*state).count();
    }
    new_ms.validate()?;
    let new = Layout::new(&new_ms);
    let kept = |refs: &[StateRef]| {
        refs.iter().all(|s| match s {
            StateRef::X(i) => kx.contains(i),
            StateRef::Z(i) => kz.contains(i),
        })
    };
    let mut out = vec![0.0; new.len()];
    for blk in &old.blocks {
        let Some(dst) = new.block(&blk.name) else {
            // noise blocks vanish when every noise state is pruned
            continue;
        };
        let rows: Vec<usize> = blk
            .rows
            .labels(&old.dims)
            .iter()
            .enumerate()
            .filter(|(_, l)| kept(l))
            .map(|(i, _)| i)
            .collect();
        let cols: Vec<usize> = blk
            .cols
            .labels(&old.dims)
            .iter()
            .enumerate()
            .filter(|(_, l)| kept(l))
            .map(|(i, _)| i)
            .collect();
        if rows.len() != dst.nrows || cols.len() != dst.ncols {
            return Err(Error::InvalidStructure(format!("pruning block `{}` changed shape unexpectedly", blk.name)));
        }
        for (ri, &r) in rows.iter().enumerate() {
            for (ci, &c) in cols.iter().enumerate() {
                out[dst.offset + ri * dst.ncols + ci] = params[blk.offset + r * blk.ncols + c];
            }
        }
    }
    Ok((new_ms, out))
}

/// Copy every block that exists with the same name and shape in both layouts.
/// Returns the names of the copied blocks.
pub fn transfer_blocks(from: &Layout, src: &[f64], to: &Layout, dst: &mut [f64]) -> Vec<String> {
    let mut copied = Vec::new();
    for blk in &from.blocks {
        if let Some(t) = to.block(&blk.name) {
            if t.nrows == blk.nrows && t.ncols == blk.ncols {
                dst[t.range()].copy_from_slice(&src[blk.range()]);
                copied.push(blk.name.clone());
            }
        }
    }
    copied
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::structure::{NetShape, PsiInput};
    use crate::nets::Activation;

    fn self_scheduled(noise: Noise, nz: usize) -> ModelStructure {
        ModelStructure {
            nx: 2,
            nz,
            nu: 1,
            ny: 1,
            feedthrough: false,
            plant: Plant::LpvSelf {
                np: 1,
                matrices: MatrixFn::Affine,
                psi: PsiMap::Net {
                    shape: NetShape::new(vec![6, 6], vec![Activation::Sigmoid, Activation::Swish]),
                    input: PsiInput::State,
                },
            },
            noise,
        }
    }

    #[test]
    fn lti_counts() {
        let mut ms = ModelStructure::lti(2, 1, 1, 1);
        ms.feedthrough = true;
        let l = Layout::new(&ms);
        assert_eq!(l.n_theta(), 12);
        assert_eq!(l.n_w0(), 3);
        let len = |n: &str| l.groups().iter().find(|g| g.name == n).unwrap().len;
        assert_eq!((len("theta_x"), len("theta_y"), len("theta_z"), len("theta_e")), (6, 3, 2, 1));

        let oe = Layout::new(&ModelStructure::lti(2, 0, 1, 1));
        let len = |n: &str| oe.groups().iter().find(|g| g.name == n).unwrap().len;
        assert_eq!((len("theta_z"), len("theta_e"), len("z0")), (0, 0, 0));
    }

    #[test]
    fn disk_model_counts() {
        assert_eq!(self_scheduled(Noise::Lti, 0).n_theta(), 83);
        assert_eq!(self_scheduled(Noise::Lti, 1).n_theta(), 86);
        assert_eq!(
            self_scheduled(Noise::Lpv { matrices: MatrixFn::Affine }, 1).n_theta(),
            89
        );
        let nl = ModelStructure {
            nx: 2,
            nz: 0,
            nu: 1,
            ny: 1,
            feedthrough: false,
            plant: Plant::Nonlinear {
                fx: NetShape::new(vec![15, 10], vec![Activation::Swish; 2]),
                gx: OutputMap::Linear,
            },
            noise: Noise::Lti,
        };
        assert_eq!(nl.n_theta(), 244);
    }

    #[test]
    fn flatten_round_trip() {
        let ms = self_scheduled(Noise::Lpv { matrices: MatrixFn::Affine }, 1);
        let l = Layout::new(&ms);
        let theta: Vec<f64> = (0..l.n_theta()).map(|i| (i as f64 * 0.37).sin()).collect();
        let w0 = vec![0.1, -0.2, 0.3];
        let p = l.flatten(&theta, &w0).unwrap();
        let (t2, w2) = l.unflatten(&p).unwrap();
        assert_eq!(t2, theta);
        assert_eq!(w2, w0);
        assert!(l.flatten(&theta[1..], &w0).is_err());
    }

    #[test]
    fn groups_of_lti_state() {
        let l = Layout::new(&ModelStructure::lti(2, 1, 1, 1));
        let g = l.state_groups();
        assert_eq!(g.len(), 3);
        // x1: A row 1 + A col 1 (3 entries), B row 1, C col 1, x0[0]
        assert_eq!(g[0].0, StateRef::X(0));
        assert_eq!(g[0].1.len(), 3 + 1 + 1 + 1);
        // z1: Az, Bz, Cz, z0
        assert_eq!(g[2].1.len(), 4);
    }

    #[test]
    fn prune_keeps_values() {
        let ms = ModelStructure::lti(3, 1, 1, 1);
        let l = Layout::new(&ms);
        let p: Vec<f64> = (0..l.len()).map(|i| i as f64).collect();
        let (ms2, p2) = prune(&ms, &p, &[0, 2], &[]).unwrap();
        assert_eq!((ms2.nx, ms2.nz), (2, 0));
        let l2 = Layout::new(&ms2);
        let a = &p2[l2.block("A0").unwrap().range()];
        let a_old = &p[l.block("A0").unwrap().range()];
        assert_eq!(a, &[a_old[0], a_old[2], a_old[6], a_old[8]]);
        assert_eq!(&p2[l2.block("x0").unwrap().range()], &[p[l.x0], p[l.x0 + 2]]);
    }
}
