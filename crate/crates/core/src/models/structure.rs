use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nets::{Activation, NetSpec};

/// Hidden part of a net; input and output widths follow from the model dimensions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetShape {
    #[serde(default)]
    pub hidden: Vec<usize>,
    #[serde(default)]
    pub activations: Vec<Activation>,
    #[serde(default)]
    pub bypass: bool,
}

impl NetShape {
    pub fn linear() -> Self {
        NetShape {
            hidden: Vec::new(),
            activations: Vec::new(),
            bypass: false,
        }
    }

    pub fn new(hidden: Vec<usize>, activations: Vec<Activation>) -> Self {
        NetShape {
            hidden,
            activations,
            bypass: false,
        }
    }

    pub fn spec(&self, n_in: usize, n_out: usize) -> NetSpec {
        let mut widths = Vec::with_capacity(self.hidden.len() + 2);
        widths.push(n_in);
        widths.extend_from_slice(&self.hidden);
        widths.push(n_out);
        NetSpec {
            widths,
            activations: self.activations.clone(),
            bypass: self.bypass,
        }
    }

    fn validate(&self, what: &str) -> Result<()> {
        if self.hidden.len() != self.activations.len() {
            return Err(Error::InvalidStructure(format!(
                "{what}: {} hidden layers but {} activations",
                self.hidden.len(),
                self.activations.len()
            )));
        }
        if self.hidden.contains(&0) {
            return Err(Error::InvalidStructure(format!("{what}: hidden layer of width 0")));
        }
        Ok(())
    }
}

/// How LPV matrices depend on the scheduling vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum MatrixFn {
    /// `M(p) = M_0 + sum_j p_j M_j`.
    Affine,
    /// Net from `p` to the stacked row-major blocks.
    Ffn(NetShape),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiInput {
    #[default]
    State,
    StateInput,
}

/// Scheduling map of a self-scheduled plant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum PsiMap {
    Net {
        shape: NetShape,
        #[serde(default)]
        input: PsiInput,
    },
    /// Fixed `p = sinc(x[state])`, no parameters. Used for truth models.
    Sinc { state: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum OutputMap {
    Linear,
    Net(NetShape),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family", deny_unknown_fields)]
pub enum Plant {
    Lti,
    LpvExternal {
        np: usize,
        matrices: MatrixFn,
    },
    LpvSelf {
        np: usize,
        matrices: MatrixFn,
        psi: PsiMap,
    },
    Nonlinear {
        fx: NetShape,
        gx: OutputMap,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family", deny_unknown_fields)]
pub enum Noise {
    Lti,
    /// Shares the plant's scheduling vector.
    Lpv { matrices: MatrixFn },
    /// Raw nets; the separation constraint is imposed by subtraction.
    Nonlinear { fz: NetShape, gz: NetShape },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Lti,
    LpvExternal,
    LpvSelf,
    Nonlinear,
}

/// One plant/inverse-noise model pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelStructure {
    pub nx: usize,
    pub nz: usize,
    pub nu: usize,
    pub ny: usize,
    /// Direct input-to-output term in the plant output map.
    #[serde(default)]
    pub feedthrough: bool,
    pub plant: Plant,
    pub noise: Noise,
}

impl ModelStructure {
    pub fn lti(nx: usize, nz: usize, nu: usize, ny: usize) -> Self {
        ModelStructure {
            nx,
            nz,
            nu,
            ny,
            feedthrough: false,
            plant: Plant::Lti,
            noise: Noise::Lti,
        }
    }

    pub fn family(&self) -> Family {
        match self.plant {
            Plant::Lti => Family::Lti,
            Plant::LpvExternal { .. } => Family::LpvExternal,
            Plant::LpvSelf { .. } => Family::LpvSelf,
            Plant::Nonlinear { .. } => Family::Nonlinear,
        }
    }

    pub fn np(&self) -> usize {
        match self.plant {
            Plant::LpvExternal { np, .. } | Plant::LpvSelf { np, .. } => np,
            _ => 0,
        }
    }

    pub fn needs_external_scheduling(&self) -> bool {
        matches!(self.plant, Plant::LpvExternal { .. })
    }

    /// Same structure with the noise model removed.
    pub fn plant_only(&self) -> Self {
        let mut s = self.clone();
        s.nz = 0;
        s
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidStructure(m));
        if self.nx == 0 {
            return bad("the plant needs at least one state".into());
        }
        if self.ny == 0 {
            return bad("at least one output is required".into());
        }
        match &self.plant {
            Plant::Lti => {}
            Plant::LpvExternal { np, matrices } => {
                if *np == 0 {
                    return bad("an LPV plant needs np >= 1".into());
                }
                if let MatrixFn::Ffn(s) = matrices {
                    s.validate("plant matrix net")?;
                }
            }
            Plant::LpvSelf { np, matrices, psi } => {
                if *np == 0 {
                    return bad("an LPV plant needs np >= 1".into());
                }
                if let MatrixFn::Ffn(s) = matrices {
                    s.validate("plant matrix net")?;
                }
                match psi {
                    PsiMap::Net { shape, .. } => shape.validate("scheduling map")?,
                    PsiMap::Sinc { state } => {
                        if *state >= self.nx {
                            return bad(format!("sinc scheduling on state {state} of {}", self.nx));
                        }
                        if *np != 1 {
                            return bad("sinc scheduling yields a single scheduling entry".into());
                        }
                    }
                }
            }
            Plant::Nonlinear { fx, gx } => {
                fx.validate("fx")?;
                if let OutputMap::Net(s) = gx {
                    s.validate("gx")?;
                }
            }
        }
        match &self.noise {
            Noise::Lti => {}
            Noise::Lpv { matrices } => {
                if self.np() == 0 {
                    return bad("an LPV noise model needs an LPV plant".into());
                }
                if let MatrixFn::Ffn(s) = matrices {
                    s.validate("noise matrix net")?;
                }
            }
            Noise::Nonlinear { fz, gz } => {
                fz.validate("fz")?;
                gz.validate("gz")?;
            }
        }
        Ok(())
    }

    /// Number of model parameters, excluding the initial state.
    pub fn n_theta(&self) -> usize {
        super::Layout::new(self).n_theta()
    }

    pub fn n_w0(&self) -> usize {
        self.nx + self.nz
    }
}
