//! Feedforward networks with a linear output layer and optional linear bypass.
//!
//! A [`NetSpec`] describes the shape only; parameters live in a flat slice so
//! the same net can be evaluated on `f64` values or on tape variables taken
//! straight out of a model's parameter vector. Per layer the slice holds the
//! weight matrix (row-major, `n_out x n_in`) followed by the bias; the bypass
//! matrix, when present, comes last.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::diff::Scalar;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Sigmoid,
    Swish,
    Tanh,
}

impl Activation {
    #[inline]
    pub fn apply<T: Scalar>(self, x: T) -> T {
        match self {
            Activation::Sigmoid => x.sigmoid(),
            Activation::Swish => x.swish(),
            Activation::Tanh => x.tanh(),
        }
    }
}

/// Weight initialization scheme. Biases always start at zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InitScheme {
    /// Zero-mean normal weights; `sigma = None` means `1/sqrt(fan_in)`.
    Normal { sigma: Option<f64> },
    /// Zero-mean normal with variance `2 / (fan_in + fan_out)`.
    Xavier,
}

impl Default for InitScheme {
    fn default() -> Self {
        InitScheme::Normal { sigma: None }
    }
}

impl InitScheme {
    fn std_dev(self, fan_in: usize, fan_out: usize) -> f64 {
        match self {
            InitScheme::Normal { sigma: Some(s) } => s,
            InitScheme::Normal { sigma: None } => 1.0 / (fan_in.max(1) as f64).sqrt(),
            InitScheme::Xavier => (2.0 / (fan_in + fan_out).max(1) as f64).sqrt(),
        }
    }
}

/// Shape of a feedforward net: `widths = [n_in, h1, ..., n_out]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetSpec {
    pub widths: Vec<usize>,
    /// One tag per hidden layer, `widths.len() - 2` entries.
    #[serde(default)]
    pub activations: Vec<Activation>,
    #[serde(default)]
    pub bypass: bool,
}

impl NetSpec {
    pub fn new(widths: Vec<usize>, activations: Vec<Activation>, bypass: bool) -> Result<Self> {
        let s = NetSpec {
            widths,
            activations,
            bypass,
        };
        s.validate()?;
        Ok(s)
    }

    /// Single affine layer.
    pub fn linear(n_in: usize, n_out: usize) -> Self {
        NetSpec {
            widths: vec![n_in, n_out],
            activations: Vec::new(),
            bypass: false,
        }
    }

    /// Hidden layers of the given widths, all sharing one activation.
    pub fn mlp(n_in: usize, hidden: &[usize], n_out: usize, act: Activation) -> Self {
        let mut widths = vec![n_in];
        widths.extend_from_slice(hidden);
        widths.push(n_out);
        NetSpec {
            widths,
            activations: vec![act; hidden.len()],
            bypass: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.widths.len() < 2 {
            return Err(Error::InvalidStructure(
                "a net needs at least input and output widths".into(),
            ));
        }
        if self.widths[1..self.widths.len() - 1].contains(&0) {
            return Err(Error::InvalidStructure("hidden layer of width 0".into()));
        }
        if self.activations.len() != self.widths.len() - 2 {
            return Err(Error::InvalidStructure(format!(
                "{} hidden layers but {} activation tags",
                self.widths.len() - 2,
                self.activations.len()
            )));
        }
        Ok(())
    }

    pub fn n_in(&self) -> usize {
        self.widths[0]
    }

    pub fn n_out(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn n_layers(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn n_params(&self) -> usize {
        let layers: usize = self.widths.windows(2).map(|w| w[1] * (w[0] + 1)).sum();
        layers + if self.bypass { self.n_in() * self.n_out() } else { 0 }
    }

    /// Offset of layer `l`'s weights, followed by its bias.
    pub fn layer_offset(&self, l: usize) -> usize {
        self.widths[..=l]
            .windows(2)
            .map(|w| w[1] * (w[0] + 1))
            .sum()
    }

    /// Offset of the bypass matrix (only meaningful when `bypass` is set).
    pub fn bypass_offset(&self) -> usize {
        self.layer_offset(self.n_layers())
    }

    /// Range of the output layer's weights and bias in the parameter slice.
    pub fn output_layer_range(&self) -> std::ops::Range<usize> {
        let l = self.n_layers() - 1;
        self.layer_offset(l)..self.layer_offset(l + 1)
    }

    /// Evaluate the net. `params.len()` must equal [`n_params`](Self::n_params).
    pub fn forward<T: Scalar>(&self, params: &[T], x: &[T]) -> Vec<T> {
        debug_assert_eq!(params.len(), self.n_params());
        debug_assert_eq!(x.len(), self.n_in());
        let mut h: Vec<T> = x.to_vec();
        let mut off = 0;
        let last = self.n_layers() - 1;
        for l in 0..=last {
            let (ni, no) = (self.widths[l], self.widths[l + 1]);
            let w = &params[off..off + no * ni];
            let b = &params[off + no * ni..off + no * (ni + 1)];
            off += no * (ni + 1);
            let mut next = Vec::with_capacity(no);
            for r in 0..no {
                let a = T::affine(b[r], &w[r * ni..(r + 1) * ni], &h);
                next.push(if l < last { self.activations[l].apply(a) } else { a });
            }
            h = next;
        }
        if self.bypass {
            let (ni, no) = (self.n_in(), self.n_out());
            let bp = &params[off..off + no * ni];
            for r in 0..no {
                h[r] = h[r] + T::dot(&bp[r * ni..(r + 1) * ni], x);
            }
        }
        h
    }

    /// Draw a parameter vector: zero biases, weights (and bypass) per `scheme`.
    pub fn init_params<R: Rng + ?Sized>(&self, scheme: InitScheme, rng: &mut R) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.n_params());
        for w in self.widths.windows(2) {
            let (ni, no) = (w[0], w[1]);
            push_normal(&mut p, no * ni, scheme.std_dev(ni, no), rng);
            p.extend(std::iter::repeat_n(0.0, no));
        }
        if self.bypass {
            let (ni, no) = (self.n_in(), self.n_out());
            push_normal(&mut p, no * ni, scheme.std_dev(ni, no), rng);
        }
        p
    }
}

fn push_normal<R: Rng + ?Sized>(out: &mut Vec<f64>, n: usize, sd: f64, rng: &mut R) {
    if sd > 0.0 && sd.is_finite() {
        let d = Normal::new(0.0, sd).expect("finite positive std-dev");
        out.extend((0..n).map(|_| d.sample(rng)));
    } else {
        out.extend(std::iter::repeat_n(0.0, n));
    }
}

/// A net together with its own parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeedforwardNet {
    pub spec: NetSpec,
    pub params: Vec<f64>,
}

impl FeedforwardNet {
    pub fn new(spec: NetSpec, params: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if params.len() != spec.n_params() {
            return Err(Error::dims("net parameters", spec.n_params(), params.len()));
        }
        Ok(FeedforwardNet { spec, params })
    }

    pub fn zeros(spec: NetSpec) -> Result<Self> {
        let n = spec.n_params();
        Self::new(spec, vec![0.0; n])
    }

    /// Deterministic initialization from `seed`.
    pub fn init(spec: NetSpec, scheme: InitScheme, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let params = spec.init_params(scheme, &mut rng);
        Ok(FeedforwardNet { spec, params })
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.spec.n_in() {
            return Err(Error::dims("net input", self.spec.n_in(), x.len()));
        }
        let y = self.spec.forward(&self.params, x);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue("net output"));
        }
        Ok(y)
    }

    /// Weights of layer `l` (row-major) and its bias.
    pub fn layer(&self, l: usize) -> (&[f64], &[f64]) {
        let (ni, no) = (self.spec.widths[l], self.spec.widths[l + 1]);
        let off = self.spec.layer_offset(l);
        (
            &self.params[off..off + no * ni],
            &self.params[off + no * ni..off + no * (ni + 1)],
        )
    }

    pub fn layer_mut(&mut self, l: usize) -> (&mut [f64], &mut [f64]) {
        let (ni, no) = (self.spec.widths[l], self.spec.widths[l + 1]);
        let off = self.spec.layer_offset(l);
        let (w, rest) = self.params[off..off + no * (ni + 1)].split_at_mut(no * ni);
        (w, rest)
    }

    pub fn bypass_mut(&mut self) -> Option<&mut [f64]> {
        if !self.spec.bypass {
            return None;
        }
        let off = self.spec.bypass_offset();
        Some(&mut self.params[off..])
    }
}
