//! The NADE-k network: shared-weight encoder/decoder applied `k` times, with
//! observed components clamped to their values after every step.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::{clamp_prob, sigmoid, Matrix, Rng};

/// Hidden-layer nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    #[default]
    Tanh,
    Sigmoid,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => sigmoid(x),
        }
    }

    /// Derivative expressed through the activation's output `y = φ(x)`.
    #[inline]
    pub fn derivative_at_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Sigmoid => y * (1.0 - y),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
        })
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Activation::Tanh),
            "sigmoid" => Ok(Activation::Sigmoid),
            other => Err(Error::Config(format!("unknown activation {other:?}"))),
        }
    }
}

/// Architecture of a NADE-k model.
///
/// `hidden2` is present exactly for the three-layer structure (`n = 3`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructureConfig {
    pub dim: usize,
    pub k: usize,
    pub hidden1: usize,
    pub hidden2: Option<usize>,
    pub activation: Activation,
}

impl StructureConfig {
    pub fn two_layer(dim: usize, hidden: usize, k: usize) -> Self {
        StructureConfig {
            dim,
            k,
            hidden1: hidden,
            hidden2: None,
            activation: Activation::Tanh,
        }
    }

    pub fn three_layer(dim: usize, hidden1: usize, hidden2: usize, k: usize) -> Self {
        StructureConfig {
            hidden2: Some(hidden2),
            ..StructureConfig::two_layer(dim, hidden1, k)
        }
    }

    pub fn with_activation(mut self, activation: Activation) -> Self {
        self.activation = activation;
        self
    }

    /// Layers per iteration: 2 or 3.
    pub fn layers(&self) -> usize {
        if self.hidden2.is_some() {
            3
        } else {
            2
        }
    }

    /// Width of the layer feeding the decoder.
    pub fn top_hidden(&self) -> usize {
        self.hidden2.unwrap_or(self.hidden1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Config("input dimensionality must be >= 1".into()));
        }
        if self.k == 0 {
            return Err(Error::Config("iteration count k must be >= 1".into()));
        }
        if self.hidden1 == 0 || self.hidden2 == Some(0) {
            return Err(Error::Config("hidden layer sizes must be >= 1".into()));
        }
        Ok(())
    }
}

/// Weights of the optional second hidden layer.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondLayer {
    pub w2: Matrix,
    pub c2: Vec<f64>,
}

/// All learned tensors. The same tensors are reused at every iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Encoder, `hidden1 × dim`.
    pub w: Matrix,
    pub c: Vec<f64>,
    pub second: Option<SecondLayer>,
    /// Decoder, `dim × top_hidden`.
    pub v: Matrix,
    pub b: Vec<f64>,
}

/// A borrowed parameter tensor together with its role.
pub struct Tensor<'a> {
    pub name: &'static str,
    pub data: &'a [f64],
    pub is_weight: bool,
}

pub struct TensorMut<'a> {
    pub name: &'static str,
    pub data: &'a mut [f64],
    pub is_weight: bool,
}

impl ModelParams {
    pub fn zeros(config: &StructureConfig) -> Self {
        let top = config.top_hidden();
        ModelParams {
            w: Matrix::zeros(config.hidden1, config.dim),
            c: vec![0.0; config.hidden1],
            second: config.hidden2.map(|h2| SecondLayer {
                w2: Matrix::zeros(h2, config.hidden1),
                c2: vec![0.0; h2],
            }),
            v: Matrix::zeros(config.dim, top),
            b: vec![0.0; config.dim],
        }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init(config: &StructureConfig, rng: &mut Rng) -> Result<Self> {
        config.validate()?;
        let mut params = ModelParams::zeros(config);
        let mut fill = |m: &mut Matrix| {
            let (rows, cols) = m.shape();
            let bound = glorot_bound(cols, rows);
            for x in m.as_mut_slice() {
                *x = rng.uniform(-bound, bound);
            }
        };
        fill(&mut params.w);
        if let Some(second) = params.second.as_mut() {
            fill(&mut second.w2);
        }
        fill(&mut params.v);
        Ok(params)
    }

    /// Tensors in checkpoint order: W, c, [W2, c2,] V, b.
    pub fn tensors(&self) -> Vec<Tensor<'_>> {
        let mut out = vec![
            Tensor { name: "W", data: self.w.as_slice(), is_weight: true },
            Tensor { name: "c", data: &self.c, is_weight: false },
        ];
        if let Some(s) = &self.second {
            out.push(Tensor { name: "W2", data: s.w2.as_slice(), is_weight: true });
            out.push(Tensor { name: "c2", data: &s.c2, is_weight: false });
        }
        out.push(Tensor { name: "V", data: self.v.as_slice(), is_weight: true });
        out.push(Tensor { name: "b", data: &self.b, is_weight: false });
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<TensorMut<'_>> {
        let mut out = vec![
            TensorMut { name: "W", data: self.w.as_mut_slice(), is_weight: true },
            TensorMut { name: "c", data: &mut self.c, is_weight: false },
        ];
        if let Some(s) = &mut self.second {
            out.push(TensorMut { name: "W2", data: s.w2.as_mut_slice(), is_weight: true });
            out.push(TensorMut { name: "c2", data: &mut s.c2, is_weight: false });
        }
        out.push(TensorMut { name: "V", data: self.v.as_mut_slice(), is_weight: true });
        out.push(TensorMut { name: "b", data: &mut self.b, is_weight: false });
        out
    }

    pub fn scalar_count(&self) -> usize {
        self.tensors().iter().map(|t| t.data.len()).sum()
    }

    pub fn check_shapes(&self, config: &StructureConfig) -> Result<()> {
        let expect = |name: &str, got: (usize, usize), want: (usize, usize)| {
            if got == want {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "{name} has shape {got:?}, structure requires {want:?}"
                )))
            }
        };
        expect("W", self.w.shape(), (config.hidden1, config.dim))?;
        expect("c", (self.c.len(), 1), (config.hidden1, 1))?;
        match (&self.second, config.hidden2) {
            (Some(s), Some(h2)) => {
                expect("W2", s.w2.shape(), (h2, config.hidden1))?;
                expect("c2", (s.c2.len(), 1), (h2, 1))?;
            }
            (None, None) => {}
            _ => return Err(Error::Config("second hidden layer presence mismatch".into())),
        }
        expect("V", self.v.shape(), (config.dim, config.top_hidden()))?;
        expect("b", (self.b.len(), 1), (config.dim, 1))?;
        Ok(())
    }
}

/// `√(6 / (fan_in + fan_out))`.
pub fn glorot_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Per-dimension mean of the training data, used to fill missing inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMean(Vec<f64>);

impl EmpiricalMean {
    pub fn new(mean: Vec<f64>) -> Result<Self> {
        if let Some(bad) = mean.iter().find(|m| !(0.0..=1.0).contains(*m)) {
            return Err(Error::contract(format!("mean entry {bad} outside [0, 1]")));
        }
        Ok(EmpiricalMean(mean))
    }

    pub fn uniform(dim: usize, value: f64) -> Result<Self> {
        EmpiricalMean::new(vec![value; dim])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Missingness mask; `true` marks a missing component.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mask(Vec<bool>);

impl Mask {
    pub fn new(missing: Vec<bool>) -> Self {
        Mask(missing)
    }

    /// Parse a 0/1 vector. Any other value is a contract violation.
    pub fn from_binary(values: &[f64]) -> Result<Self> {
        values
            .iter()
            .map(|&v| {
                if v == 1.0 {
                    Ok(true)
                } else if v == 0.0 {
                    Ok(false)
                } else {
                    Err(Error::contract(format!("mask entry {v} is not binary")))
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Mask)
    }

    pub fn all_missing(dim: usize) -> Self {
        Mask(vec![true; dim])
    }

    pub fn none_missing(dim: usize) -> Self {
        Mask(vec![false; dim])
    }

    /// Mask with exactly the listed indices missing.
    pub fn with_missing(dim: usize, missing: impl IntoIterator<Item = usize>) -> Self {
        let mut m = vec![false; dim];
        for i in missing {
            m[i] = true;
        }
        Mask(m)
    }

    #[inline]
    pub fn is_missing(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn missing_count(&self) -> usize {
        self.0.iter().filter(|&&m| m).count()
    }

    pub fn missing_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i)
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }
}

/// `v⁽⁰⁾ = m ⊙ mean + (1 − m) ⊙ x`.
pub fn build_input(x: &[f64], mask: &Mask, mean: &EmpiricalMean) -> Result<Vec<f64>> {
    let dim = x.len();
    if mask.len() != dim {
        return Err(Error::dim("build_input mask", dim, mask.len()));
    }
    if mean.len() != dim {
        return Err(Error::dim("build_input mean", dim, mean.len()));
    }
    Ok(x.iter()
        .zip(mask.as_slice())
        .zip(mean.as_slice())
        .map(|((&xi, &mi), &mu)| if mi { mu } else { xi })
        .collect())
}

/// Hidden activations at one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenState {
    pub h1: Vec<f64>,
    pub h2: Option<Vec<f64>>,
}

impl HiddenState {
    /// The layer the decoder reads from.
    pub fn top(&self) -> &[f64] {
        self.h2.as_deref().unwrap_or(&self.h1)
    }
}

/// Every intermediate state of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `v⁽⁰⁾ … v⁽ᵏ⁾`.
    pub v_states: Vec<Vec<f64>>,
    /// `h⁽¹⁾ … h⁽ᵏ⁾`.
    pub hidden: Vec<HiddenState>,
    pub mask: Mask,
    pub input: Vec<f64>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.hidden.len()
    }

    /// `v⁽ᵏ⁾`.
    pub fn output(&self) -> &[f64] {
        self.v_states.last().expect("trajectory always holds v0")
    }
}

/// Run `k` (or `k_override`) inference iterations.
pub fn forward(
    params: &ModelParams,
    config: &StructureConfig,
    x: &[f64],
    mask: &Mask,
    mean: &EmpiricalMean,
    k_override: Option<usize>,
) -> Result<Trajectory> {
    let steps = k_override.unwrap_or(config.k);
    if steps == 0 {
        return Err(Error::contract("iteration count must be >= 1"));
    }
    if x.len() != config.dim {
        return Err(Error::dim("forward input", config.dim, x.len()));
    }
    let v0 = build_input(x, mask, mean)?;
    let act = config.activation;

    let mut v_states = Vec::with_capacity(steps + 1);
    let mut hidden = Vec::with_capacity(steps);
    v_states.push(v0);
    for _ in 0..steps {
        let prev = v_states.last().expect("non-empty");
        let mut h1 = vec![0.0; config.hidden1];
        params.w.matvec_into(prev, &mut h1);
        for (h, &c) in h1.iter_mut().zip(&params.c) {
            *h = act.apply(*h + c);
        }
        let h2 = params.second.as_ref().map(|s| {
            let mut h2 = vec![0.0; s.c2.len()];
            s.w2.matvec_into(&h1, &mut h2);
            for (h, &c) in h2.iter_mut().zip(&s.c2) {
                *h = act.apply(*h + c);
            }
            h2
        });
        let state = HiddenState { h1, h2 };

        let mut v = vec![0.0; config.dim];
        params.v.matvec_into(state.top(), &mut v);
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = if mask.is_missing(i) {
                sigmoid(*vi + params.b[i])
            } else {
                x[i]
            };
        }
        hidden.push(state);
        v_states.push(v);
    }

    Ok(Trajectory {
        v_states,
        hidden,
        mask: mask.clone(),
        input: x.to_vec(),
    })
}

/// `p(xᵢ = 1 | x_obs)` for each missing `i`, read from `v⁽ᵏ⁾` and clamped.
pub fn conditional_probs(traj: &Trajectory) -> Vec<(usize, f64)> {
    let out = traj.output();
    traj.mask
        .missing_indices()
        .map(|i| (i, clamp_prob(out[i])))
        .collect()
}

/// A structure, its parameters and the mean used to impute missing inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: StructureConfig,
    pub params: ModelParams,
    pub mean: EmpiricalMean,
}

impl Model {
    pub fn new(config: StructureConfig, params: ModelParams, mean: EmpiricalMean) -> Result<Self> {
        config.validate()?;
        params.check_shapes(&config)?;
        if mean.len() != config.dim {
            return Err(Error::dim("model mean", config.dim, mean.len()));
        }
        Ok(Model {
            config,
            params,
            mean,
        })
    }

    pub fn initialized(config: StructureConfig, mean: EmpiricalMean, rng: &mut Rng) -> Result<Self> {
        let params = ModelParams::init(&config, rng)?;
        Model::new(config, params, mean)
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn forward(&self, x: &[f64], mask: &Mask, k_override: Option<usize>) -> Result<Trajectory> {
        forward(&self.params, &self.config, x, mask, &self.mean, k_override)
    }
}
