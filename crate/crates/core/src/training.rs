//! Order-agnostic training: mask sampling, the per-example objectives, exact
//! backpropagation through all unrolled iterations, AdaDelta and the epoch
//! loop with early stopping.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use crate::data::{minibatches, Dataset};
use crate::error::{Error, Result};
use crate::model::{Mask, Model, ModelParams, StructureConfig, Trajectory};
use crate::numerics::{clamp_prob, Rng, PROB_CLAMP};

pub type Gradients = ModelParams;

/// A missingness pattern drawn for the stochastic objective.
///
/// `d` is 1-based: the first `d − 1` positions of the implied ordering are
/// observed and the remaining `D − d + 1` are missing.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskSample {
    pub mask: Mask,
    pub d: usize,
}

impl MaskSample {
    /// Mask whose missing set is `ordering[d-1..]`.
    pub fn from_ordering(ordering: &[usize], d: usize) -> Result<Self> {
        let dim = ordering.len();
        if d == 0 || d > dim {
            return Err(Error::contract(format!("split position {d} outside 1..={dim}")));
        }
        Ok(MaskSample {
            mask: Mask::with_missing(dim, ordering[d - 1..].iter().copied()),
            d,
        })
    }

    pub fn dim(&self) -> usize {
        self.mask.len()
    }

    pub fn observed_count(&self) -> usize {
        self.d - 1
    }

    pub fn missing_count(&self) -> usize {
        self.dim() - self.d + 1
    }

    /// `D / (D − d + 1)`.
    pub fn scale(&self) -> f64 {
        self.dim() as f64 / self.missing_count() as f64
    }
}

/// Draw `d` uniformly from `1..=D` and a uniform random observed subset of
/// size `d − 1` (prefix of a Fisher–Yates shuffle).
pub fn sample_mask(rng: &mut Rng, dim: usize) -> MaskSample {
    assert!(dim >= 1, "sample_mask needs dim >= 1");
    let d = rng.below(dim as u64) as usize + 1;
    let ordering = rng.permutation(dim);
    MaskSample::from_ordering(&ordering, d).expect("d in range")
}

/// Which loss a gradient is taken of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Cross-entropy of the final reconstruction only.
    Finetune,
    /// Cross-entropy averaged over every intermediate reconstruction.
    Pretrain,
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::Finetune => "finetune",
            Objective::Pretrain => "pretrain",
        })
    }
}

fn cross_entropy(x: &[f64], v: &[f64], mask: &Mask) -> f64 {
    mask.missing_indices().fold(0.0, |acc, i| {
        let p = clamp_prob(v[i]);
        acc - if x[i] == 1.0 {
            p.ln()
        } else if x[i] == 0.0 {
            (1.0 - p).ln()
        } else {
            x[i] * p.ln() + (1.0 - x[i]) * (1.0 - p).ln()
        }
    })
}

fn check_traj(traj: &Trajectory, x: &[f64], ms: &MaskSample) -> Result<()> {
    if traj.mask != ms.mask {
        return Err(Error::contract("trajectory was computed under a different mask"));
    }
    if x.len() != ms.dim() {
        return Err(Error::dim("loss target", ms.dim(), x.len()));
    }
    Ok(())
}

/// `D/(D−d+1) · Σ_missing CE(xᵢ, v⁽ᵏ⁾ᵢ)`.
pub fn stochastic_loss(traj: &Trajectory, x: &[f64], ms: &MaskSample) -> Result<f64> {
    check_traj(traj, x, ms)?;
    Ok(ms.scale() * cross_entropy(x, traj.output(), &ms.mask))
}

/// Mean over `t = 1…k` of the scaled cross-entropy on `v⁽ᵗ⁾`.
pub fn pretrain_loss(traj: &Trajectory, x: &[f64], ms: &MaskSample) -> Result<f64> {
    check_traj(traj, x, ms)?;
    let k = traj.steps();
    let total = traj.v_states[1..]
        .iter()
        .fold(0.0, |acc, v| acc + cross_entropy(x, v, &ms.mask));
    Ok(ms.scale() * total / k as f64)
}

pub fn loss(traj: &Trajectory, x: &[f64], ms: &MaskSample, objective: Objective) -> Result<f64> {
    match objective {
        Objective::Finetune => stochastic_loss(traj, x, ms),
        Objective::Pretrain => pretrain_loss(traj, x, ms),
    }
}

/// Exact gradient of the chosen objective with respect to every parameter.
///
/// Gradients from every unrolled step accumulate into the shared tensors.
/// Observed coordinates are overwritten by the data after each step, so no
/// gradient flows through them.
pub fn backward(
    params: &ModelParams,
    config: &StructureConfig,
    traj: &Trajectory,
    x: &[f64],
    ms: &MaskSample,
    objective: Objective,
) -> Result<Gradients> {
    check_traj(traj, x, ms)?;
    params.check_shapes(config)?;
    let steps = traj.steps();
    let dim = config.dim;
    let act = config.activation;
    let scale = ms.scale();
    let mask = &ms.mask;

    let mut grads = ModelParams::zeros(config);
    // dL/dv⁽ᵗ⁾ arriving from later steps through the encoder
    let mut grad_v = vec![0.0; dim];
    let mut grad_z = vec![0.0; dim];
    let mut grad_top = vec![0.0; config.top_hidden()];
    let mut grad_h1 = vec![0.0; config.hidden1];

    for t in (1..=steps).rev() {
        let direct = match objective {
            Objective::Finetune if t == steps => scale,
            Objective::Finetune => 0.0,
            Objective::Pretrain => scale / steps as f64,
        };
        let v = &traj.v_states[t];
        for i in 0..dim {
            grad_z[i] = if mask.is_missing(i) {
                let s = v[i];
                // the clamped log has zero slope outside [PROB_CLAMP, 1 - PROB_CLAMP]
                let ce = if direct != 0.0 && (PROB_CLAMP..=1.0 - PROB_CLAMP).contains(&s) {
                    direct * (s - x[i])
                } else {
                    0.0
                };
                ce + grad_v[i] * s * (1.0 - s)
            } else {
                0.0
            };
        }

        let hidden = &traj.hidden[t - 1];
        for (gb, gz) in grads.b.iter_mut().zip(&grad_z) {
            *gb += gz;
        }
        grads.v.add_outer(&grad_z, hidden.top());
        params.v.tmatvec_into(&grad_z, &mut grad_top);

        match (&params.second, &mut grads.second, &hidden.h2) {
            (Some(p2), Some(g2), Some(h2)) => {
                for (g, &h) in grad_top.iter_mut().zip(h2) {
                    *g *= act.derivative_at_output(h);
                }
                for (gc, g) in g2.c2.iter_mut().zip(&grad_top) {
                    *gc += g;
                }
                g2.w2.add_outer(&grad_top, &hidden.h1);
                p2.w2.tmatvec_into(&grad_top, &mut grad_h1);
            }
            _ => grad_h1.copy_from_slice(&grad_top),
        }
        for (g, &h) in grad_h1.iter_mut().zip(&hidden.h1) {
            *g *= act.derivative_at_output(h);
        }
        for (gc, g) in grads.c.iter_mut().zip(&grad_h1) {
            *gc += g;
        }
        grads.w.add_outer(&grad_h1, &traj.v_states[t - 1]);
        if t > 1 {
            params.w.tmatvec_into(&grad_h1, &mut grad_v);
        }
    }
    Ok(grads)
}

/// Add `2λ·param` to the gradients of the weight matrices; biases untouched.
pub fn add_weight_decay(mut grads: Gradients, params: &ModelParams, lambda: f64) -> Gradients {
    if lambda == 0.0 {
        return grads;
    }
    for (g, p) in grads.tensors_mut().into_iter().zip(params.tensors()) {
        if g.is_weight {
            for (gi, &pi) in g.data.iter_mut().zip(p.data) {
                *gi += 2.0 * lambda * pi;
            }
        }
    }
    grads
}

/// Decayed running averages of squared gradients and squared updates.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaDeltaState {
    pub sq_grad: ModelParams,
    pub sq_update: ModelParams,
    pub rho: f64,
    pub epsilon: f64,
}

impl AdaDeltaState {
    pub const DEFAULT_RHO: f64 = 0.95;
    pub const DEFAULT_EPSILON: f64 = 1e-6;

    pub fn new(config: &StructureConfig, rho: f64, epsilon: f64) -> Self {
        AdaDeltaState {
            sq_grad: ModelParams::zeros(config),
            sq_update: ModelParams::zeros(config),
            rho,
            epsilon,
        }
    }

    /// Apply one update in place.
    pub fn step(&mut self, params: &mut ModelParams, grads: &Gradients) {
        let (rho, eps) = (self.rho, self.epsilon);
        let tensors = params
            .tensors_mut()
            .into_iter()
            .zip(grads.tensors())
            .zip(self.sq_grad.tensors_mut())
            .zip(self.sq_update.tensors_mut());
        for (((p, g), eg), ex) in tensors {
            for (((p, &g), eg), ex) in p
                .data
                .iter_mut()
                .zip(g.data)
                .zip(eg.data.iter_mut())
                .zip(ex.data.iter_mut())
            {
                *eg = rho * *eg + (1.0 - rho) * g * g;
                let delta = -((*ex + eps).sqrt() / (*eg + eps).sqrt()) * g;
                *ex = rho * *ex + (1.0 - rho) * delta * delta;
                *p += delta;
            }
        }
    }
}

/// Functional form of [`AdaDeltaState::step`].
pub fn adadelta_step(
    mut state: AdaDeltaState,
    mut params: ModelParams,
    grads: &Gradients,
) -> (ModelParams, AdaDeltaState) {
    state.step(&mut params, grads);
    (params, state)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub minibatch_size: usize,
    pub pretrain_epochs: usize,
    pub finetune_epochs: usize,
    pub weight_decay: f64,
    /// Stop fine-tuning after this many epochs without validation
    /// improvement. Zero disables early stopping.
    pub patience: usize,
    pub seed: u64,
    pub rho: f64,
    pub epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            minibatch_size: 100,
            pretrain_epochs: 0,
            finetune_epochs: 100,
            weight_decay: 0.0,
            patience: 0,
            seed: 0,
            rho: AdaDeltaState::DEFAULT_RHO,
            epsilon: AdaDeltaState::DEFAULT_EPSILON,
        }
    }
}

impl TrainConfig {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        if self.minibatch_size == 0 {
            return Err(Error::Config("minibatch size must be >= 1".into()));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::Config(format!("rho {} outside (0, 1)", self.rho)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config("epsilon must be positive".into()));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(Error::Config("weight decay must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainMode {
    PretrainThenFinetune,
    FinetuneOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Pretrain,
    Finetune,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Pretrain => "pretrain",
            Phase::Finetune => "finetune",
        })
    }
}

/// One line of the training history.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub phase: Phase,
    pub train_loss: f64,
    pub valid_loss: f64,
}

impl fmt::Display for EpochRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "epoch {} phase {} train {:.6} valid {:.6}",
            self.epoch, self.phase, self.train_loss, self.valid_loss
        )
    }
}

pub fn write_history(history: &[EpochRecord], out: &mut impl Write) -> std::io::Result<()> {
    for rec in history {
        writeln!(out, "{rec}")?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Model,
    pub history: Vec<EpochRecord>,
    /// Validation loss of the returned parameters, if any epoch ran.
    pub best_valid: Option<f64>,
    pub best_epoch: Option<usize>,
    pub epochs_completed: usize,
}

/// Validation score: mean stochastic loss under a fixed set of masks.
pub fn validation_loss(model: &Model, data: &Dataset, masks: &[MaskSample]) -> Result<f64> {
    let losses = (0..data.len())
        .into_par_iter()
        .map(|i| {
            let x = data.row(i);
            let traj = model.forward(x, &masks[i].mask, None)?;
            stochastic_loss(&traj, x, &masks[i])
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(losses.iter().sum::<f64>() / losses.len() as f64)
}

struct Trainer<'a> {
    train: &'a Dataset,
    config: &'a TrainConfig,
    mask_rng: Rng,
    shuffle_rng: Rng,
}

impl Trainer<'_> {
    /// One pass over the training set; returns the mean per-example loss.
    fn epoch(&mut self, model: &mut Model, opt: &mut AdaDeltaState, objective: Objective) -> Result<f64> {
        let dim = model.dim();
        let mut total = 0.0;
        for block in minibatches(self.train.len(), self.config.minibatch_size, &mut self.shuffle_rng, true) {
            let masks: Vec<MaskSample> = block.iter().map(|_| sample_mask(&mut self.mask_rng, dim)).collect();
            let model_ref = &*model;
            let per_example = block
                .par_iter()
                .zip(&masks)
                .map(|(&i, ms)| {
                    let x = self.train.row(i);
                    let traj = model_ref.forward(x, &ms.mask, None)?;
                    let l = loss(&traj, x, ms, objective)?;
                    let g = backward(&model_ref.params, &model_ref.config, &traj, x, ms, objective)?;
                    Ok((l, g))
                })
                .collect::<Result<Vec<_>>>()?;

            // reduce in sample order
            let mut sum = ModelParams::zeros(&model.config);
            for (l, g) in &per_example {
                total += l;
                for (acc, gi) in sum.tensors_mut().into_iter().zip(g.tensors()) {
                    for (a, &b) in acc.data.iter_mut().zip(gi.data) {
                        *a += b;
                    }
                }
            }
            let inv = 1.0 / block.len() as f64;
            for t in sum.tensors_mut() {
                for a in t.data.iter_mut() {
                    *a *= inv;
                }
            }
            let grads = add_weight_decay(sum, &model.params, self.config.weight_decay);
            opt.step(&mut model.params, &grads);
        }
        Ok(total / self.train.len() as f64)
    }
}

/// Train `model` on `train`, selecting parameters by validation score.
///
/// Randomness comes from named streams of `config.seed`: `"masks"` for
/// training masks, `"shuffle"` for minibatch order and `"valid-masks"` for
/// the fixed validation masks.
pub fn train(
    model: Model,
    train: &Dataset,
    valid: &Dataset,
    config: &TrainConfig,
    mode: TrainMode,
) -> Result<TrainOutcome> {
    config.validate()?;
    if train.is_empty() || valid.is_empty() {
        return Err(Error::contract("training and validation sets must be non-empty"));
    }
    for (name, d) in [("training", train), ("validation", valid)] {
        if d.dim() != model.dim() {
            return Err(Error::dim(if name == "training" { "training data" } else { "validation data" }, model.dim(), d.dim()));
        }
    }

    let root = Rng::new(config.seed);
    let mut valid_rng = root.stream("valid-masks");
    let valid_masks: Vec<MaskSample> = (0..valid.len()).map(|_| sample_mask(&mut valid_rng, model.dim())).collect();
    let mut trainer = Trainer {
        train,
        config,
        mask_rng: root.stream("masks"),
        shuffle_rng: root.stream("shuffle"),
    };

    let mut model = model;
    let mut history = Vec::new();
    let mut epoch = 0;

    if mode == TrainMode::PretrainThenFinetune && config.pretrain_epochs > 0 {
        let mut opt = AdaDeltaState::new(&model.config, config.rho, config.epsilon);
        for _ in 0..config.pretrain_epochs {
            epoch += 1;
            let train_loss = trainer.epoch(&mut model, &mut opt, Objective::Pretrain)?;
            let valid_loss = validation_loss(&model, valid, &valid_masks)?;
            history.push(EpochRecord { epoch, phase: Phase::Pretrain, train_loss, valid_loss });
        }
    }

    let mut best: Option<(f64, usize, ModelParams)> = None;
    let mut opt = AdaDeltaState::new(&model.config, config.rho, config.epsilon);
    let mut stale = 0;
    for _ in 0..config.finetune_epochs {
        epoch += 1;
        let train_loss = trainer.epoch(&mut model, &mut opt, Objective::Finetune)?;
        let valid_loss = validation_loss(&model, valid, &valid_masks)?;
        history.push(EpochRecord { epoch, phase: Phase::Finetune, train_loss, valid_loss });
        if best.as_ref().is_none_or(|(b, _, _)| valid_loss < *b) {
            best = Some((valid_loss, epoch, model.params.clone()));
            stale = 0;
        } else {
            stale += 1;
            if config.patience > 0 && stale >= config.patience {
                break;
            }
        }
    }

    let (best_valid, best_epoch) = match best {
        Some((loss, ep, params)) => {
            model.params = params;
            (Some(loss), Some(ep))
        }
        None => (history.last().map(|r: &EpochRecord| r.valid_loss), history.last().map(|r| r.epoch)),
    };
    Ok(TrainOutcome {
        model,
        history,
        best_valid,
        best_epoch,
        epochs_completed: epoch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EmpiricalMean;
    use std::f64::consts::LN_2;

    fn half_traj(dim: usize, ms: &MaskSample, k: usize) -> Trajectory {
        let cfg = StructureConfig::two_layer(dim, 2, k);
        let model = Model::new(cfg, ModelParams::zeros(&cfg), EmpiricalMean::uniform(dim, 0.5).unwrap()).unwrap();
        model.forward(&vec![1.0; dim], &ms.mask, None).unwrap()
    }

    #[test]
    fn mask_cardinality() {
        let ms = MaskSample::from_ordering(&[4, 0, 2, 1, 3], 3).unwrap();
        assert_eq!(ms.mask.missing_count(), 3);
        assert_eq!(ms.observed_count(), 2);
        let mut rng = Rng::new(0);
        for _ in 0..10 {
            let ms = sample_mask(&mut rng, 1);
            assert_eq!((ms.d, ms.mask.as_slice()), (1, &[true][..]));
        }
        for _ in 0..100 {
            let ms = sample_mask(&mut rng, 7);
            assert_eq!(ms.mask.missing_count(), 7 - ms.d + 1);
        }
    }

    #[test]
    fn missing_frequency_matches_expectation() {
        let mut rng = Rng::new(42);
        let mut counts = [0usize; 4];
        let n = 100_000;
        for _ in 0..n {
            for i in sample_mask(&mut rng, 4).mask.missing_indices() {
                counts[i] += 1;
            }
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 0.625).abs() < 0.01);
        }
    }

    #[test]
    fn loss_examples() {
        let ms = MaskSample::from_ordering(&[0, 1, 2, 3], 2).unwrap();
        let traj = half_traj(4, &ms, 1);
        let l = stochastic_loss(&traj, &[1.0; 4], &ms).unwrap();
        assert!((l - 4.0 * LN_2).abs() < 1e-12);
        assert!((l - 2.772_59).abs() < 1e-5);

        let ms = MaskSample::from_ordering(&[1, 0], 1).unwrap();
        let traj = half_traj(2, &ms, 1);
        assert!((stochastic_loss(&traj, &[1.0, 1.0], &ms).unwrap() - 1.386_29).abs() < 1e-5);

        let ms = MaskSample::from_ordering(&[0, 1, 2, 3], 2).unwrap();
        let traj = half_traj(4, &ms, 3);
        assert!((pretrain_loss(&traj, &[1.0; 4], &ms).unwrap() - 4.0 * LN_2).abs() < 1e-12);
    }

    #[test]
    fn perfect_reconstruction_has_near_zero_loss() {
        let ms = MaskSample::from_ordering(&[0, 1, 2], 1).unwrap();
        let x = [1.0, 0.0, 1.0];
        let mut traj = half_traj(3, &ms, 1);
        traj.v_states[1] = x.to_vec();
        let l = stochastic_loss(&traj, &x, &ms).unwrap();
        assert!(l > 0.0 && l < 1e-11);
    }

    #[test]
    fn loss_rejects_foreign_trajectory() {
        let ms = MaskSample::from_ordering(&[0, 1, 2], 1).unwrap();
        let other = MaskSample::from_ordering(&[0, 1, 2], 2).unwrap();
        let traj = half_traj(3, &other, 1);
        assert!(stochastic_loss(&traj, &[1.0; 3], &ms).is_err());
    }

    #[test]
    fn weight_decay_examples() {
        let cfg = StructureConfig::two_layer(1, 1, 1);
        let mut params = ModelParams::zeros(&cfg);
        params.w.set(0, 0, 1.0);
        params.c[0] = 3.0;
        params.b[0] = -2.0;
        let grads = ModelParams::zeros(&cfg);
        assert_eq!(add_weight_decay(grads.clone(), &params, 0.0), grads);
        let g = add_weight_decay(grads, &params, 0.5);
        assert_eq!(g.w.get(0, 0), 1.0);
        assert_eq!(g.c, vec![0.0]);
        assert_eq!(g.b, vec![0.0]);
    }

    #[test]
    fn adadelta_examples() {
        let cfg = StructureConfig::two_layer(1, 1, 1);
        let params = ModelParams::zeros(&cfg);
        let mut grads = ModelParams::zeros(&cfg);
        for t in grads.tensors_mut() {
            t.data.fill(1.0);
        }
        let state = AdaDeltaState::new(&cfg, 0.95, 1e-6);
        let (p, s) = adadelta_step(state.clone(), params.clone(), &grads);
        // sqrt(1e-6) / sqrt(0.05 + 1e-6)
        let expected = -(1e-6f64.sqrt() / (0.05f64 + 1e-6).sqrt());
        assert!((expected + 4.4719e-3).abs() < 1e-6);
        assert!((p.w.get(0, 0) - expected).abs() < 1e-15);
        assert!(s.sq_grad.b[0] > 0.0 && s.sq_update.b[0] > 0.0);

        let neg = {
            let mut g = grads.clone();
            for t in g.tensors_mut() {
                t.data.fill(-1.0);
            }
            g
        };
        let (pn, _) = adadelta_step(state.clone(), params.clone(), &neg);
        assert_eq!(pn.w.get(0, 0), -p.w.get(0, 0));

        let (p0, s0) = adadelta_step(s.clone(), p.clone(), &ModelParams::zeros(&cfg));
        assert_eq!(p0, p);
        assert_eq!(s0.sq_grad.b[0], 0.95 * s.sq_grad.b[0]);
    }

    #[test]
    fn zero_residual_gives_zero_bias_gradient() {
        let cfg = StructureConfig::two_layer(3, 2, 1);
        let mut params = ModelParams::zeros(&cfg);
        params.b = vec![200.0, -200.0, 200.0];
        let model = Model::new(cfg, params, EmpiricalMean::uniform(3, 0.5).unwrap()).unwrap();
        let x = [1.0, 0.0, 1.0];
        let ms = MaskSample::from_ordering(&[0, 1, 2], 1).unwrap();
        let traj = model.forward(&x, &ms.mask, None).unwrap();
        let g = backward(&model.params, &cfg, &traj, &x, &ms, Objective::Finetune).unwrap();
        assert!(g.b.iter().all(|v| v.abs() < 1e-11));
    }

    #[test]
    fn train_config_validation() {
        assert!(TrainConfig { minibatch_size: 0, ..Default::default() }.validate().is_err());
        assert!(TrainConfig { rho: 1.0, ..Default::default() }.validate().is_err());
        assert!(TrainConfig::default().validate().is_ok());
    }

    #[test]
    fn history_line_format() {
        let rec = EpochRecord { epoch: 3, phase: Phase::Finetune, train_loss: 1.0 / 3.0, valid_loss: 2.5 };
        assert_eq!(rec.to_string(), "epoch 3 phase finetune train 0.333333 valid 2.500000");
    }
}
