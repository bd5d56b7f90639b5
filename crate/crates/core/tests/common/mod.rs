#![allow(dead_code)]

use nadek::data::synthetic::PatternMixture;
use nadek::data::Dataset;
use nadek::evaluation::{table_index, Ordering};
use nadek::model::{EmpiricalMean, Model, ModelParams, StructureConfig};
use nadek::training::{loss, MaskSample, Objective};
use nadek::Rng;

/// Model with every parameter drawn uniformly from `[-scale, scale]` and a
/// random imputation mean.
pub fn random_model(config: StructureConfig, seed: u64, scale: f64) -> Model {
    let mut rng = Rng::new(seed);
    let mut params = ModelParams::zeros(&config);
    for t in params.tensors_mut() {
        for x in t.data.iter_mut() {
            *x = rng.uniform(-scale, scale);
        }
    }
    let mean = EmpiricalMean::new((0..config.dim).map(|_| rng.next_f64()).collect()).unwrap();
    Model::new(config, params, mean).unwrap()
}

pub fn random_binary(dim: usize, rng: &mut Rng) -> Vec<f64> {
    (0..dim).map(|_| if rng.bernoulli(0.5) { 1.0 } else { 0.0 }).collect()
}

pub fn objective_value(model: &Model, x: &[f64], ms: &MaskSample, objective: Objective) -> f64 {
    let traj = model.forward(x, &ms.mask, None).unwrap();
    loss(&traj, x, ms, objective).unwrap()
}

/// Central finite differences of the objective, one coordinate at a time,
/// in the tensor order of `ModelParams::tensors`.
pub fn finite_difference(model: &Model, x: &[f64], ms: &MaskSample, objective: Objective, h: f64) -> Vec<f64> {
    let mut probe = model.clone();
    let counts: Vec<usize> = model.params.tensors().iter().map(|t| t.data.len()).collect();
    let mut out = Vec::new();
    for (ti, &n) in counts.iter().enumerate() {
        for j in 0..n {
            let orig = probe.params.tensors()[ti].data[j];
            probe.params.tensors_mut()[ti].data[j] = orig + h;
            let up = objective_value(&probe, x, ms, objective);
            probe.params.tensors_mut()[ti].data[j] = orig - h;
            let down = objective_value(&probe, x, ms, objective);
            probe.params.tensors_mut()[ti].data[j] = orig;
            out.push((up - down) / (2.0 * h));
        }
    }
    out
}

pub fn flatten(params: &ModelParams) -> Vec<f64> {
    params.tensors().iter().flat_map(|t| t.data.iter().copied()).collect()
}

/// Relative error `|a − b| / max(|a|, |b|, floor)`.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

pub fn empirical_table(samples: &[Vec<f64>], dim: usize) -> Vec<f64> {
    let mut counts = vec![0.0; 1 << dim];
    for s in samples {
        counts[table_index(s)] += 1.0;
    }
    let n = samples.len() as f64;
    counts.into_iter().map(|c| c / n).collect()
}

pub fn all_orderings(dim: usize) -> Vec<Ordering> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Ordering>) {
        if prefix.len() == used.len() {
            out.push(Ordering::new(prefix.clone()).unwrap());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; dim], &mut out);
    out
}

/// The desk-scale benchmark: 16-dim mixture of 4 prototypes with 5% flips.
pub struct ToyTask {
    pub mixture: PatternMixture,
    pub train: Dataset,
    pub valid: Dataset,
    pub test: Dataset,
}

pub fn toy_task(seed: u64) -> ToyTask {
    let root = Rng::new(seed);
    let mixture = PatternMixture::random(16, 4, 0.05, &mut root.stream("prototypes"));
    let mut rng = root.stream("samples");
    ToyTask {
        train: mixture.sample(2000, "toy-train", &mut rng),
        valid: mixture.sample(500, "toy-valid", &mut rng),
        test: mixture.sample(500, "toy-test", &mut rng),
        mixture,
    }
}

/// Mean test log-likelihood of independent Bernoulli marginals fit to `train`.
pub fn bernoulli_baseline(train: &Dataset, test: &Dataset) -> f64 {
    let marginals = nadek::data::empirical_mean(train).unwrap();
    let total: f64 = test
        .rows()
        .map(|x| {
            x.iter()
                .zip(marginals.as_slice())
                .map(|(&xi, &p)| {
                    let p = nadek::numerics::clamp_prob(p);
                    if xi == 1.0 { p.ln() } else { (1.0 - p).ln() }
                })
                .sum::<f64>()
        })
        .sum();
    total / test.len() as f64
}
