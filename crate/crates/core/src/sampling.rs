//! Ancestral sampling along an ordering, sampling from the ordering mixture
//! and conditional sampling of missing components.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evaluation::{conditional_ordering, Ordering};
use crate::model::{Mask, Model};
use crate::numerics::{clamp_prob, Rng};

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub vectors: Vec<Vec<f64>>,
    pub orderings_used: Vec<Ordering>,
}

impl SampleBatch {
    pub fn count(&self) -> usize {
        self.vectors.len()
    }
}

/// Draw positions `start..D` of `o` one at a time, each from its conditional
/// given everything before it. Positions before `start` are taken from `x`.
fn sample_along(
    model: &Model,
    o: &Ordering,
    start: usize,
    mut x: Vec<f64>,
    rng: &mut Rng,
    k_override: Option<usize>,
) -> Result<Vec<f64>> {
    let mut missing = vec![false; model.dim()];
    for &i in &o.as_slice()[start..] {
        missing[i] = true;
        x[i] = 0.0;
    }
    for &idx in &o.as_slice()[start..] {
        // recomputed from scratch at every position
        let traj = model.forward(&x, &Mask::new(missing.clone()), k_override)?;
        let p = clamp_prob(traj.output()[idx]);
        x[idx] = if rng.bernoulli(p) { 1.0 } else { 0.0 };
        missing[idx] = false;
    }
    Ok(x)
}

/// One exact sample from `p(x | o)`; performs exactly `D` forward passes.
pub fn ancestral_sample(model: &Model, o: &Ordering, rng: &mut Rng, k_override: Option<usize>) -> Result<Vec<f64>> {
    if o.len() != model.dim() {
        return Err(Error::dim("ordering", model.dim(), o.len()));
    }
    sample_along(model, o, 0, vec![0.0; model.dim()], rng, k_override)
}

/// `count` independent samples from the uniform mixture over all orderings.
///
/// Sample `i` uses its own stream `rng.substream(i)`, so the batch does not
/// depend on how work is scheduled across threads.
pub fn sample_from_mixture(model: &Model, count: usize, rng: &Rng, k_override: Option<usize>) -> Result<SampleBatch> {
    let drawn = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut r = rng.substream(i as u64);
            let o = Ordering::random(model.dim(), &mut r);
            let x = ancestral_sample(model, &o, &mut r, k_override)?;
            Ok((x, o))
        })
        .collect::<Result<Vec<_>>>()?;
    let (vectors, orderings_used) = drawn.into_iter().unzip();
    Ok(SampleBatch {
        vectors,
        orderings_used,
    })
}

/// Sample the components not listed in `observed` given the listed ones.
///
/// Observed entries of `x_obs` are copied to the output unchanged; the
/// values at unobserved positions are ignored.
pub fn inpaint(
    model: &Model,
    x_obs: &[f64],
    observed: &[usize],
    rng: &mut Rng,
    k_override: Option<usize>,
) -> Result<Vec<f64>> {
    let dim = model.dim();
    if x_obs.len() != dim {
        return Err(Error::dim("inpaint input", dim, x_obs.len()));
    }
    let o = conditional_ordering(dim, observed, rng)?;
    if observed.len() == dim {
        return Ok(x_obs.to_vec());
    }
    sample_along(model, &o, observed.len(), x_obs.to_vec(), rng, k_override)
}

/// Reconstructions `v⁽⁰⁾ … v⁽ᵏ⁾` of all unobserved components in parallel.
pub fn reconstruction_trace(
    model: &Model,
    x: &[f64],
    observed: &[usize],
    k_override: Option<usize>,
) -> Result<Vec<Vec<f64>>> {
    let dim = model.dim();
    if x.len() != dim {
        return Err(Error::dim("trace input", dim, x.len()));
    }
    let mut missing = vec![true; dim];
    for &i in observed {
        if i >= dim {
            return Err(Error::contract(format!("observed index {i} out of range 0..{dim}")));
        }
        missing[i] = false;
    }
    let traj = model.forward(x, &Mask::new(missing), k_override)?;
    Ok(traj.v_states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EmpiricalMean, ModelParams, StructureConfig};

    fn zero_model(dim: usize) -> Model {
        let cfg = StructureConfig::two_layer(dim, 2, 2);
        Model::new(cfg, ModelParams::zeros(&cfg), EmpiricalMean::uniform(dim, 0.5).unwrap()).unwrap()
    }

    #[test]
    fn zero_model_samples_fair_coins() {
        let model = zero_model(3);
        let mut rng = Rng::new(17);
        let o = Ordering::identity(3);
        let n = 100_000;
        let mut counts = [0usize; 8];
        for _ in 0..n {
            let x = ancestral_sample(&model, &o, &mut rng, None).unwrap();
            counts[crate::evaluation::table_index(&x)] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 0.125).abs() < 0.005);
        }
    }

    #[test]
    fn saturated_model_reproduces_its_mode() {
        let cfg = StructureConfig::two_layer(4, 2, 1);
        let mut params = ModelParams::zeros(&cfg);
        params.b = vec![100.0, -100.0, 100.0, -100.0];
        let model = Model::new(cfg, params, EmpiricalMean::uniform(4, 0.5).unwrap()).unwrap();
        let mut rng = Rng::new(0);
        for _ in 0..1000 {
            let o = Ordering::random(4, &mut rng);
            assert_eq!(ancestral_sample(&model, &o, &mut rng, None).unwrap(), vec![1.0, 0.0, 1.0, 0.0]);
        }
    }

    #[test]
    fn mixture_batch_is_deterministic() {
        let model = zero_model(5);
        let rng = Rng::new(4);
        let a = sample_from_mixture(&model, 7, &rng, None).unwrap();
        let b = sample_from_mixture(&model, 7, &rng, None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.count(), 7);
        let one = sample_from_mixture(&model, 1, &rng, None).unwrap();
        assert_eq!((one.vectors.len(), one.orderings_used.len()), (1, 1));
        assert_eq!(one.vectors[0], a.vectors[0]);
        assert!(a.vectors.iter().flatten().all(|&v| v == 0.0 || v == 1.0));
    }

    #[test]
    fn inpaint_keeps_observed_values() {
        let model = zero_model(6);
        let x = [1.0, 0.0, 1.0, 1.0, 0.0, 0.0];
        let all: Vec<usize> = (0..6).collect();
        assert_eq!(inpaint(&model, &x, &all, &mut Rng::new(1), None).unwrap(), x.to_vec());
        let mut rng = Rng::new(2);
        for _ in 0..50 {
            let out = inpaint(&model, &x, &[0, 3, 4], &mut rng, None).unwrap();
            assert_eq!((out[0], out[3], out[4]), (1.0, 1.0, 0.0));
            assert!(out.iter().all(|&v| v == 0.0 || v == 1.0));
        }
    }

    #[test]
    fn trace_has_k_plus_one_rows() {
        let model = zero_model(4);
        let rows = reconstruction_trace(&model, &[1.0, 0.0, 1.0, 0.0], &[0, 1], None).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[2], vec![1.0, 0.0, 0.5, 0.5]);
    }
}
