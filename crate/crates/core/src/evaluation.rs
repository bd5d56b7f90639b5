//! Exact likelihoods under a single ordering, ordering ensembles, exhaustive
//! enumeration and the spread of `log p(x|o)` over orderings and samples.

use std::collections::HashSet;
use std::io::Write;

use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{Mask, Model};
use crate::numerics::{clamp_prob, log_sum_exp, Matrix, Rng};

/// Largest dimensionality [`enumerate_distribution`] accepts.
pub const MAX_ENUMERATION_DIM: usize = 20;

/// A permutation of `0..D`; position `d` holds the index generated `d`-th.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ordering(Vec<usize>);

impl Ordering {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &i in &perm {
            if i >= perm.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::contract(format!("{perm:?} is not a permutation")));
            }
        }
        Ok(Ordering(perm))
    }

    pub fn identity(dim: usize) -> Self {
        Ordering((0..dim).collect())
    }

    pub fn random(dim: usize, rng: &mut Rng) -> Self {
        Ordering(rng.permutation(dim))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Ordering with the observed indices first, then the missing ones, each
/// group in a seeded random order.
pub fn conditional_ordering(dim: usize, observed: &[usize], rng: &mut Rng) -> Result<Ordering> {
    let mut is_obs = vec![false; dim];
    for &i in observed {
        if i >= dim {
            return Err(Error::contract(format!("observed index {i} out of range 0..{dim}")));
        }
        if std::mem::replace(&mut is_obs[i], true) {
            return Err(Error::contract(format!("observed index {i} listed twice")));
        }
    }
    let mut obs: Vec<usize> = (0..dim).filter(|&i| is_obs[i]).collect();
    let mut mis: Vec<usize> = (0..dim).filter(|&i| !is_obs[i]).collect();
    rng.shuffle(&mut obs);
    rng.shuffle(&mut mis);
    obs.extend(mis);
    Ok(Ordering(obs))
}

fn check_binary_input(model: &Model, x: &[f64]) -> Result<()> {
    if x.len() != model.dim() {
        return Err(Error::dim("evaluation input", model.dim(), x.len()));
    }
    if let Some(v) = x.iter().find(|&&v| v != 0.0 && v != 1.0) {
        return Err(Error::contract(format!("evaluation input value {v} is not binary")));
    }
    Ok(())
}

fn check_ordering(model: &Model, o: &Ordering) -> Result<()> {
    if o.len() != model.dim() {
        return Err(Error::dim("ordering", model.dim(), o.len()));
    }
    Ok(())
}

/// `log p(x | o) = Σ_d log p(x_{o_d} | x_{o<d})`, one forward per factor.
///
/// Only coordinate `o_d` of each forward's output is used.
pub fn log_prob_ordering(model: &Model, x: &[f64], o: &Ordering, k_override: Option<usize>) -> Result<f64> {
    check_binary_input(model, x)?;
    check_ordering(model, o)?;
    let dim = model.dim();
    let mut missing = vec![true; dim];
    let mut total = 0.0;
    for &idx in o.as_slice() {
        let mask = Mask::new(missing.clone());
        let traj = model.forward(x, &mask, k_override)?;
        let p = clamp_prob(traj.output()[idx]);
        total += if x[idx] == 1.0 { p.ln() } else { (1.0 - p).ln() };
        missing[idx] = false;
    }
    Ok(total)
}

/// A fixed set of orderings forming a uniform mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub orderings: Vec<Ordering>,
    pub seed: u64,
}

fn factorial_at_least(n: usize, bound: usize) -> bool {
    let mut f: usize = 1;
    for i in 2..=n {
        f = f.saturating_mul(i);
        if f >= bound {
            return true;
        }
    }
    f >= bound
}

impl EnsembleSpec {
    /// `count` distinct orderings drawn uniformly without replacement.
    pub fn draw(dim: usize, count: usize, seed: u64) -> Result<Self> {
        if count == 0 {
            return Err(Error::contract("an ensemble needs at least one ordering"));
        }
        if !factorial_at_least(dim, count) {
            return Err(Error::contract(format!("{dim}! < {count} distinct orderings requested")));
        }
        let mut rng = Rng::new(seed).stream("orderings");
        let mut seen = HashSet::new();
        let mut orderings = Vec::with_capacity(count);
        while orderings.len() < count {
            let o = Ordering::random(dim, &mut rng);
            if seen.insert(o.clone()) {
                orderings.push(o);
            }
        }
        Ok(EnsembleSpec { orderings, seed })
    }

    pub fn from_orderings(orderings: Vec<Ordering>) -> Result<Self> {
        let first = orderings
            .first()
            .ok_or_else(|| Error::contract("an ensemble needs at least one ordering"))?;
        if orderings.iter().any(|o| o.len() != first.len()) {
            return Err(Error::contract("orderings of unequal length"));
        }
        Ok(EnsembleSpec { orderings, seed: 0 })
    }

    pub fn len(&self) -> usize {
        self.orderings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orderings.is_empty()
    }
}

/// `log((1/|O|) Σ exp(lᵢ))` for per-ordering log-probabilities `lᵢ`.
pub fn mixture_of_logs(per_ordering: &[f64]) -> Result<f64> {
    Ok(log_sum_exp(per_ordering)? - (per_ordering.len() as f64).ln())
}

pub fn ensemble_log_prob(model: &Model, x: &[f64], spec: &EnsembleSpec, k_override: Option<usize>) -> Result<f64> {
    let logs = spec
        .orderings
        .iter()
        .map(|o| log_prob_ordering(model, x, o, k_override))
        .collect::<Result<Vec<_>>>()?;
    mixture_of_logs(&logs)
}

/// Per-sample, per-ordering `log p(x|o)` and their summary statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// Rows are samples, columns are orderings.
    pub log_probs: Matrix,
    /// `E_{o,x}[log p(x|o)]`.
    pub mean: f64,
    /// `√(E_x Var_o)`; absent with fewer than two orderings.
    pub sd_over_orderings: Option<f64>,
    /// `√(E_o Var_x)`; absent with fewer than two samples.
    pub sd_over_samples: Option<f64>,
}

fn unbiased_variance(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
}

impl EvalReport {
    pub fn from_matrix(log_probs: Matrix) -> Result<Self> {
        let (samples, orderings) = log_probs.shape();
        if samples == 0 || orderings == 0 {
            return Err(Error::contract("evaluation report needs at least one sample and one ordering"));
        }
        let mean = log_probs.as_slice().iter().sum::<f64>() / (samples * orderings) as f64;
        let sd_over_orderings = (orderings >= 2).then(|| {
            let e: f64 = log_probs
                .row_iter()
                .map(|row| unbiased_variance(row.iter().copied()))
                .sum::<f64>()
                / samples as f64;
            e.sqrt()
        });
        let sd_over_samples = (samples >= 2).then(|| {
            let e: f64 = (0..orderings)
                .map(|j| unbiased_variance((0..samples).map(|i| log_probs.get(i, j))))
                .sum::<f64>()
                / orderings as f64;
            e.sqrt()
        });
        Ok(EvalReport {
            log_probs,
            mean,
            sd_over_orderings,
            sd_over_samples,
        })
    }

    /// Mixture log-probability of each sample over the report's orderings.
    pub fn ensemble_per_sample(&self) -> Vec<f64> {
        self.log_probs
            .row_iter()
            .map(|row| mixture_of_logs(row).expect("non-empty row"))
            .collect()
    }

    pub fn mean_ensemble(&self) -> f64 {
        let e = self.ensemble_per_sample();
        e.iter().sum::<f64>() / e.len() as f64
    }

    /// Tab-separated table with a trailing `#` comment block of aggregates.
    pub fn write_text(&self, out: &mut impl Write) -> std::io::Result<()> {
        let header: Vec<String> = (0..self.log_probs.cols()).map(|j| format!("o{j}")).collect();
        writeln!(out, "{}", header.join("\t"))?;
        for row in self.log_probs.row_iter() {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", cells.join("\t"))?;
        }
        let opt = |v: Option<f64>| v.map_or_else(|| "absent".to_string(), |v| v.to_string());
        writeln!(out, "# samples {}", self.log_probs.rows())?;
        writeln!(out, "# orderings {}", self.log_probs.cols())?;
        writeln!(out, "# mean {}", self.mean)?;
        writeln!(out, "# sqrt_E_x_Var_o {}", opt(self.sd_over_orderings))?;
        writeln!(out, "# sqrt_E_o_Var_x {}", opt(self.sd_over_samples))?;
        writeln!(out, "# ensemble_mean {}", self.mean_ensemble())?;
        Ok(())
    }
}

/// Evaluate every (sample, ordering) pair. Samples run in parallel; the
/// matrix is assembled in index order.
pub fn ordering_stats(
    model: &Model,
    samples: &Dataset,
    spec: &EnsembleSpec,
    k_override: Option<usize>,
) -> Result<EvalReport> {
    if samples.dim() != model.dim() {
        return Err(Error::dim("evaluation data", model.dim(), samples.dim()));
    }
    let rows = (0..samples.len())
        .into_par_iter()
        .map(|i| {
            spec.orderings
                .iter()
                .map(|o| log_prob_ordering(model, samples.row(i), o, k_override))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let data: Vec<f64> = rows.into_iter().flatten().collect();
    EvalReport::from_matrix(Matrix::from_vec(samples.len(), spec.len(), data)?)
}

/// Index of binary vector `x` in an enumeration table: bit `i` is `xᵢ`.
pub fn table_index(x: &[f64]) -> usize {
    x.iter()
        .enumerate()
        .filter(|(_, &v)| v == 1.0)
        .fold(0, |acc, (i, _)| acc | (1 << i))
}

pub fn vector_from_index(index: usize, dim: usize) -> Vec<f64> {
    (0..dim).map(|i| ((index >> i) & 1) as f64).collect()
}

/// Exact `p(x | o)` for all `2^D` binary vectors, indexed by [`table_index`].
///
/// Walks the binary tree of prefixes along `o`, so each conditional is
/// computed once per distinct prefix.
pub fn enumerate_distribution(model: &Model, o: &Ordering, k_override: Option<usize>) -> Result<Vec<f64>> {
    let dim = model.dim();
    if dim > MAX_ENUMERATION_DIM {
        return Err(Error::contract(format!(
            "enumeration refused: D = {dim} exceeds {MAX_ENUMERATION_DIM}"
        )));
    }
    check_ordering(model, o)?;
    let mut table = vec![0.0; 1 << dim];
    let mut x = vec![0.0; dim];
    let mut missing = vec![true; dim];
    enumerate_prefix(model, o.as_slice(), k_override, 0, 0.0, &mut x, &mut missing, &mut table)?;
    Ok(table)
}

#[allow(clippy::too_many_arguments)]
fn enumerate_prefix(
    model: &Model,
    order: &[usize],
    k_override: Option<usize>,
    depth: usize,
    log_p: f64,
    x: &mut [f64],
    missing: &mut [bool],
    table: &mut [f64],
) -> Result<()> {
    if depth == order.len() {
        table[table_index(x)] = log_p.exp();
        return Ok(());
    }
    let idx = order[depth];
    let traj = model.forward(x, &Mask::new(missing.to_vec()), k_override)?;
    let p = clamp_prob(traj.output()[idx]);
    missing[idx] = false;
    for (value, prob) in [(0.0, 1.0 - p), (1.0, p)] {
        x[idx] = value;
        enumerate_prefix(model, order, k_override, depth + 1, log_p + prob.ln(), x, missing, table)?;
    }
    x[idx] = 0.0;
    missing[idx] = true;
    Ok(())
}

/// Exact mixture table: the average of the per-ordering tables.
pub fn enumerate_mixture(model: &Model, spec: &EnsembleSpec, k_override: Option<usize>) -> Result<Vec<f64>> {
    let mut acc = vec![0.0; 1 << model.dim().min(MAX_ENUMERATION_DIM)];
    for o in &spec.orderings {
        for (a, p) in acc.iter_mut().zip(enumerate_distribution(model, o, k_override)?) {
            *a += p;
        }
    }
    let n = spec.len() as f64;
    Ok(acc.into_iter().map(|a| a / n).collect())
}
