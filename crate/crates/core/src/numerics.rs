//! Dense linear algebra, stable elementwise nonlinearities and the in-repo
//! random number generator.
//!
//! Every reduction runs in a fixed sequential order so that results are
//! bit-reproducible for a given input.

use crate::error::{Error, Result};

/// Lower and upper bound applied to any probability before taking a log.
pub const PROB_CLAMP: f64 = 1e-12;

/// Clamp a probability into `[1e-12, 1 - 1e-12]`.
#[inline]
pub fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dim("Matrix::from_vec", rows * cols, data.len()));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::dim("Matrix::from_rows", cols, r.len()));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: f64) {
        self.data[r * self.cols + c] = value;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact(0) panics; an empty-column matrix has no data anyway
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    /// Checked matrix-vector product.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::dim("matvec", self.cols, v.len()));
        }
        let mut out = vec![0.0; self.rows];
        self.matvec_into(v, &mut out);
        Ok(out)
    }

    /// `out = M v`. Shapes are the caller's responsibility.
    pub(crate) fn matvec_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *o = dot(row, v);
        }
    }

    /// `out = Mᵀ u`.
    pub(crate) fn tmatvec_into(&self, u: &[f64], out: &mut [f64]) {
        debug_assert_eq!(u.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        out.fill(0.0);
        for (&ui, row) in u.iter().zip(self.data.chunks_exact(self.cols)) {
            if ui == 0.0 {
                continue;
            }
            for (o, &m) in out.iter_mut().zip(row) {
                *o += ui * m;
            }
        }
    }

    /// `M += u vᵀ`.
    pub(crate) fn add_outer(&mut self, u: &[f64], v: &[f64]) {
        debug_assert_eq!(u.len(), self.rows);
        debug_assert_eq!(v.len(), self.cols);
        for (&ui, row) in u.iter().zip(self.data.chunks_exact_mut(self.cols)) {
            if ui == 0.0 {
                continue;
            }
            for (m, &vj) in row.iter_mut().zip(v) {
                *m += ui * vj;
            }
        }
    }
}

/// Dot product with a fixed left-to-right reduction order.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

/// Logistic sigmoid, stable for any finite input.
///
/// The result is kept strictly inside `(0, 1)`: it is bounded below by the
/// smallest normal `f64` and above by the largest `f64` below one.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    let s = if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    };
    s.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

pub fn sigmoid_vec(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| sigmoid(x)).collect()
}

pub fn tanh_vec(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| x.tanh()).collect()
}

/// `log Σ exp(vᵢ)` via max-shift.
///
/// Terms are summed in ascending order of value, so the result is bit-identical
/// for any permutation of the input.
pub fn log_sum_exp(values: &[f64]) -> Result<f64> {
    let (&first, rest) = values
        .split_first()
        .ok_or_else(|| Error::contract("log_sum_exp of an empty list"))?;
    if rest.is_empty() {
        return Ok(first);
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Ok(max);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let sum = sorted.iter().fold(0.0, |acc, &v| acc + (v - max).exp());
    Ok(max + sum.ln())
}

/// Deterministic xoshiro256** generator seeded through SplitMix64.
///
/// A generator remembers the seed it was created from, so named sub-streams
/// ([`Rng::stream`]) and indexed sub-streams ([`Rng::substream`]) depend only
/// on that seed and never on how many numbers were already drawn.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    state: [u64; 4],
}

#[inline]
fn splitmix64(x: &mut u64) -> u64 {
    *x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let state = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Rng { seed, state }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent stream identified by a name, e.g. `"init"` or `"masks"`.
    pub fn stream(&self, name: &str) -> Rng {
        let mut sm = self.seed ^ fnv1a(name.as_bytes());
        Rng::new(splitmix64(&mut sm))
    }

    /// Independent stream identified by an index, e.g. a sample number.
    pub fn substream(&self, index: u64) -> Rng {
        let mut sm = self.seed.wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
        splitmix64(&mut sm);
        Rng::new(splitmix64(&mut sm) ^ 0x5851_F42D_4C95_7F2D)
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Unbiased uniform integer in `0..n` (Lemire's method). `n` must be > 0.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "Rng::below(0)");
        let mut m = u128::from(self.next_u64()) * u128::from(n);
        if (m as u64) < n {
            let threshold = n.wrapping_neg() % n;
            while (m as u64) < threshold {
                m = u128::from(self.next_u64()) * u128::from(n);
            }
        }
        (m >> 64) as u64
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// In-place Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        self.shuffle(&mut p);
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use super::Rng;

    #[test]
    fn matvec_examples() {
        let v = [1.0, 2.0, 3.0];
        assert_eq!(Matrix::identity(3).matvec(&v).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(Matrix::zeros(2, 3).matvec(&v).unwrap(), vec![0.0, 0.0]);
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(m.matvec(&[1.0, 1.0]).unwrap(), vec![3.0, 7.0]);
    }

    #[test]
    fn matvec_dimension_mismatch() {
        let err = Matrix::zeros(2, 3).matvec(&[1.0, 2.0]).unwrap_err();
        assert!(matches!(
            err,
            Error::Dimension {
                expected: 3,
                found: 2,
                ..
            }
        ));
    }

    #[test]
    fn transpose_product_matches_explicit_transpose() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        let mut out = vec![0.0; 3];
        m.tmatvec_into(&[1.0, -1.0], &mut out);
        assert_eq!(out, vec![-3.0, -3.0, -3.0]);
    }

    #[test]
    fn nonlinearity_examples() {
        assert_eq!(sigmoid_vec(&[0.0]), vec![0.5]);
        assert_eq!(tanh_vec(&[0.0]), vec![0.0]);
        let tiny = sigmoid(-1000.0);
        assert!(tiny > 0.0 && tiny < 1e-300);
        // exp(-700) is representable and must not be clamped away
        let s700 = sigmoid(-700.0);
        assert!((s700 / (-700.0f64).exp() - 1.0).abs() < 1e-12);
        assert!(sigmoid(1000.0) < 1.0);
    }

    #[test]
    fn log_sum_exp_examples() {
        assert_eq!(log_sum_exp(&[-3.25]).unwrap(), -3.25);
        assert!((log_sum_exp(&[0.0, 0.0]).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        // -10 + ln(1 + e^-2) = -9.873071...
        assert!((log_sum_exp(&[-10.0, -12.0]).unwrap() + 9.873_071).abs() < 1e-3);
        assert!(log_sum_exp(&[]).is_err());
    }

    #[test]
    fn rng_is_reproducible_and_streams_differ() {
        let a: Vec<u64> = {
            let mut r = Rng::new(7);
            (0..4).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = Rng::new(7);
            (0..4).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);

        let root = Rng::new(7);
        let mut used = root.clone();
        used.next_u64();
        assert_eq!(root.stream("masks").next_u64(), used.stream("masks").next_u64());
        assert_ne!(root.stream("masks").next_u64(), root.stream("init").next_u64());
        assert_ne!(root.substream(0).next_u64(), root.substream(1).next_u64());
    }

    #[test]
    fn below_is_roughly_uniform() {
        let mut r = Rng::new(1);
        let mut counts = [0usize; 5];
        for _ in 0..50_000 {
            counts[r.below(5) as usize] += 1;
        }
        for c in counts {
            assert!((c as f64 / 50_000.0 - 0.2).abs() < 0.01);
        }
    }

    proptest! {
        #[test]
        fn matvec_distributes_over_addition(
            rows in 1usize..16,
            cols in 1usize..64,
            seed in any::<u64>(),
        ) {
            let mut r = Rng::new(seed);
            let m = Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| r.uniform(-1.0, 1.0)).collect()).unwrap();
            let u: Vec<f64> = (0..cols).map(|_| r.uniform(-1.0, 1.0)).collect();
            let v: Vec<f64> = (0..cols).map(|_| r.uniform(-1.0, 1.0)).collect();
            let sum: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
            let lhs = m.matvec(&sum).unwrap();
            let mu = m.matvec(&u).unwrap();
            let mv = m.matvec(&v).unwrap();
            for i in 0..rows {
                let rhs = mu[i] + mv[i];
                let scale = m.row(i).iter().zip(&sum).map(|(a, b)| (a * b).abs()).sum::<f64>().max(1e-300);
                prop_assert!((lhs[i] - rhs).abs() <= 1e-12 * scale);
            }
        }

        #[test]
        fn sigmoid_is_complementary(x in -800.0f64..800.0) {
            prop_assert!((sigmoid(x) + sigmoid(-x) - 1.0).abs() <= 1e-15);
            let s = sigmoid(x);
            prop_assert!(s > 0.0 && s < 1.0);
        }

        #[test]
        fn log_sum_exp_is_permutation_invariant(
            mut values in proptest::collection::vec(-50.0f64..50.0, 1..12),
            seed in any::<u64>(),
        ) {
            let before = log_sum_exp(&values).unwrap();
            Rng::new(seed).shuffle(&mut values);
            let after = log_sum_exp(&values).unwrap();
            prop_assert_eq!(before.to_bits(), after.to_bits());
        }
    }
}
