//! Datasets in the whitespace-separated text matrix format (one sample per
//! line, optionally gzip-compressed), binarization, splits and minibatching.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use crate::error::{DataError, Error, Result};
use crate::model::EmpiricalMean;
use crate::numerics::{Matrix, Rng};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    samples: Matrix,
    binary: bool,
}

fn is_binary(values: &[f64]) -> bool {
    values.iter().all(|&v| v == 0.0 || v == 1.0)
}

impl Dataset {
    pub fn new(name: impl Into<String>, samples: Matrix) -> Result<Self> {
        if let Some(bad) = samples.as_slice().iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::contract(format!("dataset value {bad} outside [0, 1]")));
        }
        let binary = is_binary(samples.as_slice());
        Ok(Dataset {
            name: name.into(),
            samples,
            binary,
        })
    }

    pub fn from_rows(name: impl Into<String>, rows: &[Vec<f64>]) -> Result<Self> {
        Dataset::new(name, Matrix::from_rows(rows)?)
    }

    pub fn len(&self) -> usize {
        self.samples.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.samples.cols()
    }

    pub fn is_binary(&self) -> bool {
        self.binary
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.samples.row(i)
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.samples.row_iter()
    }

    pub fn samples(&self) -> &Matrix {
        &self.samples
    }

    /// Rows `range` as a new dataset.
    pub fn slice(&self, range: std::ops::Range<usize>, name: impl Into<String>) -> Dataset {
        let dim = self.dim();
        let data = self.samples.as_slice()[range.start * dim..range.end * dim].to_vec();
        let samples = Matrix::from_vec(range.len(), dim, data).expect("slice shape");
        Dataset {
            name: name.into(),
            binary: is_binary(samples.as_slice()),
            samples,
        }
    }

    pub fn require_binary(&self) -> Result<()> {
        if self.binary {
            Ok(())
        } else {
            Err(DataError::NotBinary.into())
        }
    }
}

/// Sample counts for a train/validation/test split, taken in file order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub train: usize,
    pub valid: usize,
    pub test: usize,
}

impl SplitSpec {
    pub const MNIST: SplitSpec = SplitSpec { train: 50_000, valid: 10_000, test: 10_000 };
    pub const CALTECH101_SILHOUETTES: SplitSpec = SplitSpec { train: 4100, valid: 2264, test: 2307 };

    pub fn total(&self) -> usize {
        self.train + self.valid + self.test
    }

    pub fn apply(&self, data: &Dataset) -> Result<(Dataset, Dataset, Dataset)> {
        if self.total() != data.len() {
            return Err(Error::dim("split", data.len(), self.total()));
        }
        let a = self.train;
        let b = a + self.valid;
        Ok((
            data.slice(0..a, format!("{}-train", data.name)),
            data.slice(a..b, format!("{}-valid", data.name)),
            data.slice(b..data.len(), format!("{}-test", data.name)),
        ))
    }
}

fn is_gzip(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "gz")
}

/// Parse a text matrix. Blank lines are skipped; line numbers in errors are
/// 1-based positions in the input.
pub fn parse_text_matrix(reader: impl BufRead, name: &str) -> Result<Dataset> {
    let mut dim = None;
    let mut data = Vec::new();
    let mut rows = 0;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(name, e))?;
        let mut fields = 0;
        for token in line.split_whitespace() {
            let value: f64 = token.parse().map_err(|_| DataError::Parse {
                line: line_no,
                token: token.to_string(),
            })?;
            if !(0.0..=1.0).contains(&value) {
                return Err(DataError::OutOfRange { line: line_no, value }.into());
            }
            data.push(value);
            fields += 1;
        }
        if fields == 0 {
            continue;
        }
        match dim {
            None => dim = Some(fields),
            Some(expected) if expected != fields => {
                return Err(DataError::Ragged {
                    line: line_no,
                    expected,
                    found: fields,
                }
                .into())
            }
            Some(_) => {}
        }
        rows += 1;
    }
    let dim = dim.ok_or(DataError::Empty)?;
    Dataset::new(name, Matrix::from_vec(rows, dim, data)?)
}

/// Load a text matrix; `.gz` files are decompressed transparently.
pub fn load_text_matrix(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader: Box<dyn Read> = if is_gzip(path) {
        Box::new(MultiGzDecoder::new(file))
    } else {
        Box::new(file)
    };
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_text_matrix(BufReader::new(reader), &name)
}

/// Write rows as text. Binary values print as `0`/`1`; other values use the
/// shortest representation that parses back to the same `f64`.
pub fn write_rows<'a>(out: &mut impl Write, rows: impl IntoIterator<Item = &'a [f64]>) -> std::io::Result<()> {
    for row in rows {
        let mut first = true;
        for &v in row {
            if !first {
                out.write_all(b" ")?;
            }
            first = false;
            if v == 0.0 {
                out.write_all(b"0")?;
            } else if v == 1.0 {
                out.write_all(b"1")?;
            } else {
                write!(out, "{v}")?;
            }
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_text_matrix<'a>(path: impl AsRef<Path>, rows: impl IntoIterator<Item = &'a [f64]>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let result = if is_gzip(path) {
        let mut enc = GzEncoder::new(BufWriter::new(file), Compression::default());
        write_rows(&mut enc, rows).and_then(|_| enc.finish()?.flush())
    } else {
        let mut w = BufWriter::new(file);
        write_rows(&mut w, rows).and_then(|_| w.flush())
    };
    result.map_err(|e| Error::io(path, e))
}

/// Replace every value by an independent Bernoulli draw with that
/// probability.
pub fn binarize_by_sampling(data: &Dataset, rng: &mut Rng) -> Dataset {
    let values: Vec<f64> = data
        .samples
        .as_slice()
        .iter()
        .map(|&p| if rng.bernoulli(p) { 1.0 } else { 0.0 })
        .collect();
    let samples = Matrix::from_vec(data.len(), data.dim(), values).expect("same shape");
    Dataset {
        name: data.name.clone(),
        samples,
        binary: true,
    }
}

pub fn empirical_mean(train: &Dataset) -> Result<EmpiricalMean> {
    if train.is_empty() {
        return Err(Error::contract("empirical mean of an empty dataset"));
    }
    let mut sum = vec![0.0; train.dim()];
    for row in train.rows() {
        for (s, &v) in sum.iter_mut().zip(row) {
            *s += v;
        }
    }
    let n = train.len() as f64;
    // clamp guards against rounding just past 1
    EmpiricalMean::new(sum.into_iter().map(|s| (s / n).clamp(0.0, 1.0)).collect())
}

/// Partition `0..count` into blocks of `size` (last block may be short), in a
/// seeded random order when `shuffle` is set.
pub fn minibatches(count: usize, size: usize, rng: &mut Rng, shuffle: bool) -> Vec<Vec<usize>> {
    assert!(size >= 1, "minibatch size must be >= 1");
    let order = if shuffle {
        rng.permutation(count)
    } else {
        (0..count).collect()
    };
    order.chunks(size).map(<[usize]>::to_vec).collect()
}

/// Noisy copies of a few fixed binary prototypes.
pub mod synthetic {
    use super::*;

    /// `patterns` random prototypes of length `dim`; each sample picks one
    /// uniformly and flips every bit independently with probability `flip`.
    #[derive(Debug, Clone)]
    pub struct PatternMixture {
        pub prototypes: Vec<Vec<f64>>,
        pub flip: f64,
    }

    impl PatternMixture {
        pub fn random(dim: usize, patterns: usize, flip: f64, rng: &mut Rng) -> Self {
            let prototypes = (0..patterns)
                .map(|_| (0..dim).map(|_| if rng.bernoulli(0.5) { 1.0 } else { 0.0 }).collect())
                .collect();
            PatternMixture { prototypes, flip }
        }

        pub fn sample(&self, count: usize, name: &str, rng: &mut Rng) -> Dataset {
            let rows: Vec<Vec<f64>> = (0..count)
                .map(|_| {
                    let proto = &self.prototypes[rng.below(self.prototypes.len() as u64) as usize];
                    proto
                        .iter()
                        .map(|&b| if rng.bernoulli(self.flip) { 1.0 - b } else { b })
                        .collect()
                })
                .collect();
            Dataset::from_rows(name, &rows).expect("binary rows")
        }

        /// Exact log-probability of `x` under the mixture.
        pub fn log_prob(&self, x: &[f64]) -> f64 {
            let logs: Vec<f64> = self
                .prototypes
                .iter()
                .map(|p| {
                    p.iter()
                        .zip(x)
                        .map(|(a, b)| if a == b { (1.0 - self.flip).ln() } else { self.flip.ln() })
                        .sum::<f64>()
                        - (self.prototypes.len() as f64).ln()
                })
                .collect();
            crate::numerics::log_sum_exp(&logs).expect("non-empty")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(text: &str) -> Result<Dataset> {
        parse_text_matrix(Cursor::new(text), "test")
    }

    #[test]
    fn parse_examples() {
        let d = parse("0 1\n1 0\n").unwrap();
        assert_eq!((d.len(), d.dim(), d.is_binary()), (2, 2, true));
        let d = parse("0.5 1\n").unwrap();
        assert!(!d.is_binary());
        assert!(d.require_binary().is_err());
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = parse("0 1\n1\n").unwrap_err();
        assert!(matches!(err, Error::Data(DataError::Ragged { line: 2, expected: 2, found: 1 })));
        assert!(err.to_string().contains("line 2"));
        assert!(matches!(parse("0 1\n1 x\n").unwrap_err(), Error::Data(DataError::Parse { line: 2, .. })));
        assert!(matches!(parse("0 1.5\n").unwrap_err(), Error::Data(DataError::OutOfRange { line: 1, .. })));
        assert!(matches!(parse("\n\n").unwrap_err(), Error::Data(DataError::Empty)));
    }

    #[test]
    fn round_trip_through_files() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![vec![0.0, 1.0, 1.0], vec![0.25, 0.1, 1.0 / 3.0]];
        for name in ["m.amat", "m.amat.gz"] {
            let path = dir.path().join(name);
            write_text_matrix(&path, rows.iter().map(Vec::as_slice)).unwrap();
            let back = load_text_matrix(&path).unwrap();
            assert_eq!(back.samples(), &Matrix::from_rows(&rows).unwrap());
        }
    }

    #[test]
    fn binarize_extremes_and_mean() {
        let d = Dataset::from_rows("x", &[vec![0.0, 1.0, 0.3]]).unwrap();
        let mut rng = Rng::new(5);
        for _ in 0..100 {
            let b = binarize_by_sampling(&d, &mut rng);
            assert_eq!(&b.row(0)[..2], &[0.0, 1.0]);
            assert!(b.is_binary());
        }
        let n = 1_000_000;
        let col = Dataset::new("col", Matrix::from_vec(n, 1, vec![0.3; n]).unwrap()).unwrap();
        let b = binarize_by_sampling(&col, &mut Rng::new(9));
        let mean = empirical_mean(&b).unwrap().as_slice()[0];
        // 3σ = 3·sqrt(0.21/1e6) ≈ 0.0014
        assert!((mean - 0.3).abs() < 0.002);
        let again = binarize_by_sampling(&col, &mut Rng::new(9));
        assert_eq!(b, again);
    }

    #[test]
    fn empirical_mean_examples() {
        let d = Dataset::from_rows("x", &[vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(empirical_mean(&d).unwrap().as_slice(), &[0.5, 1.0]);
        let single = Dataset::from_rows("x", &[vec![1.0, 0.0, 1.0]]).unwrap();
        assert_eq!(empirical_mean(&single).unwrap().as_slice(), single.row(0));
        let zeros = Dataset::from_rows("x", &vec![vec![0.0; 3]; 4]).unwrap();
        assert_eq!(empirical_mean(&zeros).unwrap().as_slice(), &[0.0; 3]);
        let empty = zeros.slice(0..0, "empty");
        assert!(empirical_mean(&empty).is_err());
    }

    #[test]
    fn minibatch_examples() {
        let sizes: Vec<usize> = minibatches(10, 3, &mut Rng::new(0), true).iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![3, 3, 3, 1]);
        let plain = minibatches(5, 2, &mut Rng::new(0), false);
        assert_eq!(plain, vec![vec![0, 1], vec![2, 3], vec![4]]);
        assert_eq!(
            minibatches(50, 7, &mut Rng::new(3), true),
            minibatches(50, 7, &mut Rng::new(3), true)
        );
        let mut all: Vec<usize> = minibatches(50, 7, &mut Rng::new(3), true).concat();
        all.sort_unstable();
        assert_eq!(all, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn split_sizes() {
        let d = Dataset::from_rows("d", &vec![vec![0.0, 1.0]; 10]).unwrap();
        let (a, b, c) = SplitSpec { train: 5, valid: 3, test: 2 }.apply(&d).unwrap();
        assert_eq!((a.len(), b.len(), c.len()), (5, 3, 2));
        assert!(SplitSpec { train: 5, valid: 3, test: 3 }.apply(&d).is_err());
    }

    #[test]
    fn pattern_mixture_log_prob_normalizes() {
        let mix = synthetic::PatternMixture::random(4, 3, 0.1, &mut Rng::new(2));
        let total: f64 = (0..16u32)
            .map(|bits| {
                let x: Vec<f64> = (0..4).map(|i| f64::from((bits >> i) & 1)).collect();
                mix.log_prob(&x).exp()
            })
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
