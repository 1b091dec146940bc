//! Exact Gaussian sampling: circulant embedding for stationary sequences,
//! factorization for arbitrary Gram matrices, and weighted partial sums.
//!
//! Every block of rows draws from its own ChaCha8 stream selected by
//! `(seed, block index)`, so output never depends on scheduling or on the
//! number of worker threads.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::covariance::{gram_stationary, GramMatrix};
use crate::error::{Error, Result};
use crate::kernels::{CorrelationKernel, WeightSequence};
use crate::linalg;
use crate::stationary::{Correlation, IntegerLag};

/// Spectral mass fraction that may be clipped before the embedding is rejected.
pub const MAX_CLIPPED_MASS: f64 = 1e-6;

/// One stream per row.
pub const SCHEME_ROWS: &str = "chacha8/row";
/// One stream per pair of rows (real and imaginary part of one complex FFT).
pub const SCHEME_CIRCULANT_PAIRS: &str = "chacha8/circulant-pair";
/// Values read back from a binary dump.
pub const SCHEME_REPLAY: &str = "replay";

const DUMP_MAGIC: &[u8; 8] = b"PSTPATH1";

/// Rows handled by one parallel task.
const BLOCKS_PER_TASK: usize = 64;

/// Quantile function of the standard normal (Wichura's AS241, about 1e-16 relative accuracy).
pub fn normal_quantile(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q
            * (((((((2509.080_928_730_122_7 * r + 33430.575_583_588_128) * r + 67265.770_927_008_7) * r
                + 45921.953_931_549_87)
                * r
                + 13731.693_765_509_461)
                * r
                + 1971.590_950_306_551_3)
                * r
                + 133.141_667_891_784_38)
                * r
                + 3.387_132_872_796_366_5)
            / (((((((5226.495_278_852_545 * r + 28729.085_735_721_943) * r + 39307.895_800_092_71) * r
                + 21213.794_301_586_597)
                * r
                + 5394.196_021_424_751)
                * r
                + 687.187_007_492_057_9)
                * r
                + 42.313_330_701_600_91)
                * r
                + 1.0);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let value = if r <= 5.0 {
        r -= 1.6;
        (((((((7.745_450_142_783_414e-4 * r + 0.022_723_844_989_269_184) * r + 0.241_780_725_177_450_6) * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_546)
            * r
            + 1.423_437_110_749_683_5)
            / (((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r
                + 0.015_198_666_563_616_457)
                * r
                + 0.148_103_976_427_480_08)
                * r
                + 0.689_767_334_985_1)
                * r
                + 1.676_384_830_183_803_8)
                * r
                + 2.053_191_626_637_759)
                * r
                + 1.0)
    } else {
        r -= 5.0;
        (((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 2.653_218_952_657_612_4e-2)
            * r
            + 0.296_560_571_828_504_9)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103)
            / (((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
                + 1.846_318_317_510_054_8e-5)
                * r
                + 7.868_691_311_456_133e-4)
                * r
                + 1.487_536_129_085_061_5e-2)
                * r
                + 0.136_929_880_922_735_8)
                * r
                + 0.599_832_206_555_888)
                * r
                + 1.0)
    };
    if q < 0.0 {
        -value
    } else {
        value
    }
}

/// Standard normal variates from one ChaCha8 stream by inverse-CDF transform.
pub struct NormalStream {
    rng: ChaCha8Rng,
}

impl NormalStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        NormalStream { rng }
    }

    /// Uniform on the open interval (0, 1) with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        normal_quantile(self.uniform())
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.next_normal();
        }
    }
}

/// Spectrum of the minimal power-of-two circulant extension of a Toeplitz correlation.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEmbedding {
    /// Half length: the circulant has size `2m` and covers lags `0..=m`.
    pub m: usize,
    /// Clipped eigenvalues, length `2m`.
    pub eigenvalues: Vec<f64>,
    /// Negative spectral mass removed, as a fraction of the total absolute mass.
    pub clipped_mass: f64,
    /// Set when the correlation is the identity, which enables lazy i.i.d. sampling.
    pub identity: bool,
}

/// Embeds lags `ρ(0), ..., ρ(m)` with `m` the smallest power of two `≥ n`.
pub fn circulant_embed(kernel: &CorrelationKernel, n: usize) -> Result<SpectralEmbedding> {
    kernel.validate()?;
    let m = n.max(1).next_power_of_two();
    let mut emb = embed_lags(&kernel.table(m + 1))?;
    emb.identity = kernel.is_identity();
    Ok(emb)
}

/// Embedding of `A(kδ)`, `k = 0..=m`, for a stationary process on the grid of spacing `δ`.
pub fn circulant_embed_grid(corr: &dyn Correlation, spacing: f64, n: usize) -> Result<SpectralEmbedding> {
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::Domain(format!("grid spacing must be positive, got {spacing}")));
    }
    let m = n.max(1).next_power_of_two();
    let lags: Vec<f64> = (0..=m).map(|k| corr.at(k as f64 * spacing)).collect();
    embed_lags(&lags)
}

fn embed_lags(lags: &[f64]) -> Result<SpectralEmbedding> {
    let m = lags.len() - 1;
    let size = 2 * m;
    let mut buf: Vec<Complex<f64>> = (0..size)
        .map(|k| Complex::new(lags[if k <= m { k } else { size - k }], 0.0))
        .collect();
    FftPlanner::<f64>::new().plan_fft_forward(size).process(&mut buf);
    let mut negative = 0.0;
    let mut total = 0.0;
    let eigenvalues = buf
        .iter()
        .map(|c| {
            total += c.re.abs();
            if c.re < 0.0 {
                negative -= c.re;
                0.0
            } else {
                c.re
            }
        })
        .collect();
    let clipped_mass = negative / total;
    if clipped_mass > MAX_CLIPPED_MASS {
        return Err(Error::EmbeddingFailed { clipped: clipped_mass });
    }
    Ok(SpectralEmbedding { m, eigenvalues, clipped_mass, identity: false })
}

/// `R` sampled rows of length `n`, row-major, with the seed they were drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBatch {
    replications: usize,
    n: usize,
    values: Vec<f64>,
    seed: u64,
    stream_scheme: String,
}

impl PathBatch {
    pub fn from_values(replications: usize, n: usize, values: Vec<f64>, seed: u64, stream_scheme: impl Into<String>) -> Result<Self> {
        if values.len() != replications * n {
            return Err(Error::InvalidParameter(format!(
                "{} values do not form {replications} rows of length {n}",
                values.len()
            )));
        }
        Ok(PathBatch { replications, n, values, seed, stream_scheme: stream_scheme.into() })
    }

    pub fn replications(&self) -> usize {
        self.replications
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0 || self.replications == 0
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_scheme(&self) -> &str {
        &self.stream_scheme
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n.max(1)).take(self.replications)
    }

    /// The first `k` coordinates of every row.
    pub fn prefix(&self, k: usize) -> PathBatch {
        assert!(k <= self.n, "prefix {k} longer than paths of length {}", self.n);
        let values = self.rows().flat_map(|r| r[..k].iter().copied()).collect();
        PathBatch { replications: self.replications, n: k, values, seed: self.seed, stream_scheme: self.stream_scheme.clone() }
    }

    /// Little-endian dump: magic, `R`, `n`, seed as `u64`, then the values row-major.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(DUMP_MAGIC)?;
        out.write_all(&(self.replications as u64).to_le_bytes())?;
        out.write_all(&(self.n as u64).to_le_bytes())?;
        out.write_all(&self.seed.to_le_bytes())?;
        for v in &self.values {
            out.write_all(&v.to_le_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<PathBatch> {
        let mut input = BufReader::new(File::open(path)?);
        let mut header = [0u8; 32];
        input.read_exact(&mut header)?;
        if &header[..8] != DUMP_MAGIC {
            return Err(Error::InvalidParameter(format!("{} is not a path dump", path.display())));
        }
        let word = |k: usize| u64::from_le_bytes(header[8 * k..8 * k + 8].try_into().unwrap());
        let (replications, n, seed) = (word(1) as usize, word(2) as usize, word(3));
        let mut bytes = Vec::new();
        input.read_to_end(&mut bytes)?;
        if bytes.len() != 8 * replications * n {
            return Err(Error::InvalidParameter(format!(
                "dump header announces {replications}x{n} values but holds {} bytes",
                bytes.len()
            )));
        }
        let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        PathBatch::from_values(replications, n, values, seed, SCHEME_REPLAY)
    }
}

#[derive(Clone)]
enum Scheme {
    Iid,
    Circulant { scaled_root: Vec<f64>, fft: Arc<dyn Fft<f64>> },
    /// Lower Cholesky factor.
    Lower(Vec<f64>),
    /// Full clipped square root.
    Full(Vec<f64>),
}

/// Reusable generator of exact Gaussian rows of fixed length.
#[derive(Clone)]
pub struct Sampler {
    n: usize,
    seed: u64,
    scheme: Scheme,
}

struct Scratch {
    normals: Vec<f64>,
    complex: Vec<Complex<f64>>,
    fft: Vec<Complex<f64>>,
}

impl Sampler {
    pub fn from_embedding(embedding: &SpectralEmbedding, n: usize, seed: u64) -> Result<Sampler> {
        if n == 0 || n > embedding.m {
            return Err(Error::Domain(format!("embedding of half length {} cannot produce paths of length {n}", embedding.m)));
        }
        if embedding.identity {
            return Ok(Sampler { n, seed, scheme: Scheme::Iid });
        }
        let size = embedding.eigenvalues.len();
        let scaled_root = embedding.eigenvalues.iter().map(|l| (l / size as f64).sqrt()).collect();
        let fft = FftPlanner::<f64>::new().plan_fft_forward(size);
        Ok(Sampler { n, seed, scheme: Scheme::Circulant { scaled_root, fft } })
    }

    /// Factorizes `gram`; a failed Cholesky falls back to the eigenvalue-clipped square root.
    pub fn from_gram(gram: &GramMatrix, seed: u64) -> Result<Sampler> {
        let n = gram.dim();
        let scheme = match linalg::cholesky(gram.entries(), n, 0.0) {
            Ok(l) => Scheme::Lower(l),
            Err(_) => {
                let b = linalg::clipped_square_root(gram.entries(), n);
                if b.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Factorization { index: 0 });
                }
                Scheme::Full(b)
            }
        };
        Ok(Sampler { n, seed, scheme })
    }

    /// Circulant embedding when it succeeds, otherwise factorization of the Toeplitz matrix.
    pub fn for_kernel(kernel: &CorrelationKernel, n: usize, seed: u64) -> Result<Sampler> {
        match circulant_embed(kernel, n) {
            Ok(emb) => Sampler::from_embedding(&emb, n, seed),
            Err(Error::EmbeddingFailed { clipped }) => {
                log::warn!("circulant embedding of {kernel} clipped {clipped:e} of its mass; using Cholesky");
                Sampler::from_gram(&gram_stationary(&IntegerLag(kernel.clone()), 1.0, n)?, seed)
            }
            Err(e) => Err(e),
        }
    }

    /// Same as [`Sampler::for_kernel`] for a process sampled at spacing `δ`.
    pub fn for_grid(corr: &dyn Correlation, spacing: f64, n: usize, seed: u64) -> Result<Sampler> {
        match circulant_embed_grid(corr, spacing, n) {
            Ok(emb) => Sampler::from_embedding(&emb, n, seed),
            Err(Error::EmbeddingFailed { .. }) => Sampler::from_gram(&gram_stationary(corr, spacing, n)?, seed),
            Err(e) => Err(e),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn scheme(&self) -> &'static str {
        match self.scheme {
            Scheme::Circulant { .. } => SCHEME_CIRCULANT_PAIRS,
            _ => SCHEME_ROWS,
        }
    }

    pub fn is_iid(&self) -> bool {
        matches!(self.scheme, Scheme::Iid)
    }

    fn rows_per_block(&self) -> usize {
        match self.scheme {
            Scheme::Circulant { .. } => 2,
            _ => 1,
        }
    }

    fn scratch(&self) -> Scratch {
        match &self.scheme {
            Scheme::Circulant { scaled_root, fft } => Scratch {
                normals: Vec::new(),
                complex: vec![Complex::new(0.0, 0.0); scaled_root.len()],
                fft: vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()],
            },
            Scheme::Iid => Scratch { normals: Vec::new(), complex: Vec::new(), fft: Vec::new() },
            _ => Scratch { normals: vec![0.0; self.n], complex: Vec::new(), fft: Vec::new() },
        }
    }

    /// Writes rows `block · rows_per_block ..` into `out` (one or two rows).
    fn fill_block(&self, block: u64, out: &mut [f64], scratch: &mut Scratch) {
        let n = self.n;
        let mut stream = NormalStream::new(self.seed, block);
        match &self.scheme {
            Scheme::Iid => stream.fill(&mut out[..n]),
            Scheme::Circulant { scaled_root, fft } => {
                for (c, &s) in scratch.complex.iter_mut().zip(scaled_root) {
                    let re = stream.next_normal();
                    let im = stream.next_normal();
                    *c = Complex::new(s * re, s * im);
                }
                fft.process_with_scratch(&mut scratch.complex, &mut scratch.fft);
                let (first, second) = out.split_at_mut(n);
                for (k, c) in scratch.complex[..n].iter().enumerate() {
                    first[k] = c.re;
                    if let Some(slot) = second.get_mut(k) {
                        *slot = c.im;
                    }
                }
            }
            Scheme::Lower(l) => {
                stream.fill(&mut scratch.normals);
                for i in 0..n {
                    out[i] = linalg::dot(&l[i * n..i * n + i + 1], &scratch.normals[..i + 1]);
                }
            }
            Scheme::Full(b) => {
                stream.fill(&mut scratch.normals);
                for i in 0..n {
                    out[i] = linalg::dot(&b[i * n..(i + 1) * n], &scratch.normals);
                }
            }
        }
    }

    /// Applies `f` to every row and collects the results in row order.
    ///
    /// Parallel over blocks of rows on the current rayon pool; the result is
    /// identical for any pool size.
    pub fn map_rows<T, F>(&self, replications: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize, &[f64]) -> T + Sync,
    {
        let n = self.n;
        let per_block = self.rows_per_block();
        let blocks = replications.div_ceil(per_block);
        let tasks = blocks.div_ceil(BLOCKS_PER_TASK);
        let chunks: Vec<Vec<T>> = (0..tasks)
            .into_par_iter()
            .map(|task| {
                let mut scratch = self.scratch();
                let mut buf = vec![0.0; per_block * n];
                let first = task * BLOCKS_PER_TASK;
                let last = ((task + 1) * BLOCKS_PER_TASK).min(blocks);
                let mut out = Vec::with_capacity((last - first) * per_block);
                for block in first..last {
                    self.fill_block(block as u64, &mut buf, &mut scratch);
                    for k in 0..per_block {
                        let row = block * per_block + k;
                        if row < replications {
                            out.push(f(row, &buf[k * n..(k + 1) * n]));
                        }
                    }
                }
                out
            })
            .collect();
        chunks.into_iter().flatten().collect()
    }

    pub fn sample(&self, replications: usize) -> PathBatch {
        let values = self.map_rows(replications, |_, row| row.to_vec()).concat();
        PathBatch { replications, n: self.n, values, seed: self.seed, stream_scheme: self.scheme().to_string() }
    }

    /// For each replication, the first index `ℓ ∈ 1..=n` with `S_ℓ ≥ level`, or `n + 1`.
    ///
    /// `S_ℓ = Σ_{i ≤ ℓ} σ(i) ξ_i`. Persistence up to any `k ≤ n` is the event
    /// `exit > k`, so one pass serves a whole ladder of lengths. For i.i.d.
    /// rows the normals are drawn lazily and the row stops at the first exit;
    /// the values coincide with those of [`Sampler::sample`].
    pub fn first_exits(&self, weights: &WeightSequence, replications: usize, level: f64) -> Vec<u32> {
        let n = self.n;
        let sigma = weights.values(n);
        if self.is_iid() {
            let seed = self.seed;
            return (0..replications)
                .into_par_iter()
                .with_min_len(1024)
                .map(|rep| {
                    let mut stream = NormalStream::new(seed, rep as u64);
                    let mut s = 0.0;
                    for (i, w) in sigma.iter().enumerate() {
                        s += w * stream.next_normal();
                        if s >= level {
                            return i as u32 + 1;
                        }
                    }
                    n as u32 + 1
                })
                .collect();
        }
        self.map_rows(replications, |_, row| first_exit(row, &sigma, level))
    }

    /// First index `i ∈ 1..=n` at which the row itself reaches `level`, or `n + 1`.
    pub fn level_exits(&self, replications: usize, level: f64) -> Vec<u32> {
        self.map_rows(replications, |_, row| {
            row.iter().position(|&v| v >= level).map_or(row.len() as u32 + 1, |i| i as u32 + 1)
        })
    }
}

#[inline]
fn first_exit(xi: &[f64], sigma: &[f64], level: f64) -> u32 {
    let mut s = 0.0;
    for (i, (x, w)) in xi.iter().zip(sigma).enumerate() {
        s += w * x;
        if s >= level {
            return i as u32 + 1;
        }
    }
    xi.len() as u32 + 1
}

/// `R` exact rows of the stationary sequence with the embedded correlation.
pub fn sample_stationary(embedding: &SpectralEmbedding, replications: usize, n: usize, seed: u64) -> Result<PathBatch> {
    Ok(Sampler::from_embedding(embedding, n, seed)?.sample(replications))
}

/// `R` exact rows with covariance `gram`.
pub fn cholesky_sample(gram: &GramMatrix, replications: usize, seed: u64) -> Result<PathBatch> {
    Ok(Sampler::from_gram(gram, seed)?.sample(replications))
}

/// Row-wise prefix sums of `σ(i) ξ_i`.
pub fn weighted_partial_sums(xi: &PathBatch, weights: &WeightSequence) -> PathBatch {
    let sigma = weights.values(xi.n);
    let mut values = Vec::with_capacity(xi.values.len());
    for row in xi.rows() {
        let mut s = 0.0;
        for (x, w) in row.iter().zip(&sigma) {
            s += w * x;
            values.push(s);
        }
    }
    PathBatch { replications: xi.replications, n: xi.n, values, seed: xi.seed, stream_scheme: xi.stream_scheme.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::gram_s;
    use crate::stationary::OrnsteinUhlenbeck;
    use statrs::distribution::{ContinuousCDF, Normal};

    #[test]
    fn quantile_matches_independent_inverse() {
        // 20-digit references from an arbitrary-precision erf inverse
        let table = [
            (1e-300, -37.047_096_299_361_199),
            (1e-20, -9.262_340_089_798_407_6),
            (1e-8, -5.612_001_244_174_788_7),
            (0.0005, -3.290_526_731_491_894_8),
            (0.02425, -1.972_961_051_311_884_9),
            (0.2, -0.841_621_233_572_914_21),
            (0.75, 0.674_489_750_196_081_74),
            (0.97575, 1.972_961_051_311_884_9),
            (0.999, 3.090_232_306_167_813_5),
            (0.999_999_999_999, 7.034_483_825_301_132),
        ];
        for (p, z) in table {
            // the last entry carries the rounding of 1 - 1e-12 in binary
            let tol = if p > 0.99999 { 1e-4 } else { 1e-14 };
            assert!((normal_quantile(p) / z - 1.0).abs() < tol, "p={p}: {}", normal_quantile(p));
        }
        assert_eq!(normal_quantile(0.5), 0.0);
        // coarse round trip through an independent CDF implementation
        let normal = Normal::new(0.0, 1.0).unwrap();
        for k in 1..2000 {
            let p = k as f64 / 2000.0;
            assert!((normal.cdf(normal_quantile(p)) / p - 1.0).abs() < 1e-9, "p={p}");
        }
    }

    #[test]
    fn embedding_examples() {
        let e = circulant_embed(&CorrelationKernel::KroneckerDelta, 8).unwrap();
        assert_eq!(e.m, 8);
        assert!(e.eigenvalues.iter().all(|&l| (l - 1.0).abs() < 1e-14));
        assert_eq!(e.clipped_mass, 0.0);
        let e = circulant_embed(&CorrelationKernel::Fgn { hurst: 0.75 }, 1024).unwrap();
        assert_eq!(e.clipped_mass, 0.0);
        assert_eq!(e.eigenvalues.len(), 2048);
        let e = circulant_embed(&CorrelationKernel::Exponential { rate: 1.0 }, 64).unwrap();
        assert_eq!(e.clipped_mass, 0.0);
        assert!(e.eigenvalues.iter().all(|&l| l > 0.0));
    }

    #[test]
    fn embedding_rejects_invalid_correlation() {
        let bad = CorrelationKernel::Table(vec![1.0, 0.9]);
        assert!(matches!(circulant_embed(&bad, 16), Err(Error::EmbeddingFailed { .. })));
        // the sampler falls back to a (clipped) factorization, which also refuses this matrix
        assert!(matches!(Sampler::for_kernel(&bad, 16, 1), Err(Error::NotPsd { .. })));
    }

    fn mean(xs: impl Iterator<Item = f64>) -> f64 {
        let v: Vec<f64> = xs.collect();
        v.iter().sum::<f64>() / v.len() as f64
    }

    #[test]
    fn stationary_sample_moments() {
        let r = 100_000;
        let rf = r as f64;
        let emb = circulant_embed(&CorrelationKernel::KroneckerDelta, 2).unwrap();
        let b = sample_stationary(&emb, r, 2, 3).unwrap();
        let c = mean(b.rows().map(|x| x[0] * x[1]));
        assert!(c.abs() < 3.0 / rf.sqrt());
        for kernel in [CorrelationKernel::Fgn { hurst: 0.75 }, CorrelationKernel::Exponential { rate: 1.0 }] {
            let emb = circulant_embed(&kernel, 8).unwrap();
            let b = sample_stationary(&emb, r, 8, 11).unwrap();
            let v = mean(b.rows().map(|x| x[0] * x[0]));
            assert!((v - 1.0).abs() < 3.0 * (2.0 / rf).sqrt(), "{kernel}: {v}");
            let rho1 = kernel.at(1);
            let c = mean(b.rows().map(|x| x[0] * x[1]));
            let se = ((1.0 + rho1 * rho1) / rf).sqrt();
            assert!((c - rho1).abs() < 3.0 * se, "{kernel}: {c}");
        }
        assert!((CorrelationKernel::Fgn { hurst: 0.75 }.at(1) - 0.414_213_562).abs() < 1e-8);
    }

    #[test]
    fn cholesky_sample_examples() {
        let r = 100_000;
        let rf = r as f64;
        let g = gram_s(&CorrelationKernel::KroneckerDelta, &WeightSequence::ONES, 2).unwrap();
        let b = cholesky_sample(&g, r, 5).unwrap();
        // var(S1)=1, cov=1, var(S2)=2; stderr of a product mean is sqrt(E[X²Y²] - c²)
        let checks = [(0, 0, 1.0, 2f64.sqrt()), (0, 1, 1.0, 3f64.sqrt()), (1, 1, 2.0, 8f64.sqrt())];
        for (i, j, target, sd) in checks {
            let c = mean(b.rows().map(|x| x[i] * x[j]));
            assert!((c - target).abs() < 3.0 * sd / rf.sqrt(), "({i},{j}) {c}");
        }
        let one = GramMatrix::from_rows(1, vec![1.0]).unwrap();
        let b = cholesky_sample(&one, 4, 9).unwrap();
        let mut s = NormalStream::new(9, 2);
        assert_eq!(b.row(2)[0], s.next_normal());
        let ou = gram_stationary(&OrnsteinUhlenbeck { rate: 1.0 }, 2f64.ln(), 3).unwrap();
        let b = cholesky_sample(&ou, r, 6).unwrap();
        let c = mean(b.rows().map(|x| x[0] * x[2]));
        assert!((c - 0.25).abs() < 3.0 * (1.0625f64 / rf).sqrt(), "{c}");
    }

    #[test]
    fn partial_sum_examples() {
        let xi = PathBatch::from_values(1, 3, vec![1.0, -2.0, 3.0], 0, SCHEME_REPLAY).unwrap();
        assert_eq!(weighted_partial_sums(&xi, &WeightSequence::ONES).values(), &[1.0, -1.0, 2.0]);
        let xi = PathBatch::from_values(1, 2, vec![1.0, 1.0], 0, SCHEME_REPLAY).unwrap();
        let lin = WeightSequence::Polynomial { p: 1.0 };
        assert_eq!(weighted_partial_sums(&xi, &lin).values(), &[1.0, 3.0]);
    }

    #[test]
    fn lazy_iid_exits_match_full_rows() {
        let s = Sampler::for_kernel(&CorrelationKernel::KroneckerDelta, 50, 77).unwrap();
        assert!(s.is_iid());
        let w = WeightSequence::Polynomial { p: 0.5 };
        let lazy = s.first_exits(&w, 500, 0.3);
        let batch = weighted_partial_sums(&s.sample(500), &w);
        for (rep, &e) in lazy.iter().enumerate() {
            let expect = batch.row(rep).iter().position(|&v| v >= 0.3).map_or(51, |k| k as u32 + 1);
            assert_eq!(e, expect);
        }
    }

    #[test]
    fn circulant_pairs_cover_odd_counts() {
        let s = Sampler::for_kernel(&CorrelationKernel::Fgn { hurst: 0.7 }, 10, 1).unwrap();
        let odd = s.sample(7);
        let even = s.sample(8);
        assert_eq!(odd.values(), &even.values()[..70]);
        let w = WeightSequence::ONES;
        let exits = s.first_exits(&w, 7, 0.0);
        let sums = weighted_partial_sums(&odd, &w);
        for (rep, &e) in exits.iter().enumerate() {
            let expect = sums.row(rep).iter().position(|&v| v >= 0.0).map_or(11, |k| k as u32 + 1);
            assert_eq!(e, expect);
        }
    }

    #[test]
    fn binary_dump_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("paths.bin");
        let b = Sampler::for_kernel(&CorrelationKernel::Exponential { rate: 0.5 }, 12, 42).unwrap().sample(5);
        b.write_binary(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(bytes.len(), 32 + 8 * 60);
        assert_eq!(&bytes[..8], b"PSTPATH1");
        let back = PathBatch::read_binary(&path).unwrap();
        assert_eq!(back.values(), b.values());
        assert_eq!((back.replications(), back.len(), back.seed()), (5, 12, 42));
    }

    #[test]
    fn grid_sampler_for_ou() {
        let s = Sampler::for_grid(&OrnsteinUhlenbeck { rate: 1.0 }, 0.1, 20, 8).unwrap();
        let r = 100_000;
        let b = s.sample(r);
        let c = mean(b.rows().map(|x| x[0] * x[10]));
        let target = (-1.0f64).exp();
        assert!((c - target).abs() < 3.0 * ((1.0 + target * target) / r as f64).sqrt());
    }
}
