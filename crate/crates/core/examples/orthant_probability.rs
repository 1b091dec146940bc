//! Orthant probabilities by sequential conditioning: lattice rule in low
//! dimension, particle estimator above it.

use persistence_lab::covariance::{gram_s, GramMatrix};
use persistence_lab::estimate::{orthant_qmc, orthant_qmc_with, OrthantOptions};
use persistence_lab::kernels::{CorrelationKernel, WeightSequence};

fn main() -> persistence_lab::Result<()> {
    let g = gram_s(&CorrelationKernel::KroneckerDelta, &WeightSequence::ONES, 2)?;
    let e = orthant_qmc(&g, 0.0, 1_000_000, 1)?;
    println!("q_2 = {:.8} (3/8), {} evaluations", e.p(), e.n_effective);

    // equicorrelation 1/2: P(all < 0) = 1/(n + 1)
    for n in [10, 50, 200] {
        let entries = (0..n * n).map(|k| if k % (n + 1) == 0 { 1.0 } else { 0.5 }).collect();
        let g = GramMatrix::from_rows(n, entries)?;
        let opts = OrthantOptions { budget: 400_000, rel_tol: 1e-2, seed: 3, ..OrthantOptions::default() };
        let e = orthant_qmc_with(&g, 0.0, &opts)?;
        println!("n = {n:3}: p = {:.5e} ± {:.1e} ({}), exact {:.5e}", e.p(), e.stderr_p(), e.method.as_str(), 1.0 / (n + 1) as f64);
    }
    Ok(())
}
