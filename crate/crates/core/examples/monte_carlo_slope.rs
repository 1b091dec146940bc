//! Monte Carlo persistence along a doubling ladder and the log-log slope.
//!
//! For i.i.d. increments with `σ ≡ 1` the slope against `log n` is `-1/2`.

use persistence_lab::estimate::{exponent_fit_loglog, persistence_ladder_mc, Regressor};
use persistence_lab::kernels::{CorrelationKernel, WeightSequence};
use persistence_lab::simulate::Sampler;

fn main() -> persistence_lab::Result<()> {
    let ladder: Vec<usize> = (4..=10).map(|k| 1 << k).collect();
    let weights = WeightSequence::ONES;
    for id in ["delta", "fgn:H=0.75"] {
        let kernel: CorrelationKernel = id.parse()?;
        let sampler = Sampler::for_kernel(&kernel, 1024, 7)?;
        let est = persistence_ladder_mc(&sampler, &weights, &ladder, 200_000, 0.0)?;
        let pts: Vec<_> = ladder.iter().copied().zip(est).collect();
        for (n, e) in &pts {
            println!("{id:>12} n = {n:5}: log q = {:.4} ± {:.4}", e.log_p, e.stderr_log);
        }
        let fit = exponent_fit_loglog(&pts, &weights, Regressor::LogN)?;
        println!("{id:>12} slope {:.4}, 95% interval [{:.4}, {:.4}]\n", fit.exponent, fit.ci95.0, fit.ci95.1);
    }
    Ok(())
}
