//! `F_{ρ,σ}`, Gram matrices of partial sums and of stationary grids, and
//! the two scaling-limit ratios.

use persistence_lab::covariance::{f_rho_sigma, gram_s, gram_stationary, limit_ratio_nonsummable, limit_ratio_summable};
use persistence_lab::kernels::{CorrelationKernel, WeightSequence};
use persistence_lab::stationary::OrnsteinUhlenbeck;

fn main() -> persistence_lab::Result<()> {
    let fgn: CorrelationKernel = "fgn:H=0.75".parse()?;
    let ones = WeightSequence::ONES;
    println!("F(2.5, 4) for fgn(0.75), sigma = 1: {:.6}", f_rho_sigma(&fgn, &ones, 2.5, 4.0)?);

    let g = gram_s(&fgn, &ones, 4)?;
    println!("Cov(S_i, S_j), i, j <= 4 ({}):", g.metadata.label);
    for i in 0..4 {
        let row: Vec<String> = (0..4).map(|j| format!("{:8.4}", g.get(i, j))).collect();
        println!("  {}", row.join(""));
    }

    let ou = gram_stationary(&OrnsteinUhlenbeck { rate: 1.0 }, 0.5, 5)?;
    println!("OU grid, spacing 0.5, min eigenvalue {:?}", ou.min_eigenvalue);

    let poly: WeightSequence = "poly:p=0.5".parse()?;
    for u in [64.0, 1024.0, 16384.0] {
        println!("non-summable ratio at u = {u}: {:.6}", limit_ratio_nonsummable(&fgn, &poly, u, 2.0)?);
    }
    let exp: CorrelationKernel = "exp:lambda=1".parse()?;
    let limit = 1.0 + 2.0 / (std::f64::consts::E - 1.0);
    for u in [10.0, 100.0, 1000.0] {
        println!("summable ratio at u = {u}: {:.6} (limit {limit:.6})", limit_ratio_summable(&exp, &poly, u, 2.0)?);
    }
    Ok(())
}
