//! Supermultiplicativity of persistence probabilities under nonnegative correlation.

use persistence_lab::covariance::{gram_stationary, GramMatrix};
use persistence_lab::estimate::{slepian_block_check, OrthantOptions};
use persistence_lab::stationary::OrnsteinUhlenbeck;

fn main() -> persistence_lab::Result<()> {
    let opts = OrthantOptions::default();
    let ou = gram_stationary(&OrnsteinUhlenbeck { rate: 1.0 }, 0.25, 16)?;
    let r = slepian_block_check(&ou, 0.0, 8, &opts)?;
    println!("OU grid:        full {:.6} >= {:.6} x {:.6}, margin {:.3e}", r.full, r.left, r.right, r.margin);

    let n = 8;
    let equi = (0..n * n).map(|k| if k % (n + 1) == 0 { 1.0 } else { 0.9 }).collect();
    let r = slepian_block_check(&GramMatrix::from_rows(n, equi)?, 0.0, 4, &opts)?;
    println!("equicorrelated: full {:.6} >= {:.6} x {:.6}, margin {:.3e}", r.full, r.left, r.right, r.margin);
    Ok(())
}
