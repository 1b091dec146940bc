//! Persistence exponent of a stationary process on a fine grid, with the Fekete sequence.

use persistence_lab::estimate::{exponent_fit_linear, grid_persistence, OrthantOptions};
use persistence_lab::stationary::OrnsteinUhlenbeck;

fn main() -> persistence_lab::Result<()> {
    let opts = OrthantOptions { budget: 200_000, rel_tol: 1e-2, seed: 1, ..OrthantOptions::default() };
    for spacing in [0.1, 0.05, 0.02] {
        let pts = grid_persistence(&OrnsteinUhlenbeck { rate: 1.0 }, spacing, &[5.0, 10.0, 20.0], 0.0, &opts)?;
        let fit = exponent_fit_linear(&pts)?;
        let rates: Vec<String> = fit.fekete.iter().map(|f| format!("{:.4}", f.rate)).collect();
        println!("spacing {spacing}: theta = {:.4} ± {:.4}, a(T)/T = [{}]", fit.exponent, fit.stderr, rates.join(", "));
    }
    Ok(())
}
