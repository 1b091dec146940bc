//! Exact sampling by circulant embedding, weighted partial sums and the binary dump.

use persistence_lab::estimate::lag_correlation;
use persistence_lab::kernels::{CorrelationKernel, WeightSequence};
use persistence_lab::simulate::{circulant_embed, weighted_partial_sums, PathBatch, Sampler};

fn main() -> persistence_lab::Result<()> {
    let kernel: CorrelationKernel = "fgn:H=0.75".parse()?;
    let emb = circulant_embed(&kernel, 64)?;
    println!("embedding of size {}, clipped spectral mass {:.2e}", 2 * emb.m, emb.clipped_mass);

    let sampler = Sampler::for_kernel(&kernel, 64, 42)?;
    let xi = sampler.sample(50_000);
    for lag in 0..4 {
        let (r, se) = lag_correlation(&xi, lag);
        println!("lag {lag}: {r:.4} ± {se:.4}   exact {:.4}", kernel.at(lag));
    }

    let sums = weighted_partial_sums(&xi, &"poly:p=0.5".parse::<WeightSequence>()?);
    let file = std::env::temp_dir().join("persistence-lab-example.bin");
    sums.write_binary(&file)?;
    let back = PathBatch::read_binary(&file)?;
    println!("dumped {} x {} ({}), round trip equal: {}", back.replications(), back.len(), back.stream_scheme(), back.values() == sums.values());
    std::fs::remove_file(file)?;
    Ok(())
}
