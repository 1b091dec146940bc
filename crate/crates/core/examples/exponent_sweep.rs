//! Fitted exponent of the limit process `C_{p,H}` along `H` at `p = 0`, next to `1 - H`.

use persistence_lab::harness::{sweep, SweepConfig, SweepParameter};

fn main() -> persistence_lab::Result<()> {
    let config = SweepConfig {
        parameter: SweepParameter::H,
        values: vec![0.6, 0.7, 0.8],
        horizons: vec![4.0, 8.0, 12.0],
        spacing: 0.1,
        ..SweepConfig::default()
    };
    let out = std::env::temp_dir().join("sweep-h.csv");
    for row in sweep(&config, &out)? {
        println!("H = {}: theta = {:.4} ± {:.4} (1 - H = {:.2})", row.abscissa, row.value, row.stderr, 1.0 - row.abscissa);
    }
    Ok(())
}
