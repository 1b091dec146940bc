//! Runs the JSON experiment in `examples/configs/` and prints the rows.

use std::path::Path;

use persistence_lab::harness::{run_experiment_in, ExperimentConfig};

fn main() -> persistence_lab::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs/fgn-both.json");
    let config = ExperimentConfig::from_path(&path)?;
    println!("config hash {}", config.hash());
    let out = run_experiment_in(&config, &std::env::temp_dir())?;
    for row in &out.rows {
        println!("{}", row.csv_line());
    }
    for f in &out.fits {
        println!("{}: exponent {:.4} ± {:.4}", f.method, f.fit.exponent, f.fit.stderr);
    }
    println!("wrote {}", out.csv_path.display());
    Ok(())
}
