//! The quick reproduction suites with their PASS/FAIL lines.

use persistence_lab::harness::{reproduce, ReproduceOptions, SuiteId};

fn main() -> persistence_lab::Result<()> {
    let opts = ReproduceOptions { replications: Some(200_000), ..ReproduceOptions::default() };
    for suite in [SuiteId::A4, SuiteId::A5, SuiteId::A7, SuiteId::A8] {
        print!("{}", reproduce(suite, &opts)?);
    }
    Ok(())
}
