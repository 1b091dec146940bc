//! Correlation kernels, weight sequences and the scale pair `s`, `w`.

use persistence_lab::kernels::{CorrelationKernel, WeightSequence};

fn main() -> persistence_lab::Result<()> {
    for id in ["delta", "exp:lambda=1", "poly-summable:beta=2", "fgn:H=0.75"] {
        let k: CorrelationKernel = id.parse()?;
        let c = k.classify_summability()?;
        let lags: Vec<String> = (0..5).map(|i| format!("{:.5}", k.at(i))).collect();
        println!("{k:<22} rho(0..5) = [{}]  tail {:?}", lags.join(", "), c.class);
    }

    let w: WeightSequence = "poly:p=1".parse()?;
    for t in [0.5, 2.0, 10.0, 1000.0] {
        let s = w.s_of(t)?;
        println!("{w}: s({t}) = {s:.6}, w(s({t})) = {:.12}", w.w_of(s)?);
    }
    let log_scale = WeightSequence::LogScale;
    let n = 1_000_000.0;
    println!("log-scale: s(n)^2 - ln n at n = 1e6 is {:.6}", log_scale.s_of(n)?.powi(2) - f64::ln(n));
    Ok(())
}
