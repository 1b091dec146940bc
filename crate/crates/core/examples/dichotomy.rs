//! Zero versus positive exponent from the integrability of the correlation tail.

use persistence_lab::estimate::{theta_dichotomy, DichotomyOptions};
use persistence_lab::stationary::{Correlation, FnCorrelation, OrnsteinUhlenbeck, PowerLaw};

fn main() -> persistence_lab::Result<()> {
    let opts = DichotomyOptions { horizons: vec![2.0, 4.0, 8.0], ..DichotomyOptions::default() };
    let undeclared = FnCorrelation::new("(1+t)^-3", None, |t: f64| (1.0 + t.abs()).powi(-3));
    let cases: [&dyn Correlation; 3] = [&OrnsteinUhlenbeck { rate: 1.0 }, &PowerLaw { exponent: 0.5 }, &undeclared];
    for corr in cases {
        let r = theta_dichotomy(corr, None, &opts)?;
        let rates: Vec<String> = r.fekete.iter().map(|f| format!("{:.3}", f.rate)).collect();
        println!("{:<16} {:?} (declared {}, tail slope {:?}) a(T)/T = [{}]", corr.label(), r.verdict, r.declared, r.tail_slope, rates.join(", "));
    }
    Ok(())
}
