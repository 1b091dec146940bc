//! `ψ_α`, `f_{p,H}` and the limit correlation `C_{p,H}` with its bracket.

use persistence_lab::special::{c_ph, c_ph_bounds, f11_by_quadrature, f_ph, psi, selberg_f11, PHParams};

fn main() -> persistence_lab::Result<()> {
    println!("psi_-1(e) = {}", psi(-1.0, std::f64::consts::E)?);
    println!("psi_1(3)  = {}", psi(1.0, 3.0)?);

    for (p, h) in [(0.0, 0.75), (1.0, 0.6), (-0.25, 0.9)] {
        let params = PHParams::new(p, h)?;
        let exact = selberg_f11(params)?;
        let quad = f11_by_quadrature(params)?.value;
        println!("p={p:5} H={h}: f(1,1) = {exact:.12} (quadrature {quad:.12}), f(1,3) = {:.8}", f_ph(params, 1.0, 3.0)?.value);
    }

    let params = PHParams::new(0.5, 0.6)?;
    println!("\n tau     lower       C_pH        upper     e^-(p+H)tau");
    for tau in [0.5, 1.0, 2.0, 4.0, 8.0] {
        let (lo, hi) = c_ph_bounds(params, tau, 0.5 * (1.0 + f64::exp(tau)))?;
        let c = c_ph(params, tau)?;
        println!("{tau:4}  {lo:.8}  {c:.8}  {hi:.8}  {:.8}", (-(params.p + params.h) * tau).exp());
    }
    Ok(())
}
