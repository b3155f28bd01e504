//! Mode analysis of a rectangular waveguide across its width: propagating,
//! cutoff, and evanescent regimes of the TE10 axial wavenumber.

use dma_model::{derive_wavenumbers, Medium, WaveguideSpec};
use nalgebra::Vector3;
use std::f64::consts::PI;

fn main() {
    let medium = Medium::vacuum(10.0e9).unwrap();
    let lambda = medium.wavelength();
    println!(
        "f = {:.1} GHz, λ = {:.4} mm, k = {:.4} rad/m\n",
        medium.frequency_hz / 1e9,
        lambda * 1e3,
        medium.wavenumber()
    );
    println!("{:>8} {:>12} {:>12} {:>14} {:>12}", "a/λ", "Re kx", "Im kx", "guided λ (mm)", "single-mode");
    for a_over_lambda in [0.40, 0.50, 0.55, 0.7318, 0.90, 0.99, 1.20] {
        let a = a_over_lambda * lambda;
        let guide = WaveguideSpec::new(a, 0.1668 * lambda, 0.11, a / 2.0, Vector3::zeros()).unwrap();
        let kn = derive_wavenumbers(&medium, &guide).unwrap();
        let guided = if kn.k_x.re > 0.0 {
            format!("{:.3}", 2.0 * PI / kn.k_x.re * 1e3)
        } else {
            "-".into()
        };
        println!(
            "{:>8.4} {:>12.4} {:>12.4} {:>14} {:>12}",
            a_over_lambda, kn.k_x.re, kn.k_x.im, guided, kn.single_mode
        );

        // The dispersion relation k² = (π/a)² + kx² holds in every regime.
        let residual =
            ((PI / a).powi(2) + kn.k_x.re.powi(2) - kn.k_x.im.powi(2) - kn.k * kn.k).abs();
        assert!(residual < 1e-6 * kn.k * kn.k);
    }
    println!("\nBelow a = λ/2 the axial wavenumber is negative-imaginary: the");
    println!("fundamental mode decays instead of propagating.");
}
