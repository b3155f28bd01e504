//! Magnetic field along the centre line of the first waveguide, as an ASCII
//! profile: a standing-wave ripple whose envelope steps down past each
//! radiating element.

use dma_model::{field_in_guide, solve_unilateral, AdmittanceSet, Excitation, Scenario, YrsMode};
use nalgebra::Vector3;

fn main() {
    let sc = Scenario::from_toml_str(include_str!("../scenarios/validation.toml")).unwrap();
    let adm = AdmittanceSet::from_scenario(&sc, YrsMode::LosExact).unwrap();
    let sol = solve_unilateral(&adm, &Excitation::equal_split_power(1.0, 2), sc.y0).unwrap();

    let guide = &sc.guides[0];
    let n = 96;
    let positions: Vec<Vector3<f64>> = (0..n)
        .map(|i| {
            let x = guide.length_s * i as f64 / (n - 1) as f64;
            guide.origin + Vector3::new(x, guide.height_b / 2.0, guide.width_a / 2.0)
        })
        .collect();
    let probe = field_in_guide(&sol, &sc, 0, &positions).unwrap();
    let peak = probe.h_z.iter().map(|h| h.norm()).fold(0.0, f64::max);

    let element_xs: Vec<f64> = sc
        .elements_of_guide(0)
        .iter()
        .map(|&l| sc.elements[l].local.x)
        .collect();

    println!("|H_z| along guide 0 (z = a/2, y = b/2); * marks element positions\n");
    for (pos, h) in probe.positions.iter().zip(&probe.h_z) {
        let x = pos.x - guide.origin.x;
        let bar = "#".repeat((42.0 * h.norm() / peak).round() as usize);
        let marker = if element_xs.iter().any(|&ex| (ex - x).abs() < guide.length_s / (n as f64)) {
            "*"
        } else {
            " "
        };
        println!("x = {:6.1} mm {} |{}", x * 1e3, marker, bar);
    }
    println!("\npeak |H_z| = {peak:.3} A/m; phase at the feed = {:.1} deg", probe.h_z[0].arg().to_degrees());
}
