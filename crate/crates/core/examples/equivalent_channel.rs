//! The network as a MIMO link: equivalent channel matrix, symbol
//! transmission with noise, per-user received power, and the size of the
//! back-coupling correction the far-field assumption drops.

use dma_model::{
    equivalent_channel, solve_bilateral, solve_unilateral, transmit_signal, AdmittanceSet,
    CMatrix, CVector, Excitation, Medium, Scenario, ScenarioBuilder, WaveguideSpec, YrsMode,
};
use nalgebra::Vector3;
use num_complex::Complex64;

fn scenario(user_distance: f64) -> Scenario {
    let medium = Medium::vacuum(10.0e9).unwrap();
    let lambda = medium.wavelength();
    let a = 0.7318 * lambda;
    let b = 0.1668 * lambda;
    let mk = |z0: f64| {
        WaveguideSpec::new(a, b, 0.110, a / 2.0, Vector3::new(0.0, -b, z0 - a / 2.0)).unwrap()
    };
    let mut bld = ScenarioBuilder::new(medium).guide(mk(-lambda / 2.0)).guide(mk(lambda / 2.0));
    for g in 0..2 {
        for i in 0..5 {
            bld = bld.element_at_x(g, 0.019_024_9 + i as f64 * 0.6 * lambda);
        }
    }
    bld.uniform_terminations(Complex64::new(2.0, -15.7934))
        .user(Vector3::new(0.055, user_distance, 0.010))
        .user(Vector3::new(0.055, user_distance, -0.080))
        .uniform_user_loads(Complex64::new(6.186, 0.0))
        .connector(35.3387)
        .build()
        .unwrap()
}

fn main() {
    let sc = scenario(2.0);
    let adm = AdmittanceSet::from_scenario(&sc, YrsMode::LosExact).unwrap();

    let h = equivalent_channel(&adm).unwrap();
    println!("H_eq ({}x{}):", h.nrows(), h.ncols());
    for m in 0..h.nrows() {
        let row: Vec<String> = (0..h.ncols())
            .map(|n| format!("{:+.3e}{:+.3e}i", h[(m, n)].re, h[(m, n)].im))
            .collect();
        println!("  user {m}: [{}]", row.join(", "));
    }

    // Send one symbol per user through an identity precoder.
    let b = CMatrix::identity(2, 2);
    let x = CVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0)]);
    let noiseless = transmit_signal(&h, &b, &x, 0.0, 1).unwrap();
    let sigma_n = 1e-2 * noiseless.norm();
    let noisy = transmit_signal(&h, &b, &x, sigma_n * sigma_n, 1).unwrap();
    println!("\ny (noiseless): {:?}", noiseless.iter().map(|v| format!("{:.3e}", v.norm())).collect::<Vec<_>>());
    println!("y (σ_n = 1% of signal): {:?}", noisy.iter().map(|v| format!("{:.3e}", v.norm())).collect::<Vec<_>>());

    // The solver agrees with the matrix model, and reports received powers.
    let exc = Excitation::FixedTransmitCurrents(&b * &x);
    let sol = solve_unilateral(&adm, &exc, sc.y0).unwrap();
    let consistency = (&h * (&b * &x) - sol.j_r.clone()).norm() / sol.j_r.norm();
    println!("\nH_eq · B x vs solver j_r: relative gap {consistency:.2e}");
    for (m, p) in sol.p_r.iter().enumerate() {
        println!("  P_r user {m} = {:.3e} W", p);
    }

    // How much the unilateral shortcut costs at this range.
    let bi = solve_bilateral(&adm, &exc, sc.y0).unwrap();
    let dev = (sol.j_r.clone() - bi.j_r.clone()).norm() / bi.j_r.norm();
    println!("\nback-coupling correction at {:.0} λ: {:.2e} relative on j_r", 2.0 / sc.medium.wavelength(), dev);
}
