//! Solve the bundled scenario for one watt of supplied power split equally
//! between the two feeds, and print every current, coefficient, and power of
//! the resulting network state.

use dma_model::{solve_unilateral, AdmittanceSet, Excitation, Scenario, YrsMode};

fn main() {
    let sc = Scenario::from_toml_str(include_str!("../scenarios/validation.toml")).unwrap();
    let adm = AdmittanceSet::from_scenario(&sc, YrsMode::LosExact).unwrap();
    let exc = Excitation::equal_split_power(1.0, sc.n_guides());
    let sol = solve_unilateral(&adm, &exc, sc.y0).unwrap();
    let port = sol.port.as_ref().unwrap();

    println!("supplied power  P_s = {:.4} W", sol.p_s());
    println!("transmitted     P_t = {:.4} W", sol.p_t);
    println!("insertion loss      = {:.2} %\n", 100.0 * (1.0 - sol.p_t / sol.p_s()));

    for n in 0..sc.n_guides() {
        println!(
            "port {n}: j = {:+.4}{:+.4}i  j_t = {:+.4}{:+.4}i  Y_in = {:+.3}{:+.3}i S  |Γ| = {:.4}",
            port.j[n].re,
            port.j[n].im,
            sol.j_t[n].re,
            sol.j_t[n].im,
            port.y_in[n].re,
            port.y_in[n].im,
            port.gamma[n].norm()
        );
    }

    println!("\nelement currents (the guided wave drains as it radiates):");
    for g in 0..sc.n_guides() {
        for (rank, &l) in sc.elements_of_guide(g).iter().enumerate() {
            println!(
                "  guide {g} element {rank}: j_s = {:+.4}{:+.4}i  |j_s| = {:.4}  P_d = {:.4} mW",
                sol.j_s[l].re,
                sol.j_s[l].im,
                sol.j_s[l].norm(),
                1e3 * sol.p_d[l]
            );
        }
    }

    let p_d: f64 = sol.p_d.iter().sum();
    println!("\ndissipated in terminations ΣP_d = {:.4} W", p_d);
    println!("radiated (P_t - ΣP_d)           = {:.4} W", sol.p_t - p_d);
}
