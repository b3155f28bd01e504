//! Build every admittance block of the bundled two-guide scenario and show
//! their structure: diagonal radiation conductances, reciprocity residuals,
//! the cross-guide sparsity of Y_st, and the automatic connector admittance.

use dma_model::admittance::{element_self_conductance, user_self_conductance};
use dma_model::{connector_admittance_auto, AdmittanceSet, Scenario, YrsMode};

fn main() {
    let sc = Scenario::from_toml_str(include_str!("../scenarios/validation.toml")).unwrap();
    let adm = AdmittanceSet::from_scenario(&sc, YrsMode::LosExact).unwrap();

    println!(
        "scenario: N = {} guides, L = {} elements, M = {} users",
        sc.n_guides(),
        sc.n_elements(),
        sc.n_users()
    );
    println!(
        "connector: Y_0 = {} S (semi-infinite match computes {:.4} S)\n",
        sc.y0,
        connector_admittance_auto(&sc).unwrap()
    );

    println!("Y_tt diagonal (feed self-admittances, purely reactive):");
    for n in 0..adm.n_feeds() {
        let y = adm.y_tt[(n, n)];
        println!("  port {n}: {:+.4} {:+.4}i S", y.re, y.im);
    }

    println!("\nY_st: |entries| by (element, feed); zero across guides:");
    for l in 0..adm.n_elements() {
        let row: Vec<String> = (0..adm.n_feeds())
            .map(|n| format!("{:8.4}", adm.y_st[(l, n)].norm()))
            .collect();
        println!("  el {l:>2}: {}", row.join(" "));
    }

    let g_el = element_self_conductance(&sc.medium);
    println!("\nY_ss diagonal: Re = kωε/3π = {:.4} S on every element:", g_el);
    for l in [0, 4, 9] {
        let y = adm.y_ss[(l, l)];
        println!("  el {l}: {:+.4} {:+.4}i S", y.re, y.im);
    }
    let mut worst: f64 = 0.0;
    for i in 0..adm.n_elements() {
        for j in 0..adm.n_elements() {
            worst = worst.max((adm.y_ss[(i, j)] - adm.y_ss[(j, i)]).norm());
        }
    }
    println!("  reciprocity: max |Y_ss - Y_ssᵀ| entry = {worst:.3e} S");
    println!(
        "  image theory: element/user self-conductance ratio = {}",
        g_el / user_self_conductance(&sc.medium)
    );
    println!("\nNearest-neighbour coupling (same guide vs across guides):");
    println!("  |Y_ss[0,1]| = {:.4} S (waveguide + air)", adm.y_ss[(0, 1)].norm());
    println!("  |Y_ss[0,5]| = {:.4} S (air only)", adm.y_ss[(0, 5)].norm());
}
