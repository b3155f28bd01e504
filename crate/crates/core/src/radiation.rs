//! Field synthesis and radiated-power bookkeeping.
//!
//! Inside a guide, the magnetic field is the superposition of the
//! fundamental-mode Green's function driven by the feed current and by every
//! element current on that guide. Outside, each element radiates through the
//! image-doubled free-space dyad, giving the far-field vector `h`, the gain
//! pattern referenced to supplied power, and the radiated power as a
//! hemisphere quadrature of the Poynting flux.
//!
//! Gain follows the `η = 120π` convention of antenna practice; radiated
//! power uses the exact medium impedance `√(μ/ε)` so that the energy balance
//! against the circuit quantities closes to quadrature precision.

use std::f64::consts::PI;

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::greens::{self, GuidePoint};
use crate::model::Scenario;
use crate::network::NetworkSolution;
use crate::quad::gauss_legendre_on;
use crate::{Error, Result, Warning};

/// Free-space impedance convention used by the gain definition, Ω.
pub const GAIN_ETA: f64 = 120.0 * PI;

/// Complex H_z samples along a set of in-guide positions.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldProbe {
    /// Probe positions in the global frame.
    pub positions: Vec<Vector3<f64>>,
    /// Fundamental-mode H_z at each position, A/m.
    pub h_z: Vec<Complex64>,
}

/// Gain samples over a (θ, φ) grid of the front hemisphere.
#[derive(Debug, Clone, PartialEq)]
pub struct GainGrid {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    /// Row-major gain values, `gain[i_theta * phi.len() + i_phi]`, linear.
    pub gain: Vec<f64>,
    /// Evaluation radius, m.
    pub r_eval: f64,
    /// Reference power the gain is normalized to, W.
    pub p_ref: f64,
    /// Impedance convention used in the gain formula, Ω.
    pub eta: f64,
    pub warnings: Vec<Warning>,
}

impl GainGrid {
    pub fn value(&self, i_theta: usize, i_phi: usize) -> f64 {
        self.gain[i_theta * self.phi.len() + i_phi]
    }
}

/// A one-dimensional pattern cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GainCut {
    /// Fix θ, sweep φ over the front hemisphere (0, π).
    ThetaFixed(f64),
    /// Fix φ, sweep θ over (0, π).
    PhiFixed(f64),
}

/// Fundamental-mode H_z inside `guide_index` from the solved currents:
/// h_z(r) = −iωε [ G^(w)(r, r_feed) j_t + Σ_l G^(w)(r, r_l) j_s,l ],
/// summed over the sources of that guide only.
pub fn field_in_guide(
    solution: &NetworkSolution,
    sc: &Scenario,
    guide_index: usize,
    positions: &[Vector3<f64>],
) -> Result<FieldProbe> {
    let guide = sc
        .guides
        .get(guide_index)
        .ok_or_else(|| Error::InvalidInput(format!("no waveguide {guide_index}")))?;
    let kn = sc.wavenumbers(guide_index);
    let ioe = Complex64::new(0.0, sc.medium.omega() * sc.medium.permittivity);
    let feed = GuidePoint::from_local(&guide.feed_local());
    let members = sc.elements_of_guide(guide_index);

    let mut h_z = Vec::with_capacity(positions.len());
    for p in positions {
        let local = guide.to_local(p);
        let gp = GuidePoint::from_local(&local);
        let mut acc = greens::waveguide_zz(&gp, &feed, guide, kn)? * solution.j_t[guide_index];
        for &l in &members {
            acc += greens::waveguide_zz(
                &gp,
                &GuidePoint::from_local(&sc.elements[l].local),
                guide,
                kn,
            )? * solution.j_s[l];
        }
        h_z.push(-ioe * acc);
    }
    Ok(FieldProbe {
        positions: positions.to_vec(),
        h_z,
    })
}

fn direction(theta: f64, phi: f64) -> Vector3<f64> {
    Vector3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}

/// Radiated magnetic field at distance `r` in direction (θ, φ):
/// h = −iωε Σ_l 2 G^(a)(r, r_l) ẑ · j_s,l (the dyad's third column, doubled
/// by the conducting plane).
pub fn farfield_h(
    solution: &NetworkSolution,
    sc: &Scenario,
    theta: f64,
    phi: f64,
    r: f64,
) -> Result<Vector3<Complex64>> {
    if !(r > 0.0) {
        return Err(Error::InvalidInput(format!("evaluation radius must be positive, got {r}")));
    }
    let kn = sc.wavenumbers(0);
    let ioe = Complex64::new(0.0, sc.medium.omega() * sc.medium.permittivity);
    let obs = r * direction(theta, phi);
    let mut h = Vector3::from_element(Complex64::new(0.0, 0.0));
    for (l, el) in sc.elements.iter().enumerate() {
        let dy = greens::freespace_dyadic(&obs, &el.global, kn)?;
        let col = dy.column(2);
        let scale = -ioe * 2.0 * solution.j_s[l];
        for i in 0..3 {
            h[i] += scale * col[i];
        }
    }
    Ok(h)
}

/// Minimum radius treated as far field: ten aperture diagonals.
pub fn min_farfield_radius(sc: &Scenario) -> f64 {
    10.0 * sc.aperture_diagonal()
}

/// Gain in direction (θ, φ): G = 4πR²η ‖h‖² / (2 P_ref), referenced to the
/// supplied power of the run (or any other power passed as `p_ref`).
pub fn gain(
    solution: &NetworkSolution,
    sc: &Scenario,
    theta: f64,
    phi: f64,
    r: f64,
    p_ref: f64,
) -> Result<f64> {
    if !(p_ref > 0.0) {
        return Err(Error::InvalidInput(format!(
            "gain reference power must be positive, got {p_ref}"
        )));
    }
    let h = farfield_h(solution, sc, theta, phi, r)?;
    let h2: f64 = h.iter().map(|c| c.norm_sqr()).sum();
    Ok(4.0 * PI * r * r * GAIN_ETA * h2 / (2.0 * p_ref))
}

/// 1-D gain cut with `samples` points across the open hemisphere interval.
pub fn gain_cut(
    solution: &NetworkSolution,
    sc: &Scenario,
    cut: GainCut,
    samples: usize,
    r: f64,
    p_ref: f64,
) -> Result<Vec<(f64, f64)>> {
    if samples < 2 {
        return Err(Error::InvalidInput("a cut needs at least two samples".into()));
    }
    match cut {
        GainCut::ThetaFixed(theta) if !(theta > 0.0 && theta < PI) => {
            return Err(Error::InvalidInput(format!(
                "theta = {theta} outside the open hemisphere interval (0, pi)"
            )))
        }
        GainCut::PhiFixed(phi) if !(phi > 0.0 && phi < PI) => {
            return Err(Error::InvalidInput(format!(
                "phi = {phi} outside the open hemisphere interval (0, pi)"
            )))
        }
        _ => {}
    }
    let mut out = Vec::with_capacity(samples);
    for i in 0..samples {
        let angle = PI * (i as f64 + 0.5) / samples as f64;
        let (theta, phi) = match cut {
            GainCut::ThetaFixed(t) => (t, angle),
            GainCut::PhiFixed(p) => (angle, p),
        };
        out.push((angle, gain(solution, sc, theta, phi, r, p_ref)?));
    }
    Ok(out)
}

/// Gain over an n_theta × n_phi grid of the front hemisphere.
pub fn gain_grid(
    solution: &NetworkSolution,
    sc: &Scenario,
    n_theta: usize,
    n_phi: usize,
    r: f64,
    p_ref: f64,
) -> Result<GainGrid> {
    if n_theta < 1 || n_phi < 1 {
        return Err(Error::InvalidInput("grid needs at least one sample per axis".into()));
    }
    let mut warnings = Vec::new();
    let min_r = min_farfield_radius(sc);
    if r < min_r {
        warnings.push(Warning::NearFieldEvaluation { r, min_r });
    }
    let theta: Vec<f64> = (0..n_theta)
        .map(|i| PI * (i as f64 + 0.5) / n_theta as f64)
        .collect();
    let phi: Vec<f64> = (0..n_phi)
        .map(|i| PI * (i as f64 + 0.5) / n_phi as f64)
        .collect();
    let mut values = Vec::with_capacity(n_theta * n_phi);
    for &t in &theta {
        for &p in &phi {
            values.push(gain(solution, sc, t, p, r, p_ref)?);
        }
    }
    Ok(GainGrid {
        theta,
        phi,
        gain: values,
        r_eval: r,
        p_ref,
        eta: GAIN_ETA,
        warnings,
    })
}

/// Total radiated power by Gauss-Legendre quadrature of the Poynting flux
/// over the front hemisphere, using the exact medium impedance.
///
/// The rule at `order/2` must agree with the returned `order` value within
/// 0.5%, otherwise the quadrature is reported as not converged.
pub fn radiated_power(
    solution: &NetworkSolution,
    sc: &Scenario,
    order: usize,
) -> Result<f64> {
    if order < 4 {
        return Err(Error::InvalidInput(format!(
            "quadrature order must be at least 4, got {order}"
        )));
    }
    if solution.j_s.norm() == 0.0 {
        return Ok(0.0);
    }
    let coarse = radiated_power_fixed(solution, sc, order / 2)?;
    let fine = radiated_power_fixed(solution, sc, order)?;
    let change = (fine - coarse).abs() / fine.abs().max(f64::MIN_POSITIVE);
    if change > 5e-3 {
        return Err(Error::QuadratureNotConverged {
            achieved: change,
            tolerance: 5e-3,
            estimate: fine,
        });
    }
    Ok(fine)
}

fn radiated_power_fixed(solution: &NetworkSolution, sc: &Scenario, order: usize) -> Result<f64> {
    let eta = sc.medium.impedance();
    let r_eval = 1.0e4 * sc.medium.wavelength();
    let (ts, tw) = gauss_legendre_on(order, 0.0, PI);
    let (ps, pw) = gauss_legendre_on(order, 0.0, PI);
    let mut acc = 0.0;
    for (t, wt) in ts.iter().zip(&tw) {
        for (p, wp) in ps.iter().zip(&pw) {
            let h = farfield_h(solution, sc, *t, *p, r_eval)?;
            let h2: f64 = h.iter().map(|c| c.norm_sqr()).sum();
            acc += wt * wp * t.sin() * h2;
        }
    }
    Ok(acc * eta / 2.0 * r_eval * r_eval)
}
