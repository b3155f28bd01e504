//! Green's function kernels.
//!
//! All antennas in the model are infinitesimal magnetic dipoles oriented
//! along z, so mutual couplings reduce to the zz-component of the magnetic
//! Green's function of the relevant region:
//!
//! * [`waveguide_zz`] — fundamental-mode (TE10) kernel of a rectangular
//!   waveguide shorted at both ends,
//! * [`waveguide_zz_modal`] — the truncated modal sum, for diagnostics of
//!   what the fundamental-mode model leaves out,
//! * [`freespace_zz`], [`freespace_zz_farfield`] — scalar free-space kernel
//!   (exact and `1/R` leading order),
//! * [`freespace_dyadic`] — the full 3×3 free-space dyad needed to synthesise
//!   radiated fields.
//!
//! These functions never regularise singularities: coincident points are an
//! error here, and the closed-form self terms live in the admittance module.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::model::{mode_k_x, WaveguideSpec, Wavenumbers};
use crate::{Error, Result};

/// |sin(k_x S)| below this is treated as an exact cavity resonance.
const RESONANCE_TOL: f64 = 1e-12;

/// A point in waveguide-local coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl GuidePoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_local(v: &Vector3<f64>) -> Self {
        Self::new(v.x, v.y, v.z)
    }

    fn check_inside(&self, guide: &WaveguideSpec) -> Result<()> {
        if self.x < 0.0
            || self.x > guide.length_s
            || self.y < 0.0
            || self.y > guide.height_b
            || self.z < 0.0
            || self.z > guide.width_a
        {
            return Err(Error::OutsideGuide(format!(
                "({}, {}, {}) outside [0,{}]x[0,{}]x[0,{}]",
                self.x, self.y, self.z, guide.length_s, guide.height_b, guide.width_a
            )));
        }
        Ok(())
    }
}

/// Truncation of the modal sum. `(1, 0)` selects the TE10-only model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModalTruncation {
    pub max_m: u32,
    pub max_n: u32,
}

impl Default for ModalTruncation {
    fn default() -> Self {
        Self { max_m: 1, max_n: 0 }
    }
}

/// Standing-wave factor [cos(kx(x+x'−S)) + cos(kx(S−|x−x'|))] / sin(kx S).
fn axial_factor(k_x: Complex64, x: f64, x_src: f64, s: f64) -> Result<Complex64> {
    let sin_ks = (k_x * s).sin();
    if sin_ks.norm() < RESONANCE_TOL {
        return Err(Error::CavityResonance {
            kx_s_over_pi: k_x.re * s / PI,
        });
    }
    let c1 = (k_x * (x + x_src - s)).cos();
    let c2 = (k_x * (s - (x - x_src).abs())).cos();
    Ok((c1 + c2) / sin_ks)
}

/// Fundamental-mode zz Green's function of a shorted rectangular waveguide,
/// 1/m. Symmetric in `r` and `r_src`; independent of y.
pub fn waveguide_zz(
    r: &GuidePoint,
    r_src: &GuidePoint,
    guide: &WaveguideSpec,
    kn: &Wavenumbers,
) -> Result<Complex64> {
    r.check_inside(guide)?;
    r_src.check_inside(guide)?;
    let a = guide.width_a;
    let pref = -kn.k_x * (PI * r.z / a).sin() * (PI * r_src.z / a).sin()
        / (a * guide.height_b * kn.k * kn.k);
    Ok(pref * axial_factor(kn.k_x, r.x, r_src.x, guide.length_s)?)
}

/// Modal-sum zz Green's function truncated at `(max_m, max_n)`, 1/m.
///
/// Each mode uses its own axial wavenumber with the same branch rule as the
/// fundamental. The degeneracy factor is 2 − δ₀ with δ₀ = 1 when m = 1 or
/// n = 1. With the default truncation this reduces exactly to
/// [`waveguide_zz`]. Intended for shallow truncations: deeply evanescent
/// modes (|Im k_x|·S beyond ~700) overflow the hyperbolic standing-wave
/// terms.
pub fn waveguide_zz_modal(
    r: &GuidePoint,
    r_src: &GuidePoint,
    guide: &WaveguideSpec,
    kn: &Wavenumbers,
    trunc: ModalTruncation,
) -> Result<Complex64> {
    r.check_inside(guide)?;
    r_src.check_inside(guide)?;
    if trunc.max_m < 1 {
        return Err(Error::InvalidInput("modal truncation requires max_m >= 1".into()));
    }
    let (a, b, s) = (guide.width_a, guide.height_b, guide.length_s);
    let k = kn.k;
    let mut sum = Complex64::new(0.0, 0.0);
    for m in 1..=trunc.max_m {
        for n in 0..=trunc.max_n {
            let k_x = mode_k_x(k, a, b, m, n);
            let delta0 = if m == 1 || n == 1 { 1.0 } else { 0.0 };
            let (mf, nf) = (m as f64, n as f64);
            let trig = (mf * PI * r.z / a).sin()
                * (nf * PI * r.y / b).cos()
                * (mf * PI * r_src.z / a).sin()
                * (nf * PI * r_src.y / b).cos();
            let num = -(2.0 - delta0)
                * trig
                * (a * a * k * k * nf * nf + b * b * k_x * k_x * mf * mf);
            let den = a * b * k_x * k * k * (a * a * nf * nf + b * b * mf * mf);
            sum += num / den * axial_factor(k_x, r.x, r_src.x, s)?;
        }
    }
    Ok(sum)
}

fn separation(r: &Vector3<f64>, r_src: &Vector3<f64>) -> Result<(f64, f64)> {
    let d = r - r_src;
    let dist = d.norm();
    if dist < 1e-30 {
        return Err(Error::CoincidentPoints);
    }
    Ok((dist, d.z))
}

/// Exact zz component of the free-space magnetic Green's function, 1/m.
pub fn freespace_zz(
    r: &Vector3<f64>,
    r_src: &Vector3<f64>,
    kn: &Wavenumbers,
) -> Result<Complex64> {
    let (dist, dz) = separation(r, r_src)?;
    let k = kn.k;
    let g = Complex64::from_polar(1.0 / (4.0 * PI * dist), -k * dist);
    let u = (dz / dist).powi(2);
    let kr = k * dist;
    Ok(g * Complex64::new((1.0 - u) - (1.0 - 3.0 * u) / (kr * kr), -(1.0 - 3.0 * u) / kr))
}

/// Leading 1/R term of [`freespace_zz`]: e^{-ikR} sin²θ / (4πR), with θ the
/// polar angle of `r − r_src` measured from the z axis.
pub fn freespace_zz_farfield(
    r: &Vector3<f64>,
    r_src: &Vector3<f64>,
    kn: &Wavenumbers,
) -> Result<Complex64> {
    let (dist, dz) = separation(r, r_src)?;
    let g = Complex64::from_polar(1.0 / (4.0 * PI * dist), -kn.k * dist);
    let sin2 = 1.0 - (dz / dist).powi(2);
    Ok(g * sin2)
}

/// Full free-space dyadic Green's function, 3×3, 1/m:
/// G = g(R)·(c₁ I + c₂ r̂ r̂ᵀ) from the double gradient of the scalar kernel.
/// Its (3,3) entry equals [`freespace_zz`]; the matrix is symmetric.
pub fn freespace_dyadic(
    r: &Vector3<f64>,
    r_src: &Vector3<f64>,
    kn: &Wavenumbers,
) -> Result<Matrix3<Complex64>> {
    let d = r - r_src;
    let dist = d.norm();
    if dist < 1e-30 {
        return Err(Error::CoincidentPoints);
    }
    let k = kn.k;
    let kr = k * dist;
    let g = Complex64::from_polar(1.0 / (4.0 * PI * dist), -kr);
    let c1 = Complex64::new(1.0 - 1.0 / (kr * kr), -1.0 / kr);
    let c2 = Complex64::new(-1.0 + 3.0 / (kr * kr), 3.0 / kr);
    let rh = d / dist;
    Ok(Matrix3::from_fn(|i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        g * (c1 * delta + c2 * rh[i] * rh[j])
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_wavenumbers, Medium};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn setup() -> (Medium, WaveguideSpec, Wavenumbers) {
        let medium = Medium::vacuum(10.0e9).unwrap();
        let lambda = medium.wavelength();
        let guide = WaveguideSpec::new(
            0.7318 * lambda,
            0.1668 * lambda,
            0.110,
            0.7318 * lambda / 2.0,
            Vector3::zeros(),
        )
        .unwrap();
        let kn = derive_wavenumbers(&medium, &guide).unwrap();
        (medium, guide, kn)
    }

    #[test]
    fn vanishes_on_side_wall() {
        let (_, guide, kn) = setup();
        let src = GuidePoint::new(0.03, guide.height_b, guide.width_a / 2.0);
        let on_wall = GuidePoint::new(0.05, guide.height_b / 2.0, 0.0);
        let g = waveguide_zz(&on_wall, &src, &guide, &kn).unwrap();
        assert_abs_diff_eq!(g.norm(), 0.0, epsilon = 1e-30);
    }

    #[test]
    fn reciprocity_under_swap() {
        let (_, guide, kn) = setup();
        let p = GuidePoint::new(0.021, 0.002, 0.013);
        let q = GuidePoint::new(0.074, 0.004, 0.006);
        let g_pq = waveguide_zz(&p, &q, &guide, &kn).unwrap();
        let g_qp = waveguide_zz(&q, &p, &guide, &kn).unwrap();
        assert_relative_eq!(g_pq.re, g_qp.re, max_relative = 1e-14);
        assert_relative_eq!(g_pq.im, g_qp.im, max_relative = 1e-14);
    }

    #[test]
    fn mirror_symmetry_of_closed_form() {
        let (_, guide, kn) = setup();
        let s = guide.length_s;
        let p = GuidePoint::new(0.021, 0.002, 0.013);
        let q = GuidePoint::new(0.074, 0.004, 0.006);
        let pm = GuidePoint::new(s - p.x, p.y, p.z);
        let qm = GuidePoint::new(s - q.x, q.y, q.z);
        let g = waveguide_zz(&p, &q, &guide, &kn).unwrap();
        let gm = waveguide_zz(&pm, &qm, &guide, &kn).unwrap();
        assert_relative_eq!(g.re, gm.re, max_relative = 1e-12);
    }

    #[test]
    fn fundamental_matches_modal_truncation_10() {
        let (_, guide, kn) = setup();
        let p = GuidePoint::new(0.021, guide.height_b, 0.013);
        let q = GuidePoint::new(0.074, guide.height_b, 0.006);
        let g = waveguide_zz(&p, &q, &guide, &kn).unwrap();
        let gm = waveguide_zz_modal(&p, &q, &guide, &kn, ModalTruncation::default()).unwrap();
        assert_relative_eq!(g.re, gm.re, max_relative = 1e-14);
        assert_relative_eq!(g.im, gm.im, max_relative = 1e-14);
    }

    #[test]
    fn higher_modes_decay_evanescently_at_three_wavelengths() {
        let (medium, guide, kn) = setup();
        let lambda = medium.wavelength();
        let x0 = 0.01;
        let p = GuidePoint::new(x0, guide.height_b, guide.width_a / 2.0);
        let q = GuidePoint::new(x0 + 3.0 * lambda, guide.height_b, guide.width_a / 2.0);
        let fundamental = waveguide_zz(&p, &q, &guide, &kn).unwrap().norm();
        // Each added mode changes the sum by less than 1e-6 of the fundamental.
        let mut prev = waveguide_zz_modal(&p, &q, &guide, &kn, ModalTruncation::default())
            .unwrap();
        for max_m in 2..=4 {
            let cur = waveguide_zz_modal(
                &p,
                &q,
                &guide,
                &kn,
                ModalTruncation { max_m, max_n: 2 },
            )
            .unwrap();
            assert!(
                (cur - prev).norm() / fundamental < 1e-6,
                "mode {max_m} term too large: {}",
                (cur - prev).norm() / fundamental
            );
            prev = cur;
        }
    }

    #[test]
    fn higher_modes_shift_only_the_reactive_part() {
        let (medium, guide, kn) = setup();
        // At coincident points every modal term is real-valued, so the
        // admittance iωεG gains only imaginary content from higher modes.
        let p = GuidePoint::new(0.04, guide.height_b, guide.width_a / 2.0);
        let g10 = waveguide_zz_modal(&p, &p, &guide, &kn, ModalTruncation::default()).unwrap();
        let g55 =
            waveguide_zz_modal(&p, &p, &guide, &kn, ModalTruncation { max_m: 5, max_n: 5 })
                .unwrap();
        let omega_eps = medium.omega() * medium.permittivity;
        let y10 = Complex64::i() * omega_eps * g10;
        let y55 = Complex64::i() * omega_eps * g55;
        assert_abs_diff_eq!(y10.re, y55.re, epsilon = 1e-12 * y55.norm());
        assert!(
            (y55.im - y10.im).abs() > 1e-3 * y10.norm(),
            "higher modes should contribute reactance: {} vs {}",
            y55.im,
            y10.im
        );
    }

    #[test]
    fn cavity_resonance_is_reported() {
        let (medium, _, _) = setup();
        let lambda = medium.wavelength();
        let a = 0.7318 * lambda;
        let kn_a = derive_wavenumbers(
            &medium,
            &WaveguideSpec::new(a, 0.1668 * lambda, 0.1, a / 2.0, Vector3::zeros()).unwrap(),
        )
        .unwrap();
        // S chosen so kx*S is an exact multiple of pi.
        let s = 3.0 * PI / kn_a.k_x.re;
        let guide = WaveguideSpec::new(a, 0.1668 * lambda, s, a / 2.0, Vector3::zeros()).unwrap();
        let p = GuidePoint::new(0.4 * s, guide.height_b, a / 2.0);
        let err = waveguide_zz(&p, &p, &guide, &kn_a).unwrap_err();
        match err {
            Error::CavityResonance { kx_s_over_pi } => {
                assert_relative_eq!(kx_s_over_pi, 3.0, max_relative = 1e-9)
            }
            other => panic!("expected cavity resonance, got {other:?}"),
        }
    }

    #[test]
    fn freespace_pure_spherical_wave_at_broadside() {
        let (_, _, kn) = setup();
        let r_src = Vector3::zeros();
        let dist = 1.0e4 / kn.k; // kR = 1e4
        let r = Vector3::new(dist, 0.0, 0.0);
        let g = freespace_zz(&r, &r_src, &kn).unwrap();
        let expected = Complex64::from_polar(1.0 / (4.0 * PI * dist), -kn.k * dist);
        // Residual near terms are O(1/kR).
        assert!((g - expected).norm() <= 1.5e-4 * expected.norm());
    }

    #[test]
    fn freespace_on_axis_decays_faster_than_radiating_term() {
        let (_, _, kn) = setup();
        let r_src = Vector3::zeros();
        for kr in [30.0, 100.0, 300.0] {
            let dist = kr / kn.k;
            let g = freespace_zz(&Vector3::new(0.0, 0.0, dist), &r_src, &kn).unwrap();
            // On axis the radiating sin²θ term is gone; what is left decays
            // one power of kR faster than a spherical wave.
            let bound = 2.2 / (kr * 4.0 * PI * dist);
            assert!(g.norm() < bound, "kr = {kr}: {} vs {}", g.norm(), bound);
        }
    }

    #[test]
    fn freespace_imaginary_part_limit_near_origin() {
        let (_, _, kn) = setup();
        let r_src = Vector3::zeros();
        // Work at kR = 1e-3 where the (finite) imaginary part is already at
        // its limit -k/6π to O((kR)^2) while the real part diverges.
        let dist = 1.0e-3 / kn.k;
        let g = freespace_zz(&Vector3::new(dist, 0.0, 0.0), &r_src, &kn).unwrap();
        assert_relative_eq!(g.im, -kn.k / (6.0 * PI), max_relative = 1e-5);
        let g2 = freespace_zz(&Vector3::new(0.0, 0.0, dist), &r_src, &kn).unwrap();
        assert_relative_eq!(g2.im, -kn.k / (6.0 * PI), max_relative = 1e-5);
    }

    #[test]
    fn farfield_special_angles() {
        let (_, _, kn) = setup();
        let r_src = Vector3::zeros();
        let dist = 100.0 / kn.k;
        let broadside = freespace_zz_farfield(&Vector3::new(0.0, dist, 0.0), &r_src, &kn).unwrap();
        let expected = Complex64::from_polar(1.0 / (4.0 * PI * dist), -kn.k * dist);
        assert_relative_eq!(broadside.re, expected.re, max_relative = 1e-14);
        let on_axis = freespace_zz_farfield(&Vector3::new(0.0, 0.0, dist), &r_src, &kn).unwrap();
        assert_abs_diff_eq!(on_axis.norm(), 0.0, epsilon = 1e-30);
    }

    #[test]
    fn farfield_error_bound_at_kr_100() {
        let (_, _, kn) = setup();
        let r_src = Vector3::zeros();
        let kr = 100.0;
        let dist = kr / kn.k;
        let theta = PI / 3.0;
        let r = Vector3::new(dist * theta.sin(), 0.0, dist * theta.cos());
        let exact = freespace_zz(&r, &r_src, &kn).unwrap();
        let ff = freespace_zz_farfield(&r, &r_src, &kn).unwrap();
        assert!((ff - exact).norm() / exact.norm() < 2.0 / kr);
    }

    #[test]
    fn farfield_error_decreases_with_kr() {
        let (_, _, kn) = setup();
        let r_src = Vector3::zeros();
        let mut prev = f64::INFINITY;
        for kr in [10.0, 30.0, 100.0, 300.0] {
            let dist = kr / kn.k;
            let mut worst: f64 = 0.0;
            for i in 1..20 {
                let theta = PI * i as f64 / 20.0;
                let r = Vector3::new(dist * theta.sin(), 0.0, dist * theta.cos());
                let exact = freespace_zz(&r, &r_src, &kn).unwrap();
                let ff = freespace_zz_farfield(&r, &r_src, &kn).unwrap();
                worst = worst.max((ff - exact).norm() / exact.norm());
            }
            assert!(worst < prev, "kr = {kr}: {worst} !< {prev}");
            prev = worst;
        }
    }

    #[test]
    fn dyadic_zz_entry_matches_scalar() {
        let (_, _, kn) = setup();
        let r_src = Vector3::new(0.01, -0.02, 0.005);
        for r in [
            Vector3::new(0.4, 0.1, -0.3),
            Vector3::new(-0.02, 0.09, 0.04),
            Vector3::new(0.013, 0.002, 0.11),
        ] {
            let dy = freespace_dyadic(&r, &r_src, &kn).unwrap();
            let zz = freespace_zz(&r, &r_src, &kn).unwrap();
            assert_relative_eq!(dy[(2, 2)].re, zz.re, max_relative = 1e-12);
            assert_relative_eq!(dy[(2, 2)].im, zz.im, max_relative = 1e-12);
        }
    }

    #[test]
    fn dyadic_farfield_column_is_transverse() {
        let (_, _, kn) = setup();
        let r_src = Vector3::zeros();
        let dist = 1.0e4 / kn.k;
        let r = Vector3::new(dist, 0.0, 0.0); // θ = π/2 along x
        let dy = freespace_dyadic(&r, &r_src, &kn).unwrap();
        let col = dy.column(2);
        let rh = r / dist;
        let radial: Complex64 = (0..3).map(|i| Complex64::new(rh[i], 0.0) * col[i]).sum();
        // Radial leakage is smaller than the transverse field by O(1/kR).
        let transverse = col.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        assert!(radial.norm() < 3.0 / 1.0e4 * transverse);
    }

    #[test]
    fn coincident_points_are_an_error() {
        let (_, _, kn) = setup();
        let p = Vector3::new(0.1, 0.2, 0.3);
        assert!(matches!(
            freespace_zz(&p, &p, &kn),
            Err(Error::CoincidentPoints)
        ));
        assert!(matches!(
            freespace_dyadic(&p, &p, &kn),
            Err(Error::CoincidentPoints)
        ));
    }

    proptest! {
        #[test]
        fn prop_freespace_reciprocity(
            ax in -0.5f64..0.5, ay in -0.5f64..0.5, az in -0.5f64..0.5,
            bx in 0.6f64..1.5, by in -0.5f64..0.5, bz in -0.5f64..0.5,
        ) {
            let (_, _, kn) = setup();
            let p = Vector3::new(ax, ay, az);
            let q = Vector3::new(bx, by, bz);
            let g_pq = freespace_zz(&p, &q, &kn).unwrap();
            let g_qp = freespace_zz(&q, &p, &kn).unwrap();
            prop_assert!((g_pq - g_qp).norm() <= 1e-14 * g_pq.norm());
        }

        #[test]
        fn prop_dyadic_symmetric(
            bx in 0.2f64..1.5, by in -0.5f64..0.5, bz in -0.5f64..0.5,
        ) {
            let (_, _, kn) = setup();
            let p = Vector3::zeros();
            let q = Vector3::new(bx, by, bz);
            let dy = freespace_dyadic(&p, &q, &kn).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert!((dy[(i, j)] - dy[(j, i)]).norm() <= 1e-14 * dy[(i, j)].norm() + 1e-30);
                }
            }
        }

        #[test]
        fn prop_waveguide_reciprocity(
            x1 in 0.001f64..0.109, x2 in 0.001f64..0.109,
            z1 in 0.0f64..1.0, z2 in 0.0f64..1.0,
        ) {
            let (_, guide, kn) = setup();
            let p = GuidePoint::new(x1, guide.height_b, z1 * guide.width_a);
            let q = GuidePoint::new(x2, guide.height_b, z2 * guide.width_a);
            let g_pq = waveguide_zz(&p, &q, &guide, &kn).unwrap();
            let g_qp = waveguide_zz(&q, &p, &guide, &kn).unwrap();
            prop_assert!((g_pq - g_qp).norm() <= 1e-13 * (g_pq.norm() + 1e-30));
        }
    }
}
