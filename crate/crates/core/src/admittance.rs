//! Mutual-admittance blocks of the multiport network.
//!
//! Every antenna (feed, radiating element, user) is a z-oriented magnetic
//! dipole, so each mutual admittance is `iωε` times the zz Green's function
//! of the region connecting the two ports:
//!
//! * `Y_tt` — feed self-admittances (diagonal; isolated RF chains),
//! * `Y_st` — feed-to-element coupling through the waveguide (zero across
//!   different guides: shorted minimum-scattering elements are invisible),
//! * `Y_ss` — element-to-element coupling through air (image-doubled) plus
//!   the waveguide when the pair shares one; the self term keeps the
//!   radiation conductance `kωε/3π` and drops the divergent free-space
//!   reactance, which a physical tuner absorbs into `Y_s`,
//! * `Y_rr` — user-to-user coupling in free space (self term `kωε/6π`),
//! * `Y_rs` — the wireless channel (deterministic line-of-sight here;
//!   stochastic models live in [`crate::channel`]).
//!
//! [`quadrature_admittance_oracle`] provides the independent route to the
//! normalized mutual conductances via a far-field gain-pattern integral.

use nalgebra::Vector3;
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::greens::{self, GuidePoint};
use crate::model::{Medium, Scenario, WaveguideSpec, POSITION_TOL};
use crate::quad::gauss_legendre_on;
use crate::{CMatrix, CVector, Error, Result};

fn i_omega_eps(medium: &Medium) -> Complex64 {
    Complex64::new(0.0, medium.omega() * medium.permittivity)
}

/// Radiation conductance of an element on the conducting plane, kωε/3π, S.
pub fn element_self_conductance(medium: &Medium) -> f64 {
    medium.wavenumber() * medium.omega() * medium.permittivity / (3.0 * PI)
}

/// Radiation conductance of a user dipole in free space, kωε/6π, S.
pub fn user_self_conductance(medium: &Medium) -> f64 {
    medium.wavenumber() * medium.omega() * medium.permittivity / (6.0 * PI)
}

/// Feed-to-element coupling, L×N. Entries vanish across different guides.
pub fn build_yst(sc: &Scenario) -> Result<CMatrix> {
    let ioe = i_omega_eps(&sc.medium);
    let mut y = CMatrix::zeros(sc.n_elements(), sc.n_guides());
    for (l, el) in sc.elements.iter().enumerate() {
        let n = el.guide;
        let guide = &sc.guides[n];
        let g = greens::waveguide_zz(
            &GuidePoint::from_local(&el.local),
            &GuidePoint::from_local(&guide.feed_local()),
            guide,
            sc.wavenumbers(n),
        )?;
        y[(l, n)] = ioe * g;
    }
    Ok(y)
}

/// Feed self-admittances, N×N diagonal:
/// (Y_tt)_nn = −2i k_x sin²(π z_n'/a) cos(k_x S) / (a b ωμ sin(k_x S)).
pub fn build_ytt(sc: &Scenario) -> Result<CMatrix> {
    let omega_mu = sc.medium.omega() * sc.medium.permeability;
    let mut y = CMatrix::zeros(sc.n_guides(), sc.n_guides());
    for (n, guide) in sc.guides.iter().enumerate() {
        let kn = sc.wavenumbers(n);
        let k_x = kn.k_x;
        let sin_ks = (k_x * guide.length_s).sin();
        if sin_ks.norm() < 1e-12 {
            return Err(Error::CavityResonance {
                kx_s_over_pi: k_x.re * guide.length_s / PI,
            });
        }
        let sin2 = (PI * guide.feed_z / guide.width_a).sin().powi(2);
        y[(n, n)] = Complex64::new(0.0, -2.0) * k_x * sin2 * (k_x * guide.length_s).cos()
            / (guide.width_a * guide.height_b * omega_mu * sin_ks);
    }
    Ok(y)
}

/// Element-to-element coupling, L×L symmetric. The diagonal is the self
/// admittance kωε/3π + iωε G^(w)(r_l, r_l).
pub fn build_yss(sc: &Scenario) -> Result<CMatrix> {
    let l_total = sc.n_elements();
    let ioe = i_omega_eps(&sc.medium);
    let g_self = element_self_conductance(&sc.medium);
    let mut y = CMatrix::zeros(l_total, l_total);
    for l in 0..l_total {
        for lp in l..l_total {
            let el = &sc.elements[l];
            let elp = &sc.elements[lp];
            if l == lp {
                let guide = &sc.guides[el.guide];
                let p = GuidePoint::from_local(&el.local);
                let gw = greens::waveguide_zz(&p, &p, guide, sc.wavenumbers(el.guide))?;
                y[(l, l)] = Complex64::new(g_self, 0.0) + ioe * gw;
                continue;
            }
            if (el.global - elp.global).norm() < POSITION_TOL {
                return Err(Error::DuplicatePositions {
                    kind: "element",
                    first: l,
                    second: lp,
                });
            }
            let kn = sc.wavenumbers(el.guide);
            let mut g = 2.0 * greens::freespace_zz(&el.global, &elp.global, kn)?;
            if el.guide == elp.guide {
                let guide = &sc.guides[el.guide];
                g += greens::waveguide_zz(
                    &GuidePoint::from_local(&el.local),
                    &GuidePoint::from_local(&elp.local),
                    guide,
                    kn,
                )?;
            }
            let v = ioe * g;
            y[(l, lp)] = v;
            y[(lp, l)] = v;
        }
    }
    Ok(y)
}

/// User-to-user coupling, M×M symmetric, free space; diagonal kωε/6π.
pub fn build_yrr(sc: &Scenario) -> Result<CMatrix> {
    let m_total = sc.n_users();
    let ioe = i_omega_eps(&sc.medium);
    let g_self = user_self_conductance(&sc.medium);
    let kn = sc.wavenumbers(0);
    let mut y = CMatrix::zeros(m_total, m_total);
    for m in 0..m_total {
        y[(m, m)] = Complex64::new(g_self, 0.0);
        for mp in (m + 1)..m_total {
            if (sc.users[m] - sc.users[mp]).norm() < POSITION_TOL {
                return Err(Error::DuplicatePositions {
                    kind: "user",
                    first: m,
                    second: mp,
                });
            }
            let v = ioe * greens::freespace_zz(&sc.users[m], &sc.users[mp], kn)?;
            y[(m, mp)] = v;
            y[(mp, m)] = v;
        }
    }
    Ok(y)
}

/// Deterministic line-of-sight channel, M×L:
/// (Y_rs)_{m,l} = −2iωε G^(a)(r_m, r_l), or its sin²θ/R far-field form.
pub fn build_yrs_los(sc: &Scenario, farfield: bool) -> Result<CMatrix> {
    let kn = sc.wavenumbers(0);
    let ioe = i_omega_eps(&sc.medium);
    let mut y = CMatrix::zeros(sc.n_users(), sc.n_elements());
    for (m, user) in sc.users.iter().enumerate() {
        for (l, el) in sc.elements.iter().enumerate() {
            let g = if farfield {
                greens::freespace_zz_farfield(user, &el.global, kn)?
            } else {
                greens::freespace_zz(user, &el.global, kn)?
            };
            y[(m, l)] = -2.0 * ioe * g;
        }
    }
    Ok(y)
}

/// Connector admittance matched to the feed self-admittance of a
/// semi-infinite guide: Y_0 = 2 k_x sin²(π feed_z/a) / (a b ωμ).
pub fn connector_admittance_auto(sc: &Scenario) -> Result<f64> {
    connector_auto(&sc.medium, &sc.guides[0])
}

pub(crate) fn connector_auto(medium: &Medium, guide: &WaveguideSpec) -> Result<f64> {
    let kn = crate::model::derive_wavenumbers(medium, guide)?;
    if kn.k_x.im != 0.0 || kn.k_x.re <= 0.0 {
        return Err(Error::EvanescentMode);
    }
    let sin2 = (PI * guide.feed_z / guide.width_a).sin().powi(2);
    Ok(2.0 * kn.k_x.re * sin2 / (guide.width_a * guide.height_b * medium.omega() * medium.permeability))
}

/// Normalized real mutual admittance between two minimum-scattering antennas
/// computed from their far-field gain pattern:
///
/// Re{Y_nm / Y_nn} = ∫∫ (G(θ,φ)/4π) e^{−i k r̂·(r_n−r_m)} sinθ dθ dφ
///
/// integrated over the front half-space (θ, φ ∈ [0, π]); `pattern_gain` must
/// vanish on the back half-space and integrate to the radiation efficiency.
/// The quadrature order is raised until two consecutive estimates agree to
/// 1e-8 relative.
pub fn quadrature_admittance_oracle<F>(
    pattern_gain: F,
    r_n: &Vector3<f64>,
    r_m: &Vector3<f64>,
    kn: &crate::model::Wavenumbers,
) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let d = r_n - r_m;
    let k = kn.k;
    let eval = |order: usize| -> Complex64 {
        let (ts, tw) = gauss_legendre_on(order, 0.0, PI);
        let (ps, pw) = gauss_legendre_on(order, 0.0, PI);
        let mut acc = Complex64::new(0.0, 0.0);
        for (t, wt) in ts.iter().zip(&tw) {
            let (st, ct) = t.sin_cos();
            for (p, wp) in ps.iter().zip(&pw) {
                let (sp, cp) = p.sin_cos();
                let rhat_dot = st * cp * d.x + st * sp * d.y + ct * d.z;
                let phase = Complex64::from_polar(1.0, -k * rhat_dot);
                acc += wt * wp * pattern_gain(*t, *p) / (4.0 * PI) * st * phase;
            }
        }
        acc
    };
    let tol = 1e-8;
    let mut prev = eval(16);
    for order in [24, 32, 48, 64, 96, 128] {
        let cur = eval(order);
        let change = (cur - prev).norm() / cur.norm().max(1e-6);
        if change <= tol {
            return Ok(cur.re);
        }
        prev = cur;
    }
    let achieved = {
        let cur = eval(192);
        (cur - prev).norm() / cur.norm().max(1e-6)
    };
    Err(Error::QuadratureNotConverged {
        achieved,
        tolerance: tol,
        estimate: prev.re,
    })
}

/// Gain pattern of a z-oriented magnetic dipole on a conducting plane:
/// 3 sin²θ on the front half-space.
pub fn dipole_on_plane_gain(theta: f64, _phi: f64) -> f64 {
    3.0 * theta.sin().powi(2)
}

/// How the wireless-channel block Y_rs is obtained when assembling an
/// [`AdmittanceSet`] from a scenario.
#[derive(Debug, Clone)]
pub enum YrsMode {
    /// Exact line-of-sight Green's function.
    LosExact,
    /// Far-field (Friis-like) line-of-sight form.
    LosFarField,
    /// Caller-supplied channel matrix, M×L.
    Explicit(CMatrix),
}

/// The five coupling blocks plus the diagonal termination loads.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmittanceSet {
    /// N×N diagonal feed self-admittances.
    pub y_tt: CMatrix,
    /// L×N feed-to-element coupling.
    pub y_st: CMatrix,
    /// L×L element coupling.
    pub y_ss: CMatrix,
    /// M×M user coupling.
    pub y_rr: CMatrix,
    /// M×L channel.
    pub y_rs: CMatrix,
    /// Diagonal of the L×L termination matrix Y_s.
    pub y_s: CVector,
    /// Diagonal of the M×M user load matrix Y_r.
    pub y_r: CVector,
}

impl AdmittanceSet {
    pub fn from_scenario(sc: &Scenario, yrs: YrsMode) -> Result<Self> {
        let y_rs = match yrs {
            YrsMode::LosExact => build_yrs_los(sc, false)?,
            YrsMode::LosFarField => build_yrs_los(sc, true)?,
            YrsMode::Explicit(m) => {
                // An empty dump carries no column count; normalize its shape.
                if m.nrows() == 0 && sc.n_users() == 0 {
                    CMatrix::zeros(0, sc.n_elements())
                } else if m.nrows() != sc.n_users() || m.ncols() != sc.n_elements() {
                    return Err(Error::DimensionMismatch(format!(
                        "explicit Y_rs is {}x{}, scenario needs {}x{}",
                        m.nrows(),
                        m.ncols(),
                        sc.n_users(),
                        sc.n_elements()
                    )));
                } else {
                    m
                }
            }
        };
        Ok(Self {
            y_tt: build_ytt(sc)?,
            y_st: build_yst(sc)?,
            y_ss: build_yss(sc)?,
            y_rr: build_yrr(sc)?,
            y_rs,
            y_s: CVector::from_vec(sc.y_s.clone()),
            y_r: CVector::from_vec(sc.y_r.clone()),
        })
    }

    /// Replace the termination diagonal, keeping the coupling blocks.
    pub fn with_terminations(&self, y_s: CVector) -> Result<Self> {
        if y_s.len() != self.y_ss.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} terminations, got {}",
                self.y_ss.nrows(),
                y_s.len()
            )));
        }
        let mut adm = self.clone();
        adm.y_s = y_s;
        Ok(adm)
    }

    pub fn n_feeds(&self) -> usize {
        self.y_tt.nrows()
    }

    pub fn n_elements(&self) -> usize {
        self.y_ss.nrows()
    }

    pub fn n_users(&self) -> usize {
        self.y_rr.nrows()
    }

    /// Y_s + Y_ss, the matrix every solve factors.
    pub(crate) fn loaded_element_block(&self) -> CMatrix {
        let mut a = self.y_ss.clone();
        for l in 0..self.y_s.len() {
            a[(l, l)] += self.y_s[l];
        }
        a
    }

    /// Y_r + Y_rr.
    pub(crate) fn loaded_user_block(&self) -> CMatrix {
        let mut a = self.y_rr.clone();
        for m in 0..self.y_r.len() {
            a[(m, m)] += self.y_r[m];
        }
        a
    }
}
