//! Multiport network solution: currents, voltages, powers, reflection and
//! transmission coefficients, the equivalent MIMO channel, and the
//! Lorentzian passivity locus.
//!
//! With the feed-to-user block zero (minimum-scattering elements), the
//! network equations reduce to two solves: the loaded element block
//! `Y_s + Y_ss` and, for the bilateral case, the user block corrected by the
//! back-coupling term `Y_rs (Y_s+Y_ss)⁻¹ Y_rsᵀ`. The unilateral solver drops
//! that correction, which decays with twice the pathloss and is the standard
//! far-field assumption.
//!
//! Reflection is excitation-dependent: the input admittance at a feed port
//! mixes the currents of every port through `Y_p`, so Γ is a property of the
//! (configuration, excitation) pair, not of the antenna alone.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::admittance::AdmittanceSet;
use crate::linalg::{condition, solve_square};
use crate::{CMatrix, CVector, Error, Result, Warning};

/// Condition number above which a solve attaches an ill-conditioning warning.
const COND_WARN: f64 = 1e12;

/// How the transmitter side is driven.
#[derive(Debug, Clone, PartialEq)]
pub enum Excitation {
    /// Currents entering the network, j_t (volts).
    FixedTransmitCurrents(CVector),
    /// Currents supplied by the RF chains, j; j_t follows from the
    /// connector admittance and the reflection at each port.
    FixedFeedCurrents(CVector),
    /// Total supplied power with fixed relative feed weights: j = ρ·w with
    /// ρ > 0 chosen so the total supplied power matches the target.
    FixedSuppliedPower { total_watts: f64, weights: CVector },
}

impl Excitation {
    /// Equal-amplitude, zero-phase feed currents supplying `total_watts`.
    pub fn equal_split_power(total_watts: f64, n_feeds: usize) -> Self {
        Excitation::FixedSuppliedPower {
            total_watts,
            weights: CVector::from_element(n_feeds, Complex64::new(1.0, 0.0)),
        }
    }
}

/// Per-port quantities that require a nonzero current at every feed.
#[derive(Debug, Clone, PartialEq)]
pub struct PortQuantities {
    /// Excitation-dependent input admittance Y_in per port, S.
    pub y_in: CVector,
    /// Diagonal of the reflection coefficient matrix Γ.
    pub gamma: CVector,
    /// Diagonal of the transmission matrix T = I + Γ.
    pub transmission: CVector,
    /// RF-chain (supplied) currents j = T⁻¹ j_t.
    pub j: CVector,
    /// Total supplied power P_s, W.
    pub p_s: f64,
}

/// Complete state of a solved network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSolution {
    pub j_t: CVector,
    pub v_t: CVector,
    pub j_s: CVector,
    pub v_s: CVector,
    pub j_r: CVector,
    pub v_r: CVector,
    /// RF-chain admittance matrix Y_p = Y_tt − Y_stᵀ (Y_s+Y_ss)⁻¹ Y_st.
    pub y_p: CMatrix,
    /// Reflection data; `None` only for an all-zero excitation.
    pub port: Option<PortQuantities>,
    /// Transmitted power Re{j_tᴴ Y_p j_t}/2, W.
    pub p_t: f64,
    /// Per-user received powers, W.
    pub p_r: Vec<f64>,
    /// Per-element powers dissipated in the terminations, W.
    pub p_d: Vec<f64>,
    pub warnings: Vec<Warning>,
}

impl NetworkSolution {
    /// Total supplied power; zero for a zero excitation.
    pub fn p_s(&self) -> f64 {
        self.port.as_ref().map_or(0.0, |p| p.p_s)
    }
}

/// Power summary in the order (transmitted, supplied, received, dissipated).
#[derive(Debug, Clone, PartialEq)]
pub struct Powers {
    pub p_t: f64,
    pub p_s: f64,
    pub p_r: Vec<f64>,
    pub p_d: Vec<f64>,
}

/// Y_p = Y_tt − Y_stᵀ (Y_s + Y_ss)⁻¹ Y_st, the admittance seen by the
/// RF chains with far-field users.
pub fn rf_chain_admittance(adm: &AdmittanceSet) -> Result<CMatrix> {
    let a = adm.loaded_element_block();
    let (x, _) = solve_square(&a, &adm.y_st, "Y_s + Y_ss")?;
    Ok(&adm.y_tt - adm.y_st.transpose() * x)
}

/// Input admittances, reflection and transmission coefficients at the feeds.
///
/// Every port must carry a nonzero current; Y_in is the ratio (Y_p j_t)_n /
/// (j_t)_n and Γ_n = −(Y_in − Y_0)/(Y_in + Y_0).
pub fn reflection_transmission(
    y_p: &CMatrix,
    j_t: &CVector,
    y0: f64,
) -> Result<(CVector, CVector, CVector)> {
    let n = y_p.nrows();
    if j_t.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "j_t has {} entries for {n} ports",
            j_t.len()
        )));
    }
    let v = y_p * j_t;
    let mut y_in = CVector::zeros(n);
    let mut gamma = CVector::zeros(n);
    let mut t = CVector::zeros(n);
    for p in 0..n {
        if j_t[p].norm() == 0.0 {
            return Err(Error::UndefinedInputAdmittance { port: p });
        }
        y_in[p] = v[p] / j_t[p];
        let denom = y_in[p] + y0;
        if denom.norm() < 1e-300 {
            return Err(Error::InfiniteReflection { port: p });
        }
        gamma[p] = -(y_in[p] - y0) / denom;
        t[p] = Complex64::new(1.0, 0.0) + gamma[p];
    }
    Ok((y_in, gamma, t))
}

fn supplied_power(y_p: &CMatrix, j_t: &CVector, gamma: &CVector) -> f64 {
    let v = y_p * j_t;
    let mut p = 0.0;
    for n in 0..j_t.len() {
        p += (j_t[n].conj() * v[n]).re / (1.0 - gamma[n].norm_sqr()) / 2.0;
    }
    p / 1.0
}

/// Resolve an excitation into the network-entering currents j_t.
fn resolve_excitation(
    exc: &Excitation,
    y_p: &CMatrix,
    y0: f64,
) -> Result<CVector> {
    let n = y_p.nrows();
    match exc {
        Excitation::FixedTransmitCurrents(j_t) => {
            if j_t.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "j_t has {} entries for {n} feeds",
                    j_t.len()
                )));
            }
            Ok(j_t.clone())
        }
        Excitation::FixedFeedCurrents(j) => {
            if j.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "j has {} entries for {n} feeds",
                    j.len()
                )));
            }
            // Port relation (Y_p + Y_0 I) j_t = 2 Y_0 j is linear and
            // reproduces j_t = (I + Γ) j once Γ is formed from the result.
            let mut a = y_p.clone();
            for p in 0..n {
                a[(p, p)] += Complex64::new(y0, 0.0);
            }
            let rhs = CMatrix::from_column_slice(n, 1, j.as_slice()) * Complex64::new(2.0 * y0, 0.0);
            let (x, _) = solve_square(&a, &rhs, "Y_p + Y_0")?;
            Ok(CVector::from_column_slice(x.column(0).as_slice()))
        }
        Excitation::FixedSuppliedPower {
            total_watts,
            weights,
        } => {
            if !(*total_watts > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "supplied power target must be positive, got {total_watts}"
                )));
            }
            if weights.norm() == 0.0 {
                return Err(Error::InvalidInput("supplied-power weights are all zero".into()));
            }
            let j_t_w = resolve_excitation(&Excitation::FixedFeedCurrents(weights.clone()), y_p, y0)?;
            let (_, gamma, _) = reflection_transmission(y_p, &j_t_w, y0)?;
            let p_w = supplied_power(y_p, &j_t_w, &gamma);
            if !(p_w > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "supplied power for the given weights is {p_w}; configuration is not passive"
                )));
            }
            // P_s is quadratic in the overall current scale.
            let rho = (total_watts / p_w).sqrt();
            Ok(j_t_w * Complex64::new(rho, 0.0))
        }
    }
}

fn solve(
    adm: &AdmittanceSet,
    exc: &Excitation,
    y0: f64,
    bilateral: bool,
) -> Result<NetworkSolution> {
    let l = adm.n_elements();
    let m = adm.n_users();
    let mut warnings = Vec::new();

    let a = adm.loaded_element_block();
    let (a_inv_yst, cond_a) = solve_square(&a, &adm.y_st, "Y_s + Y_ss")?;
    if cond_a > COND_WARN {
        warnings.push(Warning::IllConditioned {
            block: "Y_s + Y_ss",
            condition: cond_a,
        });
    }
    let y_p = &adm.y_tt - adm.y_st.transpose() * &a_inv_yst;

    let j_t = resolve_excitation(exc, &y_p, y0)?;

    // Element and user currents.
    let (j_s, j_r) = if m == 0 {
        (-(&a_inv_yst * &j_t), CVector::zeros(0))
    } else if bilateral {
        let (a_inv_yrs_t, _) = solve_square(&a, &adm.y_rs.transpose(), "Y_s + Y_ss")?;
        let user_block = adm.loaded_user_block() - &adm.y_rs * &a_inv_yrs_t;
        let cond_u = condition(&user_block);
        if cond_u > COND_WARN {
            warnings.push(Warning::IllConditioned {
                block: "bilateral user",
                condition: cond_u,
            });
        }
        let drive = &adm.y_rs * (&a_inv_yst * &j_t);
        let (j_r_m, _) = solve_square(
            &user_block,
            &CMatrix::from_column_slice(m, 1, drive.as_slice()),
            "bilateral user",
        )?;
        let j_r = CVector::from_column_slice(j_r_m.column(0).as_slice());
        let rhs = &adm.y_st * &j_t + adm.y_rs.transpose() * &j_r;
        let (x, _) = solve_square(&a, &CMatrix::from_column_slice(l, 1, rhs.as_slice()), "Y_s + Y_ss")?;
        (-CVector::from_column_slice(x.column(0).as_slice()), j_r)
    } else {
        let j_s = -(&a_inv_yst * &j_t);
        let user_block = adm.loaded_user_block();
        let cond_u = condition(&user_block);
        if cond_u > COND_WARN {
            warnings.push(Warning::IllConditioned {
                block: "Y_r + Y_rr",
                condition: cond_u,
            });
        }
        let drive = -(&adm.y_rs * &j_s);
        let (j_r_m, _) = solve_square(
            &user_block,
            &CMatrix::from_column_slice(m, 1, drive.as_slice()),
            "Y_r + Y_rr",
        )?;
        (j_s, CVector::from_column_slice(j_r_m.column(0).as_slice()))
    };

    // Voltages from the network rows and Ohm's law at the loads.
    let v_t = &adm.y_tt * &j_t + adm.y_st.transpose() * &j_s;
    let v_s = CVector::from_fn(l, |i, _| -adm.y_s[i] * j_s[i]);
    let v_r = CVector::from_fn(m, |i, _| -adm.y_r[i] * j_r[i]);

    let p_t = (j_t.adjoint() * &y_p * &j_t)[(0, 0)].re / 2.0;
    let p_r = (0..m)
        .map(|i| j_r[i].norm_sqr() * adm.y_r[i].re / 2.0)
        .collect();
    let p_d: Vec<f64> = (0..l)
        .map(|i| j_s[i].norm_sqr() * adm.y_s[i].re / 2.0)
        .collect();

    let port = if j_t.norm() == 0.0 {
        None
    } else {
        let (y_in, gamma, t) = reflection_transmission(&y_p, &j_t, y0)?;
        for p in 0..gamma.len() {
            let mag = gamma[p].norm();
            if mag >= 1.0 {
                warnings.push(Warning::ReflectionExceedsUnity { port: p, magnitude: mag });
            }
        }
        let p_s = supplied_power(&y_p, &j_t, &gamma);
        let j = CVector::from_fn(j_t.len(), |i, _| j_t[i] / t[i]);
        Some(PortQuantities {
            y_in,
            gamma,
            transmission: t,
            j,
            p_s,
        })
    };

    Ok(NetworkSolution {
        j_t,
        v_t,
        j_s,
        v_s,
        j_r,
        v_r,
        y_p,
        port,
        p_t,
        p_r,
        p_d,
        warnings,
    })
}

/// Solve with the exact user-to-array back-coupling term.
pub fn solve_bilateral(adm: &AdmittanceSet, exc: &Excitation, y0: f64) -> Result<NetworkSolution> {
    solve(adm, exc, y0, true)
}

/// Solve under the far-field (unilateral) assumption.
pub fn solve_unilateral(adm: &AdmittanceSet, exc: &Excitation, y0: f64) -> Result<NetworkSolution> {
    solve(adm, exc, y0, false)
}

/// Recompute the power summary of a solved network from its currents.
pub fn powers(solution: &NetworkSolution, adm: &AdmittanceSet) -> Powers {
    let p_t = (solution.j_t.adjoint() * &solution.y_p * &solution.j_t)[(0, 0)].re / 2.0;
    Powers {
        p_t,
        p_s: solution.p_s(),
        p_r: (0..adm.n_users())
            .map(|i| solution.j_r[i].norm_sqr() * adm.y_r[i].re / 2.0)
            .collect(),
        p_d: (0..adm.n_elements())
            .map(|i| solution.j_s[i].norm_sqr() * adm.y_s[i].re / 2.0)
            .collect(),
    }
}

/// Equivalent MIMO channel H_eq = (Y_r+Y_rr)⁻¹ Y_rs (Y_s+Y_ss)⁻¹ Y_st, M×N.
pub fn equivalent_channel(adm: &AdmittanceSet) -> Result<CMatrix> {
    let a = adm.loaded_element_block();
    let (x, _) = solve_square(&a, &adm.y_st, "Y_s + Y_ss")?;
    let drive = &adm.y_rs * x;
    let (h, _) = solve_square(&adm.loaded_user_block(), &drive, "Y_r + Y_rr")?;
    Ok(h)
}

/// Received symbols y = H_eq B x + n with circularly symmetric noise of
/// variance σ_n² per user; deterministic per seed.
pub fn transmit_signal(
    h_eq: &CMatrix,
    precoder: &CMatrix,
    x: &CVector,
    noise_variance: f64,
    seed: u64,
) -> Result<CVector> {
    if precoder.nrows() != h_eq.ncols() || precoder.ncols() != x.len() {
        return Err(Error::DimensionMismatch(format!(
            "H_eq is {}x{}, B is {}x{}, x has {} entries",
            h_eq.nrows(),
            h_eq.ncols(),
            precoder.nrows(),
            precoder.ncols(),
            x.len()
        )));
    }
    if noise_variance < 0.0 {
        return Err(Error::InvalidInput(format!(
            "noise variance must be nonnegative, got {noise_variance}"
        )));
    }
    let mut y = h_eq * (precoder * x);
    let std = (noise_variance / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in y.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *v += Complex64::new(std * re, std * im);
    }
    Ok(y)
}

/// The network reduced to a signal-processing link: y = H_eq B x + n.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalentChannel {
    /// M×N equivalent channel between the RF chains and the users.
    pub h_eq: CMatrix,
    /// N×M digital precoder.
    pub precoder: CMatrix,
    /// Per-user noise variance σ_n².
    pub noise_variance: f64,
}

impl EquivalentChannel {
    pub fn new(adm: &AdmittanceSet, precoder: CMatrix, noise_variance: f64) -> Result<Self> {
        let h_eq = equivalent_channel(adm)?;
        if precoder.nrows() != h_eq.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "precoder has {} rows for {} feeds",
                precoder.nrows(),
                h_eq.ncols()
            )));
        }
        Ok(Self {
            h_eq,
            precoder,
            noise_variance,
        })
    }

    /// Received symbols for one transmit vector; deterministic per seed.
    pub fn transmit(&self, x: &CVector, seed: u64) -> Result<CVector> {
        transmit_signal(&self.h_eq, &self.precoder, x, self.noise_variance, seed)
    }
}

/// One point of the passive scattering locus of a lossless termination
/// sweep: ϑ = 1/(Re{Y_ss} + i c).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianResponse {
    /// Termination susceptance offset c, S.
    pub c: f64,
    /// Phase ∠ϑ = −atan(c / Re{Y_ss}), in (−π/2, π/2).
    pub angle: f64,
    /// Amplitude |ϑ| = 1/√(c² + Re{Y_ss}²).
    pub magnitude: f64,
}

impl LorentzianResponse {
    /// The response as a complex number.
    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(self.magnitude, self.angle)
    }
}

/// Scattering response of a single lossless-terminated element as its
/// susceptance sweeps through `c_values`. The locus is the circle of radius
/// 1/(2 Re{Y_ss}) centred on that same value.
pub fn lorentzian_sweep(re_yss: f64, c_values: &[f64]) -> Result<Vec<LorentzianResponse>> {
    if !(re_yss > 0.0) {
        return Err(Error::PassivityViolation(re_yss));
    }
    Ok(c_values
        .iter()
        .map(|&c| LorentzianResponse {
            c,
            angle: -(c / re_yss).atan(),
            magnitude: 1.0 / (c * c + re_yss * re_yss).sqrt(),
        })
        .collect())
}
