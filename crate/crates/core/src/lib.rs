//! Circuital electromagnetic model for waveguide-fed dynamic metasurface
//! antennas (DMAs).
//!
//! A DMA is a set of parallel rectangular waveguides etched into a conducting
//! plane, each feeding a row of tunable sub-wavelength radiators. This crate
//! models the whole transmit chain as a multiport admittance network:
//!
//! * [`model`] — physical constants, wavenumbers, and the scenario data model
//!   (geometry, terminations, users).
//! * [`greens`] — closed-form Green's functions: fundamental-mode and modal
//!   rectangular-waveguide kernels, and the free-space scalar/dyadic kernels.
//! * [`admittance`] — the mutual-admittance blocks `Y_tt`, `Y_st`, `Y_ss`,
//!   `Y_rr`, `Y_rs` plus the connector admittance and a gain-pattern
//!   quadrature oracle for mutual conductances.
//! * [`channel`] — wireless channel models: deterministic line-of-sight and
//!   spatially correlated Rayleigh fading with a seedable sampler.
//! * [`network`] — multiport solves (currents, voltages, powers, reflection
//!   and transmission coefficients), the equivalent MIMO channel, and the
//!   Lorentzian passivity locus.
//! * [`radiation`] — in-guide field synthesis, far-field patterns, gain grids
//!   and cuts, and radiated power by hemisphere quadrature.
//! * [`io`] — CSV dump/load formats shared with the command-line tool.
//!
//! Conventions: SI units throughout, admittances in siemens, time dependence
//! `e^{+iωt}` with outgoing waves `e^{-ikR}`. The radiating wall of every
//! waveguide lies in the global `y = 0` plane and users occupy `y > 0`.

// Validation sites use `!(x > 0.0)` so that NaN inputs fail the check too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admittance;
pub mod channel;
pub mod greens;
pub mod io;
mod linalg;
pub mod model;
pub mod network;
mod quad;
pub mod radiation;

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Dense complex matrix used for all admittance blocks and solves.
pub type CMatrix = DMatrix<Complex64>;
/// Dense complex vector (currents, voltages, diagonal loads).
pub type CVector = DVector<Complex64>;

pub use admittance::{
    build_yrr, build_yrs_los, build_yss, build_yst, build_ytt, connector_admittance_auto,
    quadrature_admittance_oracle, AdmittanceSet, YrsMode,
};
pub use channel::{
    ray_sum_channel, ray_sum_channel_with_rays, rayleigh_covariance, sample_rayleigh,
    ChannelModel, CovarianceStack, RaySample, StochasticChannelParams,
};
pub use greens::{GuidePoint, ModalTruncation};
pub use model::{derive_wavenumbers, Element, Medium, Scenario, ScenarioBuilder, WaveguideSpec, Wavenumbers};
pub use network::{
    equivalent_channel, lorentzian_sweep, powers, reflection_transmission, rf_chain_admittance,
    solve_bilateral, solve_unilateral, transmit_signal, EquivalentChannel, Excitation,
    LorentzianResponse, NetworkSolution, PortQuantities, Powers,
};
pub use radiation::{
    farfield_h, field_in_guide, gain, gain_cut, gain_grid, radiated_power, FieldProbe, GainCut,
    GainGrid,
};

/// Errors produced by scenario validation and the numerical kernels.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("scenario validation failed: {0}")]
    Validation(String),
    #[error("cavity resonance: sin(kx*S) vanishes, kx*S/pi = {kx_s_over_pi:.12}")]
    CavityResonance { kx_s_over_pi: f64 },
    #[error("coincident source and observation points")]
    CoincidentPoints,
    #[error("duplicate {kind} positions at indices {first} and {second}")]
    DuplicatePositions {
        kind: &'static str,
        first: usize,
        second: usize,
    },
    #[error("point outside waveguide: {0}")]
    OutsideGuide(String),
    #[error("model violation: {0}")]
    ModelViolation(String),
    #[error("covariance not positive semidefinite: min eigenvalue {min_eig:.3e} vs max {max_eig:.3e}")]
    NotPositiveSemidefinite { min_eig: f64, max_eig: f64 },
    #[error("singular {block} block (condition estimate {condition:.3e})")]
    SingularBlock {
        block: &'static str,
        condition: f64,
    },
    #[error("input admittance undefined: port {port} carries zero current")]
    UndefinedInputAdmittance { port: usize },
    #[error("infinite reflection: Y_in approaches -Y_0 at port {port}")]
    InfiniteReflection { port: usize },
    #[error("passivity violation: Re(Y_ss) = {0} must be positive")]
    PassivityViolation(f64),
    #[error("fundamental mode is evanescent: no semi-infinite connector match exists")]
    EvanescentMode,
    #[error(
        "quadrature did not converge: relative change {achieved:.3e} above {tolerance:.3e}, estimate {estimate:.9e}"
    )]
    QuadratureNotConverged {
        achieved: f64,
        tolerance: f64,
        estimate: f64,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Non-fatal conditions attached to scenarios and network solutions.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// The waveguide cross-section does not restrict propagation to the
    /// fundamental mode (`λ/2 < a < λ` and `b < λ/2` violated).
    NotSingleMode { guide: usize },
    /// An element sits closer than one wavelength to its feed, where the
    /// infinitesimal-dipole source model degrades.
    FeedElementSpacing {
        guide: usize,
        distance_wavelengths: f64,
    },
    /// A solved block had a condition number above 1e12.
    IllConditioned { block: &'static str, condition: f64 },
    /// |Γ| ≥ 1 at a port: the configuration is active or ill-posed.
    ReflectionExceedsUnity { port: usize, magnitude: f64 },
    /// Far-field evaluation radius below ten aperture diagonals.
    NearFieldEvaluation { r: f64, min_r: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::NotSingleMode { guide } => {
                write!(f, "guide {guide}: single-mode condition violated")
            }
            Warning::FeedElementSpacing {
                guide,
                distance_wavelengths,
            } => write!(
                f,
                "guide {guide}: nearest element only {distance_wavelengths:.3} wavelengths from the feed"
            ),
            Warning::IllConditioned { block, condition } => {
                write!(f, "{block} block ill-conditioned: cond = {condition:.3e}")
            }
            Warning::ReflectionExceedsUnity { port, magnitude } => {
                write!(f, "port {port}: |Gamma| = {magnitude:.6} >= 1")
            }
            Warning::NearFieldEvaluation { r, min_r } => {
                write!(f, "evaluation radius {r:.3} m below far-field bound {min_r:.3} m")
            }
        }
    }
}
