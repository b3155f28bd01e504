//! Physical constants, derived wavenumbers, geometry, and the scenario data
//! model consumed by every other module.
//!
//! A [`Scenario`] is the fully resolved physical description of one DMA
//! deployment: the propagation medium, `N` rectangular waveguides, `L`
//! radiating elements, `M` user positions, the per-element terminations
//! `Y_s`, the per-user loads `Y_r`, and the connector admittance `Y_0`.
//! All positions are resolved to global coordinates at construction time and
//! every instance is immutable afterwards, so scenarios can be shared across
//! threads freely.

use std::f64::consts::PI;

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::Deserialize;

use crate::{Error, Result, Warning};

/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
/// Vacuum permeability, H/m.
pub const VACUUM_PERMEABILITY: f64 = 4.0e-7 * PI;

/// Tolerance (metres) used when checking that an element sits on the upper
/// waveguide wall and when rejecting coincident positions.
pub(crate) const POSITION_TOL: f64 = 1e-9;

/// Lossless propagation medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium {
    /// Operating frequency, Hz.
    pub frequency_hz: f64,
    /// Absolute permittivity ε, F/m.
    pub permittivity: f64,
    /// Absolute permeability μ, H/m.
    pub permeability: f64,
}

impl Medium {
    pub fn new(frequency_hz: f64, permittivity: f64, permeability: f64) -> Result<Self> {
        if !(frequency_hz > 0.0) || !(permittivity > 0.0) || !(permeability > 0.0) {
            return Err(Error::InvalidInput(format!(
                "medium parameters must be positive: f = {frequency_hz}, eps = {permittivity}, mu = {permeability}"
            )));
        }
        Ok(Self {
            frequency_hz,
            permittivity,
            permeability,
        })
    }

    /// Vacuum at the given frequency.
    pub fn vacuum(frequency_hz: f64) -> Result<Self> {
        Self::new(frequency_hz, VACUUM_PERMITTIVITY, VACUUM_PERMEABILITY)
    }

    /// Angular frequency ω = 2πf, rad/s.
    pub fn omega(&self) -> f64 {
        2.0 * PI * self.frequency_hz
    }

    /// Wavenumber k = ω√(εμ), rad/m.
    pub fn wavenumber(&self) -> f64 {
        self.omega() * (self.permittivity * self.permeability).sqrt()
    }

    /// Wavelength λ = 2π/k, m.
    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.wavenumber()
    }

    /// Wave impedance √(μ/ε), Ω.
    pub fn impedance(&self) -> f64 {
        (self.permeability / self.permittivity).sqrt()
    }
}

/// Geometry of one rectangular waveguide.
///
/// Local coordinates: the guide occupies `0 ≤ x ≤ S` (length), `0 ≤ y ≤ b`
/// (height), `0 ≤ z ≤ a` (width). The feed dipole sits in the `x = 0` plane
/// at transverse position `z = feed_z`; the far end `x = S` is a conducting
/// wall. Radiating elements sit on the upper wall `y = b`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveguideSpec {
    /// Width along z, m.
    pub width_a: f64,
    /// Height along y, m.
    pub height_b: f64,
    /// Length along x, m.
    pub length_s: f64,
    /// z-coordinate of the feed dipole, m.
    pub feed_z: f64,
    /// Position of the waveguide corner (local origin) in the global frame.
    pub origin: Vector3<f64>,
}

impl WaveguideSpec {
    pub fn new(width_a: f64, height_b: f64, length_s: f64, feed_z: f64, origin: Vector3<f64>) -> Result<Self> {
        if !(width_a > 0.0) || !(height_b > 0.0) || !(length_s > 0.0) {
            return Err(Error::InvalidInput(format!(
                "waveguide dimensions must be positive: a = {width_a}, b = {height_b}, S = {length_s}"
            )));
        }
        if !(feed_z > 0.0 && feed_z < width_a) {
            return Err(Error::InvalidInput(format!(
                "feed_z = {feed_z} must lie strictly inside (0, a = {width_a})"
            )));
        }
        Ok(Self {
            width_a,
            height_b,
            length_s,
            feed_z,
            origin,
        })
    }

    /// Feed dipole position in guide-local coordinates.
    pub fn feed_local(&self) -> Vector3<f64> {
        Vector3::new(0.0, self.height_b / 2.0, self.feed_z)
    }

    /// Feed dipole position in the global frame.
    pub fn feed_global(&self) -> Vector3<f64> {
        self.origin + self.feed_local()
    }

    /// Map a global position into guide-local coordinates.
    pub fn to_local(&self, global: &Vector3<f64>) -> Vector3<f64> {
        global - self.origin
    }

    /// True when only the TE10 mode propagates at the given wavelength.
    pub fn single_mode(&self, wavelength: f64) -> bool {
        self.width_a > wavelength / 2.0
            && self.width_a < wavelength
            && self.height_b < wavelength / 2.0
    }
}

/// Free-space wavenumber and the TE10 axial wavenumber of one guide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavenumbers {
    /// Medium wavenumber k, rad/m.
    pub k: f64,
    /// Axial wavenumber k_x with branch Re√· − i·Im√·: purely real above
    /// cutoff, purely negative-imaginary below.
    pub k_x: Complex64,
    /// Single-mode flag; false warns that higher-order modes also propagate
    /// or that the fundamental itself is cut off.
    pub single_mode: bool,
}

/// Axial wavenumber for the (m, n) mode cutoff, same branch rule as TE10.
pub(crate) fn mode_k_x(k: f64, a: f64, b: f64, m: u32, n: u32) -> Complex64 {
    let kc2 = (m as f64 * PI / a).powi(2) + (n as f64 * PI / b).powi(2);
    let d = k * k - kc2;
    if d >= 0.0 {
        Complex64::new(d.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, -(-d).sqrt())
    }
}

/// Derive k and k_x for the fundamental mode of `guide` in `medium`.
pub fn derive_wavenumbers(medium: &Medium, guide: &WaveguideSpec) -> Result<Wavenumbers> {
    let k = medium.wavenumber();
    let k_x = mode_k_x(k, guide.width_a, guide.height_b, 1, 0);
    Ok(Wavenumbers {
        k,
        k_x,
        single_mode: guide.single_mode(medium.wavelength()),
    })
}

/// One radiating element: which guide it sits on and where.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    /// Index into `Scenario::guides`.
    pub guide: usize,
    /// Position in guide-local coordinates (on the upper wall, y = b).
    pub local: Vector3<f64>,
    /// Position in the global frame.
    pub global: Vector3<f64>,
}

/// Fully resolved scenario: geometry, terminations, users, connector.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub medium: Medium,
    pub guides: Vec<WaveguideSpec>,
    pub elements: Vec<Element>,
    pub users: Vec<Vector3<f64>>,
    /// Per-element termination admittances, S (diagonal of Y_s).
    pub y_s: Vec<Complex64>,
    /// Per-user load admittances, S (diagonal of Y_r).
    pub y_r: Vec<Complex64>,
    /// Connector (transmission-line) admittance Y_0, S.
    pub y0: f64,
    /// Per-guide wavenumbers, derived once at construction.
    kn: Vec<Wavenumbers>,
    pub warnings: Vec<Warning>,
}

impl Scenario {
    pub fn n_guides(&self) -> usize {
        self.guides.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    /// Wavenumbers of guide `g`.
    pub fn wavenumbers(&self, g: usize) -> &Wavenumbers {
        &self.kn[g]
    }

    /// Indices of the elements embedded in guide `g`, in construction order.
    pub fn elements_of_guide(&self, g: usize) -> Vec<usize> {
        (0..self.elements.len())
            .filter(|&l| self.elements[l].guide == g)
            .collect()
    }

    /// Diagonal of the bounding box of the element positions, m.
    pub fn aperture_diagonal(&self) -> f64 {
        if self.elements.len() < 2 {
            return 0.0;
        }
        let mut lo = self.elements[0].global;
        let mut hi = lo;
        for e in &self.elements {
            for i in 0..3 {
                lo[i] = lo[i].min(e.global[i]);
                hi[i] = hi[i].max(e.global[i]);
            }
        }
        (hi - lo).norm()
    }

    /// Common global y of all elements; errors if they are not coplanar.
    pub fn element_plane_y(&self) -> Result<f64> {
        let y0 = self
            .elements
            .first()
            .map(|e| e.global.y)
            .ok_or_else(|| Error::InvalidInput("scenario has no elements".into()))?;
        for e in &self.elements {
            if (e.global.y - y0).abs() > POSITION_TOL {
                return Err(Error::ModelViolation(format!(
                    "elements are not coplanar: y = {} vs y = {}",
                    e.global.y, y0
                )));
            }
        }
        Ok(y0)
    }

    /// Replace the element terminations, keeping everything else.
    pub fn with_terminations(&self, y_s: Vec<Complex64>) -> Result<Self> {
        if y_s.len() != self.elements.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} terminations, got {}",
                self.elements.len(),
                y_s.len()
            )));
        }
        let mut sc = self.clone();
        sc.y_s = y_s;
        Ok(sc)
    }

    /// Parse and resolve a scenario from its TOML description.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| Error::Parse(format!("scenario config: {e}")))?;
        Self::from_config(&cfg)
    }

    /// Resolve a parsed configuration into a validated scenario.
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        let medium = Medium::new(
            cfg.medium.frequency_hz,
            cfg.medium.relative_permittivity * VACUUM_PERMITTIVITY,
            cfg.medium.relative_permeability * VACUUM_PERMEABILITY,
        )?;
        let n = cfg.layout.n_waveguides;
        if n == 0 {
            return Err(Error::Validation("layout.n_waveguides must be >= 1".into()));
        }
        let d_wg = match cfg.layout.waveguide_spacing {
            Some(d) if d > 0.0 => d,
            Some(d) => {
                return Err(Error::Validation(format!(
                    "layout.waveguide_spacing must be positive, got {d}"
                )))
            }
            None if n == 1 => 0.0,
            None => {
                return Err(Error::Validation(
                    "layout.waveguide_spacing required for more than one waveguide".into(),
                ))
            }
        };
        let a = cfg.waveguide.a;
        let b = cfg.waveguide.b;
        let s = cfg.waveguide.s;
        let feed_z = cfg.waveguide.feed_z.unwrap_or(a / 2.0);

        let mut builder = ScenarioBuilder::new(medium);
        for g in 0..n {
            // Default placement: radiating walls in the global y = 0 plane,
            // guide centres symmetric about z = 0.
            let origin = match cfg.waveguide.origin {
                Some(o) => Vector3::new(o[0], o[1], o[2] + g as f64 * d_wg),
                None => Vector3::new(
                    0.0,
                    -b,
                    (g as f64 - (n as f64 - 1.0) / 2.0) * d_wg - a / 2.0,
                ),
            };
            builder = builder.guide(WaveguideSpec::new(a, b, s, feed_z, origin)?);
        }

        let l_mu = cfg.layout.elements_per_guide;
        if l_mu == 0 {
            return Err(Error::Validation("layout.elements_per_guide must be >= 1".into()));
        }
        let xs: Vec<f64> = match &cfg.layout.element_placement {
            PlacementCfg::Named(name) if name == "centered" => {
                let d_el = cfg.layout.element_spacing.ok_or_else(|| {
                    Error::Validation(
                        "layout.element_spacing required for centered placement".into(),
                    )
                })?;
                let x1 = (s - (l_mu as f64 - 1.0) * d_el) / 2.0;
                (0..l_mu).map(|i| x1 + i as f64 * d_el).collect()
            }
            PlacementCfg::Named(name) => {
                return Err(Error::Validation(format!(
                    "unknown element_placement \"{name}\" (expected \"centered\" or a list of x positions)"
                )))
            }
            PlacementCfg::Explicit(xs) => {
                if xs.len() != l_mu {
                    return Err(Error::Validation(format!(
                        "element_placement lists {} positions but elements_per_guide = {l_mu}",
                        xs.len()
                    )));
                }
                xs.clone()
            }
        };
        for g in 0..n {
            for &x in &xs {
                builder = builder.element_at_x(g, x);
            }
        }

        let l_total = n * l_mu;
        builder = builder.terminations(cfg.terminations.y_s.resolve(l_total, "terminations.Y_s")?);

        if let Some(users) = &cfg.users {
            for p in &users.positions {
                builder = builder.user(Vector3::new(p[0], p[1], p[2]));
            }
            let m = users.positions.len();
            if m > 0 {
                let y_r = users
                    .y_r
                    .as_ref()
                    .ok_or_else(|| Error::Validation("users.Y_r required when users are present".into()))?
                    .resolve(m, "users.Y_r")?;
                builder = builder.user_loads(y_r);
            }
        }

        match &cfg.connector.y_0 {
            ConnectorCfg2::Auto(word) if word == "auto" => builder.build_with_auto_connector(),
            ConnectorCfg2::Auto(word) => Err(Error::Validation(format!(
                "connector.Y_0 = \"{word}\" not understood (expected \"auto\" or a number)"
            ))),
            ConnectorCfg2::Value(v) => {
                if !(*v > 0.0) {
                    return Err(Error::Validation(format!(
                        "connector.Y_0 must be positive, got {v}"
                    )));
                }
                builder.connector(*v).build()
            }
        }
    }
}

/// Incremental construction of a [`Scenario`] with validation at `build`.
#[derive(Debug, Clone)]
pub struct ScenarioBuilder {
    medium: Medium,
    guides: Vec<WaveguideSpec>,
    elements: Vec<(usize, Vector3<f64>)>,
    users: Vec<Vector3<f64>>,
    y_s: Option<Vec<Complex64>>,
    y_r: Vec<Complex64>,
    y0: Option<f64>,
}

impl ScenarioBuilder {
    pub fn new(medium: Medium) -> Self {
        Self {
            medium,
            guides: Vec::new(),
            elements: Vec::new(),
            users: Vec::new(),
            y_s: None,
            y_r: Vec::new(),
            y0: None,
        }
    }

    pub fn guide(mut self, spec: WaveguideSpec) -> Self {
        self.guides.push(spec);
        self
    }

    /// Element at local x on the upper wall, centred transversally (z = a/2).
    pub fn element_at_x(mut self, guide: usize, x: f64) -> Self {
        let (b, a) = self
            .guides
            .get(guide)
            .map(|g| (g.height_b, g.width_a))
            .unwrap_or((0.0, 0.0));
        self.elements.push((guide, Vector3::new(x, b, a / 2.0)));
        self
    }

    /// Element at an explicit guide-local position.
    pub fn element_local(mut self, guide: usize, local: Vector3<f64>) -> Self {
        self.elements.push((guide, local));
        self
    }

    pub fn user(mut self, global: Vector3<f64>) -> Self {
        self.users.push(global);
        self
    }

    /// Per-element terminations; use [`Self::uniform_terminations`] to broadcast.
    pub fn terminations(mut self, y_s: Vec<Complex64>) -> Self {
        self.y_s = Some(y_s);
        self
    }

    pub fn uniform_terminations(mut self, y_s: Complex64) -> Self {
        self.y_s = Some(vec![y_s; self.elements.len()]);
        self
    }

    pub fn user_loads(mut self, y_r: Vec<Complex64>) -> Self {
        self.y_r = y_r;
        self
    }

    pub fn uniform_user_loads(mut self, y_r: Complex64) -> Self {
        self.y_r = vec![y_r; self.users.len()];
        self
    }

    pub fn connector(mut self, y0: f64) -> Self {
        self.y0 = Some(y0);
        self
    }

    /// Build, resolving `Y_0` from the semi-infinite match of guide 0.
    pub fn build_with_auto_connector(mut self) -> Result<Scenario> {
        for g in &self.guides[1..] {
            let g0 = &self.guides[0];
            if g.width_a != g0.width_a || g.height_b != g0.height_b || g.feed_z != g0.feed_z {
                return Err(Error::Validation(
                    "connector.Y_0 = \"auto\" requires identical guide cross-sections and feeds".into(),
                ));
            }
        }
        if self.guides.is_empty() {
            return Err(Error::Validation("scenario needs at least one waveguide".into()));
        }
        let y0 = crate::admittance::connector_auto(&self.medium, &self.guides[0])?;
        self.y0 = Some(y0);
        self.build()
    }

    pub fn build(self) -> Result<Scenario> {
        if self.guides.is_empty() {
            return Err(Error::Validation("scenario needs at least one waveguide".into()));
        }
        let lambda = self.medium.wavelength();
        let mut warnings = Vec::new();
        let mut kn = Vec::with_capacity(self.guides.len());
        for (g, spec) in self.guides.iter().enumerate() {
            let w = derive_wavenumbers(&self.medium, spec)?;
            if !w.single_mode {
                warnings.push(Warning::NotSingleMode { guide: g });
            }
            kn.push(w);
        }

        let mut elements = Vec::with_capacity(self.elements.len());
        for (idx, (g, local)) in self.elements.iter().enumerate() {
            let spec = self.guides.get(*g).ok_or_else(|| {
                Error::Validation(format!("element {idx} references missing waveguide {g}"))
            })?;
            if (local.y - spec.height_b).abs() > POSITION_TOL {
                return Err(Error::Validation(format!(
                    "element {idx} must sit on the upper wall y = b = {}, got y = {}",
                    spec.height_b, local.y
                )));
            }
            if !(local.x > 0.0 && local.x < spec.length_s) {
                return Err(Error::Validation(format!(
                    "element {idx} at x = {} lies outside the guide (0, S = {})",
                    local.x, spec.length_s
                )));
            }
            if !(local.z >= 0.0 && local.z <= spec.width_a) {
                return Err(Error::Validation(format!(
                    "element {idx} at z = {} lies outside the guide [0, a = {}]",
                    local.z, spec.width_a
                )));
            }
            elements.push(Element {
                guide: *g,
                local: *local,
                global: spec.origin + local,
            });
        }

        let y_s = self.y_s.unwrap_or_default();
        if y_s.len() != elements.len() {
            return Err(Error::Validation(format!(
                "Y_s has {} entries for {} elements",
                y_s.len(),
                elements.len()
            )));
        }
        for (m, p) in self.users.iter().enumerate() {
            if !(p.y > 0.0) {
                return Err(Error::Validation(format!(
                    "user {m} at y = {} is behind the radiating surface (y must be > 0)",
                    p.y
                )));
            }
        }
        if self.y_r.len() != self.users.len() {
            return Err(Error::Validation(format!(
                "Y_r has {} entries for {} users",
                self.y_r.len(),
                self.users.len()
            )));
        }
        let y0 = self
            .y0
            .ok_or_else(|| Error::Validation("connector admittance Y_0 not set".into()))?;

        // Feed-to-element spacing below one wavelength degrades the
        // infinitesimal-dipole source model; flag it, do not reject it.
        for g in 0..self.guides.len() {
            let nearest = elements
                .iter()
                .filter(|e| e.guide == g)
                .map(|e| e.local.x)
                .fold(f64::INFINITY, f64::min);
            if nearest.is_finite() && nearest < lambda {
                warnings.push(Warning::FeedElementSpacing {
                    guide: g,
                    distance_wavelengths: nearest / lambda,
                });
            }
        }

        Ok(Scenario {
            medium: self.medium,
            guides: self.guides,
            elements,
            users: self.users,
            y_s,
            y_r: self.y_r,
            y0,
            kn,
            warnings,
        })
    }
}

// ── configuration schema ────────────────────────────────────────────────────

/// Parsed scenario configuration (TOML). Key names are part of the external
/// interface; see the bundled scenario file for a complete example.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub medium: MediumCfg,
    pub waveguide: WaveguideCfg,
    pub layout: LayoutCfg,
    pub terminations: TerminationsCfg,
    #[serde(default)]
    pub users: Option<UsersCfg>,
    pub connector: ConnectorCfg,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumCfg {
    pub frequency_hz: f64,
    #[serde(default = "one")]
    pub relative_permittivity: f64,
    #[serde(default = "one")]
    pub relative_permeability: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveguideCfg {
    pub a: f64,
    pub b: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(default)]
    pub feed_z: Option<f64>,
    #[serde(default)]
    pub origin: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutCfg {
    #[serde(default = "one_usize")]
    pub n_waveguides: usize,
    #[serde(default)]
    pub waveguide_spacing: Option<f64>,
    pub elements_per_guide: usize,
    #[serde(default)]
    pub element_spacing: Option<f64>,
    #[serde(default = "centered")]
    pub element_placement: PlacementCfg,
}

fn one_usize() -> usize {
    1
}

fn centered() -> PlacementCfg {
    PlacementCfg::Named("centered".into())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PlacementCfg {
    Named(String),
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerminationsCfg {
    #[serde(rename = "Y_s")]
    pub y_s: ComplexCfg,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UsersCfg {
    #[serde(default)]
    pub positions: Vec<[f64; 3]>,
    #[serde(rename = "Y_r", default)]
    pub y_r: Option<ComplexCfg>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectorCfg {
    #[serde(rename = "Y_0")]
    pub y_0: ConnectorCfg2,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ConnectorCfg2 {
    Value(f64),
    Auto(String),
}

/// A complex value written as `[re, im]`, or a per-entry list of them.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ComplexCfg {
    Scalar([f64; 2]),
    List(Vec<[f64; 2]>),
}

impl ComplexCfg {
    fn resolve(&self, count: usize, what: &str) -> Result<Vec<Complex64>> {
        match self {
            ComplexCfg::Scalar([re, im]) => Ok(vec![Complex64::new(*re, *im); count]),
            ComplexCfg::List(entries) => {
                if entries.len() != count {
                    return Err(Error::Validation(format!(
                        "{what} lists {} entries, expected {count}",
                        entries.len()
                    )));
                }
                Ok(entries.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
            }
        }
    }
}
