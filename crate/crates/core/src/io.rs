//! CSV dump and load formats shared between the library and the command-line
//! tool.
//!
//! Complex matrices are written as `row,col,re,im` records with values in
//! scientific notation carrying nine significant digits; every artifact
//! starts with comment lines recording the tool version, a scenario hash,
//! the seed, and (unless suppressed) a timestamp.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::radiation::{FieldProbe, GainGrid};
use crate::{CMatrix, Error, Result};

/// Provenance header written at the top of every artifact.
#[derive(Debug, Clone)]
pub struct Header {
    pub tool_version: &'static str,
    pub scenario_hash: u64,
    pub seed: u64,
    /// Unix timestamp; `None` suppresses the line for byte-stable output.
    pub timestamp_unix: Option<u64>,
}

impl Header {
    pub fn new(scenario_text: &str, seed: u64, with_timestamp: bool) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION"),
            scenario_hash: fnv1a64(scenario_text.as_bytes()),
            seed,
            timestamp_unix: with_timestamp.then(|| {
                std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0)
            }),
        }
    }

    pub fn render(&self) -> String {
        let mut s = format!(
            "# dma-model {} scenario=fnv1a:{:016x} seed={}\n",
            self.tool_version, self.scenario_hash, self.seed
        );
        if let Some(ts) = self.timestamp_unix {
            let _ = writeln!(s, "# timestamp_unix={ts}");
        }
        s
    }
}

/// FNV-1a 64-bit hash, used to tag artifacts with their scenario.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn fmt9(v: f64) -> String {
    format!("{v:.8e}")
}

/// Render a complex matrix in the dump format (`row,col,re,im`).
pub fn matrix_to_csv(header: &Header, m: &CMatrix) -> String {
    let mut s = header.render();
    s.push_str("row,col,re,im\n");
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            let _ = writeln!(s, "{i},{j},{},{}", fmt9(v.re), fmt9(v.im));
        }
    }
    s
}

/// Parse a matrix written by [`matrix_to_csv`]. Comment lines are skipped;
/// dimensions are inferred from the largest indices.
pub fn matrix_from_csv(text: &str) -> Result<CMatrix> {
    let mut entries = Vec::new();
    let mut max_row = 0usize;
    let mut max_col = 0usize;
    let mut seen_header = false;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !seen_header {
            if line != "row,col,re,im" {
                return Err(Error::Parse(format!(
                    "line {}: expected header 'row,col,re,im', got '{line}'",
                    lineno + 1
                )));
            }
            seen_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Parse(format!(
                "line {}: expected 4 fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let row: usize = fields[0]
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: row: {e}", lineno + 1)))?;
        let col: usize = fields[1]
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: col: {e}", lineno + 1)))?;
        let re: f64 = fields[2]
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: re: {e}", lineno + 1)))?;
        let im: f64 = fields[3]
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: im: {e}", lineno + 1)))?;
        max_row = max_row.max(row);
        max_col = max_col.max(col);
        entries.push((row, col, Complex64::new(re, im)));
    }
    if !seen_header {
        return Err(Error::Parse("no 'row,col,re,im' header found".into()));
    }
    if entries.is_empty() {
        return Ok(CMatrix::zeros(0, 0));
    }
    let mut m = CMatrix::zeros(max_row + 1, max_col + 1);
    for (r, c, v) in entries {
        m[(r, c)] = v;
    }
    Ok(m)
}

/// Render named scalar powers as `name,value_watts` records.
pub fn powers_to_csv(header: &Header, entries: &[(String, f64)]) -> String {
    let mut s = header.render();
    s.push_str("name,value_watts\n");
    for (name, v) in entries {
        let _ = writeln!(s, "{name},{}", fmt9(*v));
    }
    s
}

/// Render an in-guide field probe:
/// `x_m,y_m,z_m,re_Hz,im_Hz,abs_Hz,arg_Hz_rad`.
pub fn probe_to_csv(header: &Header, probe: &FieldProbe) -> String {
    let mut s = header.render();
    s.push_str("x_m,y_m,z_m,re_Hz,im_Hz,abs_Hz,arg_Hz_rad\n");
    for (p, h) in probe.positions.iter().zip(&probe.h_z) {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            fmt9(p.x),
            fmt9(p.y),
            fmt9(p.z),
            fmt9(h.re),
            fmt9(h.im),
            fmt9(h.norm()),
            fmt9(h.arg())
        );
    }
    s
}

/// Render a gain grid: `theta_rad,phi_rad,gain_linear,gain_dbi`.
pub fn grid_to_csv(header: &Header, grid: &GainGrid) -> String {
    let mut s = header.render();
    s.push_str("theta_rad,phi_rad,gain_linear,gain_dbi\n");
    for (i, &t) in grid.theta.iter().enumerate() {
        for (j, &p) in grid.phi.iter().enumerate() {
            let g = grid.value(i, j);
            let dbi = 10.0 * g.max(f64::MIN_POSITIVE).log10();
            let _ = writeln!(s, "{},{},{},{}", fmt9(t), fmt9(p), fmt9(g), fmt9(dbi));
        }
    }
    s
}

/// Render a 1-D cut: `angle_rad,gain_linear,gain_dbi`.
pub fn cut_to_csv(header: &Header, cut: &[(f64, f64)]) -> String {
    let mut s = header.render();
    s.push_str("angle_rad,gain_linear,gain_dbi\n");
    for (angle, g) in cut {
        let dbi = 10.0 * g.max(f64::MIN_POSITIVE).log10();
        let _ = writeln!(s, "{},{},{}", fmt9(*angle), fmt9(*g), fmt9(dbi));
    }
    s
}

/// Render a Lorentzian sweep: `c_siemens,angle_rad,magnitude`.
pub fn lorentzian_to_csv(header: &Header, sweep: &[crate::network::LorentzianResponse]) -> String {
    let mut s = header.render();
    s.push_str("c_siemens,angle_rad,magnitude\n");
    for r in sweep {
        let _ = writeln!(s, "{},{},{}", fmt9(r.c), fmt9(r.angle), fmt9(r.magnitude));
    }
    s
}
