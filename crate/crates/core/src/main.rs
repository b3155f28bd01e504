//! Batch front door: ingest a scenario file, run one named analysis, emit
//! CSV artifacts. Exit codes: 0 success, 1 validation-tolerance failure,
//! 2 input error, 3 numerical error.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::Vector3;
use num_complex::Complex64;

use dma_model::io::{self, Header};
use dma_model::{
    connector_admittance_auto, equivalent_channel, gain_cut, gain_grid, field_in_guide,
    lorentzian_sweep, radiated_power, rayleigh_covariance, sample_rayleigh, solve_bilateral,
    solve_unilateral, AdmittanceSet, CMatrix, CVector, Error, Excitation, GainCut,
    NetworkSolution, Scenario, StochasticChannelParams, YrsMode,
};

const BUNDLED_SCENARIO: &str = include_str!("../scenarios/validation.toml");

#[derive(Parser)]
#[command(name = "dma-model", version, about = "Circuital model for waveguide-fed metasurface antennas")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Scenario description (TOML). Defaults to the bundled validation scenario.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Output directory for CSV artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for stochastic commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Quadrature order for radiated-power integration.
    #[arg(long, global = true, default_value_t = 64)]
    quadrature: usize,
    /// Keep the user-to-array back-coupling term (exact bilateral solve).
    #[arg(long, global = true)]
    bilateral: bool,
    /// Use the far-field (Friis-like) line-of-sight channel.
    #[arg(long, global = true)]
    farfield_los: bool,
    /// Omit the timestamp header line for byte-stable outputs.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Reproduce the reference measurement numbers and report pass/fail.
    Validate,
    /// Solve the network and dump currents, voltages, coefficients, powers.
    Solve {
        /// Load Y_rs from a matrix CSV instead of building the LoS channel.
        #[arg(long)]
        yrs: Option<PathBuf>,
        /// Total supplied power target, W (equal split, zero phases).
        #[arg(long, default_value_t = 1.0)]
        supplied_power: f64,
    },
    /// Dump every admittance block of the scenario.
    Admittance,
    /// Sample the in-guide magnetic field along the guide centre line.
    Field {
        #[arg(long, default_value_t = 0)]
        guide: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Far-field gain grid and the standard pattern cuts.
    Pattern {
        /// Angular samples per grid axis.
        #[arg(long, default_value_t = 90)]
        samples: usize,
    },
    /// Emit wireless-channel realizations.
    Channel {
        #[arg(long, value_enum)]
        model: ChannelKind,
        /// Number of realizations (rayleigh model).
        #[arg(long, default_value_t = 1)]
        samples: usize,
    },
    /// Trace the passive phase-amplitude locus of a lossless termination.
    Lorentzian {
        /// Radiation conductance Re{Y_ss} of the swept element, S.
        #[arg(long)]
        re_yss: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum ChannelKind {
    Los,
    Rayleigh,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_class(&e))
        }
    }
}

fn exit_class(e: &Error) -> u8 {
    match e {
        Error::InvalidInput(_)
        | Error::Validation(_)
        | Error::Parse(_)
        | Error::DimensionMismatch(_)
        | Error::OutsideGuide(_)
        | Error::ModelViolation(_) => 2,
        Error::CavityResonance { .. }
        | Error::CoincidentPoints
        | Error::DuplicatePositions { .. }
        | Error::NotPositiveSemidefinite { .. }
        | Error::SingularBlock { .. }
        | Error::UndefinedInputAdmittance { .. }
        | Error::InfiniteReflection { .. }
        | Error::PassivityViolation(_)
        | Error::EvanescentMode
        | Error::QuadratureNotConverged { .. } => 3,
    }
}

struct Ctx {

    scenario: Scenario,
    header: Header,
    out: PathBuf,
}

fn load_ctx(common: &Common) -> Result<Ctx, Error> {
    let scenario_text = match &common.scenario {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?,
        None => BUNDLED_SCENARIO.to_string(),
    };
    let scenario = Scenario::from_toml_str(&scenario_text)?;
    for w in &scenario.warnings {
        eprintln!("warning: {w}");
    }
    let header = Header::new(&scenario_text, common.seed, !common.no_timestamp);
    Ok(Ctx {

        scenario,
        header,
        out: common.out.clone(),
    })
}

fn write_artifact(out: &Path, name: &str, contents: &str) -> Result<(), Error> {
    fs::create_dir_all(out)
        .map_err(|e| Error::InvalidInput(format!("cannot create {}: {e}", out.display())))?;
    let path = out.join(name);
    fs::write(&path, contents)
        .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

fn vector_as_matrix(v: &CVector) -> CMatrix {
    CMatrix::from_column_slice(v.len(), 1, v.as_slice())
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    let ctx = load_ctx(&cli.common)?;
    match &cli.cmd {
        Cmd::Validate => cmd_validate(cli, &ctx),
        Cmd::Solve {
            yrs,
            supplied_power,
        } => cmd_solve(cli, &ctx, yrs.as_deref(), *supplied_power),
        Cmd::Admittance => cmd_admittance(cli, &ctx),
        Cmd::Field { guide, samples } => cmd_field(cli, &ctx, *guide, *samples),
        Cmd::Pattern { samples } => cmd_pattern(cli, &ctx, *samples),
        Cmd::Channel { model, samples } => cmd_channel(cli, &ctx, *model, *samples),
        Cmd::Lorentzian { re_yss, samples } => cmd_lorentzian(cli, &ctx, *re_yss, *samples),
    }
}

fn yrs_mode(cli: &Cli) -> YrsMode {
    if cli.common.farfield_los {
        YrsMode::LosFarField
    } else {
        YrsMode::LosExact
    }
}

fn solve_scenario(cli: &Cli, ctx: &Ctx, adm: &AdmittanceSet, exc: &Excitation) -> Result<NetworkSolution, Error> {
    let sol = if cli.common.bilateral {
        solve_bilateral(adm, exc, ctx.scenario.y0)?
    } else {
        solve_unilateral(adm, exc, ctx.scenario.y0)?
    };
    for w in &sol.warnings {
        eprintln!("warning: {w}");
    }
    Ok(sol)
}

// ── validate ────────────────────────────────────────────────────────────────

struct Check {
    quantity: String,
    expected: f64,
    actual: f64,
    /// Relative error; for complex quantities the norm of the deviation
    /// over the norm of the expected value.
    rel_error: f64,
    tolerance: f64,
}

impl Check {
    fn real(quantity: impl Into<String>, expected: f64, actual: f64, tolerance: f64) -> Self {
        Self {
            quantity: quantity.into(),
            expected,
            actual,
            rel_error: (actual - expected).abs() / expected.abs(),
            tolerance,
        }
    }

    fn complex(
        quantity: impl Into<String>,
        expected: Complex64,
        actual: Complex64,
        tolerance: f64,
    ) -> Self {
        Self {
            quantity: quantity.into(),
            expected: expected.norm(),
            actual: actual.norm(),
            rel_error: (actual - expected).norm() / expected.norm(),
            tolerance,
        }
    }

    fn pass(&self) -> bool {
        self.rel_error <= self.tolerance
    }
}

fn cmd_validate(cli: &Cli, ctx: &Ctx) -> Result<ExitCode, Error> {
    let sc = &ctx.scenario;
    let mut checks = Vec::new();

    let y0_auto = connector_admittance_auto(sc)?;
    checks.push(Check::real("Y_0_auto_S", 35.3387, y0_auto, 1e-3));

    let adm = AdmittanceSet::from_scenario(sc, yrs_mode(cli))?;
    let exc = Excitation::equal_split_power(1.0, sc.n_guides());
    let sol = solve_scenario(cli, ctx, &adm, &exc)?;
    let port = sol
        .port
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("reference run produced no port data".into()))?;

    checks.push(Check::real("P_t_W", 0.6077, sol.p_t, 0.02));
    let expected_jt = Complex64::new(0.2266, 0.0877);
    for n in 0..sc.n_guides() {
        checks.push(Check::real(format!("abs_j_{n}"), 0.1682, port.j[n].norm(), 0.02));
        checks.push(Check::complex(format!("j_t_{n}"), expected_jt, sol.j_t[n], 0.02));
    }
    let expected_js = [0.1546, 0.0838, 0.0418, 0.0276, 0.0285];
    for g in 0..sc.n_guides() {
        for (i, &mag) in expected_js.iter().enumerate() {
            let l = 5 * g + i;
            checks.push(Check::real(format!("abs_j_s_{l}"), mag, sol.j_s[l].norm(), 0.02));
        }
    }

    let mut report = ctx.header.render();
    report.push_str("quantity,expected,actual,rel_error,tolerance,status\n");
    let mut all_pass = true;
    for c in &checks {
        let status = if c.pass() { "pass" } else { "FAIL" };
        all_pass &= c.pass();
        report.push_str(&format!(
            "{},{:.8e},{:.8e},{:.3e},{:.3e},{}\n",
            c.quantity, c.expected, c.actual, c.rel_error, c.tolerance, status
        ));
    }
    // Artifact first: a closed stdout must not cost us the report.
    write_artifact(&ctx.out, "report.csv", &report)?;
    for c in &checks {
        let status = if c.pass() { "pass" } else { "FAIL" };
        println!(
            "{:<24} expected {:>12.6} actual {:>12.6} [{}]",
            c.quantity, c.expected, c.actual, status
        );
    }
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

// ── solve ───────────────────────────────────────────────────────────────────

fn cmd_solve(cli: &Cli, ctx: &Ctx, yrs: Option<&Path>, supplied_power: f64) -> Result<ExitCode, Error> {
    let sc = &ctx.scenario;
    let mode = match yrs {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
            YrsMode::Explicit(io::matrix_from_csv(&text)?)
        }
        None => yrs_mode(cli),
    };
    let adm = AdmittanceSet::from_scenario(sc, mode)?;
    let exc = Excitation::equal_split_power(supplied_power, sc.n_guides());
    let sol = solve_scenario(cli, ctx, &adm, &exc)?;

    let h = &ctx.header;
    write_artifact(&ctx.out, "j_t.csv", &io::matrix_to_csv(h, &vector_as_matrix(&sol.j_t)))?;
    write_artifact(&ctx.out, "v_t.csv", &io::matrix_to_csv(h, &vector_as_matrix(&sol.v_t)))?;
    write_artifact(&ctx.out, "j_s.csv", &io::matrix_to_csv(h, &vector_as_matrix(&sol.j_s)))?;
    write_artifact(&ctx.out, "v_s.csv", &io::matrix_to_csv(h, &vector_as_matrix(&sol.v_s)))?;
    write_artifact(&ctx.out, "j_r.csv", &io::matrix_to_csv(h, &vector_as_matrix(&sol.j_r)))?;
    write_artifact(&ctx.out, "v_r.csv", &io::matrix_to_csv(h, &vector_as_matrix(&sol.v_r)))?;
    write_artifact(&ctx.out, "y_p.csv", &io::matrix_to_csv(h, &sol.y_p))?;
    if let Some(port) = &sol.port {
        write_artifact(&ctx.out, "j.csv", &io::matrix_to_csv(h, &vector_as_matrix(&port.j)))?;
        write_artifact(&ctx.out, "y_in.csv", &io::matrix_to_csv(h, &vector_as_matrix(&port.y_in)))?;
        write_artifact(&ctx.out, "gamma.csv", &io::matrix_to_csv(h, &vector_as_matrix(&port.gamma)))?;
        write_artifact(
            &ctx.out,
            "transmission.csv",
            &io::matrix_to_csv(h, &vector_as_matrix(&port.transmission)),
        )?;
    }
    let h_eq = equivalent_channel(&adm)?;
    write_artifact(&ctx.out, "h_eq.csv", &io::matrix_to_csv(h, &h_eq))?;

    let mut entries = vec![("P_t".to_string(), sol.p_t), ("P_s".to_string(), sol.p_s())];
    for (m, p) in sol.p_r.iter().enumerate() {
        entries.push((format!("P_r_{m}"), *p));
    }
    for (l, p) in sol.p_d.iter().enumerate() {
        entries.push((format!("P_d_{l}"), *p));
    }
    write_artifact(&ctx.out, "powers.csv", &io::powers_to_csv(h, &entries))?;

    println!(
        "solved: N = {}, L = {}, M = {}; P_s = {:.6} W, P_t = {:.6} W",
        sc.n_guides(),
        sc.n_elements(),
        sc.n_users(),
        sol.p_s(),
        sol.p_t
    );
    Ok(ExitCode::SUCCESS)
}

// ── admittance ──────────────────────────────────────────────────────────────

fn cmd_admittance(cli: &Cli, ctx: &Ctx) -> Result<ExitCode, Error> {
    let sc = &ctx.scenario;
    let adm = AdmittanceSet::from_scenario(sc, yrs_mode(cli))?;
    let h = &ctx.header;
    write_artifact(&ctx.out, "y_tt.csv", &io::matrix_to_csv(h, &adm.y_tt))?;
    write_artifact(&ctx.out, "y_st.csv", &io::matrix_to_csv(h, &adm.y_st))?;
    write_artifact(&ctx.out, "y_ss.csv", &io::matrix_to_csv(h, &adm.y_ss))?;
    write_artifact(&ctx.out, "y_rr.csv", &io::matrix_to_csv(h, &adm.y_rr))?;
    write_artifact(&ctx.out, "y_rs.csv", &io::matrix_to_csv(h, &adm.y_rs))?;
    write_artifact(&ctx.out, "y_s.csv", &io::matrix_to_csv(h, &vector_as_matrix(&adm.y_s)))?;
    write_artifact(&ctx.out, "y_r.csv", &io::matrix_to_csv(h, &vector_as_matrix(&adm.y_r)))?;
    let mut entries = vec![("Y_0".to_string(), sc.y0)];
    if let Ok(auto) = connector_admittance_auto(sc) {
        entries.push(("Y_0_auto".to_string(), auto));
    }
    write_artifact(&ctx.out, "connector.csv", &io::powers_to_csv(h, &entries))?;
    println!(
        "admittance blocks written to {} (L = {}, N = {}, M = {})",
        ctx.out.display(),
        sc.n_elements(),
        sc.n_guides(),
        sc.n_users()
    );
    Ok(ExitCode::SUCCESS)
}

// ── field ───────────────────────────────────────────────────────────────────

fn cmd_field(cli: &Cli, ctx: &Ctx, guide: usize, samples: usize) -> Result<ExitCode, Error> {
    let sc = &ctx.scenario;
    if guide >= sc.n_guides() {
        return Err(Error::InvalidInput(format!(
            "guide {guide} out of range ({} guides)",
            sc.n_guides()
        )));
    }
    if samples < 2 {
        return Err(Error::InvalidInput("need at least 2 samples".into()));
    }
    let adm = AdmittanceSet::from_scenario(sc, yrs_mode(cli))?;
    let exc = Excitation::equal_split_power(1.0, sc.n_guides());
    let sol = solve_scenario(cli, ctx, &adm, &exc)?;

    let spec = &sc.guides[guide];
    let positions: Vec<Vector3<f64>> = (0..samples)
        .map(|i| {
            let x = spec.length_s * i as f64 / (samples - 1) as f64;
            spec.origin + Vector3::new(x, spec.height_b / 2.0, spec.width_a / 2.0)
        })
        .collect();
    let probe = field_in_guide(&sol, sc, guide, &positions)?;
    write_artifact(&ctx.out, "probe.csv", &io::probe_to_csv(&ctx.header, &probe))?;
    println!(
        "sampled H_z at {} points along guide {guide}; peak |H_z| = {:.6e} A/m",
        samples,
        probe.h_z.iter().map(|h| h.norm()).fold(0.0, f64::max)
    );
    Ok(ExitCode::SUCCESS)
}

// ── pattern ─────────────────────────────────────────────────────────────────

fn cmd_pattern(cli: &Cli, ctx: &Ctx, samples: usize) -> Result<ExitCode, Error> {
    let sc = &ctx.scenario;
    let adm = AdmittanceSet::from_scenario(sc, yrs_mode(cli))?;
    let exc = Excitation::equal_split_power(1.0, sc.n_guides());
    let sol = solve_scenario(cli, ctx, &adm, &exc)?;
    let r = 1.0e4 * sc.medium.wavelength();
    let p_s = sol.p_s();

    let grid = gain_grid(&sol, sc, samples, samples, r, p_s)?;
    for w in &grid.warnings {
        eprintln!("warning: {w}");
    }
    write_artifact(&ctx.out, "grid.csv", &io::grid_to_csv(&ctx.header, &grid))?;

    let half = gain_cut(&sol, sc, GainCut::ThetaFixed(PI / 2.0), 2 * samples, r, p_s)?;
    write_artifact(&ctx.out, "cut_theta_half_pi.csv", &io::cut_to_csv(&ctx.header, &half))?;
    let quarter = gain_cut(&sol, sc, GainCut::ThetaFixed(PI / 4.0), 2 * samples, r, p_s)?;
    write_artifact(
        &ctx.out,
        "cut_theta_quarter_pi.csv",
        &io::cut_to_csv(&ctx.header, &quarter),
    )?;
    let boresight = gain_cut(&sol, sc, GainCut::PhiFixed(PI / 2.0), 2 * samples, r, p_s)?;
    write_artifact(
        &ctx.out,
        "cut_phi_half_pi.csv",
        &io::cut_to_csv(&ctx.header, &boresight),
    )?;

    let p_rad = radiated_power(&sol, sc, cli.common.quadrature)?;
    let p_d: f64 = sol.p_d.iter().sum();
    let entries = vec![
        ("P_s".to_string(), p_s),
        ("P_t".to_string(), sol.p_t),
        ("P_rad".to_string(), p_rad),
        ("P_d_total".to_string(), p_d),
    ];
    write_artifact(&ctx.out, "powers.csv", &io::powers_to_csv(&ctx.header, &entries))?;

    let peak = grid.gain.iter().cloned().fold(0.0, f64::max);
    println!(
        "pattern on {samples}x{samples} grid: peak gain {:.3} ({:.2} dBi), P_rad/P_s = {:.4}, closure |P_rad+P_d-P_t|/P_t = {:.2e}",
        peak,
        10.0 * peak.log10(),
        p_rad / p_s,
        ((p_rad + p_d - sol.p_t) / sol.p_t).abs()
    );
    Ok(ExitCode::SUCCESS)
}

// ── channel ─────────────────────────────────────────────────────────────────

fn cmd_channel(cli: &Cli, ctx: &Ctx, model: ChannelKind, samples: usize) -> Result<ExitCode, Error> {
    let sc = &ctx.scenario;
    if sc.n_users() == 0 {
        return Err(Error::InvalidInput(
            "channel models need at least one user in the scenario".into(),
        ));
    }
    match model {
        ChannelKind::Los => {
            let y_rs = dma_model::build_yrs_los(sc, cli.common.farfield_los)?;
            write_artifact(&ctx.out, "y_rs.csv", &io::matrix_to_csv(&ctx.header, &y_rs))?;
            println!("line-of-sight channel written ({}x{})", y_rs.nrows(), y_rs.ncols());
        }
        ChannelKind::Rayleigh => {
            let params = StochasticChannelParams::from_scenario(sc, 1.0)?;
            let cov = rayleigh_covariance(sc, &params)?;
            for (m, sigma) in cov.sigma.iter().enumerate() {
                write_artifact(
                    &ctx.out,
                    &format!("covariance_user{m}.csv"),
                    &io::matrix_to_csv(&ctx.header, sigma),
                )?;
            }
            let mut text = ctx.header.render();
            text.push_str("sample,row,col,re,im\n");
            for s in 0..samples {
                let y = sample_rayleigh(&cov, cli.common.seed.wrapping_add(s as u64))?;
                for i in 0..y.nrows() {
                    for j in 0..y.ncols() {
                        text.push_str(&format!(
                            "{s},{i},{j},{:.8e},{:.8e}\n",
                            y[(i, j)].re,
                            y[(i, j)].im
                        ));
                    }
                }
            }
            write_artifact(&ctx.out, "samples.csv", &text)?;
            println!(
                "rayleigh channel: {} covariance matrices and {samples} realizations written",
                cov.n_users()
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

// ── lorentzian ──────────────────────────────────────────────────────────────

fn cmd_lorentzian(_cli: &Cli, ctx: &Ctx, re_yss: f64, samples: usize) -> Result<ExitCode, Error> {
    if samples < 2 {
        return Err(Error::InvalidInput("need at least 2 sweep samples".into()));
    }
    let span = 10.0 * re_yss.abs();
    let cs: Vec<f64> = (0..samples)
        .map(|i| -span + 2.0 * span * i as f64 / (samples - 1) as f64)
        .collect();
    let sweep = lorentzian_sweep(re_yss, &cs)?;
    write_artifact(&ctx.out, "lorentzian.csv", &io::lorentzian_to_csv(&ctx.header, &sweep))?;
    println!(
        "lorentzian locus traced over {samples} susceptance values in [{:.3}, {:.3}] S",
        -span, span
    );
    Ok(ExitCode::SUCCESS)
}
