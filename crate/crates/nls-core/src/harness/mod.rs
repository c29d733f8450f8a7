//! Experiment orchestration: configuration files, pipeline dispatch,
//! artifact persistence, and the reproduction suite.
//!
//! Every run writes a manifest (resolved configuration, seed, package
//! version, artifact list) next to its result records and plot-data
//! CSVs, so reruns with the same configuration are byte-identical.

pub mod acceptance;

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::conditions;
use crate::error::{Error, Result};
use crate::functional::{State, SystemParams};
use crate::grid::{self, GridKind, RadialGrid};
use crate::soliton;
use crate::solver::{self, SolveOptions, SolveReport};
use crate::spectral;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Soliton,
    Ground,
    Multi,
    Sweep,
    Nonexist,
    Spectrum,
    Check,
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ExperimentKind::Soliton => "soliton",
            ExperimentKind::Ground => "ground",
            ExperimentKind::Multi => "multi",
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::Nonexist => "nonexist",
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::Check => "check",
        };
        write!(f, "{name}")
    }
}

/// Grid section of the configuration (optional; defaults adapt to the
/// problem's spatial scales).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridConfig {
    pub n: usize,
    pub r_max: f64,
    #[serde(default = "default_grid_kind")]
    pub kind: GridKind,
}

fn default_grid_kind() -> GridKind {
    GridKind::Uniform
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub p: f64,
    pub beta: Vec<Vec<f64>>,
    pub rho: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct KindOptions {
    /// `soliton`: shooting tolerance (default 1e-8).
    pub tol: Option<f64>,
    /// `multi`: number of requested orbits.
    pub m: Option<usize>,
    /// `sweep`: increasing off-diagonal coupling values.
    pub beta_values: Option<Vec<f64>>,
    /// `nonexist`: number of rows in the test sequence (default 12).
    pub n_steps: Option<usize>,
    /// `spectrum`: largest angular momentum channel (default 8).
    pub ell_max: Option<usize>,
    /// `spectrum`: comparison constant for the CLR report (default 1.0,
    /// unsourced; the report never asserts the bound).
    pub clr_constant: Option<f64>,
}

/// Parsed and validated experiment configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    pub problem: ProblemConfig,
    pub grid: Option<GridConfig>,
    pub solver: Option<SolveOptions>,
    #[serde(default)]
    pub options: KindOptions,
    /// Output directory (the CLI --out flag overrides it).
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn params(&self) -> Result<SystemParams> {
        SystemParams::new(
            self.problem.p,
            self.problem.beta.clone(),
            self.problem.rho.clone(),
        )
    }

    fn validate(&self) -> Result<()> {
        self.params()?;
        if let Some(g) = &self.grid {
            grid::make_grid(g.n, g.r_max, g.kind)?;
        }
        match self.kind {
            ExperimentKind::Sweep => {
                if self.options.beta_values.as_deref().map_or(true, |b| b.is_empty()) {
                    return Err(Error::ConfigParse(
                        "sweep requires a nonempty [options] beta_values list".into(),
                    ));
                }
            }
            ExperimentKind::Multi => {
                if self.options.m.map_or(false, |m| m == 0) {
                    return Err(Error::ConfigParse("multi requires m >= 1".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn solve_options(&self) -> SolveOptions {
        let mut opts = self.solver.clone().unwrap_or_default();
        opts.seed = self.seed;
        opts
    }

    fn resolve_grid(&self, params: &SystemParams) -> Result<Arc<RadialGrid>> {
        match &self.grid {
            Some(g) => grid::make_grid(g.n, g.r_max, g.kind),
            None => {
                let kwong = soliton::reference_kwong(params.p())?;
                solver::default_grid(params, &kwong)
            }
        }
    }
}

/// Manifest written next to every run's artifacts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub package: String,
    pub version: String,
    pub kind: ExperimentKind,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub artifacts: Vec<String>,
}

pub struct RunArtifacts {
    pub dir: PathBuf,
    pub files: Vec<String>,
    /// Human-readable lines printed by the CLI.
    pub summary: Vec<String>,
}

struct Writer {
    dir: PathBuf,
    files: Vec<String>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Writer { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        fs::write(self.dir.join(name), contents)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value)
            .map_err(|e| Error::ConfigParse(format!("serialization failed: {e}")))?;
        self.write(name, &text)
    }

    fn write_state(&mut self, prefix: &str, state: &State) -> Result<()> {
        for (i, c) in state.components().iter().enumerate() {
            self.write(&format!("{prefix}_{i}.csv"), &c.to_csv())?;
        }
        Ok(())
    }
}

/// Run one experiment, writing artifacts into `out_dir`, and return the
/// artifact list plus printable summary lines.
pub fn run(config: &ExperimentConfig, out_dir: &Path) -> Result<RunArtifacts> {
    let params = config.params()?;
    let mut w = Writer::new(out_dir)?;
    let mut summary = Vec::new();

    match config.kind {
        ExperimentKind::Soliton => {
            let g = match &config.grid {
                Some(gc) => grid::make_grid(gc.n, gc.r_max, gc.kind)?,
                None => soliton::reference_grid(),
            };
            let tol = config.options.tol.unwrap_or(1e-8);
            let s = soliton::solve_kwong(params.p(), &g, tol)?;
            w.write("soliton.csv", &s.field().to_csv())?;
            #[derive(Serialize)]
            struct SolitonRecord {
                p: f64,
                w0: f64,
                mass_sq: f64,
                grad_sq: f64,
                lp_norm_p: f64,
                boundary_value: f64,
                nehari_residual: f64,
                pohozaev_residual: f64,
                gn_constant: f64,
                theta_1: f64,
                grid: grid::GridSpec,
            }
            let c_p = soliton::gn_constant(params.p(), &s);
            w.write_json(
                "soliton.json",
                &SolitonRecord {
                    p: params.p(),
                    w0: s.w0(),
                    mass_sq: s.mass_sq(),
                    grad_sq: s.grad_sq(),
                    lp_norm_p: s.lp_norm_p(),
                    boundary_value: s.boundary_value(),
                    nehari_residual: s.nehari_residual(),
                    pohozaev_residual: s.pohozaev_residual(),
                    gn_constant: c_p,
                    theta_1: soliton::theta_1(params.p(), c_p),
                    grid: g.spec(),
                },
            )?;
            summary.push(format!(
                "soliton p = {}: w(0) = {:.12}, C_p = {:.12}",
                params.p(),
                s.w0(),
                c_p
            ));
        }
        ExperimentKind::Ground => {
            let report = ground_solve(config, &params)?;
            w.write_state("state", &report.state)?;
            w.write_json("report.json", &report.summary())?;
            w.write("fiber.csv", &fiber_samples_csv(&report.state, &params)?)?;
            summary.push(format!(
                "ground state: J = {:.9}, converged = {}, EL residual = {:.3e}",
                report.energy, report.converged, report.el_residual
            ));
        }
        ExperimentKind::Multi => {
            let m = config.options.m.unwrap_or(2);
            let out = solver::multi_level_search(&params, m, &config.solve_options())?;
            #[derive(Serialize)]
            struct MultiRecord {
                requested: usize,
                found: usize,
                shortfall: bool,
                levels: Vec<solver::SolveSummary>,
            }
            for (k, r) in out.reports.iter().enumerate() {
                w.write_state(&format!("level{k}_state"), &r.state)?;
            }
            w.write_json(
                "levels.json",
                &MultiRecord {
                    requested: m,
                    found: out.reports.len(),
                    shortfall: out.shortfall,
                    levels: out.reports.iter().map(|r| r.summary()).collect(),
                },
            )?;
            summary.push(format!(
                "multi-level search: {} of {} orbits, energies = [{}]",
                out.reports.len(),
                m,
                out.reports
                    .iter()
                    .map(|r| format!("{:.6}", r.energy))
                    .collect::<Vec<_>>()
                    .join(", ")
            ));
            if out.shortfall {
                summary.push("shortfall: fewer orbits than requested".into());
            }
        }
        ExperimentKind::Sweep => {
            let betas = config.options.beta_values.clone().unwrap_or_default();
            let rows = solver::beta_sweep_c1(&params, &betas, &config.solve_options())?;
            let mut csv = String::from("beta,energy,m_residual,converged\n");
            for r in &rows {
                csv.push_str(&format!(
                    "{:.17e},{},{:.17e},{}\n",
                    r.beta,
                    r.energy.map_or("nan".into(), |e| format!("{e:.17e}")),
                    r.m_residual,
                    r.converged
                ));
            }
            w.write("sweep.csv", &csv)?;
            if let Some(slope) = log_log_slope(&rows) {
                summary.push(format!("beta sweep: fitted log-log slope = {slope:.4}"));
            }
            summary.push(format!("{} rows written", rows.len()));
        }
        ExperimentKind::Nonexist => {
            let n_steps = config.options.n_steps.unwrap_or(12);
            let out = solver::nonexistence_demo(&params, n_steps, &config.solve_options())?;
            let mut csv = String::from("s,coupling_positive,s_projected,energy\n");
            for r in &out.rows {
                csv.push_str(&format!(
                    "{:.17e},{},{},{}\n",
                    r.s,
                    r.coupling_positive,
                    r.s_projected.map_or("nan".into(), |v| format!("{v:.17e}")),
                    r.energy.map_or("nan".into(), |v| format!("{v:.17e}")),
                ));
            }
            w.write("nonexist.csv", &csv)?;
            w.write_json("nonexist.json", &out)?;
            summary.push(format!(
                "nonexistence: c1 = {:.9}, final gap = {:.3e}, s_final = {:.9}",
                out.c1, out.final_gap, out.s_final
            ));
        }
        ExperimentKind::Spectrum => {
            let mut report = ground_solve(config, &params)?;
            let ell_max = config.options.ell_max.unwrap_or(8);
            let clr_c = config.options.clr_constant.unwrap_or(spectral::DEFAULT_CLR_CONSTANT);
            spectral::attach_morse_indices(&mut report, &params, ell_max)?;
            let mut specs = Vec::new();
            for i in 0..params.k() {
                let pot = spectral::morse_potential(&report.state, i, &params)?;
                w.write(&format!("potential_{i}.csv"), &pot.field().to_csv())?;
                specs.push(spectral::count_negative_eigenvalues_with(&pot, ell_max, clr_c)?);
            }
            #[derive(Serialize)]
            struct SpectrumRecord {
                solve: solver::SolveSummary,
                per_component: Vec<spectral::SpectralReport>,
                /// max |u_i(r)|·r over the outer half of the grid
                decay_outer_max: Vec<f64>,
            }
            let morse = report.morse_index_components.clone().unwrap_or_default();
            w.write_json(
                "spectrum.json",
                &SpectrumRecord {
                    solve: report.summary(),
                    per_component: specs,
                    decay_outer_max: spectral::decay_check(&report.state),
                },
            )?;
            summary.push(format!("radial Morse indices: {morse:?}"));
        }
        ExperimentKind::Check => {
            let mut reports = Vec::new();
            if params.k() >= 2 {
                let bc = conditions::check_betacond(&params)?;
                summary.push(condition_line("existence condition", &bc));
                reports.push(("betacond", bc));
                let kwong = soliton::reference_kwong(params.p())?;
                let c_p = soliton::gn_constant(params.p(), &kwong);
                let theta1 = soliton::theta_1(params.p(), c_p);
                let c0 = conditions::check_c0_condition(&params, 1, theta1, c_p)?;
                summary.push(condition_line("m = 1 level condition", &c0));
                reports.push(("c0_m1", c0));
            } else {
                summary.push("K = 1: subset conditions are void, nothing to check".into());
            }
            #[derive(Serialize)]
            struct CheckRecord {
                conditions: Vec<(String, conditions::ConditionReport)>,
            }
            w.write_json(
                "check.json",
                &CheckRecord {
                    conditions: reports
                        .into_iter()
                        .map(|(n, r)| (n.to_string(), r))
                        .collect(),
                },
            )?;
        }
    }

    let manifest = Manifest {
        package: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        kind: config.kind,
        seed: config.seed,
        config: config.clone(),
        artifacts: w.files.clone(),
    };
    let manifest_text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::ConfigParse(format!("manifest serialization failed: {e}")))?;
    fs::write(out_dir.join("manifest.json"), manifest_text)?;
    let mut files = w.files;
    files.push("manifest.json".into());
    Ok(RunArtifacts { dir: out_dir.to_path_buf(), files, summary })
}

fn ground_solve(config: &ExperimentConfig, params: &SystemParams) -> Result<SolveReport> {
    let grid = config.resolve_grid(params)?;
    let kwong = soliton::reference_kwong(params.p())?;
    let scales = solver::component_scales(params, &kwong)?;
    let init = solver::seeded_state(params, &grid, &scales, &[1.0], &[0.0])?;
    solver::minimize_on_sm(params, &init, &config.solve_options())
}

/// (s, φ(s)) samples of the fibering map around s = 1 for plotting.
fn fiber_samples_csv(state: &State, params: &SystemParams) -> Result<String> {
    let coeffs = crate::functional::fiber_coefficients(state, params)?;
    let mut csv = String::from("s,phi\n");
    for k in 0..=40 {
        let s = 0.25 * 4.0f64.powf(k as f64 / 20.0); // log-spaced in [1/4, 4]
        let phi = crate::functional::fiber_energy(&coeffs, s, params)?;
        csv.push_str(&format!("{s:.17e},{phi:.17e}\n"));
    }
    Ok(csv)
}

fn condition_line(name: &str, r: &conditions::ConditionReport) -> String {
    format!(
        "{name}: lhs = {:.12e}, rhs = {:.12e}, margin = {:.3e}, satisfied = {}, witness = {:?}",
        r.lhs, r.rhs, r.margin, r.satisfied, r.witness_subset
    )
}

/// Least-squares slope of ln(energy) against ln(beta) over valid rows.
pub fn log_log_slope(rows: &[solver::SweepRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.energy.map(|e| (r.beta.ln(), e.ln())))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    Some((n * sxy - sx * sy) / (n * sxx - sx * sx))
}
