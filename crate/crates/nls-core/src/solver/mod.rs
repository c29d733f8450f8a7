//! Constrained minimization on the intersection of the mass spheres with
//! the Nehari–Pohozaev set.
//!
//! The driver descends the reduced functional u ↦ J(s_u ★ u) on the mass
//! spheres (the minimization is ill-posed on the spheres alone in the
//! L²-supercritical range), keeping iterates feasible by componentwise
//! mass renormalization and closed-form dilation onto {M = 0}, then
//! finishes with a damped Newton iteration on the full discrete
//! Euler–Lagrange system. Multiple orbits are found by multi-start with
//! deflation of previously found orbits; β-sweeps and the
//! repulsive-coupling test-sequence construction build on the same
//! pieces.

mod linalg;
mod newton;

pub use newton::{newton_solve, Deflation, NewtonOutcome};

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::{self, State, SystemParams};
use crate::grid::{self, GridKind, RadialField, RadialGrid};
use crate::soliton::{self, ScalarSoliton};

use linalg::solve_tridiagonal;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveOptions {
    pub max_iters: usize,
    pub step0: f64,
    pub grad_tol: f64,
    pub m_tol: f64,
    pub seed: u64,
    pub deflation_shift: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iters: 400,
            step0: 0.4,
            grad_tol: 1e-7,
            m_tol: 1e-6,
            seed: 0,
            deflation_shift: 1.0,
        }
    }
}

impl SolveOptions {
    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || !(self.grad_tol > 0.0) || !(self.m_tol > 0.0)
            || !(self.step0 > 0.0)
            || self.deflation_shift < 0.0
        {
            return Err(Error::InvalidParameter(
                "solve options need positive tolerances, step0 and max_iters >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Converged state plus diagnostics.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub state: State,
    pub energy: f64,
    pub m_residual: f64,
    pub lambda: Vec<f64>,
    pub el_residual: f64,
    pub pohozaev_res: f64,
    pub nehari_res: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Filled by the spectral module on demand.
    pub morse_index_components: Option<Vec<usize>>,
}

/// Serializable summary (the state itself goes to field CSVs).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveSummary {
    pub energy: f64,
    pub m_residual: f64,
    pub lambda: Vec<f64>,
    pub el_residual: f64,
    pub pohozaev_res: f64,
    pub nehari_res: f64,
    pub iterations: usize,
    pub converged: bool,
    pub masses: Vec<f64>,
    pub morse_index_components: Option<Vec<usize>>,
}

impl SolveReport {
    pub fn summary(&self) -> SolveSummary {
        SolveSummary {
            energy: self.energy,
            m_residual: self.m_residual,
            lambda: self.lambda.clone(),
            el_residual: self.el_residual,
            pohozaev_res: self.pohozaev_res,
            nehari_res: self.nehari_res,
            iterations: self.iterations,
            converged: self.converged,
            masses: functional::mass_vector(&self.state),
            morse_index_components: self.morse_index_components.clone(),
        }
    }
}

/// Effective per-component spatial scales γ: the decoupled rescaling
/// factor with the row-summed attractive coupling standing in for β.
/// Dilation projection corrects global scale each iteration, so these
/// only size grids and seeds.
pub fn component_scales(params: &SystemParams, kwong: &ScalarSoliton) -> Result<Vec<f64>> {
    (0..params.k())
        .map(|i| {
            let beta_eff: f64 = (0..params.k())
                .map(|j| params.beta(i, j).max(0.0))
                .sum::<f64>()
                .max(params.beta(i, i));
            let (_, gamma, _) = soliton::rescale_factors(kwong, beta_eff, params.rho()[i])?;
            Ok(gamma)
        })
        .collect()
}

/// Uniform grid sized to the problem: r_max spans ~40 decay lengths of
/// the widest component, the spacing resolves the narrowest.
pub fn default_grid(params: &SystemParams, kwong: &ScalarSoliton) -> Result<Arc<RadialGrid>> {
    let scales = component_scales(params, kwong)?;
    grid_for_scales(&scales, kwong)
}

/// Grid adapted to the *decoupled* components (diagonal couplings only).
/// The decoupled states are much narrower than strongly coupled ground
/// states, so evaluating their levels on a coupled-problem grid would
/// under-resolve them.
pub fn decoupled_grid(params: &SystemParams, kwong: &ScalarSoliton) -> Result<Arc<RadialGrid>> {
    let scales: Vec<f64> = (0..params.k())
        .map(|i| {
            let (_, gamma, _) =
                soliton::rescale_factors(kwong, params.beta(i, i), params.rho()[i])?;
            Ok(gamma)
        })
        .collect::<Result<_>>()?;
    grid_for_scales(&scales, kwong)
}

/// Points per decay length 1/γ. The soliton core narrows relative to
/// the decay length as p grows (central curvature (w0^{p-2} - 1)/3), so
/// the factor tracks the core-to-decay width ratio.
fn resolution_factor(kwong: &ScalarSoliton) -> f64 {
    let curvature = (kwong.w0().powf(kwong.p() - 2.0) - 1.0) / 3.0;
    33.0 * curvature.sqrt().max(1.0)
}

fn grid_for_scales(scales: &[f64], kwong: &ScalarSoliton) -> Result<Arc<RadialGrid>> {
    let gamma_min = scales.iter().copied().fold(f64::INFINITY, f64::min);
    let gamma_max = scales.iter().copied().fold(0.0f64, f64::max);
    let r_max = 40.0 / gamma_min;
    let ppw = resolution_factor(kwong);
    let n = ((r_max * gamma_max * ppw).ceil() as usize).clamp(1024, 16384);
    grid::make_grid(n, r_max, GridKind::Uniform)
}

/// Positive Gaussian seed at the effective component scales, with
/// per-component width factors and optional radial node factors
/// (1 − c (γ r)²).
pub fn seeded_state(
    params: &SystemParams,
    grid: &Arc<RadialGrid>,
    scales: &[f64],
    widths: &[f64],
    nodes: &[f64],
) -> Result<State> {
    let fields = (0..params.k())
        .map(|i| {
            let gamma = scales[i];
            let width = widths[i % widths.len()];
            let node = nodes[i % nodes.len()];
            RadialField::from_fn(grid.clone(), move |r| {
                let x = gamma * r;
                (1.0 - node * x * x) * (-0.5 * (x / width).powi(2)).exp()
            })
        })
        .collect();
    State::new(fields)
}

/// Rescale every component to its target mass (positive scaling).
fn renormalize_masses(u: &State, params: &SystemParams) -> Result<State> {
    let masses = functional::mass_vector(u);
    let fields = u
        .components()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if masses[i] <= 0.0 {
                return Err(Error::DegenerateComponent { index: i });
            }
            let f = params.rho()[i] / masses[i].sqrt();
            Ok(c.scale(f))
        })
        .collect::<Result<Vec<_>>>()?;
    State::new(fields)
}

/// One H¹-preconditioned descent direction: solve
/// (c_i − Δ₂) d_i = G_i componentwise with the tridiagonal second-order
/// Laplacian (an M-matrix, so positivity-friendly).
fn preconditioned_direction(
    u: &State,
    el: &State,
    lambda: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let g = u.grid();
    let n = g.len();
    let h = g.spacing();
    let r = g.nodes();
    let lambda_scale = lambda.iter().fold(0.0f64, |m, l| m.max(l.abs())).max(1e-8);
    let mut out = Vec::with_capacity(u.k());
    for i in 0..u.k() {
        let shift = lambda[i].max(0.1 * lambda_scale);
        let mut lower = vec![0.0; n - 1];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n - 1];
        // node 0: Δu(0) ≈ 6(u₁ − u₀)/h²
        diag[0] = shift + 6.0 / (h * h);
        upper[0] = -6.0 / (h * h);
        for m in 1..n - 1 {
            let inv_h2 = 1.0 / (h * h);
            let inv_hr = 1.0 / (h * r[m]);
            lower[m - 1] = -(inv_h2 - inv_hr);
            diag[m] = shift + 2.0 * inv_h2;
            upper[m] = -(inv_h2 + inv_hr);
        }
        diag[n - 1] = 1.0;
        lower[n - 2] = 0.0;
        let mut rhs: Vec<f64> = el.component(i).values().to_vec();
        rhs[n - 1] = 0.0;
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs)
            .map_err(Error::NoConvergence)?;
        out.push(rhs);
    }
    Ok(out)
}

struct Feasible {
    state: State,
    energy: f64,
    /// Multipliers certified by the Newton solve (None for descent
    /// iterates, whose multipliers come from the closed formula).
    lambda: Option<Vec<f64>>,
}

/// Renormalize masses and project onto {M = 0}; the reduced energy of the
/// result is the line-search merit.
fn make_feasible(u: &State, params: &SystemParams) -> Result<Feasible> {
    let normalized = renormalize_masses(u, params)?;
    let projected = functional::project_to_manifold(&normalized, params)?;
    let energy = functional::energy(&projected, params)?;
    Ok(Feasible { state: projected, energy, lambda: None })
}

fn build_report(
    u: State,
    lambda_hint: Option<Vec<f64>>,
    params: &SystemParams,
    iterations: usize,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let lambda = match lambda_hint {
        Some(l) => l,
        None => functional::lagrange_multipliers(&u, params)?,
    };
    let el = functional::euler_lagrange_residual(&u, &lambda, params)?;
    let m_res = functional::m_residual(&u, params)?;
    let masses = functional::mass_vector(&u);
    let mass_ok = masses
        .iter()
        .zip(params.rho())
        .all(|(m, r)| (m - r * r).abs() <= 1e-8 * r * r);
    let converged = el <= opts.grad_tol && m_res <= opts.m_tol && mass_ok;
    Ok(SolveReport {
        energy: functional::energy(&u, params)?,
        m_residual: m_res,
        pohozaev_res: functional::pohozaev_residual(&u, &lambda, params)?,
        nehari_res: functional::nehari_residual(&u, &lambda, params)?,
        el_residual: el,
        lambda,
        state: u,
        iterations,
        converged,
        morse_index_components: None,
    })
}

/// Ground-state search: projected descent of the reduced functional with
/// a Newton finish. Returns the best iterate with diagnostics; the
/// `converged` flag certifies tolerances, a `NoMaximizer` error reports
/// B ≤ 0 (the caller may switch to the nonexistence construction).
pub fn minimize_on_sm(
    params: &SystemParams,
    init: &State,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    opts.validate()?;
    solve_from(params, init, opts, None)
}

fn solve_from(
    params: &SystemParams,
    init: &State,
    opts: &SolveOptions,
    deflation: Option<&Deflation>,
) -> Result<SolveReport> {
    let mut current = make_feasible(init, params)?;
    let newton_switch = 5e-2;
    let mut iterations = 0usize;

    for _ in 0..opts.max_iters {
        iterations += 1;
        let lambda = functional::lagrange_multipliers(&current.state, params)?;
        let el = functional::euler_lagrange_residual(&current.state, &lambda, params)?;
        if el <= opts.grad_tol {
            break;
        }

        if el < newton_switch {
            if let Ok(polished) = try_newton(&current.state, &lambda, params, deflation, opts)
            {
                current = polished;
                break;
            }
        }

        let gradient = functional::gradient(&current.state, &lambda, params)?;
        let direction = preconditioned_direction(&current.state, &gradient, &lambda)?;
        let mut step = opts.step0;
        let mut advanced = false;
        for _ in 0..30 {
            let trial_fields = current
                .state
                .components()
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    RadialField::new(
                        c.grid().clone(),
                        c.values()
                            .iter()
                            .zip(&direction[i])
                            .map(|(v, d)| v - step * d)
                            .collect(),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            let trial = State::new(trial_fields)?;
            match make_feasible(&trial, params) {
                Ok(f) => {
                    let improved = f.energy < current.energy - 1e-14 * current.energy.abs();
                    let defl_ok = deflation.map_or(true, |d| {
                        d.factor(&f.state) <= 4.0 * d.factor(&current.state)
                    });
                    if improved && defl_ok {
                        current = f;
                        advanced = true;
                        break;
                    }
                }
                Err(Error::NoMaximizer(_)) => {}
                Err(e) => return Err(e),
            }
            step *= 0.5;
        }
        if !advanced {
            // descent stalled (e.g. at a saddle for deflated searches):
            // hand over to Newton
            let lambda = functional::lagrange_multipliers(&current.state, params)?;
            if let Ok(polished) = try_newton(&current.state, &lambda, params, deflation, opts)
            {
                current = polished;
            }
            break;
        }
    }

    let lambda_hint = current.lambda.clone();
    let report = build_report(current.state, lambda_hint, params, iterations, opts)?;
    // absorb residual manifold drift if it is the only failing condition
    if !report.converged && report.el_residual <= opts.grad_tol {
        let projected = functional::project_to_manifold(&report.state, params)?;
        let fixed = build_report(projected, None, params, iterations, opts)?;
        if fixed.converged {
            return Ok(fixed);
        }
    }
    Ok(report)
}

fn try_newton(
    u: &State,
    lambda: &[f64],
    params: &SystemParams,
    deflation: Option<&Deflation>,
    opts: &SolveOptions,
) -> Result<Feasible> {
    let nl = functional::nonlinearity(u, params)?;
    let scale: f64 = nl
        .components()
        .iter()
        .map(|f| f.values().iter().map(|v| v * v).sum::<f64>())
        .sum::<f64>()
        .sqrt();
    let out = newton_solve(u, lambda, params, deflation, 1e-10 * (1.0 + scale), 40)?;
    if !out.converged {
        return Err(Error::NoConvergence(format!(
            "newton stalled at residual {:.3e}",
            out.residual
        )));
    }
    let el = functional::euler_lagrange_residual(&out.state, &out.lambda, params)?;
    if el > opts.grad_tol {
        return Err(Error::NoConvergence(format!(
            "newton finished but EL residual {el:.3e} above tolerance"
        )));
    }
    let energy = functional::energy(&out.state, params)?;
    Ok(Feasible { state: out.state, energy, lambda: Some(out.lambda) })
}

/// Search outcome for `multi_level_search`.
#[derive(Debug)]
pub struct MultiLevelOutcome {
    pub reports: Vec<SolveReport>,
    /// Set when fewer than the requested m distinct orbits were found.
    pub shortfall: bool,
}

/// Squared orbit distance (gradient metric modulo componentwise sign
/// flips), used both for deflation and duplicate suppression.
pub fn orbit_distance_sq(a: &State, b: &State) -> f64 {
    a.components()
        .iter()
        .zip(b.components())
        .map(|(x, y)| {
            let d = |sign: f64| {
                let diff = RadialField::new(
                    x.grid().clone(),
                    x.values()
                        .iter()
                        .zip(y.values())
                        .map(|(p, q)| p - sign * q)
                        .collect(),
                )
                .expect("same grid");
                grid::grad_norm_sq(&diff)
            };
            d(1.0).min(d(-1.0))
        })
        .sum()
}

/// Multi-start search for up to m distinct critical orbits, sorted by
/// energy. Previously found orbits are deflated out of the Newton
/// iteration; distinctness means inter-orbit distance above the
/// deflation radius.
pub fn multi_level_search(
    params: &SystemParams,
    m: usize,
    opts: &SolveOptions,
) -> Result<MultiLevelOutcome> {
    opts.validate()?;
    if m == 0 {
        return Err(Error::InvalidParameter("m must be >= 1".into()));
    }
    let kwong = soliton::reference_kwong(params.p())?;
    let scales = component_scales(params, &kwong)?;
    let k = params.k();

    // excited scalar profiles for the lift seeds (they are spatially
    // narrower than the ground lift, so they also set the resolution)
    let excited: Vec<soliton::ScalarSoliton> = if m >= 2 {
        (1..=(m - 1).min(3))
            .filter_map(|nodes| {
                soliton::solve_radial_excited(params.p(), &soliton::reference_grid(), 1e-6, nodes)
                    .ok()
            })
            .collect()
    } else {
        Vec::new()
    };
    let mut gamma_max = scales.iter().copied().fold(0.0f64, f64::max);
    let gamma_min = scales.iter().copied().fold(f64::INFINITY, f64::min);
    for exc in &excited {
        for i in 0..k {
            let beta_eff: f64 = (0..k).map(|j| params.beta(i, j).max(0.0)).sum::<f64>();
            if let Ok((_, gamma, _)) =
                soliton::rescale_factors(exc, beta_eff.max(params.beta(i, i)), params.rho()[i])
            {
                gamma_max = gamma_max.max(gamma);
            }
        }
    }
    let r_max = 40.0 / gamma_min;
    // excited orbits need roughly twice the resolution of the ground
    // orbit before their Nehari-Pohozaev defect drops below tolerance
    let ppw = 2.0 * resolution_factor(&kwong);
    let n = ((r_max * gamma_max * ppw).ceil() as usize).clamp(1024, 32768);
    let grid = grid::make_grid(n, r_max, GridKind::Uniform)?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut seeds: Vec<State> = Vec::new();
    // plain positive seed first, then excited scalar lifts (sign-changing
    // radial solutions of the effective scalar problem placed in every
    // component: near-exact system solutions for symmetric data), then
    // node-bearing and asymmetric Gaussian shapes
    seeds.push(seeded_state(params, &grid, &scales, &[1.0], &[0.0])?);
    for exc in &excited {
        if let Ok(lift) = excited_lift_seed(params, &grid, exc) {
            seeds.push(lift);
        }
    }
    let patterns: [(&[f64], &[f64]); 5] = [
        (&[1.3, 0.8], &[0.0]),
        (&[1.0], &[0.45]),
        (&[1.0, 1.0], &[0.45, 0.0]),
        (&[0.7], &[0.3]),
        (&[1.6, 1.0], &[0.0, 0.45]),
    ];
    for (widths, nodes) in patterns {
        seeds.push(seeded_state(params, &grid, &scales, widths, nodes)?);
    }
    let n_random = (4 * m).max(8) - seeds.len().min(4 * m);
    for _ in 0..n_random {
        let widths: Vec<f64> = (0..k).map(|_| rng.gen_range(0.6..1.8)).collect();
        let nodes: Vec<f64> = (0..k)
            .map(|_| if rng.gen_bool(0.5) { rng.gen_range(0.2..0.7) } else { 0.0 })
            .collect();
        seeds.push(seeded_state(params, &grid, &scales, &widths, &nodes)?);
    }

    let mut found: Vec<SolveReport> = Vec::new();
    let mut found_states: Vec<State> = Vec::new();
    let radius_sq = deflation_radius_sq(&grid, &scales, params);

    for seed in &seeds {
        if found.len() >= m {
            break;
        }
        let deflation = Deflation { targets: &found_states, shift: opts.deflation_shift };
        let use_deflation = !found_states.is_empty() && opts.deflation_shift > 0.0;
        let attempt = if use_deflation {
            solve_from(params, seed, opts, Some(&deflation))
        } else {
            solve_from(params, seed, opts, None)
        };
        let report = match attempt {
            Ok(r) if r.converged => r,
            _ => continue,
        };
        let duplicate = found_states
            .iter()
            .any(|s| orbit_distance_sq(&report.state, s) < radius_sq);
        if duplicate {
            continue;
        }
        found_states.push(report.state.clone());
        found.push(report);
    }

    found.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    let shortfall = found.len() < m;
    found.truncate(m);
    Ok(MultiLevelOutcome { reports: found, shortfall })
}

/// Seed built from the sign-changing radial solution of the effective
/// scalar problem (coupling = attractive row sum), rescaled to each
/// component's mass and placed in every slot.
fn excited_lift_seed(
    params: &SystemParams,
    grid: &Arc<RadialGrid>,
    excited: &soliton::ScalarSoliton,
) -> Result<State> {
    let fields = (0..params.k())
        .map(|i| {
            let beta_eff: f64 = (0..params.k())
                .map(|j| params.beta(i, j).max(0.0))
                .sum::<f64>()
                .max(params.beta(i, i));
            Ok(soliton::rescale_onto(excited, beta_eff, params.rho()[i], grid)?.u)
        })
        .collect::<Result<Vec<_>>>()?;
    State::new(fields)
}

/// Distinctness radius: a small fraction of the kinetic scale of a
/// unit-mass state at the problem's spatial scales.
fn deflation_radius_sq(
    grid: &Arc<RadialGrid>,
    scales: &[f64],
    params: &SystemParams,
) -> f64 {
    let probe = seeded_state(params, grid, scales, &[1.0], &[0.0])
        .and_then(|s| renormalize_masses(&s, params));
    match probe {
        Ok(s) => {
            let a: f64 = s.components().iter().map(grid::grad_norm_sq).sum();
            1e-4 * a
        }
        Err(_) => 1e-8,
    }
}

/// One row of a β-sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub beta: f64,
    pub energy: Option<f64>,
    pub m_residual: f64,
    pub converged: bool,
}

/// Ground-level sweep over increasing off-diagonal couplings,
/// warm-starting each row from the previous solution. Rows where the
/// solver fails are marked invalid rather than aborting the sweep.
pub fn beta_sweep_c1(
    template: &SystemParams,
    beta_values: &[f64],
    opts: &SolveOptions,
) -> Result<Vec<SweepRow>> {
    opts.validate()?;
    if beta_values.is_empty() {
        return Err(Error::InvalidParameter("empty beta list".into()));
    }
    if beta_values.windows(2).any(|w| w[1] <= w[0]) || beta_values[0] <= 0.0 {
        return Err(Error::InvalidParameter(
            "beta values must be positive and increasing".into(),
        ));
    }
    let kwong = soliton::reference_kwong(template.p())?;
    let mut rows = Vec::with_capacity(beta_values.len());
    let mut warm: Option<State> = None;
    for &beta in beta_values {
        let params = template.with_off_diagonal(beta);
        let grid = default_grid(&params, &kwong)?;
        let scales = component_scales(&params, &kwong)?;
        let init = match &warm {
            Some(s) => s.resample(&grid)?,
            None => seeded_state(&params, &grid, &scales, &[1.0], &[0.0])?,
        };
        match minimize_on_sm(&params, &init, opts) {
            Ok(report) => {
                rows.push(SweepRow {
                    beta,
                    energy: Some(report.energy),
                    m_residual: report.m_residual,
                    converged: report.converged,
                });
                if report.converged {
                    warm = Some(report.state);
                }
            }
            Err(_) => {
                rows.push(SweepRow { beta, energy: None, m_residual: f64::NAN, converged: false });
                warm = None;
            }
        }
    }
    Ok(rows)
}

/// One row of the repulsive-coupling test sequence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NonexistenceRow {
    /// Dilation s_n applied to every component except the lowest-level one.
    pub s: f64,
    /// Whether the coupling integral B(uⁿ) is positive (the projection
    /// exists only then).
    pub coupling_positive: bool,
    /// Fibering maximizer s_{uⁿ} of the test state (None while B ≤ 0).
    pub s_projected: Option<f64>,
    /// J(s_{uⁿ} ★ uⁿ) (None while B ≤ 0).
    pub energy: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NonexistenceOutcome {
    pub rows: Vec<NonexistenceRow>,
    /// Smallest decoupled level c₁ = min_i c_i (the unattained infimum).
    pub c1: f64,
    /// All decoupled levels c_i.
    pub decoupled_levels: Vec<f64>,
    /// Index of the component realizing c₁.
    pub anchor: usize,
    /// Relative gap (J_last − c₁)/c₁ of the last valid row.
    pub final_gap: f64,
    /// s_{uⁿ} of the last valid row (→ 1 as s → 0).
    pub s_final: f64,
}

/// The test sequence uⁿ = (u₁, s_n★u₂, …, s_n★u_K) for repulsive
/// off-diagonal coupling: component norms scale in closed form under
/// dilation, the cross integrals are evaluated through the grid-free
/// soliton profile, and each row reports s_{uⁿ} and J(s_{uⁿ} ★ uⁿ).
/// Energies decrease to c₁ from above while s_{uⁿ} → 1, exhibiting the
/// unattained infimum.
pub fn nonexistence_demo(
    params: &SystemParams,
    n_steps: usize,
    opts: &SolveOptions,
) -> Result<NonexistenceOutcome> {
    opts.validate()?;
    let k = params.k();
    if k < 2 {
        return Err(Error::InvalidParameter("nonexistence demo needs K >= 2".into()));
    }
    for i in 0..k {
        for j in 0..k {
            if i != j && params.beta(i, j) >= 0.0 {
                return Err(Error::InvalidParameter(
                    "all off-diagonal couplings must be negative".into(),
                ));
            }
        }
    }
    if n_steps < 2 {
        return Err(Error::InvalidParameter("need at least two rows".into()));
    }
    let p = params.p();
    let kwong = soliton::reference_kwong(p)?;
    let g_w = kwong.grad_sq();
    let m_w = kwong.mass_sq();
    let p_w = kwong.lp_norm_p();
    let kappa = params.reduced_energy_factor();

    // decoupled components u_i = α_i w(γ_i ·) and their invariants
    let mut alphas = vec![0.0; k];
    let mut gammas = vec![0.0; k];
    let mut kinetic = vec![0.0; k]; // A_i = ∫|∇u_i|²
    let mut lp = vec![0.0; k]; // P_i = ∫ u_i^p
    for i in 0..k {
        let (a, g, _) = soliton::rescale_factors(&kwong, params.beta(i, i), params.rho()[i])?;
        alphas[i] = a;
        gammas[i] = g;
        kinetic[i] = params.rho()[i].powi(2) * g * g * g_w / m_w;
        lp[i] = a.powf(p) * g.powi(-3) * p_w;
    }
    let levels: Vec<f64> = kinetic.iter().map(|a| kappa * a).collect();
    let anchor = levels
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    let c1 = levels[anchor];

    // quadrature grid adapted to the anchor component (the cross terms
    // live inside its support)
    let gamma_a = gammas[anchor];
    let r_max = 36.0 / gamma_a;
    let n = ((r_max * gammas.iter().copied().fold(0.0f64, f64::max) * 30.0).ceil() as usize)
        .clamp(2048, 16384);
    let qgrid = grid::make_grid(n, r_max, GridKind::Uniform)?;
    let anchor_pow: Vec<f64> = kwong
        .profile()
        .eval_sorted(&qgrid.nodes().iter().map(|&r| gamma_a * r).collect::<Vec<_>>())
        .iter()
        .map(|v| v.powf(0.5 * p))
        .collect();

    // cross integral ∫ |u_a|^{p/2} |s★u_j|^{p/2} dx via the profile
    let cross = |j: usize, s: f64| -> f64 {
        let pts: Vec<f64> = qgrid.nodes().iter().map(|&r| gammas[j] * s * r).collect();
        let other = kwong.profile().eval_sorted(&pts);
        let quad: f64 = qgrid
            .weights()
            .iter()
            .enumerate()
            .map(|(m, w)| w * anchor_pow[m] * other[m].powf(0.5 * p))
            .sum();
        (alphas[anchor] * alphas[j]).powf(0.5 * p) * s.powf(0.75 * p) * quad
    };

    // fixed same-scale integrals among the dilated components
    let mut dilated_fixed = 0.0;
    for i in 0..k {
        if i == anchor {
            continue;
        }
        dilated_fixed += params.beta(i, i) * lp[i];
        for j in 0..k {
            if j == anchor || j <= i {
                continue;
            }
            dilated_fixed += 2.0 * params.beta(i, j) * cross_same_scale(
                &kwong, &alphas, &gammas, i, j, p, &qgrid,
            );
        }
    }

    let s_min: f64 = 0.015;
    let ratio = s_min.powf(1.0 / (n_steps as f64 - 1.0));
    let mut rows = Vec::with_capacity(n_steps);
    let mut final_gap = f64::NAN;
    let mut s_final = f64::NAN;
    let exponent = 1.5 * (p - 2.0);
    for step in 0..n_steps {
        let s = ratio.powi(step as i32);
        let a_total = kinetic[anchor]
            + s * s * kinetic.iter().enumerate().filter(|(i, _)| *i != anchor).map(|(_, v)| v).sum::<f64>();
        let mut b_total = params.beta(anchor, anchor) * lp[anchor] + s.powf(exponent) * dilated_fixed;
        for j in 0..k {
            if j != anchor {
                b_total += 2.0 * params.beta(anchor, j) * cross(j, s);
            }
        }
        if b_total <= 0.0 {
            rows.push(NonexistenceRow {
                s,
                coupling_positive: false,
                s_projected: None,
                energy: None,
            });
            continue;
        }
        let s_u = (a_total / (params.m_coefficient() * b_total)).powf(2.0 / (3.0 * p - 10.0));
        let energy = kappa * s_u * s_u * a_total;
        rows.push(NonexistenceRow {
            s,
            coupling_positive: true,
            s_projected: Some(s_u),
            energy: Some(energy),
        });
        final_gap = (energy - c1) / c1;
        s_final = s_u;
    }
    Ok(NonexistenceOutcome {
        rows,
        c1,
        decoupled_levels: levels,
        anchor,
        final_gap,
        s_final,
    })
}

/// ∫ |u_i|^{p/2} |u_j|^{p/2} dx for two decoupled profiles at their own
/// scales (no extra dilation): both components evaluated through the
/// soliton profile on the shared quadrature grid.
fn cross_same_scale(
    kwong: &ScalarSoliton,
    alphas: &[f64],
    gammas: &[f64],
    i: usize,
    j: usize,
    p: f64,
    qgrid: &Arc<RadialGrid>,
) -> f64 {
    let pts_i: Vec<f64> = qgrid.nodes().iter().map(|&r| gammas[i] * r).collect();
    let pts_j: Vec<f64> = qgrid.nodes().iter().map(|&r| gammas[j] * r).collect();
    let vi = kwong.profile().eval_sorted(&pts_i);
    let vj = kwong.profile().eval_sorted(&pts_j);
    let quad: f64 = qgrid
        .weights()
        .iter()
        .enumerate()
        .map(|(m, w)| w * vi[m].powf(0.5 * p) * vj[m].powf(0.5 * p))
        .sum();
    (alphas[i] * alphas[j]).powf(0.5 * p) * quad
}
