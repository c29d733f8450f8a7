//! Damped Newton iteration on the discrete Euler–Lagrange system with
//! mass constraints, plus Farrell-style deflation of known orbits.
//!
//! Unknowns are the K·N nodal values (interleaved by node) and the K
//! multipliers. The nodal part of the Jacobian is banded (fourth-order
//! Laplacian stencils plus pointwise coupling blocks); the multiplier
//! columns and mass rows are eliminated through a K×K Schur complement.
//! The last node of every component carries the Dirichlet row u = 0.

use crate::error::{Error, Result};
use crate::functional::{self, State, SystemParams};
use crate::grid::{self, GridKind, RadialField};

use super::linalg::{solve_dense, BandedMatrix};

/// Deflation operator Π_k (1 + shift / d_k²) over the known orbits,
/// with d_k the gradient-metric distance modulo componentwise sign flips.
pub struct Deflation<'a> {
    pub targets: &'a [State],
    pub shift: f64,
}

impl Deflation<'_> {
    /// Distance² to a target orbit: per component the better of the two
    /// sign choices in the homogeneous H¹ seminorm.
    fn orbit_dist_sq(u: &State, v: &State) -> f64 {
        u.components()
            .iter()
            .zip(v.components())
            .map(|(a, b)| {
                let plus = diff_grad_sq(a, b, 1.0);
                let minus = diff_grad_sq(a, b, -1.0);
                plus.min(minus)
            })
            .sum()
    }

    pub fn factor(&self, u: &State) -> f64 {
        self.targets
            .iter()
            .map(|t| 1.0 + self.shift / Self::orbit_dist_sq(u, t).max(1e-30))
            .product()
    }

    /// Directional derivative of the factor along du (nodal part only).
    fn directional(&self, u: &State, du: &[f64]) -> f64 {
        let k = u.k();
        let n = u.grid().len();
        let mut total = 0.0;
        let full: f64 = self.factor(u);
        for t in self.targets {
            let dist_sq = Self::orbit_dist_sq(u, t).max(1e-30);
            let m_k = 1.0 + self.shift / dist_sq;
            // d/dt (1 + s/d²) = -2s/d⁴ · ½ d(d²)
            let mut d_dist = 0.0;
            for i in 0..k {
                let a = u.component(i);
                let b = t.component(i);
                let sign = if diff_grad_sq(a, b, 1.0) <= diff_grad_sq(a, b, -1.0) {
                    1.0
                } else {
                    -1.0
                };
                let diff = RadialField::new(
                    a.grid().clone(),
                    a.values()
                        .iter()
                        .zip(b.values())
                        .map(|(x, y)| x - sign * y)
                        .collect(),
                )
                .expect("same grid");
                let du_i = RadialField::new(
                    a.grid().clone(),
                    (0..n).map(|m| du[m * k + i]).collect(),
                )
                .expect("same grid");
                d_dist += 2.0 * grad_inner(&diff, &du_i);
            }
            total += (full / m_k) * (-self.shift / (dist_sq * dist_sq)) * d_dist;
        }
        total
    }
}

fn diff_grad_sq(a: &RadialField, b: &RadialField, sign: f64) -> f64 {
    let diff = RadialField::new(
        a.grid().clone(),
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| x - sign * y)
            .collect(),
    )
    .expect("same grid");
    grid::grad_norm_sq(&diff)
}

fn grad_inner(a: &RadialField, b: &RadialField) -> f64 {
    let da = grid::nodal_derivative(a);
    let db = grid::nodal_derivative(b);
    a.grid()
        .weights()
        .iter()
        .zip(da.iter().zip(db.iter()))
        .map(|(w, (x, y))| w * x * y)
        .sum()
}

pub struct NewtonOutcome {
    pub state: State,
    pub lambda: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
}

/// Residual of the full system: EL fields stacked (with the Dirichlet
/// row at the outer node) and the mass defects.
fn residual_vector(
    u: &State,
    lambda: &[f64],
    params: &SystemParams,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let k = u.k();
    let n = u.grid().len();
    let el = functional::gradient(u, lambda, params)?;
    let mut f = vec![0.0; n * k];
    for i in 0..k {
        let vals = el.component(i).values();
        let ui = u.component(i).values();
        for m in 0..n {
            f[m * k + i] = if m == n - 1 { ui[m] } else { vals[m] };
        }
    }
    let masses = functional::mass_vector(u);
    let g: Vec<f64> = (0..k)
        .map(|i| masses[i] - params.rho()[i] * params.rho()[i])
        .collect();
    Ok((f, g))
}

fn merit(f: &[f64], g: &[f64]) -> f64 {
    let a: f64 = f.iter().map(|v| v * v).sum();
    let b: f64 = g.iter().map(|v| v * v).sum();
    (a + b).sqrt()
}

/// Fourth-order Laplacian stencil rows mirroring
/// `grid::apply_radial_laplacian_o4` (uniform grids).
fn laplacian_stencil(m: usize, n: usize, h: f64, r: &[f64]) -> Vec<(usize, f64)> {
    let h2 = h * h;
    if m == 0 {
        return vec![
            (0, -15.0 / (2.0 * h2)),
            (1, 16.0 / (2.0 * h2)),
            (2, -1.0 / (2.0 * h2)),
        ];
    }
    if m == 1 {
        let c = 2.0 / r[1];
        return vec![
            (0, 16.0 / (12.0 * h2) + c * (-8.0) / (12.0 * h)),
            (1, -31.0 / (12.0 * h2) + c * 1.0 / (12.0 * h)),
            (2, 16.0 / (12.0 * h2) + c * 8.0 / (12.0 * h)),
            (3, -1.0 / (12.0 * h2) + c * (-1.0) / (12.0 * h)),
        ];
    }
    if m == n - 2 {
        let c = 2.0 / r[m];
        return vec![
            (m - 4, 1.0 / (12.0 * h2)),
            (m - 3, -6.0 / (12.0 * h2) + c * (-1.0) / (12.0 * h)),
            (m - 2, 14.0 / (12.0 * h2) + c * 6.0 / (12.0 * h)),
            (m - 1, -4.0 / (12.0 * h2) + c * (-18.0) / (12.0 * h)),
            (m, -15.0 / (12.0 * h2) + c * 10.0 / (12.0 * h)),
            (m + 1, 10.0 / (12.0 * h2) + c * 3.0 / (12.0 * h)),
        ];
    }
    debug_assert!(m >= 2 && m < n - 2);
    let c = 2.0 / r[m];
    vec![
        (m - 2, -1.0 / (12.0 * h2) + c * 1.0 / (12.0 * h)),
        (m - 1, 16.0 / (12.0 * h2) + c * (-8.0) / (12.0 * h)),
        (m, -30.0 / (12.0 * h2)),
        (m + 1, 16.0 / (12.0 * h2) + c * 8.0 / (12.0 * h)),
        (m + 2, -1.0 / (12.0 * h2) + c * (-1.0) / (12.0 * h)),
    ]
}

/// ∂N_i/∂u_j at one node (pointwise coupling derivatives).
fn coupling_jacobian_entry(
    params: &SystemParams,
    vals: &[Vec<f64>],
    i: usize,
    j: usize,
    m: usize,
) -> f64 {
    let p = params.p();
    let k = params.k();
    let ui = vals[i][m];
    if i == j {
        // β_ii (p−1)|u_i|^{p−2} + Σ_{l≠i} β_il (p/2−1)|u_i|^{p/2−2}|u_l|^{p/2}
        let mut d = params.beta(i, i) * (p - 1.0) * ui.abs().powf(p - 2.0);
        let own = if p == 4.0 { 1.0 } else { ui.abs().powf(0.5 * p - 2.0) };
        for l in 0..k {
            if l == i {
                continue;
            }
            d += params.beta(i, l) * (0.5 * p - 1.0) * own * vals[l][m].abs().powf(0.5 * p);
        }
        d
    } else {
        // β_ij g(u_i) h'(u_j), g(t) = sign(t)|t|^{p/2−1}, h'(t) = (p/2)sign(t)|t|^{p/2−1}
        let g = ui.signum() * ui.abs().powf(0.5 * p - 1.0);
        let uj = vals[j][m];
        let hp = 0.5 * p * uj.signum() * uj.abs().powf(0.5 * p - 1.0);
        params.beta(i, j) * g * hp
    }
}

/// One assembled Newton step: returns (du interleaved, dλ).
fn newton_step(
    u: &State,
    lambda: &[f64],
    params: &SystemParams,
    f: &[f64],
    g: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let k = u.k();
    let grid = u.grid();
    let n = grid.len();
    let h = grid.spacing();
    let r = grid.nodes();
    let w = grid.weights();
    let vals: Vec<Vec<f64>> = (0..k).map(|i| u.component(i).values().to_vec()).collect();

    // widest couplings: node n−2 reaches 4 nodes down, node 1 two nodes up
    let kl = 5 * k - 1;
    let ku = 3 * k - 1;
    let mut a = BandedMatrix::zeros(n * k, kl, ku);

    for m in 0..n {
        for i in 0..k {
            let row = m * k + i;
            if m == n - 1 {
                a.set(row, row, 1.0); // Dirichlet at r_max
                continue;
            }
            // -Δ contribution
            for (col_node, c) in laplacian_stencil(m, n, h, r) {
                a.add(row, col_node * k + i, -c);
            }
            // +λ_i
            a.add(row, row, lambda[i]);
            // -∂N_i/∂u_j (same node)
            for j in 0..k {
                let d = coupling_jacobian_entry(params, &vals, i, j, m);
                a.add(row, m * k + j, -d);
            }
        }
    }
    a.factor().map_err(Error::NoConvergence)?;

    // y = J⁻¹(−F), z_i = J⁻¹ (∂F/∂λ_i)
    let mut y: Vec<f64> = f.iter().map(|v| -v).collect();
    a.solve(&mut y);
    let mut z_cols: Vec<Vec<f64>> = Vec::with_capacity(k);
    for i in 0..k {
        let mut col = vec![0.0; n * k];
        for m in 0..n - 1 {
            col[m * k + i] = vals[i][m];
        }
        a.solve(&mut col);
        z_cols.push(col);
    }

    // Schur complement on the multipliers: (Vᵀ Z) dλ = Vᵀ y + G,
    // where Vᵀ du = Σ_m 2 w_m u_i(m) du_i(m).
    let vt = |x: &[f64], i: usize| -> f64 {
        (0..n).map(|m| 2.0 * w[m] * vals[i][m] * x[m * k + i]).sum()
    };
    let mut schur: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| vt(&z_cols[j], i)).collect())
        .collect();
    let mut rhs: Vec<f64> = (0..k).map(|i| vt(&y, i) + g[i]).collect();
    solve_dense(&mut schur, &mut rhs).map_err(Error::NoConvergence)?;
    let dlambda = rhs;

    let du: Vec<f64> = (0..n * k)
        .map(|idx| {
            let mut v = y[idx];
            for (i, dl) in dlambda.iter().enumerate() {
                v -= dl * z_cols[i][idx];
            }
            v
        })
        .collect();
    Ok((du, dlambda))
}

/// Damped (optionally deflated) Newton iteration. Stops when the merit
/// of the full residual drops below `tol` or `max_iters` is exhausted.
pub fn newton_solve(
    u0: &State,
    lambda0: &[f64],
    params: &SystemParams,
    deflation: Option<&Deflation>,
    tol: f64,
    max_iters: usize,
) -> Result<NewtonOutcome> {
    if u0.grid().kind() != GridKind::Uniform {
        return Err(Error::InvalidParameter(
            "newton iteration expects a uniform grid".into(),
        ));
    }
    let k = u0.k();
    let n = u0.grid().len();
    let mut u = u0.clone();
    let mut lambda = lambda0.to_vec();
    let (mut f, mut g) = residual_vector(&u, &lambda, params)?;
    let mut best = merit(&f, &g);

    for it in 0..max_iters {
        if best <= tol {
            return Ok(NewtonOutcome {
                state: u,
                lambda,
                converged: true,
                iterations: it,
                residual: best,
            });
        }
        let (mut du, mut dl) = newton_step(&u, &lambda, params, &f, &g)?;
        if let Some(defl) = deflation {
            if !defl.targets.is_empty() {
                let m_val = defl.factor(&u);
                let dir = defl.directional(&u, &du);
                let denom = 1.0 - dir / m_val;
                // Farrell scaling pushes the step away from deflated roots
                let alpha = if denom.abs() < 1e-12 { 1e12 } else { 1.0 / denom };
                let alpha = alpha.clamp(-50.0, 50.0);
                du.iter_mut().for_each(|v| *v *= alpha);
                dl.iter_mut().for_each(|v| *v *= alpha);
            }
        }

        // damping on the (deflated) merit
        let defl_weight = |state: &State| deflation.map_or(1.0, |d| d.factor(state).min(1e12));
        let base_merit = best * defl_weight(&u);
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..10 {
            let mut trial = u.clone();
            for i in 0..k {
                let comp = trial.components_mut()[i].values_mut();
                for m in 0..n {
                    comp[m] += step * du[m * k + i];
                }
            }
            let trial_lambda: Vec<f64> =
                lambda.iter().zip(&dl).map(|(l, d)| l + step * d).collect();
            match residual_vector(&trial, &trial_lambda, params) {
                Ok((tf, tg)) => {
                    let tm = merit(&tf, &tg) * defl_weight(&trial);
                    if tm < base_merit || (deflation.is_none() && tm < base_merit * 1.0) {
                        u = trial;
                        lambda = trial_lambda;
                        f = tf;
                        g = tg;
                        best = merit(&f, &g);
                        accepted = true;
                        break;
                    }
                }
                Err(_) => {}
            }
            step *= 0.5;
        }
        if !accepted {
            return Ok(NewtonOutcome {
                state: u,
                lambda,
                converged: best <= tol,
                iterations: it,
                residual: best,
            });
        }
    }
    let converged = best <= tol;
    Ok(NewtonOutcome { state: u, lambda, converged, iterations: max_iters, residual: best })
}
