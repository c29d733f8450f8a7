//! Radial Schrödinger operator diagnostics.
//!
//! The compactness argument bounds the Morse index of a solution
//! component by the number of negative eigenvalues of -Δ + W for the
//! second-variation potential W, which in turn is controlled by the
//! Cwikel–Lieb–Rozenblum integral ∫|W⁻|^{3/2}. This module builds W,
//! counts negative eigenvalues per angular momentum channel by Sturm
//! bisection on the half-line reduction v = r·u, reports the CLR
//! integral, and checks the |u| ≤ C/r decay used alongside it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::{State, SystemParams};
use crate::grid::{self, GridKind, RadialField};

/// Real radial potential, possibly sign-changing, with finite
/// ∫|W|^{3/2} dx.
#[derive(Debug, Clone)]
pub struct RadialPotential {
    w: RadialField,
}

impl RadialPotential {
    pub fn new(w: RadialField) -> Result<Self> {
        let l32 = grid::integrate(&w.map(|v| v.abs().powf(1.5)));
        if !l32.is_finite() {
            return Err(Error::InvalidParameter(
                "potential is not numerically in L^{3/2}".into(),
            ));
        }
        Ok(RadialPotential { w })
    }

    pub fn field(&self) -> &RadialField {
        &self.w
    }
}

/// Negative-spectrum summary of -Δ + W.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralReport {
    /// Total count over ℓ = 0..ell_max, weighted by multiplicity 2ℓ+1.
    pub neg_count: usize,
    /// The ℓ = 0 count alone: the radial (H¹_rad) Morse index.
    pub neg_count_radial: usize,
    /// Up to five lowest ℓ = 0 eigenvalues.
    pub lowest_eigs: Vec<f64>,
    /// ∫ |W⁻|^{3/2} dx.
    pub clr_integral: f64,
    /// Configured comparison constant (unsourced; reported, never asserted).
    pub clr_constant: f64,
    /// Set when the ℓ = ell_max channel still binds states (truncation
    /// suspect).
    pub truncation_warning: bool,
}

/// Default comparison constant for the CLR report. The bound itself only
/// says "a constant times the integral"; 1.0 is a placeholder and the
/// report carries the measured ratio instead of asserting anything.
pub const DEFAULT_CLR_CONSTANT: f64 = 1.0;

/// Second-variation potential of component i at the state u:
/// W = −(p−1) β_ii |u_i|^{p−2} − ((p−2)/2) Σ_{j≠i} β_ij |u_i|^{p/2−2} |u_j|^{p/2}.
///
/// Requires p ≥ 4: that is the regime where the decay |u| ≤ C/r makes
/// W an L^{3/2} potential and the whole Morse argument applies. For
/// p = 4 the cross-term exponent |u_i|⁰ is identically 1 (the second
/// derivative of |t|² is 2 regardless of the base point).
pub fn morse_potential(u: &State, i: usize, params: &SystemParams) -> Result<RadialPotential> {
    if params.p() < 4.0 {
        return Err(Error::InvalidParameter(format!(
            "morse potential needs p >= 4, got {}",
            params.p()
        )));
    }
    if i >= u.k() || u.k() != params.k() {
        return Err(Error::ShapeMismatch(format!(
            "component index {i} out of range for K = {}",
            u.k()
        )));
    }
    let p = params.p();
    let k = u.k();
    let n = u.grid().len();
    let ui = u.component(i).values();
    let mut vals = vec![0.0; n];
    for m in 0..n {
        let own = -(p - 1.0) * params.beta(i, i) * ui[m].abs().powf(p - 2.0);
        let mut cross = 0.0;
        for j in 0..k {
            if j == i {
                continue;
            }
            let uj = u.component(j).values()[m];
            let base = if p == 4.0 { 1.0 } else { ui[m].abs().powf(0.5 * p - 2.0) };
            cross += params.beta(i, j) * base * uj.abs().powf(0.5 * p);
        }
        vals[m] = own - 0.5 * (p - 2.0) * cross;
    }
    RadialPotential::new(RadialField::new(u.grid().clone(), vals)?)
}

/// Count the negative eigenvalues of -Δ + W by angular momentum channel.
///
/// For each ℓ the operator reduces on v = r·u to the half-line problem
/// -v'' + [ℓ(ℓ+1)/r² + W(r)] v with Dirichlet ends; the tridiagonal
/// discretization is counted exactly by Sturm bisection and channels are
/// summed with multiplicity 2ℓ+1.
pub fn count_negative_eigenvalues(
    w: &RadialPotential,
    ell_max: usize,
) -> Result<SpectralReport> {
    count_negative_eigenvalues_with(w, ell_max, DEFAULT_CLR_CONSTANT)
}

pub fn count_negative_eigenvalues_with(
    w: &RadialPotential,
    ell_max: usize,
    clr_constant: f64,
) -> Result<SpectralReport> {
    if w.field().grid().kind() != GridKind::Uniform {
        return Err(Error::InvalidParameter(
            "eigenvalue counting expects a uniform grid".into(),
        ));
    }
    let mut total = 0usize;
    let mut radial = 0usize;
    let mut last_channel = 0usize;
    for ell in 0..=ell_max {
        let (diag, off) = half_line_matrix(w, ell);
        let count = sturm_count_below(&diag, &off, 0.0);
        if ell == 0 {
            radial = count;
        }
        total += (2 * ell + 1) * count;
        last_channel = count;
    }
    let (diag, off) = half_line_matrix(w, 0);
    let lowest = lowest_eigenvalues(&diag, &off, 5)
        .into_iter()
        .filter(|e| *e < 0.0)
        .collect();
    Ok(SpectralReport {
        neg_count: total,
        neg_count_radial: radial,
        lowest_eigs: lowest,
        clr_integral: clr_integral(w),
        clr_constant,
        truncation_warning: last_channel > 0,
    })
}

/// ∫ |W⁻|^{3/2} dx with W⁻ = min(W, 0).
pub fn clr_integral(w: &RadialPotential) -> f64 {
    grid::integrate(&w.field().map(|v| v.min(0.0).abs().powf(1.5)))
}

/// Radial Morse index of component i: the ℓ = 0 negative count of
/// -Δ + W_i.
pub fn morse_index_component(
    u: &State,
    i: usize,
    params: &SystemParams,
    ell_max: usize,
) -> Result<usize> {
    let w = morse_potential(u, i, params)?;
    Ok(count_negative_eigenvalues(&w, ell_max)?.neg_count_radial)
}

/// Fill a solve report's per-component Morse indices on demand.
pub fn attach_morse_indices(
    report: &mut crate::solver::SolveReport,
    params: &SystemParams,
    ell_max: usize,
) -> Result<()> {
    let indices = (0..report.state.k())
        .map(|i| morse_index_component(&report.state, i, params, ell_max))
        .collect::<Result<Vec<_>>>()?;
    report.morse_index_components = Some(indices);
    Ok(())
}

/// Per component, the maximum of |u_i(r)|·r over the outer half of the
/// grid. Bound states decay exponentially, so this quantity decreases on
/// dyadic shells; a 1/r profile keeps it constant.
pub fn decay_check(u: &State) -> Vec<f64> {
    let nodes = u.grid().nodes();
    let half = u.grid().r_max() * 0.5;
    u.components()
        .iter()
        .map(|c| {
            c.values()
                .iter()
                .zip(nodes)
                .filter(|(_, &r)| r >= half)
                .map(|(v, &r)| v.abs() * r)
                .fold(0.0f64, f64::max)
        })
        .collect()
}

/// Maxima of |u_i(r)|·r over a dyadic partition of the outer grid
/// (shells [r_max/2^k, r_max/2^{k-1}], innermost first).
pub fn decay_shell_maxima(f: &RadialField, shells: usize) -> Vec<f64> {
    let r_max = f.grid().r_max();
    let nodes = f.grid().nodes();
    (0..shells)
        .rev()
        .map(|k| {
            let lo = r_max / (1 << (k + 1)) as f64;
            let hi = r_max / (1 << k) as f64;
            f.values()
                .iter()
                .zip(nodes)
                .filter(|(_, &r)| r > lo && r <= hi)
                .map(|(v, &r)| v.abs() * r)
                .fold(0.0f64, f64::max)
        })
        .collect()
}

/// Dirichlet tridiagonal for -d²/dr² + ℓ(ℓ+1)/r² + W on the interior
/// nodes (v = r·u vanishes at both ends).
fn half_line_matrix(w: &RadialPotential, ell: usize) -> (Vec<f64>, Vec<f64>) {
    let g = w.field().grid();
    let h = g.spacing();
    let n = g.len();
    let nodes = g.nodes();
    let vals = w.field().values();
    let inv_h2 = 1.0 / (h * h);
    let centrifugal = (ell * (ell + 1)) as f64;
    let diag: Vec<f64> = (1..n - 1)
        .map(|j| 2.0 * inv_h2 + centrifugal / (nodes[j] * nodes[j]) + vals[j])
        .collect();
    let off = vec![-inv_h2; diag.len().saturating_sub(1)];
    (diag, off)
}

/// Number of eigenvalues of the symmetric tridiagonal (diag, off)
/// strictly below lambda, by the Sturm sequence (LDLᵀ pivot signs).
pub fn sturm_count_below(diag: &[f64], off: &[f64], lambda: f64) -> usize {
    let n = diag.len();
    if n == 0 {
        return 0;
    }
    let guard = 1e-300;
    let mut count = 0usize;
    let mut q = diag[0] - lambda;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let q_safe = if q.abs() < guard { if q >= 0.0 { guard } else { -guard } } else { q };
        q = (diag[i] - lambda) - off[i - 1] * off[i - 1] / q_safe;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The k smallest eigenvalues via Sturm bisection inside the Gershgorin
/// bounds.
pub fn lowest_eigenvalues(diag: &[f64], off: &[f64], k: usize) -> Vec<f64> {
    let n = diag.len();
    if n == 0 {
        return Vec::new();
    }
    let mut lo = f64::MAX;
    let mut hi = f64::MIN;
    for i in 0..n {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i < n - 1 { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - left - right);
        hi = hi.max(diag[i] + left + right);
    }
    lo -= 1.0;
    hi += 1.0;
    (0..k.min(n))
        .map(|idx| {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..120 {
                let mid = 0.5 * (a + b);
                if (b - a) < 1e-13 * mid.abs().max(1.0) {
                    break;
                }
                if sturm_count_below(diag, off, mid) <= idx {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}
