//! Radial discretization of R^3.
//!
//! Everything downstream integrates radial profiles against the measure
//! 4π r² dr on a truncated interval [0, r_max]. Solitons here decay
//! exponentially, so a zero Dirichlet extension beyond r_max is assumed
//! throughout. This module owns the grids, the quadrature weights, the
//! difference operators, and the mass-preserving dilation
//! (s ★ u)(r) = s^{3/2} u(s r).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible node count (boundary stencils need 6 nodes per end).
pub const MIN_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Uniform,
    Graded,
}

impl std::fmt::Display for GridKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GridKind::Uniform => write!(f, "uniform"),
            GridKind::Graded => write!(f, "graded"),
        }
    }
}

/// Discretization of [0, r_max] with quadrature weights for 3-D radial
/// integrals: sum_j w_j f(r_j) ≈ 4π ∫ f r² dr.
///
/// Uniform grids carry Gregory-corrected trapezoidal weights applied to
/// 4π r² f(r): interior weights equal 4π r_j² h, the three nodes at each
/// end carry the classical 3/8, 7/6, 23/24 corrections. The rule is exact
/// for polynomial f up to degree one (integrand degree three), so the
/// weight sum reproduces the ball volume to rounding, and it inherits the
/// trapezoidal superconvergence for smooth decaying integrands.
///
/// Graded grids cluster nodes near r = 0 (quadratic map) and use exact
/// piecewise-linear moment weights instead; those are second order but
/// positive and still exact on constants.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    r_max: f64,
    kind: GridKind,
}

/// Serializable grid descriptor: (N, r_max, kind).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub r_max: f64,
    pub kind: GridKind,
}

/// Gregory end corrections of order four (interior coefficient is 1).
const GREGORY_EDGE: [f64; 3] = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];

pub fn make_grid(n: usize, r_max: f64, kind: GridKind) -> Result<Arc<RadialGrid>> {
    if n < MIN_NODES {
        return Err(Error::InvalidParameter(format!(
            "grid needs at least {MIN_NODES} nodes, got {n}"
        )));
    }
    if !(r_max > 0.0) || !r_max.is_finite() {
        return Err(Error::InvalidParameter(format!("r_max must be > 0, got {r_max}")));
    }

    let nodes: Vec<f64> = match kind {
        GridKind::Uniform => {
            let h = r_max / (n - 1) as f64;
            (0..n).map(|j| j as f64 * h).collect()
        }
        GridKind::Graded => (0..n)
            .map(|j| {
                let t = j as f64 / (n - 1) as f64;
                r_max * t * t
            })
            .collect(),
    };

    let weights = match kind {
        GridKind::Uniform => gregory_weights(&nodes),
        GridKind::Graded => hat_moment_weights(&nodes),
    };

    Ok(Arc::new(RadialGrid { nodes, weights, r_max, kind }))
}

impl RadialGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    /// Uniform spacing; panics on graded grids (callers check `kind`).
    pub fn spacing(&self) -> f64 {
        debug_assert!(self.kind == GridKind::Uniform);
        self.r_max / (self.len() - 1) as f64
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec { n: self.len(), r_max: self.r_max, kind: self.kind }
    }

    /// Weighted L² inner product of two sample vectors.
    pub fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(a.iter().zip(b.iter()))
            .map(|(w, (x, y))| w * x * y)
            .sum()
    }

    pub fn same_grid(a: &Arc<RadialGrid>, b: &Arc<RadialGrid>) -> bool {
        Arc::ptr_eq(a, b) || (a.spec() == b.spec())
    }
}

/// Gregory-corrected trapezoidal weights on 4π r² for a uniform grid.
fn gregory_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let h = nodes[1] - nodes[0];
    let four_pi = 4.0 * std::f64::consts::PI;
    (0..n)
        .map(|j| {
            let edge = j.min(n - 1 - j);
            let omega = if edge < 3 { GREGORY_EDGE[edge] } else { 1.0 };
            omega * h * four_pi * nodes[j] * nodes[j]
        })
        .collect()
}

/// Exact integrals of the piecewise-linear hat functions against 4π r² dr.
fn hat_moment_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let four_pi = 4.0 * std::f64::consts::PI;
    let mut w = vec![0.0; n];
    for c in 0..n - 1 {
        let (a, b) = (nodes[c], nodes[c + 1]);
        let h = b - a;
        // ∫ (b-r)/h r² dr  and  ∫ (r-a)/h r² dr over [a, b]
        let left = (b.powi(4) / 12.0 - a.powi(3) * b / 3.0 + a.powi(4) / 4.0) / h;
        let right = (b.powi(4) / 4.0 - a * b.powi(3) / 3.0 + a.powi(4) / 12.0) / h;
        w[c] += four_pi * left;
        w[c + 1] += four_pi * right;
    }
    w
}

/// One real-valued radial profile sampled on a shared grid, implicitly
/// extended by zero beyond r_max.
#[derive(Debug, Clone)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "field has {} samples on a {}-node grid",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("field contains non-finite samples".into()));
        }
        Ok(RadialField { grid, values })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        RadialField { grid, values: vec![0.0; n] }
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        RadialField { grid, values }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Pointwise map into a new field on the same grid.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> RadialField {
        RadialField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> RadialField {
        self.map(|v| c * v)
    }

    /// Two-column CSV (r, value) with a one-line header.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 48 + 16);
        out.push_str("r,value\n");
        for (r, v) in self.grid.nodes().iter().zip(&self.values) {
            out.push_str(&format!("{r:.17e},{v:.17e}\n"));
        }
        out
    }
}

/// 4π ∫ f r² dr over [0, r_max] via the grid's quadrature weights.
pub fn integrate(f: &RadialField) -> f64 {
    f.grid.dot(f.values(), &vec![1.0; f.grid.len()])
}

/// Weighted integral of a pointwise product; avoids building temporaries.
pub fn integrate_product(f: &RadialField, g: impl Fn(usize) -> f64) -> f64 {
    f.grid
        .weights()
        .iter()
        .enumerate()
        .map(|(j, w)| w * f.values[j] * g(j))
        .sum()
}

/// 4π ∫ u'(r)² r² dr, the squared gradient norm ∫ |∇u|² dx of a radial u.
pub fn grad_norm_sq(f: &RadialField) -> f64 {
    let d = nodal_derivative(f);
    f.grid
        .weights()
        .iter()
        .zip(d.iter())
        .map(|(w, di)| w * di * di)
        .sum()
}

/// First derivative at the nodes.
///
/// Uniform grids use fourth-order stencils: centred in the interior, even
/// extension across r = 0 (radial profiles have u'(0) = 0), biased
/// one-sided at the outer end so constants are annihilated exactly.
/// Graded grids use the three-point nonuniform formula.
pub fn nodal_derivative(f: &RadialField) -> Vec<f64> {
    let u = f.values();
    let n = u.len();
    let mut d = vec![0.0; n];
    match f.grid.kind() {
        GridKind::Uniform => {
            let h = f.grid.spacing();
            d[0] = 0.0; // radial regularity; node carries zero weight anyway
            d[1] = (u[1] - 8.0 * u[0] + 8.0 * u[2] - u[3]) / (12.0 * h);
            for j in 2..n - 2 {
                d[j] = (u[j - 2] - 8.0 * u[j - 1] + 8.0 * u[j + 1] - u[j + 2]) / (12.0 * h);
            }
            d[n - 2] = (3.0 * u[n - 1] + 10.0 * u[n - 2] - 18.0 * u[n - 3] + 6.0 * u[n - 4]
                - u[n - 5])
                / (12.0 * h);
            d[n - 1] = (25.0 * u[n - 1] - 48.0 * u[n - 2] + 36.0 * u[n - 3] - 16.0 * u[n - 4]
                + 3.0 * u[n - 5])
                / (12.0 * h);
        }
        GridKind::Graded => {
            let r = f.grid.nodes();
            d[0] = 0.0;
            for j in 1..n - 1 {
                let hl = r[j] - r[j - 1];
                let hr = r[j + 1] - r[j];
                // difference form: exactly zero on constants
                d[j] = (hl * hl * (u[j + 1] - u[j]) + hr * hr * (u[j] - u[j - 1]))
                    / (hl * hr * (hl + hr));
            }
            let hl = r[n - 2] - r[n - 3];
            let hr = r[n - 1] - r[n - 2];
            // one-sided quadratic at the outer end
            d[n - 1] = ((u[n - 1] - u[n - 2]) * (hl + 2.0 * hr) / hr
                - (u[n - 2] - u[n - 3]) * hr / hl)
                / (hl + hr);
        }
    }
    d
}

/// Second-order discrete radial Laplacian Δu = u'' + (2/r) u'.
///
/// At r = 0 the removable singularity is replaced by the regularity limit
/// Δu(0) = 3 u''(0) ≈ 6 (u₁ - u₀)/h². The last node uses one-sided
/// differences so that constants map to zero exactly; fields themselves
/// are zero-extended beyond r_max by contract.
pub fn apply_radial_laplacian(f: &RadialField) -> RadialField {
    let u = f.values();
    let n = u.len();
    let r = f.grid.nodes();
    let mut out = vec![0.0; n];
    match f.grid.kind() {
        GridKind::Uniform => {
            let h = f.grid.spacing();
            let h2 = h * h;
            out[0] = 6.0 * (u[1] - u[0]) / h2;
            for j in 1..n - 1 {
                let upp = (u[j - 1] - 2.0 * u[j] + u[j + 1]) / h2;
                let up = (u[j + 1] - u[j - 1]) / (2.0 * h);
                out[j] = upp + 2.0 / r[j] * up;
            }
            let upp = (2.0 * u[n - 1] - 5.0 * u[n - 2] + 4.0 * u[n - 3] - u[n - 4]) / h2;
            let up = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h);
            out[n - 1] = upp + 2.0 / r[n - 1] * up;
        }
        GridKind::Graded => {
            out[0] = 6.0 * (u[1] - u[0]) / (r[1] * r[1]);
            for j in 1..n - 1 {
                let hl = r[j] - r[j - 1];
                let hr = r[j + 1] - r[j];
                // difference form: exactly zero on constants
                let upp = 2.0 * (hl * (u[j + 1] - u[j]) - hr * (u[j] - u[j - 1]))
                    / (hl * hr * (hl + hr));
                let up = (hl * hl * (u[j + 1] - u[j]) + hr * hr * (u[j] - u[j - 1]))
                    / (hl * hr * (hl + hr));
                out[j] = upp + 2.0 / r[j] * up;
            }
            // quadratic through the last three nodes
            let hl = r[n - 2] - r[n - 3];
            let hr = r[n - 1] - r[n - 2];
            let upp = 2.0 * ((u[n - 1] - u[n - 2]) / hr - (u[n - 2] - u[n - 3]) / hl) / (hl + hr);
            let up = ((u[n - 1] - u[n - 2]) * (hl + 2.0 * hr) / hr
                - (u[n - 2] - u[n - 3]) * hr / hl)
                / (hl + hr);
            out[n - 1] = upp + 2.0 / r[n - 1] * up;
        }
    }
    RadialField { grid: f.grid.clone(), values: out }
}

/// Fourth-order discrete radial Laplacian on uniform grids.
///
/// Used by the residual and solver paths, where the second-order
/// truncation error of `apply_radial_laplacian` would dominate the
/// 1e-6 identity budgets. Falls back to second order on graded grids.
pub fn apply_radial_laplacian_o4(f: &RadialField) -> RadialField {
    if f.grid.kind() != GridKind::Uniform {
        return apply_radial_laplacian(f);
    }
    let u = f.values();
    let n = u.len();
    let r = f.grid.nodes();
    let h = f.grid.spacing();
    let h2 = h * h;
    let mut out = vec![0.0; n];

    // r = 0: Δu(0) = 3u''(0), fourth order via the even extension.
    out[0] = (16.0 * u[1] - u[2] - 15.0 * u[0]) / (2.0 * h2);
    // j = 1 uses the even ghost u[-1] = u[1].
    {
        let upp = (16.0 * u[0] - 31.0 * u[1] + 16.0 * u[2] - u[3]) / (12.0 * h2);
        let up = (u[1] - 8.0 * u[0] + 8.0 * u[2] - u[3]) / (12.0 * h);
        out[1] = upp + 2.0 / r[1] * up;
    }
    for j in 2..n - 2 {
        let upp = (-u[j - 2] + 16.0 * u[j - 1] - 30.0 * u[j] + 16.0 * u[j + 1] - u[j + 2])
            / (12.0 * h2);
        let up = (u[j - 2] - 8.0 * u[j - 1] + 8.0 * u[j + 1] - u[j + 2]) / (12.0 * h);
        out[j] = upp + 2.0 / r[j] * up;
    }
    {
        let j = n - 2;
        let upp = (10.0 * u[j + 1] - 15.0 * u[j] - 4.0 * u[j - 1] + 14.0 * u[j - 2]
            - 6.0 * u[j - 3]
            + u[j - 4])
            / (12.0 * h2);
        let up = (3.0 * u[j + 1] + 10.0 * u[j] - 18.0 * u[j - 1] + 6.0 * u[j - 2] - u[j - 3])
            / (12.0 * h);
        out[j] = upp + 2.0 / r[j] * up;
    }
    {
        let j = n - 1;
        let upp = (45.0 * u[j] - 154.0 * u[j - 1] + 214.0 * u[j - 2] - 156.0 * u[j - 3]
            + 61.0 * u[j - 4]
            - 10.0 * u[j - 5])
            / (12.0 * h2);
        let up = (25.0 * u[j] - 48.0 * u[j - 1] + 36.0 * u[j - 2] - 16.0 * u[j - 3]
            + 3.0 * u[j - 4])
            / (12.0 * h);
        out[j] = upp + 2.0 / r[j] * up;
    }
    RadialField { grid: f.grid.clone(), values: out }
}

/// Mass-preserving dilation (s ★ u)(r) = s^{3/2} ũ(s r), where ũ is the
/// monotone cubic interpolant of the samples, zero beyond r_max.
pub fn dilate(f: &RadialField, s: f64) -> Result<RadialField> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::InvalidParameter(format!("dilation scale must be > 0, got {s}")));
    }
    if s == 1.0 {
        return Ok(f.clone());
    }
    let interp = Pchip::new(f.grid.nodes(), f.values());
    let amp = s.powf(1.5);
    let r_max = f.grid.r_max();
    let values = f
        .grid
        .nodes()
        .iter()
        .map(|&r| {
            let x = s * r;
            if x > r_max {
                0.0
            } else {
                amp * interp.eval(x)
            }
        })
        .collect();
    Ok(RadialField { grid: f.grid.clone(), values })
}

/// Resample a field onto another grid through the monotone cubic
/// interpolant (zero beyond the source r_max).
pub fn resample(f: &RadialField, grid: &Arc<RadialGrid>) -> RadialField {
    let interp = Pchip::new(f.grid.nodes(), f.values());
    let r_max = f.grid.r_max();
    let values = grid
        .nodes()
        .iter()
        .map(|&r| if r > r_max { 0.0 } else { interp.eval(r) })
        .collect();
    RadialField { grid: grid.clone(), values }
}

/// Monotone cubic (Fritsch–Carlson) interpolant. Preserves positivity of
/// positive samples, which keeps dilations of ground states sign-clean.
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    pub fn new(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        assert!(n >= 3, "pchip needs at least 3 points");
        let mut h = vec![0.0; n - 1];
        let mut delta = vec![0.0; n - 1];
        for j in 0..n - 1 {
            h[j] = x[j + 1] - x[j];
            delta[j] = (y[j + 1] - y[j]) / h[j];
        }
        let mut d = vec![0.0; n];
        for j in 1..n - 1 {
            if delta[j - 1] * delta[j] <= 0.0 {
                d[j] = 0.0;
            } else {
                let w1 = 2.0 * h[j] + h[j - 1];
                let w2 = h[j] + 2.0 * h[j - 1];
                d[j] = (w1 + w2) / (w1 / delta[j - 1] + w2 / delta[j]);
            }
        }
        d[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
        d[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        Pchip { x: x.to_vec(), y: y.to_vec(), d }
    }

    /// Evaluate at a point inside [x₀, x_{n-1}]; exact at the nodes.
    pub fn eval(&self, xq: f64) -> f64 {
        let n = self.x.len();
        if xq <= self.x[0] {
            return self.y[0];
        }
        if xq >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let mut lo = 0usize;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.x[mid] <= xq {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let h = self.x[lo + 1] - self.x[lo];
        let t = (xq - self.x[lo]) / h;
        if t == 0.0 {
            return self.y[lo];
        }
        let (y0, y1) = (self.y[lo], self.y[lo + 1]);
        let (d0, d1) = (self.d[lo], self.d[lo + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + h * d0 * (t3 - 2.0 * t2 + t)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + h * d1 * (t3 - t2)
    }
}

/// Shape-preserving one-sided slope estimate for the interval ends.
fn edge_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let mut s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s * d0 <= 0.0 {
        s = 0.0;
    } else if d0 * d1 < 0.0 && s.abs() > 3.0 * d0.abs() {
        s = 3.0 * d0;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    /// Adaptive Simpson quadrature, used as an independent 1-D oracle.
    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
            let m = 0.5 * (a + b);
            let fm = f(m);
            ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
        }
        fn recurse(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            fa: f64,
            b: f64,
            fb: f64,
            whole: f64,
            m: f64,
            fm: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let (left, lm, flm) = simpson(f, a, fa, m, fm);
            let (right, rm, frm) = simpson(f, m, fm, b, fb);
            let delta = left + right - whole;
            if depth == 0 || delta.abs() <= 15.0 * tol {
                left + right + delta / 15.0
            } else {
                recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
                    + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
            }
        }
        let fa = f(a);
        let fb = f(b);
        let (whole, m, fm) = simpson(f, a, fa, b, fb);
        recurse(f, a, fa, b, fb, whole, m, fm, tol, 40)
    }

    #[test]
    fn weight_sum_is_ball_volume() {
        let g = make_grid(16, 1.0, GridKind::Uniform).unwrap();
        let total: f64 = g.weights().iter().sum();
        assert!(rel_err(total, 4.0 * PI / 3.0) < 1e-12, "sum = {total}");

        let g = make_grid(317, 7.5, GridKind::Graded).unwrap();
        let total: f64 = g.weights().iter().sum();
        let exact = 4.0 * PI * 7.5f64.powi(3) / 3.0;
        assert!(rel_err(total, exact) < 1e-12, "graded sum = {total}");
    }

    #[test]
    fn uniform_spacing_matches_definition() {
        let g = make_grid(2048, 30.0, GridKind::Uniform).unwrap();
        let h = g.nodes()[1] - g.nodes()[0];
        assert!((h - 30.0 / 2047.0).abs() < 1e-15);
        assert_eq!(g.len(), 2048);
        assert_eq!(g.nodes()[0], 0.0);
        assert!((g.nodes()[2047] - 30.0).abs() < 1e-12);
    }

    #[test]
    fn small_grid_rejected() {
        assert!(matches!(
            make_grid(8, 1.0, GridKind::Uniform),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            make_grid(64, -1.0, GridKind::Uniform),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn weights_nonnegative_nodes_increasing() {
        for kind in [GridKind::Uniform, GridKind::Graded] {
            let g = make_grid(129, 12.0, kind).unwrap();
            assert!(g.weights().iter().all(|&w| w >= 0.0));
            assert!(g.nodes().windows(2).all(|p| p[1] > p[0]));
            // nonnegative integrands integrate to nonnegative values and
            // the gradient form is a sum of squares
            let f = RadialField::from_fn(g.clone(), |r| (1.5 - r).abs() * (-r).exp());
            assert!(integrate(&f) >= 0.0);
            assert!(grad_norm_sq(&f) >= 0.0);
        }
    }

    #[test]
    fn graded_grid_clusters_near_origin() {
        let g = make_grid(64, 10.0, GridKind::Graded).unwrap();
        let first = g.nodes()[1] - g.nodes()[0];
        let last = g.nodes()[63] - g.nodes()[62];
        assert!(first < last / 10.0, "first {first}, last {last}");
    }

    #[test]
    fn integrate_constant_and_zero() {
        let g = make_grid(512, 2.0, GridKind::Uniform).unwrap();
        let one = RadialField::from_fn(g.clone(), |_| 1.0);
        assert!(rel_err(integrate(&one), 4.0 * PI * 8.0 / 3.0) < 1e-10);
        let zero = RadialField::zeros(g);
        assert_eq!(integrate(&zero), 0.0);
    }

    #[test]
    fn integrate_gaussian_matches_oracle() {
        let g = make_grid(4096, 12.0, GridKind::Uniform).unwrap();
        let f = RadialField::from_fn(g, |r| (-r * r).exp());
        let got = integrate(&f);
        let oracle =
            adaptive_simpson(&|r: f64| 4.0 * PI * r * r * (-r * r).exp(), 0.0, 12.0, 1e-13);
        let exact = PI.powf(1.5);
        assert!((got - oracle).abs() < 1e-8, "impl {got} vs oracle {oracle}");
        assert!((got - exact).abs() < 1e-8, "impl {got} vs closed form {exact}");
    }

    #[test]
    fn grad_norm_sq_constant_is_zero() {
        let g = make_grid(256, 5.0, GridKind::Uniform).unwrap();
        let f = RadialField::from_fn(g, |_| 3.25);
        assert!(grad_norm_sq(&f).abs() < 1e-12);
    }

    #[test]
    fn grad_norm_sq_gaussian() {
        // u = e^{-r²/2}: ∫ |∇u|² dx = 4π ∫ r² e^{-r²} r² dr = (3/2) π^{3/2}
        let g = make_grid(4096, 12.0, GridKind::Uniform).unwrap();
        let f = RadialField::from_fn(g, |r| (-0.5 * r * r).exp());
        let got = grad_norm_sq(&f);
        let exact = 1.5 * PI.powf(1.5);
        assert!((got - exact).abs() < 1e-6, "got {got}, exact {exact}");
    }

    #[test]
    fn grad_norm_sq_quadratic_scaling() {
        let g = make_grid(300, 9.0, GridKind::Uniform).unwrap();
        let f = RadialField::from_fn(g, |r| (-0.3 * r * r).exp() * (1.0 + r));
        let doubled = f.scale(2.0);
        assert_eq!(grad_norm_sq(&doubled), 4.0 * grad_norm_sq(&f));
    }

    #[test]
    fn laplacian_of_constant_vanishes() {
        for kind in [GridKind::Uniform, GridKind::Graded] {
            let g = make_grid(200, 8.0, kind).unwrap();
            let f = RadialField::from_fn(g, |_| -2.5);
            let lap = apply_radial_laplacian(&f);
            let sup = lap.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(sup < 1e-10, "{kind} sup {sup}");
        }
    }

    #[test]
    fn laplacian_gaussian_pointwise() {
        // Δ e^{-r²/2} = (r² - 3) e^{-r²/2}
        let g = make_grid(4096, 12.0, GridKind::Uniform).unwrap();
        let f = RadialField::from_fn(g.clone(), |r| (-0.5 * r * r).exp());
        let lap = apply_radial_laplacian(&f);
        let mut sup = 0.0f64;
        for (j, &r) in g.nodes().iter().enumerate() {
            if r > 0.8 * g.r_max() {
                continue;
            }
            let exact = (r * r - 3.0) * (-0.5 * r * r).exp();
            sup = sup.max((lap.values()[j] - exact).abs());
        }
        assert!(sup < 1e-4, "sup error {sup}");
    }

    #[test]
    fn laplacian_o4_gaussian_pointwise() {
        let g = make_grid(4096, 12.0, GridKind::Uniform).unwrap();
        let f = RadialField::from_fn(g.clone(), |r| (-0.5 * r * r).exp());
        let lap = apply_radial_laplacian_o4(&f);
        let mut sup = 0.0f64;
        for (j, &r) in g.nodes().iter().enumerate() {
            if r > 0.8 * g.r_max() {
                continue;
            }
            let exact = (r * r - 3.0) * (-0.5 * r * r).exp();
            sup = sup.max((lap.values()[j] - exact).abs());
        }
        assert!(sup < 1e-9, "sup error {sup}");
    }

    #[test]
    fn laplacian_green_identity() {
        // Annular C^∞ bumps: supp f ⊂ [2, 6], supp g ⊂ [3, 8].
        fn bump(r: f64, a: f64, b: f64) -> f64 {
            if r <= a || r >= b {
                0.0
            } else {
                let t = (2.0 * r - a - b) / (b - a); // in (-1, 1)
                (-1.0 / (1.0 - t * t)).exp()
            }
        }
        let g = make_grid(4096, 12.0, GridKind::Uniform).unwrap();
        let f1 = RadialField::from_fn(g.clone(), |r| bump(r, 2.0, 6.0));
        let f2 = RadialField::from_fn(g, |r| bump(r, 3.0, 8.0));
        let lhs = integrate_product(&f1, |j| apply_radial_laplacian(&f2).values()[j]);
        let rhs = integrate_product(&f2, |j| apply_radial_laplacian(&f1).values()[j]);
        assert!((lhs - rhs).abs() < 1e-8, "lhs {lhs} rhs {rhs}");
    }

    #[test]
    fn dilate_identity_and_errors() {
        let g = make_grid(512, 10.0, GridKind::Uniform).unwrap();
        let f = RadialField::from_fn(g, |r| (-0.5 * r * r).exp());
        let same = dilate(&f, 1.0).unwrap();
        assert_eq!(same.values(), f.values());
        assert!(matches!(dilate(&f, 0.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(dilate(&f, -2.0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn dilate_mass_invariance() {
        let g = make_grid(4096, 30.0, GridKind::Uniform).unwrap();
        let f = RadialField::from_fn(g, |r| (-0.5 * r * r).exp());
        let mass = integrate(&f.map(|v| v * v));
        for s in [0.25, 0.5, 2.0, 4.0] {
            let fs = dilate(&f, s).unwrap();
            let ms = integrate(&fs.map(|v| v * v));
            assert!(rel_err(ms, mass) < 1e-6, "s = {s}: {ms} vs {mass}");
        }
    }

    #[test]
    fn dilate_gradient_scaling() {
        let g = make_grid(4096, 30.0, GridKind::Uniform).unwrap();
        let f = RadialField::from_fn(g, |r| (-0.5 * r * r).exp());
        let base = grad_norm_sq(&f);
        for s in [0.25, 0.5, 2.0, 4.0] {
            let fs = dilate(&f, s).unwrap();
            assert!(
                rel_err(grad_norm_sq(&fs), s * s * base) < 1e-5,
                "s = {s}"
            );
        }
    }

    #[test]
    fn dilate_lp_scaling() {
        // ∫ |s★u|^p = s^{3(p-2)/2} ∫ |u|^p
        let g = make_grid(4096, 30.0, GridKind::Uniform).unwrap();
        let f = RadialField::from_fn(g, |r| (-0.5 * r * r).exp());
        for p in [10.0 / 3.0, 4.0, 5.0, 6.0] {
            let base = integrate(&f.map(|v| v.abs().powf(p)));
            for s in [0.5, 2.0] {
                let fs = dilate(&f, s).unwrap();
                let got = integrate(&fs.map(|v| v.abs().powf(p)));
                let expect = s.powf(1.5 * (p - 2.0)) * base;
                assert!(rel_err(got, expect) < 1e-5, "p = {p}, s = {s}");
            }
        }
    }

    #[test]
    fn dilate_group_law() {
        // dilate(dilate(f, s), t) ≈ dilate(f, st) within twice the
        // single-step interpolation tolerance, measured against the
        // closed-form dilation of the Gaussian.
        let g = make_grid(4096, 30.0, GridKind::Uniform).unwrap();
        let f = RadialField::from_fn(g.clone(), |r| (-0.5 * r * r).exp());
        let exact = |scale: f64| {
            RadialField::from_fn(g.clone(), move |r| {
                scale.powf(1.5) * (-0.5 * (scale * r).powi(2)).exp()
            })
        };
        let sup = |a: &RadialField, b: &RadialField| {
            a.values()
                .iter()
                .zip(b.values())
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        };
        for (s, t) in [(0.5, 1.6), (2.0, 1.25), (0.8, 0.7)] {
            let composed = dilate(&dilate(&f, s).unwrap(), t).unwrap();
            let direct = dilate(&f, s * t).unwrap();
            // per-step interpolation tolerance for these scales
            let e_first = t.powf(1.5) * sup(&dilate(&f, s).unwrap(), &exact(s));
            let e_mid = sup(&dilate(&exact(s), t).unwrap(), &exact(s * t));
            let e_last = sup(&direct, &exact(s * t));
            let tol = 2.0 * (e_first + e_mid + e_last);
            let diff = sup(&composed, &direct);
            assert!(diff <= tol, "(s, t) = ({s}, {t}): sup diff {diff} > {tol}");
        }
    }

    #[test]
    fn pchip_respects_monotone_data() {
        let x: Vec<f64> = (0..50).map(|i| i as f64 * 0.2).collect();
        let y: Vec<f64> = x.iter().map(|&r| (-r).exp()).collect();
        let p = Pchip::new(&x, &y);
        let mut prev = f64::INFINITY;
        for i in 0..490 {
            let v = p.eval(i as f64 * 0.02);
            assert!(v <= prev + 1e-14, "not monotone at {i}");
            assert!(v >= 0.0);
            prev = v;
        }
    }

    #[test]
    fn field_csv_round_trip_header() {
        let g = make_grid(16, 1.0, GridKind::Uniform).unwrap();
        let f = RadialField::from_fn(g, |r| r);
        let csv = f.to_csv();
        assert!(csv.starts_with("r,value\n"));
        assert_eq!(csv.lines().count(), 17);
    }
}
