//! Closed-form existence conditions and auxiliary inequalities.
//!
//! Everything here is exact arithmetic on the problem data (β, ρ, p):
//! the subset-maximized existence condition for ground states, its
//! uniform-data specialization, the m-level variant with Θ_m, the lower
//! bound for the partly-trivial levels, the power-mean inequalities
//! behind it, and the genus of a product of spheres.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::SystemParams;

/// Subset enumeration cap: 2^20 subsets is the sensible desk-scale limit.
pub const MAX_K_FOR_ENUMERATION: usize = 20;

/// Outcome of evaluating a strict inequality lhs < rhs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionReport {
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    /// Index set attaining the subset maximum (empty when no subsets are
    /// involved).
    pub witness_subset: Vec<usize>,
    /// rhs − lhs.
    pub margin: f64,
    /// Set when the stated hypotheses of the theorem behind the
    /// inequality are violated (evaluation still proceeds).
    pub hypothesis_note: Option<String>,
}

impl ConditionReport {
    fn new(lhs: f64, rhs: f64, witness: Vec<usize>, note: Option<String>) -> Self {
        ConditionReport {
            lhs,
            rhs,
            satisfied: lhs < rhs,
            witness_subset: witness,
            margin: rhs - lhs,
            hypothesis_note: note,
        }
    }
}

/// Kahan-compensated sum.
fn ksum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// The subset term
/// max_{i∈I} β_ii ρ_i^{(6−p)/2} + ((|I|−1)/|I|^{(3p−10)/4}) max_{i≠j∈I} β_ij (ρ_i ρ_j)^{(6−p)/4}.
fn subset_lhs(params: &SystemParams, subset: &[usize]) -> f64 {
    let p = params.p();
    let diag = subset
        .iter()
        .map(|&i| params.beta(i, i) * params.rho()[i].powf(0.5 * (6.0 - p)))
        .fold(f64::NEG_INFINITY, f64::max);
    let card = subset.len() as f64;
    if subset.len() < 2 {
        return diag;
    }
    let mut off = f64::NEG_INFINITY;
    for (a, &i) in subset.iter().enumerate() {
        for &j in subset.iter().skip(a + 1) {
            let v = params.beta(i, j)
                * (params.rho()[i] * params.rho()[j]).powf(0.25 * (6.0 - p));
            off = off.max(v);
        }
    }
    diag + (card - 1.0) / card.powf(0.25 * (3.0 * p - 10.0)) * off
}

/// Maximize the subset term over all I with 1 ≤ |I| ≤ K−1.
fn max_over_subsets(params: &SystemParams) -> Result<(f64, Vec<usize>)> {
    let k = params.k();
    if k > MAX_K_FOR_ENUMERATION {
        return Err(Error::TooLargeK { k, max: MAX_K_FOR_ENUMERATION });
    }
    if k < 2 {
        return Err(Error::InvalidParameter(
            "subset conditions need K >= 2".into(),
        ));
    }
    let mut best = f64::NEG_INFINITY;
    let mut witness = Vec::new();
    for mask in 1u32..((1u32 << k) - 1) {
        let subset: Vec<usize> = (0..k).filter(|&i| mask & (1 << i) != 0).collect();
        let v = subset_lhs(params, &subset);
        if v > best {
            best = v;
            witness = subset;
        }
    }
    Ok((best, witness))
}

/// Global right-hand side Σ β_ij (ρ_i ρ_j)^{p/2} / (Σ ρ_i²)^{3(p−2)/4}.
fn coupling_rhs(params: &SystemParams) -> f64 {
    let k = params.k();
    let p = params.p();
    let num = ksum((0..k).flat_map(|i| {
        (0..k).map(move |j| {
            params.beta(i, j) * (params.rho()[i] * params.rho()[j]).powf(0.5 * p)
        })
    }));
    let den = ksum(params.rho().iter().map(|r| r * r)).powf(0.75 * (p - 2.0));
    num / den
}

fn hypothesis_note(params: &SystemParams, require_positive_beta: bool) -> Option<String> {
    let p = params.p();
    let mut notes = Vec::new();
    if !(4.0..=14.0 / 3.0).contains(&p) {
        notes.push(format!("p = {p} outside the theorem range [4, 14/3]"));
    }
    if require_positive_beta {
        let k = params.k();
        if (0..k).any(|i| (0..k).any(|j| params.beta(i, j) <= 0.0)) {
            notes.push("some coupling beta_ij is not positive".into());
        }
    }
    if notes.is_empty() {
        None
    } else {
        Some(notes.join("; "))
    }
}

/// Existence condition for a ground state: the subset maximum is
/// dominated by the global coupling term. Enumerates all 2^K − 2 proper
/// nonempty subsets and reports the maximizing witness.
pub fn check_betacond(params: &SystemParams) -> Result<ConditionReport> {
    let (lhs, witness) = max_over_subsets(params)?;
    let rhs = coupling_rhs(params);
    Ok(ConditionReport::new(lhs, rhs, witness, hypothesis_note(params, true)))
}

/// Uniform-data specialization: ρ_i = ρ, β_ij = β off the diagonal.
/// Returns the rewritten inequality together with the K-only sufficient
/// inequality (K−2) K^{(3p−10)/4} < (K−1)^{(3p−6)/4}.
pub fn check_uniform_special(
    k: usize,
    p: f64,
    beta_diag: &[f64],
    beta_off: f64,
) -> Result<(ConditionReport, ConditionReport)> {
    if !(4.0..=14.0 / 3.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "uniform special case requires 4 <= p <= 14/3, got {p}"
        )));
    }
    if beta_diag.len() != k || k < 2 {
        return Err(Error::ShapeMismatch(format!(
            "need K >= 2 diagonal entries, got {} for K = {k}",
            beta_diag.len()
        )));
    }
    if !(beta_off > 0.0) {
        return Err(Error::InvalidParameter("off-diagonal beta must be > 0".into()));
    }
    // lhs: max over subset sizes t = 1..K-1 of
    //   (1/β) max β_ii + (t−1)/t^{(3p−10)/4}
    let max_diag = beta_diag.iter().fold(f64::NEG_INFINITY, |m, &b| m.max(b));
    let mut lhs = f64::NEG_INFINITY;
    let mut witness_card = 1usize;
    for t in 1..k {
        let tf = t as f64;
        let v = max_diag / beta_off + (tf - 1.0) / tf.powf(0.25 * (3.0 * p - 10.0));
        if v > lhs {
            lhs = v;
            witness_card = t;
        }
    }
    let kf = k as f64;
    let rhs = (ksum(beta_diag.iter().copied()) / beta_off + kf * (kf - 1.0))
        / kf.powf(0.75 * (p - 2.0));
    let ineq = ConditionReport::new(lhs, rhs, (0..witness_card).collect(), None);

    let suff_lhs = (kf - 2.0) * kf.powf(0.25 * (3.0 * p - 10.0));
    let suff_rhs = (kf - 1.0).powf(0.25 * (3.0 * p - 6.0));
    let sufficient = ConditionReport::new(suff_lhs, suff_rhs, Vec::new(), None);
    Ok((ineq, sufficient))
}

/// m-level condition: lhs is the subset maximum scaled by the inverse
/// global term, rhs is Θ_m^{−(3p−10)/4} C_p^{−p}. For m = 1 with
/// Θ₁ = C_p^{−4p/(3p−10)} the rhs collapses to 1 and the condition is
/// equivalent to `check_betacond`.
pub fn check_c0_condition(
    params: &SystemParams,
    m: usize,
    theta_m: f64,
    c_p: f64,
) -> Result<ConditionReport> {
    if !(theta_m > 0.0) || !(c_p > 0.0) {
        return Err(Error::InvalidParameter(
            "theta_m and C_p must be positive".into(),
        ));
    }
    let p = params.p();
    let (subset_max, witness) = max_over_subsets(params)?;
    let lhs = subset_max / coupling_rhs(params);
    let rhs = theta_m.powf(-0.25 * (3.0 * p - 10.0)) * c_p.powf(-p);
    let mut note = hypothesis_note(params, true);
    if m > 1 {
        let extra = format!("theta_{m} is caller-supplied; only theta_1 has a closed form");
        note = Some(match note {
            Some(n) => format!("{n}; {extra}"),
            None => extra,
        });
    }
    Ok(ConditionReport::new(lhs, rhs, witness, note))
}

/// Lower bound for the partly-trivial level inf J over the states
/// supported on the index set I (nontrivial proper subset):
/// ((3p−10)/(6(p−2))) · [ (3(p−2)/2p) C_p^p · subset term ]^{−4/(3p−10)}.
pub fn ground_lower_bound(params: &SystemParams, subset: &[usize], c_p: f64) -> Result<f64> {
    let k = params.k();
    let p = params.p();
    if subset.is_empty() || subset.len() >= k {
        return Err(Error::InvalidParameter(format!(
            "index set must satisfy 1 <= |I| <= K-1, got |I| = {}",
            subset.len()
        )));
    }
    if subset.iter().any(|&i| i >= k) {
        return Err(Error::InvalidParameter("index out of range".into()));
    }
    if p > 14.0 / 3.0 {
        return Err(Error::InvalidParameter(format!(
            "lower bound requires p <= 14/3, got {p}"
        )));
    }
    if !(c_p > 0.0) {
        return Err(Error::InvalidParameter("C_p must be positive".into()));
    }
    let term = subset_lhs(params, subset);
    let inner = 1.5 * (p - 2.0) / p * c_p.powf(p) * term;
    Ok((3.0 * p - 10.0) / (6.0 * (p - 2.0)) * inner.powf(-4.0 / (3.0 * p - 10.0)))
}

/// Both power-mean inequalities on a positive vector:
/// (Σ a_i^α)^{1/α} ≤ (Σ a_i²)^{1/2} for α ≥ 2, and
/// ((1/(m(m−1))) Σ_{i≠j} a_i a_j)^{1/2} ≤ ((1/m) Σ a_i^q)^{1/q} for q ≥ 1.
/// Returns whether both hold (they always do; a tiny relative slack
/// absorbs rounding at near-equality).
pub fn power_mean_checks(a: &[f64], alpha: f64, q: f64) -> Result<bool> {
    if a.len() < 2 {
        return Err(Error::InvalidParameter("need at least two entries".into()));
    }
    if a.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidParameter("entries must be positive".into()));
    }
    if !(alpha >= 2.0) || !(q >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need alpha >= 2 and q >= 1, got alpha = {alpha}, q = {q}"
        )));
    }
    let slack = 1.0 + 1e-12;
    let m = a.len() as f64;

    let lhs1 = ksum(a.iter().map(|v| v.powf(alpha))).powf(1.0 / alpha);
    let rhs1 = ksum(a.iter().map(|v| v * v)).sqrt();
    let first = lhs1 <= rhs1 * slack;

    let sum = ksum(a.iter().copied());
    let sum_sq = ksum(a.iter().map(|v| v * v));
    let off_pairs = sum * sum - sum_sq; // Σ_{i≠j} a_i a_j
    let lhs2 = (off_pairs / (m * (m - 1.0))).max(0.0).sqrt();
    let rhs2 = (ksum(a.iter().map(|v| v.powf(q))) / m).powf(1.0 / q);
    let second = lhs2 <= rhs2 * slack;

    Ok(first && second)
}

/// Genus of S^{m₁−1} × … × S^{m_k−1}: min(m₁, …, m_k).
pub fn genus_product_spheres(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::InvalidParameter("need at least one sphere factor".into()));
    }
    if dims.iter().any(|&d| d == 0) {
        return Err(Error::InvalidParameter("sphere dimensions must be >= 1".into()));
    }
    Ok(*dims.iter().min().unwrap())
}
