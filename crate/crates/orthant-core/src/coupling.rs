//! Coupling monotonicity, connection correlations, and survival statistics.

use crate::closure::{closure, ClosureError};
use crate::cluster::{backward_cluster, biconnected_cluster, forward_cluster};
use crate::env::{realize_two_valued, TwoValuedModel};
use crate::field::{derive_seed, UniformField};
use crate::geom::{Region, Site};
use rayon::prelude::*;

/// Outcome of comparing closures at two coupled parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingReport {
    /// Complement of the closure at `p1` contained in the complement at `p2`,
    /// within the interior margin.
    pub inclusion_holds: bool,
    /// The two closures differ somewhere in the interior.
    pub strict: bool,
}

/// Check that raising `p` shrinks the closure, under the shared field.
///
/// Requires `p1 <= p2`; both closures are computed from the forward cluster
/// of the origin on the same window and compared inside the margin.
pub fn monotone_coupling_check(
    field: &UniformField,
    p1: f64,
    p2: f64,
    region: Region,
    margin: i64,
) -> Result<CouplingReport, ClosureError> {
    assert!(p1 <= p2, "expected p1 <= p2");
    let interior = region
        .shrink(margin)
        .ok_or(ClosureError::MarginTooLarge { margin })?;
    let lo = realize_two_valued(field, &TwoValuedModel::orthant(p1).unwrap(), region);
    let hi = realize_two_valued(field, &TwoValuedModel::orthant(p2).unwrap(), region);
    let cl_lo = closure(&forward_cluster(&lo, Site::ORIGIN).unwrap(), margin)?;
    let cl_hi = closure(&forward_cluster(&hi, Site::ORIGIN).unwrap(), margin)?;
    let mut inclusion_holds = true;
    let mut strict = false;
    for s in interior.sites() {
        let in_lo = cl_lo.closure.contains(s);
        let in_hi = cl_hi.closure.contains(s);
        if !in_lo && in_hi {
            inclusion_holds = false;
        }
        if in_lo != in_hi {
            strict = true;
        }
    }
    Ok(CouplingReport {
        inclusion_holds,
        strict,
    })
}

/// Monte Carlo estimate of the positive correlation of `{y in C_o}` and
/// `{y in C_x}`.
#[derive(Clone, Copy, Debug)]
pub struct CorrelationReport {
    /// Estimate of `P(y in C_o, y in C_x)`.
    pub lhs: f64,
    /// Estimate of `P(y in C_o) * P(y in C_x)`.
    pub rhs: f64,
    pub difference: f64,
    pub standard_error: f64,
    pub replicas_used: usize,
    /// Replicas where the window could not certify a negative membership:
    /// `y` unreached while its backward cluster touches the border, so a
    /// path through the outside could still connect. Counted as a
    /// diagnostic; the estimates keep every replica, because the
    /// window-restricted connection events satisfy the same inequality
    /// (the conditioning argument goes through verbatim on a finite box)
    /// and dropping replicas would bias the comparison.
    pub ambiguous: usize,
}

/// Estimate both sides of the correlation inequality on independent windows.
///
/// The window contains `o`, `x`, and `y` with a buffer of four times the
/// coordinate spread; membership is within-window reachability.
pub fn correlation_check(
    model: &TwoValuedModel,
    x: Site,
    y: Site,
    replicas: usize,
    seed: u64,
) -> CorrelationReport {
    let pts = [Site::ORIGIN, x, y];
    let xs = pts.iter().map(|s| s.x);
    let ys = pts.iter().map(|s| s.y);
    let spread = (xs.clone().max().unwrap() - xs.clone().min().unwrap())
        .max(ys.clone().max().unwrap() - ys.clone().min().unwrap())
        .max(2);
    let buffer = 4 * spread;
    let region = Region::new(
        xs.clone().min().unwrap() - buffer,
        xs.max().unwrap() + buffer,
        ys.clone().min().unwrap() - buffer,
        ys.max().unwrap() + buffer,
    );
    let outcomes: Vec<(bool, bool, bool)> = (0..replicas)
        .into_par_iter()
        .map(|i| {
            let field = UniformField::new(derive_seed(seed, i as u64));
            let env = realize_two_valued(&field, model, region);
            let in_co = forward_cluster(&env, Site::ORIGIN).unwrap().members.contains(y);
            let in_cx = forward_cluster(&env, x).unwrap().members.contains(y);
            let ambiguous = if in_co && in_cx {
                false
            } else {
                backward_cluster(&env, y).unwrap().truncated
            };
            (in_co, in_cx, ambiguous)
        })
        .collect();
    let ambiguous = outcomes.iter().filter(|o| o.2).count();
    let used: Vec<(bool, bool)> = outcomes.into_iter().map(|(a, b, _)| (a, b)).collect();
    let n = used.len().max(1) as f64;
    let m_ab = used.iter().filter(|(a, b)| *a && *b).count() as f64 / n;
    let m_a = used.iter().filter(|(a, _)| *a).count() as f64 / n;
    let m_b = used.iter().filter(|(_, b)| *b).count() as f64 / n;
    // Influence-function variance of m_ab - m_a * m_b.
    let mut var = 0.0;
    for (a, b) in &used {
        let (a, b) = (*a as u8 as f64, *b as u8 as f64);
        let u = (a * b - m_ab) - m_b * (a - m_a) - m_a * (b - m_b);
        var += u * u;
    }
    let standard_error = (var / (n * (n - 1.0).max(1.0))).sqrt();
    CorrelationReport {
        lhs: m_ab,
        rhs: m_a * m_b,
        difference: m_ab - m_a * m_b,
        standard_error,
        replicas_used: used.len(),
        ambiguous,
    }
}

/// Fractions of replicas whose clusters reach the window border, the finite
/// surrogates for the three survival probabilities.
#[derive(Clone, Copy, Debug)]
pub struct SurvivalStats {
    pub theta_plus: f64,
    pub theta_minus: f64,
    pub theta: f64,
    pub se_plus: f64,
    pub se_minus: f64,
    pub se_theta: f64,
    pub replicas: usize,
}

pub fn survival_stats(
    model: &TwoValuedModel,
    window_size: u32,
    replicas: usize,
    seed: u64,
) -> SurvivalStats {
    let region = Region::centered_square(window_size);
    let counts: Vec<(bool, bool, bool)> = (0..replicas)
        .into_par_iter()
        .map(|i| {
            let field = UniformField::new(derive_seed(seed, i as u64));
            let env = realize_two_valued(&field, model, region);
            let fwd = forward_cluster(&env, Site::ORIGIN).unwrap();
            let bwd = backward_cluster(&env, Site::ORIGIN).unwrap();
            let bi = biconnected_cluster(&env, Site::ORIGIN).unwrap();
            (fwd.truncated, bwd.truncated, bi.truncated)
        })
        .collect();
    let n = replicas.max(1) as f64;
    let frac = |f: &dyn Fn(&(bool, bool, bool)) -> bool| {
        counts.iter().filter(|c| f(c)).count() as f64 / n
    };
    let se = |q: f64| (q * (1.0 - q) / n).sqrt();
    let tp = frac(&|c| c.0);
    let tm = frac(&|c| c.1);
    let t = frac(&|c| c.2);
    SurvivalStats {
        theta_plus: tp,
        theta_minus: tm,
        theta: t,
        se_plus: se(tp),
        se_minus: se(tm),
        se_theta: se(t),
        replicas,
    }
}
