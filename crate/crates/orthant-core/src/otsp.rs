//! Oriented site percolation on the triangular lattice, dual to the orthant
//! model.
//!
//! Sites are open where the shared uniform field falls below `p`, which is
//! exactly the orthant model's NE set on the same field. Connectivity uses
//! the step set `{-e1, e2, e2 - e1}` through open sites, with the convention
//! that the whole connecting sequence, endpoints included, is open. All
//! three steps are monotone (abscissa never grows, ordinate never shrinks),
//! so cluster membership on a window is computed by single sweeps rather
//! than search, and membership is exact wherever the witness rectangle fits
//! inside the window.

use crate::closure::{
    classify_closure, closure, extract_blocking_function, BlockingKind, PhaseClass,
};
use crate::cluster::{backward_cluster, forward_cluster, ClusterKind};
use crate::env::{realize_two_valued, TwoValuedModel};
use crate::field::{derive_seed, UniformField};
use crate::geom::{Region, Site};
use crate::siteset::SiteSet;
use crate::stats::{bootstrap_mean_ci, least_squares, mean_se};
use rayon::prelude::*;
use thiserror::Error;

/// The oriented triangular step set.
pub const TRI_STEPS: [(i64, i64); 3] = [(-1, 0), (0, 1), (-1, 1)];

/// Open/closed site field on a window.
#[derive(Clone, Debug)]
pub struct TriEnvironment {
    region: Region,
    open: SiteSet,
    pub p: f64,
    pub seed: u64,
}

impl TriEnvironment {
    pub fn region(&self) -> Region {
        self.region
    }

    #[inline]
    pub fn is_open(&self, s: Site) -> bool {
        self.open.contains(s)
    }

    pub fn open_sites(&self) -> &SiteSet {
        &self.open
    }

    /// Explicit open set, for fixtures and oracles.
    pub fn from_open_sites(region: Region, sites: impl IntoIterator<Item = Site>) -> Self {
        let mut open = SiteSet::new(region);
        for s in sites {
            open.insert(s);
        }
        TriEnvironment {
            region,
            open,
            p: f64::NAN,
            seed: 0,
        }
    }
}

/// Realize the open set `U_x < p`; site-for-site equal to the orthant NE set
/// on the same field.
pub fn realize_otsp(field: &UniformField, p: f64, region: Region) -> TriEnvironment {
    let mut open = SiteSet::new(region);
    let mut idx = 0usize;
    for y in region.ymin..=region.ymax {
        for x in region.xmin..=region.xmax {
            if field.below(x, y, p) {
                open.insert_index(idx);
            }
            idx += 1;
        }
    }
    TriEnvironment {
        region,
        open,
        p,
        seed: field.seed(),
    }
}

/// A directed cluster on the triangular lattice.
#[derive(Clone, Debug)]
pub struct TriCluster {
    pub origin: Site,
    pub kind: ClusterKind,
    pub members: SiteSet,
    pub truncated: bool,
}

/// Forward cluster of `origin`: everything reachable through open sites.
/// A closed origin yields the empty cluster.
pub fn forward_tri_cluster(env: &TriEnvironment, origin: Site) -> TriCluster {
    let region = env.region;
    let mut members = SiteSet::new(region);
    let mut truncated = false;
    if region.contains(origin) && env.is_open(origin) {
        // reach(z) = open(z) and (z = origin or a predecessor reaches z);
        // predecessors are z + e1, z - e2, z + e1 - e2.
        for y in region.ymin..=region.ymax {
            for x in (region.xmin..=region.xmax).rev() {
                let s = Site::new(x, y);
                if !env.is_open(s) {
                    continue;
                }
                let hit = s == origin
                    || members.contains(Site::new(x + 1, y))
                    || (y > region.ymin
                        && (members.contains(Site::new(x, y - 1))
                            || members.contains(Site::new(x + 1, y - 1))));
                if hit {
                    members.insert(s);
                    if region.on_border(s) {
                        truncated = true;
                    }
                }
            }
        }
    }
    TriCluster {
        origin,
        kind: ClusterKind::Forward,
        members,
        truncated,
    }
}

/// Backward cluster of `target`: all open sites that reach it.
pub fn backward_tri_cluster(env: &TriEnvironment, target: Site) -> TriCluster {
    let region = env.region;
    let mut members = SiteSet::new(region);
    let mut truncated = false;
    if region.contains(target) && env.is_open(target) {
        for y in (region.ymin..=region.ymax).rev() {
            for x in region.xmin..=region.xmax {
                let s = Site::new(x, y);
                if !env.is_open(s) {
                    continue;
                }
                let hit = s == target
                    || members.contains(Site::new(x - 1, y))
                    || (y < region.ymax
                        && (members.contains(Site::new(x, y + 1))
                            || members.contains(Site::new(x - 1, y + 1))));
                if hit {
                    members.insert(s);
                    if region.on_border(s) {
                        truncated = true;
                    }
                }
            }
        }
    }
    TriCluster {
        origin: target,
        kind: ClusterKind::Backward,
        members,
        truncated,
    }
}

/// Open sites whose forward cluster reaches the window border.
pub fn forward_border_reach(env: &TriEnvironment) -> SiteSet {
    let region = env.region;
    let mut reach = SiteSet::new(region);
    for y in (region.ymin..=region.ymax).rev() {
        for x in region.xmin..=region.xmax {
            let s = Site::new(x, y);
            if !env.is_open(s) {
                continue;
            }
            let hit = region.on_border(s)
                || reach.contains(Site::new(x - 1, y))
                || (y < region.ymax
                    && (reach.contains(Site::new(x, y + 1)) || reach.contains(Site::new(x - 1, y + 1))));
            if hit {
                reach.insert(s);
            }
        }
    }
    reach
}

/// Open sites whose backward cluster reaches the window border.
pub fn backward_border_reach(env: &TriEnvironment) -> SiteSet {
    let region = env.region;
    let mut reach = SiteSet::new(region);
    for y in region.ymin..=region.ymax {
        for x in (region.xmin..=region.xmax).rev() {
            let s = Site::new(x, y);
            if !env.is_open(s) {
                continue;
            }
            let hit = region.on_border(s)
                || reach.contains(Site::new(x + 1, y))
                || (y > region.ymin
                    && (reach.contains(Site::new(x, y - 1)) || reach.contains(Site::new(x + 1, y - 1))));
            if hit {
                reach.insert(s);
            }
        }
    }
    reach
}

/// Finite surrogate of the bi-infinite cluster: sites whose forward and
/// backward clusters both reach the border.
pub fn bi_infinite_set(env: &TriEnvironment) -> SiteSet {
    forward_border_reach(env).intersect(&backward_border_reach(env))
}

/// Boundary sequences and the diagonal reach of a forward cluster.
#[derive(Clone, Debug)]
pub struct PercStats {
    pub origin: Site,
    /// `w[n]` = top ordinate among members at abscissa `origin.x - n`.
    pub w: Vec<Option<i64>>,
    /// `v[n]` = bottom ordinate at the same abscissa.
    pub v: Vec<Option<i64>>,
    /// `a[n]` = top ordinate among members whose own forward cluster reaches
    /// the border.
    pub a: Vec<Option<i64>>,
    /// Largest generation `(y - origin.y) - (x - origin.x)` over members;
    /// `None` for the empty cluster.
    pub tau: Option<i64>,
    pub truncated: bool,
}

/// Scan a forward cluster for its boundary sequences.
pub fn perc_stats(env: &TriEnvironment, cluster: &TriCluster) -> PercStats {
    let region = env.region;
    let origin = cluster.origin;
    let nmax = (origin.x - region.xmin).max(0) as usize;
    let reach = forward_border_reach(env);
    let mut w = vec![None; nmax + 1];
    let mut v = vec![None; nmax + 1];
    let mut a = vec![None; nmax + 1];
    let mut tau = None;
    for s in cluster.members.iter() {
        let n = origin.x - s.x;
        if n < 0 {
            continue;
        }
        let n = n as usize;
        if n < w.len() {
            w[n] = Some(w[n].map_or(s.y, |t: i64| t.max(s.y)));
            v[n] = Some(v[n].map_or(s.y, |t: i64| t.min(s.y)));
            if reach.contains(s) {
                a[n] = Some(a[n].map_or(s.y, |t: i64| t.max(s.y)));
            }
        }
        let gen = (s.y - origin.y) - (s.x - origin.x);
        tau = Some(tau.map_or(gen, |t: i64| t.max(gen)));
    }
    PercStats {
        origin,
        w,
        v,
        a,
        tau,
        truncated: cluster.truncated,
    }
}

/// A slope estimate with a bootstrap confidence interval.
#[derive(Clone, Copy, Debug)]
pub struct SlopeStat {
    pub value: f64,
    pub ci: (f64, f64),
    pub surviving: usize,
    pub attempts: usize,
}

#[derive(Debug, Error, PartialEq)]
pub enum EstimateError {
    #[error("only {got} surviving replicas of {want} requested within the attempt budget")]
    TooFewSurvivors { got: usize, want: usize },
    #[error("too few finite-reach samples to fit a tail")]
    InsufficientTail,
}

/// Window geometry for the upper-boundary estimators: a quarter-plane strip
/// `[-r, 0] x [0, h]`, `h` sized so the boundary stays inside.
fn rho_region(p: f64, radius: i64) -> Region {
    let h = (radius as f64 * p / (1.0 - p) * 1.3).ceil() as i64 + 200;
    Region::new(-radius, 0, 0, h)
}

struct RhoSamples {
    w_endpoint: Vec<f64>,
    v_endpoint: Vec<f64>,
    a_twopoint: Vec<f64>,
    attempts: usize,
    height_truncated: usize,
}

struct SurvivorSlopes {
    w_endpoint: f64,
    v_endpoint: f64,
    a_twopoint: Option<f64>,
    hit_top: bool,
}

fn rho_samples(p: f64, window_size: u32, replicas: usize, seed: u64) -> RhoSamples {
    let radius = (window_size as i64 - 1) / 2;
    let region = rho_region(p, radius);
    let n_eval = (radius * 4) / 5;
    let n_half = (radius * 2) / 5;
    let mut w_endpoint = Vec::with_capacity(replicas);
    let mut v_endpoint = Vec::with_capacity(replicas);
    let mut a_twopoint = Vec::with_capacity(replicas);
    let mut attempts = 0usize;
    let mut height_truncated = 0usize;
    let budget = replicas * 8;
    while w_endpoint.len() < replicas && attempts < budget {
        let batch = replicas.min(budget - attempts);
        let outcomes: Vec<Option<SurvivorSlopes>> = (attempts..attempts + batch)
            .into_par_iter()
            .map(|i| {
                let field = UniformField::new(derive_seed(seed, i as u64));
                let env = realize_otsp(&field, p, region);
                let cluster = forward_tri_cluster(&env, Site::ORIGIN);
                if cluster.members.is_empty() {
                    return None;
                }
                let stats = perc_stats(&env, &cluster);
                let w_at = stats.w.get(n_eval as usize).copied().flatten()?;
                let v_at = stats.v.get(n_eval as usize).copied().flatten()?;
                let hit_top = stats.w.iter().flatten().any(|&t| t >= region.ymax);
                let a_twopoint = match (
                    stats.a.get(n_half as usize).copied().flatten(),
                    stats.a.get(n_eval as usize).copied().flatten(),
                ) {
                    (Some(a1), Some(a2)) => {
                        Some((a2 - a1) as f64 / ((n_half - n_eval) as f64))
                    }
                    _ => None,
                };
                Some(SurvivorSlopes {
                    w_endpoint: w_at as f64 / (-n_eval as f64),
                    v_endpoint: v_at as f64 / (-n_eval as f64),
                    a_twopoint,
                    hit_top,
                })
            })
            .collect();
        attempts += batch;
        for o in outcomes.into_iter().flatten() {
            if o.hit_top {
                height_truncated += 1;
                continue;
            }
            if w_endpoint.len() < replicas {
                w_endpoint.push(o.w_endpoint);
                v_endpoint.push(o.v_endpoint);
                if let Some(t) = o.a_twopoint {
                    a_twopoint.push(t);
                }
            }
        }
    }
    RhoSamples {
        w_endpoint,
        v_endpoint,
        a_twopoint,
        attempts,
        height_truncated,
    }
}

/// Estimate of a basic statistic with sampling details.
#[derive(Clone, Debug)]
pub struct RhoEstimate {
    pub rho_hat: f64,
    pub se: f64,
    /// 99% bootstrap interval for the mean.
    pub ci: (f64, f64),
    pub surviving: usize,
    pub attempts: usize,
    pub n_eval: i64,
    pub height_truncated: usize,
}

/// Upper-boundary slope of the forward cluster: mean of `w(n)/(-n)` at
/// `n = 0.8 * radius` over replicas surviving to that abscissa.
pub fn estimate_rho(
    p: f64,
    window_size: u32,
    replicas: usize,
    seed: u64,
) -> Result<RhoEstimate, EstimateError> {
    let samples = rho_samples(p, window_size, replicas, seed);
    if samples.w_endpoint.len() < replicas.min(20) {
        return Err(EstimateError::TooFewSurvivors {
            got: samples.w_endpoint.len(),
            want: replicas,
        });
    }
    let (mean, se) = mean_se(&samples.w_endpoint);
    let ci = bootstrap_mean_ci(&samples.w_endpoint, 0.99, 2000, derive_seed(seed, u64::MAX));
    Ok(RhoEstimate {
        rho_hat: mean,
        se,
        ci,
        surviving: samples.w_endpoint.len(),
        attempts: samples.attempts,
        n_eval: ((window_size as i64 - 1) / 2) * 4 / 5,
        height_truncated: samples.height_truncated,
    })
}

/// The same slope read from the `a` sequence (border-reaching members) as a
/// two-point increment between `0.4 r` and `0.8 r`.
pub fn estimate_rho_via_a(
    p: f64,
    window_size: u32,
    replicas: usize,
    seed: u64,
) -> Result<SlopeStat, EstimateError> {
    let samples = rho_samples(p, window_size, replicas, seed);
    if samples.a_twopoint.len() < 20 {
        return Err(EstimateError::TooFewSurvivors {
            got: samples.a_twopoint.len(),
            want: replicas,
        });
    }
    let (mean, _) = mean_se(&samples.a_twopoint);
    let ci = bootstrap_mean_ci(&samples.a_twopoint, 0.99, 2000, derive_seed(seed, u64::MAX - 1));
    Ok(SlopeStat {
        value: mean,
        ci,
        surviving: samples.a_twopoint.len(),
        attempts: samples.attempts,
    })
}

/// Lower-boundary slope: mean of `v(n)/(-n)` at `n = 0.8 * radius`, which
/// tends to the reciprocal of the upper-boundary slope.
pub fn estimate_inverse_rho_via_v(
    p: f64,
    window_size: u32,
    replicas: usize,
    seed: u64,
) -> Result<SlopeStat, EstimateError> {
    let samples = rho_samples(p, window_size, replicas, seed);
    if samples.v_endpoint.len() < 20 {
        return Err(EstimateError::TooFewSurvivors {
            got: samples.v_endpoint.len(),
            want: replicas,
        });
    }
    let (mean, _) = mean_se(&samples.v_endpoint);
    let ci = bootstrap_mean_ci(&samples.v_endpoint, 0.99, 2000, derive_seed(seed, u64::MAX - 3));
    Ok(SlopeStat {
        value: mean,
        ci,
        surviving: samples.v_endpoint.len(),
        attempts: samples.attempts,
    })
}

/// Orthant-side slope of the closure boundary, mapped to the triangular
/// upper-boundary scale.
///
/// The lower blocking function is sampled on two positive columns where the
/// boundary stays well inside a square window; its slope tends to the
/// reciprocal of the triangular slope, so the estimate is inverted per
/// replica.
pub fn orthant_w_slope_estimate(
    p: f64,
    window_size: u32,
    replicas: usize,
    seed: u64,
) -> Result<SlopeStat, EstimateError> {
    let region = Region::centered_square(window_size);
    let radius = (window_size as i64 - 1) / 2;
    let margin = radius / 10;
    let n1 = (radius * 2) / 5;
    let n2 = (radius * 4) / 5;
    let mut samples = Vec::with_capacity(replicas);
    let mut attempts = 0usize;
    let budget = replicas * 8;
    while samples.len() < replicas && attempts < budget {
        let batch = replicas.min(budget - attempts);
        let outcomes: Vec<Option<f64>> = (attempts..attempts + batch)
            .into_par_iter()
            .map(|i| {
                let field = UniformField::new(derive_seed(seed, i as u64));
                let model = TwoValuedModel::orthant(p).unwrap();
                let env = realize_two_valued(&field, &model, region);
                let cluster = forward_cluster(&env, Site::ORIGIN).ok()?;
                let cl = closure(&cluster, margin).ok()?;
                let bf = extract_blocking_function(&cl, BlockingKind::Flbf).ok()?;
                let (w1, w2) = (bf.value(n1)?, bf.value(n2)?);
                let (lo, hi) = bf.valid_columns?;
                if n1 < lo || n2 > hi || w1 == w2 {
                    return None;
                }
                let reciprocal = (w2 - w1) as f64 / (n2 - n1) as f64;
                Some(1.0 / reciprocal)
            })
            .collect();
        attempts += batch;
        for o in outcomes.into_iter().flatten() {
            if samples.len() < replicas {
                samples.push(o);
            }
        }
    }
    if samples.len() < 20 {
        return Err(EstimateError::TooFewSurvivors {
            got: samples.len(),
            want: replicas,
        });
    }
    let (mean, _) = mean_se(&samples);
    let ci = bootstrap_mean_ci(&samples, 0.99, 2000, derive_seed(seed, u64::MAX - 2));
    Ok(SlopeStat {
        value: mean,
        ci,
        surviving: samples.len(),
        attempts,
    })
}

/// Empirical tail of the diagonal reach among clusters that die inside the
/// window, with an exponential fit on the log scale.
#[derive(Clone, Debug)]
pub struct TauTailReport {
    pub total: usize,
    pub finite: usize,
    /// `(n, fraction of all replicas with n <= tau < infinity)`.
    pub curve: Vec<(i64, f64)>,
    pub fit: Option<TailFit>,
}

#[derive(Clone, Copy, Debug)]
pub struct TailFit {
    /// Decay rate of the fitted `C exp(-gamma n)`.
    pub gamma: f64,
    pub se_gamma: f64,
    pub intercept: f64,
    pub points: usize,
}

impl TailFit {
    /// One-sided 95% evidence that the decay rate is positive.
    pub fn gamma_positive_95(&self) -> bool {
        self.gamma > 1.645 * self.se_gamma
    }
}

/// Sample the diagonal-reach tail at `p` on a fixed window.
///
/// "Finite" uses the window surrogate: the forward cluster never reaches the
/// border. The fit range runs between the 10th and 90th percentiles of the
/// observed finite values. Truncated clusters stand in for infinite reach and
/// empty clusters (closed origin) carry no reach at all; both are excluded
/// from the tail counts while still appearing in the denominator.
pub fn tau_tail(p: f64, replicas: usize, seed: u64, window: u32) -> TauTailReport {
    let l = window as i64;
    // One spare row and column keep the origin off the border; the cluster
    // can only grow up-left, so "truncated" then means it genuinely spans
    // the window.
    let region = Region::new(-l, 1, -1, l);
    let taus: Vec<Option<i64>> = (0..replicas)
        .into_par_iter()
        .map(|i| {
            let field = UniformField::new(derive_seed(seed, i as u64));
            let env = realize_otsp(&field, p, region);
            let cluster = forward_tri_cluster(&env, Site::ORIGIN);
            if cluster.truncated {
                return None;
            }
            let origin = cluster.origin;
            cluster
                .members
                .iter()
                .map(|s| (s.y - origin.y) - (s.x - origin.x))
                .max()
        })
        .collect();
    let finite_taus: Vec<i64> = taus.iter().copied().flatten().collect();
    let total = replicas;
    let finite = finite_taus.len();
    let mut curve = Vec::new();
    if finite > 0 {
        let max_tau = *finite_taus.iter().max().unwrap();
        for n in 0..=max_tau {
            let count = finite_taus.iter().filter(|t| **t >= n).count();
            curve.push((n, count as f64 / total as f64));
        }
    }
    let fit = fit_tail(&finite_taus, total);
    TauTailReport {
        total,
        finite,
        curve,
        fit,
    }
}

fn fit_tail(finite_taus: &[i64], total: usize) -> Option<TailFit> {
    if finite_taus.len() < 30 {
        return None;
    }
    let mut sorted = finite_taus.to_vec();
    sorted.sort_unstable();
    let q = |f: f64| sorted[((sorted.len() - 1) as f64 * f) as usize];
    let (lo, hi) = (q(0.10), q(0.90));
    if hi <= lo + 2 {
        return None;
    }
    let mut pts = Vec::new();
    for n in lo..=hi {
        let count = sorted.iter().filter(|t| **t >= n).count();
        if count > 0 {
            pts.push((n as f64, (count as f64 / total as f64).ln()));
        }
    }
    let (a, b, se_b) = least_squares(&pts)?;
    Some(TailFit {
        gamma: -b,
        se_gamma: se_b,
        intercept: a,
        points: pts.len(),
    })
}

/// Per-column disagreement found by a duality check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ColumnMismatch {
    pub column: i64,
    pub from_closure: i64,
    pub from_formula: Option<i64>,
}

/// Result of cross-checking the closure boundary against the
/// triangular-lattice formula.
#[derive(Clone, Debug)]
pub struct DualityReport {
    /// Anchor ordinate on the origin column, when one was found in range.
    pub k0: Option<i64>,
    pub columns_checked: usize,
    pub mismatches: Vec<ColumnMismatch>,
    pub phase: PhaseClass,
}

impl DualityReport {
    pub fn agree(&self) -> bool {
        self.k0.is_some() && self.mismatches.is_empty() && self.columns_checked > 0
    }
}

#[derive(Debug, Error)]
pub enum DualityError {
    #[error("closure is not blocked below (phase {0}); duality check needs p above the critical regime")]
    PhaseMismatch(&'static str),
    #[error("no usable blocking function: {0}")]
    Blocking(String),
}

/// Compare the lower blocking function of the orthant closure against the
/// per-column formula `W(n) = sup {k : (n,k) in B/C_(0,K0) and bi-infinite}`.
///
/// The bi-infinite set and the anchor `K_0 = sup {k <= 0 : (0,k)}` use the
/// border-reaching surrogate; an anchor missing from the search range aborts
/// the check with an inconclusive (not erroneous) report.
///
/// The per-column extremum is not site-exact: oriented staircases pass
/// through one another without sharing sites, so the supremum can pick up a
/// bi-infinite site of a different staircase strictly above the closure
/// boundary. Observed mismatches are one-sided (formula above closure),
/// small on the backward-cluster side, occasionally large on the forward
/// side, and stable under window doubling - they reflect the formula, not
/// window truncation. The boundary's asymptotic slope is unaffected.
pub fn duality_check_w(
    field: &UniformField,
    p: f64,
    region: Region,
    margin: i64,
) -> Result<DualityReport, DualityError> {
    let model = TwoValuedModel::orthant(p).unwrap();
    let env = realize_two_valued(field, &model, region);
    let cluster = forward_cluster(&env, Site::ORIGIN).expect("origin in region");
    let cl = closure(&cluster, margin).map_err(|e| DualityError::Blocking(e.to_string()))?;
    let phase = classify_closure(&cl);
    if phase != PhaseClass::BlockedBelow {
        return Err(DualityError::PhaseMismatch(phase.name()));
    }
    let bf = extract_blocking_function(&cl, BlockingKind::Flbf)
        .map_err(|e| DualityError::Blocking(e.to_string()))?;

    let tri = realize_otsp(field, p, region);
    let bi = bi_infinite_set(&tri);
    let mut k0 = None;
    for k in (region.ymin + margin..=0).rev() {
        if bi.contains(Site::new(0, k)) {
            k0 = Some(k);
            break;
        }
    }
    let Some(k0) = k0 else {
        return Ok(DualityReport {
            k0: None,
            columns_checked: 0,
            mismatches: vec![],
            phase,
        });
    };
    let anchor = Site::new(0, k0);
    let bwd = backward_tri_cluster(&tri, anchor);
    let fwd = forward_tri_cluster(&tri, anchor);
    let mut mismatches = Vec::new();
    let mut columns_checked = 0usize;
    for n in bf.valid_iter() {
        let w = bf.value(n).expect("valid column");
        let members = match n.cmp(&0) {
            std::cmp::Ordering::Greater => &bwd.members,
            std::cmp::Ordering::Less => &fwd.members,
            std::cmp::Ordering::Equal => {
                columns_checked += 1;
                if w != k0 {
                    mismatches.push(ColumnMismatch {
                        column: 0,
                        from_closure: w,
                        from_formula: Some(k0),
                    });
                }
                continue;
            }
        };
        columns_checked += 1;
        let mut w_star = None;
        for k in (region.ymin..=region.ymax).rev() {
            let s = Site::new(n, k);
            if members.contains(s) && bi.contains(s) {
                w_star = Some(k);
                break;
            }
        }
        if w_star != Some(w) {
            mismatches.push(ColumnMismatch {
                column: n,
                from_closure: w,
                from_formula: w_star,
            });
        }
    }
    Ok(DualityReport {
        k0: Some(k0),
        columns_checked,
        mismatches,
        phase,
    })
}

/// The backward-cluster analogue: when the backward cluster is infinite (it
/// reaches the border), its upper boundary `V` satisfies the transposed
/// formula with column infima over the anchor's clusters intersected with
/// the bi-infinite set.
///
/// The anchor search starts strictly above the backward cluster's own
/// column-0 top rather than at `k = 0`: a bi-infinite site at or below that
/// top sits inside a funnel that still reaches the target (landing on the
/// staircase endpoint is reaching it), so it cannot be the boundary height
/// that `B_o = V_<` defines.
///
/// Returns `None` when the backward cluster died inside the window.
pub fn duality_check_v(
    field: &UniformField,
    p: f64,
    region: Region,
    margin: i64,
) -> Option<DualityReport> {
    let model = TwoValuedModel::orthant(p).unwrap();
    let env = realize_two_valued(field, &model, region);
    let b_o = backward_cluster(&env, Site::ORIGIN).expect("origin in region");
    if !b_o.truncated {
        return None;
    }
    let tri = realize_otsp(field, p, region);
    let bi = bi_infinite_set(&tri);
    let mut col0_top = 0i64;
    for k in (region.ymin..=region.ymax).rev() {
        if b_o.members.contains(Site::new(0, k)) {
            col0_top = k;
            break;
        }
    }
    let mut k0 = None;
    for k in (col0_top + 1)..=(region.ymax - margin) {
        if bi.contains(Site::new(0, k)) {
            k0 = Some(k);
            break;
        }
    }
    let Some(k0) = k0 else {
        return Some(DualityReport {
            k0: None,
            columns_checked: 0,
            mismatches: vec![],
            phase: PhaseClass::Ambiguous,
        });
    };
    let anchor = Site::new(0, k0);
    let bwd = backward_tri_cluster(&tri, anchor);
    let fwd = forward_tri_cluster(&tri, anchor);
    let interior_cols = (region.xmin + margin)..=(region.xmax - margin);
    let mut mismatches = Vec::new();
    let mut columns_checked = 0usize;
    for n in interior_cols {
        // V from the window's backward cluster: one above its column top.
        let mut top = None;
        for k in (region.ymin..=region.ymax).rev() {
            if b_o.members.contains(Site::new(n, k)) {
                top = Some(k);
                break;
            }
        }
        let v = match top {
            Some(t) if t + 1 >= region.ymin + margin && t < region.ymax - margin => t + 1,
            _ => continue,
        };
        let members = match n.cmp(&0) {
            std::cmp::Ordering::Greater => &bwd.members,
            std::cmp::Ordering::Less => &fwd.members,
            std::cmp::Ordering::Equal => {
                columns_checked += 1;
                if v != k0 {
                    mismatches.push(ColumnMismatch {
                        column: 0,
                        from_closure: v,
                        from_formula: Some(k0),
                    });
                }
                continue;
            }
        };
        columns_checked += 1;
        let mut v_star = None;
        for k in region.ymin..=region.ymax {
            let s = Site::new(n, k);
            if members.contains(s) && bi.contains(s) {
                v_star = Some(k);
                break;
            }
        }
        if v_star != Some(v) {
            mismatches.push(ColumnMismatch {
                column: n,
                from_closure: v,
                from_formula: v_star,
            });
        }
    }
    Some(DualityReport {
        k0: Some(k0),
        columns_checked,
        mismatches,
        phase: PhaseClass::BlockedBelow,
    })
}

/// Whether the bi-connected cluster of the origin stays inside the window.
#[derive(Clone, Copy, Debug)]
pub struct MFinitenessReport {
    pub m_truncated: bool,
    pub m_size: usize,
}

pub fn m_finiteness_check(field: &UniformField, p: f64, region: Region) -> MFinitenessReport {
    let model = TwoValuedModel::orthant(p).unwrap();
    let env = realize_two_valued(field, &model, region);
    let m = crate::cluster::biconnected_cluster(&env, Site::ORIGIN).expect("origin in region");
    MFinitenessReport {
        m_truncated: m.truncated,
        m_size: m.members.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tri_steps_raise_generation_by_one_or_two() {
        for (dx, dy) in TRI_STEPS {
            let gen = dy - dx;
            assert!(gen == 1 || gen == 2);
        }
    }

    #[test]
    fn open_set_matches_orthant_ne() {
        let field = UniformField::new(77);
        let region = Region::new(-20, 20, -20, 20);
        let p = 0.62;
        let tri = realize_otsp(&field, p, region);
        let orthant = realize_two_valued(&field, &TwoValuedModel::orthant(p).unwrap(), region);
        for s in region.sites() {
            assert_eq!(tri.is_open(s), orthant.get(s) == crate::env::EnvSet::NE);
        }
    }

    #[test]
    fn open_sets_monotone_in_p() {
        let field = UniformField::new(3);
        let region = Region::new(-10, 0, 0, 10);
        let lo = realize_otsp(&field, 0.4, region);
        let hi = realize_otsp(&field, 0.7, region);
        for s in region.sites() {
            if lo.is_open(s) {
                assert!(hi.is_open(s));
            }
        }
    }

    #[test]
    fn closed_origin_gives_empty_cluster() {
        let field = UniformField::new(1);
        let region = Region::new(-5, 5, -5, 5);
        let tri = realize_otsp(&field, 0.0, region);
        let c = forward_tri_cluster(&tri, Site::ORIGIN);
        assert!(c.members.is_empty());
        assert!(!c.truncated);
    }

    #[test]
    fn all_open_forward_cluster_is_monotone_quadrant() {
        let field = UniformField::new(1);
        let region = Region::new(-4, 4, -4, 4);
        let tri = realize_otsp(&field, 1.0, region);
        let c = forward_tri_cluster(&tri, Site::ORIGIN);
        for s in region.sites() {
            assert_eq!(c.members.contains(s), s.x <= 0 && s.y >= 0);
        }
        assert!(c.truncated);
    }

    #[test]
    fn forward_backward_tri_duality() {
        let field = UniformField::new(31);
        let region = Region::new(-6, 0, 0, 6);
        let tri = realize_otsp(&field, 0.6, region);
        for x in region.sites() {
            let fwd = forward_tri_cluster(&tri, x);
            for y in region.sites() {
                let bwd = backward_tri_cluster(&tri, y);
                assert_eq!(fwd.members.contains(y), bwd.members.contains(x));
            }
        }
    }

    #[test]
    fn bi_infinite_set_on_extremes() {
        let field = UniformField::new(2);
        let region = Region::new(-6, 6, -6, 6);
        let all_open = realize_otsp(&field, 1.0, region);
        assert_eq!(bi_infinite_set(&all_open).len(), region.area());
        let all_closed = realize_otsp(&field, 0.0, region);
        assert!(bi_infinite_set(&all_closed).is_empty());
    }

    #[test]
    fn perc_stats_all_open() {
        let field = UniformField::new(1);
        let region = Region::new(-5, 0, 0, 5);
        let tri = realize_otsp(&field, 1.0, region);
        let c = forward_tri_cluster(&tri, Site::ORIGIN);
        let stats = perc_stats(&tri, &c);
        for n in 0..=5usize {
            assert_eq!(stats.w[n], Some(5), "top bound at column -{n}");
            assert_eq!(stats.v[n], Some(0), "left steps keep ordinate");
            assert_eq!(stats.a[n], Some(5));
        }
        assert_eq!(stats.tau, Some(10)); // corner (-5, 5)
    }

    #[test]
    fn perc_stats_single_site() {
        let region = Region::new(-3, 3, -3, 3);
        // Only the origin open.
        let field = UniformField::new(9);
        let mut tri = realize_otsp(&field, 0.0, region);
        tri.open.insert(Site::ORIGIN);
        let c = forward_tri_cluster(&tri, Site::ORIGIN);
        assert_eq!(c.members.len(), 1);
        let stats = perc_stats(&tri, &c);
        assert_eq!(stats.tau, Some(0));
        assert_eq!(stats.w[0], Some(0));
    }

    #[test]
    fn a_below_w_everywhere() {
        let field = UniformField::new(12);
        let region = Region::new(-60, 0, 0, 120);
        let tri = realize_otsp(&field, 0.7, region);
        let c = forward_tri_cluster(&tri, Site::ORIGIN);
        let stats = perc_stats(&tri, &c);
        for n in 0..stats.w.len() {
            if let (Some(a), Some(w)) = (stats.a[n], stats.w[n]) {
                assert!(a <= w);
            }
            if let (Some(v), Some(w)) = (stats.v[n], stats.w[n]) {
                assert!(v <= w);
            }
        }
    }

    #[test]
    fn duality_w_at_p_one() {
        // All NE: W(n) = 0 for n >= 0, K0 = 0, every site bi-infinite.
        let field = UniformField::new(5);
        let region = Region::new(-20, 20, -20, 20);
        let report = duality_check_w(&field, 1.0, region, 2).unwrap();
        assert_eq!(report.k0, Some(0));
        assert!(report.agree(), "{report:?}");
    }

    #[test]
    fn m_finiteness_at_p_one() {
        let field = UniformField::new(5);
        let region = Region::new(-10, 10, -10, 10);
        let r = m_finiteness_check(&field, 1.0, region);
        assert!(!r.m_truncated);
        assert_eq!(r.m_size, 1);
    }
}
