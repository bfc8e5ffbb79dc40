//! Hole-filled closures of forward clusters and their boundary structure.
//!
//! On the infinite lattice the closure of a forward cluster adds every site
//! from which all infinite self-avoiding paths must cross the cluster;
//! equivalently it fills the finite holes. On a window only complement
//! components that avoid the border are provably finite, so those are
//! filled, components touching the border stay unresolved, and results are
//! trusted within an interior margin.

use crate::cluster::{ClusterKind, ClusterResult};
use crate::env::{EnvSet, EnvironmentWindow};
use crate::geom::{Region, Site};
use crate::siteset::SiteSet;
use std::collections::VecDeque;
use thiserror::Error;

/// A finite hole: a 4-connected component of the cluster complement that
/// does not touch the window border.
#[derive(Clone, Debug)]
pub struct Hole {
    pub sites: SiteSet,
}

/// The window surrogate for the closure of a forward cluster.
#[derive(Clone, Debug)]
pub struct ClosureResult {
    pub origin: Site,
    /// Cluster plus all filled holes.
    pub closure: SiteSet,
    pub holes: Vec<Hole>,
    /// Complement components touching the border; possibly infinite, not filled.
    pub unresolved: SiteSet,
    /// Interior margin within which the surrogate is trusted.
    pub margin: i64,
}

#[derive(Debug, Error, PartialEq)]
pub enum ClosureError {
    #[error("margin {margin} too large for the window")]
    MarginTooLarge { margin: i64 },
    #[error("closure expects a forward cluster, got {0}")]
    NotForward(&'static str),
}

/// Fill the finite holes of a forward cluster.
pub fn closure(cluster: &ClusterResult, margin: i64) -> Result<ClosureResult, ClosureError> {
    if cluster.kind != ClusterKind::Forward {
        return Err(ClosureError::NotForward(cluster.kind.name()));
    }
    let region = cluster.members.region();
    if margin < 0 || region.shrink(margin).is_none() {
        return Err(ClosureError::MarginTooLarge { margin });
    }
    let mut closure = cluster.members.clone();
    let mut seen = cluster.members.clone();
    let mut holes = Vec::new();
    let mut unresolved = SiteSet::new(region);
    let mut queue = VecDeque::new();
    let mut component = Vec::new();
    for start_idx in 0..region.area() {
        if seen.contains_index(start_idx) {
            continue;
        }
        // Flood-fill one complement component under 4-adjacency.
        component.clear();
        let mut touches = false;
        seen.insert_index(start_idx);
        queue.push_back(region.site_at(start_idx));
        while let Some(s) = queue.pop_front() {
            if region.on_border(s) {
                touches = true;
            }
            component.push(s);
            for (dx, dy) in [(0, 1), (0, -1), (-1, 0), (1, 0)] {
                let n = s.offset(dx, dy);
                if region.contains(n) && seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        if touches {
            for s in &component {
                unresolved.insert(*s);
            }
        } else {
            let mut hole = SiteSet::new(region);
            for s in &component {
                hole.insert(*s);
                closure.insert(*s);
            }
            holes.push(Hole { sites: hole });
        }
    }
    Ok(ClosureResult {
        origin: cluster.origin,
        closure,
        holes,
        unresolved,
        margin,
    })
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BlockingKind {
    /// Forward lower blocking function: per-column minimum of the closure.
    Flbf,
    /// Forward upper blocking function: per-column maximum.
    Fubf,
}

/// Per-column boundary heights of a closure, with the column range in which
/// they are trusted.
#[derive(Clone, Debug)]
pub struct BlockingFunctionEstimate {
    pub kind: BlockingKind,
    /// Column -> boundary height, for every column with a nonempty closure.
    values: Vec<(i64, i64)>,
    /// Inclusive column interval clear of border effects.
    pub valid_columns: Option<(i64, i64)>,
}

impl BlockingFunctionEstimate {
    pub fn value(&self, n: i64) -> Option<i64> {
        let first = self.values.first()?.0;
        if n < first || n > self.values.last().unwrap().0 {
            return None;
        }
        let (col, w) = self.values[(n - first) as usize];
        debug_assert_eq!(col, n);
        Some(w)
    }

    pub fn values(&self) -> &[(i64, i64)] {
        &self.values
    }

    /// Columns of the valid interval.
    pub fn valid_iter(&self) -> impl Iterator<Item = i64> {
        let (lo, hi) = self.valid_columns.unwrap_or((0, -1));
        lo..=hi
    }

    /// True when the heights are nonincreasing over the valid interval.
    pub fn nonincreasing_on_valid(&self) -> bool {
        let mut prev: Option<i64> = None;
        for n in self.valid_iter() {
            let w = match self.value(n) {
                Some(w) => w,
                None => return false,
            };
            if let Some(p) = prev {
                if w > p {
                    return false;
                }
            }
            prev = Some(w);
        }
        true
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum BlockingError {
    #[error("column {0} has empty closure inside the valid range; wrong phase?")]
    EmptyColumn(i64),
    #[error("no valid columns at margin {0}")]
    NoValidColumns(i64),
}

/// Extract the per-column boundary of a closure.
///
/// For the lower kind, `W(n) = min {k : (n,k) in closure}`. A column is
/// valid when it is at least `margin` from the lateral borders and its
/// boundary height is at least `margin` from the top and bottom borders;
/// the valid set is the largest such interval of consecutive columns
/// (preferring one that contains the origin column).
pub fn extract_blocking_function(
    result: &ClosureResult,
    kind: BlockingKind,
) -> Result<BlockingFunctionEstimate, BlockingError> {
    let region = result.closure.region();
    let margin = result.margin;
    let mut mins = vec![i64::MAX; region.width() as usize];
    let mut maxs = vec![i64::MIN; region.width() as usize];
    for s in result.closure.iter() {
        let c = (s.x - region.xmin) as usize;
        mins[c] = mins[c].min(s.y);
        maxs[c] = maxs[c].max(s.y);
    }
    let mut values = Vec::new();
    for n in region.xmin..=region.xmax {
        let c = (n - region.xmin) as usize;
        if mins[c] == i64::MAX {
            // Empty column: stop the contiguous record on whichever side.
            continue;
        }
        let w = match kind {
            BlockingKind::Flbf => mins[c],
            BlockingKind::Fubf => maxs[c],
        };
        values.push((n, w));
    }
    // Keep only a contiguous run around the origin column when empties split
    // the record.
    values = contiguous_run(values, result.origin.x);
    let ok = |&(n, w): &(i64, i64)| {
        n >= region.xmin + margin
            && n <= region.xmax - margin
            && w >= region.ymin + margin
            && w <= region.ymax - margin
    };
    let valid_columns = longest_interval(&values, ok, result.origin.x);
    if let Some((lo, hi)) = valid_columns {
        let est = BlockingFunctionEstimate {
            kind,
            values,
            valid_columns: Some((lo, hi)),
        };
        for n in lo..=hi {
            if est.value(n).is_none() {
                return Err(BlockingError::EmptyColumn(n));
            }
        }
        Ok(est)
    } else {
        Err(BlockingError::NoValidColumns(margin))
    }
}

fn contiguous_run(values: Vec<(i64, i64)>, anchor: i64) -> Vec<(i64, i64)> {
    if values.is_empty() {
        return values;
    }
    let mut runs: Vec<Vec<(i64, i64)>> = vec![vec![values[0]]];
    for pair in values.into_iter().skip(1) {
        let last = runs.last_mut().unwrap();
        if pair.0 == last.last().unwrap().0 + 1 {
            last.push(pair);
        } else {
            runs.push(vec![pair]);
        }
    }
    runs.sort_by_key(|run| {
        let contains = run[0].0 <= anchor && anchor <= run.last().unwrap().0;
        (contains, run.len())
    });
    runs.pop().unwrap()
}

fn longest_interval<F: Fn(&(i64, i64)) -> bool>(
    values: &[(i64, i64)],
    ok: F,
    anchor: i64,
) -> Option<(i64, i64)> {
    let mut best: Option<(i64, i64)> = None;
    let mut cur: Option<(i64, i64)> = None;
    let score = |iv: (i64, i64)| {
        let contains = iv.0 <= anchor && anchor <= iv.1;
        (contains, iv.1 - iv.0)
    };
    for pair in values {
        if ok(pair) {
            cur = Some(match cur {
                None => (pair.0, pair.0),
                Some((lo, _)) => (lo, pair.0),
            });
            if best.is_none() || score(cur.unwrap()) > score(best.unwrap()) {
                best = cur;
            }
        } else {
            cur = None;
        }
    }
    best
}

/// One step of the staircase boundary walk.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BoundaryMove {
    Up,
    Left,
    DiagonalNw,
}

/// The lower boundary of a blocked-below closure, traversed upward-leftward.
///
/// The site list is `{(n, m) : m = W(n) or W(n) <= m < W(n-1)}` over the
/// valid columns; consecutive sites differ by one of the three triangular
/// lattice moves.
#[derive(Clone, Debug)]
pub struct BoundaryPath {
    pub sites: Vec<Site>,
    /// `moves[i]` carries the path from `sites[i]` to `sites[i+1]`.
    pub moves: Vec<BoundaryMove>,
}

#[derive(Debug, Error, PartialEq)]
pub enum BoundaryError {
    #[error("boundary walk needs a lower blocking function")]
    NotLower,
    #[error("blocking function is not nonincreasing at column {0}")]
    NotMonotone(i64),
    #[error("no valid columns to walk")]
    Empty,
}

/// Trace the staircase boundary of a lower blocking function from its
/// rightmost valid column to its leftmost.
pub fn boundary_path(bf: &BlockingFunctionEstimate) -> Result<BoundaryPath, BoundaryError> {
    if bf.kind != BlockingKind::Flbf {
        return Err(BoundaryError::NotLower);
    }
    let (lo, hi) = bf.valid_columns.ok_or(BoundaryError::Empty)?;
    let mut sites = Vec::new();
    let mut moves = Vec::new();
    let w = |n: i64| bf.value(n).expect("valid column");
    for n in (lo..=hi).rev() {
        if n < hi && w(n) < w(n + 1) {
            return Err(BoundaryError::NotMonotone(n));
        }
        if sites.is_empty() {
            sites.push(Site::new(n, w(n)));
        }
        if n == lo {
            break;
        }
        // Climb column n from W(n) to W(n-1), tagging each move.
        let mut k = w(n);
        let target = w(n - 1);
        while k < target - 1 {
            k += 1;
            moves.push(BoundaryMove::Up);
            sites.push(Site::new(n, k));
        }
        if target == k {
            moves.push(BoundaryMove::Left);
        } else {
            moves.push(BoundaryMove::DiagonalNw);
        }
        sites.push(Site::new(n - 1, target));
    }
    Ok(BoundaryPath { sites, moves })
}

/// Sites of a boundary path whose environment is not NE; empty in the
/// orthant blocked-below phase.
pub fn boundary_env_violations(env: &EnvironmentWindow, path: &BoundaryPath) -> Vec<Site> {
    path.sites
        .iter()
        .copied()
        .filter(|s| env.get(*s) != EnvSet::NE)
        .collect()
}

/// Window classification of the closure geometry.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PhaseClass {
    /// The closure covers the whole interior.
    FullPlane,
    /// The closure misses interior sites only below its boundary.
    BlockedBelow,
    /// The closure misses interior sites only above its boundary.
    BlockedAbove,
    /// The window shows misses on both sides; no verdict.
    Ambiguous,
}

impl PhaseClass {
    pub fn name(self) -> &'static str {
        match self {
            PhaseClass::FullPlane => "full-plane",
            PhaseClass::BlockedBelow => "blocked-below",
            PhaseClass::BlockedAbove => "blocked-above",
            PhaseClass::Ambiguous => "ambiguous",
        }
    }
}

/// Classify the closure of the forward cluster of `origin` on the interior
/// margin region.
pub fn classify_phase(
    env: &EnvironmentWindow,
    origin: Site,
    margin: i64,
) -> Result<PhaseClass, ClosureError> {
    let cluster = crate::cluster::forward_cluster(env, origin)
        .map_err(|_| ClosureError::MarginTooLarge { margin })?;
    let result = closure(&cluster, margin)?;
    Ok(classify_closure(&result))
}

/// Classification from an already computed closure.
pub fn classify_closure(result: &ClosureResult) -> PhaseClass {
    let region = result.closure.region();
    let interior = match region.shrink(result.margin) {
        Some(r) => r,
        None => return PhaseClass::Ambiguous,
    };
    // Per interior column: the closure's vertical extent clipped to the
    // interior.
    #[derive(Clone, Copy, PartialEq)]
    enum Col {
        Empty,
        Full,
        MissingBelow,
        MissingAbove,
        Other,
    }
    let mut cols = Vec::with_capacity(interior.width() as usize);
    for n in interior.xmin..=interior.xmax {
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        let mut count = 0i64;
        for k in interior.ymin..=interior.ymax {
            if result.closure.contains(Site::new(n, k)) {
                lo = lo.min(k);
                hi = hi.max(k);
                count += 1;
            }
        }
        cols.push(if count == 0 {
            Col::Empty
        } else if count != hi - lo + 1 {
            Col::Other // internal gap: unfilled border-touching component
        } else if lo == interior.ymin && hi == interior.ymax {
            Col::Full
        } else if lo > interior.ymin && hi == interior.ymax {
            Col::MissingBelow
        } else if lo == interior.ymin && hi < interior.ymax {
            Col::MissingAbove
        } else {
            Col::Other
        });
    }
    if cols.iter().all(|c| *c == Col::Full) {
        return PhaseClass::FullPlane;
    }
    if cols.contains(&Col::Other) {
        return PhaseClass::Ambiguous;
    }
    let below = cols.contains(&Col::MissingBelow);
    let above = cols.contains(&Col::MissingAbove);
    let empties: Vec<usize> = cols
        .iter()
        .enumerate()
        .filter(|(_, c)| **c == Col::Empty)
        .map(|(i, _)| i)
        .collect();
    // A decreasing lower boundary pushes empty columns to the left edge; a
    // decreasing upper boundary pushes them to the right edge.
    let empties_left_prefix = empties.iter().copied().eq(0..empties.len());
    let empties_right_suffix = empties
        .iter()
        .copied()
        .eq(cols.len() - empties.len()..cols.len());
    match (below, above) {
        (true, false) if empties_left_prefix => PhaseClass::BlockedBelow,
        (false, true) if empties_right_suffix => PhaseClass::BlockedAbove,
        (false, false) if !empties.is_empty() => PhaseClass::Ambiguous,
        _ => PhaseClass::Ambiguous,
    }
}

/// Default interior margin: 20% of the window radius.
pub fn default_margin(region: Region) -> i64 {
    (region.width().min(region.height()) / 2) / 5
}
