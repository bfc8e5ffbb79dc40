//! Forward, backward, and bi-connected clusters on a realized window.
//!
//! `x` connects to `y` when some directed path follows, at every visited
//! site `z`, a direction in `G_z`. Clusters restricted to a window carry a
//! `truncated` flag: a truncated cluster touches the border and may continue
//! outside, so "infinite" statistics use truncation as the finite surrogate.

use crate::env::EnvironmentWindow;
use crate::geom::Site;
use crate::siteset::SiteSet;
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ClusterKind {
    Forward,
    Backward,
    Biconnected,
}

impl ClusterKind {
    pub fn name(self) -> &'static str {
        match self {
            ClusterKind::Forward => "forward",
            ClusterKind::Backward => "backward",
            ClusterKind::Biconnected => "biconnected",
        }
    }
}

/// A cluster of one origin on one window.
#[derive(Clone, Debug)]
pub struct ClusterResult {
    pub origin: Site,
    pub kind: ClusterKind,
    pub members: SiteSet,
    /// True when some member lies on the window border.
    pub truncated: bool,
}

#[derive(Debug, Error, PartialEq)]
pub enum ClusterError {
    #[error("site {0:?} outside the window")]
    OutsideRegion(Site),
}

/// Breadth-first closure of `origin` under steps `z -> z + e`, `e` in `G_z`.
pub fn forward_cluster(
    env: &EnvironmentWindow,
    origin: Site,
) -> Result<ClusterResult, ClusterError> {
    explore(env, origin, ClusterKind::Forward)
}

/// All sites from which `target` is reachable; forward with edges reversed.
pub fn backward_cluster(
    env: &EnvironmentWindow,
    target: Site,
) -> Result<ClusterResult, ClusterError> {
    explore(env, target, ClusterKind::Backward)
}

/// Intersection of the forward and backward clusters of `origin`.
pub fn biconnected_cluster(
    env: &EnvironmentWindow,
    origin: Site,
) -> Result<ClusterResult, ClusterError> {
    let fwd = forward_cluster(env, origin)?;
    let bwd = backward_cluster(env, origin)?;
    let members = fwd.members.intersect(&bwd.members);
    let truncated = members.touches_border();
    Ok(ClusterResult {
        origin,
        kind: ClusterKind::Biconnected,
        members,
        truncated,
    })
}

fn explore(
    env: &EnvironmentWindow,
    origin: Site,
    kind: ClusterKind,
) -> Result<ClusterResult, ClusterError> {
    let region = env.region();
    if !region.contains(origin) {
        return Err(ClusterError::OutsideRegion(origin));
    }
    let mut members = SiteSet::new(region);
    let mut queue = VecDeque::new();
    let mut truncated = region.on_border(origin);
    members.insert(origin);
    queue.push_back(origin);
    let mut visit = |s: Site, members: &mut SiteSet, queue: &mut VecDeque<Site>| {
        if members.insert(s) {
            truncated |= region.on_border(s);
            queue.push_back(s);
        }
    };
    while let Some(site) = queue.pop_front() {
        match kind {
            ClusterKind::Forward => {
                for d in env.get(site).iter() {
                    let (dx, dy) = d.delta();
                    let t = site.offset(dx, dy);
                    if region.contains(t) {
                        visit(t, &mut members, &mut queue);
                    }
                }
            }
            ClusterKind::Backward => {
                // Predecessors: u with u + d == site for some d in G_u.
                for d in crate::env::Direction::ALL {
                    let (dx, dy) = d.delta();
                    let u = site.offset(-dx, -dy);
                    if region.contains(u) && env.get(u).contains(d) {
                        visit(u, &mut members, &mut queue);
                    }
                }
            }
            ClusterKind::Biconnected => unreachable!("built from the two sweeps"),
        }
    }
    Ok(ClusterResult {
        origin,
        kind,
        members,
        truncated,
    })
}
