//! Structured export formats: JSON documents for clusters, closures, and
//! bound reports; CSV for traces, paths, and percolation statistics.
//!
//! Field order is fixed by the struct declarations, so serialized output is
//! byte-deterministic for golden tests.

use crate::analysis::{BoundResult, GkEstimate, PkEstimate};
use crate::bands::BandTrace;
use crate::closure::{BlockingFunctionEstimate, ClosureResult};
use crate::cluster::ClusterResult;
use crate::geom::{Region, Site};
use crate::otsp::PercStats;
use crate::siteset::SiteSet;
use crate::walks::LatticePath;
use serde::Serialize;

/// Run-length encoded rows of a site set: `(y, [[x_start, x_end], ...])`.
pub fn rle_rows(set: &SiteSet) -> Vec<RowRuns> {
    let mut rows: Vec<RowRuns> = Vec::new();
    for s in set.iter() {
        match rows.last_mut() {
            Some(row) if row.y == s.y => {
                let last = row.runs.last_mut().unwrap();
                if last[1] + 1 == s.x {
                    last[1] = s.x;
                } else {
                    row.runs.push([s.x, s.x]);
                }
            }
            _ => rows.push(RowRuns {
                y: s.y,
                runs: vec![[s.x, s.x]],
            }),
        }
    }
    rows
}

#[derive(Serialize, Debug, Clone)]
pub struct RowRuns {
    pub y: i64,
    pub runs: Vec<[i64; 2]>,
}

#[derive(Serialize)]
pub struct ClusterDocument {
    pub origin: [i64; 2],
    pub kind: &'static str,
    pub region: Region,
    pub truncated: bool,
    pub size: usize,
    pub member_rows: Vec<RowRuns>,
}

impl ClusterDocument {
    pub fn new(cluster: &ClusterResult) -> Self {
        ClusterDocument {
            origin: [cluster.origin.x, cluster.origin.y],
            kind: cluster.kind.name(),
            region: cluster.members.region(),
            truncated: cluster.truncated,
            size: cluster.members.len(),
            member_rows: rle_rows(&cluster.members),
        }
    }
}

#[derive(Serialize)]
pub struct BlockingDocument {
    pub kind: &'static str,
    pub valid_columns: Option<(i64, i64)>,
    pub values: Vec<(i64, i64)>,
}

impl BlockingDocument {
    pub fn new(bf: &BlockingFunctionEstimate) -> Self {
        BlockingDocument {
            kind: match bf.kind {
                crate::closure::BlockingKind::Flbf => "flbf",
                crate::closure::BlockingKind::Fubf => "fubf",
            },
            valid_columns: bf.valid_columns,
            values: bf.values().to_vec(),
        }
    }
}

#[derive(Serialize)]
pub struct ClosureDocument {
    pub origin: [i64; 2],
    pub region: Region,
    pub margin: i64,
    pub closure_size: usize,
    pub closure_rows: Vec<RowRuns>,
    pub holes: Vec<Vec<RowRuns>>,
    pub unresolved_rows: Vec<RowRuns>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocking: Option<BlockingDocument>,
}

impl ClosureDocument {
    pub fn new(result: &ClosureResult, blocking: Option<&BlockingFunctionEstimate>) -> Self {
        ClosureDocument {
            origin: [result.origin.x, result.origin.y],
            region: result.closure.region(),
            margin: result.margin,
            closure_size: result.closure.len(),
            closure_rows: rle_rows(&result.closure),
            holes: result.holes.iter().map(|h| rle_rows(&h.sites)).collect(),
            unresolved_rows: rle_rows(&result.unresolved),
            blocking: blocking.map(BlockingDocument::new),
        }
    }
}

/// Bound report: `{K, method, root, residual_or_ci, polynomial?, seed?, samples?}`.
#[derive(Serialize)]
pub struct BoundReport {
    pub k: u32,
    pub method: &'static str,
    pub root: f64,
    pub residual_or_ci: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polynomial: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
}

impl BoundReport {
    pub fn exact(k: u32, bound: &BoundResult, poly: &crate::algebra::Poly) -> Self {
        BoundReport {
            k,
            method: "exact",
            root: bound.root,
            residual_or_ci: bound.residual,
            polynomial: Some(poly.coeffs().iter().map(|c| c.to_string()).collect()),
            seed: None,
            samples: None,
        }
    }

    pub fn monte_carlo(k: u32, est: &PkEstimate, seed: u64) -> Self {
        BoundReport {
            k,
            method: "monte-carlo",
            root: est.bound.root,
            residual_or_ci: est.bound.residual,
            polynomial: None,
            seed: Some(seed),
            samples: Some(est.samples_used),
        }
    }
}

#[derive(Serialize)]
pub struct GkReport {
    pub k: u32,
    pub p: f64,
    pub mean: f64,
    pub standard_error: f64,
    pub samples: u64,
    pub seed: u64,
}

impl GkReport {
    pub fn new(k: u32, p: f64, est: &GkEstimate, seed: u64) -> Self {
        GkReport {
            k,
            p,
            mean: est.mean,
            standard_error: est.standard_error,
            samples: est.samples,
            seed,
        }
    }
}

/// CSV of a band trace: `band_index,x,delta`.
pub fn band_trace_csv(trace: &BandTrace) -> String {
    let mut out = String::from("band_index,x,delta\n");
    for (k, w) in trace.xs.windows(2).enumerate() {
        out.push_str(&format!("{},{},{}\n", k, w[0], w[1] - w[0]));
    }
    out
}

/// CSV of a lattice path: `x,y`.
pub fn path_csv(path: &LatticePath) -> String {
    let mut out = String::from("x,y\n");
    for s in &path.sites {
        out.push_str(&format!("{},{}\n", s.x, s.y));
    }
    out
}

/// CSV of per-replica boundary sequences: `replica,n,w,v,a`.
pub fn perc_stats_csv(stats: &[PercStats]) -> String {
    let fmt = |v: Option<i64>| v.map_or(String::new(), |x| x.to_string());
    let mut out = String::from("replica,n,w,v,a\n");
    for (i, st) in stats.iter().enumerate() {
        for n in 0..st.w.len() {
            if st.w[n].is_none() && st.v[n].is_none() && st.a[n].is_none() {
                continue;
            }
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                i,
                n,
                fmt(st.w[n]),
                fmt(st.v[n]),
                fmt(st.a[n])
            ));
        }
    }
    out
}

/// Summary CSV for a slope estimate: `p,rho_hat,ci_lo,ci_hi,replicas`.
pub fn rho_summary_csv(p: f64, rho: &crate::otsp::RhoEstimate) -> String {
    format!(
        "p,rho_hat,ci_lo,ci_hi,replicas\n{},{},{},{},{}\n",
        p, rho.rho_hat, rho.ci.0, rho.ci.1, rho.surviving
    )
}

pub fn site_list(sites: &[Site]) -> Vec<[i64; 2]> {
    sites.iter().map(|s| [s.x, s.y]).collect()
}
