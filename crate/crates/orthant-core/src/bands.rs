//! Band-renewal traces in the orthant model.
//!
//! The path climbs through horizontal bands of height `K`. Within a band,
//! NE sites step right and up and SW sites step left and down (for
//! height 1 the down-step never fits inside the band, so the band behaves
//! as the `(NE, left)` submodel). The band's exit abscissa is the supremum
//! over all environment-consistent within-band paths, realized here by
//! exhaustive breadth-first exploration over lazily generated sites. Exits
//! happen from NE sites on the band's top row. Bands read disjoint rows, so
//! the increments are i.i.d.

use crate::env::TwoValuedModel;
use crate::field::UniformField;
use crate::geom::Site;
use std::collections::{HashSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BandError {
    #[error("band parameter p = {0} must lie strictly inside (0, 1)")]
    BadParameter(f64),
    #[error("band height must be at least 1")]
    BadHeight,
    #[error("lateral exploration exceeded the safety cap of {cap} columns")]
    CapExceeded { cap: u64 },
    #[error("band exploration exhausted without finding an exit")]
    NoExit,
}

/// Default lateral safety cap, in columns either side of the entry.
pub const DEFAULT_LATERAL_CAP: u64 = 1_000_000;

/// Entry abscissas of a band-renewal trace.
#[derive(Clone, Debug)]
pub struct BandTrace {
    /// Band height `K`.
    pub height: u32,
    /// `X_0 = 0, X_1, ..., X_m`: abscissa at which each band is entered.
    pub xs: Vec<i64>,
}

impl BandTrace {
    /// The i.i.d. increments `X_{k+1} - X_k`.
    pub fn deltas(&self) -> impl Iterator<Item = i64> + '_ {
        self.xs.windows(2).map(|w| w[1] - w[0])
    }

    pub fn n_bands(&self) -> usize {
        self.xs.len() - 1
    }
}

/// Exhaustive within-band reachability from `(start_x, bottom_row)`.
///
/// Returns the largest abscissa from which the band can be exited upward,
/// i.e. the maximal `j` such that `(j, bottom_row + height)` is reachable
/// with every step but the last inside the band. `is_ne` reports whether a
/// site carries the NE environment (otherwise it is SW).
pub fn explore_band(
    is_ne: &impl Fn(i64, i64) -> bool,
    start_x: i64,
    bottom_row: i64,
    height: u32,
    cap: u64,
) -> Result<i64, BandError> {
    explore_band_impl(is_ne, start_x, bottom_row, height, cap, None)
}

/// As [`explore_band`], also recording every site whose environment was read.
pub fn explore_band_logged(
    is_ne: &impl Fn(i64, i64) -> bool,
    start_x: i64,
    bottom_row: i64,
    height: u32,
    cap: u64,
    log: &mut Vec<Site>,
) -> Result<i64, BandError> {
    explore_band_impl(is_ne, start_x, bottom_row, height, cap, Some(log))
}

fn explore_band_impl(
    is_ne: &impl Fn(i64, i64) -> bool,
    start_x: i64,
    bottom_row: i64,
    height: u32,
    cap: u64,
    mut log: Option<&mut Vec<Site>>,
) -> Result<i64, BandError> {
    if height == 0 {
        return Err(BandError::BadHeight);
    }
    let top = height - 1;
    let mut ne_at = |x: i64, r: u32| {
        let y = bottom_row + r as i64;
        if let Some(log) = log.as_deref_mut() {
            log.push(Site::new(x, y));
        }
        is_ne(x, y)
    };
    let mut seen: HashSet<(i64, u32)> = HashSet::new();
    let mut queue: VecDeque<(i64, u32)> = VecDeque::new();
    let mut best_exit: Option<i64> = None;
    seen.insert((start_x, 0));
    queue.push_back((start_x, 0));
    while let Some((x, r)) = queue.pop_front() {
        if x.abs_diff(start_x) > cap {
            return Err(BandError::CapExceeded { cap });
        }
        if ne_at(x, r) {
            if r == top {
                best_exit = Some(best_exit.map_or(x, |b: i64| b.max(x)));
            } else if seen.insert((x, r + 1)) {
                queue.push_back((x, r + 1));
            }
            if seen.insert((x + 1, r)) {
                queue.push_back((x + 1, r));
            }
        } else {
            if seen.insert((x - 1, r)) {
                queue.push_back((x - 1, r));
            }
            if r > 0 && seen.insert((x, r - 1)) {
                queue.push_back((x, r - 1));
            }
        }
    }
    best_exit.ok_or(BandError::NoExit)
}

/// Run `n_bands` successive band explorations in the orthant model with
/// parameter `p`, realized lazily from the seeded field.
pub fn band_path(
    p: f64,
    seed: u64,
    height: u32,
    n_bands: usize,
    cap: u64,
) -> Result<BandTrace, BandError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(BandError::BadParameter(p));
    }
    if height == 0 {
        return Err(BandError::BadHeight);
    }
    let field = UniformField::new(seed);
    let is_ne = move |x: i64, y: i64| field.below(x, y, p);
    let mut xs = Vec::with_capacity(n_bands + 1);
    xs.push(0i64);
    let mut x = 0i64;
    for band in 0..n_bands {
        x = explore_band(&is_ne, x, band as i64 * height as i64, height, cap)?;
        xs.push(x);
    }
    Ok(BandTrace { height, xs })
}

/// The greedy single-row rule: west arrows are followed; from an NE site the
/// path steps east when the next site is NE too, and exits upward otherwise.
/// For height-1 bands this coincides with the exhaustive supremum.
pub fn greedy_row_exit(is_ne: &impl Fn(i64, i64) -> bool, start_x: i64, row: i64) -> i64 {
    let mut x = start_x;
    loop {
        if is_ne(x, row) {
            if is_ne(x + 1, row) {
                x += 1;
            } else {
                return x;
            }
        } else {
            x -= 1;
        }
    }
}

/// The model whose band structure is being sampled, for callers that need
/// the environment itself.
pub fn band_model(p: f64) -> Result<TwoValuedModel, BandError> {
    TwoValuedModel::orthant(p).map_err(|_| BandError::BadParameter(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pattern_env<'a>(
        cols: std::ops::RangeInclusive<i64>,
        rows: &'a [&'a str],
    ) -> impl Fn(i64, i64) -> bool + 'a {
        // rows listed bottom-up here: rows[r] is band row r; 'N' marks NE.
        // Outside the listed pattern every site is NE, so left drifts stop.
        let lo = *cols.start();
        let hi = *cols.end();
        move |x: i64, y: i64| {
            if x < lo || x > hi || y < 0 || y as usize >= rows.len() {
                return true;
            }
            rows[y as usize].as_bytes()[(x - lo) as usize] == b'N'
        }
    }

    #[test]
    fn single_row_run_of_ne() {
        // Columns -2..=4, row 0: L L N N N L N -> from 0, exit at 2.
        let env = pattern_env(-2..=4, &["LLNNNLN"]);
        assert_eq!(explore_band(&env, 0, 0, 1, 100).unwrap(), 2);
        assert_eq!(greedy_row_exit(&env, 0, 0), 2);
    }

    #[test]
    fn single_row_left_drift() {
        // From 0 on a row of left arrows until an NE at -3.
        let env = pattern_env(-3..=3, &["NLLLLLL"]);
        assert_eq!(explore_band(&env, 0, 0, 1, 100).unwrap(), -3);
        assert_eq!(greedy_row_exit(&env, 0, 0), -3);
    }

    #[test]
    fn two_row_band_exit_is_supremum_over_branches() {
        // Bottom run reaches x = 2; climbing there lands on left arrows that
        // drift to the NE just outside the pattern at x = -2. The top NE at
        // x = 3 is unreachable (no bottom NE below or left of it), so the
        // best exit is the drift exit.
        let env = pattern_env(-1..=4, &["NNNNLL", "LLLLNL"]);
        assert_eq!(explore_band(&env, 0, 0, 2, 100).unwrap(), -2);
    }

    #[test]
    fn two_row_band_exits_at_top_ne() {
        // Top row has NE at x = 1, directly above the bottom run: exit there
        // beats the left-drift exit at x = -2.
        let env = pattern_env(-1..=3, &["NNNNL", "LLNLL"]);
        assert_eq!(explore_band(&env, 0, 0, 2, 100).unwrap(), 1);
    }

    #[test]
    fn all_left_environment_trips_the_cap() {
        let env = |_x: i64, _y: i64| false;
        assert_eq!(
            explore_band(&env, 0, 0, 1, 50),
            Err(BandError::CapExceeded { cap: 50 })
        );
    }

    #[test]
    fn p_out_of_range_rejected() {
        assert_eq!(
            band_path(1.0, 1, 1, 10, 100).unwrap_err(),
            BandError::BadParameter(1.0)
        );
        assert_eq!(
            band_path(0.0, 1, 1, 10, 100).unwrap_err(),
            BandError::BadParameter(0.0)
        );
    }

    #[test]
    fn trace_shape_and_determinism() {
        let a = band_path(0.5, 99, 1, 500, DEFAULT_LATERAL_CAP).unwrap();
        let b = band_path(0.5, 99, 1, 500, DEFAULT_LATERAL_CAP).unwrap();
        assert_eq!(a.xs, b.xs);
        assert_eq!(a.xs[0], 0);
        assert_eq!(a.n_bands(), 500);
        assert_eq!(a.deltas().count(), 500);
    }

    #[test]
    fn greedy_coincides_with_supremum_on_row() {
        let field = UniformField::new(7);
        let p = 0.55;
        let is_ne = move |x: i64, y: i64| field.below(x, y, p);
        let mut x_bfs = 0i64;
        let mut x_greedy = 0i64;
        for row in 0..2000 {
            x_bfs = explore_band(&is_ne, x_bfs, row, 1, DEFAULT_LATERAL_CAP).unwrap();
            x_greedy = greedy_row_exit(&is_ne, x_greedy, row);
            assert_eq!(x_bfs, x_greedy, "row {row}");
        }
    }

    #[test]
    fn bands_read_disjoint_sites() {
        let field = UniformField::new(21);
        let p = 0.45;
        let is_ne = move |x: i64, y: i64| field.below(x, y, p);
        let mut logs: Vec<Vec<Site>> = Vec::new();
        let mut x = 0i64;
        for band in 0..50 {
            let mut log = Vec::new();
            x = explore_band_logged(&is_ne, x, band * 2, 2, DEFAULT_LATERAL_CAP, &mut log)
                .unwrap();
            logs.push(log);
        }
        // Every site is read by exactly one band.
        let mut all: HashSet<Site> = HashSet::new();
        for log in &logs {
            for s in log {
                assert!(all.insert(*s), "site {s:?} shared across bands");
            }
        }
    }
}
