//! Deterministic path constructions inside environments and their slopes.
//!
//! The two-direction greedy paths (preferred direction whenever available,
//! otherwise the fallback) drive the trichotomy arguments; their asymptotic
//! slopes have closed forms in the marginal probabilities. The detour
//! variant (`nws_path`) trades one down-step for extra leftward progress in
//! models where up and left never co-occur.

use crate::algebra::{rational_to_f64, Rational};
use crate::env::{Direction, EnvSet, EnvironmentModel, LocalEnvironment};
use crate::geom::Site;
use num_traits::{One, Zero};
use thiserror::Error;

/// A nearest-neighbour lattice path.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticePath {
    pub sites: Vec<Site>,
}

impl LatticePath {
    pub fn start(&self) -> Site {
        self.sites[0]
    }

    pub fn end(&self) -> Site {
        *self.sites.last().unwrap()
    }

    pub fn steps(&self) -> usize {
        self.sites.len() - 1
    }

    /// Check the step rule: every move from `z` uses a direction in `G_z`.
    pub fn env_consistent<E: LocalEnvironment>(&self, env: &E) -> bool {
        self.sites.windows(2).all(|w| {
            let d = (w[1].x - w[0].x, w[1].y - w[0].y);
            Direction::ALL
                .into_iter()
                .find(|dir| dir.delta() == d)
                .is_some_and(|dir| env.env_at(w[0]).is_some_and(|g| g.contains(dir)))
        })
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum WalkError {
    #[error("neither direction available at {0:?}; model assumption broken")]
    NoStep(Site),
    #[error("both up and left available at {0:?}; detour walk undefined")]
    BothAvailable(Site),
}

/// Follow `preferred` whenever the environment allows it, else `fallback`.
///
/// Stops after `max_steps` steps or on leaving the environment's domain.
pub fn greedy_path<E: LocalEnvironment>(
    env: &E,
    start: Site,
    preferred: Direction,
    fallback: Direction,
    max_steps: usize,
) -> Result<LatticePath, WalkError> {
    let mut sites = Vec::with_capacity(max_steps.min(1 << 20) + 1);
    sites.push(start);
    let mut cur = start;
    for _ in 0..max_steps {
        let g = match env.env_at(cur) {
            Some(g) => g,
            None => break, // window exit
        };
        let d = if g.contains(preferred) {
            preferred
        } else if g.contains(fallback) {
            fallback
        } else {
            return Err(WalkError::NoStep(cur));
        };
        let (dx, dy) = d.delta();
        cur = cur.offset(dx, dy);
        sites.push(cur);
    }
    Ok(LatticePath { sites })
}

/// The detour walk: follow whichever of left or up is available (the model
/// must never offer both), except at a site `y` with down in `G_y` and left
/// in `G_(y - e2)`; there it steps down and then left.
pub fn nws_path<E: LocalEnvironment>(
    env: &E,
    start: Site,
    max_steps: usize,
) -> Result<LatticePath, WalkError> {
    let mut sites = Vec::with_capacity(max_steps.min(1 << 20) + 1);
    sites.push(start);
    let mut cur = start;
    while sites.len() <= max_steps {
        let g = match env.env_at(cur) {
            Some(g) => g,
            None => break,
        };
        if g.contains(Direction::Up) && g.contains(Direction::Left) {
            return Err(WalkError::BothAvailable(cur));
        }
        let below = cur.offset(0, -1);
        let detour = g.contains(Direction::Down)
            && env
                .env_at(below)
                .is_some_and(|gb| gb.contains(Direction::Left));
        if detour {
            sites.push(below);
            if sites.len() > max_steps {
                break;
            }
            cur = below.offset(-1, 0);
            sites.push(cur);
            continue;
        }
        let d = if g.contains(Direction::Left) {
            Direction::Left
        } else if g.contains(Direction::Up) {
            Direction::Up
        } else {
            return Err(WalkError::NoStep(cur));
        };
        let (dx, dy) = d.delta();
        cur = cur.offset(dx, dy);
        sites.push(cur);
    }
    Ok(LatticePath { sites })
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SlopeMethod {
    EndpointRatio,
    LeastSquares,
}

/// An empirical slope, flagged when the path is vertical.
#[derive(Clone, Copy, Debug)]
pub struct SlopeEstimate {
    pub value: f64,
    pub n_steps: usize,
    pub method: SlopeMethod,
    pub vertical: bool,
}

/// Slope of a path relative to its start.
pub fn path_slope(path: &LatticePath, method: SlopeMethod) -> SlopeEstimate {
    let n_steps = path.steps();
    let s0 = path.start();
    match method {
        SlopeMethod::EndpointRatio => {
            let dx = path.end().x - s0.x;
            let dy = path.end().y - s0.y;
            if dx == 0 {
                SlopeEstimate {
                    value: f64::INFINITY,
                    n_steps,
                    method,
                    vertical: true,
                }
            } else {
                SlopeEstimate {
                    value: dy as f64 / dx as f64,
                    n_steps,
                    method,
                    vertical: false,
                }
            }
        }
        SlopeMethod::LeastSquares => {
            let pts: Vec<(f64, f64)> = path
                .sites
                .iter()
                .map(|s| ((s.x - s0.x) as f64, (s.y - s0.y) as f64))
                .collect();
            match crate::stats::least_squares(&pts) {
                Some((_, b, _)) => SlopeEstimate {
                    value: b,
                    n_steps,
                    method,
                    vertical: false,
                },
                None => SlopeEstimate {
                    value: f64::INFINITY,
                    n_steps,
                    method,
                    vertical: true,
                },
            }
        }
    }
}

/// A closed-form slope; `None` marks the vertical/horizontal degenerate case.
#[derive(Clone, Debug, PartialEq)]
pub struct SlopePrediction {
    pub value: Option<Rational>,
}

impl SlopePrediction {
    pub fn to_f64(&self) -> Option<f64> {
        self.value.as_ref().map(rational_to_f64)
    }
}

/// The four closed-form greedy-path slopes of a model.
#[derive(Clone, Debug)]
pub struct SlopeTable {
    /// Up preferred, left fallback: `-m_up / (1 - m_up)`.
    pub nw: SlopePrediction,
    /// Left preferred, up fallback: `-(1 - m_left) / m_left`.
    pub n_w: SlopePrediction,
    /// Down preferred, right fallback: `-m_down / (1 - m_down)`.
    pub se: SlopePrediction,
    /// Right preferred, down fallback: `-(1 - m_right) / m_right`.
    pub s_e: SlopePrediction,
}

/// Closed-form slopes from the marginal direction probabilities.
pub fn predicted_slopes(model: &EnvironmentModel) -> SlopeTable {
    let m = |d: Direction| model.marginal(EnvSet::EMPTY.with(d));
    let preferred_kind = |mu: Rational| {
        // slope -mu/(1-mu); vertical when the preferred direction is certain
        if mu.is_one() {
            SlopePrediction { value: None }
        } else {
            SlopePrediction {
                value: Some(-mu.clone() / (Rational::one() - mu)),
            }
        }
    };
    let fallback_kind = |mu: Rational| {
        // slope -(1-mu)/mu; vertical when the preferred direction never occurs
        if mu.is_zero() {
            SlopePrediction { value: None }
        } else {
            SlopePrediction {
                value: Some(-(Rational::one() - mu.clone()) / mu),
            }
        }
    };
    SlopeTable {
        nw: preferred_kind(m(Direction::Up)),
        n_w: fallback_kind(m(Direction::Left)),
        se: preferred_kind(m(Direction::Down)),
        s_e: fallback_kind(m(Direction::Right)),
    }
}
