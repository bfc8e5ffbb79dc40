//! Band-renewal algebra and the critical-probability lower bounds.
//!
//! Height-1 bands have the closed-form drift `g1(p) = p^2/(1-p) - (1-p)/p`
//! and increment law `P(D = k) = p^(k+1)(1-p)` for `k >= 0`,
//! `(1-p)^|k| p` for `k < 0`. Height-2 bands decompose by the entry column's
//! pair of environments into four conditional means with a renewal
//! structure; their mixture halved is `g2`. Solving `g_K(1-p) = -1` yields
//! lower bounds `p_K` for the dual critical probability: `p_1` is the root
//! of a cubic, `p_2` of a degree-11 polynomial, and higher `K` are estimated
//! by stochastic bisection over Monte Carlo band traces.
//!
//! Everything before root extraction is exact rational arithmetic.

use crate::algebra::{rat, Poly, Rational, RationalFn};
use crate::bands::{band_path, BandError, DEFAULT_LATERAL_CAP};
use crate::field::derive_seed;
use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("evaluation at the pole p = {0}")]
    Pole(Rational),
    #[error("band sampling failed: {0}")]
    Band(#[from] BandError),
    #[error("root not bracketed in [{0}, {1}]")]
    NoBracket(f64, f64),
}

fn check_interior(p: &Rational) -> Result<(), AnalysisError> {
    if p <= &Rational::zero() || p >= &Rational::one() {
        return Err(AnalysisError::Pole(p.clone()));
    }
    Ok(())
}

/// `g1(p) = p^2/(1-p) - (1-p)/p`, the mean height-1 band increment.
pub fn g1(p: &Rational) -> Result<Rational, AnalysisError> {
    check_interior(p)?;
    let one = Rational::one();
    let q = &one - p;
    Ok(p * p / &q - &q / p)
}

fn rational_pow(base: &Rational, exp: u64) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

/// Exact pmf of the height-1 band increment.
pub fn delta1_pmf(p: &Rational, k: i64) -> Result<Rational, AnalysisError> {
    check_interior(p)?;
    let q = Rational::one() - p;
    Ok(if k >= 0 {
        rational_pow(p, k as u64 + 1) * q
    } else {
        rational_pow(&q, k.unsigned_abs()) * p
    })
}

/// The four conditional band-2 means and their renewal intermediates, all
/// exact at `p`. Subscripts follow the column convention: the pair names the
/// bottom-row environment first, then the top-row environment.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalMeans {
    pub eta: Rational,
    /// Probability of an (NE, NE) column before a SW-bottomed one.
    pub alpha: Rational,
    /// Probability that the first renewal gains ground.
    pub theta: Rational,
    pub e_z1: Rational,
    /// Both rows NE.
    pub mu_nn: Rational,
    /// NE below, SW above.
    pub mu_sw_top: Rational,
    /// SW below, NE above.
    pub mu_ne_top_sw_bottom: Rational,
    /// Both rows SW.
    pub mu_ss: Rational,
}

/// Exact conditional means at a rational point of (0, 1).
pub fn conditional_means(p: &Rational) -> Result<ConditionalMeans, AnalysisError> {
    check_interior(p)?;
    let one = Rational::one();
    let q = &one - p; // 1 - p
    let eta = p * &q;
    let denom = &one - &eta; // 1 - p(1-p)
    let alpha = p * p / &denom;
    let theta = p + p * &q * &alpha;
    let e_z1 = &theta + &alpha * p * &q / &denom;
    let mu_nn = &e_z1 / (&one - &theta);
    let mu_sw_top = &alpha * &mu_nn + &alpha / &denom - (&one - &alpha) / p;
    let mu_ss =
        -(rat(2, 1) - p) / p + &alpha * &q * (p + &q * &q) / &denom;
    let mu_ne_top_sw_bottom =
        -(rat(2, 1) - p) / p + &alpha * (&one + &q * &q * &q) / &denom + &alpha * &mu_nn;
    Ok(ConditionalMeans {
        eta,
        alpha,
        theta,
        e_z1,
        mu_nn,
        mu_sw_top,
        mu_ne_top_sw_bottom,
        mu_ss,
    })
}

/// `g2(p)`: half the mean height-2 band increment, assembled from the
/// conditional means weighted by the entry-column law.
pub fn g2(p: &Rational) -> Result<Rational, AnalysisError> {
    let m = conditional_means(p)?;
    let q = Rational::one() - p;
    let e_delta = p * p * &m.mu_nn
        + p * &q * &m.mu_sw_top
        + p * &q * &m.mu_ne_top_sw_bottom
        + &q * &q * &m.mu_ss;
    Ok(e_delta / rat(2, 1))
}

/// The cubic whose root in (1/2, 1) is the height-1 bound `p_1`.
pub fn p1_cubic() -> Poly {
    Poly::from_ints_desc(&[1, -1, 2, -1])
}

/// Published numerator of `g2`.
pub fn g2_numerator() -> Poly {
    Poly::from_ints_desc(&[1, -6, 16, -30, 46, -62, 72, -66, 48, -26, 10, -2])
}

/// Published denominator of `g2`.
pub fn g2_denominator() -> Poly {
    Poly::from_ints_desc(&[2, -8, 18, -28, 32, -28, 18, -8, 2, 0])
}

/// Factored form of the `g2` denominator:
/// `2 (p-1)^2 p (p^2+1) (p^2-p+1)^2`.
pub fn g2_denominator_factored() -> Poly {
    let p_minus_1 = Poly::from_ints(&[-1, 1]);
    let p = Poly::x();
    let p2_plus_1 = Poly::from_ints(&[1, 0, 1]);
    let p2_minus_p_plus_1 = Poly::from_ints(&[1, -1, 1]);
    Poly::constant(rat(2, 1))
        .mul(&p_minus_1)
        .mul(&p_minus_1)
        .mul(&p)
        .mul(&p2_plus_1)
        .mul(&p2_minus_p_plus_1)
        .mul(&p2_minus_p_plus_1)
}

/// The degree-11 polynomial in `q = 1 - p` whose root near 0.427 gives `p_2`.
pub fn q_polynomial() -> Poly {
    Poly::from_ints_desc(&[1, -6, 18, -38, 64, -90, 104, -94, 66, -34, 12, -2])
}

/// Assemble `g2` symbolically as a rational function of `p`.
pub fn g2_rational_fn() -> RationalFn {
    let p = RationalFn::from_poly(Poly::x());
    let one = RationalFn::constant(Rational::one());
    let two = RationalFn::constant(rat(2, 1));
    let q = one.sub(&p);
    let eta = p.mul(&q);
    let denom = one.sub(&eta);
    let alpha = p.mul(&p).div(&denom);
    let theta = p.add(&p.mul(&q).mul(&alpha));
    let e_z1 = theta.add(&alpha.mul(&p).mul(&q).div(&denom));
    let mu_nn = e_z1.div(&one.sub(&theta));
    let mu_sw_top = alpha
        .mul(&mu_nn)
        .add(&alpha.div(&denom))
        .sub(&one.sub(&alpha).div(&p));
    let mu_ss = two
        .sub(&p)
        .neg()
        .div(&p)
        .add(&alpha.mul(&q).mul(&p.add(&q.mul(&q))).div(&denom));
    let mu_ne_top_sw_bottom = two
        .sub(&p)
        .neg()
        .div(&p)
        .add(&alpha.mul(&one.add(&q.mul(&q).mul(&q))).div(&denom))
        .add(&alpha.mul(&mu_nn));
    let e_delta = p
        .mul(&p)
        .mul(&mu_nn)
        .add(&p.mul(&q).mul(&mu_sw_top))
        .add(&p.mul(&q).mul(&mu_ne_top_sw_bottom))
        .add(&q.mul(&q).mul(&mu_ss));
    e_delta.div(&two).reduced()
}

/// Outcome of the symbolic reduction check for the `p_2` polynomial.
#[derive(Clone, Debug)]
pub struct ReductionReport {
    pub ok: bool,
    /// Scalar relating the cleared form to the published polynomial.
    pub scalar: Option<Rational>,
    /// The cleared polynomial, for diffing on failure.
    pub cleared: Poly,
}

/// Verify that clearing `g2(1-p) + 1 = 0` and substituting `p -> 1 - q`
/// reproduces the published degree-11 polynomial up to a nonzero scalar.
pub fn verify_g2_reduction() -> ReductionReport {
    let g2 = g2_rational_fn();
    // g2 = -1 clears to num + den = 0.
    let cleared_in_p = g2.num.add(&g2.den);
    let one_minus_x = Poly::from_ints(&[1, -1]);
    // Express the equation for g2(1 - p), then substitute p = 1 - q.
    let in_p = cleared_in_p.compose(&one_minus_x);
    let in_q = in_p.compose(&one_minus_x);
    let published = q_polynomial();
    let scalar = in_q.scalar_ratio(&published);
    ReductionReport {
        ok: scalar.as_ref().is_some_and(|c| !c.is_zero()),
        scalar,
        cleared: in_q,
    }
}

/// Which identity a root or estimate certifies.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BoundKind {
    P1Cubic,
    P2Degree11,
    MonteCarloK(u32),
}

impl BoundKind {
    pub fn tag(self) -> String {
        match self {
            BoundKind::P1Cubic => "p1-cubic".into(),
            BoundKind::P2Degree11 => "p2-degree-11".into(),
            BoundKind::MonteCarloK(k) => format!("monte-carlo-{k}"),
        }
    }
}

/// A located root (or stochastic estimate) with its certification residual.
#[derive(Clone, Copy, Debug)]
pub struct BoundResult {
    /// The bound itself, on the `p` scale.
    pub root: f64,
    /// `|poly(root)|` for exact kinds; bracket half-width for estimates.
    pub residual: f64,
    pub iterations: u32,
    pub kind: BoundKind,
}

/// Newton iteration safeguarded by a maintained sign-change bracket.
fn newton_bracketed(
    poly: &Poly,
    x0: f64,
    bracket: (f64, f64),
    tol: f64,
    max_iter: u32,
) -> Result<(f64, u32), AnalysisError> {
    let deriv = poly.derivative();
    let (mut lo, mut hi) = bracket;
    let (flo, fhi) = (poly.eval_f64(lo), poly.eval_f64(hi));
    if flo == 0.0 {
        return Ok((lo, 0));
    }
    if fhi == 0.0 {
        return Ok((hi, 0));
    }
    if flo.signum() == fhi.signum() {
        return Err(AnalysisError::NoBracket(lo, hi));
    }
    let mut x = x0.clamp(lo, hi);
    for it in 0..max_iter {
        let f = poly.eval_f64(x);
        if f.abs() <= tol {
            return Ok((x, it));
        }
        // Tighten the bracket with the sign at x.
        if f.signum() == flo.signum() {
            lo = x;
        } else {
            hi = x;
        }
        let d = deriv.eval_f64(x);
        let newton = x - f / d;
        x = if d != 0.0 && newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (hi - lo).abs() < f64::EPSILON * 4.0 {
            return Ok((x, it));
        }
    }
    Ok((x, max_iter))
}

/// Root of the `p_1` cubic in (0.5, 0.6) by safeguarded Newton.
pub fn bound_p1(tolerance: f64) -> Result<BoundResult, AnalysisError> {
    let cubic = p1_cubic();
    let (root, iterations) = newton_bracketed(&cubic, 0.55, (0.5, 0.6), tolerance, 128)?;
    Ok(BoundResult {
        root,
        residual: cubic.eval_f64(root).abs(),
        iterations,
        kind: BoundKind::P1Cubic,
    })
}

/// `p_2 = 1 - q` from Newton on the degree-11 polynomial, started at
/// `q = 0.4`; a sign scan over (0.3, 0.5) provides the bisection fallback.
pub fn bound_p2(tolerance: f64) -> Result<BoundResult, AnalysisError> {
    let poly = q_polynomial();
    let mut bracket = None;
    let mut prev = (0.30f64, poly.eval_f64(0.30));
    for i in 1..=20 {
        let x = 0.30 + i as f64 * 0.01;
        let f = poly.eval_f64(x);
        if prev.1.signum() != f.signum() {
            bracket = Some((prev.0, x));
            break;
        }
        prev = (x, f);
    }
    let bracket = bracket.ok_or(AnalysisError::NoBracket(0.3, 0.5))?;
    let (q_root, iterations) = newton_bracketed(&poly, 0.4, bracket, tolerance, 256)?;
    Ok(BoundResult {
        root: 1.0 - q_root,
        residual: poly.eval_f64(q_root).abs(),
        iterations,
        kind: BoundKind::P2Degree11,
    })
}

/// Monte Carlo mean of the band increment per row, `E[D]/K`.
#[derive(Clone, Copy, Debug)]
pub struct GkEstimate {
    pub mean: f64,
    pub standard_error: f64,
    pub samples: u64,
}

const BATCH_BANDS: usize = 2_000;

/// Estimate `g_K(p)` from `samples` independent band increments.
pub fn estimate_gk(
    p: f64,
    height: u32,
    samples: u64,
    seed: u64,
) -> Result<GkEstimate, AnalysisError> {
    let batches = samples.div_ceil(BATCH_BANDS as u64);
    let results: Vec<Result<(f64, f64, u64), BandError>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let n = BATCH_BANDS
                .min((samples - b * BATCH_BANDS as u64) as usize);
            let trace = band_path(p, derive_seed(seed, b), height, n, DEFAULT_LATERAL_CAP)?;
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for d in trace.deltas() {
                let v = d as f64 / height as f64;
                sum += v;
                sumsq += v * v;
            }
            Ok((sum, sumsq, n as u64))
        })
        .collect();
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    let mut n = 0u64;
    for r in results {
        let (s, sq, c) = r?;
        sum += s;
        sumsq += sq;
        n += c;
    }
    let mean = sum / n as f64;
    let var = (sumsq - sum * sum / n as f64) / (n as f64 - 1.0);
    Ok(GkEstimate {
        mean,
        standard_error: (var / n as f64).sqrt(),
        samples: n,
    })
}

/// Stochastic bound estimate for arbitrary band height.
#[derive(Clone, Copy, Debug)]
pub struct PkEstimate {
    pub bound: BoundResult,
    pub low_confidence: bool,
    pub samples_used: u64,
}

/// Locate `p_K` by bisecting `q -> g_K(q) + 1` with adaptive sampling.
///
/// Each midpoint doubles its sample size until the 99% interval excludes
/// zero; an undecidable midpoint (the root itself, or budget exhaustion)
/// ends the refinement with the current bracket. The returned residual is
/// the bracket half-width on the `p` scale.
pub fn estimate_pk(
    height: u32,
    mc_budget: u64,
    seed: u64,
    target_halfwidth: f64,
) -> Result<PkEstimate, AnalysisError> {
    let (mut lo, mut hi) = (0.30f64, 0.50f64);
    let mut spent = 0u64;
    let mut iterations = 0u32;
    let mut stream = 0u64;
    let mut low_confidence = false;
    let z = 2.576; // 99%
    while (hi - lo) / 2.0 > target_halfwidth {
        let mid = 0.5 * (lo + hi);
        let mut n: u64 = 4_000;
        let mut decided = None;
        loop {
            if spent + n > mc_budget {
                break;
            }
            stream += 1;
            let est = estimate_gk(mid, height, n, derive_seed(seed, stream))?;
            spent += est.samples;
            let h = est.mean + 1.0;
            if h - z * est.standard_error > 0.0 {
                decided = Some(true); // g_K(mid) + 1 > 0: root lies left
                break;
            }
            if h + z * est.standard_error < 0.0 {
                decided = Some(false);
                break;
            }
            n *= 2;
        }
        iterations += 1;
        match decided {
            Some(true) => hi = mid,
            Some(false) => lo = mid,
            None => {
                low_confidence = (hi - lo) / 2.0 > target_halfwidth;
                break;
            }
        }
    }
    let q_mid = 0.5 * (lo + hi);
    Ok(PkEstimate {
        bound: BoundResult {
            root: 1.0 - q_mid,
            residual: (hi - lo) / 2.0,
            iterations,
            kind: BoundKind::MonteCarloK(height),
        },
        low_confidence,
        samples_used: spent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational_to_f64;
    use crate::field::SplitMix64;

    fn random_rationals(count: usize, seed: u64) -> Vec<Rational> {
        let mut rng = SplitMix64::new(seed);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let den = 2 + rng.next_index(96) as i64;
            let num = 1 + rng.next_index((den - 1) as usize) as i64;
            out.push(rat(num, den));
        }
        out
    }

    #[test]
    fn g1_closed_values() {
        assert_eq!(g1(&rat(1, 2)).unwrap(), rat(-1, 2));
        assert_eq!(g1(&rat(2, 3)).unwrap(), rat(5, 6));
        assert_eq!(g1(&rat(1, 1)).unwrap_err(), AnalysisError::Pole(rat(1, 1)));
    }

    #[test]
    fn g1_matches_its_polynomial_form() {
        // g1(p) = (p^3 - p^2 + 2p - 1) / (p (1-p))
        for p in random_rationals(40, 10) {
            let num = p1_cubic().eval(&p);
            let den = &p * (Rational::one() - &p);
            assert_eq!(g1(&p).unwrap(), num / den);
        }
    }

    #[test]
    fn g1_symmetry_identity() {
        // g1(p) + g1(1-p) = -1 exactly.
        for p in random_rationals(100, 4) {
            let q = Rational::one() - &p;
            assert_eq!(g1(&p).unwrap() + g1(&q).unwrap(), rat(-1, 1));
        }
    }

    #[test]
    fn pmf_point_values_and_normalization() {
        assert_eq!(delta1_pmf(&rat(1, 2), 0).unwrap(), rat(1, 4));
        for p in random_rationals(20, 5) {
            let q = Rational::one() - &p;
            // Partial sum over [-N, N] plus the exact geometric tails is 1.
            let n = 25i64;
            let mut acc = Rational::zero();
            for k in -n..=n {
                acc += delta1_pmf(&p, k).unwrap();
            }
            let pos_tail = rational_pow(&p, n as u64 + 2);
            let neg_tail = rational_pow(&q, n as u64 + 1);
            assert_eq!(acc + pos_tail + neg_tail, Rational::one());
        }
    }

    #[test]
    fn pmf_mean_is_g1() {
        // Partial mean plus exact tail corrections equals g1(p):
        // sum_{k>N} k p^{k+1}(1-p) = p^{N+2} ((N+1) - N p) / (1-p)
        // sum_{k>N} k (1-p)^k p   = (1-p)^{N+1} ((N+1) - N (1-p)) / p
        for p in random_rationals(20, 6) {
            let q = Rational::one() - &p;
            let n = 30i64;
            let mut acc = Rational::zero();
            for k in -n..=n {
                acc += rat(k, 1) * delta1_pmf(&p, k).unwrap();
            }
            let np1 = rat(n + 1, 1);
            let pos_tail = rational_pow(&p, n as u64 + 2) * (&np1 - rat(n, 1) * &p) / &q;
            let neg_tail = rational_pow(&q, n as u64 + 1) * (&np1 - rat(n, 1) * &q) / &p;
            assert_eq!(acc + pos_tail - neg_tail, g1(&p).unwrap());
        }
    }

    #[test]
    fn conditional_means_at_one_half() {
        let m = conditional_means(&rat(1, 2)).unwrap();
        assert_eq!(m.alpha, rat(1, 3));
        assert_eq!(m.theta, rat(7, 12));
        assert_eq!(m.e_z1, rat(25, 36));
        assert_eq!(m.mu_nn, rat(5, 3));
        assert_eq!(m.mu_sw_top, rat(-1, 3));
        assert_eq!(m.mu_ss, rat(-17, 6));
        assert_eq!(m.mu_ne_top_sw_bottom, rat(-35, 18));
    }

    #[test]
    fn g2_matches_published_form() {
        let num = g2_numerator();
        let den = g2_denominator();
        for p in random_rationals(50, 77) {
            let expected = num.eval(&p) / den.eval(&p);
            assert_eq!(g2(&p).unwrap(), expected, "at p = {p}");
        }
    }

    #[test]
    fn g2_value_at_one_half() {
        assert_eq!(g2(&rat(1, 2)).unwrap(), rat(-31, 72));
    }

    #[test]
    fn denominator_factorization() {
        assert_eq!(g2_denominator(), g2_denominator_factored());
    }

    #[test]
    fn symbolic_g2_equals_published() {
        let assembled = g2_rational_fn();
        let published = RationalFn::new(g2_numerator(), g2_denominator());
        assert!(assembled.equivalent(&published));
    }

    #[test]
    fn reduction_identity() {
        let report = verify_g2_reduction();
        assert!(report.ok, "cleared poly was {:?}", report.cleared);
        let c = report.scalar.unwrap();
        assert!(!c.is_zero());
        // Spot check the proportionality at q = 1/3.
        let q = rat(1, 3);
        assert_eq!(report.cleared.eval(&q), c * q_polynomial().eval(&q));
    }

    #[test]
    fn p1_root_matches_published_digits() {
        let b = bound_p1(1e-12).unwrap();
        assert!((b.root - 0.5699).abs() < 1e-4);
        assert!(b.residual <= 1e-12);
        // Independent bisection oracle.
        let cubic = p1_cubic();
        let (mut lo, mut hi) = (0.5f64, 0.6f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if cubic.eval_f64(mid).signum() == cubic.eval_f64(lo).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((b.root - 0.5 * (lo + hi)).abs() < 1e-10);
    }

    #[test]
    fn p2_root_matches_published_digits() {
        let b = bound_p2(1e-12).unwrap();
        assert!((b.root - 0.5730).abs() < 1e-4, "p2 = {}", b.root);
        assert!(b.root >= 0.5730 - 1e-4);
        assert!(b.residual <= 1e-12);
        // End-to-end: the assembled g2 evaluates to -1 at 1 - q*.
        let g2_fn = g2_rational_fn();
        let num = g2_fn.num.eval_f64(1.0 - b.root) + g2_fn.den.eval_f64(1.0 - b.root);
        // num + den vanishes at the root of g2 = -1.
        assert!(num.abs() < 1e-8, "num + den = {num}");
    }

    #[test]
    fn gk_estimate_matches_g1_closed_form() {
        let p = 0.5;
        let est = estimate_gk(p, 1, 40_000, 11).unwrap();
        let exact = rational_to_f64(&g1(&Rational::from_float(p).unwrap()).unwrap());
        assert!(
            (est.mean - exact).abs() <= 3.5 * est.standard_error,
            "mean {} vs {} (se {})",
            est.mean,
            exact,
            est.standard_error
        );
    }
}
