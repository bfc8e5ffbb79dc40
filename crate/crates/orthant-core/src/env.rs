//! Degenerate random environments: per-site sets of allowed out-directions.
//!
//! An environment assigns every site `x` a subset `G_x` of the four unit
//! vectors, drawn i.i.d. from a finite-support measure. Two-valued models are
//! realized through the shared uniform field by the threshold rule
//! `G_x = E1` iff `U_x < p`, which couples all values of `p` monotonely.

use crate::algebra::{rational_to_f64, Rational};
use crate::field::UniformField;
use crate::geom::{Region, Site};
use num_traits::{One, Zero};
use thiserror::Error;

/// One of the four axis unit vectors of Z^2.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::Up,
        Direction::Down,
        Direction::Left,
        Direction::Right,
    ];

    /// The lattice step for this direction.
    #[inline]
    pub fn delta(self) -> (i64, i64) {
        match self {
            Direction::Up => (0, 1),
            Direction::Down => (0, -1),
            Direction::Left => (-1, 0),
            Direction::Right => (1, 0),
        }
    }

    /// Negation; an involution pairing up/down and left/right.
    pub fn opposite(self) -> Direction {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }

    /// True when the two directions are perpendicular.
    pub fn orthogonal_to(self, other: Direction) -> bool {
        let (ax, ay) = self.delta();
        let (bx, by) = other.delta();
        ax * bx + ay * by == 0
    }

    #[inline]
    fn bit(self) -> u8 {
        match self {
            Direction::Up => 1,
            Direction::Down => 2,
            Direction::Left => 4,
            Direction::Right => 8,
        }
    }

    pub fn glyph(self) -> char {
        match self {
            Direction::Up => 'U',
            Direction::Down => 'D',
            Direction::Left => 'L',
            Direction::Right => 'R',
        }
    }
}

/// A subset of the four directions, packed into the low 4 bits of a byte.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct EnvSet(u8);

impl EnvSet {
    pub const EMPTY: EnvSet = EnvSet(0);
    /// `{up, right}`
    pub const NE: EnvSet = EnvSet(1 | 8);
    /// `{down, left}`
    pub const SW: EnvSet = EnvSet(2 | 4);
    /// `{up}`
    pub const N: EnvSet = EnvSet(1);
    /// `{left, down, right}`
    pub const SWE: EnvSet = EnvSet(4 | 2 | 8);
    /// `{up, down}`
    pub const UD: EnvSet = EnvSet(1 | 2);
    /// `{left, right}`
    pub const LR: EnvSet = EnvSet(4 | 8);

    /// Build from packed bits; the value must fit in 4 bits.
    pub fn from_bits(bits: u8) -> Option<EnvSet> {
        (bits < 16).then_some(EnvSet(bits))
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn contains(self, d: Direction) -> bool {
        self.0 & d.bit() != 0
    }

    pub fn with(self, d: Direction) -> EnvSet {
        EnvSet(self.0 | d.bit())
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn iter(self) -> impl Iterator<Item = Direction> {
        Direction::ALL.into_iter().filter(move |d| self.contains(*d))
    }

    /// True when this set shares a direction with `other`.
    pub fn intersects(self, other: EnvSet) -> bool {
        self.0 & other.0 != 0
    }

    /// Parse `"UDLR"` subsets, e.g. `"UR"`, or the named aliases
    /// `NE`, `SW`, `N`, `SWE`, `UD`, `LR`, `EMPTY`.
    pub fn parse(text: &str) -> Option<EnvSet> {
        match text {
            "NE" => return Some(EnvSet::NE),
            "SW" => return Some(EnvSet::SW),
            "SWE" => return Some(EnvSet::SWE),
            "EMPTY" => return Some(EnvSet::EMPTY),
            _ => {}
        }
        let mut set = EnvSet::EMPTY;
        for c in text.chars() {
            let d = match c {
                'U' => Direction::Up,
                'D' => Direction::Down,
                'L' => Direction::Left,
                'R' => Direction::Right,
                _ => return None,
            };
            set = set.with(d);
        }
        Some(set)
    }
}

impl std::fmt::Debug for EnvSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_empty() {
            return write!(f, "EMPTY");
        }
        for d in self.iter() {
            write!(f, "{}", d.glyph())?;
        }
        Ok(())
    }
}

impl std::fmt::Display for EnvSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("support probabilities sum to {sum}, expected exactly 1")]
    BadTotal { sum: Rational },
    #[error("probability {p} outside [0, 1]")]
    BadProbability { p: Rational },
    #[error("two-valued model needs distinct environment sets")]
    DegenerateSupport,
    #[error("parameter {p} outside [0, 1]")]
    BadParameter { p: f64 },
}

/// A finite-support measure on environment sets.
///
/// The support order is part of the model identity: realization inverts the
/// CDF in the declared order, so reordering the support changes which sites
/// receive which set under a fixed field.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvironmentModel {
    support: Vec<(EnvSet, Rational)>,
    /// f64 images of the cumulative sums, used for the threshold tests.
    cumulative: Vec<f64>,
}

impl EnvironmentModel {
    pub fn new(support: Vec<(EnvSet, Rational)>) -> Result<Self, ModelError> {
        let mut sum = Rational::zero();
        for (_, p) in &support {
            if p < &Rational::zero() || p > &Rational::one() {
                return Err(ModelError::BadProbability { p: p.clone() });
            }
            sum += p;
        }
        if !sum.is_one() {
            return Err(ModelError::BadTotal { sum });
        }
        let mut acc = Rational::zero();
        let mut cumulative = Vec::with_capacity(support.len());
        for (_, p) in &support {
            acc += p;
            cumulative.push(rational_to_f64(&acc));
        }
        Ok(EnvironmentModel {
            support,
            cumulative,
        })
    }

    pub fn support(&self) -> &[(EnvSet, Rational)] {
        &self.support
    }

    /// The set stored at a uniform value `u` under inverse-CDF sampling.
    #[inline]
    pub fn pick(&self, u: f64) -> EnvSet {
        for (i, c) in self.cumulative.iter().enumerate() {
            if u < *c {
                return self.support[i].0;
            }
        }
        // u below none of the cumulative thresholds: final support element.
        self.support.last().expect("nonempty support").0
    }

    /// Marginal probability that the environment intersects `dirs`.
    pub fn marginal(&self, dirs: EnvSet) -> Rational {
        let mut m = Rational::zero();
        for (set, p) in &self.support {
            if set.intersects(dirs) {
                m += p;
            }
        }
        m
    }
}

/// A two-point measure: `E1` with probability `p`, else `E2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoValuedModel {
    pub e1: EnvSet,
    pub e2: EnvSet,
    pub p: f64,
}

impl TwoValuedModel {
    pub fn new(e1: EnvSet, e2: EnvSet, p: f64) -> Result<Self, ModelError> {
        if e1 == e2 {
            return Err(ModelError::DegenerateSupport);
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(ModelError::BadParameter { p });
        }
        Ok(TwoValuedModel { e1, e2, p })
    }

    /// The orthant model: NE with probability `p`, SW otherwise.
    pub fn orthant(p: f64) -> Result<Self, ModelError> {
        Self::new(EnvSet::NE, EnvSet::SW, p)
    }

    /// `{left, down, right}` with probability `p`, `{up}` otherwise.
    pub fn swe_n(p: f64) -> Result<Self, ModelError> {
        Self::new(EnvSet::SWE, EnvSet::N, p)
    }

    /// `{up, down}` with probability `p`, `{left, right}` otherwise.
    pub fn ud_lr(p: f64) -> Result<Self, ModelError> {
        Self::new(EnvSet::UD, EnvSet::LR, p)
    }

    /// The `(NE, left)` model driving the band-renewal analysis.
    pub fn ne_w(p: f64) -> Result<Self, ModelError> {
        Self::new(EnvSet::NE, EnvSet(4), p)
    }

    #[inline]
    pub fn at(&self, field: &UniformField, x: i64, y: i64) -> EnvSet {
        if field.below(x, y, self.p) {
            self.e1
        } else {
            self.e2
        }
    }

    /// The equivalent general model with `p` taken exactly (as the dyadic
    /// rational the float denotes).
    pub fn to_model(&self) -> EnvironmentModel {
        let p = Rational::from_float(self.p).expect("finite p");
        let q = Rational::one() - &p;
        EnvironmentModel::new(vec![(self.e1, p), (self.e2, q)]).expect("sums to 1")
    }
}

/// Descriptor of where a window came from, echoed in snapshots and exports.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelDescriptor {
    Orthant,
    SweN,
    UdLr,
    NeW,
    Custom(Vec<(EnvSet, Rational)>),
}

impl ModelDescriptor {
    pub fn name(&self) -> &'static str {
        match self {
            ModelDescriptor::Orthant => "orthant",
            ModelDescriptor::SweN => "swe-n",
            ModelDescriptor::UdLr => "ud-lr",
            ModelDescriptor::NeW => "ne-w",
            ModelDescriptor::Custom(_) => "custom",
        }
    }

    pub fn two_valued(&self, p: f64) -> Option<TwoValuedModel> {
        match self {
            ModelDescriptor::Orthant => TwoValuedModel::orthant(p).ok(),
            ModelDescriptor::SweN => TwoValuedModel::swe_n(p).ok(),
            ModelDescriptor::UdLr => TwoValuedModel::ud_lr(p).ok(),
            ModelDescriptor::NeW => TwoValuedModel::ne_w(p).ok(),
            ModelDescriptor::Custom(_) => None,
        }
    }
}

/// Provenance of a realized window.
#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub model: ModelDescriptor,
    /// Decimal parameter string as given by the caller; empty for custom models.
    pub p_text: String,
    pub seed: u64,
}

/// A realized environment on a finite window, 4 bits per site.
#[derive(Clone, PartialEq)]
pub struct EnvironmentWindow {
    region: Region,
    cells: Vec<u8>,
    provenance: Provenance,
}

impl EnvironmentWindow {
    pub fn region(&self) -> Region {
        self.region
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// The environment set at a site inside the region.
    #[inline]
    pub fn get(&self, s: Site) -> EnvSet {
        let i = self.region.index(s);
        let byte = self.cells[i / 2];
        EnvSet(if i.is_multiple_of(2) { byte & 0x0F } else { byte >> 4 })
    }

    /// Raw nibble-packed payload, row-major from `ymin`, low nibble first.
    pub fn packed_cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn from_packed(
        region: Region,
        cells: Vec<u8>,
        provenance: Provenance,
    ) -> Option<EnvironmentWindow> {
        (cells.len() == region.area().div_ceil(2)).then_some(EnvironmentWindow {
            region,
            cells,
            provenance,
        })
    }

    /// Build a window from explicit per-site sets in row-major order.
    pub fn from_cells(region: Region, sets: &[EnvSet], provenance: Provenance) -> Self {
        assert_eq!(sets.len(), region.area());
        let mut w = EnvironmentWindow {
            region,
            cells: vec![0; region.area().div_ceil(2)],
            provenance,
        };
        for (i, set) in sets.iter().enumerate() {
            w.set_index(i, *set);
        }
        w
    }

    #[inline]
    fn set_index(&mut self, i: usize, set: EnvSet) {
        let byte = &mut self.cells[i / 2];
        if i.is_multiple_of(2) {
            *byte = (*byte & 0xF0) | set.bits();
        } else {
            *byte = (*byte & 0x0F) | (set.bits() << 4);
        }
    }
}

impl std::fmt::Debug for EnvironmentWindow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "EnvironmentWindow({:?}, model={}, seed={})",
            self.region,
            self.provenance.model.name(),
            self.provenance.seed
        )
    }
}

/// Realize a two-valued model on a window: `E1` where `U_x < p`.
///
/// The set of `E1` sites is nondecreasing in `p` for a fixed field.
pub fn realize_two_valued(
    field: &UniformField,
    model: &TwoValuedModel,
    region: Region,
) -> EnvironmentWindow {
    let mut w = EnvironmentWindow {
        region,
        cells: vec![0; region.area().div_ceil(2)],
        provenance: Provenance {
            model: ModelDescriptor::Custom(vec![]),
            p_text: format!("{}", model.p),
            seed: field.seed(),
        },
    };
    let mut i = 0;
    for y in region.ymin..=region.ymax {
        for x in region.xmin..=region.xmax {
            w.set_index(i, model.at(field, x, y));
            i += 1;
        }
    }
    w
}

/// Realize a general finite-support model by inverse-CDF over the declared
/// support order. For a two-valued support `(E1, p), (E2, 1-p)` this agrees
/// with [`realize_two_valued`] site for site.
pub fn realize_general(
    field: &UniformField,
    model: &EnvironmentModel,
    region: Region,
) -> EnvironmentWindow {
    let mut w = EnvironmentWindow {
        region,
        cells: vec![0; region.area().div_ceil(2)],
        provenance: Provenance {
            model: ModelDescriptor::Custom(model.support.clone()),
            p_text: String::new(),
            seed: field.seed(),
        },
    };
    let mut i = 0;
    for y in region.ymin..=region.ymax {
        for x in region.xmin..=region.xmax {
            w.set_index(i, model.pick(field.value_at(x, y)));
            i += 1;
        }
    }
    w
}

/// Attach a named provenance to a freshly realized two-valued window.
pub fn realize_named(
    field: &UniformField,
    descriptor: ModelDescriptor,
    p_text: &str,
    p: f64,
    region: Region,
) -> Result<EnvironmentWindow, ModelError> {
    let model = descriptor
        .two_valued(p)
        .ok_or(ModelError::BadParameter { p })?;
    let mut w = realize_two_valued(field, &model, region);
    w.provenance = Provenance {
        model: descriptor,
        p_text: p_text.to_string(),
        seed: field.seed(),
    };
    Ok(w)
}

/// Decide whether every point of the support meets some set `V` of pairwise
/// orthogonal directions, the criterion for the forward cluster being almost
/// surely infinite. In d = 2 there are eight candidates: four singletons and
/// four perpendicular pairs.
pub fn check_theta_plus_one(model: &EnvironmentModel) -> bool {
    let mut candidates: Vec<EnvSet> = Direction::ALL
        .into_iter()
        .map(|d| EnvSet::EMPTY.with(d))
        .collect();
    for a in Direction::ALL {
        for b in Direction::ALL {
            if a.orthogonal_to(b) && (a.bit() < b.bit()) {
                candidates.push(EnvSet::EMPTY.with(a).with(b));
            }
        }
    }
    candidates.iter().any(|v| {
        model
            .support
            .iter()
            .filter(|(_, p)| !p.is_zero())
            .all(|(set, _)| set.intersects(*v))
    })
}

/// Site-indexed access to an environment, possibly lazy and unbounded.
pub trait LocalEnvironment {
    /// The environment at a site, or `None` outside the domain.
    fn env_at(&self, s: Site) -> Option<EnvSet>;
}

impl LocalEnvironment for EnvironmentWindow {
    fn env_at(&self, s: Site) -> Option<EnvSet> {
        self.region.contains(s).then(|| self.get(s))
    }
}

/// A two-valued environment generated on demand from the uniform field;
/// unbounded in every direction.
#[derive(Clone, Copy, Debug)]
pub struct LazyEnvironment {
    pub field: UniformField,
    pub model: TwoValuedModel,
}

impl LocalEnvironment for LazyEnvironment {
    fn env_at(&self, s: Site) -> Option<EnvSet> {
        Some(self.model.at(&self.field, s.x, s.y))
    }
}

/// Wrap a closure as an environment; handy for explicit test patterns.
pub struct FnEnvironment<F: Fn(Site) -> Option<EnvSet>>(pub F);

impl<F: Fn(Site) -> Option<EnvSet>> LocalEnvironment for FnEnvironment<F> {
    fn env_at(&self, s: Site) -> Option<EnvSet> {
        (self.0)(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn envset_constants() {
        assert_eq!(EnvSet::NE.len(), 2);
        assert!(EnvSet::NE.contains(Direction::Up) && EnvSet::NE.contains(Direction::Right));
        assert!(EnvSet::SW.contains(Direction::Down) && EnvSet::SW.contains(Direction::Left));
        assert_eq!(EnvSet::SWE.len(), 3);
        assert_eq!(format!("{}", EnvSet::NE), "UR");
        assert_eq!(EnvSet::parse("UR"), Some(EnvSet::NE));
        assert_eq!(EnvSet::parse("NE"), Some(EnvSet::NE));
        assert_eq!(EnvSet::parse("x"), None);
        // Negation is an involution on directions.
        for d in Direction::ALL {
            assert_eq!(d.opposite().opposite(), d);
        }
    }

    #[test]
    fn model_rejects_bad_total() {
        let err = EnvironmentModel::new(vec![(EnvSet::NE, rat(1, 3)), (EnvSet::SW, rat(1, 3))]);
        assert!(matches!(err, Err(ModelError::BadTotal { .. })));
    }

    #[test]
    fn two_valued_threshold_rule() {
        let field = UniformField::new(7);
        let region = Region::new(-10, 10, -10, 10);
        let all_e1 = realize_two_valued(&field, &TwoValuedModel::orthant(1.0).unwrap(), region);
        let all_e2 = realize_two_valued(&field, &TwoValuedModel::orthant(0.0).unwrap(), region);
        for s in region.sites() {
            assert_eq!(all_e1.get(s), EnvSet::NE);
            assert_eq!(all_e2.get(s), EnvSet::SW);
        }
    }

    #[test]
    fn e1_sites_monotone_in_p() {
        let field = UniformField::new(42);
        let region = Region::new(-20, 20, -20, 20);
        let lo = realize_two_valued(&field, &TwoValuedModel::orthant(0.4).unwrap(), region);
        let hi = realize_two_valued(&field, &TwoValuedModel::orthant(0.6).unwrap(), region);
        for s in region.sites() {
            if lo.get(s) == EnvSet::NE {
                assert_eq!(hi.get(s), EnvSet::NE);
            }
        }
    }

    #[test]
    fn general_agrees_with_two_valued() {
        let field = UniformField::new(5);
        let region = Region::new(0, 30, 0, 30);
        let p = 0.375; // exactly representable
        let two = realize_two_valued(&field, &TwoValuedModel::orthant(p).unwrap(), region);
        let model = EnvironmentModel::new(vec![
            (EnvSet::NE, Rational::from_float(p).unwrap()),
            (EnvSet::SW, Rational::one() - Rational::from_float(p).unwrap()),
        ])
        .unwrap();
        let gen = realize_general(&field, &model, region);
        for s in region.sites() {
            assert_eq!(two.get(s), gen.get(s));
        }
    }

    #[test]
    fn singleton_support_fills_window() {
        let field = UniformField::new(5);
        let region = Region::new(0, 5, 0, 5);
        let model = EnvironmentModel::new(vec![(EnvSet::NE, rat(1, 1))]).unwrap();
        let w = realize_general(&field, &model, region);
        assert!(region.sites().all(|s| w.get(s) == EnvSet::NE));
    }

    #[test]
    fn lazy_consistency_on_subregion() {
        let field = UniformField::new(11);
        let model = TwoValuedModel::orthant(0.55).unwrap();
        let small = realize_two_valued(&field, &model, Region::new(-3, 3, -2, 2));
        let large = realize_two_valued(&field, &model, Region::new(-10, 10, -10, 10));
        for s in Region::new(-3, 3, -2, 2).sites() {
            assert_eq!(small.get(s), large.get(s));
        }
    }

    #[test]
    fn theta_plus_criterion() {
        let orthant = TwoValuedModel::orthant(0.5).unwrap().to_model();
        assert!(check_theta_plus_one(&orthant));
        let swe_n = TwoValuedModel::swe_n(0.5).unwrap().to_model();
        assert!(check_theta_plus_one(&swe_n));
        let ud_lr = TwoValuedModel::ud_lr(0.5).unwrap().to_model();
        assert!(check_theta_plus_one(&ud_lr));
        // {up} / {down} admits no pairwise-orthogonal hitting set.
        let up_down = EnvironmentModel::new(vec![
            (EnvSet::N, rat(1, 2)),
            (EnvSet::EMPTY.with(Direction::Down), rat(1, 2)),
        ])
        .unwrap();
        assert!(!check_theta_plus_one(&up_down));
    }

    #[test]
    fn empirical_marginals_within_four_se() {
        // 10^6 sites from support [({up,down}, 1/3), ({left,right}, 2/3)].
        let model = EnvironmentModel::new(vec![(EnvSet::UD, rat(1, 3)), (EnvSet::LR, rat(2, 3))])
            .unwrap();
        let field = UniformField::new(2024);
        let region = Region::new(0, 999, 0, 999);
        let w = realize_general(&field, &model, region);
        let n = region.area() as f64;
        let ud = region.sites().filter(|s| w.get(*s) == EnvSet::UD).count() as f64;
        let p = 1.0 / 3.0;
        let se = (p * (1.0 - p) / n).sqrt();
        assert!(
            (ud / n - p).abs() < 4.0 * se,
            "freq {} vs {}",
            ud / n,
            p
        );
    }
}
