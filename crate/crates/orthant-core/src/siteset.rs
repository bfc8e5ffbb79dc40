//! Dense bit-packed site sets over a rectangular window.

use crate::geom::{Region, Site};

/// A set of sites stored densely over a region, one bit per site.
#[derive(Clone, PartialEq, Eq)]
pub struct SiteSet {
    region: Region,
    words: Vec<u64>,
    len: usize,
}

impl SiteSet {
    pub fn new(region: Region) -> Self {
        SiteSet {
            region,
            words: vec![0; region.area().div_ceil(64)],
            len: 0,
        }
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn contains(&self, s: Site) -> bool {
        if !self.region.contains(s) {
            return false;
        }
        self.contains_index(self.region.index(s))
    }

    #[inline]
    pub fn contains_index(&self, i: usize) -> bool {
        self.words[i / 64] & (1u64 << (i % 64)) != 0
    }

    /// Insert a site; returns true when newly added. The site must be inside
    /// the region.
    #[inline]
    pub fn insert(&mut self, s: Site) -> bool {
        self.insert_index(self.region.index(s))
    }

    #[inline]
    pub fn insert_index(&mut self, i: usize) -> bool {
        let w = &mut self.words[i / 64];
        let bit = 1u64 << (i % 64);
        if *w & bit != 0 {
            return false;
        }
        *w |= bit;
        self.len += 1;
        true
    }

    /// Sites in deterministic row-major order.
    pub fn iter(&self) -> impl Iterator<Item = Site> + '_ {
        self.words.iter().enumerate().flat_map(move |(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(self.region.site_at(wi * 64 + tz))
            })
        })
    }

    /// Intersection with another set over the same region.
    pub fn intersect(&self, rhs: &SiteSet) -> SiteSet {
        assert_eq!(self.region, rhs.region, "region mismatch");
        let words: Vec<u64> = self
            .words
            .iter()
            .zip(&rhs.words)
            .map(|(a, b)| a & b)
            .collect();
        let len = words.iter().map(|w| w.count_ones() as usize).sum();
        SiteSet {
            region: self.region,
            words,
            len,
        }
    }

    pub fn union(&self, rhs: &SiteSet) -> SiteSet {
        assert_eq!(self.region, rhs.region, "region mismatch");
        let words: Vec<u64> = self
            .words
            .iter()
            .zip(&rhs.words)
            .map(|(a, b)| a | b)
            .collect();
        let len = words.iter().map(|w| w.count_ones() as usize).sum();
        SiteSet {
            region: self.region,
            words,
            len,
        }
    }

    pub fn is_subset_of(&self, rhs: &SiteSet) -> bool {
        assert_eq!(self.region, rhs.region, "region mismatch");
        self.words.iter().zip(&rhs.words).all(|(a, b)| a & !b == 0)
    }

    /// True when any member lies on the region border.
    pub fn touches_border(&self) -> bool {
        self.iter().any(|s| self.region.on_border(s))
    }
}

impl std::fmt::Debug for SiteSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SiteSet({} sites in {:?})", self.len, self.region)
    }
}
