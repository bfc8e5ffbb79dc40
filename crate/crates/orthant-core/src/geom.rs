//! Lattice sites and rectangular windows on Z^2.

use serde::{Deserialize, Serialize};

/// A site of the square lattice Z^2.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    pub x: i64,
    pub y: i64,
}

impl Site {
    pub const ORIGIN: Site = Site { x: 0, y: 0 };

    pub fn new(x: i64, y: i64) -> Self {
        Site { x, y }
    }

    /// The site shifted by `(dx, dy)`.
    #[inline]
    pub fn offset(self, dx: i64, dy: i64) -> Self {
        Site {
            x: self.x + dx,
            y: self.y + dy,
        }
    }
}

impl std::fmt::Debug for Site {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl From<(i64, i64)> for Site {
    fn from((x, y): (i64, i64)) -> Self {
        Site { x, y }
    }
}

/// A finite rectangle of sites, bounds inclusive.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Region {
    pub xmin: i64,
    pub xmax: i64,
    pub ymin: i64,
    pub ymax: i64,
}

impl Region {
    /// A rectangle with inclusive bounds. Panics if the bounds are inverted.
    pub fn new(xmin: i64, xmax: i64, ymin: i64, ymax: i64) -> Self {
        assert!(xmin <= xmax && ymin <= ymax, "inverted region bounds");
        Region {
            xmin,
            xmax,
            ymin,
            ymax,
        }
    }

    /// A square window of odd side `size` centred at the origin.
    pub fn centered_square(size: u32) -> Self {
        assert!(size >= 1);
        let r = (size as i64 - 1) / 2;
        Region::new(-r, size as i64 - 1 - r, -r, size as i64 - 1 - r)
    }

    #[inline]
    pub fn width(&self) -> i64 {
        self.xmax - self.xmin + 1
    }

    #[inline]
    pub fn height(&self) -> i64 {
        self.ymax - self.ymin + 1
    }

    pub fn area(&self) -> usize {
        let a = self.width().checked_mul(self.height()).expect("region too large");
        usize::try_from(a).expect("region too large")
    }

    #[inline]
    pub fn contains(&self, s: Site) -> bool {
        s.x >= self.xmin && s.x <= self.xmax && s.y >= self.ymin && s.y <= self.ymax
    }

    /// True when the site lies on the rectangle border.
    #[inline]
    pub fn on_border(&self, s: Site) -> bool {
        s.x == self.xmin || s.x == self.xmax || s.y == self.ymin || s.y == self.ymax
    }

    /// Row-major index of a site, `y` slow, `x` fast. The site must be inside.
    #[inline]
    pub fn index(&self, s: Site) -> usize {
        debug_assert!(self.contains(s));
        ((s.y - self.ymin) * self.width() + (s.x - self.xmin)) as usize
    }

    /// Inverse of [`Region::index`].
    #[inline]
    pub fn site_at(&self, index: usize) -> Site {
        let w = self.width();
        Site {
            x: self.xmin + (index as i64 % w),
            y: self.ymin + (index as i64 / w),
        }
    }

    /// The region shrunk by `margin` on every side.
    ///
    /// Returns `None` when nothing is left.
    pub fn shrink(&self, margin: i64) -> Option<Region> {
        if 2 * margin >= self.width() || 2 * margin >= self.height() {
            return None;
        }
        Some(Region::new(
            self.xmin + margin,
            self.xmax - margin,
            self.ymin + margin,
            self.ymax - margin,
        ))
    }

    /// Row-major iteration over all sites.
    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        let r = *self;
        (r.ymin..=r.ymax).flat_map(move |y| (r.xmin..=r.xmax).map(move |x| Site { x, y }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip() {
        let r = Region::new(-2, 3, -1, 4);
        for (i, s) in r.sites().enumerate() {
            assert_eq!(r.index(s), i);
            assert_eq!(r.site_at(i), s);
        }
        assert_eq!(r.area(), 36);
    }

    #[test]
    fn centered_square_is_symmetric() {
        let r = Region::centered_square(401);
        assert_eq!(r, Region::new(-200, 200, -200, 200));
        assert!(r.contains(Site::ORIGIN));
        assert!(r.on_border(Site::new(200, 0)));
        assert!(!r.on_border(Site::new(199, 0)));
    }

    #[test]
    fn shrink_empty_when_margin_too_large() {
        let r = Region::new(0, 9, 0, 9);
        assert_eq!(r.shrink(4), Some(Region::new(4, 5, 4, 5)));
        assert_eq!(r.shrink(5), None);
    }
}
