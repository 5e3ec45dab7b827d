//! Boxes `[-n, n]^2`, spin configurations with a one-site boundary ring,
//! the coordinatewise order, and regions of the plane.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(i8)]
pub enum Spin {
    Minus = -1,
    Plus = 1,
}

impl Spin {
    #[inline]
    pub fn value(self) -> i8 {
        self as i8
    }

    #[inline]
    pub fn flip(self) -> Spin {
        match self {
            Spin::Minus => Spin::Plus,
            Spin::Plus => Spin::Minus,
        }
    }

    #[inline]
    pub fn from_value(v: i8) -> Option<Spin> {
        match v {
            1 => Some(Spin::Plus),
            -1 => Some(Spin::Minus),
            _ => None,
        }
    }

    #[inline]
    pub fn from_bool(plus: bool) -> Spin {
        if plus {
            Spin::Plus
        } else {
            Spin::Minus
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Spin::Plus => '+',
            Spin::Minus => '-',
        }
    }

    pub fn from_char(c: char) -> Option<Spin> {
        match c {
            '+' => Some(Spin::Plus),
            '-' => Some(Spin::Minus),
            _ => None,
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Parse a word such as `"+-++"`.
pub fn parse_word(s: &str) -> Result<Vec<Spin>> {
    s.chars()
        .map(|c| {
            Spin::from_char(c)
                .ok_or_else(|| Error::InvalidParameter(format!("bad spin character {c:?} in {s:?}")))
        })
        .collect()
}

pub fn format_word(w: &[Spin]) -> String {
    w.iter().map(|s| s.as_char()).collect()
}

/// A point of `Z^2`. Ordered row-major: by `y`, then by `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Site {
    pub x: i32,
    pub y: i32,
}

impl Site {
    pub const ORIGIN: Site = Site { x: 0, y: 0 };

    pub const fn new(x: i32, y: i32) -> Self {
        Site { x, y }
    }

    /// Site `(x, 0)` on the projection line.
    pub const fn line(x: i32) -> Self {
        Site { x, y: 0 }
    }

    pub fn neighbors(self) -> [Site; 4] {
        [
            Site::new(self.x - 1, self.y),
            Site::new(self.x + 1, self.y),
            Site::new(self.x, self.y - 1),
            Site::new(self.x, self.y + 1),
        ]
    }

    #[inline]
    pub fn parity(self) -> u8 {
        ((self.x + self.y).rem_euclid(2)) as u8
    }
}

impl Ord for Site {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for Site {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The square `[-n, n]^2` together with its one-site boundary ring.
///
/// Interior sites are indexed row-major from the bottom-left corner:
/// `index(x, y) = (y + n) * (2n + 1) + (x + n)`. Storage uses a padded grid
/// of side `2n + 3` that also holds the ring; the four ring corners are not
/// sites and hold `0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SquareBox {
    n: usize,
}

impl SquareBox {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("box half-width must be positive".into()));
        }
        if n > 4096 {
            return Err(Error::InvalidParameter(format!("box half-width {n} too large")));
        }
        Ok(SquareBox { n })
    }

    #[inline]
    pub fn half_width(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn side(&self) -> usize {
        2 * self.n + 1
    }

    #[inline]
    pub fn site_count(&self) -> usize {
        self.side() * self.side()
    }

    #[inline]
    pub fn padded_side(&self) -> usize {
        self.side() + 2
    }

    #[inline]
    pub fn contains(&self, s: Site) -> bool {
        let n = self.n as i32;
        s.x.abs() <= n && s.y.abs() <= n
    }

    /// True for the boundary-ring sites: outside the box but adjacent to it.
    #[inline]
    pub fn on_ring(&self, s: Site) -> bool {
        let n = self.n as i32;
        let (ax, ay) = (s.x.abs(), s.y.abs());
        (ax == n + 1 && ay <= n) || (ay == n + 1 && ax <= n)
    }

    pub fn index(&self, s: Site) -> Option<usize> {
        if !self.contains(s) {
            return None;
        }
        let n = self.n as i32;
        Some(((s.y + n) as usize) * self.side() + (s.x + n) as usize)
    }

    pub fn site(&self, index: usize) -> Option<Site> {
        if index >= self.site_count() {
            return None;
        }
        let n = self.n as i32;
        let side = self.side();
        Some(Site::new((index % side) as i32 - n, (index / side) as i32 - n))
    }

    /// Interior sites in index order.
    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.site_count()).map(move |i| self.site(i).expect("in range"))
    }

    /// Boundary-ring sites in row-major order.
    pub fn ring_sites(&self) -> Vec<Site> {
        let m = self.n as i32 + 1;
        let mut out = Vec::with_capacity(4 * self.side());
        for y in -m..=m {
            for x in -m..=m {
                let s = Site::new(x, y);
                if self.on_ring(s) {
                    out.push(s);
                }
            }
        }
        out
    }

    /// Position of an interior or ring site in the padded grid.
    #[inline]
    pub(crate) fn padded(&self, s: Site) -> Option<usize> {
        let m = self.n as i32 + 1;
        if s.x.abs() > m || s.y.abs() > m {
            return None;
        }
        Some(((s.y + m) as usize) * self.padded_side() + (s.x + m) as usize)
    }

    #[inline]
    pub(crate) fn padded_site(&self, p: usize) -> Site {
        let m = self.n as i32 + 1;
        let ps = self.padded_side();
        Site::new((p % ps) as i32 - m, (p / ps) as i32 - m)
    }
}

/// How a site of the padded grid participates in dynamics and energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SiteRole {
    /// Interior, updated by dynamics.
    Free,
    /// Interior, frozen to its spin; counted inside the volume for energy.
    Clamped,
    /// Interior position removed from the volume; acts as boundary.
    Masked,
    /// Boundary ring.
    Boundary,
    /// Ring corner; not a site.
    Corner,
}

impl SiteRole {
    #[inline]
    pub fn is_frozen(self) -> bool {
        !matches!(self, SiteRole::Free)
    }
}

/// A spin assignment on a box, its boundary ring, and optional clamps.
///
/// Clamped sites never change under any dynamics in this crate. Masked
/// sites realise a general finite volume inside the square: they are held
/// fixed and, for the Hamiltonian, belong to the boundary.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfig {
    geom: SquareBox,
    cells: Vec<i8>,
    roles: Vec<SiteRole>,
}

impl SpinConfig {
    /// Interior all `interior`, boundary ring all `boundary`, no clamps.
    pub fn uniform(geom: SquareBox, interior: Spin, boundary: Spin) -> Self {
        let ps = geom.padded_side();
        let mut cells = vec![0i8; ps * ps];
        let mut roles = vec![SiteRole::Corner; ps * ps];
        for (p, (c, r)) in cells.iter_mut().zip(roles.iter_mut()).enumerate() {
            let s = geom.padded_site(p);
            if geom.contains(s) {
                *c = interior.value();
                *r = SiteRole::Free;
            } else if geom.on_ring(s) {
                *c = boundary.value();
                *r = SiteRole::Boundary;
            }
        }
        SpinConfig { geom, cells, roles }
    }

    /// Interior from a row-major slice, boundary ring uniform.
    pub fn from_interior(geom: SquareBox, interior: &[Spin], boundary: Spin) -> Result<Self> {
        if interior.len() != geom.site_count() {
            return Err(Error::Dimension(format!(
                "{} spins for a box of {} sites",
                interior.len(),
                geom.site_count()
            )));
        }
        let mut c = SpinConfig::uniform(geom, Spin::Plus, boundary);
        for (s, &v) in geom.sites().zip(interior) {
            let p = geom.padded(s).expect("interior");
            c.cells[p] = v.value();
        }
        Ok(c)
    }

    #[inline]
    pub fn geometry(&self) -> SquareBox {
        self.geom
    }

    fn padded_checked(&self, s: Site) -> Result<usize> {
        match self.geom.padded(s) {
            Some(p) if self.roles[p] != SiteRole::Corner => Ok(p),
            _ => Err(Error::Dimension(format!(
                "site ({},{}) is neither inside box n={} nor on its ring",
                s.x,
                s.y,
                self.geom.half_width()
            ))),
        }
    }

    /// Spin at an interior or ring site.
    pub fn get(&self, s: Site) -> Result<Spin> {
        let p = self.padded_checked(s)?;
        Ok(Spin::from_value(self.cells[p]).expect("valid spin"))
    }

    /// Spin at an interior or ring site; panics outside.
    #[inline]
    pub fn spin(&self, s: Site) -> Spin {
        self.get(s).expect("site inside box or ring")
    }

    pub fn role(&self, s: Site) -> Result<SiteRole> {
        Ok(self.roles[self.padded_checked(s)?])
    }

    /// Overwrite a free interior site or a ring site.
    pub fn set(&mut self, s: Site, v: Spin) -> Result<()> {
        let p = self.padded_checked(s)?;
        if matches!(self.roles[p], SiteRole::Clamped | SiteRole::Masked) {
            return Err(Error::ClampViolation { x: s.x, y: s.y });
        }
        self.cells[p] = v.value();
        Ok(())
    }

    fn freeze(&mut self, s: Site, v: Spin, role: SiteRole) -> Result<()> {
        if !self.geom.contains(s) {
            return Err(Error::Dimension(format!(
                "cannot freeze ({},{}) outside box n={}",
                s.x,
                s.y,
                self.geom.half_width()
            )));
        }
        let p = self.geom.padded(s).expect("inside");
        self.cells[p] = v.value();
        self.roles[p] = role;
        Ok(())
    }

    /// Freeze an interior site to `v` (conditioning).
    pub fn clamp(&mut self, s: Site, v: Spin) -> Result<()> {
        self.freeze(s, v, SiteRole::Clamped)
    }

    /// Remove an interior site from the volume, holding it at `v`.
    pub fn mask(&mut self, s: Site, v: Spin) -> Result<()> {
        self.freeze(s, v, SiteRole::Masked)
    }

    /// Make a frozen interior site free again (its spin is kept).
    pub fn release(&mut self, s: Site) -> Result<()> {
        if !self.geom.contains(s) {
            return Err(Error::Dimension(format!("({},{}) outside box", s.x, s.y)));
        }
        let p = self.geom.padded(s).expect("inside");
        self.roles[p] = SiteRole::Free;
        Ok(())
    }

    pub fn is_frozen(&self, s: Site) -> bool {
        self.geom
            .padded(s)
            .map(|p| self.roles[p].is_frozen())
            .unwrap_or(true)
    }

    pub fn set_boundary(&mut self, v: Spin) {
        for (c, r) in self.cells.iter_mut().zip(&self.roles) {
            if *r == SiteRole::Boundary {
                *c = v.value();
            }
        }
    }

    /// Set every free interior site to `v`.
    pub fn fill_free(&mut self, v: Spin) {
        for (c, r) in self.cells.iter_mut().zip(&self.roles) {
            if *r == SiteRole::Free {
                *c = v.value();
            }
        }
    }

    /// Free interior sites in index order.
    pub fn free_sites(&self) -> Vec<Site> {
        self.geom
            .sites()
            .filter(|&s| self.roles[self.geom.padded(s).expect("inside")] == SiteRole::Free)
            .collect()
    }

    pub fn free_count(&self) -> usize {
        self.roles.iter().filter(|r| **r == SiteRole::Free).count()
    }

    /// Interior spins in index order.
    pub fn interior(&self) -> Vec<Spin> {
        self.geom.sites().map(|s| self.spin(s)).collect()
    }

    /// Mean interior spin.
    pub fn magnetization(&self) -> f64 {
        let sum: i64 = self
            .geom
            .sites()
            .map(|s| self.cells[self.geom.padded(s).expect("inside")] as i64)
            .sum();
        sum as f64 / self.geom.site_count() as f64
    }

    /// Negate every spin: interior, boundary and clamps.
    pub fn flipped(&self) -> SpinConfig {
        let mut out = self.clone();
        out.cells.iter_mut().for_each(|c| *c = -*c);
        out
    }

    /// Coordinatewise order on interior and boundary sites.
    pub fn leq(&self, other: &SpinConfig) -> Result<bool> {
        if self.geom != other.geom {
            return Err(Error::Dimension(format!(
                "boxes n={} and n={} differ",
                self.geom.half_width(),
                other.geom.half_width()
            )));
        }
        Ok(self.cells.iter().zip(&other.cells).all(|(a, b)| a <= b))
    }

    #[inline]
    pub(crate) fn cells_mut(&mut self) -> &mut [i8] {
        &mut self.cells
    }

    #[inline]
    pub(crate) fn roles(&self) -> &[SiteRole] {
        &self.roles
    }
}

/// `a <= b` coordinatewise; boxes must match.
pub fn leq(a: &SpinConfig, b: &SpinConfig) -> Result<bool> {
    a.leq(b)
}

/// Subsets of the plane used for conditioning and events.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    /// `[a, b] x {0}`.
    LineSegment { a: i32, b: i32 },
    /// `(-inf, -1] x {0}`, truncated to the box.
    HalfLine,
    /// `{(x, y) : x >= offset, x >= 0, |y| <= e^(theta |x|)}`.
    Cone { theta: f64, offset: i32 },
    Sites(Vec<Site>),
}

impl Region {
    pub fn contains(&self, s: Site) -> bool {
        match self {
            Region::LineSegment { a, b } => s.y == 0 && *a <= s.x && s.x <= *b,
            Region::HalfLine => s.y == 0 && s.x <= -1,
            Region::Cone { theta, offset } => {
                s.x >= *offset && s.x >= 0 && (s.y.abs() as f64) <= (theta * s.x.abs() as f64).exp()
            }
            Region::Sites(v) => v.contains(&s),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Region::LineSegment { a, b } if a > b => Err(Error::InvalidParameter(format!(
                "segment [{a}, {b}] is empty"
            ))),
            Region::Cone { theta, .. } if theta.is_nan() || *theta <= 0.0 => Err(Error::InvalidParameter(format!(
                "cone opening {theta} must be positive"
            ))),
            _ => Ok(()),
        }
    }
}

/// Sorted (row-major) in-box sites of a region. A region entirely outside
/// the box yields an empty list.
pub fn region_sites(r: &Region, geom: &SquareBox) -> Result<Vec<Site>> {
    r.validate()?;
    let n = geom.half_width() as i32;
    let mut out: Vec<Site> = match r {
        Region::LineSegment { a, b } => ((*a).max(-n)..=(*b).min(n)).map(Site::line).collect(),
        Region::HalfLine => (-n..=-1).map(Site::line).collect(),
        Region::Cone { .. } => geom.sites().filter(|&s| r.contains(s)).collect(),
        Region::Sites(v) => v.iter().copied().filter(|&s| geom.contains(s)).collect(),
    };
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// What lies to the left of an explicit past word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tail {
    AllPlus,
    AllMinus,
    /// Spins at `-(len + m), ..., -(len + 1)`, left to right; anything
    /// further left is left unconditioned.
    Explicit(Vec<Spin>),
}

impl Tail {
    pub fn label(&self) -> &'static str {
        match self {
            Tail::AllPlus => "plus",
            Tail::AllMinus => "minus",
            Tail::Explicit(_) => "explicit",
        }
    }
}

/// A one-sided past `w_{-len} ... w_{-1}` plus a far-past tail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PastWindow {
    /// `word[0]` sits at `-len`, `word[len - 1]` at `-1`.
    pub word: Vec<Spin>,
    pub tail: Tail,
}

impl PastWindow {
    pub fn new(word: Vec<Spin>, tail: Tail) -> Self {
        PastWindow { word, tail }
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// Line assignments `(x, spin)` for `x = -cond_len, ..., -1`.
    pub fn assignments(&self, cond_len: usize) -> Result<Vec<(i32, Spin)>> {
        let len = self.word.len();
        if len > cond_len {
            return Err(Error::InvalidParameter(format!(
                "past word of length {len} longer than conditioning window {cond_len}"
            )));
        }
        let mut out = Vec::with_capacity(cond_len);
        for x in -(cond_len as i32)..=-1 {
            let d = (-x) as usize; // distance into the past, 1-based
            let spin = if d <= len {
                Some(self.word[len - d])
            } else {
                let beyond = d - len; // 1-based position in the tail
                match &self.tail {
                    Tail::AllPlus => Some(Spin::Plus),
                    Tail::AllMinus => Some(Spin::Minus),
                    Tail::Explicit(ext) => {
                        if beyond <= ext.len() {
                            Some(ext[ext.len() - beyond])
                        } else {
                            None
                        }
                    }
                }
            };
            if let Some(v) = spin {
                out.push((x, v));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b(n: usize) -> SquareBox {
        SquareBox::new(n).unwrap()
    }

    #[test]
    fn box_counts_and_neighbors() {
        let g = b(3);
        assert_eq!(g.site_count(), 49);
        assert_eq!(g.ring_sites().len(), 4 * 7);
        for s in g.sites() {
            for t in s.neighbors() {
                assert!(g.contains(t) || g.on_ring(t));
            }
        }
        assert!(SquareBox::new(0).is_err());
    }

    #[test]
    fn extremal_configs_are_ordered() {
        let g = b(2);
        let lo = SpinConfig::uniform(g, Spin::Minus, Spin::Minus);
        let hi = SpinConfig::uniform(g, Spin::Plus, Spin::Plus);
        assert!(lo.leq(&hi).unwrap());
        assert!(!hi.leq(&lo).unwrap());
        assert!(lo.leq(&lo).unwrap());
    }

    #[test]
    fn incomparable_pair() {
        let g = b(2);
        let mut a = SpinConfig::uniform(g, Spin::Minus, Spin::Minus);
        let mut c = a.clone();
        a.set(Site::ORIGIN, Spin::Plus).unwrap();
        c.set(Site::new(1, 0), Spin::Plus).unwrap();
        assert!(!a.leq(&c).unwrap());
        assert!(!c.leq(&a).unwrap());
    }

    #[test]
    fn mismatched_boxes() {
        let a = SpinConfig::uniform(b(2), Spin::Plus, Spin::Plus);
        let c = SpinConfig::uniform(b(3), Spin::Plus, Spin::Plus);
        assert!(matches!(a.leq(&c), Err(Error::Dimension(_))));
    }

    #[test]
    fn boundary_counts_in_order() {
        let g = b(1);
        let a = SpinConfig::uniform(g, Spin::Plus, Spin::Minus);
        let c = SpinConfig::uniform(g, Spin::Plus, Spin::Plus);
        assert!(a.leq(&c).unwrap());
        assert!(!c.leq(&a).unwrap());
    }

    #[test]
    fn clamps_reject_set() {
        let g = b(1);
        let mut a = SpinConfig::uniform(g, Spin::Plus, Spin::Plus);
        a.clamp(Site::ORIGIN, Spin::Minus).unwrap();
        assert_eq!(a.spin(Site::ORIGIN), Spin::Minus);
        assert!(matches!(
            a.set(Site::ORIGIN, Spin::Plus),
            Err(Error::ClampViolation { x: 0, y: 0 })
        ));
        assert_eq!(a.free_count(), 8);
        a.release(Site::ORIGIN).unwrap();
        assert_eq!(a.free_count(), 9);
    }

    #[test]
    fn segment_sites() {
        let s = region_sites(&Region::LineSegment { a: -2, b: -1 }, &b(4)).unwrap();
        assert_eq!(s, vec![Site::new(-2, 0), Site::new(-1, 0)]);
        let t = region_sites(&Region::LineSegment { a: 10, b: 12 }, &b(4)).unwrap();
        assert!(t.is_empty());
        assert!(region_sites(&Region::LineSegment { a: 1, b: 0 }, &b(4)).is_err());
        let h = region_sites(&Region::HalfLine, &b(3)).unwrap();
        assert_eq!(h.len(), 3);
    }

    #[test]
    fn steep_cone_is_half_plane_with_offset() {
        let g = b(4);
        let c = region_sites(&Region::Cone { theta: 50.0, offset: 1 }, &g).unwrap();
        let half: Vec<Site> = g.sites().filter(|s| s.x >= 1).collect();
        assert_eq!(c, half);
    }

    #[test]
    fn narrow_cone_keeps_three_rows() {
        // e^{theta x} >= 1, so even a nearly flat cone is a strip |y| <= 1.
        let g = b(4);
        let c = region_sites(&Region::Cone { theta: 0.01, offset: 0 }, &g).unwrap();
        let strip: Vec<Site> = g.sites().filter(|s| s.x >= 0 && s.y.abs() <= 1).collect();
        assert_eq!(c, strip);
    }

    #[test]
    fn cone_column_width() {
        // e^{0.5 * 4} = 7.389..., so column x = 4 keeps |y| <= 7.
        let r = Region::Cone { theta: 0.5, offset: 0 };
        for y in -7..=7 {
            assert!(r.contains(Site::new(4, y)));
        }
        assert!(!r.contains(Site::new(4, 8)));
        assert!(!r.contains(Site::new(-1, 0)));
        let g = b(8);
        let col: Vec<Site> = region_sites(&r, &g)
            .unwrap()
            .into_iter()
            .filter(|s| s.x == 4)
            .collect();
        assert_eq!(col.len(), 15);
        assert!(region_sites(&Region::Cone { theta: 0.0, offset: 0 }, &g).is_err());
    }

    #[test]
    fn past_window_assignments() {
        let w = PastWindow::new(parse_word("+-").unwrap(), Tail::AllMinus);
        let a = w.assignments(4).unwrap();
        assert_eq!(
            a,
            vec![(-4, Spin::Minus), (-3, Spin::Minus), (-2, Spin::Plus), (-1, Spin::Minus)]
        );
        let e = PastWindow::new(vec![Spin::Plus], Tail::Explicit(vec![Spin::Minus]));
        assert_eq!(e.assignments(3).unwrap(), vec![(-2, Spin::Minus), (-1, Spin::Plus)]);
        assert!(w.assignments(1).is_err());
    }

    fn arb_config(n: usize) -> impl Strategy<Value = SpinConfig> {
        let g = b(n);
        let ring = g.ring_sites().len();
        (
            proptest::collection::vec(any::<bool>(), g.site_count()),
            proptest::collection::vec(any::<bool>(), ring),
        )
            .prop_map(move |(inner, outer)| {
                let spins: Vec<Spin> = inner.into_iter().map(Spin::from_bool).collect();
                let mut c = SpinConfig::from_interior(g, &spins, Spin::Plus).unwrap();
                for (s, v) in g.ring_sites().into_iter().zip(outer) {
                    c.set(s, Spin::from_bool(v)).unwrap();
                }
                c
            })
    }

    proptest! {
        #[test]
        fn index_round_trip(n in 1usize..20, i in 0usize..2000) {
            let g = b(n);
            let i = i % g.site_count();
            let s = g.site(i).unwrap();
            prop_assert_eq!(g.index(s), Some(i));
            let p = g.padded(s).unwrap();
            prop_assert_eq!(g.padded_site(p), s);
        }

        #[test]
        fn leq_is_a_partial_order(a in arb_config(2), c in arb_config(2), d in arb_config(2)) {
            prop_assert!(a.leq(&a).unwrap());
            if a.leq(&c).unwrap() && c.leq(&a).unwrap() {
                prop_assert_eq!(&a, &c);
            }
            if a.leq(&c).unwrap() && c.leq(&d).unwrap() {
                prop_assert!(a.leq(&d).unwrap());
            }
        }

        #[test]
        fn flip_reverses_order(a in arb_config(2), c in arb_config(2)) {
            prop_assert_eq!(a.flipped().flipped(), a.clone());
            let lo = SpinConfig::uniform(b(2), Spin::Minus, Spin::Minus);
            let hi = SpinConfig::uniform(b(2), Spin::Plus, Spin::Plus);
            prop_assert!(lo.leq(&a).unwrap() && a.leq(&hi).unwrap());
            if a.leq(&c).unwrap() {
                prop_assert!(c.flipped().leq(&a.flipped()).unwrap());
            }
        }
    }
}
