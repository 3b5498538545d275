//! Periodic ring of qubits and the named regions used throughout the crate.
//!
//! Sites are stored 0-based in `0..n`; any integer label is accepted and reduced mod `n`.
//! Tensor-product convention: the site with the smallest index is the most significant
//! qubit of a basis index.

use crate::error::{domain, Result};
use serde::{Deserialize, Serialize};

/// Largest ring handled by dense simulation.
pub const MAX_SITES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RingLattice {
    n: usize,
}

impl RingLattice {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return domain(format!("ring needs at least 2 sites, got {n}"));
        }
        Ok(RingLattice { n })
    }

    /// Ring of `4L` sites.
    pub fn with_half_width(l: usize) -> Result<Self> {
        if l == 0 {
            return domain("L must be positive");
        }
        RingLattice::new(4 * l)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `L = n / 4`, if `n` is a multiple of 4.
    pub fn half_width(&self) -> Option<usize> {
        (self.n % 4 == 0).then_some(self.n / 4)
    }

    pub fn site(&self, label: i64) -> usize {
        label.rem_euclid(self.n as i64) as usize
    }

    /// Ring distance between two valid 0-based sites.
    pub fn ring_distance(&self, x: usize, y: usize) -> Result<usize> {
        if x >= self.n || y >= self.n {
            return domain(format!("site label outside 0..{}", self.n));
        }
        Ok(ring_distance(x, y, self.n))
    }

    /// Ring distance between two integer labels (reduced mod n).
    pub fn label_distance(&self, x: i64, y: i64) -> usize {
        ring_distance(self.site(x), self.site(y), self.n)
    }

    /// Inclusive label interval `{a, a+1, …, b}` reduced mod n (empty when `b < a`).
    pub fn interval(&self, a: i64, b: i64) -> Region {
        Region::from_labels(*self, a..=b)
    }

    pub fn full(&self) -> Region {
        Region::from_labels(*self, 0..self.n as i64)
    }

    pub fn empty(&self) -> Region {
        Region { n: self.n, sites: Vec::new() }
    }

    /// Named regions of the shift construction (requires `n = 4L`).
    pub fn regions(&self) -> Result<PaperRegions> {
        let l = match self.half_width() {
            Some(l) => l as i64,
            None => return domain(format!("named regions need n = 4L, got n = {}", self.n)),
        };
        if l < 1 {
            return domain("L must be positive");
        }
        Ok(PaperRegions {
            l: l as usize,
            left: self.interval(1, 2 * l),
            right: self.interval(2 * l + 1, 4 * l),
            u0_support: self.interval(2 - l, l - 1),
            ui_support: self.interval(l + 2, 3 * l - 1),
            zero_block_i: self.interval(1 - l, l),
            identity_block_i: self.interval(l + 1, 3 * l),
            zero_block_f: self.interval(-l, l - 1),
            identity_block_f: self.interval(l, 3 * l - 1),
        })
    }
}

/// Shortest distance between two sites on a ring of `n` sites.
pub fn ring_distance(x: usize, y: usize, n: usize) -> usize {
    let d = x.abs_diff(y) % n;
    d.min(n - d)
}

/// Ordered set of distinct sites of one ring.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    n: usize,
    sites: Vec<usize>,
}

impl Region {
    pub fn from_labels(lattice: RingLattice, labels: impl IntoIterator<Item = i64>) -> Region {
        let mut sites: Vec<usize> = labels.into_iter().map(|x| lattice.site(x)).collect();
        sites.sort_unstable();
        sites.dedup();
        Region { n: lattice.n, sites }
    }

    /// Region from 0-based sites; rejects sites outside `0..n`.
    pub fn from_sites(lattice: RingLattice, sites: &[usize]) -> Result<Region> {
        if let Some(&s) = sites.iter().find(|&&s| s >= lattice.n) {
            return domain(format!("site {s} outside ring of {} sites", lattice.n));
        }
        Ok(Region::from_labels(lattice, sites.iter().map(|&s| s as i64)))
    }

    pub fn lattice(&self) -> RingLattice {
        RingLattice { n: self.n }
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.sites.binary_search(&site).is_ok()
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        self.sites.iter().all(|&s| other.contains(s))
    }

    pub fn union(&self, other: &Region) -> Region {
        self.assert_same_ring(other);
        let mut sites: Vec<usize> = self.sites.iter().chain(&other.sites).copied().collect();
        sites.sort_unstable();
        sites.dedup();
        Region { n: self.n, sites }
    }

    pub fn intersection(&self, other: &Region) -> Region {
        self.assert_same_ring(other);
        let sites = self.sites.iter().copied().filter(|&s| other.contains(s)).collect();
        Region { n: self.n, sites }
    }

    pub fn difference(&self, other: &Region) -> Region {
        self.assert_same_ring(other);
        let sites = self.sites.iter().copied().filter(|&s| !other.contains(s)).collect();
        Region { n: self.n, sites }
    }

    pub fn complement(&self) -> Region {
        let sites = (0..self.n).filter(|&s| !self.contains(s)).collect();
        Region { n: self.n, sites }
    }

    /// All sites at ring distance `<= r` from this region.
    pub fn neighborhood(&self, r: usize) -> Region {
        let sites = (0..self.n)
            .filter(|&s| self.sites.iter().any(|&t| ring_distance(s, t, self.n) <= r))
            .collect();
        Region { n: self.n, sites }
    }

    /// Translate every site by `k` (mod n).
    pub fn shifted(&self, k: i64) -> Region {
        Region::from_labels(self.lattice(), self.sites.iter().map(|&s| s as i64 + k))
    }

    /// Position of `site` inside this region's ordered site list.
    pub fn position(&self, site: usize) -> Option<usize> {
        self.sites.binary_search(&site).ok()
    }

    fn assert_same_ring(&self, other: &Region) {
        assert_eq!(self.n, other.n, "regions live on different rings");
    }
}

/// Minimum ring distance between two non-empty regions.
pub fn set_distance(a: &Region, b: &Region) -> Result<usize> {
    if a.n != b.n {
        return domain("regions live on different rings");
    }
    if a.is_empty() || b.is_empty() {
        return domain("distance to an empty region is undefined");
    }
    Ok(a.sites
        .iter()
        .flat_map(|&x| b.sites.iter().map(move |&y| ring_distance(x, y, a.n)))
        .min()
        .unwrap())
}

/// Regions of the shift construction on a ring of `4L` sites (labels taken mod `4L`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaperRegions {
    pub l: usize,
    /// `{1, …, 2L}`
    pub left: Region,
    /// `{2L+1, …, 4L}`
    pub right: Region,
    /// `{2-L, …, L-1}`
    pub u0_support: Region,
    /// `{L+2, …, 3L-1}`
    pub ui_support: Region,
    /// `{1-L, …, L}`: maximally mixed block of the initial state.
    pub zero_block_i: Region,
    /// `{L+1, …, 3L}`: identity block of the initial state.
    pub identity_block_i: Region,
    /// `{-L, …, L-1}`: maximally mixed block of the target state.
    pub zero_block_f: Region,
    /// `{L, …, 3L-1}`: identity block of the target state.
    pub identity_block_f: Region,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l2_regions() {
        let r = RingLattice::with_half_width(2).unwrap().regions().unwrap();
        assert_eq!(r.left.sites(), &[1, 2, 3, 4]);
        assert_eq!(r.right.sites(), &[0, 5, 6, 7]);
        assert_eq!(r.u0_support.sites(), &[0, 1]);
        assert_eq!(r.ui_support.sites(), &[4, 5]);
        assert_eq!(r.zero_block_i.sites(), &[0, 1, 2, 7]);
        assert_eq!(r.identity_block_i.sites(), &[3, 4, 5, 6]);
    }

    #[test]
    fn l1_support_is_empty() {
        let r = RingLattice::with_half_width(1).unwrap().regions().unwrap();
        assert!(r.u0_support.is_empty());
        assert!(r.ui_support.is_empty());
    }

    #[test]
    fn distances() {
        assert_eq!(ring_distance(0, 7, 8), 1);
        assert_eq!(ring_distance(1, 5, 8), 4);
        let lat = RingLattice::new(8).unwrap();
        let a = lat.interval(0, 1);
        let b = lat.interval(5, 6);
        assert_eq!(set_distance(&a, &b).unwrap(), 2);
        let c = Region::from_sites(lat, &[3, 5]).unwrap();
        assert_eq!(set_distance(&a, &c).unwrap(), 2);
        assert_eq!(lat.ring_distance(0, 4).unwrap(), 4);
        assert_eq!(lat.ring_distance(2, 5).unwrap(), 3);
        assert!(lat.ring_distance(0, 8).is_err());
        assert!(set_distance(&a, &lat.empty()).is_err());
    }

    #[test]
    fn out_of_range_site_rejected() {
        let lat = RingLattice::new(8).unwrap();
        assert!(Region::from_sites(lat, &[8]).is_err());
    }

    #[test]
    fn neighborhood_of_bond() {
        let lat = RingLattice::new(12).unwrap();
        let s = lat.interval(0, 1).neighborhood(2);
        assert_eq!(s.sites(), &[0, 1, 2, 3, 10, 11]);
    }
}
