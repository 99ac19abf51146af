//! Occupation-number bases of the symmetric Fock space over `d` modes.
//!
//! States are occupation tuples `(n_0, …, n_{d-1})`. Within one number
//! sector they are listed in descending lexicographic order, so for `d = 2`
//! and two particles the order is `(2,0), (1,1), (0,2)`. A truncated basis
//! concatenates the sectors `0, 1, …, n_max` in increasing particle number,
//! which keeps every number-conserving operator block diagonal.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default upper bound on the number of basis states.
pub const DEFAULT_CAPACITY: usize = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    /// All tuples with total occupation exactly `n`.
    Fixed(usize),
    /// All tuples with total occupation at most `n_max`.
    Truncated(usize),
}

impl Sector {
    pub fn max_particles(self) -> usize {
        match self {
            Sector::Fixed(n) | Sector::Truncated(n) => n,
        }
    }

    pub fn min_particles(self) -> usize {
        match self {
            Sector::Fixed(n) => n,
            Sector::Truncated(_) => 0,
        }
    }

    pub fn contains(self, total: usize) -> bool {
        total >= self.min_particles() && total <= self.max_particles()
    }
}

/// Number of occupation tuples of `modes` modes summing to `total`,
/// i.e. `C(total + modes - 1, modes - 1)`, saturating in `u128`.
pub fn sector_dimension(modes: usize, total: usize) -> u128 {
    if modes == 0 {
        return (total == 0) as u128;
    }
    let k = (modes - 1) as u128;
    let mut acc: u128 = 1;
    // C(total + k, k) built incrementally: acc_j = C(total + j, j)
    for j in 1..=k {
        let num = total as u128 + j;
        acc = match acc.checked_mul(num) {
            Some(v) => v / j,
            None => return u128::MAX,
        };
    }
    acc
}

pub fn truncated_dimension(modes: usize, n_max: usize) -> u128 {
    // sum_k C(k + d - 1, d - 1) = C(n_max + d, d)
    sector_dimension(modes + 1, n_max)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBasis {
    d: usize,
    sector: Sector,
    /// Flattened occupation tuples, `d` entries per state.
    occ: Vec<u16>,
    /// `counts[k][s]` = number of tuples of `k` modes summing to `s`.
    counts: Vec<Vec<usize>>,
    /// Start index of each particle-number sector, indexed by total.
    offsets: Vec<usize>,
}

impl FockBasis {
    pub fn new(d: usize, sector: Sector) -> Result<Self> {
        Self::with_capacity(d, sector, DEFAULT_CAPACITY)
    }

    pub fn with_capacity(d: usize, sector: Sector, cap: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Invalid("mode count must be positive".into()));
        }
        let n_top = sector.max_particles();
        if n_top > u16::MAX as usize {
            return Err(Error::Invalid(format!("particle number {n_top} too large")));
        }
        let dim = match sector {
            Sector::Fixed(n) => sector_dimension(d, n),
            Sector::Truncated(n) => truncated_dimension(d, n),
        };
        if dim > cap as u128 {
            return Err(Error::Capacity { dim, cap });
        }
        let dim = dim as usize;

        let mut counts = vec![vec![0usize; n_top + 1]; d + 1];
        counts[0][0] = 1;
        for k in 1..=d {
            for s in 0..=n_top {
                let prev = if s > 0 { counts[k][s - 1] } else { 0 };
                counts[k][s] = prev.saturating_add(counts[k - 1][s]);
            }
        }

        let mut offsets = vec![0usize; n_top + 2];
        let mut occ = Vec::with_capacity(dim * d);
        let mut running = 0;
        for total in 0..=n_top {
            offsets[total] = running;
            if !sector.contains(total) {
                continue;
            }
            let mut tuple = vec![0u16; d];
            tuple[0] = total as u16;
            loop {
                occ.extend_from_slice(&tuple);
                running += 1;
                if !next_descending(&mut tuple) {
                    break;
                }
            }
        }
        offsets[n_top + 1] = running;
        debug_assert_eq!(running, dim);
        Ok(Self { d, sector, occ, counts, offsets })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn dim(&self) -> usize {
        self.occ.len() / self.d
    }

    pub fn n_max(&self) -> usize {
        self.sector.max_particles()
    }

    pub fn is_truncated(&self) -> bool {
        matches!(self.sector, Sector::Truncated(_))
    }

    pub fn occupation(&self, index: usize) -> &[u16] {
        &self.occ[index * self.d..(index + 1) * self.d]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u16]> + '_ {
        self.occ.chunks_exact(self.d)
    }

    pub fn total(&self, index: usize) -> usize {
        self.occupation(index).iter().map(|&x| x as usize).sum()
    }

    /// Index range of the states with total occupation `total`; empty when
    /// the sector is not part of the basis.
    pub fn sector_range(&self, total: usize) -> std::ops::Range<usize> {
        if !self.sector.contains(total) {
            return 0..0;
        }
        self.offsets[total]..self.offsets[total + 1]
    }

    /// Particle numbers present in the basis.
    pub fn totals(&self) -> std::ops::RangeInclusive<usize> {
        self.sector.min_particles()..=self.sector.max_particles()
    }

    pub fn index_of(&self, occ: &[u16]) -> Option<usize> {
        if occ.len() != self.d {
            return None;
        }
        let total: usize = occ.iter().map(|&x| x as usize).sum();
        if !self.sector.contains(total) {
            return None;
        }
        let mut rank = 0usize;
        let mut remaining = total;
        for (p, &np) in occ.iter().enumerate().take(self.d - 1) {
            let np = np as usize;
            if np < remaining {
                rank += self.counts[self.d - p][remaining - np - 1];
            }
            remaining -= np;
        }
        Some(self.offsets[total] + rank)
    }
}

/// Advances `tuple` to its successor in descending lexicographic order
/// within the same sector. Returns `false` after the last tuple.
fn next_descending(tuple: &mut [u16]) -> bool {
    let d = tuple.len();
    if d < 2 {
        return false;
    }
    let Some(p) = (0..d - 1).rev().find(|&p| tuple[p] > 0) else {
        return false;
    };
    let tail: u16 = tuple[p + 1..].iter().sum();
    tuple[p] -= 1;
    for x in tuple[p + 1..].iter_mut() {
        *x = 0;
    }
    tuple[p + 1] = tail + 1;
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_fixed_sector() {
        let b = FockBasis::new(1, Sector::Fixed(3)).unwrap();
        assert_eq!(b.dim(), 1);
        assert_eq!(b.occupation(0), &[3]);
    }

    #[test]
    fn two_modes_two_particles_in_order() {
        let b = FockBasis::new(2, Sector::Fixed(2)).unwrap();
        let states: Vec<Vec<u16>> = b.iter().map(|s| s.to_vec()).collect();
        assert_eq!(states, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn truncated_three_modes() {
        let b = FockBasis::new(3, Sector::Truncated(2)).unwrap();
        assert_eq!(b.dim(), 10);
        assert_eq!(b.sector_range(0), 0..1);
        assert_eq!(b.sector_range(1), 1..4);
        assert_eq!(b.sector_range(2), 4..10);
        assert_eq!(b.occupation(4), &[2, 0, 0]);
        assert_eq!(b.occupation(9), &[0, 0, 2]);
    }

    #[test]
    fn dimensions_match_binomials() {
        for d in 1..=5 {
            for n in 0..=7 {
                let f = FockBasis::new(d, Sector::Fixed(n)).unwrap();
                assert_eq!(f.dim() as u128, sector_dimension(d, n));
                let t = FockBasis::new(d, Sector::Truncated(n)).unwrap();
                let sum: u128 = (0..=n).map(|k| sector_dimension(d, k)).sum();
                assert_eq!(t.dim() as u128, sum);
            }
        }
    }

    #[test]
    fn index_map_is_bijective() {
        for (d, sector) in [(3, Sector::Truncated(5)), (4, Sector::Fixed(6)), (1, Sector::Truncated(4))] {
            let b = FockBasis::new(d, sector).unwrap();
            for i in 0..b.dim() {
                assert_eq!(b.index_of(b.occupation(i)), Some(i));
            }
        }
    }

    #[test]
    fn order_is_descending_lexicographic() {
        let b = FockBasis::new(3, Sector::Fixed(4)).unwrap();
        for i in 1..b.dim() {
            assert!(b.occupation(i - 1) > b.occupation(i));
        }
    }

    #[test]
    fn rejects_out_of_sector_tuples() {
        let b = FockBasis::new(2, Sector::Fixed(2)).unwrap();
        assert_eq!(b.index_of(&[1, 0]), None);
        assert_eq!(b.index_of(&[1, 1, 0]), None);
    }

    #[test]
    fn capacity_error() {
        let err = FockBasis::with_capacity(10, Sector::Fixed(10), 1000).unwrap_err();
        assert!(matches!(err, Error::Capacity { .. }));
        assert!(FockBasis::new(30, Sector::Truncated(30)).is_err());
    }
}
