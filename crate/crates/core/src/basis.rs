//! Fock basis of `N` bosons on `L` sites.
//!
//! States are ordered descending-lexicographically on `(n_1, ..., n_L)`, so
//! `|N,0,...,0>` has index 0 and `|0,...,0,N>` has index `dim - 1`. Ranking
//! is closed-form: at each site the index skips every state whose occupation
//! there is larger, and by the hockey-stick identity that block has the size
//! of a smaller Fock space. No hash map, no memory proportional to `dim`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use crate::error::{Error, Result};

/// Occupation-number vector `|n_1, ..., n_L>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockState {
    occupations: Vec<u32>,
}

impl FockState {
    pub fn new(occupations: Vec<u32>) -> Result<Self> {
        if occupations.is_empty() {
            return Err(Error::InvalidState("a Fock state needs at least one site".into()));
        }
        Ok(Self { occupations })
    }

    /// `|1, 1, ..., 1>`, the unit-filling product state.
    pub fn homogeneous(sites: usize) -> Self {
        Self {
            occupations: vec![1; sites.max(1)],
        }
    }

    pub fn occupations(&self) -> &[u32] {
        &self.occupations
    }

    pub fn sites(&self) -> usize {
        self.occupations.len()
    }

    pub fn particles(&self) -> u64 {
        self.occupations.iter().map(|&n| u64::from(n)).sum()
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("|")?;
        for (i, n) in self.occupations.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}")?;
        }
        f.write_str(">")
    }
}

/// Number of Fock states, `C(N + L - 1, N)`.
///
/// The binomial is built incrementally in 128-bit arithmetic, where every
/// partial product `C(N+L-1-k+i, i)` is an exact integer, and the result must
/// fit a 64-bit index.
pub fn dimension(sites: usize, particles: usize) -> Result<u64> {
    if sites == 0 {
        return Err(Error::InvalidParameter("a lattice needs at least one site".into()));
    }
    let overflow = || Error::CapacityOverflow { sites, particles };
    let k = core::cmp::min(particles, sites - 1) as u128;
    let n = (particles as u128)
        .checked_add(sites as u128 - 1)
        .ok_or_else(overflow)?;
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc.checked_mul(n - k + i).ok_or_else(overflow)? / i;
    }
    u64::try_from(acc).map_err(|_| overflow())
}

/// Ranking tables for the Fock basis of a fixed `(L, N)`.
///
/// Immutable after construction; share it freely between threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisTable {
    sites: usize,
    particles: usize,
    dim: u64,
    // counts[m * (sites + 1) + s] = number of states of m bosons on s sites
    counts: Vec<u64>,
}

impl BasisTable {
    pub fn new(sites: usize, particles: usize) -> Result<Self> {
        let dim = dimension(sites, particles)?;
        let stride = sites + 1;
        let mut counts = vec![0u64; (particles + 1) * stride];
        for m in 0..=particles {
            for s in 0..=sites {
                counts[m * stride + s] = match (m, s) {
                    (0, _) => 1,
                    (_, 0) => 0,
                    _ => counts[m * stride + s - 1]
                        .checked_add(counts[(m - 1) * stride + s])
                        .ok_or(Error::CapacityOverflow { sites, particles })?,
                };
            }
        }
        debug_assert_eq!(counts[particles * stride + sites], dim);
        Ok(Self {
            sites,
            particles,
            dim,
            counts,
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn dim(&self) -> u64 {
        self.dim
    }

    #[inline]
    fn count(&self, particles: usize, sites: usize) -> u64 {
        self.counts[particles * (self.sites + 1) + sites]
    }

    pub fn validate(&self, state: &FockState) -> Result<()> {
        if state.sites() != self.sites {
            return Err(Error::InvalidState(alloc::format!(
                "{state} has {} sites, basis has {}",
                state.sites(),
                self.sites
            )));
        }
        if state.particles() != self.particles as u64 {
            return Err(Error::InvalidState(alloc::format!(
                "{state} holds {} bosons, basis holds {}",
                state.particles(),
                self.particles
            )));
        }
        Ok(())
    }

    /// Position of `state` in the basis ordering.
    pub fn rank(&self, state: &FockState) -> Result<u64> {
        self.validate(state)?;
        Ok(self.rank_occupations(state.occupations()))
    }

    /// Ranks a raw occupation slice that is already known to be valid.
    #[inline]
    pub fn rank_occupations(&self, occupations: &[u32]) -> u64 {
        debug_assert_eq!(occupations.len(), self.sites);
        let mut remaining = self.particles;
        let mut index = 0u64;
        for (site, &n) in occupations[..self.sites - 1].iter().enumerate() {
            let n = n as usize;
            if n < remaining {
                index += self.count(remaining - n - 1, self.sites - site);
            }
            remaining -= n;
        }
        index
    }

    pub fn unrank(&self, index: u64) -> Result<FockState> {
        let mut occupations = vec![0u32; self.sites];
        self.unrank_into(index, &mut occupations)?;
        Ok(FockState { occupations })
    }

    pub fn unrank_into(&self, mut index: u64, out: &mut [u32]) -> Result<()> {
        if index >= self.dim {
            return Err(Error::IndexOutOfRange {
                index,
                dim: self.dim,
            });
        }
        if out.len() != self.sites {
            return Err(Error::DimensionMismatch {
                expected: self.sites,
                found: out.len(),
            });
        }
        let mut remaining = self.particles;
        let (last, head) = out.split_last_mut().expect("at least one site");
        for (site, slot) in head.iter_mut().enumerate() {
            let rest = self.sites - site - 1;
            let mut n = remaining;
            loop {
                let block = self.count(remaining - n, rest);
                if index < block {
                    break;
                }
                index -= block;
                n -= 1;
            }
            *slot = n as u32;
            remaining -= n;
        }
        *last = remaining as u32;
        Ok(())
    }

    /// Visits every state with index in `range`, in order, reusing one
    /// occupation buffer.
    pub fn for_each_in<F>(&self, range: Range<u64>, mut visit: F) -> Result<()>
    where
        F: FnMut(u64, &[u32]),
    {
        if range.start >= range.end {
            return Ok(());
        }
        if range.end > self.dim {
            return Err(Error::IndexOutOfRange {
                index: range.end - 1,
                dim: self.dim,
            });
        }
        let mut occ = vec![0u32; self.sites];
        self.unrank_into(range.start, &mut occ)?;
        for index in range.clone() {
            visit(index, &occ);
            if index + 1 < range.end {
                advance(&mut occ);
            }
        }
        Ok(())
    }

    pub fn for_each<F>(&self, visit: F)
    where
        F: FnMut(u64, &[u32]),
    {
        self.for_each_in(0..self.dim, visit)
            .expect("full range is always valid");
    }

    pub fn states(&self) -> States<'_> {
        States {
            table: self,
            next: 0,
            current: None,
        }
    }

    /// FNV-1a digest of the full ordering. Stable across runs and platforms.
    pub fn ordering_fingerprint(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut hash = OFFSET;
        self.for_each(|_, occ| {
            for &n in occ {
                for byte in n.to_le_bytes() {
                    hash ^= u64::from(byte);
                    hash = hash.wrapping_mul(PRIME);
                }
            }
        });
        hash
    }
}

/// Successor in descending-lexicographic order. The caller guarantees a
/// successor exists.
#[inline]
fn advance(occ: &mut [u32]) {
    let last = occ.len() - 1;
    let k = (0..last)
        .rev()
        .find(|&i| occ[i] > 0)
        .expect("no successor after the last state");
    let tail: u32 = occ[k + 1..].iter().sum();
    occ[k] -= 1;
    occ[k + 1] = tail + 1;
    for n in &mut occ[k + 2..] {
        *n = 0;
    }
}

pub struct States<'a> {
    table: &'a BasisTable,
    next: u64,
    current: Option<Vec<u32>>,
}

impl Iterator for States<'_> {
    type Item = FockState;

    fn next(&mut self) -> Option<FockState> {
        if self.next >= self.table.dim {
            return None;
        }
        let occ = match self.current.as_mut() {
            Some(occ) => {
                advance(occ);
                occ
            }
            None => {
                let mut occ = vec![0; self.table.sites];
                self.table.unrank_into(0, &mut occ).ok()?;
                self.current.insert(occ)
            }
        };
        self.next += 1;
        Some(FockState {
            occupations: occ.clone(),
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.table.dim - self.next) as usize;
        (left, Some(left))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    /// All compositions of `n` into `l` parts, descending-lex, by recursion.
    fn brute_force(l: usize, n: u32) -> Vec<Vec<u32>> {
        if l == 1 {
            return vec![vec![n]];
        }
        let mut out = Vec::new();
        for first in (0..=n).rev() {
            for mut tail in brute_force(l - 1, n - first) {
                tail.insert(0, first);
                out.push(tail);
            }
        }
        out
    }

    #[test]
    fn dimensions() {
        assert_eq!(dimension(10, 10).unwrap(), 92_378);
        assert_eq!(dimension(11, 11).unwrap(), 352_716);
        assert_eq!(dimension(2, 2).unwrap(), 3);
        assert_eq!(dimension(7, 7).unwrap(), 1716);
        assert_eq!(dimension(13, 13).unwrap(), 5_200_300);
        assert_eq!(dimension(1, 5).unwrap(), 1);
        assert_eq!(dimension(4, 0).unwrap(), 1);
        assert!(dimension(0, 3).is_err());
    }

    #[test]
    fn dimension_overflow_is_reported() {
        assert_eq!(
            dimension(200, 200),
            Err(Error::CapacityOverflow {
                sites: 200,
                particles: 200
            })
        );
        assert!(BasisTable::new(200, 200).is_err());
    }

    #[test]
    fn small_ranks() {
        let t = BasisTable::new(2, 2).unwrap();
        let s = |v: &[u32]| FockState::new(v.to_vec()).unwrap();
        assert_eq!(t.rank(&s(&[2, 0])).unwrap(), 0);
        assert_eq!(t.rank(&s(&[1, 1])).unwrap(), 1);
        assert_eq!(t.rank(&s(&[0, 2])).unwrap(), 2);
        assert_eq!(t.unrank(1).unwrap().occupations(), &[1, 1]);
        let t = BasisTable::new(3, 1).unwrap();
        assert_eq!(t.unrank(0).unwrap().occupations(), &[1, 0, 0]);
    }

    #[test]
    fn invalid_inputs() {
        let t = BasisTable::new(3, 2).unwrap();
        assert!(t.rank(&FockState::new(vec![1, 0, 0]).unwrap()).is_err());
        assert!(t.rank(&FockState::new(vec![1, 1]).unwrap()).is_err());
        assert!(matches!(
            t.unrank(6),
            Err(Error::IndexOutOfRange { index: 6, dim: 6 })
        ));
        assert!(FockState::new(vec![]).is_err());
    }

    #[test]
    fn matches_brute_force_enumeration() {
        for l in 1..=6 {
            for n in 0..=6u32 {
                let t = BasisTable::new(l, n as usize).unwrap();
                let expected = brute_force(l, n);
                assert_eq!(t.dim(), expected.len() as u64, "L={l} N={n}");
                for (i, occ) in expected.iter().enumerate() {
                    let st = FockState::new(occ.clone()).unwrap();
                    assert_eq!(t.rank(&st).unwrap(), i as u64);
                    assert_eq!(t.unrank(i as u64).unwrap(), st);
                }
                let iterated: Vec<_> = t.states().map(|s| s.occupations().to_vec()).collect();
                assert_eq!(iterated, expected);
                let unique: BTreeSet<_> = iterated.into_iter().collect();
                assert_eq!(unique.len() as u64, t.dim());
            }
        }
    }

    #[test]
    fn four_by_four_has_35_states() {
        let t = BasisTable::new(4, 4).unwrap();
        assert_eq!(t.dim(), 35);
        for i in 0..35 {
            assert_eq!(t.rank(&t.unrank(i).unwrap()).unwrap(), i);
        }
    }

    #[test]
    fn ranged_visit_matches_full_walk() {
        let t = BasisTable::new(5, 4).unwrap();
        let mut seen = Vec::new();
        t.for_each_in(17..40, |i, occ| seen.push((i, occ.to_vec())))
            .unwrap();
        assert_eq!(seen.len(), 23);
        for (i, occ) in seen {
            assert_eq!(t.unrank(i).unwrap().occupations(), occ.as_slice());
        }
        assert!(t.for_each_in(0..71, |_, _| {}).is_err());
    }

    #[test]
    fn fingerprint_is_stable() {
        let a = BasisTable::new(6, 6).unwrap();
        let b = BasisTable::new(6, 6).unwrap();
        assert_eq!(a.ordering_fingerprint(), b.ordering_fingerprint());
        assert_ne!(
            a.ordering_fingerprint(),
            BasisTable::new(6, 5).unwrap().ordering_fingerprint()
        );
    }
}
