//! Bitmap presence helpers shared by the interval-grid representations:
//! one bit per grid interval, set when the entity exists throughout it.

use bitvec::prelude::{bitvec, BitVec, Lsb0};

use crate::time::{Interval, IntervalSet};

pub type PresenceBits = BitVec<u64, Lsb0>;

/// Rasterizes an entity's presence onto an interval grid. The grid must cut
/// at every boundary of `pres` (true for the topology change-point grid).
pub fn presence_to_bits(pres: &IntervalSet, grid: &[Interval]) -> PresenceBits {
    let mut bits = bitvec![u64, Lsb0; 0; grid.len()];
    for (i, iv) in grid.iter().enumerate() {
        if pres.contains(iv.start()) {
            bits.set(i, true);
        }
    }
    bits
}

/// Reconstructs presence from bits: consecutive set bits over adjacent grid
/// intervals merge back into runs.
pub fn bits_to_presence(bits: &PresenceBits, grid: &[Interval]) -> IntervalSet {
    let mut runs: Vec<Interval> = Vec::new();
    let mut i = 0;
    while i < grid.len() {
        if !bits[i] {
            i += 1;
            continue;
        }
        let start = grid[i].start();
        let mut j = i;
        while j + 1 < grid.len() && bits[j + 1] && grid[j].end() == grid[j + 1].start() {
            j += 1;
        }
        runs.push(Interval::new(start, grid[j].end()).expect("grid ascends"));
        i = j + 1;
    }
    IntervalSet::from_intervals(runs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(s: i64, e: i64) -> Interval {
        Interval::from_raw(s, e).unwrap()
    }

    #[test]
    fn presence_round_trips_through_bits() {
        let grid = vec![iv(0, 2), iv(2, 5), iv(5, 7), iv(7, 9)];
        let pres = IntervalSet::from_intervals(vec![iv(0, 5), iv(7, 9)]);
        let bits = presence_to_bits(&pres, &grid);
        assert_eq!(bits.count_ones(), 3);
        assert_eq!(bits_to_presence(&bits, &grid), pres);
    }

    #[test]
    fn empty_presence_round_trips() {
        let grid = vec![iv(0, 2), iv(2, 5)];
        let pres = IntervalSet::empty();
        let bits = presence_to_bits(&pres, &grid);
        assert!(bits.not_any());
        assert!(bits_to_presence(&bits, &grid).is_empty());
    }
}
