//! Subset-sum kernels over group elements.
//!
//! Every kernel consumes a sequence one term at a time through `adjoin`.
//! Element sets are `u64` bitmasks indexed by [`Element::index`], which is why
//! group orders are capped at 64.

use crate::group::{Element, Group};

/// Non-empty subsequence sums, ignoring lengths.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SumDp {
    reach: u64,
}

impl SumDp {
    pub fn new() -> SumDp {
        SumDp { reach: 0 }
    }

    pub fn adjoin(&mut self, group: &Group, g: Element) {
        self.reach |= group.translate_mask(self.reach, g) | g.bit();
    }

    /// Some nonempty subsequence sums to zero.
    pub fn has_zero(&self) -> bool {
        self.reach & 1 != 0
    }

    pub fn reachable(&self) -> u64 {
        self.reach
    }
}

/// For each length `ℓ`, the set of sums of length-`ℓ` subsequences.
///
/// `(0, 0)` is always reachable. With a length bound, subsequences longer
/// than the bound are dropped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LengthDp {
    reach: Vec<u64>,
    max_len: Option<usize>,
}

impl LengthDp {
    pub fn new(max_len: Option<usize>) -> LengthDp {
        let mut reach = vec![0u64; max_len.map_or(1, |m| m + 1)];
        reach[0] = 1;
        LengthDp { reach, max_len }
    }

    pub fn adjoin(&mut self, group: &Group, g: Element) {
        if self.max_len.is_none() {
            self.reach.push(0);
        }
        for len in (0..self.reach.len() - 1).rev() {
            let shifted = group.translate_mask(self.reach[len], g);
            self.reach[len + 1] |= shifted;
        }
    }

    pub fn reachable(&self, len: usize) -> u64 {
        self.reach.get(len).copied().unwrap_or(0)
    }

    pub fn zero_at(&self, len: usize) -> bool {
        self.reachable(len) & 1 != 0
    }

    /// Lengths `ℓ ≥ 1` of zero-sum subsequences, ascending.
    pub fn zero_lengths(&self) -> impl Iterator<Item = usize> + '_ {
        (1..self.reach.len()).filter(|&l| self.zero_at(l))
    }

    pub fn max_len(&self) -> usize {
        self.reach.len() - 1
    }
}

/// Counts choice vectors `(j_g)` by sum (and optionally by length), saturating
/// at `cap`.
///
/// Terms must be adjoined in non-decreasing element order: the kernel keeps
/// the table from before the current element and extends the choice range of
/// the current element by one copy per call. Distinct choice vectors are
/// distinct sub-forms, so the counts are counts of sub-forms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountDp {
    width: usize,
    lengths: usize,
    cap: u32,
    base: Vec<u32>,
    cur: Vec<u32>,
    current: Option<Element>,
    mult: u32,
}

impl CountDp {
    /// `max_len = None` keeps a single length bucket (lengths are ignored).
    pub fn new(group: &Group, max_len: Option<usize>, cap: u32) -> CountDp {
        let width = group.order();
        let lengths = max_len.map_or(1, |m| m + 1);
        let mut cur = vec![0u32; width * lengths];
        cur[0] = 1;
        CountDp {
            width,
            lengths,
            // One extra slot so the empty form never hides a saturated count.
            cap: cap.saturating_add(1),
            base: cur.clone(),
            cur,
            current: None,
            mult: 0,
        }
    }

    fn by_length(&self) -> bool {
        self.lengths > 1
    }

    pub fn adjoin(&mut self, group: &Group, g: Element) {
        if self.current != Some(g) {
            debug_assert!(self.current.is_none_or(|c| c < g), "terms out of order");
            self.base.clone_from(&self.cur);
            self.current = Some(g);
            self.mult = 0;
        }
        self.mult += 1;
        let m = self.mult as usize;
        let shift = group.mul(self.mult as u64, g);
        if self.by_length() {
            for len in m..self.lengths {
                for a in 0..self.width {
                    let from = self.base[(len - m) * self.width + a];
                    if from != 0 {
                        let to = group.add(Element::from_index(a), shift).index();
                        let slot = &mut self.cur[len * self.width + to];
                        *slot = slot.saturating_add(from).min(self.cap);
                    }
                }
            }
        } else {
            for a in 0..self.width {
                let from = self.base[a];
                if from != 0 {
                    let to = group.add(Element::from_index(a), shift).index();
                    let slot = &mut self.cur[to];
                    *slot = slot.saturating_add(from).min(self.cap);
                }
            }
        }
    }

    /// Saturated number of sub-forms (including the empty one when `len == 0`
    /// or lengths are ignored) with the given sum and length.
    pub fn count(&self, sum: Element, len: usize) -> u32 {
        if self.by_length() {
            if len >= self.lengths {
                return 0;
            }
            self.cur[len * self.width + sum.index()]
        } else {
            self.cur[sum.index()]
        }
    }

    /// Saturated number of nonempty zero-sum sub-forms whose length passes
    /// `accept` (ignored when lengths are not tracked).
    pub fn nonempty_zero_sum(&self, accept: impl Fn(usize) -> bool) -> u32 {
        if self.by_length() {
            let mut total = 0u32;
            for len in 1..self.lengths {
                if accept(len) {
                    total = total.saturating_add(self.cur[len * self.width]);
                }
            }
            total.min(self.cap - 1)
        } else {
            self.cur[0] - 1
        }
    }

    pub fn cap(&self) -> u32 {
        self.cap - 1
    }
}

/// Reachable pairs `(σ(A), σ(B))` over disjoint subsequences `A, B`, with
/// nonemptiness flags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairDp {
    width: usize,
    // Index (a, fa, fb) -> mask over σ(B).
    masks: Vec<u64>,
}

impl PairDp {
    pub fn new(group: &Group) -> PairDp {
        let width = group.order();
        let mut masks = vec![0u64; width * 4];
        masks[0] = 1;
        PairDp { width, masks }
    }

    #[inline]
    fn slot(&self, a: usize, fa: usize, fb: usize) -> usize {
        (a * 2 + fa) * 2 + fb
    }

    pub fn adjoin(&mut self, group: &Group, g: Element) {
        let old = self.masks.clone();
        for a in 0..self.width {
            let a_to = group.add(Element::from_index(a), g).index();
            for fa in 0..2 {
                for fb in 0..2 {
                    let m = old[self.slot(a, fa, fb)];
                    if m == 0 {
                        continue;
                    }
                    let into_a = self.slot(a_to, 1, fb);
                    self.masks[into_a] |= m;
                    let into_b = self.slot(a, fa, 1);
                    self.masks[into_b] |= group.translate_mask(m, g);
                }
            }
        }
    }

    /// Two disjoint nonempty zero-sum subsequences exist.
    pub fn has_pair(&self) -> bool {
        self.masks[self.slot(0, 1, 1)] & 1 != 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: u64) -> Group {
        Group::cyclic(n).unwrap()
    }

    #[test]
    fn length_dp_tracks_lengths() {
        let g = c(3);
        let one = Element::from_index(1);
        let mut dp = LengthDp::new(None);
        for _ in 0..6 {
            dp.adjoin(&g, one);
        }
        assert_eq!(dp.zero_lengths().collect::<Vec<_>>(), vec![3, 6]);
    }

    #[test]
    fn bounded_length_dp_drops_long_sums() {
        let g = c(3);
        let one = Element::from_index(1);
        let mut dp = LengthDp::new(Some(4));
        for _ in 0..6 {
            dp.adjoin(&g, one);
        }
        assert_eq!(dp.zero_lengths().collect::<Vec<_>>(), vec![3]);
        assert_eq!(dp.max_len(), 4);
    }

    #[test]
    fn count_dp_counts_forms_not_subsets() {
        let g = c(3);
        let one = Element::from_index(1);
        let mut dp = CountDp::new(&g, None, 100);
        for _ in 0..6 {
            dp.adjoin(&g, one);
        }
        // 1^3 and 1^6.
        assert_eq!(dp.nonempty_zero_sum(|_| true), 2);
    }

    #[test]
    fn count_dp_saturates() {
        let g = c(2);
        let mut dp = CountDp::new(&g, None, 2);
        for _ in 0..5 {
            dp.adjoin(&g, Element::ZERO);
        }
        assert_eq!(dp.nonempty_zero_sum(|_| true), 2);
    }

    #[test]
    fn pair_dp_needs_two_disjoint() {
        let g = c(2);
        let one = Element::from_index(1);
        let mut dp = PairDp::new(&g);
        for _ in 0..3 {
            dp.adjoin(&g, one);
        }
        assert!(!dp.has_pair());
        dp.adjoin(&g, one);
        assert!(dp.has_pair());
    }
}
