//! Sequence forms: finite multisets over a group, stored sparsely as
//! `(element, multiplicity)` pairs in canonical element order.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_rational::Ratio;

use crate::dp::{CountDp, LengthDp, SumDp};
use crate::error::{Error, Result};
use crate::group::{Element, Group};

/// A multiset of group elements.
///
/// Entries are sorted by element and never carry multiplicity 0, so two
/// forms are equal exactly when all multiplicities agree.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SequenceForm {
    entries: Vec<(Element, u32)>,
}

impl SequenceForm {
    pub fn empty() -> SequenceForm {
        SequenceForm::default()
    }

    /// `g^m` (empty when `m == 0`).
    pub fn power(g: Element, m: u32) -> SequenceForm {
        let mut form = SequenceForm::empty();
        form.push(g, m);
        form
    }

    /// Builds a form from a dense multiplicity vector indexed by element.
    pub fn from_counts(counts: &[u32]) -> SequenceForm {
        let entries = counts
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0)
            .map(|(i, &m)| (Element::from_index(i), m))
            .collect();
        SequenceForm { entries }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = Element>) -> SequenceForm {
        let mut form = SequenceForm::empty();
        for g in terms {
            form.push(g, 1);
        }
        form
    }

    /// Dense multiplicity vector of length `order`.
    pub fn counts(&self, order: usize) -> Vec<u32> {
        let mut counts = vec![0u32; order];
        for &(g, m) in &self.entries {
            counts[g.index()] = m;
        }
        counts
    }

    pub fn entries(&self) -> &[(Element, u32)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.iter().map(|&(_, m)| m as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn multiplicity(&self, g: Element) -> u32 {
        match self.entries.binary_search_by_key(&g, |&(e, _)| e) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0,
        }
    }

    /// Support as a bitmask.
    pub fn support_mask(&self) -> u64 {
        self.entries.iter().fold(0, |acc, &(g, _)| acc | g.bit())
    }

    pub fn push(&mut self, g: Element, m: u32) {
        if m == 0 {
            return;
        }
        match self.entries.binary_search_by_key(&g, |&(e, _)| e) {
            Ok(i) => self.entries[i].1 += m,
            Err(i) => self.entries.insert(i, (g, m)),
        }
    }

    /// The product `S·T`.
    pub fn concat(&self, other: &SequenceForm) -> SequenceForm {
        let mut out = self.clone();
        for &(g, m) in &other.entries {
            out.push(g, m);
        }
        out
    }

    /// Terms in canonical order, repeated by multiplicity.
    pub fn terms(&self) -> impl Iterator<Item = Element> + '_ {
        self.entries
            .iter()
            .flat_map(|&(g, m)| std::iter::repeat_n(g, m as usize))
    }

    pub fn sum(&self, group: &Group) -> Element {
        self.entries.iter().fold(group.zero(), |acc, &(g, m)| {
            group.add(acc, group.mul(m as u64, g))
        })
    }

    /// Keeps only terms whose element is in `mask`.
    pub fn restrict(&self, mask: u64) -> SequenceForm {
        SequenceForm {
            entries: self
                .entries
                .iter()
                .copied()
                .filter(|(g, _)| mask & g.bit() != 0)
                .collect(),
        }
    }

    /// Compares by the sorted term list (`1 1 < 1 2 < 2 2`). For forms of
    /// equal length this is the reverse of comparing multiplicity vectors.
    pub fn term_cmp(&self, other: &SequenceForm) -> Ordering {
        self.terms().cmp(other.terms())
    }

    pub fn display(&self, group: &Group) -> String {
        render_form(self, group)
    }
}

/// Parses `0^2 1^3` or `(1,2)^3 (0,1)`.
pub fn parse_form(text: &str, group: &Group) -> Result<SequenceForm> {
    let mut form = SequenceForm::empty();
    for token in text.split_whitespace() {
        let (elem, mult) = match token.rsplit_once('^') {
            Some((e, m)) => {
                let m: u32 = m.parse().map_err(|_| Error::Parse {
                    token: token.to_string(),
                    reason: "multiplicity must be a positive integer".into(),
                })?;
                if m == 0 {
                    return Err(Error::Parse {
                        token: token.to_string(),
                        reason: "multiplicity must be at least 1".into(),
                    });
                }
                (e, m)
            }
            None => (token, 1),
        };
        form.push(group.parse_element(elem)?, mult);
    }
    Ok(form)
}

/// Renders entries in canonical element order; multiplicity 1 is implicit.
pub fn render_form(form: &SequenceForm, group: &Group) -> String {
    let mut out = String::new();
    for (i, &(g, m)) in form.entries.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&group.format_element(g));
        if m > 1 {
            let _ = write!(out, "^{m}");
        }
    }
    out
}

pub fn is_zero_sum(form: &SequenceForm, group: &Group) -> bool {
    form.sum(group).is_zero()
}

/// `T ⊆ S` pointwise.
pub fn is_subsequence(sub: &SequenceForm, sup: &SequenceForm) -> bool {
    let mut it = sup.entries.iter().peekable();
    'outer: for &(g, m) in &sub.entries {
        while let Some(&&(h, n)) = it.peek() {
            match h.cmp(&g) {
                Ordering::Less => {
                    it.next();
                }
                Ordering::Equal => {
                    if n < m {
                        return false;
                    }
                    it.next();
                    continue 'outer;
                }
                Ordering::Greater => return false,
            }
        }
        return false;
    }
    true
}

/// `S · T^{-1}`; fails unless `T ⊆ S`.
pub fn subtract(sup: &SequenceForm, sub: &SequenceForm) -> Result<SequenceForm> {
    if !is_subsequence(sub, sup) {
        return Err(Error::NotContained);
    }
    let entries = sup
        .entries
        .iter()
        .filter_map(|&(g, m)| {
            let rest = m - sub.multiplicity(g);
            (rest > 0).then_some((g, rest))
        })
        .collect();
    Ok(SequenceForm { entries })
}

/// Every multiplicity is at most the order of its element.
pub fn is_weak_regular(form: &SequenceForm, group: &Group) -> bool {
    form.entries
        .iter()
        .all(|&(g, m)| m <= group.order_of(g))
}

pub fn length_dp(form: &SequenceForm, group: &Group, max_len: Option<usize>) -> LengthDp {
    let mut dp = LengthDp::new(max_len);
    for g in form.terms() {
        dp.adjoin(group, g);
    }
    dp
}

/// `{ℓ ≥ 1 : some length-ℓ subsequence sums to zero}`.
pub fn zero_sum_length_set(form: &SequenceForm, group: &Group) -> BTreeSet<usize> {
    length_dp(form, group, None).zero_lengths().collect()
}

/// Some nonempty subsequence sums to zero.
pub fn has_zero_sum(form: &SequenceForm, group: &Group) -> bool {
    let mut dp = SumDp::new();
    for &(g, m) in &form.entries {
        // Copies beyond ord(g) reach no new sums.
        for _ in 0..m.min(group.order_of(g)) {
            dp.adjoin(group, g);
        }
        if dp.has_zero() {
            return true;
        }
    }
    false
}

/// Number of distinct nonempty zero-sum sub-forms, saturated at `cap`.
pub fn count_zero_sum_forms(form: &SequenceForm, group: &Group, cap: u32) -> u32 {
    let mut dp = CountDp::new(group, None, cap);
    for g in form.terms() {
        dp.adjoin(group, g);
    }
    dp.nonempty_zero_sum(|_| true)
}

/// Number of sub-forms `Π (v_g + 1)`, including the empty one.
pub fn subform_count(form: &SequenceForm) -> u128 {
    form.entries
        .iter()
        .fold(1u128, |acc, &(_, m)| acc.saturating_mul(m as u128 + 1))
}

fn check_budget(form: &SequenceForm, limit: u64) -> Result<()> {
    let n = subform_count(form);
    if n > limit as u128 {
        return Err(Error::BudgetExceeded(format!(
            "{n} sub-forms exceed the enumeration limit {limit}"
        )));
    }
    Ok(())
}

/// Calls `visit` on every sub-form (including the empty one) in
/// choice-vector order.
pub fn for_each_subform(form: &SequenceForm, mut visit: impl FnMut(&SequenceForm)) {
    fn rec(
        entries: &[(Element, u32)],
        current: &mut SequenceForm,
        visit: &mut dyn FnMut(&SequenceForm),
    ) {
        let Some((&(g, m), rest)) = entries.split_first() else {
            visit(current);
            return;
        };
        rec(rest, current, visit);
        for j in 1..=m {
            if j == 1 {
                current.entries.push((g, 1));
            } else {
                current.entries.last_mut().unwrap().1 = j;
            }
            rec(rest, current, visit);
        }
        current.entries.pop();
    }
    let mut current = SequenceForm::empty();
    rec(&form.entries, &mut current, &mut visit);
}

/// All distinct nonempty zero-sum sub-forms, in choice-vector order.
pub fn enumerate_zero_sum_subforms(
    form: &SequenceForm,
    group: &Group,
    limit: u64,
) -> Result<Vec<SequenceForm>> {
    check_budget(form, limit)?;
    let mut out = Vec::new();
    for_each_subform(form, |t| {
        if !t.is_empty() && is_zero_sum(t, group) {
            out.push(t.clone());
        }
    });
    Ok(out)
}

/// A nonempty zero-sum form with no proper nonempty zero-sum sub-form.
pub fn is_minimal_zero_sum(form: &SequenceForm, group: &Group) -> bool {
    !form.is_empty() && is_zero_sum(form, group) && count_zero_sum_forms(form, group, 2) == 1
}

pub fn enumerate_minimal_zero_sum_subforms(
    form: &SequenceForm,
    group: &Group,
    limit: u64,
) -> Result<Vec<SequenceForm>> {
    Ok(enumerate_zero_sum_subforms(form, group, limit)?
        .into_iter()
        .filter(|t| count_zero_sum_forms(t, group, 2) == 1)
        .collect())
}

/// Two disjoint nonempty zero-sum subsequences exist.
///
/// Any witness pair `(A, B)` can be shrunk to a minimal `A`, so it suffices
/// to try minimal zero-sum sub-forms as the first component.
pub fn has_two_disjoint_zero_sum(form: &SequenceForm, group: &Group, limit: u64) -> Result<bool> {
    for t in enumerate_minimal_zero_sum_subforms(form, group, limit)? {
        let rest = subtract(form, &t)?;
        if has_zero_sum(&rest, group) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Index of a zero-sum sequence over a cyclic group:
/// `min_u Σ |u·x_i|_n / n` over units `u` modulo `n`.
pub fn index_of(form: &SequenceForm, group: &Group) -> Result<Ratio<u64>> {
    if !group.is_cyclic() {
        return Err(Error::NotCyclic(group.rank()));
    }
    if form.is_empty() {
        return Err(Error::Precondition("index of the empty sequence".into()));
    }
    if !is_zero_sum(form, group) {
        return Err(Error::NotZeroSum);
    }
    if form.multiplicity(group.zero()) > 0 {
        return Err(Error::ContainsZero);
    }
    let n = group.order() as u64;
    let best = (1..n)
        .filter(|&u| crate::group::gcd(u as u32, n as u32) == 1)
        .map(|u| {
            form.entries
                .iter()
                .map(|&(g, m)| m as u64 * ((u * g.index() as u64) % n))
                .sum::<u64>()
        })
        .min()
        .expect("C_n with n ≥ 2 has the unit 1");
    Ok(Ratio::new(best, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: u64) -> Group {
        Group::cyclic(n).unwrap()
    }

    fn f(text: &str, g: &Group) -> SequenceForm {
        parse_form(text, g).unwrap()
    }

    /// Naive oracle: every sub-form by explicit choice vectors.
    fn naive_subforms(form: &SequenceForm) -> Vec<SequenceForm> {
        let mut out = vec![SequenceForm::empty()];
        for &(g, m) in form.entries() {
            let mut next = Vec::new();
            for base in &out {
                for j in 0..=m {
                    let mut t = base.clone();
                    t.push(g, j);
                    next.push(t);
                }
            }
            out = next;
        }
        out
    }

    #[test]
    fn parse_and_render() {
        let g = c(3);
        let s = f("0^2 1^3", &g);
        assert_eq!(s.multiplicity(Element::ZERO), 2);
        assert_eq!(s.multiplicity(Element::from_index(1)), 3);
        assert_eq!(render_form(&s, &g), "0^2 1^3");

        let h = Group::new(&[2, 6]).unwrap();
        let s = f("(1,2)^3 (0,1)", &h);
        assert_eq!(s.entries().len(), 2);
        assert_eq!(s.len(), 4);
        assert_eq!(render_form(&s, &h), "(0,1) (1,2)^3");
    }

    #[test]
    fn parse_rejects_bad_tokens() {
        let g = c(3);
        assert!(matches!(parse_form("1^0", &g), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_form("3", &g),
            Err(Error::CoordinateOutOfRange { .. })
        ));
        assert!(parse_form("x", &g).is_err());
        assert!(parse_form("(1,1)", &g).is_err());
    }

    #[test]
    fn zero_sum_examples() {
        let g = c(3);
        assert!(is_zero_sum(&f("1 2", &g), &g));
        assert!(!is_zero_sum(&f("1^2", &g), &g));
        let g5 = c(5);
        assert!(is_zero_sum(&f("0 1 2 3 4", &g5), &g5));
    }

    #[test]
    fn subsequence_and_subtract() {
        let g = c(3);
        assert!(is_subsequence(&f("1 2", &g), &f("0 1^2 2", &g)));
        assert!(!is_subsequence(&f("1^2", &g), &f("1 2", &g)));
        assert_eq!(subtract(&f("1^3", &g), &f("1", &g)).unwrap(), f("1^2", &g));
        assert_eq!(
            subtract(&f("1", &g), &f("2", &g)),
            Err(Error::NotContained)
        );
    }

    #[test]
    fn weak_regular_examples() {
        let g = c(3);
        assert!(is_weak_regular(&f("1^3", &g), &g));
        assert!(!is_weak_regular(&f("1^4", &g), &g));
        assert!(!is_weak_regular(&f("0^2", &g), &g));
    }

    #[test]
    fn length_set_examples() {
        let g = c(3);
        let set = |t: &str| zero_sum_length_set(&f(t, &g), &g).into_iter().collect::<Vec<_>>();
        // Oracle: all 2^5 / 2^6 subsequences.
        let brute = |n: usize| {
            let mut lens = BTreeSet::new();
            for mask in 1u32..(1 << n) {
                if mask.count_ones() % 3 == 0 {
                    lens.insert(mask.count_ones() as usize);
                }
            }
            lens.into_iter().collect::<Vec<_>>()
        };
        assert_eq!(set("1^5"), brute(5));
        assert_eq!(set("1^5"), vec![3]);
        assert_eq!(set("1^6"), brute(6));
        assert_eq!(set("1^6"), vec![3, 6]);
        assert_eq!(set("0 1 2"), vec![1, 2, 3]);
    }

    #[test]
    fn count_forms_examples() {
        let g = c(3);
        assert_eq!(count_zero_sum_forms(&f("1^6", &g), &g, 100), 2);
        assert_eq!(count_zero_sum_forms(&f("1^5", &g), &g, 100), 1);
        let g2 = c(2);
        assert_eq!(count_zero_sum_forms(&f("0 1^2", &g2), &g2, 100), 3);
        assert_eq!(count_zero_sum_forms(&f("0 1^2", &g2), &g2, 2), 2);
    }

    #[test]
    fn subform_enumeration_examples() {
        let g = c(3);
        let render = |v: Vec<SequenceForm>| -> Vec<String> {
            v.iter().map(|t| render_form(t, &g)).collect()
        };
        assert_eq!(
            render(enumerate_zero_sum_subforms(&f("1^2 2", &g), &g, 1000).unwrap()),
            vec!["1 2"]
        );
        let mut got = render(enumerate_zero_sum_subforms(&f("0 1 2", &g), &g, 1000).unwrap());
        got.sort();
        assert_eq!(got, vec!["0", "0 1 2", "1 2"]);
        let g2 = c(2);
        assert!(enumerate_zero_sum_subforms(&f("1", &g2), &g2, 1000)
            .unwrap()
            .is_empty());
        assert!(enumerate_zero_sum_subforms(&f("1^20 2^20", &g), &g, 100).is_err());
    }

    #[test]
    fn minimal_subform_examples() {
        let g = c(3);
        let min = |t: &str, g: &Group| -> Vec<String> {
            let mut v: Vec<String> = enumerate_minimal_zero_sum_subforms(&f(t, g), g, 1000)
                .unwrap()
                .iter()
                .map(|t| render_form(t, g))
                .collect();
            v.sort();
            v
        };
        assert_eq!(min("1^6", &g), vec!["1^3"]);
        assert_eq!(min("0 1 2", &g), vec!["0", "1 2"]);
        let g4 = c(4);
        assert_eq!(min("1^2 2", &g4), vec!["1^2 2"]);
    }

    #[test]
    fn disjoint_pair_examples() {
        let g2 = c(2);
        assert!(has_two_disjoint_zero_sum(&f("1^4", &g2), &g2, 1000).unwrap());
        assert!(!has_two_disjoint_zero_sum(&f("1^3", &g2), &g2, 1000).unwrap());
        let g3 = c(3);
        assert!(!has_two_disjoint_zero_sum(&f("1^5", &g3), &g3, 1000).unwrap());
        assert!(has_two_disjoint_zero_sum(&f("0^2", &g3), &g3, 1000).unwrap());
    }

    #[test]
    fn index_examples() {
        let g = c(5);
        assert_eq!(index_of(&f("1 4", &g), &g).unwrap(), Ratio::from_integer(1));
        assert_eq!(index_of(&f("1^3 2", &g), &g).unwrap(), Ratio::from_integer(1));
        assert_eq!(index_of(&f("1^5", &g), &g).unwrap(), Ratio::from_integer(1));
        // 2·3·... : 2^2 3^2 has u=1 sum 10, u=2 sum 4+4+1+1 = 10, index 2.
        assert_eq!(index_of(&f("2^2 3^2", &g), &g).unwrap(), Ratio::from_integer(2));
        assert_eq!(index_of(&f("0 1 4", &g), &g), Err(Error::ContainsZero));
        assert_eq!(index_of(&f("1 2", &g), &g), Err(Error::NotZeroSum));
        let h = Group::new(&[2, 2]).unwrap();
        assert!(matches!(
            index_of(&f("(0,1)^2", &h), &h),
            Err(Error::NotCyclic(2))
        ));
    }

    #[test]
    fn naive_oracle_agrees_on_small_forms() {
        let g = c(4);
        let s = f("0 1^3 2^2 3", &g);
        let naive: Vec<SequenceForm> = naive_subforms(&s)
            .into_iter()
            .filter(|t| !t.is_empty() && is_zero_sum(t, &g))
            .collect();
        let fast = enumerate_zero_sum_subforms(&s, &g, 10_000).unwrap();
        assert_eq!(naive.len(), fast.len());
        assert_eq!(count_zero_sum_forms(&s, &g, 10_000) as usize, naive.len());
        let lens: BTreeSet<usize> = naive.iter().map(SequenceForm::len).collect();
        assert_eq!(lens, zero_sum_length_set(&s, &g));
    }
}
