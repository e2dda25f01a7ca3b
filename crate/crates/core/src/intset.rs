//! Dense integer sets over an interval `[1, upper]`, bit-packed.
//!
//! Density-recurrence experiments intersect many translates of one ambient
//! set, which is exactly a shift-and-AND over a bitset. Sets parse from a
//! tiny expression language (`"3*Z & [1,3072]"`, `"[1,100]"`) or from a
//! plain list of integers, and support the few exact operations the
//! experiments need: membership, translation, intersection, popcount, and
//! first-member lookup.

use crate::error::{Error, Result};

/// A subset of `[1, upper]`, one bit per integer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerSet {
    upper: u64,
    words: Vec<u64>,
}

impl IntegerSet {
    /// The empty subset of `[1, upper]`.
    pub fn empty(upper: u64) -> Result<Self> {
        if upper == 0 {
            return Err(Error::Domain(
                "ambient interval [1, upper] needs upper ≥ 1".into(),
            ));
        }
        let words = vec![0u64; (upper as usize + 1).div_ceil(64)];
        Ok(IntegerSet { upper, words })
    }

    /// The full interval `[1, upper]`.
    pub fn interval(upper: u64) -> Result<Self> {
        let mut set = Self::empty(upper)?;
        for x in 1..=upper {
            set.insert(x);
        }
        Ok(set)
    }

    /// The multiples of `q` in `[1, upper]`.
    pub fn multiples(q: u64, upper: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::Domain("multiples of 0 are not a set".into()));
        }
        let mut set = Self::empty(upper)?;
        let mut x = q;
        while x <= upper {
            set.insert(x);
            x += q;
        }
        Ok(set)
    }

    /// Builds a set from explicit members; `upper` is their maximum.
    pub fn from_members(members: &[u64]) -> Result<Self> {
        if members.contains(&0) {
            return Err(Error::Domain("members must be positive integers".into()));
        }
        let upper = *members
            .iter()
            .max()
            .ok_or_else(|| Error::Domain("cannot build a set from no members".into()))?;
        let mut set = Self::empty(upper)?;
        for &x in members {
            set.insert(x);
        }
        Ok(set)
    }

    /// Parses a set description: either the expression form
    /// `"q*Z & [a,b]"` / `"[a,b]"` (with `Z` accepted for `1*Z`), or a
    /// whitespace-separated list of positive integers.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Err(Error::InvalidInput("empty set description".into()));
        }
        if text.contains('[') {
            return Self::parse_expression(text);
        }
        let members: std::result::Result<Vec<u64>, _> =
            text.split_whitespace().map(|w| w.parse::<u64>()).collect();
        let members = members.map_err(|e| Error::InvalidInput(format!("bad member list: {e}")))?;
        Self::from_members(&members)
    }

    fn parse_expression(text: &str) -> Result<Self> {
        let mut interval: Option<(u64, u64)> = None;
        let mut stride: Option<u64> = None;
        for factor in text.split('&') {
            let factor = factor.trim();
            if let Some(rest) = factor.strip_prefix('[') {
                let inner = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::InvalidInput(format!("unclosed interval {factor:?}")))?;
                let (a, b) = inner
                    .split_once(',')
                    .ok_or_else(|| Error::InvalidInput(format!("interval {factor:?} needs a,b")))?;
                let a = a.trim().parse::<u64>().map_err(|e| {
                    Error::InvalidInput(format!("bad interval endpoint {a:?}: {e}"))
                })?;
                let b = b.trim().parse::<u64>().map_err(|e| {
                    Error::InvalidInput(format!("bad interval endpoint {b:?}: {e}"))
                })?;
                if a != 1 {
                    return Err(Error::InvalidInput(
                        "only intervals starting at 1 are supported".into(),
                    ));
                }
                if interval.replace((a, b)).is_some() {
                    return Err(Error::InvalidInput("more than one interval factor".into()));
                }
            } else if factor == "Z" || factor.ends_with("*Z") {
                let q = if factor == "Z" {
                    1
                } else {
                    let q_text = factor.trim_end_matches("*Z").trim();
                    q_text
                        .parse::<u64>()
                        .map_err(|e| Error::InvalidInput(format!("bad stride {q_text:?}: {e}")))?
                };
                if stride.replace(q).is_some() {
                    return Err(Error::InvalidInput("more than one stride factor".into()));
                }
            } else {
                return Err(Error::InvalidInput(format!(
                    "unrecognized set factor {factor:?}; expected q*Z or [a,b]"
                )));
            }
        }
        let (_, upper) = interval
            .ok_or_else(|| Error::InvalidInput("set expression needs an interval".into()))?;
        Self::multiples(stride.unwrap_or(1), upper)
    }

    /// The right end of the ambient interval `[1, upper]`.
    pub fn upper(&self) -> u64 {
        self.upper
    }

    pub fn insert(&mut self, x: u64) {
        debug_assert!(x >= 1 && x <= self.upper);
        self.words[(x / 64) as usize] |= 1 << (x % 64);
    }

    pub fn contains(&self, x: u64) -> bool {
        if x == 0 || x > self.upper {
            return false;
        }
        self.words[(x / 64) as usize] >> (x % 64) & 1 == 1
    }

    /// Number of members.
    pub fn len(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// The least member, if any.
    pub fn first(&self) -> Option<u64> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i as u64 * 64 + w.trailing_zeros() as u64)
    }

    /// Members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (1..=self.upper).filter(move |&x| self.contains(x))
    }

    /// Intersects `self` in place with `other` translated by `shift`:
    /// keeps `x` only when `x + shift` belongs to `other`. Negative shifts
    /// therefore test `x - |shift|`. Shifts past the ambient interval clear
    /// the set.
    pub fn intersect_translated(&mut self, other: &IntegerSet, shift: i128) {
        debug_assert_eq!(self.upper, other.upper);
        if shift.unsigned_abs() > self.upper as u128 {
            self.words.fill(0);
            return;
        }
        let magnitude = shift.unsigned_abs() as u64;
        let (word_shift, bit_shift) = ((magnitude / 64) as usize, (magnitude % 64) as u32);
        let words = &other.words;
        let fetch = |i: isize| -> u64 {
            if i < 0 || i as usize >= words.len() {
                0
            } else {
                words[i as usize]
            }
        };
        for i in 0..self.words.len() {
            // Bit x of the translated mask must be bit x+shift (shift ≥ 0)
            // or x-|shift| (shift < 0) of `other`.
            let mask = if shift >= 0 {
                let j = i as isize + word_shift as isize;
                if bit_shift == 0 {
                    fetch(j)
                } else {
                    fetch(j) >> bit_shift | fetch(j + 1) << (64 - bit_shift)
                }
            } else {
                let j = i as isize - word_shift as isize;
                if bit_shift == 0 {
                    fetch(j)
                } else {
                    fetch(j) << bit_shift | fetch(j - 1) >> (64 - bit_shift)
                }
            };
            self.words[i] &= mask;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_expression_forms() {
        let s = IntegerSet::parse("3*Z & [1,3072]").unwrap();
        assert_eq!(s.upper(), 3072);
        assert_eq!(s.len(), 1024);
        assert!(s.contains(3) && s.contains(3072) && !s.contains(4));

        let plain = IntegerSet::parse("[1,10]").unwrap();
        assert_eq!(plain.len(), 10);

        let z = IntegerSet::parse("Z & [1,5]").unwrap();
        assert_eq!(z.len(), 5);

        let reversed = IntegerSet::parse("[1, 100] & 7*Z").unwrap();
        assert_eq!(reversed.len(), 14);
    }

    #[test]
    fn parse_member_lists() {
        let s = IntegerSet::parse("3 1 4 15").unwrap();
        assert_eq!(s.upper(), 15);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![1, 3, 4, 15]);
        let lines = IntegerSet::parse("2\n4\n8\n").unwrap();
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn parse_rejects_garbage() {
        for bad in [
            "",
            "foo",
            "[2,10]",
            "[1,10] & [1,3]",
            "3*Z",
            "0 1 2",
            "1,2,3",
        ] {
            assert!(IntegerSet::parse(bad).is_err(), "{bad:?} should fail");
        }
    }

    #[test]
    fn translated_intersection_matches_definition() {
        let a = IntegerSet::parse("3*Z & [1,300]").unwrap();
        for shift in [0i128, 1, 3, 63, 64, 65, 128, -3, -64, -100, 299, 300, -299] {
            let mut meet = a.clone();
            meet.intersect_translated(&a, shift);
            for x in 1..=300u64 {
                let translated = x as i128 + shift;
                let expected = a.contains(x)
                    && translated > 0
                    && translated <= 300
                    && a.contains(translated as u64);
                assert_eq!(meet.contains(x), expected, "x={x} shift={shift}");
            }
        }
    }

    #[test]
    fn first_and_len() {
        let s = IntegerSet::parse("64 65 128 200").unwrap();
        assert_eq!(s.first(), Some(64));
        assert_eq!(s.len(), 4);
        let mut gone = s.clone();
        gone.intersect_translated(&s, 1000);
        assert_eq!(gone.first(), None);
        assert!(gone.is_empty());
    }
}
