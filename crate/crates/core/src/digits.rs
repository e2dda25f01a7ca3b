//! The digit bijection for digit-restricted integer sets.
//!
//! Fix a base `b >= 2` and a digit alphabet `D = {d_0 < d_1 < …} ⊆ [0, b)`
//! with at least two digits. The associated set collects every nonnegative
//! integer whose base-`b` expansion uses only digits from `D`; it is sparse
//! (a fractal subset of the integers) but carries a cheap order-preserving
//! enumeration `n ↦ k_n`, where `k_0 < k_1 < …` lists the members
//! increasingly. The bijection is raw digit bookkeeping:
//!
//! * with `0 ∈ D`, write `n` in base `|D|` and replace each digit `c` by
//!   `d_c`, then read the result in base `b`;
//! * with `0 ∉ D`, leading zeros no longer collapse, so digit strings of
//!   every length count separately: indices enumerate strings by length and
//!   then lexicographic value (bijective numeration) before mapping through
//!   the alphabet.
//!
//! The base-`b` digit sum of `k_n` falls out of the same string, and when
//! `0 ∈ D` the enumeration is exactly self-similar:
//! `k_{|D|^i · n + j} = b^i · k_n + k_j` for `j < |D|^i`, with digit sums
//! adding. [`self_similarity_check`] tests both identities for concrete
//! triples; [`delta_star`] groups consecutive differences `k_{n+h} − k_n`
//! by value and digit-sum jump and shows each group is a disjoint union of
//! arithmetic progressions whose steps are powers of `|D|`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A validated digit restriction: base `b` and digit alphabet `D`.
///
/// Parse one from text (`"b=3;D=0,2"`) or JSON (`{"base":3,"digits":[0,2]}`)
/// via [`DigitSpec::parse`], or build it directly with [`DigitSpec::new`].
/// Digits are stored strictly increasing.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawDigitSpec", into = "RawDigitSpec")]
pub struct DigitSpec {
    base: u32,
    digits: Vec<u32>,
}

/// Serde mirror of [`DigitSpec`] without the validation invariant.
#[derive(Serialize, Deserialize)]
struct RawDigitSpec {
    base: u32,
    digits: Vec<u32>,
}

impl From<DigitSpec> for RawDigitSpec {
    fn from(spec: DigitSpec) -> Self {
        RawDigitSpec {
            base: spec.base,
            digits: spec.digits,
        }
    }
}

impl TryFrom<RawDigitSpec> for DigitSpec {
    type Error = Error;

    fn try_from(raw: RawDigitSpec) -> Result<Self> {
        DigitSpec::new(raw.base, raw.digits)
    }
}

impl DigitSpec {
    /// Validates and canonicalizes a digit restriction. Digits may arrive in
    /// any order but must be distinct, smaller than the base, and at least
    /// two in number; the base must be at least 2.
    pub fn new(base: u32, mut digits: Vec<u32>) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidSpec(format!(
                "base must be at least 2, got {base}"
            )));
        }
        digits.sort_unstable();
        if digits.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSpec(
                "digit alphabet contains duplicates".into(),
            ));
        }
        if digits.len() < 2 {
            return Err(Error::InvalidSpec(format!(
                "digit alphabet needs at least two digits, got {}",
                digits.len()
            )));
        }
        if let Some(&d) = digits.iter().find(|&&d| d >= base) {
            return Err(Error::InvalidSpec(format!(
                "digit {d} is not below the base {base}"
            )));
        }
        Ok(DigitSpec { base, digits })
    }

    /// Parses either the compact text form `"b=3;D=0,2"` or the JSON form
    /// `{"base":3,"digits":[0,2]}`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.starts_with('{') {
            return serde_json::from_str(text)
                .map_err(|e| Error::InvalidSpec(format!("bad JSON digit spec: {e}")));
        }
        let mut base = None;
        let mut digits = None;
        for field in text.split(';') {
            let field = field.trim();
            if let Some(b) = field.strip_prefix("b=") {
                let b = b
                    .trim()
                    .parse::<u32>()
                    .map_err(|e| Error::InvalidSpec(format!("bad base {b:?}: {e}")))?;
                base = Some(b);
            } else if let Some(list) = field.strip_prefix("D=") {
                let parsed: std::result::Result<Vec<u32>, _> =
                    list.split(',').map(|d| d.trim().parse::<u32>()).collect();
                digits =
                    Some(parsed.map_err(|e| Error::InvalidSpec(format!("bad digit list: {e}")))?);
            } else {
                return Err(Error::InvalidSpec(format!(
                    "unrecognized field {field:?}, expected b=… or D=…"
                )));
            }
        }
        match (base, digits) {
            (Some(b), Some(d)) => DigitSpec::new(b, d),
            _ => Err(Error::InvalidSpec("spec needs both b=… and D=…".into())),
        }
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    /// The digit alphabet, strictly increasing.
    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    /// `|D|`, the branching factor of the enumeration.
    pub fn radix(&self) -> u64 {
        self.digits.len() as u64
    }

    /// Whether `0` is an admissible digit. This switches the indexing scheme
    /// between canonical base-`|D|` digits and bijective numeration.
    pub fn has_zero_digit(&self) -> bool {
        self.digits[0] == 0
    }

    fn digit_position(&self, d: u32) -> Option<u32> {
        self.digits.binary_search(&d).ok().map(|p| p as u32)
    }

    /// Little-endian alphabet positions of index `n` — the digit string of
    /// the `n`-th member, before mapping positions through the alphabet.
    /// Empty exactly for `n = 0` with a zero digit.
    fn index_string(&self, n: u128) -> Vec<u32> {
        let r = self.radix() as u128;
        if self.has_zero_digit() {
            let mut string = Vec::new();
            let mut n = n;
            while n > 0 {
                string.push((n % r) as u32);
                n /= r;
            }
            string
        } else {
            // Bijective numeration: the block of length-L strings covers the
            // r + r^2 + … + r^L lowest indices.
            let mut len = 1usize;
            let mut rem = n;
            let mut block = r;
            while rem >= block {
                rem -= block;
                len += 1;
                match block.checked_mul(r) {
                    Some(next) => block = next,
                    // The next block exceeds u128, so every remaining index
                    // lands in it.
                    None => break,
                }
            }
            let mut string = vec![0u32; len];
            for slot in string.iter_mut() {
                *slot = (rem % r) as u32;
                rem /= r;
            }
            string
        }
    }

    /// The `n`-th member `k_n` of the set (counting from `k_0`).
    pub fn unrank(&self, n: u128) -> Result<u128> {
        let b = self.base as u128;
        let string = self.index_string(n);
        let mut value: u128 = 0;
        let mut pow: u128 = 1;
        for (place, &pos) in string.iter().enumerate() {
            let d = self.digits[pos as usize] as u128;
            value = d
                .checked_mul(pow)
                .and_then(|t| value.checked_add(t))
                .ok_or(Error::Overflow)?;
            if place + 1 < string.len() {
                pow = pow.checked_mul(b).ok_or(Error::Overflow)?;
            }
        }
        Ok(value)
    }

    /// The base-`b` digit sum of `k_n`, indexed by `n`.
    pub fn digit_sum(&self, n: u128) -> u64 {
        self.index_string(n)
            .iter()
            .map(|&pos| self.digits[pos as usize] as u64)
            .sum()
    }

    /// Whether `m` belongs to the set, by checking its digits.
    pub fn contains(&self, m: u128) -> bool {
        let b = self.base as u128;
        if m == 0 {
            return self.has_zero_digit();
        }
        let mut m = m;
        while m > 0 {
            if self.digit_position((m % b) as u32).is_none() {
                return false;
            }
            m /= b;
        }
        true
    }

    /// The index `n` with `k_n = m`, or `None` when `m` is not a member.
    pub fn rank(&self, m: u128) -> Option<u128> {
        let b = self.base as u128;
        let r = self.radix() as u128;
        if m == 0 {
            return self.has_zero_digit().then_some(0);
        }
        let mut positions = Vec::new();
        let mut x = m;
        while x > 0 {
            positions.push(self.digit_position((x % b) as u32)?);
            x /= b;
        }
        // Horner from the top digit reconstructs prefixes of the final index,
        // so every intermediate stays at most the result and cannot overflow.
        let value_of = |positions: &[u32]| {
            positions
                .iter()
                .rev()
                .fold(0u128, |acc, &p| acc * r + p as u128)
        };
        if self.has_zero_digit() {
            Some(value_of(&positions))
        } else {
            let len = positions.len();
            // Indices below the length-`len` block: r + r^2 + … + r^{len-1},
            // bounded by the count of members below b^{len-1} <= m.
            let mut offset: u128 = 0;
            let mut pow = r;
            for j in 1..len {
                offset += pow;
                if j + 1 < len {
                    pow *= r;
                }
            }
            Some(offset + value_of(&positions))
        }
    }

    /// Streaming cursor positioned at `k_0`.
    pub fn cursor(&self) -> Cursor<'_> {
        Cursor::new(self)
    }

    /// Streaming cursor positioned at `k_n`.
    pub fn cursor_at(&self, n: u128) -> Result<Cursor<'_>> {
        Cursor::at(self, n)
    }
}

impl fmt::Display for DigitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b={};D=", self.base)?;
        for (i, d) in self.digits.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for DigitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DigitSpec({self})")
    }
}

/// Odometer over the members in increasing order.
///
/// Keeps the digit string of the current index and updates the member value
/// incrementally, so a full scan of `N` members costs `O(N)` total digit
/// operations instead of `O(N log N)`.
pub struct Cursor<'a> {
    spec: &'a DigitSpec,
    /// Little-endian alphabet positions of the current index (empty exactly
    /// for index 0 with a zero digit).
    string: Vec<u32>,
    value: u128,
    /// `base^c` for every place currently in use, grown lazily.
    pows: Vec<u128>,
}

impl<'a> Cursor<'a> {
    fn new(spec: &'a DigitSpec) -> Self {
        let mut cur = Cursor {
            spec,
            string: Vec::new(),
            value: 0,
            pows: vec![1],
        };
        if !spec.has_zero_digit() {
            cur.string.push(0);
            cur.value = spec.digits[0] as u128;
        }
        cur
    }

    fn at(spec: &'a DigitSpec, n: u128) -> Result<Self> {
        let mut cur = Cursor {
            spec,
            string: spec.index_string(n),
            value: 0,
            pows: vec![1],
        };
        for place in 0..cur.string.len() {
            let d = spec.digits[cur.string[place] as usize] as u128;
            let pow = cur.pow(place)?;
            cur.value = d
                .checked_mul(pow)
                .and_then(|t| cur.value.checked_add(t))
                .ok_or(Error::Overflow)?;
        }
        Ok(cur)
    }

    fn pow(&mut self, place: usize) -> Result<u128> {
        while self.pows.len() <= place {
            let next = self
                .pows
                .last()
                .unwrap()
                .checked_mul(self.spec.base as u128)
                .ok_or(Error::Overflow)?;
            self.pows.push(next);
        }
        Ok(self.pows[place])
    }

    /// The current member `k_n`.
    pub fn value(&self) -> u128 {
        self.value
    }

    /// The base-`b` digit sum of the current member.
    pub fn digit_sum(&self) -> u64 {
        self.string
            .iter()
            .map(|&pos| self.spec.digits[pos as usize] as u64)
            .sum()
    }

    /// Steps to the next member. Fails only when the value leaves `u128`.
    pub fn advance(&mut self) -> Result<()> {
        let digits = &self.spec.digits;
        let top = digits.len() - 1;
        let mut place = 0;
        loop {
            if place == self.string.len() {
                // Every digit rolled over: the string lengthens. With a zero
                // digit the new representation is `1 0 … 0`; in bijective
                // numeration it is the all-lowest-digit string, one longer.
                let lead = usize::from(self.spec.has_zero_digit());
                let grow = (digits[lead] as u128) * self.pow(place)?;
                self.value = self.value.checked_add(grow).ok_or(Error::Overflow)?;
                self.string.push(lead as u32);
                return Ok(());
            }
            let pos = self.string[place] as usize;
            if pos < top {
                let rise = ((digits[pos + 1] - digits[pos]) as u128) * self.pow(place)?;
                self.value = self.value.checked_add(rise).ok_or(Error::Overflow)?;
                self.string[place] = (pos + 1) as u32;
                return Ok(());
            }
            // This place rolls from the highest digit back to the lowest.
            let drop = ((digits[top] - digits[0]) as u128) * self.pow(place)?;
            self.value -= drop;
            self.string[place] = 0;
            place += 1;
        }
    }
}

/// One arithmetic progression of indices: `start, start+step, start+2·step, …`
/// continued while the terms stay inside the analysed window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ApRun {
    pub start: u64,
    /// Always a power of the alphabet size `|D|`.
    pub step: u64,
}

impl ApRun {
    /// The indices the run covers inside `[0, window)`.
    pub fn expand(&self, window: u64) -> impl Iterator<Item = u64> {
        (self.start..window).step_by(self.step as usize)
    }
}

/// The indices sharing one consecutive-difference class, plus their
/// decomposition into power-step progressions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaClass {
    /// All `n` in the window with the class's difference and digit-sum jump,
    /// increasing.
    pub indices: Vec<u64>,
    /// Disjoint progressions covering `indices` exactly; every step is a
    /// power of `|D|`.
    pub runs: Vec<ApRun>,
}

/// Consecutive-difference structure of the first `n_limit` members.
///
/// For each `n ∈ [0, n_limit − h)` the pair
/// `(k_{n+h} − k_n, digit_sum jump)` names a class; the map below groups the
/// indices by class and decomposes every class into arithmetic progressions
/// whose steps are powers of `|D|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaStructure {
    pub h: u64,
    pub n_limit: u64,
    classes: BTreeMap<(u128, i64), DeltaClass>,
}

impl DeltaStructure {
    /// Number of indices analysed: `n_limit − h`.
    pub fn window(&self) -> u64 {
        self.n_limit - self.h
    }

    /// Classes in increasing order of `(difference, digit-sum jump)`.
    pub fn classes(&self) -> impl Iterator<Item = (&(u128, i64), &DeltaClass)> {
        self.classes.iter()
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class(&self, difference: u128, sum_jump: i64) -> Option<&DeltaClass> {
        self.classes.get(&(difference, sum_jump))
    }
}

/// Groups `k_{n+h} − k_n` for `n ∈ [0, n_limit − h)` by value and digit-sum
/// jump, and decomposes each group into power-step progressions.
pub fn delta_star(spec: &DigitSpec, h: u64, n_limit: u64) -> Result<DeltaStructure> {
    if h == 0 {
        return Err(Error::Domain(
            "difference offset h must be at least 1".into(),
        ));
    }
    if n_limit < h {
        return Err(Error::Domain(format!(
            "prefix length {n_limit} is shorter than the difference offset {h}"
        )));
    }
    let window = n_limit - h;
    let mut classes: BTreeMap<(u128, i64), Vec<u64>> = BTreeMap::new();
    // One pass with a ring of the last h+1 (value, digit sum) pairs.
    let mut ring: Vec<(u128, i64)> = Vec::with_capacity(h as usize + 1);
    let mut cursor = spec.cursor();
    for _ in 0..=h {
        ring.push((cursor.value(), cursor.digit_sum() as i64));
        cursor.advance()?;
    }
    for n in 0..window {
        let slot = (n % (h + 1)) as usize;
        let (value, sum) = ring[slot];
        let (next_value, next_sum) = ring[((n + h) % (h + 1)) as usize];
        classes
            .entry((next_value - value, next_sum - sum))
            .or_default()
            .push(n);
        if n + 1 < window {
            ring[slot] = (cursor.value(), cursor.digit_sum() as i64);
            cursor.advance()?;
        }
    }
    let radix = spec.radix();
    let classes = classes
        .into_iter()
        .map(|(key, indices)| {
            let runs = decompose_power_runs(&indices, radix, window);
            (key, DeltaClass { indices, runs })
        })
        .collect();
    Ok(DeltaStructure {
        h,
        n_limit,
        classes,
    })
}

/// Greedy cover of a sorted index set by progressions with power-of-`radix`
/// steps: repeatedly take the least uncovered index and the smallest power
/// step whose full expansion inside `[0, window)` stays uncovered. Once the
/// step reaches past the window the expansion is the single start index, so
/// the greedy step always succeeds and the cover is exact and disjoint.
fn decompose_power_runs(indices: &[u64], radix: u64, window: u64) -> Vec<ApRun> {
    let mut covered = vec![false; indices.len()];
    let mut runs = Vec::new();
    for first in 0..indices.len() {
        if covered[first] {
            continue;
        }
        let start = indices[first];
        let mut step = 1u64;
        loop {
            let span: Option<Vec<usize>> = (start..window)
                .step_by(step.max(1) as usize)
                .map(|i| {
                    indices
                        .binary_search(&i)
                        .ok()
                        .filter(|&slot| !covered[slot])
                })
                .collect();
            if let Some(slots) = span {
                for slot in slots {
                    covered[slot] = true;
                }
                runs.push(ApRun { start, step });
                break;
            }
            step = step.saturating_mul(radix);
        }
    }
    runs
}

/// Checks the two self-similarity identities at one triple `(i, n, j)` with
/// `j < |D|^i`: the member at index `|D|^i · n + j` must equal
/// `b^i · k_n + k_j`, and its digit sum must be the sum of the two digit
/// sums. Both hold for every triple when `0` is an admissible digit; without
/// a zero digit the value identity generally fails, and the check reports
/// that honestly rather than erroring.
pub fn self_similarity_check(spec: &DigitSpec, i: u32, n: u128, j: u128) -> Result<bool> {
    let cap = (spec.radix() as u128).checked_pow(i);
    if let Some(cap) = cap {
        if j >= cap {
            return Err(Error::Domain(format!(
                "offset j={j} must be below |D|^i = {cap}"
            )));
        }
    }
    let scaled = if n == 0 {
        j
    } else {
        cap.and_then(|c| c.checked_mul(n))
            .and_then(|t| t.checked_add(j))
            .ok_or(Error::Overflow)?
    };
    let lhs_value = spec.unrank(scaled)?;
    let lhs_sum = spec.digit_sum(scaled);
    let b_pow = (spec.base as u128).checked_pow(i).ok_or(Error::Overflow)?;
    let k_n = spec.unrank(n)?;
    let k_j = spec.unrank(j)?;
    let rhs_value = b_pow
        .checked_mul(k_n)
        .and_then(|t| t.checked_add(k_j))
        .ok_or(Error::Overflow)?;
    let rhs_sum = spec.digit_sum(n) + spec.digit_sum(j);
    Ok(lhs_value == rhs_value && lhs_sum == rhs_sum)
}
