//! Progression searches with member steps, and density recurrence.
//!
//! The questions here all have the shape "which arithmetic progressions
//! `x, x+r, …, x+(t−1)r` exist when the step `r` must be a nonzero member of
//! a digit-restricted set": finding monochromatic progressions under a
//! coloring of `[1, W]`, computing restricted van der Waerden numbers by
//! exhaustive search, certifying that sums of members at separated scales
//! stay members, and measuring how often a dense set of integers recurs
//! along member steps.
//!
//! Searches are exact and exhaustive; long-running ones carry an explicit
//! node budget and report their deepest certified prefix when they abort.

use num::{BigInt, BigRational};
use serde::Serialize;

use crate::digits::DigitSpec;
use crate::error::{Error, Result};
use crate::intset::IntegerSet;

/// A coloring of the integers `1..=width` with colors `0..palette`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring {
    colors: Vec<u8>,
    palette: u8,
}

impl Coloring {
    /// Wraps explicit colors (position `x` gets `colors[x-1]`); the palette
    /// is the largest color plus one.
    pub fn new(colors: Vec<u8>) -> Result<Self> {
        if colors.is_empty() {
            return Err(Error::Domain("coloring of an empty interval".into()));
        }
        let palette = colors.iter().max().unwrap() + 1;
        Ok(Coloring { colors, palette })
    }

    /// Parses a pattern of color symbols — letters `A…Z` or digits `0…9` —
    /// and tiles it periodically to cover `1..=width`.
    pub fn from_pattern(pattern: &str, width: u64) -> Result<Self> {
        if width == 0 {
            return Err(Error::InvalidInput(
                "coloring width must be at least 1".into(),
            ));
        }
        if width > 1 << 24 {
            return Err(Error::InvalidInput(format!(
                "coloring width {width} is too large"
            )));
        }
        let symbols: Vec<u8> = pattern
            .trim()
            .bytes()
            .map(|b| match b {
                b'A'..=b'Z' => Ok(b - b'A'),
                b'0'..=b'9' => Ok(b - b'0'),
                other => Err(Error::InvalidInput(format!(
                    "bad color symbol {:?}; use A-Z or 0-9",
                    other as char
                ))),
            })
            .collect::<Result<_>>()?;
        if symbols.is_empty() {
            return Err(Error::InvalidInput("empty color pattern".into()));
        }
        let colors = (0..width as usize)
            .map(|i| symbols[i % symbols.len()])
            .collect();
        Coloring::new(colors)
    }

    /// Right end of the colored interval `[1, width]`.
    pub fn width(&self) -> u64 {
        self.colors.len() as u64
    }

    /// Number of colors (largest color used plus one).
    pub fn palette(&self) -> u8 {
        self.palette
    }

    /// Color of `x ∈ [1, width]`.
    pub fn color(&self, x: u64) -> u8 {
        self.colors[x as usize - 1]
    }
}

/// A monochromatic arithmetic progression `x, x+r, …, x+(t−1)·r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonoProgression {
    pub start: u64,
    /// A nonzero member of the set. For single-point progressions (`t = 1`)
    /// the step is recorded by convention as the least nonzero member but
    /// plays no role.
    pub step: u128,
    pub len: u32,
    pub color: u8,
}

impl MonoProgression {
    /// The points of the progression.
    pub fn points(&self) -> Vec<u128> {
        (0..self.len as u128)
            .map(|j| self.start as u128 + j * self.step)
            .collect()
    }
}

/// Nonzero members `r` of the set with `(t−1)·r ≤ span`, increasing.
fn progression_steps(spec: &DigitSpec, t: u32, span: u64) -> Result<Vec<u64>> {
    debug_assert!(t >= 2);
    let mut steps = Vec::new();
    let mut cursor = spec.cursor();
    loop {
        let r = cursor.value();
        if r != 0 {
            if (t as u128 - 1) * r > span as u128 {
                return Ok(steps);
            }
            steps.push(r as u64);
        }
        cursor.advance()?;
    }
}

/// Finds the first monochromatic `t`-term progression whose step is a
/// nonzero member, scanning steps in increasing member order and starts in
/// increasing position order.
pub fn find_mono_progression(
    coloring: &Coloring,
    t: u32,
    spec: &DigitSpec,
) -> Result<Option<MonoProgression>> {
    if t == 0 {
        return Err(Error::Domain(
            "progression length t must be at least 1".into(),
        ));
    }
    let width = coloring.width();
    if t == 1 {
        // Single points are progressions for every step; report the least
        // point with the least nonzero member as the conventional witness.
        let mut cursor = spec.cursor_at(1)?;
        while cursor.value() == 0 {
            cursor.advance()?;
        }
        return Ok(Some(MonoProgression {
            start: 1,
            step: cursor.value(),
            len: 1,
            color: coloring.color(1),
        }));
    }
    for r in progression_steps(spec, t, width - 1)? {
        let reach = (t as u64 - 1) * r;
        for x in 1..=width - reach {
            let color = coloring.color(x);
            if (1..t as u64).all(|j| coloring.color(x + j * r) == color) {
                return Ok(Some(MonoProgression {
                    start: x,
                    step: r as u128,
                    len: t,
                    color,
                }));
            }
        }
    }
    Ok(None)
}

/// Independent witness checker: every point must sit inside the colored
/// interval and carry the claimed color, and the step must be a nonzero
/// member (for `t ≥ 2`).
pub fn verify_mono_progression(
    coloring: &Coloring,
    spec: &DigitSpec,
    witness: &MonoProgression,
) -> bool {
    if witness.len == 0 || witness.start == 0 {
        return false;
    }
    if witness.len >= 2 && (witness.step == 0 || !spec.contains(witness.step)) {
        return false;
    }
    witness.points().iter().all(|&p| {
        p >= 1 && p <= coloring.width() as u128 && coloring.color(p as u64) == witness.color
    })
}

/// Outcome of a restricted van der Waerden search up to a width cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CvdwOutcome {
    /// The least width `W` such that every coloring of `[1, W]` contains a
    /// monochromatic `t`-term progression with a nonzero member step.
    Number(u64),
    /// Some coloring of the full `[1, w_max]` avoids such progressions, so
    /// the number (if finite) exceeds the cap.
    UnknownUpTo(u64),
}

/// Computes the restricted van der Waerden number by depth-first search
/// over colorings with earliest-violation pruning.
///
/// The search colors positions `1, 2, …` in order (the first position is
/// pinned to color 0 by symmetry), prunes as soon as a monochromatic
/// progression ends at the newest position, and tracks the deepest
/// progression-free prefix ever certified. If no coloring survives to width
/// `w_max`, the answer is that deepest width plus one.
///
/// Aborts with [`Error::BudgetExhausted`] — carrying the node count and the
/// deepest certified width — once more than `node_budget` assignments have
/// been tried.
pub fn cvdw_number(
    spec: &DigitSpec,
    t: u32,
    palette: u8,
    w_max: u64,
    node_budget: u64,
) -> Result<CvdwOutcome> {
    if t == 0 {
        return Err(Error::Domain(
            "progression length t must be at least 1".into(),
        ));
    }
    if palette == 0 {
        return Err(Error::Domain("at least one color is required".into()));
    }
    if w_max == 0 || w_max > 1 << 22 {
        return Err(Error::Domain(format!(
            "width cap {w_max} out of range [1, 2^22]"
        )));
    }
    if t == 1 {
        // A single point is already a progression.
        return Ok(CvdwOutcome::Number(1));
    }
    let steps = progression_steps(spec, t, w_max - 1)?;
    let width = w_max as usize;
    let mut assignment = vec![0u8; width];
    let mut next_color = vec![0u8; width];
    let mut pos = 0usize;
    let mut deepest = 0u64;
    let mut nodes = 0u64;
    loop {
        // The first position is pinned to color 0: palettes are symmetric.
        let limit = if pos == 0 { 1 } else { palette };
        if next_color[pos] >= limit {
            if pos == 0 {
                break;
            }
            next_color[pos] = 0;
            pos -= 1;
            continue;
        }
        let color = next_color[pos];
        next_color[pos] += 1;
        nodes += 1;
        if nodes > node_budget {
            return Err(Error::BudgetExhausted { nodes, deepest });
        }
        assignment[pos] = color;
        if ends_mono_progression(&assignment, pos, t, &steps) {
            continue;
        }
        deepest = deepest.max(pos as u64 + 1);
        if pos + 1 == width {
            return Ok(CvdwOutcome::UnknownUpTo(w_max));
        }
        pos += 1;
    }
    Ok(CvdwOutcome::Number(deepest + 1))
}

/// Whether a monochromatic `t`-term progression with step in `steps` ends
/// at the newest colored position (0-based `pos`).
fn ends_mono_progression(assignment: &[u8], pos: usize, t: u32, steps: &[u64]) -> bool {
    let color = assignment[pos];
    for &r in steps {
        let reach = (t as u64 - 1) * r;
        if reach > pos as u64 {
            // Steps are increasing: later ones reach further back.
            return false;
        }
        if (1..t as u64).all(|j| assignment[pos - (j * r) as usize] == color) {
            return true;
        }
    }
    false
}

/// One scale-separated part: the member `base^height · root`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScalePart {
    pub height: u32,
    pub root: u128,
}

/// The sum of one consecutive block of parts, and whether it is a member.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BlockSum {
    /// Inclusive 0-based part indices.
    pub from: usize,
    pub to: usize,
    pub sum: u128,
    pub member: bool,
}

/// Result of a sum-closure certification.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosureReport {
    /// The part values `base^height · root`.
    pub elements: Vec<u128>,
    /// Whether each part's scale clears the total mass below it
    /// (`base^height > sum of earlier elements`) — the precondition under
    /// which certification is guaranteed to succeed with a zero digit.
    pub scales_disjoint: bool,
    /// Whether every consecutive block sum is a nonzero member.
    pub certified: bool,
    pub blocks: Vec<BlockSum>,
}

/// Certifies that all consecutive-block sums of scale-separated members are
/// again nonzero members.
///
/// Each part contributes `base^height · root` where `root` must itself be a
/// nonzero member. The report separates the scale-separation precondition
/// from the certified conclusion, so a failing precondition with a failing
/// conclusion is visible as exactly that rather than as an error.
pub fn sum_closure_certify(spec: &DigitSpec, parts: &[ScalePart]) -> Result<ClosureReport> {
    if parts.is_empty() {
        return Err(Error::Domain("sum closure needs at least one part".into()));
    }
    let base = spec.base() as u128;
    let mut elements = Vec::with_capacity(parts.len());
    for part in parts {
        if part.root == 0 || !spec.contains(part.root) {
            return Err(Error::Domain(format!(
                "part root {} is not a nonzero member",
                part.root
            )));
        }
        let scale = base.checked_pow(part.height).ok_or(Error::Overflow)?;
        elements.push(scale.checked_mul(part.root).ok_or(Error::Overflow)?);
    }
    let mut scales_disjoint = true;
    let mut mass_below: u128 = 0;
    for (part, &element) in parts.iter().zip(&elements) {
        let scale = base.pow(part.height);
        if scale <= mass_below {
            scales_disjoint = false;
        }
        mass_below = mass_below.checked_add(element).ok_or(Error::Overflow)?;
    }
    let mut blocks = Vec::new();
    let mut certified = true;
    for from in 0..elements.len() {
        let mut sum: u128 = 0;
        for (to, &element) in elements.iter().enumerate().skip(from) {
            sum = sum.checked_add(element).ok_or(Error::Overflow)?;
            let member = sum != 0 && spec.contains(sum);
            certified &= member;
            blocks.push(BlockSum {
                from,
                to,
                sum,
                member,
            });
        }
    }
    Ok(ClosureReport {
        elements,
        scales_disjoint,
        certified,
        blocks,
    })
}

/// Which way recurrence translates: forward tests `x + j·k ∈ A`, backward
/// tests `x − j·k ∈ A`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Counts the points of `set` that start an `ell`-term progression with
/// step `k` staying inside `set`.
fn recurrence_count(set: &IntegerSet, ell: u32, k: u128, direction: Direction) -> IntegerSet {
    let mut working = set.clone();
    for j in 1..ell as u128 {
        let Some(reach) = j.checked_mul(k) else {
            return empty_like(set);
        };
        if reach > set.upper() as u128 {
            return empty_like(set);
        }
        let shift = match direction {
            Direction::Forward => reach as i128,
            Direction::Backward => -(reach as i128),
        };
        working.intersect_translated(set, shift);
        if working.is_empty() {
            break;
        }
    }
    working
}

fn empty_like(set: &IntegerSet) -> IntegerSet {
    IntegerSet::empty(set.upper()).expect("ambient interval is nonempty")
}

/// The exact density average
/// `(1/(M·N)) Σ_{n<N} #{x ∈ [1,M] : x, x±k_n, …, x±(ℓ−1)k_n all in A}`.
pub fn density_recurrence_average(
    set: &IntegerSet,
    spec: &DigitSpec,
    ell: u32,
    n: u64,
    direction: Direction,
) -> Result<BigRational> {
    if ell == 0 {
        return Err(Error::Domain(
            "recurrence order ell must be at least 1".into(),
        ));
    }
    if n == 0 {
        return Err(Error::Domain(
            "recurrence average over an empty prefix".into(),
        ));
    }
    let mut total: u128 = 0;
    let mut cursor = spec.cursor();
    for i in 0..n {
        total += recurrence_count(set, ell, cursor.value(), direction).len() as u128;
        if i + 1 < n {
            cursor.advance()?;
        }
    }
    let denominator = BigInt::from(set.upper()) * BigInt::from(n);
    Ok(BigRational::new(BigInt::from(total), denominator))
}

/// One member index whose step admits at least one full progression inside
/// the set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CensusEntry {
    /// Index `n` of the member.
    pub index: u64,
    /// The member `k_n` itself. Index 0 of a zero-digit alphabet contributes
    /// the degenerate step 0, which the census reports like any other.
    pub step: u128,
    /// Least progression start.
    pub first_witness: u64,
    /// Number of progression starts.
    pub witness_count: u64,
}

/// The set `B = {n < N : some x starts a full progression with step k_n}`,
/// with one witness per member.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CensusReport {
    pub n_limit: u64,
    pub ell: u32,
    /// Ambient interval end `M`.
    pub upper: u64,
    pub entries: Vec<CensusEntry>,
}

impl CensusReport {
    /// `|B| / N`.
    pub fn density(&self) -> BigRational {
        BigRational::new(BigInt::from(self.entries.len()), BigInt::from(self.n_limit))
    }
}

/// Enumerates which of the first `n` member steps recur in `set` at order
/// `ell`, with the least witness and the witness count for each.
pub fn step_census(
    set: &IntegerSet,
    spec: &DigitSpec,
    ell: u32,
    n: u64,
    direction: Direction,
) -> Result<CensusReport> {
    if ell == 0 {
        return Err(Error::Domain(
            "recurrence order ell must be at least 1".into(),
        ));
    }
    if n == 0 {
        return Err(Error::Domain("census over an empty prefix".into()));
    }
    let mut entries = Vec::new();
    let mut cursor = spec.cursor();
    for index in 0..n {
        let starts = recurrence_count(set, ell, cursor.value(), direction);
        if let Some(first_witness) = starts.first() {
            entries.push(CensusEntry {
                index,
                step: cursor.value(),
                first_witness,
                witness_count: starts.len(),
            });
        }
        if index + 1 < n {
            cursor.advance()?;
        }
    }
    Ok(CensusReport {
        n_limit: n,
        ell,
        upper: set.upper(),
        entries,
    })
}

/// Independent check of one census entry: recomputes the step from the
/// index, walks the claimed witness pointwise, and recounts all witnesses
/// by direct membership tests.
pub fn verify_census_entry(
    set: &IntegerSet,
    spec: &DigitSpec,
    ell: u32,
    direction: Direction,
    entry: &CensusEntry,
) -> bool {
    let Ok(step) = spec.unrank(entry.index as u128) else {
        return false;
    };
    if step != entry.step {
        return false;
    }
    let starts_progression = |x: u64| {
        (0..ell as u128).all(|j| {
            let Some(reach) = j.checked_mul(step) else {
                return false;
            };
            let point = match direction {
                Direction::Forward => x as i128 + reach as i128,
                Direction::Backward => x as i128 - reach as i128,
            };
            point >= 1 && point <= set.upper() as i128 && set.contains(point as u64)
        })
    };
    if !starts_progression(entry.first_witness) {
        return false;
    }
    if (1..entry.first_witness).any(starts_progression) {
        return false;
    }
    let count = (1..=set.upper()).filter(|&x| starts_progression(x)).count() as u64;
    count == entry.witness_count
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(b: u32, digits: &[u32]) -> DigitSpec {
        DigitSpec::new(b, digits.to_vec()).unwrap()
    }

    fn three_z() -> IntegerSet {
        IntegerSet::parse("3*Z & [1,3072]").unwrap()
    }

    #[test]
    fn pattern_colorings_tile() {
        let c = Coloring::from_pattern("AABB", 10).unwrap();
        assert_eq!(c.width(), 10);
        assert_eq!(c.palette(), 2);
        assert_eq!(
            (1..=10).map(|x| c.color(x)).collect::<Vec<_>>(),
            vec![0, 0, 1, 1, 0, 0, 1, 1, 0, 0]
        );
        assert_eq!(
            Coloring::from_pattern("01", 4).unwrap(),
            Coloring::from_pattern("AB", 4).unwrap()
        );
        assert!(Coloring::from_pattern("a", 4).is_err());
        assert!(Coloring::from_pattern("", 4).is_err());
        assert!(Coloring::from_pattern("A", 0).is_err());
    }

    #[test]
    fn find_progression_examples() {
        let s = spec(3, &[0, 2]);
        // Single color: the first 2-term progression uses the least member
        // step 2 at the least start 1.
        let mono = Coloring::from_pattern("A", 16).unwrap();
        let w = find_mono_progression(&mono, 2, &s).unwrap().unwrap();
        assert_eq!((w.start, w.step, w.len, w.color), (1, 2, 2, 0));
        assert!(verify_mono_progression(&mono, &s, &w));

        // AABB repeated over [1,16]: no step-2 progression survives, the
        // first witness jumps to step 8.
        let striped = Coloring::from_pattern("AABB", 16).unwrap();
        let w = find_mono_progression(&striped, 2, &s).unwrap().unwrap();
        assert_eq!((w.start, w.step), (1, 8));
        assert!(verify_mono_progression(&striped, &s, &w));

        // Single-point convention.
        let w = find_mono_progression(&striped, 1, &s).unwrap().unwrap();
        assert_eq!((w.start, w.step, w.len), (1, 2, 1));
        assert!(verify_mono_progression(&striped, &s, &w));

        // Three-term progressions need width beyond 2·8: none in [1,16]
        // avoiding color mixing… but the all-A coloring has 1,3,5.
        let w = find_mono_progression(&mono, 3, &s).unwrap().unwrap();
        assert_eq!((w.start, w.step, w.len), (1, 2, 3));
    }

    #[test]
    fn verify_rejects_corrupted_witnesses() {
        let s = spec(3, &[0, 2]);
        let striped = Coloring::from_pattern("AABB", 16).unwrap();
        let good = find_mono_progression(&striped, 2, &s).unwrap().unwrap();
        let mut bad = good.clone();
        bad.step = 4; // not a member
        assert!(!verify_mono_progression(&striped, &s, &bad));
        let mut bad = good.clone();
        bad.start = 3; // color mismatch (positions 3 and 11 are B, A)
        assert!(!verify_mono_progression(&striped, &s, &bad));
        let mut bad = good;
        bad.start = 16; // walks outside the interval
        assert!(!verify_mono_progression(&striped, &s, &bad));
    }

    #[test]
    fn cvdw_reference_values() {
        let s = spec(3, &[0, 2]);
        assert_eq!(
            cvdw_number(&s, 2, 1, 64, 1 << 20).unwrap(),
            CvdwOutcome::Number(3)
        );
        assert_eq!(
            cvdw_number(&s, 3, 1, 64, 1 << 20).unwrap(),
            CvdwOutcome::Number(5)
        );
        assert_eq!(
            cvdw_number(&s, 2, 2, 64, 1 << 20).unwrap(),
            CvdwOutcome::Number(9)
        );
        assert_eq!(
            cvdw_number(&s, 1, 3, 64, 1 << 20).unwrap(),
            CvdwOutcome::Number(1)
        );
    }

    #[test]
    fn cvdw_honors_width_cap_and_budget() {
        let s = spec(3, &[0, 2]);
        // Width 4 cannot reach the two-color number 9.
        assert_eq!(
            cvdw_number(&s, 2, 2, 4, 1 << 20).unwrap(),
            CvdwOutcome::UnknownUpTo(4)
        );
        let aborted = cvdw_number(&s, 3, 2, 64, 25);
        match aborted {
            Err(Error::BudgetExhausted { nodes, deepest }) => {
                assert_eq!(nodes, 26);
                assert!(deepest >= 1);
            }
            other => panic!("expected budget abort, got {other:?}"),
        }
    }

    /// All-colorings brute force over widths 1..=cap, entirely independent
    /// of the search tree.
    fn cvdw_brute(spec: &DigitSpec, t: u32, palette: u8, cap: u64) -> Option<u64> {
        'widths: for width in 1..=cap {
            let mut colors = vec![0u8; width as usize];
            loop {
                let coloring = Coloring {
                    colors: colors.clone(),
                    palette,
                };
                if find_mono_progression(&coloring, t, spec).unwrap().is_none() {
                    // This coloring avoids progressions: width too small.
                    let mut slot = 0;
                    loop {
                        if slot == colors.len() {
                            continue 'widths;
                        }
                        colors[slot] += 1;
                        if colors[slot] < palette {
                            break;
                        }
                        colors[slot] = 0;
                        slot += 1;
                    }
                } else {
                    let mut slot = 0;
                    loop {
                        if slot == colors.len() {
                            return Some(width);
                        }
                        colors[slot] += 1;
                        if colors[slot] < palette {
                            break;
                        }
                        colors[slot] = 0;
                        slot += 1;
                    }
                }
            }
        }
        None
    }

    #[test]
    fn cvdw_agrees_with_brute_force() {
        let s = spec(3, &[0, 2]);
        assert_eq!(cvdw_brute(&s, 2, 1, 12), Some(3));
        assert_eq!(cvdw_brute(&s, 3, 1, 12), Some(5));
        let z = spec(3, &[1, 2]);
        let searched = cvdw_number(&z, 2, 1, 32, 1 << 20).unwrap();
        assert_eq!(
            searched,
            CvdwOutcome::Number(cvdw_brute(&z, 2, 1, 12).unwrap())
        );
    }

    #[test]
    fn closure_certificates() {
        let s = spec(3, &[0, 2]);
        // 6 = 3·2 and 54 = 27·2: blocks 6, 54, 60 are all members.
        let report = sum_closure_certify(
            &s,
            &[
                ScalePart { height: 1, root: 2 },
                ScalePart { height: 3, root: 2 },
            ],
        )
        .unwrap();
        assert_eq!(report.elements, vec![6, 54]);
        assert!(report.scales_disjoint);
        assert!(report.certified);
        assert_eq!(report.blocks.len(), 3);
        assert!(report.blocks.iter().all(|b| b.member));

        // Overlapping scales: 2 + 2 = 4 is not a member.
        let report = sum_closure_certify(
            &s,
            &[
                ScalePart { height: 0, root: 2 },
                ScalePart { height: 0, root: 2 },
            ],
        )
        .unwrap();
        assert!(!report.scales_disjoint);
        assert!(!report.certified);
        let bad = report.blocks.iter().find(|b| !b.member).unwrap();
        assert_eq!((bad.from, bad.to, bad.sum), (0, 1, 4));

        assert!(matches!(
            sum_closure_certify(&s, &[ScalePart { height: 2, root: 5 }]),
            Err(Error::Domain(_))
        ));
        assert!(sum_closure_certify(&s, &[]).is_err());
    }

    proptest! {
        /// With a zero digit and genuinely separated scales, certification
        /// must always succeed: the digit strings cannot interact.
        #[test]
        fn separated_scales_always_certify(roots in proptest::collection::vec(0u128..200, 1..5)) {
            let s = spec(3, &[0, 2]);
            let mut parts = Vec::new();
            let mut height = 0u32;
            for seed in roots {
                let root = s.unrank(seed % 64 + 1).unwrap();
                parts.push(ScalePart { height, root });
                // Next scale clears everything below: 3^height grows past
                // the running sum because each element < 3^(height+6)·2.
                height += 7 + root.ilog(3);
            }
            let report = sum_closure_certify(&s, &parts).unwrap();
            prop_assert!(report.scales_disjoint);
            prop_assert!(report.certified);
        }
    }

    #[test]
    fn density_recurrence_reference_values() {
        let s = spec(3, &[0, 2]);
        let a = three_z();
        let forward = density_recurrence_average(&a, &s, 2, 1 << 6, Direction::Forward).unwrap();
        assert_eq!(
            forward,
            BigRational::new(BigInt::from(301), BigInt::from(2048))
        );
        let backward = density_recurrence_average(&a, &s, 2, 1 << 6, Direction::Backward).unwrap();
        assert_eq!(forward, backward);
    }

    #[test]
    fn census_reference_values() {
        let s = spec(3, &[0, 2]);
        let a = three_z();
        let census = step_census(&a, &s, 3, 1 << 8, Direction::Forward).unwrap();
        assert_eq!(census.entries.len(), 39);
        assert_eq!(
            census.density(),
            BigRational::new(BigInt::from(39), BigInt::from(256))
        );
        // The first few recurring steps are the members ≡ 0 (mod 3) small
        // enough to fit two jumps inside [1, 3072], all witnessed first at 3.
        let head: Vec<(u64, u128, u64)> = census
            .entries
            .iter()
            .take(4)
            .map(|e| (e.index, e.step, e.first_witness))
            .collect();
        assert_eq!(head, vec![(0, 0, 3), (2, 6, 3), (4, 18, 3), (6, 24, 3)]);
        for entry in census.entries.iter().take(8) {
            assert!(verify_census_entry(&a, &s, 3, Direction::Forward, entry));
        }
        // Full-interval rule for a modulus-aligned ambient set: a step
        // recurs exactly when it is divisible by 3 and (ℓ−1)·k < M.
        for entry in &census.entries {
            assert_eq!(entry.step % 3, 0);
            assert!(2 * entry.step < 3072);
        }

        let pairs = step_census(&a, &s, 2, 1 << 10, Direction::Forward).unwrap();
        assert_eq!(pairs.entries.len(), 64);
        assert_eq!(
            pairs.density(),
            BigRational::new(BigInt::from(1), BigInt::from(16))
        );
    }

    #[test]
    fn census_backward_direction_flips_witnesses() {
        let s = spec(3, &[0, 2]);
        let a = three_z();
        let backward = step_census(&a, &s, 3, 1 << 8, Direction::Backward).unwrap();
        assert_eq!(backward.entries.len(), 39);
        // Step 6 backward: the least x with x, x-6, x-12 all in A is 15.
        let entry = backward.entries.iter().find(|e| e.step == 6).unwrap();
        assert_eq!(entry.first_witness, 15);
        assert!(verify_census_entry(&a, &s, 3, Direction::Backward, entry));
    }

    #[test]
    fn recurrence_rejects_degenerate_requests() {
        let s = spec(3, &[0, 2]);
        let a = three_z();
        assert!(density_recurrence_average(&a, &s, 0, 16, Direction::Forward).is_err());
        assert!(density_recurrence_average(&a, &s, 2, 0, Direction::Forward).is_err());
        assert!(step_census(&a, &s, 0, 16, Direction::Forward).is_err());
    }

    proptest! {
        /// Census entries must verify, and indices outside the census must
        /// genuinely admit no witness.
        #[test]
        fn census_is_sound_and_complete(n_limit in 1u64..40, ell in 1u32..4) {
            let s = spec(3, &[0, 2]);
            let a = IntegerSet::parse("3*Z & [1,300]").unwrap();
            let census = step_census(&a, &s, ell, n_limit, Direction::Forward).unwrap();
            for entry in &census.entries {
                prop_assert!(verify_census_entry(&a, &s, ell, Direction::Forward, entry));
            }
            let listed: std::collections::BTreeSet<u64> =
                census.entries.iter().map(|e| e.index).collect();
            for index in 0..n_limit {
                if listed.contains(&index) {
                    continue;
                }
                let step = s.unrank(index as u128).unwrap();
                let found = (1..=300u64).any(|x| {
                    (0..ell as u128).all(|j| {
                        let p = x as u128 + j * step;
                        p <= 300 && a.contains(p as u64)
                    })
                });
                prop_assert!(!found, "index {index} (step {step}) missing from census");
            }
        }
    }
}
