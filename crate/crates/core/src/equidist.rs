//! Distribution statistics along the member sequence.
//!
//! How do the members `k_0 < k_1 < …` of a digit-restricted set spread out?
//! This module measures three classical statistics over index prefixes
//! `n < N`:
//!
//! * residue counts of `k_n` modulo `q` (exact integers);
//! * normalized exponential sums `(1/N) Σ e(α·k_n)` — the Weyl sums whose
//!   decay witnesses equidistribution of `α·k_n` mod 1, including the
//!   rational case `α = p/q` (the Fourier coefficients of the residue
//!   distribution);
//! * the star discrepancy of the phase sequence `{α·k_n}`.
//!
//! Exponential sums are summed term by term with Kahan compensation inside
//! fixed-size chunks that are combined in order, so results are bitwise
//! independent of the number of worker threads.

use std::io::{self, Write};

use num::complex::Complex64;

use crate::alpha::Alpha;
use crate::digits::DigitSpec;
use crate::error::{Error, Result};

/// Terms per summation chunk. Fixing the chunk geometry (rather than
/// deriving it from the thread count) keeps results byte-identical no matter
/// how the chunks are scheduled.
const CHUNK: u64 = 16_384;

/// Kahan-compensated accumulator for complex terms.
#[derive(Clone, Copy, Default)]
struct Kahan {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
}

impl Kahan {
    fn add(&mut self, z: Complex64) {
        let y = z.re - self.re_c;
        let t = self.re + y;
        self.re_c = (t - self.re) - y;
        self.re = t;
        let y = z.im - self.im_c;
        let t = self.im + y;
        self.im_c = (t - self.im) - y;
        self.im = t;
    }

    fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Exact residue counts of the first `n` members modulo `q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueDistribution {
    pub q: u64,
    /// Number of members counted.
    pub n: u64,
    /// `counts[a]` = #{ n' < n : k_{n'} ≡ a (mod q) }.
    pub counts: Vec<u64>,
}

impl ResidueDistribution {
    /// Empirical frequency of residue `a` as a float; the exact value is
    /// `counts[a] / n`.
    pub fn frequency(&self, a: u64) -> f64 {
        self.counts[a as usize] as f64 / self.n as f64
    }
}

/// Counts the residues of `k_0, …, k_{n-1}` modulo `q`.
pub fn residue_distribution(spec: &DigitSpec, q: u64, n: u64) -> Result<ResidueDistribution> {
    if q == 0 {
        return Err(Error::Domain("modulus q must be at least 1".into()));
    }
    if q > 1 << 26 {
        return Err(Error::Domain(format!(
            "modulus {q} is too large for residue analysis"
        )));
    }
    if n == 0 {
        return Err(Error::Domain(
            "residue distribution over an empty prefix".into(),
        ));
    }
    let mut counts = vec![0u64; q as usize];
    let mut cursor = spec.cursor();
    for i in 0..n {
        counts[(cursor.value() % q as u128) as usize] += 1;
        if i + 1 < n {
            cursor.advance()?;
        }
    }
    Ok(ResidueDistribution { q, n, counts })
}

/// Normalized exponential sum `(1/N) Σ_{n<N} e(α·k_n)`.
pub fn weyl_sum(spec: &DigitSpec, alpha: &Alpha, n: u64) -> Result<Complex64> {
    weyl_sum_window(spec, alpha, 0, n)
}

/// Normalized exponential sum over the index window `[from, to)`.
pub fn weyl_sum_window(spec: &DigitSpec, alpha: &Alpha, from: u64, to: u64) -> Result<Complex64> {
    weyl_sum_window_threaded(spec, alpha, from, to, 1)
}

/// Window sum evaluated on `threads` worker threads. The window is cut into
/// fixed chunks summed independently and combined in index order, so the
/// result is byte-identical for every thread count.
pub fn weyl_sum_window_threaded(
    spec: &DigitSpec,
    alpha: &Alpha,
    from: u64,
    to: u64,
    threads: usize,
) -> Result<Complex64> {
    if to <= from {
        return Err(Error::Domain(format!("empty index window [{from}, {to})")));
    }
    let len = to - from;
    let chunks = len.div_ceil(CHUNK);
    let chunk_sum = |idx: u64| -> Result<Complex64> {
        let start = from + idx * CHUNK;
        let size = CHUNK.min(to - start);
        let mut cursor = spec.cursor_at(start as u128)?;
        let mut acc = Kahan::default();
        for i in 0..size {
            acc.add(alpha.exp_phase(cursor.value()));
            if i + 1 < size {
                cursor.advance()?;
            }
        }
        Ok(acc.value())
    };

    let threads = threads.max(1).min(chunks as usize);
    let mut partials: Vec<Complex64> = vec![Complex64::default(); chunks as usize];
    if threads <= 1 {
        for (idx, slot) in partials.iter_mut().enumerate() {
            *slot = chunk_sum(idx as u64)?;
        }
    } else {
        let results: Vec<Result<Vec<(u64, Complex64)>>> = std::thread::scope(|scope| {
            let workers: Vec<_> = (0..threads)
                .map(|w| {
                    let chunk_sum = &chunk_sum;
                    scope.spawn(move || {
                        (w as u64..chunks)
                            .step_by(threads)
                            .map(|idx| chunk_sum(idx).map(|s| (idx, s)))
                            .collect()
                    })
                })
                .collect();
            workers
                .into_iter()
                .map(|h| h.join().expect("summation worker panicked"))
                .collect()
        });
        for worker in results {
            for (idx, sum) in worker? {
                partials[idx as usize] = sum;
            }
        }
    }
    let mut total = Kahan::default();
    for part in partials {
        total.add(part);
    }
    Ok(total.value() / len as f64)
}

/// Running mean of the exponential sum, reported at each checkpoint.
///
/// A single pass over the members: `O(max checkpoint)` work regardless of
/// how many checkpoints are requested. Checkpoints must be strictly
/// increasing and positive.
pub fn weyl_profile(
    spec: &DigitSpec,
    alpha: &Alpha,
    checkpoints: &[u64],
) -> Result<Vec<(u64, Complex64)>> {
    if checkpoints.is_empty() {
        return Err(Error::Domain("no checkpoints requested".into()));
    }
    if checkpoints[0] == 0 || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain(
            "checkpoints must be strictly increasing and positive".into(),
        ));
    }
    let last = *checkpoints.last().unwrap();
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = 0usize;
    let mut acc = Kahan::default();
    let mut cursor = spec.cursor();
    for n in 0..last {
        acc.add(alpha.exp_phase(cursor.value()));
        if next < checkpoints.len() && checkpoints[next] == n + 1 {
            out.push((n + 1, acc.value() / (n + 1) as f64));
            next += 1;
        }
        if n + 1 < last {
            cursor.advance()?;
        }
    }
    Ok(out)
}

/// The spectral coefficient at the reduced rational frequency `p/q`: the
/// Weyl sum of the first `n` members at `α = p/q`.
pub fn spectral_coefficient(spec: &DigitSpec, num: i64, den: i64, n: u64) -> Result<Complex64> {
    let alpha = Alpha::rational(num, den)?;
    weyl_sum(spec, &alpha, n)
}

/// One rational frequency and its spectral coefficient.
#[derive(Clone, Copy, Debug)]
pub struct SpectralLine {
    pub num: u64,
    pub den: u64,
    pub value: Complex64,
}

/// Spectral coefficients at every reduced rational `p/q` with
/// `0 ≤ p < q ≤ max_den` (including `0/1`), ordered by denominator then
/// numerator.
pub fn spectral_profile(spec: &DigitSpec, max_den: u64, n: u64) -> Result<Vec<SpectralLine>> {
    if max_den == 0 {
        return Err(Error::Domain("denominator bound must be at least 1".into()));
    }
    let mut lines = Vec::new();
    for den in 1..=max_den {
        for num in 0..den {
            if num == 0 && den > 1 {
                continue;
            }
            if num::integer::gcd(num, den) > 1 {
                continue;
            }
            let value = spectral_coefficient(spec, num as i64, den as i64, n)?;
            lines.push(SpectralLine { num, den, value });
        }
    }
    Ok(lines)
}

/// Star discrepancy of the phases `{α·k_n}` for `n < N`, by the standard
/// sorted-sample formula.
pub fn star_discrepancy(spec: &DigitSpec, alpha: &Alpha, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("discrepancy of an empty prefix".into()));
    }
    let mut phases = Vec::with_capacity(n as usize);
    let mut cursor = spec.cursor();
    for i in 0..n {
        phases.push(alpha.phase(cursor.value()));
        if i + 1 < n {
            cursor.advance()?;
        }
    }
    phases.sort_unstable_by(f64::total_cmp);
    let n_f = n as f64;
    let mut worst: f64 = 0.0;
    for (i, &x) in phases.iter().enumerate() {
        let up = (i + 1) as f64 / n_f - x;
        let down = x - i as f64 / n_f;
        worst = worst.max(up).max(down);
    }
    Ok(worst)
}

/// Writes a residue distribution as CSV: `q,residue,count,frequency`.
pub fn write_residue_csv<W: Write>(dist: &ResidueDistribution, mut out: W) -> io::Result<()> {
    writeln!(out, "q,residue,count,frequency")?;
    for (a, &count) in dist.counts.iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{}",
            dist.q,
            a,
            count,
            count as f64 / dist.n as f64
        )?;
    }
    Ok(())
}

/// Writes a checkpointed exponential-sum profile as CSV:
/// `alpha,N,real,imag,modulus`.
pub fn write_decay_csv<W: Write>(
    alpha_label: &str,
    rows: &[(u64, Complex64)],
    mut out: W,
) -> io::Result<()> {
    writeln!(out, "alpha,N,real,imag,modulus")?;
    for &(n, z) in rows {
        writeln!(out, "{},{},{},{},{}", alpha_label, n, z.re, z.im, z.norm())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(b: u32, digits: &[u32]) -> DigitSpec {
        DigitSpec::new(b, digits.to_vec()).unwrap()
    }

    #[test]
    fn residue_counts_are_exact() {
        let s = spec(3, &[0, 2]);
        let d3 = residue_distribution(&s, 3, 1 << 10).unwrap();
        assert_eq!(d3.counts, vec![512, 0, 512]);
        let d2 = residue_distribution(&s, 2, 1 << 10).unwrap();
        assert_eq!(d2.counts, vec![1024, 0]);
        assert_eq!(d3.frequency(0), 0.5);
    }

    #[test]
    fn rational_weyl_sum_matches_residue_route() {
        // Dual routes: per-term exponential summation vs the exact residue
        // counts pushed through the inverse transform.
        use std::f64::consts::TAU;
        let cases = [
            (spec(3, &[0, 2]), 1i64, 3i64),
            (spec(5, &[0, 2, 4]), 2, 5),
            (spec(10, &[0, 1, 8]), 3, 7),
        ];
        for (s, p, q) in cases {
            let n = 1u64 << 12;
            let direct = weyl_sum(&s, &Alpha::rational(p, q).unwrap(), n).unwrap();
            let dist = residue_distribution(&s, q as u64, n).unwrap();
            let mut via = Complex64::default();
            for (a, &count) in dist.counts.iter().enumerate() {
                let theta = TAU * ((p as u64 as u128 * a as u128) % q as u128) as f64 / q as f64;
                via += Complex64::new(theta.cos(), theta.sin()) * (count as f64 / n as f64);
            }
            assert!((direct - via).norm() < 1e-9, "{s}: {direct} vs {via}");
        }
    }

    #[test]
    fn spectral_coefficients_match_references() {
        let s = spec(3, &[0, 2]);
        let third = spectral_coefficient(&s, 1, 3, 1 << 10).unwrap();
        assert!((third.re - 0.25).abs() < 1e-9);
        assert!((third.im - (-0.433_012_701_892_219_3)).abs() < 1e-9);
        let half = spectral_coefficient(&s, 1, 2, 1 << 10).unwrap();
        assert!((half - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let trivial = spectral_coefficient(&s, 0, 1, 128).unwrap();
        assert!((trivial - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let modulus = weyl_sum(&s, &Alpha::rational(1, 3).unwrap(), 1 << 14)
            .unwrap()
            .norm();
        assert!((modulus - 0.5).abs() < 1e-9);
    }

    /// Independent route for `N = |D|^m` with a zero digit: the sum
    /// factorizes over digit places into `Π_c mean_{d∈D} e(α·d·b^c)`.
    fn block_product(s: &DigitSpec, alpha: &Alpha, places: u32) -> Complex64 {
        let mut product = Complex64::new(1.0, 0.0);
        let mut pow: u128 = 1;
        for _ in 0..places {
            let mut mean = Complex64::default();
            for &d in s.digits() {
                mean += alpha.exp_phase(d as u128 * pow);
            }
            product *= mean / s.digits().len() as f64;
            pow *= s.base() as u128;
        }
        product
    }

    #[test]
    fn weyl_sum_matches_block_product_route() {
        for (s, places) in [(spec(3, &[0, 2]), 10u32), (spec(5, &[0, 2, 4]), 7)] {
            for alpha in [
                Alpha::sqrt2(),
                Alpha::golden(),
                Alpha::rational(1, 7).unwrap(),
            ] {
                let n = s.radix().pow(places);
                let direct = weyl_sum(&s, &alpha, n).unwrap();
                let via = block_product(&s, &alpha, places);
                assert!(
                    (direct - via).norm() < 1e-10,
                    "{s} at {alpha}: {direct} vs {via}"
                );
            }
        }
    }

    #[test]
    fn irrational_sums_are_small_and_thread_invariant() {
        let s = spec(3, &[0, 2]);
        let single = weyl_sum_window_threaded(&s, &Alpha::sqrt2(), 0, 1 << 16, 1).unwrap();
        let multi = weyl_sum_window_threaded(&s, &Alpha::sqrt2(), 0, 1 << 16, 3).unwrap();
        // Chunked in-order combination: not approximately equal — identical.
        assert_eq!(single.re.to_bits(), multi.re.to_bits());
        assert_eq!(single.im.to_bits(), multi.im.to_bits());
        assert!(single.norm() < 5e-5, "sqrt2 sum {}", single.norm());
        let golden = weyl_sum(&s, &Alpha::golden(), 1 << 16).unwrap();
        assert!(golden.norm() < 5e-5, "golden sum {}", golden.norm());
    }

    #[test]
    fn profile_agrees_with_one_shot_sums() {
        let s = spec(4, &[0, 3]);
        let alpha = Alpha::sqrt2();
        let profile = weyl_profile(&s, &alpha, &[1 << 8, 1 << 10, 1 << 12]).unwrap();
        for &(n, value) in &profile {
            let direct = weyl_sum(&s, &alpha, n).unwrap();
            assert!((value - direct).norm() < 1e-9, "N={n}");
        }
        assert!(weyl_profile(&s, &alpha, &[16, 16]).is_err());
        assert!(weyl_profile(&s, &alpha, &[0, 16]).is_err());
    }

    #[test]
    fn spectral_profile_enumerates_reduced_fractions() {
        let s = spec(3, &[0, 2]);
        let lines = spectral_profile(&s, 4, 256).unwrap();
        let freqs: Vec<(u64, u64)> = lines.iter().map(|l| (l.num, l.den)).collect();
        assert_eq!(freqs, vec![(0, 1), (1, 2), (1, 3), (2, 3), (1, 4), (3, 4)],);
    }

    #[test]
    fn star_discrepancy_reference_values() {
        let s = spec(3, &[0, 2]);
        // All phases 0: the worst box is (0, 1), missing every point.
        assert_eq!(
            star_discrepancy(&s, &Alpha::rational(0, 1).unwrap(), 16).unwrap(),
            1.0
        );
        // Two points {0, 2/3}: worst box is [0, 1/2) holding both.
        let two = star_discrepancy(&s, &Alpha::rational(1, 3).unwrap(), 2).unwrap();
        assert!((two - 0.5).abs() < 1e-15);
        let spread = star_discrepancy(&s, &Alpha::sqrt2(), 1 << 12).unwrap();
        assert!(spread < 0.05, "sqrt2 discrepancy {spread}");
        assert!(spread > 0.0);
    }

    #[test]
    fn csv_emitters_are_stable() {
        let s = spec(3, &[0, 2]);
        let dist = residue_distribution(&s, 2, 4).unwrap();
        let mut buf = Vec::new();
        write_residue_csv(&dist, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "q,residue,count,frequency\n2,0,4,1\n2,1,0,0\n"
        );
        let mut buf = Vec::new();
        write_decay_csv("1/2", &[(4, Complex64::new(1.0, 0.0))], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "alpha,N,real,imag,modulus\n1/2,4,1,0,1\n"
        );
    }
}
