//! Ergodic averages of the member sequence acting on computable systems.
//!
//! The member sequence `k_0 < k_1 < …` of a digit-restricted set drives
//! averages `(1/N) Σ_{n<N} f(T^{k_n} x)` on three families of
//! measure-preserving systems chosen so everything is computable, and in
//! most cases exactly:
//!
//! * [`System::Cyclic`] — rotation by `step` on `Z_m` with counting measure;
//!   averages of rational vectors reduce to exact residue counts.
//! * [`System::Torus`] — rotation by an angle `α` on the circle; averages of
//!   trigonometric polynomials reduce to exponential sums.
//! * [`System::Bernoulli`] — the two-sided fair coin shift; averages of
//!   cylinder observables have an exactly computable mean and L² deviation,
//!   via the fact that windows further apart than their radius are
//!   independent.
//!
//! Beyond plain averages the module evaluates averages along index
//! progressions, Fourier-side predictions of the limit, multiple-recurrence
//! integrals `(1/N) Σ ∫ f · f∘T^{k_n} ⋯ f∘T^{(ℓ-1)k_n} dμ`, and a van der
//! Corput difference inequality on arbitrary bounded sequences.

use std::collections::BTreeMap;

use num::complex::Complex64;
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alpha::Alpha;
use crate::digits::DigitSpec;
use crate::equidist;
use crate::error::{Error, Result};

/// Enumerating joint cylinder coordinates is exponential in the union size;
/// this caps the blow-up at a documented boundary.
const MAX_CYLINDER_UNION_BITS: u32 = 24;

/// A measure-preserving system the member sequence can act on.
#[derive(Clone, Debug)]
pub enum System {
    /// `x ↦ x + step` on `Z_modulus` with uniform measure.
    Cyclic { modulus: u64, step: u64 },
    /// `x ↦ x + α` on the circle `[0, 1)` with Lebesgue measure.
    Torus { alpha: Alpha },
    /// The two-sided fair-coin shift on `{0,1}^Z`.
    Bernoulli,
}

/// An observable paired with a system.
#[derive(Clone, Debug)]
pub enum Observable {
    /// A rational-valued function on `Z_m`, listed as `f(0), …, f(m-1)`.
    Vector(Vec<BigRational>),
    /// A trigonometric polynomial `Σ c_ν e(ν·x)` with finitely many
    /// frequencies.
    TrigPoly(BTreeMap<i64, Complex64>),
    /// A function of the coordinates `ω_{-radius}, …, ω_{radius}`; the table
    /// lists its value for each of the `2^(2·radius+1)` windows, indexed by
    /// `Σ ω_{i} · 2^{i+radius}`.
    Cylinder {
        radius: u32,
        table: Vec<BigRational>,
    },
    /// The indicator of `[lo, hi) ⊆ [0, 1)` on the circle; enters only
    /// recurrence averages, where its shifted intersections stay exactly
    /// measurable.
    Interval { lo: BigRational, hi: BigRational },
}

impl Observable {
    fn describe(&self) -> &'static str {
        match self {
            Observable::Vector(_) => "vector",
            Observable::TrigPoly(_) => "trig polynomial",
            Observable::Cylinder { .. } => "cylinder",
            Observable::Interval { .. } => "interval",
        }
    }

    /// Structural validation that does not depend on the system.
    pub fn validate(&self) -> Result<()> {
        match self {
            Observable::Vector(values) => {
                if values.is_empty() {
                    return Err(Error::Domain("vector observable with no entries".into()));
                }
            }
            Observable::TrigPoly(coeffs) => {
                if coeffs.is_empty() {
                    return Err(Error::Domain("trig polynomial with no coefficients".into()));
                }
            }
            Observable::Cylinder { radius, table } => {
                let width = 2 * *radius as usize + 1;
                if width > MAX_CYLINDER_UNION_BITS as usize {
                    return Err(Error::Domain(format!(
                        "cylinder window of {width} coordinates exceeds the enumeration cap"
                    )));
                }
                if table.len() != 1 << width {
                    return Err(Error::Domain(format!(
                        "cylinder of radius {radius} needs 2^{width} = {} table entries, got {}",
                        1usize << width,
                        table.len()
                    )));
                }
            }
            Observable::Interval { lo, hi } => {
                if lo < &BigRational::zero() || hi > &BigRational::one() || lo >= hi {
                    return Err(Error::Domain(
                        "interval observable needs 0 ≤ lo < hi ≤ 1".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn unit_range(&self) -> Result<()> {
        let ok = match self {
            Observable::Vector(values) => values
                .iter()
                .all(|v| !v.is_negative() && v <= &BigRational::one()),
            Observable::Cylinder { table, .. } => table
                .iter()
                .all(|v| !v.is_negative() && v <= &BigRational::one()),
            Observable::Interval { .. } => true,
            Observable::TrigPoly(_) => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(
                "recurrence averages take [0,1]-valued observables".into(),
            ))
        }
    }
}

/// The value of an averaged observable — the same shape as the observable
/// where the average is a function, or exact moments where it is a number.
#[derive(Clone, Debug, PartialEq)]
pub enum Average {
    /// Exact average of a vector observable on `Z_m`, as a function of the
    /// start point.
    Vector(Vec<BigRational>),
    /// Average of a trigonometric polynomial, again a trigonometric
    /// polynomial in the start point.
    TrigPoly(BTreeMap<i64, Complex64>),
    /// For the Bernoulli shift the average is a random variable; its exact
    /// first two moments are reported: the mean (which equals `E f`) and
    /// the variance `E (A_N f - E f)²` over the coin flips.
    Moments {
        mean: BigRational,
        deviation_sq: BigRational,
    },
}

/// Fourier-side prediction of an ergodic average (floating point, since it
/// passes through a discrete Fourier transform).
#[derive(Clone, Debug, PartialEq)]
pub enum Prediction {
    Vector(Vec<f64>),
    TrigPoly(BTreeMap<i64, Complex64>),
}

/// A multiple-recurrence average, exact whenever the system admits it.
#[derive(Clone, Debug, PartialEq)]
pub struct RecurrenceValue {
    pub value: f64,
    /// Present for cyclic systems, rational torus angles, and the Bernoulli
    /// shift; absent for irrational rotation, where the shifts are
    /// transcendental.
    pub exact: Option<BigRational>,
}

/// Outcome of a van der Corput difference inequality check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VdcReport {
    /// `|mean of a_n|²`.
    pub lhs: f64,
    /// Difference bound: mean over `h ≤ H` of `|mean of a_{n+h} conj(a_n)|`
    /// plus the `1/H + H/N` overhead.
    pub rhs: f64,
    pub holds: bool,
}

/// Exact residue counts of `k_n mod m` for indices in `[from, to)`.
fn residue_counts_window(spec: &DigitSpec, m: u64, from: u64, to: u64) -> Result<Vec<u64>> {
    if m > 1 << 26 {
        return Err(Error::Domain(format!(
            "modulus {m} is too large for residue analysis"
        )));
    }
    let mut counts = vec![0u64; m as usize];
    let mut cursor = spec.cursor_at(from as u128)?;
    for i in from..to {
        counts[(cursor.value() % m as u128) as usize] += 1;
        if i + 1 < to {
            cursor.advance()?;
        }
    }
    Ok(counts)
}

fn big(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `(1/W) Σ_c counts[c] · f((x + c·step) mod m)` for every start `x`, exact.
fn cyclic_average_from_counts(
    values: &[BigRational],
    counts: &[u64],
    step: u64,
    window: u64,
) -> Vec<BigRational> {
    let m = values.len() as u64;
    let weight = big(window);
    (0..m)
        .map(|x| {
            let mut sum = BigRational::zero();
            for (c, &count) in counts.iter().enumerate() {
                if count == 0 {
                    continue;
                }
                let jump = (c as u128 * (step % m) as u128) % m as u128;
                let slot = ((x as u128 + jump) % m as u128) as usize;
                sum += &values[slot] * big(count);
            }
            sum / &weight
        })
        .collect()
}

/// Joint expectation `E Π_j f(σ^{offset_j} ω)` of one cylinder observable
/// read at several shifts, by exact enumeration of the union of coordinate
/// windows.
fn cylinder_joint_expectation(
    table: &[BigRational],
    radius: u32,
    offsets: &[u128],
) -> Result<BigRational> {
    let width = 2 * radius as usize + 1;
    // Absolute coordinate positions touched by any window, deduplicated.
    let mut positions: Vec<u128> = offsets
        .iter()
        .flat_map(|&off| (0..width as u128).map(move |i| off + i))
        .collect();
    positions.sort_unstable();
    positions.dedup();
    let union_bits = positions.len();
    if union_bits > MAX_CYLINDER_UNION_BITS as usize {
        return Err(Error::Domain(format!(
            "joint cylinder window spans {union_bits} coordinates, beyond the enumeration cap of {MAX_CYLINDER_UNION_BITS}"
        )));
    }
    // For each window, where its `width` coordinates sit in the union.
    let slots: Vec<Vec<usize>> = offsets
        .iter()
        .map(|&off| {
            (0..width as u128)
                .map(|i| {
                    positions
                        .binary_search(&(off + i))
                        .expect("window coordinate in union")
                })
                .collect()
        })
        .collect();
    let mut sum = BigRational::zero();
    for assignment in 0u32..1 << union_bits {
        let mut product = BigRational::one();
        for window in &slots {
            let mut index = 0usize;
            for (bit, &slot) in window.iter().enumerate() {
                index |= ((assignment >> slot & 1) as usize) << bit;
            }
            if table[index].is_zero() {
                product = BigRational::zero();
                break;
            }
            product *= &table[index];
        }
        sum += product;
    }
    Ok(sum / big(1 << union_bits))
}

/// `E f` of a cylinder observable.
fn cylinder_mean(table: &[BigRational]) -> BigRational {
    let sum = table.iter().fold(BigRational::zero(), |acc, v| acc + v);
    sum / big(table.len() as u64)
}

/// Exact variance of `(1/W) Σ f(σ^{k} ω)` over the members `ks`, using the
/// independence of windows further apart than `2·radius`.
fn bernoulli_deviation_sq(table: &[BigRational], radius: u32, ks: &[u128]) -> Result<BigRational> {
    let mean = cylinder_mean(table);
    let mean_sq = &mean * &mean;
    let reach = 2 * radius as u128;
    let mut correlations: BTreeMap<u128, BigRational> = BTreeMap::new();
    let mut acc = BigRational::zero();
    for (i, &k) in ks.iter().enumerate() {
        for (j, &k2) in ks.iter().enumerate().skip(i) {
            let delta = k2 - k;
            if delta > reach {
                // Sorted members: every later pair is at least this far.
                break;
            }
            let corr = match correlations.get(&delta) {
                Some(c) => c.clone(),
                None => {
                    let c = cylinder_joint_expectation(table, radius, &[0, delta])?;
                    correlations.insert(delta, c.clone());
                    c
                }
            };
            let centered = &corr - &mean_sq;
            acc += if i == j { centered } else { centered * big(2) };
        }
    }
    let w = big(ks.len() as u64);
    Ok(acc / (&w * &w))
}

/// Collects `k_n` for `n` in `[from, to)`.
fn members_window(spec: &DigitSpec, from: u64, to: u64) -> Result<Vec<u128>> {
    let mut ks = Vec::with_capacity((to - from) as usize);
    let mut cursor = spec.cursor_at(from as u128)?;
    for i in from..to {
        ks.push(cursor.value());
        if i + 1 < to {
            cursor.advance()?;
        }
    }
    Ok(ks)
}

fn mismatch(system: &System, f: &Observable) -> Error {
    let system_name = match system {
        System::Cyclic { .. } => "cyclic rotation",
        System::Torus { .. } => "torus rotation",
        System::Bernoulli => "Bernoulli shift",
    };
    Error::KindMismatch(format!(
        "{system_name} cannot average a {} observable",
        f.describe()
    ))
}

fn check_window(from: u64, to: u64) -> Result<()> {
    if from >= to {
        return Err(Error::Domain(format!("empty index window [{from}, {to})")));
    }
    Ok(())
}

/// `(1/N) Σ_{n<N} f(T^{k_n} x)` as a function of `x`, exactly where the
/// system allows.
pub fn ergodic_average(
    system: &System,
    f: &Observable,
    spec: &DigitSpec,
    n: u64,
) -> Result<Average> {
    window_average(system, f, spec, 0, n)
}

/// The same average over the index window `[from, to)`.
pub fn window_average(
    system: &System,
    f: &Observable,
    spec: &DigitSpec,
    from: u64,
    to: u64,
) -> Result<Average> {
    f.validate()?;
    check_window(from, to)?;
    match (system, f) {
        (System::Cyclic { modulus, step }, Observable::Vector(values)) => {
            check_modulus(*modulus, values)?;
            let counts = residue_counts_window(spec, *modulus, from, to)?;
            Ok(Average::Vector(cyclic_average_from_counts(
                values,
                &counts,
                *step,
                to - from,
            )))
        }
        (System::Torus { alpha }, Observable::TrigPoly(coeffs)) => {
            let mut out = BTreeMap::new();
            for (&freq, &coeff) in coeffs {
                let gamma = if freq == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    equidist::weyl_sum_window(spec, &alpha.scale_int(freq), from, to)?
                };
                out.insert(freq, coeff * gamma);
            }
            Ok(Average::TrigPoly(out))
        }
        (System::Bernoulli, Observable::Cylinder { radius, table }) => {
            let ks = members_window(spec, from, to)?;
            Ok(Average::Moments {
                mean: cylinder_mean(table),
                deviation_sq: bernoulli_deviation_sq(table, *radius, &ks)?,
            })
        }
        _ => Err(mismatch(system, f)),
    }
}

fn check_modulus(modulus: u64, values: &[BigRational]) -> Result<()> {
    if modulus == 0 {
        return Err(Error::Domain("cyclic system needs modulus ≥ 1".into()));
    }
    if values.len() as u64 != modulus {
        return Err(Error::Domain(format!(
            "vector observable has {} entries but the cyclic system has modulus {}",
            values.len(),
            modulus
        )));
    }
    Ok(())
}

/// Average along the index progression `n = start, start + g, start + 2g, …`
/// (intersected with `[0, n_limit)`), where `g = |D|^scale_power`.
///
/// Summation is direct — one term per progression index — so the rescaling
/// identity relating this to a plain average of a rescaled system stays an
/// independently checkable fact rather than the implementation.
pub fn progression_average(
    system: &System,
    f: &Observable,
    spec: &DigitSpec,
    start: u64,
    scale_power: u32,
    n_limit: u64,
) -> Result<Average> {
    f.validate()?;
    if start >= n_limit {
        return Err(Error::Domain(format!(
            "progression start {start} is outside the index range [0, {n_limit})"
        )));
    }
    let stride = (spec.radix() as u128).checked_pow(scale_power);
    let indices: Vec<u64> = match stride {
        Some(g) => (0..)
            .map(|u| start as u128 + g * u)
            .take_while(|&i| i < n_limit as u128)
            .map(|i| i as u64)
            .collect(),
        // The stride exceeds u128: the progression is just its start.
        None => vec![start],
    };
    let count = indices.len() as u64;
    match (system, f) {
        (System::Cyclic { modulus, step }, Observable::Vector(values)) => {
            check_modulus(*modulus, values)?;
            let mut counts = vec![0u64; *modulus as usize];
            for &i in &indices {
                counts[(spec.cursor_at(i as u128)?.value() % *modulus as u128) as usize] += 1;
            }
            Ok(Average::Vector(cyclic_average_from_counts(
                values, &counts, *step, count,
            )))
        }
        (System::Torus { alpha }, Observable::TrigPoly(coeffs)) => {
            let mut out = BTreeMap::new();
            for (&freq, &coeff) in coeffs {
                let scaled = alpha.scale_int(freq);
                let mut acc = Complex64::default();
                for &i in &indices {
                    acc += scaled.exp_phase(spec.cursor_at(i as u128)?.value());
                }
                out.insert(freq, coeff * acc / count as f64);
            }
            Ok(Average::TrigPoly(out))
        }
        (System::Bernoulli, Observable::Cylinder { radius, table }) => {
            let mut ks = Vec::with_capacity(indices.len());
            for &i in &indices {
                ks.push(spec.cursor_at(i as u128)?.value());
            }
            Ok(Average::Moments {
                mean: cylinder_mean(table),
                deviation_sq: bernoulli_deviation_sq(table, *radius, &ks)?,
            })
        }
        _ => Err(mismatch(system, f)),
    }
}

/// Predicts the ergodic average through the Fourier transform: each
/// frequency of the observable is damped by the spectral coefficient of the
/// member sequence at the matching rational rotation number.
///
/// Defined for cyclic systems (all frequencies are rational) and for torus
/// rotations by a rational angle. An irrational rotation admits the
/// prediction only for constant observables; anything else is rejected
/// rather than silently collapsed.
pub fn spectral_prediction(
    system: &System,
    f: &Observable,
    spec: &DigitSpec,
    n: u64,
) -> Result<Prediction> {
    f.validate()?;
    if n == 0 {
        return Err(Error::Domain("prediction over an empty prefix".into()));
    }
    match (system, f) {
        (System::Cyclic { modulus, step }, Observable::Vector(values)) => {
            check_modulus(*modulus, values)?;
            let m = *modulus as usize;
            let tau = std::f64::consts::TAU;
            let floats: Vec<f64> = values
                .iter()
                .map(|v| v.to_f64().ok_or(Error::Overflow))
                .collect::<Result<_>>()?;
            // Discrete Fourier coefficients of f on Z_m.
            let hats: Vec<Complex64> = (0..m)
                .map(|j| {
                    let mut acc = Complex64::default();
                    for (x, &value) in floats.iter().enumerate() {
                        let theta = -tau * ((j as u128 * x as u128) % m as u128) as f64 / m as f64;
                        acc += value * Complex64::new(theta.cos(), theta.sin());
                    }
                    acc / m as f64
                })
                .collect();
            // Damping factor for frequency j: the spectral coefficient at
            // (j·step mod m) / m.
            let mut gammas = Vec::with_capacity(m);
            for j in 0..m {
                let num = (j as u64 * (step % modulus)) % modulus;
                gammas.push(equidist::spectral_coefficient(
                    spec,
                    num as i64,
                    *modulus as i64,
                    n,
                )?);
            }
            let predicted: Vec<f64> = (0..m)
                .map(|x| {
                    let mut acc = Complex64::default();
                    for j in 0..m {
                        let theta = tau * ((j as u128 * x as u128) % m as u128) as f64 / m as f64;
                        acc += hats[j] * gammas[j] * Complex64::new(theta.cos(), theta.sin());
                    }
                    acc.re
                })
                .collect();
            Ok(Prediction::Vector(predicted))
        }
        (System::Torus { alpha }, Observable::TrigPoly(coeffs)) => {
            if let Some((num, den)) = alpha.as_rational() {
                let mut out = BTreeMap::new();
                for (&freq, &coeff) in coeffs {
                    let scaled_num = (freq as i128 * num as i128).rem_euclid(den as i128) as i64;
                    let gamma = equidist::spectral_coefficient(spec, scaled_num, den as i64, n)?;
                    out.insert(freq, coeff * gamma);
                }
                Ok(Prediction::TrigPoly(out))
            } else if coeffs.keys().all(|&freq| freq == 0) {
                Ok(Prediction::TrigPoly(coeffs.clone()))
            } else {
                Err(Error::Domain(
                    "spectral prediction over an irrational rotation is only defined for \
                     constant observables; nonzero frequencies have no rational spectrum"
                        .into(),
                ))
            }
        }
        _ => Err(mismatch(system, f)),
    }
}

/// `(1/N) Σ_{n<N} ∫ Π_{j<ℓ} f(T^{j·k_n} x) dμ(x)` — the multiple-recurrence
/// average of order `ell`.
pub fn multi_recurrence_average(
    system: &System,
    f: &Observable,
    spec: &DigitSpec,
    ell: u32,
    n: u64,
) -> Result<RecurrenceValue> {
    f.validate()?;
    f.unit_range()?;
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
    match (system, f) {
        (System::Cyclic { modulus, step }, Observable::Vector(values)) => {
            check_modulus(*modulus, values)?;
            let m = *modulus;
            let counts = residue_counts_window(spec, m, 0, n)?;
            let mut total = BigRational::zero();
            for (c, &count) in counts.iter().enumerate() {
                if count == 0 {
                    continue;
                }
                // Integral of Π_j f(x + j·c·step) over x in Z_m.
                let jump = ((c as u128 * (step % m) as u128) % m as u128) as u64;
                let mut integral = BigRational::zero();
                for x in 0..m {
                    let mut product = BigRational::one();
                    let mut point = x;
                    for _ in 0..ell {
                        product *= &values[point as usize];
                        if product.is_zero() {
                            break;
                        }
                        point = ((point as u128 + jump as u128) % m as u128) as u64;
                    }
                    integral += product;
                }
                total += integral / big(m) * big(count);
            }
            let exact = total / big(n);
            Ok(RecurrenceValue {
                value: exact.to_f64().unwrap_or(f64::NAN),
                exact: Some(exact),
            })
        }
        (System::Torus { alpha }, Observable::Interval { lo, hi }) => {
            torus_interval_recurrence(alpha, lo, hi, spec, ell, n)
        }
        (System::Bernoulli, Observable::Cylinder { radius, table }) => {
            let reach = 2 * *radius as u128;
            let mut memo: BTreeMap<u128, BigRational> = BTreeMap::new();
            let mut total = BigRational::zero();
            let mut cursor = spec.cursor();
            for i in 0..n {
                let k = cursor.value();
                // Members beyond the window reach all give independent,
                // hence identical, joint expectations.
                let key = k.min(reach + 1);
                let term = match memo.get(&key) {
                    Some(t) => t.clone(),
                    None => {
                        let offsets: Vec<u128> = (0..ell as u128).map(|j| j * key).collect();
                        let t = cylinder_joint_expectation(table, *radius, &offsets)?;
                        memo.insert(key, t.clone());
                        t
                    }
                };
                total += term;
                if i + 1 < n {
                    cursor.advance()?;
                }
            }
            let exact = total / big(n);
            Ok(RecurrenceValue {
                value: exact.to_f64().unwrap_or(f64::NAN),
                exact: Some(exact),
            })
        }
        _ => Err(mismatch(system, f)),
    }
}

/// Lebesgue measure of `∩_j ([lo, hi) - shift_j)` on the circle, by testing
/// the midpoint of every gap between consecutive interval endpoints.
/// Generic over the number type so the rational and float paths share one
/// correctness argument.
fn arc_intersection_measure<T, F>(lo: &T, hi: &T, shifts: &[T], frac: F) -> T
where
    T: Clone + PartialOrd + Zero + One + std::ops::Sub<Output = T> + std::ops::Div<Output = T>,
    F: Fn(T) -> T,
{
    let zero = T::zero();
    let one = T::one();
    let two = T::one() + T::one();
    // Endpoints of every shifted arc, wrapped into [0, 1).
    let mut cuts: Vec<T> = Vec::with_capacity(2 * shifts.len() + 2);
    cuts.push(zero.clone());
    cuts.push(one.clone());
    for shift in shifts {
        cuts.push(frac(lo.clone() - shift.clone() + one.clone()));
        cuts.push(frac(hi.clone() - shift.clone() + one.clone()));
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("arc endpoints are ordered"));
    cuts.dedup_by(|a, b| a == b);
    let mut measure = zero.clone();
    for pair in cuts.windows(2) {
        let mid = (pair[0].clone() + pair[1].clone()) / two.clone();
        let inside = shifts.iter().all(|shift| {
            let pos = frac(mid.clone() + shift.clone());
            pos >= *lo && pos < *hi
        });
        if inside {
            measure = measure + (pair[1].clone() - pair[0].clone());
        }
    }
    measure
}

fn torus_interval_recurrence(
    alpha: &Alpha,
    lo: &BigRational,
    hi: &BigRational,
    spec: &DigitSpec,
    ell: u32,
    n: u64,
) -> Result<RecurrenceValue> {
    if let Some((num, den)) = alpha.as_rational() {
        // Group members by residue mod den: the shift pattern only depends
        // on k mod den, and each pattern's intersection measure is an exact
        // rational.
        let counts = residue_counts_window(spec, den, 0, n)?;
        let frac = |x: BigRational| {
            let floored = x.floor();
            x - floored
        };
        let mut total = BigRational::zero();
        for (c, &count) in counts.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let shifts: Vec<BigRational> = (0..ell as u64)
                .map(|j| {
                    let phase = (j as u128 * c as u128 * num as u128) % den as u128;
                    BigRational::new(BigInt::from(phase), BigInt::from(den))
                })
                .collect();
            let measure = arc_intersection_measure(lo, hi, &shifts, frac);
            total += measure * big(count);
        }
        let exact = total / big(n);
        Ok(RecurrenceValue {
            value: exact.to_f64().unwrap_or(f64::NAN),
            exact: Some(exact),
        })
    } else {
        let lo_f = lo.to_f64().ok_or(Error::Overflow)?;
        let hi_f = hi.to_f64().ok_or(Error::Overflow)?;
        let mut acc = 0.0f64;
        let mut compensation = 0.0f64;
        let mut cursor = spec.cursor();
        for i in 0..n {
            let k = cursor.value();
            let shifts: Vec<f64> = (0..ell as u128).map(|j| alpha.phase(j * k)).collect();
            let measure = arc_intersection_measure(&lo_f, &hi_f, &shifts, f64::fract);
            let y = measure - compensation;
            let t = acc + y;
            compensation = (t - acc) - y;
            acc = t;
            if i + 1 < n {
                cursor.advance()?;
            }
        }
        Ok(RecurrenceValue {
            value: acc / n as f64,
            exact: None,
        })
    }
}

/// Checks the van der Corput difference inequality
/// `|E a|² ≤ (1/H) Σ_{h≤H} |E a_{·+h} conj(a)| + 1/H + H/N`
/// on a concrete bounded sequence. The comparison carries a pinned `1e-12`
/// float cushion.
pub fn vdc_check(sequence: &[Complex64], h_max: usize) -> Result<VdcReport> {
    let n = sequence.len();
    if n == 0 {
        return Err(Error::Domain(
            "van der Corput check needs a nonempty sequence".into(),
        ));
    }
    if h_max == 0 || h_max > n {
        return Err(Error::Domain(format!(
            "difference depth H must satisfy 1 ≤ H ≤ N = {n}, got {h_max}"
        )));
    }
    if sequence.iter().any(|z| z.norm() > 1.0 + 1e-12) {
        return Err(Error::Domain(
            "sequence terms must lie in the closed unit disc".into(),
        ));
    }
    let mut mean = Complex64::default();
    for z in sequence {
        mean += z;
    }
    mean /= n as f64;
    let lhs = mean.norm_sqr();
    let mut diff_total = 0.0f64;
    for h in 1..=h_max {
        let mut corr = Complex64::default();
        for j in 0..n - h {
            corr += sequence[j + h] * sequence[j].conj();
        }
        if n - h > 0 {
            diff_total += corr.norm() / (n - h) as f64;
        }
    }
    let rhs = diff_total / h_max as f64 + 1.0 / h_max as f64 + h_max as f64 / n as f64;
    Ok(VdcReport {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-12,
    })
}

/// A reproducible sequence of unit-modulus terms with uniformly random
/// phases, for exercising [`vdc_check`].
pub fn random_unit_sequence(seed: u64, len: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len)
        .map(|_| {
            let theta = std::f64::consts::TAU * rng.gen::<f64>();
            Complex64::new(theta.cos(), theta.sin())
        })
        .collect()
}

/// Parses an exact rational from `p/q`, integer, or decimal text.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let text = text.trim();
    let bad = |why: &str| Error::InvalidInput(format!("bad rational {text:?}: {why}"));
    if text.is_empty() {
        return Err(bad("empty"));
    }
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num
            .trim()
            .parse()
            .map_err(|_| bad("unreadable numerator"))?;
        let den: BigInt = den
            .trim()
            .parse()
            .map_err(|_| bad("unreadable denominator"))?;
        if den.is_zero() {
            return Err(bad("zero denominator"));
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((int_part, frac_part)) = text.split_once('.') {
        let negative = int_part.trim_start().starts_with('-');
        let int_part: BigInt = if int_part.is_empty() || int_part == "-" {
            BigInt::zero()
        } else {
            int_part
                .parse()
                .map_err(|_| bad("unreadable integer part"))?
        };
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad("unreadable fractional part"));
        }
        let digits: BigInt = frac_part.parse().expect("digit run parses");
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let magnitude = int_part.magnitude().clone();
        let unsigned = BigRational::new(BigInt::from(magnitude) * &scale + digits, scale);
        return Ok(if negative { -unsigned } else { unsigned });
    }
    let value: BigInt = text.parse().map_err(|_| bad("unreadable integer"))?;
    Ok(BigRational::from_integer(value))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(b: u32, digits: &[u32]) -> DigitSpec {
        DigitSpec::new(b, digits.to_vec()).unwrap()
    }

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    fn indicator_vector(m: usize, hot: usize) -> Observable {
        let mut values = vec![BigRational::zero(); m];
        values[hot] = BigRational::one();
        Observable::Vector(values)
    }

    #[test]
    fn cyclic_average_is_exact() {
        // Base 3, digits {0,2}: residues of k_n mod 3 split evenly between
        // 0 and 2 on a prefix of 2^10.
        let s = spec(3, &[0, 2]);
        let system = System::Cyclic {
            modulus: 3,
            step: 1,
        };
        let avg = ergodic_average(&system, &indicator_vector(3, 0), &s, 1 << 10).unwrap();
        let Average::Vector(values) = avg else {
            panic!("cyclic average is a vector")
        };
        assert_eq!(values, vec![rat(1, 2), rat(1, 2), rat(0, 1)]);
    }

    #[test]
    fn cyclic_window_halves_agree() {
        let s = spec(3, &[0, 2]);
        let system = System::Cyclic {
            modulus: 3,
            step: 2,
        };
        let f = indicator_vector(3, 1);
        let first = window_average(&system, &f, &s, 0, 2048).unwrap();
        let second = window_average(&system, &f, &s, 2048, 4096).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn torus_average_is_the_weyl_sum() {
        let s = spec(3, &[0, 2]);
        let alpha = Alpha::sqrt2();
        let mut coeffs = BTreeMap::new();
        coeffs.insert(1i64, Complex64::new(2.0, 0.0));
        coeffs.insert(0i64, Complex64::new(0.5, 0.0));
        let avg = ergodic_average(
            &System::Torus { alpha },
            &Observable::TrigPoly(coeffs),
            &s,
            1 << 12,
        )
        .unwrap();
        let Average::TrigPoly(out) = avg else {
            panic!("torus average is a trig poly")
        };
        let direct = equidist::weyl_sum(&s, &alpha, 1 << 12).unwrap();
        assert!((out[&1] - 2.0 * direct).norm() < 1e-12);
        assert!((out[&0] - Complex64::new(0.5, 0.0)).norm() < 1e-15);
    }

    fn coin_indicator() -> Observable {
        // f(ω) = ω_0: radius 0, table [0, 1].
        Observable::Cylinder {
            radius: 0,
            table: vec![BigRational::zero(), BigRational::one()],
        }
    }

    #[test]
    fn bernoulli_moments_are_exact() {
        let s = spec(3, &[0, 2]);
        let avg =
            window_average(&System::Bernoulli, &coin_indicator(), &s, 1 << 8, 1 << 12).unwrap();
        let Average::Moments { mean, deviation_sq } = avg else {
            panic!("moments")
        };
        assert_eq!(mean, rat(1, 2));
        // Radius-0 windows at distinct members are independent: the variance
        // is Var(f)/W = (1/4)/3840.
        assert_eq!(deviation_sq, rat(1, 15360));
    }

    #[test]
    fn bernoulli_overlapping_windows_correlate() {
        // Base 3 digits {1,2} has consecutive members at distance 1; with
        // radius 1 the windows overlap and the variance exceeds the
        // independent-case value.
        let s = spec(3, &[1, 2]);
        let table: Vec<BigRational> = (0..8)
            .map(|i: usize| {
                if i.count_ones() >= 2 {
                    rat(1, 1)
                } else {
                    rat(0, 1)
                }
            })
            .collect();
        let f = Observable::Cylinder { radius: 1, table };
        let avg = ergodic_average(&System::Bernoulli, &f, &s, 64).unwrap();
        let Average::Moments { mean, deviation_sq } = avg else {
            panic!("moments")
        };
        assert_eq!(mean, rat(1, 2));
        let independent = rat(1, 4) / rat(64, 1);
        assert!(
            deviation_sq > independent,
            "{deviation_sq} vs {independent}"
        );
    }

    #[test]
    fn progression_average_examples() {
        let s = spec(3, &[0, 2]);
        let system = System::Cyclic {
            modulus: 3,
            step: 1,
        };
        // Odd indices: k_n ≡ 2 (mod 3) throughout (k_{2t+1} = 3·k_t + 2).
        let avg = progression_average(&system, &indicator_vector(3, 2), &s, 1, 1, 1 << 10).unwrap();
        let Average::Vector(values) = avg else {
            panic!()
        };
        assert_eq!(values, vec![rat(1, 1), rat(0, 1), rat(0, 1)]);
        // Trivial progression (start 0, scale 0) is the plain average.
        let all = progression_average(&system, &indicator_vector(3, 0), &s, 0, 0, 1 << 10).unwrap();
        assert_eq!(
            all,
            ergodic_average(&system, &indicator_vector(3, 0), &s, 1 << 10).unwrap()
        );
    }

    #[test]
    fn progression_average_matches_rescaled_system() {
        // Self-similarity: members at indices 2t+1 are 3·k_t + 2, so the
        // torus average along the progression equals a phase twist times the
        // average at the rescaled angle.
        let s = spec(3, &[0, 2]);
        let alpha = Alpha::sqrt2();
        let mut coeffs = BTreeMap::new();
        coeffs.insert(1i64, Complex64::new(1.0, 0.0));
        let along = progression_average(
            &System::Torus { alpha },
            &Observable::TrigPoly(coeffs),
            &s,
            1,
            1,
            2048,
        )
        .unwrap();
        let Average::TrigPoly(out) = along else {
            panic!()
        };
        let rescaled = alpha.scale_base_pow(3, 1).unwrap();
        let bulk = equidist::weyl_sum(&s, &rescaled, 1024).unwrap();
        let twist = alpha.exp_phase(2);
        assert!((out[&1] - twist * bulk).norm() < 1e-10);
    }

    #[test]
    fn spectral_prediction_matches_cyclic_average() {
        let s = spec(3, &[0, 2]);
        let system = System::Cyclic {
            modulus: 3,
            step: 1,
        };
        let f = indicator_vector(3, 0);
        let predicted = spectral_prediction(&system, &f, &s, 1 << 10).unwrap();
        let Prediction::Vector(predicted) = predicted else {
            panic!()
        };
        let Average::Vector(exact) = ergodic_average(&system, &f, &s, 1 << 10).unwrap() else {
            panic!()
        };
        for (p, e) in predicted.iter().zip(&exact) {
            assert!((p - e.to_f64().unwrap()).abs() < 1e-9, "{p} vs {e}");
        }
    }

    #[test]
    fn spectral_prediction_torus_cases() {
        let s = spec(3, &[0, 2]);
        let mut coeffs = BTreeMap::new();
        coeffs.insert(1i64, Complex64::new(1.0, 0.0));
        let f = Observable::TrigPoly(coeffs.clone());
        let rational = System::Torus {
            alpha: Alpha::rational(1, 2).unwrap(),
        };
        let Prediction::TrigPoly(out) = spectral_prediction(&rational, &f, &s, 1 << 10).unwrap()
        else {
            panic!()
        };
        // All members are even, so e(k/2) = 1 identically.
        assert!((out[&1] - Complex64::new(1.0, 0.0)).norm() < 1e-12);

        let irrational = System::Torus {
            alpha: Alpha::sqrt2(),
        };
        assert!(matches!(
            spectral_prediction(&irrational, &f, &s, 1 << 10),
            Err(Error::Domain(_))
        ));
        let mut constant = BTreeMap::new();
        constant.insert(0i64, Complex64::new(0.25, 0.0));
        let ok = spectral_prediction(&irrational, &Observable::TrigPoly(constant), &s, 1 << 10);
        assert!(ok.is_ok());
    }

    #[test]
    fn cyclic_recurrence_is_exact() {
        let s = spec(3, &[0, 2]);
        let system = System::Cyclic {
            modulus: 3,
            step: 1,
        };
        let out =
            multi_recurrence_average(&system, &indicator_vector(3, 0), &s, 2, 1 << 10).unwrap();
        assert_eq!(out.exact, Some(rat(1, 6)));
        // ℓ = 1 degenerates to the mean of the observable over the space.
        let single =
            multi_recurrence_average(&system, &indicator_vector(3, 0), &s, 1, 1 << 10).unwrap();
        assert_eq!(single.exact, Some(rat(1, 3)));
    }

    #[test]
    fn torus_interval_recurrence_rational_angle() {
        let s = spec(3, &[0, 2]);
        let system = System::Torus {
            alpha: Alpha::rational(1, 3).unwrap(),
        };
        let f = Observable::Interval {
            lo: rat(0, 1),
            hi: rat(1, 3),
        };
        let out = multi_recurrence_average(&system, &f, &s, 2, 1 << 10).unwrap();
        assert_eq!(out.exact, Some(rat(1, 6)));
    }

    #[test]
    fn torus_interval_recurrence_irrational_angle() {
        let s = spec(3, &[0, 2]);
        let system = System::Torus {
            alpha: Alpha::sqrt2(),
        };
        let f = Observable::Interval {
            lo: rat(0, 1),
            hi: rat(1, 2),
        };
        let out = multi_recurrence_average(&system, &f, &s, 2, 1 << 10).unwrap();
        assert!(out.exact.is_none());
        // ℓ = 2 with a half circle: the average of Leb([0,1/2) ∩ ([0,1/2)-s))
        // over equidistributed s tends to 1/4 + small oscillation.
        assert!(out.value > 0.2 && out.value < 0.3, "{}", out.value);
    }

    #[test]
    fn bernoulli_recurrence_disjoint_windows() {
        // Radius 0, f = indicator of a head at the origin. Every nonzero
        // member separates the three windows completely, so those terms
        // contribute (1/2)^3 each, while the member 0 contributes E[f] =
        // 1/2: the average over 2^10 members is (1/2 + 1023/8) / 1024.
        let s = spec(3, &[0, 2]);
        let f = Observable::Cylinder {
            radius: 0,
            table: vec![rat(0, 1), rat(1, 1)],
        };
        let out = multi_recurrence_average(&System::Bernoulli, &f, &s, 3, 1 << 10).unwrap();
        assert_eq!(out.exact.unwrap(), rat(1027, 8192));
    }

    #[test]
    fn bernoulli_recurrence_overlapping_windows() {
        // Base 3, digits {1,2}, radius 1, f = "at least two heads in the
        // 3-window": the members 1 and 2 overlap the shifted windows.
        //
        // By hand: for step 1 the product asks every length-3 window of 5
        // fair bits to hold at least two heads, which 9 of 32 patterns do.
        // For step 2 the three windows chain through two shared bits;
        // conditioning on those gives 3/16. Steps 4,5,7,8,13,14 separate
        // the windows (1/8 each), so the average over the first 8 members
        // is (9/32 + 3/16 + 6/8) / 8.
        let s = spec(3, &[1, 2]);
        let table: Vec<BigRational> = (0..8)
            .map(|i: usize| {
                if i.count_ones() >= 2 {
                    rat(1, 1)
                } else {
                    rat(0, 1)
                }
            })
            .collect();
        let f = Observable::Cylinder { radius: 1, table };
        let out = multi_recurrence_average(&System::Bernoulli, &f, &s, 3, 8).unwrap();
        assert_eq!(out.exact.unwrap(), rat(39, 256));
    }

    #[test]
    fn recurrence_rejects_bad_inputs() {
        let s = spec(3, &[0, 2]);
        let system = System::Cyclic {
            modulus: 3,
            step: 1,
        };
        let f = indicator_vector(3, 0);
        assert!(matches!(
            multi_recurrence_average(&system, &f, &s, 0, 16),
            Err(Error::Domain(_))
        ));
        let too_big = Observable::Vector(vec![rat(2, 1), rat(0, 1), rat(0, 1)]);
        assert!(matches!(
            multi_recurrence_average(&system, &too_big, &s, 2, 16),
            Err(Error::Domain(_))
        ));
        let torus = System::Torus {
            alpha: Alpha::sqrt2(),
        };
        assert!(matches!(
            multi_recurrence_average(&torus, &f, &s, 2, 16),
            Err(Error::KindMismatch(_))
        ));
    }

    #[test]
    fn vdc_inequality_on_structured_sequences() {
        // Constant sequence: lhs = 1, rhs ≥ 1 (the correlation term is 1).
        let ones = vec![Complex64::new(1.0, 0.0); 512];
        let report = vdc_check(&ones, 16).unwrap();
        assert!(report.holds);
        assert!((report.lhs - 1.0).abs() < 1e-12);

        // Random phases: lhs near 0.
        let random = random_unit_sequence(7, 512);
        let report = vdc_check(&random, 16).unwrap();
        assert!(report.holds);
        assert!(report.lhs < 0.05);

        // Alternating ±1: correlations are large but so is the overhead.
        let alternating: Vec<Complex64> = (0..512)
            .map(|j| Complex64::new(if j % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
            .collect();
        assert!(vdc_check(&alternating, 16).unwrap().holds);
    }

    #[test]
    fn vdc_rejects_bad_inputs() {
        let seq = vec![Complex64::new(0.5, 0.0); 16];
        assert!(vdc_check(&seq, 0).is_err());
        assert!(vdc_check(&seq, 17).is_err());
        assert!(vdc_check(&[], 1).is_err());
        let loud = vec![Complex64::new(1.5, 0.0); 16];
        assert!(vdc_check(&loud, 4).is_err());
    }

    #[test]
    fn random_sequences_are_reproducible() {
        assert_eq!(random_unit_sequence(42, 16), random_unit_sequence(42, 16));
        assert_ne!(random_unit_sequence(42, 16), random_unit_sequence(43, 16));
        assert!(random_unit_sequence(1, 64)
            .iter()
            .all(|z| (z.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn rational_parser_accepts_common_forms() {
        assert_eq!(parse_rational("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rational("-1/2").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("7").unwrap(), rat(7, 1));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-0.5").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a.b").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn kind_mismatches_are_reported() {
        let s = spec(3, &[0, 2]);
        let f = indicator_vector(3, 0);
        assert!(matches!(
            ergodic_average(&System::Bernoulli, &f, &s, 16),
            Err(Error::KindMismatch(_))
        ));
        let sized = Observable::Vector(vec![rat(1, 1); 4]);
        assert!(matches!(
            ergodic_average(
                &System::Cyclic {
                    modulus: 3,
                    step: 1
                },
                &sized,
                &s,
                16
            ),
            Err(Error::Domain(_))
        ));
        let interval = Observable::Interval {
            lo: rat(0, 1),
            hi: rat(1, 2),
        };
        assert!(matches!(
            ergodic_average(
                &System::Torus {
                    alpha: Alpha::sqrt2()
                },
                &interval,
                &s,
                16
            ),
            Err(Error::KindMismatch(_))
        ));
    }
}
