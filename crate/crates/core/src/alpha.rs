//! Rotation angles and high-precision phase reduction.
//!
//! Exponential sums over a digit-restricted sequence need `frac(α · k)` for
//! members `k` that easily exceed 2^53, where a bare `f64` product has lost
//! the fractional part entirely. Angles therefore come in two exact-ish
//! flavors:
//!
//! * [`Alpha::Rational`] reduces `p·k mod q` in integer arithmetic — phases
//!   are exact rationals;
//! * [`Alpha::Real`] carries a double-double (`hi + lo`, ~106 mantissa bits)
//!   and reduces mod 1 limb-wise: `k` is split into 32-bit limbs and each
//!   limb multiplies a precomputed `frac(α · 2^{32·i})`, so no intermediate
//!   product outgrows the representation.
//!
//! The residual error of a real-angle phase is about `k · 2^{-106}` from the
//! angle's own representation plus ~2^-70 from the reduction; phases are
//! trustworthy to full `f64` precision for `k` up to roughly 1e20 and
//! degrade gracefully beyond.

use std::fmt;
use std::ops::Add;

use num::complex::Complex64;
use num::integer::gcd;

use crate::error::{Error, Result};

/// A two-float extension of `f64`: the represented value is `hi + lo` with
/// `|lo| ≤ ulp(hi)/2`. Supplies just the operations phase reduction needs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

/// Error-free sum: `a + b = s + e` exactly.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Error-free product via fused multiply-add: `a · b = p + e` exactly.
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    /// Renormalizes an unordered pair into the `|lo| ≤ ulp(hi)/2` form.
    pub fn new(hi: f64, lo: f64) -> Self {
        let (s, e) = two_sum(hi, lo);
        DoubleDouble { hi: s, lo: e }
    }

    pub fn from_f64(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// Product with a plain float (exact when `x` is a small integer).
    pub fn mul_f64(self, x: f64) -> Self {
        let (p, e) = two_prod(self.hi, x);
        DoubleDouble::new(p, e + self.lo * x)
    }

    /// Fractional part, renormalized into `[0, 1)`.
    pub fn frac(self) -> Self {
        let floor = self.hi.floor();
        // two_sum captures the rounding error of hi - floor exactly; the lo
        // word then folds in at full precision.
        let (s1, e1) = two_sum(self.hi, -floor);
        let (s2, e2) = two_sum(s1, self.lo);
        let mut out = DoubleDouble::new(s2, e1 + e2);
        while out.hi >= 1.0 {
            out = DoubleDouble::new(out.hi - 1.0, out.lo);
        }
        while out.hi < 0.0 {
            out = DoubleDouble::new(out.hi + 1.0, out.lo);
        }
        out
    }

    /// `frac(self · k)` for an unsigned 128-bit integer, via 32-bit limbs.
    pub fn frac_mul_u128(self, k: u128) -> Self {
        let mut acc = DoubleDouble::from_f64(0.0);
        // frac(self · 2^{32·i}), advanced limb by limb.
        let mut scaled = self.frac();
        let mut rest = k;
        loop {
            let limb = (rest & 0xffff_ffff) as u32;
            if limb != 0 {
                acc = (acc + scaled.mul_f64(limb as f64)).frac();
            }
            rest >>= 32;
            if rest == 0 {
                return acc;
            }
            scaled = scaled.mul_f64(4_294_967_296.0).frac();
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;

    fn add(self, other: Self) -> Self {
        let (s, e) = two_sum(self.hi, other.hi);
        DoubleDouble::new(s, e + self.lo + other.lo)
    }
}

/// A rotation angle: an exact rational or a double-double real.
///
/// All consumers only ever need the angle mod 1, so scaling operations are
/// free to reduce to the fractional part.
#[derive(Clone, Copy, Debug)]
pub enum Alpha {
    /// `num/den`, reduced, `den ≥ 1`, `0 ≤ num < den`.
    Rational {
        num: u64,
        den: u64,
    },
    Real(DoubleDouble),
}

impl Alpha {
    /// Builds a reduced rational angle; only its value mod 1 is kept.
    pub fn rational(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidInput(
                "rational angle with zero denominator".into(),
            ));
        }
        let den_u = den.unsigned_abs();
        // Normalize the representative into [0, den).
        let num_u = (num as i128 * den.signum() as i128).rem_euclid(den_u as i128) as u64;
        let g = gcd(num_u, den_u).max(1);
        Ok(Alpha::Rational {
            num: num_u / g,
            den: den_u / g,
        })
    }

    pub fn real(x: f64) -> Self {
        Alpha::Real(DoubleDouble::from_f64(x))
    }

    /// √2 to double-double precision.
    pub fn sqrt2() -> Self {
        Alpha::Real(DoubleDouble {
            hi: std::f64::consts::SQRT_2,
            lo: -9.667_293_313_452_913e-17,
        })
    }

    /// The golden ratio (1+√5)/2 to double-double precision.
    pub fn golden() -> Self {
        Alpha::Real(DoubleDouble {
            hi: 1.618_033_988_749_895,
            lo: -5.432_115_203_682_506e-17,
        })
    }

    /// Accepts `p/q`, a decimal literal, or the named constants `sqrt2` and
    /// `golden`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        match text {
            "sqrt2" => return Ok(Alpha::sqrt2()),
            "golden" => return Ok(Alpha::golden()),
            _ => {}
        }
        if let Some((p, q)) = text.split_once('/') {
            let p = p
                .trim()
                .parse::<i64>()
                .map_err(|e| Error::InvalidInput(format!("bad angle numerator {p:?}: {e}")))?;
            let q = q
                .trim()
                .parse::<i64>()
                .map_err(|e| Error::InvalidInput(format!("bad angle denominator {q:?}: {e}")))?;
            return Alpha::rational(p, q);
        }
        let x = text
            .parse::<f64>()
            .map_err(|e| Error::InvalidInput(format!("bad angle {text:?}: {e}")))?;
        if !x.is_finite() {
            return Err(Error::InvalidInput(format!("angle {text:?} is not finite")));
        }
        Ok(Alpha::real(x))
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Alpha::Rational { .. })
    }

    /// The reduced `(num, den)` pair for a rational angle.
    pub fn as_rational(&self) -> Option<(u64, u64)> {
        match *self {
            Alpha::Rational { num, den } => Some((num, den)),
            Alpha::Real(_) => None,
        }
    }

    /// `frac(α · k)` in `[0, 1)`. Exact for rational angles.
    pub fn phase(&self, k: u128) -> f64 {
        match *self {
            Alpha::Rational { num, den } => {
                let r = (k % den as u128) as u64;
                let v = (num as u128 * r as u128) % den as u128;
                v as f64 / den as f64
            }
            Alpha::Real(dd) => {
                let v = dd.frac_mul_u128(k).to_f64();
                // Collapsing hi + lo can round onto the boundary.
                if v >= 1.0 {
                    v - 1.0
                } else if v < 0.0 {
                    v + 1.0
                } else {
                    v
                }
            }
        }
    }

    /// `e(α·k) = exp(2πi·α·k)`.
    pub fn exp_phase(&self, k: u128) -> Complex64 {
        let (sin, cos) = (std::f64::consts::TAU * self.phase(k)).sin_cos();
        Complex64::new(cos, sin)
    }

    /// The angle `f · α` mod 1, for a (possibly negative) integer frequency.
    pub fn scale_int(&self, f: i64) -> Self {
        match *self {
            Alpha::Rational { num, den } => {
                let v = (num as i128 * f as i128).rem_euclid(den as i128) as u64;
                let g = gcd(v, den).max(1);
                Alpha::Rational {
                    num: v / g,
                    den: den / g,
                }
            }
            Alpha::Real(dd) => {
                let scaled = dd.mul_f64(f.unsigned_abs() as f64).frac();
                if f < 0 {
                    // frac(-x) = 1 - frac(x) unless frac(x) = 0.
                    Alpha::Real(DoubleDouble::new(1.0 - scaled.hi, -scaled.lo).frac())
                } else {
                    Alpha::Real(scaled)
                }
            }
        }
    }

    /// The angle `base^i · α` mod 1, used to rescale a rotation along a
    /// subsequence of indices.
    pub fn scale_base_pow(&self, base: u32, i: u32) -> Result<Self> {
        match *self {
            Alpha::Rational { num, den } => {
                let mut v = num as u128;
                let den_w = den as u128;
                for _ in 0..i {
                    v = (v * base as u128) % den_w;
                }
                let v = v as u64;
                let g = gcd(v, den).max(1);
                Ok(Alpha::Rational {
                    num: v / g,
                    den: den / g,
                })
            }
            Alpha::Real(dd) => {
                let pow = (base as u128).checked_pow(i).ok_or(Error::Overflow)?;
                Ok(Alpha::Real(dd.frac_mul_u128(pow)))
            }
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Alpha::Rational { num, den } => write!(f, "{num}/{den}"),
            Alpha::Real(dd) => write!(f, "{}", dd.to_f64()),
        }
    }
}
