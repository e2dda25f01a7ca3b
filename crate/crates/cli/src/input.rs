//! Text grammars for the structured command-line inputs: dynamical systems,
//! observables, and scale-part lists.

use std::collections::BTreeMap;

use crl_core::alpha::Alpha;
use crl_core::dynamics::{parse_rational, Observable, System};
use crl_core::ramsey::ScalePart;
use crl_core::{Error, Result};

use num::complex::Complex64;

fn bad(what: &str, text: &str, why: &str) -> Error {
    Error::InvalidInput(format!("bad {what} {text:?}: {why}"))
}

/// Splits `key=value,key=value` and hands each pair to `take`.
fn parse_pairs(
    what: &str,
    text: &str,
    body: &str,
    mut take: impl FnMut(&str, &str) -> Result<()>,
) -> Result<()> {
    for pair in body.split(',') {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| bad(what, text, "expected key=value pairs"))?;
        take(key.trim(), value.trim())?;
    }
    Ok(())
}

/// Parses a dynamical system:
/// `cyclic:m=<modulus>,r=<step>`, `torus:<angle>`, or `bernoulli`.
pub fn parse_system(text: &str) -> Result<System> {
    let trimmed = text.trim();
    if trimmed == "bernoulli" {
        return Ok(System::Bernoulli);
    }
    if let Some(body) = trimmed.strip_prefix("cyclic:") {
        let mut modulus = None;
        let mut step = None;
        parse_pairs("system", text, body, |key, value| {
            let slot = match key {
                "m" => &mut modulus,
                "r" => &mut step,
                _ => return Err(bad("system", text, "keys are m and r")),
            };
            *slot = Some(
                value
                    .parse::<u64>()
                    .map_err(|_| bad("system", text, "unreadable number"))?,
            );
            Ok(())
        })?;
        let modulus = modulus.ok_or_else(|| bad("system", text, "missing m"))?;
        let step = step.ok_or_else(|| bad("system", text, "missing r"))?;
        return Ok(System::Cyclic { modulus, step });
    }
    if let Some(angle) = trimmed.strip_prefix("torus:") {
        return Ok(System::Torus {
            alpha: Alpha::parse(angle)?,
        });
    }
    Err(bad(
        "system",
        text,
        "expected cyclic:m=..,r=.., torus:<angle>, or bernoulli",
    ))
}

/// Parses a complex number written `re` or `re,im` with rational or decimal
/// parts.
fn parse_complex(what: &str, text: &str, value: &str) -> Result<Complex64> {
    let to_f64 = |part: &str| -> Result<f64> {
        use num::ToPrimitive;
        parse_rational(part)?
            .to_f64()
            .ok_or_else(|| bad(what, text, "value does not fit a float"))
    };
    match value.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(to_f64(re.trim())?, to_f64(im.trim())?)),
        None => Ok(Complex64::new(to_f64(value)?, 0.0)),
    }
}

/// Parses an observable:
///
/// - `vector:<v0>,<v1>,…` — rational values on `Z_m`;
/// - `trig:<freq>=<re>[,<im>];…` — trigonometric polynomial coefficients;
/// - `cylinder:w=<radius>;table=<t0>,<t1>,…` — coordinate-window function;
/// - `interval:<lo>,<hi>` — indicator of `[lo, hi)` on the circle.
pub fn parse_observable(text: &str) -> Result<Observable> {
    let trimmed = text.trim();
    if let Some(body) = trimmed.strip_prefix("vector:") {
        let values = body
            .split(',')
            .map(parse_rational)
            .collect::<Result<Vec<_>>>()?;
        return Ok(Observable::Vector(values));
    }
    if let Some(body) = trimmed.strip_prefix("trig:") {
        let mut coeffs = BTreeMap::new();
        for term in body.split(';') {
            let (freq, value) = term
                .split_once('=')
                .ok_or_else(|| bad("observable", text, "expected freq=re[,im] terms"))?;
            let freq: i64 = freq
                .trim()
                .parse()
                .map_err(|_| bad("observable", text, "unreadable frequency"))?;
            coeffs.insert(freq, parse_complex("observable", text, value.trim())?);
        }
        return Ok(Observable::TrigPoly(coeffs));
    }
    if let Some(body) = trimmed.strip_prefix("cylinder:") {
        let mut radius = None;
        let mut table = None;
        for field in body.split(';') {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| bad("observable", text, "expected w=..;table=.."))?;
            match key.trim() {
                "w" => {
                    radius = Some(
                        value
                            .trim()
                            .parse::<u32>()
                            .map_err(|_| bad("observable", text, "unreadable radius"))?,
                    );
                }
                "table" => {
                    table = Some(
                        value
                            .split(',')
                            .map(parse_rational)
                            .collect::<Result<Vec<_>>>()?,
                    );
                }
                _ => return Err(bad("observable", text, "keys are w and table")),
            }
        }
        let radius = radius.ok_or_else(|| bad("observable", text, "missing w"))?;
        let table = table.ok_or_else(|| bad("observable", text, "missing table"))?;
        return Ok(Observable::Cylinder { radius, table });
    }
    if let Some(body) = trimmed.strip_prefix("interval:") {
        let (lo, hi) = body
            .split_once(',')
            .ok_or_else(|| bad("observable", text, "expected lo,hi"))?;
        return Ok(Observable::Interval {
            lo: parse_rational(lo)?,
            hi: parse_rational(hi)?,
        });
    }
    Err(bad(
        "observable",
        text,
        "expected vector:, trig:, cylinder:, or interval:",
    ))
}

/// Parses scale parts `h:r,h:r,…` — each part contributes `base^h · r`.
pub fn parse_parts(text: &str) -> Result<Vec<ScalePart>> {
    text.split(',')
        .map(|part| {
            let (height, root) = part
                .split_once(':')
                .ok_or_else(|| bad("parts", text, "expected h:r pairs"))?;
            Ok(ScalePart {
                height: height
                    .trim()
                    .parse()
                    .map_err(|_| bad("parts", text, "unreadable height"))?,
                root: root
                    .trim()
                    .parse()
                    .map_err(|_| bad("parts", text, "unreadable root"))?,
            })
        })
        .collect()
}
