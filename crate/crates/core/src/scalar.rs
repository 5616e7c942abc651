//! Complex scalars as text: parsing for model spec files, 17-significant-digit
//! formatting for reports.
//!
//! Accepted literal forms: `"2"`, `"-1.5"`, `"i"`, `"-i"`, `"2i"`, `"1/3"`,
//! `"i/4"`, `"2i/5"`, `"a+bi"`, `"a-bi"` (each side may be a fraction).
//! Sequence rules: `c/(a k + b)` written like `"i/(2k+2)"`, and geometric
//! `c*q^k` written like `"0.4*0.5^k"` (`·` also accepted for `*`).

use num_complex::Complex64;

use crate::error::{Error, Result};

pub fn parse_complex(input: &str) -> Result<Complex64> {
    let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::Parse("empty complex literal".into()));
    }
    let mut total = Complex64::new(0.0, 0.0);
    for term in split_terms(&s)? {
        total += parse_term(&term)?;
    }
    Ok(total)
}

/// Splits "a+bi" style strings at top-level signs, keeping exponent signs
/// (`1e-3`) attached to their mantissa.
fn split_terms(s: &str) -> Result<Vec<String>> {
    let bytes = s.as_bytes();
    let mut terms = Vec::new();
    let mut start = 0;
    for i in 1..bytes.len() {
        let c = bytes[i] as char;
        if (c == '+' || c == '-') && !matches!(bytes[i - 1] as char, 'e' | 'E' | '+' | '-' | '(') {
            terms.push(s[start..i].to_string());
            start = i;
        }
    }
    terms.push(s[start..].to_string());
    if terms.len() > 2 {
        return Err(Error::Parse(format!("too many terms in complex literal '{s}'")));
    }
    Ok(terms)
}

fn parse_term(term: &str) -> Result<Complex64> {
    if let Some((numer, denom)) = term.split_once('/') {
        let n = parse_simple(numer)?;
        let d = parse_simple(denom)?;
        if d == Complex64::new(0.0, 0.0) {
            return Err(Error::Parse(format!("division by zero in '{term}'")));
        }
        return Ok(n / d);
    }
    parse_simple(term)
}

/// A signed float, optionally suffixed with `i`.
fn parse_simple(s: &str) -> Result<Complex64> {
    if s.is_empty() {
        return Err(Error::Parse("empty scalar".into()));
    }
    if let Some(coeff) = s.strip_suffix('i') {
        let value = match coeff {
            "" | "+" => 1.0,
            "-" => -1.0,
            other => other
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad imaginary coefficient '{s}'")))?,
        };
        return Ok(Complex64::new(0.0, value));
    }
    s.parse::<f64>()
        .map(|v| Complex64::new(v, 0.0))
        .map_err(|_| Error::Parse(format!("bad real literal '{s}'")))
}

/// Expands a sequence rule into `count` values at k = 1..=count.
///
/// Grammar: `c/(a k + b)` (e.g. `"i/(2k+2)"`) or geometric `c*q^k`.
pub fn expand_rule(rule: &str, count: usize) -> Result<Vec<Complex64>> {
    let s: String = rule.chars().filter(|c| !c.is_whitespace()).collect();

    if let Some(open) = s.find("/(") {
        if !s.ends_with(')') {
            return Err(Error::Parse(format!("unterminated rule '{rule}'")));
        }
        let c = parse_complex(&s[..open])?;
        let body = &s[open + 2..s.len() - 1];
        let kpos = body
            .find('k')
            .ok_or_else(|| Error::Parse(format!("rule '{rule}' missing k")))?;
        let a = match &body[..kpos] {
            "" | "+" => Complex64::new(1.0, 0.0),
            "-" => Complex64::new(-1.0, 0.0),
            other => parse_complex(other)?,
        };
        let b = match &body[kpos + 1..] {
            "" => Complex64::new(0.0, 0.0),
            other => parse_complex(other)?,
        };
        return (1..=count)
            .map(|k| {
                let denom = a * k as f64 + b;
                if denom.norm() == 0.0 {
                    Err(Error::Parse(format!("rule '{rule}' vanishes at k={k}")))
                } else {
                    Ok(c / denom)
                }
            })
            .collect();
    }

    let sep = s.find('*').or_else(|| s.find('·'));
    if let Some(pos) = sep {
        let rest = &s[pos..];
        let rest = rest.trim_start_matches(['*', '·']);
        if let Some(base) = rest.strip_suffix("^k") {
            let c = parse_complex(&s[..pos])?;
            let q = parse_complex(base)?;
            return Ok((1..=count).map(|k| c * q.powu(k as u32)).collect());
        }
    }
    Err(Error::Parse(format!("unsupported sequence rule '{rule}'")))
}

/// 17 significant digits, round-trippable.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Canonical `a+bi` form with 17 significant digits on each part.
pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format_real(z.re)
    } else if z.re == 0.0 {
        format!("{}i", format_real(z.im))
    } else if z.im < 0.0 {
        format!("{}-{}i", format_real(z.re), format_real(-z.im))
    } else {
        format!("{}+{}i", format_real(z.re), format_real(z.im))
    }
}
