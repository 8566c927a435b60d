//! Parsing of physical quantities written with explicit units.
//!
//! Times: `12.8us`, `12.8µs`, `100ns`, `1.5ms`, `2s`.
//! Angular frequencies: `2pi*69.7kHz`, `69.7kHz*2pi`, `2π×69.7 kHz`, `4.4e5rad/s`.
//! Rates: `2.7/s`, `2.7ph/s`.
//! A bare cyclic frequency (`69.7kHz`) is rejected as ambiguous.

use std::f64::consts::PI;

use serde::{Deserialize, Deserializer, Serializer};

use crate::error::{Error, Result};

fn split_number(s: &str) -> Result<(f64, &str)> {
    let s = s.trim();
    let end = s
        .char_indices()
        .find(|&(i, c)| {
            !(c.is_ascii_digit() || c == '.' || c == '+' || c == '-' || (c == 'e' || c == 'E') && i > 0 && {
                // exponent only when followed by a digit or sign
                s[i + 1..].chars().next().is_some_and(|n| n.is_ascii_digit() || n == '-' || n == '+')
            })
        })
        .map(|(i, _)| i)
        .unwrap_or(s.len());
    let value: f64 = s[..end]
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("no number in quantity '{s}'")))?;
    Ok((value, s[end..].trim()))
}

/// Duration in seconds.
pub fn parse_time(text: &str) -> Result<f64> {
    let (v, unit) = split_number(text)?;
    let scale = match unit {
        "s" => 1.0,
        "ms" => 1e-3,
        "us" | "µs" | "μs" => 1e-6,
        "ns" => 1e-9,
        _ => return Err(Error::InvalidParameter(format!("unknown or missing time unit in '{text}'"))),
    };
    Ok(v * scale)
}

fn strip_two_pi(s: &str) -> Option<&str> {
    const PREFIXES: [&str; 6] = ["2pi*", "2π*", "2π×", "2pi×", "2pi ", "2π "];
    const SUFFIXES: [&str; 4] = ["*2pi", "*2π", "×2π", "×2pi"];
    let s = s.trim();
    for p in PREFIXES {
        if let Some(rest) = s.strip_prefix(p) {
            return Some(rest.trim());
        }
    }
    for p in SUFFIXES {
        if let Some(rest) = s.strip_suffix(p) {
            return Some(rest.trim());
        }
    }
    None
}

/// Angular frequency in rad/s.
pub fn parse_angular_frequency(text: &str) -> Result<f64> {
    if let Some(rest) = strip_two_pi(text) {
        let (v, unit) = split_number(rest)?;
        let hz = match unit {
            "Hz" => 1.0,
            "kHz" => 1e3,
            "MHz" => 1e6,
            _ => return Err(Error::InvalidParameter(format!("unknown frequency unit in '{text}'"))),
        };
        return Ok(2.0 * PI * v * hz);
    }
    let (v, unit) = split_number(text)?;
    match unit {
        "rad/s" => Ok(v),
        "Hz" | "kHz" | "MHz" => Err(Error::InvalidParameter(format!(
            "'{text}' is a cyclic frequency; write 2pi*{text} or give rad/s"
        ))),
        _ => Err(Error::InvalidParameter(format!("unknown or missing frequency unit in '{text}'"))),
    }
}

/// Rate in events (phonons) per second: `2.7/s`, `2.7ph/s`, `2.7 phonons/s`.
pub fn parse_rate(text: &str) -> Result<f64> {
    let (v, unit) = split_number(text)?;
    match unit {
        "/s" | "ph/s" | "phonons/s" => Ok(v),
        "/ms" | "ph/ms" | "phonons/ms" => Ok(v * 1e3),
        _ => Err(Error::InvalidParameter(format!("unknown or missing rate unit in '{text}' (use e.g. 2.7/s)"))),
    }
}

/// Serde adapter storing angular frequencies as `"<value> rad/s"` strings and
/// accepting any form understood by [`parse_angular_frequency`].
pub mod angular {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{v}rad/s"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        let text = String::deserialize(d)?;
        parse_angular_frequency(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn times() {
        assert!((parse_time("12.8us").unwrap() - 12.8e-6).abs() < 1e-18);
        assert!((parse_time("100ns").unwrap() - 1e-7).abs() < 1e-20);
        assert!((parse_time("1.5e-3s").unwrap() - 1.5e-3).abs() < 1e-18);
        assert_eq!(parse_time("3 ms").unwrap(), 3e-3);
        assert!(parse_time("12.8").is_err());
        assert!(parse_time("fast").is_err());
    }

    #[test]
    fn angular_frequencies() {
        let w = 2.0 * PI * 69.7e3;
        for s in ["69.7kHz*2pi", "2pi*69.7kHz", "2π×69.7 kHz"] {
            assert!((parse_angular_frequency(s).unwrap() - w).abs() < 1e-6, "{s}");
        }
        assert_eq!(parse_angular_frequency("1000rad/s").unwrap(), 1000.0);
        assert!(parse_angular_frequency("69.7kHz").is_err());
        assert!(parse_angular_frequency("69.7").is_err());
    }

    #[test]
    fn rates() {
        assert_eq!(parse_rate("2.7/s").unwrap(), 2.7);
        assert_eq!(parse_rate("2.7 ph/s").unwrap(), 2.7);
        assert!(parse_rate("2.7").is_err());
    }
}
