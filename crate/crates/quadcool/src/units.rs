//! Unit-suffixed quantities in config files.

use std::f64::consts::TAU;
use std::fmt;

use quadcool_core::constants::{ATOMIC_MASS_UNIT, ELECTRON_VOLT};

/// Physical dimension of a config value, with its base unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    /// Angular frequency, rad/s. Hz-type suffixes are multiplied by 2π.
    Frequency,
    Power,
    Length,
    Field,
    Time,
    Temperature,
    Energy,
    /// Event rate, s⁻¹ (never multiplied by 2π).
    Rate,
    Velocity,
    Mass,
    Dimensionless,
}

impl Dimension {
    pub fn base_unit(self) -> &'static str {
        match self {
            Dimension::Frequency => "rad/s",
            Dimension::Power => "W",
            Dimension::Length => "m",
            Dimension::Field => "T",
            Dimension::Time => "s",
            Dimension::Temperature => "K",
            Dimension::Energy => "J",
            Dimension::Rate => "/s",
            Dimension::Velocity => "m/s",
            Dimension::Mass => "kg",
            Dimension::Dimensionless => "",
        }
    }

    /// Factor converting `unit` to the base unit, if `unit` has this dimension.
    pub fn factor(self, unit: &str) -> Option<f64> {
        let f = match (self, unit) {
            (Dimension::Frequency, "rad/s") => 1.0,
            (Dimension::Frequency, "Hz") => TAU,
            (Dimension::Frequency, "kHz") => TAU * 1e3,
            (Dimension::Frequency, "MHz") => TAU * 1e6,
            (Dimension::Frequency, "GHz") => TAU * 1e9,
            (Dimension::Power, "W") => 1.0,
            (Dimension::Power, "mW") => 1e-3,
            (Dimension::Power, "uW" | "μW") => 1e-6,
            (Dimension::Length, "m") => 1.0,
            (Dimension::Length, "mm") => 1e-3,
            (Dimension::Length, "um" | "μm") => 1e-6,
            (Dimension::Length, "nm") => 1e-9,
            (Dimension::Field, "T") => 1.0,
            (Dimension::Field, "mT") => 1e-3,
            (Dimension::Field, "G") => 1e-4,
            (Dimension::Field, "mG") => 1e-7,
            (Dimension::Time, "s") => 1.0,
            (Dimension::Time, "ms") => 1e-3,
            (Dimension::Time, "us" | "μs") => 1e-6,
            (Dimension::Time, "ns") => 1e-9,
            (Dimension::Temperature, "K") => 1.0,
            (Dimension::Temperature, "mK") => 1e-3,
            (Dimension::Temperature, "uK" | "μK") => 1e-6,
            (Dimension::Energy, "J") => 1.0,
            (Dimension::Energy, "eV") => ELECTRON_VOLT,
            (Dimension::Energy, "meV") => 1e-3 * ELECTRON_VOLT,
            (Dimension::Rate, "/s" | "1/s" | "s^-1") => 1.0,
            (Dimension::Rate, "/ms" | "1/ms") => 1e3,
            (Dimension::Velocity, "m/s") => 1.0,
            (Dimension::Mass, "kg") => 1.0,
            (Dimension::Mass, "u") => ATOMIC_MASS_UNIT,
            (Dimension::Dimensionless, "") => 1.0,
            _ => return None,
        };
        Some(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnitError {
    BadNumber(String),
    MissingUnit { expected: &'static str },
    WrongUnit { unit: String, expected: &'static str },
}

impl fmt::Display for UnitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnitError::BadNumber(s) => write!(f, "`{s}` is not a number"),
            UnitError::MissingUnit { expected } => write!(f, "missing unit (expected e.g. `{expected}`)"),
            UnitError::WrongUnit { unit, expected } => {
                write!(f, "unit `{unit}` does not fit (expected e.g. `{expected}`)")
            }
        }
    }
}

fn split_number(text: &str) -> (&str, &str) {
    let text = text.trim();
    match text.find(char::is_whitespace) {
        Some(i) => (&text[..i], text[i..].trim()),
        None => {
            // Allow "5MHz" as well as "5 MHz".
            let end = text
                .char_indices()
                .find(|&(i, c)| {
                    !(c.is_ascii_digit() || c == '.' || c == '-' || c == '+')
                        && !((c == 'e' || c == 'E')
                            && text[i + 1..].starts_with(|d: char| d.is_ascii_digit() || d == '-' || d == '+'))
                })
                .map_or(text.len(), |(i, _)| i);
            (&text[..end], &text[end..])
        }
    }
}

/// Parses "−5 MHz" into base units of `dim`.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, UnitError> {
    let (number, unit) = split_number(text);
    let value: f64 = number.parse().map_err(|_| UnitError::BadNumber(number.to_string()))?;
    if !value.is_finite() {
        return Err(UnitError::BadNumber(number.to_string()));
    }
    let expected = dim.base_unit();
    if unit.is_empty() && dim != Dimension::Dimensionless {
        return Err(UnitError::MissingUnit { expected });
    }
    let factor = dim.factor(unit).ok_or_else(|| UnitError::WrongUnit { unit: unit.to_string(), expected })?;
    // Decimal sub-units shift the exponent of the text itself, so "1.2 G"
    // parses as "1.2e-4", the same double as that literal.
    if let Some(&(_, shift)) =
        [(1e-3, -3), (1e-4, -4), (1e-6, -6), (1e-7, -7), (1e-9, -9)].iter().find(|p| p.0 == factor)
    {
        return Ok(shift_exponent(number, shift));
    }
    // 2π·value·scale, rounded the same way as the core's `mhz`/`khz`.
    if dim == Dimension::Frequency {
        let scale = match unit {
            "Hz" => Some(1.0),
            "kHz" => Some(1e3),
            "MHz" => Some(1e6),
            "GHz" => Some(1e9),
            _ => None,
        };
        if let Some(scale) = scale {
            return Ok(TAU * value * scale);
        }
    }
    Ok(value * factor)
}

fn shift_exponent(number: &str, shift: i32) -> f64 {
    let (mantissa, exp) = match number.find(['e', 'E']) {
        Some(i) => (&number[..i], number[i + 1..].parse::<i32>().unwrap_or(0)),
        None => (number, 0),
    };
    format!("{mantissa}e{}", exp + shift).parse().expect("already parsed as a number")
}

/// Parses "0, 0.4, 1.2 G": comma-separated numbers sharing one trailing unit.
pub fn parse_quantity_list(text: &str, dim: Dimension) -> Result<Vec<f64>, UnitError> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let (_, unit) = split_number(parts[parts.len() - 1]);
    parts
        .iter()
        .map(|p| {
            let (number, own) = split_number(p);
            let unit = if own.is_empty() { unit } else { own };
            parse_quantity(&format!("{number} {unit}"), dim)
        })
        .collect()
}

/// Shortest text that parses back to exactly `value`.
pub fn format_number(value: f64) -> String {
    let a = value.abs();
    if a == 0.0 || (1e-4..1e9).contains(&a) {
        format!("{value}")
    } else {
        format!("{value:e}")
    }
}

/// `value` in base units with its suffix.
pub fn format_quantity(value: f64, dim: Dimension) -> String {
    let unit = dim.base_unit();
    if unit.is_empty() {
        format_number(value)
    } else {
        format!("{} {unit}", format_number(value))
    }
}

pub fn format_quantity_list(values: &[f64], dim: Dimension) -> String {
    let numbers: Vec<String> = values.iter().map(|&v| format_number(v)).collect();
    let unit = dim.base_unit();
    if numbers.is_empty() || unit.is_empty() {
        numbers.join(", ")
    } else {
        format!("{} {unit}", numbers.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use quadcool_core::constants::mhz;

    #[test]
    fn conversions() {
        assert_eq!(parse_quantity("-5 MHz", Dimension::Frequency).unwrap(), mhz(-5.0));
        assert_eq!(parse_quantity("0.95 MHz", Dimension::Frequency).unwrap(), mhz(0.95));
        assert_eq!(parse_quantity("1.2 G", Dimension::Field).unwrap(), 1.2e-4);
        assert_eq!(parse_quantity("250mW", Dimension::Power).unwrap(), 0.25);
        assert_eq!(parse_quantity("1e-3 W", Dimension::Power).unwrap(), 1e-3);
        assert_eq!(parse_quantity("50 μm", Dimension::Length).unwrap(), 50e-6);
        assert_eq!(parse_quantity("280 um", Dimension::Length).unwrap(), 280e-6);
        assert_eq!(parse_quantity("0.1 eV", Dimension::Energy).unwrap(), 0.1 * ELECTRON_VOLT);
        assert_eq!(parse_quantity("3.6e-4", Dimension::Dimensionless).unwrap(), 3.6e-4);
    }

    #[test]
    fn unit_errors() {
        assert_eq!(parse_quantity("5", Dimension::Frequency), Err(UnitError::MissingUnit { expected: "rad/s" }));
        assert!(matches!(parse_quantity("5 mW", Dimension::Frequency), Err(UnitError::WrongUnit { .. })));
        assert!(matches!(parse_quantity("five MHz", Dimension::Frequency), Err(UnitError::BadNumber(_))));
        assert!(matches!(parse_quantity("1 Hz", Dimension::Rate), Err(UnitError::WrongUnit { .. })));
        assert!(matches!(parse_quantity("inf W", Dimension::Power), Err(UnitError::BadNumber(_))));
    }

    #[test]
    fn lists_share_a_unit() {
        assert_eq!(parse_quantity_list("0, 0.4, 1.2 G", Dimension::Field).unwrap(), vec![0.0, 0.4e-4, 1.2e-4]);
        assert_eq!(parse_quantity_list("1 mT, 2 G", Dimension::Field).unwrap(), vec![1e-3, 2e-4]);
        assert!(parse_quantity_list("", Dimension::Field).unwrap().is_empty());
    }

    #[test]
    fn formatting_round_trips() {
        for v in [0.0, -TAU * 5e6, 1.2e-4, 1.602176634e-20, 3.6e-4, 0.25, 1e12, 123.456] {
            let text = format_quantity(v, Dimension::Energy);
            assert_eq!(parse_quantity(&text, Dimension::Energy).unwrap(), v, "{text}");
        }
    }
}
