//! Quantities written as `"<number> <unit>"` strings.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;

use crate::TWO_PI;

/// Physical dimension of a config quantity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dimension {
    Frequency,
    Time,
    Angle,
}

#[derive(Clone, Copy, Debug)]
enum Scale {
    Pow10(i32),
    Factor(f64),
}

impl Scale {
    // dividing by an exact power of ten keeps "20 us" == 20e-6
    fn apply(self, x: f64) -> f64 {
        match self {
            Scale::Pow10(k) if k >= 0 => x * 10f64.powi(k),
            Scale::Pow10(k) => x / 10f64.powi(-k),
            Scale::Factor(f) => x * f,
        }
    }
}

impl Dimension {
    /// Unit suffixes with their scale: a power of ten or a plain factor.
    fn units(self) -> &'static [(&'static str, Scale)] {
        use Scale::{Factor, Pow10};
        match self {
            // plain frequencies, converted to rad/s below
            Dimension::Frequency => &[
                ("Hz", Pow10(0)),
                ("kHz", Pow10(3)),
                ("MHz", Pow10(6)),
                ("GHz", Pow10(9)),
            ],
            Dimension::Time => &[
                ("s", Pow10(0)),
                ("ms", Pow10(-3)),
                ("us", Pow10(-6)),
                ("µs", Pow10(-6)),
                ("μs", Pow10(-6)),
                ("ns", Pow10(-9)),
            ],
            Dimension::Angle => &[("rad", Pow10(0)), ("deg", Factor(std::f64::consts::PI / 180.0))],
        }
    }

    fn name(self) -> &'static str {
        match self {
            Dimension::Frequency => "frequency",
            Dimension::Time => "time",
            Dimension::Angle => "angle",
        }
    }

    fn expected(self) -> String {
        let list: Vec<&str> = self.units().iter().map(|(u, _)| *u).collect();
        format!(
            "a {} string such as \"400 {}\" (units: {})",
            self.name(),
            list[1.min(list.len() - 1)],
            list.join(", ")
        )
    }
}

/// Parses `"<number> <unit>"` into SI units (rad/s for frequencies, s, rad).
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, String> {
    let s = text.trim();
    let split = s
        .char_indices()
        .find(|&(i, c)| c.is_alphabetic() && !(matches!(c, 'e' | 'E') && exponent_at(s, i)))
        .map(|(i, _)| i)
        .ok_or_else(|| format!("`{s}` has no unit suffix; expected {}", dim.expected()))?;
    let (num, unit) = (s[..split].trim(), s[split..].trim());
    let value: f64 = num
        .parse()
        .map_err(|_| format!("`{s}`: cannot read `{num}` as a number"))?;
    if !value.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    let scale = dim
        .units()
        .iter()
        .find(|(u, _)| *u == unit)
        .map(|(_, f)| *f)
        .ok_or_else(|| {
            format!(
                "`{s}`: unknown {} unit `{unit}`; expected {}",
                dim.name(),
                dim.expected()
            )
        })?;
    let si = scale.apply(value);
    Ok(if dim == Dimension::Frequency { TWO_PI * si } else { si })
}

// `e` belongs to the number when followed by a digit or sign and preceded by a digit
fn exponent_at(s: &str, i: usize) -> bool {
    let before = s[..i].chars().last().is_some_and(|c| c.is_ascii_digit() || c == '.');
    let after = s[i + 1..]
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_digit() || c == '-' || c == '+');
    before && after
}

macro_rules! quantity {
    ($name:ident, $dim:expr, $doc:literal) => {
        #[doc = $doc]
        #[derive(Clone, Copy, Debug, PartialEq)]
        pub struct $name(pub f64);

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                struct V;
                impl Visitor<'_> for V {
                    type Value = $name;
                    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                        f.write_str(&$dim.expected())
                    }
                    fn visit_str<E: de::Error>(self, v: &str) -> Result<$name, E> {
                        parse_quantity(v, $dim).map($name).map_err(E::custom)
                    }
                    fn visit_i64<E: de::Error>(self, v: i64) -> Result<$name, E> {
                        Err(E::custom(format!(
                            "bare number {v} has no unit suffix; expected {}",
                            $dim.expected()
                        )))
                    }
                    fn visit_u64<E: de::Error>(self, v: u64) -> Result<$name, E> {
                        self.visit_i64(v as i64)
                    }
                    fn visit_f64<E: de::Error>(self, v: f64) -> Result<$name, E> {
                        Err(E::custom(format!(
                            "bare number {v} has no unit suffix; expected {}",
                            $dim.expected()
                        )))
                    }
                }
                d.deserialize_any(V)
            }
        }
    };
}

quantity!(Frequency, Dimension::Frequency, "Frequency, stored in rad/s.");
quantity!(Time, Dimension::Time, "Duration in seconds.");
quantity!(Angle, Dimension::Angle, "Angle in radians.");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequencies_pick_up_two_pi_once() {
        assert_eq!(parse_quantity("400 kHz", Dimension::Frequency).unwrap(), TWO_PI * 400e3);
        assert_eq!(
            parse_quantity("2.87GHz", Dimension::Frequency).unwrap(),
            TWO_PI * 2.87e9
        );
        assert_eq!(
            parse_quantity("-0.5 kHz", Dimension::Frequency).unwrap(),
            -TWO_PI * 500.0
        );
        assert_eq!(parse_quantity("1e3 Hz", Dimension::Frequency).unwrap(), TWO_PI * 1e3);
    }

    #[test]
    fn times_and_angles() {
        assert_eq!(parse_quantity("20 us", Dimension::Time).unwrap(), 20e-6);
        assert_eq!(parse_quantity("20 µs", Dimension::Time).unwrap(), 20e-6);
        assert_eq!(parse_quantity("8.8 ms", Dimension::Time).unwrap(), 8.8e-3);
        assert_eq!(parse_quantity("2e-1 s", Dimension::Time).unwrap(), 0.2);
        assert!((parse_quantity("90 deg", Dimension::Angle).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn missing_or_wrong_unit_rejected() {
        assert!(parse_quantity("400", Dimension::Frequency)
            .unwrap_err()
            .contains("no unit suffix"));
        assert!(parse_quantity("400 ms", Dimension::Frequency)
            .unwrap_err()
            .contains("unknown frequency unit"));
        assert!(parse_quantity("abc kHz", Dimension::Frequency).is_err());
        assert!(parse_quantity("inf kHz", Dimension::Frequency).is_err());
    }

    #[test]
    fn bare_toml_number_rejected() {
        #[derive(Deserialize)]
        struct T {
            #[allow(dead_code)]
            f: Frequency,
        }
        let err = toml::from_str::<T>("f = 400").err().unwrap().to_string();
        assert!(err.contains("no unit suffix"), "{err}");
    }
}
