//! Number-plus-unit strings such as `"354.25 kHz"` or `"3.2 mm"`.
//!
//! A [`Quantity`] keeps its value in the plain base unit of its dimension
//! (Hz, m, F, K, s). Frequencies are ordinary frequencies; [`Quantity::angular`]
//! multiplies by `2 pi`.

use std::fmt;
use std::marker::PhantomData;
use std::str::FromStr;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

pub trait Dimension {
    const NAME: &'static str;
    const BASE: &'static str;
}

macro_rules! dimension {
    ($ty:ident, $name:literal, $base:literal) => {
        #[derive(Debug, Clone, Copy, PartialEq)]
        pub struct $ty;
        impl Dimension for $ty {
            const NAME: &'static str = $name;
            const BASE: &'static str = $base;
        }
    };
}

dimension!(Freq, "frequency", "Hz");
dimension!(Len, "length", "m");
dimension!(Cap, "capacitance", "F");
dimension!(Temp, "temperature", "K");
dimension!(Dur, "time", "s");

pub type Frequency = Quantity<Freq>;
pub type Length = Quantity<Len>;
pub type Capacitance = Quantity<Cap>;
pub type Temperature = Quantity<Temp>;
pub type Duration = Quantity<Dur>;

const PREFIXES: &[(&str, i32)] = &[
    ("G", 9),
    ("M", 6),
    ("k", 3),
    ("", 0),
    ("m", -3),
    ("u", -6),
    ("\u{b5}", -6),
    ("\u{3bc}", -6),
    ("n", -9),
    ("p", -12),
    ("f", -15),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity<D> {
    value: f64,
    dim: PhantomData<D>,
}

impl<D: Dimension> Quantity<D> {
    pub fn new(value: f64) -> Self {
        Self { value, dim: PhantomData }
    }

    /// Value in the base unit.
    pub fn value(&self) -> f64 {
        self.value
    }

    /// `2 pi` times the value; rad/s for frequencies.
    pub fn angular(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.value
    }
}

impl<D: Dimension> FromStr for Quantity<D> {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let Some((num, unit)) = s.split_once(char::is_whitespace) else {
            return Err(format!("{} '{s}' needs a unit, e.g. '1 {}'", D::NAME, D::BASE));
        };
        let unit = unit.trim();
        let exp = unit
            .strip_suffix(D::BASE)
            .and_then(|prefix| PREFIXES.iter().find(|(p, _)| *p == prefix))
            .map(|&(_, e)| e)
            .ok_or_else(|| format!("unknown {} unit '{unit}' in '{s}' (expected an SI prefix and {})", D::NAME, D::BASE))?;
        let num = num.trim();
        let malformed = || format!("malformed number '{num}' in '{s}'");
        if num.parse::<f64>().is_err() {
            return Err(malformed());
        }
        // Shift the decimal exponent in text so the result is correctly rounded.
        let (mantissa, e0) = match num.split_once(['e', 'E']) {
            Some((m, e)) => (m, e.parse::<i32>().map_err(|_| malformed())?),
            None => (num, 0),
        };
        let value: f64 = format!("{mantissa}e{}", e0 + exp).parse().map_err(|_| malformed())?;
        if !value.is_finite() {
            return Err(format!("{} '{s}' is not finite", D::NAME));
        }
        Ok(Self::new(value))
    }
}

impl<D: Dimension> fmt::Display for Quantity<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} {}", self.value, D::BASE)
    }
}

impl<D: Dimension> Serialize for Quantity<D> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de, D: Dimension> Deserialize<'de> for Quantity<D> {
    fn deserialize<De: Deserializer<'de>>(d: De) -> Result<Self, De::Error> {
        struct V<D>(PhantomData<D>);
        impl<D: Dimension> Visitor<'_> for V<D> {
            type Value = Quantity<D>;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "a {} string such as \"1 {}\"", D::NAME, D::BASE)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                v.parse().map_err(E::custom)
            }
        }
        d.deserialize_str(V(PhantomData))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_prefixes() {
        assert_eq!("354.25 kHz".parse::<Frequency>().unwrap().value(), 354250.0);
        assert_eq!("100 mHz".parse::<Frequency>().unwrap().value(), 0.1);
        assert_eq!("3.2 mm".parse::<Length>().unwrap().value(), 3.2e-3);
        assert_eq!("-3.2 mm".parse::<Length>().unwrap().value(), -3.2e-3);
        assert_eq!("5.5 pF".parse::<Capacitance>().unwrap().value(), 5.5e-12);
        assert_eq!("0.5 mK".parse::<Temperature>().unwrap().value(), 0.5e-3);
        assert_eq!("2 \u{b5}s".parse::<Duration>().unwrap().value(), 2e-6);
        assert_eq!("1.5e2 MHz".parse::<Frequency>().unwrap().value(), 1.5e8);
    }

    #[test]
    fn rejects_bad_strings() {
        assert!("3.2mm".parse::<Length>().is_err());
        assert!("3.2 kg".parse::<Length>().is_err());
        assert!("x mm".parse::<Length>().is_err());
        assert!("3.2 mHz".parse::<Length>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["354.25 kHz", "0.1 Hz", "1e-300 Hz", "123.456789012345 MHz"] {
            let q: Frequency = s.parse().unwrap();
            assert_eq!(q.to_string().parse::<Frequency>().unwrap(), q);
        }
        let f: Frequency = "1 Hz".parse().unwrap();
        assert!((f.angular() - 2.0 * std::f64::consts::PI).abs() < 1e-15);
    }
}
