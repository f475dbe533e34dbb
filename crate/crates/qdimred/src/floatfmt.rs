//! Canonical float text format: 17 significant decimal digits, which always
//! round-trips an f64 exactly. Shared by the CSV writer, reports and
//! checkpoints.

use std::io;

/// `{:.16e}` gives one leading digit plus 16 fractional digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// serde_json formatter that writes every f64 in the canonical format.
pub struct CanonicalFloats;

impl serde_json::ser::Formatter for CanonicalFloats {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }
}

/// Serialize to JSON text with canonical float formatting.
pub fn to_json_string<T: serde::Serialize>(value: &T) -> crate::error::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, CanonicalFloats);
    value
        .serialize(&mut ser)
        .map_err(|e| crate::error::Error::InvalidArgument(format!("JSON serialize: {e}")))?;
    String::from_utf8(buf)
        .map_err(|e| crate::error::Error::InvalidArgument(format!("JSON not UTF-8: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_exactly() {
        for v in [0.1, -3.5e-300, 1.0 / 3.0, 123456789.123456789, f64::MIN_POSITIVE] {
            let s = format_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(v.to_bits(), back.to_bits(), "{s}");
        }
    }

    #[test]
    fn json_floats_round_trip() {
        let vals = vec![0.1f64, 2.0 / 3.0, -1.2345678901234567e-12];
        let text = to_json_string(&vals).unwrap();
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        for (a, b) in vals.iter().zip(&back) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
