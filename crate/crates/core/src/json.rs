//! JSON output with a fixed float format.
//!
//! File outputs are byte-reproducible: every finite float is written with 17
//! significant digits (`{:.16e}`), which round-trips `f64` exactly and does
//! not depend on shortest-representation heuristics.

use serde::Serialize;
use serde_json::ser::Formatter;
use std::io;

struct SigDigits17;

impl Formatter for SigDigits17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        debug_assert!(value.is_finite());
        write!(writer, "{:.16e}", value)
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{:.16e}", value)
    }
}

/// Serialize with 17-significant-digit floats, trailing newline included.
pub fn to_string_17<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigits17);
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_exactly() {
        let values = vec![
            0.0,
            1.0,
            -1.0 / std::f64::consts::PI.powi(2),
            0.1 + 0.2,
            f64::MIN_POSITIVE,
            1.2345678901234567e300,
        ];
        let s = to_string_17(&values).unwrap();
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(values, back);
    }

    #[test]
    fn format_is_stable() {
        let s = to_string_17(&vec![0.5]).unwrap();
        assert_eq!(s, "[5.0000000000000000e-1]\n");
    }
}
