//! Deterministic text formatting of floats for data files.

use crate::scalar::Real;

/// Shortest decimal that round-trips to the same value; plain notation for
/// moderate magnitudes, exponent notation otherwise.
pub fn format_real<T: Real>(x: T) -> String {
    let m = x.abs();
    if x == T::zero() {
        "0".to_string()
    } else if !x.is_finite() || (m >= T::lit(1e-5) && m < T::lit(1e16)) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [0.1, -2.5, 1.0 / 3.0, 6.02214076e23, 1e-300, -7.5e-9, 123456.789] {
            let s = format_real(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
            let digits = s.chars().filter(|c| c.is_ascii_digit()).count();
            assert!(digits <= 17 + 3, "{s}");
        }
        assert_eq!(format_real(0.1f32), "0.1");
        assert_eq!(format_real(-0.0), "0");
        assert_eq!(format_real(1e-7), "1e-7");
    }
}
