//! Hexadecimal floating-point literals (`0x1.91eb851eb851fp+1`), used by the
//! record format so that every binary64 value round-trips exactly.

const MANTISSA_BITS: u32 = 52;
const MANTISSA_MASK: u64 = (1 << MANTISSA_BITS) - 1;
const EXP_BIAS: i32 = 1023;

/// Formats `v` as a C99-style hex float. Infinities and NaN are written as
/// `inf`, `-inf` and `nan`.
pub fn format(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let bits = v.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let biased = ((bits >> MANTISSA_BITS) & 0x7ff) as i32;
    let mantissa = bits & MANTISSA_MASK;
    if biased == 0 && mantissa == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if biased == 0 {
        (0, 1 - EXP_BIAS)
    } else {
        (1, biased - EXP_BIAS)
    };
    let mut digits = format!("{mantissa:013x}");
    while digits.ends_with('0') {
        digits.pop();
    }
    let esign = if exp < 0 { '-' } else { '+' };
    if digits.is_empty() {
        format!("{sign}0x{lead}p{esign}{}", exp.abs())
    } else {
        format!("{sign}0x{lead}.{digits}p{esign}{}", exp.abs())
    }
}

/// Parses a hex float produced by [`format`] (or any normalized/subnormal
/// literal with at most 13 fraction digits).
pub fn parse(s: &str) -> Option<f64> {
    match s {
        "nan" => return Some(f64::NAN),
        "inf" | "+inf" => return Some(f64::INFINITY),
        "-inf" => return Some(f64::NEG_INFINITY),
        _ => {}
    }
    let (negative, rest) = match s.as_bytes().first()? {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let rest = rest.strip_prefix("0x").or_else(|| rest.strip_prefix("0X"))?;
    let (mant, exp) = rest.split_once(['p', 'P'])?;
    let exp: i32 = exp.parse().ok()?;
    let (lead, frac) = match mant.split_once('.') {
        Some((l, f)) => (l, f),
        None => (mant, ""),
    };
    if frac.len() > 13 || frac.is_empty() && mant.contains('.') {
        return None;
    }
    let lead = match lead {
        "0" => 0u64,
        "1" => 1u64,
        _ => return None,
    };
    let frac_bits = if frac.is_empty() {
        0
    } else {
        u64::from_str_radix(frac, 16).ok()? << (4 * (13 - frac.len()))
    };
    let sign_bit = if negative { 1u64 << 63 } else { 0 };
    let bits = match lead {
        0 => {
            if frac_bits == 0 {
                return Some(f64::from_bits(sign_bit));
            }
            if exp != 1 - EXP_BIAS {
                return None;
            }
            sign_bit | frac_bits
        }
        _ => {
            let biased = exp + EXP_BIAS;
            if !(1..=2046).contains(&biased) {
                return None;
            }
            sign_bit | ((biased as u64) << MANTISSA_BITS) | frac_bits
        }
    };
    Some(f64::from_bits(bits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_literals() {
        assert_eq!(format(3.14), "0x1.91eb851eb851fp+1");
        assert_eq!(format(1.0), "0x1p+0");
        assert_eq!(format(-0.5), "-0x1p-1");
        assert_eq!(format(0.0), "0x0p+0");
        assert_eq!(format(-0.0), "-0x0p+0");
        assert_eq!(format(f64::MIN_POSITIVE / 2.0), "0x0.8p-1022");
        assert_eq!(parse("0x1.91eb851eb851fp+1"), Some(3.14));
    }

    #[test]
    fn rejects_garbage() {
        assert_eq!(parse("1.5"), None);
        assert_eq!(parse("0x2p+0"), None);
        assert_eq!(parse("0x1.p+0"), None);
        assert_eq!(parse("0x1.0000000000000Fp+0"), None);
        assert_eq!(parse("0x1p+5000"), None);
    }

    proptest! {
        #[test]
        fn every_bit_pattern_round_trips(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            let back = parse(&format(v)).unwrap();
            if v.is_nan() {
                prop_assert!(back.is_nan());
            } else {
                prop_assert_eq!(back.to_bits(), bits);
            }
        }
    }
}
