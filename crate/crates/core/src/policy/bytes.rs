//! Exact parsing and formatting of human-readable byte sizes.

/// Parse sizes such as `"5.19 MB"`, `"64MB"`, `"12.0 KB"`, `"1 MiB"` or
/// `"4096"` into bytes. `KB`/`MB`/`GB` are decimal, `KiB`/`MiB`/`GiB`
/// binary. The decimal mantissa is handled exactly; sizes that do not land
/// on a whole byte are rejected.
pub fn parse_bytes(s: &str) -> Result<u64, String> {
    let t = s.trim();
    let split = t
        .find(|c: char| !(c.is_ascii_digit() || c == '.'))
        .unwrap_or(t.len());
    let (num, unit) = (&t[..split], t[split..].trim());
    let mult: u128 = match unit.to_ascii_lowercase().as_str() {
        "" | "b" => 1,
        "kb" | "k" => 1_000,
        "mb" | "m" => 1_000_000,
        "gb" | "g" => 1_000_000_000,
        "kib" => 1 << 10,
        "mib" => 1 << 20,
        "gib" => 1 << 30,
        _ => return Err(format!("unknown size unit in {s:?}")),
    };
    let (int, frac) = num.split_once('.').unwrap_or((num, ""));
    if int.is_empty() && frac.is_empty() || frac.contains('.') || frac.len() > 18 {
        return Err(format!("bad size {s:?}"));
    }
    let digits = format!("{int}{frac}");
    let mantissa: u128 = digits.parse().map_err(|_| format!("bad size {s:?}"))?;
    let scale = 10u128.pow(frac.len() as u32);
    let scaled = mantissa * mult;
    if scaled % scale != 0 {
        return Err(format!("{s:?} is not a whole number of bytes"));
    }
    u64::try_from(scaled / scale).map_err(|_| format!("size {s:?} overflows"))
}

/// Decimal rendering with the largest unit that keeps the value ≥ 1 and
/// no trailing zeros, e.g. `5190000` → `"5.19 MB"`.
pub fn format_bytes(b: u64) -> String {
    let (unit, div) = match b {
        0..=999 => return format!("{b} B"),
        1_000..=999_999 => ("KB", 1_000),
        1_000_000..=999_999_999 => ("MB", 1_000_000),
        _ => ("GB", 1_000_000_000),
    };
    let frac = b % div;
    if frac == 0 {
        return format!("{} {unit}", b / div);
    }
    let width = div.ilog10() as usize;
    let f = format!("{frac:0width$}");
    format!("{}.{} {unit}", b / div, f.trim_end_matches('0'))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_sizes_are_exact() {
        assert_eq!(parse_bytes("5.19 MB"), Ok(5_190_000));
        assert_eq!(parse_bytes("0.768 MB"), Ok(768_000));
        assert_eq!(parse_bytes("12.0 KB"), Ok(12_000));
        assert_eq!(parse_bytes("21.2 MB"), Ok(21_200_000));
        assert_eq!(parse_bytes("64MB"), Ok(64_000_000));
        assert_eq!(parse_bytes("1 MiB"), Ok(1_048_576));
        assert_eq!(parse_bytes("4096"), Ok(4096));
        assert_eq!(parse_bytes(".5 KB"), Ok(500));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "MB", "1.2.3 MB", "5 parsecs", "0.5 B", "-3 KB"] {
            assert!(parse_bytes(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn formatting() {
        assert_eq!(format_bytes(0), "0 B");
        assert_eq!(format_bytes(5_190_000), "5.19 MB");
        assert_eq!(format_bytes(12_000), "12 KB");
        assert_eq!(format_bytes(34_402_000), "34.402 MB");
        assert_eq!(format_bytes(1_200_000_000), "1.2 GB");
        for b in [1u64, 999, 1001, 768_000, 123_456_789, 9_876_543_210] {
            assert_eq!(parse_bytes(&format_bytes(b)), Ok(b));
        }
    }
}
