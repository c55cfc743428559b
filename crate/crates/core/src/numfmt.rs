//! Exact decimal parsing and rounding for the rationals that show up in
//! reports (b percentages, conversion factors, improvement ratios).

use num_rational::Ratio;

pub type Rational = Ratio<u64>;

/// Parses `"3"`, `"1.5"`, `"0.99"` or `"3/2"` into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: u64 = n.trim().parse().ok()?;
        let d: u64 = d.trim().parse().ok()?;
        return (d != 0).then(|| Rational::new(n, d));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || frac.len() > 18 {
        return None;
    }
    let int: u64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let scale = 10u64.pow(frac.len() as u32);
    let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    Some(Rational::new(int.checked_mul(scale)?.checked_add(frac)?, scale))
}

/// Formats with exactly `places` decimals, rounding half away from zero.
pub fn fmt_decimal(r: Rational, places: u32) -> String {
    fmt_fraction(*r.numer() as u128, *r.denom() as u128, places)
}

pub fn fmt_fraction(numer: u128, denom: u128, places: u32) -> String {
    assert!(denom != 0);
    let scale = 10u128.pow(places);
    let scaled = (numer * scale * 2 + denom) / (denom * 2);
    let int = scaled / scale;
    if places == 0 {
        return int.to_string();
    }
    let frac = scaled % scale;
    format!("{int}.{frac:0width$}", width = places as usize)
}

/// Serializes a rational as its shortest exact form, `"3"` or `"3/2"`.
pub fn serialize_rational<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(r)
}
