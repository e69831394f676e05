//! Number formatting shared by the CSV writers.

/// `v` rounded to 6 significant digits, without trailing zeros.
pub fn sig6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 {
            "0".to_string()
        } else {
            v.to_string()
        };
    }
    let exponent = v.abs().log10().floor() as i32;
    if !(-5..=15).contains(&exponent) {
        return format!("{v:.5e}");
    }
    let decimals = (5 - exponent).max(0) as usize;
    let s = format!("{v:.decimals$}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".to_string()
    } else {
        s
    }
}
