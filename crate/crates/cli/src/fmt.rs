//! Number formatting for human-readable output.

/// Formats `v` with six significant digits, dropping trailing zeros.
pub fn sig6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        // Rounding can carry into a new digit (999999.5 -> 1000000).
        if s.trim_start_matches('-').split('.').next().map_or(0, str::len) > 6 {
            return trim_exp(format!("{v:.5e}"));
        }
        trim_fraction(s)
    } else {
        trim_exp(format!("{v:.5e}"))
    }
}

fn trim_fraction(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn trim_exp(s: String) -> String {
    match s.split_once('e') {
        Some((mantissa, exp)) => format!("{}e{exp}", trim_fraction(mantissa.to_string())),
        None => s,
    }
}
