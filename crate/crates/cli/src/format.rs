//! Fixed-width scientific notation for golden-stable output.

/// `x` with a mantissa in `[0.1, 1)` of `digits` significant digits and a
/// signed exponent of at least two digits, e.g. `-0.220024E+00`.
pub fn table(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x == 0.0 {
        return format!("0.{}E+00", "0".repeat(digits));
    }
    let (mantissa, exponent) = split(x, digits);
    let sign = if x < 0.0 { "-" } else { "" };
    format!("{sign}0.{}E{}", mantissa.replace('.', ""), exponent_text(exponent + 1))
}

/// `x` as `d.ddddE±xx` with `digits` significant digits.
pub fn plain(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x == 0.0 {
        let frac = if digits > 1 {
            format!(".{}", "0".repeat(digits - 1))
        } else {
            String::new()
        };
        return format!("0{frac}E+00");
    }
    let (mantissa, exponent) = split(x, digits);
    let sign = if x < 0.0 { "-" } else { "" };
    format!("{sign}{mantissa}E{}", exponent_text(exponent))
}

/// Rounded `|x|` as Rust's `d.ddd` mantissa and its decimal exponent.
fn split(x: f64, digits: usize) -> (String, i32) {
    let text = format!("{:.*e}", digits - 1, x.abs());
    let (mantissa, exponent) = text.split_once('e').expect("exponent form");
    (mantissa.to_string(), exponent.parse().expect("integer exponent"))
}

fn exponent_text(e: i32) -> String {
    let sign = if e < 0 { '-' } else { '+' };
    format!("{sign}{:02}", e.abs())
}
