//! Number formatting shared by the CSV writers.

/// Formats `x` with `digits` significant digits. Plain decimal notation is
/// used for magnitudes in `[1e-4, 1e10)`, scientific notation otherwise.
pub fn sig(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return format!("{:.*}", digits - 1, 0.0);
    }
    // Rounding to `digits` may bump the exponent (9.99.. -> 10.0), so take
    // the exponent from the rounded scientific form.
    let sci = format!("{:.*e}", digits - 1, x);
    let exp: i32 = sci
        .rsplit('e')
        .next()
        .and_then(|e| e.parse().ok())
        .expect("scientific format always carries an exponent");
    if (-4..10).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

/// Rounds half away from zero at `decimals` places.
pub fn round_half_up(x: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    let scaled = x * scale;
    // Guard against representation error just below the tie
    // (e.g. 0.125 stored as 0.12499999...).
    let nudged = scaled + scaled.signum() * 1e-9;
    (nudged.abs() + 0.5).floor().copysign(x) / scale
}

/// Fixed five-decimal rendering after half-up rounding, the layout of the
/// reproduced iteration tables.
pub fn fixed5(x: f64) -> String {
    let r = round_half_up(x, 5);
    let s = format!("{r:.5}");
    if s == "-0.00000" {
        "0.00000".to_string()
    } else {
        s
    }
}
