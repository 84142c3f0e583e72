//! File formats, drawings and the command-line front end for
//! `overhang-core`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod document;
pub mod render;

/// A number with 10 significant digits.
pub fn sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let e = v.abs().log10().floor() as i32;
    if (-5..15).contains(&e) {
        format!("{:.*}", (9 - e).max(0) as usize, v)
    } else {
        format!("{v:.9e}")
    }
}

#[cfg(test)]
mod tests {
    use super::sig;

    #[test]
    fn ten_digits() {
        assert_eq!(sig(3.6979047793963344), "3.697904779");
        assert_eq!(sig(1151.7568778943998), "1151.756878");
        assert_eq!(sig(0.5), "0.5000000000");
        assert_eq!(sig(1e-9), "1.000000000e-9");
        assert_eq!(sig(0.0), "0");
    }
}
