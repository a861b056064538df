//! Number rendering shared by the text outputs.

/// `x` with 12 significant digits, trailing zeros removed.
pub fn sig(x: f64) -> String {
    sig_n(x, 12)
}

pub fn sig_n(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    // round first so that e.g. 9.9999999999996 moves to the next decade
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim(mantissa.to_string()))
    }
}

fn trim(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_like_general_format() {
        assert_eq!(sig(2.0), "2");
        assert_eq!(sig(7.5_f64.sqrt()), "2.73861278753");
        assert_eq!(sig(-0.125), "-0.125");
        assert_eq!(sig(1.0e-7), "1e-7");
        assert_eq!(sig(123456789012345.0), "1.23456789012e14");
        assert_eq!(sig(0.0), "0");
    }
}
