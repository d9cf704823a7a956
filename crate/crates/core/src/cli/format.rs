//! Locale-independent number formatting and CSV assembly.

use std::fmt::Write;

/// Significant digits in every printed number.
pub const SIG_DIGITS: usize = 15;

/// `%.15g`: fixed notation for decimal exponents in `[-5, 15)`, scientific
/// otherwise, trailing zeros removed.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!(
            "{}e{sign}{:02}",
            trim_zeros(mantissa.to_string()),
            exp.abs()
        )
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".into()
    } else {
        t.to_string()
    }
}

/// CSV text with a fixed header; fields never contain commas or quotes.
#[derive(Debug)]
pub struct Csv {
    columns: usize,
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Self {
            columns: header.len(),
            buf,
        }
    }

    pub fn row<I, T>(&mut self, fields: I)
    where
        I: IntoIterator<Item = T>,
        T: Into<Field>,
    {
        let fields: Vec<String> = fields.into_iter().map(|f| f.into().0).collect();
        debug_assert_eq!(fields.len(), self.columns);
        let _ = writeln!(self.buf, "{}", fields.join(","));
    }

    pub fn into_string(self) -> String {
        self.buf
    }
}

/// One formatted CSV cell.
pub struct Field(pub String);

impl From<f64> for Field {
    fn from(x: f64) -> Self {
        Field(fmt_num(x))
    }
}

macro_rules! display_field {
    ($($t:ty),*) => {$(
        impl From<$t> for Field {
            fn from(x: $t) -> Self {
                Field(x.to_string())
            }
        }
    )*};
}
display_field!(i64, usize, u64, bool, &str, String);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifteen_significant_digits() {
        assert_eq!(fmt_num(1.2 * 1.2 - 0.32), "1.12");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333333");
        assert_eq!(fmt_num(2.0 / 3.0 * 1e-7), "6.66666666666667e-08");
        assert_eq!(fmt_num(123456789012345678.0), "1.23456789012346e+17");
        assert_eq!(fmt_num(1e-5), "0.00001");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        assert_eq!(fmt_num(-250.0), "-250");
    }

    #[test]
    fn csv_layout() {
        let mut c = Csv::new(&["i", "xi"]);
        c.row([Field::from(0usize), Field::from(1.0)]);
        assert_eq!(c.into_string(), "i,xi\n0,1\n");
    }
}
