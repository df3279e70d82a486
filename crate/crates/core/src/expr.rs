//! Parser for signed sums of named terms such as `-X2 + X3 - w1`.

use crate::error::{Error, Result};

/// Splits `expr` into `(sign, name)` pairs. Only `+`/`-` separators and
/// unit coefficients are accepted.
pub(crate) fn parse_signed_sum(expr: &str) -> Result<Vec<(i64, String)>> {
    let mut terms = Vec::new();
    let mut sign = 1i64;
    let mut pending_sign = true;
    let mut name = String::new();
    let flush = |name: &mut String, sign: i64, terms: &mut Vec<(i64, String)>| -> Result<()> {
        if name.is_empty() {
            return Err(Error::InvalidArgument(format!("missing term in `{expr}`")));
        }
        terms.push((sign, std::mem::take(name)));
        Ok(())
    };
    for ch in expr.chars() {
        match ch {
            '+' | '-' => {
                if !name.is_empty() {
                    flush(&mut name, sign, &mut terms)?;
                    sign = 1;
                    pending_sign = true;
                } else if !pending_sign {
                    return Err(Error::InvalidArgument(format!("dangling operator in `{expr}`")));
                }
                if ch == '-' {
                    sign = -sign;
                }
            }
            c if c.is_whitespace() => {}
            c if c.is_ascii_alphanumeric() || c == '_' => name.push(c),
            c => return Err(Error::InvalidArgument(format!("unexpected `{c}` in `{expr}`"))),
        }
    }
    flush(&mut name, sign, &mut terms)?;
    Ok(terms)
}

/// `X13` → `Some(12)` when the prefix matches.
pub(crate) fn indexed(name: &str, prefix: &str) -> Option<usize> {
    let rest = name.strip_prefix(prefix)?;
    let v: usize = rest.parse().ok()?;
    (v >= 1).then(|| v - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_signs() {
        let t = parse_signed_sum("-X2 + X3 - X4+X8").unwrap();
        let want: Vec<(i64, String)> =
            vec![(-1, "X2".into()), (1, "X3".into()), (-1, "X4".into()), (1, "X8".into())];
        assert_eq!(t, want);
        assert_eq!(parse_signed_sum("w3").unwrap(), vec![(1, "w3".to_string())]);
        assert_eq!(parse_signed_sum("--a").unwrap(), vec![(1, "a".to_string())]);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_signed_sum("").is_err());
        assert!(parse_signed_sum("a +").is_err());
        assert!(parse_signed_sum("2*a").is_err());
    }

    #[test]
    fn index_names() {
        assert_eq!(indexed("X13", "X"), Some(12));
        assert_eq!(indexed("m0", "m"), None);
        assert_eq!(indexed("w1", "X"), None);
    }
}
