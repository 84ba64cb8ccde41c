//! Text format: a header line `n k`, then the `k*n` 1-based variable indices
//! separated by whitespace (any number of lines). Lines starting with `#` are
//! comments.

use std::fmt::Write as _;

use super::{ReadKSequence, SequenceError};

fn parse_err(line: usize, message: impl Into<String>) -> SequenceError {
    SequenceError::Parse {
        line,
        message: message.into(),
    }
}

/// Parses the header and indices without checking multiplicities.
/// Returns `(n, k, 0-based elems)`.
pub fn parse_sequence_file_general(
    text: &str,
) -> Result<(usize, usize, Vec<usize>), SequenceError> {
    let mut header: Option<(usize, usize)> = None;
    let mut elems = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace().map(|t| {
            t.parse::<usize>()
                .map_err(|_| parse_err(line_no, format!("expected an integer, found {t:?}")))
        });
        match header {
            None => {
                let n = tokens
                    .next()
                    .ok_or_else(|| parse_err(line_no, "missing n"))??;
                let k = tokens
                    .next()
                    .ok_or_else(|| parse_err(line_no, "header must be `n k`"))??;
                if tokens.next().is_some() {
                    return Err(parse_err(line_no, "header must be `n k`"));
                }
                header = Some((n, k));
            }
            Some((n, _)) => {
                for t in tokens {
                    let v = t?;
                    if v == 0 || v > n {
                        return Err(parse_err(line_no, format!("variable {v} outside 1..={n}")));
                    }
                    elems.push(v - 1);
                }
            }
        }
    }
    let (n, k) = header.ok_or_else(|| parse_err(1, "empty sequence file"))?;
    Ok((n, k, elems))
}

pub fn parse_sequence_file(text: &str) -> Result<ReadKSequence, SequenceError> {
    let (n, k, elems) = parse_sequence_file_general(text)?;
    ReadKSequence::new(elems, n, k)
}

/// Formats a sequence over `0..n` in the file format.
pub fn format_sequence_file(s: &ReadKSequence) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", s.universe(), s.k());
    let body: Vec<String> = s.elems().iter().map(|v| (v + 1).to_string()).collect();
    let _ = writeln!(out, "{}", body.join(" "));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_comments() {
        let s = parse_sequence_file("# two-pass reversal\n3 2\n1 2 3\n3 2 1\n").unwrap();
        assert_eq!(s.one_based(), vec![1, 2, 3, 3, 2, 1]);
        assert_eq!(parse_sequence_file(&format_sequence_file(&s)).unwrap(), s);
    }

    #[test]
    fn reports_locations() {
        assert_eq!(
            parse_sequence_file("2 2\n1 x 1 2\n"),
            Err(SequenceError::Parse {
                line: 2,
                message: "expected an integer, found \"x\"".into()
            })
        );
        assert!(matches!(
            parse_sequence_file("# c\n2\n"),
            Err(SequenceError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_sequence_file("2 2\n1 2 2 2\n"),
            Err(SequenceError::WrongMultiplicity { .. })
        ));
        assert!(matches!(
            parse_sequence_file("2 1\n3 1\n"),
            Err(SequenceError::Parse { line: 2, .. })
        ));
    }
}
