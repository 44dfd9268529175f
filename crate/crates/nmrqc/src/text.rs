//! Shared pieces of the line-oriented text formats: tokens with positions,
//! positional parse errors and locale-independent number formatting.

use std::fmt;

/// A parse failure at a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self { line, column, message: message.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

/// A whitespace-separated word and its 1-based column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token<'a> {
    pub text: &'a str,
    pub column: usize,
}

/// A non-empty source line split into tokens, comments removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Line<'a> {
    pub number: usize,
    pub tokens: Vec<Token<'a>>,
}

impl<'a> Line<'a> {
    pub fn error(&self, token: usize, message: impl Into<String>) -> ParseError {
        let column = self.tokens.get(token).map_or_else(|| self.end_column(), |t| t.column);
        ParseError::new(self.number, column, message)
    }

    fn end_column(&self) -> usize {
        self.tokens.last().map_or(1, |t| t.column + t.text.chars().count())
    }

    /// Fails unless the line has exactly `n` tokens after the keyword.
    pub fn expect_args(&self, n: usize, usage: &str) -> Result<(), ParseError> {
        let got = self.tokens.len() - 1;
        if got == n {
            Ok(())
        } else if got < n {
            Err(self.error(self.tokens.len(), format!("expected {n} argument(s), got {got}; usage: {usage}")))
        } else {
            Err(self.error(n + 1, format!("expected {n} argument(s), got {got}; usage: {usage}")))
        }
    }

    pub fn number(&self, token: usize, what: &str) -> Result<f64, ParseError> {
        let text = self.tokens[token].text;
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.error(token, format!("malformed {what} {text:?}"))),
        }
    }
}

/// Splits text into non-empty lines of tokens; `#` starts a comment.
pub fn lines(text: &str) -> Vec<Line<'_>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut start: Option<usize> = None;
        let mut column = 0;
        let mut start_col = 0;
        for (byte, ch) in content.char_indices() {
            column += 1;
            if ch.is_whitespace() {
                if let Some(s) = start.take() {
                    tokens.push(Token { text: &content[s..byte], column: start_col });
                }
            } else if start.is_none() {
                start = Some(byte);
                start_col = column;
            }
        }
        if let Some(s) = start {
            tokens.push(Token { text: &content[s..], column: start_col });
        }
        if !tokens.is_empty() {
            out.push(Line { number: i + 1, tokens });
        }
    }
    out
}

/// Splits `key=value`; returns `None` if there is no `=`.
pub fn key_value<'a>(token: &Token<'a>) -> Option<(&'a str, &'a str)> {
    token.text.split_once('=')
}

/// Shortest decimal text that parses back to the same `f64`.
pub fn exact(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

/// `x` with six significant digits, trailing zeros removed, in fixed
/// notation for moderate magnitudes and scientific notation otherwise.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".to_string() } else { format!("{x}") };
    }
    let rounded: f64 = format!("{x:.5e}").parse().unwrap_or(x);
    if rounded == 0.0 {
        return "0".to_string();
    }
    let exp = rounded.abs().log10().floor() as i32;
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{rounded:.decimals$}"))
    } else {
        let s = format!("{rounded:.5e}");
        let (mantissa, e) = s.split_once('e').expect("scientific format");
        format!("{}e{}", trim_zeros(mantissa.to_string()), e)
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".to_string()
    } else {
        t.to_string()
    }
}

/// Edit distance, for "did you mean" suggestions.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.chars().enumerate() {
        let mut cur = vec![i + 1];
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur.push(sub.min(prev[j + 1] + 1).min(cur[j] + 1));
        }
        prev = cur;
    }
    prev[b.len()]
}

/// Closest candidate within edit distance 2, compared case-insensitively.
pub fn suggest<'a>(word: &str, candidates: &[&'a str]) -> Option<&'a str> {
    let w = word.to_ascii_uppercase();
    candidates
        .iter()
        .map(|c| (levenshtein(&w, &c.to_ascii_uppercase()), *c))
        .filter(|(d, _)| *d <= 2)
        .min_by_key(|(d, _)| *d)
        .map(|(_, c)| c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_carry_columns() {
        let l = lines("# header\n\n  SPIN  H5 1H 0 # trailing\n");
        assert_eq!(l.len(), 1);
        assert_eq!(l[0].number, 3);
        let cols: Vec<usize> = l[0].tokens.iter().map(|t| t.column).collect();
        assert_eq!(cols, vec![3, 9, 12, 15]);
    }

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(381.5), "381.5");
        assert_eq!(sig6(-3.6), "-3.6");
        assert_eq!(sig6(0.25), "0.25");
        assert_eq!(sig6(1.0 / 3.0), "0.333333");
        assert_eq!(sig6(123456789.0), "1.23457e8");
        assert_eq!(sig6(1.5e-9), "1.5e-9");
        assert_eq!(sig6(-1e-300 * 1e-300), "0");
        assert_eq!(sig6(999999.6), "1e6");
        assert_eq!(sig6(0.5), "0.5");
    }

    #[test]
    fn suggestions() {
        assert_eq!(suggest("CNT", &["CNOT", "H"]), Some("CNOT"));
        assert_eq!(suggest("hadamard", &["CNOT", "H"]), None);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
    }
}
