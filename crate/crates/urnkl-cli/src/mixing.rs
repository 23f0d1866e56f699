//! Parser for mixing-measure model files.
//!
//! Format: a header line `n c`, then one line per atom holding the `c`
//! colour counts followed by the atom's weight. Blank lines and lines
//! starting with `#` are skipped. Weights must sum to 1 within 1e-9 (they
//! are then renormalized exactly); anything further off is rejected as a
//! malformed model rather than silently rescaled.
//!
//! ```text
//! # two slightly uneven urns on n = 10
//! 10 2
//! 5 5  0.6
//! 4 6  0.4
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use urnkl::definetti::MixingMeasure;

#[derive(Debug)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "model file: {}", self.message)
        } else {
            write!(f, "model file line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ParseError {}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

pub fn parse_model(text: &str) -> Result<MixingMeasure, ParseError> {
    let mut header: Option<(u64, usize)> = None;
    let mut weights: BTreeMap<Vec<u64>, f64> = BTreeMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match header {
            None => {
                if tokens.len() != 2 {
                    return Err(err(line_no, "header must be exactly `n c`"));
                }
                let n: u64 = tokens[0]
                    .parse()
                    .map_err(|_| err(line_no, format!("bad population size {:?}", tokens[0])))?;
                let c: usize = tokens[1]
                    .parse()
                    .map_err(|_| err(line_no, format!("bad colour count {:?}", tokens[1])))?;
                header = Some((n, c));
            }
            Some((_, c)) => {
                if tokens.len() != c + 1 {
                    return Err(err(
                        line_no,
                        format!(
                            "expected {c} counts and a weight, got {} tokens",
                            tokens.len()
                        ),
                    ));
                }
                let mut atom = Vec::with_capacity(c);
                for t in &tokens[..c] {
                    atom.push(
                        t.parse::<u64>()
                            .map_err(|_| err(line_no, format!("bad colour count {t:?}")))?,
                    );
                }
                let w: f64 = tokens[c]
                    .parse()
                    .map_err(|_| err(line_no, format!("bad weight {:?}", tokens[c])))?;
                if !w.is_finite() || w < 0.0 {
                    return Err(err(
                        line_no,
                        format!("weight must be finite and ≥ 0, got {w}"),
                    ));
                }
                // Repeated atoms accumulate rather than overwrite.
                *weights.entry(atom).or_insert(0.0) += w;
            }
        }
    }

    let (n, c) = header.ok_or_else(|| err(0, "empty model file"))?;
    MixingMeasure::renormalized(n, c, weights).map_err(|e| err(0, e.to_string()))
}

pub fn load_model(path: &Path) -> Result<MixingMeasure, Box<dyn std::error::Error>> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read model file {}: {e}", path.display()))?;
    Ok(parse_model(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_blanks_and_duplicate_atoms() {
        let mu = parse_model("# a comment\n\n6 2\n3 3 0.25\n2 4 0.5\n3 3 0.25\n").unwrap();
        assert_eq!(mu.n, 6);
        assert_eq!(mu.weights().len(), 2);
        assert!((mu.weights()[&vec![3, 3]] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn renormalizes_tiny_drift_but_rejects_real_mass_errors() {
        let nearly = parse_model("4 2\n2 2 0.5000000001\n1 3 0.5\n").unwrap();
        let total: f64 = nearly.weights().values().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(parse_model("4 2\n2 2 0.6\n1 3 0.3\n").is_err());
    }

    #[test]
    fn reports_the_offending_line() {
        let e = parse_model("6 2\n3 3 0.5\n3 x 0.5\n").unwrap_err();
        assert_eq!(e.line, 3);
        let e = parse_model("6 2\n3 3\n").unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn atom_totals_must_match_the_header() {
        assert!(parse_model("6 2\n3 4 1.0\n").is_err());
        assert!(parse_model("").is_err());
    }
}
