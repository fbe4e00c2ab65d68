//! The exact matrix file format.
//!
//! Documents are line-oriented text: `#` starts a comment, tokens are
//! whitespace-separated. The first line is a header, either
//! `blockmatrix m1 n1 m2 n2` or `density d1 d2 ... dn`, followed by the
//! row-major entries of the flat matrix, exactly `rows * cols` scalar
//! tokens.
//!
//! A scalar token is `RAT`, `RAT SIGN RAT i`, or `RAT i`, where
//! `RAT := '-'? INT ('/' POSINT)?`. Examples: `3`, `-1/2`, `2+1/3i`, `3i`;
//! `-i` is written `0-1i`. Every token reduces to lowest terms on parse, and
//! serialization emits the same canonical spelling the scalar type displays,
//! so parse and serialize are mutually inverse.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::Zero;
use rankcanon::{DensityMatrix, ExactBlockMatrix, ExactMatrix, GaussianRational, Matrix};
use std::fmt;

/// A parsed document: a block matrix with grid and block dimensions, or a
/// density matrix with subsystem dimensions.
#[derive(Clone, Debug, PartialEq)]
pub enum Document {
    Block {
        m1: usize,
        n1: usize,
        m2: usize,
        n2: usize,
        flat: ExactMatrix,
    },
    Density {
        dims: Vec<usize>,
        matrix: ExactMatrix,
    },
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Block { .. } => "blockmatrix",
            Document::Density { .. } => "density",
        }
    }

    pub fn from_block_matrix(b: &ExactBlockMatrix) -> Self {
        Document::Block {
            m1: b.grid_rows(),
            n1: b.grid_cols(),
            m2: b.block_rows(),
            n2: b.block_cols(),
            flat: b.flatten(),
        }
    }

    pub fn from_density(rho: &DensityMatrix) -> Self {
        Document::Density {
            dims: rho.dims().to_vec(),
            matrix: rho.matrix().clone(),
        }
    }

    pub fn into_block_matrix(self) -> anyhow::Result<ExactBlockMatrix> {
        match self {
            Document::Block {
                m1,
                n1,
                m2,
                n2,
                flat,
            } => Ok(ExactBlockMatrix::unflatten(&flat, m1, n1, m2, n2)?),
            Document::Density { .. } => {
                anyhow::bail!("expected a blockmatrix document, found density")
            }
        }
    }

    pub fn into_density(self) -> anyhow::Result<DensityMatrix> {
        match self {
            Document::Density { dims, matrix } => Ok(DensityMatrix::new(dims, matrix)?),
            Document::Block { .. } => {
                anyhow::bail!("expected a density document, found blockmatrix")
            }
        }
    }
}

/// Parse failure with a 1-based source position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

struct Token<'a> {
    text: &'a str,
    line: usize,
    col: usize,
}

fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let visible = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let mut col = 0usize;
        let mut start = None;
        for (idx, ch) in visible.char_indices().chain([(visible.len(), ' ')]) {
            if ch.is_whitespace() {
                if let Some(s) = start.take() {
                    out.push(Token {
                        text: &visible[s..idx],
                        line: lineno + 1,
                        col: col + 1,
                    });
                }
            } else if start.is_none() {
                start = Some(idx);
                col = idx;
            }
        }
    }
    out
}

fn parse_rational(s: &str) -> Result<BigRational, String> {
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let digits = num_str.strip_prefix('-').unwrap_or(num_str);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("malformed integer `{num_str}`"));
    }
    let numer: BigInt = num_str.parse().map_err(|_| "integer out of form".to_string())?;
    let denom = match den_str {
        None => BigInt::from(1),
        Some(d) => {
            if d.is_empty() || !d.bytes().all(|b| b.is_ascii_digit()) {
                return Err(format!("malformed denominator `{d}`"));
            }
            let v: BigInt = d.parse().map_err(|_| "denominator out of form".to_string())?;
            if v.is_zero() {
                return Err("zero denominator".to_string());
            }
            v
        }
    };
    Ok(BigRational::new(numer, denom))
}

/// Parses one scalar token into an exact complex rational.
pub fn parse_scalar(token: &str) -> Result<GaussianRational, String> {
    let (body, imaginary) = match token.strip_suffix('i') {
        Some(b) => (b, true),
        None => (token, false),
    };
    if body.is_empty() {
        return Err(format!("malformed scalar `{token}`"));
    }
    // the first sign past position 0 separates real from imaginary part
    let sep = body[1..].find(['+', '-']).map(|p| p + 1);
    match sep {
        Some(pos) => {
            if !imaginary {
                return Err(format!(
                    "`{token}` has two components but no trailing `i`"
                ));
            }
            let re = parse_rational(&body[..pos])?;
            let mag = parse_rational(&body[pos + 1..])?;
            let im = if body.as_bytes()[pos] == b'-' { -mag } else { mag };
            Ok(GaussianRational::new(re, im))
        }
        None => {
            let value = parse_rational(body)?;
            if imaginary {
                Ok(GaussianRational::new(BigRational::zero(), value))
            } else {
                Ok(GaussianRational::new(value, BigRational::zero()))
            }
        }
    }
}

fn parse_dimension(tok: &Token) -> Result<usize, ParseError> {
    let err = |msg: String| ParseError {
        line: tok.line,
        col: tok.col,
        message: msg,
    };
    let value: usize = tok
        .text
        .parse()
        .map_err(|_| err(format!("expected a dimension, found `{}`", tok.text)))?;
    if value == 0 {
        return Err(err("dimensions must be positive".to_string()));
    }
    Ok(value)
}

/// Parses a document from text.
pub fn parse(text: &str) -> Result<Document, ParseError> {
    let tokens = tokenize(text);
    let mut it = tokens.iter();
    let head = it.next().ok_or(ParseError {
        line: 1,
        col: 1,
        message: "empty document".to_string(),
    })?;

    // header fields share the header keyword's line
    let header: Vec<&Token> = tokens
        .iter()
        .skip(1)
        .take_while(|t| t.line == head.line)
        .collect();
    let payload: Vec<&Token> = tokens.iter().skip(1 + header.len()).collect();
    for _ in 0..header.len() {
        it.next();
    }

    let (rows, cols, build): (usize, usize, Box<dyn FnOnce(ExactMatrix) -> Document>) = match head
        .text
    {
        "blockmatrix" => {
            if header.len() != 4 {
                return Err(ParseError {
                    line: head.line,
                    col: head.col,
                    message: format!(
                        "blockmatrix header needs 4 dimensions, found {}",
                        header.len()
                    ),
                });
            }
            let d: Vec<usize> = header
                .iter()
                .map(|t| parse_dimension(t))
                .collect::<Result<_, _>>()?;
            let (m1, n1, m2, n2) = (d[0], d[1], d[2], d[3]);
            (
                m1 * m2,
                n1 * n2,
                Box::new(move |flat| Document::Block {
                    m1,
                    n1,
                    m2,
                    n2,
                    flat,
                }),
            )
        }
        "density" => {
            if header.is_empty() {
                return Err(ParseError {
                    line: head.line,
                    col: head.col,
                    message: "density header needs at least one dimension".to_string(),
                });
            }
            let dims: Vec<usize> = header
                .iter()
                .map(|t| parse_dimension(t))
                .collect::<Result<_, _>>()?;
            let total: usize = dims.iter().product();
            (
                total,
                total,
                Box::new(move |matrix| Document::Density { dims, matrix }),
            )
        }
        other => {
            return Err(ParseError {
                line: head.line,
                col: head.col,
                message: format!("unknown header `{other}`"),
            })
        }
    };

    let expected = rows * cols;
    if payload.len() < expected {
        let last = payload.last().copied().unwrap_or(head);
        return Err(ParseError {
            line: last.line,
            col: last.col,
            message: format!("expected {expected} entries, found {}", payload.len()),
        });
    }
    if payload.len() > expected {
        let extra = payload[expected];
        return Err(ParseError {
            line: extra.line,
            col: extra.col,
            message: format!("expected {expected} entries, found {}", payload.len()),
        });
    }
    let mut entries = Vec::with_capacity(expected);
    for tok in payload {
        let value = parse_scalar(tok.text).map_err(|message| ParseError {
            line: tok.line,
            col: tok.col,
            message,
        })?;
        entries.push(value);
    }
    let flat = Matrix::from_vec(rows, cols, entries).expect("counted above");
    Ok(build(flat))
}

fn write_matrix(out: &mut String, m: &ExactMatrix) {
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| m[(i, j)].to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
}

/// Canonical text form of a document; `parse(serialize(doc)) == doc` and
/// serialization of a parsed file reproduces it byte for byte whenever the
/// file was produced by this serializer.
pub fn serialize(doc: &Document) -> String {
    let mut out = String::new();
    match doc {
        Document::Block {
            m1,
            n1,
            m2,
            n2,
            flat,
        } => {
            out.push_str(&format!("blockmatrix {m1} {n1} {m2} {n2}\n"));
            write_matrix(&mut out, flat);
        }
        Document::Density { dims, matrix } => {
            let d: Vec<String> = dims.iter().map(usize::to_string).collect();
            out.push_str(&format!("density {}\n", d.join(" ")));
            write_matrix(&mut out, matrix);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::One;

    fn g(re: i64, im: i64) -> GaussianRational {
        GaussianRational::from_integers(re, im)
    }

    #[test]
    fn parses_identity_block() {
        let doc = parse("blockmatrix 1 1 2 2\n1 0\n0 1\n").unwrap();
        match &doc {
            Document::Block { m1: 1, n1: 1, m2: 2, n2: 2, flat } => {
                assert_eq!(flat, &Matrix::identity(2));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parses_density_with_fractions_and_comments() {
        let text = "# maximally mixed\ndensity 2 2\n1/4 0 0 0\n0 1/4 0 0\n0 0 1/4 0\n0 0 0 1/4\n";
        let doc = parse(text).unwrap();
        match &doc {
            Document::Density { dims, matrix } => {
                assert_eq!(dims, &vec![2, 2]);
                assert_eq!(
                    matrix[(0, 0)],
                    GaussianRational::from_ratio(1, 4)
                );
                assert_eq!(matrix.rows(), 4);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn scalar_token_forms() {
        assert_eq!(parse_scalar("3").unwrap(), g(3, 0));
        assert_eq!(parse_scalar("-1/2").unwrap(), GaussianRational::from_ratio(-1, 2));
        assert_eq!(
            parse_scalar("2+1/3i").unwrap(),
            GaussianRational::new(
                BigRational::from_integer(BigInt::from(2)),
                BigRational::new(BigInt::one(), BigInt::from(3)),
            )
        );
        assert_eq!(parse_scalar("0-1i").unwrap(), g(0, -1));
        assert_eq!(parse_scalar("3i").unwrap(), g(0, 3));
        assert_eq!(parse_scalar("2-5i").unwrap(), g(2, -5));
        // reduction to lowest terms happens on parse
        assert_eq!(parse_scalar("2/4").unwrap(), GaussianRational::from_ratio(1, 2));

        assert!(parse_scalar("i").is_err());
        assert!(parse_scalar("1+2").is_err());
        assert!(parse_scalar("1/0").is_err());
        assert!(parse_scalar("1//2").is_err());
        assert!(parse_scalar("x").is_err());
        assert!(parse_scalar("1.5").is_err());
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse("blockmatrix 1 1 2 2\n1 0\n0 q\n").unwrap_err();
        assert_eq!((err.line, err.col), (3, 3));

        let err = parse("spectral 2 2\n").unwrap_err();
        assert!(err.message.contains("unknown header"));

        let err = parse("blockmatrix 1 1 2 2\n1 0 0\n").unwrap_err();
        assert!(err.message.contains("expected 4 entries"));

        let err = parse("density 2\n1 0 0 1 7\n").unwrap_err();
        assert_eq!((err.line, err.col), (2, 9));

        let err = parse("blockmatrix 1 1 0 2\n").unwrap_err();
        assert!(err.message.contains("positive"));
    }

    #[test]
    fn serialize_then_parse_is_identity() {
        let doc = Document::Block {
            m1: 2,
            n1: 1,
            m2: 1,
            n2: 2,
            flat: Matrix::from_vec(
                2,
                2,
                vec![g(1, 2), GaussianRational::from_ratio(-1, 3), g(0, -1), g(0, 0)],
            )
            .unwrap(),
        };
        let text = serialize(&doc);
        let reparsed = parse(&text).unwrap();
        assert_eq!(reparsed, doc);
        assert_eq!(serialize(&reparsed), text);
    }
}
