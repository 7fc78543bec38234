//! Tokenizer shared by the model and LTL parsers.

use std::fmt;

use serde::Serialize;

/// 1-based line and column plus byte offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
    #[serde(skip)]
    pub offset: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    /// Body of a `--@` comment.
    Annotation(String),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(i) => write!(f, "`{i}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Annotation(_) => f.write_str("annotation"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
    /// Byte offset just past the token.
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{pos}: {message}")]
pub struct LexError {
    pub pos: Pos,
    pub message: String,
}

// Longest symbols first so that prefixes do not shadow them.
const SYMBOLS: [&str; 27] = [
    "<->", "->", ":=", "..", "!=", "<=", ">=", "(", ")", "{", "}", "[", "]", ";", ":", ",", ".",
    "!", "&", "|", "=", "<", ">", "+", "-", "*", "/",
];

pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut line_start = 0;
    let pos_at = |i: usize, line: usize, line_start: usize| Pos {
        line,
        col: i - line_start + 1,
        offset: i,
    };
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            i += 1;
            line += 1;
            line_start = i;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if src[i..].starts_with("/--") {
            let start = pos_at(i, line, line_start);
            let Some(close) = src[i + 3..].find("--/") else {
                return Err(LexError {
                    pos: start,
                    message: "unterminated block comment".into(),
                });
            };
            let end = i + 3 + close + 3;
            for (k, b) in bytes[i..end].iter().enumerate() {
                if *b == b'\n' {
                    line += 1;
                    line_start = i + k + 1;
                }
            }
            i = end;
            continue;
        }
        if src[i..].starts_with("--") {
            let end = src[i..].find('\n').map(|k| i + k).unwrap_or(src.len());
            if src[i..].starts_with("--@") {
                out.push(Token {
                    tok: Tok::Annotation(src[i + 3..end].trim().to_string()),
                    pos: pos_at(i, line, line_start),
                    end,
                });
            }
            i = end;
            continue;
        }
        let pos = pos_at(i, line, line_start);
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len()
                && (bytes[i].is_ascii_alphanumeric() || matches!(bytes[i], b'_' | b'$' | b'#'))
            {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(src[start..i].to_string()),
                pos,
                end: i,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && (bytes[i].is_ascii_alphabetic() || bytes[i] == b'_') {
                return Err(LexError {
                    pos,
                    message: format!("unsupported numeric literal starting `{}`", &src[start..=i]),
                });
            }
            let n = src[start..i].parse::<i64>().map_err(|_| LexError {
                pos,
                message: format!("integer literal `{}` out of range", &src[start..i]),
            })?;
            out.push(Token {
                tok: Tok::Int(n),
                pos,
                end: i,
            });
            continue;
        }
        match SYMBOLS.iter().find(|s| src[i..].starts_with(**s)) {
            Some(s) => {
                out.push(Token {
                    tok: Tok::Sym(s),
                    pos,
                    end: i + s.len(),
                });
                i += s.len();
            }
            None => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(LexError {
                    pos,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: pos_at(bytes.len(), line, line_start),
        end: bytes.len(),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn symbols_prefer_longest_match() {
        assert_eq!(
            toks("a<->b->c<=0..3"),
            vec![
                Tok::Ident("a".into()),
                Tok::Sym("<->"),
                Tok::Ident("b".into()),
                Tok::Sym("->"),
                Tok::Ident("c".into()),
                Tok::Sym("<="),
                Tok::Int(0),
                Tok::Sym(".."),
                Tok::Int(3),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_and_annotations() {
        let t = toks("x -- plain\n--@ S : boolean\n/-- block\ncomment --/ y");
        assert_eq!(
            t,
            vec![
                Tok::Ident("x".into()),
                Tok::Annotation("S : boolean".into()),
                Tok::Ident("y".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn positions_track_lines() {
        let t = tokenize("a\n  b").unwrap();
        assert_eq!((t[1].pos.line, t[1].pos.col), (2, 3));
    }

    #[test]
    fn stray_character_rejected() {
        assert!(tokenize("a @ b").is_err());
    }
}
