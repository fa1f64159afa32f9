// SPDX-License-Identifier: Apache-2.0

//! Tokenizer shared by the template and query text syntaxes.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    LBracket,
    RBracket,
    Comma,
    Dot,
    Star,
    /// `?name`, stored without the question mark.
    Var(String),
    /// `'text'` or `"text"`, with `\\` escapes resolved.
    Quoted(String),
    /// A bare word: keyword, name, or UUID.
    Word(String),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::LBracket => f.write_str("'['"),
            Token::RBracket => f.write_str("']'"),
            Token::Comma => f.write_str("','"),
            Token::Dot => f.write_str("'.'"),
            Token::Star => f.write_str("'*'"),
            Token::Var(v) => write!(f, "?{v}"),
            Token::Quoted(s) => write!(f, "{s:?}"),
            Token::Word(w) => write!(f, "{w:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at offset {pos}: {msg}")]
pub struct SyntaxError {
    pub pos: usize,
    pub msg: String,
}

impl SyntaxError {
    pub fn new(pos: usize, msg: impl Into<String>) -> Self {
        SyntaxError { pos, msg: msg.into() }
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | ':' | '/' | '#' | '@')
}

/// Split `src` into tokens, each paired with its byte offset.
pub fn tokenize(src: &str) -> Result<Vec<(usize, Token)>, SyntaxError> {
    let mut out = Vec::new();
    let mut it = src.char_indices().peekable();
    while let Some(&(pos, c)) = it.peek() {
        match c {
            c if c.is_whitespace() => {
                it.next();
            }
            '[' | ']' | ',' | '.' | '*' => {
                it.next();
                out.push((
                    pos,
                    match c {
                        '[' => Token::LBracket,
                        ']' => Token::RBracket,
                        ',' => Token::Comma,
                        '.' => Token::Dot,
                        _ => Token::Star,
                    },
                ));
            }
            '?' => {
                it.next();
                let mut name = String::new();
                while let Some(&(_, c)) = it.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        name.push(c);
                        it.next();
                    } else {
                        break;
                    }
                }
                if name.is_empty() {
                    return Err(SyntaxError::new(pos, "expected a variable name after '?'"));
                }
                out.push((pos, Token::Var(name)));
            }
            '\'' | '"' => {
                let quote = c;
                it.next();
                let mut s = String::new();
                loop {
                    match it.next() {
                        None => return Err(SyntaxError::new(pos, "unterminated string literal")),
                        Some((_, '\\')) => match it.next() {
                            Some((_, e)) => s.push(e),
                            None => return Err(SyntaxError::new(pos, "unterminated string literal")),
                        },
                        Some((_, c)) if c == quote => break,
                        Some((_, c)) => s.push(c),
                    }
                }
                out.push((pos, Token::Quoted(s)));
            }
            c if is_word_char(c) => {
                let mut w = String::new();
                while let Some(&(_, c)) = it.peek() {
                    if is_word_char(c) {
                        w.push(c);
                        it.next();
                    } else {
                        break;
                    }
                }
                out.push((pos, Token::Word(w)));
            }
            other => return Err(SyntaxError::new(pos, format!("unexpected character {other:?}"))),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_with_offsets() {
        let toks = tokenize("?p isIn ?r.\n ?r name 'Lab A'").unwrap();
        let kinds: Vec<_> = toks.iter().map(|(_, t)| t.clone()).collect();
        assert_eq!(
            kinds,
            vec![
                Token::Var("p".into()),
                Token::Word("isIn".into()),
                Token::Var("r".into()),
                Token::Dot,
                Token::Var("r".into()),
                Token::Word("name".into()),
                Token::Quoted("Lab A".into()),
            ]
        );
        assert_eq!(toks[3].0, 10);
    }

    #[test]
    fn escapes_and_errors() {
        assert_eq!(tokenize(r"'it\'s'").unwrap()[0].1, Token::Quoted("it's".into()));
        assert_eq!(tokenize("'open").unwrap_err().pos, 0);
        assert_eq!(tokenize("a ? b").unwrap_err().pos, 2);
        assert_eq!(tokenize("a $").unwrap_err().pos, 2);
    }

    #[test]
    fn uuid_is_one_word() {
        let toks = tokenize("[6773-ab, *]").unwrap();
        assert_eq!(toks[1].1, Token::Word("6773-ab".into()));
        assert_eq!(toks[3].1, Token::Star);
    }
}
