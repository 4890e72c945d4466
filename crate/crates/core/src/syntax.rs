//! Tokenizer shared by the expression, regex and query parsers.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Epsilon,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Bar,
    Dot,
    Star,
    Plus,
    Question,
    ZeroMark,
    Slash,
    DoubleSlash,
    Eq,
    Quoted,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: usize,
}

fn ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-' || c == ':'
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut it = src.char_indices().peekable();
    while let Some((pos, c)) = it.next() {
        let tok = match c {
            c if c.is_whitespace() => continue,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            '|' => Tok::Bar,
            '.' => Tok::Dot,
            '*' => Tok::Star,
            '+' => Tok::Plus,
            '?' => Tok::Question,
            '=' => Tok::Eq,
            'ε' => Tok::Epsilon,
            '^' => match it.next() {
                Some((_, '0')) => Tok::ZeroMark,
                _ => return Err(Error::Syntax { pos, msg: "expected `0` after `^`".into() }),
            },
            '/' => {
                if matches!(it.peek(), Some((_, '/'))) {
                    it.next();
                    Tok::DoubleSlash
                } else {
                    Tok::Slash
                }
            }
            '"' | '\'' => {
                let mut closed = false;
                for (_, d) in it.by_ref() {
                    if d == c {
                        closed = true;
                        break;
                    }
                }
                if !closed {
                    return Err(Error::Syntax { pos, msg: "unterminated string".into() });
                }
                Tok::Quoted
            }
            c if ident_char(c) => {
                let mut name = c.to_string();
                while let Some(&(_, d)) = it.peek() {
                    if ident_char(d) {
                        name.push(d);
                        it.next();
                    } else {
                        break;
                    }
                }
                if name == "epsilon" {
                    Tok::Epsilon
                } else {
                    Tok::Ident(name)
                }
            }
            other => {
                return Err(Error::Syntax { pos, msg: format!("unexpected character `{other}`") });
            }
        };
        out.push(Token { tok, pos });
    }
    Ok(out)
}

/// Cursor over a token list; `end` is the byte length of the source, used
/// as the position of "unexpected end of input" errors.
pub(crate) struct Cursor {
    toks: Vec<Token>,
    i: usize,
    end: usize,
}

impl Cursor {
    pub fn new(src: &str) -> Result<Cursor> {
        Ok(Cursor { toks: tokenize(src)?, i: 0, end: src.len() })
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.tok)
    }

    pub fn pos(&self) -> usize {
        self.toks.get(self.i).map_or(self.end, |t| t.pos)
    }

    pub fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.i).map(|t| t.tok.clone());
        if t.is_some() {
            self.i += 1;
        }
        t
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok, what: &str) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    pub fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(name)) => {
                let name = name.clone();
                self.i += 1;
                Ok(name)
            }
            _ => Err(self.error("expected a label".to_string())),
        }
    }

    pub fn at_end(&self) -> bool {
        self.i >= self.toks.len()
    }

    pub fn finish(&self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input".to_string()))
        }
    }

    pub fn error(&self, msg: String) -> Error {
        Error::Syntax { pos: self.pos(), msg }
    }
}

/// Every identifier in `src`, in order of first appearance.
pub(crate) fn identifiers(src: &str) -> Result<Vec<String>> {
    let mut out: Vec<String> = Vec::new();
    for t in tokenize(src)? {
        if let Tok::Ident(name) = t.tok {
            if !out.contains(&name) {
                out.push(name);
            }
        }
    }
    Ok(out)
}
