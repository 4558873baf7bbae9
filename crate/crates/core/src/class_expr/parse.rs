//! Text syntax for class expressions.
//!
//! ```text
//! ce      := primary ("and" primary)*
//! primary := "(" ce ")" | NAME "some" primary | NAME
//! ```
//!
//! `some` binds tighter than `and`, so `to some A and B` reads as
//! `(to some A) and B`. Conjunctions are flattened and reordered so that the
//! single named class comes first.

use super::ClassExpression;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Token<'a> {
    Open,
    Close,
    And,
    Some,
    Name(&'a str),
}

fn tokenize(text: &str) -> Vec<(usize, Token<'_>)> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, ch)) = chars.peek() {
        if ch.is_whitespace() {
            chars.next();
        } else if ch == '(' {
            out.push((pos, Token::Open));
            chars.next();
        } else if ch == ')' {
            out.push((pos, Token::Close));
            chars.next();
        } else {
            let mut end = pos;
            while let Some(&(i, c)) = chars.peek() {
                if c.is_whitespace() || c == '(' || c == ')' {
                    break;
                }
                end = i + c.len_utf8();
                chars.next();
            }
            let word = &text[pos..end];
            let tok = match word {
                "and" => Token::And,
                "some" => Token::Some,
                _ => Token::Name(word),
            };
            out.push((pos, tok));
        }
    }
    out
}

struct Parser<'a> {
    tokens: Vec<(usize, Token<'a>)>,
    pos: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token<'a>> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            position: self.offset(),
            message: message.into(),
        })
    }

    /// Flat list of conjuncts; parenthesized conjunctions are spliced in.
    fn conjunction(&mut self) -> Result<Vec<ClassExpression>> {
        let mut parts = self.primary()?;
        while self.peek() == Some(&Token::And) {
            self.pos += 1;
            parts.extend(self.primary()?);
        }
        Ok(parts)
    }

    fn primary(&mut self) -> Result<Vec<ClassExpression>> {
        match self.peek().cloned() {
            Some(Token::Open) => {
                self.pos += 1;
                let inner = self.conjunction()?;
                if self.peek() != Some(&Token::Close) {
                    return self.error("expected `)`");
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(Token::Name(name)) => {
                self.pos += 1;
                if self.peek() == Some(&Token::Some) {
                    self.pos += 1;
                    let at = self.offset();
                    let filler = normalize_conjunction(self.primary()?, at)?;
                    Ok(vec![ClassExpression::exists(name, filler)])
                } else {
                    Ok(vec![ClassExpression::class(name)])
                }
            }
            Some(tok) => self.error(format!("unexpected {tok:?}")),
            None => self.error("unexpected end of input"),
        }
    }
}

fn normalize_conjunction(mut parts: Vec<ClassExpression>, position: usize) -> Result<ClassExpression> {
    if parts.len() == 1 {
        return Ok(parts.pop().unwrap());
    }
    let (classes, rest): (Vec<_>, Vec<_>) = parts
        .into_iter()
        .partition(|op| matches!(op, ClassExpression::Class(_)));
    if classes.len() != 1 {
        return Err(Error::NotNormalized(format!(
            "conjunction at byte {position} has {} named classes, expected exactly one",
            classes.len()
        )));
    }
    let mut ops = classes;
    ops.extend(rest);
    Ok(ClassExpression::Intersection(ops))
}

/// Parses and normalizes a class expression.
pub fn parse(text: &str) -> Result<ClassExpression> {
    let mut parser = Parser {
        tokens: tokenize(text),
        pos: 0,
        end: text.len(),
    };
    let parts = parser.conjunction()?;
    if parser.pos != parser.tokens.len() {
        return parser.error("trailing input");
    }
    let ce = normalize_conjunction(parts, 0)?;
    ce.validate()?;
    Ok(ce)
}
