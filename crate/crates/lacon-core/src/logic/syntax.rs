//! Prefix s-expression syntax for formulas.
//!
//! ```text
//! (edge x y) (label L x) (= x y) (sim x y) (Q i x) true false
//! (not F) (and F G ...) (or F G ...) (implies F G)
//! (exists v F) (forall v F) (near t (avoid ...) (centers ...) target)
//! ```

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::str::FromStr;

use super::formula::{var, Formula};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("formula syntax error at byte {offset}: {message}")]
pub struct SyntaxError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token<'a> {
    Open,
    Close,
    Atom(&'a str),
}

fn tokenize(text: &str) -> Vec<(usize, Token<'_>)> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'(' => {
                out.push((i, Token::Open));
                i += 1;
            }
            b')' => {
                out.push((i, Token::Close));
                i += 1;
            }
            c if c.is_ascii_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'(' && bytes[i] != b')' {
                    i += 1;
                }
                out.push((start, Token::Atom(&text[start..i])));
            }
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
    fn error<T>(&self, message: &str) -> Result<T, SyntaxError> {
        let offset = self.tokens.get(self.pos).map_or(self.end, |t| t.0);
        Err(SyntaxError { offset, message: message.to_string() })
    }

    fn next(&mut self) -> Option<Token<'a>> {
        let t = self.tokens.get(self.pos).map(|t| t.1.clone());
        self.pos += 1;
        t
    }

    fn peek(&self) -> Option<&Token<'a>> {
        self.tokens.get(self.pos).map(|t| &t.1)
    }

    fn name(&mut self) -> Result<&'a str, SyntaxError> {
        match self.peek() {
            Some(Token::Atom(a)) if is_identifier(a) => {
                let a = *a;
                self.pos += 1;
                Ok(a)
            }
            _ => self.error("expected a name"),
        }
    }

    fn number(&mut self) -> Result<usize, SyntaxError> {
        match self.peek() {
            Some(Token::Atom(a)) => match a.parse() {
                Ok(n) => {
                    self.pos += 1;
                    Ok(n)
                }
                Err(_) => self.error("expected a number"),
            },
            _ => self.error("expected a number"),
        }
    }

    fn close(&mut self) -> Result<(), SyntaxError> {
        match self.peek() {
            Some(Token::Close) => {
                self.pos += 1;
                Ok(())
            }
            _ => self.error("expected `)`"),
        }
    }

    fn names_list(&mut self) -> Result<Vec<String>, SyntaxError> {
        match self.next() {
            Some(Token::Open) => {}
            _ => {
                self.pos -= 1;
                return self.error("expected `(`");
            }
        }
        let mut out = Vec::new();
        while let Some(Token::Atom(_)) = self.peek() {
            out.push(var(self.name()?));
        }
        self.close()?;
        Ok(out)
    }

    fn formula(&mut self) -> Result<Formula, SyntaxError> {
        match self.next() {
            Some(Token::Atom("true")) => Ok(Formula::True),
            Some(Token::Atom("false")) => Ok(Formula::False),
            Some(Token::Open) => {
                let head = match self.next() {
                    Some(Token::Atom(h)) => h,
                    _ => {
                        self.pos -= 1;
                        return self.error("expected an operator");
                    }
                };
                let f = match head {
                    "edge" => Formula::Edge(var(self.name()?), var(self.name()?)),
                    "=" => Formula::Eq(var(self.name()?), var(self.name()?)),
                    "sim" => Formula::Sim(var(self.name()?), var(self.name()?)),
                    "label" => Formula::Label(self.name()?.to_string(), var(self.name()?)),
                    "Q" => Formula::Copy(self.number()?, var(self.name()?)),
                    "not" => Formula::Not(Box::new(self.formula()?)),
                    "and" | "or" => {
                        let mut parts = Vec::new();
                        while !matches!(self.peek(), Some(Token::Close) | None) {
                            parts.push(self.formula()?);
                        }
                        if head == "and" { Formula::And(parts) } else { Formula::Or(parts) }
                    }
                    "implies" => {
                        let a = self.formula()?;
                        Formula::implies(a, self.formula()?)
                    }
                    "exists" => Formula::Exists(var(self.name()?), Box::new(self.formula()?)),
                    "forall" => Formula::Forall(var(self.name()?), Box::new(self.formula()?)),
                    "near" => {
                        let radius = self.number()?;
                        let avoid = self.names_list()?;
                        let centers = self.names_list()?;
                        Formula::Near { radius, avoid, centers, target: var(self.name()?) }
                    }
                    _ => {
                        self.pos -= 1;
                        return self.error("unknown operator");
                    }
                };
                self.close()?;
                Ok(f)
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.error("expected a formula")
            }
        }
    }
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

pub fn parse_formula(text: &str) -> Result<Formula, SyntaxError> {
    let mut p = Parser { tokens: tokenize(text), pos: 0, end: text.len() };
    let f = p.formula()?;
    if p.pos < p.tokens.len() {
        return p.error("trailing input");
    }
    Ok(f)
}

impl FromStr for Formula {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for text in [
            "(exists z (and (edge x z) (edge z y)))",
            "(forall z (or (not (edge x z)) (edge y z)))",
            "(and (label L x) (Q 2 x) (sim x y) (= x y))",
            "(near 2 (x1) (y1 y2) z)",
            "true",
        ] {
            let f: Formula = text.parse().unwrap();
            assert_eq!(f.to_string(), text);
        }
    }

    #[test]
    fn errors_carry_offsets() {
        let e = parse_formula("(edge x)").unwrap_err();
        assert_eq!(e.offset, 7);
        assert!(parse_formula("(bogus x y)").is_err());
        assert!(parse_formula("(edge x y) extra").is_err());
        assert!(parse_formula("(edge x y").is_err());
    }
}
