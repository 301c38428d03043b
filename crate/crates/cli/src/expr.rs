//! Tiny arithmetic evaluator for angle arguments such as `pi*sqrt(3)/6`.
//!
//! Grammar: numbers, `pi`, `sqrt(...)`, `+ - * /`, parentheses and unary minus.
//! Operators are left-associative so the result matches the same expression
//! written out in Rust.

use std::f64::consts::PI;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct ExprError {
    pub pos: usize,
    pub msg: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at offset {}", self.msg, self.pos)
    }
}

impl std::error::Error for ExprError {}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok {
    Num(f64),
    Pi,
    Sqrt,
    Op(char),
    Open,
    Close,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' => i += 1,
            '+' | '-' | '*' | '/' => {
                out.push((i, Tok::Op(c)));
                i += 1;
            }
            '(' => {
                out.push((i, Tok::Open));
                i += 1;
            }
            ')' => {
                out.push((i, Tok::Close));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // exponent, e.g. 1e-3
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let v = text.parse().map_err(|_| ExprError {
                    pos: start,
                    msg: format!("bad number {text:?}"),
                })?;
                out.push((start, Tok::Num(v)));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                let tok = match src[start..i].to_ascii_lowercase().as_str() {
                    "pi" => Tok::Pi,
                    "sqrt" => Tok::Sqrt,
                    other => {
                        return Err(ExprError {
                            pos: start,
                            msg: format!("unknown name {other:?}"),
                        })
                    }
                };
                out.push((start, tok));
            }
            _ => {
                return Err(ExprError {
                    pos: i,
                    msg: format!("unexpected character {c:?}"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<Tok> {
        self.toks.get(self.at).map(|t| t.1)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.0)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expr(&mut self) -> Result<f64, ExprError> {
        let mut v = self.term()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek() {
            self.at += 1;
            let rhs = self.term()?;
            v = if op == '+' { v + rhs } else { v - rhs };
        }
        Ok(v)
    }

    fn term(&mut self) -> Result<f64, ExprError> {
        let mut v = self.unary()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek() {
            self.at += 1;
            let rhs = self.unary()?;
            v = if op == '*' { v * rhs } else { v / rhs };
        }
        Ok(v)
    }

    fn unary(&mut self) -> Result<f64, ExprError> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.at += 1;
                Ok(-self.unary()?)
            }
            Some(Tok::Op('+')) => {
                self.at += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<f64, ExprError> {
        match self.peek() {
            Some(Tok::Num(v)) => {
                self.at += 1;
                Ok(v)
            }
            Some(Tok::Pi) => {
                self.at += 1;
                Ok(PI)
            }
            Some(Tok::Sqrt) => {
                self.at += 1;
                if self.peek() != Some(Tok::Open) {
                    return self.err("expected '(' after sqrt");
                }
                let v = self.group()?;
                if v < 0.0 {
                    return self.err("sqrt of a negative number");
                }
                Ok(v.sqrt())
            }
            Some(Tok::Open) => self.group(),
            Some(_) => self.err("expected a number, pi, sqrt or '('"),
            None => self.err("unexpected end of expression"),
        }
    }

    fn group(&mut self) -> Result<f64, ExprError> {
        self.at += 1;
        let v = self.expr()?;
        if self.peek() != Some(Tok::Close) {
            return self.err("expected ')'");
        }
        self.at += 1;
        Ok(v)
    }
}

pub fn eval(src: &str) -> Result<f64, ExprError> {
    let mut p = Parser {
        toks: lex(src)?,
        at: 0,
        end: src.len(),
    };
    let v = p.expr()?;
    if p.at != p.toks.len() {
        return p.err("trailing input");
    }
    if !v.is_finite() {
        return Err(ExprError {
            pos: 0,
            msg: format!("expression evaluates to {v}"),
        });
    }
    Ok(v)
}
