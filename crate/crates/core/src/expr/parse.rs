//! Tokenizer and precedence-climbing parser for the expression grammar.

use super::{BinOp, Constant, Func, Node};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(Tok, usize)> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = self.src.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        if c.is_ascii_digit() || c == b'.' {
            return self.number(start);
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while self
                .src
                .get(self.pos)
                .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_')
            {
                self.pos += 1;
            }
            let word = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
            return Ok((Tok::Ident(word.to_string()), start));
        }
        self.pos += 1;
        let tok = match c {
            b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(c as char),
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            _ => {
                return Err(Error::Syntax {
                    offset: start,
                    message: format!("unexpected character `{}`", c as char),
                })
            }
        };
        Ok((tok, start))
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize)> {
        let digits = |lx: &mut Self| {
            let s = lx.pos;
            while lx.src.get(lx.pos).is_some_and(u8::is_ascii_digit) {
                lx.pos += 1;
            }
            lx.pos - s
        };
        let mut n = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            return Err(Error::Syntax { offset: start, message: "malformed number".into() });
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let v: f64 = text
            .parse()
            .map_err(|_| Error::Syntax { offset: start, message: format!("bad number `{text}`") })?;
        Ok((Tok::Num(v), start))
    }
}

pub(super) struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    at: usize,
    vars: &'a [String],
    params: &'a [(String, f64)],
}

const ADD_BP: u8 = 1;
const MUL_BP: u8 = 2;
const UNARY_BP: u8 = 3;
const POW_BP: u8 = 4;

impl<'a> Parser<'a> {
    pub(super) fn new(src: &'a str, vars: &'a [String], params: &'a [(String, f64)]) -> Result<Self> {
        let mut lexer = Lexer { src: src.as_bytes(), pos: 0 };
        let (tok, at) = lexer.next()?;
        Ok(Self { lexer, tok, at, vars, params })
    }

    fn bump(&mut self) -> Result<()> {
        let (tok, at) = self.lexer.next()?;
        self.tok = tok;
        self.at = at;
        Ok(())
    }

    fn unexpected(&self) -> Error {
        let what = match &self.tok {
            Tok::End => "unexpected end of input".to_string(),
            Tok::Num(v) => format!("unexpected number {v}"),
            Tok::Ident(s) => format!("unexpected identifier `{s}`"),
            Tok::Op(c) => format!("unexpected operator `{c}`"),
            Tok::LParen => "unexpected `(`".to_string(),
            Tok::RParen => "unexpected `)`".to_string(),
            Tok::Comma => "unexpected `,`".to_string(),
        };
        Error::Syntax { offset: self.at, message: what }
    }

    pub(super) fn parse_all(mut self) -> Result<Node> {
        let node = self.expr(0)?;
        if self.tok != Tok::End {
            return Err(self.unexpected());
        }
        Ok(node)
    }

    fn expr(&mut self, min_bp: u8) -> Result<Node> {
        let mut lhs = self.prefix()?;
        loop {
            let (op, bp, right_assoc) = match self.tok {
                Tok::Op('+') => (BinOp::Add, ADD_BP, false),
                Tok::Op('-') => (BinOp::Sub, ADD_BP, false),
                Tok::Op('*') => (BinOp::Mul, MUL_BP, false),
                Tok::Op('/') => (BinOp::Div, MUL_BP, false),
                Tok::Op('^') => (BinOp::Pow, POW_BP, true),
                _ => break,
            };
            if bp < min_bp || (bp == min_bp && !right_assoc) {
                break;
            }
            self.bump()?;
            let rhs = self.expr(bp)?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Node> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.bump()?;
                Ok(Node::Num(v))
            }
            Tok::Op('-') => {
                self.bump()?;
                Ok(Node::Neg(Box::new(self.expr(UNARY_BP)?)))
            }
            Tok::Op('+') => {
                self.bump()?;
                self.expr(UNARY_BP)
            }
            Tok::LParen => {
                self.bump()?;
                let inner = self.expr(0)?;
                if self.tok != Tok::RParen {
                    return Err(self.unexpected());
                }
                self.bump()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let at = self.at;
                self.bump()?;
                if self.tok == Tok::LParen {
                    let func = Func::from_name(&name).ok_or_else(|| Error::UnknownIdentifier(name.clone()))?;
                    self.bump()?;
                    let mut args = vec![self.expr(0)?];
                    while self.tok == Tok::Comma {
                        self.bump()?;
                        args.push(self.expr(0)?);
                    }
                    if self.tok != Tok::RParen {
                        return Err(self.unexpected());
                    }
                    self.bump()?;
                    if args.len() != func.arity() {
                        return Err(Error::Syntax {
                            offset: at,
                            message: format!("`{name}` takes {} argument(s), got {}", func.arity(), args.len()),
                        });
                    }
                    return Ok(Node::Call(func, args));
                }
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Node::Var(i));
                }
                if let Some((_, v)) = self.params.iter().find(|(p, _)| *p == name) {
                    return Ok(Node::Num(*v));
                }
                match name.as_str() {
                    "pi" => Ok(Node::Const(Constant::Pi)),
                    "e" => Ok(Node::Const(Constant::E)),
                    _ => Err(Error::UnknownIdentifier(name)),
                }
            }
            _ => Err(self.unexpected()),
        }
    }
}
