//! Recursive-descent parsers for both surface flavors.
//!
//! Parsing produces unresolved terms: MFE calls are already `FunRef` heads
//! (the call syntax carries the arity), while MFH identifiers are all `Var`
//! until [`crate::resolve`] classifies them.

use std::collections::BTreeSet;

use super::lexer::{tokenize, Tok, Token};
use crate::error::SyntaxError;
use crate::term::{all_names, fresh_name, Definition, Flavor, FunId, Name, Program, Sugar, Term};

type PResult<T> = Result<T, SyntaxError>;

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    flavor: Flavor,
    /// MFH: inside a definition body, where a token in column 1 ends the body.
    in_body: bool,
    /// Between definitions; errors are reported at the offending token.
    at_def_start: bool,
}

impl Parser {
    pub fn new(src: &str, flavor: Flavor) -> PResult<Parser> {
        Ok(Parser {
            toks: tokenize(src, flavor)?,
            pos: 0,
            flavor,
            in_body: false,
            at_def_start: true,
        })
    }

    fn raw(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek(&self) -> &Tok {
        let t = self.raw();
        if self.in_body && t.at_line_start {
            &Tok::Eof
        } else {
            &t.tok
        }
    }

    fn peek_at(&self, k: usize) -> &Tok {
        self.toks
            .get(self.pos + k)
            .map(|t| &t.tok)
            .unwrap_or(&Tok::Eof)
    }

    fn bump(&mut self) -> Tok {
        let t = self.peek().clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: impl Into<String>) -> SyntaxError {
        let found = self.raw();
        let (line, column) = match self.pos.checked_sub(1).map(|i| &self.toks[i]) {
            // A construct left open at the end of a line: blame that line.
            // Indented MFH lines continue the previous one, so they keep the blame.
            Some(prev)
                if !self.at_def_start
                    && found.line > prev.end_line
                    && (self.flavor == Flavor::Mfe || found.at_line_start || found.tok == Tok::Eof) =>
            {
                (prev.end_line, prev.end_col)
            }
            _ => (found.line, found.col),
        };
        SyntaxError {
            line,
            column,
            expected: expected.into(),
            found: found.tok.describe(),
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("`{}`", tok.symbol())))
        }
    }

    fn ident(&mut self) -> PResult<Name> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.error("name")),
        }
    }

    fn var(&mut self) -> PResult<Name> {
        match self.peek().clone() {
            Tok::Var(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.error("variable")),
        }
    }

    fn int(&mut self) -> PResult<i64> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(n)
            }
            _ => Err(self.error("integer")),
        }
    }

    fn distinct(&self, params: &[Name]) -> PResult<()> {
        let mut seen = BTreeSet::new();
        for p in params {
            if !seen.insert(p) {
                return Err(self.error(format!("distinct parameter names (`{p}` repeated)")));
            }
        }
        Ok(())
    }

    pub fn at_eof(&self) -> bool {
        self.raw().tok == Tok::Eof
    }

    pub fn expect_eof(&mut self) -> PResult<()> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.error("end of input"))
        }
    }

    pub fn program(&mut self) -> PResult<Program> {
        let mut defs = Vec::new();
        while !self.at_eof() {
            defs.push(self.definition()?);
        }
        Ok(Program::new(self.flavor, defs))
    }

    pub fn definition(&mut self) -> PResult<Definition> {
        self.at_def_start = true;
        let d = match self.flavor {
            Flavor::Mfe => self.mfe_definition(),
            Flavor::Mfh => self.mfh_definition(),
        };
        self.at_def_start = true;
        self.in_body = false;
        d
    }

    pub fn expr(&mut self) -> PResult<Term> {
        match self.flavor {
            Flavor::Mfe => self.mfe_expr(),
            Flavor::Mfh => self.mfh_expr(),
        }
    }

    /// `NAME "/" INT ":=" expr`, terminated by `.` in MFE.
    pub fn adapter_entry(&mut self) -> PResult<(FunId, Term)> {
        self.at_def_start = true;
        let name = self.ident()?;
        self.at_def_start = false;
        self.expect(Tok::Slash)?;
        let arity = self.int()?;
        let arity = usize::try_from(arity).map_err(|_| self.error("non-negative arity"))?;
        self.expect(Tok::Define)?;
        self.in_body = self.flavor == Flavor::Mfh;
        let body = self.expr()?;
        match self.flavor {
            Flavor::Mfe => self.expect(Tok::Dot)?,
            Flavor::Mfh if *self.peek() != Tok::Eof => {
                return Err(self.error("end of adapter entry"))
            }
            Flavor::Mfh => {}
        }
        self.in_body = false;
        self.at_def_start = true;
        Ok((FunId::new(name, arity), body))
    }

    // ---- MFE ---------------------------------------------------------------

    fn mfe_definition(&mut self) -> PResult<Definition> {
        let name = self.ident()?;
        self.at_def_start = false;
        self.expect(Tok::LParen)?;
        let params = self.mfe_params()?;
        self.expect(Tok::Arrow)?;
        let body = self.mfe_expr()?;
        self.expect(Tok::Dot)?;
        Ok(Definition { name, params, body })
    }

    /// Parameter list after `(`, consuming the closing `)`.
    fn mfe_params(&mut self) -> PResult<Vec<Name>> {
        let mut params = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                params.push(self.var()?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        self.distinct(&params)?;
        Ok(params)
    }

    fn mfe_expr(&mut self) -> PResult<Term> {
        let mut lhs = self.mfe_mul()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => crate::term::BinOp::Add,
                Tok::Minus => crate::term::BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.mfe_mul()?;
            lhs = Term::binop(op, lhs, rhs);
        }
    }

    fn mfe_mul(&mut self) -> PResult<Term> {
        let mut lhs = self.mfe_postfix()?;
        while *self.peek() == Tok::Star {
            self.bump();
            let rhs = self.mfe_postfix()?;
            lhs = Term::binop(crate::term::BinOp::Mul, lhs, rhs);
        }
        Ok(lhs)
    }

    fn mfe_postfix(&mut self) -> PResult<Term> {
        let mut t = self.mfe_primary()?;
        while *self.peek() == Tok::LParen {
            self.bump();
            let args = self.mfe_args(Tok::RParen)?;
            t = Term::app(t, args);
        }
        Ok(t)
    }

    /// Comma-separated expressions up to and including `close`.
    fn mfe_args(&mut self, close: Tok) -> PResult<Vec<Term>> {
        let mut args = Vec::new();
        if *self.peek() == close {
            self.bump();
            return Ok(args);
        }
        loop {
            args.push(self.mfe_expr()?);
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                t if *t == close => {
                    self.bump();
                    return Ok(args);
                }
                _ => return Err(self.error(format!("`,` or `{}`", close.symbol()))),
            }
        }
    }

    fn mfe_primary(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Term::Int(n))
            }
            Tok::Minus if matches!(self.peek_at(1), Tok::Int(_)) => {
                self.bump();
                Ok(Term::Int(-self.int()?))
            }
            Tok::Var(x) => {
                self.bump();
                Ok(Term::Var(x))
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let args = self.mfe_args(Tok::RParen)?;
                    Ok(Term::app(Term::FunRef(name, args.len()), args))
                } else {
                    Ok(Term::Atom(name))
                }
            }
            Tok::Fun => {
                self.bump();
                match self.peek().clone() {
                    Tok::Ident(name) => {
                        self.bump();
                        self.expect(Tok::Slash)?;
                        let n = self.int()?;
                        let n = usize::try_from(n).map_err(|_| self.error("non-negative arity"))?;
                        Ok(Term::FunRef(name, n))
                    }
                    Tok::LParen => {
                        self.bump();
                        let params = self.mfe_params()?;
                        self.expect(Tok::Arrow)?;
                        let body = self.mfe_expr()?;
                        self.expect(Tok::End)?;
                        Ok(Term::Lam(params, Box::new(body)))
                    }
                    _ => Err(self.error("function name or `(` after `fun`")),
                }
            }
            Tok::LBracket => {
                self.bump();
                Ok(Term::List(self.mfe_args(Tok::RBracket)?))
            }
            Tok::LParen => {
                self.bump();
                let e = self.mfe_expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => Err(self.error("expression")),
        }
    }

    // ---- MFH ---------------------------------------------------------------

    fn mfh_definition(&mut self) -> PResult<Definition> {
        if !self.raw().at_line_start && !self.at_eof() {
            return Err(self.error("definition starting in column 1"));
        }
        let name = self.ident()?;
        self.at_def_start = false;
        self.in_body = true;
        let mut params = Vec::new();
        while let Tok::Ident(p) = self.peek().clone() {
            self.bump();
            params.push(p);
        }
        self.distinct(&params)?;
        self.expect(Tok::Eq)?;
        let body = self.mfh_expr()?;
        if *self.peek() != Tok::Eof {
            return Err(self.error("end of definition"));
        }
        self.in_body = false;
        Ok(Definition { name, params, body })
    }

    fn mfh_expr(&mut self) -> PResult<Term> {
        if *self.peek() == Tok::Backslash {
            self.mfh_lambda()
        } else {
            self.mfh_add()
        }
    }

    fn mfh_lambda(&mut self) -> PResult<Term> {
        self.expect(Tok::Backslash)?;
        let mut params = vec![self.ident()?];
        while let Tok::Ident(p) = self.peek().clone() {
            self.bump();
            params.push(p);
        }
        self.distinct(&params)?;
        self.expect(Tok::Arrow)?;
        let body = self.mfh_expr()?;
        Ok(Term::lam_curried(params, body))
    }

    fn mfh_operand(&mut self, next: fn(&mut Parser) -> PResult<Term>) -> PResult<Term> {
        if *self.peek() == Tok::Backslash {
            self.mfh_lambda()
        } else {
            next(self)
        }
    }

    fn mfh_add(&mut self) -> PResult<Term> {
        let mut lhs = self.mfh_mul()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => crate::term::BinOp::Add,
                Tok::Minus => crate::term::BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.mfh_operand(Parser::mfh_mul)?;
            lhs = Term::binop(op, lhs, rhs);
        }
    }

    fn mfh_mul(&mut self) -> PResult<Term> {
        let mut lhs = self.mfh_infix()?;
        while *self.peek() == Tok::Star {
            self.bump();
            let rhs = self.mfh_operand(Parser::mfh_infix)?;
            lhs = Term::binop(crate::term::BinOp::Mul, lhs, rhs);
        }
        Ok(lhs)
    }

    /// `` `f` ) `` ahead: the closing half of a left section.
    fn section_close_ahead(&self) -> bool {
        matches!(self.peek(), Tok::Backtick)
            && matches!(self.peek_at(1), Tok::Ident(_))
            && matches!(self.peek_at(2), Tok::Backtick)
            && matches!(self.peek_at(3), Tok::RParen)
    }

    fn mfh_infix(&mut self) -> PResult<Term> {
        let mut lhs = self.mfh_app()?;
        while *self.peek() == Tok::Backtick && !self.section_close_ahead() {
            self.bump();
            let f = self.ident()?;
            self.expect(Tok::Backtick)?;
            let rhs = self.mfh_app()?;
            lhs = Term::app(Term::app_infix(Term::Var(f), vec![lhs]), vec![rhs]);
        }
        Ok(lhs)
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Int(_) | Tok::Ident(_) | Tok::LParen | Tok::LBracket
        )
    }

    fn mfh_app(&mut self) -> PResult<Term> {
        let mut head = self.mfh_atom(true)?;
        while self.starts_atom() {
            let arg = self.mfh_atom(false)?;
            head = Term::app(head, vec![arg]);
        }
        Ok(head)
    }

    fn mfh_atom(&mut self, allow_negative: bool) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Term::Int(n))
            }
            Tok::Minus if allow_negative && matches!(self.peek_at(1), Tok::Int(_)) => {
                self.bump();
                Ok(Term::Int(-self.int()?))
            }
            Tok::Ident(x) => {
                self.bump();
                Ok(Term::Var(x))
            }
            Tok::LBracket => {
                self.bump();
                let mut items = Vec::new();
                if *self.peek() == Tok::RBracket {
                    self.bump();
                    return Ok(Term::List(items));
                }
                loop {
                    items.push(self.mfh_expr()?);
                    match self.peek() {
                        Tok::Comma => {
                            self.bump();
                        }
                        Tok::RBracket => {
                            self.bump();
                            return Ok(Term::List(items));
                        }
                        _ => return Err(self.error("`,` or `]`")),
                    }
                }
            }
            Tok::LParen => {
                self.bump();
                self.mfh_paren()
            }
            _ => Err(self.error("expression")),
        }
    }

    /// After `(`: a right section, a left section, or a parenthesized expression.
    fn mfh_paren(&mut self) -> PResult<Term> {
        if *self.peek() == Tok::Backtick {
            self.bump();
            let f = self.ident()?;
            self.expect(Tok::Backtick)?;
            let operand = self.mfh_expr()?;
            self.expect(Tok::RParen)?;
            let mut avoid = all_names(&operand);
            avoid.insert(f.clone());
            let x = fresh_name("x", &avoid);
            let body = Term::App(
                Box::new(Term::app(Term::Var(f), vec![Term::Var(x.clone())])),
                vec![operand],
                Sugar::Infix,
            );
            return Ok(Term::Lam(vec![x], Box::new(body)));
        }
        let e = self.mfh_expr()?;
        if self.section_close_ahead() {
            self.bump();
            let f = self.ident()?;
            self.bump();
            self.bump();
            return Ok(Term::app_infix(Term::Var(f), vec![e]));
        }
        self.expect(Tok::RParen)?;
        Ok(e)
    }
}

/// Parses a whole program without resolving names.
pub fn parse_unresolved(src: &str, flavor: Flavor) -> PResult<Program> {
    Parser::new(src, flavor)?.program()
}

/// Parses a single standalone expression without resolving names.
pub fn parse_term(src: &str, flavor: Flavor) -> PResult<Term> {
    let mut p = Parser::new(src, flavor)?;
    p.at_def_start = false;
    let t = p.expr()?;
    p.expect_eof()?;
    Ok(t)
}
