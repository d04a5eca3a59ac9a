//! Recursive-descent parser for the command language.
//!
//! The parser only builds the tree; scope and type rules are enforced by
//! [`super::check`]. Identifiers in expressions are parsed as variables and
//! resolved to enum labels during checking.

use super::ast::*;
use super::diag::Diagnostic;
use super::lexer::{is_keyword, tokenize, Tok, Token};
use crate::state_space::{Domain, VarName};

type PResult<T> = Result<T, Diagnostic>;

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub(crate) fn new(text: &str) -> PResult<Self> {
        Ok(Parser { toks: tokenize(text)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn unexpected(&self, wanted: &str) -> Diagnostic {
        Diagnostic::syntax(self.span(), format!("expected {wanted}, found {}", self.peek().describe()))
    }

    pub(crate) fn expect_eof(&mut self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    fn ident(&mut self) -> PResult<(VarName, Span)> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok((VarName::new(s).expect("lexer yields valid identifiers"), span))
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn int_literal(&mut self) -> PResult<i64> {
        let negative = self.eat(&Tok::Minus);
        match *self.peek() {
            Tok::Int(i) => {
                self.bump();
                Ok(if negative { -i } else { i })
            }
            _ => Err(self.unexpected("an integer")),
        }
    }

    pub(crate) fn program(&mut self) -> PResult<ProgramAst> {
        self.expect_kw("space")?;
        let mut space = vec![self.vardecl()?];
        while self.eat(&Tok::Comma) {
            space.push(self.vardecl()?);
        }
        let mut subs = Vec::new();
        while self.at_kw("sub") {
            subs.push(self.subdecl()?);
        }
        self.expect_kw("begin")?;
        let body = self.stmts()?;
        self.expect_kw("end")?;
        self.expect_eof()?;
        Ok(ProgramAst { space, subs, body })
    }

    pub(crate) fn vardecl(&mut self) -> PResult<VarDecl> {
        let (name, span) = self.ident()?;
        self.expect(Tok::Colon)?;
        let domain = self.domain()?;
        Ok(VarDecl { name, domain, span })
    }

    fn domain(&mut self) -> PResult<Domain> {
        let span = self.span();
        let d = if self.eat_kw("bool") {
            Domain::Bool
        } else if self.eat_kw("int") {
            self.expect(Tok::LBracket)?;
            let min = self.int_literal()?;
            self.expect(Tok::DotDot)?;
            let max = self.int_literal()?;
            self.expect(Tok::RBracket)?;
            Domain::Int { min, max }
        } else if self.eat_kw("enum") {
            self.expect(Tok::LBrace)?;
            let mut labels = vec![self.ident()?.0.to_string()];
            while self.eat(&Tok::Comma) {
                labels.push(self.ident()?.0.to_string());
            }
            self.expect(Tok::RBrace)?;
            Domain::Enum { labels }
        } else {
            return Err(self.unexpected("a type (`bool`, `int[..]` or `enum{..}`)"));
        };
        d.validate().map_err(|e| Diagnostic::syntax(span, e.to_string()))?;
        Ok(d)
    }

    fn subdecl(&mut self) -> PResult<SubDecl> {
        let span = self.span();
        self.expect_kw("sub")?;
        self.expect(Tok::LParen)?;
        let mut outs = vec![self.vardecl()?];
        while self.eat(&Tok::Comma) {
            outs.push(self.vardecl()?);
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::Assign)?;
        let (name, _) = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut ins = Vec::new();
        if *self.peek() != Tok::RParen {
            ins.push(self.vardecl()?);
            while self.eat(&Tok::Comma) {
                ins.push(self.vardecl()?);
            }
        }
        self.expect(Tok::RParen)?;
        let body = self.stmts()?;
        self.expect_kw("end")?;
        Ok(SubDecl { name, outs, ins, body, span })
    }

    fn stmts(&mut self) -> PResult<Stmt> {
        let span = self.span();
        let mut list = vec![self.stmt()?];
        while self.eat(&Tok::Semi) {
            list.push(self.stmt()?);
        }
        Ok(if list.len() == 1 { list.pop().expect("one") } else { Stmt { kind: StmtKind::Seq(list), span } })
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let span = self.span();
        let kind = if self.eat_kw("skip") {
            StmtKind::Skip
        } else if self.eat_kw("if") {
            let mut arms = vec![self.arm()?];
            while self.eat(&Tok::Box) {
                arms.push(self.arm()?);
            }
            self.expect_kw("fi")?;
            StmtKind::If(arms)
        } else if self.eat_kw("while") {
            let guard = self.expr()?;
            self.expect_kw("do")?;
            let body = self.stmts()?;
            self.expect_kw("od")?;
            StmtKind::While { guard, body: Box::new(body) }
        } else if self.eat_kw("choose") {
            let mut arms = vec![self.stmts()?];
            while self.eat(&Tok::Box) {
                arms.push(self.stmts()?);
            }
            self.expect_kw("endchoose")?;
            StmtKind::Choose(arms)
        } else if self.eat_kw("var") {
            let decl = self.vardecl()?;
            self.expect(Tok::Assign)?;
            let init = self.expr()?;
            self.expect_kw("in")?;
            let body = self.stmts()?;
            self.expect_kw("end")?;
            StmtKind::Var { decl, init, body: Box::new(body) }
        } else if self.eat(&Tok::LParen) {
            let outputs = self.idlist()?;
            self.expect(Tok::RParen)?;
            self.expect(Tok::Assign)?;
            let (sub, _) = self.ident()?;
            self.expect(Tok::LParen)?;
            let inputs = if *self.peek() == Tok::RParen { Vec::new() } else { self.exprlist()? };
            self.expect(Tok::RParen)?;
            StmtKind::Call { outputs, sub, inputs }
        } else if matches!(self.peek(), Tok::Ident(s) if !is_keyword(s)) {
            let targets = self.idlist()?;
            self.expect(Tok::Assign)?;
            let values = self.exprlist()?;
            StmtKind::Assign { targets, values }
        } else {
            return Err(self.unexpected("a statement"));
        };
        Ok(Stmt { kind, span })
    }

    fn arm(&mut self) -> PResult<(Expr, Stmt)> {
        let guard = self.expr()?;
        self.expect(Tok::Arrow)?;
        Ok((guard, self.stmts()?))
    }

    fn idlist(&mut self) -> PResult<Vec<VarName>> {
        let mut out = vec![self.ident()?.0];
        while self.eat(&Tok::Comma) {
            out.push(self.ident()?.0);
        }
        Ok(out)
    }

    fn exprlist(&mut self) -> PResult<Vec<Expr>> {
        let mut out = vec![self.expr()?];
        while self.eat(&Tok::Comma) {
            out.push(self.expr()?);
        }
        Ok(out)
    }

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.and_expr()?;
        while self.at_kw("or") {
            let span = self.bump().span;
            let rhs = self.and_expr()?;
            lhs = Expr { kind: ExprKind::Binary(BinOp::Or, Box::new(lhs), Box::new(rhs)), span };
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.not_expr()?;
        while self.at_kw("and") {
            let span = self.bump().span;
            let rhs = self.not_expr()?;
            lhs = Expr { kind: ExprKind::Binary(BinOp::And, Box::new(lhs), Box::new(rhs)), span };
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        let span = self.span();
        if self.eat_kw("not") {
            let inner = self.not_expr()?;
            return Ok(Expr { kind: ExprKind::Unary(UnOp::Not, Box::new(inner)), span });
        }
        self.cmp_expr()
    }

    fn cmp_expr(&mut self) -> PResult<Expr> {
        let lhs = self.add_expr()?;
        let op = match self.peek() {
            Tok::Eq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            _ => return Ok(lhs),
        };
        let span = self.bump().span;
        let rhs = self.add_expr()?;
        if matches!(self.peek(), Tok::Eq | Tok::Ne | Tok::Lt | Tok::Le | Tok::Gt | Tok::Ge) {
            return Err(Diagnostic::syntax(self.span(), "comparisons do not chain; add parentheses"));
        }
        Ok(Expr { kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span })
    }

    fn add_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let span = self.bump().span;
            let rhs = self.mul_expr()?;
            lhs = Expr { kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span };
        }
    }

    fn mul_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Ident(s) if s == "div" => BinOp::Div,
                Tok::Ident(s) if s == "mod" => BinOp::Mod,
                _ => return Ok(lhs),
            };
            let span = self.bump().span;
            let rhs = self.unary_expr()?;
            lhs = Expr { kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span };
        }
    }

    fn unary_expr(&mut self) -> PResult<Expr> {
        let span = self.span();
        if self.eat(&Tok::Minus) {
            // `-` directly followed by a literal is a negative literal.
            if let Tok::Int(i) = *self.peek() {
                self.bump();
                return Ok(Expr { kind: ExprKind::Int(-i), span });
            }
            let inner = self.unary_expr()?;
            return Ok(Expr { kind: ExprKind::Unary(UnOp::Neg, Box::new(inner)), span });
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Expr> {
        let span = self.span();
        let kind = match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                ExprKind::Int(i)
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                return Ok(e);
            }
            Tok::Primed(s) if !is_keyword(&s) => {
                self.bump();
                ExprKind::Post(VarName::new(s).expect("lexer yields valid identifiers"))
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                ExprKind::Bool(s == "true")
            }
            Tok::Ident(_) => {
                let (name, _) = self.ident()?;
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let args = if *self.peek() == Tok::RParen { Vec::new() } else { self.exprlist()? };
                    self.expect(Tok::RParen)?;
                    ExprKind::Call(name, args)
                } else {
                    ExprKind::Var(name)
                }
            }
            _ => return Err(self.unexpected("an expression")),
        };
        Ok(Expr { kind, span })
    }
}
