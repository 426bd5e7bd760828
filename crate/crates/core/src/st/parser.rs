//! Recursive-descent parser producing [`SourceUnit`]s.

use super::ast::*;
use super::lexer::{lex, lex_at, LexError, PragmaKeyword, PragmaToken, Token, TokenKind};
use super::Span;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("expected {}, found {found}", expected.join(" or "))]
    Syntax {
        span: Span,
        expected: Vec<String>,
        found: String,
    },
}

impl ParseError {
    pub fn span(&self) -> Span {
        match self {
            ParseError::Lex(e) => e.span(),
            ParseError::Syntax { span, .. } => *span,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ParseError::Lex(_) => "lex-error",
            ParseError::Syntax { .. } => "syntax-error",
        }
    }
}

type PResult<T> = Result<T, ParseError>;

/// Lexes and parses one `.scl` file.
pub fn parse_source(path: &str, text: &str) -> PResult<SourceUnit> {
    let tokens = lex(text)?;
    parse(path, text, tokens)
}

/// Parses a token sequence produced by [`lex`].
pub fn parse(path: &str, text: &str, tokens: Vec<Token>) -> PResult<SourceUnit> {
    let mut p = Parser::new(tokens, end_of(text));
    let items = p.unit()?;
    let has_fb = items.iter().any(|i| matches!(i, Item::FunctionBlock(_)));
    let has_db = items.iter().any(|i| matches!(i, Item::DataBlock(_)));
    let kind = match (has_fb, has_db) {
        (true, true) => UnitKind::Mixed,
        (false, true) => UnitKind::DataBlock,
        _ => UnitKind::FunctionBlock,
    };
    Ok(SourceUnit {
        path: path.to_string(),
        text: text.to_string(),
        kind,
        items,
    })
}

/// Parses a standalone expression (pragma bodies, case files, requirement guards).
pub fn parse_expr(text: &str) -> PResult<Expr> {
    parse_expr_at(text, Span::new(1, 1))
}

pub fn parse_expr_at(text: &str, start: Span) -> PResult<Expr> {
    let tokens = lex_at(text, start)?;
    let end = advance_span(start, text);
    let mut p = Parser::new(tokens, end);
    let expr = p.expr()?;
    p.expect_end()?;
    Ok(expr)
}

fn advance_span(start: Span, text: &str) -> Span {
    text.chars().fold(start, |s, c| {
        if c == '\n' {
            Span::new(s.line + 1, 1)
        } else {
            Span::new(s.line, s.col + 1)
        }
    })
}

fn end_of(text: &str) -> Span {
    let line = text.lines().count().max(1) as u32;
    let col = text.lines().last().map(|l| l.chars().count()).unwrap_or(0) as u32 + 1;
    Span::new(line, col)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: Span,
    ranges: Vec<RangePragma>,
    assert_count: usize,
    assume_count: usize,
}

impl Parser {
    fn new(tokens: Vec<Token>, end: Span) -> Self {
        Parser {
            tokens,
            pos: 0,
            end,
            ranges: Vec::new(),
            assert_count: 0,
            assume_count: 0,
        }
    }

    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn peek_at(&self, offset: usize) -> Option<&TokenKind> {
        self.tokens.get(self.pos + offset).map(|t| &t.kind)
    }

    fn span(&self) -> Span {
        self.tokens.get(self.pos).map(|t| t.span).unwrap_or(self.end)
    }

    fn advance(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.pos).cloned();
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn at(&self, kind: &TokenKind) -> bool {
        self.peek() == Some(kind)
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.at(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        Err(ParseError::Syntax {
            span: self.span(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self
                .peek()
                .map(TokenKind::describe)
                .unwrap_or_else(|| "end of input".into()),
        })
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> PResult<Span> {
        if self.at(&kind) {
            let span = self.span();
            self.pos += 1;
            Ok(span)
        } else {
            self.error(&[what])
        }
    }

    fn expect_end(&self) -> PResult<()> {
        if self.peek().is_some() {
            self.error(&["end of expression"])
        } else {
            Ok(())
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(TokenKind::Ident(name)) => {
                let name = name.clone();
                self.pos += 1;
                Ok(name)
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn unit(&mut self) -> PResult<Vec<Item>> {
        let mut items = Vec::new();
        loop {
            match self.peek() {
                Some(TokenKind::FunctionBlock) => items.push(Item::FunctionBlock(self.function_block()?)),
                Some(TokenKind::DataBlock) => items.push(Item::DataBlock(self.data_block()?)),
                None if !items.is_empty() => return Ok(items),
                _ => return self.error(&["`FUNCTION_BLOCK`", "`DATA_BLOCK`"]),
            }
        }
    }

    fn function_block(&mut self) -> PResult<FunctionBlockDecl> {
        let span = self.expect(TokenKind::FunctionBlock, "`FUNCTION_BLOCK`")?;
        let name = self.ident()?;
        self.ranges.clear();
        self.assert_count = 0;
        self.assume_count = 0;

        let mut sections = Vec::new();
        loop {
            let kind = match self.peek() {
                Some(TokenKind::VarInput) => VarKind::Input,
                Some(TokenKind::VarOutput) => VarKind::Output,
                Some(TokenKind::Var) => VarKind::Local,
                Some(TokenKind::Pragma(p)) if p.kind == PragmaKeyword::Range => {
                    let tok = self.advance().expect("peeked");
                    self.range_pragma(tok)?;
                    continue;
                }
                _ => break,
            };
            self.pos += 1;
            sections.push(self.var_section(kind)?);
        }
        self.eat(&TokenKind::Begin);
        let body = self.stmt_list(&[TokenKind::EndFunctionBlock])?;
        self.expect(TokenKind::EndFunctionBlock, "`END_FUNCTION_BLOCK`")?;
        Ok(FunctionBlockDecl {
            name,
            sections,
            ranges: std::mem::take(&mut self.ranges),
            body,
            span,
        })
    }

    fn var_section(&mut self, kind: VarKind) -> PResult<VarSection> {
        let mut decls = Vec::new();
        loop {
            match self.peek() {
                Some(TokenKind::EndVar) => {
                    self.pos += 1;
                    self.eat(&TokenKind::Semi);
                    return Ok(VarSection { kind, decls });
                }
                Some(TokenKind::Pragma(p)) if p.kind == PragmaKeyword::Range => {
                    let tok = self.advance().expect("peeked");
                    self.range_pragma(tok)?;
                }
                Some(TokenKind::Ident(_)) => decls.extend(self.var_decl()?),
                _ => return self.error(&["variable declaration", "`END_VAR`"]),
            }
        }
    }

    fn var_decl(&mut self) -> PResult<Vec<VarDecl>> {
        let mut names = vec![(self.span(), self.ident()?)];
        while self.eat(&TokenKind::Comma) {
            names.push((self.span(), self.ident()?));
        }
        self.expect(TokenKind::Colon, "`:`")?;
        let ty = match self.peek() {
            Some(TokenKind::Bool) => TypeRef::Bool,
            Some(TokenKind::IntType) => TypeRef::Int,
            Some(TokenKind::TimeType) => TypeRef::Time,
            Some(TokenKind::Ident(name)) => TypeRef::Block(name.clone()),
            _ => return self.error(&["type name"]),
        };
        self.pos += 1;
        let init = if self.eat(&TokenKind::Assign) {
            Some(self.expr()?)
        } else {
            None
        };
        self.expect(TokenKind::Semi, "`;`")?;
        Ok(names
            .into_iter()
            .map(|(span, name)| VarDecl {
                name,
                ty: ty.clone(),
                init: init.clone(),
                span,
            })
            .collect())
    }

    fn data_block(&mut self) -> PResult<DataBlockDecl> {
        let span = self.expect(TokenKind::DataBlock, "`DATA_BLOCK`")?;
        let name = self.ident()?;
        let block_type = self.ident()?;
        let mut inits = Vec::new();
        if self.eat(&TokenKind::Begin) {
            while let Some(TokenKind::Ident(_)) = self.peek() {
                let field = self.ident()?;
                self.expect(TokenKind::Assign, "`:=`")?;
                let value = self.expr()?;
                self.expect(TokenKind::Semi, "`;`")?;
                inits.push((field, value));
            }
        }
        self.expect(TokenKind::EndDataBlock, "`END_DATA_BLOCK`")?;
        Ok(DataBlockDecl {
            name,
            block_type,
            inits,
            span,
        })
    }

    fn stmt_list(&mut self, terminators: &[TokenKind]) -> PResult<Vec<Stmt>> {
        let mut stmts = Vec::new();
        loop {
            match self.peek() {
                Some(t) if terminators.contains(t) => return Ok(stmts),
                None => {
                    let expected: Vec<String> = terminators.iter().map(TokenKind::describe).collect();
                    let expected: Vec<&str> = expected.iter().map(String::as_str).collect();
                    return self.error(&expected);
                }
                Some(TokenKind::Semi) => {
                    self.pos += 1;
                }
                _ => {
                    if let Some(stmt) = self.stmt()? {
                        stmts.push(stmt);
                    }
                }
            }
        }
    }

    fn stmt(&mut self) -> PResult<Option<Stmt>> {
        let span = self.span();
        match self.peek() {
            Some(TokenKind::If) => self.if_stmt().map(Some),
            Some(TokenKind::Pragma(_)) => {
                let tok = self.advance().expect("peeked");
                let TokenKind::Pragma(p) = tok.kind else { unreachable!() };
                if p.kind == PragmaKeyword::Range {
                    self.range_pragma(Token {
                        kind: TokenKind::Pragma(p),
                        span,
                    })?;
                    return Ok(None);
                }
                let pragma = self.property_pragma(p, span)?;
                Ok(Some(Stmt::new(StmtKind::Pragma(pragma), span)))
            }
            Some(TokenKind::Ident(_)) => {
                let callee = self.var_ref()?;
                if self.eat(&TokenKind::Assign) {
                    let value = self.expr()?;
                    self.expect(TokenKind::Semi, "`;`")?;
                    return Ok(Some(Stmt::new(StmtKind::Assign { target: callee, value }, span)));
                }
                if self.eat(&TokenKind::LParen) {
                    let mut args = Vec::new();
                    if !self.at(&TokenKind::RParen) {
                        loop {
                            let name = self.ident()?;
                            self.expect(TokenKind::Assign, "`:=`")?;
                            let value = self.expr()?;
                            args.push(NamedArg { name, value });
                            if !self.eat(&TokenKind::Comma) {
                                break;
                            }
                        }
                    }
                    self.expect(TokenKind::RParen, "`)`")?;
                    self.expect(TokenKind::Semi, "`;`")?;
                    return Ok(Some(Stmt::new(StmtKind::Call { callee, args }, span)));
                }
                self.error(&["`:=`", "`(`"])
            }
            _ => self.error(&["statement"]),
        }
    }

    fn if_stmt(&mut self) -> PResult<Stmt> {
        let span = self.expect(TokenKind::If, "`IF`")?;
        let cond = self.expr()?;
        self.expect(TokenKind::Then, "`THEN`")?;
        let then_branch = self.stmt_list(&[TokenKind::Elsif, TokenKind::Else, TokenKind::EndIf])?;
        let else_branch = self.if_tail()?;
        Ok(Stmt::new(
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            },
            span,
        ))
    }

    /// Everything after a THEN-branch; ELSIF becomes a nested IF in the else branch.
    fn if_tail(&mut self) -> PResult<Vec<Stmt>> {
        let span = self.span();
        match self.peek() {
            Some(TokenKind::Elsif) => {
                self.pos += 1;
                let cond = self.expr()?;
                self.expect(TokenKind::Then, "`THEN`")?;
                let then_branch = self.stmt_list(&[TokenKind::Elsif, TokenKind::Else, TokenKind::EndIf])?;
                let else_branch = self.if_tail()?;
                Ok(vec![Stmt::new(
                    StmtKind::If {
                        cond,
                        then_branch,
                        else_branch,
                    },
                    span,
                )])
            }
            Some(TokenKind::Else) => {
                self.pos += 1;
                let stmts = self.stmt_list(&[TokenKind::EndIf])?;
                self.close_if()?;
                Ok(stmts)
            }
            Some(TokenKind::EndIf) => {
                self.close_if()?;
                Ok(Vec::new())
            }
            _ => self.error(&["`ELSIF`", "`ELSE`", "`END_IF`"]),
        }
    }

    fn close_if(&mut self) -> PResult<()> {
        self.expect(TokenKind::EndIf, "`END_IF`")?;
        self.expect(TokenKind::Semi, "`;`")?;
        Ok(())
    }

    fn property_pragma(&mut self, p: PragmaToken, span: Span) -> PResult<Pragma> {
        let kind = match p.kind {
            PragmaKeyword::Assert => PragmaKind::Assert,
            PragmaKeyword::Assume => PragmaKind::Assume,
            PragmaKeyword::Range => unreachable!("handled by caller"),
        };
        let expr = parse_expr_at(&p.body, p.body_span)?;
        let name = match p.name {
            Some(name) => name,
            None => match kind {
                PragmaKind::Assert => {
                    self.assert_count += 1;
                    format!("assert_{}", self.assert_count)
                }
                PragmaKind::Assume => {
                    self.assume_count += 1;
                    format!("assume_{}", self.assume_count)
                }
            },
        };
        Ok(Pragma { kind, name, expr, span })
    }

    /// `//#RANGE(var, lo, hi)`
    fn range_pragma(&mut self, tok: Token) -> PResult<()> {
        let TokenKind::Pragma(p) = tok.kind else { unreachable!() };
        let tokens = lex_at(&p.body, p.body_span)?;
        let mut inner = Parser::new(tokens, p.body_span);
        let var = inner.ident()?;
        inner.expect(TokenKind::Comma, "`,`")?;
        let lo = inner.signed_int()?;
        inner.expect(TokenKind::Comma, "`,`")?;
        let hi = inner.signed_int()?;
        inner.expect_end()?;
        self.ranges.push(RangePragma {
            var,
            lo,
            hi,
            span: tok.span,
        });
        Ok(())
    }

    fn signed_int(&mut self) -> PResult<i64> {
        let negative = self.eat(&TokenKind::Minus);
        match self.peek() {
            Some(TokenKind::Int(v)) => {
                let v = *v;
                self.pos += 1;
                Ok(if negative { -v } else { v })
            }
            _ => self.error(&["integer"]),
        }
    }

    fn var_ref(&mut self) -> PResult<VarRef> {
        let mut parts = vec![self.ident()?];
        while self.at(&TokenKind::Dot) && matches!(self.peek_at(1), Some(TokenKind::Ident(_))) {
            self.pos += 1;
            parts.push(self.ident()?);
        }
        Ok(VarRef { parts })
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        self.expr_bp(1)
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.peek()? {
            TokenKind::Implies => BinOp::Implies,
            TokenKind::Or => BinOp::Or,
            TokenKind::Xor => BinOp::Xor,
            TokenKind::And => BinOp::And,
            TokenKind::Eq => BinOp::Eq,
            TokenKind::Ne => BinOp::Ne,
            TokenKind::Lt => BinOp::Lt,
            TokenKind::Le => BinOp::Le,
            TokenKind::Gt => BinOp::Gt,
            TokenKind::Ge => BinOp::Ge,
            TokenKind::Plus => BinOp::Add,
            TokenKind::Minus => BinOp::Sub,
            TokenKind::Star => BinOp::Mul,
            TokenKind::Slash => BinOp::Div,
            _ => return None,
        })
    }

    fn expr_bp(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.pos += 1;
            // implication is right-associative, everything else left
            let next = if op == BinOp::Implies { prec } else { prec + 1 };
            let rhs = self.expr_bp(next)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat(&TokenKind::Not) {
            return Ok(Expr::Unary(UnOp::Not, Box::new(self.unary()?)));
        }
        if self.eat(&TokenKind::Minus) {
            return Ok(Expr::Unary(UnOp::Neg, Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        let expr = match self.peek() {
            Some(TokenKind::True) => Expr::Bool(true),
            Some(TokenKind::False) => Expr::Bool(false),
            Some(TokenKind::Int(v)) => Expr::Int(*v),
            Some(TokenKind::Time(ms)) => Expr::Time(*ms),
            Some(TokenKind::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(TokenKind::RParen, "`)`")?;
                return Ok(inner);
            }
            Some(TokenKind::Ident(_)) => return Ok(Expr::Var(self.var_ref()?)),
            _ => return self.error(&["expression"]),
        };
        self.pos += 1;
        Ok(expr)
    }
}
