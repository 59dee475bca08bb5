use crate::diag::{Diagnostic, Span};

use super::ast::*;
use super::lexer::unescape;
use super::token::{Keyword, Token, TokenKind};

const MAX_DEPTH: usize = 100;

type PResult<T> = Result<T, Diagnostic>;

/// Parses a token stream produced by [`super::lexer::tokenize`].
///
/// Errors inside blocks and the SYSTEM section are recovered at the next
/// `;` or `}`, and at the next top-level keyword otherwise, so one call
/// reports as many independent problems as possible.
pub fn parse_program(tokens: &[Token]) -> Result<Program, Vec<Diagnostic>> {
    let mut p = Parser::new(tokens);
    let program = p.program();
    if p.diags.is_empty() {
        Ok(program)
    } else {
        Err(p.diags)
    }
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    eof: Token,
    depth: usize,
    diags: Vec<Diagnostic>,
}

fn is_item_start(t: &Token) -> bool {
    matches!(
        t.kind,
        TokenKind::Keyword(
            Keyword::Pure | Keyword::Logical | Keyword::Physical | Keyword::Import | Keyword::System
        )
    )
}

impl<'t> Parser<'t> {
    fn new(tokens: &'t [Token]) -> Self {
        let end = tokens.last().map(|t| t.span).unwrap_or_default();
        let eof = Token {
            kind: TokenKind::Eof,
            lexeme: String::new(),
            span: Span::new(end.file, end.end, end.end),
            leading_trivia: String::new(),
        };
        Parser {
            tokens,
            pos: 0,
            eof,
            depth: 0,
            diags: Vec::new(),
        }
    }

    fn peek(&self) -> &Token {
        self.peek_at(0)
    }

    fn peek_at(&self, n: usize) -> &Token {
        self.tokens.get(self.pos + n).unwrap_or(&self.eof)
    }

    fn at_eof(&self) -> bool {
        self.peek().kind == TokenKind::Eof
    }

    fn bump(&mut self) -> &Token {
        let i = self.pos;
        if i < self.tokens.len() && self.tokens[i].kind != TokenKind::Eof {
            self.pos += 1;
        }
        self.tokens.get(i).unwrap_or(&self.eof)
    }

    fn prev_span(&self) -> Span {
        if self.pos == 0 {
            self.peek().span
        } else {
            self.tokens[self.pos - 1].span
        }
    }

    /// Span of the current token, widened to one byte at end of input so the
    /// diagnostic always covers something.
    fn error_here(&self, expected: &str) -> Diagnostic {
        let t = self.peek();
        let span = if t.kind == TokenKind::Eof && self.pos > 0 {
            self.tokens[self.pos - 1].span
        } else {
            t.span
        };
        Diagnostic::error("E-PARSE", format!("expected {expected}, found {}", t.describe())).at(span)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.peek().is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<Span> {
        if self.peek().is_punct(p) {
            Ok(self.bump().span)
        } else {
            Err(self.error_here(&format!("`{p}`")))
        }
    }

    fn expect_op(&mut self, op: &str) -> PResult<Span> {
        if self.peek().is_op(op) {
            Ok(self.bump().span)
        } else {
            Err(self.error_here(&format!("`{op}`")))
        }
    }

    fn expect_kw(&mut self, kw: Keyword) -> PResult<Span> {
        if self.peek().is_kw(kw) {
            Ok(self.bump().span)
        } else {
            Err(self.error_here(&format!("`{}`", kw.as_str())))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<Ident> {
        if self.peek().kind == TokenKind::Ident {
            let t = self.bump();
            Ok(Ident::new(t.lexeme.clone(), t.span))
        } else {
            Err(self.error_here(what))
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            Err(Diagnostic::error("E-PARSE", "nesting too deep").at(self.peek().span))
        } else {
            Ok(())
        }
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    // ----- items -----

    fn program(&mut self) -> Program {
        let mut prog = Program::default();
        while !self.at_eof() {
            let start = self.pos;
            if let Err(d) = self.item(&mut prog) {
                self.diags.push(d);
                self.depth = 0;
                if self.pos == start {
                    self.bump();
                }
                while !self.at_eof() && !is_item_start(self.peek()) {
                    self.bump();
                }
            }
        }
        prog
    }

    fn item(&mut self, prog: &mut Program) -> PResult<()> {
        let t = self.peek();
        match t.kind {
            TokenKind::Keyword(Keyword::Pure) => {
                let f = self.pure_fn()?;
                prog.pure_fns.push(f);
            }
            TokenKind::Keyword(Keyword::Logical) => {
                let f = self.logical_fn()?;
                prog.logical_fns.push(f);
            }
            TokenKind::Keyword(Keyword::Physical) => {
                let f = self.physical_fn()?;
                prog.physical_fns.push(f);
            }
            TokenKind::Keyword(Keyword::Import) => {
                let i = self.import()?;
                prog.imports.push(i);
            }
            TokenKind::Keyword(Keyword::System) => {
                let span = t.span;
                let sys = self.system()?;
                if prog.system.is_some() {
                    self.diags
                        .push(Diagnostic::error("E-DUP", "duplicate SYSTEM section").at(span));
                } else {
                    prog.system = Some(sys);
                }
            }
            _ => {
                return Err(self.error_here(
                    "`pure`, `logical`, `physical`, `import` or `SYSTEM`",
                ))
            }
        }
        Ok(())
    }

    fn params(&mut self) -> PResult<Vec<Param>> {
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if !self.eat_punct(")") {
            loop {
                let ty = self.type_expr()?;
                let name = self.ident("parameter name")?;
                params.push(Param { ty, name });
                if self.eat_punct(")") {
                    break;
                }
                self.expect_punct(",").map_err(|_| self.error_here("`,` or `)`"))?;
            }
        }
        Ok(params)
    }

    fn output_tuple(&mut self) -> PResult<Vec<Expr>> {
        self.expect_op("->")?;
        self.expect_punct("(")?;
        let mut outs = Vec::new();
        if !self.eat_punct(")") {
            loop {
                outs.push(self.expr()?);
                if self.eat_punct(")") {
                    break;
                }
                self.expect_punct(",").map_err(|_| self.error_here("`,` or `)`"))?;
            }
        }
        Ok(outs)
    }

    fn pure_fn(&mut self) -> PResult<PureFn> {
        self.expect_kw(Keyword::Pure)?;
        let name = self.ident("function name")?;
        let params = self.params()?;
        self.expect_op("->")?;
        self.expect_punct("(")?;
        let body = self.expr()?;
        self.expect_punct(")")?;
        Ok(PureFn { name, params, body })
    }

    fn logical_fn(&mut self) -> PResult<LogicalFn> {
        self.expect_kw(Keyword::Logical)?;
        let name = self.ident("function name")?;
        let params = self.params()?;
        self.expect_kw(Keyword::Init)?;
        let init = self.block()?;
        self.expect_kw(Keyword::Then)?;
        let then = self.block()?;
        let outputs = self.output_tuple()?;
        Ok(LogicalFn {
            name,
            params,
            init,
            then,
            outputs,
        })
    }

    fn physical_fn(&mut self) -> PResult<PhysicalFn> {
        self.expect_kw(Keyword::Physical)?;
        let name = self.ident("function name")?;
        let params = self.params()?;
        let outputs = self.output_tuple()?;
        Ok(PhysicalFn {
            name,
            params,
            outputs,
        })
    }

    fn import(&mut self) -> PResult<Import> {
        let start = self.expect_kw(Keyword::Import)?;
        if self.peek().kind != TokenKind::StrLit {
            return Err(self.error_here("file path string"));
        }
        let path = unescape(&self.bump().lexeme);
        self.expect_kw(Keyword::As)?;
        let alias = self.ident("import alias")?;
        let end = self.expect_punct(";")?;
        Ok(Import {
            path,
            alias,
            loc: Loc(start.to(end)),
        })
    }

    // ----- SYSTEM -----

    fn system(&mut self) -> PResult<SystemSection> {
        let start = self.expect_kw(Keyword::System)?;
        self.expect_punct("{")?;
        let mut sys = SystemSection::default();
        loop {
            if self.peek().is_punct("}") {
                let end = self.bump().span;
                sys.loc = Loc(start.to(end));
                return Ok(sys);
            }
            if self.at_eof() {
                return Err(self.error_here("`}` closing SYSTEM"));
            }
            let before = self.pos;
            if let Err(d) = self.system_item(&mut sys) {
                self.diags.push(d);
                if self.pos == before {
                    self.bump();
                }
                self.recover_stmt();
            }
        }
    }

    fn system_item(&mut self, sys: &mut SystemSection) -> PResult<()> {
        let t = self.peek();
        match t.kind {
            TokenKind::Keyword(Keyword::Link) => {
                self.bump();
                let child = self.ident("instance name")?;
                self.expect_kw(Keyword::To)?;
                let parent = self.ident("instance name")?;
                self.expect_punct(";")?;
                sys.links.push(LinkDecl { child, parent });
            }
            TokenKind::Keyword(k @ (Keyword::Splitplug | Keyword::Mergeplug)) => {
                self.bump();
                self.expect_punct("(")?;
                let signal = self.signal_ref()?;
                self.expect_punct(",")?;
                let function = self.ident("plug function name")?;
                self.expect_punct(")")?;
                self.expect_punct(";")?;
                let decl = PlugDecl { signal, function };
                if k == Keyword::Splitplug {
                    sys.splitplugs.push(decl);
                } else {
                    sys.mergeplugs.push(decl);
                }
            }
            TokenKind::Ident if self.peek_at(1).kind == TokenKind::Ident => {
                let type_name = self.ident("block name")?;
                let name = self.ident("instance name")?;
                self.expect_punct(";")?;
                sys.instances.push(Instance { type_name, name });
            }
            TokenKind::Ident if self.peek_at(1).is_punct(".") => {
                let target = self.ident("instance name")?;
                self.expect_punct(".")?;
                self.expect_kw(Keyword::In)?;
                self.expect_punct("(")?;
                let mut sources = Vec::new();
                if !self.eat_punct(")") {
                    loop {
                        sources.push(self.signal_ref()?);
                        if self.eat_punct(")") {
                            break;
                        }
                        self.expect_punct(",").map_err(|_| self.error_here("`,` or `)`"))?;
                    }
                }
                self.expect_punct(";")?;
                sys.input_wirings.push(InputWiring { target, sources });
            }
            _ => {
                return Err(self.error_here(
                    "instance declaration, `link`, `splitplug`, `mergeplug` or `<instance>.in(...)`",
                ))
            }
        }
        Ok(())
    }

    fn signal_ref(&mut self) -> PResult<SignalRef> {
        let instance = self.ident("instance name")?;
        self.expect_punct(".")?;
        let out = self.peek();
        if !(out.kind == TokenKind::Ident && out.lexeme == "out") {
            return Err(self.error_here("`out`"));
        }
        let mut end = self.bump().span;
        let mut port = None;
        if self.eat_punct("[") {
            let t = self.peek();
            let k = match t.kind {
                TokenKind::IntLit => parse_int(&t.lexeme).and_then(|v| u32::try_from(v).ok()),
                _ => None,
            };
            let Some(k) = k else {
                return Err(self.error_here("non-negative port index"));
            };
            self.bump();
            end = self.expect_punct("]")?;
            port = Some(k);
        }
        Ok(SignalRef {
            loc: Loc(instance.span().to(end)),
            instance,
            port,
        })
    }

    // ----- statements -----

    fn recover_stmt(&mut self) {
        while !self.at_eof() {
            if self.peek().is_punct(";") {
                self.bump();
                return;
            }
            if self.peek().is_punct("}") {
                return;
            }
            self.bump();
        }
    }

    fn block(&mut self) -> PResult<Block> {
        let start = self.expect_punct("{")?;
        self.enter()?;
        let mut stmts = Vec::new();
        loop {
            if self.peek().is_punct("}") {
                let end = self.bump().span;
                self.leave();
                return Ok(Block {
                    stmts,
                    loc: Loc(start.to(end)),
                });
            }
            if self.at_eof() {
                return Err(self.error_here("`}`"));
            }
            let before = self.pos;
            let depth = self.depth;
            match self.stmt() {
                Ok(s) => stmts.push(s),
                Err(d) => {
                    self.diags.push(d);
                    self.depth = depth;
                    if self.pos == before {
                        self.bump();
                    }
                    self.recover_stmt();
                }
            }
        }
    }

    fn starts_decl(&self) -> bool {
        let t = self.peek();
        match t.kind {
            TokenKind::Keyword(Keyword::Int | Keyword::Float | Keyword::Bool) => true,
            TokenKind::Ident => {
                let n = self.peek_at(1);
                n.kind == TokenKind::Ident || (n.is_punct("[") && self.peek_at(2).is_punct("]"))
            }
            _ => false,
        }
    }

    fn type_expr(&mut self) -> PResult<TypeExpr> {
        let t = self.peek();
        let base = match t.kind {
            TokenKind::Keyword(Keyword::Int) => BaseType::Int,
            TokenKind::Keyword(Keyword::Float) => BaseType::Float,
            TokenKind::Keyword(Keyword::Bool) => BaseType::Bool,
            TokenKind::Ident => BaseType::Named(t.lexeme.clone()),
            _ => return Err(self.error_here("type")),
        };
        let mut span = self.bump().span;
        let mut array_depth = 0;
        while self.peek().is_punct("[") && self.peek_at(1).is_punct("]") {
            self.bump();
            span = span.to(self.bump().span);
            array_depth += 1;
        }
        Ok(TypeExpr {
            base,
            array_depth,
            loc: Loc(span),
        })
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let start = self.peek().span;
        let t = self.peek();
        let kind = if t.is_kw(Keyword::If) {
            return self.if_stmt();
        } else if t.is_kw(Keyword::For) {
            self.bump();
            let var = self.ident("loop variable")?;
            self.expect_kw(Keyword::In)?;
            let iter = self.expr()?;
            let body = self.block()?;
            StmtKind::For { var, iter, body }
        } else if self.starts_decl() {
            let ty = self.type_expr()?;
            let name = self.ident("variable name")?;
            let init = if self.peek().is_op("=") {
                self.bump();
                Some(self.expr()?)
            } else {
                None
            };
            self.expect_punct(";")?;
            StmtKind::Decl { ty, name, init }
        } else {
            let e = self.expr()?;
            if self.peek().is_op("=") {
                let ExprKind::Var(name) = &e.kind else {
                    return Err(Diagnostic::error("E-PARSE", "left side of `=` must be a variable")
                        .at(e.span()));
                };
                let target = Ident::new(name.clone(), e.span());
                self.bump();
                let value = self.expr()?;
                self.expect_punct(";")?;
                StmtKind::Assign { target, value }
            } else {
                self.expect_punct(";")?;
                StmtKind::Expr(e)
            }
        };
        Ok(Stmt {
            kind,
            loc: Loc(start.to(self.prev_span())),
        })
    }

    fn if_stmt(&mut self) -> PResult<Stmt> {
        let start = self.expect_kw(Keyword::If)?;
        self.enter()?;
        let cond = self.expr()?;
        let then_block = self.block()?;
        let else_branch = if self.peek().is_kw(Keyword::Else) {
            self.bump();
            if self.peek().is_kw(Keyword::If) {
                Some(Else::If(Box::new(self.if_stmt()?)))
            } else {
                Some(Else::Block(self.block()?))
            }
        } else {
            None
        };
        self.leave();
        Ok(Stmt {
            kind: StmtKind::If {
                cond,
                then_block,
                else_branch,
            },
            loc: Loc(start.to(self.prev_span())),
        })
    }

    // ----- expressions -----

    pub fn expr(&mut self) -> PResult<Expr> {
        self.enter()?;
        let e = self.binary(1);
        self.leave();
        e
    }

    /// Precedence climbing over left-associative binary operators.
    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let t = self.peek();
            if t.kind != TokenKind::Operator {
                return Ok(lhs);
            }
            let Some(op) = BinOp::from_symbol(&t.lexeme) else {
                return Ok(lhs);
            };
            let prec = binop_prec(op);
            if prec < min_prec {
                return Ok(lhs);
            }
            self.bump();
            let rhs = self.binary(prec + 1)?;
            let span = lhs.span().to(rhs.span());
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        let t = self.peek();
        let op = if t.is_op("-") {
            Some(UnaryOp::Neg)
        } else if t.is_op("!") {
            Some(UnaryOp::Not)
        } else {
            None
        };
        match op {
            Some(op) => {
                let start = self.bump().span;
                self.enter()?;
                let operand = self.unary();
                self.leave();
                let operand = operand?;
                let span = start.to(operand.span());
                Ok(Expr::new(ExprKind::Unary(op, Box::new(operand)), span))
            }
            None => self.postfix(),
        }
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        loop {
            if self.peek().is_punct("[") {
                self.bump();
                let index = self.expr()?;
                let end = self.expect_punct("]")?;
                let span = e.span().to(end);
                e = Expr::new(ExprKind::Index(Box::new(e), Box::new(index)), span);
            } else if self.peek().is_punct(".") {
                self.bump();
                let field = self.ident("field name")?;
                let span = e.span().to(field.span());
                e = Expr::new(ExprKind::Field(Box::new(e), field), span);
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let t = self.peek().clone();
        match t.kind {
            TokenKind::IntLit => {
                self.bump();
                let v = parse_int(&t.lexeme).ok_or_else(|| {
                    Diagnostic::error("E-PARSE", "integer literal out of range").at(t.span)
                })?;
                Ok(Expr::new(ExprKind::Int(v), t.span))
            }
            TokenKind::FloatLit => {
                self.bump();
                let v = t
                    .lexeme
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        Diagnostic::error("E-PARSE", "float literal out of range").at(t.span)
                    })?;
                Ok(Expr::new(ExprKind::Float(v), t.span))
            }
            TokenKind::StrLit => {
                self.bump();
                Ok(Expr::new(ExprKind::Str(unescape(&t.lexeme)), t.span))
            }
            TokenKind::Ident => {
                self.bump();
                if self.peek().is_punct("(") {
                    self.bump();
                    let mut args = Vec::new();
                    let end = if self.peek().is_punct(")") {
                        self.bump().span
                    } else {
                        loop {
                            args.push(self.expr()?);
                            if self.peek().is_punct(")") {
                                break self.bump().span;
                            }
                            self.expect_punct(",").map_err(|_| self.error_here("`,` or `)`"))?;
                        }
                    };
                    let callee = Ident::new(t.lexeme.clone(), t.span);
                    return Ok(Expr::new(ExprKind::Call(callee, args), t.span.to(end)));
                }
                let kind = match t.lexeme.as_str() {
                    "true" => ExprKind::Bool(true),
                    "false" => ExprKind::Bool(false),
                    name => ExprKind::Var(name.to_string()),
                };
                Ok(Expr::new(kind, t.span))
            }
            TokenKind::Punct if t.lexeme == "(" => {
                self.bump();
                let inner = self.expr()?;
                let end = self.expect_punct(")")?;
                Ok(Expr::new(ExprKind::Paren(Box::new(inner)), t.span.to(end)))
            }
            _ => Err(self.error_here("expression")),
        }
    }
}

/// Binding strength, loosest first: `||`, `&&`, `&`, comparisons, shifts,
/// additive, multiplicative.
pub fn binop_prec(op: BinOp) -> u8 {
    match op {
        BinOp::Or => 1,
        BinOp::And => 2,
        BinOp::BitAnd => 3,
        BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
        BinOp::Shl | BinOp::Shr => 5,
        BinOp::Add | BinOp::Sub => 6,
        BinOp::Mul | BinOp::Div | BinOp::Rem => 7,
    }
}

fn parse_int(lexeme: &str) -> Option<i64> {
    match lexeme.strip_prefix("0x").or_else(|| lexeme.strip_prefix("0X")) {
        Some(hex) => i64::from_str_radix(hex, 16).ok(),
        None => lexeme.parse().ok(),
    }
}
