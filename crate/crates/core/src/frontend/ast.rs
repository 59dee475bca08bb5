//! Surface syntax tree.
//!
//! Source locations are stored as [`Loc`], which compares equal to every
//! other `Loc`, so `==` on any node is structural equality.

use crate::diag::Span;

#[derive(Debug, Clone, Copy, Default)]
pub struct Loc(pub Span);

impl PartialEq for Loc {
    fn eq(&self, _: &Loc) -> bool {
        true
    }
}

impl From<Span> for Loc {
    fn from(s: Span) -> Loc {
        Loc(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ident {
    pub name: String,
    pub loc: Loc,
}

impl Ident {
    pub fn new(name: impl Into<String>, span: Span) -> Ident {
        Ident {
            name: name.into(),
            loc: Loc(span),
        }
    }

    pub fn span(&self) -> Span {
        self.loc.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BaseType {
    Int,
    Float,
    Bool,
    Named(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeExpr {
    pub base: BaseType,
    pub array_depth: u32,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub ty: TypeExpr,
    pub name: Ident,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Not,
}

impl UnaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Not => "!",
        }
    }
}

pub use crate::ir::BinOp;

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(String),
    Var(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Ident, Vec<Expr>),
    Index(Box<Expr>, Box<Expr>),
    Field(Box<Expr>, Ident),
    Paren(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub loc: Loc,
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Expr {
        Expr {
            kind,
            loc: Loc(span),
        }
    }

    pub fn span(&self) -> Span {
        self.loc.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Decl {
        ty: TypeExpr,
        name: Ident,
        init: Option<Expr>,
    },
    Assign {
        target: Ident,
        value: Expr,
    },
    If {
        cond: Expr,
        then_block: Block,
        else_branch: Option<Else>,
    },
    For {
        var: Ident,
        iter: Expr,
        body: Block,
    },
    Expr(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Else {
    Block(Block),
    If(Box<Stmt>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Block {
    pub stmts: Vec<Stmt>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureFn {
    pub name: Ident,
    pub params: Vec<Param>,
    pub body: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogicalFn {
    pub name: Ident,
    pub params: Vec<Param>,
    pub init: Block,
    pub then: Block,
    pub outputs: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalFn {
    pub name: Ident,
    pub params: Vec<Param>,
    pub outputs: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Import {
    pub path: String,
    pub alias: Ident,
    pub loc: Loc,
}

/// `instance.out` (`port == None`) or `instance.out[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalRef {
    pub instance: Ident,
    pub port: Option<u32>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub type_name: Ident,
    pub name: Ident,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkDecl {
    pub child: Ident,
    pub parent: Ident,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputWiring {
    pub target: Ident,
    pub sources: Vec<SignalRef>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlugDecl {
    pub signal: SignalRef,
    pub function: Ident,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SystemSection {
    pub instances: Vec<Instance>,
    pub links: Vec<LinkDecl>,
    pub input_wirings: Vec<InputWiring>,
    pub splitplugs: Vec<PlugDecl>,
    pub mergeplugs: Vec<PlugDecl>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Program {
    pub pure_fns: Vec<PureFn>,
    pub logical_fns: Vec<LogicalFn>,
    pub physical_fns: Vec<PhysicalFn>,
    pub imports: Vec<Import>,
    pub system: Option<SystemSection>,
}

impl Program {
    /// Appends the items of `other`; a later SYSTEM section replaces an earlier one
    /// only when this program has none.
    pub fn merge(&mut self, other: Program) {
        self.pure_fns.extend(other.pure_fns);
        self.logical_fns.extend(other.logical_fns);
        self.physical_fns.extend(other.physical_fns);
        self.imports.extend(other.imports);
        if self.system.is_none() {
            self.system = other.system;
        }
    }
}
