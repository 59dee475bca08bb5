//! Name resolution, type checking and lowering of function bodies.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::params::param_ty;
use crate::diag::{Diagnostic, Span};
use crate::frontend::ast::{self, BaseType, ExprKind, StmtKind, TypeExpr, UnaryOp};
use crate::ir::{BinOp, Callee, Expr, Function, Stmt, UnOp};
use crate::runtime::builtins;
use crate::value::Value;

use super::types::{named_record, Ty};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    Pure,
    Logical,
    Physical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Port {
    pub name: String,
    pub ty: Ty,
}

/// A checked function usable as a SYSTEM instance type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDef {
    pub name: String,
    pub kind: BlockKind,
    pub inputs: Vec<Port>,
    pub outputs: Vec<Port>,
    /// Values of the output tuple, evaluated after `then_body`.
    pub output_exprs: Vec<Expr>,
    /// Inner variables in order of first declaration.
    pub vars: Vec<(String, Ty)>,
    pub init_body: Vec<Stmt>,
    pub then_body: Vec<Stmt>,
}

pub(crate) struct Checked {
    pub functions: BTreeMap<String, Function>,
    pub blocks: BTreeMap<String, BlockDef>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Visit {
    Active,
    Done,
}

pub(crate) struct Ctx<'a> {
    pure_ast: HashMap<&'a str, &'a ast::PureFn>,
    visit: HashMap<String, Visit>,
    functions: BTreeMap<String, Function>,
    pub diags: Vec<Diagnostic>,
}

/// Checks every function of `program`. Diagnostics accumulate in the returned
/// context; the tables contain every function that checked cleanly.
pub(crate) fn check_functions(program: &ast::Program) -> (Checked, Vec<Diagnostic>) {
    let mut ctx = Ctx {
        pure_ast: HashMap::new(),
        visit: HashMap::new(),
        functions: BTreeMap::new(),
        diags: Vec::new(),
    };
    check_unique_names(program, &mut ctx.diags);
    for f in &program.pure_fns {
        ctx.pure_ast.entry(f.name.name.as_str()).or_insert(f);
    }
    for f in &program.pure_fns {
        ctx.ensure_pure(&f.name.name, f.name.span());
    }
    let mut blocks = BTreeMap::new();
    for f in &program.pure_fns {
        if let Some(func) = ctx.functions.get(&f.name.name) {
            blocks.insert(f.name.name.clone(), pure_block(func));
        }
    }
    for f in &program.physical_fns {
        if let Some(b) = ctx.physical(f) {
            blocks.entry(f.name.name.clone()).or_insert(b);
        }
    }
    for f in &program.logical_fns {
        if let Some(b) = ctx.logical(f) {
            blocks.entry(f.name.name.clone()).or_insert(b);
        }
    }
    let diags = std::mem::take(&mut ctx.diags);
    (
        Checked {
            functions: ctx.functions,
            blocks,
        },
        diags,
    )
}

fn check_unique_names(program: &ast::Program, diags: &mut Vec<Diagnostic>) {
    let mut seen: HashMap<String, &'static str> = HashMap::new();
    let mut declare = |name: &ast::Ident, what: &'static str, diags: &mut Vec<Diagnostic>| {
        if builtins::is_builtin(&name.name) || named_record(&name.name).is_some() {
            diags.push(
                Diagnostic::error("E-DUP", format!("`{}` is a predeclared name", name.name))
                    .at(name.span()),
            );
        } else if let Some(prev) = seen.insert(name.name.clone(), what) {
            diags.push(
                Diagnostic::error(
                    "E-DUP",
                    format!("{what} `{}` already declared as {prev}", name.name),
                )
                .at(name.span()),
            );
        }
    };
    for f in &program.pure_fns {
        declare(&f.name, "pure function", diags);
    }
    for f in &program.logical_fns {
        declare(&f.name, "logical function", diags);
    }
    for f in &program.physical_fns {
        declare(&f.name, "physical function", diags);
    }
    let mut aliases: HashMap<&str, ()> = HashMap::new();
    for imp in &program.imports {
        let name = imp.alias.name.as_str();
        if aliases.insert(name, ()).is_some() {
            diags.push(
                Diagnostic::error("E-DUP", format!("import alias `{name}` already used"))
                    .at(imp.alias.span()),
            );
            continue;
        }
        // an alias names the descriptor of the physical function it matches
        match seen.get(name) {
            None | Some(&"physical function") => {}
            Some(prev) => diags.push(
                Diagnostic::error(
                    "E-DUP",
                    format!("import alias `{name}` already declared as {prev}"),
                )
                .at(imp.alias.span()),
            ),
        }
    }
}

fn pure_block(f: &Function) -> BlockDef {
    BlockDef {
        name: f.name.clone(),
        kind: BlockKind::Pure,
        inputs: f
            .params
            .iter()
            .map(|(n, t)| Port {
                name: n.clone(),
                ty: t.clone(),
            })
            .collect(),
        outputs: vec![Port {
            name: "out0".to_string(),
            ty: f.ret.clone(),
        }],
        output_exprs: vec![f.body.clone()],
        vars: Vec::new(),
        init_body: Vec::new(),
        then_body: Vec::new(),
    }
}

fn output_ports(exprs: &[ast::Expr], tys: &[Ty]) -> Vec<Port> {
    let mut ports: Vec<Port> = Vec::new();
    for (k, (e, ty)) in exprs.iter().zip(tys).enumerate() {
        let mut name = match &e.kind {
            ExprKind::Var(v) => v.clone(),
            _ => format!("out{k}"),
        };
        if ports.iter().any(|p| p.name == name) {
            name = format!("{name}_{k}");
        }
        ports.push(Port {
            name,
            ty: ty.clone(),
        });
    }
    ports
}

impl<'a> Ctx<'a> {
    fn resolve_type(&mut self, t: &TypeExpr) -> Ty {
        let mut ty = match &t.base {
            BaseType::Int => Ty::Int,
            BaseType::Float => Ty::Float,
            BaseType::Bool => Ty::Bool,
            BaseType::Named(n) => match named_record(n) {
                Some(r) => r,
                None => {
                    self.diags.push(
                        Diagnostic::error("E-UNDEF", format!("unknown type `{n}`")).at(t.loc.0),
                    );
                    Ty::Any
                }
            },
        };
        for _ in 0..t.array_depth {
            ty = Ty::array(ty);
        }
        ty
    }

    fn params(&mut self, params: &[ast::Param]) -> Vec<(String, Ty)> {
        let mut out: Vec<(String, Ty)> = Vec::new();
        for p in params {
            let ty = self.resolve_type(&p.ty);
            if out.iter().any(|(n, _)| *n == p.name.name) {
                self.diags.push(
                    Diagnostic::error("E-DUP", format!("duplicate parameter `{}`", p.name.name))
                        .at(p.name.span()),
                );
                continue;
            }
            out.push((p.name.name.clone(), ty));
        }
        out
    }

    /// Checks a pure function on first use so return types are known before
    /// callers are checked.
    fn ensure_pure(&mut self, name: &str, use_site: Span) -> Option<Function> {
        match self.visit.get(name) {
            Some(Visit::Done) => return self.functions.get(name).cloned(),
            Some(Visit::Active) => {
                self.diags.push(
                    Diagnostic::error("E-TYPE", format!("pure function `{name}` is recursive"))
                        .at(use_site),
                );
                return None;
            }
            None => {}
        }
        let f = *self.pure_ast.get(name)?;
        self.visit.insert(name.to_string(), Visit::Active);
        let params = self.params(&f.params);
        let errors_before = self.diags.len();
        let mut body = Body::new(self, false, false);
        for (n, t) in &params {
            body.declare_input(n, t.clone());
        }
        let (ir, ret) = body.expr(&f.body);
        self.visit.insert(name.to_string(), Visit::Done);
        if self.diags.len() > errors_before {
            return None;
        }
        let func = Function {
            name: name.to_string(),
            params,
            ret,
            body: ir,
        };
        self.functions.insert(name.to_string(), func.clone());
        Some(func)
    }

    fn physical(&mut self, f: &ast::PhysicalFn) -> Option<BlockDef> {
        let errors_before = self.diags.len();
        let params = self.params(&f.params);
        let mut body = Body::new(self, false, false);
        for (n, t) in &params {
            body.declare_input(n, t.clone());
        }
        if f.outputs.is_empty() {
            body.ctx.diags.push(
                Diagnostic::error(
                    "E-ARITY",
                    format!("physical function `{}` has no outputs", f.name.name),
                )
                .at(f.name.span()),
            );
        }
        let (exprs, tys): (Vec<_>, Vec<_>) = f.outputs.iter().map(|e| body.expr(e)).unzip();
        (self.diags.len() == errors_before).then(|| BlockDef {
            name: f.name.name.clone(),
            kind: BlockKind::Physical,
            inputs: params
                .into_iter()
                .map(|(name, ty)| Port { name, ty })
                .collect(),
            outputs: output_ports(&f.outputs, &tys),
            output_exprs: exprs,
            vars: Vec::new(),
            init_body: Vec::new(),
            then_body: Vec::new(),
        })
    }

    fn logical(&mut self, f: &ast::LogicalFn) -> Option<BlockDef> {
        let errors_before = self.diags.len();
        let params = self.params(&f.params);
        let mut body = Body::new(self, true, true);
        for (n, t) in &params {
            body.declare_input(n, t.clone());
        }
        let init_body = body.block(&f.init);
        body.in_init = false;
        let then_body = body.block(&f.then);
        let (exprs, tys): (Vec<_>, Vec<_>) = f.outputs.iter().map(|e| body.expr(e)).unzip();
        let vars = std::mem::take(&mut body.inner);
        (self.diags.len() == errors_before).then(|| BlockDef {
            name: f.name.name.clone(),
            kind: BlockKind::Logical,
            inputs: params
                .into_iter()
                .map(|(name, ty)| Port { name, ty })
                .collect(),
            outputs: output_ports(&f.outputs, &tys),
            output_exprs: exprs,
            vars,
            init_body,
            then_body,
        })
    }
}

/// Checker state for one function body. The variable namespace is flat: a
/// name is visible from its first declaration to the end of the function.
struct Body<'c, 'a> {
    ctx: &'c mut Ctx<'a>,
    scope: HashMap<String, Ty>,
    inputs: Vec<String>,
    inner: Vec<(String, Ty)>,
    allow_impure: bool,
    allow_statements: bool,
    in_init: bool,
}

impl<'c, 'a> Body<'c, 'a> {
    fn new(ctx: &'c mut Ctx<'a>, allow_impure: bool, allow_statements: bool) -> Self {
        Body {
            ctx,
            scope: HashMap::new(),
            inputs: Vec::new(),
            inner: Vec::new(),
            allow_impure,
            allow_statements,
            in_init: true,
        }
    }

    fn err(&mut self, code: &'static str, msg: impl Into<String>, span: Span) {
        self.ctx.diags.push(Diagnostic::error(code, msg).at(span));
    }

    fn declare_input(&mut self, name: &str, ty: Ty) {
        self.inputs.push(name.to_string());
        self.scope.insert(name.to_string(), ty);
    }

    /// Declares an inner variable; redeclaring with the same type reuses it.
    fn declare(&mut self, name: &str, ty: Ty, span: Span) {
        if self.inputs.iter().any(|i| i == name) {
            self.err("E-DUP", format!("`{name}` redeclares an input"), span);
            return;
        }
        match self.scope.get(name) {
            Some(prev) if *prev == ty || ty == Ty::Any => {}
            Some(prev) => {
                let msg = format!("`{name}` redeclared as {ty}, previously {prev}");
                self.err("E-TYPE", msg, span);
            }
            None => {
                self.scope.insert(name.to_string(), ty.clone());
                self.inner.push((name.to_string(), ty));
            }
        }
    }

    fn block(&mut self, b: &ast::Block) -> Vec<Stmt> {
        b.stmts.iter().filter_map(|s| self.stmt(s)).collect()
    }

    fn stmt(&mut self, s: &ast::Stmt) -> Option<Stmt> {
        let span = s.loc.0;
        if !self.allow_statements {
            self.err("E-TYPE", "statements are not allowed here", span);
            return None;
        }
        match &s.kind {
            StmtKind::Decl { ty, name, init } => {
                let ty = self.ctx.resolve_type(ty);
                let value = match init {
                    Some(e) => self.expect(e, &ty),
                    None => Expr::lit(ty.default_value()),
                };
                self.declare(&name.name, ty, name.span());
                Some(Stmt::assign(name.name.clone(), value))
            }
            StmtKind::Assign { target, value } => {
                if let Some(ty) = self.scope.get(&target.name).cloned() {
                    let v = self.expect(value, &ty);
                    return Some(Stmt::assign(target.name.clone(), v));
                }
                let (mut v, mut ty) = self.expr(value);
                // untyped assignments in init declare a float when numeric
                if self.in_init && ty.is_numeric() {
                    v = widen(v, &ty, &Ty::Float);
                    ty = Ty::Float;
                }
                if ty == Ty::Str {
                    self.err("E-TYPE", "strings cannot be stored", value.span());
                }
                self.declare(&target.name, ty, target.span());
                Some(Stmt::assign(target.name.clone(), v))
            }
            StmtKind::If {
                cond,
                then_block,
                else_branch,
            } => {
                let cond = self.expect(cond, &Ty::Bool);
                let then_body = self.block(then_block);
                let else_body = match else_branch {
                    None => Vec::new(),
                    Some(ast::Else::Block(b)) => self.block(b),
                    Some(ast::Else::If(inner)) => self.stmt(inner).into_iter().collect(),
                };
                Some(Stmt::If {
                    cond,
                    then_body,
                    else_body,
                })
            }
            StmtKind::For { var, iter, body } => {
                let (it, ty) = self.expr(iter);
                let elem = match ty {
                    Ty::Array(e) => *e,
                    Ty::Any => Ty::Any,
                    other => {
                        self.err("E-TYPE", format!("cannot iterate over {other}"), iter.span());
                        Ty::Any
                    }
                };
                let elem = if elem == Ty::Any { Ty::Int } else { elem };
                self.declare(&var.name, elem, var.span());
                let body = self.block(body);
                Some(Stmt::For {
                    var: var.name.clone(),
                    iter: it,
                    body,
                })
            }
            StmtKind::Expr(e) => {
                let (expr, _) = self.expr(e);
                Some(Stmt::Eval { expr })
            }
        }
    }

    /// Checks `e` against `want`, inserting int to float widening.
    fn expect(&mut self, e: &ast::Expr, want: &Ty) -> Expr {
        let (ir, ty) = self.expr(e);
        if ty.fits(want) {
            return ir;
        }
        if ty == Ty::Int && *want == Ty::Float {
            return widen(ir, &ty, want);
        }
        self.err("E-TYPE", format!("expected {want}, found {ty}"), e.span());
        ir
    }

    fn expr(&mut self, e: &ast::Expr) -> (Expr, Ty) {
        let span = e.span();
        match &e.kind {
            ExprKind::Int(i) => (Expr::lit(Value::Int(*i)), Ty::Int),
            ExprKind::Float(x) => (Expr::lit(Value::Float(*x)), Ty::Float),
            ExprKind::Bool(b) => (Expr::bool(*b), Ty::Bool),
            ExprKind::Str(_) => {
                self.err("E-TYPE", "string literals are only valid as `param` names", span);
                (Expr::lit(Value::Int(0)), Ty::Any)
            }
            ExprKind::Paren(inner) => self.expr(inner),
            ExprKind::Var(name) => self.var(name, span),
            ExprKind::Unary(op, operand) => {
                let (v, ty) = self.expr(operand);
                let ok = match op {
                    UnaryOp::Neg => ty.is_numeric() || ty == Ty::Any,
                    UnaryOp::Not => ty == Ty::Bool || ty == Ty::Any,
                };
                if !ok {
                    let msg = format!("operator `{}` does not apply to {ty}", op.symbol());
                    self.err("E-TYPE", msg, span);
                }
                let op = match op {
                    UnaryOp::Neg => UnOp::Neg,
                    UnaryOp::Not => UnOp::Not,
                };
                (
                    Expr::Unary {
                        op,
                        operand: Box::new(v),
                    },
                    ty,
                )
            }
            ExprKind::Binary(op, l, r) => self.binary(*op, l, r, span),
            ExprKind::Index(base, index) => {
                let (b, bty) = self.expr(base);
                let i = self.expect(index, &Ty::Int);
                let ty = match bty {
                    Ty::Array(e) => *e,
                    Ty::Any => Ty::Any,
                    other => {
                        self.err("E-TYPE", format!("cannot index into {other}"), span);
                        Ty::Any
                    }
                };
                (
                    Expr::Index {
                        base: Box::new(b),
                        index: Box::new(i),
                    },
                    ty,
                )
            }
            ExprKind::Field(base, field) => {
                let (b, bty) = self.expr(base);
                let ty = match &bty {
                    Ty::Record(r) => match r.fields.iter().find(|(n, _)| *n == field.name) {
                        Some((_, t)) => t.clone(),
                        None => {
                            let msg = format!("`{}` has no field `{}`", r.name, field.name);
                            self.err("E-UNDEF", msg, field.span());
                            Ty::Any
                        }
                    },
                    Ty::Any => Ty::Any,
                    other => {
                        self.err("E-TYPE", format!("{other} has no fields"), span);
                        Ty::Any
                    }
                };
                (
                    Expr::Field {
                        base: Box::new(b),
                        field: field.name.clone(),
                    },
                    ty,
                )
            }
            ExprKind::Call(callee, args) => self.call(callee, args, span),
        }
    }

    fn var(&mut self, name: &str, span: Span) -> (Expr, Ty) {
        if let Some(ty) = self.scope.get(name) {
            return (Expr::var(name), ty.clone());
        }
        if name == "empty_set" {
            return (Expr::Array { elems: Vec::new() }, Ty::array(Ty::Any));
        }
        if self.ctx.pure_ast.contains_key(name) {
            let callee = ast::Ident::new(name, span);
            return self.call(&callee, &[], span);
        }
        self.err("E-UNDEF", format!("unknown name `{name}`"), span);
        (Expr::var(name), Ty::Any)
    }

    fn binary(&mut self, op: BinOp, l: &ast::Expr, r: &ast::Expr, span: Span) -> (Expr, Ty) {
        let (lv, lt) = self.expr(l);
        let (rv, rt) = self.expr(r);
        let any = lt == Ty::Any || rt == Ty::Any;
        let mismatch = |this: &mut Self| {
            let msg = format!("operator `{}` does not apply to {lt} and {rt}", op.symbol());
            this.err("E-TYPE", msg, span);
        };
        use BinOp::*;
        match op {
            Add | Sub | Mul | Div | Rem | Lt | Le | Gt | Ge => {
                if any {
                    return (Expr::binary(op, lv, rv), Ty::Any);
                }
                if !(lt.is_numeric() && rt.is_numeric()) {
                    mismatch(self);
                    return (Expr::binary(op, lv, rv), Ty::Any);
                }
                let ty = if lt == Ty::Int && rt == Ty::Int {
                    Ty::Int
                } else {
                    Ty::Float
                };
                let e = Expr::binary(op, widen(lv, &lt, &ty), widen(rv, &rt, &ty));
                (e, if op.is_comparison() { Ty::Bool } else { ty })
            }
            Shl | Shr | BitAnd => {
                let ok = any
                    || (lt == Ty::Int && rt == Ty::Int)
                    || (op == BitAnd && lt == Ty::Bool && rt == Ty::Bool);
                if !ok {
                    mismatch(self);
                }
                let ty = if lt == Ty::Bool { Ty::Bool } else { Ty::Int };
                (Expr::binary(op, lv, rv), ty)
            }
            Eq | Ne => {
                if lt.is_numeric() && rt.is_numeric() && lt != rt {
                    let e = Expr::binary(op, widen(lv, &lt, &Ty::Float), widen(rv, &rt, &Ty::Float));
                    return (e, Ty::Bool);
                }
                if lt.unify(&rt).is_none() {
                    mismatch(self);
                }
                (Expr::binary(op, lv, rv), Ty::Bool)
            }
            And | Or => {
                if !any && !(lt == Ty::Bool && rt == Ty::Bool) {
                    mismatch(self);
                }
                (Expr::binary(op, lv, rv), Ty::Bool)
            }
        }
    }

    fn call(&mut self, callee: &ast::Ident, args: &[ast::Expr], span: Span) -> (Expr, Ty) {
        let name = callee.name.as_str();
        if self.ctx.pure_ast.contains_key(name) {
            let Some(f) = self.ctx.ensure_pure(name, callee.span()) else {
                for a in args {
                    self.expr(a);
                }
                return (Expr::call_pure(name, Vec::new()), Ty::Any);
            };
            if f.params.len() != args.len() {
                let msg = format!(
                    "`{name}` takes {} argument(s), {} given",
                    f.params.len(),
                    args.len()
                );
                self.err("E-ARITY", msg, span);
            }
            let ir_args = args
                .iter()
                .zip(f.params.iter().map(|(_, t)| t.clone()).chain(std::iter::repeat(Ty::Any)))
                .map(|(a, t)| self.expect(a, &t))
                .collect();
            return (Expr::call_pure(name, ir_args), f.ret.clone());
        }
        if let Some(Ty::Record(r)) = named_record(name) {
            if args.len() != r.fields.len() {
                let msg = format!("`{name}` has {} fields, {} given", r.fields.len(), args.len());
                self.err("E-ARITY", msg, span);
            }
            let fields = r
                .fields
                .iter()
                .zip(args)
                .map(|((n, t), a)| (n.clone(), self.expect(a, t)))
                .collect();
            return (
                Expr::Record {
                    name: name.to_string(),
                    fields,
                },
                Ty::Record(r),
            );
        }
        if name == "param" {
            return self.param(args, span);
        }
        if builtins::is_builtin(name) {
            return self.builtin(name, args, span);
        }
        for a in args {
            self.expr(a);
        }
        self.err("E-UNDEF", format!("unknown function `{name}`"), callee.span());
        (Expr::call_pure(name, Vec::new()), Ty::Any)
    }

    fn param(&mut self, args: &[ast::Expr], span: Span) -> (Expr, Ty) {
        let [arg] = args else {
            self.err("E-ARITY", "`param` takes one string literal", span);
            return (Expr::lit(Value::Int(0)), Ty::Any);
        };
        let ExprKind::Str(name) = &arg.kind else {
            self.err("E-TYPE", "`param` expects a string literal", arg.span());
            return (Expr::lit(Value::Int(0)), Ty::Any);
        };
        match param_ty(name) {
            Some(ty) => (Expr::Param { name: name.clone() }, ty),
            None => {
                self.err("E-UNDEF", format!("unknown parameter `{name}`"), arg.span());
                (Expr::lit(Value::Int(0)), Ty::Any)
            }
        }
    }

    fn builtin(&mut self, name: &str, args: &[ast::Expr], span: Span) -> (Expr, Ty) {
        let sig = builtins::signature(name).expect("builtin");
        if sig.impure && !self.allow_impure {
            let msg = format!("`{name}` is not allowed in pure or physical functions");
            self.err("E-TYPE", msg, span);
        }
        if args.len() != sig.arity {
            let msg = format!("`{name}` takes {} argument(s), {} given", sig.arity, args.len());
            self.err("E-ARITY", msg, span);
            for a in args {
                self.expr(a);
            }
            return (Expr::call_pure(name, Vec::new()), Ty::Any);
        }
        let mut ir_args = Vec::with_capacity(args.len());
        let mut tys = Vec::with_capacity(args.len());
        for a in args {
            let (v, t) = self.expr(a);
            ir_args.push(v);
            tys.push(t);
        }
        let ret = match builtins::type_call(name, &tys) {
            Ok(ret) => {
                for ((v, t), want) in ir_args.iter_mut().zip(&tys).zip(&ret.params) {
                    let e = std::mem::replace(v, Expr::bool(false));
                    *v = widen(e, t, want);
                }
                ret.ret
            }
            Err(msg) => {
                self.err("E-TYPE", format!("`{name}`: {msg}"), span);
                Ty::Any
            }
        };
        (
            Expr::Call {
                callee: Callee::Builtin(name.to_string()),
                args: ir_args,
            },
            ret,
        )
    }
}

fn widen(e: Expr, from: &Ty, to: &Ty) -> Expr {
    if *from == Ty::Int && *to == Ty::Float {
        Expr::Widen {
            operand: Box::new(e),
        }
    } else {
        e
    }
}
