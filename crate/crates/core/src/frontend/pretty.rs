//! Canonical formatting.
//!
//! Output order is imports, pure, physical, logical, SYSTEM. Within SYSTEM
//! the order is instances, links, input wirings, splitplugs, mergeplugs.
//! The declaration order inside each list is preserved.

use std::fmt::Write;

use super::ast::*;
use super::lexer::escape;
use super::parser::binop_prec;

const INDENT: &str = "    ";

pub fn pretty_print(program: &Program) -> String {
    let mut sections: Vec<String> = Vec::new();
    if !program.imports.is_empty() {
        let mut s = String::new();
        for i in &program.imports {
            let _ = writeln!(s, "import {} as {};", escape(&i.path), i.alias.name);
        }
        sections.push(s);
    }
    for f in &program.pure_fns {
        sections.push(format!(
            "pure {}({}) -> ({})\n",
            f.name.name,
            params(&f.params),
            expr(&f.body)
        ));
    }
    for f in &program.physical_fns {
        sections.push(format!(
            "physical {}({}) -> ({})\n",
            f.name.name,
            params(&f.params),
            expr_list(&f.outputs)
        ));
    }
    for f in &program.logical_fns {
        let mut s = format!("logical {}({}) init ", f.name.name, params(&f.params));
        block(&mut s, &f.init, 0);
        s.push_str(" then ");
        block(&mut s, &f.then, 0);
        let _ = writeln!(s, " -> ({})", expr_list(&f.outputs));
        sections.push(s);
    }
    if let Some(sys) = &program.system {
        sections.push(system(sys));
    }
    sections.join("\n")
}

fn system(sys: &SystemSection) -> String {
    let mut s = String::from("SYSTEM {\n");
    for i in &sys.instances {
        let _ = writeln!(s, "{INDENT}{} {};", i.type_name.name, i.name.name);
    }
    for l in &sys.links {
        let _ = writeln!(s, "{INDENT}link {} to {};", l.child.name, l.parent.name);
    }
    for w in &sys.input_wirings {
        let srcs: Vec<String> = w.sources.iter().map(signal).collect();
        let _ = writeln!(s, "{INDENT}{}.in({});", w.target.name, srcs.join(", "));
    }
    for p in &sys.splitplugs {
        let _ = writeln!(s, "{INDENT}splitplug({}, {});", signal(&p.signal), p.function.name);
    }
    for p in &sys.mergeplugs {
        let _ = writeln!(s, "{INDENT}mergeplug({}, {});", signal(&p.signal), p.function.name);
    }
    s.push_str("}\n");
    s
}

pub fn signal(r: &SignalRef) -> String {
    match r.port {
        Some(k) => format!("{}.out[{k}]", r.instance.name),
        None => format!("{}.out", r.instance.name),
    }
}

pub fn type_expr(t: &TypeExpr) -> String {
    let base = match &t.base {
        BaseType::Int => "int",
        BaseType::Float => "float",
        BaseType::Bool => "bool",
        BaseType::Named(n) => n.as_str(),
    };
    format!("{base}{}", "[]".repeat(t.array_depth as usize))
}

fn params(ps: &[Param]) -> String {
    ps.iter()
        .map(|p| format!("{} {}", type_expr(&p.ty), p.name.name))
        .collect::<Vec<_>>()
        .join(", ")
}

fn expr_list(es: &[Expr]) -> String {
    es.iter().map(expr).collect::<Vec<_>>().join(", ")
}

fn block(out: &mut String, b: &Block, depth: usize) {
    if b.stmts.is_empty() {
        out.push_str("{}");
        return;
    }
    out.push_str("{\n");
    for s in &b.stmts {
        stmt(out, s, depth + 1);
    }
    out.push_str(&INDENT.repeat(depth));
    out.push('}');
}

fn stmt(out: &mut String, s: &Stmt, depth: usize) {
    out.push_str(&INDENT.repeat(depth));
    stmt_body(out, s, depth);
    out.push('\n');
}

fn stmt_body(out: &mut String, s: &Stmt, depth: usize) {
    match &s.kind {
        StmtKind::Decl { ty, name, init } => {
            let _ = write!(out, "{} {}", type_expr(ty), name.name);
            if let Some(e) = init {
                let _ = write!(out, " = {}", expr(e));
            }
            out.push(';');
        }
        StmtKind::Assign { target, value } => {
            let _ = write!(out, "{} = {};", target.name, expr(value));
        }
        StmtKind::Expr(e) => {
            let _ = write!(out, "{};", expr(e));
        }
        StmtKind::For { var, iter, body } => {
            let _ = write!(out, "for {} in {} ", var.name, expr(iter));
            block(out, body, depth);
        }
        StmtKind::If {
            cond,
            then_block,
            else_branch,
        } => {
            let _ = write!(out, "if {} ", expr(cond));
            block(out, then_block, depth);
            match else_branch {
                None => {}
                Some(Else::Block(b)) => {
                    out.push_str(" else ");
                    block(out, b, depth);
                }
                Some(Else::If(inner)) => {
                    out.push_str(" else ");
                    stmt_body(out, inner, depth);
                }
            }
        }
    }
}

const UNARY_PREC: u8 = 8;
const POSTFIX_PREC: u8 = 9;

fn prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary(op, _, _) => binop_prec(*op),
        ExprKind::Unary(..) => UNARY_PREC,
        ExprKind::Index(..) | ExprKind::Field(..) => POSTFIX_PREC,
        _ => 10,
    }
}

/// Prints `e`, adding parentheses only when a synthesized tree would not
/// reparse to itself.
fn child(e: &Expr, min: u8) -> String {
    if prec(e) < min {
        format!("({})", expr(e))
    } else {
        expr(e)
    }
}

pub fn expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Int(i) => i.to_string(),
        ExprKind::Float(x) => format!("{x:?}"),
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Str(s) => escape(s),
        ExprKind::Var(v) => v.clone(),
        ExprKind::Paren(inner) => format!("({})", expr(inner)),
        ExprKind::Unary(op, operand) => {
            let inner = child(operand, UNARY_PREC);
            if matches!(operand.kind, ExprKind::Unary(..)) {
                format!("{} {inner}", op.symbol())
            } else {
                format!("{}{inner}", op.symbol())
            }
        }
        ExprKind::Binary(op, l, r) => {
            let p = binop_prec(*op);
            format!("{} {} {}", child(l, p), op.symbol(), child(r, p + 1))
        }
        ExprKind::Call(f, args) => format!("{}({})", f.name, expr_list(args)),
        ExprKind::Index(b, i) => format!("{}[{}]", child(b, POSTFIX_PREC), expr(i)),
        ExprKind::Field(b, f) => format!("{}.{}", child(b, POSTFIX_PREC), f.name),
    }
}
