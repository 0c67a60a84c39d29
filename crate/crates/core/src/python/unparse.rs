//! Statement-level unparsing. Expressions use the parser crate's own
//! unparser; this module lays out statements, blocks and patterns around it
//! with four-space indentation.

use rustpython_parser::ast::{self, Constant, Expr, Operator, Pattern, Stmt};
use std::fmt::Write;

pub fn unparse_suite(stmts: &[Stmt]) -> String {
    let mut u = Unparser::default();
    u.block(stmts);
    let mut out = u.out;
    if out.ends_with('\n') {
        out.pop();
    }
    out
}

#[derive(Default)]
struct Unparser {
    out: String,
    depth: usize,
}

impl Unparser {
    fn line(&mut self, text: &str) {
        for _ in 0..self.depth {
            self.out.push_str("    ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn block(&mut self, stmts: &[Stmt]) {
        for s in stmts {
            self.stmt(s);
        }
    }

    fn indented(&mut self, header: String, body: &[Stmt]) {
        self.line(&header);
        self.depth += 1;
        if body.is_empty() {
            self.line("pass");
        } else {
            self.block(body);
        }
        self.depth -= 1;
    }

    fn stmt(&mut self, stmt: &Stmt) {
        match stmt {
            Stmt::FunctionDef(f) => self.function(
                false,
                &f.name,
                &f.args,
                f.returns.as_deref(),
                &f.decorator_list,
                &f.type_params,
                &f.body,
            ),
            Stmt::AsyncFunctionDef(f) => self.function(
                true,
                &f.name,
                &f.args,
                f.returns.as_deref(),
                &f.decorator_list,
                &f.type_params,
                &f.body,
            ),
            Stmt::ClassDef(c) => {
                for d in &c.decorator_list {
                    self.line(&format!("@{d}"));
                }
                let mut header = format!("class {}{}", c.name, type_params(&c.type_params));
                let mut parts: Vec<String> = c.bases.iter().map(|b| b.to_string()).collect();
                parts.extend(c.keywords.iter().map(keyword));
                if !parts.is_empty() {
                    let _ = write!(header, "({})", parts.join(", "));
                }
                header.push(':');
                self.indented(header, &c.body);
            }
            Stmt::Return(r) => match &r.value {
                Some(v) => self.line(&format!("return {v}")),
                None => self.line("return"),
            },
            Stmt::Delete(d) => self.line(&format!("del {}", join(&d.targets))),
            Stmt::Assign(a) => {
                let mut text = String::new();
                for t in &a.targets {
                    let _ = write!(text, "{t} = ");
                }
                let _ = write!(text, "{}", a.value);
                self.line(&text);
            }
            Stmt::TypeAlias(t) => self.line(&format!(
                "type {}{} = {}",
                t.name,
                type_params(&t.type_params),
                t.value
            )),
            Stmt::AugAssign(a) => {
                self.line(&format!("{} {}= {}", a.target, operator(&a.op), a.value))
            }
            Stmt::AnnAssign(a) => {
                let target = if a.simple || !matches!(*a.target, Expr::Name(_)) {
                    a.target.to_string()
                } else {
                    format!("({})", a.target)
                };
                let mut text = format!("{target}: {}", a.annotation);
                if let Some(v) = &a.value {
                    let _ = write!(text, " = {v}");
                }
                self.line(&text);
            }
            Stmt::For(f) => {
                self.indented(format!("for {} in {}:", f.target, f.iter), &f.body);
                self.orelse(&f.orelse);
            }
            Stmt::AsyncFor(f) => {
                self.indented(format!("async for {} in {}:", f.target, f.iter), &f.body);
                self.orelse(&f.orelse);
            }
            Stmt::While(w) => {
                self.indented(format!("while {}:", w.test), &w.body);
                self.orelse(&w.orelse);
            }
            Stmt::If(i) => {
                self.indented(format!("if {}:", i.test), &i.body);
                let mut orelse = &i.orelse;
                loop {
                    match orelse.as_slice() {
                        [] => break,
                        [Stmt::If(inner)] => {
                            self.indented(format!("elif {}:", inner.test), &inner.body);
                            orelse = &inner.orelse;
                        }
                        rest => {
                            self.indented("else:".into(), rest);
                            break;
                        }
                    }
                }
            }
            Stmt::With(w) => self.indented(format!("with {}:", with_items(&w.items)), &w.body),
            Stmt::AsyncWith(w) => {
                self.indented(format!("async with {}:", with_items(&w.items)), &w.body)
            }
            Stmt::Match(m) => {
                self.line(&format!("match {}:", m.subject));
                self.depth += 1;
                for case in &m.cases {
                    let mut header = format!("case {}", pattern(&case.pattern, false));
                    if let Some(g) = &case.guard {
                        let _ = write!(header, " if {g}");
                    }
                    header.push(':');
                    self.indented(header, &case.body);
                }
                self.depth -= 1;
            }
            Stmt::Raise(r) => {
                let mut text = "raise".to_string();
                if let Some(e) = &r.exc {
                    let _ = write!(text, " {e}");
                }
                if let Some(c) = &r.cause {
                    let _ = write!(text, " from {c}");
                }
                self.line(&text);
            }
            Stmt::Try(t) => self.try_stmt(&t.body, &t.handlers, &t.orelse, &t.finalbody, false),
            Stmt::TryStar(t) => self.try_stmt(&t.body, &t.handlers, &t.orelse, &t.finalbody, true),
            Stmt::Assert(a) => match &a.msg {
                Some(m) => self.line(&format!("assert {}, {m}", a.test)),
                None => self.line(&format!("assert {}", a.test)),
            },
            Stmt::Import(i) => self.line(&format!("import {}", aliases(&i.names))),
            Stmt::ImportFrom(i) => {
                let level = i.level.map(|l| l.to_u32()).unwrap_or(0) as usize;
                let module = i.module.as_ref().map(|m| m.as_str()).unwrap_or("");
                self.line(&format!(
                    "from {}{} import {}",
                    ".".repeat(level),
                    module,
                    aliases(&i.names)
                ));
            }
            Stmt::Global(g) => self.line(&format!("global {}", names(&g.names))),
            Stmt::Nonlocal(n) => self.line(&format!("nonlocal {}", names(&n.names))),
            Stmt::Expr(e) => self.line(&e.value.to_string()),
            Stmt::Pass(_) => self.line("pass"),
            Stmt::Break(_) => self.line("break"),
            Stmt::Continue(_) => self.line("continue"),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn function(
        &mut self,
        is_async: bool,
        name: &str,
        args: &ast::Arguments,
        returns: Option<&Expr>,
        decorators: &[Expr],
        params: &[ast::TypeParam],
        body: &[Stmt],
    ) {
        for d in decorators {
            self.line(&format!("@{d}"));
        }
        let mut header = format!(
            "{}def {name}{}({})",
            if is_async { "async " } else { "" },
            type_params(params),
            arguments(args)
        );
        if let Some(r) = returns {
            let _ = write!(header, " -> {r}");
        }
        header.push(':');
        self.indented(header, body);
    }

    fn orelse(&mut self, orelse: &[Stmt]) {
        if !orelse.is_empty() {
            self.indented("else:".into(), orelse);
        }
    }

    fn try_stmt(
        &mut self,
        body: &[Stmt],
        handlers: &[ast::ExceptHandler],
        orelse: &[Stmt],
        finalbody: &[Stmt],
        star: bool,
    ) {
        self.indented("try:".into(), body);
        for h in handlers {
            let ast::ExceptHandler::ExceptHandler(h) = h;
            let mut header = if star { "except*" } else { "except" }.to_string();
            if let Some(t) = &h.type_ {
                let _ = write!(header, " {t}");
                if let Some(n) = &h.name {
                    let _ = write!(header, " as {n}");
                }
            }
            header.push(':');
            self.indented(header, &h.body);
        }
        self.orelse(orelse);
        if !finalbody.is_empty() {
            self.indented("finally:".into(), finalbody);
        }
    }
}

fn join(exprs: &[Expr]) -> String {
    exprs
        .iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

fn names(ids: &[ast::Identifier]) -> String {
    ids.iter().map(|i| i.as_str()).collect::<Vec<_>>().join(", ")
}

fn aliases(names: &[ast::Alias]) -> String {
    names
        .iter()
        .map(|a| match &a.asname {
            Some(n) => format!("{} as {n}", a.name),
            None => a.name.to_string(),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn keyword(k: &ast::Keyword) -> String {
    match &k.arg {
        Some(a) => format!("{a}={}", k.value),
        None => format!("**{}", k.value),
    }
}

fn with_items(items: &[ast::WithItem]) -> String {
    items
        .iter()
        .map(|i| match &i.optional_vars {
            Some(v) => format!("{} as {v}", i.context_expr),
            None => i.context_expr.to_string(),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn type_params(params: &[ast::TypeParam]) -> String {
    if params.is_empty() {
        return String::new();
    }
    let parts: Vec<String> = params
        .iter()
        .map(|p| match p {
            ast::TypeParam::TypeVar(t) => match &t.bound {
                Some(b) => format!("{}: {b}", t.name),
                None => t.name.to_string(),
            },
            ast::TypeParam::ParamSpec(p) => format!("**{}", p.name),
            ast::TypeParam::TypeVarTuple(t) => format!("*{}", t.name),
        })
        .collect();
    format!("[{}]", parts.join(", "))
}

fn arg(a: &ast::Arg) -> String {
    match &a.annotation {
        Some(ann) => format!("{}: {ann}", a.arg),
        None => a.arg.to_string(),
    }
}

fn arg_with_default(a: &ast::ArgWithDefault) -> String {
    let mut s = arg(&a.def);
    if let Some(d) = &a.default {
        if a.def.annotation.is_some() {
            let _ = write!(s, " = {d}");
        } else {
            let _ = write!(s, "={d}");
        }
    }
    s
}

pub(crate) fn arguments(args: &ast::Arguments) -> String {
    let mut parts: Vec<String> = Vec::new();
    parts.extend(args.posonlyargs.iter().map(arg_with_default));
    if !args.posonlyargs.is_empty() {
        parts.push("/".into());
    }
    parts.extend(args.args.iter().map(arg_with_default));
    match &args.vararg {
        Some(v) => parts.push(format!("*{}", arg(v))),
        None if !args.kwonlyargs.is_empty() => parts.push("*".into()),
        None => {}
    }
    parts.extend(args.kwonlyargs.iter().map(arg_with_default));
    if let Some(k) = &args.kwarg {
        parts.push(format!("**{}", arg(k)));
    }
    parts.join(", ")
}

fn operator(op: &Operator) -> &'static str {
    match op {
        Operator::Add => "+",
        Operator::Sub => "-",
        Operator::Mult => "*",
        Operator::MatMult => "@",
        Operator::Div => "/",
        Operator::Mod => "%",
        Operator::Pow => "**",
        Operator::LShift => "<<",
        Operator::RShift => ">>",
        Operator::BitOr => "|",
        Operator::BitXor => "^",
        Operator::BitAnd => "&",
        Operator::FloorDiv => "//",
    }
}

fn singleton(c: &Constant) -> String {
    match c {
        Constant::None => "None".into(),
        Constant::Bool(true) => "True".into(),
        Constant::Bool(false) => "False".into(),
        other => other.to_string(),
    }
}

fn pattern(p: &Pattern, nested: bool) -> String {
    match p {
        Pattern::MatchValue(v) => v.value.to_string(),
        Pattern::MatchSingleton(s) => singleton(&s.value),
        Pattern::MatchSequence(s) => {
            let items: Vec<String> = s.patterns.iter().map(|p| pattern(p, true)).collect();
            format!("[{}]", items.join(", "))
        }
        Pattern::MatchMapping(m) => {
            let mut items: Vec<String> = m
                .keys
                .iter()
                .zip(&m.patterns)
                .map(|(k, p)| format!("{k}: {}", pattern(p, true)))
                .collect();
            if let Some(rest) = &m.rest {
                items.push(format!("**{rest}"));
            }
            format!("{{{}}}", items.join(", "))
        }
        Pattern::MatchClass(c) => {
            let mut items: Vec<String> = c.patterns.iter().map(|p| pattern(p, true)).collect();
            items.extend(
                c.kwd_attrs
                    .iter()
                    .zip(&c.kwd_patterns)
                    .map(|(a, p)| format!("{a}={}", pattern(p, true))),
            );
            format!("{}({})", c.cls, items.join(", "))
        }
        Pattern::MatchStar(s) => match &s.name {
            Some(n) => format!("*{n}"),
            None => "*_".into(),
        },
        Pattern::MatchAs(a) => match (&a.pattern, &a.name) {
            (None, None) => "_".into(),
            (None, Some(n)) => n.to_string(),
            (Some(inner), name) => {
                let text = format!(
                    "{} as {}",
                    pattern(inner, true),
                    name.as_ref().map(|n| n.as_str()).unwrap_or("_")
                );
                if nested {
                    format!("({text})")
                } else {
                    text
                }
            }
        },
        Pattern::MatchOr(o) => {
            let items: Vec<String> = o.patterns.iter().map(|p| pattern(p, true)).collect();
            let text = items.join(" | ");
            if nested {
                format!("({text})")
            } else {
                text
            }
        }
    }
}
