use super::{decorated_start, parse_suite, LineIndex, ParseError};
use rustpython_parser::ast;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitKind {
    Function,
    ClassRegion,
    ModuleRegion,
}

/// Identity of a unit across versions of a file.
///
/// Functions are named by their qualified name (`C.m`). Regions are named
/// `<scope>@<k>`, the k-th statement run inside the class or module
/// (`@0` for the first module region, `C@1` for the second region of `C`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UnitId {
    pub module: String,
    pub name: String,
    pub kind: UnitKind,
}

impl UnitId {
    /// Qualified name of the class enclosing this unit, if any.
    pub fn enclosing_class(&self) -> Option<&str> {
        match self.kind {
            UnitKind::ClassRegion => self.name.rsplit_once('@').map(|(c, _)| c),
            UnitKind::Function => self.name.rsplit_once('.').map(|(c, _)| c),
            UnitKind::ModuleRegion => None,
        }
    }
}

impl fmt::Display for UnitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}::{}", self.module, self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeUnit {
    pub id: UnitId,
    /// First and last line, 1-based and inclusive.
    pub span: (usize, usize),
    pub lines: Vec<String>,
}

impl CodeUnit {
    pub fn kind(&self) -> UnitKind {
        self.id.kind
    }

    pub fn text(&self) -> String {
        let mut s = self.lines.join("\n");
        s.push('\n');
        s
    }
}

/// Splits a module into functions, class regions and module regions.
///
/// Functions defined at module level or inside classes are units of their
/// own; functions nested inside other functions stay part of the enclosing
/// function. Maximal runs of other statements between definitions form the
/// regions. Class header lines belong to no unit.
pub fn extract_units(source: &str, module: &str) -> Result<Vec<CodeUnit>, ParseError> {
    let suite = parse_suite(source)?;
    Ok(units_from_suite(&suite, source, module))
}

pub(crate) fn units_from_suite(suite: &[ast::Stmt], source: &str, module: &str) -> Vec<CodeUnit> {
    let index = LineIndex::new(source);
    let lines: Vec<&str> = source.lines().collect();
    let mut walker = Walker {
        index: &index,
        lines: &lines,
        module,
        units: Vec::new(),
    };
    walker.body(suite, None);
    let mut units = walker.units;
    units.sort_by_key(|u| u.span.0);
    // later definitions with an already used name (property setters,
    // conditional redefinitions) get a `#k` suffix
    let mut seen: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
    for u in &mut units {
        let n = seen.entry(u.id.name.clone()).or_insert(0);
        *n += 1;
        if *n > 1 {
            u.id.name = format!("{}#{}", u.id.name, n);
        }
    }
    units
}

struct Walker<'a> {
    index: &'a LineIndex,
    lines: &'a [&'a str],
    module: &'a str,
    units: Vec<CodeUnit>,
}

impl Walker<'_> {
    fn body(&mut self, stmts: &[ast::Stmt], class: Option<&str>) {
        let mut run: Vec<&ast::Stmt> = Vec::new();
        let mut region = 0;
        for stmt in stmts {
            match stmt {
                ast::Stmt::FunctionDef(f) => {
                    self.flush(&mut run, class, &mut region);
                    let start = decorated_start(f, &f.decorator_list);
                    self.function(&f.name, start, stmt, class);
                }
                ast::Stmt::AsyncFunctionDef(f) => {
                    self.flush(&mut run, class, &mut region);
                    let start = decorated_start(f, &f.decorator_list);
                    self.function(&f.name, start, stmt, class);
                }
                ast::Stmt::ClassDef(c) => {
                    self.flush(&mut run, class, &mut region);
                    let qual = qualify(class, &c.name);
                    self.body(&c.body, Some(&qual));
                }
                other => run.push(other),
            }
        }
        self.flush(&mut run, class, &mut region);
    }

    fn function(&mut self, name: &str, start: usize, stmt: &ast::Stmt, class: Option<&str>) {
        let first = self.index.line_of(start);
        let (_, last) = self.index.span(stmt);
        self.push(qualify(class, name), UnitKind::Function, first, last);
    }

    fn flush(&mut self, run: &mut Vec<&ast::Stmt>, class: Option<&str>, region: &mut usize) {
        let (Some(first), Some(last)) = (run.first(), run.last()) else {
            return;
        };
        let (start, _) = self.index.span(*first);
        let (_, end) = self.index.span(*last);
        let (name, kind) = match class {
            Some(c) => (format!("{c}@{region}"), UnitKind::ClassRegion),
            None => (format!("@{region}"), UnitKind::ModuleRegion),
        };
        *region += 1;
        run.clear();
        self.push(name, kind, start, end);
    }

    fn push(&mut self, name: String, kind: UnitKind, first: usize, last: usize) {
        let last = last.min(self.lines.len());
        self.units.push(CodeUnit {
            id: UnitId {
                module: self.module.to_string(),
                name,
                kind,
            },
            span: (first, last),
            lines: self.lines[first - 1..last]
                .iter()
                .map(|l| l.strip_suffix('\r').unwrap_or(l).to_string())
                .collect(),
        });
    }
}

fn qualify(class: Option<&str>, name: &str) -> String {
    match class {
        Some(c) => format!("{c}.{name}"),
        None => name.to_string(),
    }
}
