//! Project-local static symbol index and usage resolution.

use super::{
    module_name_for_path, parse_suite, units_from_suite, CodeUnit, LineIndex, ParseError, UnitKind,
};
use rustpython_ast::Visitor;
use rustpython_parser::ast::{self, Expr, ExprContext, Ranged, Stmt};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UsageKind {
    Function,
    Variable,
    ClassMember,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageSite {
    /// Dotted name, `module.Class.member`.
    pub symbol: String,
    pub kind: UsageKind,
    pub definition_text: String,
    pub module: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureEntry {
    pub module: String,
    pub symbol: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SignatureDoc {
    pub entries: Vec<SignatureEntry>,
}

impl SignatureDoc {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Rendered document: a `# module: name` header before each module's
    /// entries.
    pub fn render(&self) -> String {
        self.to_string()
    }

    pub fn lines(&self) -> Vec<String> {
        self.render().lines().map(str::to_string).collect()
    }
}

impl fmt::Display for SignatureDoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut current: Option<&str> = None;
        for e in &self.entries {
            if current != Some(e.module.as_str()) {
                writeln!(f, "# module: {}", e.module)?;
                current = Some(&e.module);
            }
            writeln!(f, "{}", e.text)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DefKind {
    Function,
    Variable,
    Class,
    Member,
}

#[derive(Debug, Clone)]
struct Definition {
    kind: DefKind,
    text: String,
    line: usize,
}

#[derive(Debug, Clone, Default)]
struct ClassInfo {
    members: HashMap<String, Definition>,
    bases: Vec<Vec<String>>,
}

#[derive(Debug, Clone)]
pub(crate) enum Import {
    /// `import a.b` binds `a`; `import a.b as x` binds `x` to `a.b`.
    Module(String),
    /// `from m import name`, with `m` already made absolute.
    Symbol { module: String, name: String },
}

/// One parsed module of the project.
#[derive(Debug, Clone)]
pub struct ModuleInfo {
    pub name: String,
    pub path: String,
    pub units: Vec<CodeUnit>,
    lines: LineIndex,
    defs: HashMap<String, Definition>,
    classes: HashMap<String, ClassInfo>,
    bindings: HashMap<String, Import>,
    /// Every import statement in the file, including nested ones.
    pub(crate) imports: Vec<Import>,
    is_package: bool,
}

impl ModuleInfo {
    pub fn parse(path: &str, source: &str) -> Result<Self, ParseError> {
        let name = module_name_for_path(path);
        let suite = parse_suite(source)?;
        let mut info = ModuleInfo {
            units: units_from_suite(&suite, source, &name),
            is_package: path.ends_with("__init__.py"),
            name,
            path: path.to_string(),
            lines: LineIndex::new(source),
            defs: HashMap::new(),
            classes: HashMap::new(),
            bindings: HashMap::new(),
            imports: Vec::new(),
        };
        let mut collector = Collector {
            info: &mut info,
            source,
        };
        collector.scope(&suite, None);
        collector.all_imports(&suite);
        Ok(info)
    }

    fn package(&self) -> &str {
        if self.is_package {
            &self.name
        } else {
            self.name.rsplit_once('.').map(|(p, _)| p).unwrap_or("")
        }
    }

    fn absolute(&self, module: Option<&str>, level: u32) -> String {
        if level == 0 {
            return module.unwrap_or("").to_string();
        }
        let mut base = self.package().to_string();
        for _ in 1..level {
            base = base.rsplit_once('.').map(|(p, _)| p.to_string()).unwrap_or_default();
        }
        match (base.is_empty(), module) {
            (_, None) => base,
            (true, Some(m)) => m.to_string(),
            (false, Some(m)) => format!("{base}.{m}"),
        }
    }
}

struct Collector<'a> {
    info: &'a mut ModuleInfo,
    source: &'a str,
}

impl Collector<'_> {
    fn text_of<T: Ranged>(&self, node: &T) -> String {
        let r = node.range();
        statement_text(self.source, r.start().into(), r.end().into())
    }

    fn line_of<T: Ranged>(&self, node: &T) -> usize {
        self.info.lines.line_of(node.range().start().into())
    }

    fn define(&mut self, class: Option<&str>, name: &str, def: Definition) {
        let table = match class {
            Some(c) => &mut self.info.classes.entry(c.to_string()).or_default().members,
            None => &mut self.info.defs,
        };
        match table.get(name) {
            Some(existing) if existing.line <= def.line => {}
            _ => {
                table.insert(name.to_string(), def);
            }
        }
    }

    fn scope(&mut self, body: &[Stmt], class: Option<&str>) {
        let var_kind = if class.is_some() {
            DefKind::Member
        } else {
            DefKind::Variable
        };
        for stmt in body {
            let line = self.line_of(stmt);
            match stmt {
                Stmt::FunctionDef(f) => {
                    let text = header_text(self.source, f.range.start().into());
                    self.define(class, &f.name, Definition { kind: DefKind::Function, text, line });
                    if let Some(c) = class {
                        self.self_attributes(&f.body, c);
                    }
                }
                Stmt::AsyncFunctionDef(f) => {
                    let text = header_text(self.source, f.range.start().into());
                    self.define(class, &f.name, Definition { kind: DefKind::Function, text, line });
                    if let Some(c) = class {
                        self.self_attributes(&f.body, c);
                    }
                }
                Stmt::ClassDef(c) => {
                    let qual = match class {
                        Some(outer) => format!("{outer}.{}", c.name),
                        None => c.name.to_string(),
                    };
                    let text = header_text(self.source, c.range.start().into());
                    let kind = if class.is_some() { DefKind::Member } else { DefKind::Class };
                    self.define(class, &c.name, Definition { kind, text, line });
                    let info = self.info.classes.entry(qual.clone()).or_default();
                    info.bases = c.bases.iter().filter_map(dotted).collect();
                    self.scope(&c.body, Some(&qual));
                }
                Stmt::Assign(a) => {
                    let text = self.text_of(stmt);
                    for t in &a.targets {
                        for n in target_names(t) {
                            self.define(class, &n, Definition { kind: var_kind, text: text.clone(), line });
                        }
                    }
                }
                Stmt::AnnAssign(a) => {
                    let text = self.text_of(stmt);
                    for n in target_names(&a.target) {
                        self.define(class, &n, Definition { kind: var_kind, text: text.clone(), line });
                    }
                }
                Stmt::Import(i) if class.is_none() => {
                    for alias in &i.names {
                        let (bound, target) = match &alias.asname {
                            Some(a) => (a.to_string(), alias.name.to_string()),
                            None => {
                                let first = alias.name.split('.').next().unwrap_or("");
                                (first.to_string(), first.to_string())
                            }
                        };
                        self.info.bindings.entry(bound).or_insert(Import::Module(target));
                    }
                }
                Stmt::ImportFrom(i) if class.is_none() => {
                    let level = i.level.map(|l| l.to_u32()).unwrap_or(0);
                    let module = self.info.absolute(i.module.as_deref(), level);
                    for alias in &i.names {
                        if alias.name.as_str() == "*" {
                            continue;
                        }
                        let bound = alias.asname.as_ref().unwrap_or(&alias.name).to_string();
                        self.info.bindings.entry(bound).or_insert(Import::Symbol {
                            module: module.clone(),
                            name: alias.name.to_string(),
                        });
                    }
                }
                // definitions guarded by `if`, `try` and friends still bind
                // names in this scope
                Stmt::If(s) => {
                    self.scope(&s.body, class);
                    self.scope(&s.orelse, class);
                }
                Stmt::Try(s) => {
                    self.scope(&s.body, class);
                    for h in &s.handlers {
                        let ast::ExceptHandler::ExceptHandler(h) = h;
                        self.scope(&h.body, class);
                    }
                    self.scope(&s.orelse, class);
                    self.scope(&s.finalbody, class);
                }
                Stmt::With(s) => self.scope(&s.body, class),
                Stmt::For(s) => {
                    self.scope(&s.body, class);
                    self.scope(&s.orelse, class);
                }
                Stmt::While(s) => {
                    self.scope(&s.body, class);
                    self.scope(&s.orelse, class);
                }
                _ => {}
            }
        }
    }

    /// Records `self.x = ...` assignments found anywhere in a method body.
    fn self_attributes(&mut self, body: &[Stmt], class: &str) {
        for stmt in body {
            let targets: Vec<&Expr> = match stmt {
                Stmt::Assign(a) => a.targets.iter().collect(),
                Stmt::AnnAssign(a) => vec![&a.target],
                _ => Vec::new(),
            };
            for t in targets {
                if let Expr::Attribute(attr) = t {
                    if matches!(attr.value.as_ref(), Expr::Name(n) if n.id.as_str() == "self") {
                        let def = Definition {
                            kind: DefKind::Member,
                            text: self.text_of(stmt),
                            line: self.line_of(stmt),
                        };
                        self.define(Some(class), &attr.attr, def);
                    }
                }
            }
            for nested in child_bodies(stmt) {
                if !matches!(stmt, Stmt::FunctionDef(_) | Stmt::AsyncFunctionDef(_) | Stmt::ClassDef(_)) {
                    self.self_attributes(nested, class);
                }
            }
        }
    }

    fn all_imports(&mut self, body: &[Stmt]) {
        for stmt in body {
            match stmt {
                Stmt::Import(i) => {
                    for alias in &i.names {
                        self.info.imports.push(Import::Module(alias.name.to_string()));
                    }
                }
                Stmt::ImportFrom(i) => {
                    let level = i.level.map(|l| l.to_u32()).unwrap_or(0);
                    let module = self.info.absolute(i.module.as_deref(), level);
                    for alias in &i.names {
                        self.info.imports.push(Import::Symbol {
                            module: module.clone(),
                            name: alias.name.to_string(),
                        });
                    }
                }
                _ => {}
            }
            for nested in child_bodies(stmt) {
                self.all_imports(nested);
            }
        }
    }
}

fn child_bodies(stmt: &Stmt) -> Vec<&[Stmt]> {
    match stmt {
        Stmt::FunctionDef(s) => vec![&s.body],
        Stmt::AsyncFunctionDef(s) => vec![&s.body],
        Stmt::ClassDef(s) => vec![&s.body],
        Stmt::If(s) => vec![&s.body, &s.orelse],
        Stmt::For(s) => vec![&s.body, &s.orelse],
        Stmt::AsyncFor(s) => vec![&s.body, &s.orelse],
        Stmt::While(s) => vec![&s.body, &s.orelse],
        Stmt::With(s) => vec![&s.body],
        Stmt::AsyncWith(s) => vec![&s.body],
        Stmt::Try(s) => {
            let mut v: Vec<&[Stmt]> = vec![&s.body, &s.orelse, &s.finalbody];
            v.extend(s.handlers.iter().map(|h| {
                let ast::ExceptHandler::ExceptHandler(h) = h;
                h.body.as_slice()
            }));
            v
        }
        Stmt::TryStar(s) => {
            let mut v: Vec<&[Stmt]> = vec![&s.body, &s.orelse, &s.finalbody];
            v.extend(s.handlers.iter().map(|h| {
                let ast::ExceptHandler::ExceptHandler(h) = h;
                h.body.as_slice()
            }));
            v
        }
        Stmt::Match(s) => s.cases.iter().map(|c| c.body.as_slice()).collect(),
        _ => Vec::new(),
    }
}

fn target_names(target: &Expr) -> Vec<String> {
    match target {
        Expr::Name(n) => vec![n.id.to_string()],
        Expr::Tuple(t) => t.elts.iter().flat_map(target_names).collect(),
        Expr::List(l) => l.elts.iter().flat_map(target_names).collect(),
        Expr::Starred(s) => target_names(&s.value),
        _ => Vec::new(),
    }
}

/// `a.b.c` as `["a", "b", "c"]`; `None` for anything else.
fn dotted(expr: &Expr) -> Option<Vec<String>> {
    match expr {
        Expr::Name(n) => Some(vec![n.id.to_string()]),
        Expr::Attribute(a) => {
            let mut base = dotted(&a.value)?;
            base.push(a.attr.to_string());
            Some(base)
        }
        _ => None,
    }
}

/// Source text of a statement with continuation lines dedented to match the
/// first line.
fn statement_text(source: &str, start: usize, end: usize) -> String {
    let line_start = source[..start].rfind('\n').map(|i| i + 1).unwrap_or(0);
    let indent = start - line_start;
    let mut out = String::new();
    for (i, line) in source[start..end].split('\n').enumerate() {
        if i > 0 {
            out.push('\n');
            let ws = line.len() - line.trim_start().len();
            out.push_str(&line[ws.min(indent)..]);
        } else {
            out.push_str(line);
        }
    }
    out.trim_end().to_string()
}

/// The `def ...:` or `class ...:` header starting at `start`, followed by
/// ` ...`.
fn header_text(source: &str, start: usize) -> String {
    let bytes = source.as_bytes();
    let mut depth = 0i32;
    let mut i = start;
    let mut end = source.len();
    while i < bytes.len() {
        match bytes[i] {
            b'(' | b'[' | b'{' => depth += 1,
            b')' | b']' | b'}' => depth -= 1,
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            q @ (b'\'' | b'"') => {
                let triple = bytes[i..].starts_with(&[q, q, q]);
                let width = if triple { 3 } else { 1 };
                i += width;
                while i < bytes.len() {
                    if bytes[i] == b'\\' {
                        i += 2;
                        continue;
                    }
                    if bytes[i] == q && (!triple || bytes[i..].starts_with(&[q, q, q])) {
                        i += width;
                        break;
                    }
                    i += 1;
                }
                continue;
            }
            b':' if depth == 0 => {
                end = i + 1;
                break;
            }
            _ => {}
        }
        i += 1;
    }
    format!("{} ...", statement_text(source, start, end.min(source.len())))
}

/// Static index over all parseable modules of a project snapshot.
#[derive(Debug, Clone, Default)]
pub struct ProjectIndex {
    modules: BTreeMap<String, Arc<ModuleInfo>>,
    paths: BTreeMap<String, String>,
}

#[derive(Debug, Clone)]
enum Resolved<'a> {
    Module(&'a str),
    Class {
        module: &'a str,
        qual: String,
    },
    Def {
        module: &'a str,
        symbol: String,
        def: &'a Definition,
        member: bool,
    },
}

impl ProjectIndex {
    /// Indexes `(path, source)` pairs; files that fail to parse are skipped
    /// and returned with their error.
    pub fn build<P, S>(files: impl IntoIterator<Item = (P, S)>) -> (Self, Vec<(String, ParseError)>)
    where
        P: AsRef<str>,
        S: AsRef<str>,
    {
        let mut index = Self::default();
        let mut failures = Vec::new();
        for (path, source) in files {
            let path = path.as_ref();
            if let Err(e) = index.add(path, source.as_ref()) {
                failures.push((path.to_string(), e));
            }
        }
        (index, failures)
    }

    pub fn add(&mut self, path: &str, source: &str) -> Result<(), ParseError> {
        self.insert(Arc::new(ModuleInfo::parse(path, source)?));
        Ok(())
    }

    /// Adds or replaces the module parsed from `info.path`.
    pub fn insert(&mut self, info: Arc<ModuleInfo>) {
        self.remove_path(&info.path);
        self.paths.insert(info.path.clone(), info.name.clone());
        self.modules.insert(info.name.clone(), info);
    }

    pub fn remove_path(&mut self, path: &str) {
        if let Some(name) = self.paths.remove(path) {
            if self.modules.get(&name).is_some_and(|m| m.path == path) {
                self.modules.remove(&name);
            }
        }
    }

    pub fn modules(&self) -> impl Iterator<Item = &ModuleInfo> {
        self.modules.values().map(|m| m.as_ref())
    }

    pub fn module(&self, name: &str) -> Option<&ModuleInfo> {
        self.modules.get(name).map(|m| m.as_ref())
    }

    pub fn module_by_path(&self, path: &str) -> Option<&ModuleInfo> {
        let name = self.paths.get(path)?;
        self.module(name).filter(|m| m.path == path)
    }

    /// Exact module lookup, falling back to a unique module whose name ends
    /// with `.name` (for projects rooted below the repository root, such as
    /// `src/`).
    pub fn find_module(&self, name: &str) -> Option<&ModuleInfo> {
        if name.is_empty() {
            return None;
        }
        if let Some(m) = self.modules.get(name) {
            return Some(m);
        }
        let suffix = format!(".{name}");
        let mut hits = self.modules().filter(|m| m.name.ends_with(&suffix));
        match (hits.next(), hits.next()) {
            (Some(m), None) => Some(m),
            _ => None,
        }
    }

    fn resolve_in_module<'a>(&'a self, module: &'a ModuleInfo, name: &str, depth: usize) -> Option<Resolved<'a>> {
        if depth > 8 {
            return None;
        }
        if let Some(def) = module.defs.get(name) {
            return Some(match def.kind {
                DefKind::Class => Resolved::Class {
                    module: &module.name,
                    qual: name.to_string(),
                },
                _ => Resolved::Def {
                    module: &module.name,
                    symbol: name.to_string(),
                    def,
                    member: false,
                },
            });
        }
        if let Some(binding) = module.bindings.get(name) {
            return self.resolve_import(binding, depth + 1);
        }
        let sub = format!("{}.{name}", module.name);
        self.modules.get(&sub).map(|m| Resolved::Module(&m.name))
    }

    fn resolve_import(&self, import: &Import, depth: usize) -> Option<Resolved<'_>> {
        match import {
            Import::Module(m) => self.find_module(m).map(|m| Resolved::Module(&m.name)),
            Import::Symbol { module, name } => {
                if let Some(m) = self.find_module(&format!("{module}.{name}")) {
                    return Some(Resolved::Module(&m.name));
                }
                let m = self.find_module(module)?;
                self.resolve_in_module(m, name, depth)
            }
        }
    }

    fn class_member<'a>(
        &'a self,
        module: &'a str,
        qual: &str,
        member: &str,
        seen: &mut HashSet<(String, String)>,
    ) -> Option<Resolved<'a>> {
        if !seen.insert((module.to_string(), qual.to_string())) {
            return None;
        }
        let info = self.modules.get(module)?;
        let class = info.classes.get(qual)?;
        if let Some(def) = class.members.get(member) {
            let nested = format!("{qual}.{member}");
            if info.classes.contains_key(&nested) {
                return Some(Resolved::Class { module, qual: nested });
            }
            return Some(Resolved::Def {
                module,
                symbol: format!("{qual}.{member}"),
                def,
                member: true,
            });
        }
        for base in &class.bases {
            if let Some(Resolved::Class { module: bm, qual: bq }) = self.resolve_chain(info, base) {
                if let Some(r) = self.class_member(bm, &bq, member, seen) {
                    return Some(r);
                }
            }
        }
        None
    }

    fn resolve_chain<'a>(&'a self, module: &'a ModuleInfo, chain: &[String]) -> Option<Resolved<'a>> {
        let mut cur = self.resolve_in_module(module, &chain[0], 0)?;
        for attr in &chain[1..] {
            cur = self.step(&cur, attr)?;
        }
        Some(cur)
    }

    fn step<'a>(&'a self, cur: &Resolved<'a>, attr: &str) -> Option<Resolved<'a>> {
        match cur {
            Resolved::Module(m) => {
                let info = self.modules.get(*m)?;
                self.resolve_in_module(info, attr, 0)
            }
            Resolved::Class { module, qual } => {
                self.class_member(module, qual, attr, &mut HashSet::new())
            }
            Resolved::Def { .. } => None,
        }
    }

    fn site(&self, resolved: &Resolved<'_>, unit: &CodeUnit) -> Option<UsageSite> {
        let (module, symbol, def, member) = match resolved {
            Resolved::Module(_) => return None,
            Resolved::Class { module, qual } => {
                let info = self.modules.get(*module)?;
                let def = match qual.rsplit_once('.') {
                    Some((outer, last)) => info.classes.get(outer)?.members.get(last)?,
                    None => info.defs.get(qual.as_str())?,
                };
                (*module, qual.clone(), def, false)
            }
            Resolved::Def {
                module,
                symbol,
                def,
                member,
            } => (*module, symbol.clone(), *def, *member),
        };
        // definitions inside the unit itself are already visible
        if module == unit.id.module && (unit.span.0..=unit.span.1).contains(&def.line) {
            return None;
        }
        let kind = match def.kind {
            DefKind::Function => UsageKind::Function,
            DefKind::Member if member => UsageKind::ClassMember,
            DefKind::Member | DefKind::Variable | DefKind::Class => UsageKind::Variable,
        };
        Some(UsageSite {
            symbol: format!("{module}.{symbol}"),
            kind,
            definition_text: def.text.clone(),
            module: module.to_string(),
        })
    }
}

/// Usages of project symbols in `unit`, in order of first reference.
pub fn find_usages(unit: &CodeUnit, project: &ProjectIndex) -> Vec<UsageSite> {
    let Some(module) = project.module(&unit.id.module) else {
        return Vec::new();
    };
    let Ok(suite) = parse_suite(&super::dedent(&unit.text())) else {
        return Vec::new();
    };
    let mut refs = RefCollector::default();
    for stmt in suite {
        refs.visit_stmt(stmt);
    }
    let is_function = unit.kind() == UnitKind::Function;
    let class = unit.id.enclosing_class().map(str::to_string);
    refs.chains.sort_by_key(|(offset, _)| *offset);

    let mut out: Vec<UsageSite> = Vec::new();
    let push = |site: Option<UsageSite>, out: &mut Vec<UsageSite>| {
        if let Some(site) = site {
            if !out.iter().any(|s| s.symbol == site.symbol && s.definition_text == site.definition_text) {
                out.push(site);
            }
        }
    };
    for (_, chain) in &refs.chains {
        let head = chain[0].as_str();
        let mut cur = if is_function && matches!(head, "self" | "cls") && class.is_some() {
            Some(Resolved::Class {
                module: &module.name,
                qual: class.clone().unwrap_or_default(),
            })
        } else if is_function && refs.locals.contains(head) && !refs.globals.contains(head) {
            None
        } else {
            let r = project.resolve_in_module(module, head, 0);
            if let Some(r) = &r {
                push(project.site(r, unit), &mut out);
            }
            r
        };
        for attr in &chain[1..] {
            let Some(c) = &cur else { break };
            cur = project.step(c, attr);
            if let Some(r) = &cur {
                push(project.site(r, unit), &mut out);
            }
        }
    }
    out
}

/// Signature document for `unit`: usages grouped by defining module (sorted
/// by name), first-use order within a module.
pub fn build_signature_doc(unit: &CodeUnit, project: &ProjectIndex) -> SignatureDoc {
    let mut groups: BTreeMap<String, Vec<SignatureEntry>> = BTreeMap::new();
    for site in find_usages(unit, project) {
        groups.entry(site.module.clone()).or_default().push(SignatureEntry {
            module: site.module,
            symbol: site.symbol,
            text: site.definition_text,
        });
    }
    SignatureDoc {
        entries: groups.into_values().flatten().collect(),
    }
}

/// Name and attribute-chain references plus locally bound names.
#[derive(Default)]
struct RefCollector {
    chains: Vec<(usize, Vec<String>)>,
    locals: HashSet<String>,
    globals: HashSet<String>,
}

impl Visitor for RefCollector {
    fn visit_expr_name(&mut self, node: ast::ExprName) {
        match node.ctx {
            ExprContext::Load => self
                .chains
                .push((node.range.start().into(), vec![node.id.to_string()])),
            _ => {
                self.locals.insert(node.id.to_string());
            }
        }
    }

    fn visit_expr_attribute(&mut self, node: ast::ExprAttribute) {
        let expr = Expr::Attribute(node);
        match dotted(&expr) {
            Some(chain) => {
                let Expr::Attribute(node) = expr else { unreachable!() };
                self.chains.push((node.range.start().into(), chain));
            }
            None => {
                let Expr::Attribute(node) = expr else { unreachable!() };
                self.visit_expr(*node.value);
            }
        }
    }

    // the generated visitor does not descend into these nodes

    fn visit_arguments(&mut self, node: ast::Arguments) {
        let ast::Arguments {
            posonlyargs,
            args,
            vararg,
            kwonlyargs,
            kwarg,
            ..
        } = node;
        for a in posonlyargs.into_iter().chain(args).chain(kwonlyargs) {
            if let Some(d) = a.default {
                self.visit_expr(*d);
            }
            self.visit_arg(a.def);
        }
        for a in vararg.into_iter().chain(kwarg) {
            self.visit_arg(*a);
        }
    }

    fn visit_keyword(&mut self, node: ast::Keyword) {
        self.visit_expr(node.value);
    }

    fn visit_withitem(&mut self, node: ast::WithItem) {
        self.visit_expr(node.context_expr);
        if let Some(v) = node.optional_vars {
            self.visit_expr(*v);
        }
    }

    fn visit_match_case(&mut self, node: ast::MatchCase) {
        self.visit_pattern(node.pattern);
        if let Some(g) = node.guard {
            self.visit_expr(*g);
        }
        for s in node.body {
            self.visit_stmt(s);
        }
    }

    fn visit_comprehension(&mut self, node: ast::Comprehension) {
        self.visit_expr(node.target);
        self.visit_expr(node.iter);
        for cond in node.ifs {
            self.visit_expr(cond);
        }
    }

    fn visit_arg(&mut self, node: ast::Arg) {
        self.locals.insert(node.arg.to_string());
        if let Some(a) = node.annotation {
            self.visit_expr(*a);
        }
    }

    fn visit_stmt_function_def(&mut self, node: ast::StmtFunctionDef) {
        self.locals.insert(node.name.to_string());
        self.generic_visit_stmt_function_def(node);
    }

    fn visit_stmt_async_function_def(&mut self, node: ast::StmtAsyncFunctionDef) {
        self.locals.insert(node.name.to_string());
        self.generic_visit_stmt_async_function_def(node);
    }

    fn visit_stmt_class_def(&mut self, node: ast::StmtClassDef) {
        self.locals.insert(node.name.to_string());
        self.generic_visit_stmt_class_def(node);
    }

    fn visit_stmt_import(&mut self, node: ast::StmtImport) {
        for a in node.names {
            let bound = a.asname.unwrap_or(a.name);
            self.locals.insert(bound.split('.').next().unwrap_or("").to_string());
        }
    }

    fn visit_stmt_import_from(&mut self, node: ast::StmtImportFrom) {
        for a in node.names {
            self.locals.insert(a.asname.unwrap_or(a.name).to_string());
        }
    }

    fn visit_stmt_global(&mut self, node: ast::StmtGlobal) {
        self.globals.extend(node.names.into_iter().map(|n| n.to_string()));
    }

    fn visit_excepthandler_except_handler(&mut self, node: ast::ExceptHandlerExceptHandler) {
        if let Some(n) = &node.name {
            self.locals.insert(n.to_string());
        }
        self.generic_visit_excepthandler_except_handler(node);
    }

    fn visit_pattern_match_as(&mut self, node: ast::PatternMatchAs) {
        if let Some(n) = &node.name {
            self.locals.insert(n.to_string());
        }
        self.generic_visit_pattern_match_as(node);
    }

    fn visit_pattern_match_star(&mut self, node: ast::PatternMatchStar) {
        if let Some(n) = &node.name {
            self.locals.insert(n.to_string());
        }
    }

    fn visit_pattern_match_mapping(&mut self, node: ast::PatternMatchMapping) {
        if let Some(n) = &node.rest {
            self.locals.insert(n.to_string());
        }
        self.generic_visit_pattern_match_mapping(node);
    }
}
