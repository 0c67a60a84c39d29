use super::index::Import;
use super::ProjectIndex;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Dotted module name for a repository-relative path: `pkg/a.py` → `pkg.a`,
/// `pkg/__init__.py` → `pkg`.
pub fn module_name_for_path(path: &str) -> String {
    let path = path.replace('\\', "/");
    let stem = path.strip_suffix(".py").unwrap_or(&path);
    let mut parts: Vec<&str> = stem.split('/').filter(|p| !p.is_empty() && *p != ".").collect();
    if parts.last() == Some(&"__init__") && parts.len() > 1 {
        parts.pop();
    }
    parts.join(".")
}

/// Importer → imported edges between project-internal modules.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportGraph {
    pub nodes: BTreeSet<String>,
    pub edges: BTreeSet<(String, String)>,
}

impl ImportGraph {
    pub fn imports(&self, importer: &str, imported: &str) -> bool {
        self.edges
            .contains(&(importer.to_string(), imported.to_string()))
    }

    pub fn imported_by<'a>(&'a self, importer: &'a str) -> impl Iterator<Item = &'a str> {
        self.edges
            .iter()
            .filter(move |(a, _)| a == importer)
            .map(|(_, b)| b.as_str())
    }
}

/// One edge per import statement that resolves to a module of the project.
/// `import a.b.c` resolves to the longest existing prefix; `from p import x`
/// resolves to `p.x` when that is a module and to `p` otherwise.
pub fn import_graph(project: &ProjectIndex) -> ImportGraph {
    let mut graph = ImportGraph::default();
    for module in project.modules() {
        graph.nodes.insert(module.name.clone());
        for import in &module.imports {
            let target = match import {
                Import::Module(name) => longest_prefix(project, name),
                Import::Symbol { module, name } => project
                    .find_module(&format!("{module}.{name}"))
                    .or_else(|| project.find_module(module))
                    .map(|m| m.name.clone()),
            };
            if let Some(t) = target {
                if t != module.name {
                    graph.edges.insert((module.name.clone(), t));
                }
            }
        }
    }
    graph
}

fn longest_prefix(project: &ProjectIndex, dotted: &str) -> Option<String> {
    let parts: Vec<&str> = dotted.split('.').collect();
    (1..=parts.len())
        .rev()
        .find_map(|n| project.find_module(&parts[..n].join(".")))
        .map(|m| m.name.clone())
}
