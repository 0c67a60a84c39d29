#![allow(dead_code)]

use git2::{Repository, Signature, Time};
use std::path::Path;

/// One scripted commit: files to write (`Some`) or remove (`None`).
pub struct Step {
    pub message: &'static str,
    pub files: Vec<(&'static str, Option<&'static str>)>,
}

pub const UTIL_V0: &str = "import math


def area(r):
    return math.pi * r * r


def scale(x, k):
    y = x * k
    return y


def unused():
    return None
";

pub const AREA_V1: &str = "def area(r):
    if r < 0:
        raise ValueError(\"negative radius\")
    r = float(r)
    return math.pi * r ** 2";

pub const UTIL_V1: &str = "import math


def area(r):
    if r < 0:
        raise ValueError(\"negative radius\")
    r = float(r)
    return math.pi * r ** 2


def scale(x, k):
    y = x * k
    return y


def unused():
    return None
";

pub const UTIL_V3: &str = "import math


def area(r):
    if r < 0:
        raise ValueError(\"negative radius\")
    r = float(r)
    return math.pi * r ** 2


def scale(x, k):
    y = x * k
    return y


def unused():
    return None


def perimeter(r):
    return 2 * math.pi * r
";

pub const SCALE_V4: &str = "def scale(x, factor):
    \"\"\"Multiply x by a non-negative factor.\"\"\"
    if factor < 0:
        raise ValueError(\"negative factor\")
    if factor == 0:
        return 0
    y = x * factor
    return y";

pub const UTIL_V4: &str = "import math


def area(r):
    if r < 0:
        raise ValueError(\"negative radius\")
    r = float(r)
    return math.pi * r ** 2


def scale(x, factor):
    \"\"\"Multiply x by a non-negative factor.\"\"\"
    if factor < 0:
        raise ValueError(\"negative factor\")
    if factor == 0:
        return 0
    y = x * factor
    return y


def unused():
    return None


def perimeter(r):
    return 2 * math.pi * r
";

pub const UTIL_V5: &str = "import math


def area(r):
    if r < 0:
        raise ValueError(\"negative radius\")
    r = float(r)
    return math.pi * r ** 2


def scale(x, factor):
    \"\"\"Multiply x by a non-negative factor.\"\"\"
    if factor < 0:
        raise ValueError(\"negative factor\")
    if factor == 0:
        return 0
    y = x * factor
    return y


def perimeter(r):
    return 2 * math.pi * r
";

pub const APP_V0: &str = "from pkg.util import area, scale


def main(values):
    total = 0
    for v in values:
        total += area(v)
    return total


class Runner:
    def __init__(self, k):
        self.k = k

    def run(self, xs):
        return [scale(x, self.k) for x in xs]
";

pub const MAIN_V6: &str = "def main(values, scale_by=1):
    total = 0.0
    for v in values:
        if v <= 0:
            continue
        total += area(v) * scale_by
    if not total:
        return 0.0
    return round(total, 6)";

pub const RUN_V6: &str = "    def run(self, xs, strict=False):
        out = []
        for x in xs:
            if strict and x is None:
                raise TypeError(\"missing value\")
            if x is None:
                continue
            out.append(scale(x, self.k))
        return out";

pub const APP_V6: &str = "from pkg.util import area, scale


def main(values, scale_by=1):
    total = 0.0
    for v in values:
        if v <= 0:
            continue
        total += area(v) * scale_by
    if not total:
        return 0.0
    return round(total, 6)


class Runner:
    def __init__(self, k):
        self.k = k

    def run(self, xs, strict=False):
        out = []
        for x in xs:
            if strict and x is None:
                raise TypeError(\"missing value\")
            if x is None:
                continue
            out.append(scale(x, self.k))
        return out
";

pub const IO_V7: &str = "def load(path):
    with open(path) as fh:
        return [float(line) for line in fh]
";

/// Ten commits. Hand-counted ledger (root commit excluded from mining):
///
/// | commit | change                                  | changed lines |
/// |--------|-----------------------------------------|---------------|
/// | 1      | modify `area`: +3 lines, 1 replaced      | 5             |
/// | 2      | README only                             | -             |
/// | 3      | add `perimeter`                         | -             |
/// | 4      | modify `scale`: 2 del, 7 add            | 9             |
/// | 5      | delete `unused`                         | -             |
/// | 6      | modify `main` (4 del, 8 add) and `Runner.run` (2 del, 9 add) | 12 + 11 |
/// | 7      | new module with `load`                  | -             |
/// | 8      | README only                             | -             |
/// | 9      | unparseable file                        | -             |
pub fn fixture_steps() -> Vec<Step> {
    vec![
        Step {
            message: "initial",
            files: vec![("pkg/__init__.py", Some("")), ("pkg/util.py", Some(UTIL_V0)), ("pkg/app.py", Some(APP_V0))],
        },
        Step {
            message: "validate radius",
            files: vec![("pkg/util.py", Some(UTIL_V1))],
        },
        Step {
            message: "docs",
            files: vec![("README.md", Some("geometry helpers\n"))],
        },
        Step {
            message: "add perimeter",
            files: vec![("pkg/util.py", Some(UTIL_V3))],
        },
        Step {
            message: "rename scale factor",
            files: vec![("pkg/util.py", Some(UTIL_V4))],
        },
        Step {
            message: "drop unused",
            files: vec![("pkg/util.py", Some(UTIL_V5))],
        },
        Step {
            message: "skip bad values",
            files: vec![("pkg/app.py", Some(APP_V6))],
        },
        Step {
            message: "loader",
            files: vec![("pkg/io.py", Some(IO_V7))],
        },
        Step {
            message: "more docs",
            files: vec![("README.md", Some("geometry helpers\n\nsee pkg/\n"))],
        },
        Step {
            message: "work in progress",
            files: vec![("pkg/broken.py", Some("def oops(:\n    pass\n"))],
        },
    ]
}

pub struct Ledger {
    pub commits_total: usize,
    pub used_commits: usize,
    pub modified_functions: usize,
    pub modified_files: usize,
    pub added_units: usize,
    pub deleted_units: usize,
    pub changed_lines: usize,
    /// Post-commit text of every modified unit, in mining order.
    pub after_texts: &'static [&'static str],
}

pub const LEDGER: Ledger = Ledger {
    commits_total: 10,
    used_commits: 3,
    modified_functions: 4,
    modified_files: 3,
    added_units: 2,
    deleted_units: 1,
    changed_lines: 37,
    after_texts: &[AREA_V1, SCALE_V4, MAIN_V6, RUN_V6],
};

/// Writes `steps` as a linear history into a new repository at `dir`.
pub fn build_repo(dir: &Path, steps: &[Step]) -> Repository {
    let repo = Repository::init(dir).expect("init repository");
    for (n, step) in steps.iter().enumerate() {
        for (path, content) in &step.files {
            let full = dir.join(path);
            match content {
                Some(text) => {
                    std::fs::create_dir_all(full.parent().unwrap()).unwrap();
                    std::fs::write(&full, text).unwrap();
                }
                None => std::fs::remove_file(&full).unwrap(),
            }
        }
        let mut index = repo.index().unwrap();
        index.add_all(["*"], git2::IndexAddOption::DEFAULT, None).unwrap();
        index.update_all(["*"], None).unwrap();
        index.write().unwrap();
        let tree = repo.find_tree(index.write_tree().unwrap()).unwrap();
        let sig = Signature::new("Fixture", "fixture@example.com", &Time::new(1_600_000_000 + n as i64 * 60, 0)).unwrap();
        let parents: Vec<git2::Commit> = repo
            .head()
            .ok()
            .and_then(|h| h.peel_to_commit().ok())
            .into_iter()
            .collect();
        let parent_refs: Vec<&git2::Commit> = parents.iter().collect();
        repo.commit(Some("HEAD"), &sig, &sig, step.message, &tree, &parent_refs).unwrap();
    }
    repo
}
