//! Code units of a module and the signature document of a unit: the
//! signatures of the project definitions it uses.

use coedit::python::{build_signature_doc, extract_units, ProjectIndex};

fn main() {
    let util = "def area(r):\n    return 3.14 * r * r\n\n\ndef scale(x, k):\n    return x * k\n";
    let app = "from util import area\n\n\ndef total(rs):\n    return sum(area(r) for r in rs)\n";
    let (project, errors) = ProjectIndex::build([("util.py", util), ("app.py", app)]);
    assert!(errors.is_empty());

    for unit in extract_units(util, "util").unwrap() {
        println!("{:?} {} lines {:?}", unit.kind(), unit.id.name, unit.span);
    }
    let total = extract_units(app, "app").unwrap().pop().unwrap();
    println!("\n{}", build_signature_doc(&total, &project).render());
}
