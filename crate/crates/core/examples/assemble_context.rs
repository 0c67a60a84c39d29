//! Packs an instance into a query block and budgeted reference blocks.

use coedit::context::{assemble, ContextLimits, SimpleTokenizer};
use coedit::edit::line_diff;
use coedit::instance::{ContextChange, ProblemInstance, UnitChangeKind};
use coedit::python::{UnitId, UnitKind};

fn main() {
    let mut inst = ProblemInstance::from_texts(&["def g(v):", "    return old(v)"], &["def g(v):", "    return new(v)"]);
    for i in 0..5 {
        inst.prior_changes.push(ContextChange {
            unit: UnitId {
                module: "m".into(),
                name: format!("f{i}"),
                kind: UnitKind::Function,
            },
            kind: UnitChangeKind::Modified,
            diff: line_diff(&[format!("def f{i}():"), "    old()".into()], &[format!("def f{i}():"), "    new()".into()]),
        });
    }
    // a tight budget, so the oldest changes are dropped
    let limits = ContextLimits {
        reference_budget: 40,
        ..ContextLimits::default()
    };
    let ctx = assemble(&inst, &SimpleTokenizer, &limits).unwrap();
    println!("query ({} tokens):\n{}\n", ctx.query.token_count, ctx.query.payload.render());
    for b in &ctx.references {
        println!("{:?} ({} tokens)", b.source, b.token_count);
    }
    println!("dropped: {:?}", ctx.dropped);
}
