//! Encode a before/after pair as the model's input and output, then decode
//! the output and apply it.

use coedit::edit::{apply_edit, enc_input, enc_output, line_diff, parse_output, StagedDiff, TokenStream};

fn main() {
    let before = ["def f(x):", "    return x"];
    let after = ["def f(x, y):", "    return x + y"];

    let staged = StagedDiff::from_diff(&line_diff(&before, &after));
    let (query, region) = staged.query();
    let edit = staged.pending_edit();

    let input = enc_input(&query, region).unwrap().render();
    let output = enc_output(&edit, region).render();
    println!("input:\n{input}\n");
    println!("output:\n{output}");

    let statuses: Vec<_> = query.iter().map(|l| l.status).collect();
    let decoded = parse_output(&TokenStream::parse(&output), &statuses, region).unwrap();
    assert_eq!(decoded, edit);
    let result = apply_edit(&query, region, &decoded).unwrap().after();
    println!("applied:\n{}", result.join("\n"));
}
