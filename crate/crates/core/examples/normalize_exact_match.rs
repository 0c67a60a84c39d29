//! Comment-, docstring- and keyword-order-insensitive comparison.

use coedit::metrics::exact_match;
use coedit::python::normalize_code;

fn main() {
    let a = "def f():\n    \"\"\"Doc.\"\"\"\n    return g(b=1, a=2)  # note\n";
    let b = "def f():\n    return g(a=2, b=1)\n";
    println!("{}", normalize_code(a).unwrap());
    println!("equal: {}", exact_match(a, b));
    println!("equal: {}", exact_match("g(a=1)", "g(a=2)"));
}
