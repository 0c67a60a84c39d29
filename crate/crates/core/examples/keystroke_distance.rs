//! The three editing-cost metrics on one pair of texts.

use coedit::metrics::{keystroke_cost, levenshtein, EditCostReport, KeystrokeParams};

fn main() {
    let (before, after) = ("total = a + b", "total = sum([a, b])");
    let params = KeystrokeParams::default();
    println!("levenshtein: {}", levenshtein(before, after));
    println!("keystrokes (cursor starts {} away): {}", params.init_cursor_dis, keystroke_cost(before, after, params));
    println!("keystrokes (cursor at start): {}", keystroke_cost(before, after, params.with_init(0)));

    let b = vec!["x = 1".to_string(), "y = 2".to_string()];
    let a = vec!["x = 1".to_string(), "y = 3".to_string(), "z = 4".to_string()];
    println!("{:?}", EditCostReport::between(&b, &a, params));
}
