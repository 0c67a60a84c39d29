//! Cursor-aware keystroke distance.
//!
//! Both strings are consumed from the front. The operations are:
//!
//! | op | cost | guard | effect |
//! |----|------|-------|--------|
//! | M  | 0 | chars equal, not deleting | consume one of each, cursor distance + 1 |
//! | D  | 1 | cursor here, not deleting | consume an input char |
//! | A  | 1 | cursor here, not deleting | consume an output char |
//! | C  | min(distance, jump cost) | none | move cursor here |
//! | S  | 1 | cursor here, not deleting | start a batch deletion |
//! | K  | 0 | deleting | consume an input char |
//! | E  | 1 | cursor here, deleting | end the batch deletion |
//!
//! K deletes at the cursor and therefore leaves the cursor distance
//! unchanged. The cursor distance is clamped at the jump cost: C is the only
//! operation whose cost depends on it, and guards only test for zero.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct KeystrokeParams {
    pub cursor_jump_cost: u32,
    pub init_cursor_dis: u32,
}

impl Default for KeystrokeParams {
    fn default() -> Self {
        Self {
            cursor_jump_cost: 4,
            init_cursor_dis: 4,
        }
    }
}

impl KeystrokeParams {
    pub fn with_init(mut self, init_cursor_dis: u32) -> Self {
        self.init_cursor_dis = init_cursor_dis;
        self
    }
}

const INF: u32 = u32::MAX / 4;

/// Minimum keystroke cost of turning `input` into `output`.
pub fn keystroke_cost(input: &str, output: &str, params: KeystrokeParams) -> u32 {
    let a: Vec<char> = input.chars().collect();
    let b: Vec<char> = output.chars().collect();
    keystroke_cost_chars(&a, &b, params)
}

pub fn keystroke_cost_chars(a: &[char], b: &[char], params: KeystrokeParams) -> u32 {
    let jump = params.cursor_jump_cost as usize;
    let cursors = jump + 1;
    let (n, m) = (a.len(), b.len());
    // cell layout: [j][cursor][deleting]
    let stride = cursors * 2;
    let idx = |j: usize, c: usize, d: usize| j * stride + c * 2 + d;

    // `remaining` counts chars still to consume; the next input char is
    // a[n - i] when i remain.
    let mut prev = vec![INF; (m + 1) * stride]; // i - 1 remaining
    let mut cur = vec![INF; (m + 1) * stride];

    for i in 0..=n {
        for j in 0..=m {
            // External options: transitions leaving this (i, j) cell.
            let match_ok = i > 0 && j > 0 && a[n - i] == b[m - j];
            let base = |c: usize, d: usize, cur: &Vec<u32>, prev: &Vec<u32>| -> u32 {
                let mut best = INF;
                if i == 0 && j == 0 && d == 0 {
                    best = 0;
                }
                if d == 0 {
                    if match_ok {
                        best = best.min(prev[idx(j - 1, (c + 1).min(jump), 0)]);
                    }
                    if c == 0 {
                        if i > 0 {
                            best = best.min(1 + prev[idx(j, 0, 0)]);
                        }
                        if j > 0 {
                            best = best.min(1 + cur[idx(j - 1, 0, 0)]);
                        }
                    }
                } else if i > 0 {
                    best = best.min(prev[idx(j, c, 1)]);
                }
                best
            };

            // Cursor-at-position states reach each other through S and E.
            let ext_idle = base(0, 0, &cur, &prev);
            let ext_del = base(0, 1, &cur, &prev);
            let at_idle = ext_idle.min(1 + ext_del);
            let at_del = ext_del.min(1 + ext_idle);
            cur[idx(j, 0, 0)] = at_idle;
            cur[idx(j, 0, 1)] = at_del;
            for c in 1..cursors {
                let move_cost = c as u32;
                cur[idx(j, c, 0)] = base(c, 0, &cur, &prev).min(move_cost + at_idle);
                cur[idx(j, c, 1)] = base(c, 1, &cur, &prev).min(move_cost + at_del);
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let start = (params.init_cursor_dis as usize).min(jump);
    prev[idx(m, start, 0)]
}
