//! One PASS/FAIL line per acceptance criterion. Reference values come from
//! the brute-force oracles in this file, never from the library itself.

mod common;

use coedit::context::{admit, assemble, segment_references, AssembleError, ContextLimits, SimpleTokenizer, Tokenizer};
use coedit::edit::{
    apply_edit, enc_input, enc_output, line_diff, parse_input, parse_output, EditRegion, LineStatus, StagedDiff,
    StatusedLine, TargetEdit, TokenStream,
};
use coedit::instance::{ContextChange, ProblemInstance, UnitChangeKind};
use coedit::metrics::{exact_match, keystroke_cost, levenshtein, KeystrokeParams};
use coedit::miner::{dataset_stats, mine_repository, mine_snapshots, module_order, MineOptions, Snapshot};
use coedit::python::{normalize_code, ImportGraph, SignatureDoc, SignatureEntry, UnitId, UnitKind};
use coedit::sim::{run_episode, simulate, EchoOracle, NullOracle, SimConfig, TruthOracle};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::{BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took <= limit, || format!("took {took:.2?}, limit {limit:?}"))
}

// ---------------------------------------------------------------- encoding

const WORDS: &[&str] = &["x", "y", "total", "return", "def", "f(a)", "+", "=", "1", "if", ":", "self.k", "''"];

fn random_line(rng: &mut ChaCha8Rng) -> String {
    let indent = " ".repeat(4 * rng.random_range(0..3));
    let n = rng.random_range(0..5);
    let words: Vec<&str> = (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect();
    format!("{indent}{}", words.join(" "))
}

fn random_lines(rng: &mut ChaCha8Rng, pool: &[String], max: usize) -> Vec<String> {
    (0..rng.random_range(0..=max)).map(|_| pool.choose(rng).unwrap().clone()).collect()
}

/// Rebuilds the after-text by splicing each placeholder's output segment
/// into the input rows: insertions become `<add>` rows before the line, a
/// delete flag turns the line into a `<del>` row.
fn substituted_after(unit: &[StatusedLine], region: EditRegion, edit: &TargetEdit) -> Vec<String> {
    let mut rows: Vec<StatusedLine> = Vec::new();
    for (i, line) in unit.iter().enumerate() {
        let n = i + 1;
        let entry = (n >= region.start && n < region.start + region.extent + 1)
            .then(|| edit.get(n - region.start + 1))
            .flatten();
        let mut line = line.clone();
        if let Some(e) = entry {
            rows.extend(e.insertions.iter().map(|t| StatusedLine::add(t.clone())));
            if e.delete {
                line.status = LineStatus::Del;
            }
        }
        rows.push(line);
    }
    rows.into_iter().filter(|l| l.status != LineStatus::Del).map(|l| l.text).collect()
}

fn check_case(unit: &[StatusedLine], region: EditRegion, edit: &TargetEdit, expected_after: Option<&[String]>) -> Result<(), String> {
    let statuses: Vec<LineStatus> = unit.iter().map(|l| l.status).collect();
    // text-level round trip of both encodings
    let out_text = enc_output(edit, region).render();
    let back = parse_output(&TokenStream::parse(&out_text), &statuses, region).map_err(|e| format!("{e}: {out_text:?}"))?;
    ensure(&back == edit, || format!("output round trip changed {out_text:?}"))?;
    let in_text = enc_input(unit, region).map_err(|e| e.to_string())?.render();
    let (lines, r) = parse_input(&TokenStream::parse(&in_text)).map_err(|e| e.to_string())?;
    ensure(lines == unit && r == Some(region), || format!("input round trip changed {in_text:?}"))?;
    let applied = apply_edit(unit, region, edit).map_err(|e| e.to_string())?.after();
    ensure(applied == substituted_after(unit, region, edit), || format!("substitution mismatch for {out_text:?}"))?;
    if let Some(want) = expected_after {
        ensure(applied == want, || format!("reconstruction mismatch for {in_text:?}"))?;
    }
    Ok(())
}

fn encoding_roundtrip() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pool: Vec<String> = (0..12).map(|_| random_line(&mut rng)).collect();
    let cases = 1000;
    for case in 0..cases {
        if case % 2 == 0 {
            // a real before/after pair with a random subset of changes applied
            let before = random_lines(&mut rng, &pool, 10);
            let after = random_lines(&mut rng, &pool, 10);
            let mut staged = StagedDiff::from_diff(&line_diff(&before, &after));
            for idx in staged.change_indices() {
                if rng.random_bool(0.3) {
                    staged.set_applied(idx, true);
                }
            }
            let (unit, region) = staged.query();
            let edit = staged.pending_edit();
            let mut want = after.clone();
            want.push(String::new());
            check_case(&unit, region, &edit, Some(&want)).map_err(|e| format!("case {case}: {e}"))?;
        } else {
            // an arbitrary valid edit over a unit with mixed statuses
            let n = rng.random_range(1..12);
            let unit: Vec<StatusedLine> = (0..n)
                .map(|_| {
                    let status = *[LineStatus::Empty, LineStatus::Empty, LineStatus::Add, LineStatus::Del].choose(&mut rng).unwrap();
                    StatusedLine::new(status, random_line(&mut rng))
                })
                .collect();
            let s = rng.random_range(1..=n);
            let region = EditRegion::new(s, rng.random_range(0..=n - s));
            let mut edit = TargetEdit::new();
            for k in 1..=region.placeholders() {
                if rng.random_bool(0.4) {
                    for _ in 0..rng.random_range(0..3) {
                        edit.insert_line(k, random_line(&mut rng));
                    }
                    if unit[region.line_of(k) - 1].status != LineStatus::Add && rng.random_bool(0.5) {
                        edit.mark_delete(k);
                    }
                }
            }
            check_case(&unit, region, &edit, None).map_err(|e| format!("case {case}: {e}"))?;
        }
    }
    within(start, Duration::from_secs(30))?;
    Ok(format!("{cases}/{cases} cases in {:.2?} (limit 30s)", start.elapsed()))
}

// -------------------------------------------------------------- keystrokes

/// Shortest path over the editor's state graph, cursor distance unbounded.
/// Op costs: match 0, delete/add 1 at the cursor, move min(distance, jump),
/// start/end selection 1, skip while selecting 0.
fn keystrokes_exhaustive(a: &[u8], b: &[u8], jump: usize, init: usize) -> usize {
    let (n, m) = (a.len(), b.len());
    let cmax = init + n + 1;
    let id = |i: usize, j: usize, c: usize, d: usize| ((i * (m + 1) + j) * (cmax + 1) + c) * 2 + d;
    let mut dist = vec![usize::MAX; (n + 1) * (m + 1) * (cmax + 1) * 2];
    let mut buckets: Vec<Vec<(usize, usize, usize, usize)>> = vec![Vec::new()];
    dist[id(n, m, init, 0)] = 0;
    buckets[0].push((n, m, init, 0));
    let mut cost = 0;
    while cost < buckets.len() {
        while let Some((i, j, c, d)) = buckets[cost].pop() {
            if dist[id(i, j, c, d)] != cost {
                continue;
            }
            if i == 0 && j == 0 && d == 0 {
                return cost;
            }
            let mut next = Vec::with_capacity(7);
            if d == 0 && i > 0 && j > 0 && a[n - i] == b[m - j] {
                next.push((0, (i - 1, j - 1, c + 1, 0)));
            }
            if c == 0 && d == 0 {
                if i > 0 {
                    next.push((1, (i - 1, j, 0, 0)));
                }
                if j > 0 {
                    next.push((1, (i, j - 1, 0, 0)));
                }
                next.push((1, (i, j, 0, 1)));
            }
            next.push((c.min(jump), (i, j, 0, d)));
            if d == 1 {
                if i > 0 {
                    next.push((0, (i - 1, j, c, 1)));
                }
                if c == 0 {
                    next.push((1, (i, j, 0, 0)));
                }
            }
            for (w, s) in next {
                let nc = cost + w;
                let k = id(s.0, s.1, s.2, s.3);
                if nc < dist[k] {
                    dist[k] = nc;
                    if buckets.len() <= nc {
                        buckets.resize(nc + 1, Vec::new());
                    }
                    buckets[nc].push(s);
                }
            }
        }
        cost += 1;
    }
    unreachable!("the target state is always reachable")
}

fn keystroke_oracle() -> Outcome {
    let start = Instant::now();
    let p0 = KeystrokeParams::default().with_init(0);
    let anchors = [
        ("hello world", "hello", p0, 6),
        ("", "ab", p0, 2),
        ("x", "x", p0, 0),
    ];
    for (a, b, p, want) in anchors {
        let got = keystroke_cost(a, b, p);
        ensure(got == want, || format!("anchor {a:?}->{b:?} gave {got}, want {want}"))?;
    }
    let pairs = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let word = |rng: &mut ChaCha8Rng| -> Vec<u8> { (0..rng.random_range(0..=8)).map(|_| b"abc"[rng.random_range(0..3)]).collect() };
    let sample: Vec<(Vec<u8>, Vec<u8>)> = (0..pairs).map(|_| (word(&mut rng), word(&mut rng))).collect();
    let bad: Vec<String> = sample
        .par_iter()
        .flat_map_iter(|(a, b)| {
            [0u32, 4].into_iter().filter_map(move |init| {
                let p = KeystrokeParams::default().with_init(init);
                let (sa, sb) = (String::from_utf8_lossy(a), String::from_utf8_lossy(b));
                let got = keystroke_cost(&sa, &sb, p) as usize;
                let want = keystrokes_exhaustive(a, b, p.cursor_jump_cost as usize, init as usize);
                (got != want).then(|| format!("{sa:?}->{sb:?} init {init}: {got} vs {want}"))
            })
        })
        .collect();
    ensure(bad.is_empty(), || format!("{} disagreements, e.g. {}", bad.len(), bad[0]))?;
    within(start, Duration::from_secs(120))?;
    Ok(format!("{} comparisons + 3 anchors exact in {:.2?} (limit 120s)", pairs * 2, start.elapsed()))
}

// ------------------------------------------------------------- levenshtein

fn levenshtein_textbook(a: &[char], b: &[char]) -> u64 {
    let mut d = vec![vec![0u64; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i as u64;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j as u64;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + u64::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

fn levenshtein_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let alphabet: Vec<char> = "ab cd\n_é(".chars().collect();
    let pairs = 10_000;
    for _ in 0..pairs {
        let mut s = || -> String { (0..rng.random_range(0..40)).map(|_| *alphabet.choose(&mut rng).unwrap()).collect() };
        let (a, b) = (s(), s());
        let got = levenshtein(&a, &b);
        let want = levenshtein_textbook(&a.chars().collect::<Vec<_>>(), &b.chars().collect::<Vec<_>>());
        ensure(got == want, || format!("{a:?} vs {b:?}: {got} != {want}"))?;
    }
    within(start, Duration::from_secs(10))?;
    Ok(format!("{pairs} pairs exact in {:.2?} (limit 10s)", start.elapsed()))
}

// ----------------------------------------------------------- normalization

struct Snippet {
    /// Same code with the keyword arguments of every call in two orders.
    variants: [String; 2],
}

fn random_call(rng: &mut ChaCha8Rng, depth: usize) -> [String; 2] {
    let name = *["f", "g", "obj.method", "dict", "fetch"].choose(rng).unwrap();
    let positional: Vec<String> = (0..rng.random_range(0..3)).map(|i| format!("p{i}")).collect();
    let mut kwargs: Vec<(String, [String; 2])> = Vec::new();
    let mut keys: Vec<&str> = vec!["alpha", "beta", "gamma", "delta", "eps", "zeta"];
    keys.shuffle(rng);
    for key in keys.into_iter().take(rng.random_range(0..5)) {
        let value = if depth < 2 && rng.random_bool(0.3) {
            random_call(rng, depth + 1)
        } else {
            let v = [format!("{}", rng.random_range(0..100)), "'s'".into(), "None".into(), "[1, 2]".into()]
                .choose(rng)
                .unwrap()
                .clone();
            [v.clone(), v]
        };
        kwargs.push((key.to_string(), value));
    }
    let mut shuffled: Vec<usize> = (0..kwargs.len()).collect();
    shuffled.shuffle(rng);
    let render = |order: &[usize], side: usize| {
        let args: Vec<String> = positional
            .iter()
            .cloned()
            .chain(order.iter().map(|&i| format!("{}={}", kwargs[i].0, kwargs[i].1[side])))
            .collect();
        format!("{name}({})", args.join(", "))
    };
    let identity: Vec<usize> = (0..kwargs.len()).collect();
    [render(&identity, 0), render(&shuffled, 1)]
}

fn random_snippet(rng: &mut ChaCha8Rng, i: usize) -> Snippet {
    let mut body: [Vec<String>; 2] = [Vec::new(), Vec::new()];
    let push = |body: &mut [Vec<String>; 2], line: [String; 2]| {
        body[0].push(line[0].clone());
        body[1].push(line[1].clone());
    };
    if rng.random_bool(0.5) {
        push(&mut body, ["\"\"\"Docstring.\"\"\"".into(), "'''Another docstring'''".into()]);
    }
    for _ in 0..rng.random_range(1..5) {
        let call = random_call(rng, 0);
        match rng.random_range(0..5) {
            0 => push(&mut body, [format!("x = {}", call[0]), format!("x = {}  # note", call[1])]),
            1 => push(&mut body, [format!("return {}", call[0]), format!("return {}", call[1])]),
            2 => {
                push(&mut body, ["# leading comment".into(), "# another".into()]);
                push(&mut body, [call[0].clone(), call[1].clone()]);
            }
            3 => {
                push(&mut body, [format!("if {}:", call[0]), format!("if {}:", call[1])]);
                push(&mut body, ["    pass".into(), "    pass  # trailing".into()]);
            }
            _ => push(&mut body, [format!("y = [{} for _ in range(3)]", call[0]), format!("y = [{} for _ in range(3)]", call[1])]),
        }
    }
    let header = format!("def snippet_{i}(a, b=2, *rest, **extra):");
    let wrap = |lines: &[String]| -> String {
        let indented: Vec<String> = lines.iter().map(|l| format!("    {l}")).collect();
        if i.is_multiple_of(4) {
            // method bodies arrive indented
            let inner: Vec<String> = std::iter::once(header.clone()).chain(indented).map(|l| format!("    {l}")).collect();
            inner.join("\n") + "\n"
        } else {
            format!("{header}\n{}\n", indented.join("\n"))
        }
    };
    Snippet {
        variants: [wrap(&body[0]), wrap(&body[1])],
    }
}

fn normalization() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    ensure(exact_match("f(b=1,a=2)", "f(a=2,b=1)"), || "f(b=1,a=2) vs f(a=2,b=1) not equal".into())?;
    ensure(!exact_match("f(b=1,a=2)", "f(a=1,b=2)"), || "different values compared equal".into())?;
    let n = 500;
    let mut distinct = BTreeSet::new();
    for i in 0..n {
        let s = random_snippet(&mut rng, i);
        let a = normalize_code(&s.variants[0]).map_err(|e| format!("snippet {i}: {e}\n{}", s.variants[0]))?;
        let b = normalize_code(&s.variants[1]).map_err(|e| format!("snippet {i}: {e}\n{}", s.variants[1]))?;
        let again = normalize_code(&a).map_err(|e| format!("snippet {i} normal form does not parse: {e}\n{a}"))?;
        ensure(again == a, || format!("snippet {i} not idempotent:\n{a}\n---\n{again}"))?;
        ensure(a == b, || format!("snippet {i} keyword order matters:\n{a}\n---\n{b}"))?;
        ensure(!a.contains('#') && !a.contains("ocstring"), || format!("snippet {i} keeps comments:\n{a}"))?;
        distinct.insert(a);
    }
    ensure(distinct.len() == n, || format!("only {} distinct normal forms", distinct.len()))?;
    Ok(format!("{n}/{n} snippets idempotent and order-invariant in {:.2?}", start.elapsed()))
}

// ------------------------------------------------------------------- miner

fn miner_fixture() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let steps = common::fixture_steps();
    common::build_repo(dir.path(), &steps);
    let ledger = &common::LEDGER;
    ensure(steps.len() == ledger.commits_total, || "fixture history length".into())?;
    let repo = mine_repository(dir.path(), MineOptions::default()).map_err(|e| e.to_string())?;
    let stats = dataset_stats(&repo.instances().cloned().collect::<Vec<_>>(), &SimpleTokenizer).with_mining(std::slice::from_ref(&repo));
    let c = &stats.counts;
    let got = (
        c.projects,
        c.commits,
        c.modified_files,
        c.modified_functions,
        c.modified_units,
        c.modified_lines,
        c.added_units,
        c.deleted_units,
    );
    let want = (
        1,
        ledger.used_commits,
        ledger.modified_files,
        ledger.modified_functions,
        ledger.modified_functions,
        ledger.changed_lines,
        Some(ledger.added_units),
        Some(ledger.deleted_units),
    );
    ensure(got == want, || format!("counts {got:?}, ledger {want:?}"))?;
    ensure(repo.parse_failures >= 1, || "unparseable file not reported".into())?;
    let instances: Vec<&ProblemInstance> = repo.instances().collect();
    for (inst, after) in instances.iter().zip(ledger.after_texts) {
        let got = inst.expected_after().map_err(|e| e.to_string())?;
        let want: Vec<String> = after.lines().map(str::to_string).collect();
        ensure(got == want, || format!("reconstruction of {:?} differs", inst.provenance.unit))?;
        let staged = inst.staged().map_err(|e| e.to_string())?;
        ensure(staged.initial_lines() == staged.current_lines(), || "query is not the pre-edit unit".into())?;
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!(
        "{} commits, {} instances, {} changed lines, +{}/-{} units match the ledger in {:.2?} (limit 60s)",
        c.commits, c.modified_units, c.modified_lines, ledger.added_units, ledger.deleted_units,
        start.elapsed()
    ))
}

// ---------------------------------------------------------------- ordering

fn snapshot(files: &[(&str, &str)]) -> Snapshot {
    files.iter().map(|(p, s)| (p.to_string(), s.to_string())).collect()
}

fn ordering() -> Outcome {
    // same file: top to bottom
    let before = snapshot(&[("m.py", "def a():\n    return 1\n\n\ndef b():\n    return 2\n\n\ndef c():\n    return 3\n")]);
    let after = snapshot(&[("m.py", "def a():\n    return 10\n\n\ndef b():\n    return 20\n\n\ndef c():\n    return 30\n")]);
    let (ordered, instances) = mine_snapshots(&before, &after, &Default::default());
    let names: Vec<&str> = ordered.iter().map(|c| c.id().name.as_str()).collect();
    ensure(names == ["a", "b", "c"], || format!("same-file order {names:?}"))?;
    let priors: Vec<usize> = instances.iter().map(|i| i.prior_changes.len()).collect();
    ensure(priors == [0, 1, 2], || format!("prior counts {priors:?}"))?;

    // imported module first, although it sorts later by name
    let before = snapshot(&[
        ("app.py", "from zlib_helpers import z\n\n\ndef run():\n    return z()\n"),
        ("zlib_helpers.py", "def z():\n    return 0\n"),
    ]);
    let after = snapshot(&[
        ("app.py", "from zlib_helpers import z\n\n\ndef run():\n    return z() + 1\n"),
        ("zlib_helpers.py", "def z():\n    return 1\n"),
    ]);
    let (ordered, _) = mine_snapshots(&before, &after, &Default::default());
    let modules: Vec<&str> = ordered.iter().map(|c| c.id().module.as_str()).collect();
    ensure(modules == ["zlib_helpers", "app"], || format!("cross-file order {modules:?}"))?;

    // the mined fixture: main before run within the same commit
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    common::build_repo(dir.path(), &common::fixture_steps());
    let repo = mine_repository(dir.path(), MineOptions::default()).map_err(|e| e.to_string())?;
    let last = repo.commits.iter().rev().find(|c| c.instances.len() == 2).ok_or("no two-instance commit")?;
    let units: Vec<String> = last.instances.iter().map(|i| i.provenance.unit.as_ref().unwrap().name.clone()).collect();
    ensure(units == ["main", "Runner.run"], || format!("fixture order {units:?}"))?;

    // random DAGs
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let dags = 300;
    for t in 0..dags {
        let n = rng.random_range(1..25);
        let mut names: Vec<String> = (0..n).map(|i| format!("m{i:02}")).collect();
        names.shuffle(&mut rng);
        let mut graph = ImportGraph::default();
        graph.nodes.extend(names.iter().cloned());
        // names[i] may import names[j] only for j < i: acyclic
        for i in 0..n {
            for j in 0..i {
                if rng.random_bool(0.15) {
                    graph.edges.insert((names[i].clone(), names[j].clone()));
                }
            }
        }
        let order = module_order(&graph, std::iter::empty());
        let pos: HashMap<&str, usize> = order.iter().enumerate().map(|(i, m)| (m.as_str(), i)).collect();
        ensure(order.len() == n && pos.len() == n, || format!("dag {t}: order is not a permutation"))?;
        for (importer, imported) in &graph.edges {
            ensure(pos[imported.as_str()] < pos[importer.as_str()], || {
                format!("dag {t}: {imported} placed after its importer {importer}")
            })?;
        }
        ensure(order == module_order(&graph, std::iter::empty()), || format!("dag {t}: nondeterministic"))?;
    }
    Ok(format!("fixtures ordered; {dags} random DAGs topologically valid"))
}

// ----------------------------------------------------------------- harness

fn echo_fixture() -> ProblemInstance {
    // the first change is copied from a prior edit, the second is new
    let before = ["def g(a, b):", "    total = compute(a, b)", "    log(total)", "    count = 0", "    return total"];
    let after = ["def g(a, b):", "    total = compute(a, b, strict=True)", "    log(total)", "    count = 1", "    return total"];
    let mut inst = ProblemInstance::from_texts(&before, &after);
    inst.prior_changes.push(ContextChange {
        unit: UnitId {
            module: "m".into(),
            name: "h".into(),
            kind: UnitKind::Function,
        },
        kind: UnitChangeKind::Modified,
        diff: line_diff(
            &["def h(a, b):", "        total = compute(a, b)", "        return total"],
            &["def h(a, b):", "        total = compute(a, b, strict=True)", "        return total"],
        ),
    });
    inst
}

fn harness_bounds() -> Outcome {
    let start = Instant::now();
    let config = SimConfig::default();
    let tok = SimpleTokenizer;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    common::build_repo(dir.path(), &common::fixture_steps());
    let mut episodes = mine_repository(dir.path(), MineOptions::default()).map_err(|e| e.to_string())?.into_instances();
    for n in [1, 2, 3, 7, 12] {
        let before: Vec<String> = (0..n).map(|i| format!("v{i} = {i}")).collect();
        let after: Vec<String> = before.iter().map(|l| format!("{l} + 1")).collect();
        episodes.push(ProblemInstance::from_texts(&before, &after));
    }
    episodes.push(echo_fixture());

    for (i, inst) in episodes.iter().enumerate() {
        let truth = run_episode(inst, &TruthOracle, &tok, &config).map_err(|e| e.to_string())?;
        ensure(truth.rounds == 1 && truth.completed, || format!("episode {i}: truth took {} rounds", truth.rounds))?;
        ensure(truth.gains.lines as u64 == truth.truth_cost.lines, || format!("episode {i}: truth lines gain {:?}", truth.gains))?;

        let null = run_episode(inst, &NullOracle, &tok, &config).map_err(|e| e.to_string())?;
        let want_rounds = inst.changed_lines().min(config.max_rounds);
        ensure(null.gains.lines == 0, || format!("episode {i}: null lines gain {}", null.gains.lines))?;
        ensure(null.rounds == want_rounds, || format!("episode {i}: null rounds {} want {want_rounds}", null.rounds))?;
    }

    let echo = run_episode(&echo_fixture(), &EchoOracle, &tok, &config).map_err(|e| e.to_string())?;
    let ratio = echo.gains.lines as f64 / echo.truth_cost.lines as f64;
    ensure(ratio > 0.0 && ratio < 1.0, || format!("echo lines gain {ratio}"))?;

    let first = serde_json::to_string(&simulate(&episodes, &EchoOracle, &tok, &config, "echo")).unwrap();
    for _ in 0..3 {
        let again = serde_json::to_string(&simulate(&episodes, &EchoOracle, &tok, &config, "echo")).unwrap();
        ensure(again == first, || "reports differ between runs".into())?;
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!(
        "{} episodes: truth 1 round/100%, null 0%/min(6,n) rounds, echo {:.0}% lines; deterministic; {:.2?} (limit 60s)",
        episodes.len(),
        ratio * 100.0,
        start.elapsed()
    ))
}

// --------------------------------------------------------------- assembler

fn random_text(rng: &mut ChaCha8Rng, max_words: usize) -> String {
    let pieces = ["self", "value", "(", ")", "1234567890123", "é", "  ", "ident_name", ",", "[x]"];
    let n = rng.random_range(0..max_words);
    (0..n).map(|_| *pieces.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

fn random_instance(rng: &mut ChaCha8Rng) -> ProblemInstance {
    let long = rng.random_bool(0.3);
    let lines = |rng: &mut ChaCha8Rng, n: usize| -> Vec<String> {
        (0..n)
            .map(|_| {
                let words = if long && rng.random_bool(0.1) { 800 } else { 12 };
                random_text(rng, words)
            })
            .collect()
    };
    let n = rng.random_range(1..200);
    let before = lines(rng, n);
    let mut after = before.clone();
    for l in after.iter_mut() {
        if rng.random_bool(0.05) {
            l.push_str(" changed");
        }
    }
    let mut inst = ProblemInstance::from_texts(&before, &after);
    // narrow the region to a random window
    let total = inst.query.len();
    let s = rng.random_range(1..=total);
    inst.region = EditRegion::new(s, rng.random_range(0..=(total - s).min(20)));
    inst.ground_truth = TargetEdit::new();
    for _ in 0..rng.random_range(0..60) {
        let k = rng.random_range(1..60);
        let b = lines(rng, k);
        let a = lines(rng, k);
        inst.prior_changes.push(ContextChange {
            unit: UnitId {
                module: "m".into(),
                name: "u".into(),
                kind: UnitKind::Function,
            },
            kind: UnitChangeKind::Modified,
            diff: line_diff(&b, &a),
        });
    }
    let entries = rng.random_range(0..400);
    inst.signature_doc = SignatureDoc {
        entries: (0..entries)
            .map(|i| {
                let words = if rng.random_bool(0.01) { 2000 } else { 20 };
                SignatureEntry {
                    module: format!("mod{}", i / 50),
                    symbol: format!("s{i}"),
                    text: random_text(rng, words),
                }
            })
            .collect(),
    };
    inst
}

fn assembler_caps() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let limits = ContextLimits::default();
    let tok = SimpleTokenizer;
    let (mut assembled, mut overflow, mut dropped_any) = (0, 0, 0);
    let cases = 300;
    for case in 0..cases {
        let inst = random_instance(&mut rng);
        match assemble(&inst, &tok, &limits) {
            Ok(ctx) => {
                assembled += 1;
                let q = tok.count_stream(&ctx.query.payload);
                ensure(q <= 1024 && q == ctx.query.token_count, || format!("case {case}: query block {q} tokens"))?;
                let mut sum = 0;
                for b in &ctx.references {
                    let t = tok.count_stream(&b.payload);
                    ensure(t <= 512 && t == b.token_count, || format!("case {case}: reference block {t} tokens"))?;
                    sum += t;
                }
                ensure(sum <= 16384, || format!("case {case}: references total {sum}"))?;
                dropped_any += usize::from(!ctx.dropped.is_empty());
            }
            Err(AssembleError::QueryOverflow { tokens, limit }) => {
                overflow += 1;
                ensure(tokens > limit, || format!("case {case}: spurious overflow"))?;
            }
            Err(e) => return Err(format!("case {case}: {e}")),
        }
        // admission does not depend on the order blocks arrive in
        let blocks = segment_references(&inst.prior_changes, &inst.signature_doc, &tok, &limits);
        let key = |bs: &[coedit::context::Block]| {
            let mut s: Vec<_> = bs.iter().map(|b| b.source).collect();
            s.sort();
            s
        };
        let (base, _) = admit(blocks.clone(), limits.reference_budget);
        for _ in 0..3 {
            let mut shuffled = blocks.clone();
            shuffled.shuffle(&mut rng);
            let (adm, _) = admit(shuffled, limits.reference_budget);
            ensure(key(&adm) == key(&base), || format!("case {case}: admitted set depends on order"))?;
        }
    }
    ensure(dropped_any > 0 && assembled > 0, || "fuzz never exercised the budget".into())?;
    Ok(format!(
        "{cases} fuzzed instances ({assembled} assembled, {overflow} region overflows, {dropped_any} over budget) within 1024/512/16384; permutation-invariant; {:.2?}",
        start.elapsed()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("encoding round-trip", encoding_roundtrip),
        ("keystroke DP vs exhaustive", keystroke_oracle),
        ("levenshtein vs textbook", levenshtein_oracle),
        ("normalization", normalization),
        ("miner fixture ledger", miner_fixture),
        ("change ordering", ordering),
        ("harness bounds", harness_bounds),
        ("assembler caps", assembler_caps),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
