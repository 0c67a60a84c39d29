//! Multi-round episodes with the built-in oracles.

use coedit::context::SimpleTokenizer;
use coedit::instance::ProblemInstance;
use coedit::sim::{aggregate, run_episode, NullOracle, Oracle, SimConfig, TruthOracle};

fn main() {
    let inst = ProblemInstance::from_texts(
        &["def f(a):", "    x = a", "    return x"],
        &["def f(a, b):", "    x = a + b", "    return x"],
    );
    let config = SimConfig::default();
    let oracles: [(&str, &dyn Oracle); 2] = [("truth", &TruthOracle), ("null", &NullOracle)];
    for (name, oracle) in oracles {
        let r = run_episode(&inst, oracle, &SimpleTokenizer, &config).unwrap();
        let s = aggregate(std::slice::from_ref(&r));
        println!(
            "{name}: {} rounds, lines gain {:.0}%, keystroke gain {:.0}%",
            r.rounds, s.multi_round.lines, s.multi_round.keystrokes
        );
        for log in &r.logs {
            println!("  round {}: accepted {:?}, manual {:?}", log.round, log.accepted, log.manual);
        }
    }
}
