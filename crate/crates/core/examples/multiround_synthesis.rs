//! Derived datasets: partially applied multi-round instances and
//! single-line completion instances.

use coedit::instance::ProblemInstance;
use coedit::miner::{make_completion_instances, synthesize_multiround};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let inst = ProblemInstance::from_texts(
        &["def f(a):", "    x = a", "    y = 0", "    return x"],
        &["def f(a, b):", "    x = a", "    y = b", "    return x + y"],
    );
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let multi = synthesize_multiround(&inst, &mut rng).unwrap();
    println!("multi-round query:\n{}\n", multi.to_record().query);

    for c in make_completion_instances(&[inst]) {
        println!("{:?} completion, target {:?}", c.kind, c.target);
        println!("prefix: {:?}", c.prefix);
    }
}
