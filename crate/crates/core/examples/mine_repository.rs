//! Mines a small throwaway repository and prints its dataset statistics.

use coedit::context::SimpleTokenizer;
use coedit::miner::{dataset_stats, mine_repository, MineOptions};
use git2::{Repository, Signature};
use std::path::Path;

fn commit(repo: &Repository, dir: &Path, file: &str, text: &str, message: &str) {
    std::fs::write(dir.join(file), text).unwrap();
    let mut index = repo.index().unwrap();
    index.add_path(Path::new(file)).unwrap();
    index.write().unwrap();
    let tree = repo.find_tree(index.write_tree().unwrap()).unwrap();
    let sig = Signature::now("dev", "dev@example.com").unwrap();
    let parent = repo.head().ok().and_then(|h| h.peel_to_commit().ok());
    let parents: Vec<_> = parent.iter().collect();
    repo.commit(Some("HEAD"), &sig, &sig, message, &tree, &parents).unwrap();
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let repo = Repository::init(dir.path()).unwrap();
    commit(&repo, dir.path(), "calc.py", "def add(a, b):\n    return a + b\n", "add");
    commit(&repo, dir.path(), "calc.py", "def add(a, b, c=0):\n    return a + b + c\n", "three args");

    let mined = mine_repository(dir.path(), MineOptions::default()).unwrap();
    for inst in mined.instances() {
        println!("{}\n", inst.to_record().ground_truth);
    }
    let stats = dataset_stats(&mined.instances().cloned().collect::<Vec<_>>(), &SimpleTokenizer);
    println!("{}", serde_json::to_string_pretty(&stats.counts).unwrap());
}
