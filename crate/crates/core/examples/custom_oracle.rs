//! A hand-written oracle, used in-process and served over the line protocol.

use coedit::context::SimpleTokenizer;
use coedit::edit::{enc_output, TargetEdit};
use coedit::instance::ProblemInstance;
use coedit::sim::{run_episode, serve, OracleError, OracleRequest, Predictor, SimConfig};

/// Deletes the first line of the region, whatever it is.
struct DeleteFirst;

impl Predictor for DeleteFirst {
    fn predict(&self, request: &OracleRequest) -> Result<String, OracleError> {
        let edit = TargetEdit::new().with(1, &[], true);
        Ok(enc_output(&edit, request.region).render())
    }
}

fn main() {
    let inst = ProblemInstance::from_texts(&["debug()", "x = 1"], &["x = 1"]);
    let r = run_episode(&inst, &DeleteFirst, &SimpleTokenizer, &SimConfig::default()).unwrap();
    println!("rounds {}, completed {}", r.rounds, r.completed);

    // the same predictor behind the wire protocol
    let request = r#"{"id":1,"query":"<1> debug()\n<2> x = 1\n<3> ","references":[],"region":{"a":1,"n":2},"statuses":["empty","empty","empty"]}"#;
    let mut out = Vec::new();
    serve(&DeleteFirst, format!("{request}\n").as_bytes(), &mut out).unwrap();
    print!("{}", String::from_utf8(out).unwrap());
}
