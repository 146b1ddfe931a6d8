//! Runs a few axiom suites with a fixed seed and prints the report.
use sixfun::axioms::{run, Suite, SuiteConfig};
use sixfun::exactalg::FieldSpec;

fn main() {
    let mut cfg = SuiteConfig::new(0, FieldSpec::prime(2).unwrap());
    cfg.suites = vec![Suite::Excision, Suite::BaseChange, Suite::Registry];
    cfg.cases = Some(25);
    let report = run(&cfg).unwrap();
    println!("{}", report.to_json());
    assert!(report.ok());
}
