//! Prints the candidate and the SMT-LIB script of a problem at a stage.
//!
//! `cargo run --example emit_script -- <file.feq> [base|tu|pi|fi]`

use funceq::instantiation::{enrich_obligation, EnrichOptions, Stage};
use funceq::spec_io::{emit_smtlib, parse_problem, EmitOptions};
use funceq::template::{build_obligation, synthesize, TemplateChoice};

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args.next().expect("usage: emit_script <file.feq> [base|tu|pi|fi]");
    let stage = args.next().unwrap_or_else(|| "tu".into());
    let text = std::fs::read_to_string(&path).expect("readable problem file");
    let problem = parse_problem(&text).expect("valid problem");
    let synthesis = synthesize(&problem.spec, TemplateChoice::Auto).expect("candidate");
    let mut ob = build_obligation(&problem.spec, &synthesis.solved_form);
    let stage = match stage.as_str() {
        "base" => None,
        "tu" => Some(Stage::Tu),
        "pi" => Some(Stage::TuPi),
        "fi" => Some(Stage::TuPiFi),
        other => panic!("unknown stage {other}"),
    };
    if let Some(s) = stage {
        ob = enrich_obligation(&ob, s, &EnrichOptions::default()).0;
    }
    println!("; candidate {}", synthesis.solved_form);
    print!("{}", emit_smtlib(&ob, &EmitOptions::default()).expect("emittable"));
}
