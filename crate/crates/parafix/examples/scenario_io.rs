//! Scenario files: parse, validate, run, and round-trip.
//!
//! A scenario file is a strict JSON document — unknown keys anywhere are
//! rejected with the offending position — that builds a complete run:
//! agents, schedule, optional exact-fraction weights, norm, start, and
//! stopping rule. This example loads the committed counterexample file,
//! shows its exact weights, runs it, and demonstrates both the round
//! trip and the rejection diagnostics.

use parafix::engine::run;
use parafix::scenario::{ScenarioFile, WeightValue};

fn main() -> parafix::Result<()> {
    // The committed files live at the workspace root; this example is
    // run from there (`cargo run --example scenario_io`).
    let text = std::fs::read_to_string("scenarios/counterexample.json")?;
    let file = ScenarioFile::from_json(&text)?;

    // Weights written as "1/2" parse to the exact float quotient, not a
    // decimal approximation.
    for entry in file.weights.as_deref().unwrap_or(&[]) {
        let shown = match &entry.weight {
            WeightValue::Fraction(s) => format!("{s:?}"),
            WeightValue::Number(x) => format!("{x}"),
        };
        println!(
            "agent {} weighs neighbor {} by {} = {}",
            entry.agent,
            entry.neighbor,
            shown,
            entry.weight.value()?
        );
    }

    let scenario = file.to_scenario()?;
    let trace = run(&scenario)?;
    println!(
        "counterexample run: converged = {}, {} steps, final disagreement {}",
        trace.converged(),
        trace.len(),
        trace.final_step().disagreement
    );
    assert!(!trace.converged(), "the one-way scenario must stall");

    // Round trip: serialize back out, parse again, build again — the
    // rebuilt scenario starts from the identical stacked vector.
    let again = ScenarioFile::from_json(&file.to_json()?)?.to_scenario()?;
    assert_eq!(again.x0.flatten(), scenario.x0.flatten());
    println!("round trip rebuilt an identical start");

    // Strictness: an unknown key anywhere in the document is an error
    // naming the position, before any computation happens.
    let poisoned = text.replacen("\"norm\"", "\"speling_mistake\": 1, \"norm\"", 1);
    match ScenarioFile::from_json(&poisoned) {
        Err(e) => println!("unknown key rejected: {e}"),
        Ok(_) => panic!("the strict schema must reject unknown keys"),
    }

    // So is a verification check name outside the registry.
    let bad_check = text.replacen("\"norm\"", "\"verify\": [\"nosuch\"], \"norm\"", 1);
    match ScenarioFile::from_json(&bad_check) {
        Err(e) => println!("unknown check rejected: {e}"),
        Ok(_) => panic!("verify names are validated against the registry"),
    }
    Ok(())
}
