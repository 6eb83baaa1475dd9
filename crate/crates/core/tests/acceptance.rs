use kend::acceptance::{run, Options};

#[test]
fn acceptance() {
    let outcomes = run(Options { fault: None, seed: 2024 });
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id.as_str()).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn injected_fault_is_reported() {
    let outcomes = run(Options { fault: Some(13), seed: 2024 });
    let o = outcomes.iter().find(|o| o.id == "13").unwrap();
    assert!(!o.pass);
}
