//! The acceptance battery, one line per criterion. Runs without the libtest
//! harness so the lines always reach the terminal.

use wolfflab::acceptance::{run_all, CRITERIA, DEFAULT_SEED};

fn main() {
    let ids: Vec<u8> = CRITERIA.iter().map(|c| c.0).collect();
    let outcomes = run_all(&ids, DEFAULT_SEED);
    println!("\nacceptance battery (seed {DEFAULT_SEED})");
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    println!("{} of {} criteria passed", outcomes.len() - failed.len(), outcomes.len());
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
