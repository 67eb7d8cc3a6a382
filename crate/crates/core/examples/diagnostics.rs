//! Sampler self-tests, then the same tests with a deliberately mis-scaled
//! Laplace sampler.

use knorm::harness::{diagnostics, Fault, SimulationConfig};

fn main() -> knorm::Result<()> {
    let cfg = SimulationConfig::diagnostics();
    let report = diagnostics(&cfg, Fault::None)?;
    print!("{report}");
    println!("passed: {}\n", report.passed());

    let faulty = diagnostics(&cfg, Fault::HalvedLaplaceScale)?;
    for e in faulty.entries.iter().filter(|e| !e.passed) {
        println!("fault detected by {} / {}", e.mechanism, e.test);
    }
    Ok(())
}
