//! Emitting golden vectors for a second implementation and checking them back.

use std::error::Error;

use paratag::losskernel::{check_golden, emit_golden_vectors, GoldenFile, LossConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cfg = LossConfig::new(8);
    let file = emit_golden_vectors(13, 5, &cfg)?;
    let json = file.to_json();
    println!(
        "{} cases, {} bytes; first case w = {}",
        file.cases.len(),
        json.len(),
        file.cases[0].w
    );

    let back = GoldenFile::from_json(&json)?;
    let check = check_golden(&back)?;
    println!(
        "max total error {:.1e}, max grad error {:.1e}",
        check.max_total_error, check.max_grad_error
    );
    assert!(check.passed());

    let mut tampered = back;
    tampered.cases[2].total += 1e-3;
    let check = check_golden(&tampered)?;
    assert_eq!(check.failed_cases, [2]);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
