//! Forward loss, breakdown and logit gradients for a small batch.

use std::error::Error;

use paratag::losskernel::{loss_forward, loss_grad_logits, LossBatch, LossConfig, LossSentence};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cfg = LossConfig {
        epsilon: 0.2,
        w: 0.3,
        ..LossConfig::new(4)
    };

    let one = LossBatch::new(vec![LossSentence::from_probs(
        vec![vec![0.1, 0.2, 0.6, 0.1]],
        vec![2],
        &[1],
    )]);
    let b = loss_forward(&one, &cfg)?;
    println!(
        "ce {:.6} smoothing {:.6} diversity {:.6} total {:.6}",
        b.ce_term, b.smoothing_term, b.diversity_term, b.total
    );
    assert!((b.total - 0.262_100_811_391_971_6).abs() < 1e-12);

    let logits = vec![
        vec![0.5, -1.0, 2.0, 0.0],
        vec![1.5, 0.3, -0.2, 0.1],
        vec![0.0, 0.0, 0.0, 3.0],
    ];
    let batch = LossBatch::new(vec![LossSentence::from_logits(
        logits,
        vec![2, 0, 3],
        &[1, 0],
    )]);
    let g = loss_grad_logits(&batch, &cfg)?;
    println!(
        "total {:.6} over {} positions",
        g.breakdown.total, g.breakdown.positions
    );
    for row in &g.grads[0] {
        let sum: f64 = row.iter().sum();
        println!("{row:+.4?} (sum {sum:+.1e})");
    }

    // A larger diversity weight never raises the loss.
    let heavier = loss_forward(
        &batch,
        &LossConfig {
            w: 0.6,
            ..cfg.clone()
        },
    )?;
    assert!(heavier.total <= g.breakdown.total);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
