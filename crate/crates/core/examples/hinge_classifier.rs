// Ridge-penalized hinge-loss classification fitted by iteratively
// reweighted least squares, on the bundled separable dataset.

use std::fs::File;

use mmkit::discriminant::{hinge_mm_fit, HingeMode};
use mmkit::io::read_labeled;
use mmkit::StoppingRule;

pub fn run_example() -> anyhow::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/separable.csv");
    let data = read_labeled(File::open(path)?, false)?;
    let rule = StoppingRule::new(2000).objective_tol(1e-10);
    for mode in [HingeMode::FullWls, HingeMode::Coordinate] {
        let fit = hinge_mm_fit(&data, 1e-2, mode, &rule)?;
        println!(
            "{mode:?}: {} iterations, objective {:.6}, training error {:.3}",
            fit.run.report.iterations,
            fit.run.report.objective_final,
            fit.model.error_rate(&data)?
        );
        println!("  prediction at (1, 1): {}", fit.model.classify(&[1.0, 1.0])?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
