// Vertex discriminant analysis: classes are vertices of a regular simplex
// and cases are fitted with an ε-insensitive Euclidean loss.

use std::fs::File;

use mmkit::discriminant::{simplex_vertices, vda_fit};
use mmkit::io::read_labeled;
use mmkit::StoppingRule;

pub fn run_example() -> anyhow::Result<()> {
    let vertices = simplex_vertices(2)?;
    println!("k = 2 vertices (columns): {:.4}", vertices.points());

    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/blobs3.csv");
    let data = read_labeled(File::open(path)?, true)?;
    let eps = 0.5 * vertices.edge_length() / 2.0;
    let fit = vda_fit(&data, 1e-3, eps, &StoppingRule::new(1000).objective_tol(1e-10))?;
    println!(
        "{} classes, {} iterations, objective {:.6}, training error {:.3}",
        data.classes().len(),
        fit.run.report.iterations,
        fit.run.report.objective_final,
        fit.model.error_rate(&data)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
