//! Runs the reference 2D problem (u = sin x cos y, beta = (100, 1),
//! circle of radius 0.9) with the augmented method and with plain P1
//! Galerkin, and prints both convergence tables. The augmented flux
//! unknown converges at about order 1.7 in the tube, well above the
//! first-order gradient of the standard method.

use fluxfem::harness::{run_study_2d, run_study_2d_standard, ProblemId, RunConfig};

fn main() -> fluxfem::Result<()> {
    let config = RunConfig {
        n_list: vec![8, 16, 32, 64],
        ..RunConfig::default_2d(ProblemId::Trig)
    };
    let augmented = run_study_2d(&config)?;
    print!("{}", augmented.to_markdown());
    println!();
    let standard = run_study_2d_standard(&config)?;
    print!("{}", standard.to_markdown());
    Ok(())
}
