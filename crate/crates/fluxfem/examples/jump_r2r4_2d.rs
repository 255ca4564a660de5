//! The piecewise r^2 / r^4 benchmark under the two extreme coefficient
//! ratios. The augmented solve recovers the flux well in both directions;
//! the solution error tells a subtler story. With beta = (1, 1000) the
//! stiff outer side damps the interface consistency error and u converges
//! at second order. With beta = (1000, 1) the same error acts at full
//! strength, the standard unfitted method stalls near first order, and the
//! augmented solution rejoins it on fine meshes. The flux unknown keeps a
//! clear lead over the standard gradient either way.

use fluxfem::harness::{run_study_2d, run_study_2d_standard, ProblemId, RunConfig};

fn main() -> fluxfem::Result<()> {
    for (beta_minus, beta_plus) in [(1.0, 1000.0), (1000.0, 1.0)] {
        let config = RunConfig {
            beta_minus,
            beta_plus,
            n_list: vec![8, 16, 32, 64],
            ..RunConfig::default_2d(ProblemId::R2r4)
        };
        let augmented = run_study_2d(&config)?;
        let standard = run_study_2d_standard(&config)?;

        println!("{}", augmented.to_markdown());
        println!("{}", standard.to_markdown());

        let aug_v = augmented.averages[4].expect("v error is never zero");
        let std_h1 = standard.averages[1].expect("gradient error is never zero");
        println!(
            "beta = ({beta_minus}, {beta_plus}): augmented flux order {aug_v:.3} vs standard gradient order {std_h1:.3} (lead {:+.3})\n",
            aug_v - std_h1
        );
    }
    Ok(())
}
