//! Varies the tube that carries the flux unknown: thin (3h), wide (10h),
//! the whole domain, and the whole domain without any interface at all
//! (r_gamma = 0). The average convergence orders of u and of the flux
//! unknown barely move, which is the point: the augmentation is local and
//! its width is not a tuning knob.

use fluxfem::harness::{run_study_2d, ProblemId, RunConfig};

fn main() -> fluxfem::Result<()> {
    let base = RunConfig {
        n_list: vec![8, 16, 32],
        ..RunConfig::default_2d(ProblemId::Trig)
    };
    let cases = [
        ("tube 3h", 0.9, 3.0),
        ("tube 10h", 0.9, 10.0),
        ("whole domain", 0.9, 0.0),
        ("no interface", 0.0, 0.0),
    ];

    println!("average orders over N = 8, 16, 32:\n");
    println!("  {:<14} {:>6} {:>6}", "configuration", "l2", "v_l2");
    let mut l2 = Vec::new();
    let mut v = Vec::new();
    for (name, r_gamma, eps_mult) in cases {
        let config = RunConfig {
            r_gamma,
            eps_mult,
            ..base.clone()
        };
        let table = run_study_2d(&config)?;
        let avg_l2 = table.averages[0].expect("two refinement steps define an average");
        let avg_v = table.averages[4].expect("v error is never zero");
        println!("  {name:<14} {avg_l2:>6.3} {avg_v:>6.3}");
        l2.push(avg_l2);
        v.push(avg_v);
    }

    let spread = |xs: &[f64]| {
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    println!("\nlargest pairwise gap: l2 {:.3}, v_l2 {:.3}", spread(&l2), spread(&v));
    Ok(())
}
