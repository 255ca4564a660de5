//! Measures the interpolation operator into the immersed space: nodal
//! values of the exact solution plus the one-sided slope kappa on the cut
//! element. The L2 error is second order, the H1-seminorm first order,
//! and kappa itself approaches the exact left derivative at roughly half
//! order on this scale of meshes.

use fluxfem::ifem1d::{interpolate, Grid1d};
use fluxfem::norms::error_norms_1d;
use fluxfem::problems::{quartic_interface_1d, Side};

fn main() -> fluxfem::Result<()> {
    let problem = quartic_interface_1d(1.0 / 3.0, 2.0, 10.0, 0.0)?;
    let du_exact = problem.exact_du(problem.alpha, Side::Minus);

    println!("     N        l2        h1     |kappa - u_x^-|");
    let mut prev: Option<[f64; 3]> = None;
    for n in [16usize, 32, 64, 128, 256, 512, 1024] {
        let pi = interpolate(&problem, Grid1d::new(n)?)?;
        let r = error_norms_1d(&pi, &problem)?;
        let kappa_err = (pi.kappa() - du_exact).abs();
        let errs = [r.l2, r.h1_semi, kappa_err];
        match prev {
            Some(p) => println!(
                "  {n:>4}  {:.3e} ({:.2})  {:.3e} ({:.2})  {:.3e} ({:.2})",
                errs[0],
                (p[0] / errs[0]).log2(),
                errs[1],
                (p[1] / errs[1]).log2(),
                errs[2],
                (p[2] / errs[2]).log2()
            ),
            None => println!(
                "  {n:>4}  {:.3e}         {:.3e}         {:.3e}",
                errs[0], errs[1], errs[2]
            ),
        }
        prev = Some(errs);
    }
    println!("\n(parenthesized: order of the step from the previous row)");
    Ok(())
}
