//! Inspects the 1D immersed basis on the element containing the
//! interface: the two shape functions are linear on each side of alpha,
//! continuous, and bend exactly so that their coefficient-scaled slopes
//! match across the interface.

use fluxfem::ifem1d::{Grid1d, IfemBasis};
use fluxfem::problems::Side;

fn main() -> fluxfem::Result<()> {
    let alpha = 1.0 / 3.0;
    let (beta_minus, beta_plus) = (2.0, 10.0);
    let grid = Grid1d::new(10)?;
    let basis = IfemBasis::new(grid, alpha, beta_minus, beta_plus)?;

    let e = basis.grid.element_containing(alpha);
    let (xl, xr) = (basis.grid.node(e), basis.grid.node(e + 1));
    println!("interface alpha = {alpha:.6} lies in element {e} = [{xl:.3}, {xr:.3}]");
    println!("beta = ({beta_minus}, {beta_plus})\n");

    println!("pieces of the cut element:");
    for piece in basis.element_pieces(e) {
        println!(
            "  [{:.4}, {:.4}] on side {:?}",
            piece.a, piece.b, piece.side
        );
    }

    let sm = basis.shape_slopes(e, Side::Minus);
    let sp = basis.shape_slopes(e, Side::Plus);
    println!("\nshape-function slopes left / right of alpha:");
    for k in 0..2 {
        let jump = beta_minus * sm[k] - beta_plus * sp[k];
        println!(
            "  phi_{k}: {:>9.4} / {:>9.4}   beta-weighted jump = {jump:.2e}",
            sm[k], sp[k]
        );
    }

    println!("\nprofile across the cut element (phi_left, phi_right, sum):");
    for i in 0..=8 {
        let x = xl + (xr - xl) * i as f64 / 8.0;
        let side = if x <= alpha { Side::Minus } else { Side::Plus };
        let v = basis.shape_values(e, side, x);
        println!("  x = {x:.4}   {:.6}   {:.6}   {:.6}", v[0], v[1], v[0] + v[1]);
    }
    Ok(())
}
