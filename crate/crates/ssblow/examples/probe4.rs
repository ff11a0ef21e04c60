use ssblow::grid::*;
use ssblow::params::ModelParams;
use ssblow::profiles::FundamentalProfile;
use ssblow::elliptic::*;

fn main() {
    let params = ModelParams::new_unchecked(0.05, 1.0, 0.2, 0.0).unwrap();
    let grids = make_grids(GridConfig { n_z: 384, n_theta: 160, ..Default::default() }).unwrap();
    let solver = EllipticSolver::new(&grids, params.alpha(), SolverConfig::default()).unwrap();
    let prof = FundamentalProfile::for_params(&params).unwrap();
    let f = Field::from_fn(&grids, |z, t| prof.eval(z, t));
    let (_, f_tilde) = decompose_rhs(&f);
    let (_, modes) = solver.solve_tilde(&f_tilde).unwrap();
    let n_z = grids.radial.len();
    let mut num = 0.0; let mut den = 0.0;
    let mut worst = (0usize, 0.0f64);
    for i in 0..n_z {
        let mut rhs = 0.0;
        for (k1, m) in modes.iter().enumerate().skip(1) {
            let k = (k1 + 1) as f64;
            let c = (if (k1 + 1) % 2 == 0 { 1.0 } else { -1.0 }) * 15.0 * k
                / ((4.0 * k * k - 1.0) * (4.0 * k * k - 9.0));
            rhs += c * m[i];
        }
        let r = modes[0][i] - rhs;
        if r.abs() > worst.1 { worst = (i, r.abs()); }
        num += r * r * grids.radial.quad_weights[i];
        den += modes[0][i] * modes[0][i] * grids.radial.quad_weights[i];
    }
    println!("rel = {:.3e}, worst residual {:.3e} at z = {:.3e}", (num/den).sqrt(), worst.1, grids.radial.nodes[worst.0]);
    println!("num = {num:.3e} den = {den:.3e}");
    // phi_1 weighted mass distribution
    let mut mass_small = 0.0; let mut mass_large = 0.0;
    for i in 0..n_z {
        let w = modes[0][i]*modes[0][i]*grids.radial.quad_weights[i];
        if grids.radial.nodes[i] < 1.0 { mass_small += w } else { mass_large += w }
    }
    println!("phi1 mass below z=1: {mass_small:.3e}, above: {mass_large:.3e}");
    let mut rmass_small = 0.0; let mut rmass_large = 0.0;
    for i in 0..n_z {
        let mut rhs = 0.0;
        for (k1, m) in modes.iter().enumerate().skip(1) {
            let k = (k1 + 1) as f64;
            let c = (if (k1 + 1) % 2 == 0 { 1.0 } else { -1.0 }) * 15.0 * k
                / ((4.0 * k * k - 1.0) * (4.0 * k * k - 9.0));
            rhs += c * m[i];
        }
        let r = modes[0][i] - rhs;
        let w = r*r*grids.radial.quad_weights[i];
        if grids.radial.nodes[i] < 1.0 { rmass_small += w } else { rmass_large += w }
    }
    println!("resid mass below z=1: {rmass_small:.3e}, above: {rmass_large:.3e}");
}
