use ssblow::grid::*;
use ssblow::params::ModelParams;
use ssblow::profiles::FundamentalProfile;
use ssblow::elliptic::*;
use ssblow::spaces::bracket_k;

fn main() {
    let params = ModelParams::new_unchecked(0.05, 1.0, 0.2, 0.0).unwrap();
    let grids = make_grids(GridConfig { n_z: 384, n_theta: 160, ..Default::default() }).unwrap();
    let solver = EllipticSolver::new(&grids, params.alpha(), SolverConfig::default()).unwrap();
    let prof = FundamentalProfile::for_params(&params).unwrap();
    let f = Field::from_fn(&grids, |z, t| prof.eval(z, t));
    let (_, f_tilde) = decompose_rhs(&f);
    let (phi_tilde, modes) = solver.solve_tilde(&f_tilde).unwrap();
    // mode magnitudes
    for k in [0usize,1,2,3,7,15,31] {
        let m = &modes[k];
        let mx = m.iter().fold(0.0f64, |a,&b| a.max(b.abs()));
        println!("mode {} max {:.3e}", k+1, mx);
    }
    // <Phi~, K> profile
    let bk = bracket_k(&phi_tilde);
    println!("max <Phi~,K> = {:.3e} vs phi_tilde max {:.3e}", bk.max_abs(), phi_tilde.max_abs());
    // kappa-weighted sum of modes
    let n_z = grids.radial.len();
    let mut worst = 0.0f64; let mut at = 0;
    for i in (4..n_z-4).step_by(8) {
        let mut x = 0.0;
        for (k1, m) in modes.iter().enumerate() {
            let k = (k1+1) as f64;
            let kap = (if (k1+1)%2==0 {1.0} else {-1.0})*4.0*k/((4.0*k*k-1.0)*(4.0*k*k-9.0));
            x += kap*m[i];
        }
        if x.abs() > worst { worst = x.abs(); at = i; }
    }
    println!("max |sum kappa_m phi_m| = {:.3e} at z = {:.3e}", worst, grids.radial.nodes[at]);
    println!("phi_1 max = {:.3e}", modes[0].iter().fold(0.0f64,|a,&b|a.max(b.abs())));
    // rhs coefficient magnitudes
    let coeffs = solver.project_modes(&f_tilde);
    for k in [0usize,1,2,31] {
        let mx = coeffs[k].iter().fold(0.0f64,|a,&b|a.max(b.abs()));
        println!("rhs mode {} max {:.3e}", k+1, mx);
    }
}
// appended second entry point not allowed; edit instead below
