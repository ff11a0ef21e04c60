use ssblow::grid::*;
use ssblow::params::ModelParams;
use ssblow::profiles::FundamentalProfile;
use ssblow::spaces::*;
use ssblow::elliptic::*;

fn main() {
    let p = ModelParams::new_unchecked(0.05, 1.0, 0.2, 0.0).unwrap();
    let g = make_grids(GridConfig { n_z: 192, n_theta: 128, ..Default::default() }).unwrap();
    let prof = FundamentalProfile::for_params(&p).unwrap();
    let f = Field::from_fn(&g, |z, t| prof.eval(z, t));
    let (gs, gt) = solve_radial_part(&f, p.alpha(), 1e-2).unwrap();
    let bk = bracket_k(&f);
    let scale = bk.max_abs() * 15.0 / 4.0;
    // residual of L^a_z(G* + G~) = (15/4) bk, term by term
    let gs_f = gs.broadcast();
    let gt_f = gt.broadcast();
    let r_star = apply_lz_alpha(&gs_f, p.alpha());
    let r_tilde = apply_lz_alpha(&gt_f, p.alpha());
    let mut worst = (0usize, 0.0f64);
    for i in 4..g.radial.len()-4 {
        let res = r_star.values[[i,0]] + r_tilde.values[[i,0]] - 15.0/4.0*bk.values[i];
        if res.abs() > worst.1 { worst = (i, res.abs()); }
    }
    println!("worst residual {:.3e} (rel {:.3e}) at z = {:.3e}", worst.1, worst.1/scale, g.radial.nodes[worst.0]);
    // breakdown at that node: G* exact derivative is -(3/4a) bk
    let i = worst.0;
    let dz_gs = d_z_radial(&gs);
    let exact_dz_gs = -3.0/(4.0*p.alpha())*bk.values[i];
    println!("G* dz err {:.3e}", dz_gs.values[i] - exact_dz_gs);
    // G~ satisfies alpha D_z G~ = -5 G~ + (3/4) bk
    let dz_gt = d_z_radial(&gt);
    let exact_dz_gt = (-5.0*gt.values[i] + 3.0/4.0*bk.values[i])/p.alpha();
    println!("G~ dz err {:.3e}  (G~ = {:.3e}, exact dz {:.3e})", dz_gt.values[i]-exact_dz_gt, gt.values[i], exact_dz_gt);
    // how accurate is G~ itself? compare against brute-force quadrature of the defining integral
    for &zi in &[60usize, 96, 130, worst.0] {
        let z = g.radial.nodes[zi];
        let m = 5.0/p.alpha();
        // integral (3/4a) int_0^1 s^{m-1} bk(z s) ds by dense GL on [0,1] in u=s^{...}
        // use substitution s = exp(-v/m), v in [0, 60]
        let n = 4000;
        let mut acc = 0.0;
        for k in 0..n {
            let v = 60.0 * (k as f64 + 0.5)/n as f64;
            let s = (-v/m).exp();
            let zs = z*s;
            let bkzs = 2.0*p.alpha()/3.0*ssblow::profiles::gamma_star_raw(zs, p.gamma());
            acc += (-v).exp()*bkzs*(60.0/n as f64);
        }
        let brute = acc*(3.0/(4.0*p.alpha()))*(1.0/m);
        println!("z={:.3e}: G~ = {:.6e}, brute = {:.6e}, rel diff {:.2e}", z, gt.values[zi], brute, (gt.values[zi]-brute)/brute.abs().max(1e-300));
    }
}
