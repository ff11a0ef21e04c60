use ssblow::grid::*;
use ssblow::params::ModelParams;
use ssblow::profiles::*;
use ssblow::spaces::*;
use ssblow::weights::*;
use ssblow::verify::{RadialBump, TestField};
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

fn main() {
    let params = ModelParams::new_unchecked(0.05, 1.0, 0.2, 0.0).unwrap();
    let grids = make_grids(GridConfig { n_z: 384, n_theta: 160, ..Default::default() }).unwrap();
    let beta = params.beta();
    let alpha = params.alpha();
    let mut rng = ChaCha8Rng::seed_from_u64(7 ^ 0x5a5a);
    let tf = TestField::random(&mut rng, &params);
    let g0 = tf.sample(&grids);
    let g0_dz = tf.sample_dz(&grids);
    let (_, m0) = l_inv_zk_with_zero(&g0).unwrap();
    let c = m0 * 3.0 / (4.0 * alpha);
    let prof = FundamentalProfile::new(beta, alpha).unwrap();
    let fsb = Field::from_fn(&grids, |z, t| prof.eval(z, t));
    let fsb_dz = Field::from_fn(&grids, |z, t| 2.0*alpha/3.0*dz_gamma_star(z, beta, 1).unwrap()*prof.angular(t));
    let g = g0.sub(&fsb.scale(c));
    let g_dz = g0_dz.sub(&fsb_dz.scale(c));

    let wk = weight_field(WeightKind::WK, &grids, &params);
    let damp = RadialFn::from_fn(&grids, |z| l_inv_gamma_star_raw(z, beta));
    let (lzk, m) = l_inv_zk_with_zero(&g).unwrap();
    println!("moment after corr: {m:e}, c = {c:e}");

    // LHS pieces
    let core = g.add(&g_dz.scale(beta)).sub(&g.mul_radial(&damp));
    let lhs_core = inner(&core, &g, Some(&wk));
    let nonlocal = fsb.mul_radial(&lzk).scale(1.5/alpha);
    let lhs_nl = inner(&nonlocal, &g, Some(&wk));
    println!("lhs core = {lhs_core:e}, lhs nonlocal = {lhs_nl:e}, total = {:e}", lhs_core - lhs_nl);

    // RHS pieces
    let cb = ssblow::profiles::c_star(beta, alpha).unwrap();
    let term1 = (2.0 - beta)/2.0 * inner(&g, &g, Some(&wk));
    let wz = weight_radial(WeightKind::WZ, &grids, &params).unwrap();
    let gsb = RadialFn::from_fn(&grids, |z| gamma_star_raw(z, beta));
    let linv_gsb = RadialFn::from_fn(&grids, |z| l_inv_gamma_star_raw(z, beta));
    let w2 = wz.zip_map(&gsb, |w, gg| w*gg.sqrt());
    let term2 = (1.0-beta)/(2.0*cb*beta)*inner_z(&lzk, &lzk, Some(&w2));
    let w3 = wz.zip_map(&gsb.zip_map(&linv_gsb, |a,b|(a*b).sqrt()), |w,gg| w*gg);
    let term3 = 1.0/(2.0*cb*beta)*inner_z(&lzk, &lzk, Some(&w3));
    println!("rhs terms: {term1:e} {term2:e} {term3:e}, total {:e}", term1+term2+term3);
    // core identity alone:
    println!("core identity check: lhs_core = {lhs_core:e} vs (1-b/2)||gwK||^2 = {:e}", (1.0-beta/2.0)*inner(&g,&g,Some(&wk)));
    // nonlocal identity: lhs_nl should equal -(term2+term3)+... i.e. lhs_nl = (1/2c*)<[L]^2, dz(zGw^2)> 
    println!("-lhs_nl vs term2+term3: {:e} vs {:e}", -lhs_nl, term2+term3);
    let _ = RadialBump::random(&mut rng, beta);
}
