//! A rank-2 module built from a gauge matrix U: its cocycle profile, the
//! series for H_g, and the level of a vector.

use superholder::phigamma::{
    fixed_point_series, gauge_module, matrix_sh_profile, validate_module, vector_sh_profile,
    MatrixSeries,
};
use superholder::valuation::format_val;
use superholder::{Prime, PuiseuxSeries, Q};

fn main() -> superholder::Result<()> {
    let p = Prime::new(3)?;
    let prec = Q::from_integer(40);
    let s = |c: &[u64]| PuiseuxSeries::from_coeffs(p, c, 40);
    let u = MatrixSeries::from_rows(vec![
        vec![s(&[1, 1]), s(&[0, 0, 1])],
        vec![s(&[0, 2]), s(&[1])],
    ])?;
    let m = gauge_module(&u, 1)?;
    let samples = [m.element(1)?, m.element(2)?, m.element(3)?];
    println!("valid: {}", validate_module(&m, &samples)?.passes());

    let profile = matrix_sh_profile(&m, 3)?;
    println!("cocycle lambda = {}, mu = {}", profile.lambda, profile.mu);

    let fp = fixed_point_series(&m, &m.element(1)?, None, 4)?;
    println!("r = {}, residual {}", fp.r, format_val(&fp.residual()?));

    let x = vec![
        PuiseuxSeries::monomial(p, Q::new(1, 9), 1, prec)?,
        PuiseuxSeries::zero(p, prec)?,
    ];
    let vp = vector_sh_profile(&m, &x, 3)?;
    let estimate = vp.estimate.map(|e| e.n);
    println!("vector level {}, estimate {:?}", vp.level, estimate);
    Ok(())
}
