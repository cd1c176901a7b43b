//! Mahler coefficients of the orbit function a -> (1 + p^k a).X^(1/p^n),
//! the super-Hölder test on them, and the fitted orbit profile.

use superholder::mahler::{mahler_coeffs, orbit_fn, orbit_profile, sh_test_mahler};
use superholder::{Prime, PuiseuxSeries, Q};

fn main() -> superholder::Result<()> {
    let p = Prime::new(2)?;
    let (k, n, t) = (3u32, 1u32, 3u32);
    let prec = Q::from_integer(2 * 2i64.pow(k + 4));
    let m = PuiseuxSeries::monomial(p, Q::new(1, 2i64.pow(n)), 1, prec)?;

    let orbit = orbit_fn(&m, k, t)?;
    let e = mahler_coeffs(&orbit.function, 2usize.pow(t) - 1)?;
    for (i, c) in e.coeffs().iter().enumerate().take(5) {
        println!(
            "m_{i}: val {}",
            superholder::valuation::format_val(&c.val())
        );
    }
    let lambda = (k - n) as f64;
    println!(
        "lambda = {lambda}: {}",
        sh_test_mahler(&e, lambda, 0.0).label()
    );
    println!(
        "lambda = {}: {}",
        lambda + 1.0,
        sh_test_mahler(&e, lambda + 1.0, 0.0).label()
    );

    let profile = orbit_profile(&m, k, 4)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&profile).expect("serializes")
    );
    Ok(())
}
