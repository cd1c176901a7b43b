//! Solving u = γ_b(X^(p^n)) and rejecting series outside the commutant.

use superholder::commutant::{
    check_commute, default_samples, gamma_series, solve_commutant, CommuteVerdict,
};
use superholder::{PadicInt, Prime, PuiseuxSeries, Q};

fn main() -> superholder::Result<()> {
    let p = Prime::new(3)?;
    let b = PadicInt::from_u64(p, 1 + 2 * 3 + 2 * 27, 8);
    let u = gamma_series(&b, Q::from_integer(400))?.frobenius_pow(-1);
    let s = solve_commutant(&u, 4)?;
    println!("b digits {:?}, n = {}", s.b.digits(), s.n);
    println!("{}", s.to_json());

    let v = PuiseuxSeries::from_coeffs(p, &[0, 1, 1], 5);
    match check_commute(&v, &default_samples(p, 8))? {
        CommuteVerdict::ConsistentToPrec { verified_to } => {
            println!("X + X^2 commutes below X^{verified_to}")
        }
        CommuteVerdict::Refuted { a, exponent } => {
            println!(
                "X + X^2: a = {:?} moves the coefficient of X^{exponent}",
                a.to_u64()
            )
        }
    }
    match solve_commutant(&v, 1) {
        Ok(_) => println!("unexpectedly solved"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
