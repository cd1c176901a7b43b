//! Parsing, arithmetic, Frobenius and the action of Z_p^× on a series.

use superholder::puiseux::{gamma_act, parse_text};
use superholder::{PadicInt, Prime, Q};

fn main() -> superholder::Result<()> {
    let p = Prime::new(3)?;
    let f = parse_text("X^(1/3) + 2*X^(4/3)", p, Q::from_integer(3))?;
    println!("f        = {f}");
    println!("json     = {}", f.to_json());
    println!(
        "val f    = {}",
        superholder::valuation::format_val(&f.val())
    );
    println!("phi(f)   = {}", f.frobenius());
    println!("f^2      = {}", f.mul(&f)?);

    let minus_one = PadicInt::from_i64(p, -1, 16);
    println!("(-1).f   = {}", gamma_act(&minus_one, &f)?);
    let four = PadicInt::from_u64(p, 4, 16);
    println!("4.f      = {}", gamma_act(&four, &f)?);
    Ok(())
}
