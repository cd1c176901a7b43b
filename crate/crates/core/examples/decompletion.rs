//! Recovering the level of a series from its exponents and, independently,
//! from the valuations of its Γ_k-orbit.

use superholder::puiseux::parse_text;
use superholder::tate_colmez::decomplete;
use superholder::{Prime, Q};

fn main() -> superholder::Result<()> {
    let p = Prime::new(3)?;
    for text in ["X + X^2", "X^(1/3) + X^5", "X^(2/9) + X^(1/3)", "X^(1/27)"] {
        let f = parse_text(text, p, Q::from_integer(30))?;
        let d = decomplete(&f, 1, 3)?;
        let estimate = d
            .classified
            .as_ref()
            .map(|c| c.n.to_string())
            .unwrap_or("-".into());
        println!("{text:>20}: level {}, orbit estimate {estimate}", d.n);
    }
    Ok(())
}
