//! The decomposition f = sum_i (1+X)^i a_i(f) and the traces T_n.

use superholder::puiseux::parse_text;
use superholder::tate_colmez::{colmez_decompose, tate_traces};
use superholder::valuation::{format_q, format_val};
use superholder::{Prime, Q};

fn main() -> superholder::Result<()> {
    let p = Prime::new(2)?;
    let f = parse_text("X^(1/8) + X^(3/4) + X^2", p, Q::from_integer(6))?;
    println!("f = {f}");

    let d = colmez_decompose(&f)?;
    for (j, a) in d.entries().iter().enumerate() {
        if !a.is_zero() {
            println!("a_{} = {a}", format_q(d.index(j)));
        }
    }
    println!("inf val a_i = {}", format_val(&d.inf_val()));
    println!("reconstructs: {}", d.reconstruct()?.eq_mod(&f));

    for (n, t) in tate_traces(&f)?.iter().enumerate() {
        println!("T_{n}(f) = {t}");
    }
    Ok(())
}
