//! Towers (m_0, m_1, ...) with ψ(m_(j+1)) = m_j: the image of E+ is
//! certified, a perturbed tower is refuted at the perturbed index.

use superholder::tate_colmez::{psi_tower_sh_test, PsiTower};
use superholder::{Prime, PuiseuxSeries};

fn main() -> superholder::Result<()> {
    let p = Prime::new(2)?;
    let f = PuiseuxSeries::from_coeffs(p, &[0, 1, 1, 0, 1], 12);
    let diagonal = PsiTower::embed(&f, 3)?;
    println!("embedded: {:?}", psi_tower_sh_test(&diagonal, 2)?);

    let h = PuiseuxSeries::from_coeffs(p, &[0, 1], 12);
    let bent = PsiTower::perturbed(&f, &h, 2, 3)?;
    for (j, m) in bent.entries().iter().enumerate() {
        println!("m_{j} = {m}");
    }
    println!("perturbed: {:?}", psi_tower_sh_test(&bent, 2)?);
    println!(
        "{}",
        serde_json::to_string(&bent.to_json()).expect("serializes")
    );
    Ok(())
}
