//! Commutator averages with conserved generators on a translation-invariant
//! spin chain, plus a random-generator control.

use friction_workbench::kubo::*;

fn main() -> Result<(), KuboError> {
    let params = ChainParams::default();
    for temperature in [Temperature::Zero, Temperature::Kt(1.0)] {
        let sys = chain(params, temperature)?;
        let bond = sys.observable("bond")?.clone();
        let cases = [
            ("translation generator", translation_generator(params.sites)),
            ("H0", sys.h0().clone()),
            ("random Hermitian", random_hermitian(sys.dim(), 7)),
        ];
        println!("{temperature:?} (ground degeneracy {})", sys.ground_degeneracy());
        for (name, g) in cases {
            let c = conserved_commutator_check(&sys, &bond, &g)?;
            println!(
                "  {name:<22} |<[A,G]>| = {:.2e}  bound {:.2e}  ‖[rho,G]‖ = {:.1e}  conserved {}  pass {}",
                c.value, c.bound, c.state_commutator, c.conserved, c.passed
            );
        }
    }
    Ok(())
}
