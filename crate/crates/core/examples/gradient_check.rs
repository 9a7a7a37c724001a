//! Check analytic gradients of the full objective against central
//! differences for every model kind, then show that a corrupted gradient
//! is caught.

use probsent::grad::{self, compare_with_numeric, finite_difference_check};
use probsent::ModelKind;

fn main() -> probsent::Result<()> {
    for kind in ModelKind::ALL {
        for (seed, lambda) in [(0, 0.0), (1, 1e-2)] {
            let p = grad::random_problem(kind, 5, 20, 4, lambda, seed)?;
            let r = finite_difference_check(&p.model, &p.batch, &p.config, 1e-5, 1e-4)?;
            println!(
                "{kind:<8} lambda={lambda:<5} coords={:<4} max_rel_err={:.2e} passed={}",
                r.checked, r.max_rel_err, r.passed
            );
        }
    }

    let p = grad::random_problem(ModelKind::Wlo, 5, 20, 4, 1e-2, 7)?;
    let (_, mut g) = grad::loss_and_gradients(&p.model, &p.batch, &p.config)?;
    let (id, col) = grad::corrupt_largest(&mut g).expect("non-empty gradient");
    let r = compare_with_numeric(&p.model, &p.batch, &p.config, &g, 1e-5, 1e-4)?;
    println!("corrupted ({}, col {col}): passed={} failures={:?}", p.model.vocab().token(id), r.passed, r.failures);
    Ok(())
}
