use polaron::model::{build_hamiltonian, ModelParams};
use polaron::wick::{vacuum_moment, Measure};

fn main() {
    let h = build_hamiltonian(&ModelParams::rest(0.5, 10.0).unwrap(), 0.0).unwrap();
    let ladder = h.ladder_terms();
    for (i, t) in ladder.terms.iter().enumerate() {
        println!("term {i}: coeff={} radial={:?} dots={:?} ladder={:?}", t.coeff, t.radial, t.dots, t.ladder);
    }
    for m in 0..=3 {
        match vacuum_moment(&ladder, &Measure::continuum(10.0), m) {
            Ok(p) => println!("m={m}: {:?}", p.iter().collect::<Vec<_>>()),
            Err(e) => println!("m={m}: ERROR {e}"),
        }
    }
}
