//! The two-atom reference spaces used throughout the tests and the CLI
//! examples.
//!
//! * W1: `Ω = {ω1, ω2}`, `P = ½` each, `F_0 = F_1` trivial, `F_2` discrete,
//!   random time `τ = (1, 2)`.
//! * W2: `Ω = {ω1, ω2}`, `P = ½` each, `F_0` trivial, `F_1` discrete,
//!   signal `J = (a, b)`.

use crate::initial::Signal;
use crate::process::StoppingMap;
use crate::rational::q;
use crate::space::{FinSpace, Filtration, Partition};

pub fn w1_space() -> FinSpace {
    let f = Filtration::new(vec![Partition::trivial(2), Partition::trivial(2), Partition::discrete(2)])
        .expect("valid filtration");
    FinSpace::new(vec![q(1, 2), q(1, 2)], f).expect("valid space")
}

pub fn w1_tau() -> StoppingMap {
    StoppingMap::new(vec![1, 2])
}

pub fn w2_space() -> FinSpace {
    let f = Filtration::new(vec![Partition::trivial(2), Partition::discrete(2)]).expect("valid filtration");
    FinSpace::new(vec![q(1, 2), q(1, 2)], f).expect("valid space")
}

pub fn w2_signal() -> Signal {
    Signal::from_labels(&w2_space(), &["a", "b"]).expect("valid signal")
}
