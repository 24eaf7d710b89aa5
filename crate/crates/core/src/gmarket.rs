use crate::process::{Process, StoppingMap};
use crate::space::Filtration;

/// A market on an enlarged filtration `G`.
///
/// For progressive enlargement `assets` are the stopped prices `S^τ` and
/// `tau` is set; for initial enlargement the prices are unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct GMarket {
    pub filtration: Filtration,
    pub assets: Vec<Process>,
    pub tau: Option<StoppingMap>,
}
