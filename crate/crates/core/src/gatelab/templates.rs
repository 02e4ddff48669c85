//! Junction templates.

use crate::gatelab::calibrate::{CascadeTemplate, GateTemplate};
use crate::gatelab::layout::GateKind;

pub fn w3() -> GateTemplate {
    GateTemplate {
        kind: GateKind::W3,
        rows: 11,
        input_rows: vec![1, 5, 9],
        output_row: 7,
        junction: [
            ".###...", "#.#.#..", "#...#..", "#......", "######.", "..###.#", "..#....", "...#.##",
            ".#.#.#.",
        ]
        .iter()
        .map(|r| r.to_string())
        .collect(),
        output_sites: 2,
        base_start: vec![6, 2, 16],
        input_sites: vec![8],
    }
}

/// No five-input junction has been found yet; see the README.
pub fn w5() -> Option<GateTemplate> {
    None
}

/// Three W3 copies stacked 10 lattice rows apart. The final junction is
/// still unknown, so `junction` is empty and building fails.
pub fn cascade() -> CascadeTemplate {
    CascadeTemplate {
        gate: w3(),
        stride: 10,
        lead_sites: 2,
        max_delay: 3,
        junction: Vec::new(),
        output_row: 15,
        output_sites: 2,
    }
}
