//! Primitive discovery, sheathed channels, and wave-based majority gates.

pub mod calibrate;
pub mod channel;
pub mod classify;
pub mod discovery;
pub mod layout;
pub mod templates;

pub use channel::{build_channel, Axis, ChannelSpec};
pub use classify::{classify_output, BitSignal, Classification, OutputWindow};
pub use discovery::{discover_primitives, Heading, PrimitiveCatalog};
pub use layout::{
    encode_input, evaluate_gate, majority, truth_table, BlockLattice, GateKind, GateLayout,
    GateResult, InjectionSite, PlacedChannel, Placement, TruthRow, TruthTable,
};
