//! Lowering of checked blocks to automata and assembly of the synchronized
//! network.
//!
//! Every automaton has the control states `Idle`, `Computed` and
//! `Sent_1 .. Sent_{m-1}` for `m` outputs. Inputs are received by self-loops
//! on `Idle` that store the value and raise a per-input reception flag; a
//! later reception of the same input overwrites the stored value. The single
//! internal transition `Idle -> Computed` is enabled once every flag is set;
//! it runs the then-body, computes the outputs and clears the flags. The
//! outputs are then offered one at a time along
//! `Computed -> Sent_1 -> .. -> Idle`.

mod automaton;
mod network;

pub use automaton::{
    flag_var, out_var, transform_block, Automaton, Initial, Origin, Transition, TransitionKind,
    VarRole, Variable, COMPUTED, IDLE,
};
pub use network::{assign_initial, build_network, Endpoint, Interaction, Network};
