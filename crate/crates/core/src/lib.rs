//! A workbench for the relational model of abstract programs.
//!
//! Programs are relations from the states of a finite base state space to
//! executions, i.e. finite or infinite state sequences whose inner states may
//! bind auxiliary variables that are created and destroyed on the fly. The
//! crate provides:
//!
//! * [`state_space`]: direct-product spaces, subspaces, renamings, projections;
//! * [`program`]: executions, extensional programs and their validation;
//! * [`transforms`]: renaming, extension and restriction of the base space;
//! * [`semantics`]: a nondeterministic command language with subprograms;
//! * [`analysis`]: effects, solution checking and program equivalence.

pub mod analysis;
pub mod program;
pub mod semantics;
pub mod state_space;
pub mod transforms;
