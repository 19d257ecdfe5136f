//! Netlist representation learning toolkit: structural netlist parsing,
//! graph conversion, data-augmentation curation, GraphSAINT-style sampling,
//! and GNN training for node- and graph-level functional classification.

pub mod augment;
pub mod graph;
pub mod model;
pub mod netlist;
pub mod sampler;
pub mod tasks;
