//! Simulation of quantum key distribution with singlet-built codewords that
//! are invariant under collective noise.
//!
//! Bits are carried by pairs of four-photon codewords, or three-photon
//! mixed states, whose members differ in which photons form singlets.
//! Measuring every photon in one common basis reveals the bit with
//! probability 1/2; outcomes impossible for every codeword flag interference.

pub mod adversary;
pub mod channel;
pub mod cli;
pub mod codewords;
pub mod decoder;
pub mod protocol;
pub mod qmath;
pub mod streams;
