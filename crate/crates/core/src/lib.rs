//! Approximation algorithm for the Asymmetric TSP on strongly laminar
//! instances, with an exact Held-Karp LP lower bound and runtime
//! certification of every cost bound the algorithm relies on.
//!
//! The crate is organized around the data the algorithm consumes:
//!
//! * [`graph`] — directed multigraphs, Eulerian multi-edge sets, circuit
//!   decomposition and restricted shortest paths;
//! * [`lp`] — the cut relaxation solved exactly by cutting planes;
//! * [`instance`] — strongly laminar instances, backbones, validation and
//!   the on-disk format;
//! * [`cover`] — subtour covers and their verifier;
//! * [`svensson`] — the main loop: budgets, slack/potential bookkeeping,
//!   restart logic and the certified cost ledgers.

pub mod cover;
pub mod error;
pub mod graph;
pub mod instance;
pub mod lp;
pub mod ratio;
pub mod report;
pub mod svensson;

pub use error::{Error, Result};
pub use ratio::Rat;
