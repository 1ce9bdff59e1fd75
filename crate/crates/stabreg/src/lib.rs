//! Queuing stability regions of a TDD cell whose base station relays
//! user-to-user traffic.
//!
//! A single cell carries two kinds of communications: uplink-only flows
//! (`UE2BS`) and relayed flows (`UE2UE`) whose packets traverse an uplink
//! leg into a base-station buffer and a downlink leg out of it. The relay
//! buffer couples every queue in the cell: whenever it is empty the
//! downlink leg cannot be scheduled and the slot goes elsewhere. This
//! crate computes the resulting stability regions:
//!
//! * [`qbd`] solves the relay-queue Markov chain exactly (bounded jumps of
//!   `1` and `k` packets, matching the two-rate link adaptation model),
//! * [`bd`] is the birth-death aggregation of that chain with closed-form
//!   emptiness probability and a finite candidate set for the scheduler's
//!   uplink/downlink split,
//! * [`region`] assembles three-user and multi-user regions as downward
//!   closed convex polytopes ([`polytope`]), both exactly and through the
//!   reduced/approximated constructions that trade precision for
//!   tractability,
//! * [`sim`] is a slot-level Monte-Carlo oracle for empirical service
//!   rates and Loynes-style stability verdicts.
//!
//! Region construction algorithms are registered behind
//! [`region::RegionBuilder`] and selected by name at runtime.

pub mod bd;
pub mod channel;
pub mod policy;
pub mod polytope;
pub mod presets;
pub mod qbd;
pub mod region;
pub mod sim;
pub mod ss;

pub use channel::{LinkDirection, LinkGeometry, LinkStateProbs, RadioConfig};
pub use policy::{MuPolicy, SsPolicy, SsPolicyParams};
pub use qbd::{ChainSpec, StationaryDist};
pub use region::{RegionVertexSet, Scenario};
pub use ss::{SsAlpha, SsScenario};
