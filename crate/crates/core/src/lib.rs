//! Analysis toolkit for RAFT-based IoT blockchain networks under active attack.
//!
//! Two attacks are modelled. Jamming is analysed through stochastic-geometry
//! coverage probabilities ([`coverage`]) that are cross-checked by direct
//! Monte Carlo simulation ([`mc`]). Impersonation is countered by a
//! pathloss-fingerprint hypothesis test at the leader ([`authn`]). The
//! [`raftsim`] module composes both into end-to-end consensus rounds.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod authn;
pub mod coverage;
pub mod error;
pub mod mc;
pub mod netmodel;
pub mod raftsim;
pub mod rng;
pub mod specfun;

pub use authn::{AuthDecision, AuthRegistry, EveEnsemble, Hypothesis};
pub use coverage::{CoverageQuery, CoverageResult, Link};
pub use error::{Error, Result};
pub use mc::{GeometryMode, McConfig, McEstimate};
pub use netmodel::{ChannelParams, DeploymentConfig, JammerAnnulus, Point, PppField};
pub use raftsim::{ConsensusRoundOutcome, RoundConfig};
pub use specfun::QuadratureSpec;
