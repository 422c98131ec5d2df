//! Text-driven conversational engine that pairs a small product-information
//! dialogue system with communicative facial displays on a muscle-driven face.
//!
//! The turn pipeline runs left to right through the modules:
//!
//! * [`nlp`] tokenizes, parses and disambiguates an utterance into a [`nlp::SemanticFrame`].
//! * [`plan`] keeps belief contexts and topic state, and commits to an [`plan::Intention`]
//!   or asks for clarification.
//! * [`respond`] renders the intention through templates and the product [`kb`], and
//!   produces phoneme tracks for lip sync.
//! * [`display`] maps conversational situations to facial displays and blends them into
//!   26-value parameter requests.
//! * [`face`] integrates the display dynamics and deforms the face mesh.
//! * [`session`] ties the stages together, speaks the line protocol and scores sessions.

pub mod display;
pub mod face;
pub mod kb;
pub mod nlp;
pub mod plan;
pub mod resources;
pub mod respond;
pub mod session;

pub use resources::Resources;
