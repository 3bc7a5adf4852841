//! A kernel library for extensive game forms.
//!
//! The central objects are *node-and-choice forms*: finite game trees whose
//! moves are identified by abstract choices, partitioned into information
//! sets by shared feasibility and assigned to players. The crate provides
//!
//! - validation of trees, preforms, and forms against their defining axioms,
//!   with eagerly derived entities (root, stages, precedence, information
//!   sets, per-player decompositions);
//! - structure-preserving morphisms, isomorphism search and inversion, and
//!   the forgetful functor from forms to preforms;
//! - the two constructive style converters, to choice-sequence nodes and (for
//!   no-absentminded forms) to choice-set nodes, each returning a verified
//!   isomorphism witness;
//! - predicates for no-absentmindedness and perfect information;
//! - exhaustive enumeration of trees, preforms, and forms up to isomorphism
//!   at small node counts, and machine verification of enclosure,
//!   equivalence, and strictness claims between the style/property
//!   subcategories over those universes;
//! - a canonical text format (`NCF/1`) with byte-exact round-tripping.
//!
//! All public structures are immutable after construction and safe to share
//! across threads.
//!
//! ```
//! use ncf::formio::{parse, Document};
//! use ncf::properties::{form_property, PropertyId};
//! use ncf::transport::{convert_form_to, TargetStyle};
//!
//! let text = "\
//! ncf 1 form
//! root: []
//! player 1: a b
//! player 2: c d
//! edge: [] a [a]
//! edge: [] b [b]
//! edge: [a] c [a,c]
//! edge: [a] d [a,d]
//! edge: [b] c [b,c]
//! edge: [b] d [b,d]
//! ";
//! let Document::Form(form) = parse(text)? else { unreachable!() };
//!
//! // Two information sets: the root alone, and the two middle nodes the
//! // second mover cannot tell apart.
//! assert_eq!(form.preform_derived().info_sets.len(), 2);
//! assert!(form_property(&form, PropertyId::NoAbsentmindedness).holds());
//! assert!(!form_property(&form, PropertyId::PerfectInformation).holds());
//!
//! // Rewrite the nodes as choice sets; the returned witness is a verified
//! // isomorphism onto the image.
//! let (image, witness) = convert_form_to(TargetStyle::ChoiceSet, &form)?;
//! assert_eq!(image.nodes().len(), form.nodes().len());
//! assert!(witness.forward().is_isomorphism());
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod form;
pub mod formio;
pub mod morphism;
pub mod node;
pub mod oracle;
pub mod preform;
pub mod properties;
pub mod styles;
pub mod transport;
pub mod tree;

pub use form::{Form, FormDerived, FormError};
pub use node::{label, Label, NodeValue, SeqNode, SetNode};
pub use preform::{Edge, InfoSet, Preform, PreformDerived, PreformError, UnknownNode};
pub use tree::{Chain, Tree, TreeDerived, TreeError};
