//! Finite geometries as closure spaces, with affine and projective spaces over
//! finite fields and the morphisms between them.
//!
//! The crate is `no_std` (it needs `alloc`). Points of every geometry are dense
//! `usize` ids; subsets of points are [`PointSet`] bitsets. Enumeration entry
//! points expose their search subtrees so callers can distribute them.

#![no_std]

extern crate alloc;

pub mod affine;
pub mod axioms;
pub mod closure_ext;
pub mod counterexamples;
pub mod error;
pub mod field;
pub mod geometry;
pub mod linalg;
pub mod morphism;
pub mod pointset;
pub mod projective;
pub mod quotient;
pub mod search;
pub mod synthetic;

pub use error::Error;
pub use field::{field_morphisms, Elem, FieldMorphism, FiniteField};
pub use geometry::{Flat, Geometry};
pub use linalg::Matrix;
pub use morphism::{GeoMap, PartialGeoMap};
pub use pointset::PointSet;
