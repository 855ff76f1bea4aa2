#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geom;
pub mod io;
pub mod ocp;
pub mod pipeline;
pub mod refine;
pub mod roadmap;
pub mod vessel;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
pub mod book_introduction {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/maps.md")]
pub mod book_maps {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/roadmaps.md")]
pub mod book_roadmaps {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/refinement.md")]
pub mod book_refinement {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/vessel.md")]
pub mod book_vessel {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/optimization.md")]
pub mod book_optimization {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/pipeline.md")]
pub mod book_pipeline {}
