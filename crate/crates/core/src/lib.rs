//! Cork extraction for 5-dimensional h-cobordisms, at the level of chain
//! complexes and group presentations.

pub mod grouppres;
pub mod intmat;
pub mod kirby;
pub mod middle;
pub mod pipeline;
pub mod slides;
