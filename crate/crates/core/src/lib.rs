//! Edge spaces spanned by copies of a fixed pattern in random graphs.

pub mod enumeration;
pub mod gf2;
pub mod graph;
pub mod pattern;
pub mod spaces;
pub mod experiments;
