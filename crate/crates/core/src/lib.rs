pub mod bitset;
pub mod config;
pub mod constructions;
pub mod document;
pub mod engine;
pub mod error;
pub mod field;
pub mod klein;
pub mod linalg;
pub mod proj;
pub mod search;

pub use bitset::BitSet;
pub use config::Budget;
pub use error::{Error, Result};
pub use field::{Elem, Field};
pub use klein::{GeneratorClass, KleinModel};
