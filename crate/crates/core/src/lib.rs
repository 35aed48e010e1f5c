pub mod driver;
pub mod error;
pub mod generate;
pub mod grid;
pub mod lp;
pub mod matching;
pub mod model;
pub mod number;
pub mod oracle;
pub mod pseudo;
pub mod seed;
pub mod separated;

pub use error::{Error, Result};
