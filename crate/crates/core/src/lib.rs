pub mod algebra;
pub mod catalog;
pub mod charclass;
pub mod connection;
pub mod derham;
pub mod error;
pub mod geometry;
pub mod rees;
pub mod settings;
pub mod tower;

pub use algebra::*;
pub use connection::*;
pub use error::{Error, Result};
pub use geometry::*;
pub use settings::{stabilize, Settings, Stabilized};
pub use tower::*;
