pub mod actions;
pub mod error;
pub mod grassmann;
pub mod kaehler;
pub mod linalg;
pub mod metric_space;
pub mod sampling;
pub mod space_forms;
pub mod stiefel;
pub mod verify;

pub use error::{GeomError, Result};
