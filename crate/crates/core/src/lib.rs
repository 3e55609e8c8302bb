pub mod database;
pub mod error;
pub mod keysheaf;
pub mod oracle;
pub mod schema;
pub mod script;
pub mod simple_schema;
pub mod storage;
pub mod table;
pub mod typespec;
pub mod unionfind;

pub use error::{Error, Result};
