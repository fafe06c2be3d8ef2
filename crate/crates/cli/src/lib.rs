pub mod config;
pub mod output;
pub mod sweep;
pub mod validate;
