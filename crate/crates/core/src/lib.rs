#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod cli;
pub mod composition;
pub mod error;
pub mod global;
pub mod local;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod privacy;
