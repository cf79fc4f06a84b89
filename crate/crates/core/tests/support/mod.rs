//! Test oracles written from the format definitions, sharing no code with the
//! library codecs, plus matrix generators.
#![allow(dead_code)]

pub mod dense;
pub mod gen;
pub mod oracle;
