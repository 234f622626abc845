pub mod bounds;
pub mod cli;
pub mod encoding;
pub mod families;
pub mod harness;
pub mod linalg;
pub mod par;
pub mod poly;
pub mod reproduce;
pub mod ring;
pub mod sequences;
pub mod slp;
