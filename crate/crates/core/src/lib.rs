pub mod check;
pub mod digital;
pub mod error;
pub mod experiment;
pub mod lang;
pub mod model;
pub mod par;
pub mod parametric;
pub mod prism;
pub mod strategy;
pub mod tgc;
