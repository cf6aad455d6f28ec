//! Text front end for models and formulas.

mod formula;
mod lexer;
mod model_text;

pub use formula::{parse_formula, Formula, Gamma};
pub use model_text::{parse_model, parse_model_unchecked, print_model};
