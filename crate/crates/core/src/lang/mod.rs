//! Text formats: the wave-expression grammar and the JSON term schema.

mod terms_json;
mod wave_syntax;

pub use terms_json::{parse_terms, terms_to_json, SchemaError};
pub use wave_syntax::{parse_wave, print_wave, ParseError, SourceSpan};
