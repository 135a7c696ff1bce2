pub mod algebra;
pub mod cli;
pub mod oracle;
pub mod parser;
pub mod semantics;
pub mod syntax;
pub mod term_model;
