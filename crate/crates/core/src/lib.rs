pub mod denote;
pub mod gen;
pub mod ids;
pub mod lang;
pub mod opsem;
pub mod poset;
pub mod syntax;
pub mod term;
