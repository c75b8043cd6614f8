pub mod assets;
pub mod checks;
pub mod commands;
