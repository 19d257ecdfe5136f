//! Error plumbing with the exit-code policy: 1 for problems with the user's
//! inputs (lint errors, bad configs, malformed files), 2 for I/O and
//! internal failures.

use std::fmt;
use std::path::Path;

#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub exit_code: i32,
}

impl CliError {
    pub fn user(message: impl Into<String>) -> CliError {
        CliError {
            message: message.into(),
            exit_code: 1,
        }
    }

    pub fn internal(message: impl Into<String>) -> CliError {
        CliError {
            message: message.into(),
            exit_code: 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<netlearn::netlist::NetlistError> for CliError {
    fn from(e: netlearn::netlist::NetlistError) -> CliError {
        CliError::user(e.to_string())
    }
}

impl From<netlearn::graph::GraphError> for CliError {
    fn from(e: netlearn::graph::GraphError) -> CliError {
        CliError::user(e.to_string())
    }
}

impl From<netlearn::augment::AugmentError> for CliError {
    fn from(e: netlearn::augment::AugmentError) -> CliError {
        CliError::user(e.to_string())
    }
}

impl From<netlearn::model::ModelError> for CliError {
    fn from(e: netlearn::model::ModelError) -> CliError {
        CliError::user(e.to_string())
    }
}

impl From<netlearn::tasks::TasksError> for CliError {
    fn from(e: netlearn::tasks::TasksError) -> CliError {
        CliError::user(e.to_string())
    }
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::internal(format!("reading {}: {e}", path.display())))
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::internal(format!("writing {}: {e}", path.display())))
}

pub fn make_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path)
        .map_err(|e| CliError::internal(format!("creating {}: {e}", path.display())))
}
