//! Parse/lint/debug repair loop for externally produced sources.

use crate::netlist::{lint_netlist, parse_netlist, CellLibrary, Netlist};

use super::client::GeneratorClient;
use super::AugmentError;

/// Convention for sources with multiple modules: the last one defined is
/// the top.
pub fn default_top(nl: &Netlist) -> &str {
    &nl.modules.last().expect("at least one module").name
}

/// Parses and lints `source`; on lint errors, asks the client's debug op
/// for a revised source, up to `max_iters` times. Returns the clean netlist
/// and the number of debug calls made.
pub fn repair_loop(
    source: &str,
    lib: &CellLibrary,
    client: &dyn GeneratorClient,
    max_iters: usize,
) -> Result<(Netlist, usize), AugmentError> {
    assert!(max_iters >= 1, "max_iters must be >= 1");
    let mut current = source.to_string();
    let mut iterations = 0;
    loop {
        let nl = parse_netlist(&current, lib)?;
        if nl.modules.is_empty() {
            return Err(AugmentError::Config("source defines no modules".into()));
        }
        let report = lint_netlist(&nl, lib, default_top(&nl))?;
        if report.is_clean() {
            return Ok((nl, iterations));
        }
        if iterations >= max_iters {
            return Err(AugmentError::RepairExhausted { iterations, report });
        }
        current = client.debug(&current, &report)?;
        iterations += 1;
    }
}
