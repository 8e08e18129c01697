//! Instance I/O, the fixture catalog, oracles, the acceptance battery, and
//! report rendering behind the `equistat` binary.

pub mod fixtures;
pub mod io;
pub mod oracle;
pub mod report;
pub mod suite;
