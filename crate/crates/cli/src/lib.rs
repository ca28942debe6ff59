//! Simulation harness, file formats and report types behind the `pbayes`
//! command-line tool.

pub mod io;
pub mod shotrates;
pub mod sim;
