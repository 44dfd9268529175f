//! Text formats, reports and the `nmrqc` command-line driver built on
//! [`nmrqc_core`].
//!
//! * [`config`]: spin-system description files.
//! * [`circuit`]: the gate-level circuit language.
//! * [`program`]: pulse-program files.
//! * [`report`]: spectrum CSV and text reports.
//! * [`cli`]: command dispatch with documented exit codes.

pub mod circuit;
pub mod cli;
pub mod config;
pub mod program;
pub mod report;
pub mod text;
