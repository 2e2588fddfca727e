//! Space-time adapter synthesis.
//!
//! Given an I/O access schedule (which datum is written on which input
//! port at which cycle, and when and where it is read back), `star-forge`
//! builds a storage architecture of FIFOs, LIFOs and registers with routing
//! and a per-cycle control schedule, then replays it cycle by cycle to
//! prove the design reproduces every scheduled read.
//!
//! The flow is:
//!
//! 1. [`rcg::build_rcg`] tags every token pair with the storage discipline
//!    it admits (register reuse, FIFO, LIFO or none);
//! 2. [`binder::bind`] greedily extracts FIFO/LIFO paths from the graph and
//!    sizes them; leftovers become registers;
//! 3. [`optimizer::optimize`] merges same-kind structures with disjoint
//!    lifetimes;
//! 4. [`architecture`] materializes the netlist and control schedule;
//! 5. [`simulator`] replays and verifies it.
//!
//! [`synthesize`] runs all five steps.

pub mod architecture;
pub mod binder;
pub mod cli;
pub mod optimizer;
pub mod rcg;
pub mod schedule;
pub mod simulator;

use thiserror::Error;

use architecture::{build_control, build_netlist, ArchError, ArchitectureNetlist, ControlSchedule};
use binder::{bind, BindError, BindingConfig, BindingResult};
use optimizer::{optimize, OptimizedArchitecture};
use rcg::{build_rcg, CompatibilityGraph};
use schedule::AccessSchedule;
use simulator::{simulate, verify, SimResult, VerifyFailure};

/// Every intermediate product of one synthesis run.
#[derive(Clone, Debug)]
pub struct Synthesis {
    pub graph: CompatibilityGraph,
    pub binding: BindingResult,
    pub architecture: OptimizedArchitecture,
    pub netlist: ArchitectureNetlist,
    pub control: ControlSchedule,
    pub simulation: SimResult,
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error(transparent)]
    Config(#[from] BindError),
    #[error(transparent)]
    Architecture(#[from] ArchError),
    #[error("verification failed: {} mismatching port(s), {} violation(s)", .0.mismatches.len(), .0.violations)]
    Verification(VerifyFailure),
}

/// Full pipeline on a validated schedule. Fails unless the replayed design
/// reproduces the schedule exactly.
pub fn synthesize(s: &AccessSchedule, cfg: &BindingConfig) -> Result<Synthesis, SynthError> {
    cfg.check()?;
    let graph = build_rcg(s);
    let binding = bind(&graph, cfg);
    let architecture = optimize(&binding);
    let netlist = build_netlist(&architecture, s)?;
    let control = build_control(&netlist, s)?;
    let simulation = simulate(&netlist, &control, s);
    verify(&simulation, s).map_err(SynthError::Verification)?;
    Ok(Synthesis {
        graph,
        binding,
        architecture,
        netlist,
        control,
        simulation,
    })
}
