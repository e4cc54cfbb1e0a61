//! Discrete dynamics on a space `X`, its `n`-fold symmetric product `F_n(X)`
//! and the symmetric-product suspension `SF_n(X)`, with exact property
//! detectors and a checker for level-transfer theorems.

pub mod detectors;
pub mod dynsys;
pub mod harness;
pub mod hyperspace;
pub mod metric;
pub mod suspension;

pub use detectors::{Budget, Level, LevelEngine, PointKind, Property, SystemLevels, Verdict, Witness};
pub use dynsys::{build_system, Backend, DynError, DynSystem, Endomap, ShiftPoint, ShiftSystem, System, SystemSpec};
pub use harness::{
    brute_force_enumeration, emit_report, run_theorem_suite, CheckResult, HarnessError, Report, ReportFormat, Status,
    TheoremSpec,
};
pub use hyperspace::{ShiftNSubset, SymmetricProduct};
pub use metric::{Dist, FiniteMetric, MetricError, MetricSpace, PointSet};
pub use suspension::{SuspensionPoint, SuspensionSpace};
