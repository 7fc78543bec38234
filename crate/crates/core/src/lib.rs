//! Counterexample explanation for function block diagrams.
//!
//! The crate compiles a deterministic NuSMV subset into a hierarchical block
//! diagram, replays a counterexample through it, explains individual
//! assignments by backward traversal of the diagram, and evaluates and
//! explains LTL formulas over lasso-shaped traces.
//!
//! ```
//! use cx_core::{smv, trace::{declared_variables, Trace}, explain::{explain, Target}};
//!
//! let model = smv::parse_model(
//!     "MODULE main\nVAR a : boolean; b : boolean; m : gate(a, b);\n\
//!      MODULE gate(x, y) --@ x : boolean; y : boolean\n\
//!      VAR out : boolean;\nASSIGN init(out) := FALSE; next(out) := x & y;\n",
//! ).unwrap();
//! let diagram = smv::build_diagram(&model).unwrap();
//! let trace = Trace::parse_nusmv(
//!     "-> State: 1.1 <-\n a = TRUE\n b = FALSE\n m.out = FALSE\n\
//!      -> State: 1.2 <-\n m.out = FALSE\n",
//!     &declared_variables(&diagram),
//! ).unwrap();
//! let ext = cx_core::sim::extend_trace(&diagram, &trace, trace.len()).unwrap();
//! let out = diagram.variable("m.out").unwrap();
//! let result = explain(&diagram, &ext, &Target::global(out, 2)).unwrap();
//! let names: Vec<String> = result.terminating_rows(&diagram).iter().map(|r| r.var.clone()).collect();
//! assert!(names.contains(&"b".to_string()));
//! ```

pub mod api;
pub mod explain;
pub mod ir;
pub mod ltl;
pub mod smv;
pub mod trace;
pub mod value;

pub use trace::sim;

pub use explain::{explain, ExplanationResult, Target};
pub use ir::{Assignment, BasicOp, BlockId, Diagram, DiagramBuilder, GateId};
pub use ltl::{EvalTable, FormulaCause};
pub use smv::formula::{parse_ltl, FormulaTree};
pub use trace::{ExtendedTrace, Trace};
pub use value::{Value, ValueKind};
