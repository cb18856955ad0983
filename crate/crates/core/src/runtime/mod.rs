//! Services shared by every solver: declared per-iteration outputs, run
//! records, hot-start replay, readable text exports and result printing.

pub mod hexfloat;
mod hotstart;
mod outputs;
mod present;
mod readable;
pub mod record;

pub use hotstart::HotStartCache;
pub use outputs::{IterEvent, OutputKind, OutputValue, OutputsDecl};
pub use present::print_results;
pub use readable::write_readable_outputs;
pub use record::{read_record, write_record, EvalEvent, Event, RecordHeader, RunRecord};
