mod report;
mod run;
mod scenario;
mod trace;

pub use report::*;
pub use run::*;
pub use scenario::*;
pub use trace::*;
