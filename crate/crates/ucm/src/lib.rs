//! Standard-library side of the use case modeling workbench: completion
//! providers, session persistence, the REST service and the CLI.

pub mod cli;
pub mod clock;
pub mod provider;
pub mod service;
pub mod store;
pub mod times;

pub use clock::{SystemClock, UuidIds};
pub use provider::{load_fixture_dir, LiveConfig, LiveProvider, Recording, ScriptedProvider};
pub use service::{router, AppPipeline, AppState, ServiceConfig};
pub use store::{SessionStore, StoreError};
pub use times::{read_times, PairedTimes};
