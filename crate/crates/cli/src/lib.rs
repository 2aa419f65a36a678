//! Command-line front end and HTTP service for xwalk retrieval.
//!
//! Exit codes: 0 success, 1 usage, 2 input or output failure, 3 cold-start
//! query.

pub mod args;
pub mod commands;
pub mod error;
pub mod service;

use std::io::Write;
use std::time::Duration;

pub use args::{Cli, Command};
pub use error::{ExitKind, Failure};

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Build(a) => commands::build(&a, out),
        Command::Query(a) => commands::query(&a, out),
        Command::Run(a) => commands::run(&a, out),
        Command::Bm25(a) => commands::bm25(&a, out),
        Command::Eval(a) => commands::eval(&a, out),
        Command::Fuse(a) => commands::fuse(&a, out),
        Command::Synth(a) => commands::synth(&a, out),
        Command::Serve(a) => {
            let defaults = a.walk.params()?;
            if a.max_walks == 0 || a.timeout_ms == 0 {
                return Err(Failure::usage("--max-walks and --timeout-ms must be positive"));
            }
            let config = service::ServiceConfig {
                defaults,
                base_seed: a.walk.seed(),
                max_walks: a.max_walks,
                timeout: Duration::from_millis(a.timeout_ms),
            };
            let graph = commands::load_graph(&a.graph)?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(service::serve(graph, config, &a.bind)).map_err(|e| Failure::input(format!("{}: {e}", a.bind)))
        }
    }
}
