//! All three 12-qubit experiments through the same pipeline the CLI uses.
//! Takes about a minute in release mode.
//!
//!     cargo run --release --example reproduce_experiments -- /tmp/aqc-out

use std::path::PathBuf;

use aqc_wta::commands::{reproduce, RunConfig};

fn main() -> aqc_wta::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("aqc-wta-reproduce"));
    let report = reproduce(&RunConfig::default(), &out)?;
    println!("{report}");
    println!("artifacts in {}", out.display());
    Ok(())
}
