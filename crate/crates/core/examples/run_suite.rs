//! Runs one verification suite from an inline configuration and prints its
//! checks, without writing any files.
//!
//! Argument: `geometry`, `exponents`, `operators` or `transport`.

use boltzgain::cli::suites;
use boltzgain::cli::RunConfig;

fn main() -> boltzgain::Result<()> {
    let cfg = RunConfig::from_toml(
        r#"
        [grid]
        pointsPerAxis = 9
        [estimate]
        seed = 7
        "#,
    )?;
    let outcome = match std::env::args().nth(1).as_deref().unwrap_or("exponents") {
        "geometry" => suites::geometry_suite(&cfg)?,
        "operators" => suites::operators_suite(&cfg)?,
        "transport" => suites::transport_suite(&cfg)?,
        _ => suites::exponents_suite(&cfg)?,
    };
    for c in &outcome.checks {
        println!("{} {}: {:.3e} (tolerance {:.1e})", if c.passed { "ok  " } else { "FAIL" }, c.name, c.value, c.tolerance);
    }
    for a in &outcome.artifacts {
        println!("artifact {} ({} bytes)", a.name, a.contents.len());
    }
    Ok(())
}
