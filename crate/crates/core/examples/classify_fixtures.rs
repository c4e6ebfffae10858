//! Classify the bundled fixture systems and print the branch and certificates.
//!
//! ```text
//! cargo run --example classify_fixtures
//! ```

use std::path::Path;

use dichotomy::report::{classify, ClassifyOptions, SystemFile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    for name in ["f1", "f2", "fig1_osc", "fig1_overlap"] {
        let text = std::fs::read_to_string(dir.join(format!("{name}.json")))?;
        let sys = serde_json::from_str::<SystemFile>(&text)?.into_system()?;
        let report = classify(&sys, &ClassifyOptions::default())?;
        let kinds: Vec<&str> = report.certificates.iter().map(|c| c.kind()).collect();
        println!(
            "{name:>13}: branch {:<8} status {:<12} certificates {kinds:?}",
            report.branch.map_or("-", |b| b.as_str()),
            report.status.as_str(),
        );
    }
    Ok(())
}
