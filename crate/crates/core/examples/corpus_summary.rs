//! Prints one summary line per corpus system.
//!
//! cargo run --release -p tessella-core --example corpus_summary [name ...]

use std::time::Instant;

use tessella_core::corpus;
use tessella_core::report::{analyze, AnalysisOptions};

fn main() {
    let mut names: Vec<String> = std::env::args().skip(1).collect();
    if names.is_empty() {
        names = corpus::names().map(str::to_string).collect();
    }
    for name in names {
        let spec = corpus::load(&name).expect("corpus system parses");
        let mut options = AnalysisOptions::default();
        if spec.dimension > 1 {
            options.radius = 60.0;
            options.xi_radius = 10.0;
        }
        let start = Instant::now();
        let (report, _) = analyze(&spec, &options).expect("corpus system is valid");
        let overlap = report.overlap.as_ref();
        let witness = report
            .algebraic_witness
            .as_ref()
            .and_then(|w| w.witness.as_ref());
        println!(
            "{name:16} {:?} classes={} r={:.4} stable={} witness={} errors={} {:.2}s",
            report.decision,
            overlap.map_or(0, |o| o.classes),
            overlap.map_or(f64::NAN, |o| o.decay.r),
            overlap.is_some_and(|o| o.stable),
            witness.map_or("none".to_string(), |w| format!(
                "{}@M={}",
                w.colour, w.exponent
            )),
            report.errors.len(),
            start.elapsed().as_secs_f64(),
        );
    }
}
