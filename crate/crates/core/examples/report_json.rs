//! Prints the full JSON report for one corpus system.

use tessella_core::corpus;
use tessella_core::report::{analyze, AnalysisOptions};

fn main() {
    let name = std::env::args()
        .nth(1)
        .expect("usage: report_json <corpus name> [radius xi]");
    let mut options = AnalysisOptions::default();
    if let (Some(r), Some(x)) = (std::env::args().nth(2), std::env::args().nth(3)) {
        options.radius = r.parse().expect("radius");
        options.xi_radius = x.parse().expect("xi radius");
    }
    let spec = corpus::load(&name).expect("corpus system parses");
    let (report, _) = analyze(&spec, &options).expect("corpus system is valid");
    println!("{}", report.to_json());
}
