fn main() {
    let config = quon_core::suite::SuiteConfig {
        dims: vec![2, 3, 4, 5, 6, 7],
        ..Default::default()
    };
    let t0 = std::time::Instant::now();
    let report = quon_core::suite::run_all(&config);
    for r in &report.records {
        if !r.passed() {
            println!("FAIL {} err={}", r.name, r.max_error);
        }
    }
    println!("records {}, pass {}, elapsed {:?}", report.records.len(), report.pass, t0.elapsed());
}
