//! Every example must run to completion.

#[path = "../examples/assignment.rs"]
mod assignment;
#[path = "../examples/bench.rs"]
mod bench;
#[path = "../examples/classify_lighting.rs"]
mod classify_lighting;
#[path = "../examples/detect_synthetic.rs"]
mod detect_synthetic;
#[path = "../examples/evaluate_dataset.rs"]
mod evaluate_dataset;
#[path = "../examples/overlay.rs"]
mod overlay;
#[path = "../examples/pmap_backend.rs"]
mod pmap_backend;
#[path = "../examples/preprocess.rs"]
mod preprocess;
#[path = "../examples/synth_dataset.rs"]
mod synth_dataset;

#[test]
fn assignment_example_runs() {
    assignment::main().expect("assignment example should run");
}

#[test]
fn bench_example_runs() {
    bench::main().expect("bench example should run");
}

#[test]
fn classify_lighting_example_runs() {
    classify_lighting::main().expect("classify_lighting example should run");
}

#[test]
fn detect_synthetic_example_runs() {
    detect_synthetic::main().expect("detect_synthetic example should run");
}

#[test]
fn evaluate_dataset_example_runs() {
    evaluate_dataset::main().expect("evaluate_dataset example should run");
}

#[test]
fn overlay_example_runs() {
    overlay::main().expect("overlay example should run");
}

#[test]
fn pmap_backend_example_runs() {
    pmap_backend::main().expect("pmap_backend example should run");
}

#[test]
fn preprocess_example_runs() {
    preprocess::main().expect("preprocess example should run");
}

#[test]
fn synth_dataset_example_runs() {
    synth_dataset::main().expect("synth_dataset example should run");
}
