//! Distance-gated matching of detections to ground truth boxes, and the
//! assignment solver underneath it.

use anyhow::Result;
use kiwi_calyx::annotation::{Detection, GroundTruthBox, Occluder};
use kiwi_calyx::eval::{cost_matrix, hungarian_assign, match_detections, metrics, EvalConfig};

pub fn main() -> Result<()> {
    let truth = vec![
        GroundTruthBox::new(90, 90, 110, 110, Occluder::None)?,
        GroundTruthBox::new(108, 90, 128, 110, Occluder::Leaf)?,
        GroundTruthBox::new(300, 300, 320, 320, Occluder::None)?,
    ];
    let dets = vec![
        Detection::new(101.0, 100.0, 10.0, 0.95)?,
        Detection::new(85.0, 100.0, 10.0, 0.80)?,
        Detection::new(500.0, 40.0, 10.0, 0.60)?,
    ];
    let cfg = EvalConfig::default();
    let costs = cost_matrix(&dets, &truth, &cfg);
    for r in 0..costs.rows() {
        let row: Vec<String> = (0..costs.cols()).map(|c| format!("{:>9.1}", costs.get(r, c))).collect();
        println!("det {r}: {}", row.join(" "));
    }
    let a = hungarian_assign(&costs);
    println!("assignment {:?}, total cost {:.1}", a.row_to_col, a.total);
    let report = match_detections(&dets, &truth, &cfg);
    for p in &report.pairs {
        println!("det {} -> truth {} at {:.1} px", p.detection, p.truth, p.distance);
    }
    let m = metrics(&report);
    println!("TP {} FP {} FN {}, F1 {:.3}", report.tp, report.fp, report.fn_, m.f1);
    Ok(())
}
