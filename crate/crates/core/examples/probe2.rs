use udsdm_core::fuzzy::*;

fn main() {
    let base = RuleBase::standard();
    let sets = TermSets::standard();
    let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
    let mut worst_dip = 0.0f64;
    let mut worst_end = 0.0f64;
    let mut at = ([0.0; 3], 0.0, 0.0);
    for &a in &grid {
        for &b in &grid {
            let mut prev = -1.0f64;
            let mut run_max = -1.0f64;
            let mut last = 0.0;
            for &c in &grid {
                let dod = infer_dod(&base, &sets, [a, b, c]).unwrap();
                if prev - dod > worst_dip {
                    worst_dip = prev - dod;
                    at = ([a, b, c], prev, dod);
                }
                run_max = run_max.max(dod);
                prev = dod;
                last = dod;
            }
            worst_end = worst_end.max(run_max - last);
        }
    }
    println!("worst dip {worst_dip:.5} at {:?} ({:.4} -> {:.4})", at.0, at.1, at.2);
    println!("worst endpoint deficit {worst_end:.5}");
}
