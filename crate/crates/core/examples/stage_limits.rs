//! Per-block stage values approaching the closed-form limits.

use meandim::maps1d::Schedule;
use meandim::rational::{int, rat};
use meandim::symbolic::{closed_form_limit, stage_sequence, LimitMode};

fn main() -> meandim::Result<()> {
    let families = [
        Schedule::power_law(1, int(1), 1)?,
        Schedule::power_law(2, rat(1, 2), 1)?,
        Schedule::odd_legs(1, 1)?,
        Schedule::quadratic(1, 1000)?,
    ];
    for sch in &families {
        let seq = stage_sequence(sch, 1000)?;
        let limit = closed_form_limit(sch, LimitMode::Limsup)?;
        let picks: Vec<String> = [1usize, 10, 100, 999]
            .iter()
            .filter_map(|&i| seq.get(i).map(|v| format!("{v:.4}")))
            .collect();
        println!("{:<32} {}  -> {limit:.4}", sch.describe(), picks.join(" "));
    }
    Ok(())
}
