//! Cylinder covers against brute-force covers on a 3-leg block.

use meandim::estimators::{critical_exponent, min_hausdorff_sum, BowenContext, CoverStrategy};
use meandim::maps1d::{make_schedule_map, Schedule};
use meandim::rational::rat;

fn main() -> meandim::Result<()> {
    let schedule = Schedule::explicit(vec![(rat(1, 3), 3)])?;
    let map = make_schedule_map(&schedule, 1_000_000)?;
    let block = schedule.block(1)?;
    let eps = block.leg_width();
    println!("block [0, 1/3], ε = 1/9");
    println!(
        "{:>2} {:>6} {:>12} {:>12} {:>10}",
        "n", "s", "cylinder", "brute", "exponent"
    );
    for n in 1..=3 {
        let ctx = BowenContext::new(&map, n + 1)?;
        for s in [0.5, 1.0, 1.5] {
            let cyl = min_hausdorff_sum(
                &ctx,
                &eps,
                s,
                &block.left,
                &block.right,
                CoverStrategy::Cylinder,
                1_000_000,
            )?;
            let brute = min_hausdorff_sum(
                &ctx,
                &eps,
                s,
                &block.left,
                &block.right,
                CoverStrategy::Brute { refine: 3 },
                1_000_000,
            )?;
            let dim = critical_exponent(
                &ctx,
                &eps,
                &block.left,
                &block.right,
                CoverStrategy::Cylinder,
                1_000_000,
            )?;
            println!("{n:>2} {s:>6.1} {cyl:>12.6} {brute:>12.6} {dim:>10.6}");
        }
    }
    Ok(())
}
