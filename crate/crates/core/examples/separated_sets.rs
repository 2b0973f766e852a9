//! Separated sets and the finite-stage metric mean dimension of the tent.

use meandim::estimators::{max_separated, mdim_m_estimate, BowenContext};
use meandim::maps1d::make_tent_g;
use meandim::rational::{int, rat};

fn main() -> meandim::Result<()> {
    let g = make_tent_g();
    let eps = rat(1, 4);
    for n in 1..=4 {
        let ctx = BowenContext::new(&g, n)?;
        let sep = max_separated(&ctx, &eps, &int(0), &int(1), 1_000_000)?;
        println!("n = {n}: {} points ({})", sep.count(), sep.flag());
    }
    let est = mdim_m_estimate(&g, &[rat(1, 4), rat(1, 10)], 3, 1_000_000)?;
    print!("{}", est.to_csv());
    println!("lower {:.4}, upper {:.4}", est.lower, est.upper);
    Ok(())
}
