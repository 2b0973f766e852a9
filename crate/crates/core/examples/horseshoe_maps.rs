//! Builds φ_{1,1} with four blocks and checks the full-leg property.

use meandim::maps1d::{make_schedule_map, Schedule};
use meandim::rational::{format_rational, int};

fn main() -> meandim::Result<()> {
    let schedule = Schedule::power_law(1, int(1), 4)?;
    let map = make_schedule_map(&schedule, 1_000_000)?;
    println!("{map}");
    for b in schedule.blocks()? {
        let ends = b.leg_endpoints()?;
        let images: Vec<String> = ends
            .iter()
            .map(|e| format_rational(&map.eval(e).unwrap()))
            .collect();
        println!(
            "I_{} = [{}, {}], {} legs, leg endpoints map to {} … {}",
            b.index,
            format_rational(&b.left),
            format_rational(&b.right),
            b.legs,
            images[0],
            images[images.len() - 1],
        );
    }
    let square = map.compose_power(2, 1_000_000)?;
    println!("φ² has {} affine pieces", square.piece_count());
    Ok(())
}
