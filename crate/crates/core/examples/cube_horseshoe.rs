//! Nested cube horseshoes: cylinder boxes and the stage table toward m/(1+r).

use meandim::cubes::{
    cube_cylinder_cover, cube_limit, cube_stage_dimension, make_nested_cube_map, CubeRule,
};
use meandim::estimators::cover_critical_exponent;
use meandim::rational::{format_rational, int, rat, to_f64};

fn main() -> meandim::Result<()> {
    let rule = CubeRule::PowerLaw { r: int(1) };
    let map = make_nested_cube_map(2, rule.clone(), rat(1, 2), 3)?;
    for p in &map.blocks {
        println!(
            "E_{}: side {}, {} legs, {} slabs",
            p.k,
            format_rational(&p.block.side()),
            p.block.leg_count(),
            p.block.slab_count()
        );
    }
    let first = &map.block(1)?.block;
    for n in 1..=2 {
        let cover = cube_cylinder_cover(first, n, 1_000_000)?;
        println!(
            "n = {n}: {} boxes, exponent {:.6}, closed form {:.6}",
            cover.len(),
            cover_critical_exponent(&cover),
            cube_stage_dimension(&rule, &map.b, 2, 1, n)?
        );
    }
    for k in [1, 5, 10, 50] {
        println!(
            "k = {k}: {:.4}",
            cube_stage_dimension(&rule, &int(1), 2, k, 1)?
        );
    }
    println!("limit {}", to_f64(&cube_limit(&rule, 2)));
    Ok(())
}
