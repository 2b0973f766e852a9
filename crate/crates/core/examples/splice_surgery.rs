//! Splices horseshoes of prescribed dimension into the identity and runs the
//! strong-horseshoe detector.

use meandim::maps1d::{make_tent_g, PAMap};
use meandim::rational::{format_rational, int, rat};
use meandim::surgery::{is_strong_horseshoe, make_strong_horseshoe_map, splice};

fn main() -> meandim::Result<()> {
    let id = PAMap::identity(int(0), int(1))?;
    let (p, eps) = (rat(1, 2), rat(1, 10));
    for a in [rat(1, 4), rat(1, 2), int(1)] {
        let sp = splice(&id, &p, &a, &eps, 5)?;
        println!("{}", sp.certificate_json(&p, &a, &eps)?);
    }

    let (j0, j1) = (rat(1, 4), rat(3, 4));
    let (map, legs) = make_strong_horseshoe_map((&j0, &j1), 3, (&int(0), &int(1)))?;
    match is_strong_horseshoe(&map, (&j0, &j1), &legs, &rat(1, 4), 3)? {
        Ok(cert) => println!("certified, margin {}", format_rational(&cert.margin)),
        Err(r) => println!("{r}"),
    }
    let thirds = vec![
        (int(0), rat(1, 3)),
        (rat(1, 3), rat(2, 3)),
        (rat(2, 3), int(1)),
    ];
    match is_strong_horseshoe(&make_tent_g(), (&int(0), &int(1)), &thirds, &rat(1, 10), 3)? {
        Ok(_) => println!("tent certified"),
        Err(r) => println!("tent: {r}"),
    }
    Ok(())
}
