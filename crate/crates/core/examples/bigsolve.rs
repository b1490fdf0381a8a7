use kurihara_core::msym::residue::{
    find_rational_newforms, hasse_window, NewformSearch, ResidueSpace,
};
use kurihara_core::msym::space::ManinSpace;
use std::sync::Arc;
use std::time::Instant;

fn main() {
    let level: i64 = std::env::args().nth(1).unwrap().parse().unwrap();
    let a3: i64 = std::env::args().nth(2).map(|s| s.parse().unwrap()).unwrap_or(0);
    let t0 = Instant::now();
    let space = Arc::new(ManinSpace::build_with_pivot_constraint(level, 2, Some(3)).unwrap());
    eprintln!("space built: ncols {} dim {} ({:?})", space.ncols, space.tri.dim(), t0.elapsed());
    let rs = ResidueSpace::build(space.clone(), 3, 19, 1).unwrap();
    eprintln!(
        "residue space: free {} survivors {} ({:?})",
        rs.free_dim(),
        rs.survivor_dim(),
        t0.elapsed()
    );
    let search = match level {
        15675 => NewformSearch {
            // 15675 = 3 * 5^2 * 11 * 19: nonsplit mult at 3, additive at 5
            fixed: vec![(3, -1), (5, 0)],
            split: vec![
                (2, hasse_window(2)),
                (11, vec![-1, 0, 1]),
                (19, vec![-1, 0, 1]),
                (7, hasse_window(7)),
                (13, hasse_window(13)),
                (17, hasse_window(17)),
                (23, hasse_window(23)),
            ],
        },
        20787 => NewformSearch {
            // 20787 = 3 * 13^2 * 41; run once per a_3 sign (second argv)
            fixed: vec![(13, 0), (3, a3)],
            split: vec![
                (2, hasse_window(2)),
                (41, vec![-1, 0, 1]),
                (7, hasse_window(7)),
                (5, hasse_window(5)),
                (17, hasse_window(17)),
                (23, hasse_window(23)),
            ],
        },
        _ => panic!("unknown level"),
    };
    let forms = find_rational_newforms(&rs, &search, &[17, 23]).unwrap();
    eprintln!("candidates: {} ({:?})", forms.len(), t0.elapsed());
    for f in &forms {
        eprintln!("  w={} cert={} eigen={:?}", f.w, f.cert, f.eigen);
    }
}
