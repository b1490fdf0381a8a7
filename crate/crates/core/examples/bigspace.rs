use kurihara_core::msym::space::ManinSpace;
use std::time::Instant;

fn main() {
    let level: i64 = std::env::args().nth(1).unwrap().parse().unwrap();
    let t0 = Instant::now();
    let s = ManinSpace::build_with_pivot_constraint(level, 2, Some(3)).unwrap();
    let nnz: usize = s.tri.rules.iter().flatten().map(|r| r.nnz()).sum();
    let maxb: u64 = s
        .tri
        .rules
        .iter()
        .flatten()
        .flat_map(|r| r.entries.iter().map(|(_, c)| {
            use num_traits::Signed;
            c.numer().abs().bits().max(c.denom().bits())
        }))
        .max()
        .unwrap_or(0);
    println!(
        "level {} ncols {} dim {} rules_nnz {} max_bits {} build {:?}",
        level,
        s.ncols,
        s.tri.dim(),
        nnz,
        maxb,
        t0.elapsed()
    );
}
