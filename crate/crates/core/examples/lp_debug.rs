use c2plus::geom::Point2;
use c2plus::index::PointIndex;
use c2plus::lp::{LpEngine, SparseRow};
use c2plus::sigma::build_rows_for_profile;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 1000usize;
    let mut pts = Vec::with_capacity(n);
    while pts.len() < n {
        pts.push(Point2::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)));
    }
    pts.sort_by(|a, b| a.lex_cmp(*b));
    pts.dedup();
    let idx = PointIndex::build(pts).unwrap();

    let mut t_rows = 0.0;
    let mut t_new = 0.0;
    let mut t_first = 0.0;
    let mut t_rest = 0.0;
    let mut nrows = 0usize;
    for id in 0..idx.len() as u32 {
        let x = idx.point(id);
        let ds = idx.k_nearest(x, 16);
        let pts_d: Vec<Point2> = ds.iter().map(|&i| idx.point(i)).collect();
        let t0 = Instant::now();
        let (rows, n_vars): (Vec<SparseRow>, usize) = build_rows_for_profile(x, &pts_d);
        let t1 = Instant::now();
        nrows = rows.len();
        let mut engine = LpEngine::new(n_vars, rows);
        let t2 = Instant::now();
        let mut c = vec![0.0; n_vars];
        c[2] = 1.0;
        let _ = engine.maximize(&c).unwrap();
        let t3 = Instant::now();
        for m in 1..16 {
            let th = std::f64::consts::PI * (m as f64) / 16.0;
            c[2] = th.cos();
            c[3] = th.sin();
            let _ = engine.maximize(&c).unwrap();
        }
        let t4 = Instant::now();
        t_rows += (t1 - t0).as_secs_f64();
        t_new += (t2 - t1).as_secs_f64();
        t_first += (t3 - t2).as_secs_f64();
        t_rest += (t4 - t3).as_secs_f64();
    }
    println!("rows {nrows}: build {t_rows:.3}s engine-new {t_new:.3}s first-solve {t_first:.3}s 15-warm {t_rest:.3}s");
}
