#![allow(dead_code)]

use housealloc::gen::rng;
use housealloc::{Allocation, Instance};
use rand::seq::SliceRandom;
use rand::Rng;
use std::path::PathBuf;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Random partial weak rankings on a sparse graph (every vertex degree at
/// most `d`), with a random starting allocation that may use unlisted houses.
pub fn sparse_instance(seed: u64, max_n: usize, max_m: usize, d: usize) -> (Instance, Allocation) {
    let mut r = rng(seed);
    let n = r.gen_range(2..=max_n);
    let m = r.gen_range(n..=max_m);
    let mut house_deg = vec![0usize; m];
    let mut rankings = Vec::with_capacity(n);
    for _ in 0..n {
        let open: Vec<usize> = (0..m).filter(|&h| house_deg[h] < d).collect();
        let want = r.gen_range(1..=d.min(3)).min(open.len());
        let mut listed: Vec<usize> = open.choose_multiple(&mut r, want).copied().collect();
        listed.shuffle(&mut r);
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for h in listed {
            house_deg[h] += 1;
            match groups.last_mut() {
                Some(g) if r.gen_bool(0.25) => g.push(h),
                _ => groups.push(vec![h]),
            }
        }
        rankings.push(groups);
    }
    let inst = Instance::ordinal(rankings, m).unwrap();
    let mut houses: Vec<usize> = (0..m).collect();
    houses.shuffle(&mut r);
    houses.truncate(n);
    let base = Allocation::for_instance(houses, &inst).unwrap();
    (inst, base)
}

/// Least-squares slope of `log y` on `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}
