//! Seeded instance generators.
//!
//! All randomness comes from ChaCha8 (`rand_chacha` 0.3) seeded with
//! `seed_from_u64(seed)`; a generator that needs independent sub-streams
//! selects them with `set_stream`, so seeds port to any ChaCha8
//! implementation with the same seeding.

use crate::error::{Error, Result};
use crate::model::{House, Instance};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream `stream` of `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = rng(seed);
    r.set_stream(stream);
    r
}

fn check_dims(n: usize, m: usize) -> Result<()> {
    if n == 0 || n > m {
        return Err(Error::Validation(format!(
            "need 1 <= n <= m, got n={n} m={m}"
        )));
    }
    Ok(())
}

/// Values drawn independently and uniformly from `0..=10`.
pub fn gen_uniform_cardinal(n: usize, m: usize, seed: u64) -> Result<Instance> {
    check_dims(n, m)?;
    let mut r = rng(seed);
    let values = (0..n)
        .map(|_| (0..m).map(|_| r.gen_range(0..=10)).collect())
        .collect();
    Instance::cardinal(values)
}

/// Houses ordered outward from axis position `p`, left and right sides
/// interleaved at random.
fn outward<R: Rng>(r: &mut R, p: usize, m: usize) -> Vec<House> {
    let mut left = (0..p).rev().peekable();
    let mut right = (p + 1..m).peekable();
    let mut out = Vec::with_capacity(m.saturating_sub(1));
    loop {
        let pick_left = match (left.peek(), right.peek()) {
            (None, None) => break,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            _ => r.gen_bool(0.5),
        };
        out.push(if pick_left { left.next() } else { right.next() }.unwrap());
    }
    out
}

/// Strictly single-peaked cardinal values on the identity axis. The peak
/// is worth `3m + U[0,10]` and each later house in outward order loses a
/// step drawn from `{1,2,3}`, so values stay positive and distinct.
pub fn gen_single_peaked(n: usize, m: usize, seed: u64) -> Result<Instance> {
    check_dims(n, m)?;
    let mut r = rng(seed);
    let values = (0..n)
        .map(|_| {
            let p = r.gen_range(0..m);
            let mut row = vec![0u32; m];
            let mut v = 3 * m as u32 + r.gen_range(0..=10);
            row[p] = v;
            for h in outward(&mut r, p, m) {
                v -= r.gen_range(1..=3);
                row[h] = v;
            }
            row
        })
        .collect();
    Instance::cardinal(values)?.with_axis((0..m).collect())
}

/// Strictly single-dipped cardinal values on the identity axis: the dip is
/// worth `U[0,10]` and values grow by steps from `{1,2,3}` outward.
pub fn gen_single_dipped(n: usize, m: usize, seed: u64) -> Result<Instance> {
    check_dims(n, m)?;
    let mut r = rng(seed);
    let values = (0..n)
        .map(|_| {
            let p = r.gen_range(0..m);
            let mut row = vec![0u32; m];
            let mut v = r.gen_range(0..=10);
            row[p] = v;
            for h in outward(&mut r, p, m) {
                v += r.gen_range(1..=3);
                row[h] = v;
            }
            row
        })
        .collect();
    Instance::cardinal(values)?.with_axis((0..m).collect())
}

/// Strict single-peaked rankings with peaks drawn from a small pool and
/// agents of one peak often copying a common outward order, so shared
/// peaks with long spans are frequent.
pub fn gen_single_peaked_clustered(n: usize, m: usize, seed: u64) -> Result<Instance> {
    check_dims(n, m)?;
    let mut r = rng(seed);
    let pool_size = r.gen_range(1..=n.div_ceil(2).max(1));
    let pool: Vec<usize> = (0..pool_size).map(|_| r.gen_range(0..m)).collect();
    let templates: Vec<Vec<House>> = pool.iter().map(|&p| outward(&mut r, p, m)).collect();
    let rankings = (0..n)
        .map(|_| {
            let t = r.gen_range(0..pool.len());
            let p = pool[t];
            // follow the template for a random prefix, then diverge
            let keep = r.gen_range(0..=m - 1);
            let mut order = vec![p];
            order.extend_from_slice(&templates[t][..keep]);
            let (mut lo, mut hi) = (p, p);
            for &h in &order[1..] {
                lo = lo.min(h);
                hi = hi.max(h);
            }
            while order.len() < m {
                let can_l = lo > 0;
                let can_r = hi + 1 < m;
                let go_left = match (can_l, can_r) {
                    (true, true) => r.gen_bool(0.5),
                    (l, _) => l,
                };
                if go_left {
                    lo -= 1;
                    order.push(lo);
                } else {
                    hi += 1;
                    order.push(hi);
                }
            }
            order.into_iter().map(|h| vec![h]).collect()
        })
        .collect();
    Instance::ordinal(rankings, m)?.with_axis((0..m).collect())
}

/// Single-dipped rankings on the identity axis. With `ties`, every agent
/// ranks a common contiguous block of houses last as one tie group;
/// otherwise dips are drawn per agent, clustered on a few positions.
pub fn gen_single_dipped_ordinal(n: usize, m: usize, ties: bool, seed: u64) -> Result<Instance> {
    check_dims(n, m)?;
    let mut r = rng(seed);
    let (lo, hi) = if ties {
        let len = r.gen_range(1..=m);
        let start = r.gen_range(0..=m - len);
        (start, start + len - 1)
    } else {
        (0, 0)
    };
    let pool: Vec<usize> = (0..r.gen_range(1..=2)).map(|_| r.gen_range(0..m)).collect();
    let rankings = (0..n)
        .map(|_| {
            let (a, b) = if ties {
                (lo, hi)
            } else {
                let p = *pool.choose(&mut r).unwrap();
                (p, p)
            };
            // build worst-to-best: grow outward from the dip block
            let mut rev: Vec<Vec<House>> = vec![(a..=b).collect()];
            let mut left = (0..a).rev().peekable();
            let mut right = (b + 1..m).peekable();
            loop {
                let pick_left = match (left.peek(), right.peek()) {
                    (None, None) => break,
                    (Some(_), None) => true,
                    (None, Some(_)) => false,
                    _ => r.gen_bool(0.5),
                };
                rev.push(vec![if pick_left { left.next() } else { right.next() }.unwrap()]);
            }
            rev.reverse();
            rev
        })
        .collect();
    Instance::ordinal(rankings, m)?.with_axis((0..m).collect())
}
