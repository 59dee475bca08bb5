//! Monte-Carlo model of requests against a uniform-reference LRU cache,
//! written without any of the toolchain's code.

use std::collections::VecDeque;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Requests of `draws` uniform ids from `1..=db` against an LRU of
/// `capacity`; a request costs `search + db_time * misses`.
#[derive(Debug, Clone, Copy)]
pub struct RequestModel {
    pub capacity: usize,
    pub db: i64,
    pub draws: usize,
    pub search: f64,
    pub db_time: f64,
}

/// Mean per-request response time over `rounds` requests, averaged over
/// `runs` cold-start runs.
pub fn mean_response(m: RequestModel, rounds: usize, runs: usize, seed: u64) -> f64 {
    let RequestModel {
        capacity,
        db,
        draws,
        search,
        db_time,
    } = m;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut total = 0.0;
    for _ in 0..runs {
        let mut cache: VecDeque<i64> = VecDeque::with_capacity(capacity + 1);
        for _ in 0..rounds {
            let mut misses = 0;
            for _ in 0..draws {
                let id = rng.gen_range(1..=db);
                match cache.iter().position(|&c| c == id) {
                    Some(p) => {
                        cache.remove(p);
                    }
                    None => {
                        misses += 1;
                        if cache.len() == capacity {
                            cache.pop_front();
                        }
                    }
                }
                cache.push_back(id);
            }
            total += search + db_time * misses as f64;
        }
    }
    total / (rounds * runs) as f64
}

/// Steady-state hit rate of `lookups` uniform ids against the LRU.
pub fn hit_rate(capacity: usize, db: i64, lookups: usize, seed: u64) -> f64 {
    let m = RequestModel {
        capacity,
        db,
        draws: 1,
        search: 0.0,
        db_time: 1.0,
    };
    let per = mean_response(m, lookups, 1, seed);
    1.0 - per
}
