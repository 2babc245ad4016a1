//! Test-only oracles. Nothing here calls the closed-form probability code:
//! channel samplers draw the received counts directly and apply the
//! receiver's decision rule to each draw.

#![allow(dead_code)]

use isolink::arrivals::ChannelParams;
use isolink::modulation::{build_matrix, LinkSpec, Scheme, Thresholds};
use isolink::rate::mutual_information;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

pub const SEED: u64 = 0x5EED;

/// Count matrix from `draws` uses of a channel, indexed `[x][y]`.
#[derive(Debug, Clone)]
pub struct Tally {
    pub order: usize,
    pub counts: Vec<u64>,
    pub draws: u64,
}

impl Tally {
    pub fn frequency(&self, x: usize, y: usize) -> f64 {
        self.counts[x * self.order + y] as f64 / self.draws as f64
    }
}

fn gauss(rng: &mut ChaCha8Rng, mean: f64, var: f64) -> f64 {
    if var <= 0.0 {
        return mean;
    }
    Normal::new(mean, var.sqrt()).unwrap().sample(rng)
}

/// Molecules of one type reaching the receiver in the current slot:
/// `level_now` units released now and `level_prev` units one slot earlier.
fn arrivals(rng: &mut ChaCha8Rng, ch: &ChannelParams, level_now: f64, level_prev: f64) -> f64 {
    let (n, p1, p2) = (ch.n, ch.p1, ch.p2);
    let now = gauss(rng, level_now * n * p1, level_now * n * p1 * (1.0 - p1));
    let late = gauss(
        rng,
        level_prev * n * (p2 - p1),
        level_prev * n * (p2 * (1.0 - p2) + p1 * (1.0 - p1)),
    );
    now + late + gauss(rng, 0.0, ch.noise_std * ch.noise_std)
}

fn band(count: f64, tau: &[f64]) -> usize {
    tau.iter().filter(|t| count >= **t).count()
}

fn run<F>(order: usize, draws: u64, seed: u64, one: F) -> Tally
where
    F: Fn(&mut ChaCha8Rng, usize, usize) -> usize + Sync,
{
    const BLOCK: u64 = 1 << 14;
    let blocks = draws.div_ceil(BLOCK);
    let counts = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let mut local = vec![0u64; order * order];
            for _ in b * BLOCK..((b + 1) * BLOCK).min(draws) {
                let x = rng.random_range(0..order);
                let z = rng.random_range(0..order);
                let y = one(&mut rng, x, z);
                local[x * order + y] += 1;
            }
            local
        })
        .reduce(
            || vec![0u64; order * order],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(u, v)| *u += v);
                a
            },
        );
    Tally { order, counts, draws }
}

/// Amplitude keying: symbol `x` releases `x` units, one previous symbol of memory.
pub fn sample_icsk(order: usize, ch: &ChannelParams, tau: &[f64], draws: u64, seed: u64) -> Tally {
    run(order, draws, seed, |rng, x, z| band(arrivals(rng, ch, x as f64, z as f64), tau))
}

/// Type keying: one receptor per isomer, largest count among those at or
/// above `tau` wins, uniform guess when none is.
pub fn sample_imosk(order: usize, ch: &ChannelParams, tau: f64, draws: u64, seed: u64) -> Tally {
    run(order, draws, seed, |rng, x, z| {
        let mut best: Option<(usize, f64)> = None;
        for k in 0..order {
            let c = arrivals(rng, ch, (k == x) as u8 as f64, (k == z) as u8 as f64);
            if c >= tau && best.is_none_or(|(_, b)| c > b) {
                best = Some((k, c));
            }
        }
        match best {
            Some((k, _)) => k,
            None => rng.random_range(0..order),
        }
    })
}

/// Ratio keying: symbol `k` releases `k` units of the first type and
/// `3 - k` of the second; decision is the nearest symbol to the averaged
/// band estimate, coin flip on a half-way tie.
pub fn sample_irsk(first: &ChannelParams, second: &ChannelParams, tau: &[f64], draws: u64, seed: u64) -> Tally {
    run(4, draws, seed, |rng, x, z| {
        let b1 = band(arrivals(rng, first, x as f64, z as f64), tau);
        let b2 = band(arrivals(rng, second, (3 - x) as f64, (3 - z) as f64), tau);
        let twice = b1 + 3 - b2;
        twice / 2 + usize::from(!twice.is_multiple_of(2) && !rng.random_bool(0.5))
    })
}

/// Largest information over every strictly increasing threshold tuple on
/// the lattice `i · upper / intervals`, with the tuple attaining it
/// (lexicographically smallest on ties).
pub fn exhaustive_search(scheme: Scheme, link: &LinkSpec, upper: f64, intervals: usize) -> (f64, Vec<f64>) {
    let dims = scheme.threshold_count();
    let value = |i: usize| upper * i as f64 / intervals as f64;
    if dims > intervals + 1 {
        return (f64::NEG_INFINITY, vec![]);
    }
    let mut tuples: Vec<Vec<usize>> = Vec::new();
    let mut idx: Vec<usize> = (0..dims).collect();
    loop {
        tuples.push(idx.clone());
        if !next_combination(&mut idx, intervals) {
            break;
        }
    }
    let scored: Vec<(f64, usize)> = tuples
        .par_iter()
        .enumerate()
        .map(|(i, t)| {
            let tau = Thresholds::new(t.iter().map(|&j| value(j)).collect()).unwrap();
            let m = build_matrix(scheme, link, &tau).unwrap();
            (mutual_information(&m).unwrap(), i)
        })
        .collect();
    // tuples are generated in lexicographic order, so the first maximum wins
    let mut best = (f64::NEG_INFINITY, 0);
    for s in scored {
        if s.0 > best.0 {
            best = s;
        }
    }
    (best.0, tuples[best.1].iter().map(|&j| value(j)).collect())
}

fn next_combination(idx: &mut [usize], max: usize) -> bool {
    let dims = idx.len();
    for k in (0..dims).rev() {
        if idx[k] < max - (dims - 1 - k) {
            idx[k] += 1;
            for j in k + 1..dims {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
