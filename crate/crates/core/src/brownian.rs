//! Monte Carlo first-hitting probabilities for a point source and a
//! perfectly absorbing receiver.
//!
//! Each particle draws from its own ChaCha stream keyed by `(seed, index)`,
//! so estimates do not depend on how particles are split across threads.
//! Absorption is checked at the end of each step only, which biases
//! `p_hat` low by an amount that shrinks with the time step.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Result};
use crate::par;

const CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dimensions {
    #[serde(rename = "1D")]
    OneD,
    #[serde(rename = "3D")]
    ThreeD,
}

/// In 1-D the receiver is the interval `[-r, r]`; in 3-D a sphere of
/// radius `r`. The source sits at `distance` from the receiver centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryParams {
    /// Meters.
    pub distance: f64,
    /// Meters.
    pub receiver_radius: f64,
    pub dimensions: Dimensions,
}

impl GeometryParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.receiver_radius > 0.0 && self.distance > self.receiver_radius && self.distance.is_finite()) {
            return Err(domain(format!(
                "geometry needs distance > receiver_radius > 0, got d = {}, r = {}",
                self.distance, self.receiver_radius
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub particle_count: u64,
    /// Seconds.
    pub time_step: f64,
    /// Seconds. Zero is allowed and yields no hits.
    pub horizon: f64,
    pub seed: u64,
}

impl McConfig {
    /// Time step of `ts / 1000` with the horizon set to `ts`.
    pub fn for_symbol(ts: f64, particle_count: u64, seed: u64) -> Self {
        Self {
            particle_count,
            time_step: ts / 1000.0,
            horizon: ts,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.particle_count == 0 {
            return Err(config("particle_count must be at least 1"));
        }
        if !(self.time_step > 0.0 && self.time_step.is_finite()) {
            return Err(config(format!("time_step must be positive, got {}", self.time_step)));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(config(format!("horizon must be non-negative, got {}", self.horizon)));
        }
        if self.horizon > 0.0 && self.time_step > self.horizon {
            return Err(config(format!(
                "time_step {} exceeds horizon {}",
                self.time_step, self.horizon
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HitEstimate {
    pub p_hat: f64,
    pub std_err: f64,
    pub hits: u64,
    pub trials: u64,
}

impl HitEstimate {
    pub fn from_counts(hits: u64, trials: u64) -> Self {
        let p = if trials == 0 { 0.0 } else { hits as f64 / trials as f64 };
        let se = if trials == 0 { 0.0 } else { (p * (1.0 - p) / trials as f64).sqrt() };
        Self {
            p_hat: p,
            std_err: se,
            hits,
            trials,
        }
    }
}

/// Step lengths from 0 to the last checkpoint, split so every checkpoint
/// falls on a step boundary. Returns the step lengths and, per checkpoint,
/// the number of steps completed when it is reached.
fn schedule(dt: f64, checkpoints: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut steps = Vec::new();
    let mut marks = Vec::with_capacity(checkpoints.len());
    let mut t = 0.0;
    for &cp in checkpoints {
        let span = cp - t;
        if span > 0.0 {
            let k = (span / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            let h = span / k as f64;
            steps.extend(std::iter::repeat_n(h, k));
            t = cp;
        }
        marks.push(steps.len());
    }
    (steps, marks)
}

struct Walker {
    rng: ChaCha8Rng,
    pos: [f64; 3],
    dims: usize,
}

impl Walker {
    fn new(seed: u64, index: usize, geom: &GeometryParams) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        Self {
            rng,
            pos: [geom.distance, 0.0, 0.0],
            dims: match geom.dimensions {
                Dimensions::OneD => 1,
                Dimensions::ThreeD => 3,
            },
        }
    }

    /// Advances one step and returns the distance to the receiver centre.
    fn step(&mut self, sd: f64) -> f64 {
        let mut r2 = 0.0;
        for k in 0..self.dims {
            let z: f64 = StandardNormal.sample(&mut self.rng);
            self.pos[k] += sd * z;
            r2 += self.pos[k] * self.pos[k];
        }
        r2.sqrt()
    }
}

/// Number of steps before absorption, or `None` if the particle survives
/// the whole schedule.
fn absorption_step(index: usize, geom: &GeometryParams, d: f64, seed: u64, steps: &[f64]) -> Option<usize> {
    let mut w = Walker::new(seed, index, geom);
    for (i, h) in steps.iter().enumerate() {
        if w.step((2.0 * d * h).sqrt()) <= geom.receiver_radius {
            return Some(i + 1);
        }
    }
    None
}

fn check_inputs(geom: &GeometryParams, d: f64, cfg: &McConfig) -> Result<()> {
    geom.validate()?;
    if !(d > 0.0 && d.is_finite()) {
        return Err(domain(format!("diffusion coefficient must be positive, got {d}")));
    }
    cfg.validate()
}

/// Fraction of particles absorbed within `cfg.horizon`.
pub fn estimate_hit_probability(geom: &GeometryParams, diffusion: f64, cfg: &McConfig) -> Result<HitEstimate> {
    check_inputs(geom, diffusion, cfg)?;
    let (steps, _) = schedule(cfg.time_step, &[cfg.horizon]);
    let n = cfg.particle_count as usize;
    let hits = par::sum_range(n, CHUNK, |i| {
        absorption_step(i, geom, diffusion, cfg.seed, &steps).is_some() as u64
    });
    Ok(HitEstimate::from_counts(hits, cfg.particle_count))
}

/// Hit probabilities within `ts` and `2 ts` from the same trajectories.
/// `cfg.horizon` is ignored.
pub fn hit_probability_pair(
    geom: &GeometryParams,
    diffusion: f64,
    ts: f64,
    cfg: &McConfig,
) -> Result<(HitEstimate, HitEstimate)> {
    let cfg = McConfig {
        horizon: 2.0 * ts,
        ..*cfg
    };
    check_inputs(geom, diffusion, &cfg)?;
    let (steps, marks) = schedule(cfg.time_step, &[ts, 2.0 * ts]);
    let n = cfg.particle_count as usize;
    // one count per particle: 2 if absorbed by ts, 1 if by 2 ts
    let first = marks[0];
    let pairs = par::map_range(n.div_ceil(CHUNK), |c| {
        let (mut h1, mut h2) = (0u64, 0u64);
        for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
            if let Some(k) = absorption_step(i, geom, diffusion, cfg.seed, &steps) {
                h2 += 1;
                h1 += (k <= first) as u64;
            }
        }
        (h1, h2)
    });
    let (h1, h2) = pairs.into_iter().fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok((
        HitEstimate::from_counts(h1, cfg.particle_count),
        HitEstimate::from_counts(h2, cfg.particle_count),
    ))
}

/// Smallest end-of-step distance to the receiver centre reached by each
/// checkpoint, per particle. A particle is absorbed by checkpoint `j` for
/// any radius `r` with `min[j] <= r`.
fn minimum_distances(
    distance: f64,
    dimensions: Dimensions,
    diffusion: f64,
    time_step: f64,
    checkpoints: &[f64],
    count: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    let geom = GeometryParams {
        distance,
        receiver_radius: 0.0,
        dimensions,
    };
    let (steps, marks) = schedule(time_step, checkpoints);
    let per_particle = par::map_range(count, |i| {
        let mut w = Walker::new(seed, i, &geom);
        let mut best = distance;
        let mut out = Vec::with_capacity(marks.len());
        let mut next = 0;
        for (s, h) in steps.iter().enumerate() {
            while next < marks.len() && marks[next] == s {
                out.push(best);
                next += 1;
            }
            best = best.min(w.step((2.0 * diffusion * h).sqrt()));
        }
        while out.len() < marks.len() {
            out.push(best);
        }
        out
    });
    (0..checkpoints.len())
        .map(|j| per_particle.iter().map(|v| v[j]).collect())
        .collect()
}

/// Link whose receiver radius is unknown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTarget {
    /// Meters.
    pub distance: f64,
    /// m²/s.
    pub diffusion: f64,
    /// Seconds.
    pub ts: f64,
    pub dimensions: Dimensions,
    /// Hit probability within `ts` the radius is fitted to.
    pub target_p1: f64,
    /// Reference for the held-out hit probability within `2 ts`.
    pub reference_p2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub target: CalibrationTarget,
    pub config: McConfig,
    /// Fitted radius in meters, frozen for the held-out run.
    pub receiver_radius: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Estimate on the calibration sample.
    pub fitted_p1: HitEstimate,
    /// Fresh trajectories at the frozen radius.
    pub held_out_p1: HitEstimate,
    pub held_out_p2: HitEstimate,
    /// `|p2 / reference_p2 - 1|`, when a reference is given.
    pub p2_relative_error: Option<f64>,
}

/// Fits the receiver radius by bisection so the hit probability within
/// `ts` matches `target_p1`, then re-estimates both probabilities at the
/// frozen radius on trajectories seeded with `cfg.seed + 1`.
///
/// `cfg.horizon` is ignored. A report is returned even when the fit does
/// not converge.
pub fn calibrate_receiver_radius(target: &CalibrationTarget, cfg: &McConfig) -> Result<CalibrationReport> {
    if !(target.target_p1 > 0.0 && target.target_p1 < 1.0) {
        return Err(domain(format!("target p1 must be in (0, 1), got {}", target.target_p1)));
    }
    if !(target.ts > 0.0) {
        return Err(domain(format!("symbol duration must be positive, got {}", target.ts)));
    }
    let probe = GeometryParams {
        distance: target.distance,
        receiver_radius: 0.5 * target.distance,
        dimensions: target.dimensions,
    };
    check_inputs(&probe, target.diffusion, &McConfig { horizon: target.ts, ..*cfg })?;

    let n = cfg.particle_count as usize;
    let mins = minimum_distances(
        target.distance,
        target.dimensions,
        target.diffusion,
        cfg.time_step,
        &[target.ts],
        n,
        cfg.seed,
    );
    let p1_at = |r: f64| mins[0].iter().filter(|m| **m <= r).count() as f64 / n as f64;

    let (mut lo, mut hi) = (0.0, target.distance);
    let mut iterations = 0;
    while iterations < 200 && hi - lo > target.distance * 1e-12 {
        let mid = 0.5 * (lo + hi);
        if p1_at(mid) < target.target_p1 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let radius = hi.min(target.distance * (1.0 - 1e-12));
    let hits = mins[0].iter().filter(|m| **m <= radius).count() as u64;
    let fitted = HitEstimate::from_counts(hits, cfg.particle_count);
    let converged = (fitted.p_hat - target.target_p1).abs() <= (3.0 * fitted.std_err).max(1.0 / n as f64);

    let geom = GeometryParams {
        receiver_radius: radius,
        ..probe
    };
    let fresh = McConfig {
        seed: cfg.seed.wrapping_add(1),
        ..*cfg
    };
    let (p1, p2) = hit_probability_pair(&geom, target.diffusion, target.ts, &fresh)?;
    Ok(CalibrationReport {
        target: *target,
        config: *cfg,
        receiver_radius: radius,
        iterations,
        converged,
        fitted_p1: fitted,
        held_out_p1: p1,
        held_out_p2: p2,
        p2_relative_error: target.reference_p2.map(|r| (p2.p_hat / r - 1.0).abs()),
    })
}

/// Rescales a reference hit probability to another messenger assuming
/// proportionality to the diffusion coefficient, clamped to `[0, 1]`.
pub fn rescale_hit_probability(p_ref: f64, d_ref: f64, d_new: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_ref) {
        return Err(domain(format!("reference probability {p_ref} outside [0, 1]")));
    }
    if !(d_ref > 0.0 && d_new >= 0.0) {
        return Err(domain("diffusion coefficients must be positive"));
    }
    Ok((p_ref * d_new / d_ref).min(1.0))
}

/// JSON record of one estimate with its inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitRecord {
    pub geometry: GeometryParams,
    pub diffusion: f64,
    pub config: McConfig,
    pub estimate: HitEstimate,
}
