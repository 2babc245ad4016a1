//! Mutual information of a joint matrix, achievable rate as its maximum
//! over receiver thresholds, and SNR sweeps.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::arrivals::ChannelParams;
use crate::energy::{molecules_for_snr, snr_db};
use crate::error::{config, Error, Result};
use crate::modulation::{DetectionModel, JointProbabilityMatrix, LinkSpec, Scheme};
use crate::par;

/// Mass tolerance accepted by [`mutual_information`].
pub const MASS_TOLERANCE: f64 = 1e-6;

/// `I(X;Y) = Σ P(x,y) log2(P(x,y) / (P(x) P(y)))` in bits, with marginals
/// taken from the joint and `0 log 0 = 0`.
pub fn mutual_information(m: &JointProbabilityMatrix) -> Result<f64> {
    let total = m.total();
    if !((total - 1.0).abs() <= MASS_TOLERANCE) {
        return Err(Error::Integrity(format!(
            "joint matrix mass {total} deviates from 1"
        )));
    }
    if m.entries.iter().any(|p| *p < 0.0 || p.is_nan()) {
        return Err(Error::Integrity("negative or NaN joint probability".into()));
    }
    Ok(mutual_information_unchecked(m))
}

pub(crate) fn mutual_information_unchecked(m: &JointProbabilityMatrix) -> f64 {
    let rows = m.row_sums();
    let cols = m.column_sums();
    let mut info = 0.0;
    for x in 0..m.order {
        for y in 0..m.order {
            let p = m.get(x, y);
            if p > 0.0 {
                info += p * (p / (rows[x] * cols[y])).log2();
            }
        }
    }
    info.max(0.0)
}

/// Threshold search settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Coarse grid intervals per threshold over `[0, upper]`.
    pub coarse_intervals: usize,
    /// Successive refinement factors around the incumbent.
    pub refinements: Vec<usize>,
    /// Upper search bound is `max_level · n · p2 + margin_sigmas · σ`.
    pub margin_sigmas: f64,
    /// Coarse local maxima that are refined; the best refined tuple wins.
    pub starts: usize,
    /// Cyclic passes for schemes with more than three thresholds.
    pub max_sweeps: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            coarse_intervals: 64,
            refinements: vec![8, 8],
            margin_sigmas: 4.0,
            starts: 4,
            max_sweeps: 12,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.coarse_intervals == 0 {
            return Err(config("search.coarse_intervals must be at least 1"));
        }
        if self.refinements.iter().any(|f| *f < 2) {
            return Err(config("search.refinements must all be at least 2"));
        }
        if self.starts == 0 {
            return Err(config("search.starts must be at least 1"));
        }
        if !(self.margin_sigmas >= 0.0) {
            return Err(config("search.margin_sigmas must be non-negative"));
        }
        Ok(())
    }
}

/// One optimised point of a rate curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub snr_db: f64,
    /// Molecules per unit amplitude.
    pub molecules: f64,
    /// Bits per symbol.
    pub rate: f64,
    pub thresholds: Vec<f64>,
    pub scheme: Scheme,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCurve {
    pub scheme: Scheme,
    pub points: Vec<RatePoint>,
    /// Link fixture; `n` is the value of the last point.
    pub channel: ChannelParams,
}

/// Upper end of the threshold search range.
pub fn search_upper_bound(scheme: Scheme, link: &LinkSpec, search: &SearchConfig) -> f64 {
    let p2 = link.channel.p2.max(link.second().p2);
    let sigma = link.channel.noise_std.max(link.second().noise_std);
    scheme.max_level() * link.channel.n * p2 + search.margin_sigmas * sigma
}

/// Evaluates the mutual information of a prepared model.
pub fn information_at(model: &DetectionModel, tau: &[f64]) -> f64 {
    mutual_information_unchecked(&model.matrix(tau))
}

#[derive(Debug, Clone)]
struct Candidate {
    info: f64,
    tau: Vec<f64>,
    /// Lattice indices of `tau` at the current resolution.
    index: Vec<u64>,
}

fn better(a: &Candidate, b: &Candidate) -> bool {
    if a.info != b.info {
        return a.info > b.info;
    }
    a.tau
        .iter()
        .zip(&b.tau)
        .find(|(x, y)| x != y)
        .map(|(x, y)| x < y)
        .unwrap_or(false)
}

fn ranking(a: &Candidate, b: &Candidate) -> Ordering {
    if better(a, b) {
        Ordering::Less
    } else if better(b, a) {
        Ordering::Greater
    } else {
        Ordering::Equal
    }
}

/// Strictly increasing tuples with the `i`-th entry drawn from `axes[i]`.
fn ordered_tuples(axes: &[Vec<u64>]) -> Vec<Vec<u64>> {
    fn rec(axes: &[Vec<u64>], current: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        let depth = current.len();
        if depth == axes.len() {
            out.push(current.clone());
            return;
        }
        for &v in &axes[depth] {
            if current.last().is_some_and(|&last| v <= last) {
                continue;
            }
            current.push(v);
            rec(axes, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    rec(axes, &mut Vec::with_capacity(axes.len()), &mut out);
    out
}

/// Points `lo + (hi - lo) j / resolution` of a uniform lattice.
#[derive(Debug, Clone, Copy)]
struct Lattice {
    lo: f64,
    hi: f64,
    resolution: u64,
}

impl Lattice {
    fn value(&self, j: u64) -> f64 {
        self.lo + (self.hi - self.lo) * j as f64 / self.resolution as f64
    }

    fn refine(&self, factor: u64) -> Self {
        Self {
            resolution: self.resolution * factor,
            ..*self
        }
    }
}

fn score(model: &DetectionModel, lattice: Lattice, tuples: Vec<Vec<u64>>) -> Vec<Candidate> {
    par::map(&tuples, |index| {
        let tau: Vec<f64> = index.iter().map(|&j| lattice.value(j)).collect();
        Candidate {
            info: information_at(model, &tau),
            tau,
            index: index.clone(),
        }
    })
}

/// Refines `start` on successively finer lattices, each time searching
/// all ordered tuples within one previous step of the incumbent.
fn refine(model: &DetectionModel, mut lattice: Lattice, start: Candidate, search: &SearchConfig) -> Candidate {
    let mut best = start;
    for &factor in &search.refinements {
        let f = factor as u64;
        lattice = lattice.refine(f);
        let axes: Vec<Vec<u64>> = best
            .index
            .iter()
            .map(|&c| (c * f).saturating_sub(f)..=(c * f + f).min(lattice.resolution))
            .map(|r| r.collect())
            .collect();
        let rescaled = Candidate {
            index: best.index.iter().map(|&c| c * f).collect(),
            ..best
        };
        best = par::select_best(score(model, lattice, ordered_tuples(&axes)), better)
            .filter(|c| better(c, &rescaled))
            .unwrap_or(rescaled);
    }
    best
}

/// Tuples no lattice neighbour (each index moved by at most one) beats.
fn local_maxima(scored: Vec<Candidate>) -> Vec<Candidate> {
    let lookup: HashMap<&[u64], &Candidate> = scored.iter().map(|c| (c.index.as_slice(), c)).collect();
    let dims = scored.first().map_or(0, |c| c.index.len());
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(dims as u32))
        .map(|mut k| {
            (0..dims)
                .map(|_| {
                    let o = (k % 3) as i64 - 1;
                    k /= 3;
                    o
                })
                .collect()
        })
        .filter(|o: &Vec<i64>| o.iter().any(|v| *v != 0))
        .collect();
    let keep = par::map(&scored, |c| {
        offsets.iter().all(|o| {
            let moved: Option<Vec<u64>> = c
                .index
                .iter()
                .zip(o)
                .map(|(&j, &d)| j.checked_add_signed(d))
                .collect();
            moved
                .and_then(|m| lookup.get(m.as_slice()).map(|n| !better(n, c)))
                .unwrap_or(true)
        })
    });
    scored
        .into_iter()
        .zip(keep)
        .filter_map(|(c, k)| k.then_some(c))
        .collect()
}

/// Exhaustive search of a coarse lattice, then refinement from its best
/// `search.starts` local maxima.
fn grid_search(model: &DetectionModel, dims: usize, lo: f64, hi: f64, search: &SearchConfig) -> Option<Candidate> {
    if !(hi > lo) && dims > 1 {
        return None;
    }
    let lattice = Lattice {
        lo,
        hi,
        resolution: if hi > lo { search.coarse_intervals as u64 } else { 1 },
    };
    let axis: Vec<u64> = (0..=lattice.resolution).collect();
    let mut starts = local_maxima(score(model, lattice, ordered_tuples(&vec![axis; dims])));
    starts.sort_by(ranking);
    starts.truncate(search.starts.max(1));
    starts
        .into_iter()
        .map(|c| refine(model, lattice, c, search))
        .reduce(|a, b| if better(&b, &a) { b } else { a })
}

/// Cyclic coordinate ascent for many thresholds. Each coordinate is
/// searched coarse-to-fine on a lattice spanning the gap between its
/// neighbours, neighbours excluded.
fn coordinate_search(model: &DetectionModel, start: Vec<f64>, upper: f64, search: &SearchConfig) -> Candidate {
    let d = start.len();
    let mut best = Candidate {
        info: information_at(model, &start),
        tau: start,
        index: vec![0; d],
    };
    for _ in 0..search.max_sweeps {
        let before = best.info;
        for i in 0..d {
            let open_lo = i > 0;
            let open_hi = i + 1 < d;
            let mut lattice = Lattice {
                lo: if open_lo { best.tau[i - 1] } else { 0.0 },
                hi: if open_hi { best.tau[i + 1] } else { upper },
                resolution: search.coarse_intervals as u64,
            };
            if !(lattice.hi > lattice.lo) {
                continue;
            }
            let base = best.tau.clone();
            let along = |lattice: Lattice, range: std::ops::RangeInclusive<u64>| {
                let first = if open_lo { 1 } else { 0 };
                let last = lattice.resolution - open_hi as u64;
                let points: Vec<u64> = range.filter(|j| *j >= first && *j <= last).collect();
                par::select_best(
                    par::map(&points, |&j| {
                        let mut tau = base.clone();
                        tau[i] = lattice.value(j);
                        Candidate {
                            info: information_at(model, &tau),
                            tau,
                            index: vec![j],
                        }
                    }),
                    better,
                )
            };
            let Some(mut local) = along(lattice, 0..=lattice.resolution) else {
                continue;
            };
            for &factor in &search.refinements {
                let f = factor as u64;
                lattice = lattice.refine(f);
                let c = local.index[0] * f;
                local.index[0] = c;
                if let Some(r) = along(lattice, c.saturating_sub(f)..=(c + f).min(lattice.resolution)) {
                    if better(&r, &local) {
                        local = r;
                    }
                }
            }
            if better(&local, &best) {
                best = Candidate {
                    index: vec![0; d],
                    ..local
                };
            }
        }
        if best.info - before <= 1e-12 {
            break;
        }
    }
    best
}

fn initial_levels(scheme: Scheme, link: &LinkSpec, upper: f64) -> Vec<f64> {
    let ch = &link.channel;
    let order = scheme.order();
    let overflow = 0.5 * (order - 1) as f64 * ch.n * (ch.p2 - ch.p1);
    let d = scheme.threshold_count();
    let mut tau: Vec<f64> = (0..d)
        .map(|i| ((i as f64 + 0.5) * ch.n * ch.p1 + overflow).min(upper))
        .collect();
    for i in 1..d {
        if tau[i] <= tau[i - 1] {
            tau[i] = tau[i - 1] + upper.max(1.0) * 1e-9;
        }
    }
    tau
}

/// Achievable rate `max_τ I(X;Y)` of `scheme` on `link`.
///
/// Up to three thresholds are searched exhaustively on a coarse grid and
/// refined around the incumbent; larger threshold sets use cyclic
/// coordinate ascent. Ties resolve to the lexicographically smallest tuple.
pub fn maximize_rate(scheme: Scheme, link: &LinkSpec, search: &SearchConfig) -> Result<RatePoint> {
    search.validate()?;
    let model = DetectionModel::prepare(scheme, link)?;
    let upper = search_upper_bound(scheme, link, search);
    let dims = scheme.threshold_count();
    let best = if dims <= 3 {
        grid_search(&model, dims, 0.0, upper, search)
    } else if upper > 0.0 {
        Some(coordinate_search(&model, initial_levels(scheme, link, upper), upper, search))
    } else {
        None
    }
    .ok_or_else(|| {
        config(format!(
            "no feasible threshold tuple for {scheme} in [0, {upper}]; increase n or the noise margin"
        ))
    })?;
    let ch = &link.channel;
    let snr = if ch.noise_std > 0.0 {
        snr_db(ch.n, ch.p1, ch.noise_std)?
    } else {
        f64::INFINITY
    };
    Ok(RatePoint {
        snr_db: snr,
        molecules: ch.n,
        rate: best.info,
        thresholds: best.tau,
        scheme,
    })
}

/// Rate curve over an increasing SNR grid. For each SNR the molecule count
/// is set from the SNR definition at the fixture's `p1` and `σ`.
pub fn sweep_rate_curve(
    scheme: Scheme,
    fixture: &LinkSpec,
    snr_grid: &[f64],
    search: &SearchConfig,
) -> Result<RateCurve> {
    if snr_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(config("SNR grid must be strictly increasing"));
    }
    let ch = fixture.channel;
    let points = par::map(snr_grid, |&snr| -> Result<RatePoint> {
        let n = molecules_for_snr(snr, ch.p1, ch.noise_std)?;
        let mut point = maximize_rate(scheme, &fixture.with_n(n), search)?;
        point.snr_db = snr;
        Ok(point)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let channel = points.last().map(|p| ch.with_n(p.molecules)).unwrap_or(ch);
    Ok(RateCurve {
        scheme,
        points,
        channel,
    })
}

/// Nine significant digits, the precision of every CSV output.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    format!("{x:.8e}")
}

pub const RATE_CURVE_SCHEMA: &str = "isolink/rate-curve/1";

impl RateCurve {
    /// CSV with columns `snr_db,rate_bits,tau_1..tau_k`, preceded by a
    /// schema line and any extra `#` comment lines.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let k = self.scheme.threshold_count();
        let mut out = format!("# schema: {RATE_CURVE_SCHEMA}\n");
        for c in comments {
            out.push_str(&format!("# {c}\n"));
        }
        out.push_str("snr_db,rate_bits");
        for i in 1..=k {
            out.push_str(&format!(",tau_{i}"));
        }
        out.push('\n');
        for p in &self.points {
            out.push_str(&format_sig9(p.snr_db));
            out.push(',');
            out.push_str(&format_sig9(p.rate));
            for t in &p.thresholds {
                out.push(',');
                out.push_str(&format_sig9(*t));
            }
            out.push('\n');
        }
        out
    }

    /// Largest rate on the curve.
    pub fn peak_rate(&self) -> f64 {
        self.points.iter().map(|p| p.rate).fold(0.0, f64::max)
    }
}
