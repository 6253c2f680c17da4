//! Summary statistics for approximation ratios and per-deadline breakdowns.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::LinkId;
use crate::schedulability::SchedulabilityVerdict;
use crate::scheduler::SimulationReport;
use crate::traffic::{Slot, TrafficSet};

/// z for a two-sided 95% normal interval.
const Z95: f64 = 1.959963984540054;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    pub count: usize,
    pub mean: f64,
    /// Normal-approximation 95% interval for the mean.
    pub ci_low: f64,
    pub ci_high: f64,
    pub histogram: Vec<HistogramBin>,
}

/// `bins` equal-width bins over `[0, 1]`; the last bin is closed.
pub fn unit_edges(bins: usize) -> Vec<f64> {
    let bins = bins.max(1);
    (0..=bins).map(|k| k as f64 / bins as f64).collect()
}

/// Mean, 95% interval and histogram of `values` over ascending `edges`.
/// Values outside the edges are counted in the mean but in no bin.
pub fn summarize(values: &[f64], edges: &[f64]) -> Result<RatioSummary> {
    if values.is_empty() {
        return Err(Error::input("no values to summarize"));
    }
    if edges.len() < 2 || edges.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::input("histogram edges must be strictly ascending, at least two"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let half = if values.len() > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Z95 * (var / n).sqrt()
    } else {
        0.0
    };
    let last = edges.len() - 2;
    let mut histogram: Vec<HistogramBin> = edges
        .windows(2)
        .map(|w| HistogramBin {
            lo: w[0],
            hi: w[1],
            count: 0,
        })
        .collect();
    for &v in values {
        if let Some(k) = histogram
            .iter()
            .enumerate()
            .position(|(k, b)| b.lo <= v && (v < b.hi || (k == last && v == b.hi)))
        {
            histogram[k].count += 1;
        }
    }
    Ok(RatioSummary {
        count: values.len(),
        mean,
        ci_low: mean - half,
        ci_high: mean + half,
        histogram,
    })
}

/// Summaries of `δ` and `δ'` over `verdicts`.
pub fn ratio_histogram(verdicts: &[SchedulabilityVerdict], edges: &[f64]) -> Result<(RatioSummary, RatioSummary)> {
    let delta: Vec<f64> = verdicts.iter().map(|v| v.delta_f64()).collect();
    let delta_prime: Vec<f64> = verdicts.iter().map(|v| v.delta_prime_f64()).collect();
    Ok((summarize(&delta, edges)?, summarize(&delta_prime, edges)?))
}

/// Half-open relative-deadline bin `[lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeadlineBin {
    pub lo: Slot,
    pub hi: Slot,
}

/// Bins of `width` starting at the multiple of `width` at or below `lo`,
/// covering up to `hi` inclusive.
pub fn deadline_bins(lo: Slot, hi: Slot, width: Slot) -> Vec<DeadlineBin> {
    let width = width.max(1);
    let mut out = Vec::new();
    let mut start = lo / width * width;
    while start <= hi {
        out.push(DeadlineBin {
            lo: start,
            hi: start + width,
        });
        start += width;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinRatio {
    pub bin: DeadlineBin,
    pub links: usize,
    pub flagged: usize,
    /// `flagged / links`; absent for an empty bin.
    pub ratio: Option<f64>,
}

fn bin_ratios(
    traffic: &TrafficSet,
    links: impl IntoIterator<Item = (LinkId, bool)>,
    bins: &[DeadlineBin],
) -> Result<Vec<BinRatio>> {
    let mut out: Vec<BinRatio> = bins
        .iter()
        .map(|&bin| BinRatio {
            bin,
            links: 0,
            flagged: 0,
            ratio: None,
        })
        .collect();
    for (id, flagged) in links {
        let d = traffic.require(id)?.deadline;
        let k = bins
            .iter()
            .position(|b| b.lo <= d && d < b.hi)
            .ok_or_else(|| Error::input(format!("relative deadline {d} of link {id} falls in no bin")))?;
        out[k].links += 1;
        out[k].flagged += flagged as usize;
    }
    for b in &mut out {
        b.ratio = (b.links > 0).then(|| b.flagged as f64 / b.links as f64);
    }
    Ok(out)
}

/// Share of links failing the schedulability test, per deadline bin.
pub fn deadline_bin_report(
    verdicts: &[SchedulabilityVerdict],
    traffic: &TrafficSet,
    bins: &[DeadlineBin],
) -> Result<Vec<BinRatio>> {
    bin_ratios(traffic, verdicts.iter().map(|v| (v.link, !v.schedulable)), bins)
}

/// Share of links with at least one deadline miss, per deadline bin.
pub fn miss_bin_report(report: &SimulationReport, traffic: &TrafficSet, bins: &[DeadlineBin]) -> Result<Vec<BinRatio>> {
    bin_ratios(traffic, report.links.iter().map(|l| (l.link, l.misses > 0)), bins)
}

/// Whether links that missed deadlines have a shorter mean relative
/// deadline than all links. `None` when nothing missed.
pub fn misses_favor_short_deadlines(report: &SimulationReport, traffic: &TrafficSet) -> Result<Option<bool>> {
    let mut all = (0.0, 0usize);
    let mut missing = (0.0, 0usize);
    for l in &report.links {
        let d = traffic.require(l.link)?.deadline as f64;
        all = (all.0 + d, all.1 + 1);
        if l.misses > 0 {
            missing = (missing.0 + d, missing.1 + 1);
        }
    }
    if missing.1 == 0 {
        return Ok(None);
    }
    Ok(Some(missing.0 / (missing.1 as f64) < all.0 / all.1 as f64))
}
