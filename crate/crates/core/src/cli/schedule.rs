use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{write_json, Context};
use crate::error::{Error, Result};
use crate::scheduler::{build_soc_sets, Domain, Pool, SampleIndex, SchedulerState};

/// One feedback observation: the losses a domain reported this iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceLine {
    pub line: usize,
    pub domain: Domain,
    pub z_soc: f64,
    pub z_global: f64,
}

/// Parses `domain, z_soc, z_global` lines; blank lines and `#` comments are
/// skipped. Errors cite the 1-based line number.
pub fn parse_trace(text: &str, origin: &Path) -> Result<Vec<TraceLine>> {
    let err =
        |line: usize, msg: String| Error::Parse { path: origin.to_path_buf(), message: format!("line {line}: {msg}") };
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(err(line, format!("expected `domain, z_soc, z_global`, found {} field(s)", fields.len())));
        }
        let domain: Domain = fields[0].parse().map_err(|e| err(line, e))?;
        let num = |s: &str, name: &str| -> Result<f64> {
            let v: f64 = s.parse().map_err(|_| err(line, format!("{name} `{s}` is not a number")))?;
            if !v.is_finite() || v < 0.0 {
                return Err(err(line, format!("{name} must be a finite non-negative loss, got {s}")));
            }
            Ok(v)
        };
        out.push(TraceLine { line, domain, z_soc: num(fields[1], "z_soc")?, z_global: num(fields[2], "z_global")? });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct Decision {
    pub line: usize,
    pub domain: Domain,
    pub pool: Pool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct DomainSummary {
    pub draws: usize,
    pub soc_pool_draws: usize,
    /// Fraction of draws taken from the small-object pool.
    pub soc_frequency: f64,
    /// Fraction of drawn samples that contain a small object (index mode).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub soc_sample_frequency: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScheduleReport {
    pub seed: u64,
    pub mode: &'static str,
    pub decisions: Vec<Decision>,
    pub summary: BTreeMap<Domain, DomainSummary>,
}

/// Per-domain sample index file: `{"A": [...], "B": [...]}`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct IndexFile {
    #[serde(rename = "A")]
    a: Vec<SampleIndex>,
    #[serde(rename = "B")]
    b: Vec<SampleIndex>,
}

/// Replays a trace: each line updates its domain's signals, then draws.
pub fn replay(
    trace: &[TraceLine],
    pools: Option<[(Vec<String>, Vec<String>); 2]>,
    seed: u64,
) -> Result<ScheduleReport> {
    let with_ids = pools.is_some();
    let pools = pools.unwrap_or_else(|| {
        let one = || (vec!["-".to_string()], vec!["-".to_string()]);
        [one(), one()]
    });
    let soc_sets: [BTreeSet<String>; 2] = [pools[0].0.iter().cloned().collect(), pools[1].0.iter().cloned().collect()];
    let mut state = SchedulerState::new(pools, seed)?;
    let mut decisions = Vec::with_capacity(trace.len());
    let mut summary: BTreeMap<Domain, DomainSummary> = BTreeMap::new();
    let mut soc_samples: BTreeMap<Domain, usize> = BTreeMap::new();
    for t in trace {
        state.update_state(t.domain, t.z_soc, t.z_global)?;
        let (id, pool) = state.next_sample(t.domain)?;
        let s = summary.entry(t.domain).or_default();
        s.draws += 1;
        if pool == Pool::Soc {
            s.soc_pool_draws += 1;
        }
        if with_ids && soc_sets[if t.domain == Domain::A { 0 } else { 1 }].contains(&id) {
            *soc_samples.entry(t.domain).or_default() += 1;
        }
        decisions.push(Decision { line: t.line, domain: t.domain, pool, sample: with_ids.then_some(id) });
    }
    for (d, s) in summary.iter_mut() {
        s.soc_frequency = s.soc_pool_draws as f64 / s.draws as f64;
        if with_ids {
            s.soc_sample_frequency = Some(soc_samples.get(d).copied().unwrap_or(0) as f64 / s.draws as f64);
        }
    }
    Ok(ScheduleReport { seed, mode: if with_ids { "index" } else { "decisions" }, decisions, summary })
}

fn read_text(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(Error::MissingInput(path.display().to_string()));
    }
    std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.to_path_buf(), message: e.to_string() })
}

pub fn run_schedule(ctx: &Context, trace: &Path, index: Option<&Path>) -> Result<ScheduleReport> {
    let lines = parse_trace(&read_text(trace)?, trace)?;
    let pools = match index {
        Some(p) => {
            let idx: IndexFile = serde_json::from_str(&read_text(p)?)
                .map_err(|e| Error::Parse { path: p.to_path_buf(), message: e.to_string() })?;
            Some([build_soc_sets(&idx.a)?, build_soc_sets(&idx.b)?])
        }
        None => None,
    };
    let report = replay(&lines, pools, ctx.config.seed)?;
    write_json(&ctx.out("schedule.json"), &report)?;
    Ok(report)
}
