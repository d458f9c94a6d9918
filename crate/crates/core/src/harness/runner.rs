//! Resumable batch runs over (instance, setting) pairs.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{mpsc, Mutex};
use std::thread;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use super::prompt::{build_prompt, template_version, PromptSetting};
use super::provider::{
    complete_with_retry, ChatPayload, Provider, ProviderError, ResponseCache, RetryPolicy,
};
use super::store::{Counts, Manifest, RunDir, RunRecord};
use crate::config::ProviderConfig;
use crate::dataset::{load_instances, write_jsonl, Instance};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub settings: Vec<PromptSetting>,
    pub workers: usize,
    /// 0 disables the limit.
    pub requests_per_minute: u32,
    pub retry: RetryPolicy,
    pub cache: bool,
    pub provider: ProviderConfig,
}

impl RunOptions {
    pub fn new(provider: ProviderConfig, settings: Vec<PromptSetting>) -> Self {
        RunOptions {
            retry: RetryPolicy::from_config(&provider),
            settings,
            workers: 4,
            requests_per_minute: 0,
            cache: true,
            provider,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunSummary {
    pub executed: usize,
    pub skipped: usize,
    pub failed: usize,
    pub cache_hits: usize,
    /// Set when a non-retryable provider error stopped the run.
    pub fatal: Option<String>,
}

/// Spaces request starts at least `interval` apart.
struct RateLimiter {
    interval: Duration,
    next: Mutex<Instant>,
}

impl RateLimiter {
    fn new(per_minute: u32) -> Option<Self> {
        (per_minute > 0).then(|| RateLimiter {
            interval: Duration::from_secs(60) / per_minute,
            next: Mutex::new(Instant::now()),
        })
    }

    fn wait(&self) {
        let slot = {
            let mut next = self.next.lock().unwrap_or_else(|e| e.into_inner());
            let slot = (*next).max(Instant::now());
            *next = slot + self.interval;
            slot
        };
        let now = Instant::now();
        if slot > now {
            thread::sleep(slot - now);
        }
    }
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Create or reuse `dir`, storing `instances` as its dataset. Reusing a
/// directory with a different dataset is an error.
pub fn prepare_run_dir(dir: &RunDir, instances: &[Instance]) -> Result<()> {
    dir.create()?;
    let path = dir.dataset_path();
    if path.exists() {
        let existing = load_instances(&path)?;
        if existing != instances {
            return Err(Error::Invalid(format!(
                "{} already holds a different dataset",
                dir.root().display()
            )));
        }
        return Ok(());
    }
    write_jsonl(&path, instances)
}

/// Run every (instance, setting) pair without a stored transcript.
pub fn run_suite(
    dir: &RunDir,
    instances: &[Instance],
    provider: &dyn Provider,
    opts: &RunOptions,
) -> Result<RunSummary> {
    opts.provider.validate()?;
    prepare_run_dir(dir, instances)?;
    let started = unix_now();
    let cache = if opts.cache {
        Some(ResponseCache::open(&dir.cache_dir())?)
    } else {
        None
    };

    let mut pending = Vec::new();
    let mut skipped = 0;
    for &setting in &opts.settings {
        let mut latest = BTreeMap::new();
        for inst in instances {
            let task = inst.task();
            if let Entry::Vacant(e) = latest.entry(task) {
                e.insert(dir.latest(task, setting)?);
            }
            if latest[&task]
                .get(inst.id())
                .is_some_and(RunRecord::succeeded)
            {
                skipped += 1;
            } else {
                pending.push((inst, setting));
            }
        }
    }
    log::info!(
        "{} requests pending, {skipped} already stored",
        pending.len()
    );

    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let limiter = RateLimiter::new(opts.requests_per_minute);
    let mut summary = RunSummary {
        skipped,
        ..RunSummary::default()
    };
    let (tx, rx) = mpsc::channel::<Result<RunRecord>>();
    let mut write_error = None;
    thread::scope(|scope| {
        for _ in 0..opts.workers.max(1).min(pending.len().max(1)) {
            let tx = tx.clone();
            let (pending, next, stop, limiter, cache) = (&pending, &next, &stop, &limiter, &cache);
            scope.spawn(move || loop {
                if stop.load(Ordering::SeqCst) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&(inst, setting)) = pending.get(i) else {
                    break;
                };
                let rec = execute_one(
                    inst,
                    setting,
                    provider,
                    opts,
                    cache.as_ref(),
                    limiter.as_ref(),
                );
                if rec
                    .as_ref()
                    .is_ok_and(|r| r.error.as_deref().is_some_and(|e| e.starts_with("fatal")))
                {
                    stop.store(true, Ordering::SeqCst);
                }
                if tx.send(rec).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for rec in rx {
            let rec = match rec {
                Ok(r) => r,
                Err(e) => {
                    stop.store(true, Ordering::SeqCst);
                    write_error.get_or_insert(e);
                    continue;
                }
            };
            if let Err(e) = dir.append(&rec) {
                stop.store(true, Ordering::SeqCst);
                write_error.get_or_insert(e);
                continue;
            }
            summary.executed += 1;
            summary.cache_hits += usize::from(rec.cache_hit);
            if let Some(err) = &rec.error {
                summary.failed += 1;
                if err.starts_with("fatal") && summary.fatal.is_none() {
                    summary.fatal = Some(err.clone());
                }
            }
        }
    });
    if let Some(e) = write_error {
        return Err(e);
    }
    write_manifest(dir, instances, provider, opts, started)?;
    Ok(summary)
}

fn execute_one(
    inst: &Instance,
    setting: PromptSetting,
    provider: &dyn Provider,
    opts: &RunOptions,
    cache: Option<&ResponseCache>,
    limiter: Option<&RateLimiter>,
) -> Result<RunRecord> {
    let payload = ChatPayload::new(&opts.provider, build_prompt(inst, setting)?);
    let hash = payload.hash();
    let mut rec = RunRecord {
        instance_id: inst.id().to_string(),
        task: inst.task(),
        setting,
        template_version: template_version(inst).to_string(),
        payload_hash: hash.clone(),
        transcript: None,
        error: None,
        latency_ms: 0,
        provider: provider.name().to_string(),
        model: opts.provider.model.clone(),
        cache_hit: false,
        retries: 0,
    };
    if let Some(hit) = cache.and_then(|c| c.get(&hash)) {
        rec.transcript = Some(hit);
        rec.cache_hit = true;
        return Ok(rec);
    }
    if let Some(l) = limiter {
        l.wait();
    }
    let t0 = Instant::now();
    let (outcome, retries) = complete_with_retry(provider, inst, &payload, opts.retry);
    rec.latency_ms = t0.elapsed().as_millis() as u64;
    rec.retries = retries;
    match outcome {
        Ok(text) => {
            if let Some(c) = cache {
                c.put(&hash, &text)?;
            }
            rec.transcript = Some(text);
        }
        Err(e @ ProviderError::Fatal(_)) => {
            log::error!("{}: {e}", inst.id());
            rec.error = Some(e.to_string());
        }
        Err(e) => {
            log::warn!("{}: {e}", inst.id());
            rec.error = Some(e.to_string());
        }
    }
    Ok(rec)
}

fn write_manifest(
    dir: &RunDir,
    instances: &[Instance],
    provider: &dyn Provider,
    opts: &RunOptions,
    started: u64,
) -> Result<()> {
    let mut counts: BTreeMap<String, Counts> = BTreeMap::new();
    for &setting in &opts.settings {
        let mut latest = BTreeMap::new();
        for inst in instances {
            let task = inst.task();
            if let Entry::Vacant(e) = latest.entry(task) {
                e.insert(dir.latest(task, setting)?);
            }
            let c = counts.entry(format!("{task}.{setting}")).or_default();
            c.instances += 1;
            match latest[&task].get(inst.id()) {
                Some(r) if r.succeeded() => {
                    c.completed += 1;
                    c.cache_hits += usize::from(r.cache_hit);
                }
                Some(_) => c.failed += 1,
                None => {}
            }
        }
    }
    dir.write_manifest(&Manifest {
        provider: provider.name().to_string(),
        model: opts.provider.model.clone(),
        settings: opts.settings.clone(),
        workers: opts.workers,
        started_unix: started,
        finished_unix: unix_now(),
        counts,
    })
}
