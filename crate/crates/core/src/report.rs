//! Scoring of stored transcripts and report tables.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::answer::{extract_answer, parse_directions, score_answer_with, ExtractionRule};
use crate::dataset::{load_instances, read_jsonl, write_jsonl, Instance, TaskKind};
use crate::error::{Error, Result};
use crate::harness::store::RunDir;
use crate::harness::PromptSetting;
use crate::nav::{NavStats, NavTask};
use crate::sim::{
    aggregate_progress, execute_instructions, percent, AccuracyMetrics, RouteMetrics,
};
use crate::tiling::TilingStats;
use crate::trace::{
    analyze_transcript, spatial_understanding_accuracy, tracking_rates, AnalysisRecord, VizGrade,
};

/// Score of one transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceScore {
    pub id: String,
    pub task: TaskKind,
    pub setting: PromptSetting,
    pub extracted_answer: String,
    pub rule: ExtractionRule,
    pub correct: bool,
    /// Route planning only: progress along the gold path.
    pub t: Option<usize>,
    pub k: Option<usize>,
}

/// Route plans are executed on the map; every other task is matched against
/// the gold text.
pub fn score_instance(
    instance: &Instance,
    setting: PromptSetting,
    raw: &str,
) -> Result<InstanceScore> {
    let keywords = instance.answer_keywords();
    let kw: Vec<&str> = keywords.iter().map(String::as_str).collect();
    let mut score = InstanceScore {
        id: instance.id().to_string(),
        task: instance.task(),
        setting,
        extracted_answer: String::new(),
        rule: ExtractionRule::Empty,
        correct: false,
        t: None,
        k: None,
    };
    match instance {
        Instance::Nav(r) if r.task == NavTask::RoutePlanning => {
            let ex = extract_answer(raw, &kw);
            let trace = execute_instructions(&r.map()?, &parse_directions(&ex.text));
            score.correct = trace.t == trace.k;
            score.t = Some(trace.t);
            score.k = Some(trace.k);
            score.extracted_answer = ex.text;
            score.rule = ex.rule;
        }
        _ => {
            let j = score_answer_with(raw, &instance.gold_text(), &kw);
            score.correct = j.correct;
            score.extracted_answer = j.extracted_answer;
            score.rule = j.rule;
        }
    }
    Ok(score)
}

/// Metrics of one setting; absent tasks are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingScores {
    pub setting: PromptSetting,
    pub route_planning: Option<RouteMetrics>,
    pub next_step: Option<AccuracyMetrics>,
    pub tiling: Option<AccuracyMetrics>,
    pub nl_navigation: Option<AccuracyMetrics>,
    pub ring_navigation: Option<AccuracyMetrics>,
    /// Instances of this setting without a stored transcript.
    pub missing: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub settings: Vec<SettingScores>,
}

fn accuracy(scores: &[&InstanceScore]) -> Option<AccuracyMetrics> {
    if scores.is_empty() {
        return None;
    }
    let correct = scores.iter().filter(|s| s.correct).count();
    Some(AccuracyMetrics {
        n: scores.len(),
        correct,
        accuracy: percent(correct as f64 / scores.len() as f64),
    })
}

pub fn aggregate_scores(
    setting: PromptSetting,
    scores: &[InstanceScore],
    missing: usize,
) -> Result<SettingScores> {
    let of = |t: TaskKind| {
        scores
            .iter()
            .filter(|s| s.setting == setting && s.task == t)
            .collect::<Vec<_>>()
    };
    let routes: Vec<(usize, usize)> = of(TaskKind::RoutePlanning)
        .iter()
        .filter_map(|s| Some((s.t?, s.k?)))
        .collect();
    Ok(SettingScores {
        setting,
        route_planning: if routes.is_empty() {
            None
        } else {
            Some(aggregate_progress(&routes)?)
        },
        next_step: accuracy(&of(TaskKind::NextStep)),
        tiling: accuracy(&of(TaskKind::Tiling)),
        nl_navigation: accuracy(&of(TaskKind::NlNavigation)),
        ring_navigation: accuracy(&of(TaskKind::RingNavigation)),
        missing,
    })
}

/// Transcripts of a run directory joined with the dataset, in dataset order.
pub struct LoadedRun {
    pub instances: Vec<Instance>,
    pub settings: Vec<PromptSetting>,
    /// (instance index, setting, transcript)
    pub transcripts: Vec<(usize, PromptSetting, String)>,
    pub missing: BTreeMap<PromptSetting, usize>,
}

pub fn load_run(dir: &RunDir) -> Result<LoadedRun> {
    let instances = load_instances(&dir.dataset_path())?;
    let settings = dir.settings_present()?;
    if settings.is_empty() {
        return Err(Error::Invalid(format!(
            "{} has no transcripts",
            dir.root().display()
        )));
    }
    let mut transcripts = Vec::new();
    let mut missing = BTreeMap::new();
    for &setting in &settings {
        let mut latest = BTreeMap::new();
        for (i, inst) in instances.iter().enumerate() {
            let task = inst.task();
            if let Entry::Vacant(e) = latest.entry(task) {
                e.insert(dir.latest(task, setting)?);
            }
            match latest[&task]
                .get(inst.id())
                .and_then(|r| r.transcript.clone())
            {
                Some(t) => transcripts.push((i, setting, t)),
                None => *missing.entry(setting).or_insert(0) += 1,
            }
        }
    }
    Ok(LoadedRun {
        instances,
        settings,
        transcripts,
        missing,
    })
}

pub fn score_run(run: &LoadedRun) -> Result<(ScoreReport, Vec<InstanceScore>)> {
    let scores = run
        .transcripts
        .iter()
        .map(|(i, s, t)| score_instance(&run.instances[*i], *s, t))
        .collect::<Result<Vec<_>>>()?;
    let settings = run
        .settings
        .iter()
        .map(|&s| aggregate_scores(s, &scores, run.missing.get(&s).copied().unwrap_or(0)))
        .collect::<Result<Vec<_>>>()?;
    Ok((ScoreReport { settings }, scores))
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"))
}

/// Rows are settings; columns follow the benchmark's main results table.
pub fn table3_markdown(report: &ScoreReport) -> String {
    let mut s = String::from(
        "| Setting | Completing Rate | Succ Rate | Next Step | Visual Tiling | NL Navigation |\n|---|---|---|---|---|---|\n",
    );
    for r in &report.settings {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} |",
            r.setting.label(),
            cell(r.route_planning.map(|m| m.completing_rate)),
            cell(r.route_planning.map(|m| m.success_rate)),
            cell(r.next_step.map(|m| m.accuracy)),
            cell(r.tiling.map(|m| m.accuracy)),
            cell(r.nl_navigation.map(|m| m.accuracy)),
        );
    }
    if report.settings.iter().any(|r| r.ring_navigation.is_some()) {
        s.push_str("\n| Setting | Ring Navigation |\n|---|---|\n");
        for r in &report.settings {
            let _ = writeln!(
                s,
                "| {} | {} |",
                r.setting.label(),
                cell(r.ring_navigation.map(|m| m.accuracy))
            );
        }
    }
    s
}

pub fn analyze_run(run: &LoadedRun, scores: &[InstanceScore]) -> Result<Vec<AnalysisRecord>> {
    run.transcripts
        .iter()
        .zip(scores)
        .map(|((i, s, t), sc)| analyze_transcript(&run.instances[*i], s.as_str(), t, sc.correct))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingRow {
    pub task: TaskKind,
    pub setting: String,
    pub n: usize,
    pub complete: f64,
    pub partial: f64,
}

pub fn tracking_table(records: &[AnalysisRecord]) -> Result<Vec<TrackingRow>> {
    let mut groups: BTreeMap<(TaskKind, String), Vec<(usize, usize)>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.task, r.setting.clone()))
            .or_default()
            .push((r.l_v, r.l_s));
    }
    groups
        .into_iter()
        .map(|((task, setting), lens)| {
            let rates = tracking_rates(&lens)?;
            Ok(TrackingRow {
                task,
                setting,
                n: rates.n,
                complete: rates.complete,
                partial: rates.partial,
            })
        })
        .collect()
}

pub fn tracking_csv(rows: &[TrackingRow]) -> String {
    let mut s = String::from("task,setting,n,complete,partial\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{:.2},{:.2}",
            r.task, r.setting, r.n, r.complete, r.partial
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapabilityRow {
    pub family: String,
    pub setting: String,
    /// Transcripts of the family.
    pub n: usize,
    /// Transcripts with a graded last visualization.
    pub graded: usize,
    pub compliance: Option<f64>,
    pub accuracy: Option<f64>,
    pub understanding: Option<f64>,
}

/// Visualization compliance/accuracy over graded transcripts and
/// P(correct | accurate), per visual family and visualizing setting.
pub fn capability_table(records: &[AnalysisRecord]) -> Vec<CapabilityRow> {
    let families = [
        (
            "Visual Navigation",
            &[TaskKind::RoutePlanning, TaskKind::NextStep][..],
        ),
        ("Visual Tiling", &[TaskKind::Tiling][..]),
    ];
    let settings: BTreeSet<&str> = records.iter().map(|r| r.setting.as_str()).collect();
    let mut rows = Vec::new();
    for setting in settings {
        for (family, tasks) in families {
            let recs: Vec<&AnalysisRecord> = records
                .iter()
                .filter(|r| r.setting == setting && tasks.contains(&r.task))
                .collect();
            if recs.is_empty() || recs.iter().all(|r| r.compliant.is_none()) {
                continue;
            }
            let graded: Vec<(Option<VizGrade>, bool)> = recs
                .iter()
                .map(|r| {
                    let g = r
                        .compliant
                        .zip(r.accurate)
                        .map(|(compliant, accurate)| VizGrade {
                            compliant,
                            accurate,
                            reasons: r.reasons.clone(),
                        });
                    (g, r.answer_correct)
                })
                .collect();
            let n_graded = graded.iter().filter(|(g, _)| g.is_some()).count();
            let rate = |f: fn(&VizGrade) -> bool| {
                (n_graded > 0).then(|| {
                    percent(
                        graded
                            .iter()
                            .filter(|(g, _)| g.as_ref().is_some_and(f))
                            .count() as f64
                            / n_graded as f64,
                    )
                })
            };
            rows.push(CapabilityRow {
                family: family.to_string(),
                setting: setting.to_string(),
                n: recs.len(),
                graded: n_graded,
                compliance: rate(|g| g.compliant),
                accuracy: rate(|g| g.accurate),
                understanding: spatial_understanding_accuracy(&graded).map(percent),
            });
        }
    }
    rows
}

pub fn table4_markdown(rows: &[CapabilityRow]) -> String {
    let mut s = String::new();
    let settings: BTreeSet<&str> = rows.iter().map(|r| r.setting.as_str()).collect();
    for setting in settings {
        let _ = writeln!(s, "Setting: {setting}\n");
        s.push_str("| Task | Spatial Visualization Compliance | Spatial Visualization Accuracy | Spatial Understanding Accuracy | Graded |\n|---|---|---|---|---|\n");
        for r in rows.iter().filter(|r| r.setting == setting) {
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} | {}/{} |",
                r.family,
                cell(r.compliance),
                cell(r.accuracy),
                cell(r.understanding),
                r.graded,
                r.n
            );
        }
        s.push('\n');
    }
    s
}

/// Navigation dataset distribution: maps (route planning) and next-step
/// questions per k.
pub fn table1_markdown(stats: &[NavStats]) -> String {
    let mut head = String::from("| Task |");
    let mut sep = String::from("|---|");
    let mut route = String::from("| Route Planning |");
    let mut next = String::from("| Next Step Prediction |");
    for st in stats {
        let _ = write!(head, " k={} |", st.k);
        sep.push_str("---|");
        let _ = write!(route, " {} |", st.route_planning);
        let _ = write!(next, " {} |", st.next_step);
    }
    let total_r: usize = stats.iter().map(|s| s.route_planning).sum();
    let total_n: usize = stats.iter().map(|s| s.next_step).sum();
    format!("{head} Total |\n{sep}---|\n{route} {total_r} |\n{next} {total_n} |\n")
}

/// Tiling dataset distribution per number of masked pieces.
pub fn table2_markdown(stats: &[TilingStats]) -> String {
    let mut s = String::from("| Masked pieces |");
    for st in stats {
        let _ = write!(s, " {} |", st.mask_count);
    }
    s.push_str(" Total |\n|---|");
    for _ in stats {
        s.push_str("---|");
    }
    s.push_str("---|\n");
    let row = |label: &str, f: &dyn Fn(&TilingStats) -> usize| {
        let mut r = format!("| {label} |");
        for st in stats {
            let _ = write!(r, " {} |", f(st));
        }
        let _ = writeln!(r, " {} |", stats.iter().map(f).sum::<usize>());
        r
    };
    s.push_str(&row("Configuration", &|st| st.configurations_with_qa));
    s.push_str(&row("QA Instance", &|st| st.qa_instances));
    s
}

/// Dataset distribution recomputed from stored instances.
pub fn dataset_tables(instances: &[Instance]) -> String {
    let mut nav: BTreeMap<usize, NavStats> = BTreeMap::new();
    let mut tiling: BTreeMap<usize, (BTreeSet<String>, usize)> = BTreeMap::new();
    let mut other: BTreeMap<TaskKind, usize> = BTreeMap::new();
    for inst in instances {
        match inst {
            Instance::Nav(r) => {
                let e = nav.entry(r.k).or_insert(NavStats {
                    k: r.k,
                    sequences: 1 << (r.k + 1),
                    maps: 0,
                    route_planning: 0,
                    next_step: 0,
                });
                match r.task {
                    NavTask::RoutePlanning => {
                        e.maps += 1;
                        e.route_planning += 1;
                    }
                    NavTask::NextStep => e.next_step += 1,
                }
            }
            Instance::Tiling(r) => {
                let e = tiling.entry(r.mask_count).or_default();
                // one masked configuration per (config, mask choice)
                let masked =
                    r.id.rsplit_once('-')
                        .map_or(r.id.as_str(), |(head, _)| head);
                e.0.insert(masked.to_string());
                e.1 += 1;
            }
            _ => *other.entry(inst.task()).or_insert(0) += 1,
        }
    }
    let mut s = String::new();
    if !nav.is_empty() {
        s.push_str("Visual navigation\n\n");
        s.push_str(&table1_markdown(&nav.into_values().collect::<Vec<_>>()));
        s.push('\n');
    }
    if !tiling.is_empty() {
        let stats: Vec<TilingStats> = tiling
            .into_iter()
            .map(|(mask_count, (configs, qa))| TilingStats {
                mask_count,
                tilings: 0,
                masked_configurations: 0,
                configurations_with_qa: configs.len(),
                candidates: 0,
                qa_instances: qa,
                dropped: 0,
            })
            .collect();
        s.push_str("Visual tiling\n\n");
        s.push_str(&table2_markdown(&stats));
        s.push('\n');
    }
    for (task, n) in other {
        let _ = writeln!(s, "{task}: {n} instances\n");
    }
    s
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    write_text(path, &(serde_json::to_string_pretty(v)? + "\n"))
}

/// `score`: scores/score.json, scores/instances.jsonl, scores/table3.md.
pub fn write_scores(dir: &RunDir) -> Result<ScoreReport> {
    let run = load_run(dir)?;
    let (report, scores) = score_run(&run)?;
    dir.create()?;
    let out = dir.scores_dir();
    write_json(&out.join("score.json"), &report)?;
    write_jsonl(&out.join("instances.jsonl"), &scores)?;
    write_text(&out.join("table3.md"), &table3_markdown(&report))?;
    Ok(report)
}

/// `analyze`: scores/analysis.jsonl, scores/tracking.csv, scores/table4.md.
pub fn write_analysis(dir: &RunDir) -> Result<(Vec<TrackingRow>, Vec<CapabilityRow>)> {
    let run = load_run(dir)?;
    let (_, scores) = score_run(&run)?;
    let records = analyze_run(&run, &scores)?;
    let tracking = tracking_table(&records)?;
    let capability = capability_table(&records);
    dir.create()?;
    let out = dir.scores_dir();
    write_jsonl(&out.join("analysis.jsonl"), &records)?;
    write_text(&out.join("tracking.csv"), &tracking_csv(&tracking))?;
    write_text(&out.join("table4.md"), &table4_markdown(&capability))?;
    Ok((tracking, capability))
}

/// `report`: score and analyze, then bundle everything into report.md.
pub fn write_report(dir: &RunDir) -> Result<String> {
    let scores = write_scores(dir)?;
    let (tracking, capability) = write_analysis(dir)?;
    let instances = load_instances(&dir.dataset_path())?;
    let mut s = String::from("# Spatial reasoning evaluation report\n\n");
    if let Ok(m) = dir.read_manifest() {
        let _ = writeln!(
            s,
            "Provider: {} (model `{}`), workers: {}\n",
            m.provider, m.model, m.workers
        );
        s.push_str(
            "| Run | Instances | Completed | Failed | Cache hits |\n|---|---|---|---|---|\n",
        );
        for (k, c) in &m.counts {
            let _ = writeln!(
                s,
                "| {k} | {} | {} | {} | {} |",
                c.instances, c.completed, c.failed, c.cache_hits
            );
        }
        s.push('\n');
    }
    s.push_str("## Dataset\n\n");
    s.push_str(&dataset_tables(&instances));
    s.push_str("## Answer metrics\n\n");
    s.push_str(&table3_markdown(&scores));
    s.push_str("\n## Visual state tracking\n\n");
    s.push_str("| Task | Setting | n | Complete | Partial |\n|---|---|---|---|---|\n");
    for r in &tracking {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {:.2} | {:.2} |",
            r.task, r.setting, r.n, r.complete, r.partial
        );
    }
    s.push_str("\n## Visualization grades\n\n");
    if capability.is_empty() {
        s.push_str("No graded visualizations.\n");
    } else {
        s.push_str(&table4_markdown(&capability));
    }
    write_text(&dir.report_path(), &s)?;
    Ok(s)
}

/// Analysis records previously written by [`write_analysis`].
pub fn read_analysis(dir: &RunDir) -> Result<Vec<AnalysisRecord>> {
    read_jsonl(&dir.scores_dir().join("analysis.jsonl"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn score(task: TaskKind, correct: bool, t: Option<(usize, usize)>) -> InstanceScore {
        InstanceScore {
            id: "x".into(),
            task,
            setting: PromptSetting::Vot,
            extracted_answer: String::new(),
            rule: ExtractionRule::Marker,
            correct,
            t: t.map(|p| p.0),
            k: t.map(|p| p.1),
        }
    }

    #[test]
    fn aggregation_by_task() {
        let scores = vec![
            score(TaskKind::RoutePlanning, true, Some((4, 4))),
            score(TaskKind::RoutePlanning, false, Some((2, 4))),
            score(TaskKind::NextStep, true, None),
            score(TaskKind::NextStep, false, None),
        ];
        let s = aggregate_scores(PromptSetting::Vot, &scores, 0).unwrap();
        let r = s.route_planning.unwrap();
        assert_eq!((r.completing_rate, r.success_rate), (75.0, 50.0));
        assert_eq!(s.next_step.unwrap().accuracy, 50.0);
        assert!(s.tiling.is_none());
        let md = table3_markdown(&ScoreReport { settings: vec![s] });
        assert!(md.contains("| VoT | 75.00 | 50.00 | 50.00 | - | - |"));
    }

    #[test]
    fn table1_shape() {
        let st = [NavStats {
            k: 2,
            sequences: 8,
            maps: 8,
            route_planning: 8,
            next_step: 8,
        }];
        assert_eq!(
            table1_markdown(&st),
            "| Task | k=2 | Total |\n|---|---|---|\n| Route Planning | 8 | 8 |\n| Next Step Prediction | 8 | 8 |\n"
        );
    }
}
