use std::path::{Path, PathBuf};
use std::sync::Arc;

use promptcat::backend::{Backend, LiveBackend, LiveConfig, Llm, ReplayBackend, TokenBudget};
use promptcat::cat::{LawConfig, LawReport, TableFixture};
use promptcat::harness::{
    analyze, generate_prompt_sets, ingest_corpus, ingest_rankings, pack_generated, Aggregation,
    AnalysisOptions, AnnotationPack, GenerationRun, WilcoxonMode,
};
use promptcat::meta::{execute_prompt_set, ExecOutcome, MetaPromptTemplate, TaskBinding, TaskKind};
use promptcat::prompt::{PromptCategory, PromptFixture};
use serde::Serialize;

use crate::config::{BackendKind, RunConfig};
use crate::CliError;

const IDEATION_FIXTURE: &str = include_str!("../../core/fixtures/idea.json");
const CREATIVITY_FIXTURE: &str = include_str!("../../core/fixtures/creat.json");

fn write(path: &Path, body: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, body).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

// ---- laws ----

#[derive(Serialize)]
struct LawsOutput<'a> {
    fixture: String,
    passed: bool,
    report: &'a LawReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    observations: Option<&'a LawReport>,
    tasks: Vec<String>,
}

fn describe_failure(report: &LawReport) -> String {
    match report.first_failure() {
        Some(f) => format!(
            "counterexample: {:?} {} on {:?}: {:?} != {:?}",
            f.law, f.subject, f.witness, f.lhs, f.rhs
        ),
        None => String::new(),
    }
}

/// Runs the law suites on a table fixture or a prompt-category fixture.
pub fn laws(fixture: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let text = std::fs::read_to_string(fixture)
        .map_err(|e| CliError::Input(format!("{}: {e}", fixture.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", fixture.display())))?;
    let config = LawConfig::default();
    let bad = |e: String| CliError::Input(format!("{}: {e}", fixture.display()));
    let (report, observations, tasks) = if value.get("generators").is_some() {
        let fx: TableFixture = serde_json::from_value(value).map_err(|e| bad(e.to_string()))?;
        (
            fx.check(config).map_err(|e| bad(e.to_string()))?,
            None,
            Vec::new(),
        )
    } else {
        let fx: PromptFixture = serde_json::from_value(value).map_err(|e| bad(e.to_string()))?;
        let cat = fx.build_mock().map_err(|e| bad(e.to_string()))?;
        let report = cat.check_laws(config).map_err(|e| bad(e.to_string()))?;
        let obs = cat
            .check_terminal_initial(config)
            .map_err(|e| bad(e.to_string()))?;
        let mut tasks = Vec::new();
        for t in &fx.tasks {
            fx.task(&cat, &t.name)
                .map_err(|e| CliError::Check(format!("task {}: {e}", t.name)))?;
            tasks.push(t.name.clone());
        }
        (report, Some(obs), tasks)
    };
    let passed = report.passed();
    if let Some(dir) = out {
        let body = LawsOutput {
            fixture: fixture.display().to_string(),
            passed,
            report: &report,
            observations: observations.as_ref(),
            tasks,
        };
        write(&dir.join("laws.json"), &to_json(&body))?;
    }
    println!(
        "{}: {} law instances",
        report.subject,
        report.instances.len()
    );
    if passed {
        println!("laws: PASS");
        Ok(())
    } else {
        println!("laws: FAIL");
        Err(CliError::Check(describe_failure(&report)))
    }
}

// ---- pipeline ----

struct Pipeline {
    llm: Llm,
    binding: TaskBinding,
    replay: Option<Arc<ReplayBackend>>,
}

fn load_fixture(config: &RunConfig) -> Result<PromptFixture, CliError> {
    let parsed = match &config.fixture {
        Some(p) => PromptFixture::from_path(p),
        None => {
            let text = match config.task {
                TaskKind::Ideation => IDEATION_FIXTURE,
                TaskKind::Creativity => CREATIVITY_FIXTURE,
            };
            serde_json::from_str(text)
                .map_err(|e| promptcat::prompt::PromptError::Fixture(e.to_string()))
        }
    };
    parsed.map_err(|e| CliError::Input(e.to_string()))
}

fn live_backend(config: &RunConfig) -> Result<Arc<dyn Backend>, CliError> {
    // Checked before anything is sent.
    let mut live =
        LiveConfig::from_env().map_err(|e| CliError::Input(format!("live backend: {e}")))?;
    live.model = config.model.clone();
    live.max_in_flight = config.jobs;
    Ok(Arc::new(
        LiveBackend::new(live).map_err(|e| CliError::Input(e.to_string()))?,
    ))
}

fn build_pipeline(config: &RunConfig, record: bool) -> Result<Pipeline, CliError> {
    let fx = load_fixture(config)?;
    let mut replay = None;
    let backend: Arc<dyn Backend> = if record {
        let inner: Arc<dyn Backend> = match config.backend {
            BackendKind::Mock => Arc::new(
                fx.mock_backend()
                    .map_err(|e| CliError::Input(e.to_string()))?,
            ),
            BackendKind::Live => live_backend(config)?,
            BackendKind::Replay => {
                return Err(CliError::Input(
                    "record needs --backend mock or live".into(),
                ))
            }
        };
        let r = Arc::new(ReplayBackend::recording(
            &config.cache,
            &config.model,
            inner,
        ));
        replay = Some(r.clone());
        r
    } else {
        match config.backend {
            BackendKind::Mock => Arc::new(
                fx.mock_backend()
                    .map_err(|e| CliError::Input(e.to_string()))?,
            ),
            BackendKind::Live => live_backend(config)?,
            BackendKind::Replay => {
                if !config.cache.is_dir() {
                    return Err(CliError::Input(format!(
                        "replay cache {} does not exist",
                        config.cache.display()
                    )));
                }
                let r = Arc::new(ReplayBackend::strict(&config.cache, &config.model));
                replay = Some(r.clone());
                r
            }
        }
    };
    let mut llm = fx.llm(backend).with_seed(config.llm_seed);
    if let Some(k) = config.budget {
        llm = llm.with_budget(TokenBudget::new(k));
    }
    if let Some(n) = config.max_output_tokens {
        llm = llm.with_max_output(n);
    }
    let check_misses = |replay: &Option<Arc<ReplayBackend>>, e: String| match replay {
        Some(r) if !r.misses().is_empty() => CliError::CacheMiss(r.misses()),
        _ => CliError::Input(e),
    };
    let ambient = PromptCategory::new(
        &fx.name,
        llm.clone(),
        fx.objects.clone(),
        fx.arrows.clone(),
        fx.relations.clone(),
    )
    .map_err(|e| CliError::Input(e.to_string()))?;
    let spec = fx
        .tasks
        .first()
        .ok_or_else(|| CliError::Input(format!("fixture {} declares no task", fx.name)))?;
    let task = fx
        .task(&ambient, &spec.name)
        .map_err(|e| check_misses(&replay, e.to_string()))?;
    let binding =
        TaskBinding::new(task, config.task).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(Pipeline {
        llm,
        binding,
        replay,
    })
}

impl Pipeline {
    /// Cache misses anywhere in the run turn into exit code 3.
    fn finish(&self) -> Result<(), CliError> {
        match &self.replay {
            Some(r) if !r.misses().is_empty() => Err(CliError::CacheMiss(r.misses())),
            _ => Ok(()),
        }
    }
}

fn generate(config: &RunConfig, pipe: &Pipeline) -> Result<GenerationRun, CliError> {
    let template =
        MetaPromptTemplate::load(&config.template).map_err(|e| CliError::Input(e.to_string()))?;
    let items = ingest_corpus(
        config.corpus()?,
        config.task,
        config.sample_n()?,
        config.seed_sample()?,
    )
    .map_err(|e| CliError::Input(e.to_string()))?;
    Ok(generate_prompt_sets(
        &items,
        &pipe.binding,
        &template,
        &pipe.llm,
    ))
}

fn report_run(run: &GenerationRun) {
    let parsed = run
        .entries
        .iter()
        .filter(|e| !e.set.prompts.is_empty())
        .count();
    println!(
        "{}: {} entries generated, {} failed, {} prompts per entry",
        run.task.name(),
        parsed,
        run.failures.len(),
        run.entries.first().map_or(0, |e| e.set.prompts.len())
    );
    for f in &run.failures {
        println!("  failed {}: {}", f.item_id, f.error);
    }
}

/// Corpus to annotation pack: writes `generated.json`, `executions.json`
/// and `pack.json`.
pub fn metagen(config: &RunConfig, record: bool) -> Result<(), CliError> {
    // Fail on missing settings before any backend work.
    config.corpus()?;
    config.sample_n()?;
    config.seed_sample()?;
    let shuffle = config.seed_shuffle()?;
    let pipe = build_pipeline(config, record)?;
    let run = generate(config, &pipe)?;
    let execs = execute_all(&run, &pipe.llm, config.jobs);
    let pack = pack_generated(&run, &pipe.binding, &pipe.llm, shuffle, config.jobs);
    pipe.finish()?;
    write(&config.out.join("generated.json"), &run.to_json())?;
    write(&config.out.join("executions.json"), &to_json(&execs))?;
    write(&config.out.join("pack.json"), &pack.to_json())?;
    report_run(&run);
    report_executions(&execs);
    println!("wrote {}", config.out.join("pack.json").display());
    Ok(())
}

#[derive(Serialize)]
struct Execution<'a> {
    item_id: &'a str,
    prompts: &'a [String],
    outputs: Vec<ExecOutcome>,
}

fn execute_all<'a>(run: &'a GenerationRun, llm: &Llm, jobs: usize) -> Vec<Execution<'a>> {
    run.entries
        .iter()
        .map(|e| Execution {
            item_id: &e.item.id,
            prompts: &e.set.prompts,
            outputs: execute_prompt_set(&e.set, llm, jobs),
        })
        .collect()
}

fn report_executions(execs: &[Execution]) {
    let missing = execs
        .iter()
        .flat_map(|e| &e.outputs)
        .filter(|o| o.output().is_none())
        .count();
    println!(
        "executed {} entries, {} prompts without output",
        execs.len(),
        missing
    );
}

/// Runs every generated prompt on its context: writes `executions.json`.
pub fn execute(config: &RunConfig, generated: &Path) -> Result<(), CliError> {
    let run = GenerationRun::from_path(generated).map_err(|e| CliError::Input(e.to_string()))?;
    let pipe = build_pipeline(config, false)?;
    let execs = execute_all(&run, &pipe.llm, config.jobs);
    pipe.finish()?;
    write(&config.out.join("executions.json"), &to_json(&execs))?;
    report_executions(&execs);
    Ok(())
}

/// Generated prompt sets to an annotation pack: writes `pack.json`.
pub fn pack(config: &RunConfig, generated: &Path) -> Result<(), CliError> {
    let shuffle = config.seed_shuffle()?;
    let run = GenerationRun::from_path(generated).map_err(|e| CliError::Input(e.to_string()))?;
    if run.task != config.task {
        return Err(CliError::Input(format!(
            "{} holds {} prompts, not {}",
            generated.display(),
            run.task.name(),
            config.task.name()
        )));
    }
    let pipe = build_pipeline(config, false)?;
    let pack = pack_generated(&run, &pipe.binding, &pipe.llm, shuffle, config.jobs);
    pipe.finish()?;
    write(&config.out.join("pack.json"), &pack.to_json())?;
    println!(
        "packed {} entries into {}",
        pack.entries.len(),
        config.out.join("pack.json").display()
    );
    Ok(())
}

// ---- analysis ----

pub struct AnalyzeArgs {
    pub pack: PathBuf,
    pub rankings: PathBuf,
    pub out: PathBuf,
    pub k: usize,
    pub aggregation: Aggregation,
    pub mode: WilcoxonMode,
}

pub fn analyze_cmd(args: &AnalyzeArgs) -> Result<(), CliError> {
    let input = |e: promptcat::harness::HarnessError| CliError::Input(e.to_string());
    let pack = AnnotationPack::from_path(&args.pack).map_err(input)?;
    let records = ingest_rankings(&args.rankings, &pack).map_err(input)?;
    let options = AnalysisOptions {
        k: args.k,
        aggregation: args.aggregation,
        mode: args.mode,
    };
    let report = analyze(&records, &pack, options).map_err(input)?;
    report.write_bundle(&args.out).map_err(input)?;
    for t in &report.targets {
        let w = &t.wilcoxon;
        println!(
            "{}: top-{} meta share {:.3} (any {:.3}); W = {}, p = {:.6e} ({:?}, n = {})",
            t.target,
            args.k,
            t.topk_share_meta,
            t.topk_any_meta,
            w.w,
            w.p_value,
            w.method,
            w.n_effective
        );
    }
    if let Some(w) = &report.pooled {
        println!(
            "pooled: W = {}, p = {:.6e} ({:?}, n = {})",
            w.w, w.p_value, w.method, w.n_effective
        );
    }
    println!("wrote {}", args.out.join("summary.json").display());
    Ok(())
}
