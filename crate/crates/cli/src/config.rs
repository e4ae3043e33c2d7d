use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use promptcat::meta::TaskKind;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Mock,
    Replay,
    Live,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum TaskArg {
    Ideation,
    Creativity,
}

impl From<TaskArg> for TaskKind {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Ideation => TaskKind::Ideation,
            TaskArg::Creativity => TaskKind::Creativity,
        }
    }
}

/// Settings shared by the pipeline commands. Flags override the file.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML or JSON configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub backend: Option<BackendKind>,
    #[arg(long, value_enum)]
    pub task: Option<TaskArg>,
    /// `full`, `short`, or a template file.
    #[arg(long)]
    pub template: Option<String>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub sample_n: Option<usize>,
    #[arg(long)]
    pub seed_sample: Option<u64>,
    #[arg(long)]
    pub seed_shuffle: Option<u64>,
    /// Token budget k (prompt plus output).
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Prompt-category fixture with the task and mock rules.
    #[arg(long)]
    pub fixture: Option<PathBuf>,
    /// Replay cache directory.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    backend: Option<BackendKind>,
    task: Option<TaskArg>,
    template: Option<String>,
    corpus: Option<PathBuf>,
    sample_n: Option<usize>,
    seed_sample: Option<u64>,
    seed_shuffle: Option<u64>,
    budget: Option<usize>,
    max_output_tokens: Option<usize>,
    jobs: Option<usize>,
    out: Option<PathBuf>,
    fixture: Option<PathBuf>,
    cache: Option<PathBuf>,
    model: Option<String>,
    llm_seed: Option<u64>,
}

/// Fully resolved settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub backend: BackendKind,
    pub task: TaskKind,
    pub template: String,
    pub corpus: Option<PathBuf>,
    pub sample_n: Option<usize>,
    pub seed_sample: Option<u64>,
    pub seed_shuffle: Option<u64>,
    pub budget: Option<usize>,
    pub max_output_tokens: Option<usize>,
    pub jobs: usize,
    pub out: PathBuf,
    pub fixture: Option<PathBuf>,
    pub cache: PathBuf,
    pub model: String,
    pub llm_seed: u64,
}

fn read_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

impl RunConfig {
    /// Merges flags over the config file. Relative paths in the file are
    /// taken relative to the file's directory.
    pub fn resolve(args: &RunArgs) -> Result<Self, CliError> {
        let (file, base) = match &args.config {
            Some(p) => (
                read_file_config(p)?,
                p.parent().map(Path::to_path_buf).unwrap_or_default(),
            ),
            None => (FileConfig::default(), PathBuf::new()),
        };
        let rel = |p: Option<PathBuf>| p.map(|p| if p.is_absolute() { p } else { base.join(p) });
        let task = args
            .task
            .or(file.task)
            .ok_or_else(|| CliError::Input("no task given (--task ideation|creativity)".into()))?;
        Ok(Self {
            backend: args.backend.or(file.backend).unwrap_or(BackendKind::Mock),
            task: task.into(),
            template: args
                .template
                .clone()
                .or(file.template)
                .unwrap_or_else(|| "full".into()),
            corpus: args.corpus.clone().or(rel(file.corpus)),
            sample_n: args.sample_n.or(file.sample_n),
            seed_sample: args.seed_sample.or(file.seed_sample),
            seed_shuffle: args.seed_shuffle.or(file.seed_shuffle),
            budget: args.budget.or(file.budget),
            max_output_tokens: file.max_output_tokens,
            jobs: args.jobs.or(file.jobs).unwrap_or(4).max(1),
            out: args
                .out
                .clone()
                .or(rel(file.out))
                .unwrap_or_else(|| PathBuf::from("out")),
            fixture: args.fixture.clone().or(rel(file.fixture)),
            cache: args
                .cache
                .clone()
                .or(rel(file.cache))
                .unwrap_or_else(|| PathBuf::from("replay")),
            model: args
                .model
                .clone()
                .or(file.model)
                .unwrap_or_else(|| promptcat::backend::live::DEFAULT_MODEL.to_string()),
            llm_seed: file.llm_seed.unwrap_or(0),
        })
    }

    pub fn corpus(&self) -> Result<&Path, CliError> {
        self.corpus
            .as_deref()
            .ok_or_else(|| CliError::Input("no corpus given (--corpus)".into()))
    }

    pub fn sample_n(&self) -> Result<usize, CliError> {
        self.sample_n
            .ok_or_else(|| CliError::Input("no sample size given (--sample-n)".into()))
    }

    pub fn seed_sample(&self) -> Result<u64, CliError> {
        self.seed_sample
            .ok_or_else(|| CliError::Input("a sampling seed is required (--seed-sample)".into()))
    }

    pub fn seed_shuffle(&self) -> Result<u64, CliError> {
        self.seed_shuffle
            .ok_or_else(|| CliError::Input("a shuffling seed is required (--seed-shuffle)".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_paths_are_relative_to_the_file_and_flags_win() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.toml");
        std::fs::write(
            &cfg,
            "task = \"creativity\"\ncorpus = \"data/c.txt\"\njobs = 2\nseed_sample = 4\n",
        )
        .unwrap();
        let args = RunArgs {
            config: Some(cfg),
            jobs: Some(8),
            ..Default::default()
        };
        let c = RunConfig::resolve(&args).unwrap();
        assert_eq!(c.task, TaskKind::Creativity);
        assert_eq!(c.corpus().unwrap(), dir.path().join("data/c.txt"));
        assert_eq!((c.jobs, c.seed_sample().unwrap()), (8, 4));
        assert_eq!(
            (c.backend, c.template.as_str()),
            (BackendKind::Mock, "full")
        );
        assert!(c.seed_shuffle().is_err());
    }

    #[test]
    fn json_configs_and_missing_task() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.json");
        std::fs::write(
            &cfg,
            r#"{"task": "ideation", "backend": "replay", "cache": "/abs/cache"}"#,
        )
        .unwrap();
        let c = RunConfig::resolve(&RunArgs {
            config: Some(cfg),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(
            (c.task, c.backend),
            (TaskKind::Ideation, BackendKind::Replay)
        );
        assert_eq!(c.cache, PathBuf::from("/abs/cache"));
        assert!(matches!(
            RunConfig::resolve(&RunArgs::default()),
            Err(CliError::Input(_))
        ));
    }
}
