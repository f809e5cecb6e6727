//! Command-line front end.
//!
//! Settings come from an optional `key = value` config file and are
//! overridden by flags of the same name (`--tau 0.3`). Relative paths in the
//! config file resolve against the file's directory.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::agents::{run_pipeline, PipelineConfig};
use crate::cocluster::{build_matrix, cocluster, ClusterReport, CoclusterConfig, TermDocMatrix};
use crate::corpus::{corpus_files, ingest};
use crate::eval::{precision_recall, Averaging, GoldStandard};
use crate::graphviz::{cluster_graph, ego_network, export_pajek};
use crate::kb::load_kb;
use crate::lexicon::{build_vocabulary, ExtractionLevel, ThresholdMode};
use crate::store::IndexStore;

pub const INDEX_STORE_FILE: &str = "index_store.json";
pub const BLACKBOARD_FILE: &str = "blackboard.xml";
pub const VOCABULARY_FILE: &str = "vocabulary.tsv";
pub const CLUSTER_REPORT_FILE: &str = "clusters.json";
pub const CLUSTER_GRAPH_FILE: &str = "clusters.net";

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "coindex", version, about = "Agent-driven indexing and term/document co-clustering")]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the indexing agents and write the index store and blackboard.
    Index,
    /// Co-cluster the indexed documents and write the cluster report.
    Cluster,
    /// Write a Pajek file for the cluster graph or a term's ego network.
    Export {
        #[arg(long)]
        term: Option<String>,
    },
    /// Print precision and recall against the gold file.
    Eval {
        /// Macro-average over documents instead of pooling counts.
        #[arg(long = "macro")]
        macro_average: bool,
    },
    /// index, cluster, export and (with a gold file) eval in order.
    Pipeline {
        #[arg(long)]
        term: Option<String>,
    },
}

#[derive(Debug, Args, Default)]
struct Overrides {
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long = "kb_path", global = true)]
    kb_path: Option<PathBuf>,
    #[arg(long = "corpus_dir", global = true)]
    corpus_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    tau: Option<String>,
    #[arg(long = "reference_year", global = true)]
    reference_year: Option<String>,
    #[arg(long = "threshold_mode", global = true)]
    threshold_mode: Option<String>,
    #[arg(long, global = true)]
    k: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long = "refine_passes", global = true)]
    refine_passes: Option<String>,
    #[arg(long, global = true)]
    level: Option<String>,
    #[arg(long = "out_dir", global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long = "gold_path", global = true)]
    gold_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub kb_path: Option<PathBuf>,
    pub corpus_dir: Option<PathBuf>,
    pub tau: f64,
    pub reference_year: Option<i32>,
    pub threshold_mode: ThresholdMode,
    pub k: usize,
    pub seed: u64,
    pub refine_passes: usize,
    pub level: ExtractionLevel,
    pub out_dir: PathBuf,
    pub gold_path: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            kb_path: None,
            corpus_dir: None,
            tau: 0.2,
            reference_year: None,
            threshold_mode: ThresholdMode::default(),
            k: 2,
            seed: 0,
            refine_passes: 1,
            level: ExtractionLevel::Lexical,
            out_dir: PathBuf::from("out"),
            gold_path: None,
        }
    }
}

/// Failure of a command: a usage problem (exit 2) or a domain error
/// reported with the module it came from (exit 1).
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain { module: &'static str, message: String },
}

impl CliError {
    fn domain(module: &'static str, err: impl std::fmt::Display) -> Self {
        CliError::Domain {
            module,
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Domain { .. } => EXIT_DOMAIN,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Domain { module, message } => write!(f, "error: {module}: {message}"),
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid value `{value}` for `{key}`")))
}

impl Config {
    /// Applies one `key = value` setting. Relative paths are joined to `base`.
    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<(), CliError> {
        let path = || base.join(value.trim());
        match key {
            "kb_path" => self.kb_path = Some(path()),
            "corpus_dir" => self.corpus_dir = Some(path()),
            "out_dir" => self.out_dir = path(),
            "gold_path" => self.gold_path = Some(path()),
            "tau" => self.tau = parse_value(key, value)?,
            "reference_year" => self.reference_year = Some(parse_value(key, value)?),
            "threshold_mode" => self.threshold_mode = parse_value(key, value)?,
            "k" => self.k = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "refine_passes" => self.refine_passes = parse_value(key, value)?,
            "level" => self.level = parse_value(key, value)?,
            _ => return Err(CliError::Usage(format!("unknown configuration key `{key}`"))),
        }
        Ok(())
    }

    /// Parses config file text; `#` starts a comment line.
    pub fn apply_file_text(&mut self, text: &str, base: &Path) -> Result<(), CliError> {
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", no + 1)))?;
            self.set(key.trim(), value.trim(), base)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(CliError::Usage(format!("tau = {} is outside [0, 1]", self.tau)));
        }
        if self.k < 1 {
            return Err(CliError::Usage("k must be at least 1".into()));
        }
        if self.refine_passes < 1 {
            return Err(CliError::Usage("refine_passes must be at least 1".into()));
        }
        if self.level == ExtractionLevel::Pragmatic {
            return Err(CliError::Usage("the pragmatic extraction level is not implemented".into()));
        }
        Ok(())
    }

    fn require<'a, T>(value: &'a Option<T>, key: &str) -> Result<&'a T, CliError> {
        value
            .as_ref()
            .ok_or_else(|| CliError::Usage(format!("`{key}` is not set")))
    }

    fn store_path(&self) -> PathBuf {
        self.out_dir.join(INDEX_STORE_FILE)
    }
}

fn build_config(overrides: &Overrides) -> Result<Config, CliError> {
    let mut config = Config::default();
    if let Some(path) = &overrides.config {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.apply_file_text(&text, base)?;
    }
    let here = Path::new("");
    let paths = [
        ("kb_path", &overrides.kb_path),
        ("corpus_dir", &overrides.corpus_dir),
        ("out_dir", &overrides.out_dir),
        ("gold_path", &overrides.gold_path),
    ];
    for (key, value) in paths {
        if let Some(v) = value {
            config.set(key, &v.to_string_lossy(), here)?;
        }
    }
    let values = [
        ("tau", &overrides.tau),
        ("reference_year", &overrides.reference_year),
        ("threshold_mode", &overrides.threshold_mode),
        ("k", &overrides.k),
        ("seed", &overrides.seed),
        ("refine_passes", &overrides.refine_passes),
        ("level", &overrides.level),
    ];
    for (key, value) in values {
        if let Some(v) = value {
            config.set(key, v, here)?;
        }
    }
    config.validate()?;
    Ok(config)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::domain("io", format!("{}: {e}", path.display())))
}

fn ensure_out_dir(config: &Config) -> Result<(), CliError> {
    fs::create_dir_all(&config.out_dir)
        .map_err(|e| CliError::domain("io", format!("{}: {e}", config.out_dir.display())))
}

pub fn cmd_index(config: &Config) -> Result<IndexStore, CliError> {
    let kb_path = Config::require(&config.kb_path, "kb_path")?;
    let corpus_dir = Config::require(&config.corpus_dir, "corpus_dir")?;
    let reference_year = *Config::require(&config.reference_year, "reference_year")?;
    let kb = load_kb(kb_path).map_err(|e| CliError::domain("kb", e))?;
    let files = corpus_files(corpus_dir).map_err(|e| CliError::domain("corpus", e))?;
    let corpus = ingest(&files).map_err(|e| CliError::domain("corpus", e))?;
    ensure_out_dir(config)?;
    let pipeline = PipelineConfig {
        tau: config.tau,
        reference_year,
        level: config.level,
        blackboard_path: Some(config.out_dir.join(BLACKBOARD_FILE)),
    };
    let (docs, board) = run_pipeline(&kb, &corpus, &pipeline).map_err(|e| CliError::domain("agents", e))?;
    // rewritten here as well so an all-discarded corpus still leaves a file
    write_file(&config.out_dir.join(BLACKBOARD_FILE), &board.to_xml())?;
    let store = IndexStore::new(docs);
    store
        .save(config.store_path())
        .map_err(|e| CliError::domain("store", e))?;
    Ok(store)
}

fn load_store(config: &Config) -> Result<IndexStore, CliError> {
    IndexStore::load(config.store_path()).map_err(|e| CliError::domain("store", e))
}

fn matrix_from_store(config: &Config, store: &IndexStore) -> Result<TermDocMatrix, CliError> {
    let vocab = build_vocabulary(&store.documents, config.threshold_mode)
        .map_err(|e| CliError::domain("lexicon", e))?;
    ensure_out_dir(config)?;
    write_file(&config.out_dir.join(VOCABULARY_FILE), &vocab.to_tsv())?;
    build_matrix(&vocab, &store.documents).map_err(|e| CliError::domain("cocluster", e))
}

pub fn cmd_cluster(config: &Config) -> Result<ClusterReport, CliError> {
    let store = load_store(config)?;
    let matrix = matrix_from_store(config, &store)?;
    let cc_config = CoclusterConfig {
        k: config.k,
        seed: config.seed,
        refine_passes: config.refine_passes,
    };
    let result = cocluster(&matrix, &cc_config).map_err(|e| CliError::domain("cocluster", e))?;
    let report = ClusterReport::new(&matrix, &result);
    write_file(&config.out_dir.join(CLUSTER_REPORT_FILE), &report.to_json())?;
    Ok(report)
}

/// Pajek file name for an ego network.
pub fn ego_file_name(term: &str) -> String {
    let safe: String = term
        .chars()
        .map(|c| if c.is_alphanumeric() || c == '-' { c } else { '_' })
        .collect();
    format!("ego_{safe}.net")
}

pub fn cmd_export(config: &Config, term: Option<&str>) -> Result<PathBuf, CliError> {
    let store = load_store(config)?;
    let matrix = matrix_from_store(config, &store)?;
    let (graph, path) = match term {
        Some(term) => (
            ego_network(&matrix, term).map_err(|e| CliError::domain("graphviz", e))?,
            config.out_dir.join(ego_file_name(term)),
        ),
        None => {
            let cc_config = CoclusterConfig {
                k: config.k,
                seed: config.seed,
                refine_passes: config.refine_passes,
            };
            let result = cocluster(&matrix, &cc_config).map_err(|e| CliError::domain("cocluster", e))?;
            (cluster_graph(&matrix, &result), config.out_dir.join(CLUSTER_GRAPH_FILE))
        }
    };
    export_pajek(&graph, &path).map_err(|e| CliError::domain("graphviz", e))?;
    Ok(path)
}

pub fn cmd_eval(config: &Config, averaging: Averaging) -> Result<(f64, f64), CliError> {
    let gold_path = Config::require(&config.gold_path, "gold_path")?;
    let gold = GoldStandard::load(gold_path).map_err(|e| CliError::domain("eval", e))?;
    let store = load_store(config)?;
    let pr = precision_recall(&store.produced_terms(), &gold, averaging)
        .map_err(|e| CliError::domain("eval", e))?;
    Ok((pr.precision, pr.recall))
}

fn print_pr(out: &mut dyn Write, (precision, recall): (f64, f64)) -> Result<(), CliError> {
    writeln!(out, "precision\t{precision}\nrecall\t{recall}").map_err(|e| CliError::domain("io", e))
}

fn execute(command: &Command, config: &Config, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Index => cmd_index(config).map(drop),
        Command::Cluster => cmd_cluster(config).map(drop),
        Command::Export { term } => cmd_export(config, term.as_deref()).map(drop),
        Command::Eval { macro_average } => {
            let averaging = if *macro_average {
                Averaging::Macro
            } else {
                Averaging::Micro
            };
            print_pr(out, cmd_eval(config, averaging)?)
        }
        Command::Pipeline { term } => {
            cmd_index(config)?;
            cmd_cluster(config)?;
            cmd_export(config, None)?;
            if let Some(term) = term {
                cmd_export(config, Some(term))?;
            }
            if config.gold_path.is_some() {
                print_pr(out, cmd_eval(config, Averaging::Micro)?)?;
            }
            Ok(())
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
/// Data goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let result = build_config(&cli.overrides).and_then(|config| execute(&cli.command, &config, out));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_and_defaults() {
        let mut config = Config::default();
        config
            .apply_file_text(
                "# mini corpus\nkb_path = kb.json\ntau = 0.3\nthreshold_mode = top_n:10\nk=3\nlevel = semantic\n",
                Path::new("/data"),
            )
            .unwrap();
        assert_eq!(config.kb_path, Some(PathBuf::from("/data/kb.json")));
        assert_eq!(config.tau, 0.3);
        assert_eq!(config.threshold_mode, ThresholdMode::TopN(10));
        assert_eq!(config.k, 3);
        assert_eq!(config.level, ExtractionLevel::Semantic);
        assert_eq!(config.refine_passes, 1);
        assert_eq!(config.seed, 0);
    }

    #[test]
    fn config_rejects_unknown_keys_and_bad_values() {
        let mut config = Config::default();
        assert!(matches!(
            config.apply_file_text("colour = blue", Path::new("")),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(config.set("k", "two", Path::new("")), Err(CliError::Usage(_))));
        config.tau = 1.5;
        assert!(matches!(config.validate(), Err(CliError::Usage(_))));
    }

    #[test]
    fn pragmatic_level_is_a_usage_error() {
        let mut config = Config::default();
        config.set("level", "pragmatic", Path::new("")).unwrap();
        assert!(matches!(config.validate(), Err(CliError::Usage(_))));
    }

    #[test]
    fn missing_settings_exit_with_usage_code() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(["coindex", "index"], &mut out, &mut err);
        assert_eq!(code, EXIT_USAGE);
        assert!(String::from_utf8(err).unwrap().contains("kb_path"));
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        assert_eq!(run(["coindex", "frobnicate"], &mut out, &mut err), EXIT_USAGE);
    }

    #[test]
    fn ego_file_names_are_sanitized() {
        assert_eq!(ego_file_name("america"), "ego_america.net");
        assert_eq!(ego_file_name("a/b"), "ego_a_b.net");
    }
}
