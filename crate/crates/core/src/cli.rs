//! Command-line front end.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::Serialize;

use crate::data::{
    parse_checkins, parse_friendships, parse_timestamp, read_canonical, synth_dataset, write_canonical, Dataset,
    IngestConfig, InputFormat, PoiId, SynthConfig,
};
use crate::error::{Error, Result};
use crate::eval::{
    cross_validate, read_report_csv, read_sweep_csv, render_tables, write_report, write_sweep, CvConfig, REPORT_CSV,
    REPORT_TXT, SWEEP_CSV,
};
use crate::features::{Constraint, FeatureConfig, FeatureTables};
use crate::generate::{generate, sequence_score, GenRequest, GeneratedSequence, Scoring};
use crate::model::{load_checkpoint, save_checkpoint, AnyModel, Checkpoint, ModelKind};
use crate::numerics::{derive_seed, ClipMode};
use crate::recommend::{train_model, Builtin, Method, MethodKind, MethodSettings, Preset, Query};

/// Environment variable naming the default dataset directory.
pub const DATA_DIR_ENV: &str = "CAPS_DATA_DIR";

#[derive(Debug, Parser)]
#[command(name = "caps", version, about = "Context-aware POI sequence modeling")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// `key = value` file; keys are long flag names of the subcommand and
    /// explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a check-in CSV into a canonical dataset directory.
    Ingest(IngestArgs),
    /// Build feature tables and export them as JSON.
    Features(FeaturesArgs),
    /// Train one network and write a checkpoint plus its loss curve.
    Train(TrainArgs),
    /// Generate ranked POI sequences as JSON lines.
    Generate(GenerateArgs),
    /// Cross-validate methods and write report files.
    Evaluate(EvaluateArgs),
    /// Write a synthetic check-in log and its canonical dataset.
    Synth(SynthArgs),
    /// Re-render text tables and plot data from an evaluation directory.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct DataArg {
    /// Canonical dataset directory.
    #[arg(long, env = DATA_DIR_ENV)]
    data: PathBuf,
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// Check-in CSV.
    #[arg(long)]
    checkins: PathBuf,
    /// Friendship edge list CSV.
    #[arg(long)]
    friends: Option<PathBuf>,
    /// Column layout: `weeplaces` or `gowalla`.
    #[arg(long, default_value = "weeplaces")]
    format: InputFormat,
    /// Output dataset directory.
    #[arg(long)]
    out: PathBuf,
    /// Drop users with fewer check-ins (default 25).
    #[arg(long)]
    min_checkins: Option<usize>,
    /// Fit a log-normal speed model for travel times.
    #[arg(long)]
    lognormal_travel: bool,
}

#[derive(Debug, Args)]
struct FeatureArgs {
    /// Comma-separated constraints applied to the consolidated score.
    #[arg(long, value_delimiter = ',')]
    constraints: Option<Vec<Constraint>>,
}

impl FeatureArgs {
    fn config(&self) -> FeatureConfig {
        match &self.constraints {
            Some(c) => FeatureConfig { constraints: c.clone() },
            None => FeatureConfig::default(),
        }
    }
}

#[derive(Debug, Args)]
struct FeaturesArgs {
    #[command(flatten)]
    data: DataArg,
    #[command(flatten)]
    features: FeatureArgs,
    /// Feature tables JSON file.
    #[arg(long)]
    out: PathBuf,
    /// Recorded in the snapshot header.
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Clone, Debug)]
struct MethodList(Vec<MethodKind>);

fn parse_methods(s: &str) -> std::result::Result<MethodList, String> {
    MethodKind::parse_list(s).map(MethodList)
}

fn parse_clip_mode(s: &str) -> std::result::Result<ClipMode, String> {
    match s {
        "global-norm" => Ok(ClipMode::GlobalNorm),
        "per-element" => Ok(ClipMode::PerElement),
        _ => Err(format!("unknown clip mode {s:?} (expected global-norm or per-element)")),
    }
}

fn parse_scoring(s: &str) -> std::result::Result<Scoring, String> {
    match s {
        "preference" => Ok(Scoring::Preference),
        "consolidated" => Ok(Scoring::Consolidated),
        _ => Err(format!("unknown scoring {s:?} (expected preference or consolidated)")),
    }
}

#[derive(Debug, Args)]
struct SettingsArgs {
    /// Starting hyperparameters: `full` or `desk`.
    #[arg(long, default_value = "full")]
    preset: Preset,
    /// Learning rate.
    #[arg(long)]
    lr: Option<f64>,
    /// Passes over the training sessions.
    #[arg(long)]
    epochs: Option<usize>,
    /// Sequences per gradient step.
    #[arg(long)]
    batch_size: Option<usize>,
    /// Gradient clipping threshold.
    #[arg(long)]
    clip: Option<f64>,
    /// `global-norm` or `per-element`.
    #[arg(long, value_parser = parse_clip_mode)]
    clip_mode: Option<ClipMode>,
    /// POI embedding width of both network families.
    #[arg(long)]
    embed_dim: Option<usize>,
    /// Units per RNN layer.
    #[arg(long)]
    rnn_hidden: Option<usize>,
    /// Stacked RNN layers.
    #[arg(long)]
    rnn_layers: Option<usize>,
    /// LSTM cell width.
    #[arg(long)]
    lstm_hidden: Option<usize>,
    /// Sampled rollouts per query for neural models.
    #[arg(long)]
    candidates: Option<usize>,
    /// `preference` or `consolidated`.
    #[arg(long, value_parser = parse_scoring)]
    scoring: Option<Scoring>,
    /// Additive smoothing of Markov transition counts.
    #[arg(long)]
    markov_smoothing: Option<f64>,
    /// Initial search radius of the popularity baseline.
    #[arg(long)]
    popularity_radius_km: Option<f64>,
    /// Maximum hop distance of Apriori trips.
    #[arg(long)]
    epsilon_km: Option<f64>,
    /// Apriori trip time budget.
    #[arg(long)]
    budget_hours: Option<f64>,
    /// Apriori beam width; 0 enumerates exhaustively.
    #[arg(long)]
    beam: Option<usize>,
    /// Region radius of the HITS baseline.
    #[arg(long)]
    hits_radius_km: Option<f64>,
}

impl SettingsArgs {
    fn settings(&self) -> Result<MethodSettings> {
        let mut s = MethodSettings::preset(self.preset);
        let sgd = &mut s.train.sgd;
        set(&mut sgd.learning_rate, self.lr);
        set(&mut sgd.epochs, self.epochs);
        set(&mut sgd.batch_size, self.batch_size);
        set(&mut sgd.clip, self.clip);
        set(&mut sgd.clip_mode, self.clip_mode);
        sgd.validate()?;
        if let Some(e) = self.embed_dim {
            s.rnn.embed_dim = e;
            s.lstm.embed_dim = e;
        }
        set(&mut s.rnn.hidden, self.rnn_hidden);
        set(&mut s.rnn.layers, self.rnn_layers);
        set(&mut s.lstm.hidden, self.lstm_hidden);
        set(&mut s.candidates, self.candidates);
        set(&mut s.scoring, self.scoring);
        set(&mut s.markov_smoothing, self.markov_smoothing);
        set(&mut s.popularity_radius_km, self.popularity_radius_km);
        set(&mut s.apriori.epsilon_km, self.epsilon_km);
        if let Some(h) = self.budget_hours {
            s.apriori.budget_secs = h * 3600.0;
        }
        if let Some(b) = self.beam {
            s.apriori.beam = (b > 0).then_some(b);
        }
        set(&mut s.hits.radius_km, self.hits_radius_km);
        if s.rnn.layers == 0 || s.rnn.hidden == 0 || s.lstm.hidden == 0 || s.rnn.embed_dim == 0 {
            return Err(Error::Config("network sizes must be positive".into()));
        }
        if s.candidates == 0 {
            return Err(Error::Config("candidates must be at least 1".into()));
        }
        Ok(s)
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArg,
    /// plain-rnn, caps-rnn, lstm or caps-lstm.
    #[arg(long, default_value = "caps-lstm")]
    model: ModelKind,
    /// Checkpoint path; a `.json` sidecar is written next to it.
    #[arg(long)]
    out: PathBuf,
    /// Loss curve CSV (default: checkpoint path with `.loss.csv`).
    #[arg(long)]
    loss_csv: Option<PathBuf>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[command(flatten)]
    settings: SettingsArgs,
    #[command(flatten)]
    features: FeatureArgs,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[command(flatten)]
    data: DataArg,
    /// Trained network; required for neural methods.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Baseline to run when no checkpoint is given.
    #[arg(long)]
    method: Option<MethodKind>,
    /// User id; omitted means population preferences.
    #[arg(long)]
    user: Option<String>,
    /// Starting POI id.
    #[arg(long)]
    start: String,
    /// Arrival at the start: UTC seconds or an ISO-8601 datetime.
    #[arg(long)]
    time: String,
    #[arg(long, default_value_t = 25)]
    length: usize,
    /// Sequences to emit.
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Drop already visited POIs while sampling.
    #[arg(long)]
    no_repeat: bool,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    settings: SettingsArgs,
    #[command(flatten)]
    features: FeatureArgs,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    data: DataArg,
    /// Comma-separated method tags, or `all`.
    #[arg(long, default_value = "all", value_parser = parse_methods)]
    models: MethodList,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Generation lengths for the diversity and displacement sweep.
    #[arg(long, value_delimiter = ',')]
    lengths: Vec<usize>,
    /// Output directory for report files.
    #[arg(long)]
    out: PathBuf,
    /// Add the unnormalised dissimilar-pair count to the text table.
    #[arg(long)]
    diversity_raw: bool,
    #[command(flatten)]
    settings: SettingsArgs,
    #[command(flatten)]
    features: FeatureArgs,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 60)]
    users: usize,
    #[arg(long, default_value_t = 200)]
    pois: usize,
    /// Length of the simulated period.
    #[arg(long, default_value_t = 30)]
    days: usize,
    /// Drop users with fewer check-ins (default 25).
    #[arg(long)]
    min_checkins: Option<usize>,
    /// Output directory for the CSV log and the canonical dataset.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Directory holding `report.csv` and optionally `sweep.csv`.
    #[arg(long)]
    input: PathBuf,
    /// Output directory (default: the input directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Add the unnormalised dissimilar-pair count to the text table.
    #[arg(long)]
    diversity_raw: bool,
}

/// Run the command line and return the process exit code: 0 success,
/// 1 usage or configuration error, 2 data error, 3 numerical failure.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match parse(&argv) {
        Ok(cli) => cli,
        Err(code) => return code,
    };
    let pool = match cli.threads {
        Some(0) => {
            eprintln!("error: --threads must be at least 1");
            return 1;
        }
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn clap_exit(e: clap::Error) -> i32 {
    let _ = e.print();
    if e.use_stderr() {
        1
    } else {
        0
    }
}

fn parse(argv: &[OsString]) -> std::result::Result<Cli, i32> {
    let cli = Cli::try_parse_from(argv).map_err(clap_exit)?;
    let Some(path) = cli.config.clone() else {
        return Ok(cli);
    };
    let merged = merge_config(argv, &path, subcommand_name(&cli.command)).map_err(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    })?;
    Cli::try_parse_from(&merged).map_err(clap_exit)
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Ingest(_) => "ingest",
        Command::Features(_) => "features",
        Command::Train(_) => "train",
        Command::Generate(_) => "generate",
        Command::Evaluate(_) => "evaluate",
        Command::Synth(_) => "synth",
        Command::Report(_) => "report",
    }
}

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", n + 1)));
        }
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key `{key}`", n + 1)));
        }
    }
    Ok(out)
}

/// Append config values as flags for every key not given on the command line.
fn merge_config(argv: &[OsString], path: &Path, sub: &str) -> Result<Vec<OsString>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let entries = parse_config_text(&text)?;
    let mut cmd = Cli::command();
    cmd.build();
    let sub_cmd = cmd.find_subcommand(sub).expect("parsed subcommand exists");
    let mut out = argv.to_vec();
    for (key, value) in entries {
        if key == "config" {
            return Err(Error::Config("`config` cannot be set from a config file".into()));
        }
        let arg = sub_cmd
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| Error::Config(format!("unknown key `{key}` for `{sub}`")))?;
        let flag = format!("--{key}");
        let given = argv.iter().any(|a| {
            let a = a.to_string_lossy();
            a == flag || a.starts_with(&format!("{flag}="))
        });
        if given {
            continue;
        }
        if arg.get_action().takes_values() {
            out.push(flag.into());
            out.push(value.into());
        } else {
            match value.as_str() {
                "true" => out.push(flag.into()),
                "false" => {}
                _ => return Err(Error::Config(format!("key `{key}` expects true or false, got `{value}`"))),
            }
        }
    }
    Ok(out)
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Ingest(a) => ingest(a),
        Command::Features(a) => features(a),
        Command::Train(a) => train(a),
        Command::Generate(a) => generate_cmd(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Synth(a) => synth(a),
        Command::Report(a) => report(a),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn ingest(a: IngestArgs) -> Result<()> {
    let parsed = parse_checkins(&a.checkins, a.format)?;
    let friends = match &a.friends {
        Some(p) => parse_friendships(p)?,
        None => Vec::new(),
    };
    let mut cfg = IngestConfig { lognormal_travel: a.lognormal_travel, ..Default::default() };
    set(&mut cfg.min_checkins, a.min_checkins);
    let data = Dataset::from_records(&parsed.records, &friends, &cfg);
    if data.sessions.is_empty() {
        return Err(Error::Invalid("no user has enough check-ins".into()));
    }
    write_canonical(&a.out, &data, None)?;
    eprintln!(
        "{} users, {} pois, {} sessions, {} visits -> {}",
        data.num_users(),
        data.num_pois(),
        data.sessions.len(),
        data.total_visits(),
        a.out.display()
    );
    Ok(())
}

fn features(a: FeaturesArgs) -> Result<()> {
    let data = read_canonical(&a.data.data)?;
    let tables = FeatureTables::build(&data, &a.features.config());
    tables.save(&a.out, Some(a.seed))
}

fn train(a: TrainArgs) -> Result<()> {
    let data = read_canonical(&a.data.data)?;
    let settings = a.settings.settings()?;
    let tables = FeatureTables::build(&data, &a.features.config());
    let (model, curve) = train_model(a.model, &settings, &data, &tables, a.seed)?;
    let meta = Checkpoint::new(&model, settings.train.clone(), a.seed, &data.encodings, curve.clone())?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    save_checkpoint(&a.out, &model, &meta)?;
    let loss_path = a.loss_csv.unwrap_or_else(|| a.out.with_extension("loss.csv"));
    let mut w = create(&loss_path)?;
    let io = |e| Error::io(&loss_path, e);
    writeln!(w, "# caps train model={} seed={}", a.model, a.seed).map_err(io)?;
    writeln!(w, "epoch,loss").map_err(io)?;
    for (i, l) in curve.iter().enumerate() {
        writeln!(w, "{i},{l}").map_err(io)?;
    }
    w.flush().map_err(io)?;
    eprintln!(
        "{}: loss {} -> {}",
        a.model,
        curve.first().copied().unwrap_or(f64::NAN),
        curve.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

#[derive(Serialize)]
struct SequenceLine<'a> {
    user: Option<&'a str>,
    rank: usize,
    score: f64,
    pois: Vec<&'a str>,
    categories: Vec<&'a str>,
    /// Distance from the previous POI; 0 for the first.
    displacement_km: Vec<f64>,
}

fn generate_cmd(a: GenerateArgs) -> Result<()> {
    let data = read_canonical(&a.data.data)?;
    let user = match &a.user {
        Some(name) => Some(data.encodings.user(name).ok_or_else(|| Error::UnknownUser(name.clone()))?),
        None => None,
    };
    let start = data.encodings.poi(&a.start).ok_or_else(|| Error::UnknownPoi(a.start.clone()))?;
    let time = a
        .time
        .parse::<i64>()
        .ok()
        .or_else(|| parse_timestamp(&a.time))
        .ok_or_else(|| Error::Config(format!("cannot parse time `{}`", a.time)))?;
    let settings = a.settings.settings()?;
    let tables = Arc::new(FeatureTables::build(&data, &a.features.config()));
    let sequences: Vec<GeneratedSequence> = match (&a.checkpoint, a.method) {
        (Some(path), None | Some(MethodKind::Model(_))) => {
            let (model, meta) = load_checkpoint(path, Some(&data.encodings))?;
            if let Some(MethodKind::Model(k)) = a.method {
                if k != meta.kind {
                    return Err(Error::Config(format!("checkpoint holds {} but --method is {k}", meta.kind)));
                }
            }
            let req = GenRequest {
                length: a.length,
                candidates: settings.candidates.max(a.k),
                k: a.k,
                no_repeat: a.no_repeat,
                scoring: settings.scoring,
                ..GenRequest::new(user, start, time)
            };
            match &model {
                AnyModel::Rnn(m) => generate(m, &tables, &req, a.seed)?,
                AnyModel::Lstm(m) => generate(m, &tables, &req, a.seed)?,
            }
        }
        (None, Some(kind @ MethodKind::Model(_))) => {
            return Err(Error::Config(format!("--method {kind} needs --checkpoint")));
        }
        (Some(_), Some(kind)) => {
            return Err(Error::Config(format!("--checkpoint cannot be combined with --method {kind}")));
        }
        (None, None) => return Err(Error::Config("give --checkpoint or --method".into())),
        (None, Some(kind)) => {
            let builtin = Builtin { kind, settings: Arc::new(settings.clone()) };
            let rec = builtin.fit(&data, Arc::clone(&tables), a.seed)?;
            let user_id = user.unwrap_or(crate::data::UserId(0));
            let pois = rec.recommend(&Query { user: user_id, start, start_time: time, length: a.length }, derive_seed(a.seed, &[0]))?;
            let mut arrivals = vec![time];
            for w in pois.windows(2) {
                let t = *arrivals.last().expect("non-empty");
                arrivals.push(crate::generate::advance(&tables, t, w[0], w[1]));
            }
            let score = sequence_score(&tables, user, &pois, &arrivals, settings.scoring);
            vec![GeneratedSequence { probabilities: vec![1.0; pois.len()], pois, arrivals, score, index: 0 }]
        }
    };
    let mut out: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    let io_path = a.out.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
    for (rank, s) in sequences.iter().enumerate() {
        let line = SequenceLine {
            user: user.map(|u| data.encodings.user_name(u)),
            rank: rank + 1,
            score: s.score,
            pois: s.pois.iter().map(|&p| data.encodings.poi_name(p)).collect(),
            categories: s.pois.iter().map(|&p| data.encodings.category_name(data.poi(p).category)).collect(),
            displacement_km: step_distances(&data, &s.pois),
        };
        serde_json::to_writer(&mut out, &line)?;
        writeln!(out).map_err(|e| Error::io(&io_path, e))?;
    }
    out.flush().map_err(|e| Error::io(&io_path, e))
}

fn step_distances(data: &Dataset, pois: &[PoiId]) -> Vec<f64> {
    let mut out = Vec::with_capacity(pois.len());
    for (i, &p) in pois.iter().enumerate() {
        out.push(if i == 0 { 0.0 } else { data.distance_km(pois[i - 1], p) });
    }
    out
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let data = read_canonical(&a.data.data)?;
    let settings = Arc::new(a.settings.settings()?);
    let mut kinds = a.models.0.clone();
    kinds.dedup();
    let methods: Vec<Box<dyn Method>> = kinds
        .iter()
        .map(|&kind| Box::new(Builtin { kind, settings: Arc::clone(&settings) }) as Box<dyn Method>)
        .collect();
    if a.lengths.iter().any(|&l| l < 2) {
        return Err(Error::Config("sweep lengths must be at least 2".into()));
    }
    let cfg = CvConfig { folds: a.folds, seed: a.seed, features: a.features.config(), sweep_lengths: a.lengths.clone() };
    let result = cross_validate(&data, &methods, &cfg)?;
    let tags: Vec<&str> = kinds.iter().map(|k| k.tag()).collect();
    let header = format!(
        "caps evaluate seed={} folds={} preset={} models={}",
        a.seed,
        a.folds,
        match a.settings.preset {
            Preset::Full => "full",
            Preset::Desk => "desk",
        },
        tags.join(",")
    );
    let files = write_report(&a.out, &result, &header, a.diversity_raw)?;
    print!("{}", render_tables(&result.aggregate, &header, a.diversity_raw));
    for f in files.written {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

/// Write a check-in CSV in the Weeplaces column layout.
fn write_checkins_csv(path: &Path, records: &[crate::data::CheckinRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["userid", "placeid", "datetime", "lat", "lon", "category", "city"])?;
    for r in records {
        let when = chrono::DateTime::from_timestamp(r.timestamp, 0)
            .ok_or_else(|| Error::Invalid(format!("timestamp {} out of range", r.timestamp)))?
            .format("%Y-%m-%dT%H:%M:%S")
            .to_string();
        w.write_record([
            r.user_id.as_str(),
            r.poi_id.as_str(),
            when.as_str(),
            &r.lat.to_string(),
            &r.lon.to_string(),
            r.category.as_str(),
            r.city.as_deref().unwrap_or(""),
        ])?;
    }
    w.into_inner().map_err(|e| Error::io(path, e.into_error()))?.flush().map_err(|e| Error::io(path, e))
}

fn synth(a: SynthArgs) -> Result<()> {
    if a.users == 0 || a.pois == 0 || a.days == 0 {
        return Err(Error::Config("users, pois and days must be positive".into()));
    }
    let s = synth_dataset(&SynthConfig { seed: a.seed, n_users: a.users, n_pois: a.pois, days: a.days });
    fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    write_checkins_csv(&a.out.join("checkins.csv"), &s.records)?;
    let path = a.out.join("friends.csv");
    let mut w = csv::Writer::from_writer(create(&path)?);
    w.write_record(["userid1", "userid2"])?;
    for (x, y) in &s.friendships {
        w.write_record([x, y])?;
    }
    w.into_inner().map_err(|e| Error::io(&path, e.into_error()))?.flush().map_err(|e| Error::io(&path, e))?;
    let mut cfg = IngestConfig::default();
    set(&mut cfg.min_checkins, a.min_checkins);
    let data = Dataset::from_records(&s.records, &s.friendships, &cfg);
    write_canonical(&a.out, &data, Some(a.seed))?;
    eprintln!(
        "{} check-ins; {} users, {} pois, {} sessions -> {}",
        s.records.len(),
        data.num_users(),
        data.num_pois(),
        data.sessions.len(),
        a.out.display()
    );
    Ok(())
}

fn first_comment(path: &Path) -> Result<String> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text.lines().next().and_then(|l| l.strip_prefix("# ")).unwrap_or("caps report").to_string())
}

fn report(a: ReportArgs) -> Result<()> {
    let out = a.out.unwrap_or_else(|| a.input.clone());
    let csv_path = a.input.join(REPORT_CSV);
    let header = first_comment(&csv_path)?;
    let rows = read_report_csv(&csv_path)?;
    let aggregate: Vec<_> = rows.into_iter().filter(|r| r.fold.is_none()).collect();
    if aggregate.is_empty() {
        return Err(Error::Invalid(format!("{} has no fold-averaged rows", csv_path.display())));
    }
    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let text = render_tables(&aggregate, &header, a.diversity_raw);
    let txt = out.join(REPORT_TXT);
    fs::write(&txt, &text).map_err(|e| Error::io(&txt, e))?;
    print!("{text}");
    let sweep_path = a.input.join(SWEEP_CSV);
    if sweep_path.exists() {
        let sweep = read_sweep_csv(&sweep_path)?;
        let header = first_comment(&sweep_path)?;
        for f in write_sweep(&out, &sweep, &header)?.written {
            eprintln!("wrote {}", f.display());
        }
    }
    Ok(())
}
