//! Subcommand implementations.
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context as _;
use clap::Args;
use serde_json::json;
use stance_core::config::RunConfig;
use stance_core::corpus::{derive_stage_dataset, load_corpus, Corpus, Stage};
use stance_core::features::{stage1_batch, stage3_batch, write_csv, FeatureSchema};
use stance_core::metrics::{read_predictions, score_predictions, EvalReport};
use stance_core::pipeline::{
    corpus_document_frequency, train_pipeline, LoadedResources, PipelineModel, StageCv,
};
use stance_core::textproc::KeywordExtractor;
use stance_core::tuning::{CvReport, Grid};
use stance_core::Error;

use crate::fetch::{self, Source};
use crate::{Cli, Command, Failure, Global, EXIT_RESOURCE};

pub const REPORT_JSON: &str = "report.json";
pub const CV_TABLE: &str = "cv_table.tsv";
pub const BEST_CONFIG: &str = "best_config.txt";

type Outcome = Result<(), Failure>;

#[derive(Args, Debug)]
pub struct FetchArgs {
    /// URL to download.
    pub url: Option<String>,
    /// Expected SHA-256 of the URL's content.
    #[arg(long, requires = "url")]
    pub sha256: Option<String>,
    /// File of `sha256 url` lines.
    #[arg(long)]
    pub list: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PrepareArgs {
    /// Also write stage-1 and stage-3 feature tables for the training corpus.
    #[arg(long)]
    pub features: bool,
}

#[derive(Args, Debug)]
pub struct ModelArgs {
    /// Pipeline directory (default: the output directory).
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Stance CSV with Headline and Body ID columns.
    #[arg(long)]
    pub input: PathBuf,
    /// Bodies CSV with Body ID and articleBody columns.
    #[arg(long)]
    pub bodies: PathBuf,
    /// Output CSV (default: predictions.csv in the output directory).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TuneArgs {
    /// Stage to tune: 1, 2 or 3.
    #[arg(long)]
    pub stage: Stage,
    /// Grid file of `key=v1,v2,...` lines using config keys.
    #[arg(long)]
    pub grid: PathBuf,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Saved report.json, or a directory holding one (default: the output directory).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Score an `index,label` prediction file against the test corpus instead.
    #[arg(long, conflicts_with = "input")]
    pub predictions: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Outcome {
    if let Some(n) = cli.global.workers {
        if n == 0 {
            return Err(Failure::config("--workers must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker threads")?;
    }
    if let Command::Fetch(args) = &cli.command {
        return run_fetch(&cli.global, args);
    }
    let ctx = Ctx::load(&cli.global)?;
    match cli.command {
        Command::Fetch(_) => unreachable!(),
        Command::Prepare(a) => ctx.prepare(&a),
        Command::Train => ctx.train(),
        Command::Evaluate(a) => ctx.evaluate(&a),
        Command::Predict(a) => ctx.predict(&a),
        Command::Tune(a) => ctx.tune(&a),
        Command::Report(a) => ctx.report(&a),
    }
}

fn run_fetch(global: &Global, args: &FetchArgs) -> Outcome {
    let mut sources = Vec::new();
    if let Some(list) = &args.list {
        let text = std::fs::read_to_string(list).with_context(|| list.display().to_string())?;
        sources.extend(fetch::parse_list(&text)?);
    }
    if let Some(url) = &args.url {
        let sha256 = args
            .sha256
            .as_deref()
            .ok_or_else(|| Failure::config("--sha256 is required with a URL"))?;
        sources.push(Source {
            url: url.clone(),
            sha256: fetch::normalize_hash(sha256)?,
        });
    }
    if sources.is_empty() {
        return Err(Failure::config("nothing to fetch: give a URL or --list"));
    }
    let dest = global.out.clone().unwrap_or_else(|| PathBuf::from("."));
    for s in &sources {
        let (_, line) = fetch::fetch(s, &dest)?;
        println!("{line}");
    }
    Ok(())
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Outcome {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).with_context(|| dir.display().to_string())?;
    }
    std::fs::write(path, contents).with_context(|| path.display().to_string())?;
    Ok(())
}

fn resource_failure(e: Error) -> Failure {
    match e {
        Error::ResourceMismatch { .. } | Error::SchemaMismatch { .. } | Error::DimensionMismatch { .. } => {
            Failure {
                code: EXIT_RESOURCE,
                error: e.into(),
            }
        }
        other => other.into(),
    }
}

struct Ctx {
    config: RunConfig,
    out: PathBuf,
}

impl Ctx {
    fn load(global: &Global) -> Result<Self, Failure> {
        let path = global
            .config
            .as_deref()
            .ok_or_else(|| Failure::config("--config is required"))?;
        let mut config = RunConfig::load(path).map_err(|e| match e {
            Error::Io { .. } => Failure::config(e.to_string()),
            other => other.into(),
        })?;
        if let Some(seed) = global.seed {
            config.override_seed(seed);
        }
        let out = match (&global.out, &config.paths.output) {
            (Some(o), _) => o.clone(),
            (None, Some(o)) => config.resolve(o),
            (None, None) => {
                return Err(Failure::config(
                    "no output directory: set paths.output or pass --out",
                ))
            }
        };
        Ok(Ctx { config, out })
    }

    fn resources(&self) -> Result<LoadedResources, Failure> {
        Ok(LoadedResources::load(&self.config.resource_paths()?)?)
    }

    fn corpus(&self, split: &str) -> Result<Corpus, Failure> {
        let ps = &self.config.paths;
        let (s, b) = match split {
            "train" => (&ps.train_stances, &ps.train_bodies),
            _ => (&ps.test_stances, &ps.test_bodies),
        };
        let stances = self.config.require(&format!("{split}_stances"), s)?;
        let bodies = self.config.require(&format!("{split}_bodies"), b)?;
        Ok(load_corpus(&stances, &bodies)?)
    }

    fn model_dir(&self, args: &ModelArgs) -> PathBuf {
        args.model.clone().unwrap_or_else(|| self.out.clone())
    }

    /// Loads a pipeline directory and checks it against the configured resources.
    fn model(&self, args: &ModelArgs) -> Result<(PipelineModel, LoadedResources), Failure> {
        let model = PipelineModel::load(&self.model_dir(args)).map_err(resource_failure)?;
        let res = self.resources()?;
        model.check_resources(&res).map_err(resource_failure)?;
        Ok((model, res))
    }

    /// Records what produced the artifacts in `dir`, one file per command.
    fn run_manifest(&self, dir: &Path, command: &str, res: Option<&LoadedResources>) -> Outcome {
        let p = &self.config.pipeline;
        let manifest = json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "config_hash": self.config.hash(),
            "seeds": {
                "stage1": p.stage1.seed,
                "stage2": p.stage2.seed,
                "stage3": p.stage3.seed,
                "split": p.split_seed,
            },
            "resources": res.map(|r| r.hashes.clone()).unwrap_or_default(),
        });
        write(
            &dir.join(format!("run_manifest.{command}.json")),
            serde_json::to_string_pretty(&manifest).map_err(Error::from)? + "\n",
        )
    }

    fn prepare(&self, args: &PrepareArgs) -> Outcome {
        let train = self.corpus("train")?;
        let mut summary = BTreeMap::new();
        let mut splits = vec![("train", &train)];
        let test = match (&self.config.paths.test_stances, &self.config.paths.test_bodies) {
            (Some(_), Some(_)) => Some(self.corpus("test")?),
            _ => None,
        };
        if let Some(t) = &test {
            splits.push(("test", t));
        }
        for (name, corpus) in splits {
            println!("{name}:\n{}", corpus.summary());
            let mut stages = BTreeMap::new();
            for stage in Stage::ALL {
                let ds = derive_stage_dataset(corpus, stage)?;
                println!(
                    "{stage}: {} {} / {} {}",
                    ds.negatives.len(),
                    ds.negative_class_name,
                    ds.positives.len(),
                    ds.positive_class_name
                );
                stages.insert(
                    format!("stage{}", stage.number()),
                    json!({ ds.negative_class_name.as_str(): ds.negatives.len(), ds.positive_class_name.as_str(): ds.positives.len() }),
                );
            }
            summary.insert(name, json!({ "summary": corpus.summary(), "stages": stages }));
        }
        write(
            &self.out.join("prepare.json"),
            serde_json::to_string_pretty(&summary).map_err(Error::from)? + "\n",
        )?;
        let res = if args.features {
            let res = self.resources()?;
            let r = &res.resources;
            let instances: Vec<_> = train.instances().iter().collect();
            let labels: Vec<String> = instances
                .iter()
                .map(|i| i.label.map(|l| l.corpus_name().to_string()).unwrap_or_default())
                .collect();
            let df = corpus_document_frequency(&train, &r.stopwords);
            let keywords = KeywordExtractor::new(
                self.config.pipeline.keywords.clone(),
                Some(df),
                r.stopwords.clone(),
            )?;
            let x1 = stage1_batch(&instances, r, &keywords)?;
            write_csv(
                &self.out.join("train_stage1_features.csv"),
                &FeatureSchema::stage1(),
                &x1,
                Some(&labels),
            )?;
            let x3 = stage3_batch(&instances, r)?;
            write_csv(
                &self.out.join("train_stage3_features.csv"),
                &FeatureSchema::stage3(&r.refuting),
                &x3,
                Some(&labels),
            )?;
            Some(res)
        } else {
            None
        };
        self.run_manifest(&self.out, "prepare", res.as_ref())
    }

    fn train(&self) -> Outcome {
        let train = self.corpus("train")?;
        let res = self.resources()?;
        let (model, report) =
            train_pipeline(&train, &self.config.pipeline, &res).map_err(Failure::training)?;
        model.save(&self.out)?;
        write(
            &self.out.join("training.json"),
            serde_json::to_string_pretty(&report).map_err(Error::from)? + "\n",
        )?;
        let mut log = Vec::new();
        report
            .stage2_log
            .write_csv(&mut log)
            .context("writing stage-2 log")?;
        write(&self.out.join("stage2_log.csv"), log)?;
        write(&self.out.join("config.txt"), self.config.absolutized()?.to_text())?;
        self.run_manifest(&self.out, "train", Some(&res))?;
        for (stage, (neg, pos)) in Stage::ALL.iter().zip(report.stage_sizes) {
            println!("{stage}: trained on {neg} / {pos}");
        }
        println!("pipeline written to {}", self.out.display());
        Ok(())
    }

    fn save_report(&self, report: &EvalReport, stem: &str) -> Outcome {
        write(&self.out.join(format!("{stem}.json")), report.to_json()? + "\n")?;
        write(&self.out.join(format!("{stem}.txt")), report.to_string())
    }

    fn evaluate(&self, args: &ModelArgs) -> Outcome {
        let (model, res) = self.model(args)?;
        let test = self.corpus("test")?;
        let (report, traces) = model.evaluate(&test, &res.resources)?;
        self.save_report(&report, "report")?;
        let mut preds = String::from("index,label\n");
        for (i, t) in traces.iter().enumerate() {
            preds.push_str(&format!("{i},{}\n", t.final_label.corpus_name()));
        }
        write(&self.out.join("test_predictions.csv"), preds)?;
        self.run_manifest(&self.out, "evaluate", Some(&res))?;
        print!("{report}");
        Ok(())
    }

    fn predict(&self, args: &PredictArgs) -> Outcome {
        let (model, res) = self.model(&args.model)?;
        let corpus = load_corpus(&args.input, &args.bodies)?;
        let instances: Vec<_> = corpus.instances().iter().collect();
        let traces = model.predict_instances(&instances, &res.resources)?;

        let mut reader =
            csv::Reader::from_path(&args.input).with_context(|| args.input.display().to_string())?;
        let output = args
            .output
            .clone()
            .unwrap_or_else(|| self.out.join("predictions.csv"));
        if let Some(dir) = output.parent() {
            std::fs::create_dir_all(dir).with_context(|| dir.display().to_string())?;
        }
        let mut writer = csv::Writer::from_path(&output).with_context(|| output.display().to_string())?;
        let mut header = reader.headers().context("reading header")?.clone();
        header.push_field("Predicted");
        writer.write_record(&header).context("writing header")?;
        for (record, trace) in reader.records().zip(&traces) {
            let mut record = record.context("reading stance row")?;
            record.push_field(trace.final_label.corpus_name());
            writer.write_record(&record).context("writing prediction")?;
        }
        writer.flush().context("writing predictions")?;
        let dir = output.parent().unwrap_or(Path::new("."));
        self.run_manifest(dir, "predict", Some(&res))?;
        println!("{} predictions written to {}", traces.len(), output.display());
        Ok(())
    }

    fn tune(&self, args: &TuneArgs) -> Outcome {
        let grid = Grid::load(&args.grid)?;
        let train = self.corpus("train")?;
        let res = self.resources()?;
        let points = grid.points();
        let mut configs = Vec::with_capacity(points.len());
        for point in &points {
            let mut cfg = self.config.clone();
            for (k, v) in point {
                cfg.set(k, v)?;
            }
            cfg.validate()?;
            configs.push(cfg);
        }
        // Stage-1 features depend on the keyword settings, so a grid over them
        // re-featurizes per point.
        let per_point = grid.keys().any(|k| k.starts_with("keywords."));
        let shared = if per_point {
            None
        } else {
            Some(
                StageCv::prepare(&train, args.stage, &self.config.pipeline, &res)
                    .map_err(Failure::training)?,
            )
        };
        let mut reports: Vec<CvReport> = Vec::new();
        for (point, cfg) in points.iter().zip(&configs) {
            let owned;
            let cv = match &shared {
                Some(cv) => cv,
                None => {
                    owned = StageCv::prepare(&train, args.stage, &cfg.pipeline, &res)
                        .map_err(Failure::training)?;
                    &owned
                }
            };
            let report = cv
                .run(&cfg.pipeline, cfg.folds, cfg.pipeline.split_seed, &res)
                .map_err(Failure::training)?;
            log::info!("{point:?}: mean macro-F1 {:.4}", report.mean_macro_f1);
            reports.push(report);
        }
        let best = reports.iter().enumerate().fold(0, |b, (i, r)| {
            if r.mean_macro_f1 > reports[b].mean_macro_f1 {
                i
            } else {
                b
            }
        });

        let keys: Vec<&str> = grid.keys().collect();
        let folds = reports[0].fold_macro_f1.len();
        let mut table = String::from("point");
        for k in &keys {
            table.push_str(&format!("\t{k}"));
        }
        table.push_str("\tmean_macro_f1");
        for f in 1..=folds {
            table.push_str(&format!("\tfold{f}"));
        }
        table.push('\n');
        for (i, (point, r)) in points.iter().zip(&reports).enumerate() {
            table.push_str(&i.to_string());
            for k in &keys {
                table.push_str(&format!("\t{}", point[*k]));
            }
            table.push_str(&format!("\t{}", r.mean_macro_f1));
            for f in &r.fold_macro_f1 {
                table.push_str(&format!("\t{f}"));
            }
            table.push('\n');
        }
        write(&self.out.join(CV_TABLE), &table)?;
        let chosen: Vec<String> = keys.iter().map(|k| format!("{k}={}", points[best][*k])).collect();
        let text = format!(
            "# {}: best grid point {best} ({}), mean macro-F1 {:.4} over {folds} folds\n{}",
            args.stage,
            chosen.join(", "),
            reports[best].mean_macro_f1,
            configs[best].absolutized()?.to_text()
        );
        write(&self.out.join(BEST_CONFIG), text)?;
        write(
            &self.out.join("cv_reports.json"),
            serde_json::to_string_pretty(&reports).map_err(Error::from)? + "\n",
        )?;
        self.run_manifest(&self.out, "tune", Some(&res))?;
        print!("{table}");
        println!("best: {}", chosen.join(", "));
        Ok(())
    }

    fn report(&self, args: &ReportArgs) -> Outcome {
        if let Some(preds) = &args.predictions {
            let golds = self.corpus("test")?.gold_labels()?;
            let report = score_predictions(&golds, &read_predictions(preds)?)?;
            self.save_report(&report, "external_report")?;
            print!("{report}");
            return Ok(());
        }
        let mut path = args.input.clone().unwrap_or_else(|| self.out.clone());
        if path.is_dir() {
            path = path.join(REPORT_JSON);
        }
        let text = std::fs::read_to_string(&path).with_context(|| path.display().to_string())?;
        let report = EvalReport::from_json(&text)?;
        std::io::stdout()
            .write_all(report.to_string().as_bytes())
            .context("writing report")?;
        Ok(())
    }
}
