mod classifier;
mod experiment;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use tsdict::bagging::{bag_dataset, bags_to_text, BagConfig, Discretisation};
use tsdict::classifiers::persist::Model;
use tsdict::classifiers::Variant;
use tsdict::data::{generate_dictionary_data, read_ucr, split_per_class, write_ucr, DictionaryDataConfig, Placement};
use tsdict::eval::{RankReport, ResultTable};
use tsdict::symbolic::Approximation;
use tsdict::Dataset;

use classifier::{ClassifierKind, GridOverrides};
use experiment::{ExperimentFile, ExperimentSpec};

#[derive(Parser)]
#[command(name = "tsdict", version, about = "Dictionary-based time series classification")]
struct Cli {
    /// Worker threads for grid search and classification (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ApproxArg {
    Paa,
    Dft,
}

#[derive(Clone, Copy, ValueEnum)]
enum DiscArg {
    Gaussian,
    Mcb,
}

#[derive(Subcommand)]
enum Command {
    /// Write the bag of every series in a UCR file
    Bag {
        /// UCR-format file (label followed by values on each line)
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        w: usize,
        #[arg(long)]
        l: usize,
        #[arg(long, default_value_t = 4)]
        alpha: usize,
        /// Drop the mean Fourier term
        #[arg(long)]
        p: bool,
        #[arg(long, value_enum, default_value = "dft")]
        approx: ApproxArg,
        #[arg(long, value_enum, default_value = "mcb")]
        disc: DiscArg,
        /// Count every window, including repeats of the previous word
        #[arg(long)]
        no_numerosity: bool,
        /// Output file (default: stdout)
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Also save the fitted breakpoint table here
        #[arg(long)]
        breakpoints: Option<PathBuf>,
    },
    /// Train a classifier and save it to a model directory
    Train {
        /// UCR-format training file
        #[arg(long)]
        train: PathBuf,
        /// BOP/BOSS variant name, SP-HI, SP-BD, BOTSW-HI or BOTSW-BD
        #[arg(long, short)]
        classifier: ClassifierKind,
        #[arg(long, short)]
        model: PathBuf,
        /// Seed for BOTSW codebooks
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        grid: GridOverrides,
    },
    /// Predict labels with a saved model, one per line
    Predict {
        #[arg(long, short)]
        model: PathBuf,
        /// UCR-format file; its labels are used only to report accuracy
        #[arg(long)]
        data: PathBuf,
        /// Output file (default: stdout)
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Run classifiers over stratified resamples of UCR datasets
    Experiment {
        #[command(flatten)]
        args: ExperimentArgs,
        /// Classifier names; see `train --help`
        #[arg(long = "classifier", short)]
        classifiers: Vec<ClassifierKind>,
    },
    /// Run the ten BOP/BOSS component-swap variants
    Ablation {
        #[command(flatten)]
        args: ExperimentArgs,
        /// Restrict to these variants (default: all ten)
        #[arg(long = "variant")]
        variants: Vec<Variant>,
    },
    /// Average ranks, Friedman test, pairwise tests and cliques from a results CSV
    Ranks {
        #[arg(long)]
        results: PathBuf,
        /// Directory for ranks.csv, friedman.txt, pairwise.csv and cliques.txt
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Generate two-class shapelet-count data as a UCR train/test pair
    Generate {
        /// Parent directory; files go to <output>/<name>/
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long, default_value = "Synthetic")]
        name: String,
        #[arg(long, default_value_t = 50)]
        n_per_class: usize,
        #[arg(long, default_value_t = 500)]
        length: usize,
        /// Shapelets per series for the two classes
        #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [6, 2])]
        counts: Vec<usize>,
        #[arg(long, default_value_t = 1.0)]
        noise_std: f64,
        #[arg(long, default_value_t = 29)]
        shapelet_length: usize,
        #[arg(long, default_value_t = 2.0)]
        amplitude: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Training cases per class (default: half of each class)
        #[arg(long)]
        train_per_class: Option<usize>,
    },
}

#[derive(clap::Args)]
struct ExperimentArgs {
    /// TOML experiment file; flags given here override its values
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Dataset directories holding <Name>_TRAIN and <Name>_TEST files
    #[arg(long = "dataset", short)]
    datasets: Vec<PathBuf>,
    #[arg(long)]
    resamples: Option<u64>,
    /// Resample r uses seed base + r; seed 0 is the original split
    #[arg(long)]
    seed_base: Option<u64>,
    /// Results CSV, appended to and resumed from
    #[arg(long, short)]
    results: Option<PathBuf>,
    /// Record training time (makes the results file run-dependent)
    #[arg(long)]
    timings: bool,
    #[command(flatten)]
    grid: GridOverrides,
}

impl ExperimentArgs {
    fn resolve(self, classifiers: Vec<ClassifierKind>) -> Result<ExperimentSpec> {
        let file = match &self.spec {
            Some(p) => ExperimentFile::load(p)?,
            None => ExperimentFile::default(),
        };
        let classifiers = if classifiers.is_empty() {
            file.classifiers
                .iter()
                .map(|c| c.parse())
                .collect::<Result<Vec<ClassifierKind>>>()?
        } else {
            classifiers
        };
        Ok(ExperimentSpec {
            datasets: if self.datasets.is_empty() { file.datasets } else { self.datasets },
            classifiers,
            resamples: self.resamples.or(file.resamples).unwrap_or(1),
            seed_base: self.seed_base.or(file.seed_base).unwrap_or(0),
            results: self
                .results
                .or(file.results)
                .unwrap_or_else(|| PathBuf::from("results.csv")),
            timings: self.timings || file.timings.unwrap_or(false),
            grid: self.grid.over(&file.grid),
        })
    }
}

fn write_output(path: Option<&Path>, body: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, body).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}

#[derive(Serialize)]
struct GeneratedSidecar<'a> {
    config: &'a DictionaryDataConfig,
    train_per_class: usize,
    class_names: &'a [String],
    /// Shapelet placements per series, in generation order (class 0 first).
    placements: &'a [Vec<Placement>],
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Bag {
            data,
            w,
            l,
            alpha,
            p,
            approx,
            disc,
            no_numerosity,
            output,
            breakpoints,
        } => {
            let dataset: Dataset = read_ucr(&data)?;
            let cfg = BagConfig {
                w,
                l,
                alpha,
                p,
                approx: match approx {
                    ApproxArg::Paa => Approximation::Paa,
                    ApproxArg::Dft => Approximation::Dft,
                },
                disc: match disc {
                    DiscArg::Gaussian => Discretisation::Gaussian,
                    DiscArg::Mcb => Discretisation::Mcb,
                },
                numerosity: !no_numerosity,
            };
            let bagged = bag_dataset(&dataset, &cfg)?;
            if let (Some(path), Some(table)) = (&breakpoints, &bagged.model) {
                table.save(path)?;
            }
            write_output(output.as_deref(), &bags_to_text(&bagged.bags))
        }
        Command::Train {
            train,
            classifier,
            model,
            seed,
            grid,
        } => {
            let train: Dataset = read_ucr(&train)?;
            let fitted = classifier::fit(classifier, &train, &grid, seed)?;
            log::info!("{classifier}: {}", classifier::describe(&fitted));
            fitted.save(&model)?;
            Ok(())
        }
        Command::Predict { model, data, output } => {
            let model = Model::<f64>::load(&model)?;
            let data: Dataset = read_ucr(&data)?;
            let predicted = model.predict_dataset(&data)?;
            let names = model.class_names();
            let mut body = String::new();
            for &p in &predicted {
                body.push_str(&names[p]);
                body.push('\n');
            }
            let correct = predicted
                .iter()
                .zip(data.labels())
                .filter(|(p, t)| names[**p] == data.class_names()[**t])
                .count();
            log::info!(
                "accuracy {:.4} ({correct}/{})",
                correct as f64 / data.len().max(1) as f64,
                data.len()
            );
            write_output(output.as_deref(), &body)
        }
        Command::Experiment { args, classifiers } => experiment::run(&args.resolve(classifiers)?),
        Command::Ablation { args, variants } => {
            let variants = if variants.is_empty() { Variant::ALL.to_vec() } else { variants };
            let kinds = variants.into_iter().map(ClassifierKind::Dictionary).collect();
            experiment::run(&args.resolve(kinds)?)
        }
        Command::Ranks { results, output, alpha } => {
            let table = ResultTable::read_csv(&results)?;
            let report = RankReport::from_table(&table, alpha)?;
            report.write(&output)?;
            print!("{}", report.ranks_csv());
            Ok(())
        }
        Command::Generate {
            output,
            name,
            n_per_class,
            length,
            counts,
            noise_std,
            shapelet_length,
            amplitude,
            seed,
            train_per_class,
        } => {
            let config = DictionaryDataConfig {
                n_per_class,
                length,
                counts: (counts[0], counts[1]),
                noise_std,
                seed,
                shapelet_length,
                amplitude,
            };
            let generated = generate_dictionary_data::<f64>(&config)?;
            let n_train = train_per_class.unwrap_or(n_per_class / 2);
            let data = generated.dataset.with_name(name.clone());
            let (train, test) = split_per_class(&data, n_train)?;
            let dir = output.join(&name);
            fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            write_ucr(&train, dir.join(format!("{name}_TRAIN.tsv")))?;
            write_ucr(&test, dir.join(format!("{name}_TEST.tsv")))?;
            let sidecar = GeneratedSidecar {
                config: &config,
                train_per_class: n_train,
                class_names: data.class_names(),
                placements: &generated.placements,
            };
            let json_path = dir.join(format!("{name}.json"));
            fs::write(&json_path, serde_json::to_string_pretty(&sidecar)?)
                .with_context(|| format!("writing {}", json_path.display()))?;
            Ok(())
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
