use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use evifuse::corpus::{conflict_matrix, decision_difference, parse_annotations};
use evifuse::decision::{credibility, decide, pignistic, plausibility};
use evifuse::expert_models::CertaintyWeights;
use evifuse::fusion::restrict_to_exclusive;
use evifuse::stability::{
    conflict_histograms, histogram_csv, stability_table_csv, SamplingLaw, StabilityConfig,
};
use evifuse::{Criterion, FocalElement, MassFunction, Model, Rule};

/// Largest Shafer frame whose full power set is printed by `fuse`.
const SHAFER_TABLE_CLASSES: usize = 6;

#[derive(Parser)]
#[command(name = "evifuse", version, about = "Fuse expert belief functions and study decision stability")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Combine mass files and print m, bel, pl and betP per element.
    Fuse {
        /// Mass function JSON files, at least two.
        #[arg(required = true, num_args = 2..)]
        files: Vec<PathBuf>,
        #[arg(long, default_value = "conjunctive")]
        rule: Rule,
        /// Also report the singleton maximizing this criterion.
        #[arg(long)]
        decision: Option<Criterion>,
        /// Print the fused mass as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Decide on one mass file and print the report as JSON.
    Decide {
        file: PathBuf,
        #[arg(long, default_value = "pignistic")]
        criterion: Criterion,
        /// Candidate element, repeatable. Defaults to the singletons.
        #[arg(long = "candidate")]
        candidates: Vec<String>,
    },
    /// Monte Carlo study of consensus vs PCR5 decisions.
    Simulate {
        /// Class count or inclusive range such as `2..7`.
        #[arg(long, default_value = "2..7")]
        classes: String,
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
        #[arg(long, env = "EVIFUSE_SEED", default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = "uniform-mass")]
        law: SamplingLaw,
        #[arg(long, default_value_t = 20)]
        bins: usize,
        /// Stability table CSV; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Conflict histogram CSV.
        #[arg(long)]
        hist: Option<PathBuf>,
    },
    /// Conflict matrix and decision difference of two annotators.
    Corpus {
        annotations: PathBuf,
        /// Two expert ids separated by a comma. Defaults to the only two experts.
        #[arg(long)]
        experts: Option<String>,
        /// Weights of certainty levels 1, 2, 3; fractions allowed.
        #[arg(long, default_value = "2/3,1/2,1/3")]
        weights: String,
        #[arg(long, default_value = "conjunctive")]
        rule_a: Rule,
        #[arg(long, default_value = "pcr5")]
        rule_b: Rule,
        /// Matrix CSV; stdout when absent.
        #[arg(long)]
        matrix_out: Option<PathBuf>,
        /// Decision-difference JSON; stdout when absent.
        #[arg(long)]
        summary_out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fuse {
            files,
            rule,
            decision,
            json,
        } => fuse(&files, rule, decision, json),
        Command::Decide {
            file,
            criterion,
            candidates,
        } => decide_file(&file, criterion, &candidates),
        Command::Simulate {
            classes,
            samples,
            seed,
            law,
            bins,
            out,
            hist,
        } => simulate(&classes, samples, seed, law, bins, out.as_deref(), hist.as_deref()),
        Command::Corpus {
            annotations,
            experts,
            weights,
            rule_a,
            rule_b,
            matrix_out,
            summary_out,
        } => corpus(
            &annotations,
            experts.as_deref(),
            &weights,
            rule_a,
            rule_b,
            matrix_out.as_deref(),
            summary_out.as_deref(),
        ),
    }
}

fn read_mass(path: &Path) -> Result<MassFunction> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    MassFunction::from_json_str(&text).with_context(|| format!("in {}", path.display()))
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn table_elements(m: &MassFunction) -> Vec<FocalElement> {
    let f = m.frame();
    let enumerable = f.model() == Model::FreeDsm || f.len() <= SHAFER_TABLE_CLASSES;
    if let Some(all) = enumerable.then(|| f.enumerate_elements(true).ok()).flatten() {
        return all;
    }
    let mut out: Vec<FocalElement> = std::iter::once(f.empty())
        .chain(f.atoms())
        .chain(m.focal_elements().into_iter().map(|(e, _)| e))
        .chain(std::iter::once(f.full()))
        .collect();
    out.sort();
    out.dedup();
    out
}

fn fuse(files: &[PathBuf], rule: Rule, decision: Option<Criterion>, json: bool) -> Result<()> {
    let sources = files.iter().map(|p| read_mass(p)).collect::<Result<Vec<_>>>()?;
    let mut fused = rule.combine(&sources)?;
    if rule != Rule::Conjunctive && fused.frame().model() == Model::FreeDsm {
        fused = restrict_to_exclusive(&fused)?;
    }
    let mut out = String::new();
    if json {
        out.push_str(&serde_json::to_string_pretty(&fused.to_json())?);
        out.push('\n');
    } else {
        let rows = table_elements(&fused);
        let width = rows.iter().map(|e| e.to_string().chars().count()).max().unwrap_or(1).max(7);
        out.push_str(&format!("rule: {rule}\n"));
        out.push_str(&format!("{:<width$}  {:>6}  {:>6}  {:>6}  {:>6}\n", "element", "m", "bel", "pl", "betP"));
        for e in &rows {
            let betp = if e.is_empty() {
                "-".to_string()
            } else {
                pignistic(&fused, e).map_or("-".to_string(), |v| format!("{v:.4}"))
            };
            out.push_str(&format!(
                "{:<width$}  {:>6.4}  {:>6.4}  {:>6.4}  {:>6}\n",
                e.to_string(),
                fused.mass(e),
                credibility(&fused, e)?,
                plausibility(&fused, e)?,
                betp
            ));
        }
    }
    if let Some(criterion) = decision {
        let report = decide(&fused, criterion, &fused.frame().atoms())?;
        let tie = if report.tie { " (tie)" } else { "" };
        out.push_str(&format!("decision ({criterion}): {}{tie}\n", report.chosen));
    }
    emit(None, &out)
}

fn decide_file(path: &Path, criterion: Criterion, candidates: &[String]) -> Result<()> {
    let m = read_mass(path)?;
    let elements = if candidates.is_empty() {
        m.frame().atoms()
    } else {
        candidates
            .iter()
            .map(|c| m.frame().parse_element(c).with_context(|| format!("candidate `{c}`")))
            .collect::<Result<Vec<_>>>()?
    };
    let report = decide(&m, criterion, &elements)?;
    emit(None, &format!("{}\n", serde_json::to_string_pretty(&report.to_json())?))
}

fn parse_classes(text: &str) -> Result<Vec<usize>> {
    let bounds: Vec<&str> = text.split("..").collect();
    let parse = |s: &str| -> Result<usize> {
        s.trim_start_matches('=')
            .trim()
            .parse()
            .with_context(|| format!("invalid class count in `{text}`"))
    };
    let (lo, hi) = match bounds.as_slice() {
        [one] => (parse(one)?, parse(one)?),
        [lo, hi] => (parse(lo)?, parse(hi)?),
        _ => bail!("invalid class range `{text}`"),
    };
    if lo > hi {
        bail!("empty class range `{text}`");
    }
    Ok((lo..=hi).collect())
}

fn simulate(
    classes: &str,
    samples: usize,
    seed: u64,
    law: SamplingLaw,
    bins: usize,
    out: Option<&Path>,
    hist: Option<&Path>,
) -> Result<()> {
    let classes = parse_classes(classes)?;
    let mut results = Vec::with_capacity(classes.len());
    let mut histograms = Vec::new();
    for n in classes {
        let config = StabilityConfig {
            law,
            ..StabilityConfig::new(n, samples, seed)
        };
        if hist.is_some() {
            if samples == 0 {
                bail!(evifuse::Error::NoSamples);
            }
            let h = conflict_histograms(&config, bins)?;
            results.push(h.summary.clone().expect("samples are positive"));
            histograms.push((n, h));
        } else {
            results.push(config.run()?);
        }
    }
    if let Some(path) = hist {
        emit(Some(path), &histogram_csv(&histograms))?;
    }
    emit(out, &stability_table_csv(&results))
}

fn parse_weight(text: &str) -> Result<f64> {
    let text = text.trim();
    let value = match text.split_once('/') {
        Some((num, den)) => num.trim().parse::<f64>()? / den.trim().parse::<f64>()?,
        None => text.parse()?,
    };
    Ok(value)
}

fn parse_weights(text: &str) -> Result<CertaintyWeights> {
    let parts = text
        .split(',')
        .map(|w| parse_weight(w).with_context(|| format!("invalid weight `{w}`")))
        .collect::<Result<Vec<_>>>()?;
    let [c1, c2, c3] = parts[..] else {
        bail!("expected three weights, got `{text}`");
    };
    Ok(CertaintyWeights::new(c1, c2, c3)?)
}

fn corpus(
    path: &Path,
    experts: Option<&str>,
    weights: &str,
    rule_a: Rule,
    rule_b: Rule,
    matrix_out: Option<&Path>,
    summary_out: Option<&Path>,
) -> Result<()> {
    let weights = parse_weights(weights)?;
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let corpus = parse_annotations(file).with_context(|| format!("in {}", path.display()))?;
    let (ei, ej) = match experts {
        Some(list) => match list.split(',').map(str::trim).collect::<Vec<_>>()[..] {
            [a, b] => (a.to_string(), b.to_string()),
            _ => bail!("--experts takes two ids separated by a comma"),
        },
        None => match &corpus.experts()[..] {
            [a, b] => (a.clone(), b.clone()),
            found => bail!("the corpus has {} experts; choose two with --experts", found.len()),
        },
    };
    let matrix = conflict_matrix(&corpus, &ei, &ej, &weights)?;
    let summary = decision_difference(&corpus, &weights, rule_a, rule_b, &ei, &ej)?;
    emit(matrix_out, &matrix.to_csv())?;
    emit(summary_out, &format!("{}\n", serde_json::to_string_pretty(&summary.to_json())?))
}
