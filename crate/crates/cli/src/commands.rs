use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use opineval_core::corpus::{dedup_mechanical, filter_min_votes, load_reviews};
use opineval_core::dedup::{find_plagiarized_pairs_with, read_pairs_csv, write_pairs_csv, DedupOptions};
use opineval_core::mh::verdict_grid;
use opineval_core::model::{
    density_table, simulate_helpfulness, verify_argmax_shift, verify_regime_transition, VerifyOptions,
};
use opineval_core::stats::{compare_corpora, deviation_curve};
use opineval_core::{Corpus, Format, Kernel, MixtureModel, SimulationConfig};

use crate::args::*;

pub enum Status {
    Ok,
    VerificationFailed,
}

struct Ctx {
    seed: u64,
    quiet: bool,
}

impl Ctx {
    fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

pub fn run(cli: &Cli) -> Result<Status> {
    let ctx = Ctx { seed: cli.seed, quiet: cli.quiet };
    match &cli.command {
        Command::Ingest(a) => ingest(&ctx, a),
        Command::Summarize(a) => summarize(&ctx, a),
        Command::Stats(a) => stats(&ctx, a),
        Command::Dedup(a) => dedup(&ctx, a),
        Command::Mh(a) => mh(&ctx, a),
        Command::Model(ModelCommand::Verify(a)) => verify(&ctx, a),
        Command::Model(ModelCommand::Simulate(a)) => simulate(&ctx, a),
        Command::Model(ModelCommand::Density(a)) => density(&ctx, a),
    }
}

fn load(path: &Path, format: Format) -> Result<Corpus> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let label = path.file_stem().map_or_else(|| "corpus".to_string(), |s| s.to_string_lossy().into_owned());
    load_reviews(BufReader::new(file), format, &label).with_context(|| format!("{}", path.display()))
}

fn load_filtered(ctx: &Ctx, path: &Path, input: &InputArgs) -> Result<Corpus> {
    let corpus = load(path, input.format)?;
    let kept = filter_min_votes(&corpus, input.min_votes);
    ctx.note(format!("{}: {} reviews, {} with >= {} votes", path.display(), corpus.len(), kept.len(), input.min_votes));
    Ok(kept)
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut out = BufWriter::new(file);
    body(&mut out)?;
    out.flush().with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn ingest(ctx: &Ctx, a: &IngestArgs) -> Result<Status> {
    let mut corpus = load_filtered(ctx, &a.path, &a.input)?;
    if a.dedup_mechanical {
        let before = corpus.len();
        corpus = dedup_mechanical(&corpus);
        ctx.note(format!("mechanical duplicates removed: {}", before - corpus.len()));
    }
    if let Some(out) = &a.out {
        let format = a.out_format.unwrap_or(a.input.format);
        write_file(out, |w| Ok(corpus.write(w, format)?))?;
    }
    Ok(Status::Ok)
}

fn summarize(ctx: &Ctx, a: &SummarizeArgs) -> Result<Status> {
    let corpora = a.paths.iter().map(|p| load_filtered(ctx, p, &a.input)).collect::<Result<Vec<_>>>()?;
    let rows = compare_corpora(&corpora)?;
    write_file(&a.out, |w| {
        serde_json::to_writer_pretty(&mut *w, &rows)?;
        writeln!(w)?;
        Ok(())
    })?;
    Ok(Status::Ok)
}

fn stats(ctx: &Ctx, a: &StatsArgs) -> Result<Status> {
    if a.input.min_votes < 10 {
        bail!("stats requires --min-votes of at least 10");
    }
    let corpus = load_filtered(ctx, &a.path, &a.input)?;
    let curve = deviation_curve(&corpus, a.mode, a.variance_bin)?;
    ctx.note(format!("{} bins over {} reviews", curve.bins.len(), curve.total_count()));
    write_file(&a.out, |w| Ok(curve.write_csv(w)?))?;
    Ok(Status::Ok)
}

fn dedup(ctx: &Ctx, a: &DedupArgs) -> Result<Status> {
    let corpus = load_filtered(ctx, &a.path, &a.input)?;
    let opts = DedupOptions { threshold: a.threshold, max_bucket: a.max_bucket };
    let pairs = find_plagiarized_pairs_with(&corpus, &opts)?;
    ctx.note(format!("{} near-duplicate pairs", pairs.len()));
    write_file(&a.out, |w| Ok(write_pairs_csv(&pairs, w)?))?;
    Ok(Status::Ok)
}

fn mh(ctx: &Ctx, a: &MhArgs) -> Result<Status> {
    let file = File::open(&a.pairs).with_context(|| format!("cannot open {}", a.pairs.display()))?;
    let pairs = read_pairs_csv(BufReader::new(file)).with_context(|| format!("{}", a.pairs.display()))?;
    let mut grid = verdict_grid(&pairs, a.axis)?;
    if a.permutations > 0 {
        grid.attach_permutation_tests(&pairs, a.permutations, ctx.seed)?;
    }
    write_file(&a.out, |w| Ok(w.write_all(grid.render_text().as_bytes())?))?;
    let json = a.json.clone().unwrap_or_else(|| a.out.with_extension("json"));
    write_file(&json, |w| {
        w.write_all(grid.to_json()?.as_bytes())?;
        writeln!(w)?;
        Ok(())
    })?;
    ctx.note(format!("{} pairs, {} cells", pairs.len(), grid.cells.len()));
    Ok(Status::Ok)
}

fn kernel(k: &KernelArgs) -> Result<Kernel> {
    Ok(match k.kernel {
        KernelFamily::Gaussian => Kernel::gaussian(k.scale)?,
        KernelFamily::Triangular => Kernel::triangular(k.scale)?,
    })
}

fn verify(ctx: &Ctx, a: &VerifyArgs) -> Result<Status> {
    let kernel = kernel(&a.kernel)?;
    let opts = VerifyOptions { margin: a.margin, ..VerifyOptions::default() };
    let mut reports = vec![verify_regime_transition(a.p, &kernel, a.mu, &a.alpha_list, &opts)?];
    if a.p != 0.5 {
        reports.push(verify_argmax_shift(a.p, &kernel, a.mu, &a.alpha_list, &opts)?);
    }
    let text: String = reports.iter().map(|r| r.render_text()).collect();
    if let Some(out) = &a.out {
        write_file(out, |w| Ok(w.write_all(text.as_bytes())?))?;
    }
    ctx.note(text.trim_end());
    Ok(if reports.iter().all(|r| r.passed()) { Status::Ok } else { Status::VerificationFailed })
}

fn simulate(ctx: &Ctx, a: &SimulateArgs) -> Result<Status> {
    let model = MixtureModel::new(a.p, a.alpha, a.mu, kernel(&a.kernel)?)?;
    let config = SimulationConfig {
        tolerance: a.tol,
        n_evaluators_per_review: a.evaluators,
        review_scores: a.scores.clone(),
        n_reviews_per_score: a.products,
        seed: ctx.seed,
    };
    let corpus = simulate_helpfulness(&model, &config)?;
    ctx.note(format!("simulated {} reviews", corpus.len()));
    write_file(&a.out, |w| Ok(corpus.write(w, a.format)?))?;
    Ok(Status::Ok)
}

fn density(_ctx: &Ctx, a: &DensityArgs) -> Result<Status> {
    let model = MixtureModel::new(a.p, a.alpha, a.mu, kernel(&a.kernel)?)?;
    let s = model.max_scale();
    let from = a.from.unwrap_or(model.mean_g() - 5.0 * s);
    let to = a.to.unwrap_or(model.mean_f() + 5.0 * s);
    let rows = density_table(&model, from, to, a.step.unwrap_or(s / 50.0))?;
    write_file(&a.out, |w| {
        writeln!(w, "x,f,g,h")?;
        for [x, f, g, h] in rows {
            writeln!(w, "{x},{f},{g},{h}")?;
        }
        Ok(())
    })?;
    Ok(Status::Ok)
}
