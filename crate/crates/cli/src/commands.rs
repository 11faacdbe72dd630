use std::fmt;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::time::Duration;

use capkit::augment::{augment_dataset, AugmentConfig, Method, MixTemplates, WavFiles, AUDIOCAPS_MAX_WORDS};
use capkit::corpus::{
    filter_max_words, load_audiocaps_csv, load_clotho_csv, load_manifest, tokenize, vocab_cdf, write_manifest,
    VocabStats,
};
use capkit::lossfn::{balanced_weights, gamma_sweep_table, load_token_counts, write_weights_csv, PriorDistribution};
use capkit::metrics::{
    build_corpus_stats, score_pairs, FluencyBackend, LexicalCosine, RemoteScorer, ScoringItem, SimilarityBackend,
};
use capkit::perturb::{emit_report, read_pairs, sample_pairs, suitability_grid, write_pairs, ReferenceMode};
use capkit::report::{cdf_svg, write_atomic, write_text_atomic};
use capkit::{Corpus, Error, ErrorKind, Metric, PerturbationPair, Scorer, VerbLexicon};

use crate::args::*;
use crate::summary::Summary;

/// Why a run stopped; decides the exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Run(Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Run(e) if e.is_backend() => 3,
            Failure::Run(e) if e.is_invalid_argument() => 1,
            Failure::Run(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Run(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn data(msg: impl Into<String>) -> Failure {
    Failure::Run(Error::Data(msg.into()))
}

/// Inputs must exist and outputs must land in an existing directory before
/// any work starts.
fn check_input(path: &Path) -> Outcome {
    if path.is_file() {
        Ok(())
    } else {
        Err(usage(format!(
            "input {} does not exist or is not a file",
            path.display()
        )))
    }
}

fn check_output(path: &Path) -> Outcome {
    let parent = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    if parent.is_dir() {
        Ok(())
    } else {
        Err(usage(format!("output directory {} does not exist", parent.display())))
    }
}

fn digest(summary: &mut Summary, path: &Path) -> Outcome {
    summary
        .input(path)
        .map_err(|e| Failure::Run(Error::Data(format!("{}: {e}", path.display()))))
}

pub fn run(cli: &Cli) -> Outcome<Summary> {
    match &cli.command {
        Command::Ingest(a) => ingest(a, cli.seed),
        Command::Vocab(a) => vocab(a, cli.seed),
        Command::Perturb(a) => perturb(a, cli.seed),
        Command::Score(a) => score(a, cli.seed),
        Command::Suitability(a) => suitability(a, cli.seed),
        Command::Augment(a) => augment(a, cli.seed),
        Command::LossWeights(a) => loss_weights(a, cli.seed),
        Command::LossEval(a) => loss_eval(a, cli.seed),
    }
}

fn ingest(a: &IngestArgs, seed: u64) -> Outcome<Summary> {
    check_input(&a.csv)?;
    check_output(&a.out)?;
    let audio_dir = || {
        a.audio_dir
            .as_deref()
            .ok_or_else(|| usage("--audio-dir is required for CSV input"))
    };
    let mut corpus = match a.format {
        Format::Clotho => load_clotho_csv(&a.csv, audio_dir()?)?,
        Format::Audiocaps => load_audiocaps_csv(&a.csv, audio_dir()?)?,
        Format::Manifest => load_manifest(&a.csv)?,
    };
    let before = corpus.len();
    if let Some(k) = a.max_words {
        corpus = filter_max_words(&corpus, k)?;
    }
    write_manifest(&corpus, &a.out)?;

    let mut s = Summary::new("ingest", seed);
    digest(&mut s, &a.csv)?;
    s.field("clips", corpus.len());
    s.field("dropped", before - corpus.len());
    s.field("captions", corpus.captions().count());
    Ok(s)
}

fn vocab(a: &VocabArgs, seed: u64) -> Outcome<Summary> {
    let input = a
        .manifest
        .as_deref()
        .or(a.captions.as_deref())
        .expect("clap enforces one input");
    check_input(input)?;
    check_output(&a.out_csv)?;
    if let Some(svg) = &a.svg {
        check_output(svg)?;
    }
    let stats = match &a.manifest {
        Some(m) => load_manifest(m)?.vocab()?.clone(),
        None => {
            let lines = read_lines(input)?;
            if lines.is_empty() {
                return Err(data(format!("{} holds no captions", input.display())));
            }
            let tokens: Vec<Vec<String>> = lines.iter().map(|l| tokenize(l)).collect();
            VocabStats::from_token_lists(tokens.iter().map(Vec::as_slice))?
        }
    };
    let cdf = vocab_cdf(&stats)?;
    let svg = a
        .svg
        .as_ref()
        .map(|_| cdf_svg("cumulative word probability", &cdf))
        .transpose()?;
    write_atomic(&a.out_csv, |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["rank", "word", "count", "prior", "cdf"])?;
        let total = stats.total_tokens as f64;
        for (i, (word, count)) in stats.ranked_counts().enumerate() {
            out.write_record([
                (i + 1).to_string(),
                word.to_owned(),
                count.to_string(),
                (count as f64 / total).to_string(),
                cdf[i].to_string(),
            ])?;
        }
        out.flush().map_err(|e| Error::Data(format!("writing vocabulary: {e}")))
    })?;
    if let (Some(path), Some(svg)) = (&a.svg, svg) {
        write_text_atomic(path, &svg)?;
    }

    let mut s = Summary::new("vocab", seed);
    digest(&mut s, input)?;
    s.field("distinct", stats.distinct());
    s.field("tokens", stats.total_tokens);
    if let Some(c) = cdf.get(999) {
        s.field("cdf_at_1000", format!("{c:.4}"));
    }
    Ok(s)
}

fn read_lines(path: &Path) -> Outcome<Vec<String>> {
    let file = std::fs::File::open(path).map_err(|e| Failure::Run(Error::Data(format!("{}: {e}", path.display()))))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| data(format!("{}: {e}", path.display())))?;
        if !line.trim().is_empty() {
            out.push(line);
        }
    }
    Ok(out)
}

fn parse_kinds(spec: &str) -> Outcome<Vec<ErrorKind>> {
    if spec.trim() == "all" {
        return Ok(ErrorKind::ALL.to_vec());
    }
    let mut kinds: Vec<ErrorKind> = spec
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| usage(format!("unknown kind {s:?}"))))
        .collect::<Outcome<_>>()?;
    kinds.sort();
    kinds.dedup();
    if kinds.is_empty() {
        return Err(usage("--kind selects nothing"));
    }
    Ok(kinds)
}

fn perturb(a: &PerturbArgs, seed: u64) -> Outcome<Summary> {
    check_input(&a.manifest)?;
    if let Some(l) = &a.lexicon {
        check_input(l)?;
    }
    check_output(&a.out)?;
    let kinds = parse_kinds(&a.kind)?;
    if a.n == 0 {
        return Err(usage("--n must be positive"));
    }
    let corpus = load_manifest(&a.manifest)?;
    let lexicon = match &a.lexicon {
        Some(p) => VerbLexicon::load(p)?,
        None => VerbLexicon::default(),
    };

    let mut s = Summary::new("perturb", seed);
    let mut pairs: Vec<PerturbationPair> = Vec::new();
    for &kind in &kinds {
        match sample_pairs(&corpus, kind, a.n, seed, &lexicon) {
            Ok(p) => {
                s.field(kind.as_str(), p.len());
                pairs.extend(p);
            }
            // with several kinds requested, a kind without candidates is skipped
            Err(Error::Data(msg)) if kinds.len() > 1 => {
                log::warn!("{msg}; skipping");
                s.field(kind.as_str(), 0);
            }
            Err(e) => return Err(e.into()),
        }
    }
    if pairs.is_empty() {
        return Err(data("no perturbation candidates for any requested kind"));
    }
    write_atomic(&a.out, |w| write_pairs(&pairs, w))?;
    digest(&mut s, &a.manifest)?;
    if let Some(l) = &a.lexicon {
        digest(&mut s, l)?;
    }
    s.field("pairs", pairs.len());
    Ok(s)
}

enum Backend {
    Lexical(LexicalCosine),
    Remote(RemoteScorer),
}

struct Selection {
    metrics: Vec<Metric>,
    backend: Backend,
}

impl Selection {
    fn parse(a: &BackendArgs) -> Outcome<Self> {
        let metrics = Metric::parse_list(&a.metrics).map_err(|e| usage(e.to_string()))?;
        let backend = if a.backend == "lexical" {
            Backend::Lexical(LexicalCosine::default())
        } else if let Some(url) = a.backend.strip_prefix("remote:") {
            if url.is_empty() {
                return Err(usage("remote backend needs a URL: remote:http://host:port"));
            }
            Backend::Remote(RemoteScorer::new(url, Duration::from_secs(a.timeout_s)))
        } else {
            return Err(usage(format!(
                "unknown backend {:?}; use lexical or remote:URL",
                a.backend
            )));
        };
        if let Backend::Lexical(_) = backend {
            if let Some(m) = metrics.iter().find(|m| m.needs_fluency()) {
                return Err(usage(format!("{m} needs a fluency model; use --backend remote:URL")));
            }
        }
        Ok(Selection { metrics, backend })
    }

    fn connect(&self) -> Outcome {
        if let Backend::Remote(r) = &self.backend {
            if self.metrics.iter().any(|m| m.needs_similarity()) {
                r.health_check()?;
            }
        }
        Ok(())
    }

    fn scorer(&self) -> Scorer<'_> {
        let (similarity, fluency): (&dyn SimilarityBackend, Option<&dyn FluencyBackend>) = match &self.backend {
            Backend::Lexical(l) => (l, None),
            Backend::Remote(r) => (r, Some(r)),
        };
        Scorer {
            similarity: Some(similarity),
            fluency,
            ..Scorer::default()
        }
    }
}

fn score(a: &ScoreArgs, seed: u64) -> Outcome<Summary> {
    let sel = Selection::parse(&a.backend)?;
    check_output(&a.out)?;
    let mut s = Summary::new("score", seed);
    match (&a.pairs, &a.hyp, &a.refs) {
        (Some(pairs), _, _) => {
            check_input(pairs)?;
            sel.connect()?;
            score_pair_file(&sel, pairs, &a.out, &mut s)?;
            digest(&mut s, pairs)?;
        }
        (None, Some(hyp), Some(refs)) => {
            check_input(hyp)?;
            check_input(refs)?;
            sel.connect()?;
            score_hyp_refs(&sel, hyp, refs, &a.out, &mut s)?;
            digest(&mut s, hyp)?;
            digest(&mut s, refs)?;
        }
        _ => return Err(usage("give --pairs, or --hyp with --refs")),
    }
    Ok(s)
}

fn read_pair_file(path: &Path) -> Outcome<Vec<PerturbationPair>> {
    let file = std::fs::File::open(path).map_err(|e| data(format!("{}: {e}", path.display())))?;
    let pairs = read_pairs(file)?;
    if pairs.is_empty() {
        return Err(data(format!("{} holds no pairs", path.display())));
    }
    Ok(pairs)
}

fn score_pair_file(sel: &Selection, path: &Path, out: &Path, s: &mut Summary) -> Outcome {
    let pairs = read_pair_file(path)?;
    let originals: Vec<Vec<String>> = pairs.iter().map(|p| p.original.tokens().to_vec()).collect();
    let stats = build_corpus_stats(&originals)?;
    let scorer = sel.scorer().with_stats(&stats);
    let items = |pick: fn(&PerturbationPair) -> &capkit::Caption| -> Vec<ScoringItem> {
        pairs
            .iter()
            .map(|p| ScoringItem {
                hypothesis: pick(p).text().to_owned(),
                references: vec![p.original.text().to_owned()],
            })
            .collect()
    };
    let (t1, t2) = (items(|p| &p.type1), items(|p| &p.type2));
    let mut rows = Vec::new();
    for &m in &sel.metrics {
        let a = score_pairs(m, &t1, &scorer)?;
        let b = score_pairs(m, &t2, &scorer)?;
        s.field(format!("mean_type1_{m}"), a.mean);
        s.field(format!("mean_type2_{m}"), b.mean);
        rows.push((m, a, b));
    }
    write_atomic(out, |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["id", "kind", "metric", "type1", "type2"])?;
        for (m, a, b) in &rows {
            for (i, p) in pairs.iter().enumerate() {
                csv.write_record([
                    p.id.clone(),
                    p.kind.to_string(),
                    m.to_string(),
                    a.items[i].value.to_string(),
                    b.items[i].value.to_string(),
                ])?;
            }
        }
        csv.flush().map_err(|e| Error::Data(format!("writing scores: {e}")))
    })?;
    s.field("pairs", pairs.len());
    Ok(())
}

fn score_hyp_refs(sel: &Selection, hyp: &Path, refs: &Path, out: &Path, s: &mut Summary) -> Outcome {
    let hyps = read_lines(hyp)?;
    let ref_lines = read_lines(refs)?;
    if hyps.len() != ref_lines.len() {
        return Err(data(format!(
            "{} hypotheses but {} reference lines",
            hyps.len(),
            ref_lines.len()
        )));
    }
    if hyps.is_empty() {
        return Err(data("no hypotheses to score"));
    }
    let items: Vec<ScoringItem> = hyps
        .into_iter()
        .zip(&ref_lines)
        .enumerate()
        .map(|(i, (h, r))| {
            let references: Vec<String> = serde_json::from_str(r).map_err(|e| {
                data(format!(
                    "{} line {}: expected a JSON string array: {e}",
                    refs.display(),
                    i + 1
                ))
            })?;
            Ok(ScoringItem {
                hypothesis: h,
                references,
            })
        })
        .collect::<Outcome<_>>()?;
    let scorer = sel.scorer();
    let mut rows = Vec::new();
    for &m in &sel.metrics {
        let scores = score_pairs(m, &items, &scorer)?;
        s.field(format!("mean_{m}"), scores.mean);
        rows.push((m, scores));
    }
    write_atomic(out, |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["index", "metric", "value"])?;
        for (m, scores) in &rows {
            for (i, v) in scores.items.iter().enumerate() {
                csv.write_record([i.to_string(), m.to_string(), v.value.to_string()])?;
            }
        }
        csv.flush().map_err(|e| Error::Data(format!("writing scores: {e}")))
    })?;
    s.field("items", items.len());
    Ok(())
}

fn suitability(a: &SuitabilityArgs, seed: u64) -> Outcome<Summary> {
    let sel = Selection::parse(&a.backend)?;
    check_input(&a.pairs)?;
    check_output(&a.out_csv)?;
    if let Some(svg) = &a.svg {
        check_output(svg)?;
    }
    let corpus: Option<Corpus> = match (a.references, &a.manifest) {
        (References::Original, _) => None,
        (References::Clip, Some(m)) => {
            check_input(m)?;
            Some(load_manifest(m)?)
        }
        (References::Clip, None) => return Err(usage("--references clip needs --manifest")),
    };
    let mode = match &corpus {
        Some(c) => ReferenceMode::ClipCaptions(c),
        None => ReferenceMode::Original,
    };
    let pairs = read_pair_file(&a.pairs)?;
    sel.connect()?;
    let results = suitability_grid(&sel.metrics, &pairs, &sel.scorer(), mode)?;
    emit_report(&results, &a.out_csv, a.svg.as_deref())?;

    let mut s = Summary::new("suitability", seed);
    digest(&mut s, &a.pairs)?;
    if let Some(m) = &a.manifest {
        digest(&mut s, m)?;
    }
    s.field("pairs", pairs.len());
    s.field("rows", results.len());
    Ok(s)
}

/// Relative audio paths are tried as given, then against the manifest's directory.
fn resolve_audio(corpus: Corpus, manifest: &Path) -> Outcome<Corpus> {
    let base = manifest.parent().map(Path::to_path_buf).unwrap_or_default();
    let items = corpus
        .into_items()
        .into_iter()
        .map(|mut clip| {
            if clip.audio_path.is_relative() && !clip.audio_path.exists() {
                let alt: PathBuf = base.join(&clip.audio_path);
                if alt.exists() {
                    clip.audio_path = alt;
                }
            }
            clip
        })
        .collect();
    Ok(Corpus::new(items)?)
}

fn augment(a: &AugmentArgs, seed: u64) -> Outcome<Summary> {
    check_input(&a.clotho)?;
    check_input(&a.audiocaps)?;
    if a.count == 0 {
        return Err(usage("--count must be positive"));
    }
    if a.out_dir.exists() && !a.out_dir.is_dir() {
        return Err(usage(format!("{} is not a directory", a.out_dir.display())));
    }
    let mut templates = MixTemplates::default();
    if let Some(t) = &a.template_equal {
        templates.equal = t.clone();
    }
    if let Some(t) = &a.template_primary_louder {
        templates.primary_louder = t.clone();
    }
    if let Some(t) = &a.template_secondary_louder {
        templates.secondary_louder = t.clone();
    }
    templates.validate().map_err(|e| usage(e.to_string()))?;

    let clotho = resolve_audio(load_manifest(&a.clotho)?, &a.clotho)?;
    let all_audiocaps = resolve_audio(load_manifest(&a.audiocaps)?, &a.audiocaps)?;
    let audiocaps = filter_max_words(&all_audiocaps, AUDIOCAPS_MAX_WORDS)?;
    if clotho.is_empty() || audiocaps.is_empty() {
        return Err(data(format!(
            "need clips on both sides: {} clotho, {} audiocaps with captions of at most {AUDIOCAPS_MAX_WORDS} words",
            clotho.len(),
            audiocaps.len()
        )));
    }
    let method = match a.method {
        MethodArg::Concat => Method::Concat,
        MethodArg::Mixing => Method::Mixing,
    };
    let cfg = AugmentConfig {
        method,
        count: a.count,
        seed,
        templates,
    };
    let produced = augment_dataset(&clotho, &audiocaps, &cfg, &WavFiles, &a.out_dir)?;

    let mut s = Summary::new("augment", seed);
    digest(&mut s, &a.clotho)?;
    digest(&mut s, &a.audiocaps)?;
    s.field("method", method.as_str());
    s.field("items", produced.len());
    s.field("audiocaps_used", audiocaps.len());
    s.field("audiocaps_skipped", all_audiocaps.len() - audiocaps.len());
    Ok(s)
}

fn loss_weights(a: &LossWeightsArgs, seed: u64) -> Outcome<Summary> {
    let input = a
        .counts
        .as_deref()
        .or(a.manifest.as_deref())
        .expect("clap enforces one input");
    check_input(input)?;
    check_output(&a.out_csv)?;
    let stats = match (&a.counts, &a.manifest) {
        (Some(c), _) => load_token_counts(c)?,
        (None, Some(m)) => load_manifest(m)?.vocab()?.clone(),
        (None, None) => unreachable!("clap enforces one input"),
    };
    let prior = PriorDistribution::from_vocab(&stats)?;
    let weights = balanced_weights(&prior, a.max_weight).map_err(|e| usage(e.to_string()))?;
    write_atomic(&a.out_csv, |w| write_weights_csv(&prior, &weights, w))?;

    let mut s = Summary::new("loss-weights", seed);
    digest(&mut s, input)?;
    s.field("words", prior.len());
    s.field("max_weight", a.max_weight);
    Ok(s)
}

fn parse_floats(flag: &str, spec: &str) -> Outcome<Vec<f64>> {
    let values: Vec<f64> = spec
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| usage(format!("{flag}: {s:?} is not a number")))
        })
        .collect::<Outcome<_>>()?;
    if values.is_empty() {
        return Err(usage(format!("{flag} is empty")));
    }
    Ok(values)
}

/// `start:end:count` inclusive, or a comma list.
fn parse_grid(spec: &str) -> Outcome<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [start, end, count] => {
            let bad = || usage(format!("--alpha-grid {spec:?}: expected start:end:count"));
            let start: f64 = start.trim().parse().map_err(|_| bad())?;
            let end: f64 = end.trim().parse().map_err(|_| bad())?;
            let count: usize = count.trim().parse().map_err(|_| bad())?;
            match count {
                0 => Err(bad()),
                1 => Ok(vec![start]),
                _ => Ok((0..count)
                    .map(|i| match i {
                        _ if i == count - 1 => end,
                        _ => start + (end - start) * i as f64 / (count - 1) as f64,
                    })
                    .collect()),
            }
        }
        [_] => parse_floats("--alpha-grid", spec),
        _ => Err(usage(format!("--alpha-grid {spec:?}: expected start:end:count"))),
    }
}

fn loss_eval(a: &LossEvalArgs, seed: u64) -> Outcome<Summary> {
    check_output(&a.out_csv)?;
    let gammas = parse_floats("--gamma-list", &a.gamma_list)?;
    let alphas = parse_grid(&a.alpha_grid)?;
    let sweep = gamma_sweep_table(&alphas, &gammas).map_err(|e| usage(e.to_string()))?;
    write_atomic(&a.out_csv, |w| sweep.write_csv(w))?;

    let mut s = Summary::new("loss-eval", seed);
    s.field("gammas", gammas.len());
    s.field("alphas", alphas.len());
    s.field("rows", gammas.len() * alphas.len());
    Ok(s)
}
