use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use movoc::bpe::{BpeTrainer, Fallback, VocabEntry, Vocabulary};
use movoc::corpus::{
    gen_synthetic_corpus, read_plain_corpus, synthetic_alphabet, AnnotatedCorpus, Inventory,
    SegmentedCorpus, WordCounts,
};
use movoc::metrics::{evaluate, Averaging, EvalOptions, MetricReport, ScoreMode};
use movoc::pipeline::{build_vocabulary, run_pipeline, training_corpus, LanguageInput};
use movoc::pretok::{normalize, pretokenize, NormalizationPolicy};
use movoc::segmenter::{train_constrained_with, train_plain, Mode, TokenizerModel, TrainOptions};
use movoc::vocab::{extract_morphemes, Budget, MoVoCConfig, MorphemeList, VocabSizes};

use crate::run::{usage, Run};
use crate::{
    BuildVocabArgs, CompareArgs, DecodeArgs, EncodeArgs, EvalArgs, ExtractArgs, FallbackArg,
    GenArgs, Global, InputArgs, PipelineArgs, ScoreArgs, TrainArgs, TrainBpeArgs, TrainMode,
};

#[derive(Serialize)]
struct Invocation<'a, A: Serialize> {
    global: &'a Global,
    args: &'a A,
}

/// Writes `bytes` to `--out` (with a manifest) or stdout.
fn emit<A: Serialize>(
    mut run: Run,
    global: &Global,
    command: &str,
    args: &A,
    bytes: Vec<u8>,
) -> Result<()> {
    let invocation = Invocation { global, args };
    match &global.out {
        Some(path) => {
            run.output(path.clone(), bytes);
            run.finish(command, &invocation, None)
        }
        None => run.finish(command, &invocation, Some(&bytes)),
    }
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

fn load_policy(run: &mut Run, global: &Global) -> Result<NormalizationPolicy> {
    match &global.policy {
        Some(path) => {
            let text = run.read_text(Some(path))?;
            NormalizationPolicy::from_json(&text)
                .with_context(|| format!("invalid policy {}", path.display()))
        }
        None => Ok(NormalizationPolicy::default()),
    }
}

fn load_model(run: &mut Run, path: &Path) -> Result<TokenizerModel> {
    let text = run.read_text(Some(path))?;
    TokenizerModel::from_json(&text)
        .with_context(|| format!("cannot load model {}", path.display()))
}

fn load_annotations(run: &mut Run, path: &Path, language: &str) -> Result<AnnotatedCorpus> {
    let bytes = run.read(Some(path))?;
    let parsed = match path.extension().and_then(|e| e.to_str()) {
        Some("jsonl") | Some("json") => AnnotatedCorpus::read_jsonl(bytes.as_slice(), language),
        _ => AnnotatedCorpus::read_tsv(bytes.as_slice(), language),
    };
    parsed.with_context(|| format!("cannot parse {}", path.display()))
}

fn load_counts(
    run: &mut Run,
    path: &Path,
    policy: &NormalizationPolicy,
    language: &str,
) -> Result<WordCounts> {
    let bytes = run.read(Some(path))?;
    let mut counts = read_plain_corpus(bytes.as_slice(), policy)
        .with_context(|| format!("cannot read corpus {}", path.display()))?;
    counts.language = Some(language.to_string()).filter(|l| !l.is_empty());
    Ok(counts)
}

pub fn normalize_cmd(global: &Global, args: &InputArgs) -> Result<()> {
    let mut run = Run::new();
    let policy = load_policy(&mut run, global)?;
    let text = run.read_text(args.input.as_deref())?;
    let mut out = String::new();
    for line in text.lines() {
        let n = normalize(line, &policy);
        if global.json {
            out.push_str(&serde_json::to_string(&n)?);
        } else {
            out.push_str(&n.text);
        }
        out.push('\n');
    }
    emit(run, global, "normalize", args, out.into_bytes())
}

pub fn pretokenize_cmd(global: &Global, args: &InputArgs) -> Result<()> {
    let mut run = Run::new();
    let policy = load_policy(&mut run, global)?;
    let text = run.read_text(args.input.as_deref())?;
    let mut out = String::new();
    for line in text.lines() {
        let toks = pretokenize(&normalize(line, &policy), &policy);
        if global.json {
            out.push_str(&serde_json::to_string(&toks)?);
        } else {
            let texts: Vec<&str> = toks.iter().map(|t| t.text.as_str()).collect();
            out.push_str(&texts.join(" "));
        }
        out.push('\n');
    }
    emit(run, global, "pretokenize", args, out.into_bytes())
}

pub fn train_bpe(global: &Global, args: &TrainBpeArgs) -> Result<()> {
    let mut run = Run::new();
    let policy = load_policy(&mut run, global)?;
    let lang = args.lang.clone().unwrap_or_default();
    let counts = load_counts(&mut run, &args.corpus, &policy, &lang)?;
    let trainer = BpeTrainer {
        end_of_word: args.end_of_word.clone(),
    };
    let (vocab, merges) = trainer.train(&counts, args.size)?;
    let mut model = TokenizerModel::new(
        &vocab,
        merges,
        BTreeSet::new(),
        Mode::PlainBpe,
        Fallback::Unk,
        args.end_of_word.clone(),
    )?;
    model.metadata.learned_merges = model.merges().len();
    model.metadata.config = serde_json::json!({ "target_size": args.size });
    model
        .metadata
        .corpus_fingerprints
        .insert(lang, counts.fingerprint());
    model.metadata.toolkit_version = movoc::VERSION.to_string();
    emit(
        run,
        global,
        "train-bpe",
        args,
        model.to_json()?.into_bytes(),
    )
}

pub fn extract_morphemes_cmd(global: &Global, args: &ExtractArgs) -> Result<()> {
    let mut run = Run::new();
    let policy = load_policy(&mut run, global)?;
    let mut annotations = load_annotations(&mut run, &args.segmented, &args.lang)?;
    if let Some(corpus) = &args.corpus {
        annotations.reweight(&load_counts(&mut run, corpus, &policy, &args.lang)?);
    }
    let list = extract_morphemes(
        annotations.entries.iter().map(|(a, c)| (a, *c)),
        args.k,
        &args.lang,
    );
    let bytes = if global.json {
        json_bytes(&list)?
    } else {
        let mut s = String::new();
        for (m, c) in list.iter() {
            writeln!(s, "{m}\t{c}")?;
        }
        s.into_bytes()
    };
    emit(run, global, "extract-morphemes", args, bytes)
}

/// Vocabulary artifact written by `build-vocab`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VocabArtifact {
    pub budgets: Vec<Budget>,
    pub sizes: VocabSizes,
    pub morphemes: Vec<MorphemeList>,
    pub vocab: Vec<VocabEntry>,
}

fn parse_lang_spec(spec: &str) -> Result<(String, Option<PathBuf>, PathBuf)> {
    let bad = || {
        usage(format!(
            "--lang {spec:?} is not of the form tag=plain.txt:segmented.tsv"
        ))
    };
    let (tag, paths) = spec.split_once('=').ok_or_else(bad)?;
    let (plain, segmented) = paths.split_once(':').ok_or_else(bad)?;
    if tag.is_empty() || segmented.is_empty() {
        return Err(bad());
    }
    let plain = (!plain.is_empty()).then(|| PathBuf::from(plain));
    Ok((tag.to_string(), plain, PathBuf::from(segmented)))
}

fn language_inputs(
    run: &mut Run,
    policy: &NormalizationPolicy,
    specs: &[(String, Option<PathBuf>, PathBuf)],
) -> Result<Vec<LanguageInput>> {
    specs
        .iter()
        .map(|(tag, plain, segmented)| {
            let plain = match plain {
                Some(p) => load_counts(run, p, policy, tag)?,
                None => WordCounts::default(),
            };
            Ok(LanguageInput {
                language: tag.clone(),
                plain,
                annotations: load_annotations(run, segmented, tag)?,
            })
        })
        .collect()
}

pub fn build_vocab(global: &Global, args: &BuildVocabArgs) -> Result<()> {
    let mut run = Run::new();
    let policy = load_policy(&mut run, global)?;
    let specs = args
        .langs
        .iter()
        .map(|s| parse_lang_spec(s))
        .collect::<Result<Vec<_>>>()?;
    let config = MoVoCConfig {
        size: args.size,
        ratio: args.ratio,
        languages: specs.iter().map(|(t, _, _)| t.clone()).collect(),
    };
    config.validate()?;
    let inputs = language_inputs(&mut run, &policy, &specs)?;
    let stage = build_vocabulary(&config, &inputs)?;
    let artifact = VocabArtifact {
        budgets: stage.budgets,
        sizes: stage.sizes,
        morphemes: stage.morphemes,
        vocab: stage.vocabulary.entries().to_vec(),
    };
    emit(run, global, "build-vocab", args, json_bytes(&artifact)?)
}

pub fn train(global: &Global, args: &TrainArgs) -> Result<()> {
    let mut run = Run::new();
    let policy = load_policy(&mut run, global)?;
    let gold: Option<SegmentedCorpus> = match &args.segmented {
        Some(p) => Some(load_annotations(&mut run, p, &args.lang)?.to_segmented()),
        None => None,
    };
    let counts = match (&args.corpus, &gold) {
        (Some(p), _) => load_counts(&mut run, p, &policy, &args.lang)?,
        (None, Some(g)) => g.word_counts(),
        (None, None) => return Err(usage("train needs --corpus or --segmented")),
    };

    let model = match args.mode {
        TrainMode::Bpe => {
            if args.vocab.is_some() {
                return Err(usage("--vocab applies to --mode movoc only"));
            }
            train_plain(&counts, args.merges)?
        }
        TrainMode::Movoc => {
            let gold =
                gold.ok_or_else(|| usage("--mode movoc needs --segmented gold boundaries"))?;
            let corpus = training_corpus(&args.lang, &[counts], &[gold])?;
            let (seed, closed) = match &args.vocab {
                Some(p) => {
                    let text = run.read_text(Some(p))?;
                    let artifact: VocabArtifact = serde_json::from_str(&text)
                        .with_context(|| format!("invalid vocabulary artifact {}", p.display()))?;
                    (Vocabulary::from_entries(artifact.vocab)?, true)
                }
                None => (Vocabulary::with_specials(), false),
            };
            train_constrained_with(
                &corpus,
                &seed,
                &TrainOptions {
                    n_merges: args.merges,
                    closed_vocabulary: closed,
                    ..Default::default()
                },
            )?
        }
    };
    emit(run, global, "train", args, model.to_json()?.into_bytes())
}

pub fn encode(global: &Global, args: &EncodeArgs) -> Result<()> {
    let mut run = Run::new();
    let policy = load_policy(&mut run, global)?;
    let mut model = load_model(&mut run, &args.model)?;
    if let Some(f) = args.fallback {
        model = model.with_fallback(match f {
            FallbackArg::Unk => Fallback::Unk,
            FallbackArg::CharPassthrough => Fallback::CharPassthrough,
        });
    }
    let text = run.read_text(args.input.as_deref())?;
    let mut out = String::new();
    for line in text.lines() {
        let normalized = normalize(line, &policy);
        let toks = model.encode_text(&normalized, &policy);
        if global.json {
            let rows: Vec<serde_json::Value> = toks
                .iter()
                .map(|t| {
                    let base = t.pretoken.span.0;
                    serde_json::json!({
                        "pretoken": t.pretoken.text,
                        "kind": t.pretoken.kind,
                        "ids": t.encoding.token_ids,
                        "tokens": t.encoding.tokens,
                        "spans": t.encoding.spans.iter().map(|&(s, e)| (base + s, base + e)).collect::<Vec<_>>(),
                    })
                })
                .collect();
            out.push_str(&serde_json::to_string(
                &serde_json::json!({ "text": normalized.text, "pretokens": rows }),
            )?);
        } else if args.ids {
            let groups: Vec<String> = toks
                .iter()
                .map(|t| {
                    t.encoding
                        .token_ids
                        .iter()
                        .map(u32::to_string)
                        .collect::<Vec<_>>()
                        .join(",")
                })
                .collect();
            out.push_str(&groups.join(" "));
        } else if args.offsets {
            let spans: Vec<String> = toks
                .iter()
                .flat_map(|t| {
                    let base = t.pretoken.span.0;
                    t.encoding
                        .spans
                        .iter()
                        .map(move |&(s, e)| format!("{}:{}", base + s, base + e))
                })
                .collect();
            out.push_str(&spans.join(" "));
        } else {
            let tokens: Vec<&str> = toks
                .iter()
                .flat_map(|t| t.encoding.tokens.iter().map(String::as_str))
                .collect();
            out.push_str(&tokens.join(" "));
        }
        out.push('\n');
    }
    emit(run, global, "encode", args, out.into_bytes())
}

pub fn decode(global: &Global, args: &DecodeArgs) -> Result<()> {
    let mut run = Run::new();
    let policy = load_policy(&mut run, global)?;
    let model = load_model(&mut run, &args.model)?;
    let text = run.read_text(args.input.as_deref())?;
    let mut out = String::new();
    for (i, line) in text.lines().enumerate() {
        let groups = line
            .split_whitespace()
            .map(|g| {
                g.split(',')
                    .map(str::parse::<u32>)
                    .collect::<std::result::Result<Vec<_>, _>>()
            })
            .collect::<std::result::Result<Vec<_>, _>>()
            .with_context(|| format!("line {}: expected comma-separated token ids", i + 1))?;
        let decoded = model
            .decode_groups(&groups, &policy)
            .with_context(|| format!("line {}", i + 1))?;
        out.push_str(&decoded);
        out.push('\n');
    }
    emit(run, global, "decode", args, out.into_bytes())
}

fn eval_options(args: &ScoreArgs) -> EvalOptions {
    EvalOptions {
        alpha: args.alpha,
        score_mode: if args.strict {
            ScoreMode::Strict
        } else {
            ScoreMode::Fractional
        },
        averaging: if args.macro_average {
            Averaging::Macro
        } else {
            Averaging::Micro
        },
    }
}

struct ScoreInputs {
    gold: SegmentedCorpus,
    text: Option<WordCounts>,
    options: EvalOptions,
}

fn score_inputs(run: &mut Run, global: &Global, args: &ScoreArgs) -> Result<ScoreInputs> {
    let policy = load_policy(run, global)?;
    let gold = load_annotations(run, &args.gold, "")?.to_segmented();
    let text = match &args.text {
        Some(p) => Some(load_counts(run, p, &policy, "")?),
        None => None,
    };
    Ok(ScoreInputs {
        gold,
        text,
        options: eval_options(args),
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("-".to_string(), |x| format!("{x:.4}"))
}

fn report_rows(r: &MetricReport) -> Vec<(&'static str, String)> {
    vec![
        ("morph_score", fmt_opt(r.morph_score)),
        ("boundary_precision", fmt_opt(r.boundary_precision)),
        ("boundary_recall", fmt_opt(r.boundary_recall)),
        ("renyi_entropy", format!("{:.4}", r.renyi_entropy)),
        ("tokens_per_word", format!("{:.4}", r.tokens_per_word)),
        ("words_total", r.words_total.to_string()),
        ("words_scored", r.words_scored.to_string()),
        ("words_unsegmented", r.words_unsegmented.to_string()),
        (
            "words_no_gold_boundary",
            r.words_no_gold_boundary.to_string(),
        ),
        (
            "words_excluded_nonprojectable",
            r.words_excluded_nonprojectable.to_string(),
        ),
    ]
}

pub fn eval(global: &Global, args: &EvalArgs) -> Result<()> {
    let mut run = Run::new();
    let inputs = score_inputs(&mut run, global, &args.score)?;
    let model = load_model(&mut run, &args.model)?;
    let report = evaluate(&model, &inputs.gold, inputs.text.as_ref(), &inputs.options)?;
    let bytes = if global.json {
        json_bytes(&report)?
    } else {
        let mut s = String::new();
        for (k, v) in report_rows(&report) {
            writeln!(s, "{k:<30} {v:>10}")?;
        }
        writeln!(
            s,
            "{:<30} {:>10}",
            "entropy",
            format!("alpha={} {}", report.alpha, report.entropy_unit)
        )?;
        s.into_bytes()
    };
    emit(run, global, "eval", args, bytes)
}

/// `model_b - model_a` for each headline metric.
#[derive(Debug, Serialize)]
pub struct Deltas {
    pub morph_score: Option<f64>,
    pub boundary_precision: Option<f64>,
    pub boundary_recall: Option<f64>,
    pub renyi_entropy: f64,
    pub tokens_per_word: f64,
}

#[derive(Debug, Serialize)]
pub struct Comparison {
    pub model_a: MetricReport,
    pub model_b: MetricReport,
    pub delta: Deltas,
}

fn sub(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some(b? - a?)
}

pub fn compare(global: &Global, args: &CompareArgs) -> Result<()> {
    let mut run = Run::new();
    let inputs = score_inputs(&mut run, global, &args.score)?;
    let a = load_model(&mut run, &args.model_a)?;
    let b = load_model(&mut run, &args.model_b)?;
    let ra = evaluate(&a, &inputs.gold, inputs.text.as_ref(), &inputs.options)?;
    let rb = evaluate(&b, &inputs.gold, inputs.text.as_ref(), &inputs.options)?;
    let delta = Deltas {
        morph_score: sub(ra.morph_score, rb.morph_score),
        boundary_precision: sub(ra.boundary_precision, rb.boundary_precision),
        boundary_recall: sub(ra.boundary_recall, rb.boundary_recall),
        renyi_entropy: rb.renyi_entropy - ra.renyi_entropy,
        tokens_per_word: rb.tokens_per_word - ra.tokens_per_word,
    };
    let cmp = Comparison {
        model_a: ra,
        model_b: rb,
        delta,
    };
    let bytes = if global.json {
        json_bytes(&cmp)?
    } else {
        let signed = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:+.4}"));
        let deltas = [
            signed(cmp.delta.morph_score),
            signed(cmp.delta.boundary_precision),
            signed(cmp.delta.boundary_recall),
            signed(Some(cmp.delta.renyi_entropy)),
            signed(Some(cmp.delta.tokens_per_word)),
        ];
        let mut s = String::new();
        writeln!(
            s,
            "{:<30} {:>10} {:>10} {:>10}",
            "metric", "model_a", "model_b", "delta"
        )?;
        let rows = report_rows(&cmp.model_a)
            .into_iter()
            .zip(report_rows(&cmp.model_b));
        for (i, ((k, va), (_, vb))) in rows.enumerate() {
            let d = deltas.get(i).cloned().unwrap_or_default();
            writeln!(s, "{k:<30} {va:>10} {vb:>10} {d:>10}")?;
        }
        s.into_bytes()
    };
    emit(run, global, "compare", args, bytes)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PipelineConfig {
    size: usize,
    ratio: f64,
    #[serde(default)]
    merges: Option<usize>,
    languages: Vec<PipelineLanguage>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PipelineLanguage {
    tag: String,
    #[serde(default)]
    plain: Option<PathBuf>,
    segmented: PathBuf,
}

pub fn pipeline(global: &Global, args: &PipelineArgs) -> Result<()> {
    let mut run = Run::new();
    let policy = load_policy(&mut run, global)?;
    let out_dir = global
        .out
        .clone()
        .ok_or_else(|| usage("pipeline needs --out DIR"))?;
    let text = run.read_text(Some(&args.config))?;
    let config: PipelineConfig = serde_json::from_str(&text).map_err(|e| {
        usage(format!(
            "invalid pipeline config {}: {e}",
            args.config.display()
        ))
    })?;
    let movoc_config = MoVoCConfig {
        size: config.size,
        ratio: config.ratio,
        languages: config.languages.iter().map(|l| l.tag.clone()).collect(),
    };
    movoc_config
        .validate()
        .with_context(|| format!("invalid pipeline config {}", args.config.display()))?;

    let base = args.config.parent().unwrap_or(Path::new(""));
    let specs: Vec<(String, Option<PathBuf>, PathBuf)> = config
        .languages
        .iter()
        .map(|l| {
            (
                l.tag.clone(),
                l.plain.as_ref().map(|p| base.join(p)),
                base.join(&l.segmented),
            )
        })
        .collect();
    let inputs = language_inputs(&mut run, &policy, &specs)?;
    let out = run_pipeline(&movoc_config, &inputs, config.merges)?;

    let artifact = VocabArtifact {
        budgets: out.budgets.clone(),
        sizes: out.sizes,
        morphemes: out.morphemes.clone(),
        vocab: out.vocabulary.entries().to_vec(),
    };
    run.output(
        out_dir.join("model.json"),
        out.model.to_json()?.into_bytes(),
    );
    run.output(out_dir.join("vocab.json"), json_bytes(&artifact)?);
    run.output(out_dir.join("summary.json"), json_bytes(&out.summary())?);
    let summary = if global.json {
        json_bytes(&out.summary())?
    } else {
        format!(
            "vocabulary {} (raw sum {}), {} merges, written to {}\n",
            out.sizes.deduplicated,
            out.sizes.raw_sum,
            out.model.merges().len(),
            out_dir.display()
        )
        .into_bytes()
    };
    run.finish("pipeline", &Invocation { global, args }, None)?;
    use std::io::Write;
    std::io::stdout().write_all(&summary)?;
    Ok(())
}

pub fn gen_synthetic(global: &Global, args: &GenArgs) -> Result<()> {
    let mut run = Run::new();
    let inventory = Inventory::random(
        global.seed,
        args.prefixes,
        args.stems,
        args.suffixes,
        &synthetic_alphabet(),
    )?;
    let corpus = gen_synthetic_corpus(global.seed, args.words, &inventory)?;
    let mut gold = String::new();
    let mut plain = String::new();
    for (seg, count) in corpus.iter() {
        for _ in 0..count {
            gold.push_str(&seg.format_line());
            gold.push('\n');
        }
        let words = vec![seg.surface(); count as usize];
        plain.push_str(&words.join(" "));
        plain.push('\n');
    }
    if let Some(p) = &args.plain {
        let out = global
            .out
            .clone()
            .ok_or_else(|| usage("--plain needs --out for the gold file"))?;
        run.output(out, gold.into_bytes());
        run.output(p.clone(), plain.into_bytes());
        return run.finish("gen-synthetic", &Invocation { global, args }, None);
    }
    emit(run, global, "gen-synthetic", args, gold.into_bytes())
}
