mod common;

use movoc::corpus::{read_plain_corpus, AnnotatedCorpus, WordCounts};
use movoc::metrics::{evaluate, EvalOptions};
use movoc::pipeline::{run_pipeline, LanguageInput};
use movoc::pretok::{normalize, NormalizationPolicy};
use movoc::segmenter::{Mode, TokenizerModel};
use movoc::vocab::MoVoCConfig;

const GOLD: &str = "\
# surface\tmorphs
አልሰበሩም\tአል|ሰበሩ|ም
አልሰበረም\tአል|ሰበረ|ም
ሰበሩ\tሰበሩ
ቤቶች\tቤቶ|ች
ቤት\tቤት
";

const TEXT: &str = "አልሰበሩም ቤቶች። ቤት ሰበሩ አልሰበረም ቤቶች ቤቶች አልሰበሩም";

fn input(policy: &NormalizationPolicy) -> LanguageInput {
    let annotations = AnnotatedCorpus::read_tsv(GOLD.as_bytes(), "amh").unwrap();
    let plain: WordCounts = read_plain_corpus(TEXT.as_bytes(), policy).unwrap();
    LanguageInput {
        language: "amh".into(),
        plain,
        annotations,
    }
}

#[test]
fn text_pipeline_round_trip() {
    let policy = NormalizationPolicy::default();
    let config = MoVoCConfig {
        size: 24,
        ratio: 0.5,
        languages: vec!["amh".into()],
    };
    let out = run_pipeline(&config, &[input(&policy)], None).unwrap();
    let model = out.model;
    assert_eq!(model.mode(), Mode::Movoc);
    assert!(model.lexicon().contains("አል"));

    let text = normalize(TEXT, &policy);
    let toks = model.encode_text(&text, &policy);
    let groups: Vec<Vec<u32>> = toks.iter().map(|t| t.encoding.token_ids.clone()).collect();
    // Punctuation is not part of the word vocabulary and falls back to <unk>.
    assert_eq!(
        model.decode_groups(&groups, &policy).unwrap(),
        text.text.replace('።', " <unk>")
    );

    let json = model.to_json().unwrap();
    let loaded = TokenizerModel::from_json(&json).unwrap();
    assert_eq!(loaded.to_json().unwrap(), json);

    let gold = AnnotatedCorpus::read_tsv(GOLD.as_bytes(), "amh")
        .unwrap()
        .to_segmented();
    let report = evaluate(&model, &gold, None, &EvalOptions::default()).unwrap();
    assert_eq!(report.words_total, 5);
    assert!(report.boundary_recall.unwrap() > 0.0);
    for v in [
        report.morph_score,
        report.boundary_precision,
        report.boundary_recall,
    ]
    .into_iter()
    .flatten()
    {
        assert!((0.0..=1.0).contains(&v));
    }
    assert!(
        report.words_scored + report.words_unsegmented + report.words_no_gold_boundary
            <= report.words_total
    );
}

#[test]
fn pipeline_is_deterministic() {
    let policy = NormalizationPolicy::default();
    let config = MoVoCConfig {
        size: 30,
        ratio: 0.3,
        languages: vec!["amh".into()],
    };
    let a = run_pipeline(&config, &[input(&policy)], None).unwrap();
    let b = run_pipeline(&config, &[input(&policy)], None).unwrap();
    assert_eq!(a.model.to_json().unwrap(), b.model.to_json().unwrap());
}
