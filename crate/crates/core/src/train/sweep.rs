//! Experiment harnesses: hidden-size sweep and the embedding/suffix
//! ablation, plus the CSV writers for their outputs and for training
//! histories.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::text::TaggedSentence;

use super::{token_accuracy, train_tagger, EpochRecord, TrainConfig};

/// One row of a hidden-size sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub hidden: usize,
    pub dev_accuracy: f64,
    pub train_seconds: f64,
}

/// Train one model per hidden size, everything else held fixed, and
/// report dev accuracy and wall-clock training time for each.
pub fn hidden_size_sweep(
    sizes: &[usize],
    base: &TrainConfig,
    train: &[TaggedSentence],
    dev: &[TaggedSentence],
) -> Result<Vec<SweepRecord>> {
    if sizes.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut records = Vec::with_capacity(sizes.len());
    for &hidden in sizes {
        let cfg = TrainConfig { hidden, ..base.clone() };
        let start = Instant::now();
        let out = train_tagger(train, dev, &cfg, None)?;
        let train_seconds = start.elapsed().as_secs_f64();
        let dev_accuracy = token_accuracy(&out.model, dev)?.token_accuracy;
        records.push(SweepRecord { hidden, dev_accuracy, train_seconds });
    }
    Ok(records)
}

/// The model variants compared in the ablation: plain supervised
/// training, adding pretrained embeddings, and adding the suffix
/// feature on top.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AblationVariant {
    Baseline,
    Pretrained,
    PretrainedSuffix2,
}

impl AblationVariant {
    pub fn all() -> [AblationVariant; 3] {
        [
            AblationVariant::Baseline,
            AblationVariant::Pretrained,
            AblationVariant::PretrainedSuffix2,
        ]
    }

    pub fn name(self) -> &'static str {
        match self {
            AblationVariant::Baseline => "baseline",
            AblationVariant::Pretrained => "+we",
            AblationVariant::PretrainedSuffix2 => "+we+suffix2",
        }
    }

    fn needs_embeddings(self) -> bool {
        !matches!(self, AblationVariant::Baseline)
    }
}

/// One row of the ablation table.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationRecord {
    pub variant: &'static str,
    pub dev_accuracy: f64,
    pub test_accuracy: f64,
}

/// Train each variant under an otherwise identical config and score it
/// on dev and test. Variants using pretrained embeddings require
/// `emb_path`.
pub fn ablation_run(
    variants: &[AblationVariant],
    base: &TrainConfig,
    train: &[TaggedSentence],
    dev: &[TaggedSentence],
    test: &[TaggedSentence],
    emb_path: Option<&Path>,
) -> Result<Vec<AblationRecord>> {
    if variants.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut records = Vec::with_capacity(variants.len());
    for &variant in variants {
        let mut cfg = base.clone();
        cfg.emb_init = if variant.needs_embeddings() {
            let path = emb_path.ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "variant {} needs a pretrained embedding file",
                    variant.name()
                ))
            })?;
            Some(path.to_path_buf())
        } else {
            None
        };
        cfg.use_suffix2 = variant == AblationVariant::PretrainedSuffix2;
        let out = train_tagger(train, dev, &cfg, None)?;
        let dev_accuracy = token_accuracy(&out.model, dev)?.token_accuracy;
        let test_accuracy = token_accuracy(&out.model, test)?.token_accuracy;
        records.push(AblationRecord {
            variant: variant.name(),
            dev_accuracy,
            test_accuracy,
        });
    }
    Ok(records)
}

/// CSV with header `epoch,train_nll,dev_accuracy`; the accuracy field is
/// empty when no dev set was evaluated.
pub fn write_history_csv<W: Write>(mut w: W, records: &[EpochRecord]) -> Result<()> {
    writeln!(w, "epoch,train_nll,dev_accuracy")?;
    for r in records {
        match r.dev_accuracy {
            Some(acc) => writeln!(w, "{},{:.6},{:.6}", r.epoch, r.train_nll, acc)?,
            None => writeln!(w, "{},{:.6},", r.epoch, r.train_nll)?,
        }
    }
    Ok(())
}

/// CSV with header `hidden,dev_accuracy,train_seconds`.
pub fn write_sweep_csv<W: Write>(mut w: W, records: &[SweepRecord]) -> Result<()> {
    writeln!(w, "hidden,dev_accuracy,train_seconds")?;
    for r in records {
        writeln!(w, "{},{:.6},{:.6}", r.hidden, r.dev_accuracy, r.train_seconds)?;
    }
    Ok(())
}

/// CSV with header `variant,dev_accuracy,test_accuracy`.
pub fn write_ablation_csv<W: Write>(mut w: W, records: &[AblationRecord]) -> Result<()> {
    writeln!(w, "variant,dev_accuracy,test_accuracy")?;
    for r in records {
        writeln!(w, "{},{:.6},{:.6}", r.variant, r.dev_accuracy, r.test_accuracy)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{uniform_init, RngState};
    use crate::pretrain::export_embeddings;
    use crate::text::{build_vocab, normalize_surface, Token};
    use std::collections::BTreeSet;

    fn corpus() -> Vec<TaggedSentence> {
        let mut out = Vec::new();
        for (a, b) in [("the", "cat"), ("a", "dog"), ("the", "dog"), ("a", "cat")] {
            out.push(
                TaggedSentence::new(
                    vec![Token::new(a).unwrap(), Token::new(b).unwrap()],
                    vec!["D".into(), "N".into()],
                )
                .unwrap(),
            );
        }
        out
    }

    fn quick_cfg() -> TrainConfig {
        TrainConfig {
            learning_rate: 0.1,
            max_epochs: 4,
            hidden: 4,
            embed_dim: 4,
            seed: 3,
            patience: None,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn single_size_sweep_yields_one_record() {
        let data = corpus();
        let records = hidden_size_sweep(&[8], &quick_cfg(), &data, &data).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].hidden, 8);
        assert!((0.0..=1.0).contains(&records[0].dev_accuracy));
        assert!(records[0].train_seconds >= 0.0);
    }

    #[test]
    fn duplicate_sizes_repeat_the_same_accuracy() {
        let data = corpus();
        let records = hidden_size_sweep(&[6, 6], &quick_cfg(), &data, &data).unwrap();
        assert_eq!(records[0].dev_accuracy, records[1].dev_accuracy);
    }

    #[test]
    fn empty_size_list_rejected() {
        let data = corpus();
        assert!(matches!(
            hidden_size_sweep(&[], &quick_cfg(), &data, &data),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn sweep_csv_shape() {
        let records = vec![
            SweepRecord { hidden: 4, dev_accuracy: 0.5, train_seconds: 0.25 },
            SweepRecord { hidden: 16, dev_accuracy: 0.75, train_seconds: 1.0 },
        ];
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &records).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "hidden,dev_accuracy,train_seconds\n4,0.500000,0.250000\n16,0.750000,1.000000\n"
        );
    }

    #[test]
    fn history_csv_keeps_the_column_count_without_dev() {
        let records = vec![
            EpochRecord { epoch: 1, train_nll: 1.25, dev_accuracy: Some(0.5) },
            EpochRecord { epoch: 2, train_nll: 0.75, dev_accuracy: None },
        ];
        let mut buf = Vec::new();
        write_history_csv(&mut buf, &records).unwrap();
        let text = String::from_utf8(buf).unwrap();
        for line in text.lines() {
            assert_eq!(line.split(',').count(), 3, "line {line:?}");
        }
        assert!(text.contains("1,1.250000,0.500000\n"));
        assert!(text.contains("2,0.750000,\n"));
    }

    #[test]
    fn ablation_single_variant_gives_one_row() {
        let data = corpus();
        let records = ablation_run(
            &[AblationVariant::Baseline],
            &quick_cfg(),
            &data,
            &data,
            &data,
            None,
        )
        .unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].variant, "baseline");
    }

    #[test]
    fn pretrained_variant_without_a_path_is_an_error() {
        let data = corpus();
        let err = ablation_run(
            &[AblationVariant::Pretrained],
            &quick_cfg(),
            &data,
            &data,
            &data,
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }

    #[test]
    fn pretrained_variant_with_missing_file_is_an_error() {
        let data = corpus();
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("absent.txt");
        assert!(ablation_run(
            &[AblationVariant::Pretrained],
            &quick_cfg(),
            &data,
            &data,
            &data,
            Some(&missing),
        )
        .is_err());
    }

    #[test]
    fn full_ablation_produces_all_rows() {
        let data = corpus();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.txt");
        let words: BTreeSet<String> = data
            .iter()
            .flat_map(|s| s.tokens())
            .map(|t| normalize_surface(t.as_str()))
            .collect();
        let vocab = build_vocab(words.iter(), usize::MAX, &BTreeSet::new()).unwrap();
        let mut rng = RngState::new(9);
        let table = uniform_init(vocab.size(), 4, -0.1, 0.1, &mut rng).unwrap();
        export_embeddings(&table, &vocab, &path).unwrap();

        let records =
            ablation_run(&AblationVariant::all(), &quick_cfg(), &data, &data, &data, Some(&path))
                .unwrap();
        assert_eq!(records.len(), 3);
        assert_eq!(
            records.iter().map(|r| r.variant).collect::<Vec<_>>(),
            vec!["baseline", "+we", "+we+suffix2"]
        );
        let mut buf = Vec::new();
        write_ablation_csv(&mut buf, &records).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        for line in text.lines().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 3);
            let acc: f64 = fields[1].parse().unwrap();
            assert!((0.0..=1.0).contains(&acc));
        }
    }
}
