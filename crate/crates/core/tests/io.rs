mod support;

use mimic::checkpoint::Checkpoint;
use mimic::embedding::format_component;
use mimic::model::Model;
use mimic::ngram::{NgramConfig, NgramVocab};
use mimic::{EmbeddingSpace, Error, SamplerConfig};
use ndarray::Array1;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn component() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e3f64..1e3,
        (-1.0f64..1.0, -30i32..30).prop_map(|(m, e)| m * 10f64.powi(e)),
        Just(0.0),
    ]
}

fn space() -> impl Strategy<Value = EmbeddingSpace> {
    (1usize..6).prop_flat_map(|d| {
        prop::collection::btree_map("[a-z]{1,8}", prop::collection::vec(component(), d), 1..20).prop_map(move |words| {
            EmbeddingSpace::from_pairs(d, words.into_iter().map(|(w, v)| (w, Array1::from(v)))).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn text_round_trip_keeps_nine_digits(space in space()) {
        let mut buf = Vec::new();
        space.write_text(&mut buf).unwrap();
        let back = EmbeddingSpace::read_text(buf.as_slice()).unwrap();
        prop_assert_eq!(back.len(), space.len());
        for (w, v) in space.iter() {
            let r = back.get(w).unwrap();
            for (x, y) in v.iter().zip(r.iter()) {
                prop_assert!((x - y).abs() <= 5e-9 * x.abs(), "{} -> {}", x, y);
            }
        }
        let mut again = Vec::new();
        back.write_text(&mut again).unwrap();
        prop_assert_eq!(again, buf);
    }

    #[test]
    fn formatting_parses_back(x in component()) {
        let parsed: f64 = format_component(x).parse().unwrap();
        prop_assert!((parsed - x).abs() <= 5e-9 * x.abs());
    }
}

#[test]
fn headerless_and_header_files_agree() {
    let with = EmbeddingSpace::read_text("2 3\nb 1 2 3\na 4 5 6\n".as_bytes()).unwrap();
    let without = EmbeddingSpace::read_text("b 1 2 3\na 4 5 6\n".as_bytes()).unwrap();
    assert_eq!(with.get("a"), without.get("a"));
    assert_eq!(with.dim(), 3);
}

#[test]
fn malformed_text_is_rejected() {
    for bad in ["a 1 2\nb 1\n", "3 2\na 1 2\n", "a 1 x\n", "a 1 2\na 3 4\n", "a NaN 1\n"] {
        assert!(EmbeddingSpace::read_text(bad.as_bytes()).is_err(), "{bad:?}");
    }
}

fn sample_checkpoint() -> Checkpoint {
    let vocab = NgramVocab::build(["rarely", "barely", "fairly"], NgramConfig::default());
    let model = Model::new(vocab, 5, true, &mut ChaCha8Rng::seed_from_u64(3));
    Checkpoint {
        model,
        sampler: SamplerConfig {
            seed: 42,
            ..SamplerConfig::default()
        },
        epochs_completed: 0,
        epoch_losses: vec![1.5, f64::MIN_POSITIVE, 1.0 / 3.0],
    }
}

#[test]
fn checkpoint_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.amck");
    let ckpt = sample_checkpoint();
    ckpt.save(&path).unwrap();
    let loaded = Checkpoint::load(&path).unwrap();
    assert_eq!(loaded, ckpt);
    let p = (ckpt.model.params(), loaded.model.params());
    assert!(p
        .0
        .ngrams
        .iter()
        .zip(p.1.ngrams.iter())
        .all(|(a, b)| a.to_bits() == b.to_bits()));
}

#[test]
fn corrupted_checkpoints_fail_cleanly() {
    let mut bytes = Vec::new();
    sample_checkpoint().write_to(&mut bytes).unwrap();
    for cut in [0, 3, 8, bytes.len() / 2, bytes.len() - 1] {
        let err = Checkpoint::read_from(&mut &bytes[..cut]).unwrap_err();
        assert!(matches!(err, Error::Checkpoint(_) | Error::Io(_)), "cut {cut}: {err:?}");
    }
    let mut padded = bytes.clone();
    padded.push(0);
    assert!(Checkpoint::read_from(&mut padded.as_slice()).is_err());
}

#[test]
fn missing_checkpoint_names_the_path() {
    let err = Checkpoint::load("/nonexistent/model.amck").unwrap_err();
    assert!(err.to_string().contains("/nonexistent/model.amck"));
}
