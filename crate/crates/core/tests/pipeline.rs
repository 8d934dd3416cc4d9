use itboost::boosting::{train, BoostConfig, Loss, TrustMode};
use itboost::complexity::Encoding;
use itboost::data::{load_csv, stratified_kfold, LabelColumn};
use itboost::eval::{cross_validate, cross_validate_runs, CvOptions};
use itboost::noise::{inject, read_mask_rows, NoiseKind, NoiseSpec};
use itboost::synth::{two_gaussians, SynthSpec};
use itboost::theory::{read_trace_complexities, split_by_rows, split_complexities};
use itboost::Model;
use tempfile::TempDir;

fn data(n: usize, seed: u64) -> itboost::Dataset {
    two_gaussians(&SynthSpec {
        n,
        d: 4,
        seed,
        ..SynthSpec::default()
    })
    .unwrap()
}

#[test]
fn csv_train_save_load_predicts_identically() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("d.csv");
    data(120, 3).write_csv(&path).unwrap();
    let loaded = load_csv(&path, &LabelColumn::parse("label"), "1").unwrap();
    assert_eq!(loaded.n_rows(), 120);

    let config = BoostConfig {
        iterations: 15,
        incremental_lz: true,
        ..BoostConfig::default()
    };
    let (model, _) = train(&loaded, &config).unwrap();
    let model_path = dir.path().join("m.txt");
    model.save(&model_path).unwrap();
    let back = Model::load(&model_path).unwrap();
    assert_eq!(back, model);
    for i in 0..loaded.n_rows() {
        let x = loaded.row(i);
        assert_eq!(
            back.predict_score(x).unwrap().to_bits(),
            model.predict_score(x).unwrap().to_bits()
        );
    }
}

#[test]
fn incremental_and_rescan_lz_train_the_same_model() {
    let ds = data(100, 5);
    for encoding in [Encoding::BinarySign, Encoding::BinaryDelta, Encoding::Quantized] {
        let base = BoostConfig {
            iterations: 25,
            loss: Loss::Squared,
            encoding,
            ..BoostConfig::default()
        };
        let (a, _) = train(&ds, &base).unwrap();
        let (b, _) = train(
            &ds,
            &BoostConfig {
                incremental_lz: true,
                ..base
            },
        )
        .unwrap();
        assert_eq!(a.trees, b.trees, "{encoding}");
    }
}

#[test]
fn trace_and_mask_files_reproduce_in_memory_split() {
    let dir = TempDir::new().unwrap();
    let (noisy, mask) = inject(&data(90, 1), &NoiseSpec::new(NoiseKind::Symmetric, 0.2, 4).unwrap()).unwrap();
    let config = BoostConfig {
        iterations: 12,
        loss: Loss::Squared,
        ..BoostConfig::default()
    };
    let (_, trace) = train(&noisy, &config).unwrap();
    let (trace_path, mask_path) = (dir.path().join("t.csv"), dir.path().join("m.csv"));
    trace.save_csv(&trace_path).unwrap();
    mask.save_csv(&mask_path).unwrap();

    let (iteration, ids, values) = read_trace_complexities(&trace_path, None).unwrap();
    assert_eq!(iteration, 12);
    let rows = read_mask_rows(&mask_path).unwrap();
    assert_eq!(rows, mask.rows);
    let (clean, noisy_group) = split_by_rows(&ids, &values, &rows).unwrap();
    let (c2, n2) = split_complexities(&trace, 12, &mask).unwrap();
    assert_eq!(clean.values(), c2.values());
    assert_eq!(noisy_group.values(), n2.values());
}

#[test]
fn cross_validation_is_deterministic_and_cleans_test_folds() {
    let ds = data(150, 8);
    let plan = stratified_kfold(&ds, 5, 2).unwrap();
    let spec = NoiseSpec::new(NoiseKind::Asymmetric, 0.3, 2).unwrap();
    let config = BoostConfig {
        iterations: 10,
        trust: TrustMode::MagnitudeOnly,
        ..BoostConfig::default()
    };
    let a = cross_validate(&ds, &config, &plan, Some(&spec)).unwrap();
    let b = cross_validate(&ds, &config, &plan, Some(&spec)).unwrap();
    assert_eq!(a.to_csv_string(false), b.to_csv_string(false));

    let options = CvOptions {
        noise: Some(spec),
        ..CvOptions::default()
    };
    for run in cross_validate_runs(&ds, &config, &plan, &options).unwrap() {
        let (_, test) = plan.split(run.result.fold);
        let clean: Vec<i8> = test.iter().map(|&i| ds.labels()[i]).collect();
        assert_eq!(run.test_labels, clean);
        let mask = run.mask.unwrap();
        assert_eq!(run.result.noisy_rows, mask.len());
        // asymmetric noise only turns positives negative
        for (i, &id) in run.train.row_ids().iter().enumerate() {
            if mask.contains(id) {
                assert_eq!(run.train.labels()[i], -1);
                assert_eq!(ds.labels()[id], 1);
            }
        }
    }
}

#[test]
fn separable_task_is_solved_without_noise() {
    // axis-aligned trees need more than the Bayes margin on a diagonal boundary
    let ds = two_gaussians(&SynthSpec {
        d: 4,
        sep: 5.0,
        ..SynthSpec::default()
    })
    .unwrap();
    let plan = stratified_kfold(&ds, 5, 42).unwrap();
    let config = BoostConfig {
        trust: TrustMode::Disabled,
        ..BoostConfig::default()
    };
    let report = cross_validate(&ds, &config, &plan, None).unwrap();
    assert!(report.acc.mean >= 0.95, "{}", report.acc.mean);
}
