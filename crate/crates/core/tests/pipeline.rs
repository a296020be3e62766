//! End-to-end behavior: training quality on synthetic graphs, early
//! optimization progress, and the analysis plumbing around a trained
//! model.

mod common;

use tifa_gcl::distance::{intra_class_ratio_bins, PairScope};
use tifa_gcl::exec::ExecMode;
use tifa_gcl::gnn::{evaluate, train, Mode, TrainConfig};
use tifa_gcl::graph::{synth_sbm, Graph, SbmParams};
use tifa_gcl::pipeline::{compute_analysis, ArtifactParams};
use tifa_gcl::tig::{grid_report, tig_bin_accuracy};

fn separable_sbm(seed: u64) -> Graph {
    let params = SbmParams {
        k: 2,
        per_class: 100,
        p_in: 0.3,
        p_out: 0.01,
        noise: 0.1,
        labels_per_class: 10,
    };
    synth_sbm(&params, seed).unwrap()
}

#[test]
fn baseline_reaches_high_accuracy_on_a_separable_sbm() {
    let g = separable_sbm(1);
    let (_, analysis) = compute_analysis(
        &g,
        &ArtifactParams::default(),
        None,
        1,
        ExecMode::Sequential,
    )
    .unwrap();
    let config = TrainConfig::with_mode(Mode::Baseline, 1);
    let (model, log) = train(&g, &analysis, &config, ExecMode::Sequential).unwrap();
    let (test_acc, _) = evaluate(&model, &g, g.test_mask(), ExecMode::Sequential).unwrap();
    assert!(
        test_acc >= 0.95,
        "separable SBM should be nearly solved, got {test_acc} (best epoch {})",
        log.best_epoch
    );
}

#[test]
fn loss_decreases_over_the_first_epochs_at_small_lr() {
    let g = separable_sbm(2);
    let (_, analysis) = compute_analysis(
        &g,
        &ArtifactParams::default(),
        None,
        2,
        ExecMode::Sequential,
    )
    .unwrap();
    for mode in [Mode::Baseline, Mode::UniformGcl, Mode::TifaGcl] {
        let mut config = TrainConfig::with_mode(mode, 2);
        config.lr = 1e-3;
        config.dropout = 0.0;
        config.max_epochs = 5;
        config.min_epochs = 5;
        let (_, log) = train(&g, &analysis, &config, ExecMode::Sequential).unwrap();
        assert_eq!(log.epochs.len(), 5);
        let totals: Vec<f64> = log
            .epochs
            .iter()
            .map(|m| m.loss_ce + m.loss_unsup_mean)
            .collect();
        for w in totals.windows(2) {
            assert!(
                w[1] < w[0],
                "{mode}: loss did not decrease: {totals:?}"
            );
        }
    }
}

#[test]
fn returned_model_reproduces_the_best_epoch_validation_accuracy() {
    let g = separable_sbm(3);
    let (_, analysis) = compute_analysis(
        &g,
        &ArtifactParams::default(),
        None,
        3,
        ExecMode::Sequential,
    )
    .unwrap();
    let mut config = TrainConfig::with_mode(Mode::TifaGcl, 3);
    config.max_epochs = 40;
    config.hidden = 16;
    let (model, log) = train(&g, &analysis, &config, ExecMode::Sequential).unwrap();
    let (val_acc, _) = evaluate(&model, &g, g.val_mask(), ExecMode::Sequential).unwrap();
    assert_eq!(val_acc, log.best_val_acc);
    let best = log
        .epochs
        .iter()
        .find(|m| m.epoch == log.best_epoch)
        .unwrap();
    assert_eq!(best.val_acc, log.best_val_acc);
    assert_eq!(best.test_acc, log.best_test_acc);
    // Validation accuracy at the best epoch dominates every other epoch.
    assert!(log.epochs.iter().all(|m| m.val_acc <= log.best_val_acc));
}

#[test]
fn per_epoch_artifact_recompute_is_a_working_ablation() {
    let g = separable_sbm(4);
    let (_, analysis) = compute_analysis(
        &g,
        &ArtifactParams::default(),
        None,
        4,
        ExecMode::Sequential,
    )
    .unwrap();
    let mut config = TrainConfig::with_mode(Mode::TifaGcl, 4);
    config.max_epochs = 4;
    config.min_epochs = 2;
    config.hidden = 8;
    config.recompute_artifacts = true;
    let (_, log) = train(&g, &analysis, &config, ExecMode::Sequential).unwrap();
    assert_eq!(log.epochs.len(), 4);
    assert!(log.epochs.iter().all(|m| m.loss_ce.is_finite()));
}

#[test]
fn nearby_nodes_in_propagation_distance_share_classes_more_often() {
    let g = separable_sbm(5);
    let (lp, _) = compute_analysis(
        &g,
        &ArtifactParams::default(),
        None,
        5,
        ExecMode::Sequential,
    )
    .unwrap();
    let bins =
        intra_class_ratio_bins(g.csr(), &lp.z_star, g.labels(), 4, PairScope::All).unwrap();
    let first = bins.first().unwrap().ratio.unwrap();
    let last = bins.last().unwrap().ratio.unwrap();
    assert!(
        first > last + 0.2,
        "closest bin {first} should be clearly more intra-class than farthest {last}"
    );
}

#[test]
fn analysis_reports_cover_every_labeled_node() {
    let g = separable_sbm(6);
    let (lp, analysis) = compute_analysis(
        &g,
        &ArtifactParams::default(),
        None,
        6,
        ExecMode::Sequential,
    )
    .unwrap();
    let mut config = TrainConfig::with_mode(Mode::Baseline, 6);
    config.max_epochs = 40;
    let (model, _) = train(&g, &analysis, &config, ExecMode::Sequential).unwrap();
    let eval_mask: Vec<bool> = (0..g.n())
        .map(|i| !g.train_mask()[i] && g.label(i).is_some())
        .collect();
    let (_, preds) = evaluate(&model, &g, &eval_mask, ExecMode::Sequential).unwrap();

    let eval_labels: Vec<Option<usize>> = (0..g.n())
        .map(|i| if eval_mask[i] { g.label(i) } else { None })
        .collect();
    let grid = grid_report(
        &analysis.profile.intensity,
        &analysis.profile.clarity,
        &preds,
        &eval_labels,
        4,
    )
    .unwrap();
    let total: usize = grid
        .cells
        .iter()
        .flatten()
        .map(|cell| cell.count)
        .sum();
    let labeled = eval_labels.iter().filter(|l| l.is_some()).count();
    assert_eq!(total, labeled);

    let bins = tig_bin_accuracy(&analysis.profile.tig, &preds, &eval_labels, 3).unwrap();
    assert_eq!(bins.len(), 3);
    let bin_total: usize = bins.iter().map(|b| b.count).sum();
    assert_eq!(bin_total, labeled);
    assert_eq!(lp.z_star.rows(), g.n());
}
