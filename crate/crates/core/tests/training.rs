use miscal::calibration::{self, AttackSpec};
use miscal::checkpoint::{self, Manifest};
use miscal::data::{synth_blobs, BlobSpec};
use miscal::nn::checksum;
use miscal::training::{accuracy, train};
use miscal::{AttackConfig, Method, Model, Strategy, TrainConfig};

fn blobs(classes: usize, per_class: usize, dim: usize) -> miscal::Dataset {
    synth_blobs(&BlobSpec {
        classes,
        per_class,
        dim,
        spread: 0.05,
        seed: 7,
    })
    .unwrap()
}

#[test]
fn plain_training_is_bitwise_reproducible() {
    let ds = blobs(4, 40, 8);
    let cfg = TrainConfig {
        seed: 3,
        ..TrainConfig::new(Strategy::Plain, 0.2, 15)
    };
    let init = Model::init(&[8, 12, 4], 1).unwrap();
    let (a, ha) = train(&init, &ds, &cfg).unwrap();
    let (b, hb) = train(&init, &ds, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(ha.checksum, hb.checksum);
    let manifest = Manifest::new(1);
    assert_eq!(
        checkpoint::encode(&a, &manifest),
        checkpoint::encode(&b, &manifest)
    );
}

#[test]
fn every_strategy_is_reproducible() {
    let ds = blobs(3, 20, 6);
    let init = Model::init(&[6, 8, 3], 2).unwrap();
    for strategy in [
        Strategy::Adversarial,
        Strategy::InverseAdversarial,
        Strategy::Combined,
    ] {
        let cfg = TrainConfig {
            inner_attack: AttackConfig::new(0.1, 3),
            ..TrainConfig::new(strategy, 0.1, 3)
        };
        let (a, _) = train(&init, &ds, &cfg).unwrap();
        let (b, _) = train(&init, &ds, &cfg).unwrap();
        assert_eq!(checksum(&a), checksum(&b), "{}", strategy.name());
        assert_ne!(checksum(&a), checksum(&init), "{}", strategy.name());
    }
}

#[test]
fn plain_loss_mostly_decreases_on_blobs() {
    let ds = blobs(10, 200, 32);
    let (train_ds, _) = ds.split(0.75, 7).unwrap();
    let cfg = TrainConfig {
        seed: 7,
        ..TrainConfig::new(Strategy::Plain, 0.1, 50)
    };
    let (model, history) = train(&Model::init(&[32, 16, 10], 7).unwrap(), &train_ds, &cfg).unwrap();
    let pairs = history.epochs.windows(2).count();
    let down = history
        .epochs
        .windows(2)
        .filter(|w| w[1].loss <= w[0].loss)
        .count();
    assert!(down * 10 >= pairs * 9, "{down}/{pairs}");
    assert!(accuracy(&model, &train_ds).unwrap() >= 0.97);
}

#[test]
fn two_class_blobs_are_separated() {
    let ds = blobs(2, 50, 4);
    let cfg = TrainConfig::new(Strategy::Plain, 0.5, 50);
    let (model, _) = train(&Model::init(&[4, 8, 2], 0).unwrap(), &ds, &cfg).unwrap();
    assert_eq!(accuracy(&model, &ds).unwrap(), 1.0);
}

#[test]
fn transfer_onto_itself_matches_whitebox() {
    let ds = blobs(3, 20, 6);
    let model = Model::init(&[6, 8, 3], 4).unwrap();
    let spec = AttackSpec {
        method: Method::Iaa,
        config: AttackConfig::new(0.2, 10).with_seed(5),
    };
    let white = calibration::evaluate(&model, &ds, Some(&spec), 10).unwrap();
    let transfer = calibration::evaluate_transfer(&model, &model, &ds, Some(&spec), 10).unwrap();
    assert_eq!(white, transfer);
}
