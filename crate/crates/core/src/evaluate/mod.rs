//! Accuracy metrics, synthetic corpora and the experiment harness.

mod experiment;
mod synthetic;

pub use experiment::{
    cross_series_experiment, feature_size_sweep, fit_rotation, rotation_docs, CrossSeriesCell, CrossSeriesTable,
    ExperimentConfig, MethodCell, MulticlassCell, Pipeline, Rotation, SweepCell, SweepTable,
};
pub use synthetic::{generate_synthetic, NameProfile, SeriesNames, SyntheticSpec};

use crate::classify::Member;
use crate::corpus::Category;
use crate::dataset::LabeledDocs;
use crate::error::{Error, Result};

/// Fraction of positions where `predictions` and `gold` agree.
pub fn accuracy<T: PartialEq>(predictions: &[T], gold: &[T]) -> Result<f64> {
    if predictions.len() != gold.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: gold.len(),
        });
    }
    if gold.is_empty() {
        return Err(Error::Empty("accuracy of zero predictions".into()));
    }
    let hits = predictions.iter().zip(gold).filter(|(p, g)| p == g).count();
    Ok(hits as f64 / gold.len() as f64)
}

/// Accuracy of `member`'s relevant/irrelevant decisions against `label == category`.
pub fn binary_accuracy(member: &Member, docs: &LabeledDocs, category: Category) -> Result<f64> {
    let predicted: Vec<bool> = docs.tokens.iter().map(|t| member.decide(t)).collect();
    let gold: Vec<bool> = docs.labels.iter().map(|l| *l == category).collect();
    accuracy(&predicted, &gold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{BinaryModel, Hyperparams, Method};
    use crate::preprocess::Vocabulary;

    #[test]
    fn accuracy_counts() {
        use Category::*;
        assert_eq!(accuracy(&[Plot, Role], &[Plot, Role]).unwrap(), 1.0);
        assert_eq!(accuracy(&[Plot, Role], &[Role, Plot]).unwrap(), 0.0);
        assert_eq!(accuracy(&[Plot, Role, Role, Plot], &[Plot, Role, Role, Role]).unwrap(), 0.75);
        assert!(matches!(accuracy::<Category>(&[], &[]), Err(Error::Empty(_))));
        assert!(matches!(accuracy(&[Plot], &[]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn stub_accuracy() {
        let stub = Member {
            method: Method::Svm,
            category: Category::Role,
            vocabulary: Vocabulary::default(),
            parameters: BinaryModel::Constant { positive: false },
            hyperparameters: Hyperparams::default(),
            seed: 0,
            stub: true,
        };
        let negatives = LabeledDocs {
            tokens: vec![vec!["a".into()], vec![]],
            labels: vec![Category::Plot, Category::Analysis],
        };
        assert_eq!(binary_accuracy(&stub, &negatives, Category::Role).unwrap(), 1.0);
        let positives = LabeledDocs {
            tokens: vec![vec!["a".into()]],
            labels: vec![Category::Role],
        };
        assert_eq!(binary_accuracy(&stub, &positives, Category::Role).unwrap(), 0.0);
        assert!(binary_accuracy(&stub, &LabeledDocs::default(), Category::Role).is_err());
    }
}
