//! Binary relevance classifiers and their one-vs-rest composition.
//!
//! All three learners decide positive on ties: NB log-odds `>= 0`, LR
//! probability `>= 0.5`, SVM decision value `>= 0`.

mod lr;
mod nb;
mod ovr;
mod row;
mod svm;

pub use lr::{gradient as lr_gradient, lr_prob, objective as lr_objective, sigmoid, train_lr, train_lr_traced, LrModel, LrParams, PROB_FLOOR};
pub use nb::{nb_log_odds, smoothed, train_nb, NbModel, NbParams};
pub use ovr::{
    train_member, train_ovr, train_ovr_docs, BinaryModel, Hyperparams, Member, Method, OvrConfig, OvrModel,
    DEFAULT_BUDGETS,
};
pub use row::FeatureRow;
pub use svm::{hinge, primal_objective, refit_bias, svm_decision, train_svm, SvmModel, SvmParams};
