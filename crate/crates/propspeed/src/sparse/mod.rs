//! Sparse model-structure discovery: a monomial feature library, LASSO by
//! cyclic coordinate descent, k-fold cross-validation over a log-spaced
//! regularization path, and one-standard-error model selection with an
//! unpenalized debiasing refit.

pub mod cv;
pub mod lasso;
pub mod library;
pub mod select;

pub use cv::{cv_lasso, default_lambda_grid, CvError, Design, LassoPath};
pub use lasso::{
    lambda_grid, lambda_max, lasso_cd_traced, lasso_coordinate_descent, standardize, CdTrace,
    LassoError, Standardized,
};
pub use library::{
    build_features_direct, build_features_indirect, DirectRecord, FeatureLibrary, IndirectRecord,
    LibraryError, TargetTransform,
};
pub use select::{select_lambda, SelectError, SelectedModel};
