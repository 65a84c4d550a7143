//! Model families fitted end to end: feature encoding, λ path, CV selection,
//! prediction and the serialized model file.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::cv::{cv_deviance, select_min, CvCurve};
use crate::data::{design_matrix, standardize, Coding, Dataset, FeatureMeta, FoldAssignment, StandardizationRecord};
use crate::glinternet::{build_groups, fit_glinternet, GlinternetModel};
use crate::lasso::{fit_logistic_lasso, predict_proba, LambdaGrid, LassoPath, PathEntry, PenaltySpec, SolverOptions};
use crate::pretrained::PretrainedModel;
use crate::{Error, Float, Result};

/// Turns a dataset into the solver matrix: optional categorical expansion,
/// then centering and scaling of the continuous columns seen in training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Encoder<F: Float> {
    pub features: Vec<FeatureMeta>,
    /// `None` keeps categorical level codes, for designs that expand them.
    pub coding: Option<Coding>,
    pub columns: Vec<String>,
    pub standardization: StandardizationRecord<F>,
}

impl<F: Float> Encoder<F> {
    pub fn fit(ds: &Dataset<F>, coding: Option<Coding>) -> Result<Self> {
        let (x, columns, continuous) = Self::expand(ds, coding);
        let (_, standardization) = standardize(x.view(), &continuous, &columns)?;
        Ok(Self { features: ds.features().to_vec(), coding, columns, standardization })
    }

    fn expand(ds: &Dataset<F>, coding: Option<Coding>) -> (Array2<F>, Vec<String>, Vec<usize>) {
        match coding {
            Some(c) => {
                let (x, cols) = design_matrix(ds, c);
                let continuous = cols.iter().enumerate().filter(|(_, c)| c.level.is_none()).map(|(j, _)| j).collect();
                (x, cols.into_iter().map(|c| c.name).collect(), continuous)
            }
            None => {
                let names = ds.features().iter().map(|f| f.name.clone()).collect();
                (ds.x().clone(), names, ds.continuous_columns())
            }
        }
    }

    pub fn transform(&self, ds: &Dataset<F>) -> Result<Array2<F>> {
        if ds.features() != self.features.as_slice() {
            return Err(Error::InvalidInput("dataset features differ from the ones the model was fitted on".into()));
        }
        let (x, _, _) = Self::expand(ds, self.coding);
        self.standardization.apply(x.view())
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }
}

/// λ grid and solver controls for one model family.
#[derive(Debug, Clone, PartialEq)]
pub struct FitSettings<F: Float> {
    pub lambdas: LambdaGrid<F>,
    pub solver: SolverOptions<F>,
}

impl<F: Float> FitSettings<F> {
    pub fn lasso() -> Self {
        Self { lambdas: LambdaGrid::default(), solver: SolverOptions::default() }
    }

    /// Smallest-λ ratio 1e-2 and KKT tolerance 1e-6.
    pub fn glinternet() -> Self {
        Self {
            lambdas: LambdaGrid::Auto { n_lambda: 50, eps_ratio: Some(F::lit(1e-2)) },
            solver: SolverOptions::default().with_tol(F::lit(1e-6)),
        }
    }
}

/// Lasso path on all rows with its CV curve over the same λ values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LassoCvFit<F: Float> {
    pub path: LassoPath<F>,
    pub cv: CvCurve<F>,
    pub selected: usize,
}

impl<F: Float> LassoCvFit<F> {
    pub fn selected_entry(&self) -> &PathEntry<F> {
        &self.path.entries[self.selected]
    }
}

/// Fits the path on every row, then cross-validates the same λ values; the
/// offset, if any, is split along with the rows.
pub fn lasso_cv<F: Float>(
    x: ArrayView2<F>,
    y: ArrayView1<F>,
    spec: &PenaltySpec<F>,
    folds: &FoldAssignment,
    opts: &SolverOptions<F>,
) -> Result<LassoCvFit<F>> {
    let path = fit_logistic_lasso(x, y, spec, opts)?;
    let lambdas = path.lambdas();
    let labels: Vec<bool> = y.iter().map(|&v| v == F::one()).collect();
    let cv = cv_deviance(&labels, folds, lambdas.clone(), |train, valid| {
        let xt = x.select(Axis(0), train);
        let yt = y.select(Axis(0), train);
        let xv = x.select(Axis(0), valid);
        let mut fold_spec = spec.clone().with_lambdas(LambdaGrid::Given(lambdas.clone()));
        fold_spec.offset = spec.offset.as_ref().map(|o| o.select(Axis(0), train));
        let ov = spec.offset.as_ref().map(|o| o.select(Axis(0), valid));
        let fold_path = fit_logistic_lasso(xt.view(), yt.view(), &fold_spec, opts)?;
        fold_path
            .entries
            .iter()
            .map(|e| Ok(predict_proba(e, xv.view(), ov.as_ref().map(|o| o.view()))?.to_vec()))
            .collect()
    })?;
    let selected = select_min(&cv);
    Ok(LassoCvFit { path, cv, selected })
}

/// Plain lasso with CV-selected λ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LassoModel<F: Float> {
    pub encoder: Encoder<F>,
    pub fit: LassoCvFit<F>,
}

impl<F: Float> LassoModel<F> {
    pub fn selected_entry(&self) -> &PathEntry<F> {
        self.fit.selected_entry()
    }

    pub fn predict_proba(&self, ds: &Dataset<F>) -> Result<Array1<F>> {
        predict_proba(self.selected_entry(), self.encoder.transform(ds)?.view(), None)
    }
}

pub fn fit_lasso<F: Float>(train: &Dataset<F>, folds: &FoldAssignment, settings: &FitSettings<F>) -> Result<LassoModel<F>> {
    fit_lasso_with(Encoder::fit(train, Some(Coding::Reference))?, train, folds, settings)
}

/// As [`fit_lasso`] with a given encoder, e.g. one standardized on a larger
/// population than `train`.
pub fn fit_lasso_with<F: Float>(
    encoder: Encoder<F>,
    train: &Dataset<F>,
    folds: &FoldAssignment,
    settings: &FitSettings<F>,
) -> Result<LassoModel<F>> {
    let x = encoder.transform(train)?;
    let spec = PenaltySpec::uniform(x.ncols()).with_lambdas(settings.lambdas.clone());
    let fit = lasso_cv(x.view(), train.y_float().view(), &spec, folds, &settings.solver)?;
    Ok(LassoModel { encoder, fit })
}

/// Interaction model with CV-selected λ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GlinternetFit<F: Float> {
    pub encoder: Encoder<F>,
    pub model: GlinternetModel<F>,
    pub cv: CvCurve<F>,
    pub selected: usize,
}

impl<F: Float> GlinternetFit<F> {
    pub fn predict_proba(&self, ds: &Dataset<F>) -> Result<Array1<F>> {
        self.model.predict_proba(self.selected, self.encoder.transform(ds)?.view())
    }
}

pub fn fit_glinternet_cv<F: Float>(train: &Dataset<F>, folds: &FoldAssignment, settings: &FitSettings<F>) -> Result<GlinternetFit<F>> {
    fit_glinternet_cv_with(Encoder::fit(train, None)?, train, folds, settings)
}

/// As [`fit_glinternet_cv`] with a given encoder, which must keep
/// categorical level codes (`coding: None`).
pub fn fit_glinternet_cv_with<F: Float>(
    encoder: Encoder<F>,
    train: &Dataset<F>,
    folds: &FoldAssignment,
    settings: &FitSettings<F>,
) -> Result<GlinternetFit<F>> {
    if encoder.coding.is_some() {
        return Err(Error::InvalidInput("interaction models need an encoder without categorical expansion".into()));
    }
    let x = encoder.transform(train)?;
    let y = train.y_float();
    let structure = build_groups(train.features())?;
    let model = fit_glinternet(x.view(), y.view(), &structure, &settings.lambdas, &settings.solver)?;
    let lambdas = model.path.lambdas();
    let cv = cv_deviance(train.y(), folds, lambdas.clone(), |t, v| {
        let xt = x.select(Axis(0), t);
        let yt = y.select(Axis(0), t);
        let xv = x.select(Axis(0), v);
        let m = fit_glinternet(xt.view(), yt.view(), &structure, &LambdaGrid::Given(lambdas.clone()), &settings.solver)?;
        (0..m.path.len()).map(|idx| Ok(m.predict_proba(idx, xv.view())?.to_vec())).collect()
    })?;
    let selected = select_min(&cv);
    Ok(GlinternetFit { encoder, model, cv, selected })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", tag = "family", rename_all = "snake_case")]
pub enum FittedModel<F: Float> {
    Lasso(LassoModel<F>),
    Glinternet(GlinternetFit<F>),
    #[serde(rename = "ptlasso")]
    Pretrained(PretrainedModel<F>),
}

impl<F: Float> FittedModel<F> {
    pub fn family(&self) -> &'static str {
        match self {
            FittedModel::Lasso(_) => "lasso",
            FittedModel::Glinternet(_) => "glinternet",
            FittedModel::Pretrained(_) => "ptlasso",
        }
    }

    /// Probabilities for every row. `allow_fallback` lets the pretrained
    /// model score unseen groups with its overall fit.
    pub fn predict_proba(&self, ds: &Dataset<F>, allow_fallback: bool) -> Result<Array1<F>> {
        match self {
            FittedModel::Lasso(m) => m.predict_proba(ds),
            FittedModel::Glinternet(m) => m.predict_proba(ds),
            FittedModel::Pretrained(m) => Ok(m.predict_proba(ds, allow_fallback)?.0),
        }
    }

    pub fn cv_curve(&self) -> &CvCurve<F> {
        match self {
            FittedModel::Lasso(m) => &m.fit.cv,
            FittedModel::Glinternet(m) => &m.cv,
            FittedModel::Pretrained(m) => &m.overall.cv,
        }
    }
}

/// Serialized model with the training data configuration it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ModelFile<F: Float> {
    pub data_config: String,
    pub seed: u64,
    /// Identifies the train/test split the model was fit on; evaluations
    /// against a different split are refused.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<String>,
    pub model: FittedModel<F>,
}

impl<F: Float> ModelFile<F> {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
