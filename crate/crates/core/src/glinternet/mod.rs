//! Hierarchical interaction selection by overlapped group lasso.
//!
//! Every feature has a main-effect group. Each pair `(c, j)` with `c` a
//! flagged candidate gets an interaction group holding its own copies of the
//! columns of `c` and `j` plus their product columns, so an interaction can
//! only enter together with both parents. The composite main effect of a
//! feature is the sum of its coefficients over every group containing it.

mod design;
mod solver;

use std::collections::BTreeMap;

use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::cv::CvCurve;
use crate::data::{validate_features, FeatureMeta};
use crate::lasso::{LambdaGrid, SolverOptions};
use crate::logistic::{clamp_prob, sigmoid};
use crate::{Error, Float, Result};

pub use design::InteractionDesign;
pub use solver::{group_kkt_check, GroupKktReport};

/// `0` when `‖v‖₂ ≤ t`, otherwise `v · (1 − t/‖v‖₂)`.
pub fn group_soft_threshold<F: Float>(v: ArrayView1<F>, t: F) -> Array1<F> {
    debug_assert!(t >= F::zero());
    let norm = v.dot(&v).sqrt();
    if norm <= t {
        Array1::zeros(v.len())
    } else {
        v.mapv(|x| x * (F::one() - t / norm))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    Main(usize),
    /// `(candidate, partner)`.
    Interaction(usize, usize),
}

/// Groups of the overlapped design.
///
/// Group `g < p` is the main effect of feature `g`; group `p + k` is the
/// interaction `pairs[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStructure {
    pub features: Vec<FeatureMeta>,
    /// `(candidate, partner)` in candidate-major feature order.
    pub pairs: Vec<(usize, usize)>,
    /// Penalty weight γ per group.
    pub weights: Vec<f64>,
}

/// Candidate-by-feature interaction groups with `γ = sqrt(columns)`.
pub fn build_groups(features: &[FeatureMeta]) -> Result<GroupStructure> {
    validate_features(features)?;
    let candidates: Vec<usize> = (0..features.len()).filter(|&i| features[i].interaction_candidate).collect();
    if candidates.is_empty() {
        return Err(Error::NoCandidates);
    }
    let mut pairs = Vec::new();
    for &c in &candidates {
        for j in 0..features.len() {
            if j == c || (features[j].interaction_candidate && j < c) {
                continue;
            }
            pairs.push((c, j));
        }
    }
    Ok(GroupStructure::with_pairs(features.to_vec(), pairs))
}

impl GroupStructure {
    fn with_pairs(features: Vec<FeatureMeta>, pairs: Vec<(usize, usize)>) -> Self {
        let mut s = Self { features, pairs, weights: Vec::new() };
        s.weights = (0..s.n_groups()).map(|g| (s.group_width(g) as f64).sqrt()).collect();
        s
    }

    /// Main-effect groups only.
    pub fn main_only(features: &[FeatureMeta]) -> Result<Self> {
        validate_features(features)?;
        Ok(Self::with_pairs(features.to_vec(), Vec::new()))
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.n_groups() {
            return Err(Error::DimensionMismatch(format!("{} weights for {} groups", weights.len(), self.n_groups())));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidInput("group weights must be positive and finite".into()));
        }
        self.weights = weights;
        Ok(self)
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn n_groups(&self) -> usize {
        self.features.len() + self.pairs.len()
    }

    pub fn kind(&self, g: usize) -> GroupKind {
        let p = self.features.len();
        if g < p {
            GroupKind::Main(g)
        } else {
            let (c, j) = self.pairs[g - p];
            GroupKind::Interaction(c, j)
        }
    }

    pub(crate) fn feature_width(&self, i: usize) -> usize {
        self.features[i].n_levels().unwrap_or(1)
    }

    pub(crate) fn product_width(&self, k: usize) -> usize {
        let (c, j) = self.pairs[k];
        self.feature_width(c) * self.feature_width(j)
    }

    pub fn group_width(&self, g: usize) -> usize {
        match self.kind(g) {
            GroupKind::Main(i) => self.feature_width(i),
            GroupKind::Interaction(c, j) => {
                self.feature_width(c) + self.feature_width(j) + self.product_width(g - self.features.len())
            }
        }
    }
}

/// Solution at one λ. Only nonzero groups are stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GroupPathEntry<F: Float> {
    pub lambda: F,
    pub intercept: F,
    /// `(group, coefficients over that group's columns)`.
    pub groups: Vec<(usize, Vec<F>)>,
    /// Mean training deviance.
    pub deviance: F,
    pub converged: bool,
    /// Penalized objective after each accepted outer step.
    #[serde(skip)]
    pub objective_trace: Vec<F>,
}

impl<F: Float> GroupPathEntry<F> {
    pub fn group(&self, g: usize) -> Option<&[F]> {
        self.groups.iter().find(|(k, _)| *k == g).map(|(_, c)| c.as_slice())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GroupLassoPath<F: Float> {
    pub entries: Vec<GroupPathEntry<F>>,
    pub lambda_max: F,
}

impl<F: Float> GroupLassoPath<F> {
    pub fn lambdas(&self) -> Vec<F> {
        self.entries.iter().map(|e| e.lambda).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Fitted interaction path together with the design that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GlinternetModel<F: Float> {
    pub design: InteractionDesign<F>,
    pub path: GroupLassoPath<F>,
}

/// Fits the path on `x`, whose continuous columns are expected standardized.
///
/// An automatic grid defaults to a smallest-λ ratio of 1e-2. The intercept is
/// always fitted.
pub fn fit_glinternet<F: Float>(
    x: ArrayView2<F>,
    y: ArrayView1<F>,
    structure: &GroupStructure,
    lambdas: &LambdaGrid<F>,
    opts: &SolverOptions<F>,
) -> Result<GlinternetModel<F>> {
    let design = InteractionDesign::fit(structure.clone(), x)?;
    let u = design.matrix(x)?;
    let weights: Vec<F> = structure.weights.iter().map(|&w| F::lit(w)).collect();
    let path = solver::fit_path(&u, y, design.group_columns(), weights, lambdas, opts)?;
    Ok(GlinternetModel { design, path })
}

/// Interaction selected at one λ, with its strength `‖θ_{i:j}‖₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interaction<F> {
    pub candidate: usize,
    pub partner: usize,
    pub strength: F,
}

impl<F: Float> GlinternetModel<F> {
    pub fn structure(&self) -> &GroupStructure {
        &self.design.structure
    }

    fn entry(&self, idx: usize) -> &GroupPathEntry<F> {
        &self.path.entries[idx]
    }

    /// Coefficients over the design's unique columns (column 0 is the
    /// intercept), summing each feature's contributions across groups.
    pub fn composite(&self, idx: usize) -> Array1<F> {
        let e = self.entry(idx);
        let cols = self.design.group_columns();
        let mut theta = Array1::zeros(self.design.n_columns());
        theta[0] = e.intercept;
        for (g, coef) in &e.groups {
            for (&c, &v) in cols[*g].iter().zip(coef) {
                theta[c] += v;
            }
        }
        theta
    }

    /// Composite main effect θᵢ of feature `i` (one value per column).
    pub fn main_effect(&self, idx: usize, i: usize) -> Array1<F> {
        let theta = self.composite(idx);
        self.design.feature_columns(i).map(|c| theta[c]).collect()
    }

    /// θ_{c:j} of interaction `pairs[k]`, `None` when the group is inactive.
    pub fn interaction(&self, idx: usize, k: usize) -> Option<Array1<F>> {
        let s = self.structure();
        let coef = self.entry(idx).group(s.n_features() + k)?;
        let w = s.product_width(k);
        Some(coef[coef.len() - w..].iter().copied().collect())
    }

    pub fn active_groups(&self, idx: usize) -> Vec<bool> {
        let mut a = vec![false; self.structure().n_groups()];
        for (g, _) in &self.entry(idx).groups {
            a[*g] = true;
        }
        a
    }

    /// Features whose composite main effect is nonzero.
    pub fn active_main_effects(&self, idx: usize) -> Vec<usize> {
        let theta = self.composite(idx);
        (0..self.structure().n_features())
            .filter(|&i| self.design.feature_columns(i).any(|c| theta[c] != F::zero()))
            .collect()
    }

    /// Number of selected interactions lacking a nonzero composite parent.
    pub fn hierarchy_violations(&self, idx: usize) -> usize {
        let mains = self.active_main_effects(idx);
        extract_interactions(self, idx)
            .iter()
            .filter(|it| !mains.contains(&it.candidate) || !mains.contains(&it.partner))
            .count()
    }

    pub fn linear_predictor(&self, idx: usize, x: ArrayView2<F>) -> Result<Array1<F>> {
        Ok(self.design.matrix(x)?.dot(&self.composite(idx)))
    }

    pub fn predict_proba(&self, idx: usize, x: ArrayView2<F>) -> Result<Array1<F>> {
        Ok(self.linear_predictor(idx, x)?.mapv(|e| clamp_prob(sigmoid(e))))
    }
}

/// Nonzero interactions at one λ, strongest first.
pub fn extract_interactions<F: Float>(model: &GlinternetModel<F>, idx: usize) -> Vec<Interaction<F>> {
    let s = model.structure();
    let mut out: Vec<Interaction<F>> = (0..s.pairs.len())
        .filter_map(|k| {
            let theta = model.interaction(idx, k)?;
            let strength = theta.dot(&theta).sqrt();
            (strength > F::zero()).then_some(Interaction { candidate: s.pairs[k].0, partner: s.pairs[k].1, strength })
        })
        .collect();
    out.sort_by(|a, b| b.strength.partial_cmp(&a.strength).unwrap_or(std::cmp::Ordering::Equal));
    out
}

/// Selected interactions counted per candidate feature name.
pub fn interaction_tallies<F: Float>(model: &GlinternetModel<F>, interactions: &[Interaction<F>]) -> BTreeMap<String, usize> {
    let mut t = BTreeMap::new();
    for it in interactions {
        *t.entry(model.structure().features[it.candidate].name.clone()).or_insert(0) += 1;
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathStatistic<F> {
    pub lambda: F,
    pub n_main_effects: usize,
    pub n_interactions: usize,
    pub cv_error: Option<F>,
}

/// Active composite main effects and interactions per λ, with the CV error
/// when a curve over the same grid is supplied.
pub fn path_statistics<F: Float>(model: &GlinternetModel<F>, cv: Option<&CvCurve<F>>) -> Vec<PathStatistic<F>> {
    (0..model.path.len())
        .map(|idx| PathStatistic {
            lambda: model.path.entries[idx].lambda,
            n_main_effects: model.active_main_effects(idx).len(),
            n_interactions: (0..model.structure().pairs.len()).filter(|&k| model.interaction(idx, k).is_some()).count(),
            cv_error: cv.and_then(|c| c.mean.get(idx).copied()),
        })
        .collect()
}

/// `lambda,n_main_effects,n_interactions,cv_mean_deviance`; the last field is
/// empty without CV.
pub fn path_statistics_csv<F: Float>(stats: &[PathStatistic<F>]) -> String {
    let mut out = String::from("lambda,n_main_effects,n_interactions,cv_mean_deviance\n");
    for s in stats {
        let cv = s.cv_error.map(|v| format!("{v:.12}")).unwrap_or_default();
        out.push_str(&format!("{:e},{},{},{}\n", s.lambda, s.n_main_effects, s.n_interactions, cv));
    }
    out
}

/// Edge list `candidate,partner,strength`, strongest first.
pub fn export_network<F: Float>(model: &GlinternetModel<F>, idx: usize) -> String {
    let names = &model.structure().features;
    let mut out = String::from("candidate,partner,strength\n");
    for it in extract_interactions(model, idx) {
        out.push_str(&format!("{},{},{:.12}\n", names[it.candidate].name, names[it.partner].name, it.strength.abs()));
    }
    out
}
