//! Feature extraction and classification over the transform
//! representations: nearest neighbor, linear SVM, and the inverted k-fold
//! cross-validation protocol (train on one fold, test on the rest).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cdt::{mnrcdt_with, rcdt, MnrcdtOptions, Norm, QuantileGrid};
use crate::datasets::formats::rasterize;
use crate::datasets::LabeledDataset;
use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure2D;
use crate::radon::AngleGrid;

/// The three feature representations compared in the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// Flattened raster intensities.
    EuclideanPixels,
    /// All directional CDT curves, concatenated.
    RcdtStack,
    /// The max-normalized signature curve.
    Mnrcdt,
}

impl Representation {
    pub fn name(&self) -> &'static str {
        match self {
            Representation::EuclideanPixels => "euclidean",
            Representation::RcdtStack => "rcdt",
            Representation::Mnrcdt => "mnrcdt",
        }
    }
}

impl std::str::FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" | "euclidean_pixels" => Ok(Representation::EuclideanPixels),
            "rcdt" | "rcdt_stack" => Ok(Representation::RcdtStack),
            "mnrcdt" => Ok(Representation::Mnrcdt),
            other => Err(Error::InvalidConfig(format!(
                "unknown representation {other:?}, expected euclidean, rcdt, or mnrcdt"
            ))),
        }
    }
}

/// A finite feature vector tagged with its representation.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub representation: Representation,
}

/// Turns measures into feature vectors with fixed discretization knobs.
#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    pub representation: Representation,
    pub angles: AngleGrid,
    pub grid: QuantileGrid,
    /// Side length of the raster used by the Euclidean representation.
    pub raster_size: usize,
    pub options: MnrcdtOptions,
}

impl FeatureExtractor {
    pub fn new(
        representation: Representation,
        angle_count: usize,
        quantile_count: usize,
    ) -> Result<Self> {
        Ok(FeatureExtractor {
            representation,
            angles: AngleGrid::new(angle_count)?,
            grid: QuantileGrid::new(quantile_count)?,
            raster_size: 32,
            options: MnrcdtOptions::default(),
        })
    }

    /// Length of every vector this extractor produces.
    pub fn feature_len(&self) -> usize {
        match self.representation {
            Representation::EuclideanPixels => self.raster_size * self.raster_size,
            Representation::RcdtStack => 2 * self.angles.count() * self.grid.count(),
            Representation::Mnrcdt => self.grid.count(),
        }
    }

    pub fn features(&self, m: &DiscreteMeasure2D) -> Result<FeatureVector> {
        let values = match self.representation {
            Representation::EuclideanPixels => rasterize(m, self.raster_size).values().to_vec(),
            Representation::RcdtStack => rcdt(m, &self.angles, &self.grid).flatten(),
            Representation::Mnrcdt => mnrcdt_with(m, &self.angles, &self.grid, &self.options)?
                .values()
                .to_vec(),
        };
        Ok(FeatureVector {
            values,
            representation: self.representation,
        })
    }

    /// Features of many measures, computed in parallel.
    pub fn features_all(&self, measures: &[&DiscreteMeasure2D]) -> Result<Vec<FeatureVector>> {
        measures.par_iter().map(|m| self.features(m)).collect()
    }
}

/// Distance between feature vectors under the chosen norm.
pub fn feature_distance(a: &FeatureVector, b: &FeatureVector, norm: Norm) -> Result<f64> {
    if a.values.len() != b.values.len() {
        return Err(Error::DimensionMismatch {
            left: a.values.len(),
            right: b.values.len(),
        });
    }
    let d = match norm {
        Norm::Chebyshev => a
            .values
            .iter()
            .zip(&b.values)
            .map(|(&x, &y)| (x - y).abs())
            .fold(0.0, f64::max),
        Norm::Euclidean => a
            .values
            .iter()
            .zip(&b.values)
            .map(|(&x, &y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt(),
    };
    Ok(d)
}

fn nn_predict<'a, I>(references: I, query: &FeatureVector, norm: Norm) -> Result<usize>
where
    I: IntoIterator<Item = (&'a FeatureVector, usize)>,
{
    let mut best: Option<(f64, usize)> = None;
    for (features, label) in references {
        let d = feature_distance(features, query, norm)?;
        // Strict comparison keeps the lowest reference index on ties.
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, label));
        }
    }
    best.map(|(_, label)| label).ok_or(Error::EmptyReferences)
}

/// Label of the reference closest to `query`; ties break towards the
/// lowest reference index.
pub fn nn_classify(
    references: &[(FeatureVector, usize)],
    query: &FeatureVector,
    norm: Norm,
) -> Result<usize> {
    nn_predict(references.iter().map(|(f, l)| (f, *l)), query, norm)
}

/// Fraction of queries whose nearest reference carries their own label.
pub fn nn_accuracy(
    references: &[(FeatureVector, usize)],
    queries: &[(FeatureVector, usize)],
    norm: Norm,
) -> Result<f64> {
    if queries.is_empty() {
        return Err(Error::TooFewItems("no queries".into()));
    }
    let mut hits = 0usize;
    for (features, label) in queries {
        if nn_classify(references, features, norm)? == *label {
            hits += 1;
        }
    }
    Ok(hits as f64 / queries.len() as f64)
}

/// Reference-iteration protocol for datasets without templates: round `r`
/// uses the `r`-th instance of every class as references and classifies
/// all remaining items; rounds run over every instance index.
pub fn nn_iterate_references(
    features: &[FeatureVector],
    labels: &[usize],
    class_count: usize,
    norm: Norm,
) -> Result<CvReport> {
    if features.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            left: features.len(),
            right: labels.len(),
        });
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); class_count];
    for (i, &label) in labels.iter().enumerate() {
        if label >= class_count {
            return Err(Error::InvalidConfig(format!(
                "label {label} out of range for {class_count} classes"
            )));
        }
        by_class[label].push(i);
    }
    let rounds = by_class.iter().map(Vec::len).min().unwrap_or(0);
    if rounds == 0 {
        return Err(Error::TooFewItems("every class needs an instance".into()));
    }
    let mut accuracies = Vec::with_capacity(rounds);
    for r in 0..rounds {
        let reference_ids: Vec<usize> = by_class.iter().map(|ids| ids[r]).collect();
        let refs: Vec<(&FeatureVector, usize)> = reference_ids
            .iter()
            .map(|&i| (&features[i], labels[i]))
            .collect();
        let mut hits = 0usize;
        let mut total = 0usize;
        for (i, features_i) in features.iter().enumerate() {
            if reference_ids.contains(&i) {
                continue;
            }
            if nn_predict(refs.iter().copied(), features_i, norm)? == labels[i] {
                hits += 1;
            }
            total += 1;
        }
        if total == 0 {
            return Err(Error::TooFewItems(
                "reference iteration leaves no queries".into(),
            ));
        }
        accuracies.push(hits as f64 / total as f64);
    }
    Ok(CvReport::from_accuracies(accuracies))
}

/// A separating hyperplane `x -> <w, x> + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl Hyperplane {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(x)
            .map(|(&w, &v)| w * v)
            .sum::<f64>()
            + self.bias
    }
}

/// A trained linear classifier: one hyperplane for two classes, otherwise
/// a one-vs-rest bundle with argmax decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    class_count: usize,
    hyperplanes: Vec<Hyperplane>,
}

impl LinearModel {
    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn hyperplanes(&self) -> &[Hyperplane] {
        &self.hyperplanes
    }

    pub fn predict(&self, x: &FeatureVector) -> usize {
        self.predict_values(&x.values)
    }

    pub fn predict_values(&self, x: &[f64]) -> usize {
        if self.class_count == 2 {
            if self.hyperplanes[0].decision(x) > 0.0 {
                1
            } else {
                0
            }
        } else {
            let mut best = 0usize;
            let mut best_value = f64::NEG_INFINITY;
            for (c, plane) in self.hyperplanes.iter().enumerate() {
                let v = plane.decision(x);
                // Strict comparison keeps the lowest class index on ties.
                if v > best_value {
                    best_value = v;
                    best = c;
                }
            }
            best
        }
    }
}

/// Primal SVM solver knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    /// L2 regularization weight.
    pub reg: f64,
    pub max_iters: usize,
    /// Stop when the objective changes less than this between iterations.
    pub tol: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            reg: 1e-2,
            max_iters: 10_000,
            tol: 1e-8,
        }
    }
}

/// Full-batch subgradient descent on the regularized hinge loss
/// `(1/n) sum_i max(0, 1 - y_i (<w, x_i> + b)) + reg * |w|^2`
/// with step `1 / (reg * (t + 1))`; returns the best iterate seen.
fn train_binary(xs: &[&[f64]], ys: &[f64], cfg: &SvmConfig) -> (Hyperplane, Vec<f64>) {
    let n = xs.len();
    let dim = xs.first().map_or(0, |x| x.len());
    let inv_n = 1.0 / n as f64;

    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut margins: Vec<f64> = vec![0.0; n];

    let objective = |w: &[f64], margins: &[f64]| -> f64 {
        let hinge: f64 = margins.iter().map(|&m| (1.0 - m).max(0.0)).sum::<f64>() * inv_n;
        let reg_term: f64 = cfg.reg * w.iter().map(|&v| v * v).sum::<f64>();
        hinge + reg_term
    };

    let mut prev = objective(&w, &margins);
    let mut best_obj = prev;
    let mut best = (w.clone(), b);
    let mut trace = vec![prev];

    for t in 1..=cfg.max_iters {
        // Subgradient at the current iterate (margins are up to date).
        let mut grad_w: Vec<f64> = w.iter().map(|&v| 2.0 * cfg.reg * v).collect();
        let mut grad_b = 0.0;
        for ((&x, &y), &margin) in xs.iter().zip(ys).zip(&margins) {
            if margin < 1.0 {
                for (g, &v) in grad_w.iter_mut().zip(x) {
                    *g -= inv_n * y * v;
                }
                grad_b -= inv_n * y;
            }
        }

        // With iterations numbered from one the regularizer shrink factor
        // 1 - 2 reg eta_t stays in [0, 1).
        let step = 1.0 / (cfg.reg * (t + 1) as f64);
        for (v, g) in w.iter_mut().zip(&grad_w) {
            *v -= step * g;
        }
        b -= step * grad_b;

        for (margin, (&x, &y)) in margins.iter_mut().zip(xs.iter().zip(ys)) {
            let d: f64 = w.iter().zip(x).map(|(&wv, &xv)| wv * xv).sum::<f64>() + b;
            *margin = y * d;
        }
        let obj = objective(&w, &margins);
        trace.push(obj);
        if obj < best_obj {
            best_obj = obj;
            best = (w.clone(), b);
        }
        if (obj - prev).abs() < cfg.tol {
            break;
        }
        prev = obj;
    }

    (
        Hyperplane {
            weights: best.0,
            bias: best.1,
        },
        trace,
    )
}

/// Trains a linear SVM; binary problems get a single hyperplane with
/// class 1 on the positive side, multiclass problems a one-vs-rest bundle.
pub fn svm_train(data: &[(FeatureVector, usize)], cfg: &SvmConfig) -> Result<LinearModel> {
    let refs: Vec<(&FeatureVector, usize)> = data.iter().map(|(f, l)| (f, *l)).collect();
    svm_train_refs(&refs, cfg)
}

pub(crate) fn svm_train_refs(
    data: &[(&FeatureVector, usize)],
    cfg: &SvmConfig,
) -> Result<LinearModel> {
    if data.is_empty() {
        return Err(Error::TooFewItems("no training data".into()));
    }
    let dim = data[0].0.values.len();
    for (f, _) in data {
        if f.values.len() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: f.values.len(),
            });
        }
    }
    let class_count = data.iter().map(|&(_, l)| l).max().unwrap_or(0) + 1;
    let mut present = vec![false; class_count];
    for &(_, l) in data {
        present[l] = true;
    }
    if class_count < 2 || present.iter().filter(|&&p| p).count() < 2 {
        return Err(Error::SingleClass(data.len()));
    }
    if let Some(missing) = present.iter().position(|&p| !p) {
        return Err(Error::TooFewItems(format!(
            "class {missing} has no training examples"
        )));
    }

    let xs: Vec<&[f64]> = data.iter().map(|(f, _)| f.values.as_slice()).collect();
    let hyperplanes = if class_count == 2 {
        let ys: Vec<f64> = data
            .iter()
            .map(|&(_, l)| if l == 1 { 1.0 } else { -1.0 })
            .collect();
        vec![train_binary(&xs, &ys, cfg).0]
    } else {
        (0..class_count)
            .map(|c| {
                let ys: Vec<f64> = data
                    .iter()
                    .map(|&(_, l)| if l == c { 1.0 } else { -1.0 })
                    .collect();
                train_binary(&xs, &ys, cfg).0
            })
            .collect()
    };
    Ok(LinearModel {
        class_count,
        hyperplanes,
    })
}

/// Which side of the k-fold split trains the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitMode {
    /// Train on a single fold, test on the remaining k-1 folds.
    TrainOneTestRest,
    /// Conventional split: train on k-1 folds, test on one.
    TrainRestTestOne,
}

/// Classifier choice inside cross-validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pipeline {
    NearestNeighbor { norm: Norm },
    Svm(SvmConfig),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvConfig {
    pub folds: usize,
    pub seed: u64,
    pub split: SplitMode,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 10,
            seed: 0,
            split: SplitMode::TrainOneTestRest,
        }
    }
}

/// Per-fold accuracies with their mean and (population) standard
/// deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub fold_accuracies: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

impl CvReport {
    pub fn from_accuracies(fold_accuracies: Vec<f64>) -> Self {
        let n = fold_accuracies.len() as f64;
        let mean = fold_accuracies.iter().sum::<f64>() / n;
        let var = fold_accuracies
            .iter()
            .map(|&a| (a - mean) * (a - mean))
            .sum::<f64>()
            / n;
        CvReport {
            fold_accuracies,
            mean,
            std: var.sqrt(),
        }
    }
}

/// Runs seeded, stratified k-fold cross-validation.
///
/// Items are shuffled per class and dealt round-robin into `k` folds; each
/// fold then acts as the training set once ([`SplitMode::TrainOneTestRest`])
/// or as the test set once ([`SplitMode::TrainRestTestOne`]).
pub fn cross_validate(
    data: &LabeledDataset,
    extractor: &FeatureExtractor,
    pipeline: &Pipeline,
    cv: &CvConfig,
) -> Result<CvReport> {
    if cv.folds < 2 {
        return Err(Error::InvalidK(cv.folds));
    }
    for (c, size) in data.class_sizes().iter().enumerate() {
        if *size < cv.folds {
            return Err(Error::TooFewItems(format!(
                "class {c} has {size} items, need >= {} for {} folds",
                cv.folds, cv.folds
            )));
        }
    }

    let measures: Vec<&DiscreteMeasure2D> = data.items().iter().map(|i| &i.measure).collect();
    let features = extractor.features_all(&measures)?;
    let labels: Vec<usize> = data.items().iter().map(|i| i.label).collect();

    // Stratified assignment: shuffle each class, deal round-robin.
    let mut rng = ChaCha8Rng::seed_from_u64(cv.seed);
    let mut fold_of = vec![0usize; data.len()];
    for c in 0..data.class_count() {
        let mut ids: Vec<usize> = (0..data.len()).filter(|&i| labels[i] == c).collect();
        ids.shuffle(&mut rng);
        for (pos, &i) in ids.iter().enumerate() {
            fold_of[i] = pos % cv.folds;
        }
    }

    let accuracies: Vec<Result<f64>> = (0..cv.folds)
        .into_par_iter()
        .map(|fold| {
            let in_train = |i: usize| match cv.split {
                SplitMode::TrainOneTestRest => fold_of[i] == fold,
                SplitMode::TrainRestTestOne => fold_of[i] != fold,
            };
            let train: Vec<(&FeatureVector, usize)> = (0..data.len())
                .filter(|&i| in_train(i))
                .map(|i| (&features[i], labels[i]))
                .collect();
            let test: Vec<(&FeatureVector, usize)> = (0..data.len())
                .filter(|&i| !in_train(i))
                .map(|i| (&features[i], labels[i]))
                .collect();

            let mut hits = 0usize;
            match pipeline {
                Pipeline::NearestNeighbor { norm } => {
                    for &(f, label) in &test {
                        if nn_predict(train.iter().copied(), f, *norm)? == label {
                            hits += 1;
                        }
                    }
                }
                Pipeline::Svm(cfg) => {
                    let model = svm_train_refs(&train, cfg)?;
                    for &(f, label) in &test {
                        if model.predict(f) == label {
                            hits += 1;
                        }
                    }
                }
            }
            Ok(hits as f64 / test.len() as f64)
        })
        .collect();

    let accuracies: Vec<f64> = accuracies.into_iter().collect::<Result<_>>()?;
    Ok(CvReport::from_accuracies(accuracies))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{generate_academic, make_template, AffineSamplerConfig, Sampler};
    use crate::datasets::{GridSamplerConfig, TemplateKind};

    fn fv(values: &[f64]) -> FeatureVector {
        FeatureVector {
            values: values.to_vec(),
            representation: Representation::Mnrcdt,
        }
    }

    #[test]
    fn feature_lengths_match_representation() {
        let t = make_template(TemplateKind::Cross, 32).unwrap();
        let mn = FeatureExtractor::new(Representation::Mnrcdt, 8, 64).unwrap();
        assert_eq!(mn.features(&t).unwrap().values.len(), 64);
        let stack = FeatureExtractor::new(Representation::RcdtStack, 8, 64).unwrap();
        assert_eq!(stack.features(&t).unwrap().values.len(), 1024);
        let eu = FeatureExtractor::new(Representation::EuclideanPixels, 8, 64).unwrap();
        assert_eq!(eu.features(&t).unwrap().values.len(), 1024);
        assert_eq!(eu.feature_len(), 1024);
    }

    #[test]
    fn nn_zero_distance_wins() {
        let refs = vec![(fv(&[0.0, 0.0]), 0), (fv(&[1.0, 1.0]), 1)];
        assert_eq!(
            nn_classify(&refs, &fv(&[1.0, 1.0]), Norm::Euclidean).unwrap(),
            1
        );
    }

    #[test]
    fn nn_prefers_nearer_reference() {
        let refs = vec![(fv(&[1.0]), 0), (fv(&[3.0]), 1)];
        assert_eq!(nn_classify(&refs, &fv(&[0.0]), Norm::Euclidean).unwrap(), 0);
        assert_eq!(nn_classify(&refs, &fv(&[2.9]), Norm::Chebyshev).unwrap(), 1);
    }

    #[test]
    fn nn_tie_breaks_to_lowest_index() {
        let refs = vec![(fv(&[1.0]), 2), (fv(&[-1.0]), 1), (fv(&[1.0]), 0)];
        // Query at 0 ties references 0, 1, 2; index 0 wins.
        assert_eq!(nn_classify(&refs, &fv(&[0.0]), Norm::Euclidean).unwrap(), 2);
    }

    #[test]
    fn nn_rejects_empty_references() {
        assert!(matches!(
            nn_classify(&[], &fv(&[0.0]), Norm::Euclidean),
            Err(Error::EmptyReferences)
        ));
    }

    #[test]
    fn nn_is_invariant_under_monotone_distance_transforms() {
        // argmin is unchanged by any strictly increasing transform of the
        // distances; squaring all Euclidean distances must give the same
        // labels as the distances themselves.
        let refs = vec![
            (fv(&[0.2, 0.4]), 0),
            (fv(&[0.9, -0.3]), 1),
            (fv(&[-0.5, 0.1]), 2),
        ];
        for query in [fv(&[0.0, 0.0]), fv(&[1.0, 0.0]), fv(&[-0.4, 0.2])] {
            let by_distance = nn_classify(&refs, &query, Norm::Euclidean).unwrap();
            let by_squared = refs
                .iter()
                .enumerate()
                .min_by(|(_, (a, _)), (_, (b, _))| {
                    let da = feature_distance(a, &query, Norm::Euclidean)
                        .unwrap()
                        .powi(2);
                    let db = feature_distance(b, &query, Norm::Euclidean)
                        .unwrap()
                        .powi(2);
                    da.partial_cmp(&db).unwrap()
                })
                .map(|(_, (_, l))| *l)
                .unwrap();
            assert_eq!(by_distance, by_squared);
        }
    }

    #[test]
    fn svm_separates_one_dimensional_classes() {
        let data = vec![(fv(&[-2.0]), 0), (fv(&[2.0]), 1)];
        let model = svm_train(&data, &SvmConfig::default()).unwrap();
        assert_eq!(model.predict(&fv(&[-2.0])), 0);
        assert_eq!(model.predict(&fv(&[2.0])), 1);
        // The boundary <w, x> + b = 0 lies strictly between the classes.
        let plane = &model.hyperplanes()[0];
        let boundary = -plane.bias / plane.weights[0];
        assert!((-2.0..2.0).contains(&boundary), "boundary {boundary}");
    }

    #[test]
    fn svm_terminates_on_coincident_classes() {
        let data = vec![(fv(&[1.0, 1.0]), 0), (fv(&[1.0, 1.0]), 1)];
        let model = svm_train(&data, &SvmConfig::default()).unwrap();
        let p0 = model.predict(&fv(&[1.0, 1.0]));
        let hits = data.iter().filter(|(_, l)| *l == p0).count();
        assert_eq!(hits, 1, "accuracy 1/2 on the coincident pair");
    }

    #[test]
    fn svm_rejects_single_class() {
        let data = vec![(fv(&[0.0]), 0), (fv(&[1.0]), 0)];
        assert!(matches!(
            svm_train(&data, &SvmConfig::default()),
            Err(Error::SingleClass(_))
        ));
    }

    #[test]
    fn svm_objective_best_so_far_never_increases() {
        let xs_owned: Vec<Vec<f64>> = vec![
            vec![0.1, 1.0],
            vec![-0.3, 0.8],
            vec![0.2, -1.1],
            vec![0.5, -0.9],
        ];
        let xs: Vec<&[f64]> = xs_owned.iter().map(|v| v.as_slice()).collect();
        let ys = vec![1.0, 1.0, -1.0, -1.0];
        let (_, trace) = train_binary(&xs, &ys, &SvmConfig::default());
        let mut best = f64::INFINITY;
        let mut bests = Vec::new();
        for obj in trace {
            best = best.min(obj);
            bests.push(best);
        }
        assert!(bests.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn svm_separates_affine_classes_in_signature_space() {
        // Grid-preserving transforms keep each class a single point in
        // signature space, so any margin solver separates two classes.
        let templates = vec![
            make_template(TemplateKind::Cross, 48).unwrap(),
            make_template(TemplateKind::Shield, 48).unwrap(),
        ];
        let sampler = Sampler::GridPreserving(GridSamplerConfig {
            angle_count: 8,
            seed: 5,
            ..GridSamplerConfig::default()
        });
        let ds = generate_academic(&templates, 6, &sampler).unwrap();
        let extractor = FeatureExtractor::new(Representation::Mnrcdt, 8, 64).unwrap();
        let measures: Vec<_> = ds.items().iter().map(|i| &i.measure).collect();
        let features = extractor.features_all(&measures).unwrap();
        let data: Vec<(FeatureVector, usize)> = features
            .into_iter()
            .zip(ds.items().iter().map(|i| i.label))
            .collect();
        let model = svm_train(&data, &SvmConfig::default()).unwrap();
        let correct = data.iter().filter(|(f, l)| model.predict(f) == *l).count();
        assert_eq!(correct, data.len(), "training accuracy must be 1.0");
    }

    #[test]
    fn cross_validation_fold_sizes_follow_protocol() {
        let templates: Vec<_> = TemplateKind::all()
            .iter()
            .map(|&k| make_template(k, 32).unwrap())
            .collect();
        let ds = generate_academic(
            &templates,
            10,
            &Sampler::General(AffineSamplerConfig::default()),
        )
        .unwrap();
        let extractor = FeatureExtractor::new(Representation::Mnrcdt, 4, 32).unwrap();
        let report = cross_validate(
            &ds,
            &extractor,
            &Pipeline::NearestNeighbor {
                norm: Norm::Euclidean,
            },
            &CvConfig::default(),
        )
        .unwrap();
        // 30 items, 10 folds: each fold trains on 3 and tests on 27.
        assert_eq!(report.fold_accuracies.len(), 10);
    }

    #[test]
    fn cross_validation_is_seeded_and_deterministic() {
        let templates = vec![
            make_template(TemplateKind::Cross, 32).unwrap(),
            make_template(TemplateKind::DiskRing, 32).unwrap(),
        ];
        let ds = generate_academic(
            &templates,
            10,
            &Sampler::General(AffineSamplerConfig::default()),
        )
        .unwrap();
        let extractor = FeatureExtractor::new(Representation::Mnrcdt, 4, 32).unwrap();
        let cv = CvConfig {
            seed: 42,
            ..CvConfig::default()
        };
        let a = cross_validate(&ds, &extractor, &Pipeline::Svm(SvmConfig::default()), &cv).unwrap();
        let b = cross_validate(&ds, &extractor, &Pipeline::Svm(SvmConfig::default()), &cv).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn constant_predictions_score_the_class_share() {
        // All features identical: every one-vs-rest hyperplane comes out
        // the same, argmax ties resolve to class 0, and the classifier is
        // constant. With three balanced classes each fold scores exactly
        // one third, so the spread over folds is zero.
        let measure = make_template(TemplateKind::Cross, 32).unwrap();
        let items: Vec<_> = (0..30)
            .map(|k| crate::datasets::DatasetItem {
                measure: measure.clone(),
                label: k % 3,
                provenance: String::new(),
            })
            .collect();
        let ds = LabeledDataset::new(items, 3).unwrap();
        let extractor = FeatureExtractor::new(Representation::Mnrcdt, 4, 16).unwrap();
        let report = cross_validate(
            &ds,
            &extractor,
            &Pipeline::Svm(SvmConfig::default()),
            &CvConfig::default(),
        )
        .unwrap();
        assert!(
            (report.mean - 1.0 / 3.0).abs() < 1e-12,
            "mean {}",
            report.mean
        );
        assert!(report.std < 1e-12, "std {}", report.std);
        for acc in &report.fold_accuracies {
            assert_eq!(*acc, 1.0 / 3.0);
        }
    }

    #[test]
    fn cross_validation_rejects_small_classes() {
        let templates = vec![
            make_template(TemplateKind::Cross, 32).unwrap(),
            make_template(TemplateKind::Shield, 32).unwrap(),
        ];
        let ds = generate_academic(
            &templates,
            5,
            &Sampler::General(AffineSamplerConfig::default()),
        )
        .unwrap();
        let extractor = FeatureExtractor::new(Representation::Mnrcdt, 4, 32).unwrap();
        let err = cross_validate(
            &ds,
            &extractor,
            &Pipeline::NearestNeighbor {
                norm: Norm::Euclidean,
            },
            &CvConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::TooFewItems(_)));
        let err = cross_validate(
            &ds,
            &extractor,
            &Pipeline::NearestNeighbor {
                norm: Norm::Euclidean,
            },
            &CvConfig {
                folds: 1,
                ..CvConfig::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidK(1)));
    }

    #[test]
    fn report_moments_match_accuracies() {
        let report = CvReport::from_accuracies(vec![1.0, 0.5, 0.75, 0.75]);
        assert!((report.mean - 0.75).abs() < 1e-15);
        let var = (0.25f64 * 0.25 + 0.25 * 0.25) / 4.0;
        assert!((report.std - var.sqrt()).abs() < 1e-15);
    }
}
