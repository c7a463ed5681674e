//! Synthetic affine-class generation and labeled-dataset I/O.
//!
//! The academic dataset consists of procedural template symbols pushed
//! through randomly sampled invertible affine maps, which makes each class
//! an exact affine orbit of its template. Generation is deterministic:
//! every item's parameters come from a per-index stream of a seeded
//! generator, so datasets are reproducible and order-independent.

pub mod formats;

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure2D;
use crate::radon::AffineMap;
use formats::{read_atoms, read_csv_grid, read_manifest, read_pgm, write_atoms, write_manifest};
use formats::{Manifest, ManifestItem, Raster};

/// Procedural template symbols, stand-ins for hand-drawn class templates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemplateKind {
    /// Four-fold symmetric plus sign.
    Cross,
    /// Shield outline: straight top, tapering to a point at the bottom.
    Shield,
    /// Filled disk inside a concentric ring.
    DiskRing,
}

impl TemplateKind {
    /// Template order used for class labels 0, 1, 2.
    pub fn all() -> [TemplateKind; 3] {
        [
            TemplateKind::Cross,
            TemplateKind::Shield,
            TemplateKind::DiskRing,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            TemplateKind::Cross => "cross",
            TemplateKind::Shield => "shield",
            TemplateKind::DiskRing => "disk_ring",
        }
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        match self {
            TemplateKind::Cross => {
                (x.abs() <= 0.10 && y.abs() <= 0.38) || (y.abs() <= 0.10 && x.abs() <= 0.38)
            }
            TemplateKind::Shield => {
                let top = (0.15..=0.35).contains(&y) && x.abs() <= 0.30;
                let taper = (-0.40..0.15).contains(&y) && x.abs() <= 0.30 * (y + 0.40) / 0.55;
                top || taper
            }
            TemplateKind::DiskRing => {
                let r = x.hypot(y);
                r <= 0.12 || (0.28..=0.38).contains(&r)
            }
        }
    }
}

impl std::str::FromStr for TemplateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cross" => Ok(TemplateKind::Cross),
            "shield" => Ok(TemplateKind::Shield),
            "disk_ring" | "disk-ring" => Ok(TemplateKind::DiskRing),
            other => Err(Error::InvalidConfig(format!(
                "unknown template kind {other:?}"
            ))),
        }
    }
}

/// Rasterizes a template symbol at the given resolution and converts it to
/// a measure via the pixel-center rule. Deterministic for fixed inputs.
pub fn make_template(kind: TemplateKind, resolution: usize) -> Result<DiscreteMeasure2D> {
    if resolution < 16 {
        return Err(Error::InvalidConfig(format!(
            "template resolution {resolution} < 16"
        )));
    }
    let n = resolution;
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let x = (j as f64 + 0.5) / n as f64 - 0.5;
            let y = 0.5 - (i as f64 + 0.5) / n as f64;
            if kind.contains(x, y) {
                values[i * n + j] = 1.0;
            }
        }
    }
    Raster::new(n, n, values)?.to_measure()
}

/// Closed interval; degenerate intervals pin the parameter.
pub type Interval = (f64, f64);

fn check_interval(name: &str, (lo, hi): Interval) -> Result<()> {
    if !lo.is_finite() || !hi.is_finite() || lo > hi {
        return Err(Error::InvalidConfig(format!(
            "{name} interval [{lo}, {hi}] is empty or non-finite"
        )));
    }
    Ok(())
}

fn draw(rng: &mut ChaCha8Rng, (lo, hi): Interval) -> f64 {
    lo + rng.gen::<f64>() * (hi - lo)
}

/// Parameter ranges of the general affine sampler.
///
/// Maps compose as translation ∘ rotation ∘ shear ∘ scaling, with an
/// optional innermost axis reflection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineSamplerConfig {
    /// Rotation angle range in radians.
    pub rotation: Interval,
    /// Per-axis scale factor range; both axes draw from it independently.
    pub scale: Interval,
    /// Shear coefficient range.
    pub shear: Interval,
    /// Per-axis translation range in normalized coordinates.
    pub translation: Interval,
    pub allow_reflection: bool,
    pub seed: u64,
}

impl Default for AffineSamplerConfig {
    fn default() -> Self {
        AffineSamplerConfig {
            rotation: (0.0, 2.0 * PI),
            scale: (0.75, 1.25),
            shear: (-0.25, 0.25),
            translation: (-0.2, 0.2),
            allow_reflection: false,
            seed: 0,
        }
    }
}

impl AffineSamplerConfig {
    pub fn validate(&self) -> Result<()> {
        check_interval("rotation", self.rotation)?;
        check_interval("scale", self.scale)?;
        check_interval("shear", self.shear)?;
        check_interval("translation", self.translation)?;
        if self.scale.0 <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "scale lower bound {} must be positive",
                self.scale.0
            )));
        }
        Ok(())
    }
}

/// Parameter ranges of the grid-preserving sampler: rotations by multiples
/// of `pi / L`, reflections across grid angles, isotropic scalings, and
/// translations. These leave the max-normalized transform on an `L`-angle
/// grid exactly invariant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSamplerConfig {
    /// Grid size `L` whose angle set must be preserved.
    pub angle_count: usize,
    /// Isotropic scale factor range.
    pub scale: Interval,
    /// Per-axis translation range.
    pub translation: Interval,
    pub allow_reflection: bool,
    pub seed: u64,
}

impl Default for GridSamplerConfig {
    fn default() -> Self {
        GridSamplerConfig {
            angle_count: 8,
            scale: (0.5, 2.0),
            translation: (-0.2, 0.2),
            allow_reflection: false,
            seed: 0,
        }
    }
}

impl GridSamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.angle_count == 0 {
            return Err(Error::InvalidConfig("angle count must be >= 1".into()));
        }
        check_interval("scale", self.scale)?;
        check_interval("translation", self.translation)?;
        if self.scale.0 <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "scale lower bound {} must be positive",
                self.scale.0
            )));
        }
        Ok(())
    }
}

/// Either sampler behind one interface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Sampler {
    General(AffineSamplerConfig),
    GridPreserving(GridSamplerConfig),
}

impl Sampler {
    pub fn validate(&self) -> Result<()> {
        match self {
            Sampler::General(cfg) => cfg.validate(),
            Sampler::GridPreserving(cfg) => cfg.validate(),
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Sampler::General(cfg) => cfg.seed,
            Sampler::GridPreserving(cfg) => cfg.seed,
        }
    }

    fn draw_map(&self, index: u64) -> Result<AffineMap> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed());
        rng.set_stream(index);
        match self {
            Sampler::General(cfg) => {
                let phi = draw(&mut rng, cfg.rotation);
                let sx = draw(&mut rng, cfg.scale);
                let sy = draw(&mut rng, cfg.scale);
                let shear = draw(&mut rng, cfg.shear);
                let tx = draw(&mut rng, cfg.translation);
                let ty = draw(&mut rng, cfg.translation);
                let mut map = AffineMap::rotation(phi)
                    .compose(&AffineMap::shear(shear))
                    .compose(&AffineMap::scaling(sx, sy)?);
                if cfg.allow_reflection && rng.gen::<bool>() {
                    map = map.compose(&AffineMap::reflection(0.0));
                }
                Ok(AffineMap::translation(tx, ty).compose(&map))
            }
            Sampler::GridPreserving(cfg) => {
                let step = PI / cfg.angle_count as f64;
                let turn = rng.gen_range(0..2 * cfg.angle_count) as f64;
                let c = draw(&mut rng, cfg.scale);
                let tx = draw(&mut rng, cfg.translation);
                let ty = draw(&mut rng, cfg.translation);
                let mut map = AffineMap::rotation(turn * step).compose(&AffineMap::scaling(c, c)?);
                if cfg.allow_reflection && rng.gen::<bool>() {
                    let mirror = rng.gen_range(0..2 * cfg.angle_count) as f64;
                    map = map.compose(&AffineMap::reflection(mirror * step));
                }
                Ok(AffineMap::translation(tx, ty).compose(&map))
            }
        }
    }
}

/// Draws `n` invertible affine maps from the general sampler.
pub fn sample_affine(cfg: &AffineSamplerConfig, n: usize) -> Result<Vec<AffineMap>> {
    Sampler::General(*cfg).sample(n)
}

/// Draws `n` grid-preserving affine maps.
pub fn sample_grid_affine(cfg: &GridSamplerConfig, n: usize) -> Result<Vec<AffineMap>> {
    Sampler::GridPreserving(*cfg).sample(n)
}

impl Sampler {
    pub fn sample(&self, n: usize) -> Result<Vec<AffineMap>> {
        if n == 0 {
            return Err(Error::InvalidConfig("sample count must be >= 1".into()));
        }
        self.validate()?;
        (0..n as u64).map(|k| self.draw_map(k)).collect()
    }
}

/// Generation record of one dataset item, stored as JSON text.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    /// Index of the template the item was generated from.
    pub template: usize,
    /// Coefficients `[a11, a12, a21, a22, y1, y2]` of the applied map.
    pub affine: [f64; 6],
}

impl Provenance {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("provenance serializes")
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ParseError(format!("provenance: {e}")))
    }
}

/// One labeled measure with a free-form generation record.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetItem {
    pub measure: DiscreteMeasure2D,
    pub label: usize,
    pub provenance: String,
}

/// A collection of labeled measures.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    items: Vec<DatasetItem>,
    class_count: usize,
}

impl LabeledDataset {
    pub fn new(items: Vec<DatasetItem>, class_count: usize) -> Result<Self> {
        let mut seen = vec![false; class_count];
        for item in &items {
            if item.label >= class_count {
                return Err(Error::InvalidConfig(format!(
                    "label {} out of range for {} classes",
                    item.label, class_count
                )));
            }
            seen[item.label] = true;
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidConfig(format!(
                "class {missing} has no items"
            )));
        }
        Ok(LabeledDataset { items, class_count })
    }

    pub fn items(&self) -> &[DatasetItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    /// Items per class, indexed by label.
    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.class_count];
        for item in &self.items {
            sizes[item.label] += 1;
        }
        sizes
    }

    /// Writes the dataset to `dir` as atom files plus `manifest.json`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        let mut manifest_items = Vec::with_capacity(self.items.len());
        for (k, item) in self.items.iter().enumerate() {
            let file = format!("item_{k:04}.nrcdt");
            write_atoms(&dir.join(&file), &item.measure)?;
            manifest_items.push(ManifestItem {
                path: file,
                label: item.label,
            });
        }
        write_manifest(
            &dir.join("manifest.json"),
            &Manifest {
                class_count: self.class_count,
                items: manifest_items,
            },
        )
    }

    /// Loads a dataset from a JSON manifest. Item paths resolve relative
    /// to the manifest's directory; atom, PGM, and CSV-grid files are
    /// recognized by extension.
    pub fn load(manifest_path: &Path) -> Result<Self> {
        let manifest = read_manifest(manifest_path)?;
        let base = manifest_path.parent().unwrap_or(Path::new("."));
        let mut items = Vec::with_capacity(manifest.items.len());
        for entry in &manifest.items {
            let raw = Path::new(&entry.path);
            let path = if raw.is_absolute() {
                raw.to_path_buf()
            } else {
                base.join(raw)
            };
            let ext = path
                .extension()
                .and_then(|e| e.to_str())
                .unwrap_or("")
                .to_ascii_lowercase();
            let measure = match ext.as_str() {
                "nrcdt" => read_atoms(&path)?,
                "pgm" => read_pgm(&path)?.to_measure().map_err(|e| match e {
                    Error::ZeroMass(_) => Error::ZeroMass(path.display().to_string()),
                    other => other,
                })?,
                "csv" => read_csv_grid(&path)?.to_measure().map_err(|e| match e {
                    Error::ZeroMass(_) => Error::ZeroMass(path.display().to_string()),
                    other => other,
                })?,
                other => {
                    return Err(Error::UnsupportedFormat(format!(
                        "{}: unknown extension {other:?}",
                        path.display()
                    )))
                }
            };
            items.push(DatasetItem {
                measure,
                label: entry.label,
                provenance: path.display().to_string(),
            });
        }
        LabeledDataset::new(items, manifest.class_count).map_err(|e| match e {
            Error::InvalidConfig(msg) => {
                Error::ParseError(format!("{}: {msg}", manifest_path.display()))
            }
            other => other,
        })
    }
}

/// Generates `per_class` affine pushforwards of every template; labels are
/// template indices and each item's provenance records the applied map.
pub fn generate_academic(
    templates: &[DiscreteMeasure2D],
    per_class: usize,
    sampler: &Sampler,
) -> Result<LabeledDataset> {
    if templates.is_empty() {
        return Err(Error::InvalidConfig("need at least one template".into()));
    }
    if per_class == 0 {
        return Err(Error::InvalidConfig("per_class must be >= 1".into()));
    }
    sampler.validate()?;
    for (c, template) in templates.iter().enumerate() {
        let (lo, hi) = template.covariance_singular_values();
        if lo <= crate::cdt::COLLINEARITY_REL_TOL * hi {
            return Err(Error::CollinearSupport(format!("template {c}")));
        }
    }
    let mut items = Vec::with_capacity(templates.len() * per_class);
    for (c, template) in templates.iter().enumerate() {
        for k in 0..per_class {
            let index = (c * per_class + k) as u64;
            let map = sampler.draw_map(index)?;
            let measure = map.apply(template)?;
            items.push(DatasetItem {
                measure,
                label: c,
                provenance: Provenance {
                    template: c,
                    affine: map.coefficients(),
                }
                .to_json(),
            });
        }
    }
    LabeledDataset::new(items, templates.len())
}
