//! Fit measures between a target skeleton and a candidate phenotype, and the
//! fitness transform the GA ranks by.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PageSpec, TableGenotype};
use crate::raster::{render_skeleton_model, RasterImage, RenderStyle};
use crate::skeleton::Discriminator;

/// Floor applied inside the logarithm of patch probabilities.
pub const LOG_EPS: f64 = 1e-12;
pub const DEFAULT_LAMBDA: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    /// Mean patch log-probability under the discriminator (maximize).
    DiscriminatorLogprob,
    /// Pixel L1 distance to the target (minimize).
    L1,
    /// Discriminator log-probability minus λ·L1 (maximize).
    Weighted,
    /// Mismatched ink over the product of both images' ink (minimize).
    Nonoverlap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Minimize,
    Maximize,
}

impl ObjectiveKind {
    pub const ALL: [ObjectiveKind; 4] = [
        ObjectiveKind::DiscriminatorLogprob,
        ObjectiveKind::L1,
        ObjectiveKind::Weighted,
        ObjectiveKind::Nonoverlap,
    ];

    pub fn direction(self) -> Direction {
        match self {
            ObjectiveKind::L1 | ObjectiveKind::Nonoverlap => Direction::Minimize,
            ObjectiveKind::DiscriminatorLogprob | ObjectiveKind::Weighted => Direction::Maximize,
        }
    }

    pub fn needs_discriminator(self) -> bool {
        matches!(
            self,
            ObjectiveKind::DiscriminatorLogprob | ObjectiveKind::Weighted
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ObjectiveKind::DiscriminatorLogprob => "discriminator_logprob",
            ObjectiveKind::L1 => "l1",
            ObjectiveKind::Weighted => "weighted",
            ObjectiveKind::Nonoverlap => "nonoverlap",
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ObjectiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        match key.as_str() {
            "discriminator_logprob" | "discriminator" | "logprob" => {
                Ok(ObjectiveKind::DiscriminatorLogprob)
            }
            "l1" => Ok(ObjectiveKind::L1),
            "weighted" => Ok(ObjectiveKind::Weighted),
            "nonoverlap" | "non_overlap" => Ok(ObjectiveKind::Nonoverlap),
            _ => Err(Error::InvalidConfig(format!("unknown objective `{s}`"))),
        }
    }
}

#[derive(Clone)]
pub struct ObjectiveSpec {
    pub kind: ObjectiveKind,
    pub lambda: f64,
    pub discriminator: Option<Arc<dyn Discriminator>>,
}

impl fmt::Debug for ObjectiveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObjectiveSpec")
            .field("kind", &self.kind)
            .field("lambda", &self.lambda)
            .field("discriminator", &self.discriminator)
            .finish()
    }
}

impl ObjectiveSpec {
    pub fn new(kind: ObjectiveKind) -> Self {
        ObjectiveSpec {
            kind,
            lambda: DEFAULT_LAMBDA,
            discriminator: None,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_discriminator(mut self, d: Arc<dyn Discriminator>) -> Self {
        self.discriminator = Some(d);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind.needs_discriminator() && self.discriminator.is_none() {
            return Err(Error::MissingDiscriminator(self.kind.as_str()));
        }
        if !(self.lambda > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        Ok(())
    }

    /// Raw objective value of candidate `u`. `scan` is the discriminator's
    /// conditioning input.
    pub fn evaluate(&self, scan: &RasterImage, target: &RasterImage, u: &RasterImage) -> Result<f64> {
        match self.kind {
            ObjectiveKind::DiscriminatorLogprob => obj_discriminator(self, scan, u),
            ObjectiveKind::L1 => obj_l1(target, u),
            ObjectiveKind::Weighted => obj_weighted(self, scan, target, u),
            ObjectiveKind::Nonoverlap => obj_nonoverlap(target, u),
        }
    }

    pub fn fitness(&self, score: f64) -> f64 {
        fitness(self.kind, score)
    }
}

/// The candidate's rendering for fitting: every divider, no text, at model
/// resolution.
pub fn candidate_phenotype(g: &TableGenotype, page: &PageSpec) -> RasterImage {
    render_skeleton_model(g, page, &RenderStyle::default())
}

fn same_dims(a: &RasterImage, b: &RasterImage) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch {
            left: a.dims(),
            right: b.dims(),
        });
    }
    Ok(())
}

/// Mean over the patch grid of `log D(scan, u)`, floored at `log LOG_EPS`.
pub fn obj_discriminator(spec: &ObjectiveSpec, scan: &RasterImage, u: &RasterImage) -> Result<f64> {
    let d = spec
        .discriminator
        .as_ref()
        .ok_or(Error::MissingDiscriminator(ObjectiveKind::DiscriminatorLogprob.as_str()))?;
    Ok(d.scores(scan, u)?.mean_log(LOG_EPS))
}

/// `Σ |target − u|`.
pub fn obj_l1(target: &RasterImage, u: &RasterImage) -> Result<f64> {
    same_dims(target, u)?;
    Ok(target
        .pixels()
        .iter()
        .zip(u.pixels())
        .map(|(&a, &b)| (a - b).abs() as f64)
        .sum())
}

/// `obj_discriminator − λ · obj_l1`.
pub fn obj_weighted(
    spec: &ObjectiveSpec,
    scan: &RasterImage,
    target: &RasterImage,
    u: &RasterImage,
) -> Result<f64> {
    if spec.discriminator.is_none() {
        return Err(Error::MissingDiscriminator(ObjectiveKind::Weighted.as_str()));
    }
    Ok(obj_discriminator(spec, scan, u)? - spec.lambda * obj_l1(target, u)?)
}

/// `Σ|G − u| / (Σ(1 − u) · Σ(1 − G))`; 0 on an exact match. If either image
/// has no ink the ratio is undefined and the worst value, 1, is returned.
pub fn obj_nonoverlap(target: &RasterImage, u: &RasterImage) -> Result<f64> {
    same_dims(target, u)?;
    let (mut diff, mut ink_u, mut ink_g) = (0f64, 0f64, 0f64);
    for (&g, &c) in target.pixels().iter().zip(u.pixels()) {
        diff += (g - c).abs() as f64;
        ink_u += 1.0 - c as f64;
        ink_g += 1.0 - g as f64;
    }
    if ink_u <= 0.0 || ink_g <= 0.0 {
        return Ok(1.0);
    }
    Ok(diff / (ink_u * ink_g))
}

/// Higher is fitter: minimized objectives are negated.
pub fn fitness(kind: ObjectiveKind, score: f64) -> f64 {
    match kind.direction() {
        Direction::Minimize => -score,
        Direction::Maximize => score,
    }
}
