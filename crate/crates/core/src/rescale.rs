//! Self-affine rescaling maps.
//!
//! A [`Rescaler`] with centre `(x0, y0)`, slope `theta0` and scale `w` sends
//! the point `(x, y)` to `(x0 + w x, y0 + w theta0 x + w^2 y)` and the slope
//! `theta` to `theta0 + w theta`. It shrinks `[-1,1]^2` into a `w x w^2`
//! box sheared along slope `theta0`, and multiplies every vertical distance
//! by exactly `w^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConfigElement, Configuration};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rescaler {
    pub x0: f64,
    pub y0: f64,
    pub theta0: f64,
    pub w: f64,
}

impl Rescaler {
    pub fn new(x0: f64, y0: f64, theta0: f64, w: f64) -> Result<Self> {
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale w must be positive, got {w}"
            )));
        }
        Ok(Self { x0, y0, theta0, w })
    }

    /// The map `(x, y, theta) -> (x/2, y/4, theta/2)`.
    pub const fn half() -> Self {
        Self {
            x0: 0.0,
            y0: 0.0,
            theta0: 0.0,
            w: 0.5,
        }
    }

    /// Whether the map provably sends the configuration space into itself.
    pub fn is_omega_safe(&self) -> bool {
        self.x0.abs() <= 0.5 && self.y0.abs() <= 0.5 && self.theta0.abs() <= 0.5 && self.w <= 0.5
    }

    #[inline]
    pub fn apply_point(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.x0 + self.w * x,
            self.y0 + self.w * self.theta0 * x + self.w * self.w * y,
        )
    }

    /// Image of an element; no membership check.
    #[inline]
    pub fn map_element(&self, e: &ConfigElement) -> ConfigElement {
        let (x, y) = self.apply_point(e.x, e.y);
        ConfigElement::new(x, y, self.theta0 + self.w * e.theta)
    }

    /// Image of an element, rejecting results outside the configuration space.
    pub fn apply_element(&self, e: &ConfigElement) -> Result<ConfigElement> {
        let image = self.map_element(e);
        if !image.in_omega() {
            return Err(Error::OutsideOmega {
                index: 0,
                x: image.x,
                y: image.y,
                theta: image.theta,
            });
        }
        Ok(image)
    }
}

/// Element-wise image of a configuration; a claimed distance is scaled by `w^2`.
pub fn rescale_configuration(r: &Rescaler, config: &Configuration) -> Result<Configuration> {
    let mut elements = Vec::with_capacity(config.len());
    for (index, e) in config.elements().iter().enumerate() {
        elements.push(r.apply_element(e).map_err(|err| match err {
            Error::OutsideOmega { x, y, theta, .. } => Error::OutsideOmega { index, x, y, theta },
            other => other,
        })?);
    }
    let claim = config.claimed_delta().map(|d| r.w * r.w * d);
    let out = Configuration::new(elements, claim, config.provenance().to_string())?;
    match config.labels() {
        Some(labels) => out.with_labels(labels.to_vec()),
        None => Ok(out),
    }
}
