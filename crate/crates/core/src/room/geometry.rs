use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 3];

pub fn distance(a: &Point, b: &Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Microphone layout relative to the array center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ArrayGeometry {
    /// Uniform linear array along the x axis.
    Ula {
        mics: usize,
        spacing: f64,
    },
    /// Horizontal ring, optionally with an extra microphone at the center
    /// (the center one is then the reference).
    Circular {
        mics: usize,
        diameter: f64,
        #[serde(default)]
        center_mic: bool,
    },
    Custom {
        offsets: Vec<Point>,
    },
}

impl Default for ArrayGeometry {
    /// Four microphones, 8 cm apart.
    fn default() -> Self {
        ArrayGeometry::Ula { mics: 4, spacing: 0.08 }
    }
}

impl ArrayGeometry {
    pub fn ula(mics: usize) -> Self {
        ArrayGeometry::Ula { mics, spacing: 0.08 }
    }

    /// Six microphones on an 8 cm circle plus one at the center.
    pub fn seven_mic_circular() -> Self {
        ArrayGeometry::Circular { mics: 6, diameter: 0.08, center_mic: true }
    }

    pub fn num_mics(&self) -> usize {
        match self {
            ArrayGeometry::Ula { mics, .. } => *mics,
            ArrayGeometry::Circular { mics, center_mic, .. } => mics + usize::from(*center_mic),
            ArrayGeometry::Custom { offsets } => offsets.len(),
        }
    }

    pub fn offsets(&self) -> Vec<Point> {
        match self {
            ArrayGeometry::Ula { mics, spacing } => {
                let mid = (*mics as f64 - 1.0) / 2.0;
                (0..*mics).map(|m| [(m as f64 - mid) * spacing, 0.0, 0.0]).collect()
            }
            ArrayGeometry::Circular { mics, diameter, center_mic } => {
                let r = diameter / 2.0;
                let ring = (0..*mics).map(|m| {
                    let a = TAU * m as f64 / *mics as f64;
                    [r * a.cos(), r * a.sin(), 0.0]
                });
                if *center_mic {
                    std::iter::once([0.0; 3]).chain(ring).collect()
                } else {
                    ring.collect()
                }
            }
            ArrayGeometry::Custom { offsets } => offsets.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let offs = self.offsets();
        if offs.is_empty() {
            return Err(Error::Geometry("array needs at least one microphone".into()));
        }
        if let ArrayGeometry::Ula { spacing, .. } | ArrayGeometry::Circular { diameter: spacing, .. } = self {
            if !(*spacing > 0.0) {
                return Err(Error::Geometry(format!("array size {spacing} must be positive")));
            }
        }
        for (i, a) in offs.iter().enumerate() {
            if a.iter().any(|v| !v.is_finite()) {
                return Err(Error::Geometry(format!("microphone {i} has a non-finite coordinate")));
            }
            for b in &offs[i + 1..] {
                if distance(a, b) < 1e-9 {
                    return Err(Error::Geometry(format!("microphone {i} coincides with another")));
                }
            }
        }
        Ok(())
    }

    /// Absolute positions for an array centered at `center`.
    pub fn place(&self, center: Point) -> Vec<Point> {
        self.offsets().into_iter().map(|o| [center[0] + o[0], center[1] + o[1], center[2] + o[2]]).collect()
    }
}
