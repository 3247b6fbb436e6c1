//! Candidate renderers. A renderer is a pure function of the parameter vector.

use std::f64::consts::PI;
use std::fmt::Write as _;

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenderError {
    #[error("renderer expects {expected} parameters, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("parameter {index} is not finite")]
    NonFinite { index: usize },
    #[error("image encoding failed: {0}")]
    Encode(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RendererSpec {
    /// `x` in R^3 through a sigmoid per channel, as a square RGB PNG.
    ColorSwatch {
        #[serde(default = "default_swatch_size")]
        size: u32,
    },
    /// `x = (a_1..a_n, b_1..b_n)` as the closed curve
    /// `r(t) = exp(sum_j (a_j cos jt + b_j sin jt) / j)`, drawn as SVG.
    FourierCurve {
        #[serde(default = "default_harmonics")]
        harmonics: usize,
        #[serde(default = "default_curve_size")]
        size: u32,
    },
}

fn default_swatch_size() -> u32 {
    64
}

fn default_harmonics() -> usize {
    3
}

fn default_curve_size() -> u32 {
    256
}

impl Default for RendererSpec {
    fn default() -> Self {
        Self::ColorSwatch {
            size: default_swatch_size(),
        }
    }
}

/// Rendered candidate, ready for a JSON body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Payload {
    pub media_type: String,
    /// Always `base64`.
    pub encoding: String,
    pub data: String,
}

impl Payload {
    fn new(media_type: &str, bytes: &[u8]) -> Self {
        Self {
            media_type: media_type.into(),
            encoding: "base64".into(),
            data: STANDARD.encode(bytes),
        }
    }

    pub fn bytes(&self) -> Result<Vec<u8>, base64::DecodeError> {
        STANDARD.decode(&self.data)
    }
}

const CURVE_POINTS: usize = 256;

impl RendererSpec {
    pub fn dim(&self) -> usize {
        match self {
            Self::ColorSwatch { .. } => 3,
            Self::FourierCurve { harmonics, .. } => 2 * harmonics,
        }
    }

    pub fn media_type(&self) -> &'static str {
        match self {
            Self::ColorSwatch { .. } => "image/png",
            Self::FourierCurve { .. } => "image/svg+xml",
        }
    }

    /// Field-level problems with the spec itself.
    pub fn problems(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        match *self {
            Self::ColorSwatch { size } | Self::FourierCurve { size, .. }
                if !(1..=1024).contains(&size) =>
            {
                out.push((
                    "renderer.size".into(),
                    format!("must lie in 1..=1024, got {size}"),
                ));
            }
            _ => {}
        }
        if let Self::FourierCurve { harmonics, .. } = *self {
            if !(1..=64).contains(&harmonics) {
                out.push((
                    "renderer.harmonics".into(),
                    format!("must lie in 1..=64, got {harmonics}"),
                ));
            }
        }
        out
    }

    pub fn render(&self, x: &[f64]) -> Result<Payload, RenderError> {
        if x.len() != self.dim() {
            return Err(RenderError::Dimension {
                expected: self.dim(),
                found: x.len(),
            });
        }
        if let Some(index) = x.iter().position(|v| !v.is_finite()) {
            return Err(RenderError::NonFinite { index });
        }
        match *self {
            Self::ColorSwatch { size } => {
                Ok(Payload::new(self.media_type(), &swatch_png(x, size)?))
            }
            Self::FourierCurve { harmonics, size } => Ok(Payload::new(
                self.media_type(),
                fourier_svg(&x[..harmonics], &x[harmonics..], size).as_bytes(),
            )),
        }
    }
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// Channel value of `sigmoid(v)`, rounded half up: `sigmoid(0)` maps to 128.
pub fn channel(v: f64) -> u8 {
    (sigmoid(v) * 255.0).round() as u8
}

fn swatch_png(x: &[f64], size: u32) -> Result<Vec<u8>, RenderError> {
    let rgb = [channel(x[0]), channel(x[1]), channel(x[2])];
    let pixels: Vec<u8> = rgb
        .iter()
        .copied()
        .cycle()
        .take(3 * (size * size) as usize)
        .collect();
    let mut out = Vec::new();
    let mut enc = png::Encoder::new(&mut out, size, size);
    enc.set_color(png::ColorType::Rgb);
    enc.set_depth(png::BitDepth::Eight);
    let encode = |e: png::EncodingError| RenderError::Encode(e.to_string());
    let mut writer = enc.write_header().map_err(encode)?;
    writer.write_image_data(&pixels).map_err(encode)?;
    writer.finish().map_err(encode)?;
    Ok(out)
}

/// Radius profile at `n` equally spaced angles, before scaling.
pub fn curve_radii(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            let s: f64 = a
                .iter()
                .zip(b)
                .enumerate()
                .map(|(j, (aj, bj))| {
                    let j = (j + 1) as f64;
                    (aj * (j * t).cos() + bj * (j * t).sin()) / j
                })
                .sum();
            s.exp()
        })
        .collect()
}

fn fourier_svg(a: &[f64], b: &[f64], size: u32) -> String {
    let radii = curve_radii(a, b, CURVE_POINTS);
    let c = size as f64 / 2.0;
    // unit radius maps to a quarter of the canvas; large shapes shrink to fit
    let max = radii.iter().copied().fold(0.0, f64::max);
    let scale = if max.is_finite() && max > 0.0 {
        (c / 4.0).min(0.95 * c / max)
    } else {
        0.0
    };
    let mut path = String::new();
    for (i, r) in radii.iter().enumerate() {
        let t = 2.0 * PI * i as f64 / CURVE_POINTS as f64;
        let (px, py) = (c + scale * r * t.cos(), c - scale * r * t.sin());
        let _ = write!(path, "{}{px:.3},{py:.3} ", if i == 0 { "M" } else { "L" });
    }
    path.push('Z');
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\
<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\
<path d=\"{path}\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/></svg>\n"
    )
}
