//! Genotype rendering: skeleton and scan phenotypes, PNG I/O and resampling
//! to model resolution.

mod font;
mod image;
mod render;

pub use self::font::FontMetrics;
pub use self::image::{overlay_png, resize, RasterImage};
pub(crate) use self::render::Canvas;
pub use self::render::{render_scan, render_skeleton, render_skeleton_model, RenderStyle};
