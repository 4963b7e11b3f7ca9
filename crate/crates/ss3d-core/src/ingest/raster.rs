//! Single-channel rasters stored as 8- or 16-bit grayscale PNG. The stored
//! integer divided by a caller-supplied scale gives the physical value
//! (scale 256 for KITTI-style disparity maps, 255 to map segmentation label
//! ids into [0, 1], 1 for raw values).

use std::path::Path;

use image::{DynamicImage, ImageError};

use super::IngestError;

/// Row-major real-valued grid: disparity in pixels, or a per-pixel
/// segmentation value. A disparity of exactly 0 marks an invalid pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: u32,
    pub height: u32,
    pub values: Vec<f32>,
}

impl Raster {
    /// Panics if `values.len() != width * height`.
    pub fn new(width: u32, height: u32, values: Vec<f32>) -> Self {
        assert_eq!(
            values.len(),
            (width as usize) * (height as usize),
            "raster value count must equal width * height"
        );
        Self {
            width,
            height,
            values,
        }
    }

    #[inline]
    pub fn get(&self, u: u32, v: u32) -> f32 {
        self.values[v as usize * self.width as usize + u as usize]
    }

    pub fn same_shape(&self, other: &Raster) -> bool {
        self.width == other.width && self.height == other.height
    }
}

pub fn read_raster(path: impl AsRef<Path>, scale: f64) -> Result<Raster, IngestError> {
    let img = image::open(path.as_ref()).map_err(|e| match e {
        ImageError::IoError(io) => IngestError::IoFailure(io),
        other => IngestError::UnsupportedFormat(other.to_string()),
    })?;
    let (width, height) = (img.width(), img.height());
    let values: Vec<f32> = match img {
        DynamicImage::ImageLuma8(buf) => buf
            .into_raw()
            .into_iter()
            .map(|p| (p as f64 / scale) as f32)
            .collect(),
        DynamicImage::ImageLuma16(buf) => buf
            .into_raw()
            .into_iter()
            .map(|p| (p as f64 / scale) as f32)
            .collect(),
        other => {
            return Err(IngestError::UnsupportedFormat(format!(
                "expected single-channel 8/16-bit grayscale, got {:?}",
                other.color()
            )))
        }
    };
    Ok(Raster {
        width,
        height,
        values,
    })
}
