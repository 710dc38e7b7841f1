//! PNG and binary PGM images normalized to [0, 1].

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageBuffer, ImageFormat, Luma, Rgb};
use seqvo_core::flo::{read_flo, write_flo};
use seqvo_core::{FlowField, Image};

use crate::error::{self, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    fn max(self) -> f64 {
        match self {
            BitDepth::Eight => 255.0,
            BitDepth::Sixteen => 65535.0,
        }
    }
}

/// A decoded image and the sample depth of its source file.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadedImage {
    pub image: Image,
    pub depth: BitDepth,
}

/// Decodes 8/16-bit gray or RGB PNG and binary PGM/PPM data. Alpha is dropped.
pub fn decode_image(bytes: &[u8]) -> Result<LoadedImage, String> {
    let decoded = image::ImageReader::new(Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| e.to_string())?
        .decode()
        .map_err(|e| e.to_string())?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    let (channels, depth, samples): (usize, BitDepth, Vec<f64>) = match decoded {
        DynamicImage::ImageLuma8(b) => (1, BitDepth::Eight, b.into_raw().into_iter().map(f64::from).collect()),
        DynamicImage::ImageLumaA8(_) => {
            (1, BitDepth::Eight, decoded.to_luma8().into_raw().into_iter().map(f64::from).collect())
        }
        DynamicImage::ImageRgb8(b) => (3, BitDepth::Eight, b.into_raw().into_iter().map(f64::from).collect()),
        DynamicImage::ImageRgba8(_) => {
            (3, BitDepth::Eight, decoded.to_rgb8().into_raw().into_iter().map(f64::from).collect())
        }
        DynamicImage::ImageLuma16(b) => (1, BitDepth::Sixteen, b.into_raw().into_iter().map(f64::from).collect()),
        DynamicImage::ImageLumaA16(_) => {
            (1, BitDepth::Sixteen, decoded.to_luma16().into_raw().into_iter().map(f64::from).collect())
        }
        DynamicImage::ImageRgb16(b) => (3, BitDepth::Sixteen, b.into_raw().into_iter().map(f64::from).collect()),
        DynamicImage::ImageRgba16(_) => {
            (3, BitDepth::Sixteen, decoded.to_rgb16().into_raw().into_iter().map(f64::from).collect())
        }
        other => return Err(format!("unsupported pixel type {:?}", other.color())),
    };
    let max = depth.max();
    let data = samples.into_iter().map(|s| s / max).collect();
    let image = Image::new(w, h, channels, data).map_err(|e| e.to_string())?;
    Ok(LoadedImage { image, depth })
}

pub fn read_image(path: &Path) -> Result<LoadedImage> {
    let bytes = error::read(path)?;
    decode_image(&bytes).map_err(|m| Error::format(path, m))
}

fn quantize(v: f64, max: f64) -> f64 {
    (v.clamp(0.0, 1.0) * max).round()
}

/// Encodes as PNG at the given depth. Masked pixels are written as 0.
pub fn encode_png(image: &Image, depth: BitDepth) -> Result<Vec<u8>> {
    let (w, h) = (image.width() as u32, image.height() as u32);
    let c = image.channels();
    let max = depth.max();
    let samples = image.data().iter().enumerate().map(|(i, &v)| {
        if image.mask()[i / c] {
            quantize(v, max)
        } else {
            0.0
        }
    });
    let dynamic = match (depth, c) {
        (BitDepth::Eight, 1) => {
            DynamicImage::ImageLuma8(ImageBuffer::<Luma<u8>, _>::from_raw(w, h, samples.map(|s| s as u8).collect()).unwrap())
        }
        (BitDepth::Eight, 3) => {
            DynamicImage::ImageRgb8(ImageBuffer::<Rgb<u8>, _>::from_raw(w, h, samples.map(|s| s as u8).collect()).unwrap())
        }
        (BitDepth::Sixteen, 1) => DynamicImage::ImageLuma16(
            ImageBuffer::<Luma<u16>, _>::from_raw(w, h, samples.map(|s| s as u16).collect()).unwrap(),
        ),
        (BitDepth::Sixteen, 3) => DynamicImage::ImageRgb16(
            ImageBuffer::<Rgb<u16>, _>::from_raw(w, h, samples.map(|s| s as u16).collect()).unwrap(),
        ),
        (_, other) => return Err(Error::data(format!("cannot encode {other}-channel image"))),
    };
    let mut out = Cursor::new(Vec::new());
    dynamic
        .write_to(&mut out, ImageFormat::Png)
        .map_err(|e| Error::data(format!("png encoding failed: {e}")))?;
    Ok(out.into_inner())
}

pub fn write_png(path: &Path, image: &Image, depth: BitDepth) -> Result<()> {
    error::write(path, &encode_png(image, depth)?)
}

/// 8-bit gray PNG: 255 where `mask` is set, 0 elsewhere.
pub fn encode_mask_png(width: usize, height: usize, mask: &[bool]) -> Result<Vec<u8>> {
    let data = mask.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect();
    let image = Image::new(width, height, 1, data).map_err(Error::data)?;
    encode_png(&image, BitDepth::Eight)
}

pub fn read_flow(path: &Path) -> Result<FlowField> {
    let bytes = error::read(path)?;
    read_flo(&bytes).map_err(|e| Error::format(path, e))
}

pub fn write_flow(path: &Path, flow: &FlowField) -> Result<()> {
    error::write(path, &write_flo(flow))
}
