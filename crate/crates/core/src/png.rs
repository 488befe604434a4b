//! 8/16-bit PNG ingest and export, linearly scaled to `[0, 1]`.

use std::path::Path;

use ::image::{DynamicImage, ImageBuffer, Luma, Rgb};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

/// Reads a grayscale or RGB PNG. Alpha is dropped; 8-bit samples are
/// divided by 255 and 16-bit samples by 65535.
pub fn read_png<T: Real>(path: impl AsRef<Path>) -> Result<Image<T>> {
    let img = ::image::open(path)?;
    decode(img)
}

fn decode<T: Real>(img: DynamicImage) -> Result<Image<T>> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let scale8 = |v: u8| T::of(v as f64 / 255.0);
    let scale16 = |v: u16| T::of(v as f64 / 65535.0);
    match img {
        DynamicImage::ImageLuma8(b) => Image::from_interleaved(h, w, 1, &b.into_raw().into_iter().map(scale8).collect::<Vec<_>>()),
        DynamicImage::ImageLuma16(b) => Image::from_interleaved(h, w, 1, &b.into_raw().into_iter().map(scale16).collect::<Vec<_>>()),
        DynamicImage::ImageRgb8(b) => Image::from_interleaved(h, w, 3, &b.into_raw().into_iter().map(scale8).collect::<Vec<_>>()),
        DynamicImage::ImageRgb16(b) => Image::from_interleaved(h, w, 3, &b.into_raw().into_iter().map(scale16).collect::<Vec<_>>()),
        DynamicImage::ImageLumaA8(_) | DynamicImage::ImageLumaA16(_) => decode(DynamicImage::ImageLuma16(img.to_luma16())),
        other => decode(DynamicImage::ImageRgb16(other.to_rgb16())),
    }
}

fn quantize<T: Real>(v: T, max: f64) -> f64 {
    (v.as_f64().clamp(0.0, 1.0) * max).round()
}

/// Writes a 1- or 3-channel image, clamping to `[0, 1]` first.
pub fn write_png<T: Real>(image: &Image<T>, path: impl AsRef<Path>, depth: BitDepth) -> Result<()> {
    let (w, h) = (image.width() as u32, image.height() as u32);
    let samples = image.to_interleaved();
    let dynamic = match (image.channels(), depth) {
        (1, BitDepth::Eight) => DynamicImage::ImageLuma8(
            ImageBuffer::<Luma<u8>, _>::from_raw(w, h, samples.iter().map(|&v| quantize(v, 255.0) as u8).collect())
                .expect("buffer length matches"),
        ),
        (1, BitDepth::Sixteen) => DynamicImage::ImageLuma16(
            ImageBuffer::<Luma<u16>, _>::from_raw(w, h, samples.iter().map(|&v| quantize(v, 65535.0) as u16).collect())
                .expect("buffer length matches"),
        ),
        (3, BitDepth::Eight) => DynamicImage::ImageRgb8(
            ImageBuffer::<Rgb<u8>, _>::from_raw(w, h, samples.iter().map(|&v| quantize(v, 255.0) as u8).collect())
                .expect("buffer length matches"),
        ),
        (3, BitDepth::Sixteen) => DynamicImage::ImageRgb16(
            ImageBuffer::<Rgb<u16>, _>::from_raw(w, h, samples.iter().map(|&v| quantize(v, 65535.0) as u16).collect())
                .expect("buffer length matches"),
        ),
        (c, _) => {
            return Err(Error::InvalidArgument(format!("cannot write a {c}-channel image as PNG")));
        }
    };
    dynamic.save_with_format(path, ::image::ImageFormat::Png)?;
    Ok(())
}

/// Writes integer labels as an 8-bit grayscale PNG, one gray level per label.
pub fn write_label_png(labels: &[usize], height: usize, width: usize, path: impl AsRef<Path>) -> Result<()> {
    if labels.len() != height * width {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for a {height}x{width} map",
            labels.len()
        )));
    }
    let max = labels.iter().copied().max().unwrap_or(0);
    if max > 255 {
        return Err(Error::InvalidArgument(format!("{} labels do not fit in 8 bits", max + 1)));
    }
    let step = 255usize.checked_div(max).unwrap_or(0);
    let raw: Vec<u8> = labels.iter().map(|&l| (l * step) as u8).collect();
    ImageBuffer::<Luma<u8>, _>::from_raw(width as u32, height as u32, raw)
        .expect("buffer length matches")
        .save_with_format(path, ::image::ImageFormat::Png)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sixteen_bit_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.png");
        let img = Image::<f64>::from_fn(5, 7, 3, |y, x, c| ((y * 7 + x) * 3 + c) as f64 / 104.0);
        write_png(&img, &p, BitDepth::Sixteen).unwrap();
        let back: Image<f64> = read_png(&p).unwrap();
        assert_eq!(back.channels(), 3);
        assert!(back.max_abs_diff(&img).unwrap() <= 0.5 / 65535.0 + 1e-12);
    }

    #[test]
    fn eight_bit_clamps() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.png");
        let img = Image::<f32>::from_planar(1, 3, 1, vec![-0.2, 0.5, 1.7]).unwrap();
        write_png(&img, &p, BitDepth::Eight).unwrap();
        let back: Image<f32> = read_png(&p).unwrap();
        assert_eq!(back.as_slice()[0], 0.0);
        assert_eq!(back.as_slice()[2], 1.0);
        assert!((back.as_slice()[1] - 128.0 / 255.0).abs() < 1e-6);
    }
}
