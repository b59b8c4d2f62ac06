//! 8-bit grayscale PNG rendering of feature images, highest frequency on
//! top.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use tfrbench_core::feature::FeatureImage;
use tfrbench_core::TfKind;

use crate::error::{Error, Result};

pub fn encode_png(img: &FeatureImage) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, img.cols() as u32, img.rows() as u32);
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(png::BitDepth::Eight);
        let to_err = |e: png::EncodingError| Error::Config(format!("PNG encoding failed: {e}"));
        let mut writer = encoder.write_header().map_err(to_err)?;
        writer.write_image_data(&img.to_grayscale()).map_err(to_err)?;
        writer.finish().map_err(to_err)?;
    }
    Ok(out)
}

pub fn export_png(img: &FeatureImage, path: &Path) -> Result<()> {
    let bytes = encode_png(img)?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    std::io::Write::write_all(&mut w, &bytes).map_err(|e| Error::io(path, e))?;
    std::io::Write::flush(&mut w).map_err(|e| Error::io(path, e))
}

/// Reads an 8-bit grayscale PNG back into `[-1, 1]` values.
pub fn import_png(path: &Path, kind: TfKind) -> Result<FeatureImage> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let decoder = png::Decoder::new(BufReader::new(file));
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::format(path, e.to_string()))?;
    let mut buf = vec![0; reader.output_buffer_size().unwrap_or(0)];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::format(path, e.to_string()))?;
    if info.color_type != png::ColorType::Grayscale || info.bit_depth != png::BitDepth::Eight {
        return Err(Error::format(path, "expected an 8-bit grayscale PNG"));
    }
    let (w, h) = (info.width as usize, info.height as usize);
    let pixels: Vec<u8> = buf[..info.buffer_size()]
        .chunks(info.line_size)
        .flat_map(|line| line[..w].iter().copied())
        .collect();
    Ok(FeatureImage::from_grayscale(h, w, &pixels, kind)?)
}
