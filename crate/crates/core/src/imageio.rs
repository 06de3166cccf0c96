//! PNG encoding and decoding for the image kinds exchanged with backends and
//! written as debug output: 8-bit RGB(A), 16-bit grayscale and 8-bit indexed.

use std::path::Path;

use png::{BitDepth, ColorType, Transformations};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("png encode failed: {0}")]
    Encode(#[from] png::EncodingError),
    #[error("png decode failed: {0}")]
    Decode(#[from] png::DecodingError),
    #[error("expected {expected} png, found {found:?} at {depth:?}")]
    Format {
        expected: &'static str,
        found: ColorType,
        depth: BitDepth,
    },
    #[error("png is not square: {width}x{height}")]
    NotSquare { width: u32, height: u32 },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Decoded raw PNG samples.
#[derive(Debug, Clone, PartialEq)]
pub struct RawImage<T> {
    pub width: u32,
    pub height: u32,
    pub samples: Vec<T>,
}

impl<T> RawImage<T> {
    /// Side length, erroring unless the image is square.
    pub fn square_side(&self) -> Result<usize, ImageError> {
        if self.width != self.height {
            return Err(ImageError::NotSquare {
                width: self.width,
                height: self.height,
            });
        }
        Ok(self.width as usize)
    }
}

fn encode(
    width: u32,
    height: u32,
    color: ColorType,
    depth: BitDepth,
    palette: Option<Vec<u8>>,
    data: &[u8],
) -> Result<Vec<u8>, ImageError> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width, height);
        enc.set_color(color);
        enc.set_depth(depth);
        if let Some(p) = palette {
            enc.set_palette(p);
        }
        let mut writer = enc.write_header()?;
        writer.write_image_data(data)?;
    }
    Ok(out)
}

fn decode(
    bytes: &[u8],
    expected: &'static str,
    color: ColorType,
    depth: BitDepth,
) -> Result<(png::OutputInfo, Vec<u8>, Option<Vec<u8>>), ImageError> {
    let mut dec = png::Decoder::new(bytes);
    dec.set_transformations(Transformations::IDENTITY);
    let mut reader = dec.read_info()?;
    let palette = reader.info().palette.as_ref().map(|p| p.to_vec());
    let mut buf = vec![0; reader.output_buffer_size()];
    let info = reader.next_frame(&mut buf)?;
    if info.color_type != color || info.bit_depth != depth {
        return Err(ImageError::Format {
            expected,
            found: info.color_type,
            depth: info.bit_depth,
        });
    }
    buf.truncate(info.buffer_size());
    Ok((info, buf, palette))
}

pub fn encode_rgb8(width: u32, height: u32, rgb: &[u8]) -> Result<Vec<u8>, ImageError> {
    encode(width, height, ColorType::Rgb, BitDepth::Eight, None, rgb)
}

pub fn decode_rgb8(bytes: &[u8]) -> Result<RawImage<u8>, ImageError> {
    let (info, samples, _) = decode(bytes, "8-bit RGB", ColorType::Rgb, BitDepth::Eight)?;
    Ok(RawImage {
        width: info.width,
        height: info.height,
        samples,
    })
}

pub fn encode_rgba8(width: u32, height: u32, rgba: &[u8]) -> Result<Vec<u8>, ImageError> {
    encode(width, height, ColorType::Rgba, BitDepth::Eight, None, rgba)
}

pub fn decode_rgba8(bytes: &[u8]) -> Result<RawImage<u8>, ImageError> {
    let (info, samples, _) = decode(bytes, "8-bit RGBA", ColorType::Rgba, BitDepth::Eight)?;
    Ok(RawImage {
        width: info.width,
        height: info.height,
        samples,
    })
}

pub fn encode_gray16(width: u32, height: u32, values: &[u16]) -> Result<Vec<u8>, ImageError> {
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_be_bytes()).collect();
    encode(width, height, ColorType::Grayscale, BitDepth::Sixteen, None, &bytes)
}

pub fn decode_gray16(bytes: &[u8]) -> Result<RawImage<u16>, ImageError> {
    let (info, raw, _) = decode(bytes, "16-bit grayscale", ColorType::Grayscale, BitDepth::Sixteen)?;
    Ok(RawImage {
        width: info.width,
        height: info.height,
        samples: raw
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect(),
    })
}

pub fn encode_indexed8(
    width: u32,
    height: u32,
    indices: &[u8],
    palette: &[[u8; 3]],
) -> Result<Vec<u8>, ImageError> {
    let plte = palette.iter().flatten().copied().collect();
    encode(width, height, ColorType::Indexed, BitDepth::Eight, Some(plte), indices)
}

/// Returns palette indices and the palette itself.
pub fn decode_indexed8(bytes: &[u8]) -> Result<(RawImage<u8>, Vec<[u8; 3]>), ImageError> {
    let (info, samples, palette) = decode(bytes, "8-bit indexed", ColorType::Indexed, BitDepth::Eight)?;
    let palette = palette
        .unwrap_or_default()
        .chunks_exact(3)
        .map(|c| [c[0], c[1], c[2]])
        .collect();
    Ok((
        RawImage {
            width: info.width,
            height: info.height,
            samples,
        },
        palette,
    ))
}

/// Quantizes a `[0,1]` value to 16 bits.
pub fn unit_to_u16(v: f64) -> u16 {
    (v.clamp(0.0, 1.0) * 65535.0).round() as u16
}

pub fn u16_to_unit(v: u16) -> f64 {
    v as f64 / 65535.0
}

/// Quantizes a `[0,1]` value to 8 bits.
pub fn unit_to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn u8_to_unit(v: u8) -> f64 {
    v as f64 / 255.0
}

pub fn write_file(path: impl AsRef<Path>, bytes: &[u8]) -> Result<(), ImageError> {
    let path = path.as_ref();
    std::fs::write(path, bytes).map_err(|source| ImageError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_file(path: impl AsRef<Path>) -> Result<Vec<u8>, ImageError> {
    let path = path.as_ref();
    std::fs::read(path).map_err(|source| ImageError::Io {
        path: path.display().to_string(),
        source,
    })
}
