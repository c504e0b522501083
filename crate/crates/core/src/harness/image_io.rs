//! Grayscale PGM (P5) and PNG, 8- and 16-bit. Pixels are held as reals in
//! `[0, 1]`; the source bit depth is kept so a round trip is lossless.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Mat;

#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    /// Intensities scaled to `[0, 1]`.
    pub pixels: Mat,
    /// 8 or 16.
    pub bit_depth: u8,
}

impl Image {
    pub fn new(pixels: Mat, bit_depth: u8) -> Self {
        Self { pixels, bit_depth }
    }

    fn max_level(&self) -> f64 {
        if self.bit_depth == 16 {
            65535.0
        } else {
            255.0
        }
    }

    fn levels(&self) -> Vec<u16> {
        let top = self.max_level();
        self.pixels
            .data()
            .iter()
            .map(|v| (v.clamp(0.0, 1.0) * top).round() as u16)
            .collect()
    }
}

fn parse_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        offset,
        message: message.into(),
    }
}

/// Reads one whitespace-delimited header token, skipping `#` comments.
fn header_token(bytes: &[u8], pos: &mut usize) -> Result<(usize, usize)> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if start == *pos {
        return Err(parse_err(start, "expected a decimal number in PGM header"));
    }
    let text = std::str::from_utf8(&bytes[start..*pos]).expect("ascii digits");
    let v = text
        .parse::<usize>()
        .map_err(|_| parse_err(start, format!("header value {text} is out of range")))?;
    Ok((v, start))
}

/// Decodes a binary (P5) PGM.
pub fn decode_pgm(bytes: &[u8]) -> Result<Image> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(parse_err(0, "missing P5 magic number"));
    }
    let mut pos = 2;
    let (width, w_at) = header_token(bytes, &mut pos)?;
    let (height, h_at) = header_token(bytes, &mut pos)?;
    let (maxval, m_at) = header_token(bytes, &mut pos)?;
    if width == 0 {
        return Err(parse_err(w_at, "width must be positive"));
    }
    if height == 0 {
        return Err(parse_err(h_at, "height must be positive"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(parse_err(m_at, format!("maxval {maxval} outside 1..=65535")));
    }
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(parse_err(pos, "expected a single whitespace byte before the raster"));
    }
    pos += 1;
    let bps = if maxval > 255 { 2 } else { 1 };
    let need = width
        .checked_mul(height)
        .and_then(|p| p.checked_mul(bps))
        .ok_or_else(|| parse_err(w_at, "image dimensions overflow"))?;
    let avail = bytes.len() - pos;
    if avail < need {
        return Err(parse_err(
            bytes.len(),
            format!("raster truncated: {need} bytes expected, {avail} present"),
        ));
    }
    let raster = &bytes[pos..pos + need];
    let mut data = Vec::with_capacity(width * height);
    for p in 0..width * height {
        let v = if bps == 2 {
            u16::from_be_bytes([raster[2 * p], raster[2 * p + 1]]) as usize
        } else {
            raster[p] as usize
        };
        if v > maxval {
            return Err(parse_err(pos + p * bps, format!("sample {v} exceeds maxval {maxval}")));
        }
        data.push(v as f64 / maxval as f64);
    }
    Ok(Image {
        pixels: Mat::new(height, width, data)?,
        bit_depth: if bps == 2 { 16 } else { 8 },
    })
}

pub fn encode_pgm(image: &Image) -> Vec<u8> {
    let (h, w) = image.pixels.shape();
    let mut out = format!("P5\n{w} {h}\n{}\n", image.max_level() as u32).into_bytes();
    for v in image.levels() {
        if image.bit_depth == 16 {
            out.extend_from_slice(&v.to_be_bytes());
        } else {
            out.push(v as u8);
        }
    }
    out
}

pub fn decode_png(bytes: &[u8]) -> Result<Image> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder
        .read_info()
        .map_err(|e| parse_err(0, format!("PNG header: {e}")))?;
    let info = reader.info();
    let (w, h) = (info.width as usize, info.height as usize);
    let (color, depth) = (info.color_type, info.bit_depth);
    if color != png::ColorType::Grayscale {
        return Err(parse_err(25, format!("only grayscale PNG is supported, found {color:?}")));
    }
    let bit_depth = match depth {
        png::BitDepth::Eight => 8,
        png::BitDepth::Sixteen => 16,
        other => return Err(parse_err(24, format!("unsupported PNG bit depth {other:?}"))),
    };
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| parse_err(16, "PNG dimensions overflow"))?;
    let mut buf = vec![0; size];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| parse_err(33, format!("PNG image data: {e}")))?;
    let stride = frame.line_size;
    let mut data = Vec::with_capacity(w * h);
    for i in 0..h {
        let line = &buf[i * stride..(i + 1) * stride];
        for j in 0..w {
            data.push(if bit_depth == 16 {
                u16::from_be_bytes([line[2 * j], line[2 * j + 1]]) as f64 / 65535.0
            } else {
                line[j] as f64 / 255.0
            });
        }
    }
    Ok(Image {
        pixels: Mat::new(h, w, data)?,
        bit_depth,
    })
}

pub fn encode_png(image: &Image) -> Result<Vec<u8>> {
    let (h, w) = image.pixels.shape();
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, w as u32, h as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(if image.bit_depth == 16 {
            png::BitDepth::Sixteen
        } else {
            png::BitDepth::Eight
        });
        let mut writer = enc
            .write_header()
            .map_err(|e| Error::Input(format!("PNG encoding: {e}")))?;
        let raw: Vec<u8> = if image.bit_depth == 16 {
            image.levels().iter().flat_map(|v| v.to_be_bytes()).collect()
        } else {
            image.levels().iter().map(|&v| v as u8).collect()
        };
        writer
            .write_image_data(&raw)
            .map_err(|e| Error::Input(format!("PNG encoding: {e}")))?;
    }
    Ok(out)
}

/// Reads a PGM or PNG file, chosen by magic bytes.
pub fn read_image(path: &Path) -> Result<Image> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(b"\x89PNG") {
        decode_png(&bytes)
    } else {
        decode_pgm(&bytes)
    }
}

/// Writes PNG for a `.png` extension and PGM otherwise.
pub fn write_image(path: &Path, image: &Image) -> Result<()> {
    let is_png = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("png"));
    let bytes = if is_png { encode_png(image)? } else { encode_pgm(image) };
    fs::write(path, bytes)?;
    Ok(())
}
