use super::DataError;

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, DataError> {
        if width == 0 || height == 0 {
            return Err(DataError::Invalid(format!("image dimensions {width}x{height}")));
        }
        if width.checked_mul(height) != Some(pixels.len()) {
            return Err(DataError::Invalid(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }
}

const KB: usize = 1024;

/// Image width for a binary of `len` bytes (Nataraj's size brackets).
pub fn grayscale_width(len: usize) -> usize {
    const BRACKETS: [(usize, usize); 7] = [
        (10 * KB, 32),
        (30 * KB, 64),
        (60 * KB, 128),
        (100 * KB, 256),
        (200 * KB, 384),
        (500 * KB, 512),
        (1000 * KB, 768),
    ];
    BRACKETS.iter().find(|&&(limit, _)| len < limit).map_or(1024, |&(_, w)| w)
}

/// Renders a binary as an image: one byte per pixel, width from the size
/// bracket, last row zero-padded.
pub fn bytes_to_grayscale(bytes: &[u8]) -> Result<GrayImage, DataError> {
    if bytes.is_empty() {
        return Err(DataError::Empty);
    }
    let width = grayscale_width(bytes.len());
    let height = bytes.len().div_ceil(width);
    let mut pixels = bytes.to_vec();
    pixels.resize(width * height, 0);
    GrayImage::new(width, height, pixels)
}

/// Bilinear resampling with corner-aligned sample positions: output pixel
/// `x` reads source position `x (w_in - 1) / (w_out - 1)`. Values are
/// rounded half up.
pub fn resize_bilinear(img: &GrayImage, out_w: usize, out_h: usize) -> Result<GrayImage, DataError> {
    if out_w == 0 || out_h == 0 {
        return Err(DataError::Invalid(format!("target size {out_w}x{out_h}")));
    }
    let axis = |out: usize, len: usize| -> Vec<(usize, usize, f64)> {
        (0..out)
            .map(|i| {
                let pos = if out > 1 { (i * (len - 1)) as f64 / (out - 1) as f64 } else { 0.0 };
                let lo = (pos.floor() as usize).min(len - 1);
                let hi = (lo + 1).min(len - 1);
                (lo, hi, pos - lo as f64)
            })
            .collect()
    };
    let xs = axis(out_w, img.width);
    let ys = axis(out_h, img.height);

    let mut pixels = Vec::with_capacity(out_w * out_h);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            let p = |x: usize, y: usize| f64::from(img.get(x, y));
            let top = p(x0, y0) * (1.0 - fx) + p(x1, y0) * fx;
            let bottom = p(x0, y1) * (1.0 - fx) + p(x1, y1) * fx;
            let v = top * (1.0 - fy) + bottom * fy;
            pixels.push((v + 0.5).floor().clamp(0.0, 255.0) as u8);
        }
    }
    GrayImage::new(out_w, out_h, pixels)
}
