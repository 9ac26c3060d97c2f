use crate::error::{Error, Result};

/// Grayscale raster, row-major, values in raw gray levels.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub pixels: Vec<f64>,
}

impl GrayImage {
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    /// Plain (P2) encoding.
    pub fn to_plain_pgm(&self) -> String {
        let mut out = format!("P2\n{} {}\n{}\n", self.width, self.height, self.maxval);
        for row in self.pixels.chunks(self.width) {
            let line: Vec<String> = row
                .iter()
                .map(|v| format!("{}", v.round() as u32))
                .collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::BadPixelFormat(msg.into())
}

/// Reads whitespace-separated header tokens, skipping `#` comments. Returns
/// the tokens and the byte offset just past the single whitespace byte that
/// terminates the last one.
fn header_tokens(data: &[u8], count: usize) -> Result<(Vec<String>, usize)> {
    let mut tokens = Vec::new();
    let mut i = 0;
    while tokens.len() < count {
        while i < data.len() && (data[i].is_ascii_whitespace() || data[i] == b'#') {
            if data[i] == b'#' {
                while i < data.len() && data[i] != b'\n' {
                    i += 1;
                }
            } else {
                i += 1;
            }
        }
        let start = i;
        while i < data.len() && !data[i].is_ascii_whitespace() && data[i] != b'#' {
            i += 1;
        }
        if start == i {
            return Err(bad("truncated header"));
        }
        tokens.push(String::from_utf8_lossy(&data[start..i]).into_owned());
    }
    Ok((tokens, i + 1))
}

/// Parses a plain (P2) or binary (P5) PGM file.
pub fn parse_pgm(data: &[u8]) -> Result<GrayImage> {
    let (tok, offset) = header_tokens(data, 4)?;
    let magic = tok[0].as_str();
    if magic != "P2" && magic != "P5" {
        return Err(bad(format!("unsupported magic {magic:?}")));
    }
    let num = |s: &str, what: &str| {
        s.parse::<usize>()
            .map_err(|_| bad(format!("bad {what} {s:?}")))
    };
    let width = num(&tok[1], "width")?;
    let height = num(&tok[2], "height")?;
    let maxval = num(&tok[3], "maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(bad(format!("maxval {maxval} out of range")));
    }
    if width < 2 || height < 2 {
        return Err(Error::ImageTooSmall { width, height });
    }
    let count = width * height;
    let pixels: Vec<f64> = if magic == "P2" {
        let body = String::from_utf8_lossy(data.get(offset.min(data.len())..).unwrap_or(&[]));
        let vals: Vec<f64> = body
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(str::split_whitespace)
            .map(|t| {
                t.parse::<u32>()
                    .map(f64::from)
                    .map_err(|_| bad(format!("bad sample {t:?}")))
            })
            .collect::<Result<_>>()?;
        if vals.len() != count {
            return Err(bad(format!(
                "expected {count} samples, found {}",
                vals.len()
            )));
        }
        vals
    } else {
        let bytes_per = if maxval < 256 { 1 } else { 2 };
        let body = data.get(offset..).ok_or_else(|| bad("missing raster"))?;
        if body.len() < count * bytes_per {
            return Err(bad(format!(
                "raster has {} bytes, need {}",
                body.len(),
                count * bytes_per
            )));
        }
        if bytes_per == 1 {
            body[..count].iter().map(|&b| f64::from(b)).collect()
        } else {
            body[..2 * count]
                .chunks(2)
                .map(|c| f64::from(u16::from_be_bytes([c[0], c[1]])))
                .collect()
        }
    };
    if pixels.iter().any(|&p| p > maxval as f64) {
        return Err(bad("sample exceeds maxval"));
    }
    Ok(GrayImage {
        width,
        height,
        maxval: maxval as u16,
        pixels,
    })
}
