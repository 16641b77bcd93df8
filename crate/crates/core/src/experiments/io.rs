//! 16-bit PGM images and CSV tables.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Extent, Grid, Image};
use crate::scalar::Scalar;

/// Binary P5 with maxval 65535; `[0, peak]` maps linearly onto `[0, 65535]`, values outside are clamped.
pub fn encode_pgm<T: Scalar>(img: &Image<T>, peak: f64) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n65535\n", img.width(), img.height()).into_bytes();
    for &v in img.values() {
        let q = (v.f64() / peak * 65535.0).round().clamp(0.0, 65535.0) as u16;
        out.extend_from_slice(&q.to_be_bytes());
    }
    out
}

pub fn decode_pgm<T: Scalar>(bytes: &[u8], peak: f64) -> Result<Image<T>> {
    let bad = |m: &str| Error::Format(format!("pgm: {m}"));
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("header is not ascii"))?);
    }
    if fields[0] != "P5" {
        return Err(bad("not a binary graymap"));
    }
    let w: usize = fields[1].parse().map_err(|_| bad("width"))?;
    let h: usize = fields[2].parse().map_err(|_| bad("height"))?;
    if fields[3] != "65535" {
        return Err(bad("only maxval 65535 is supported"));
    }
    pos += 1;
    let body = &bytes[pos.min(bytes.len())..];
    if body.len() != 2 * w * h {
        return Err(bad("pixel data length does not match header"));
    }
    let values = body
        .chunks_exact(2)
        .map(|c| T::of(u16::from_be_bytes([c[0], c[1]]) as f64 / 65535.0 * peak))
        .collect();
    Image::new(w, h, Extent::unit_square(), values)
}

pub fn write_pgm<T: Scalar>(path: &Path, img: &Image<T>, peak: f64) -> Result<()> {
    std::fs::write(path, encode_pgm(img, peak))?;
    Ok(())
}

const STACK_MAGIC: &[u8; 8] = b"DCNETGS1";

/// A list of equally shaped grids stored losslessly: magic, `h`, `w`, count as `u64` LE, then `f64` LE values.
#[derive(Debug, Clone, PartialEq)]
pub struct GridStack<T> {
    pub h: usize,
    pub w: usize,
    pub items: Vec<Vec<T>>,
}

impl<T: Scalar> GridStack<T> {
    pub fn new(h: usize, w: usize, items: Vec<Vec<T>>) -> Result<Self> {
        for it in &items {
            crate::error::check_len("grid stack item", h * w, it.len())?;
        }
        Ok(Self { h, w, items })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(32 + 8 * self.h * self.w * self.items.len());
        out.extend_from_slice(STACK_MAGIC);
        for v in [self.h, self.w, self.items.len()] {
            out.extend_from_slice(&(v as u64).to_le_bytes());
        }
        for it in &self.items {
            for &v in it {
                out.extend_from_slice(&v.f64().to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::Format(format!("grid stack: {m}"));
        if bytes.len() < 32 || &bytes[..8] != STACK_MAGIC {
            return Err(bad("bad magic"));
        }
        let word = |i: usize| u64::from_le_bytes(bytes[8 + 8 * i..16 + 8 * i].try_into().expect("8 bytes")) as usize;
        let (h, w, count) = (word(0), word(1), word(2));
        let cell = h.checked_mul(w).ok_or_else(|| bad("shape overflow"))?;
        let need = cell
            .checked_mul(count)
            .and_then(|c| c.checked_mul(8))
            .ok_or_else(|| bad("size overflow"))?;
        let body = &bytes[32..];
        if body.len() != need {
            return Err(bad("length does not match header"));
        }
        let vals: Vec<T> = body
            .chunks_exact(8)
            .map(|c| T::of(f64::from_le_bytes(c.try_into().expect("8 bytes"))))
            .collect();
        let items = if cell == 0 {
            vec![Vec::new(); count]
        } else {
            vals.chunks(cell).map(<[T]>::to_vec).collect()
        };
        Ok(Self { h, w, items })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

/// A CSV table with a header row; numbers are written in shortest round-trip form.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| Error::Format(e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_bytes()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
        let header = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec.map_err(csv_err)?.iter().map(str::to_string).collect());
        }
        Ok(Self { header, rows })
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(format!("csv: {e}"))
}

/// Formats a float for a table cell.
pub fn num(v: f64) -> String {
    format!("{v}")
}
