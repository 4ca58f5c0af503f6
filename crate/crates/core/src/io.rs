//! Binary tensor container for grids and coefficient sets.
//!
//! Layout (all integers little-endian):
//!   magic    8 bytes  b"MCFTENS\0"
//!   version  u32      1
//!   payload  u8       0 = f64, 1 = complex128 (re, im interleaved)
//!   repr     u8       0 = grid values, 1 = MCF coefficients,
//!                     2 = Fourier-like coefficients
//!   rank     u16
//!   nu       f64
//!   sizes    rank x u64
//!   data     product(sizes) entries, row-major, f64 little-endian

use num_complex::Complex64;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::Tensor;
use crate::transforms::{BasisKind, Expansion};

const MAGIC: &[u8; 8] = b"MCFTENS\0";
const VERSION: u32 = 1;

/// What the stored tensor represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Repr {
    Grid,
    McfCoeffs,
    FourierLikeCoeffs,
}

impl Repr {
    fn tag(self) -> u8 {
        match self {
            Repr::Grid => 0,
            Repr::McfCoeffs => 1,
            Repr::FourierLikeCoeffs => 2,
        }
    }

    fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(Repr::Grid),
            1 => Ok(Repr::McfCoeffs),
            2 => Ok(Repr::FourierLikeCoeffs),
            other => Err(Error::data(format!("unknown representation tag {other}"))),
        }
    }
}

/// A decoded tensor record.
#[derive(Debug, Clone)]
pub enum Record {
    Real { repr: Repr, nu: f64, tensor: Tensor<f64> },
    Complex { repr: Repr, nu: f64, tensor: Tensor<Complex64> },
}

fn write_header<W: Write>(
    w: &mut W,
    payload: u8,
    repr: Repr,
    nu: f64,
    shape: &[usize],
) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[payload, repr.tag()])?;
    let rank = u16::try_from(shape.len())
        .map_err(|_| Error::invalid("tensor rank exceeds format limit".to_string()))?;
    w.write_all(&rank.to_le_bytes())?;
    w.write_all(&nu.to_le_bytes())?;
    for &s in shape {
        w.write_all(&(s as u64).to_le_bytes())?;
    }
    Ok(())
}

/// Write a real tensor record.
pub fn write_real<W: Write>(w: &mut W, repr: Repr, nu: f64, tensor: &Tensor<f64>) -> Result<()> {
    write_header(w, 0, repr, nu, tensor.shape())?;
    for v in tensor.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Write a complex tensor record (re, im interleaved).
pub fn write_complex<W: Write>(
    w: &mut W,
    repr: Repr,
    nu: f64,
    tensor: &Tensor<Complex64>,
) -> Result<()> {
    write_header(w, 1, repr, nu, tensor.shape())?;
    for z in tensor.data() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_exact_array<R: Read, const N: usize>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_le_bytes(read_exact_array::<R, 8>(r)?))
}

/// Read one tensor record.
pub fn read_record<R: Read>(r: &mut R) -> Result<Record> {
    let magic = read_exact_array::<R, 8>(r)?;
    if &magic != MAGIC {
        return Err(Error::data("bad magic in tensor file".to_string()));
    }
    let version = u32::from_le_bytes(read_exact_array::<R, 4>(r)?);
    if version != VERSION {
        return Err(Error::data(format!("unsupported tensor format version {version}")));
    }
    let [payload, repr_tag] = read_exact_array::<R, 2>(r)?;
    let repr = Repr::from_tag(repr_tag)?;
    let rank = u16::from_le_bytes(read_exact_array::<R, 2>(r)?) as usize;
    let nu = read_f64(r)?;
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::data(format!("invalid map scale {nu} in tensor file")));
    }
    let mut shape = Vec::with_capacity(rank);
    let mut len: usize = 1;
    for _ in 0..rank {
        let s = u64::from_le_bytes(read_exact_array::<R, 8>(r)?) as usize;
        if s == 0 {
            return Err(Error::data("zero-length axis in tensor file".to_string()));
        }
        len = len
            .checked_mul(s)
            .ok_or_else(|| Error::data("tensor size overflow".to_string()))?;
        shape.push(s);
    }
    match payload {
        0 => {
            let mut data = Vec::with_capacity(len);
            for _ in 0..len {
                data.push(read_f64(r)?);
            }
            Ok(Record::Real { repr, nu, tensor: Tensor::from_vec(&shape, data)? })
        }
        1 => {
            let mut data = Vec::with_capacity(len);
            for _ in 0..len {
                let re = read_f64(r)?;
                let im = read_f64(r)?;
                data.push(Complex64::new(re, im));
            }
            Ok(Record::Complex { repr, nu, tensor: Tensor::from_vec(&shape, data)? })
        }
        other => Err(Error::data(format!("unknown payload type {other}"))),
    }
}

fn expansion_repr(kind: BasisKind) -> Repr {
    match kind {
        BasisKind::Mcf => Repr::McfCoeffs,
        BasisKind::FourierLike => Repr::FourierLikeCoeffs,
    }
}

fn repr_kind(repr: Repr) -> Result<BasisKind> {
    match repr {
        Repr::McfCoeffs => Ok(BasisKind::Mcf),
        Repr::FourierLikeCoeffs => Ok(BasisKind::FourierLike),
        Repr::Grid => Err(Error::data(
            "tensor file holds grid values, not coefficients".to_string(),
        )),
    }
}

/// Write a real expansion to a file.
pub fn save_expansion(path: &Path, expansion: &Expansion) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_real(&mut w, expansion_repr(expansion.kind), expansion.nu, &expansion.coeffs)
}

/// Read a real expansion from a file.
pub fn load_expansion(path: &Path) -> Result<Expansion> {
    let mut r = BufReader::new(File::open(path)?);
    match read_record(&mut r)? {
        Record::Real { repr, nu, tensor } => Ok(Expansion {
            kind: repr_kind(repr)?,
            nu,
            coeffs: tensor,
        }),
        Record::Complex { .. } => Err(Error::data(
            "expected a real expansion, found complex payload".to_string(),
        )),
    }
}

/// Write a complex grid snapshot to a file.
pub fn save_complex_grid(path: &Path, nu: f64, grid: &Tensor<Complex64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_complex(&mut w, Repr::Grid, nu, grid)
}

/// Read a complex grid snapshot from a file.
pub fn load_complex_grid(path: &Path) -> Result<(f64, Tensor<Complex64>)> {
    let mut r = BufReader::new(File::open(path)?);
    match read_record(&mut r)? {
        Record::Complex { repr: Repr::Grid, nu, tensor } => Ok((nu, tensor)),
        Record::Complex { .. } => Err(Error::data(
            "expected a grid snapshot, found coefficient payload".to_string(),
        )),
        Record::Real { .. } => Err(Error::data(
            "expected a complex grid, found real payload".to_string(),
        )),
    }
}
