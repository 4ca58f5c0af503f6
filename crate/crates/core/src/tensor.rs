//! Dense row-major tensors of low rank with fiber-wise transforms.

use crate::error::{Error, Result};

/// Row-major tensor over a copyable scalar (`f64` or `Complex64`).
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Copy> Tensor<T> {
    /// Tensor filled with a constant.
    pub fn filled(shape: &[usize], value: T) -> Self {
        let len = shape.iter().product();
        Tensor { shape: shape.to_vec(), data: vec![value; len] }
    }

    /// Wrap existing data; the length must match the shape product.
    pub fn from_vec(shape: &[usize], data: Vec<T>) -> Result<Self> {
        let len: usize = shape.iter().product();
        if data.len() != len {
            return Err(Error::invalid(format!(
                "tensor data length {} does not match shape {:?}",
                data.len(),
                shape
            )));
        }
        Ok(Tensor { shape: shape.to_vec(), data })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    /// Linear offset of a multi-index.
    pub fn offset(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.shape.len());
        let mut off = 0;
        for (i, (&ix, &dim)) in index.iter().zip(&self.shape).enumerate() {
            debug_assert!(ix < dim, "index {ix} out of bounds at axis {i}");
            off = off * dim + ix;
        }
        off
    }

    pub fn get(&self, index: &[usize]) -> T {
        self.data[self.offset(index)]
    }

    pub fn set(&mut self, index: &[usize], value: T) {
        let off = self.offset(index);
        self.data[off] = value;
    }

    /// Replace every length-`shape[axis]` fiber along `axis` by the output
    /// of `f`, which must return a vector of the same length.
    pub fn map_fibers<F>(&mut self, axis: usize, mut f: F) -> Result<()>
    where
        F: FnMut(&[T]) -> Result<Vec<T>>,
    {
        let rank = self.shape.len();
        if axis >= rank {
            return Err(Error::invalid(format!(
                "axis {axis} out of range for rank {rank}"
            )));
        }
        let n = self.shape[axis];
        let stride: usize = self.shape[axis + 1..].iter().product();
        let outer: usize = self.shape[..axis].iter().product();
        let block = n * stride;
        let mut scratch = Vec::with_capacity(n);
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * block + inner;
                scratch.clear();
                for i in 0..n {
                    scratch.push(self.data[base + i * stride]);
                }
                let out = f(&scratch)?;
                if out.len() != n {
                    return Err(Error::numeric(format!(
                        "fiber transform changed length {n} -> {}",
                        out.len()
                    )));
                }
                for (i, v) in out.into_iter().enumerate() {
                    self.data[base + i * stride] = v;
                }
            }
        }
        Ok(())
    }

    /// [`Tensor::map_fibers`] with the fiber handed to `f` as a mutable
    /// contiguous slice, so transforms can reuse caller-side work buffers.
    pub fn map_fibers_in_place<F>(&mut self, axis: usize, mut f: F) -> Result<()>
    where
        F: FnMut(&mut [T]) -> Result<()>,
    {
        let rank = self.shape.len();
        if axis >= rank {
            return Err(Error::invalid(format!(
                "axis {axis} out of range for rank {rank}"
            )));
        }
        let n = self.shape[axis];
        let stride: usize = self.shape[axis + 1..].iter().product();
        let outer: usize = self.shape[..axis].iter().product();
        let block = n * stride;
        if stride == 1 {
            // Fibers along the last axis are contiguous rows.
            for o in 0..outer {
                f(&mut self.data[o * block..o * block + n])?;
            }
            return Ok(());
        }
        let mut fiber = Vec::with_capacity(n);
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * block + inner;
                fiber.clear();
                for i in 0..n {
                    fiber.push(self.data[base + i * stride]);
                }
                f(&mut fiber)?;
                for (i, &v) in fiber.iter().enumerate() {
                    self.data[base + i * stride] = v;
                }
            }
        }
        Ok(())
    }
}

impl Tensor<f64> {
    pub fn zeros(shape: &[usize]) -> Self {
        Tensor::filled(shape, 0.0)
    }
}

/// Visit every multi-index of `shape` in row-major order together with its
/// linear offset.
pub fn for_each_index<F>(shape: &[usize], mut f: F)
where
    F: FnMut(&[usize], usize),
{
    let total: usize = shape.iter().product();
    if shape.is_empty() || total == 0 {
        return;
    }
    let mut index = vec![0usize; shape.len()];
    for linear in 0..total {
        f(&index, linear);
        for axis in (0..shape.len()).rev() {
            index[axis] += 1;
            if index[axis] < shape[axis] {
                break;
            }
            index[axis] = 0;
        }
    }
}
