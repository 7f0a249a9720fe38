//! Scalar grid functions over the masked cells of a domain.

use std::io::{BufRead, Read, Write};
use std::sync::Arc;

use crate::error::OperatorError;
use crate::geometry::DomainModel;

/// One real value per masked cell, in row-major cell order.
#[derive(Debug, Clone)]
pub struct Field {
    domain: Arc<DomainModel>,
    values: Vec<f64>,
}

impl Field {
    pub fn new(domain: Arc<DomainModel>, values: Vec<f64>) -> Result<Self, OperatorError> {
        if values.len() != domain.interior_count() {
            return Err(OperatorError::SizeMismatch {
                expected: domain.interior_count(),
                got: values.len(),
            });
        }
        Ok(Field { domain, values })
    }

    pub fn constant(domain: &Arc<DomainModel>, value: f64) -> Self {
        Field {
            domain: Arc::clone(domain),
            values: vec![value; domain.interior_count()],
        }
    }

    pub fn zeros(domain: &Arc<DomainModel>) -> Self {
        Self::constant(domain, 0.0)
    }

    /// Samples `f(x, y)` at masked cell centers.
    pub fn from_fn(domain: &Arc<DomainModel>, f: impl Fn(f64, f64) -> f64) -> Self {
        let grid = domain.grid();
        let values = domain
            .masked_cells()
            .map(|(i, j)| {
                let (x, y) = grid.cell_center(i, j);
                f(x, y)
            })
            .collect();
        Field {
            domain: Arc::clone(domain),
            values,
        }
    }

    pub fn domain(&self) -> &Arc<DomainModel> {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// Discrete L2 norm with the cell-area weight.
    pub fn l2_norm(&self) -> f64 {
        let h = self.domain.grid().h;
        let s: f64 = self.values.iter().map(|&v| v * v).sum();
        (s * h * h).sqrt()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    /// Value at the masked cell `(i, j)`, if masked.
    pub fn at_cell(&self, i: usize, j: usize) -> Option<f64> {
        self.domain.unknown_index(i, j).map(|k| self.values[k])
    }

    /// CSV rows `i,j,value` for masked cells. Values round-trip exactly.
    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "i,j,value")?;
        for (k, (i, j)) in self.domain.masked_cells().enumerate() {
            writeln!(w, "{},{},{}", i, j, self.values[k])?;
        }
        Ok(())
    }

    /// Reads the CSV form back over the same domain.
    pub fn read_csv(domain: &Arc<DomainModel>, r: &mut impl BufRead) -> std::io::Result<Self> {
        let mut values = vec![f64::NAN; domain.interior_count()];
        let mut lines = r.lines();
        let header = lines.next().transpose()?.unwrap_or_default();
        if header.trim() != "i,j,value" {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("bad field header {header:?}"),
            ));
        }
        for line in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let parse = |s: Option<&str>| {
                s.and_then(|t| t.trim().parse::<f64>().ok()).ok_or_else(|| {
                    std::io::Error::new(std::io::ErrorKind::InvalidData, format!("bad row {line:?}"))
                })
            };
            let i = parse(parts.next())? as usize;
            let j = parse(parts.next())? as usize;
            let v = parse(parts.next())?;
            let k = domain.unknown_index(i, j).ok_or_else(|| {
                std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("cell ({i}, {j}) is not masked"),
                )
            })?;
            values[k] = v;
        }
        Ok(Field {
            domain: Arc::clone(domain),
            values,
        })
    }

    /// Raw dump: 16-byte header (nx, ny as little-endian u64) followed by
    /// the full nx*ny grid of little-endian f64 in row-major order;
    /// unmasked cells hold NaN.
    pub fn write_raw(&self, w: &mut impl Write) -> std::io::Result<()> {
        let g = self.domain.grid();
        w.write_all(&(g.nx as u64).to_le_bytes())?;
        w.write_all(&(g.ny as u64).to_le_bytes())?;
        for j in 0..g.ny {
            for i in 0..g.nx {
                let v = self.at_cell(i, j).unwrap_or(f64::NAN);
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Reads the raw dump back over the same domain.
    pub fn read_raw(domain: &Arc<DomainModel>, r: &mut impl Read) -> std::io::Result<Self> {
        let g = domain.grid();
        let mut u64buf = [0u8; 8];
        r.read_exact(&mut u64buf)?;
        let nx = u64::from_le_bytes(u64buf) as usize;
        r.read_exact(&mut u64buf)?;
        let ny = u64::from_le_bytes(u64buf) as usize;
        if nx != g.nx || ny != g.ny {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("grid mismatch: file {nx}x{ny}, domain {}x{}", g.nx, g.ny),
            ));
        }
        let mut values = vec![0.0; domain.interior_count()];
        for j in 0..ny {
            for i in 0..nx {
                r.read_exact(&mut u64buf)?;
                let v = f64::from_le_bytes(u64buf);
                if let Some(k) = domain.unknown_index(i, j) {
                    values[k] = v;
                }
            }
        }
        Ok(Field {
            domain: Arc::clone(domain),
            values,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_rectangle;

    #[test]
    fn norms_and_sampling() {
        let d = Arc::new(build_rectangle(1.0, 1.0, 0.25, 0.0).unwrap());
        let f = Field::from_fn(&d, |x, _| x);
        assert_eq!(f.len(), 16);
        assert!((f.max() - 0.875).abs() < 1e-15);
        let ones = Field::constant(&d, 1.0);
        assert!((ones.l2_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_roundtrip_exact() {
        let d = Arc::new(build_rectangle(1.0, 1.0, 0.25, 0.0).unwrap());
        let f = Field::from_fn(&d, |x, y| (x * 3.1 + y).sin() / 3.0);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let back = Field::read_csv(&d, &mut buf.as_slice()).unwrap();
        assert_eq!(back.values(), f.values());
    }

    #[test]
    fn raw_roundtrip_exact() {
        let d = Arc::new(build_rectangle(1.0, 0.75, 0.25, 0.0).unwrap());
        let f = Field::from_fn(&d, |x, y| x * y + 0.125);
        let mut buf = Vec::new();
        f.write_raw(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 8 * d.grid().cell_count());
        let back = Field::read_raw(&d, &mut buf.as_slice()).unwrap();
        assert_eq!(back.values(), f.values());
    }
}
