//! JSON dumps of bases, vectors and operators for debugging.
//!
//! Occupation tuples are integer arrays; complex numbers are `[re, im]`.

use serde::Serialize;

use super::{FockBasis, FockVector, Sector, SparseOperator};

#[derive(Debug, Serialize)]
pub struct BasisDump {
    pub d: usize,
    pub sector: Sector,
    pub states: Vec<Vec<u16>>,
}

#[derive(Debug, Serialize)]
pub struct VectorDump {
    pub basis: BasisDump,
    pub coeffs: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize)]
pub struct OperatorDump {
    pub basis: BasisDump,
    pub hermitian: bool,
    /// `[row, col, [re, im]]` entries in row-major order.
    pub entries: Vec<(usize, usize, [f64; 2])>,
}

pub fn basis(b: &FockBasis) -> BasisDump {
    BasisDump { d: b.d(), sector: b.sector(), states: b.iter().map(|s| s.to_vec()).collect() }
}

pub fn vector(v: &FockVector) -> VectorDump {
    VectorDump { basis: basis(v.basis()), coeffs: v.coeffs().iter().map(|z| [z.re, z.im]).collect() }
}

pub fn operator(op: &SparseOperator) -> OperatorDump {
    let mut entries = Vec::with_capacity(op.nnz());
    for r in 0..op.dim() {
        for (c, z) in op.row(r) {
            entries.push((r, c, [z.re, z.im]));
        }
    }
    OperatorDump { basis: basis(op.basis()), hermitian: op.is_hermitian(), entries }
}
