//! Two-level atom coupled to a scalar photon field in the rotating-wave form,
//! truncated to low excitation numbers.

mod basis;
mod model;

pub use basis::{
    enumerate_sectors, multiset_count, sector_dimension, BasisState, FieldOperator, SectorBasis, Spin,
    SpinMatrix, MAX_DIM,
};
pub use model::{DickeModel, DickeSolution};
