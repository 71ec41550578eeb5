//! Geometries, contracted s-type Gaussian basis functions and the
//! closed-form one- and two-electron integrals over them.

mod basis;
mod boys;
mod geometry;
mod integrals;

pub use basis::{sto3g_hydrogen, BasisLibrary, ContractedSGaussian, ElementBasis, Primitive};
pub use boys::boys_f0;
pub use geometry::{chain_geometry, nuclear_repulsion, Atom, Geometry};
pub use integrals::{
    build_ao_integrals, primitive_eri, primitive_kinetic, primitive_nuclear, primitive_overlap,
    AoIntegralSet, EriTensor, GaussianPrimitive,
};
