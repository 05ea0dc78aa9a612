//! Constitutive laws: free energies, hyperstress, viscosity, mobility, the
//! exponent bookkeeping that ties them together, and a sample-based audit of
//! their structural hypotheses.

pub mod audit;
pub mod exponents;
pub mod free_energy;
pub mod inversion;
pub mod structural;

pub use audit::{
    sample_admissible_deformation, validate_assumptions, AssumptionReport, ClauseRecord, LawSet, SamplingPlan,
};
pub use exponents::{derive_flux_exponent, CaseTag, Clause, ExponentProfile, MaterialExponents, Violation};
pub use free_energy::{
    biot_material, BiotMaterial, BiotParams, CompressibleNeoHookean, FreeEnergy, NeoHookeanEntropy,
    NeoHookeanEntropyParams,
};
pub use inversion::{invert_chemical_potential, invert_chemical_potential_with, InversionOptions};
pub use structural::{
    cauchy_green_rate, pull_back_mobility, Hyperstress, IsotropicViscosity, Mobility, PowerHyperstress, PowerMobility,
    ViscousPotential,
};
